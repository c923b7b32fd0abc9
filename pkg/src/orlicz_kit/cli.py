"""Command-line front end.

Subcommands: norm, conjugate, delta2, analyze, harness, verify.  Inputs are
JSON descriptor files, output is deterministic JSON on stdout, diagnostics go
to stderr.  Exit codes: 0 success, 1 computation error, 2 hypothesis
violation, 3 configuration error (and nonzero when `verify` finds failures).
Set ORLICZ_KIT_LOG=debug for tracebacks on stderr.
"""
from __future__ import annotations

import json
import os
import sys
import traceback

import click

from . import jsonio
from .errors import ConfigError, HypothesisViolation, OrliczKitError
from .harness import (build_spikes, demo_config, load_run_config,
                      measure_convergence_bound, pairing_decay, run_suite)
from .norms import amemiya_norm, luxemburg_norm
from .operators import analyze as analyze_operator
from .orlicz import OrliczFunction, check_delta2
from .spaces import (MeasureSpace, PieceSet, SimpleFunction, Tau,
                     derive_weight, indicator)
from .intervals import IntervalSet


def _load_json(path: str, what: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{what} file {path!r} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path!r} is not valid JSON: {exc}") from None


def _write(payload: dict, out: str | None) -> None:
    text = jsonio.dumps(payload)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_weight(space: MeasureSpace, tau_path: str | None):
    if not tau_path:
        return None
    return derive_weight(space, Tau.from_descriptor(_load_json(tau_path, "tau")))


@click.group()
def cli() -> None:
    """Orlicz-space numerics: norms, conjugates, operator analysis."""


@cli.command("norm")
@click.option("--space", "space_path", required=True, help="space descriptor JSON")
@click.option("--phi", "phi_path", required=True, help="Orlicz function JSON")
@click.option("--f", "f_path", required=True, help="simple function JSON")
@click.option("--tau", "tau_path", default=None, help="transformation JSON (weighted norm)")
@click.option("--tol", default=1e-10, show_default=True)
@click.option("--out", default=None, help="write the report here instead of stdout")
def norm_cmd(space_path, phi_path, f_path, tau_path, tol, out) -> None:
    """Luxemburg and Amemiya norms of a simple function."""
    space = MeasureSpace.from_descriptor(_load_json(space_path, "space"))
    phi = OrliczFunction.from_descriptor(_load_json(phi_path, "phi"))
    f = SimpleFunction.from_descriptor(space, _load_json(f_path, "f"))
    weight = _load_weight(space, tau_path)
    lux = luxemburg_norm(f, phi, weight=weight, tol=tol)
    ame = amemiya_norm(f, phi, weight=weight)
    _write({
        "schema_version": jsonio.SCHEMA_VERSION,
        "luxemburg": lux.value,
        "amemiya": ame.value,
        "residual": lux.residual,
        "method": lux.method,
        "iterations": lux.iterations,
    }, out)


@cli.command("conjugate")
@click.option("--phi", "phi_path", required=True)
@click.option("--ymax", default=None, type=float, help="tabulation range for the conjugate")
@click.option("--knots", default=129, show_default=True, help="tabulation knot count")
@click.option("--out", default=None)
def conjugate_cmd(phi_path, ymax, knots, out) -> None:
    """Complementary Young function (closed form for powers, else tabulated)."""
    from .orlicz import conjugate
    phi = OrliczFunction.from_descriptor(_load_json(phi_path, "phi"))
    psi = conjugate(phi, y_max=ymax, n_knots=knots)
    _write({"schema_version": jsonio.SCHEMA_VERSION,
            "conjugate": psi.to_descriptor()}, out)


@cli.command("delta2")
@click.option("--phi", "phi_path", required=True)
@click.option("--out", default=None)
def delta2_cmd(phi_path, out) -> None:
    """Doubling-condition probe report for an Orlicz function."""
    phi = OrliczFunction.from_descriptor(_load_json(phi_path, "phi"))
    rep = check_delta2(phi)
    payload = {"schema_version": jsonio.SCHEMA_VERSION}
    payload.update(rep.to_dict())
    _write(payload, out)


@cli.command("analyze")
@click.option("--space", "space_path", required=True)
@click.option("--phi", "phi_path", required=True)
@click.option("--u", "u_path", required=True, help="operator symbol JSON")
@click.option("--tau", "tau_path", default=None)
@click.option("--eps", multiple=True, type=float, help="level-set probes (repeatable)")
@click.option("--require-hypotheses", is_flag=True,
              help="exit 2 when the doubling/superlinearity hypotheses fail")
@click.option("--out", default=None)
def analyze_cmd(space_path, phi_path, u_path, tau_path, eps, require_hypotheses, out) -> None:
    """Multiplication-operator report: norm, compactness, invertibility."""
    space = MeasureSpace.from_descriptor(_load_json(space_path, "space"))
    phi = OrliczFunction.from_descriptor(_load_json(phi_path, "phi"))
    u = SimpleFunction.from_descriptor(space, _load_json(u_path, "u"))
    weight = _load_weight(space, tau_path)
    report = analyze_operator(u, phi, weight=weight,
                              eps_list=list(eps) if eps else None)
    _write(report.to_dict(), out)
    if require_hypotheses and report.completely_continuous.startswith("conditional"):
        raise HypothesisViolation(
            "the compactness/complete-continuity equivalence needs the "
            "doubling condition and superlinear growth")


@cli.command("harness")
@click.argument("op", type=click.Choice(["spikes", "pairing", "lemma"]))
@click.option("--space", "space_path", required=True)
@click.option("--phi", "phi_path", required=True)
@click.option("--e0", "e0_path", default=None, help="start piece-set JSON (default: left half of the segment)")
@click.option("--f", "f_path", default=None, help="piece-set JSON paired against the spikes")
@click.option("--tau", "tau_path", default=None)
@click.option("--nmax", default=12, show_default=True)
@click.option("--eps", multiple=True, type=float)
@click.option("--out", default=None)
def harness_cmd(op, space_path, phi_path, e0_path, f_path, tau_path, nmax, eps, out) -> None:
    """Expose the proof-machinery constructions with JSON output."""
    space = MeasureSpace.from_descriptor(_load_json(space_path, "space"))
    phi = OrliczFunction.from_descriptor(_load_json(phi_path, "phi"))
    if e0_path:
        e0 = PieceSet.from_descriptor(space, _load_json(e0_path, "e0"))
    else:
        if space.segment is None:
            raise ConfigError("the harness needs a segment (or an explicit --e0)")
        e0 = PieceSet(space, cells=IntervalSet.span(0, space.n_cells // 2))
    if op == "spikes":
        seq = build_spikes(space, e0, phi, nmax)
        from .spaces import measure
        _write({
            "schema_version": jsonio.SCHEMA_VERSION,
            "measures": [float(measure(seq.space, s)) for s in seq.sets],
            "heights": seq.heights,
            "norms": seq.norms,
        }, out)
        return
    if op == "pairing":
        seq = build_spikes(space, e0, phi, nmax)
        against = (PieceSet.from_descriptor(seq.space, _load_json(f_path, "f"))
                   if f_path else e0.lift(seq.space))
        decay = pairing_decay(seq, against, phi)
        _write({
            "schema_version": jsonio.SCHEMA_VERSION,
            "pairings": decay.pairings,
            "bounds": decay.bounds,
            "superlinear": decay.superlinear,
        }, out)
        return
    # lemma: norm convergence controls convergence in measure
    if not tau_path:
        raise ConfigError("the lemma harness needs --tau")
    weight = _load_weight(space, tau_path)
    eps0 = eps[0] if eps else 0.25
    base = SimpleFunction.zero(space)
    perturb = indicator(e0)
    f_seq = [base.add(perturb.scale(2.0 * eps0 * 2.0 ** (-n))) for n in range(1, nmax + 1)]
    pairs = measure_convergence_bound(f_seq, base, phi, weight, eps0)
    _write({
        "schema_version": jsonio.SCHEMA_VERSION,
        "eps": eps0,
        "measured": [m for m, _ in pairs],
        "bounds": [b for _, b in pairs],
    }, out)


@cli.command("verify")
@click.option("--config", "config_path", default=None,
              help="run-config JSON (default: the built-in demo)")
@click.option("--seed", default=None, type=int, help="override the config seed")
@click.option("--nmax", default=None, type=int)
@click.option("--out", default=None)
def verify_cmd(config_path, seed, nmax, out) -> None:
    """Run the full invariant suite; nonzero exit on any failure."""
    config = _load_json(config_path, "config") if config_path else demo_config()
    space, phi, u, tau, cfg_seed, cfg_nmax = load_run_config(config)
    report = run_suite(space, phi, u, tau,
                       seed=cfg_seed if seed is None else seed,
                       n_max=cfg_nmax if nmax is None else nmax)
    _write(report.to_dict(), out)
    failed = report.failed
    for check in failed:
        click.echo(f"FAIL {check.check_id}: {check.notes}", err=True)
    if failed:
        raise OrliczKitError(f"{len(failed)} suite check(s) failed")


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return 3
    except HypothesisViolation as exc:
        click.echo(f"hypothesis violation: {exc}", err=True)
        return 2
    except click.UsageError as exc:
        click.echo(f"usage error: {exc}", err=True)
        return 3
    except click.exceptions.Abort:
        return 1
    except OrliczKitError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        if os.environ.get("ORLICZ_KIT_LOG", "").lower() == "debug":
            traceback.print_exc()
        click.echo(f"internal error: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""CLI end-to-end: dispatch, JSON round-trips, exit codes, determinism."""
import json
import subprocess
import sys

import pytest

from orlicz_kit.cli import main


@pytest.fixture()
def descriptors(tmp_path):
    paths = {}

    def write(name, payload):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(payload))
        paths[name] = str(p)

    write("space", {"atoms": [{"id": "a1", "mass": 0.5}, {"id": "a2", "mass": 0.5}],
                    "segment": {"length": 1.0, "depth": 3}})
    write("phi", {"family": "power", "p": 2.0, "c": 1.0})
    write("f", {"atoms": {"a1": 3.0}})
    write("u_segment", {"cells": [[0, 8, 1.0]]})
    write("tau", {"atoms": {"a1": "a2", "a2": "a2"}})
    return paths


def run_cli(args, capsys):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


class TestNorm:
    def test_dispatch(self, descriptors, capsys):
        code, out, _ = run_cli(["norm", "--space", descriptors["space"],
                                "--phi", descriptors["phi"], "--f", descriptors["f"]], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["luxemburg"] == pytest.approx(3.0 / (2.0 ** 0.5), rel=1e-9)
        assert payload["method"] == "bisection"
        assert payload["schema_version"] == 1

    def test_weighted(self, descriptors, capsys):
        code, out, _ = run_cli(["norm", "--space", descriptors["space"],
                                "--phi", descriptors["phi"], "--f", descriptors["f"],
                                "--tau", descriptors["tau"]], capsys)
        assert code == 0
        # weight vanishes on the support of f
        assert json.loads(out)["luxemburg"] == 0.0


class TestConjugateAndDelta2:
    def test_conjugate_power(self, descriptors, capsys):
        code, out, _ = run_cli(["conjugate", "--phi", descriptors["phi"]], capsys)
        assert code == 0
        desc = json.loads(out)["conjugate"]
        assert desc["family"] == "power"
        assert desc["p"] == 2.0 and desc["c"] == 0.25

    def test_delta2_report(self, descriptors, capsys):
        code, out, _ = run_cli(["delta2", "--phi", descriptors["phi"]], capsys)
        assert code == 0
        rep = json.loads(out)
        assert rep["verdict"] == "holds"
        assert rep["k_estimate"] == pytest.approx(4.0, abs=1e-6)


class TestAnalyze:
    def test_segment_symbol_not_compact_exit_zero(self, descriptors, capsys):
        code, out, _ = run_cli(["analyze", "--space", descriptors["space"],
                                "--phi", descriptors["phi"],
                                "--u", descriptors["u_segment"]], capsys)
        assert code == 0
        rep = json.loads(out)
        assert rep["compact"] == "not_compact"
        assert rep["operator_norm"] == 1.0

    def test_require_hypotheses_exit_two(self, descriptors, tmp_path, capsys):
        exp = tmp_path / "exp.json"
        exp.write_text(json.dumps({"family": "exp_minus"}))
        code, _, err = run_cli(["analyze", "--space", descriptors["space"],
                                "--phi", str(exp), "--u", descriptors["u_segment"],
                                "--require-hypotheses"], capsys)
        assert code == 2
        assert "hypothesis" in err


class TestHarness:
    def test_spikes(self, descriptors, capsys):
        code, out, _ = run_cli(["harness", "spikes", "--space", descriptors["space"],
                                "--phi", descriptors["phi"], "--nmax", "5"], capsys)
        assert code == 0
        rep = json.loads(out)
        assert rep["measures"] == [0.5, 0.25, 0.125, 0.0625, 0.03125]
        for nv in rep["norms"]:
            assert nv == pytest.approx(1.0, abs=1e-8)

    def test_pairing(self, descriptors, capsys):
        code, out, _ = run_cli(["harness", "pairing", "--space", descriptors["space"],
                                "--phi", descriptors["phi"], "--nmax", "4"], capsys)
        assert code == 0
        rep = json.loads(out)
        assert rep["superlinear"] is True
        assert all(p <= b + 1e-12 for p, b in zip(rep["pairings"], rep["bounds"]))

    def test_lemma(self, descriptors, tmp_path, capsys):
        ident = tmp_path / "ident.json"
        ident.write_text(json.dumps({}))
        code, out, _ = run_cli(["harness", "lemma", "--space", descriptors["space"],
                                "--phi", descriptors["phi"], "--tau", str(ident),
                                "--nmax", "6"], capsys)
        assert code == 0
        rep = json.loads(out)
        assert all(m <= b + 1e-10 for m, b in zip(rep["measured"], rep["bounds"]))


class TestVerify:
    def test_default_demo_passes(self, capsys):
        code, out, _ = run_cli(["verify", "--seed", "7", "--nmax", "8"], capsys)
        assert code == 0
        rep = json.loads(out)
        assert all(c["status"] in ("pass", "skipped") for c in rep["checks"])

    def test_byte_identical_runs(self, capsys):
        _, out1, _ = run_cli(["verify", "--seed", "7", "--nmax", "8"], capsys)
        _, out2, _ = run_cli(["verify", "--seed", "7", "--nmax", "8"], capsys)
        assert out1 == out2


class TestExitCodes:
    def test_missing_file_is_config_error(self, descriptors, capsys):
        code, _, err = run_cli(["norm", "--space", "nope.json",
                                "--phi", descriptors["phi"], "--f", descriptors["f"]], capsys)
        assert code == 3
        assert "not found" in err

    def test_malformed_json_is_config_error(self, descriptors, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _, err = run_cli(["norm", "--space", str(bad),
                                "--phi", descriptors["phi"], "--f", descriptors["f"]], capsys)
        assert code == 3
        assert "bad.json" in err

    def test_unknown_flag_is_usage_error(self, capsys):
        code, _, _ = run_cli(["norm", "--frobnicate"], capsys)
        assert code == 3

    def test_bad_field_is_config_error(self, descriptors, tmp_path, capsys):
        bad = tmp_path / "badspace.json"
        bad.write_text(json.dumps({"atoms": [{"id": "a", "mass": -2.0}]}))
        code, _, err = run_cli(["norm", "--space", str(bad),
                                "--phi", descriptors["phi"], "--f", descriptors["f"]], capsys)
        assert code == 3
        assert "mass" in err


def test_entry_point_subprocess(tmp_path):
    """The installed console script behaves like main()."""
    proc = subprocess.run([sys.executable, "-m", "orlicz_kit.cli", "verify",
                           "--seed", "3", "--nmax", "6"],
                          capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0
    json.loads(proc.stdout)

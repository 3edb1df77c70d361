"""End-to-end tests for the slicedmk command line."""

import json

import pytest

from slicedmk.barycenter import BarycenterProblem
from slicedmk.cli import EXIT_INPUT, EXIT_OK, EXIT_RESOURCE, main
from slicedmk.ledger import RunLedger
from slicedmk.measures import DiscreteMeasure
from slicedmk.sphere import circle_grid


@pytest.fixture
def measure_files(tmp_path, pair_2d):
    mu, nu = pair_2d
    mu.save(tmp_path / "mu.json")
    nu.save(tmp_path / "nu.json")
    return str(tmp_path / "mu.json"), str(tmp_path / "nu.json")


@pytest.fixture
def run(tmp_path, ledger_path):
    """Invoke main() with a throwaway ledger and output directory."""

    def invoke(*argv, out="out"):
        return main(["--ledger", str(ledger_path), "--out-dir", str(tmp_path / out), *argv])

    return invoke


def test_no_command_prints_help(capsys):
    assert main([]) == EXIT_OK
    assert "slicedmk" in capsys.readouterr().out


def test_distance_writes_payload_and_manifest(run, tmp_path, ledger_path, measure_files):
    assert run("distance", *measure_files, "--dirs", "circle:64") == EXIT_OK

    out = tmp_path / "out"
    payload = json.loads((out / "distance.json").read_text())
    assert payload["dirs"] == "circle:64"
    assert payload["aggregate"] > 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "distance"
    assert set(manifest["artifacts"]) == {"distance.json"}
    assert manifest["seeds"] == {"seed": 42}

    run_row = RunLedger(ledger_path).get_recent_runs()[0]
    assert run_row["exit_code"] == 0
    assert run_row["manifest_path"] == str(out / "manifest.json")


def test_reruns_are_byte_identical(run, tmp_path, measure_files):
    for out in ("first", "second"):
        assert run("--seed", "7", "distance", *measure_files, "--q", "inf", out=out) == EXIT_OK
    first, second = tmp_path / "first", tmp_path / "second"
    for name in ("distance.json", "manifest.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_missing_input_is_an_input_error(run, tmp_path, ledger_path):
    assert run("distance", str(tmp_path / "nope.json"), str(tmp_path / "nope.json")) == EXIT_INPUT
    ledger = RunLedger(ledger_path)
    assert ledger.get_recent_errors()[0]["command"] == "distance"
    assert ledger.get_recent_runs()[0]["exit_code"] == EXIT_INPUT


def test_malformed_measure_is_an_input_error(run, tmp_path, measure_files):
    bad = tmp_path / "bad.json"
    bad.write_text('{"points": [[0, 0]]}')
    assert run("distance", str(bad), measure_files[1]) == EXIT_INPUT


def test_resource_cap_exit_code(run):
    assert run("separation", "--Ns", "2000", "--trials", "1") == EXIT_RESOURCE


def test_argparse_rejects_bad_values(run, measure_files):
    with pytest.raises(SystemExit) as exc:
        run("verify", "bogus")
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run("distance", *measure_files, "--p", "0.5")
    assert exc.value.code == 2


def test_constant(run, tmp_path):
    assert run("constant", "--q", "inf") == EXIT_OK
    payload = json.loads((tmp_path / "out" / "constant.json").read_text())
    assert payload == {"q": "inf", "n": 2, "dirset_id": "circle:720", "m": 1.0}
    assert run("constant", "--n", "1") == EXIT_INPUT


def test_certificate(run, tmp_path, measure_files):
    assert run("certificate", *measure_files, "--dirs", "circle:32", "--q", "4") == EXIT_OK
    check = json.loads((tmp_path / "out" / "certificate_check.json").read_text())
    assert check["admissible"] and check["norm_ok"]
    assert check["dirset_id"] == "circle:32"
    assert (tmp_path / "out" / "certificate.json").exists()


def test_verify_records_checks(run, tmp_path, ledger_path):
    assert run("verify", "remark") == EXIT_OK
    result = json.loads((tmp_path / "out" / "verify_remark.json").read_text())
    assert result["passed"] is True

    ledger = RunLedger(ledger_path)
    run_id = ledger.get_recent_runs()[0]["id"]
    assert len(ledger.get_checks(run_id)) == len(result["checks"])


def test_failing_suite_exits_one(run):
    assert run("verify", "nongeodesic", "--q", "inf") == 1


def test_verify_with_zero_seeds_is_an_input_error(run, tmp_path):
    assert run("verify", "duality", "--seeds", "0") == EXIT_INPUT
    assert not (tmp_path / "out" / "verify_duality.json").exists()


def test_rates(run, tmp_path):
    assert run("rates", "--Ns", "8,16", "--trials", "2") == EXIT_OK
    out = tmp_path / "out"
    summary = json.loads((out / "rates.json").read_text())
    assert summary["dirs"] == "circle:64"
    assert "SlicedPQ(p=2,q=2)" in summary["fits"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["artifacts"]) == {"rates.json", "rates.csv"}


def test_barycenter_with_oracle(run, tmp_path):
    problem = BarycenterProblem(
        [DiscreteMeasure.dirac([0.0, 0.0]), DiscreteMeasure.dirac([2.0, 0.0])],
        [0.5, 0.5], p=2.0, q=2.0, kappa=2.0, support_size=1, dirs=circle_grid(32),
    )
    problem.save(tmp_path / "problem.json")
    assert run("barycenter", str(tmp_path / "problem.json"), "--iters", "20", "--oracle") == 0

    out = tmp_path / "out"
    payload = json.loads((out / "barycenter.json").read_text())
    assert payload["objective"] == pytest.approx(0.5, abs=1e-9)
    assert payload["oracle"]["excess"] == pytest.approx(0.0, abs=1e-5)
    assert (out / "trace.csv").read_text().startswith("iteration,objective,step")


def test_history(run, measure_files, ledger_path):
    run("distance", *measure_files)
    run("distance", "missing.json", "missing.json")
    assert run("history", "--errors") == EXIT_OK
    assert len(RunLedger(ledger_path).get_recent_runs()) == 2
    assert run("history", "--limit", "0") == EXIT_INPUT

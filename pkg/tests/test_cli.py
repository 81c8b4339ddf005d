"""Command-line interface: formats, exit codes, stream discipline."""

import csv
import io
import json
import math

import pytest

from dualrisk import cli
from dualrisk.errors import NumericsError

CLASSIC_SPEC = """
{"eta": {"family": "constant", "c": 1.0},
 "lambda": {"family": "constant", "c": 2.0},
 "gamma": 1.0}
"""
SLOW_SPEC = """
{"eta": {"family": "constant", "c": 1.0},
 "lambda": {"family": "constant", "c": 0.5},
 "gamma": 1.0}
"""
AFFINE_SPEC = """
{"eta": {"family": "affine", "a": 1.0, "b": 0.5},
 "lambda": {"family": "affine", "a": 1.0, "b": 0.2},
 "gamma": 1.0}
"""
POWER_SPEC = """
{"eta": {"family": "constant", "c": 1.0},
 "lambda": {"family": "power_shift", "alpha": 1.0, "beta": 1.5, "gamma0": 1.0},
 "gamma": 1.0}
"""
BAD_GAMMA_SPEC = CLASSIC_SPEC.replace('"gamma": 1.0', '"gamma": -1.0')


@pytest.fixture
def spec_file(tmp_path):
    def write(text, name="model.spec"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def records_of(argv):
    code, out, err = invoke(argv + ["--format", "json-lines"])
    assert code == 0, err
    return [json.loads(line) for line in out.splitlines()]


class TestExitCodes:
    def test_success_is_zero(self, spec_file):
        code, out, err = invoke(
            ["ruin", "--model", spec_file(CLASSIC_SPEC), "--u", "3"])
        assert code == 0
        assert err == ""

    def test_usage_errors_are_two(self, capsys):
        assert invoke(["ruin"])[0] == 2
        assert invoke([])[0] == 2
        assert invoke(["table", "--id", "5"])[0] == 2
        assert invoke(["no-such-command"])[0] == 2
        capsys.readouterr()

    def test_help_exits_zero(self, capsys):
        assert invoke(["--help"])[0] == 0
        capsys.readouterr()

    def test_invalid_model_is_three(self, spec_file):
        code, out, err = invoke(
            ["ruin", "--model", spec_file(BAD_GAMMA_SPEC), "--u", "1"])
        assert code == 3
        assert "gamma" in err
        assert out == ""

    def test_missing_model_file_is_three(self, tmp_path):
        code, out, err = invoke(
            ["ruin", "--model", str(tmp_path / "absent.spec"), "--u", "1"])
        assert code == 3
        assert out == ""

    def test_malformed_json_is_three(self, spec_file):
        code, out, err = invoke(
            ["ruin", "--model", spec_file("{not json"), "--u", "1"])
        assert code == 3
        assert "line" in err

    def test_domain_error_is_three(self, spec_file):
        code, out, err = invoke(
            ["dividend", "--model", spec_file(CLASSIC_SPEC),
             "--u", "2", "--b", "1"])
        assert code == 3
        assert out == ""

    def test_numerical_failure_is_four(self, spec_file, monkeypatch):
        def explode(model, u):
            raise NumericsError("did not converge")

        monkeypatch.setattr("dualrisk.cli.ruin_probability", explode)
        code, out, err = invoke(
            ["ruin", "--model", spec_file(CLASSIC_SPEC), "--u", "1"])
        assert code == 4
        assert "did not converge" in err
        assert out == ""


class TestRuinCommand:
    def test_human_output_quotes_four_decimals(self, spec_file):
        code, out, err = invoke(
            ["ruin", "--model", spec_file(CLASSIC_SPEC), "--u", "3"])
        assert code == 0
        assert "psi=0.0498" in out
        assert "method=quadrature" in out

    def test_machine_output_carries_full_precision(self, spec_file):
        records = records_of(
            ["ruin", "--model", spec_file(CLASSIC_SPEC), "--u", "3"])
        assert records[0]["psi"] == pytest.approx(math.exp(-3.0), rel=1e-9)
        assert records[0]["error_estimate"] >= 0.0

    def test_closed_form_row_appears_when_available(self, spec_file):
        records = records_of(
            ["ruin", "--model", spec_file(CLASSIC_SPEC), "--u", "2"])
        methods = [r["method"] for r in records]
        assert "quadrature" in methods
        assert any(m.startswith("closed_form") for m in methods)


class TestDividendCommand:
    def test_statistics_fields(self, spec_file):
        record, = records_of(
            ["dividend", "--model", spec_file(CLASSIC_SPEC),
             "--u", "1", "--b", "2"])
        assert record["phi"] == pytest.approx(0.67799916322304643, rel=1e-8)
        assert record["expected_count"] == pytest.approx(9.3415485409432275,
                                                         rel=1e-8)
        assert "total_transform" not in record

    def test_theta_adds_the_transform(self, spec_file):
        record, = records_of(
            ["dividend", "--model", spec_file(CLASSIC_SPEC),
             "--u", "1", "--b", "2", "--theta", "1"])
        assert record["total_transform"] == pytest.approx(math.exp(-1.0),
                                                          rel=1e-6)


class TestMomentsCommand:
    def test_affine_model_moments(self, spec_file):
        record, = records_of(
            ["moments", "--model", spec_file(AFFINE_SPEC),
             "--u", "2", "--t", "0.6931471805599453"])
        assert record["mean"] == pytest.approx(1.624504792712471, rel=1e-10)
        assert record["second_moment"] == pytest.approx(4.179831812843734,
                                                        rel=1e-10)
        assert record["variance"] == pytest.approx(
            record["second_moment"] - record["mean"] ** 2, abs=1e-12)

    def test_non_affine_model_is_rejected(self, spec_file):
        code, out, err = invoke(
            ["moments", "--model", spec_file(POWER_SPEC),
             "--u", "1", "--t", "1"])
        assert code == 3
        assert "affine" in err


class TestTransformCommands:
    def test_laplace_uses_closed_form_when_it_exists(self, spec_file):
        record, = records_of(
            ["laplace", "--model", spec_file(SLOW_SPEC),
             "--u", "1", "--delta", "0.5"])
        assert record["method"] == "closed_form"
        assert record["psi_delta"] == pytest.approx(0.49306869139523979,
                                                    rel=1e-9)

    def test_laplace_falls_back_to_shooting(self, spec_file):
        record, = records_of(
            ["laplace", "--model", spec_file(AFFINE_SPEC),
             "--u", "1", "--delta", "0.5"])
        assert record["method"] == "shooting"
        assert 0.0 < record["psi_delta"] < 1.0

    def test_expected_ruin_time(self, spec_file):
        record, = records_of(
            ["ruin-time", "--model", spec_file(SLOW_SPEC), "--u", "2"])
        assert record["expected_ruin_time"] == pytest.approx(4.0, rel=1e-6)


class TestSimulateCommand:
    def test_reports_error_estimate_and_seed(self, spec_file):
        record, = records_of(
            ["simulate", "--model", spec_file(CLASSIC_SPEC), "--u", "1",
             "--paths", "2000", "--seed", "3"])
        assert 0.0 < record["psi"] < 1.0
        assert record["std_error"] > 0.0
        assert record["ci_low"] < record["psi"] < record["ci_high"]
        assert record["paths"] == 2000
        assert record["seed"] == 3
        assert record["bias_flagged"] is False
        assert record["horizon"] > 0.0

    def test_worker_count_does_not_change_the_numbers(self, spec_file):
        path = spec_file(CLASSIC_SPEC)
        base = ["simulate", "--model", path, "--u", "1",
                "--paths", "2000", "--seed", "3"]
        one, = records_of(base + ["--workers", "1"])
        four, = records_of(base + ["--workers", "4"])
        assert one == four

    def test_explicit_horizon_is_respected(self, spec_file):
        record, = records_of(
            ["simulate", "--model", spec_file(CLASSIC_SPEC), "--u", "1",
             "--paths", "500", "--seed", "1", "--horizon", "2.0"])
        assert record["horizon"] == 2.0
        assert record["bias_flagged"] is True


class TestTableCommand:
    def test_critical_grid_matches_published_values(self, spec_file):
        records = records_of(["table", "--id", "4"])
        assert len(records) == 25
        for record in records:
            assert abs(record["closed_form"] - record["printed"]) < 5.05e-5
            assert abs(record["closed_form"] - record["quadrature"]) < 1e-8
        cell = next(r for r in records if r["beta"] == 2.0 and r["u"] == 2.0)
        assert round(cell["closed_form"], 4) == 0.2222

    def test_power_grid_reports_published_values_side_by_side(self):
        records = records_of(["table", "--id", "3"])
        assert len(records) == 25
        for record in records:
            assert abs(record["closed_form"] - record["quadrature"]) < 1e-8
        cell = next(r for r in records if r["beta"] == 0.5 and r["u"] == 1.0)
        assert cell["printed"] == 0.4325
        assert abs(cell["closed_form"] - cell["printed"]) > 1e-3
        for record in records:
            if record["beta"] == 0.0:
                assert abs(record["closed_form"] - record["printed"]) < 5.05e-5

    def test_csv_and_json_lines_encode_identical_numbers(self):
        code, csv_text, _ = invoke(["table", "--id", "4", "--format", "csv"])
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(csv_text)))
        records = records_of(["table", "--id", "4"])
        assert len(rows) == len(records)
        for row, record in zip(rows, records):
            assert set(row) == set(record)
            for key, value in record.items():
                assert float(row[key]) == float(value)

    def test_human_format_prints_four_decimals(self):
        code, out, _ = invoke(["table", "--id", "4"])
        assert code == 0
        blocks = out.strip().split("\n\n")
        assert len(blocks) == 25
        assert "closed_form=0.2222" in blocks[6]


class TestReportCommand:
    def test_writes_grids_and_figures(self, tmp_path):
        out_dir = tmp_path / "report"
        records = records_of(["report", "--out", str(out_dir)])
        names = sorted(p.name for p in out_dir.iterdir())
        assert names == ["table3.csv", "table3.png", "table4.csv",
                         "table4.png"]
        kinds = {r["file"].rsplit("/", 1)[-1]: r["kind"] for r in records}
        assert kinds["table3.csv"] == "csv"
        assert kinds["table4.png"] == "figure"
        for name in ("table3.png", "table4.png"):
            assert (out_dir / name).read_bytes()[:4] == b"\x89PNG"
        with open(out_dir / "table3.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 25
        assert rows[0].keys() == {"beta", "u", "printed", "closed_form",
                                  "quadrature"}
        u1 = [float(r["closed_form"]) for r in rows if r["u"] == "1"]
        assert len(u1) == 5


class TestStreamDiscipline:
    def test_errors_never_reach_the_data_stream(self, spec_file):
        code, out, err = invoke(
            ["ruin", "--model", spec_file(BAD_GAMMA_SPEC), "--u", "1"])
        assert out == ""
        assert err != ""

    def test_results_never_reach_the_diagnostic_stream(self, spec_file):
        code, out, err = invoke(
            ["ruin", "--model", spec_file(CLASSIC_SPEC), "--u", "1"])
        assert err == ""
        assert out != ""

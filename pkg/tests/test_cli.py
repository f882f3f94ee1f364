import json

import numpy as np
import pytest

from emdapprox.closepairs.close_pairs import classify_vertices
from emdapprox.commands import CommandRegistry, fitted_exponent, run_command, total_variation
from emdapprox.core.exceptions import InputError
from emdapprox.models import RunConfig
from emdapprox.oracles.exact import exact_emd
from emdapprox.utils.io import save_points
from main import main


@pytest.fixture
def pair_files(tmp_path, small_pair):
    X, Y = small_pair
    return str(save_points(X, tmp_path / "x.txt")), str(save_points(Y, tmp_path / "y.txt"))


def _run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_exact_command(capsys, pair_files, small_pair):
    x, y = pair_files
    code, report = _run(capsys, "exact", "--x", x, "--y", y, "--no-timings")
    assert code == 0
    assert report["command"] == "exact"
    assert report["result"]["emd"] == pytest.approx(exact_emd(*small_pair))
    assert "timings" not in report


def test_exact_command_with_supply(capsys, tmp_path):
    x = save_points(np.array([[0.0], [1.0], [5.0], [6.0]]), tmp_path / "line.txt")
    b = tmp_path / "b.txt"
    b.write_text("2\n-1\n1\n-2\n")
    code, report = _run(capsys, "exact", "--x", str(x), "--b", str(b))
    assert code == 0
    assert report["result"]["emd"] == pytest.approx(8.0)
    assert report["result"]["n"] == 4
    assert report["result"]["total_supply"] == 3
    assert "total" in report["timings"]


def test_dimension_mismatch_is_input_error(capsys, tmp_path, pair_files):
    x, _ = pair_files
    y = save_points(np.ones((4, 3)), tmp_path / "y3.txt")
    code, payload = _run(capsys, "exact", "--x", x, "--y", str(y))
    assert code == 2
    assert payload["error"]["type"] == "InputError"
    assert "Dimension mismatch" in payload["error"]["message"]


def test_missing_argument(capsys, pair_files):
    code, payload = _run(capsys, "approx", "--x", pair_files[0])
    assert code == 2
    assert "--y" in payload["error"]["message"]


@pytest.mark.parametrize("flags", [["--eps", "0.7"], ["--phi", "1.5"], ["--oracle", "lsh"], ["--trials", "0"]])
def test_invalid_options(capsys, pair_files, flags):
    x, y = pair_files
    code, payload = _run(capsys, "exact", "--x", x, "--y", y, *flags)
    assert code == 2
    assert payload["error"]["exit_code"] == 2


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        main(["solve"])


def test_report_file_is_reproducible(capsys, tmp_path, pair_files):
    x, y = pair_files
    out = tmp_path / "reports" / "approx.json"
    argv = ["approx", "--x", x, "--y", y, "--seed", "4", "--no-timings", "--out", str(out)]
    assert main(argv) == 0
    first = out.read_text()
    assert main(argv) == 0
    assert out.read_text() == first
    report = json.loads(first)
    assert report["result"]["exact"] > 0
    assert report["result"]["ratio"] == pytest.approx(report["result"]["emd"] / report["result"]["exact"])
    assert all(p["mode"] == "practical" for p in report["result"]["params"])
    assert capsys.readouterr().out == ""


def test_tree_command(capsys, pair_files):
    x, y = pair_files
    code, report = _run(capsys, "tree", "--x", x, "--y", y)
    assert code == 0
    result = report["result"]
    assert result["tree_emd"] > 0
    for part in result["parts"]:
        low, high = part["bracket"]
        assert low <= high
        assert part["distortion_min"] <= part["distortion_max"]


def test_tree_command_on_identical_sets(capsys, pair_files):
    x, _ = pair_files
    code, report = _run(capsys, "tree", "--x", x, "--y", x)
    assert code == 0
    assert report["result"] == {"tree_emd": 0.0, "parts": []}


def test_closepairs_command(capsys, pair_files):
    x, y = pair_files
    code, report = _run(capsys, "closepairs", "--x", x, "--y", y, "--seed", "2")
    assert code == 0
    result = report["result"]
    assert result["sound"]
    assert isinstance(result["heavy_vertices"], int)
    assert result["light_pairs"] + result["heavy_pairs"] == len(result["pairs"])


def test_sample_command(capsys, pair_files):
    x, y = pair_files
    code, report = _run(capsys, "sample", "--x", x, "--y", y, "--samples", "2000")
    assert code == 0
    result = report["result"]
    assert result["samples"] == 2000
    assert len(result["head"]) == 20
    assert all(s in (-1, 1) for _, _, s in result["head"])
    assert 0.0 <= result["tv"] <= 1.0


def test_bench_command_writes_csv(capsys, tmp_path):
    out = tmp_path / "bench.json"
    code = main(["bench", "--sizes", "6", "8", "--trials", "1", "--dim", "2", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["result"]["rows"] == 2
    assert report["result"]["csv"] == str(out.with_suffix(".csv"))
    assert out.with_suffix(".csv").exists()
    assert {row["n"] for row in report["diagnostics"]} == {6, 8}
    assert all(row["ratio"] is None or row["ratio"] > 0 for row in report["diagnostics"])


def test_selftest_command(capsys):
    code, report = _run(capsys, "selftest", "--seed", "1")
    assert code == 0
    assert set(report["result"]["checks"].values()) == {"ok"}


def test_run_command_reports_errors_in_the_result(tmp_path):
    config = RunConfig(command="exact", x=str(tmp_path / "absent.txt"), y=str(tmp_path / "absent.txt"))
    code, report = run_command(config)
    assert code == 2
    assert report.result["error"]["type"] == "InputError"
    assert "total" in report.timings


def test_registry_lists_every_command():
    assert CommandRegistry.list_commands() == sorted(
        ["approx", "bench", "closepairs", "exact", "sample", "selftest", "tree"])
    with pytest.raises(InputError, match="Available"):
        CommandRegistry.get_command("solve")


def test_fitted_exponent():
    sizes = np.array([10, 20, 40])
    assert fitted_exponent(sizes, 3.0 * sizes ** 1.5) == pytest.approx(1.5)
    assert np.isnan(fitted_exponent([10, 10], [1.0, 2.0]))


def test_total_variation():
    probs = np.array([0.5, 0.5])
    assert total_variation(np.array([5, 5]), probs) == 0.0
    assert total_variation(np.array([10, 0]), probs) == 0.5


def test_closepairs_heavy_count_follows_the_configured_fraction(capsys, tmp_path, pair_files, small_pair):
    x, y = pair_files
    X, Y = small_pair
    for fraction in (0.0, 100.0):
        defaults_file = tmp_path / f"heavy_{int(fraction)}.yaml"
        defaults_file.write_text(f"close_pairs:\n  heavy_fraction: {fraction}\n")
        code, report = _run(capsys, "closepairs", "--x", x, "--y", y, "--seed", "2",
                            "--eps", "0.25", "--config", str(defaults_file))
        assert code == 0
        result = report["result"]
        _, heavy = classify_vertices(X, Y, result["t"], result["z"], 0.25, fraction)
        assert result["heavy_vertices"] == int(heavy.sum())
        if fraction == 100.0:
            assert result["heavy_vertices"] == 0

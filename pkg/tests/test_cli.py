import json
import subprocess
import sys

import pytest

from volbench.analysis import GridEntry, VolumetricGrid, lattice_depths, lattice_widths
from volbench.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def fig6_grid(path):
    g = VolumetricGrid("qv")
    for m in range(1, 11):
        g.set(m, m, GridEntry(True, m <= 8, 0.8 if m <= 8 else 0.5, 30))
    path.write_text(g.dumps())
    return str(path)


def test_lattice_output(capsys):
    assert main(["lattice", "--max-w", "13", "--max-d", "16"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out == [
        "widths: " + " ".join(map(str, lattice_widths(13))),
        "depths: " + " ".join(map(str, lattice_depths(16))),
    ]
    assert out[0] == "widths: 1 2 3 4 5 6 7 9 11 13"


def test_lattice_to_file(tmp_path, capsys):
    out = tmp_path / "lat.json"
    assert main(["lattice", "--max-w", "3", "--max-d", "4", "--zero-depth", "--out", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["depths"] == [0, 1, 2, 4] and len(data["shapes"]) == 3 * 4


def test_qv_prints_eight(tmp_path, capsys):
    grid = fig6_grid(tmp_path / "g.json")
    assert main(["qv", "--grid", grid]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "8"
    out = tmp_path / "qv.json"
    assert main(["qv", "--grid", grid, "--out", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    # the region is clipped to the grid's own lattice, here only the diagonal
    assert data["log2_quantum_volume"] == 8
    assert data["implied_region"] == [[m, m] for m in range(1, 9)]


def test_step_by_step_chain(tmp_path, capsys):
    man = tmp_path / "ens.json"
    comp = tmp_path / "comp.json"
    outc = tmp_path / "out.json"
    scores = tmp_path / "scores.json"
    assert main(["generate", "--family", "clifford_rb", "--w", "2", "--d", "4", "--K", "3",
                 "--seed", "1", "--out", str(man)]) == EXIT_OK
    assert main(["compile", "--manifest", str(man), "--out", str(comp)]) == EXIT_OK
    assert main(["simulate", "--manifest", str(comp), "--shots", "300", "--eps2", "0.01",
                 "--out", str(outc)]) == EXIT_OK
    records = json.loads(outc.read_text())
    assert len(records) == 3 and all(r["shots"] == 300 for r in records)
    assert main(["score", "--manifest", str(comp), "--outcomes", str(outc), "--out", str(scores)]) == EXIT_OK
    result = json.loads(scores.read_text())
    assert len(result["circuits"]) == 3 and result["ensemble"]["pass"]


def test_generate_param_and_stdout(capsys):
    assert main(["generate", "--family", "ramsey", "--w", "1", "--d", "3", "--param", "theta=0.25"]) == EXIT_OK
    spec = json.loads(capsys.readouterr().out)
    assert spec["parameters"] == {"theta": 0.25}


def test_predict_report_plot(tmp_path, capsys):
    pred = tmp_path / "pred.json"
    assert main(["predict", "--family", "rabi", "--max-w", "2", "--max-d", "8", "--eps1", "0.05",
                 "--out", str(pred)]) == EXIT_OK
    grid = VolumetricGrid.loads(pred.read_text())
    assert grid.family == "rabi" and len(grid.entries) == 2 * 4
    rep = tmp_path / "rep.json"
    assert main(["report", "--observed", str(pred), "--predicted", str(pred), "--out", str(rep)]) == EXIT_OK
    assert json.loads(rep.read_text()) == {"flags": []}
    svg = tmp_path / "p.svg"
    assert main(["plot", "--grid", str(pred), "--grid", str(pred), "--frontier-only", "--out", str(svg)]) == EXIT_OK
    assert svg.read_text().count('class="frontier"') == 2


def test_run_then_plot(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {
        "benchmark": {"family": "rabi", "seed": 2, "shots": 400},
        "lattice": {"max_w": 1, "max_d": 16},
        "noise": {"eps1": 0.02},
    })
    out = tmp_path / "run"
    assert main(["run", "--config", cfg, "--out", str(out)]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["frontier"]
    for name in ("grid.json", "predicted.json", "report.json", "plot.svg", "config.json"):
        assert (out / name).exists()
    svg = tmp_path / "again.svg"
    assert main(["plot", "--grid", str(out / "grid.json"), "--predicted", str(out / "predicted.json"),
                 "--out", str(svg)]) == EXIT_OK
    assert svg.read_text() == (out / "plot.svg").read_text()


def test_missing_file_is_data_error(tmp_path, capsys):
    assert main(["frontier", "--grid", str(tmp_path / "nope.json")]) == EXIT_DATA
    diag = json.loads(capsys.readouterr().err)
    assert diag["error"] == "VolbenchError"


def test_bad_grid_is_data_error(tmp_path, capsys):
    p = write(tmp_path / "g.json", {"family": "x", "entries": [{"w": 0, "d": 1, "tested": False}]})
    assert main(["qv", "--grid", p]) == EXIT_DATA
    assert json.loads(capsys.readouterr().err)["error"] == "InvalidParameter"


def test_pipeline_error_diagnostic(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {
        "benchmark": {"family": "ramsey", "shots": 10, "params": {"theta": 0.3}},
        "lattice": {"shapes": [[3, 1]]},
        "pipeline": {"width_cap": 2},
    })
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_DATA
    diag = json.loads(capsys.readouterr().err)
    assert diag["error"] == "PipelineError" and diag["shape"] == [3, 1] and diag["index"] == 0


@pytest.mark.parametrize("argv", [
    [],
    ["nosuch"],
    ["lattice"],
    ["generate", "--w", "2", "--d", "2"],
    ["generate", "--family", "qv", "--w", "2", "--d", "2", "--param", "oops"],
    ["run"],
    ["plot", "--grid", "g.json", "--axes", "polar"],
])
def test_usage_errors(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_USAGE


def test_module_entry_point(tmp_path):
    grid = fig6_grid(tmp_path / "g.json")
    res = subprocess.run([sys.executable, "-m", "volbench", "qv", "--grid", grid], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "8"
    res = subprocess.run([sys.executable, "-m", "volbench", "bogus"], capture_output=True, text=True)
    assert res.returncode == EXIT_USAGE

import json
import subprocess
import sys
from pathlib import Path

import pytest

from lqglab.cli import main


def run_cli(args):
    return main(args)


def read_bytes_without_walltime(path: Path):
    """Artifact bytes plus manifest with the wall-time field zeroed."""
    blobs = [path.read_bytes()]
    man = path.with_suffix(path.suffix + ".manifest.json")
    if man.exists():
        doc = json.loads(man.read_text())
        doc["wall_time_s"] = 0.0
        doc.get("config", {}).pop("out", None)  # differs between run dirs
        blobs.append(json.dumps(doc, sort_keys=True).encode())
    return b"|".join(blobs)


@pytest.mark.parametrize("args_fn", [
    lambda d: ["sample-mullin", "--n", "3", "--seed", "7",
               "--out", str(d / "m.pmap")],
    lambda d: ["sample-perc-map", "--l", "1", "--seed", "7",
               "--out", str(d / "p.pmap")],
    lambda d: ["walk-stats", "--stepset", "mullin", "--length", "64",
               "--seed", "3", "--out", str(d / "w.csv")],
    lambda d: ["gmc", "--gamma", "0.5", "--eps", "0.2", "--grid", "9",
               "--seed", "5", "--out", str(d / "g.csv")],
    lambda d: ["backbone", "--tol", "1e-12", "--out", str(d / "b.json")],
    lambda d: ["charges", "--gamma", "1.0", "--out", str(d / "c.json")],
])
def test_commands_byte_deterministic(tmp_path, args_fn):
    d1 = tmp_path / "a"
    d2 = tmp_path / "b"
    d1.mkdir()
    d2.mkdir()
    assert run_cli(args_fn(d1)) == 0
    assert run_cli(args_fn(d2)) == 0
    files1 = sorted(p for p in d1.iterdir() if not p.name.endswith("manifest.json"))
    files2 = sorted(p for p in d2.iterdir() if not p.name.endswith("manifest.json"))
    assert [f.name for f in files1] == [f.name for f in files2]
    for f1, f2 in zip(files1, files2):
        assert read_bytes_without_walltime(f1) == read_bytes_without_walltime(f2)


def test_manifest_written(tmp_path):
    out = tmp_path / "m.pmap"
    assert run_cli(["sample-mullin", "--n", "2", "--seed", "1",
                    "--out", str(out)]) == 0
    man = json.loads((tmp_path / "m.pmap.manifest.json").read_text())
    assert man["command"] == "sample-mullin"
    assert man["seed"] == 1
    assert "version" in man and "wall_time_s" in man and "threads" in man


def test_sample_mullin_artifact_parses(tmp_path):
    out = tmp_path / "m.pmap"
    run_cli(["sample-mullin", "--n", "4", "--seed", "9", "--out", str(out)])
    text = out.read_text()
    from lqglab.planar_map import from_text
    from lqglab.mullin import TreeDecoratedMap
    head, tree_block = text.split("TREE v1")
    m = from_text(head)
    lines = tree_block.strip().splitlines()
    k = int(lines[0])
    edges = [int(x) for x in lines[1:]]
    assert len(edges) == k == m.n_vertices - 1
    TreeDecoratedMap(m, frozenset(edges))


def test_sample_perc_artifact_parses(tmp_path):
    out = tmp_path / "p.pmap"
    run_cli(["sample-perc-map", "--l", "2", "--seed", "4", "--out", str(out)])
    text = out.read_text()
    from lqglab.planar_map import (from_text, colors_from_text,
                                   DiskTriangulation, SiteColoring)
    head, colors_block = text.split("COLORS v1")
    tri = DiskTriangulation(from_text(head))
    colors = colors_from_text("COLORS v1" + colors_block)
    SiteColoring.check_blue_boundary(
        tri, SiteColoring(colors, "monochromatic-blue"))
    assert tri.perimeter == 4


def test_backbone_prints_json(capsys):
    assert run_cli(["backbone", "--tol", "1e-10"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(doc["root"] - 0.3566668367) < 1e-8
    assert abs(doc["residual"]) < 1e-10


def test_charges_prints_json(capsys):
    assert run_cli(["charges", "--gamma", "2.0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(doc["c_M"] - 1.0) < 1e-12


def test_embed_csv_schema(tmp_path):
    out = tmp_path / "e.csv"
    run_cli(["embed-cardy-smirnov", "--in", "lattice", "--lattice-side", "4",
             "--samples", "64", "--seed", "2", "--out", str(out)])
    lines = out.read_text().splitlines()
    assert lines[0] == "vertex,x,y,z,stderr"
    assert len(lines) == 1 + 15


def test_unknown_flag_usage_error():
    with pytest.raises(SystemExit) as exc:
        run_cli(["backbone", "--bogus"])
    assert exc.value.code == 2


def test_runtime_error_json_on_stderr(capsys):
    code = run_cli(["sample-perc-map", "--l", "-3", "--seed", "1",
                    "--out", "/tmp/never.pmap"])
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert "error" in err and "message" in err


def test_console_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "lqglab.cli", "charges",
                           "--gamma", "1.5"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["gamma"] == 1.5


def test_config_file_flags_win(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gamma": 1.0}))
    assert run_cli(["charges", "--config", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["gamma"] == 1.0
    # an explicit flag beats the config value
    assert run_cli(["charges", "--config", str(cfg), "--gamma", "1.5"]) == 0
    assert json.loads(capsys.readouterr().out)["gamma"] == 1.5


def test_gmc_field_dump(tmp_path):
    out = tmp_path / "g.csv"
    fout = tmp_path / "f.csv"
    assert run_cli(["gmc", "--gamma", "0.5", "--eps", "0.2", "--grid", "9",
                    "--seed", "5", "--out", str(out),
                    "--field-out", str(fout)]) == 0
    lines = fout.read_text().splitlines()
    assert lines[0] == "i,j,value"
    assert len(lines) == 1 + 81

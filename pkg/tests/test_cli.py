import csv
import subprocess
import sys

import numpy as np
import pytest

from ssrlsc.cli import main, parse_args, parse_int_list
from ssrlsc.datamodel import load_cube, load_labels, make_synthetic, read_header
from ssrlsc.eig import load_projection


@pytest.fixture
def synth_files(tmp_path):
    prefix = tmp_path / "syn"
    assert main(["synth", "--out", str(prefix), "--seed", "2"]) == 0
    return tmp_path / "syn.hdr", tmp_path / "syn_labels.csv"


def _run_args(files, *extra):
    hdr, labels = files
    return ["run", "--cube", str(hdr), "--labels", str(labels), "--dim", "2,3", "--runs", "2", "--quiet", *extra]


def test_parse_int_list():
    assert parse_int_list("2:10:4") == [2, 6, 10]
    assert parse_int_list("2,4, 7:8") == [2, 4, 7, 8]
    with pytest.raises(Exception):
        parse_int_list("")


def test_synth_writes_expected_cube(synth_files):
    hdr, labels = synth_files
    cube = load_cube(hdr)
    ref_cube, ref_grid = make_synthetic(3, 2, 8, 16, 6.0, 0.5, seed=2)
    assert cube.values.tobytes() == ref_cube.values.tobytes()
    np.testing.assert_array_equal(load_labels(labels, cube.height, cube.width).labels, ref_grid.labels)


def test_convert_and_inspect(synth_files, tmp_path, capsys):
    hdr, labels = synth_files
    dst = tmp_path / "big.hdr"
    assert main(["convert", str(hdr), str(dst), "--dtype", "f32", "--byte-order", "big", "--interleave", "bip"]) == 0
    meta = read_header(dst)
    assert (meta["dtype"], meta["byte_order"], meta["interleave"]) == ("f32", "big", "bip")
    np.testing.assert_allclose(load_cube(dst).values, load_cube(hdr).values, rtol=1e-6)
    capsys.readouterr()
    assert main(["inspect", str(dst), "--labels", str(labels)]) == 0
    out = capsys.readouterr().out
    assert "bands: 16" in out and "classes: 3" in out and "class 2: 128" in out


def test_run_prints_summary_and_writes_csv(synth_files, tmp_path, capsys):
    hdr, labels = synth_files
    out = tmp_path / "r.csv"
    argv = ["run", "--cube", str(hdr), "--labels", str(labels), "--dim", "2", "--runs", "2", "--csv-out", str(out)]
    assert main(argv) == 0
    text = capsys.readouterr().out
    assert "method=ssrlsc" in text and "best: OA" in text
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["axis", "run", "dim", "oa", "aa", "kappa", "seconds"]
    assert [r[1:3] for r in rows[1:]] == [["0", "2"], ["1", "2"]]


def test_run_csv_is_reproducible(synth_files, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(_run_args(synth_files, "--csv-out", str(a))) == 0
    assert main(_run_args(synth_files, "--csv-out", str(b))) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_flag_precedence(synth_files, tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# comment\nmethod = rlsc\nalpha: 0.25\nno_filter = true\nkw = 3\n")
    hdr, labels = synth_files
    args = parse_args(["run", "--cube", str(hdr), "--labels", str(labels), "--config", str(cfg), "--alpha", "0.75"])
    assert args.method == "rlsc" and args.no_filter and args.kw == 3
    assert args.alpha == 0.75


def test_config_unknown_key(synth_files, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    hdr, labels = synth_files
    with pytest.raises(SystemExit, match="unknown config key 'colour'"):
        parse_args(["run", "--cube", str(hdr), "--labels", str(labels), "--config", str(cfg)])


def test_model_out_and_in(synth_files, tmp_path):
    model = tmp_path / "proj.txt"
    first, second = tmp_path / "1.csv", tmp_path / "2.csv"
    assert main(_run_args(synth_files, "--runs", "1", "--model-out", str(model), "--csv-out", str(first))) == 0
    proj = load_projection(model)
    assert (proj.input_dim, proj.output_dim) == (16, 3)
    assert main(_run_args(synth_files, "--runs", "1", "--model-in", str(model), "--csv-out", str(second))) == 0
    assert first.read_bytes() == second.read_bytes()


def test_sweep_command(synth_files, tmp_path, capsys):
    hdr, labels = synth_files
    out = tmp_path / "s.csv"
    argv = ["sweep", "--cube", str(hdr), "--labels", str(labels), "--axis", "window", "--values", "1,3"]
    assert main(argv + ["--dim", "2", "--runs", "1", "--csv-out", str(out)]) == 0
    assert "best OA%" in capsys.readouterr().out
    rows = list(csv.reader(out.open()))
    assert [r[0] for r in rows[1:]] == ["1", "3"]


def test_errors_return_nonzero(synth_files, tmp_path, capsys):
    hdr, labels = synth_files
    assert main(["inspect", str(tmp_path / "missing.hdr")]) == 1
    assert "error" in capsys.readouterr().err
    assert main(_run_args(synth_files, "--train-per-class", "1000")) == 1
    assert "stage 'split'" in capsys.readouterr().err


def test_module_entry_point(synth_files):
    hdr, _ = synth_files
    proc = subprocess.run(
        [sys.executable, "-m", "ssrlsc", "inspect", str(hdr)], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0, proc.stderr
    assert "height: 16" in proc.stdout

import io
import sys
from contextlib import redirect_stdout
from pathlib import Path

import pytest

from barcodetrees.cli import build_config, load_config_file, main
from barcodetrees.realization import class_representative
from barcodetrees.barcodes import dump_barcode_text


BARCODE_TEXT = "0 10\n1 5\n2 7\n"


def run_cli(*argv):
    out = io.StringIO()
    with redirect_stdout(out):
        code = main(list(argv))
    assert code == 0
    return out.getvalue()


@pytest.fixture
def barcode_file(tmp_path):
    path = tmp_path / "barcode.txt"
    path.write_text(BARCODE_TEXT)
    return path


def test_trn_command(barcode_file):
    assert run_cli("trn", str(barcode_file)).strip() == "1"


def test_tns_then_tmd_round_trip(barcode_file, tmp_path):
    swc = tmp_path / "tree.swc"
    run_cli("tns", str(barcode_file), "--lambda", "5", "--seed", "3",
            "--step", "0.05", "--out", str(swc))
    out = run_cli("tmd", str(swc))
    bars = [tuple(map(float, line.split())) for line in out.splitlines()]
    assert len(bars) == 3
    assert bars[0][0] == 0.0
    # steep targeting keeps endpoints near the input
    assert abs(bars[0][1] - 10) < 2.0


def test_tmd_diagram_flag(barcode_file, tmp_path):
    swc = tmp_path / "tree.swc"
    run_cli("tns", str(barcode_file), "--seed", "1", "--out", str(swc))
    out = run_cli("tmd", str(swc), "--diagram")
    assert out.splitlines()[0] == "death,birth"


def test_enumerate_with_trees(tmp_path):
    path = tmp_path / "b.txt"
    path.write_text(dump_barcode_text(class_representative((2, 1, 3))))
    out = run_cli("enumerate", str(path))
    assert out.splitlines() == ["0,0,0", "0,0,1", "0,0,2"]
    outdir = tmp_path / "trees"
    run_cli("enumerate", str(path), "--emit-trees", str(outdir))
    assert len(list(outdir.glob("*.swc"))) == 3


def test_cayley_dot(tmp_path):
    dot = tmp_path / "g.dot"
    run_cli("cayley", "3", "--dot", str(dot))
    assert dot.read_text().startswith("graph cayley_s3 {")


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("master_seed = 5\ntrials = 7\nlambda_grid = 1,2\n# comment\n")
    values = load_config_file(cfg)
    assert values == {"master_seed": "5", "trials": "7", "lambda_grid": "1,2"}

    class Args:
        config = str(cfg)
        master_seed = None
        trials = 9  # flag overrides file
        workers = None
        delta_points = None
        lambda_grid = None
        bottleneck_lambda_grid = None
        epsilon_grid = None
        lam = None
        rho = None
        tau = None
        mu = None
        step = None
        outdir = str(tmp_path)

    config = build_config(Args())
    assert config.master_seed == 5
    assert config.trials == 9
    assert config.lambda_grid == (1.0, 2.0)


def test_env_seed_override(tmp_path, monkeypatch):
    monkeypatch.setenv("BF_SEED", "4242")

    class Args:
        config = None
        master_seed = 1
        trials = None
        workers = None
        delta_points = None
        lambda_grid = None
        bottleneck_lambda_grid = None
        epsilon_grid = None
        lam = None
        rho = None
        tau = None
        mu = None
        step = None
        outdir = None

    assert build_config(Args()).master_seed == 4242


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus = 1\n")
    with pytest.raises(ValueError, match="unknown key"):
        load_config_file(cfg)


def test_experiment_commands_write_csv(barcode_file, tmp_path):
    outdir = tmp_path / "results"
    run_cli("exp-trn-hist", "--n-max", "3", "--outdir", str(outdir))
    text = (outdir / "trn_hist.csv").read_text()
    assert text.splitlines()[1] == "n,trn,count"

    run_cli("exp-transposition", "--trials", "5", "--lambda-grid", "1",
            "--delta-points", "2", "--outdir", str(outdir))
    assert (outdir / "transposition.csv").exists()

    run_cli("exp-death-switch", str(barcode_file), "--bar-i", "1", "--bar-j", "2",
            "--trials", "2", "--outdir", str(outdir))
    assert (outdir / "death_switch.csv").exists()


def test_cli_runs_are_byte_identical(tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    for outdir in (out1, out2):
        run_cli("exp-type-dist", "--trials", "4", "--master-seed", "3",
                "--outdir", str(outdir))
    assert (out1 / "type_dist.csv").read_bytes() == (out2 / "type_dist.csv").read_bytes()

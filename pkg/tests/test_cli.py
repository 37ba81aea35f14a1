import filecmp
import os

import pytest

from factorrace import cli
from factorrace.zeros import MissedZeroError

BASE = ["--xmax", "50000", "--q", "4", "--T", "15", "--T0", "10", "--trials", "1000"]


def run(tmp, cmd, *extra):
    return cli.main([cmd, "--out", str(tmp)] + BASE + list(extra))


def read_data_rows(path):
    with open(path) as fh:
        return [ln for ln in fh if not ln.startswith("#")]


def test_sieve_toy_twist(tmp_path):
    out = tmp_path / "o"
    rc = cli.main(["sieve", "--out", str(out), "--xmax", "10", "--q", "4"])
    assert rc == 0
    rows = read_data_rows(out / "twists.csv")[1:]
    by_idx = {r.split(",")[2]: r.split(",") for r in rows}
    assert by_idx["1"][0] == "10"
    assert float(by_idx["1"][5]) == 1.0  # psi_Omega(10, chi_-4) = 1
    assert float(by_idx["1"][3]) == 0.0  # psi_omega(10, chi_-4) = 0


def test_sieve_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "sieve") == 0
    assert run(b, "sieve") == 0
    for name in ("checkpoints.csv", "twists.csv"):
        assert filecmp.cmp(a / name, b / name, shallow=False)


def test_sieve_xmax_zero_headers_only(tmp_path):
    out = tmp_path / "z"
    assert cli.main(["sieve", "--out", str(out), "--xmax", "0", "--q", "4"]) == 0
    rows = read_data_rows(out / "checkpoints.csv")
    assert rows == ["x,a,S_omega,S_Omega\n"]
    rows = read_data_rows(out / "twists.csv")
    assert len(rows) == 1


def test_zeros_counts_and_idempotence(tmp_path, capsys):
    out = tmp_path / "o"
    assert run(out, "zeros") == 0
    first = (out / "zeros_q4_chi1.csv").read_bytes()
    assert b"count=6" in first
    capsys.readouterr()
    assert run(out, "zeros") == 0
    assert "cached" in capsys.readouterr().out
    assert (out / "zeros_q4_chi1.csv").read_bytes() == first


def test_zeros_t5_empty(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["zeros", "--out", str(out), "--q", "4", "--T", "5", "--T0", "1"]) == 0
    assert b"count=0" in (out / "zeros_q4_chi1.csv").read_bytes()


def test_compare_requires_sieve_output(tmp_path, capsys):
    out = tmp_path / "o"
    assert run(out, "compare") == cli.EXIT_IO
    assert "sieve" in capsys.readouterr().err


def test_compare_requires_zero_cache(tmp_path, capsys):
    out = tmp_path / "o"
    assert run(out, "sieve") == 0
    assert run(out, "compare") == cli.EXIT_IO
    assert "zeros" in capsys.readouterr().err


def test_density_requires_zero_cache(tmp_path, capsys):
    out = tmp_path / "o"
    assert run(out, "density") == cli.EXIT_IO
    assert "zeros" in capsys.readouterr().err


def test_compare_rows_per_checkpoint(tmp_path):
    out = tmp_path / "o"
    assert run(out, "sieve") == 0
    assert run(out, "zeros") == 0
    assert run(out, "compare") == 0
    n_cp = len({ln.split(",")[0] for ln in read_data_rows(out / "checkpoints.csv")[1:]})
    for kind in ("omega", "Omega"):
        rows = read_data_rows(out / f"compare_{kind}_q4_chi1_T10.csv")[1:]
        assert len(rows) == n_cp
    meansq = read_data_rows(out / "meansq.csv")
    assert meansq[0] == "T0,Y,M\n"
    assert len(meansq) == 3  # header + one entry per kind


def test_full_pipeline_and_thread_determinism(tmp_path):
    outs = [tmp_path / n for n in ("a", "b", "c")]
    assert run(outs[0], "all", "--threads", "1") == 0
    assert run(outs[1], "all", "--threads", "1") == 0
    assert run(outs[2], "all", "--threads", "4") == 0
    names = sorted(os.listdir(outs[0]))
    assert names == sorted(os.listdir(outs[1])) == sorted(os.listdir(outs[2]))
    for name in names:
        assert filecmp.cmp(outs[0] / name, outs[1] / name, shallow=False), name
        assert filecmp.cmp(outs[0] / name, outs[2] / name, shallow=False), name


def test_density_outputs(tmp_path):
    out = tmp_path / "o"
    assert run(out, "zeros") == 0
    assert run(out, "density") == 0
    dens_rows = read_data_rows(out / "density.csv")
    assert dens_rows[0] == "X,delta_omega,delta_Omega\n"
    assert len(dens_rows) > 2
    mc_rows = read_data_rows(out / "mc.csv")
    assert mc_rows[0] == "y,p_neg,trials,seed,kind\n"
    assert any(",omega" in r for r in mc_rows[1:])
    assert any(",Omega" in r for r in mc_rows[1:])


@pytest.mark.parametrize(
    "argv",
    [
        ["sieve", "--xmax", "100", "--q", "0"],
        ["sieve", "--xmax", "-5", "--q", "4"],
        ["zeros", "--q", "4", "--T", "10", "--T0", "50"],  # T0 > T
        ["zeros", "--q", "4", "--chi", "0", "--T", "10", "--T0", "5"],  # principal
        ["sieve", "--q", "4", "--chi", "banana"],
        ["all", "--q", "4", "--trials", "10"],
    ],
)
def test_config_errors_exit_2(tmp_path, argv):
    assert cli.main(argv + ["--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("xmax = 300\nq = 4\nT = 15\nT0 = 10\n# a comment\n")
    out = tmp_path / "o"
    assert cli.main(["sieve", "--config", str(cfg), "--out", str(out), "--xmax", "400"]) == 0
    rows = read_data_rows(out / "twists.csv")[1:]
    assert rows[-1].split(",")[0] == "400"  # override wins over the file


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 1\n")
    assert cli.main(["sieve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert (
        cli.main(["sieve", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "o")])
        == cli.EXIT_IO
    )


def test_numeric_failure_exit_3(tmp_path, monkeypatch):
    def boom(chi, t, params=None):
        raise MissedZeroError("synthetic missed zero", windows=[3])

    monkeypatch.setattr(cli, "scan_zeros", boom)
    assert run(tmp_path / "o", "zeros") == cli.EXIT_NUMERIC


def test_config_hash_stable_across_threads_and_out(tmp_path):
    rc1 = cli._build_run_config(
        cli._make_parser().parse_args(["all", "--out", "x", "--threads", "1"] + BASE)
    )
    rc2 = cli._build_run_config(
        cli._make_parser().parse_args(["all", "--out", "y", "--threads", "8"] + BASE)
    )
    assert rc1.hash() == rc2.hash()
    rc3 = cli._build_run_config(
        cli._make_parser().parse_args(["all", "--out", "x", "--seed", "7"] + BASE)
    )
    assert rc3.hash() != rc1.hash()

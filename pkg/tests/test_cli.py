"""Command-line behavior: exit codes, determinism, config, cache integrity."""

import math

import pytest
from click.testing import CliRunner

from skrlab.cli import RunConfig, cli, main


@pytest.fixture()
def runner():
    return CliRunner()


def test_config_round_trip(tmp_path):
    cfg = RunConfig(prec_bits=160, cutoff_c=37.5, cache_dir="some dir",
                    suite="kz", out_format="csv", seed=987654321)
    path = tmp_path / "run.cfg"
    cfg.to_file(path)
    assert RunConfig.from_file(path) == cfg


def test_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("prec_bits=192\nbogus=1\n")
    with pytest.raises(Exception):
        RunConfig.from_file(path)


def test_table_weight_ten_is_zero(runner):
    res = runner.invoke(cli, ["table", "--ell", "10"])
    assert res.exit_code == 0
    assert "10,a,0.000000000000e+00,0.0,ok" in res.output


def test_table_rejects_low_precision(runner):
    res = runner.invoke(cli, ["--prec", "64", "table", "--ell", "12"])
    assert res.exit_code == 2


def test_table_rejects_odd_weight(runner):
    res = runner.invoke(cli, ["table", "--ell", "11"])
    assert res.exit_code == 2


def test_verify_unknown_suite(runner):
    res = runner.invoke(cli, ["verify", "nosuch"])
    assert res.exit_code == 2
    assert main(["verify", "nosuch"]) == 2


def test_verify_gauss(runner):
    res = runner.invoke(cli, ["verify", "gauss", "--cmax", "40"])
    assert res.exit_code == 0
    assert "gauss identity c<=40 PASS" in res.output


def test_verify_euler_prints_exact_constants_and_seed(runner):
    res = runner.invoke(cli, ["--seed", "4242", "verify", "euler"])
    assert res.exit_code == 0
    assert "= 4/5 PASS" in res.output
    assert "= 2 PASS" in res.output
    assert "= 5/4 PASS" in res.output
    assert "seed=4242" in res.output


def test_verify_nv1(runner):
    res = runner.invoke(cli, ["verify", "nv1"])
    assert res.exit_code == 0
    assert "FAIL" not in res.output


def test_verify_bessel_csv_shape(runner):
    res = runner.invoke(cli, ["verify", "bessel", "--K", "64", "--gamma", "0.5"])
    assert res.exit_code == 0
    lines = res.output.strip().splitlines()
    assert lines[0] == "K,gamma,direct,asymptotic,residual,bound"
    fields = lines[1].split(",")
    assert len(fields) == 6
    assert float(fields[4]) <= float(fields[5])


def test_verify_kz(runner):
    res = runner.invoke(cli, ["verify", "kz"])
    assert res.exit_code == 0
    assert res.output.count("PASS") == 2


def test_dump_jacobi_deterministic(runner, tmp_path):
    out = str(tmp_path / "d")
    res1 = runner.invoke(cli, ["dump", "jacobi", "--ell", "12",
                               "--max", "10", "--out", out])
    assert res1.exit_code == 0
    path = res1.output.strip()
    first = open(path, "rb").read()
    res2 = runner.invoke(cli, ["dump", "jacobi", "--ell", "12",
                               "--max", "10", "--out", out])
    assert res2.exit_code == 0
    assert open(path, "rb").read() == first
    text = first.decode()
    assert text.startswith("# ell=12")
    assert "normalization" in text
    # exact integer/rational coefficients, discriminant-indexed
    assert "\n3,1\n4,10\n" in text


def test_dump_sk_rows_and_header(runner, tmp_path):
    out = str(tmp_path / "d")
    res = runner.invoke(cli, ["dump", "sk", "--ell", "12",
                              "--max", "4", "--out", out])
    assert res.exit_code == 0
    lines = open(res.output.strip()).read().splitlines()
    assert lines[0].startswith("# ell=12 label=a")
    assert lines[1] == "n,r,m,A"
    rows = [l.split(",") for l in lines[2:]]
    count = sum(2 * math.isqrt(4 * n * m) + 1
                for n in range(1, 5) for m in range(1, 5))
    assert len(rows) == count
    assert all(len(r) == 4 for r in rows)


def test_dump_eigen_row_count(runner, tmp_path):
    out = str(tmp_path / "d")
    res = runner.invoke(cli, ["dump", "eigen", "--weight", "22",
                              "--n", "100", "--out", out])
    assert res.exit_code == 0
    lines = open(res.output.strip()).read().splitlines()
    assert lines[0].startswith("# weight=22 label=a prec_bits=192")
    assert len(lines) == 101


def test_dump_eigen_rejects_corrupted_cache(runner, tmp_path):
    out = str(tmp_path / "d")
    res = runner.invoke(cli, ["dump", "eigen", "--weight", "22",
                              "--n", "100", "--out", out])
    path = res.output.strip()
    lines = open(path).read().splitlines()
    lines[6] = lines[6].split()[0] + " 123456789"  # break a(6)
    open(path, "w").write("\n".join(lines) + "\n")
    res2 = runner.invoke(cli, ["dump", "eigen", "--weight", "22",
                               "--n", "100", "--out", out])
    assert res2.exit_code == 3


def test_dump_restriction(runner, tmp_path):
    out = str(tmp_path / "d")
    res = runner.invoke(cli, ["dump", "restriction", "--ell", "12",
                              "--max", "3", "--out", out])
    assert res.exit_code == 0
    lines = open(res.output.strip()).read().splitlines()
    assert "vanishing=False" in lines[0]
    assert lines[1] == "n,m,b"
    assert len(lines) == 2 + 9


def test_petersson_check_validation(runner):
    res = runner.invoke(cli, ["petersson-check", "--weight", "11"])
    assert res.exit_code == 2
    res = runner.invoke(cli, ["petersson-check", "--m", "11"])
    assert res.exit_code == 2


def test_petersson_check_small(runner):
    res = runner.invoke(cli, ["petersson-check", "--weight", "12",
                              "--m", "1", "--n", "2", "--cmax", "2000"])
    assert res.exit_code == 0
    assert "PASS" in res.output

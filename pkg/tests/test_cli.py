import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from permuton.cli import main
from permuton.data import CITY_PERMUTATION, city_sample
from permuton.perm import BivariateSample

ROOT = Path(__file__).resolve().parents[1]
CITIES = ROOT / "data" / "cities.csv"
CITY = ",".join(map(str, CITY_PERMUTATION))


def run(capsys, *args):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def test_fixture_matches_builtin():
    assert BivariateSample.read_csv(CITIES).to_csv() == city_sample().to_csv()


def test_ranks_city(capsys):
    code, out, _ = run(capsys, "ranks", "--input", CITIES)
    assert code == 0
    assert json.loads(out)["pi"] == CITY


def test_ranks_shuffled_and_single_row(capsys, tmp_path):
    shuffled = city_sample().reorder(np.random.default_rng(3).permutation(16))
    f = tmp_path / "s.csv"
    f.write_text(shuffled.to_csv())
    assert json.loads(run(capsys, "ranks", "--input", f)[1])["pi"] == CITY
    one = tmp_path / "one.csv"
    one.write_text("x,y\n0.3,7\n")
    res = json.loads(run(capsys, "ranks", "--input", one)[1])
    assert res["pi"] == res["pi_x"] == res["pi_y"] == "1"
    code, out, _ = run(capsys, "ranks", "--input", CITIES, "--format", "csv")
    assert out.splitlines()[0] == "x,y" and len(out.splitlines()) == 17


def test_ranks_errors(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n1,3\n")
    code, _, err = run(capsys, "ranks", "--input", bad)
    assert code == 3 and json.loads(err)["error"] == "data"
    bad.write_text("x,y\n1,2\nfoo,3\n")
    code, _, err = run(capsys, "ranks", "--input", bad)
    assert code == 3 and "line 3" in json.loads(err)["message"]


def test_patterns_with_comparison(capsys):
    code, out, _ = run(capsys, "patterns", "--input", CITIES, "--k", "3", "--reference")
    res = json.loads(out)
    assert code == 0 and res["total"] == 560
    cmp = res["comparison"]
    assert cmp["reference_total"] == 455 and cmp["observed_total"] == 560
    assert cmp["reference_counts"]["312"] == 130
    res2 = json.loads(run(capsys, "patterns", "--perm", CITY, "--k", "2", "--reference")[1])
    assert res2["counts"]["12"] == 61 and res2["comparison"]["agree"]


def test_patterns_identity_and_budget(capsys, monkeypatch):
    res = json.loads(run(capsys, "patterns", "--perm", "1,2,3,4,5", "--k", "3")[1])
    assert [w for w, c in res["counts"].items() if c] == ["123"]
    monkeypatch.setenv("PERMUTON_BUDGET", "100")
    code, _, err = run(capsys, "patterns", "--perm", ",".join(map(str, range(1, 31))), "--k", "5")
    assert code == 4 and json.loads(err)["error"] == "budget"


def test_test_subcommand(capsys, tmp_path):
    res = json.loads(run(capsys, "test", "--method", "pattern3", "--t-obs", "0.228", "--n", "16")[1])
    assert abs(res["statistic"] - 1.311) < 0.002
    res = json.loads(run(capsys, "test", "--input", CITIES, "--method", "pattern3", "--t-obs", "0.228")[1])
    assert abs(res["statistic"] - 1.311) < 0.002
    up = tmp_path / "up.csv"
    up.write_text(BivariateSample(np.arange(10.0), np.arange(10.0)).to_csv())
    res = json.loads(run(capsys, "test", "--input", up, "--method", "kendall")[1])
    assert res["details"]["tau"] == 1
    res = json.loads(run(capsys, "test", "--input", CITIES, "--method", "pattern3-joint")[1])
    assert res["details"]["df"] == 4


def test_test_errors(capsys):
    code, _, err = run(capsys, "test", "--method", "spearman", "--input", CITIES)
    assert code == 2 and json.loads(err)["error"] == "usage"
    code, _, _ = run(capsys, "test", "--perm", "1,2", "--method", "pattern3")
    assert code == 3


def test_null_p_values_spread(capsys, tmp_path):
    ps = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        f = tmp_path / f"ind{seed}.csv"
        f.write_text(BivariateSample(rng.random(40), rng.random(40)).to_csv())
        ps.append(json.loads(run(capsys, "test", "--input", f, "--method", "kendall")[1])["p_value"])
    ps = np.array(ps)
    assert 0.02 <= np.mean(ps < 0.1) <= 0.2 and 0.35 < ps.mean() < 0.65


def test_simulate(capsys):
    res = json.loads(run(capsys, "simulate", "--model", "H", "--n", "4", "--exact-enumerate")[1])
    assert res["uniform"] and res["support"] == 24 and set(res["law"].values()) == {"1/24"}
    res = json.loads(run(capsys, "simulate", "--model", "copula:min", "--n", "50")[1])
    assert res["summary"]["final"] == ",".join(map(str, range(1, 51)))
    res = json.loads(run(capsys, "simulate", "--model", "mg1", "--lambda", "0.5", "--service", "exp:1",
                         "--n", "10000")[1])
    assert res["summary"]["inversion_bound"]["holds"]
    res = json.loads(run(capsys, "simulate", "--model", "plancherel", "--n", "100", "--seed", "4")[1])
    assert len(res["summary"]["thoma_alpha"]) == 10
    out = run(capsys, "simulate", "--model", "crp", "--n", "12", "--format", "jsonl")[1]
    assert len(out.splitlines()) == 12


def test_simulate_errors(capsys):
    assert run(capsys, "simulate", "--model", "zzz", "--n", "3")[0] == 2
    assert run(capsys, "simulate", "--model", "mg1", "--n", "10", "--lambda", "2")[0] == 3
    assert run(capsys, "simulate", "--model", "mg1", "--n", "10", "--exact-enumerate")[0] == 2
    assert run(capsys, "simulate", "--model", "H", "--n", "9", "--exact-enumerate")[0] == 4
    assert run(capsys, "simulate", "--model", "H", "--n", "3", "--seed", "-1")[0] == 2


def test_young_lattice(capsys, tmp_path):
    out = tmp_path / "y.csv"
    assert run(capsys, "young-lattice", "--n", "5", "--output", out)[0] == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "parent,child,weight_num,weight_den" and len(rows) > 10


@pytest.mark.parametrize("args", [
    ["simulate", "--model", "H", "--n", "30", "--seed", "7"],
    ["simulate", "--model", "mg1", "--n", "500", "--seed", "7"],
    ["test", "--input", str(CITIES), "--method", "pattern4", "--m", "150", "--seed", "3"],
])
def test_byte_identical_reruns(args):
    cmd = [sys.executable, "-m", "permuton", *args]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a

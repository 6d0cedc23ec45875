import csv
import json
import subprocess
import sys

import pytest

from diqkd_bounds.cli import OUT_ENV, main
from diqkd_bounds.protocol import attack_correlation


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_bounds_defaults(tmp_path):
    assert main(["bounds", "--out", str(tmp_path)]) == 0
    curves = read_csv(tmp_path / "curves.csv")
    assert len(curves) == 200
    first, last = curves[0], curves[-1]
    assert float(first["S"]) == 2.0
    assert float(first["lower"]) <= 0
    assert abs(float(first["upper_thm1"])) <= 1e-9
    for key in ("lower", "entropy_rate", "upper_thm1", "upper_appB"):
        assert float(last[key]) == pytest.approx(1.0, abs=1e-9)
    surface = read_csv(tmp_path / "surface.csv")
    assert len(surface) == 10_000
    manifest = json.loads((tmp_path / "bounds-manifest.json").read_text())
    assert manifest["parameters"]["grid"] == "100x100"
    assert manifest["outputs"] == ["surface.csv", "curves.csv"]


def test_bounds_grid_and_env(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path))
    assert main(["bounds", "--grid", "3x4", "--points", "5"]) == 0
    assert len(read_csv(tmp_path / "surface.csv")) == 12
    rows = read_csv(tmp_path / "curves.csv")
    assert len(rows) == 5
    for r in rows:
        assert float(r["lower"]) <= float(r["upper_thm1"]) + 1e-9


@pytest.mark.parametrize("grid", ["1x5", "abc", "10"])
def test_bad_grid(tmp_path, grid):
    with pytest.raises(SystemExit):
        main(["bounds", "--grid", grid, "--out", str(tmp_path)])


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["bounds", "--grid", "2x2", "--points", "2", "--out", str(blocker / "x")]) == 1


def test_peres_formats(tmp_path):
    assert main(["peres", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "peres.txt").read_text()
    assert "no one-way key: yes" in text
    assert main(["peres", "--format", "csv", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "peres.csv")
    for r in rows:
        if r["quantity"] in ("alice_rate", "bob_rate"):
            assert r["value"] in text
    assert main(["peres", "--format", "json", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "peres.json").read_text())
    assert data["max_alice"] <= 1e-9 and data["max_bob"] <= 1e-9


def test_peres_other_q(tmp_path):
    main(["peres", "--q", "3/10", "--format", "json", "--out", str(tmp_path)])
    assert json.loads((tmp_path / "peres.json").read_text())["q"] == "3/10"


def test_simulate_deterministic(tmp_path):
    args = ["simulate", "--device", "attack", "--S", "2.8284", "--Q", "0",
            "--n", "100000", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "simulate.json").read_text()
    assert a == (tmp_path / "b" / "simulate.json").read_text()
    assert json.loads(a)["seed"] == 7


def test_simulate_classical_aborts(tmp_path):
    main(["simulate", "--device", "classical", "--omega-exp", "0.85", "--n", "10000",
          "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "simulate.json").read_text())
    assert rep["abort"] is True and rep["asymptotic_key_bits"] == 0.0


def test_simulate_threshold(tmp_path):
    main(["simulate", "--device", "depolarizing", "--nu", "0.142", "--format", "csv",
          "--out", str(tmp_path)])
    rep = read_csv(tmp_path / "simulate.csv")[0]
    assert float(rep["key_rate"]) < 0.02
    assert float(rep["observed_qber"]) == pytest.approx(0.071, abs=0.003)


def test_simulate_file_device(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text(attack_correlation(2.6, 0.02).to_csv())
    assert main(["simulate", "--device", "file", "--correlation", str(path), "--n", "5000",
                 "--out", str(tmp_path)]) == 0
    assert main(["simulate", "--device", "file", "--out", str(tmp_path)]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    assert main(["simulate", "--device", "file", "--correlation", str(bad),
                 "--out", str(tmp_path)]) == 1


def test_squash_small(tmp_path):
    assert main(["squash", "--points", "2", "--e-out", "1,2", "--env", "1,2",
                 "--restarts", "1", "--max-evals", "100", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "squash.csv")
    # (1, 1) is infeasible and skipped
    assert [(r["e_out"], r["env"]) for r in rows[:3]] == [("1", "2"), ("2", "1"), ("2", "2")]
    for r in rows:
        assert float(r["improvement"]) <= 1e-4
        assert r["significant"] == "false"


def test_squash_infeasible(tmp_path):
    assert main(["squash", "--points", "2", "--e-out", "1", "--env", "1",
                 "--out", str(tmp_path)]) == 1


@pytest.mark.parametrize("argv", [
    ["bounds", "--grid", "4x3", "--points", "6"],
    ["peres", "--format", "csv"],
    ["simulate", "--device", "depolarizing", "--nu", "0.05", "--n", "3000", "--seed", "11"],
    ["squash", "--points", "2", "--e-out", "2", "--env", "1", "--restarts", "1",
     "--max-evals", "50"],
])
def test_replay_is_byte_identical(tmp_path, argv):
    first = tmp_path / "first"
    assert main(argv + ["--out", str(first)]) in (0, 1)
    manifest = first / f"{argv[0]}-manifest.json"
    second = tmp_path / "second"
    main(["replay", str(manifest), "--out", str(second)])
    for f in json.loads(manifest.read_text())["outputs"] + [manifest.name]:
        assert (first / f).read_bytes() == (second / f).read_bytes()


def test_replay_missing_manifest(tmp_path):
    assert main(["replay", str(tmp_path / "nope.json")]) == 1


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "diqkd_bounds.cli", "peres", "--out",
                          str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0
    assert (tmp_path / "peres-manifest.json").exists()

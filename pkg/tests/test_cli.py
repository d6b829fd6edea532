import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from clockrc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config: ")
    json.loads(lines[0][len("# config: "):])
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_beta0(capsys):
    code, out, _ = run(capsys, "beta0", "--q", "4", "--rho", "0.6")
    assert code == 0
    assert float(rows(out)[0]["beta0"]) == pytest.approx(1.751006681, abs=1e-6)


def test_phi_curve_monotone(capsys):
    code, out, _ = run(capsys, "phi-curve", "--q", "4", "--beta-max", "20", "--points", "100")
    vals = np.array([float(r["varphi"]) for r in rows(out)])
    assert code == 0 and np.all(np.diff(vals) > 0)
    assert vals[0] < 0.01 and vals[-1] > 0.999


def test_weight_table_json(capsys):
    code, out, _ = run(capsys, "weight-table", "--q", "4", "--beta", "1")
    table = json.loads(out)
    assert code == 0 and table["K"] == [4, 8, 4]
    assert table["r"][1] == pytest.approx(0.23254415793483)


def test_oracle_verify_all_pass(capsys):
    code, out, _ = run(capsys, "oracle-verify", "--q", "2", "3", "--beta", "1")
    assert code == 0
    table = rows(out)
    assert table and all(r["pass"] == "true" for r in table)


def test_injection_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "injection-verify", "--q", "4", "--dump", str(tmp_path / "d.json"))
    assert code == 0
    assert all(r["pass"] == "true" for r in rows(out))


def test_beta0_bound(capsys):
    code, out, _ = run(capsys, "beta0-bound", "--q", "2", "--d", "2", "--p", "1", "--pc", "0.5")
    assert code == 0
    assert float(rows(out)[0]["bound"]) == pytest.approx(np.log(4) / 2, abs=1e-12)


def test_same_seed_identical(capsys, tmp_path):
    args = ["simulate", "--q", "3", "--beta", "1.5", "--p", "0.8", "--n", "3",
            "--sweeps", "1000", "--burnin", "50", "--quench-samples", "2", "--seed", "11"]
    outs = []
    for i, threads in enumerate(("1", "2")):
        path = tmp_path / f"o{i}.csv"
        assert main(args + ["--threads", threads, "-o", str(path)]) == 0
        outs.append(path.read_bytes().replace(str(path).encode(), b"").replace(b'"threads": ' + threads.encode(), b""))
    assert outs[0] == outs[1]
    code1, a, _ = run(capsys, "percolate", "--p", "0.6", "--n", "6", "--samples", "50", "--seed", "3")
    code2, b, _ = run(capsys, "percolate", "--p", "0.6", "--n", "6", "--samples", "50", "--seed", "3")
    assert code1 == code2 == 0 and a == b


def test_toml_config_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("q = 4\nrho = 0.6\n")
    code, out, _ = run(capsys, "beta0", "--config", str(cfg))
    assert code == 0 and float(rows(out)[0]["beta0"]) == pytest.approx(1.751, abs=1e-3)
    code, out, _ = run(capsys, "beta0", "--config", str(cfg), "--rho", "0.3")
    assert float(rows(out)[0]["rho"]) == 0.3


@pytest.mark.parametrize("argv", [
    ["beta0", "--q", "4", "--rho", "1.5"],
    ["beta0", "--q", "1", "--rho", "0.5"],
    ["beta0", "--config", "/nonexistent.toml", "--q", "4", "--rho", "0.5"],
    ["percolate", "--p", "2", "--n", "4"],
    ["simulate", "--q", "3", "--beta", "1", "--n", "3", "--sweeps", "10"],
])
def test_bad_config_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("qq = 1\n")
    code, _, err = run(capsys, "beta0", "--config", str(cfg), "--q", "4", "--rho", "0.5")
    assert code == 2 and "qq" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "clockrc", "beta0", "--q", "2", "--rho", "0.7616"],
                         capture_output=True, text=True, check=True)
    assert float(rows(res.stdout)[0]["beta0"]) == pytest.approx(1.0, abs=1e-4)

import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from quditchain.cli import main, parse_int_list
from quditchain.fidelity import optimize_vanishing_field
from quditchain.lattice import ChainConfig


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def read_table(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# config: ")
    config = json.loads(lines[0][len("# config: "):])
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    return config, rows


def test_parse_int_list():
    assert parse_int_list("2,3,5-7") == [2, 3, 5, 6, 7]
    assert parse_int_list("4") == [4]
    assert parse_int_list("3,2,3") == [2, 3]


def test_optimal_fidelity(tmp_path):
    code, out = run(tmp_path, "optimal-fidelity", "--distance", "1,4", "--d-list", "2-4")
    assert code == 0
    config, rows = read_table(out)
    assert config["d_list"] == [2, 3, 4] and config["t_max"] == 400.0
    assert len(rows) == 2 * 3 * 2
    assert set(rows[0]) == {"strategy", "d", "distance", "t_opt", "b_opt", "f_avg_opt"}
    for r in rows:
        if r["distance"] == "4":
            assert float(r["f_avg_opt"]) >= 0.95
        if r["distance"] == "1" and r["d"] == "2":
            assert float(r["f_avg_opt"]) >= 0.999


def test_number_format(tmp_path):
    _, out = run(tmp_path, "optimal-fidelity", "--distance", "2", "--d-list", "2",
                 "--strategy", "vanishing")
    _, rows = read_table(out)
    mantissa = rows[0]["t_opt"].split("e")[0]
    assert len(mantissa.replace(".", "").lstrip("-")) == 17
    assert out.read_bytes().count(b"\r\n") == 3


def test_scaling_check(tmp_path):
    code, out = run(tmp_path, "scaling-check", "--distance", "4", "--d-list", "2-5")
    assert code == 0
    _, rows = read_table(out)
    points = [r for r in rows if r["row"] == "point"]
    spread = [r for r in rows if r["row"] == "spread"]
    assert len(points) == 4 and len(spread) == 1
    for r in points:
        d = int(r["d"])
        res = optimize_vanishing_field(ChainConfig.half_ring(4, levels=d))
        assert abs(float(r["scaling_lhs"]) - res.amplitude.modulus) <= 0.02
    lhs = [float(r["scaling_lhs"]) for r in points]
    assert float(spread[0]["scaling_lhs"]) == pytest.approx(max(lhs) - min(lhs))


def test_scaling_check_needs_three_levels(tmp_path, capsys):
    code, _ = run(tmp_path, "scaling-check", "--d-list", "2")
    assert code == 1
    assert "three" in capsys.readouterr().err


def test_usage_errors_exit_one(tmp_path):
    assert main(["optimal-fidelity", "--distance", "0", "--out", str(tmp_path / "x")]) == 1
    assert main(["optimal-fidelity", "--t-step", "-1", "--out", str(tmp_path / "x")]) == 1
    assert main(["optimal-fidelity", "--d-list", "1,2", "--out", str(tmp_path / "x")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--strategy", "sideways"])
    assert exc.value.code == 1


def test_entanglement_scan(tmp_path):
    code, out = run(tmp_path, "entanglement-scan", "--t-max", "60", "--t-step", "0.25", "--verify")
    assert code == 0
    config, rows = read_table(out)
    assert (config["n"], config["sender"], config["receiver"]) == (60, 1, 30)
    by_d = {}
    for r in rows:
        by_d.setdefault(int(r["d"]), []).append(
            (float(r["t"]), float(r["efficiency"]), float(r["abs_diff"])))
    for d, series in by_d.items():
        t, eff, diff = map(np.array, zip(*series))
        assert eff[t == 0][0] == 0.0
        assert diff.max() <= 1e-10
        by_d[d] = (t, eff)
    argmax = {d: t[np.argmax(eff)] for d, (t, eff) in by_d.items()}
    assert max(argmax.values()) - min(argmax.values()) <= 0.25
    i = np.argmax(by_d[2][1])
    assert by_d[2][1][i] < by_d[3][1][i] < by_d[4][1][i]


def test_entanglement_verify_cap(tmp_path):
    code, _ = run(tmp_path, "entanglement-scan", "--d-list", "9", "--verify", "--t-max", "1")
    assert code == 1


def test_fidelity_scan_strategies(tmp_path):
    _, van = run(tmp_path, "fidelity-scan", "--distance", "3", "--d-list", "3", "--t-max", "5",
                 "--t-step", "0.5", name="v.csv")
    _, tuned = run(tmp_path, "fidelity-scan", "--distance", "3", "--d-list", "3", "--t-max", "5",
                   "--t-step", "0.5", "--strategy", "tuned", name="t.csv")
    _, fixed = run(tmp_path, "fidelity-scan", "--distance", "3", "--d-list", "3", "--t-max", "5",
                   "--t-step", "0.5", "--b", "0.2", name="b.csv")
    v, t, b = (read_table(p)[1] for p in (van, tuned, fixed))
    assert len(v) == len(t) == len(b) == 10
    for rv, rt in zip(v, t):
        assert float(rt["f_avg"]) >= float(rv["f_avg"]) - 1e-12
    assert {r["field"] for r in b} == {"2.0000000000000001e-01"}


def test_config_file_precedence(tmp_path):
    conf = tmp_path / "scan.conf"
    conf.write_text("# scan settings\nd-list = 2,3\ndistance = 2\nt_max = 10\n")
    _, out = run(tmp_path, "optimal-fidelity", "--config", str(conf), "--d-list", "4")
    config, rows = read_table(out)
    assert config["d_list"] == [4] and config["distance"] == "2" and config["t_max"] == 10.0
    assert {r["d"] for r in rows} == {"4"}
    conf.write_text("not a pair\n")
    assert main(["optimal-fidelity", "--config", str(conf)]) == 1


def test_verify_report(tmp_path):
    code, out = run(tmp_path, "verify", "--seed", "3", name="report.txt")
    assert code == 0
    text = out.read_text()
    assert text.count("PASS") == 8 and "FAIL" not in text
    code, again = run(tmp_path, "verify", "--seed", "3", name="report2.txt")
    assert again.read_bytes() == out.read_bytes()


def test_verify_corrupted_tolerance_fails(tmp_path):
    code, out = run(tmp_path, "verify", "--corrupt-tolerance", name="bad.txt")
    assert code == 2
    assert "FAIL" in out.read_text()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "quditchain", "optimal-fidelity", "--distance", "1",
                           "--d-list", "2", "--t-max", "5"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("# config: ")


def test_scaling_check_default_distance_collapses(tmp_path):
    code, out = run(tmp_path, "scaling-check")
    assert code == 0
    config, rows = read_table(out)
    assert config["d_list"] == [2, 3, 4, 5, 6, 7, 8] and config["distance"] == "20"
    spread = [r for r in rows if r["row"] == "spread"][0]
    assert float(spread["scaling_lhs"]) <= 0.05

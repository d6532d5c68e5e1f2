import csv
import io
import json

import pytest

from mallows_hitrun.cli import main


def run(argv, capsys=None):
    code = main([str(a) for a in argv])
    out = capsys.readouterr() if capsys else None
    return code, out


def parse_csv(text):
    meta = {}
    lines = text.splitlines()
    k = 0
    while lines[k].startswith("# "):
        key, val = lines[k][2:].split(": ", 1)
        meta[key] = val
        k += 1
    rows = list(csv.reader(io.StringIO("\n".join(lines[k:]))))
    return meta, rows[0], rows[1:]


def test_sample_protocol_rows(tmp_path):
    out = tmp_path / "trace.csv"
    code, _ = run(["sample", "--model", "l1", "--n", 1000, "--beta", 0.001, "--steps", 4000, "--burn-in", 1000,
                   "--seed", 7, "--out", out])
    assert code == 0
    meta, header, rows = parse_csv(out.read_text())
    assert header == ["step", "t1", "t2", "t3", "h_l1", "cycles"]
    assert len(rows) == 3000
    assert rows[0][0] == "1001" and rows[-1][0] == "4000"
    for key in ("model", "beta", "n", "seed", "version", "build", "steps", "burn_in", "thin"):
        assert key in meta
    assert out.read_bytes().count(b"\r\n") == len(out.read_bytes().splitlines())


def test_header_only_when_no_retained(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["sample", "--model", "l2", "--n", 5, "--beta", 0.1, "--steps", 3, "--burn-in", 3, "--out", out])[0] == 0
    _, header, rows = parse_csv(out.read_text())
    assert header[0] == "step" and rows == []


def test_byte_identical_reruns(tmp_path):
    args = ["sample", "--model", "twoparam", "--n", 12, "--beta1", 0.2, "--beta2", 1.0, "--steps", 50, "--thin", 5,
            "--reps", 3, "--seed", 11]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(args + ["--out", a])
    run(args + ["--out", b, "--workers", 2])
    assert a.read_bytes() == b.read_bytes()
    _, header, rows = parse_csv(a.read_text())
    assert header[0] == "rep" and len(rows) == 30


def test_json_output(tmp_path):
    out = tmp_path / "s.json"
    run(["sample", "--model", "l1", "--n", 6, "--beta", 0.3, "--steps", 4, "--format", "json", "--stats", "t1,h_l2",
         "--out", out])
    body = json.loads(out.read_text())
    assert body["meta"]["model"] == "L1"
    assert len(body["rows"]) == 4
    assert set(body["rows"][0]) == {"step", "t1", "h_l2"}


def test_dump_perms(tmp_path):
    dump = tmp_path / "perms.txt"
    run(["sample", "--model", "l2", "--n", 7, "--beta", 0.02, "--steps", 5, "--dump-perms", dump, "--out",
         tmp_path / "s.csv"])
    lines = dump.read_text().splitlines()
    assert len(lines) == 5
    assert all(sorted(map(int, line.split())) == list(range(1, 8)) for line in lines)


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "l1", "n": 6, "beta": 0.3, "steps": 10, "burn-in": 4, "seed": 2}))
    out = tmp_path / "s.csv"
    assert run(["sample", "--config", cfg, "--steps", 20, "--out", out])[0] == 0
    meta, _, rows = parse_csv(out.read_text())
    assert meta["steps"] == "20" and meta["burn_in"] == "4" and len(rows) == 16


def test_weights_file(tmp_path):
    w = tmp_path / "w.txt"
    w.write_text("1\n2\n2\n5\n")
    out = tmp_path / "s.csv"
    assert run(["sample", "--model", "wl1", "--weights", w, "--beta", 0.5, "--steps", 3, "--out", out])[0] == 0
    meta, _, _ = parse_csv(out.read_text())
    assert meta["n"] == "4" and meta["weights"] == "1.0 2.0 2.0 5.0"


@pytest.mark.parametrize("content", ["3\n2\n1\n", "1\n-2\n3\n", "1\nx\n", ""])
def test_bad_weights_rejected(tmp_path, content, capsys):
    w = tmp_path / "w.txt"
    w.write_text(content)
    out = tmp_path / "s.csv"
    code, _ = run(["sample", "--model", "wl2", "--weights", w, "--beta", 0.5, "--steps", 3, "--out", out], capsys)
    assert code == 2
    assert not out.exists()


@pytest.mark.parametrize("argv", [
    ["sample", "--model", "l1", "--n", 5, "--steps", 3],                      # missing beta
    ["sample", "--model", "l1", "--n", 5, "--beta", -1, "--steps", 3],        # bad beta
    ["sample", "--model", "l1", "--n", 5, "--beta", 0.1, "--steps", 3, "--burn-in", 5],
    ["sample", "--model", "lattice-l1", "--N", 2, "--d", 2, "--beta", 0.1, "--sampler", "metropolis", "--steps", 2],
    ["sample", "--model", "l1", "--n", 5, "--beta", 0.1, "--steps", 3, "--stats", "t9"],
    ["bench", "--model", "l1", "--n", 5, "--beta", 0.1, "--steps", 0],
])
def test_invalid_configs(tmp_path, argv, capsys):
    out = tmp_path / "o.csv"
    code, cap = run(argv + ["--out", out], capsys)
    assert code == 2
    assert "error" in cap.err
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"modle": "l1"}))
    assert run(["sample", "--config", cfg], capsys)[0] == 2


def test_oracle_check_pass(tmp_path):
    out = tmp_path / "o.csv"
    assert run(["oracle-check", "--model", "l1", "--n", 4, "--beta", 0.3, "--out", out])[0] == 0
    meta, header, rows = parse_csv(out.read_text())
    assert meta["verdict"] == "PASS"
    assert float(rows[0][header.index("p_value")]) >= 1e-3


def test_oracle_check_lattice_and_metropolis(tmp_path):
    assert run(["oracle-check", "--model", "lattice-l2", "--N", 2, "--d", 2, "--beta", 0.2, "--reps", 20000,
                "--out", tmp_path / "a.csv"])[0] == 0
    assert run(["oracle-check", "--model", "twoparam", "--n", 4, "--beta1", 0.3, "--beta2", 1, "--reps", 20000,
                "--sampler", "metropolis", "--out", tmp_path / "b.csv"])[0] == 0


def test_oracle_check_failure_exit(tmp_path):
    # alpha = 1 cannot be met, which exercises the failure path
    assert run(["oracle-check", "--model", "l1", "--n", 3, "--beta", 0.3, "--reps", 1000, "--alpha", 1.0,
                "--out", tmp_path / "o.csv"])[0] == 3


def test_oracle_limit(capsys):
    code, cap = run(["oracle-check", "--model", "l1", "--n", 9, "--beta", 0.3], capsys)
    assert code == 4
    assert "enumeration limit exceeded" in cap.err


def test_couple_test(tmp_path):
    out = tmp_path / "c.json"
    assert run(["couple-test", "--n", 16, "--reps", 100000, "--format", "json", "--out", out])[0] == 0
    row = json.loads(out.read_text())["rows"][0]
    assert row["bound"] == 32 and row["max_rho"] <= 32 and row["verdict"] == "PASS"


def test_bench(tmp_path):
    out = tmp_path / "b.csv"
    assert run(["bench", "--model", "l1", "--n", 200, "--beta", 0.005, "--out", out])[0] == 0
    meta, header, rows = parse_csv(out.read_text())
    by = {r[1]: float(r[header.index("mean_ms")]) for r in rows}
    assert set(by) == {"hitrun", "metropolis"}
    assert by["hitrun"] > by["metropolis"]
    assert int(rows[0][header.index("steps")]) >= 1000


def test_mixing_profile_kernel(tmp_path):
    out = tmp_path / "m.csv"
    assert run(["mixing-profile", "--model", "l1", "--n", 5, "--beta", 1 / 160, "--mode", "kernel", "--out", out])[0] == 0
    meta, header, rows = parse_csv(out.read_text())
    assert header == ["step", "tv"]
    assert len(rows) == 11 and meta["bound_steps"] == "10"
    assert float(rows[-1][1]) < 0.25


def test_autocorr_and_histogram(tmp_path):
    a, h = tmp_path / "a.csv", tmp_path / "h.csv"
    base = ["--model", "l1", "--n", 30, "--beta", 0.03, "--steps", 400, "--burn-in", 100, "--stat", "t1"]
    assert run(["autocorr", *base, "--max-lag", 10, "--out", a])[0] == 0
    meta, header, rows = parse_csv(a.read_text())
    assert header == ["lag", "acf"] and len(rows) == 11 and float(rows[0][1]) == 1.0
    assert "ess" in meta
    assert run(["histogram", *base, "--out", h])[0] == 0
    meta, header, rows = parse_csv(h.read_text())
    assert sum(int(r[1]) for r in rows) == 300

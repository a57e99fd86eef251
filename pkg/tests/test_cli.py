import csv
import io
import subprocess
import sys

import pytest

from rmqlab.cli import EXIT_INCONCLUSIVE, EXIT_OK, EXIT_UNSAT, EXIT_USAGE, HEADER, main
from rmqlab.instance import evaluate_instance, parse_instance, render_instance


def rows_of(text):
    lines = text.splitlines()
    assert lines[0] == HEADER
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def planted_file(tmp_path, capsys):
    path = tmp_path / "inst.txt"
    assert main(["gen", "--l", "4", "--w", "3", "--seed", "1", "--out", str(path)]) == EXIT_OK
    return path


def test_gen_writes_parseable_planted_instance(tmp_path, capsys):
    path = tmp_path / "a.txt"
    assert main(["gen", "--l", "4", "--w", "4", "--seed", "1", "--out", str(path)]) == EXIT_OK
    inst = parse_instance(path.read_text())
    assert inst.m == 10
    assert not evaluate_instance(inst, inst.planted.to_bits()).any()


def test_gen_is_deterministic(capsys):
    _, a, _ = run(capsys, "gen", "--l", "3", "--w", "3", "--seed", "5")
    _, b, _ = run(capsys, "gen", "--l", "3", "--w", "3", "--seed", "5")
    assert a == b


def test_gen_rejects_zero_equations(capsys):
    code, _, err = run(capsys, "gen", "--l", "3", "--w", "2", "--m", "0")
    assert code == EXIT_USAGE and "error" in err


def test_solve_methods_agree(planted_file, capsys):
    found = {}
    for method in ("brute", "xl", "hybrid-full", "hybrid-partial", "hybrid-different", "alt-xl"):
        code, out, _ = run(capsys, "solve", str(planted_file), "--method", method, "--all")
        assert code == EXIT_OK
        (row,) = rows_of(out)
        assert row["method"] == method
        found[method] = row["found"]
    assert len(set(found.values())) == 1


def test_solve_csv_deterministic_apart_from_time(planted_file, capsys):
    def strip(text):
        return [{k: v for k, v in r.items() if k != "elapsed_s"} for r in rows_of(text)]

    _, a, _ = run(capsys, "solve", str(planted_file), "--method", "xl")
    _, b, _ = run(capsys, "solve", str(planted_file), "--method", "xl")
    assert strip(a) == strip(b)


def test_polymethod_unsat_exits_2(tmp_path, planted_file, capsys):
    inst = parse_instance(planted_file.read_text())
    import numpy as np

    bad = inst.with_polys(np.ones(1, np.uint8))
    bad = type(bad)(bad.l, bad.w, bad.const, bad.lin, bad.quad, None, bad.seed)
    path = tmp_path / "unsat.txt"
    path.write_text(render_instance(bad))
    code, out, _ = run(capsys, "solve", str(path), "--method", "polymethod", "--t", "15")
    assert code == EXIT_UNSAT
    assert rows_of(out)[0]["found"] == "none"


def test_inconclusive_exit_code(planted_file, capsys):
    code, _, _ = run(capsys, "solve", str(planted_file), "--method", "xl", "--d-max", "2")
    assert code in (EXIT_OK, EXIT_INCONCLUSIVE)


def test_unknown_method_is_usage_error(planted_file, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", str(planted_file), "--method", "magic"])
    assert exc.value.code == EXIT_USAGE


def test_missing_file_is_usage_error(tmp_path, capsys):
    code, _, _ = run(capsys, "solve", str(tmp_path / "nope.txt"))
    assert code == EXIT_USAGE


def test_estimate(capsys):
    _, out, _ = run(capsys, "estimate", "--method", "plain", "--l", "2")
    assert float(rows_of(out)[0]["tau"]) == pytest.approx(0.4364, abs=1e-3)
    _, out, _ = run(capsys, "estimate", "--method", "dinur-alt", "--l", "4")
    assert float(rows_of(out)[0]["tau"]) == pytest.approx(0.4375, abs=1e-9)
    code, out, err = run(capsys, "estimate", "--method", "plain-fq", "--l", "3", "--q", "7")
    assert code == EXIT_OK and float(rows_of(out)[0]["tau_rel"]) > 1
    assert "cheaper" in err


def test_compare_relative_column(capsys):
    _, out, _ = run(capsys, "compare", "--l", "2,3", "--methods", "plain,brute")
    rows = rows_of(out)
    assert len(rows) == 4
    for r in rows:
        assert float(r["tau_rel"]) == pytest.approx(float(r["tau"]) / (__import__("math").log2(int(r["l"])) / int(r["l"])), rel=1e-5)


def test_compare_alt_sheet_ls(capsys):
    _, out, _ = run(capsys, "compare", "--sheet", "alt", "--methods", "dinur-alt")
    assert [int(r["l"]) for r in rows_of(out)] == [2, 4, 8, 16, 32, 64, 128]


def test_table1_guard(capsys):
    code, _, err = run(capsys, "table1", "--row", "6,6")
    assert code == EXIT_USAGE and "--force" in err


def test_table1_single_row(capsys):
    code, out, _ = run(capsys, "table1", "--row", "4,2")
    (row,) = rows_of(out)
    assert code == EXIT_OK
    assert abs(int(row["d_quadratic"]) - 3) <= 1
    assert abs(int(row["d_alt"]) - 8) <= 1


def test_thread_cap_env(planted_file, capsys, monkeypatch):
    monkeypatch.setenv("RMQ_LAB_THREADS", "1")
    assert main(["solve", str(planted_file), "--method", "xl"]) == EXIT_OK
    monkeypatch.setenv("RMQ_LAB_THREADS", "many")
    assert main(["solve", str(planted_file), "--method", "xl"]) == EXIT_USAGE


def test_console_script_runs():
    out = subprocess.run(["rmq-lab", "estimate", "--method", "brute", "--l", "2"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.startswith(HEADER)
    mod = subprocess.run([sys.executable, "-m", "rmqlab.cli", "--version"], capture_output=True, text=True)
    assert mod.returncode == 0 and "rmq-lab" in mod.stdout

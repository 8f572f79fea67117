import csv
import io
import math

import pytest

from edtqueue import cli
from edtqueue.cli import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_edt_pdf_atom_row(capsys):
    code, out, _ = run(["edt-pdf", "--ttr", "10", "--lambda", "3", "--mu", "2",
                        "--points", "50"], capsys)
    assert code == EXIT_OK
    rows = _rows(out)
    assert rows[0] == ["kind", "t", "value"]
    atoms = [r for r in rows[1:] if r[0] == "atom"]
    assert len(atoms) == 1
    assert float(atoms[0][1]) == 10.0
    assert float(atoms[0][2]) == pytest.approx(0.4 * math.exp(-5.0), rel=1e-15)
    dens = [r for r in rows[1:] if r[0] == "density"]
    assert len(dens) == 50
    assert all(float(r[2]) >= 0.0 for r in dens)


def test_queue_fig9_point(capsys):
    code, out, _ = run(["queue", "--ttr", "3", "--lambda", "10", "--mu", "2", "--psi", "25"],
                       capsys)
    assert code == EXIT_OK
    header, row = _rows(out)
    assert header == ["psi", "e_st", "e_st2", "p0", "e_q", "e_nq", "e_d_two_type",
                      "e_d_conventional"]
    rec = dict(zip(header, map(float, row)))
    assert rec["psi"] == 25.0
    assert rec["e_d_two_type"] == pytest.approx(70.905, abs=5e-3)
    assert rec["e_d_conventional"] == pytest.approx(86.917, abs=5e-3)


def test_queue_sweep_has_one_row_per_psi(capsys):
    code, out, _ = run(["queue", "--preset", "fig9"], capsys)
    assert code == EXIT_OK
    assert [float(r[0]) for r in _rows(out)[1:]] == [25.0, 30.0, 40.0, 50.0, 60.0]


def test_csv_is_deterministic_with_17_digits(capsys):
    argv = ["edt-pmf", "--ttr", "10", "--lambda", "3", "--mu", "2", "--ts", "0.5"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first == second
    rows = _rows(first)
    assert rows[0] == ["n", "t", "prob"]
    assert rows[1][:2] == ["0", "10"]
    assert sum(float(r[2]) for r in rows[1:]) == pytest.approx(1.0, abs=1e-9)
    assert float(rows[2][1]) == 10.5


def test_moments_rows(capsys):
    code, out, _ = run(["moments", "--ttr", "3", "--lambda", "10", "--mu", "2",
                        "--ts", "0.5", "--psi", "25"], capsys)
    assert code == EXIT_OK
    rows = {r[0]: r[1:] for r in _rows(out)[1:]}
    assert set(rows) == {"pon_continuous", "poff_continuous", "pon_periodic", "poff_periodic",
                         "p_on_type2"}
    assert float(rows["poff_continuous"][0]) == pytest.approx(18.0, rel=1e-12)
    assert rows["p_on_type2"][1] == ""


def test_edt_random_density(capsys):
    code, out, _ = run(["edt-random", "--preset", "fig7", "--points", "40", "--t-max", "20"],
                       capsys)
    assert code == EXIT_OK
    rows = _rows(out)
    assert rows[0] == ["t", "density"]
    assert len(rows) == 41


def test_snr_db_converted_at_boundary():
    assert cli.db_to_linear(8.0) == pytest.approx(10 ** 0.8)
    assert cli.db_to_linear(0.0) == 1.0


def test_unknown_subcommand_exits_2(capsys):
    code, _, err = run(["frobnicate"], capsys)
    assert code == EXIT_USAGE
    assert "usage" in err


def test_missing_parameter_exits_2(capsys):
    code, _, err = run(["edt-pdf", "--lambda", "3", "--mu", "2"], capsys)
    assert code == EXIT_USAGE
    assert "--ttr" in err


def test_unstable_queue_exits_2(capsys):
    code, _, err = run(["queue", "--ttr", "3", "--lambda", "10", "--mu", "2", "--psi", "10"],
                       capsys)
    assert code == EXIT_USAGE
    assert "18" in err


def test_negative_parameter_exits_2(capsys):
    code, _, _ = run(["edt-pdf", "--ttr", "-1", "--lambda", "3", "--mu", "2"], capsys)
    assert code == EXIT_USAGE


def test_scenario_file_and_flag_precedence(tmp_path, capsys):
    sc = tmp_path / "s.txt"
    sc.write_text("# fig9 point\nttr = 3\nlambda = 10\nmu = 2\npsi = 25 30\n")
    code, out, _ = run(["queue", "--scenario", str(sc)], capsys)
    assert code == EXIT_OK
    assert [float(r[0]) for r in _rows(out)[1:]] == [25.0, 30.0]
    code, out, _ = run(["queue", "--scenario", str(sc), "--psi", "40"], capsys)
    assert code == EXIT_OK
    assert [float(r[0]) for r in _rows(out)[1:]] == [40.0]


def test_scenario_unknown_key_exits_2(tmp_path, capsys):
    sc = tmp_path / "s.txt"
    sc.write_text("ttr = 3\ncolour = blue\n")
    code, _, err = run(["queue", "--scenario", str(sc)], capsys)
    assert code == EXIT_USAGE
    assert "colour" in err


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = run(["edt-pmf", "--preset", "fig5"], capsys)
    assert code == EXIT_OK
    assert out == ""
    assert (tmp_path / "edt-pmf.csv").read_text().startswith("n,t,prob")


def test_output_flag(tmp_path, capsys):
    path = tmp_path / "q.csv"
    code, out, _ = run(["queue", "--preset", "fig9", "--psi", "30", "--output", str(path)],
                       capsys)
    assert code == EXIT_OK
    assert out == ""
    assert len(_rows(path.read_text())) == 2


def test_simulate_edt_is_reproducible(capsys):
    argv = ["simulate", "--preset", "fig4", "--samples", "20000", "--seed", "7", "--bins", "20"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first == second
    atoms = [r for r in _rows(first)[1:] if r[0] == "atom"]
    assert float(atoms[0][1]) == 10.0


def test_simulate_queue_row(capsys):
    code, out, _ = run(["simulate", "--preset", "fig9", "--psi", "40", "--samples", "20000",
                        "--seed", "1"], capsys)
    assert code == EXIT_OK
    header, row = _rows(out)
    rec = dict(zip(header, row))
    assert rec["unstable"] == "0"
    assert float(rec["mean_delay"]) > 3.0


def test_validate_fig4_preset_passes(capsys):
    code, out, _ = run(["validate", "--preset", "fig4", "--samples", "1000000", "--seed", "42"],
                       capsys)
    assert code == EXIT_OK
    assert out.startswith("PASS fig4")
    ks = [ln for ln in out.splitlines() if "KS distance" in ln][0]
    assert float(ks.split(":")[1].split()[0]) <= 0.002


def test_validate_negative_control_exits_4(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = run(["validate", "--criteria", "fig4", "--lambda-scale", "1.1",
                        "--samples", "1000000", "--seed", "42"], capsys)
    assert code == EXIT_VALIDATION
    assert out.startswith("FAIL fig4")
    assert (tmp_path / "validate.txt").read_text() == out

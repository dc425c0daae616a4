import math

import numpy as np
import pytest

from hho_leray.cli import main
from hho_leray.harness import (CSV_COLUMNS, DESK_CAPS, RunConfig, emit_table,
                               render_csv, run_study, strip_wall_ms,
                               write_csv)


def small_config(**kw):
    base = dict(case="nondeg-flux", p_list=(1.5,), k_list=(1,),
                n_list=(2, 4), delta=1.0)
    base.update(kw)
    return RunConfig(**base)


def test_csv_columns():
    assert CSV_COLUMNS == ("case", "p", "k", "n", "h", "ndof", "error",
                           "eoc", "newton_iters", "eta_tilde", "regime",
                           "wall_ms")


def test_run_study_records():
    records, failures = run_study(small_config())
    assert failures == []
    assert [r.n for r in records] == [2, 4]
    assert math.isnan(records[0].eoc)
    assert records[1].eoc > 0.0
    assert records[0].error > records[1].error
    # eta = pi h^2 at delta = 1 crosses 1 between n = 2 and n = 4
    assert [r.regime for r in records] == ["degenerate", "non-degenerate"]
    # ndof counts element modes plus free-face modes
    assert records[0].ndof == 8 * 3 + 8 * 2


def test_csv_deterministic_without_wall_ms():
    cfg = small_config()
    a = render_csv(run_study(cfg)[0])
    b = render_csv(run_study(cfg)[0])
    assert strip_wall_ms(a) == strip_wall_ms(b)
    assert a.splitlines()[0] == ",".join(CSV_COLUMNS)


def test_strip_wall_ms_drops_only_that_column():
    text = "a,wall_ms,b\n1,2.5,3\n"
    assert strip_wall_ms(text) == "a,b\n1,3\n"


def test_write_csv_and_out_dir(tmp_path):
    cfg = small_config(out_dir=str(tmp_path / "study"))
    records, _ = run_study(cfg)
    csv_path = tmp_path / "study" / "results.csv"
    md_path = tmp_path / "study" / "tables.md"
    assert csv_path.exists() and md_path.exists()
    assert csv_path.read_text() == render_csv(records)
    other = tmp_path / "direct.csv"
    write_csv(records, other)
    assert other.read_text() == csv_path.read_text()


def test_emit_table_bracket_and_rates():
    records, _ = run_study(small_config())
    table = emit_table(records)
    assert "### nondeg-flux" in table
    assert "| h | k=1, p=1.5 |" in table
    assert "1 ~ 2" in table            # (k+1)(p-1) ~ (k+1) on the first row
    rate = "%.2f" % records[1].eoc
    assert rate in table


def test_config_validation_messages():
    with pytest.raises(ValueError, match="choose from"):
        RunConfig(case="nope")
    with pytest.raises(ValueError, match="outside the supported range"):
        small_config(p_list=(2.5,))
    with pytest.raises(ValueError, match="choose 1, 2, or 3"):
        small_config(k_list=(4,))
    with pytest.raises(ValueError, match="increasing"):
        small_config(n_list=(8, 4))
    with pytest.raises(ValueError, match="cap"):
        small_config(k_list=(3,), n_list=(16, 64))


def test_desk_caps():
    assert DESK_CAPS == {1: 128, 2: 64, 3: 32}


def test_cli_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "cli"
    rc = main(["run", "--case", "nondeg-flux", "--p", "1.5", "--k", "1",
               "--n", "2 4", "--out", str(out)])
    assert rc == 0
    captured = capsys.readouterr()
    assert "### nondeg-flux" in captured.out
    assert (out / "results.csv").exists()
    header = (out / "results.csv").read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)


def test_cli_comma_separated_lists(tmp_path):
    rc = main(["run", "--case", "nondeg-flux", "--p", "1.5,2.0", "--k", "1",
               "--n", "2,4", "--out", str(tmp_path / "x")])
    assert rc == 0
    text = (tmp_path / "x" / "results.csv").read_text()
    assert "nondeg-flux,2," in text


def test_cli_rejects_bad_config(capsys):
    rc = main(["run", "--case", "nondeg-flux", "--n", "8 4"])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_cli_accept_smoke(capsys):
    rc = main(["accept", "--smoke"])
    out = capsys.readouterr().out
    assert rc == 0
    lines = [ln for ln in out.splitlines() if ln.startswith(("PASS", "FAIL"))]
    assert len(lines) == 9
    assert all(ln.startswith("PASS") for ln in lines)


def test_cli_mesh_info(tmp_path, capsys):
    from hho_leray.mesh import build_structured_triangular, save_mesh
    path = tmp_path / "m.txt"
    save_mesh(build_structured_triangular(2), path)
    rc = main(["mesh-info", str(path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "n_elements: 8" in out
    assert "n_faces: 16" in out


def test_cli_mesh_info_bad_file(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("nonsense\n")
    rc = main(["mesh-info", str(path)])
    assert rc == 2
    assert "error" in capsys.readouterr().err

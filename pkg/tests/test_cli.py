import json
import subprocess
import sys

import pytest

from weakener_sim.cli import main
from weakener_sim.harness import CSV_COLUMNS
from weakener_sim.histories import History


def test_json_summary(capsys):
    assert main(["--n", "3", "--backend", "strong", "--trials", "20", "--seed", "1"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["trials"] == 20 and d["all_returned_frac"] == 1.0


def test_csv_row(capsys):
    main(["--backend", "atomic", "--trials", "5", "--out", "csv", "--record-history"])
    header, row = capsys.readouterr().out.strip().splitlines()
    assert header.split(",") == list(CSV_COLUMNS)
    assert row.split(",")[-2:] == ["5", "5"]


def test_adversary_with_rounds_cap(capsys):
    main(["--backend", "linearizable", "--scheduler", "weakener-adversary", "--trials", "2", "--rounds-cap", "7"])
    d = json.loads(capsys.readouterr().out)
    assert d["all_returned_frac"] == 0.0 and d["min_rounds"] == 7


def test_trace_out(tmp_path, capsys):
    path = tmp_path / "traces.ndjson"
    main(["--trials", "3", "--trace-out", str(path)])
    chunks = [c for c in path.read_text().split("\n\n") if c.strip()]
    assert len(chunks) == 3
    assert all(History.from_ndjson(c).events for c in chunks)
    assert json.loads(capsys.readouterr().out)["lin_check_pass"] == 3


def test_minimax_mode(capsys):
    main(["--minimax", "--backend", "atomic"])
    d = json.loads(capsys.readouterr().out)
    assert d["value"] == {"numerator": 1, "denominator": 2}


def test_bad_backend_rejected():
    with pytest.raises(SystemExit):
        main(["--backend", "regular"])


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "weakener_sim", "--trials", "2"], capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["trials"] == 2

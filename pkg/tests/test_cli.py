import csv
import io
import json
import subprocess
import sys

import pytest

from gonlab.cli import run


def _run(args):
    out = io.StringIO()
    code = run(args, out)
    return code, out.getvalue()


def test_psi_writes_pell_denominators(tmp_path):
    path = tmp_path / "seq.csv"
    code, _ = _run(["psi", "--matrix", '[["sqrt:2"]]', "--m", "1", "--n", "1", "--tmax", "100", "--out", str(path)])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert [int(r["M_l"]) for r in rows] == [1, 2, 5, 12, 29, 70]
    assert path.read_bytes().count(b"\r\n") == len(rows) + 1


def test_template_validates():
    code, text = _run(["template", "--Q", "rat:3", "--levels", "2", "--validate"])
    assert code == 0 and json.loads(text)["ok"]


def test_weights_zero_weight_exit_codes():
    assert _run(["weights", "--m", "2", "--n", "2", "--k", "2", "--require-nonzero"])[0] == 1
    assert _run(["weights", "--m", "2", "--n", "2", "--k", "2"])[0] == 0
    assert _run(["weights", "--m", "2", "--n", "1", "--k", "1", "--require-nonzero"])[0] == 0


def test_json_schema():
    code, text = _run(["bad", "--matrix", '[["sqrt:2"]]', "--eta", '["1/2"]', "--Q", "10"])
    doc = json.loads(text)
    assert code == 0
    assert doc["schema"] == "gonlab/1" and doc["command"] == "bad"
    assert set(doc) == {"schema", "command", "query", "ok", "result"}
    assert doc["result"]["q"] == [1]


def test_format_flag_overrides_suffix(tmp_path):
    path = tmp_path / "out.csv"
    code, _ = _run(["psi", "--matrix", '[["sqrt:2"]]', "--tmax", "30", "--out", str(path), "--format", "json"])
    assert code == 0 and json.loads(path.read_text())["schema"] == "gonlab/1"


def test_config_merge(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"matrix": [["sqrt:2"]], "eta": ["1/2"], "Q": 10}))
    code, text = _run(["bad", "--config", str(cfg)])
    assert code == 0 and json.loads(text)["result"]["shell"] == [1, 10]
    code, text = _run(["bad", "--config", str(cfg), "--Q", "20"])
    assert code == 0 and json.loads(text)["result"]["shell"] == [1, 20]


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"matrix": [["sqrt:2"]], "Q": 10, "bogus": 1}))
    assert _run(["bad", "--config", str(cfg)])[0] == 2


@pytest.mark.parametrize("args", [
    ["psi", "--matrix", "[[not json"],
    ["bad", "--matrix", '[["sqrt:2"]]'],
    ["template", "--Q", "rat:2"],
    ["nosuchcommand"],
    [],
])
def test_bad_input_exits_two(args):
    assert _run(args)[0] == 2


def test_output_is_deterministic():
    args = ["measure", "--matrix", '[["sqrt:2"]]', "--resolution", "50", "--epsilon", "1/20", "--Q", "200"]
    assert _run(args) == _run(args)
    args = ["bmeasure", "--M", "4", "--epsilon", "1/10", "--m", "3", "--samples", "2000", "--seed", "7"]
    assert _run(args) == _run(args)


def test_threads_do_not_change_output():
    base = ["bmeasure", "--M", "4", "--epsilon", "1/10", "--m", "3", "--samples", "2000", "--seed", "7"]
    assert _run(base + ["--threads", "1"])[1] == _run(base + ["--threads", "4"])[1]


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "gonlab.cli", "template", "--Q", "rat:3"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["command"] == "template"

import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from frobdens import cli, groups
from frobdens.errors import BadInput

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = sorted((ROOT / "scenarios").glob("*.json"))


def run(*argv):
    out = io.StringIO()
    code = cli.main(["--threads", "1", *argv], out)
    return code, out.getvalue()


def write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def tsv_rows(text):
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    header = lines[0].split("\t")
    return header, [dict(zip(header, l.split("\t"))) for l in lines[1:]]


def test_predict_examples():
    assert run("predict", str(ROOT / "scenarios/a1_abelian_tower.json")) == (0, "1/2\n")
    assert run("predict", str(ROOT / "scenarios/all_primes.json")) == (0, "1/1\n")
    assert run("predict", str(ROOT / "scenarios/cross_field_mismatch.json")) == (0, "0/1\n")
    assert run("predict", str(ROOT / "scenarios/a2_cubic_alternating.json")) == (0, "1/3\n")
    assert run("predict", str(ROOT / "scenarios/a4_cross_field.json")) == (0, "1/2\n")


def test_predict_not_predictable_exit_3():
    code, out = run("predict", str(ROOT / "scenarios/not_predictable.json"))
    assert code == 3 and out == ""


@pytest.mark.parametrize("path", SCENARIOS, ids=[p.stem for p in SCENARIOS])
def test_every_scenario_round_trips(path):
    sf = cli.load_path(path)
    assert sf.scenario is not None
    doc = json.loads(path.read_text())
    code, _ = run("predict", str(path))
    assert code in (0, 3)
    code, text = run("group", str(path))
    assert code == 0 and text.startswith("# ")
    code, text = run("estimate", str(path))
    assert code == 0
    header, rows = tsv_rows(text)
    assert header == list(cli.TSV_HEADER)
    assert rows[-1]["estimator"] == "counting"
    if code == 0 and "lprobe" in doc:
        code, text = run("lprobe", str(path))
        assert code == 0 and len(text.splitlines()) == 2 + len(doc["lprobe"]["s"])


def test_verify_a1_exit_0():
    code, text = run("verify", str(ROOT / "scenarios/a1_abelian_tower.json"))
    _, rows = tsv_rows(text)
    assert rows[-1]["pass"] == "PASS"
    assert code == 0, text


def test_verify_negative_control_exit_1():
    code, text = run("verify", str(ROOT / "scenarios/a1_negative_control.json"))
    assert code == 1
    assert text.rstrip().endswith("FAIL")


def test_verify_all_primes_exit_0():
    code, text = run("verify", str(ROOT / "scenarios/all_primes.json"))
    assert code == 0
    _, rows = tsv_rows(text)
    assert {r["value"] for r in rows} == {"1.000000"}


def test_estimate_not_predictable_still_runs():
    code, text = run("estimate", str(ROOT / "scenarios/not_predictable.json"))
    assert code == 0
    assert "not predictable" in text


def test_output_is_deterministic(tmp_path):
    doc = {"field": {"type": "abelian", "m": 15, "U": [11]},
           "set": {"type": "congruence", "modulus": 15, "residues": [2]},
           "x": {"residue": 2, "modulus": 5}, "X": 200000}
    path = write(tmp_path, doc)
    outs = set()
    for _ in range(2):
        out = io.StringIO()
        cli.main(["--threads", "3", "estimate", path], out)
        outs.add(out.getvalue())
    assert len(outs) == 1
    single = io.StringIO()
    cli.main(["--threads", "1", "estimate", path], single)
    assert outs == {single.getvalue()}


def test_lemma_command():
    code, text = run("lemma", "--d", "2", "--p", "3")
    assert code == 0
    _, rows = tsv_rows(text)
    verdicts = {r["psi_exp"]: r["verdict"] for r in rows}
    assert verdicts == {"0": "true", "1": "not-covered"}
    code, text = run("lemma", "--d", "6", "--p", "7", "--level", "2")
    _, rows = tsv_rows(text)
    assert code == 0
    assert {r["verdict"] for r in rows if r["ord_psi"] != "6"} == {"true"}


def test_lemma_bad_input():
    assert run("lemma", "--d", "4", "--p", "7")[0] == 2
    assert run("lemma", "--d", "2", "--p", "3", "--chi", "3")[0] == 2


def test_lprobe_output(tmp_path):
    code, text = run("lprobe", str(ROOT / "scenarios/lprobe_gaussian.json"))
    assert code == 0
    header, rows = tsv_rows(text)
    assert header == ["s", "log_product_re", "log_product_im", "model", "difference_re"]
    assert [r["s"] for r in rows] == ["0.700000", "0.600000", "0.550000", "0.520000"]
    bad = write(tmp_path, {"field": {"type": "abelian", "m": 15, "U": [11]}, "lprobe": {"s": [1.0]}})
    assert run("lprobe", bad)[0] == 2


def test_group_report_s3():
    code, text = run("group", str(ROOT / "scenarios/a2_cubic_alternating.json"))
    assert code == 0
    assert "order\tG=6\tH=3\tQ=2" in text


@pytest.mark.parametrize(
    "doc",
    [
        {},
        {"field": {"type": "abelian"}},
        {"field": {"type": "abelian", "m": 15}, "set": {"type": "congruence", "modulus": 15}},
        {"field": {"type": "abelian", "m": 15}, "x": 3},
        {"field": {"type": "sn", "poly": [1, 0, -3, 1]}},
        {"field": {"type": "abelian", "m": 15}, "tolerance": "wide"},
        {"field": {"type": "abelian", "m": 15}, "schedule": [[0.1, 100], [0.2, 1000]]},
        {"field": {"type": "abelian", "m": 15}, "psi": {"type": "point_mass"}},
    ],
)
def test_bad_input_exit_2(tmp_path, doc):
    assert run("predict", write(tmp_path, doc))[0] == 2


def test_missing_file_exit_2(tmp_path):
    assert run("predict", str(tmp_path / "nope.json"))[0] == 2
    (tmp_path / "broken.json").write_text("{")
    assert run("predict", str(tmp_path / "broken.json"))[0] == 2


def test_load_rejects_schema_violations():
    with pytest.raises(BadInput):
        cli.load({"field": {"type": "abelian", "m": 15}, "bogus": 1})


def test_psi_prediction(tmp_path):
    base = {"field": {"type": "abelian", "m": 15, "U": [11]},
            "set": {"type": "congruence", "modulus": 15, "residues": [2]}}
    doc = dict(base, psi={"type": "point_mass", "at": {"residue": 2, "modulus": 5}})
    assert run("predict", write(tmp_path, doc))[1] == "1/2\n"
    doc = dict(base, psi={"type": "trivial"})
    # densities 1/2 at x = 2, 0 elsewhere: averaged over four elements
    assert run("predict", write(tmp_path, doc))[1] == "1/8\n"
    doc = dict(base, psi={"type": "values", "values": [0, 4, 0, 0]})
    code, out = run("predict", write(tmp_path, doc))
    assert code == 0


def test_seed_sets_spot_check_seed():
    cli.main(["--seed", "17", "lemma", "--d", "2", "--p", "3"], io.StringIO())
    assert groups.SPOT_CHECK_SEED == 17
    cli.main(["--seed", "0", "lemma", "--d", "2", "--p", "3"], io.StringIO())


def test_threads_must_be_positive():
    assert cli.main(["--threads", "0", "lemma", "--d", "2", "--p", "3"], io.StringIO()) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "frobdens", "predict", str(ROOT / "scenarios/all_primes.json")],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout == "1/1\n"

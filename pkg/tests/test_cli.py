import json
import subprocess
import sys

import pytest

from motivic_serre.blowup import center_from_json, center_to_json
from motivic_serre.catalog import catalog
from motivic_serre.cli import main
from motivic_serre.model import datum_from_json, datum_to_json, model_from_json, model_to_json
from motivic_serre.verify import local_instance, published_seeds


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def i0star(tmp_path):
    return write(tmp_path / "i0s.json", model_to_json(catalog("I0*")))


def test_validate_ok(capsys, i0star):
    code, out, _ = run(capsys, "validate", i0star)
    assert code == 0 and out.strip() == "valid"


def test_validate_key_too_large(capsys, tmp_path):
    obj = model_to_json(catalog("I_n", 3))
    obj["strata"].append({"components": [1, 2, 3], "class": [{"syms": ["pt"], "lpoly": {"0": "1"}}]})
    code, out, _ = run(capsys, "validate", write(tmp_path / "m.json", obj), "--json")
    assert code == 1
    report = json.loads(out)
    assert not report["valid"] and any("#H" in v for v in report["violations"])


def test_validate_bad_rational_exit_2(capsys, tmp_path):
    obj = model_to_json(catalog("I0*"))
    obj["strata"][0]["class"][0]["lpoly"]["0"] = "1/0"
    code, _, err = run(capsys, "validate", write(tmp_path / "m.json", obj))
    assert code == 2 and "1/0" in err


def test_validate_json_syntax_error_has_location(capsys, tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"fiber_dim": 1,\n  "components": [}')
    code, _, err = run(capsys, "validate", str(p))
    assert code == 2 and ":2:" in err


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "validate", tmp_path / "nope.json")
    assert code == 2 and "no such file" in err


def test_invariant_i0star(capsys, i0star):
    code, out, _ = run(capsys, "invariant", i0star, "--assign", '{"*": "1"}', "--q", 4)
    assert code == 0
    assert "S~ mod (L-1)^2: 4 + 2*(L-1)" in out
    assert "1 mod 3" in out


def test_invariant_i0star_json(capsys, i0star):
    code, out, _ = run(capsys, "invariant", i0star, "--assign", '{"pt": "1"}', "--q", 4, "--json")
    payload = json.loads(out)
    assert code == 0
    assert payload["serre_tilde_substituted"] == ["4", "2"]
    assert payload["specialization"]["residue"] == 1 and payload["specialization"]["modulus"] == 3


@pytest.mark.parametrize("n", range(2, 7))
def test_invariant_cycles(capsys, tmp_path, n):
    path = write(tmp_path / "c.json", model_to_json(catalog("I_n", n)))
    code, out, _ = run(capsys, "invariant", path, "--assign", '{"*": "1"}')
    assert code == 0 and "S~ mod (L-1)^2: 0 + 0*(L-1)" in out


def test_invariant_single_double_component(capsys, tmp_path):
    obj = {"fiber_dim": 1, "components": [{"id": 1, "multiplicity": 2}],
           "strata": [{"components": [1], "class": [{"syms": ["E"], "lpoly": {"0": "1"}}]}]}
    code, out, _ = run(capsys, "invariant", write(tmp_path / "m.json", obj), "--json")
    payload = json.loads(out)
    assert code == 0 and payload["serre"]["terms"] == [] and payload["serre_tilde"]["terms"] == []


def test_invariant_mod_power_and_file_assignment(capsys, tmp_path, i0star):
    assign = write(tmp_path / "a.json", {"pt": {"0": "1"}})
    code, out, _ = run(capsys, "invariant", i0star, "--assign", assign, "--mod-power", 3)
    assert code == 0 and "S~ mod (L-1)^3: 4 + 2*(L-1) + 0*(L-1)^2" in out


def test_invariant_specialization_error_verbatim(capsys, tmp_path):
    obj = {"fiber_dim": 1, "components": [{"id": 1, "multiplicity": 1}],
           "strata": [{"components": [1], "class": [{"syms": ["X"], "lpoly": {"0": "1"}}]}]}
    path = write(tmp_path / "m.json", obj)
    code, _, err = run(capsys, "invariant", path, "--assign", '{"X": "1/2"}', "--q", 3)
    assert code == 1 and "not invertible modulo 2" in err
    code, out, _ = run(capsys, "invariant", path, "--assign", '{"X": "1/2"}', "--q", 4)
    assert code == 0 and "2 mod 3" in out


def test_invariant_q_without_assign(capsys, i0star):
    code, _, err = run(capsys, "invariant", i0star, "--q", 4)
    assert code == 2 and "--assign" in err


def _local_files(tmp_path, mults, J, c):
    inst = local_instance(mults, J, c)
    return (write(tmp_path / "m.json", model_to_json(inst.model)),
            write(tmp_path / "z.json", center_to_json(inst.center)),
            write(tmp_path / "d.json", datum_to_json(inst.datum)), inst)


def test_blowup_curve_case(capsys, tmp_path):
    m, z, d, inst = _local_files(tmp_path, [1], [1], 2)
    code, out, _ = run(capsys, "blowup", m, z, d, "--out", tmp_path / "y")
    assert code == 0
    new = model_from_json(json.loads((tmp_path / "y.model.json").read_text()))
    assert new.components == {0: 1, 1: 1}
    log = json.loads((tmp_path / "y.log.json").read_text())
    assert log["a0"] == 1 and log["exceptional_id"] == 0
    datum_from_json(json.loads((tmp_path / "y.datum.json").read_text()))


def test_blowup_a0_sum_and_round_trip(capsys, tmp_path):
    from motivic_serre.blowup import blow_up
    m, z, d, inst = _local_files(tmp_path, [2, 3], [1, 2], 3)
    code, out, _ = run(capsys, "blowup", m, z, d, "--out", tmp_path / "y", "--json")
    assert code == 0 and json.loads(out)["move_log"]["a0"] == 5
    res = blow_up(inst.model, inst.center, inst.datum)
    assert model_from_json(json.loads((tmp_path / "y.model.json").read_text())) == res.new_model
    assert datum_from_json(json.loads((tmp_path / "y.datum.json").read_text())) == res.transported_datum


def test_blowup_without_datum_uses_full_fiber(capsys, tmp_path):
    m, z, _, _ = _local_files(tmp_path, [1, 2], [1], 2)
    code, _, _ = run(capsys, "blowup", m, z, "--out", tmp_path / "y")
    assert code == 0 and (tmp_path / "y.datum.json").exists()


def test_blowup_inadmissible(capsys, tmp_path):
    m, _, d, _ = _local_files(tmp_path, [1], [1], 2)
    z = write(tmp_path / "bad.json", {"contains": [1], "codim": 1, "traces": []})
    code, _, err = run(capsys, "blowup", m, z, "--out", tmp_path / "y")
    assert code == 1 and "codim >= 2 required" in err


def test_center_round_trip(tmp_path):
    inst = local_instance([2, 3], [1], 2)
    assert center_from_json(json.loads(json.dumps(center_to_json(inst.center)))) == inst.center


def test_verify_published_seeds_file(capsys, tmp_path):
    seeds = write(tmp_path / "seeds.json", published_seeds()[:50])
    report = tmp_path / "r.json"
    for n in (1, 2):
        code, out, _ = run(capsys, "verify", "--seeds", seeds, "--mod-power", n, "--report", report)
        assert code == 0 and "0 failure(s)" in out
        records = json.loads(report.read_text())
        assert len(records) == 50 and all(r["equal"] for r in records)


def test_verify_seed_trials_and_chain(capsys):
    code, out, _ = run(capsys, "verify", "--seed", 7, "--trials", 5, "--json")
    assert code == 0 and json.loads(out)["trials"] == 5
    code, out, _ = run(capsys, "verify", "--seed", 7, "--trials", 3, "--chain", 4)
    assert code == 0 and "3 trials" in out


def test_verify_probe_deep(capsys, tmp_path):
    report = tmp_path / "probe.json"
    code, out, _ = run(capsys, "verify", "--family", "deep", "--mod-power", 3, "--probe",
                       "--report", report, "--json")
    payload = json.loads(out)
    assert code == 0 and payload["failures"] > 0
    assert len(json.loads(report.read_text())) == payload["trials"]


def test_verify_failure_exit_1_without_probe(capsys):
    code, _, _ = run(capsys, "verify", "--family", "deep", "--mod-power", 3)
    assert code == 1


def test_verify_conflicting_seed_options(capsys, tmp_path):
    seeds = write(tmp_path / "s.json", [1, 2])
    code, _, _ = run(capsys, "verify", "--seeds", seeds, "--seed", 1)
    assert code == 2


def test_catalog_i0star(capsys, tmp_path):
    out = tmp_path / "f.json"
    code, _, _ = run(capsys, "catalog", "--type", "I0*", "--out", out)
    model = model_from_json(json.loads(out.read_text()))
    assert code == 0
    assert sorted(model.components.values()) == [1, 1, 1, 1, 2]
    assert sum(1 for H, v in model.strata.items() if len(H) == 2 and v) == 4


def test_catalog_cycle_stdout(capsys):
    code, out, _ = run(capsys, "catalog", "--type", "I_n", "--param", 4)
    model = model_from_json(json.loads(out))
    assert code == 0 and model.components == {1: 1, 2: 1, 3: 1, 4: 1}


def test_catalog_bogus(capsys):
    code, _, err = run(capsys, "catalog", "--type", "bogus")
    assert code == 1 and "I0*" in err


def test_solve_bound(capsys):
    code, out, _ = run(capsys, "solve", "--bound", 5)
    assert code == 0 and "c(1,1)=1" in out and "satisfies every equation: yes" in out


def test_solve_refine_json(capsys):
    code, out, _ = run(capsys, "solve", "--refine", "--sizes", 1, 2, "--max-fiber-dim", 2, "--json")
    payload = json.loads(out)
    assert code == 0 and payload["status"] in ("unique", "family", "inconsistent")


def test_solve_needs_mode(capsys):
    assert run(capsys, "solve")[0] == 2


def test_mod_power_validation(capsys, i0star):
    assert run(capsys, "invariant", i0star, "--mod-power", 0)[0] == 2


def test_console_entry_point(i0star):
    proc = subprocess.run([sys.executable, "-m", "motivic_serre", "validate", i0star],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "valid" in proc.stdout

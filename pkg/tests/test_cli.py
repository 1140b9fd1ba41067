import json
import subprocess
import sys

import pytest

from coaction_tower.cli import main
from coaction_tower.runner import EXIT_CODES, run
from coaction_tower.specfile import SpecError, bundled_spec, bundled_spec_names, load_spec, parse_spec

BUNDLED = ["corrupted_v", "noninvariant_phi", "s3_c3", "translation_z2", "trivial_c2", "twisted_m2",
           "z2_flip", "z2_inner_m2"]


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out.strip().splitlines(), err


def summary_of(lines):
    return json.loads(lines[-1])["summary"]


def write(tmp_path, data, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(path)


FLIP = {
    "algebra": {"blocks": [1, 1], "weights": [0.5, 0.5]},
    "hopf": {"kind": "function_algebra", "group": "Z2"},
    "coaction": {"kind": "group_action", "maps": [{"permutation": [0, 1]}, {"permutation": [1, 0]}]},
}


def test_list(capsys):
    code, lines, _ = invoke(capsys, "list")
    assert code == 0 and lines == BUNDLED == bundled_spec_names()


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_specs_parse(name):
    spec = bundled_spec(name)
    assert spec.algebra is not None


def test_check_flip(capsys, tmp_path):
    out = tmp_path / "report.jsonl"
    code, lines, _ = invoke(capsys, "check", "z2_flip", "--output", str(out))
    summary = summary_of(lines)
    assert code == 0 and summary["all_pass"]
    assert summary["poincare_series"] == [1, 1, 2, 4, 8]
    assert summary["cofaithful"] is True
    assert summary["delta"] == pytest.approx(2**0.5)
    records = [json.loads(line) for line in lines[:-1]]
    assert {r["suite"] for r in records} == set(EXIT_CODES)
    assert any(r["name"] == "TL/e_idempotent" for r in records)
    assert out.read_text().splitlines() == lines


def test_corrupted_table_exits_with_coaction_code(capsys):
    code, lines, _ = invoke(capsys, "check", "corrupted_v")
    summary = summary_of(lines)
    assert code == EXIT_CODES["coaction"] == 4
    assert summary["first_failing_suite"] == "coaction"
    records = [json.loads(line) for line in lines[:-1]]
    coproduct = next(r for r in records if r["name"] == "coef_coproduct")
    assert coproduct["max_residual"] >= 0.01
    skipped = {r["suite"] for r in records if r["status"] == "skip" and "prerequisite" in r["detail"]}
    assert skipped == {"tower", "equivariance", "fixed_points", "closure", "kac"}


def test_noninvariant_phi_fails_only_invariance_records(capsys):
    code, lines, _ = invoke(capsys, "check", "noninvariant_phi", "--suite", "coaction")
    records = [json.loads(line) for line in lines[:-1]]
    failed = {r["name"] for r in records if r["status"] == "fail"}
    assert code == 4
    assert failed == {"coef_antipode", "coef_counit_unit", "coef_multiplication_right", "phi_invariance"}


def test_hopf_failure_blocks_dependent_suites(capsys, tmp_path):
    data = {
        "algebra": {"blocks": [1, 1], "weights": [0.5, 0.5]},
        "hopf": {"kind": "custom", "dim": 2,
                 "m": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]],
                 "delta": [[[1, 0], [0, 1]], [[0, 1], [1, 0]]],
                 "eps": [1, 0], "s": [[0, 1], [1, 0]], "star": [[1, 0], [0, 1]]},
        "coaction": {"kind": "trivial"},
        "run": {"suites": ["hopf", "coaction", "tower"]},
    }
    code, lines, _ = invoke(capsys, "check", write(tmp_path, data))
    assert code == EXIT_CODES["hopf"] == 3
    records = [json.loads(line) for line in lines[:-1]]
    assert [r["status"] for r in records if r["suite"] in ("coaction", "tower")] == ["skip", "skip"]


def test_poincare_and_fixed_points(capsys):
    code, lines, _ = invoke(capsys, "poincare", "s3_c3", "--nmax", "3")
    assert code == 0 and [json.loads(x)["dim"] for x in lines] == [1, 1, 2, 5]
    code, lines, _ = invoke(capsys, "fixed-points", "z2_flip", "--degree", "2")
    rows = [json.loads(x) for x in lines]
    assert code == 0 and [r["index"] for r in rows] == [0, 1] and all(r["n"] == 2 for r in rows)


def test_describe(capsys):
    code, lines, _ = invoke(capsys, "describe", "twisted_m2")
    out = json.loads("\n".join(lines))
    assert code == 0
    assert out["delta"] ** 2 == pytest.approx(4.5)
    assert out["p_weights"][0] ** 4 == pytest.approx(2 / 3)
    assert out["loop_dims"] == [1, 4, 16, 64]


@pytest.mark.parametrize("data, fragment", [
    ("{not json", "invalid JSON"),
    ({"hopf": {"kind": "function_algebra", "group": "Z2"}}, "algebra"),
    ({"algebra": {"weights": [1.0]}}, "algebra.blocks"),
    ({"algebra": {"blocks": [1], "weights": [1.0]}, "run": {"suites": ["bogus"]}}, "run.suites"),
    ({"algebra": {"blocks": [1], "weights": [1.0]}, "run": {"suites": ["tower"]}}, "coaction"),
    ({**FLIP, "hopf": {"kind": "function_algebra", "group": "Q8"}}, "hopf.group"),
    ({**FLIP, "hopf": {"kind": "group_algebra", "group": "Z2"}}, "hopf.kind"),
    ({**FLIP, "coaction": {"kind": "group_action", "maps": [{"permutation": [0, 1]}]}}, "coaction"),
    ({**FLIP, "coaction": {"kind": "group_action", "maps": [{"rotation": 1}, {"rotation": 2}]}}, "maps[0]"),
    ({**FLIP, "hopf": {"kind": "custom", "dim": 2, "m": [1, 2], "delta": [], "eps": [], "s": [], "star": []}},
     "hopf.m"),
    ({"algebra": {"blocks": [1, 1], "weights": [0.5, -0.5]}, "run": {"suites": ["algebra"]}}, "algebra"),
    ({**FLIP, "run": {"n_max": 0}}, "run.n_max"),
])
def test_malformed_specs_exit_with_code_one(capsys, tmp_path, data, fragment):
    code, _, err = invoke(capsys, "check", write(tmp_path, data))
    assert code == 1
    assert err.startswith("malformed spec:") and fragment in err


def test_missing_files_and_unknown_names(capsys, tmp_path):
    code, _, err = invoke(capsys, "check", str(tmp_path / "absent.json"))
    assert code == 1 and "cannot read" in err
    code, _, err = invoke(capsys, "check", "no_such_spec")
    assert code == 1 and "no bundled spec" in err


def test_spec_error_carries_path():
    with pytest.raises(SpecError) as info:
        parse_spec({"algebra": {"blocks": [1]}})
    assert info.value.path == "algebra.weights"


def test_explicit_entries_and_perturbation(tmp_path):
    entries = [{"k": k, "l": k, "i": i, "j": i, "h_coeffs": [1.0 if k == i else 0.0, 1.0 if k != i else 0.0]}
               for k in range(2) for i in range(2)]
    spec = load_spec(write(tmp_path, {**FLIP, "coaction": {"kind": "explicit", "entries": entries}}))
    assert run(spec, suites=("hopf", "coaction", "fixed_points")).summary["poincare_series"] == [1, 1, 2, 4, 8]
    bad = {**FLIP, "coaction": {**FLIP["coaction"], "perturb": {"quadruple": [0, 0, 0, 0], "amount": [0.1, 0]}}}
    assert run(load_spec(write(tmp_path, bad, "bad.json")), suites=("hopf", "coaction")).exit_code == 4


def test_unitary_maps_accept_complex_entries(tmp_path):
    data = {
        "algebra": {"blocks": [2], "weights": [0.5, 0.5]},
        "hopf": {"kind": "function_algebra", "group": "Z2"},
        "coaction": {"kind": "group_action", "maps": [
            {"unitary": [[1, 0], [0, 1]]},
            {"unitary": {"re": [[0, 0], [0, 0]], "im": [[1, 0], [0, -1]]}},
        ]},
        "run": {"suites": ["hopf", "coaction", "fixed_points"], "n_max": 2},
    }
    report = run(load_spec(write(tmp_path, data)))
    assert report.all_pass and report.summary["poincare_series"] == [1, 2, 8]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "coaction_tower.cli", "check", "translation_z2",
                           "--suite", "fixed_points", "--suite", "hopf"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout.splitlines()[-1])["summary"]["poincare_series"] == [1, 1, 2, 4, 8]


def test_lattice_failure_maps_to_lattice_exit_code(monkeypatch):
    import coaction_tower.runner as runner
    from coaction_tower.checks import CheckReport, residual_record

    def broken(alg, n_max, tol):
        return CheckReport([residual_record("e_idempotent", 1.0, tol, 2).in_suite("TL")])

    monkeypatch.setattr(runner, "verify_all", broken)
    report = run(bundled_spec("twisted_m2"))
    assert report.exit_code == EXIT_CODES["lattice"] == 9
    assert [r.name for r in report.records if r.failed] == ["TL/e_idempotent"]

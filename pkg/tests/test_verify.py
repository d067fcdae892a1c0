"""The named verification checks: they pass on the shipped structure and,
just as importantly, fail when the structure is deliberately corrupted."""

import dataclasses
import json
from fractions import Fraction

import numpy as np
import pytest

from brstkdv import parse
from brstkdv.reductions import build_system
from brstkdv.sl2 import structure_table
from brstkdv.solver import FieldState, evolve
from brstkdv.verify import (
    CHECKS,
    CheckReport,
    check_conservation,
    check_gradient_ghost,
    check_nilpotency,
    check_system_invariance,
    check_upsilon_covariance,
    run_all,
)

IDX = {"0": 0, "+": 1, "-": 2}


def test_registry_is_complete():
    assert set(CHECKS) == {
        "check_nilpotency",
        "check_upsilon_covariance",
        "check_system_invariance",
        "check_gradient_ghost",
        "check_conservation",
        "check_miura_chain",
        "check_zero_curvature",
    }


def test_nilpotency_passes():
    rep = check_nilpotency()
    assert rep.status == "pass"
    assert rep.tolerance == 0.0
    assert len(rep.metrics) == 12 + 1 + 2  # canonical + reduced ghost + two family points
    assert all(v == 0.0 for v in rep.metrics.values())


def test_covariance_passes_and_is_exact():
    rep = check_upsilon_covariance()
    assert rep.status == "pass"
    assert rep.metrics == {"covariance_defect": 0.0, "dx_commutation_defect": 0.0}


def test_invariance_battery_passes():
    rep = check_system_invariance()
    assert rep.status == "pass"
    assert len(rep.metrics) == 8  # four systems, two evolving fields each


def test_gradient_ghost_battery_passes():
    rep = check_gradient_ghost()
    assert rep.status == "pass"
    for label in ("T_symbolic", "T_power_symbolic", "u_quadratic"):
        assert rep.metrics[label] == 0.0
        assert rep.metrics[label + "_premise"] == 0.0


def test_gradient_ghost_argument_validation():
    with pytest.raises(ValueError):
        check_gradient_ghost(density=parse("u"))


def test_invariance_rejects_out_of_scope_systems():
    with pytest.raises(ValueError):
        check_system_invariance(build_system("mkdv"))


# --- mutation sensitivity -------------------------------------------------------

def test_nilpotency_fails_for_jacobi_violating_table():
    f = [list(map(list, m)) for m in structure_table()]
    f[IDX["0"]][IDX["+"]][IDX["+"]] = 2
    f[IDX["+"]][IDX["0"]][IDX["+"]] = -2
    rep = check_nilpotency(structure=f)
    assert rep.status == "fail"
    assert any(v > 0 for v in rep.metrics.values())


def test_covariance_fails_for_wrong_advection_weight():
    rep = check_upsilon_covariance(advection_coeff=Fraction(1))
    assert rep.status == "fail"


def test_invariance_fails_for_detuned_ghost_flow():
    kdv = build_system("kdv")
    wrong = dataclasses.replace(
        kdv, rhs={"u": kdv.rhs["u"], "c": parse("c_xxx + 2*u*c_x", odd=("c",))})
    rep = check_system_invariance(wrong)
    assert rep.status == "fail"


def test_conservation_fails_for_non_conserved_functional():
    # integral of T^3 alone is not constant under the quadratic flow (the
    # conserved cubic functional needs the -T_x^2/2 companion term)
    from brstkdv.reductions import ConservedDensity
    tf = build_system("t-form", beta=1, s=2)
    fake = ConservedDensity("I3", parse("T^3"), "classical")
    n = 256
    x = 40.0 * np.arange(n) / n
    st = FieldState(0.0, 40.0, n,
                    {"T": 1.0 + 0.2 * np.cos(2 * np.pi * x / 40.0),
                     "c": np.zeros(n)})
    traj = evolve(st, tf, 1.0, 1e-3, record_every=100,
                  diagnostics=[fake, tf.density("H0"), tf.density("H1")])
    rep = check_conservation(traj, ["I3"], tolerance=1e-8)
    assert rep.status == "fail"
    rep_good = check_conservation(traj, ["H0", "H1"], tolerance=1e-8)
    assert rep_good.status == "pass"


def test_conservation_requires_recorded_diagnostics():
    kdv = build_system("kdv")
    from brstkdv.solver import soliton_initial
    st = soliton_initial(0.5, 20.0, "kdv", 40.0, 128)
    traj = evolve(st, kdv, 0.01, 1e-3, diagnostics=[kdv.density("H0")])
    with pytest.raises(ValueError):
        check_conservation(traj, ["H5"])


# --- report plumbing --------------------------------------------------------------

def test_report_json_round_trip():
    rep = check_upsilon_covariance()
    doc = json.loads(rep.to_json())
    back = CheckReport.from_dict(doc)
    assert back == rep
    assert doc["claim"] and isinstance(doc["claim"], str)
    assert set(doc) == {"check", "status", "metrics", "tolerance", "claim"}


def test_status_threshold_semantics():
    ok = CheckReport("x", "pass", {"m": 0.5}, 1.0, "demo")
    assert ok.to_dict()["metrics"]["m"] == 0.5


def test_run_all_everything_passes():
    reports = run_all()
    names = [r.check for r in reports]
    assert len(names) == len(set(names)) == 8
    assert "check_conservation_classical" in names
    failing = {r.check: r.metrics for r in reports if r.status != "pass"}
    assert failing == {}

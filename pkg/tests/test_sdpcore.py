import numpy as np
import pytest

from freecert.denselin import psd_floor
from freecert.sdpcore import (
    AffineConstraint,
    InconsistentConstraintsError,
    InfeasibleError,
    SdpInstance,
    UnboundedError,
    instance_to_json,
    maximize,
    solve_feasibility,
)


def con(entries, rhs):
    return AffineConstraint(tuple(entries), rhs)


def check_feasible(inst, res, tol):
    assert res.feasible
    b = res.b
    assert psd_floor(b) >= -tol
    for c in inst.constraints:
        val = sum(coef * b[r, s] for r, s, coef in c.entries)
        assert abs(val - c.rhs) <= 10 * tol


def test_single_entry():
    inst = SdpInstance(1, [con([(0, 0, 1.0)], 1.0)])
    res = solve_feasibility(inst, tol=1e-9)
    check_feasible(inst, res, 1e-9)
    assert res.b[0, 0] == pytest.approx(1.0, abs=1e-9)


def test_zero_trace_forces_zero():
    inst = SdpInstance(2, [con([(0, 0, 1.0), (1, 1, 1.0)], 0.0)])
    res = solve_feasibility(inst, tol=1e-9)
    check_feasible(inst, res, 1e-9)
    assert np.max(np.abs(res.b)) <= 1e-8


def test_unique_boundary_point():
    # trace 1 with b01 = b10 = -1/2 pins b = [[.5, -.5], [-.5, .5]]
    inst = SdpInstance(2, [
        con([(0, 0, 1.0), (1, 1, 1.0)], 1.0),
        con([(0, 1, 1.0)], -0.5),
        con([(1, 0, 1.0)], -0.5),
    ])
    res = solve_feasibility(inst, tol=1e-9)
    check_feasible(inst, res, 1e-9)
    assert np.max(np.abs(res.b - np.array([[0.5, -0.5], [-0.5, 0.5]]))) <= 1e-6


def test_psd_infeasible_reports_no_progress():
    # trace zero forces b = 0, contradicting b[0,1] = 1
    inst = SdpInstance(2, [
        con([(0, 0, 1.0), (1, 1, 1.0)], 0.0),
        con([(0, 1, 1.0)], 1.0),
    ])
    res = solve_feasibility(inst, tol=1e-9)
    assert not res.feasible
    assert res.psd_residual > 1e-3


def test_affine_inconsistency_detected():
    inst = SdpInstance(2, [
        con([(0, 0, 1.0)], 1.0),
        con([(0, 0, 1.0)], 2.0),
    ])
    with pytest.raises(InconsistentConstraintsError):
        solve_feasibility(inst)


def test_no_constraints():
    inst = SdpInstance(2, [])
    res = solve_feasibility(inst)
    check_feasible(inst, res, 1e-9)


def test_complex_constraint():
    inst = SdpInstance(2, [
        con([(0, 0, 1.0)], 1.0),
        con([(1, 1, 1.0)], 1.0),
        con([(0, 1, 1.0)], 0.3 + 0.4j),
    ])
    res = solve_feasibility(inst, tol=1e-9)
    check_feasible(inst, res, 1e-9)
    assert res.b[0, 1] == pytest.approx(0.3 + 0.4j, abs=1e-8)


def test_maximize_diagonal_objective():
    inst = SdpInstance(2, [con([(0, 0, 1.0), (1, 1, 1.0)], 1.0)],
                       ((0, 0, 1.0), (1, 1, -1.0)))
    res = maximize(inst, tol=1e-6)
    assert res.value == pytest.approx(1.0, abs=1e-5)


def test_maximize_offdiagonal():
    inst = SdpInstance(2, [con([(0, 0, 1.0)], 1.0), con([(1, 1, 1.0)], 1.0)],
                       ((0, 1, 1.0), (1, 0, 1.0)))
    res = maximize(inst, tol=1e-6)
    assert res.value == pytest.approx(2.0, abs=1e-5)
    assert res.b[0, 1].real == pytest.approx(1.0, abs=1e-4)


def test_maximize_zero_objective():
    inst = SdpInstance(2, [con([(0, 0, 1.0)], 1.0), con([(1, 1, 1.0)], 1.0)])
    res = maximize(inst, tol=1e-6)
    assert res.value == 0.0


def test_maximize_infeasible_raises():
    inst = SdpInstance(2, [
        con([(0, 0, 1.0), (1, 1, 1.0)], 0.0),
        con([(0, 1, 1.0)], 1.0),
    ], ((0, 0, 1.0),))
    with pytest.raises(InfeasibleError):
        maximize(inst, tol=1e-4)


def test_maximize_unbounded_raises():
    inst = SdpInstance(2, [], ((0, 0, 1.0),))
    with pytest.raises(UnboundedError):
        maximize(inst, tol=1e-2)


def test_feasible_output_reverified():
    rng = np.random.default_rng(61)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        target = A @ A.conj().T
        target /= np.trace(target).real
        idx = [(int(i), int(j)) for i in range(n) for j in range(i, n)
               if rng.random() < 0.5]
        cons = [con([(0, 0, 1.0), *[(k, k, 1.0) for k in range(1, n)]], 1.0)]
        for i, j in idx:
            cons.append(con([(i, j, 1.0)], complex(target[i, j])))
        inst = SdpInstance(n, cons)
        res = solve_feasibility(inst, tol=1e-9)
        check_feasible(inst, res, 1e-9)


def test_maximize_monotone_under_constraints():
    rng = np.random.default_rng(62)
    for _ in range(5):
        n = 3
        C = rng.standard_normal((n, n))
        C = 0.5 * (C + C.T)
        objective = tuple((i, j, complex(C[i, j])) for i in range(n)
                          for j in range(n))
        base = [con([(k, k, 1.0) for k in range(n)], 1.0)]
        extra = base + [con([(0, 1, 1.0), (1, 0, 1.0)], 0.0)]
        v1 = maximize(SdpInstance(n, base, objective), tol=1e-6).value
        v2 = maximize(SdpInstance(n, extra, objective), tol=1e-6).value
        assert v2 <= v1 + 1e-5


def test_maximize_matches_levelset_bisection_surrogate():
    # independent check: parametrized scan over the off-diagonal entry
    inst = SdpInstance(2, [con([(0, 0, 1.0)], 1.0), con([(1, 1, 1.0)], 1.0)],
                       ((0, 1, 0.5), (1, 0, 0.5)))
    res = maximize(inst, tol=1e-6)
    ts = np.linspace(-1, 1, 2001)
    best = max(t for t in ts
               if psd_floor(np.array([[1.0, t], [t, 1.0]])) >= -1e-12)
    assert res.value == pytest.approx(best, abs=5e-3)


def test_python_fallback_matches_compiled(monkeypatch):
    import freecert.sdpcore as sc

    inst = SdpInstance(2, [
        con([(0, 0, 1.0)], 1.0),
        con([(1, 1, 1.0)], 1.0),
        con([(0, 1, 1.0)], 0.25 + 0.1j),
    ])
    res_fast = solve_feasibility(inst, tol=1e-9)
    monkeypatch.setattr(sc, "_numba", None)
    res_slow = sc.solve_feasibility(inst, tol=1e-9)
    assert res_slow.feasible
    assert np.max(np.abs(res_slow.b - res_fast.b)) <= 1e-8


def test_instance_json():
    inst = SdpInstance(2, [con([(0, 1, 1.0 + 2.0j)], 0.5)], ((0, 0, 1.0),))
    blob = instance_to_json(inst)
    assert blob["n"] == 2
    assert blob["constraints"][0]["entries"] == [[0, 1, 1.0, 2.0]]
    assert blob["constraints"][0]["rhs"] == [0.5, 0.0]
    assert blob["objective"] == [[0, 0, 1.0, 0.0]]

import numpy as np
import pytest

from cyclic_cm.errors import DegeneratePoint, PoleAtZ
from cyclic_cm.kernel import DensePoly, adjugate, determinant, lu_solve
from cyclic_cm.model import QModelPoint, SpectralPoint, build_dual, derived_constants, gauge, random_coupling, random_gauge, sample
from cyclic_cm.spectral import (
    A_closed,
    A_eval,
    A_prime_at,
    C_closed_poly,
    C_eval,
    D_closed_poly,
    D_eval,
    D_simplified_poly,
    bundle,
    classic_curve,
    classic_lax,
    classic_lax_matrix,
    residue_structure,
    resolvent_closed,
)


def draw(rng, m, n, d=0):
    cp = random_coupling(rng, m)
    point, fr = sample(rng, m, n, cp, d or None)
    return cp, point, fr


def coeff_gap(a: DensePoly, b: DensePoly) -> float:
    size = max(a.coeffs.size, b.coeffs.size)
    x = np.zeros(size, complex)
    y = np.zeros(size, complex)
    x[: a.coeffs.size] = a.coeffs
    y[: b.coeffs.size] = b.coeffs
    return float(np.max(np.abs(x - y)) / max(1.0, np.max(np.abs(y))))


# --------------------------------------------------------------------- A(z)


def test_A_small():
    point = SpectralPoint.make(2, [1, 2], [0, 0])
    assert A_closed(point, 0) == 4
    assert A_closed(point, 1) == 0


def test_A_vs_determinant(rng):
    for m, n, d in [(1, 3, 0), (2, 4, 2), (4, 3, 1)]:
        cp, point, fr = draw(rng, m, n, d)
        quad = build_dual(point, cp, fr)
        for z in rng.normal(size=10) + 1j * rng.normal(size=10):
            ref = A_closed(point, z)
            assert abs(A_eval(quad, z) - ref) <= 1e-9 * max(1.0, abs(ref))


def test_A_prime_at_lambda(rng):
    cp, point, fr = draw(rng, 3, 4)
    Ap = bundle(point, cp).A_prime
    for k in range(4):
        ref = A_prime_at(point, k)
        assert abs(Ap(point.lam[k]) - ref) <= 1e-9 * abs(ref)


# ---------------------------------------------------------------- resolvent


def test_resolvent_1x1():
    assert np.allclose(resolvent_closed(SpectralPoint.make(1, [2], [0]), 3), [[1]])


def test_resolvent_identity_and_lu(rng):
    cp, point, _ = draw(rng, 3, 2)
    quad = build_dual(point, cp)
    for z in [0.7 + 0.4j, -1.1 + 0.2j, 1.5j]:
        R = resolvent_closed(point, z)
        M = z * np.eye(6) - quad.P
        assert np.max(np.abs(M @ R - np.eye(6))) <= 1e-10
        assert np.max(np.abs(R - lu_solve(M, np.eye(6)))) <= 1e-9


def test_resolvent_pole():
    point = SpectralPoint.make(2, [1.0], [0.0])
    with pytest.raises(PoleAtZ):
        resolvent_closed(point, -1.0)
    with pytest.raises(PoleAtZ):
        resolvent_closed(point, 0.0)


# ------------------------------------------------------------------ C and D


def test_C_D_m1_n1():
    cp = derived_constants(1, [1])
    quad = build_dual(SpectralPoint.make(1, [2], [3]), cp)
    for z in [0.5, 2.0, 1 + 1j]:
        assert abs(D_eval(quad, z) - 3) < 1e-14
        assert abs(C_eval(quad, z) - 3) < 1e-14
    fns = bundle(SpectralPoint.make(1, [2], [3]), cp)
    assert np.allclose(fns.D.coeffs, [3]) and fns.D.degree == 0


def test_C_D_gauge_invariant(rng):
    cp, point, fr = draw(rng, 2, 3, 2)
    quad = build_dual(point, cp, fr)
    moved = gauge(quad, random_gauge(rng, 6, max_cond=1e3))
    for z in [0.3 + 1.2j, -0.8 + 0.1j]:
        for fn in (C_eval, D_eval):
            ref = fn(quad, z)
            assert abs(fn(moved, z) - ref) <= 1e-7 * max(1.0, abs(ref))


def test_D_spinless_closed_form(rng):
    for m in (2, 3, 4):
        cp, point, _ = draw(rng, m, 3)
        fns = bundle(point, cp)
        assert coeff_gap(fns.D, D_simplified_poly(point)) <= 1e-8


def test_D_spin_closed_form(rng):
    cp, point, fr = draw(rng, 2, 2, 2)
    fns = bundle(point, cp, fr)
    assert coeff_gap(fns.D, D_closed_poly(point, cp, fr)) <= 1e-8
    assert coeff_gap(fns.D, D_simplified_poly(point)) <= 1e-8


def test_C_closed_form(rng):
    for m, d in [(1, 0), (3, 0), (2, 2), (3, 1)]:
        cp, point, fr = draw(rng, m, 3, d)
        fns = bundle(point, cp, fr)
        assert coeff_gap(fns.C, C_closed_poly(point, cp, fr)) <= 1e-8


def test_bundle_shape(rng):
    cp, point, fr = draw(rng, 3, 3, 1)
    fns = bundle(point, cp, fr)
    assert fns.A.degree == 9 and fns.A.coeffs[-1] == 1
    assert fns.D.degree <= 7 and fns.C.degree <= 7
    assert residue_structure(fns.D, 3, 1) <= 1e-8
    assert residue_structure(fns.C, 3, 1) <= 1e-8


# ---------------------------------------------------------- m = 1 Lax matrix


def test_classic_n1():
    qp = QModelPoint.make(1, [1.5], [0.3])
    P0, P1 = classic_curve(qp, 0.7)
    assert np.allclose(P0.coeffs, [-1.5, 1]) and np.allclose(P1.coeffs, [1])


def test_classic_determinant_lemma(rng):
    qp = QModelPoint.make(1, rng.normal(size=2), [0.4, -1.1])
    g = 0.8
    P0, P1 = classic_curve(qp, g)
    for lam, z in [(0.3 + 0.2j, 1.7), (-1.0, 0.5 - 0.5j), (2.0j, -1.3)]:
        lhs = determinant(lam * np.eye(2) - classic_lax(qp, g, z))
        assert abs(lhs - (P0(lam) - 1j * g / z * P1(lam))) <= 1e-9


def test_classic_trace_vs_bilinear(rng):
    qp = QModelPoint.make(1, rng.normal(size=2), [0.4, -1.1])
    L = classic_lax_matrix(qp, 0.8)
    _, P1 = classic_curve(qp, 0.8)
    lam = 0.9 - 0.3j
    adj = adjugate(lam * np.eye(2) - L)
    assert abs(np.trace(adj @ np.ones((2, 2))) - P1(lam)) <= 1e-10


def test_classic_rejects_collision():
    with pytest.raises(DegeneratePoint):
        classic_lax_matrix(QModelPoint.make(1, [0, 0], [1.0, 1.0]), 1.0)

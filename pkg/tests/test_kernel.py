import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyclic_cm.errors import DuplicateNodes, NoConvergence, SingularMatrix
from cyclic_cm.kernel import (
    DensePoly,
    adjugate,
    char_poly,
    determinant,
    eigenvalues,
    lagrange_interp,
    lu_solve,
    match_multisets,
    poly_roots,
)


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def cofactor_det(a):
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    return sum((-1) ** j * a[0, j] * cofactor_det(np.delete(a[1:], j, axis=1)) for j in range(n))


# ------------------------------------------------------------------ DensePoly


def test_poly_trims_trailing_zeros():
    p = DensePoly([1, 2, 0, 1e-20])
    assert p.degree == 1
    assert DensePoly([]).is_zero() and DensePoly([0, 0]).degree == -1


def test_poly_arithmetic_small():
    p = DensePoly([1, 1])  # 1 + z
    q = DensePoly([-1, 1])  # -1 + z
    assert np.allclose((p * q).coeffs, [-1, 0, 1])
    assert np.allclose((p + q).coeffs, [0, 2])
    assert np.allclose(DensePoly([0, 0, 3]).derivative().coeffs, [0, 6])
    quo, rem = DensePoly([-1, 0, 1]).divmod(p)
    assert np.allclose(quo.coeffs, [-1, 1]) and rem.is_zero()
    assert p(2.0) == 3.0


def test_poly_rejects_nonfinite():
    with pytest.raises(ValueError):
        DensePoly([1.0, np.nan])


# ---------------------------------------------------------------------- LU


def test_lu_solve_identity(rng):
    B = crandn(rng, 3, 2)
    assert np.allclose(lu_solve(np.eye(3), B), B)


def test_lu_solve_diag():
    assert np.allclose(lu_solve(np.diag([2.0, 4.0]), np.eye(2)), np.diag([0.5, 0.25]))


def test_lu_solve_residual(rng):
    A = crandn(rng, 5, 5) + 5 * np.eye(5)
    B = crandn(rng, 5, 3)
    X = lu_solve(A, B)
    assert np.linalg.norm(A @ X - B) <= 1e-10 * np.linalg.norm(B)


def test_lu_singular():
    with pytest.raises(SingularMatrix):
        lu_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.eye(2))


# -------------------------------------------------------------- determinant


def test_determinant_trivial():
    assert determinant(np.eye(4)) == 1
    assert abs(determinant(np.diag([1.0, 2.0, 3.0])) - 6) < 1e-15
    assert determinant(np.zeros((3, 3))) == 0


def test_determinant_vs_cofactor(rng):
    A = crandn(rng, 4, 4)
    ref = cofactor_det(A)
    assert abs(determinant(A) - ref) <= 1e-10 * abs(ref)


# ---------------------------------------------------------------- char_poly


def test_char_poly_small():
    assert np.allclose(char_poly(np.diag([1.0, 2.0])).coeffs, [2, -3, 1])
    assert np.allclose(char_poly(np.eye(2)).coeffs, [1, -2, 1])


def test_char_poly_vs_determinant(rng):
    A = crandn(rng, 3, 3)
    p = char_poly(A)
    for z in crandn(rng, 5):
        assert abs(p(z) - determinant(z * np.eye(3) - A)) <= 1e-9


# --------------------------------------------------------------------- roots


def test_roots_simple():
    r = poly_roots(DensePoly([2, -3, 1]))
    assert match_multisets(r, [1, 2]) < 1e-12


def test_roots_triple():
    r = poly_roots(DensePoly.from_roots([1, 1, 1]))
    assert np.max(np.abs(r - 1)) < 1e-4


def test_roots_roundtrip(rng):
    roots = crandn(rng, 6)
    assert match_multisets(poly_roots(DensePoly.from_roots(roots)), roots) < 1e-8


def test_roots_needs_degree():
    with pytest.raises(ValueError):
        poly_roots(DensePoly([3.0]))


def test_roots_cap_reports_best():
    with pytest.raises(NoConvergence) as info:
        poly_roots(DensePoly.from_roots([1, 2, 3, 4, 5]), max_iter=1)
    assert info.value.best is not None


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_roots_roundtrip_property(roots):
    roots = np.array(roots)
    gaps = np.abs(roots[:, None] - roots[None, :])[~np.eye(roots.size, dtype=bool)]
    if roots.size > 1 and np.min(gaps) < 0.1:
        return
    assert match_multisets(poly_roots(DensePoly.from_roots(roots)), roots) < 1e-8


# --------------------------------------------------------------- eigenvalues


def test_eigenvalues_small():
    assert match_multisets(eigenvalues(np.diag([5.0, -1.0])), [5, -1]) < 1e-12
    assert np.max(np.abs(eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]])))) < 1e-7


def test_eigenvalues_companion(rng):
    roots = crandn(rng, 5)
    c = DensePoly.from_roots(roots).coeffs
    comp = np.zeros((5, 5), dtype=complex)
    comp[1:, :-1] = np.eye(4)
    comp[:, -1] = -c[:-1]
    assert match_multisets(eigenvalues(comp), roots) < 1e-8


# ------------------------------------------------------------------ adjugate


def test_adjugate_small():
    assert np.allclose(adjugate(np.eye(3)), np.eye(3))
    assert np.allclose(adjugate(np.diag([2.0, 3.0])), np.diag([3.0, 2.0]))


def test_adjugate_identity(rng):
    A = crandn(rng, 4, 4)
    assert np.max(np.abs(A @ adjugate(A) - determinant(A) * np.eye(4))) <= 1e-9


def test_adjugate_singular_is_finite():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    # adj [[a, b], [c, d]] = [[d, -b], [-c, a]]
    assert np.allclose(adjugate(A), [[4.0, -2.0], [-2.0, 1.0]])


# ------------------------------------------------------------- interpolation


def test_interp_small():
    assert np.allclose(lagrange_interp([0, 1], [1, 1]).coeffs, [1])
    assert np.allclose(lagrange_interp([0, 1, 2], [0, 1, 4]).coeffs, [0, 0, 1])


def test_interp_roundtrip(rng):
    p = DensePoly(crandn(rng, 6))
    nodes = crandn(rng, 6)
    q = lagrange_interp(nodes, p(nodes))
    assert np.max(np.abs(q.coeffs - p.coeffs)) <= 1e-9


def test_interp_duplicates():
    with pytest.raises(DuplicateNodes):
        lagrange_interp([1.0, 1.0], [0.0, 1.0])

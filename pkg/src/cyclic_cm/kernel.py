"""Dense complex linear algebra and polynomial arithmetic.

Matrices are plain ``numpy`` complex arrays; polynomials are
:class:`DensePoly` values holding coefficients in ascending degree.
Everything here is sized for matrices up to roughly 50x50 and favours
predictable, testable behaviour over speed.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT
from .errors import DuplicateNodes, NoConvergence, SingularMatrix


def as_matrix(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains NaN or Inf")
    return arr


def _require_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")


class DensePoly:
    """Polynomial with complex coefficients, stored in ascending degree.

    Trailing coefficients with magnitude below ``trim_tol * max|coeff|``
    are dropped on construction; the zero polynomial is stored as ``[0]``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[complex], trim_tol: float = DEFAULT.poly_trim):
        c = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs, dtype=complex).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        scale = np.max(np.abs(c))
        if scale == 0.0:
            c = np.zeros(1, dtype=complex)
        else:
            cut = trim_tol * scale
            last = c.size - 1
            while last > 0 and abs(c[last]) <= cut:
                last -= 1
            c = c[: last + 1].copy()
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: complex = 1.0) -> "DensePoly":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.concatenate([[0.0], c]) - r * np.concatenate([c, [0.0]])
        return cls(c, trim_tol=0.0)

    @classmethod
    def monomial(cls, k: int, coeff: complex = 1.0) -> "DensePoly":
        c = np.zeros(k + 1, dtype=complex)
        c[k] = coeff
        return cls(c, trim_tol=0.0)

    @property
    def degree(self) -> int:
        if self.is_zero():
            return -1
        return self.coeffs.size - 1

    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def __call__(self, z):
        """Horner evaluation; accepts scalars or arrays."""
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return complex(acc) if acc.ndim == 0 else acc

    def derivative(self) -> "DensePoly":
        if self.coeffs.size == 1:
            return DensePoly([0.0])
        k = np.arange(1, self.coeffs.size)
        return DensePoly(self.coeffs[1:] * k, trim_tol=0.0)

    def __add__(self, other: "DensePoly") -> "DensePoly":
        a, b = self.coeffs, other.coeffs
        size = max(a.size, b.size)
        out = np.zeros(size, dtype=complex)
        out[: a.size] += a
        out[: b.size] += b
        return DensePoly(out, trim_tol=0.0)

    def __sub__(self, other: "DensePoly") -> "DensePoly":
        return self + other * -1.0

    def __mul__(self, other) -> "DensePoly":
        if isinstance(other, DensePoly):
            return DensePoly(np.convolve(self.coeffs, other.coeffs), trim_tol=0.0)
        return DensePoly(self.coeffs * complex(other), trim_tol=0.0)

    __rmul__ = __mul__

    def divmod(self, other: "DensePoly") -> tuple["DensePoly", "DensePoly"]:
        """Polynomial long division, returning (quotient, remainder)."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        num = self.coeffs.astype(complex).copy()
        den = other.coeffs
        dn = den.size - 1
        if num.size - 1 < dn:
            return DensePoly([0.0]), DensePoly(num, trim_tol=0.0)
        quot = np.zeros(num.size - dn, dtype=complex)
        for k in range(num.size - 1 - dn, -1, -1):
            quot[k] = num[k + dn] / den[dn]
            num[k : k + dn + 1] -= quot[k] * den
        rem = num[:dn] if dn > 0 else np.zeros(1, dtype=complex)
        return DensePoly(quot, trim_tol=0.0), DensePoly(rem, trim_tol=0.0)

    def __repr__(self) -> str:
        return f"DensePoly({np.array2string(self.coeffs, precision=6)})"

    def to_list(self) -> list:
        return [[float(c.real), float(c.imag)] for c in self.coeffs]


def lu_factor(a, pivot_tol: float = DEFAULT.pivot):
    """LU factorisation with partial pivoting.

    Returns ``(lu, perm, sign)`` where ``lu`` packs the unit-lower and upper
    factors, ``perm`` is the row permutation and ``sign`` its parity.
    Raises :class:`SingularMatrix` when a pivot falls below
    ``pivot_tol * max|a|``.
    """
    lu = as_matrix(a).copy()
    _require_square(lu)
    n = lu.shape[0]
    perm = np.arange(n)
    sign = 1
    amax = np.max(np.abs(lu)) if n else 0.0
    threshold = pivot_tol * amax
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= threshold or lu[p, k] == 0:
            raise SingularMatrix(f"pivot {abs(lu[p, k]):.3e} below threshold {threshold:.3e} at column {k}")
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        lu[k + 1 :, k] /= lu[k, k]
        lu[k + 1 :, k + 1 :] -= np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    return lu, perm, sign


def _lu_apply(lu: np.ndarray, perm: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = lu.shape[0]
    x = b[perm].astype(complex)
    for k in range(n):
        x[k + 1 :] -= np.outer(lu[k + 1 :, k], x[k])
    for k in range(n - 1, -1, -1):
        x[k] /= lu[k, k]
        x[:k] -= np.outer(lu[:k, k], x[k])
    return x


def lu_solve(a, b, pivot_tol: float = DEFAULT.pivot) -> np.ndarray:
    """Solve ``a @ x = b`` for square ``a`` using partial pivoting."""
    a = as_matrix(a)
    b = np.asarray(b, dtype=complex)
    vector = b.ndim == 1
    b2 = b.reshape(-1, 1) if vector else b
    if b2.shape[0] != a.shape[0]:
        raise ValueError("right-hand side has the wrong number of rows")
    lu, perm, _ = lu_factor(a, pivot_tol)
    x = _lu_apply(lu, perm, b2)
    return x.ravel() if vector else x


def inverse(a, pivot_tol: float = DEFAULT.pivot) -> np.ndarray:
    a = as_matrix(a)
    return lu_solve(a, np.eye(a.shape[0], dtype=complex), pivot_tol)


def determinant(a, pivot_tol: float = DEFAULT.pivot) -> complex:
    """Determinant via LU; a (numerically) singular matrix gives 0."""
    a = as_matrix(a)
    _require_square(a)
    if a.shape[0] == 0:
        return 1.0 + 0j
    try:
        lu, _, sign = lu_factor(a, pivot_tol)
    except SingularMatrix:
        return 0j
    return complex(sign * np.prod(np.diag(lu)))


def char_poly(a) -> DensePoly:
    """Monic characteristic polynomial det(zI - a) by Faddeev-LeVerrier."""
    a = as_matrix(a)
    _require_square(a)
    k = a.shape[0]
    coeffs = np.zeros(k + 1, dtype=complex)
    coeffs[k] = 1.0
    mk = np.zeros_like(a)
    eye = np.eye(k, dtype=complex)
    for step in range(1, k + 1):
        mk = a @ mk + coeffs[k - step + 1] * eye
        coeffs[k - step] = -np.trace(a @ mk) / step
    return DensePoly(coeffs, trim_tol=0.0)


def poly_roots(p: DensePoly, tol: float = DEFAULT.root_step, max_iter: int = DEFAULT.root_max_iter) -> np.ndarray:
    """All complex roots of ``p`` (with multiplicity) by Aberth iteration.

    Starts from a slightly rotated circle of radius ``1 + max|c_k|`` of the
    monic normalisation. Stops when every correction is below
    ``tol * root_scale`` or every root already has a residual at the
    rounding-error level (which is what multiple roots settle to).
    """
    c = p.coeffs
    deg = c.size - 1
    if deg < 1 or p.is_zero():
        raise ValueError("poly_roots needs a polynomial of degree >= 1")
    mon = c / c[-1]
    if deg == 1:
        return np.array([-mon[0]])
    radius = 1.0 + float(np.max(np.abs(mon[:-1])))
    angles = 2.0 * np.pi * np.arange(deg) / deg + 0.4
    z = radius * np.exp(1j * angles)
    dmon = mon[1:] * np.arange(1, deg + 1)
    absmon = np.abs(mon)
    eps = np.finfo(float).eps

    def horner(coef, x):
        acc = np.zeros_like(x)
        for cc in coef[::-1]:
            acc = acc * x + cc
        return acc

    best = z.copy()
    best_res = np.inf
    for _ in range(max_iter):
        pv = horner(mon, z)
        dv = horner(dmon, z)
        bound = horner(absmon, np.abs(z))
        res = np.max(np.abs(pv) / np.maximum(bound, np.finfo(float).tiny))
        if res < best_res:
            best, best_res = z.copy(), res
        if np.all(np.abs(pv) <= 8 * deg * eps * bound):
            return z
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pv / dv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            sums = inv.sum(axis=1)
            step = ratio / (1.0 - ratio * sums)
        step = np.where(np.isfinite(step), step, 0.0)
        z = z - step
        scale = max(1.0, float(np.max(np.abs(z))))
        if np.max(np.abs(step)) < tol * scale:
            return z
    raise NoConvergence(f"Aberth iteration did not converge in {max_iter} steps", best=best, residual=best_res)


def eigenvalues(a) -> np.ndarray:
    """Eigenvalues as roots of the characteristic polynomial."""
    a = as_matrix(a)
    _require_square(a)
    return poly_roots(char_poly(a))


def _cofactor_adjugate(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    adj = np.empty_like(a)
    for i in range(n):
        rows = np.delete(a, i, axis=0)
        for j in range(n):
            minor = np.delete(rows, j, axis=1)
            adj[j, i] = (-1) ** (i + j) * determinant(minor, pivot_tol=0.0)
    return adj


def adjugate(a, switch: float = DEFAULT.adjugate_switch) -> np.ndarray:
    """Adjugate matrix.

    Uses det(a) * inverse(a) when |det| is comfortably away from zero and
    falls back to cofactors otherwise, so the result stays finite at
    singular arguments.
    """
    a = as_matrix(a)
    _require_square(a)
    n = a.shape[0]
    amax = float(np.max(np.abs(a))) if n else 0.0
    det = determinant(a)
    if det != 0 and abs(det) > switch * amax**n:
        return det * inverse(a)
    return _cofactor_adjugate(a)


def lagrange_interp(nodes: Sequence[complex], values: Sequence[complex], gap_tol: float = DEFAULT.node_gap) -> DensePoly:
    """Unique polynomial of degree < len(nodes) through the given samples.

    Solves the Vandermonde system in the nodes rescaled to unit size, which
    is well conditioned for nodes spread around a circle.
    """
    x = np.asarray(nodes, dtype=complex).ravel()
    y = np.asarray(values, dtype=complex).ravel()
    if x.size != y.size or x.size == 0:
        raise ValueError("nodes and values must be non-empty and of equal length")
    scale = float(np.max(np.abs(x)))
    if scale == 0.0:
        scale = 1.0
    if x.size > 1:
        gaps = np.abs(x[:, None] - x[None, :])[~np.eye(x.size, dtype=bool)]
        if np.min(gaps) <= gap_tol * scale:
            raise DuplicateNodes(f"nodes closer than {gap_tol * scale:.3e}")
    vander = (x[:, None] / scale) ** np.arange(x.size)[None, :]
    c = lu_solve(vander, y, pivot_tol=0.0)
    c = c / scale ** np.arange(x.size)
    return DensePoly(c, trim_tol=0.0)


def roots_of_unity_nodes(count: int, radius: float, offset: float = 0.0) -> np.ndarray:
    return radius * np.exp(1j * (2.0 * math.pi * np.arange(count) / count + offset))


def match_multisets(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Max distance between two equal-size multisets under the best pairing."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size != b.size:
        raise ValueError("multisets differ in size")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))

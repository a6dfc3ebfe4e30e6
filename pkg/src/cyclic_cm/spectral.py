"""The spectral functions A, A', C, D, the resolvent, and m = 1 Lax identities.

Every quantity has a closed-form route (in terms of lambda, phi and the
framing) and a matrix route (determinants and adjugates of the assembled
quadruple); the two are compared by the verification suites.

Exponents follow the mod-m convention: the z^{m-2} lambda prefactor of the
closed forms reads z^{(m-2) mod m} lambda^{1 mod m}, which for m = 1 is 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT
from .errors import DegeneratePoint, PoleAtZ
from .kernel import DensePoly, adjugate, char_poly, determinant, eigenvalues, lagrange_interp, roots_of_unity_nodes
from .model import (
    Coupling,
    QModelPoint,
    Quadruple,
    SpectralPoint,
    SpinFraming,
    build_dual,
    dual_blocks,
    spinless_products,
)

NODE_RADIUS = 1.2


@dataclass(frozen=True)
class SpectralFnBundle:
    A: DensePoly
    A_prime: DensePoly
    C: DensePoly
    D: DensePoly


# ------------------------------------------------------------ closed forms


def A_closed(point: SpectralPoint, z) -> complex:
    return complex(np.prod(z**point.m - point.lam**point.m))


def A_prime_closed(point: SpectralPoint, z) -> complex:
    m = point.m
    return complex(m * z ** (m - 1) * np.sum(_cofactor_products(point.lam**m, z**m)))


def A_prime_at(point: SpectralPoint, k: int) -> complex:
    """A'(lambda_k) = m lambda_k^{m-1} prod_{l != k} (lambda_k^m - lambda_l^m)."""
    m, lam = point.m, point.lam
    lm = lam**m
    others = np.delete(lm, k)
    return complex(m * lam[k] ** (m - 1) * np.prod(lm[k] - others))


def _cofactor_products(roots: np.ndarray, a) -> np.ndarray:
    """prod_{l != j} (a - roots_l) for every j."""
    n = roots.size
    out = np.empty(n, dtype=complex)
    for j in range(n):
        out[j] = np.prod(a - np.delete(roots, j))
    return out


def poly_in_power(p_a: DensePoly, m: int, shift: int = 0) -> DensePoly:
    """z^shift * p(z^m) as a polynomial in z."""
    c = np.zeros(shift + m * (p_a.coeffs.size - 1) + 1, dtype=complex)
    c[shift :: m] = p_a.coeffs
    return DensePoly(c, trim_tol=0.0)


def lagrange_basis_a(lam_m: np.ndarray) -> list[DensePoly]:
    """The polynomials prod_{l != j} (a - lam_m_l), one per j."""
    return [DensePoly.from_roots(np.delete(lam_m, j)) for j in range(lam_m.size)]


def A_poly(point: SpectralPoint) -> DensePoly:
    return poly_in_power(DensePoly.from_roots(point.lam**point.m), point.m)


def _prefactor(m: int):
    """(z exponent, lambda exponent) of the closed-form prefactor."""
    return (m - 2) % m, 1 % m


def _vw_stack(point: SpectralPoint, coupling: Coupling, framing: Optional[SpinFraming]) -> np.ndarray:
    return framing.products() if framing is not None else spinless_products(point.n, point.m, coupling.abs_g)


def D_closed_poly(point: SpectralPoint, coupling: Coupling, framing: Optional[SpinFraming] = None) -> DensePoly:
    """sum_i sum_j (Q_i)_{jj} lambda_j z^{m-2} prod_{l != j}(z^m - lambda_l^m)."""
    m = point.m
    blocks = dual_blocks(point, coupling, _vw_stack(point, coupling, framing))
    zexp, lexp = _prefactor(m)
    weights = sum(np.diag(Q) for Q in blocks) * point.lam**lexp
    basis = lagrange_basis_a(point.lam**m)
    acc = DensePoly([0.0])
    for wj, b in zip(weights, basis):
        acc = acc + b * wj
    return poly_in_power(acc, m, zexp)


def D_simplified_poly(point: SpectralPoint) -> DensePoly:
    """m sum_j phi_j lambda_j z^{m-2} prod_{l != j}(z^m - lambda_l^m), valid on the constraint surface."""
    m = point.m
    zexp, lexp = _prefactor(m)
    basis = lagrange_basis_a(point.lam**m)
    acc = DensePoly([0.0])
    for wj, b in zip(m * point.phi * point.lam**lexp, basis):
        acc = acc + b * wj
    return poly_in_power(acc, m, zexp)


def C_closed_poly(point: SpectralPoint, coupling: Coupling, framing: Optional[SpinFraming] = None) -> DensePoly:
    """sum_i sum_{j,t} [v_i w_i]_{t,j} (Q_{i-1})_{j,t} lambda_t z^{m-2} prod_{l != t}(z^m - lambda_l^m)."""
    m = point.m
    vw = _vw_stack(point, coupling, framing)
    blocks = dual_blocks(point, coupling, vw)
    zexp, lexp = _prefactor(m)
    weights = np.zeros(point.n, dtype=complex)
    for i in range(m):
        weights += np.einsum("tj,jt->t", vw[i], blocks[(i - 1) % m])
    weights *= point.lam**lexp
    basis = lagrange_basis_a(point.lam**m)
    acc = DensePoly([0.0])
    for wt, b in zip(weights, basis):
        acc = acc + b * wt
    return poly_in_power(acc, m, zexp)


def resolvent_closed(point: SpectralPoint, z: complex, gap: float = 1e-12) -> np.ndarray:
    """(z - L)^{-1} for the dual-model L with diag(lambda) on blocks (i, i+1).

    Block (h, i) is z^{(m - (i-h+1)) mod m} (z^m - Lambda^m)^{-1} Lambda^{(i-h) mod m}.
    """
    m, n, lam = point.m, point.n, point.lam
    zm = z**m
    denom = zm - lam**m
    scale = max(1.0, abs(zm))
    if abs(z) <= gap or np.min(np.abs(denom)) <= gap * scale:
        raise PoleAtZ(f"z = {z} is on the spectrum or at the origin")
    R = np.zeros((m * n, m * n), dtype=complex)
    for h in range(m):
        for i in range(m):
            e_z = (m - (i - h + 1)) % m
            e_l = (i - h) % m
            R[h * n : (h + 1) * n, i * n : (i + 1) * n] = np.diag(z**e_z * lam**e_l / denom)
    return R


# -------------------------------------------------------------- matrix route


def D_eval(quad: Quadruple, z: complex) -> complex:
    """tr(X adj(z - P))."""
    N = quad.size
    return complex(np.trace(quad.X @ adjugate(z * np.eye(N) - quad.P)))


def C_eval(quad: Quadruple, z: complex) -> complex:
    """tr(w X adj(z - P) v), i.e. tr(X adj(z - P) v w)."""
    N = quad.size
    return complex(np.trace(quad.w @ quad.X @ adjugate(z * np.eye(N) - quad.P) @ quad.v))


def A_eval(quad: Quadruple, z: complex) -> complex:
    return determinant(z * np.eye(quad.size) - quad.P)


def _ratio_vectors(quad: Quadruple, z: complex):
    """A(z), D(z), C(z) at one off-spectrum node via a single inverse."""
    M = z * np.eye(quad.size) - quad.P
    det = determinant(M)
    XA = quad.X @ adjugate(M)
    return det, complex(np.trace(XA)), complex(np.trace(quad.w @ XA @ quad.v))


def spectral_radius(quad: Quadruple) -> float:
    """Largest |eigenvalue| of P (used to place interpolation nodes)."""
    return float(np.max(np.abs(eigenvalues(quad.P))))


def interpolation_nodes(quad: Quadruple, radius: Optional[float] = None) -> np.ndarray:
    """mn nodes on a circle of radius 1.2 x spectral radius, rotated off the real axis."""
    N = quad.size
    if radius is None:
        radius = NODE_RADIUS * max(spectral_radius(quad), 1e-3)
    return roots_of_unity_nodes(N, radius, offset=0.5 / N)


def quad_polys(quad: Quadruple, radius: Optional[float] = None) -> SpectralFnBundle:
    """A (char poly of P), A', and C, D by interpolation at off-spectrum nodes."""
    nodes = interpolation_nodes(quad, radius)
    Dv, Cv = [], []
    for z in nodes:
        _, d, c = _ratio_vectors(quad, z)
        Dv.append(d)
        Cv.append(c)
    A = char_poly(quad.P)
    return SpectralFnBundle(A=A, A_prime=A.derivative(), C=lagrange_interp(nodes, Cv), D=lagrange_interp(nodes, Dv))


def bundle(point: SpectralPoint, coupling: Coupling, framing: Optional[SpinFraming] = None, quad: Optional[Quadruple] = None) -> SpectralFnBundle:
    """A and A' in closed form; C and D interpolated from the dual quadruple."""
    if quad is None:
        quad = build_dual(point, coupling, framing)
    radius = NODE_RADIUS * float(np.max(np.abs(point.lam)))
    nodes = interpolation_nodes(quad, radius)
    Dv, Cv = [], []
    for z in nodes:
        _, d, c = _ratio_vectors(quad, z)
        Dv.append(d)
        Cv.append(c)
    A = A_poly(point)
    N = quad.size
    C = _drop_top(lagrange_interp(nodes, Cv), N - 2)
    D = _drop_top(lagrange_interp(nodes, Dv), N - 2)
    return SpectralFnBundle(A=A, A_prime=A.derivative(), C=C, D=D)


def _drop_top(p: DensePoly, max_degree: int, tol: float = DEFAULT.divisibility) -> DensePoly:
    """Cut interpolation noise above the known degree bound; larger entries are kept."""
    c = p.coeffs
    if c.size <= max_degree + 1 or max_degree < 0:
        return p
    if np.max(np.abs(c[max_degree + 1 :])) > tol * max(float(np.max(np.abs(c))), 1e-300):
        return p
    return DensePoly(c[: max_degree + 1], trim_tol=0.0)


def residue_structure(poly: DensePoly, m: int, residue: int) -> float:
    """Largest |coefficient| at exponents not congruent to ``residue`` mod m, relative to scale."""
    c = poly.coeffs
    idx = np.arange(c.size)
    off = c[(idx % m) != (residue % m)]
    scale = max(float(np.max(np.abs(c))), 1e-300)
    return float(np.max(np.abs(off)) / scale) if off.size else 0.0


# ----------------------------------------------------------- m = 1 classic


def classic_lax_matrix(qp: QModelPoint, g: complex) -> np.ndarray:
    """L_jj = p_j, L_jk = g / (q_j - q_k): the m = 1 position-model Lax matrix."""
    if qp.m != 1:
        raise ValueError("classic Lax matrix needs m = 1")
    q = qp.q
    n = qp.n
    diff = q[:, None] - q[None, :]
    if n > 1 and np.min(np.abs(diff[~np.eye(n, dtype=bool)])) <= DEFAULT.lambda_gap:
        raise DegeneratePoint("coinciding positions")
    np.fill_diagonal(diff, 1.0)
    L = g / diff
    np.fill_diagonal(L, qp.p)
    return L


def classic_lax(qp: QModelPoint, g: complex, z: complex) -> np.ndarray:
    """L(z) = L + i g z^{-1} e e^T."""
    if z == 0:
        raise PoleAtZ("L(z) has a pole at z = 0")
    L = classic_lax_matrix(qp, g)
    return L + 1j * g / z * np.ones_like(L)


def classic_curve(qp: QModelPoint, g: complex) -> tuple[DensePoly, DensePoly]:
    """(P0, P1) with det(Lambda - L(z)) = P0(Lambda) - i g z^{-1} P1(Lambda).

    P0 is the characteristic polynomial of L; P1(Lambda) = e^T adj(Lambda - L) e,
    interpolated from n sample points.
    """
    L = classic_lax_matrix(qp, g)
    n = qp.n
    P0 = char_poly(L)
    if n == 1:
        return P0, DensePoly([1.0])
    radius = NODE_RADIUS * max(float(np.max(np.abs(eigenvalues(L)))), 1.0)
    nodes = roots_of_unity_nodes(n, radius, offset=0.3 / n)
    e = np.ones(n)
    vals = [e @ adjugate(x * np.eye(n) - L) @ e for x in nodes]
    return P0, lagrange_interp(nodes, vals)

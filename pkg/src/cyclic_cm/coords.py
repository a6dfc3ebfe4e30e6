"""Canonical spectral coordinates: r(z), s(z), theta, canonical forms, recovery."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DegenerateSpectrum, PoleAtZ, ZeroCoupling
from .kernel import DensePoly, char_poly, eigenvalues, lagrange_interp, poly_roots
from .model import Coupling, Quadruple, SpectralPoint, SpinFraming, spinless_products
from .spectral import NODE_RADIUS, SpectralFnBundle, bundle, interpolation_nodes, _ratio_vectors


@dataclass(frozen=True)
class RationalFn:
    num: DensePoly
    den: DensePoly
    pole_gap: float = 1e-12

    def __post_init__(self):
        if self.den.is_zero():
            raise ValueError("denominator is the zero polynomial")

    def __call__(self, z: complex) -> complex:
        d = self.den(z)
        scale = max(1.0, self.den.scale() * max(1.0, abs(z)) ** max(self.den.degree, 0))
        if abs(d) <= self.pole_gap * scale:
            raise PoleAtZ(f"denominator vanishes at z = {z}")
        return self.num(z) / d


@dataclass(frozen=True)
class OrbitCoordinates:
    point: SpectralPoint
    framing: Optional[SpinFraming] = None
    canonical_form: bool = False


def r_function(point: SpectralPoint, coupling: Coupling, framing: Optional[SpinFraming] = None, fns: Optional[SpectralFnBundle] = None) -> RationalFn:
    """r(z) = D(z) / A'(z)."""
    fns = fns or bundle(point, coupling, framing)
    return RationalFn(fns.D, fns.A_prime)


def s_function(point: SpectralPoint, coupling: Coupling, framing: Optional[SpinFraming] = None, fns: Optional[SpectralFnBundle] = None) -> RationalFn:
    """s(z) = C(z) / (|g| A'(z))."""
    if coupling.abs_g == 0:
        raise ZeroCoupling("|g| = 0")
    fns = fns or bundle(point, coupling, framing)
    return RationalFn(fns.C, fns.A_prime * coupling.abs_g)


# ----------------------------------------------------------------- theta


def _vw(point: SpectralPoint, coupling: Coupling, framing: Optional[SpinFraming]) -> np.ndarray:
    return framing.products() if framing is not None else spinless_products(point.n, point.m, coupling.abs_g)


def _c_shift(coupling: Coupling, i: int) -> complex:
    """c_{i} with the literal reading c_{-1} = -sum_s ((m-s)/m) g_s."""
    if i >= 0:
        return coupling.c[i]
    return complex(-np.sum(coupling.prefix * coupling.g))


def e_terms(lam: np.ndarray, vw: np.ndarray, coupling: Coupling) -> np.ndarray:
    """e_k = 1/(m|g| lambda_k) sum_i [v_i w_i]_kk (c_{i-1} - sum_{r<i} [v_r w_r]_kk + sum_s a_s [v_s w_s]_kk).

    The sum over r < i is empty for i = 0 and c_{-1} is read literally.
    """
    m = coupling.m
    ag = coupling.abs_g
    dvw = np.einsum("ijj->ij", vw)
    tail = coupling.prefix @ dvw
    out = np.zeros(lam.size, dtype=complex)
    before = np.zeros(lam.size, dtype=complex)
    for i in range(m):
        out += dvw[i] * (_c_shift(coupling, i - 1) - before + tail)
        before = before + dvw[i]
    return out / (m * ag * lam)


def f_terms(lam: np.ndarray, vw: np.ndarray, coupling: Coupling) -> np.ndarray:
    """f_k = -1/(m|g|) sum_{h,i} sum_{t != k} [v_i w_i]_{kt} [v_{i-h-1} w_{i-h-1}]_{tk} lambda_t^{m-h-1} lambda_k^h / (lambda_t^m - lambda_k^m)."""
    m = coupling.m
    n = lam.size
    lm = lam**m
    denom = lm[:, None] - lm[None, :]  # [t, k]
    np.fill_diagonal(denom, 1.0)
    out = np.zeros(n, dtype=complex)
    for h in range(m):
        kern = np.outer(lam ** (m - h - 1), lam**h) / denom  # [t, k]
        np.fill_diagonal(kern, 0.0)
        for i in range(m):
            a = vw[i]  # [k, t]
            b = vw[(i - h - 1) % m]  # [t, k]
            out += np.einsum("kt,tk,tk->k", a, b, kern)
    return -out / (m * coupling.abs_g)


def theta_closed(point: SpectralPoint, coupling: Coupling, framing: Optional[SpinFraming] = None) -> np.ndarray:
    """theta_k = phi_k / m + e_k + f_k."""
    if coupling.abs_g == 0:
        raise ZeroCoupling("|g| = 0")
    vw = _vw(point, coupling, framing)
    return point.phi / point.m + e_terms(point.lam, vw, coupling) + f_terms(point.lam, vw, coupling)


def theta_spinless_closed(point: SpectralPoint, coupling: Coupling) -> np.ndarray:
    """c_{m-1}/(m lambda_k) + phi_k/m + (|g|/(m lambda_k)) sum_{l != k} lambda_k^m / (lambda_k^m - lambda_l^m).

    Spinless closed form; the interaction term carries the sign that makes
    it agree with s(lambda_k) for the dual-model quadruple.
    """
    m, lam = point.m, point.lam
    lm = lam**m
    denom = lm[:, None] - lm[None, :]
    np.fill_diagonal(denom, 1.0)
    ratio = lm[:, None] / denom
    np.fill_diagonal(ratio, 0.0)
    return point.phi / m + coupling.c[m - 1] / (m * lam) + coupling.abs_g / (m * lam) * ratio.sum(axis=1)


# -------------------------------------------------------- canonical forms


def _sector(lam: np.ndarray, m: int) -> np.ndarray:
    """k_j with arg(lambda_j) in [2 pi k_j / m, 2 pi (k_j + 1) / m)."""
    arg = np.mod(np.angle(lam), 2 * math.pi)
    k = np.floor(arg * m / (2 * math.pi)).astype(int)
    return np.mod(k, m)


def z_m_action(point: SpectralPoint, framing: Optional[SpinFraming], shifts) -> tuple[SpectralPoint, Optional[SpinFraming]]:
    """Apply omega^{s_j} to particle j: lambda -> omega^s lambda, phi -> omega^-s phi.

    Framing rows of v_i scale by omega^{-i s_j} and columns of w_i by omega^{i s_j},
    leaving every v_i w_i diagonal block and the constraint untouched.
    """
    m = point.m
    shifts = np.broadcast_to(np.asarray(shifts, dtype=int), (point.n,))
    om = np.exp(2j * math.pi * shifts / m)
    new_point = SpectralPoint.make(m, point.lam * om, point.phi / om)
    if framing is None:
        return new_point, None
    V = [framing.V[i] * (om ** (-i))[:, None] for i in range(m)]
    W = [framing.W[i] * (om**i)[None, :] for i in range(m)]
    return new_point, SpinFraming.make(V, W)


def permute(point: SpectralPoint, framing: Optional[SpinFraming], order) -> tuple[SpectralPoint, Optional[SpinFraming]]:
    order = np.asarray(order)
    new_point = SpectralPoint.make(point.m, point.lam[order], point.phi[order])
    if framing is None:
        return new_point, None
    return new_point, SpinFraming.make([a[order, :] for a in framing.V], [b[:, order] for b in framing.W])


def canonicalize(point: SpectralPoint, framing: Optional[SpinFraming] = None) -> OrbitCoordinates:
    """Rotate every lambda_j into the sector [0, 2 pi / m) and sort by (Re lambda^m, Im lambda^m)."""
    k = _sector(point.lam, point.m)
    # after the rotation an argument may sit a rounding error below 0
    rot, fr = z_m_action(point, framing, -k)
    lm = rot.lam**point.m
    order = np.lexsort((np.round(lm.imag, 12), np.round(lm.real, 12)))
    out, fr = permute(rot, fr, order)
    return OrbitCoordinates(point=out, framing=fr, canonical_form=True)


def orbit_distance(a: SpectralPoint, b: SpectralPoint) -> float:
    """Minimum over S_n x| Z_m of the max entrywise distance of (lambda, phi)."""
    if a.m != b.m or a.n != b.n:
        raise ValueError("points of different shape")
    m, n = a.m, a.n

    def pair_cost(j, k):
        best = math.inf
        for s in range(m):
            om = np.exp(2j * math.pi * s / m)
            best = min(best, max(abs(a.lam[j] * om - b.lam[k]), abs(a.phi[j] / om - b.phi[k])))
        return best

    cost = np.array([[pair_cost(j, k) for k in range(n)] for j in range(n)])
    if n <= 8:
        return float(min(max(cost[j, p[j]] for j in range(n)) for p in itertools.permutations(range(n))))
    from scipy.optimize import linear_sum_assignment

    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


# --------------------------------------------------------------- recovery


def is_block_cyclic(quad: Quadruple, tol: float = 1e-12) -> bool:
    m, n = quad.m, quad.n
    scale = max(1.0, float(np.max(np.abs(quad.P))))
    mask = np.zeros((m * n, m * n), dtype=bool)
    for i in range(m):
        ip = (i + 1) % m
        mask[i * n : (i + 1) * n, ip * n : (ip + 1) * n] = True
    return bool(np.max(np.abs(quad.P[~mask]), initial=0.0) <= tol * scale)


def v0_product(quad: Quadruple) -> np.ndarray:
    """P_0 P_1 ... P_{m-1} restricted to V_0 (P_i = [P]_{i,i+1})."""
    m = quad.m
    prod = np.eye(quad.n, dtype=complex)
    for i in range(m):
        prod = prod @ quad.block("P", i, (i + 1) % m)
    return prod


def principal_root(mu: np.ndarray, m: int) -> np.ndarray:
    """m-th root with argument in [0, 2 pi / m)."""
    arg = np.mod(np.angle(mu), 2 * math.pi)
    return np.abs(mu) ** (1.0 / m) * np.exp(1j * arg / m)


def recover_spectral(quad: Quadruple, coupling: Coupling, tol: Tolerances = DEFAULT) -> OrbitCoordinates:
    """(lambda, phi) of the orbit of ``quad``, in canonical form.

    lambda^m are the eigenvalues of P_0 ... P_{m-1} on V_0 when P has the
    cyclic block pattern; otherwise the roots of A as a polynomial in z^m.
    phi_k = D(lambda_k) / A'(lambda_k) with D interpolated off the spectrum.
    """
    m, n = quad.m, quad.n
    if is_block_cyclic(quad):
        mu = eigenvalues(v0_product(quad))
        A = char_poly(quad.P)
    else:
        A = char_poly(quad.P)
        a_coeffs = A.coeffs[::m]
        mu = poly_roots(DensePoly(a_coeffs, trim_tol=0.0))
    scale = max(1.0, float(np.max(np.abs(mu))))
    for j in range(n):
        for k in range(j + 1, n):
            if abs(mu[j] - mu[k]) < tol.spectrum_gap * scale:
                raise DegenerateSpectrum(f"eigenvalues {j} and {k} of the V_0 product coincide")
    if np.min(np.abs(mu)) < tol.spectrum_gap * scale:
        raise DegenerateSpectrum("zero eigenvalue: P is not invertible")
    lam = principal_root(mu, m)
    radius = NODE_RADIUS * float(np.max(np.abs(lam)))
    nodes = interpolation_nodes(quad, radius)
    D = lagrange_interp(nodes, [_ratio_vectors(quad, z)[1] for z in nodes])
    Ap = A.derivative()
    phi = np.array([D(l) / Ap(l) for l in lam])
    return canonicalize(SpectralPoint.make(m, lam, phi))

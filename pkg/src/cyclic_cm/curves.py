"""Interpolation curves through the conjugate pairs and their quotient by Z_m.

A curve is stored in the quotient variable a = z^m as two polynomials
(p, q) of degree <= n-1; in the plane it reads q(z^m) z y - p(z^m) = 0.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .config import DEFAULT, Tolerances
from .coords import theta_closed, z_m_action
from .errors import DivisibilityViolation, ZeroCoupling
from .kernel import DensePoly
from .model import Coupling, SpectralPoint, SpinFraming
from .spectral import bundle, lagrange_basis_a


@dataclass(frozen=True)
class CurvePolys:
    delta: int
    p: DensePoly
    q: DensePoly
    m: int
    n: int
    two_route_residual: float = 0.0
    divisibility_residual: float = 0.0

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "m": self.m,
            "n": self.n,
            "p": self.p.to_list(),
            "q": self.q.to_list(),
            "two_route_residual": self.two_route_residual,
            "divisibility_residual": self.divisibility_residual,
        }


@dataclass(frozen=True)
class QuotientSample:
    z: complex
    a: complex
    b: complex
    c: complex


def conjugates(point: SpectralPoint, coupling: Coupling, framing: Optional[SpinFraming], delta: int) -> np.ndarray:
    """phi (delta = 1) or theta (delta = 2)."""
    if delta == 1:
        return point.phi
    if delta == 2:
        if coupling.abs_g == 0:
            raise ZeroCoupling("|g| = 0: the second curve is undefined")
        return theta_closed(point, coupling, framing)
    raise ValueError("delta must be 1 or 2")


def closed_curve(point: SpectralPoint, gamma: np.ndarray) -> tuple[DensePoly, DensePoly]:
    """q(a) = m sum_j prod_{l != j}(a - lambda_l^m), p(a) = m sum_j lambda_j gamma_j prod_{l != j}(...)."""
    m = point.m
    basis = lagrange_basis_a(point.lam**m)
    q = DensePoly([0.0])
    p = DensePoly([0.0])
    for b, lj, gj in zip(basis, point.lam, gamma):
        q = q + b * m
        p = p + b * (m * lj * gj)
    return p, q


def _extract(poly: DensePoly, m: int, shift: int, count: int) -> tuple[np.ndarray, float]:
    """Coefficients at exponents shift + m k (k < count) and the largest other coefficient."""
    c = np.zeros(max(poly.coeffs.size, shift + m * count + 1), dtype=complex)
    c[: poly.coeffs.size] = poly.coeffs
    take = np.zeros(c.size, dtype=bool)
    idx = shift + m * np.arange(count)
    take[idx] = True
    rest = np.abs(c[~take])
    scale = max(float(np.max(np.abs(c))), 1e-300)
    return c[idx], float(np.max(rest, initial=0.0) / scale)


def curve_polys(
    point: SpectralPoint,
    coupling: Coupling,
    framing: Optional[SpinFraming] = None,
    delta: int = 1,
    tol: Tolerances = DEFAULT,
    fns=None,
) -> CurvePolys:
    """Curve polynomials by closed form, cross-checked against the spectral polynomials.

    The second route divides D (resp. C/|g|) by z^{m-2} and A' by z^{m-1}
    and reads off the coefficients in z^m.  For m = 1 there is no
    division; p is recovered as (a D(a)) mod A(a), which agrees with
    lambda_j phi_j at every node.
    """
    m, n = point.m, point.n
    gamma = conjugates(point, coupling, framing, delta)
    p, q = closed_curve(point, gamma)

    fns = fns or bundle(point, coupling, framing)
    num = fns.D if delta == 1 else fns.C * (1.0 / coupling.abs_g)
    if m >= 2:
        p2, off_p = _extract(num, m, m - 2, n)
        q2, off_q = _extract(fns.A_prime, m, m - 1, n)
        divisibility = off_p
        p_alt, q_alt = DensePoly(p2, trim_tol=0.0), DensePoly(q2, trim_tol=0.0)
    else:
        _, rem = (num * DensePoly([0.0, 1.0])).divmod(fns.A)
        p_alt, q_alt = rem, fns.A_prime
        divisibility = 0.0
        off_q = 0.0
    if divisibility > tol.divisibility:
        raise DivisibilityViolation(f"low-order coefficients of the numerator are {divisibility:.2e} of scale")
    scale = max(1.0, p.scale(), q.scale())
    two_route = max(_coeff_distance(p, p_alt), _coeff_distance(q, q_alt)) / scale
    return CurvePolys(delta=delta, p=p, q=q, m=m, n=n, two_route_residual=two_route, divisibility_residual=max(divisibility, off_q))


def _coeff_distance(a: DensePoly, b: DensePoly) -> float:
    size = max(a.coeffs.size, b.coeffs.size)
    x = np.zeros(size, dtype=complex)
    y = np.zeros(size, dtype=complex)
    x[: a.coeffs.size] = a.coeffs
    y[: b.coeffs.size] = b.coeffs
    return float(np.max(np.abs(x - y)))


def incidence_check(curve: CurvePolys, point: SpectralPoint, gamma: np.ndarray) -> float:
    """max_k |q(lambda_k^m) lambda_k gamma_k - p(lambda_k^m)|, relative to coefficient scale."""
    a = point.lam**point.m
    res = np.abs(curve.q(a) * point.lam * gamma - curve.p(a))
    scale = max(1.0, curve.p.scale(), curve.q.scale())
    return float(np.max(res) / scale)


def equivariance_check(point: SpectralPoint, coupling: Coupling, framing: Optional[SpinFraming] = None, delta: int = 1, shifts=1) -> float:
    """Max coefficient change of (p, q) under lambda -> omega lambda, phi -> omega^-1 phi."""
    base = curve_polys(point, coupling, framing, delta)
    moved_point, moved_framing = z_m_action(point, framing, shifts)
    moved = curve_polys(moved_point, coupling, moved_framing, delta)
    return max(_coeff_distance(base.p, moved.p), _coeff_distance(base.q, moved.q))


def quotient_samples(curve: CurvePolys, zs: Iterable[complex], pole_gap: float = 1e-12) -> tuple[list[QuotientSample], int]:
    """a = z^m, c = p(a)/q(a), b = c^m / a; returns the samples and the number of skipped poles."""
    out, skipped = [], 0
    for z in zs:
        z = complex(z)
        a = z**curve.m
        qa = curve.q(a)
        if abs(z) <= pole_gap or abs(qa) <= pole_gap * max(1.0, curve.q.scale()):
            skipped += 1
            continue
        c = curve.p(a) / qa
        out.append(QuotientSample(z=z, a=a, b=c**curve.m / a, c=c))
    return out, skipped


def quotient_residuals(curve: CurvePolys, samples: list[QuotientSample]) -> tuple[float, float]:
    """max |q(a) c - p(a)| and max |a b - c^m| / scale over the samples."""
    curve_res, surf_res = 0.0, 0.0
    for s in samples:
        curve_res = max(curve_res, abs(curve.q(s.a) * s.c - curve.p(s.a)))
        scale = max(1.0, abs(s.c) ** curve.m)
        surf_res = max(surf_res, abs(s.a * s.b - s.c**curve.m) / scale)
    return curve_res, surf_res


def samples_csv(samples: list[QuotientSample]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["z_re", "z_im", "a_re", "a_im", "b_re", "b_im", "c_re", "c_im"])
    for s in samples:
        writer.writerow([repr(x) for v in (s.z, s.a, s.b, s.c) for x in (v.real, v.imag)])
    return buf.getvalue()


def default_sample_points(point: SpectralPoint, count: int = 16) -> np.ndarray:
    """The lambda_k themselves plus points on a circle around the spectrum."""
    radius = 1.1 * float(np.max(np.abs(point.lam)))
    ring = radius * np.exp(2j * math.pi * (np.arange(count) + 0.25) / count)
    return np.concatenate([point.lam, ring])

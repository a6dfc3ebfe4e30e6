"""Hamiltonians, exact flows in spectral coordinates, and the m = 1 ODE check."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT, Tolerances
from .coords import recover_spectral
from .errors import CollisionDetected, DegenerateSpectrum
from .kernel import eigenvalues, match_multisets
from .model import Coupling, QModelPoint, Quadruple, SpectralPoint, SpinFraming, build_dual, build_qmodel

# Sign of the phi flow; fixed by comparing against direct integration for m = 1.
FLOW_SIGN = 1


@dataclass(frozen=True)
class FlowSpec:
    K: int
    t: complex
    steps: int = 1

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be a positive integer")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


def H_trace(quad: Quadruple, K: int) -> complex:
    """(1/(mK)) tr(P^{mK})."""
    m = quad.m
    return complex(np.trace(np.linalg.matrix_power(quad.P, m * K)) / (m * K))


def H_spectral(point: SpectralPoint, K: int) -> complex:
    """(1/K) sum_j lambda_j^{mK}."""
    return complex(np.sum(point.lam ** (point.m * K)) / K)


def evolve(point: SpectralPoint, flow: FlowSpec, framing: Optional[SpinFraming] = None):
    """Exact flow of H_K: lambda fixed, phi_j(t) = phi_j + m^2 lambda_j^{mK-1} t.

    The factor m^2 is the explicit m of the bracket times dH_K/dlambda_j =
    m lambda_j^{mK-1}.  The framing does not move.
    """
    m, K = point.m, flow.K
    phi = point.phi + FLOW_SIGN * m * m * point.lam ** (m * K - 1) * flow.t
    return point.replace(phi=phi), framing


def positions_quad(quad: Quadruple, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Eigenvalues of X_{m-1} ... X_0 on V_0 (these are q_j^m; q_j for m = 1)."""
    m = quad.m
    prod = np.eye(quad.n, dtype=complex)
    for i in range(m):
        prod = quad.block("X", (i + 1) % m, i) @ prod
    vals = eigenvalues(prod)
    scale = max(1.0, float(np.max(np.abs(vals))))
    n = vals.size
    for j in range(n):
        for k in range(j + 1, n):
            if abs(vals[j] - vals[k]) < tol.spectrum_gap * scale:
                raise DegenerateSpectrum("coinciding positions: X product not diagonalizable here")
    return vals


def positions(point: SpectralPoint, coupling: Coupling, framing: Optional[SpinFraming] = None) -> np.ndarray:
    return positions_quad(build_dual(point, coupling, framing))


# ------------------------------------------------------------ m = 1 ODE


def classic_H(p: np.ndarray, q: np.ndarray, gamma: complex) -> complex:
    """sum p^2 / 2 + sum_{j<k} gamma / (q_j - q_k)^2."""
    n = q.size
    pot = 0j
    for j in range(n):
        for k in range(j + 1, n):
            pot += gamma / (q[j] - q[k]) ** 2
    return complex(np.sum(p**2) / 2 + pot)


def _rhs(p: np.ndarray, q: np.ndarray, gamma: complex):
    diff = q[:, None] - q[None, :]
    np.fill_diagonal(diff, 1.0)
    cube = diff ** (-3)
    np.fill_diagonal(cube, 0.0)
    force = 2 * gamma * np.sum(cube, axis=1)
    return p.copy(), force


def integrate_eom(qp: QModelPoint, gamma: complex, t: complex, steps: int, gap: float = 1e-6) -> QModelPoint:
    """Classical RK4 for dq/dt = p, dp_j/dt = 2 gamma sum_{k != j} (q_j - q_k)^{-3}."""
    if qp.m != 1:
        raise ValueError("the particle ODE is only defined for m = 1")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    p = qp.p.astype(complex).copy()
    q = qp.q.astype(complex).copy()
    dt = t / steps
    n = q.size

    def check(qq):
        if n > 1:
            d = np.abs(qq[:, None] - qq[None, :])[~np.eye(n, dtype=bool)]
            if np.min(d) < gap:
                raise CollisionDetected(f"particles closer than {gap}")

    check(q)
    for _ in range(steps):
        k1q, k1p = _rhs(p, q, gamma)
        k2q, k2p = _rhs(p + dt / 2 * k1p, q + dt / 2 * k1q, gamma)
        k3q, k3p = _rhs(p + dt / 2 * k2p, q + dt / 2 * k2q, gamma)
        k4q, k4p = _rhs(p + dt * k3p, q + dt * k3q, gamma)
        q = q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
        p = p + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        check(q)
    return QModelPoint.make(1, p, q)


def projected_positions(qp: QModelPoint, coupling: Coupling, t: complex, K: int = 2) -> np.ndarray:
    """Positions at time t by the spectral route: recover, evolve, rebuild, diagonalize."""
    orbit = recover_spectral(build_qmodel(qp, coupling), coupling)
    moved, _ = evolve(orbit.point, FlowSpec(K=K, t=t))
    return positions(moved, coupling)


def crosscheck_m1(qp: QModelPoint, g0: complex, times=(0.1, 0.5, 1.0), steps: int = 2000) -> dict:
    """Compare projected positions with RK4 positions for H = tr(L^2)/2, gamma = -g0^2."""
    from .model import derived_constants

    coupling = derived_constants(1, [g0])
    gamma = -(g0**2)
    rows = []
    for t in times:
        ode = integrate_eom(qp, gamma, t, steps)
        proj = projected_positions(qp, coupling, t, K=2)
        rows.append({"t": t, "residual": match_multisets(ode.q, proj)})
    return {"rows": rows, "max_residual": max(r["residual"] for r in rows)}

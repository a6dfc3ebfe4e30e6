"""Finite-difference Poisson brackets in the canonical local coordinates.

Coordinates of a state are (lambda_j, phi_j) and, for spin states, the
framing entries [v_i]_{j,alpha} and [w_i]_{alpha,j}, all treated as
independent holomorphic variables.  The bracket is

    {f, g} = sum_j m (f_lam g_phi - f_phi g_lam)
             + sum_{i,alpha,j} (f_{w_i[alpha,j]} g_{v_i[j,alpha]} - f_{v_i[j,alpha]} g_{w_i[alpha,j]}),

with partials taken by central differences along the real direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .config import DEFAULT, Tolerances
from .coords import e_terms, f_terms, theta_closed
from .errors import EvaluationFailure
from .model import Coupling, SpectralPoint, SpinFraming, spinless_products


@dataclass(frozen=True)
class PhaseFunction:
    """A (possibly vector-valued) map from a state to complex numbers."""

    label: str
    fn: Callable  # (SpectralPoint, Optional[SpinFraming]) -> complex or array

    def __call__(self, point, framing=None):
        return self.fn(point, framing)


@dataclass(frozen=True)
class State:
    point: SpectralPoint
    framing: Optional[SpinFraming] = None

    @property
    def m(self) -> int:
        return self.point.m

    @property
    def n(self) -> int:
        return self.point.n

    @property
    def d(self) -> int:
        return 0 if self.framing is None else self.framing.d

    def labels(self) -> list[tuple]:
        """Coordinate identifiers, in the order used by :meth:`vector`."""
        n, m, d = self.n, self.m, self.d
        out = [("lam", j) for j in range(n)] + [("phi", j) for j in range(n)]
        out += [("v", i, j, a) for i in range(m) for j in range(n) for a in range(d)]
        out += [("w", i, a, j) for i in range(m) for a in range(d) for j in range(n)]
        return out

    def vector(self) -> np.ndarray:
        parts = [self.point.lam, self.point.phi]
        if self.framing is not None:
            parts += [np.ravel(x) for x in self.framing.V] + [np.ravel(x) for x in self.framing.W]
        return np.concatenate(parts).astype(complex)

    def from_vector(self, x: np.ndarray) -> "State":
        n, m, d = self.n, self.m, self.d
        point = SpectralPoint.make(m, x[:n], x[n : 2 * n])
        if self.framing is None:
            return State(point)
        off = 2 * n
        V, W = [], []
        for _ in range(m):
            V.append(x[off : off + n * d].reshape(n, d))
            off += n * d
        for _ in range(m):
            W.append(x[off : off + d * n].reshape(d, n))
            off += d * n
        return State(point, SpinFraming.make(V, W))

    def index(self, coord: tuple) -> int:
        return self.labels().index(tuple(coord))

    def pairing(self) -> np.ndarray:
        """Matrix J with {f, g} = grad f . J . grad g."""
        labels = self.labels()
        pos = {lab: k for k, lab in enumerate(labels)}
        N = len(labels)
        J = np.zeros((N, N))
        for j in range(self.n):
            a, b = pos[("lam", j)], pos[("phi", j)]
            J[a, b] = self.m
            J[b, a] = -self.m
        for i in range(self.m):
            for j in range(self.n):
                for al in range(self.d):
                    a, b = pos[("w", i, al, j)], pos[("v", i, j, al)]
                    J[a, b] = 1.0
                    J[b, a] = -1.0
        return J


def default_step(x: complex) -> float:
    return 1e-6 * (1.0 + abs(x))


def _evaluate(f, state: State) -> np.ndarray:
    try:
        val = np.asarray(f(state.point, state.framing), dtype=complex)
    except Exception as exc:  # any failure inside a user function
        raise EvaluationFailure(f"evaluation failed: {exc}") from exc
    if not np.all(np.isfinite(val)):
        raise EvaluationFailure("non-finite value")
    return val


def fd_partial(f, coord: tuple, state: State, h: Optional[float] = None, direction: complex = 1.0) -> complex:
    """Central difference of f along one coordinate.

    ``direction = 1j`` steps along the imaginary axis and divides by i, which
    for a holomorphic f reproduces the real-direction value.
    """
    x = state.vector()
    k = state.index(coord)
    h = default_step(x[k]) if h is None else h
    if h <= 0:
        raise ValueError("step must be positive")
    xp = x.copy()
    xm = x.copy()
    xp[k] += h * direction
    xm[k] -= h * direction
    fp = _evaluate(f, state.from_vector(xp))
    fm = _evaluate(f, state.from_vector(xm))
    out = (fp - fm) / (2 * h * direction)
    return complex(out) if out.ndim == 0 else out


def gradient(f, state: State) -> np.ndarray:
    """Jacobian of a (vector-valued) f, shape (outputs, coordinates)."""
    x = state.vector()
    cols = []
    for k in range(x.size):
        h = default_step(x[k])
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        cols.append((_evaluate(f, state.from_vector(xp)) - _evaluate(f, state.from_vector(xm))) / (2 * h))
    return np.atleast_2d(np.array(cols).T)


def bracket_from_gradients(gf: np.ndarray, gg: np.ndarray, state: State) -> np.ndarray:
    return np.atleast_2d(gf) @ state.pairing() @ np.atleast_2d(gg).T


def bracket(f, g, state: State) -> complex:
    """{f, g} for scalar phase functions."""
    return complex(bracket_from_gradients(gradient(f, state), gradient(g, state), state)[0, 0])


# ----------------------------------------------------------- verification


def lambda_fn(point, framing=None):
    return point.lam


def theta_fn(coupling: Coupling):
    return lambda point, framing=None: theta_closed(point, coupling, framing)


def verify_conjugacy(state: State, coupling: Coupling, tol: Tolerances = DEFAULT) -> dict:
    """max |{lambda_j, theta_k} - delta_jk| and max |{theta_j, theta_k}|."""
    g_lam = gradient(lambda_fn, state)
    g_th = gradient(theta_fn(coupling), state)
    lt = bracket_from_gradients(g_lam, g_th, state)
    tt = bracket_from_gradients(g_th, g_th, state)
    ll = bracket_from_gradients(g_lam, g_lam, state)
    r_lt = float(np.max(np.abs(lt - np.eye(state.n))))
    r_tt = float(np.max(np.abs(tt)))
    return {
        "lambda_theta": r_lt,
        "theta_theta": r_tt,
        "lambda_lambda": float(np.max(np.abs(ll))),
        "tolerance": tol.bracket,
        "pass": r_lt <= tol.bracket and r_tt <= tol.bracket,
    }


def key_sides(lj: complex, lk: complex, h: int, m: int) -> tuple[complex, complex]:
    """Both sides of the derivative identity, each by central differences.

    d/dlk [lk^{m-h-1} lj^h / (lk^m - lj^m)]  vs  d/dlj [lj^{h+1} lk^{m-h-2} / (lj^m - lk^m)].
    """
    left = lambda a: a ** (m - h - 1) * lj**h / (a**m - lj**m)
    right = lambda b: b ** (h + 1) * lk ** (m - h - 2) / (b**m - lk**m)
    sk = default_step(lk)
    sj = default_step(lj)
    return (left(lk + sk) - left(lk - sk)) / (2 * sk), (right(lj + sj) - right(lj - sj)) / (2 * sj)


def analytic_partials(state: State, coupling: Coupling) -> dict:
    """Analytic partials of e and f with respect to the framing entries.

    Returns arrays indexed as
      de_dw[i, a, j] = d e_j / d[w_i]_{a,j},   de_dv[i, j, a] = d e_j / d[v_i]_{j,a},
      df_dw[k, i, a, j] = d f_k / d[w_i]_{a,j}, df_dv[k, i, j, a] = d f_k / d[v_i]_{j,a}.
    """
    point, fr = state.point, state.framing
    m, n, d = state.m, state.n, state.d
    lam = point.lam
    ag = coupling.abs_g
    vw = fr.products()
    dvw = np.einsum("ijj->ij", vw)
    tail = coupling.prefix @ dvw
    c_prev = [coupling.c[i - 1] if i > 0 else -complex(np.sum(coupling.prefix * coupling.g)) for i in range(m)]
    lm = lam**m
    denom = lm[:, None] - lm[None, :]  # [j, k] -> lam_j^m - lam_k^m
    np.fill_diagonal(denom, 1.0)
    kern = np.array([np.outer(lam ** (m - h - 1), lam**h) / denom for h in range(m)])  # [h, j, k]
    for h in range(m):
        np.fill_diagonal(kern[h], 0.0)

    de_dw = np.zeros((m, d, n), dtype=complex)
    de_dv = np.zeros((m, n, d), dtype=complex)
    for i in range(m):
        bracket_i = c_prev[i] - (i / m) * ag + dvw[i] + tail  # per j
        de_dw[i] = fr.V[i].T * (bracket_i / (m * ag * lam))[None, :]
        de_dv[i] = fr.W[i].T * (bracket_i / (m * ag * lam))[:, None]

    df_dw = np.zeros((n, m, d, n), dtype=complex)
    df_dv = np.zeros((n, m, n, d), dtype=complex)
    for k in range(n):
        for i in range(m):
            for j in range(n):
                if j == k:
                    # d f_k / d[w_i]_{a,k} and d f_k / d[v_i]_{k,a}
                    sw = np.zeros(d, dtype=complex)
                    sv = np.zeros(d, dtype=complex)
                    for t in range(n):
                        if t == k:
                            continue
                        aw = sum(vw[(i + h + 1) % m][k, t] * kern[h][t, k] for h in range(m))
                        av = sum(vw[(i - h - 1) % m][t, k] * kern[h][t, k] for h in range(m))
                        sw += fr.V[i][t, :] * aw
                        sv += fr.W[i][:, t] * av
                    df_dw[k, i, :, k] = -sw / (m * ag)
                    df_dv[k, i, k, :] = -sv / (m * ag)
                else:
                    aw = sum(vw[(i - h - 1) % m][j, k] * kern[h][j, k] for h in range(m))
                    av = sum(vw[(i + h + 1) % m][k, j] * kern[h][j, k] for h in range(m))
                    df_dw[k, i, :, j] = -fr.V[i][k, :] * aw / (m * ag)
                    df_dv[k, i, j, :] = -fr.W[i][:, k] * av / (m * ag)
    return {"de_dw": de_dw, "de_dv": de_dv, "df_dw": df_dw, "df_dv": df_dv}


def spinless_df_dlambda(point: SpectralPoint, coupling: Coupling) -> np.ndarray:
    """Analytic d f_k / d lambda_j for j != k: |g| (lambda_j lambda_k)^{m-1} / (lambda_k^m - lambda_j^m)^2."""
    m, lam = point.m, point.lam
    lm = lam**m
    out = coupling.abs_g * np.outer(lam ** (m - 1), lam ** (m - 1))
    diff = lm[None, :] - lm[:, None]  # [j, k] -> lam_k^m - lam_j^m
    np.fill_diagonal(diff, 1.0)
    out = out / diff**2
    np.fill_diagonal(out, 0.0)
    return out.T  # [k, j]


def _rel_max(fd: np.ndarray, an: np.ndarray) -> float:
    return float(np.max(np.abs(fd - an) / np.maximum(np.abs(an), 1.0))) if fd.size else 0.0


def verify_partial_identities(
    state: State, coupling: Coupling, tol: Tolerances = DEFAULT, rng: Optional[np.random.Generator] = None, key_triples: int = 20
) -> dict:
    """Symmetry of d f_j / d lambda_k, the scalar derivative identity, and the framing partials."""
    rng = rng or np.random.default_rng(0)
    m, n = state.m, state.n
    lam_coords = [("lam", j) for j in range(n)]

    def f_vec(point, framing=None):
        vw = framing.products() if framing is not None else spinless_products(point.n, point.m, coupling.abs_g)
        return f_terms(point.lam, vw, coupling)

    full = gradient(f_vec, state)
    idx = [state.index(c) for c in lam_coords]
    jac = full[:, idx]  # [k, j] = d f_k / d lambda_j
    sym = float(np.max(np.abs(jac - jac.T))) if n > 1 else 0.0
    report = {"f_symmetry": sym, "f_symmetry_tolerance": tol.f_symmetry, "f_symmetry_pass": sym <= tol.f_symmetry}

    if state.framing is None and n > 1:
        an = spinless_df_dlambda(state.point, coupling)
        off = ~np.eye(n, dtype=bool)
        report["spinless_df_dlambda"] = _rel_max(jac[off], an[off])

    worst = 0.0
    for _ in range(key_triples):
        lj, lk = (rng.uniform(0.5, 2.0, 2) * np.exp(1j * rng.uniform(0, 2 * math.pi, 2)))
        if abs(lj**m - lk**m) < 0.1:
            continue
        h = int(rng.integers(0, m))
        a, b = key_sides(lj, lk, h, m)
        worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    report.update({"key_identity": worst, "key_tolerance": tol.key_identity, "key_pass": worst <= tol.key_identity})

    if state.framing is not None:
        an = analytic_partials(state, coupling)
        d = state.d
        e_vec = lambda point, framing=None: e_terms(point.lam, framing.products(), coupling)
        ge = gradient(e_vec, state)
        pos = {lab: k for k, lab in enumerate(state.labels())}
        fd_ew = np.array([[[ge[j, pos[("w", i, a, j)]] for j in range(n)] for a in range(d)] for i in range(m)])
        fd_ev = np.array([[[ge[j, pos[("v", i, j, a)]] for a in range(d)] for j in range(n)] for i in range(m)])
        fd_fw = np.array([[[[full[k, pos[("w", i, a, j)]] for j in range(n)] for a in range(d)] for i in range(m)] for k in range(n)])
        fd_fv = np.array([[[[full[k, pos[("v", i, j, a)]] for a in range(d)] for j in range(n)] for i in range(m)] for k in range(n)])
        parts = {
            "e_w": _rel_max(fd_ew, an["de_dw"]),
            "e_v": _rel_max(fd_ev, an["de_dv"]),
            "f_w": _rel_max(fd_fw, an["df_dw"]),
            "f_v": _rel_max(fd_fv, an["df_dv"]),
        }
        report["spin_partials"] = parts
        report["spin_partials_pass"] = max(parts.values()) <= tol.spin_partials
    report["pass"] = report["f_symmetry_pass"] and report["key_pass"] and report.get("spin_partials_pass", True)
    return report


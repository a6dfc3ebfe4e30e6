"""Couplings, coordinates, framings and gauge-orbit representatives.

Block conventions: V = V_0 + ... + V_{m-1}, each of dimension n.  The
matrix X has its non-zero blocks at (i+1, i), the matrix P at (i, i+1),
indices modulo m.  Framings are block diagonal: v is mn x f and w is
f x mn with f = 1 (spinless) or f = d*m (spin).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DegeneratePoint, SamplingFailed, SingularMatrix
from .kernel import as_matrix, inverse


def _cvec(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=complex).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------- coupling


@dataclass(frozen=True)
class Coupling:
    m: int
    g: np.ndarray
    abs_g: complex
    c: np.ndarray

    @property
    def prefix(self) -> np.ndarray:
        """The weights (m - s)/m used in the definition of c."""
        return (self.m - np.arange(self.m)) / self.m


def derived_constants(m: int, g: Sequence[complex]) -> Coupling:
    """c_i = sum_{r<=i} g_r - sum_s ((m-s)/m) g_s and |g| = sum_s g_s."""
    g = _cvec(g, "g")
    if m < 1 or g.size != m:
        raise ValueError(f"need m >= 1 and len(g) == m, got m={m}, len(g)={g.size}")
    weights = (m - np.arange(m)) / m
    shift = complex(np.sum(weights * g))
    c = np.cumsum(g) - shift
    c.setflags(write=False)
    return Coupling(m=m, g=g, abs_g=complex(np.sum(g)), c=c)


def is_regular(coupling: Coupling, tol: float = DEFAULT.regular_eq) -> tuple[bool, dict]:
    """Regularity test with a certificate.

    The resonance condition k|g| = g_h + ... + g_{i-1} is scanned for
    |k| <= K_max = ceil(max partial sum / |g|) + 1; larger |k| cannot hit
    any partial sum by magnitude.
    """
    m, g, ag = coupling.m, coupling.g, coupling.abs_g
    if abs(ag) <= tol:
        return False, {"reason": "abs_g_zero", "abs_g": ag}
    partial = []
    for h in range(1, m - 1):
        for i in range(h + 1, m):
            partial.append(((h, i), complex(np.sum(g[h:i]))))
    if not partial:
        return True, {"reason": "no_partial_sums", "k_max": 0}
    k_max = int(math.ceil(max(abs(s) for _, s in partial) / abs(ag))) + 1
    for (h, i), s in partial:
        for k in range(-k_max, k_max + 1):
            if abs(k * ag - s) <= tol * max(1.0, abs(s)):
                return False, {"reason": "resonance", "h": h, "i": i, "k": k, "partial_sum": s}
    return True, {"reason": "scan_clear", "k_max": k_max, "checked": len(partial)}


def random_coupling(rng: np.random.Generator, m: int, max_tries: int = 1000) -> Coupling:
    for _ in range(max_tries):
        g = rng.normal(size=m) + 1j * rng.normal(size=m)
        cp = derived_constants(m, g)
        if abs(cp.abs_g) > 0.3 and is_regular(cp)[0]:
            return cp
    raise SamplingFailed("could not draw a regular coupling")


# ------------------------------------------------------------ coordinates


@dataclass(frozen=True)
class SpectralPoint:
    m: int
    n: int
    lam: np.ndarray
    phi: np.ndarray

    @classmethod
    def make(cls, m: int, lam, phi) -> "SpectralPoint":
        lam = _cvec(lam, "lambda")
        phi = _cvec(phi, "phi")
        if lam.size != phi.size or lam.size == 0:
            raise ValueError("lambda and phi must be non-empty and of equal length")
        return cls(m=m, n=lam.size, lam=lam, phi=phi)

    def replace(self, lam=None, phi=None) -> "SpectralPoint":
        return SpectralPoint.make(self.m, self.lam if lam is None else lam, self.phi if phi is None else phi)


def check_generic(values: np.ndarray, m: int, tol: float = DEFAULT.lambda_gap, what: str = "lambda") -> None:
    """Reject zero entries or colliding m-th powers."""
    if np.any(np.abs(values) <= tol):
        raise DegeneratePoint(f"{what} has a zero entry")
    powers = values**m
    scale = max(1.0, float(np.max(np.abs(powers))))
    n = powers.size
    for j in range(n):
        for k in range(j + 1, n):
            if abs(powers[j] - powers[k]) <= tol * scale:
                raise DegeneratePoint(f"{what}^m collide at indices {j}, {k}")


@dataclass(frozen=True)
class SpinFraming:
    d: int
    V: tuple  # m arrays n x d
    W: tuple  # m arrays d x n

    @classmethod
    def make(cls, V: Sequence, W: Sequence) -> "SpinFraming":
        V = tuple(np.array(x, dtype=complex) for x in V)
        W = tuple(np.array(x, dtype=complex) for x in W)
        if len(V) != len(W) or not V:
            raise ValueError("V and W need the same positive number of blocks")
        n, d = V[0].shape
        for a, b in zip(V, W):
            if a.shape != (n, d) or b.shape != (d, n):
                raise ValueError("inconsistent framing block shapes")
            a.setflags(write=False)
            b.setflags(write=False)
        return cls(d=d, V=V, W=W)

    @property
    def m(self) -> int:
        return len(self.V)

    @property
    def n(self) -> int:
        return self.V[0].shape[0]

    def products(self) -> np.ndarray:
        """Stack of the n x n products v_i w_i, shape (m, n, n)."""
        return np.stack([a @ b for a, b in zip(self.V, self.W)])

    def constraint_residual(self, coupling: Coupling) -> float:
        vw = self.products()
        diag = np.einsum("ijj->j", vw)
        return float(np.max(np.abs(diag - coupling.abs_g)))


def spinless_products(n: int, m: int, abs_g: complex) -> np.ndarray:
    """The v_i w_i stack of the spinless framing: |g| e e^T in block 0."""
    vw = np.zeros((m, n, n), dtype=complex)
    vw[0] = abs_g
    return vw


@dataclass(frozen=True)
class QModelPoint:
    m: int
    n: int
    p: np.ndarray
    q: np.ndarray

    @classmethod
    def make(cls, m: int, p, q) -> "QModelPoint":
        p = _cvec(p, "p")
        q = _cvec(q, "q")
        if p.size != q.size or p.size == 0:
            raise ValueError("p and q must be non-empty and of equal length")
        return cls(m=m, n=p.size, p=p, q=q)


@dataclass(frozen=True)
class Quadruple:
    m: int
    n: int
    X: np.ndarray
    P: np.ndarray
    v: np.ndarray
    w: np.ndarray
    framing_sign: int = 1
    constraint_ok: Optional[bool] = None
    model: str = "generic"

    @property
    def size(self) -> int:
        return self.m * self.n

    def block(self, which: str, r: int, c: int) -> np.ndarray:
        mat = self.X if which == "X" else self.P
        n = self.n
        return mat[r * n : (r + 1) * n, c * n : (c + 1) * n]

    def framing_product(self) -> np.ndarray:
        return self.v @ self.w


# ------------------------------------------------------------- builders


def _block_slice(i: int, n: int) -> slice:
    return slice(i * n, (i + 1) * n)


def dual_blocks(point: SpectralPoint, coupling: Coupling, vw: np.ndarray) -> list[np.ndarray]:
    """The n x n blocks Q_i = [X]_{i+1,i} of the dual model.

    ``vw`` is the (m, n, n) stack of v_i w_i products; the spinless case is
    the stack returned by :func:`spinless_products`.
    """
    m, n = point.m, point.n
    lam, phi = point.lam, point.phi
    weights = coupling.prefix
    dvw = np.einsum("ijj->ij", vw)  # (m, n) diagonals
    tail = np.einsum("i,ij->j", weights, dvw)
    running = np.cumsum(dvw, axis=0)
    lm = lam**m
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = lm[:, None] - lm[None, :]
        np.fill_diagonal(denom, 1.0)
    blocks = []
    for i in range(m):
        Q = np.zeros((n, n), dtype=complex)
        for h in range(m):
            kernel = np.outer(lam ** (m - h - 1), lam**h) / denom
            Q -= vw[(i - h) % m] * kernel
        # diagonal: phi_j + (c_i - sum_{r<=i} vw_r + sum_s a_s vw_s) / lambda_j
        np.fill_diagonal(Q, phi + (coupling.c[i] - running[i] + tail) / lam)
        blocks.append(Q)
    return blocks


def _assemble(m: int, n: int, lower: Sequence[np.ndarray], upper: Sequence[np.ndarray]):
    N = m * n
    X = np.zeros((N, N), dtype=complex)
    P = np.zeros((N, N), dtype=complex)
    for i in range(m):
        ip = (i + 1) % m
        X[_block_slice(ip, n), _block_slice(i, n)] += lower[i]
        P[_block_slice(i, n), _block_slice(ip, n)] += upper[i]
    return X, P


def framing_matrices(m: int, n: int, framing: Optional[SpinFraming], abs_g: complex):
    """Block-diagonal (v, w); the spinless case uses e in block 0 and |g| e^T."""
    N = m * n
    if framing is None:
        v = np.zeros((N, 1), dtype=complex)
        w = np.zeros((1, N), dtype=complex)
        v[:n, 0] = 1.0
        w[0, :n] = abs_g
        return v, w
    d = framing.d
    v = np.zeros((N, d * m), dtype=complex)
    w = np.zeros((d * m, N), dtype=complex)
    for i in range(m):
        v[_block_slice(i, n), i * d : (i + 1) * d] = framing.V[i]
        w[i * d : (i + 1) * d, _block_slice(i, n)] = framing.W[i]
    return v, w


def moment_residual(quad: Quadruple, coupling: Coupling, g_sign: int = 1) -> float:
    """Frobenius norm of [X, P] - g_sign * g 1_V - v w.

    ``g_sign = -1`` evaluates the mirrored equation [X, P] = -g 1_V + v w,
    which is useful as a diagnostic for sign conventions.
    """
    X, P = quad.X, quad.P
    gdiag = np.repeat(coupling.g, quad.n) if coupling.m == quad.m else np.zeros(X.shape[0])
    resid = (X @ P - P @ X - quad.v @ quad.w).astype(complex)
    resid[np.diag_indices_from(resid)] -= g_sign * gdiag
    return float(np.linalg.norm(resid))


def _sign_passes(m, n, X, P, v, w, coupling, sign, tol) -> tuple[bool, float]:
    quad = Quadruple(m, n, X, P, v, sign * w)
    res = moment_residual(quad, coupling)
    scale = max(1.0, float(np.max(np.abs(X))), float(np.max(np.abs(P))))
    return res <= tol * scale, res


@functools.lru_cache(maxsize=256)
def _model_sign(model: str, m: int, g: tuple, tol: float) -> int:
    """Framing sign adopted for a whole model, decided on a generic probe point.

    Both signs of w are tested against the constraint at a fixed point
    with n = 2 (n = 1 is too degenerate to discriminate: for m = 1 the
    commutator vanishes identically).  The printed sign is kept when it
    passes or when neither does.
    """
    coupling = derived_constants(m, g)
    probe_a = np.array([0.7 * np.exp(0.3j), 1.3 * np.exp(1.1j)])
    probe_b = np.array([0.2 + 0.1j, -0.4 + 0.3j])
    if model == "dual":
        X, P, v, w = _dual_matrices(SpectralPoint.make(m, probe_a, probe_b), coupling, None)
        default = 1
    else:
        X, P, v, w = _qmodel_matrices(QModelPoint.make(m, probe_b, probe_a), coupling)
        default = -1
    for sign in (default, -default):
        if _sign_passes(m, 2, X, P, v, w, coupling, sign, tol)[0]:
            return sign
    return default


def _finish(model, m, n, X, P, v, w, coupling, tol):
    sign = _model_sign(model, m, tuple(complex(x) for x in coupling.g), tol)
    ok, _ = _sign_passes(m, n, X, P, v, w, coupling, sign, tol)
    return Quadruple(m, n, X, P, v, sign * w, framing_sign=sign, constraint_ok=ok, model=model)


def _dual_matrices(point, coupling, framing):
    m, n = point.m, point.n
    vw = framing.products() if framing is not None else spinless_products(n, m, coupling.abs_g)
    lower = dual_blocks(point, coupling, vw)
    X, P = _assemble(m, n, lower, [np.diag(point.lam)] * m)
    v, w = framing_matrices(m, n, framing, coupling.abs_g)
    return X, P, v, w


def _qmodel_matrices(qp, coupling):
    m, n = qp.m, qp.n
    X, P = _assemble(m, n, [np.diag(qp.q)] * m, qmodel_blocks(qp, coupling))
    v, w = framing_matrices(m, n, None, coupling.abs_g)
    return X, P, v, w


def build_dual(
    point: SpectralPoint,
    coupling: Coupling,
    framing: Optional[SpinFraming] = None,
    tol: Tolerances = DEFAULT,
) -> Quadruple:
    """Dual-model representative (X, P, v, w) of a spectral point.

    P carries diag(lambda) on every (i, i+1) block; X is built from the
    displayed dual-model block formulas.  The framing sign is chosen by
    testing both signs of w against the moment-map constraint; if neither
    passes, the printed sign (+1) is kept and ``constraint_ok`` is False.
    """
    m, n = point.m, point.n
    if coupling.m != m:
        raise ValueError("coupling and point disagree on m")
    check_generic(point.lam, m, tol.lambda_gap)
    if framing is not None:
        if framing.m != m or framing.n != n:
            raise ValueError("framing shape does not match the point")
        if framing.constraint_residual(coupling) > tol.spin_constraint * max(1.0, abs(coupling.abs_g)):
            raise DegeneratePoint("framing is off the constraint surface")
    X, P, v, w = _dual_matrices(point, coupling, framing)
    return _finish("dual", m, n, X, P, v, w, coupling, tol.constraint)


def qmodel_blocks(qp: QModelPoint, coupling: Coupling) -> list[np.ndarray]:
    m = qp.m
    q, p = qp.q, qp.p
    qm = q**m
    denom = qm[:, None] - qm[None, :]
    np.fill_diagonal(denom, 1.0)
    blocks = []
    for i in range(m):
        # off-diagonal sign chosen so that [X, P] = g 1_V + v w holds with w = -|g| e
        L = -coupling.abs_g * np.outer(q**i, q ** (m - i - 1)) / denom
        np.fill_diagonal(L, p - coupling.c[i] / q)
        blocks.append(L)
    return blocks


def build_qmodel(qp: QModelPoint, coupling: Coupling, tol: Tolerances = DEFAULT) -> Quadruple:
    """Position-model representative: X blocks diag(q), P blocks L_i.

    L_i has diagonal p_j - c_i / q_j and off-diagonal
    -|g| q_j^i q_k^{m-i-1} / (q_j^m - q_k^m); with v = e and w = -|g| e in
    block 0 this satisfies the moment-map constraint exactly.
    """
    m, n = qp.m, qp.n
    if coupling.m != m:
        raise ValueError("coupling and point disagree on m")
    check_generic(qp.q, m, tol.lambda_gap, what="q")
    X, P, v, w = _qmodel_matrices(qp, coupling)
    return _finish("qmodel", m, n, X, P, v, w, coupling, tol.constraint)


def condition_number(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2) * np.linalg.norm(inverse(M), 2))


def gauge(quad: Quadruple, M, max_cond: float = 1e8) -> Quadruple:
    """(X, P, v, w) -> (M X M^-1, M P M^-1, M v, w M^-1)."""
    M = as_matrix(M)
    if M.shape != quad.X.shape:
        raise ValueError("gauge matrix has the wrong shape")
    Minv = inverse(M)
    cond = float(np.linalg.norm(M, 2) * np.linalg.norm(Minv, 2))
    if cond > max_cond:
        raise SingularMatrix(f"gauge matrix condition number {cond:.3e} exceeds {max_cond:.1e}")
    return Quadruple(
        quad.m,
        quad.n,
        M @ quad.X @ Minv,
        M @ quad.P @ Minv,
        M @ quad.v,
        quad.w @ Minv,
        framing_sign=quad.framing_sign,
        constraint_ok=quad.constraint_ok,
        model=quad.model,
    )


def random_gauge(rng: np.random.Generator, size: int, max_cond: float = 1e3, block_n: Optional[int] = None) -> np.ndarray:
    """Random invertible matrix with condition number at most ``max_cond``.

    With ``block_n`` set, the matrix is block diagonal with blocks of that
    size, which preserves the cyclic block pattern of X and P.
    """
    for _ in range(1000):
        if block_n:
            M = np.zeros((size, size), dtype=complex)
            for s in range(0, size, block_n):
                M[s : s + block_n, s : s + block_n] = np.eye(block_n) + 0.3 * (
                    rng.normal(size=(block_n, block_n)) + 1j * rng.normal(size=(block_n, block_n))
                )
        else:
            M = np.eye(size) + 0.3 * (rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))) / math.sqrt(size)
        if np.linalg.cond(M) <= max_cond:
            return M
    raise SamplingFailed("could not draw a well-conditioned gauge matrix")


# ------------------------------------------------------------- sampling


def sample_lambda(rng: np.random.Generator, m: int, n: int, gap: float = 1e-3, max_tries: int = 1000) -> np.ndarray:
    for _ in range(max_tries):
        radius = rng.uniform(0.5, 2.0, n)
        angle = rng.uniform(0.0, 2 * math.pi, n)
        lam = radius * np.exp(1j * angle)
        lm = lam**m
        diffs = np.abs(lm[:, None] - lm[None, :])[~np.eye(n, dtype=bool)]
        if n == 1 or np.min(diffs) >= gap:
            return lam
    raise SamplingFailed("could not draw non-colliding lambda values")


def sample_disk(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.sqrt(rng.uniform(0.0, 1.0, n)) * np.exp(1j * rng.uniform(0.0, 2 * math.pi, n))


def sample_framing(rng: np.random.Generator, m: int, n: int, d: int, coupling: Coupling, max_tries: int = 1000) -> SpinFraming:
    """Random framing moved onto the constraint surface by rescaling columns of w_i."""
    for _ in range(max_tries):
        V = [rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d)) for _ in range(m)]
        W = [rng.normal(size=(d, n)) + 1j * rng.normal(size=(d, n)) for _ in range(m)]
        total = sum(np.einsum("ja,aj->j", a, b) for a, b in zip(V, W))
        if np.min(np.abs(total)) < 1e-6:
            continue
        scale = coupling.abs_g / total
        W = [b * scale[None, :] for b in W]
        # keep the entries at unit size; wildly scaled columns hurt conditioning
        if max(np.max(np.abs(b)) for b in W) > 50:
            continue
        return SpinFraming.make(V, W)
    raise SamplingFailed("could not draw a framing on the constraint surface")


def sample(rng: np.random.Generator, m: int, n: int, coupling: Coupling, d: Optional[int] = None):
    """Random spectral point (and spin framing when d is a positive integer)."""
    if not is_regular(coupling)[0]:
        raise ValueError("sample() requires a regular coupling")
    lam = sample_lambda(rng, m, n)
    phi = sample_disk(rng, n)
    point = SpectralPoint.make(m, lam, phi)
    framing = sample_framing(rng, m, n, d, coupling) if d else None
    return point, framing


def sample_qmodel(rng: np.random.Generator, m: int, n: int, real: bool = False) -> QModelPoint:
    if real:
        q = np.sort(rng.uniform(-2.0, 2.0, n))
        while n > 1 and np.min(np.diff(q)) < 0.3:
            q = np.sort(rng.uniform(-2.0, 2.0, n))
        return QModelPoint.make(m, rng.uniform(-1.0, 1.0, n), q)
    return QModelPoint.make(m, sample_disk(rng, n), sample_lambda(rng, m, n))

import numpy as np
import pytest

from cyclic_cm.errors import EvaluationFailure
from cyclic_cm.model import SpectralPoint, random_coupling, sample
from cyclic_cm.poisson import PhaseFunction, State, bracket, fd_partial, key_sides, verify_conjugacy, verify_partial_identities


def draw_state(rng, m, n, d=0):
    cp = random_coupling(rng, m)
    point, fr = sample(rng, m, n, cp, d or None)
    return cp, State(point, fr)


def coord(k, name="lam"):
    return PhaseFunction(f"{name}{k}", lambda p, f=None: (p.lam if name == "lam" else p.phi)[k])


# ----------------------------------------------------------------- partials


def test_fd_square():
    state = State(SpectralPoint.make(1, [3.0, 1.0], [0.0, 0.0]))
    f = lambda p, fr=None: p.lam[0] ** 2
    assert abs(fd_partial(f, ("lam", 0), state) - 6) < 1e-7


def test_fd_constant():
    state = State(SpectralPoint.make(1, [3.0], [0.0]))
    assert abs(fd_partial(lambda p, fr=None: 4.2, ("phi", 0), state)) < 1e-9


def test_fd_holomorphic_directions(rng):
    cp, state = draw_state(rng, 2, 3)
    f = lambda p, fr=None: np.sum(p.lam**3 * p.phi) / (1 + p.lam[0])
    for c in [("lam", 0), ("phi", 2)]:
        assert abs(fd_partial(f, c, state) - fd_partial(f, c, state, direction=1j)) <= 1e-5


def test_fd_bad_step():
    state = State(SpectralPoint.make(1, [3.0], [0.0]))
    with pytest.raises(ValueError):
        fd_partial(lambda p, fr=None: 1.0, ("lam", 0), state, h=0.0)


def test_fd_evaluation_failure():
    state = State(SpectralPoint.make(1, [3.0], [0.0]))
    with pytest.raises(EvaluationFailure):
        fd_partial(lambda p, fr=None: np.inf, ("lam", 0), state)


# ------------------------------------------------------------------ brackets


@pytest.mark.parametrize("m", [1, 2, 3])
def test_canonical_pairs(rng, m):
    _, state = draw_state(rng, m, 2)
    for j in range(2):
        for k in range(2):
            phi_over_m = PhaseFunction("phi/m", lambda p, f=None, k=k: p.phi[k] / p.m)
            assert abs(bracket(coord(j), phi_over_m, state) - (j == k)) <= 1e-6
            assert abs(bracket(coord(j), coord(k), state)) <= 1e-8


def test_framing_pairs(rng):
    _, state = draw_state(rng, 2, 2, 2)
    w = lambda i, a, j: (lambda p, fr=None: fr.W[i][a, j])
    v = lambda i, j, a: (lambda p, fr=None: fr.V[i][j, a])
    assert abs(bracket(w(1, 0, 1), v(1, 1, 0), state) - 1) <= 1e-6
    assert abs(bracket(w(1, 0, 1), v(0, 1, 0), state)) <= 1e-6
    assert abs(bracket(w(0, 1, 0), v(0, 1, 1), state)) <= 1e-6


def test_antisymmetry(rng):
    _, state = draw_state(rng, 2, 3, 1)
    f = lambda p, fr=None: np.sum(p.lam * p.phi**2) + fr.W[0][0, 1] * fr.V[1][2, 0]
    g = lambda p, fr=None: np.prod(p.lam) + fr.V[0][1, 0] ** 2
    assert abs(bracket(f, g, state) + bracket(g, f, state)) <= 1e-9


# -------------------------------------------------------------- conjugacy


def test_conjugacy_spinless(rng):
    cp, state = draw_state(rng, 1, 2)
    rep = verify_conjugacy(state, cp)
    assert rep["pass"] and rep["lambda_theta"] <= 1e-5 and rep["theta_theta"] <= 1e-5


def test_conjugacy_spin(rng):
    cp, state = draw_state(rng, 2, 2, 2)
    rep = verify_conjugacy(state, cp)
    assert rep["lambda_theta"] <= 1e-5 and rep["theta_theta"] <= 1e-5


def test_conjugacy_single_particle(rng):
    cp, state = draw_state(rng, 3, 1)
    # zero up to rounding in the matrix products
    assert verify_conjugacy(state, cp)["theta_theta"] <= 1e-15


# ---------------------------------------------------------------- identities


def test_f_symmetry_spinless(rng):
    cp, state = draw_state(rng, 1, 2)
    rep = verify_partial_identities(state, cp)
    assert rep["f_symmetry"] <= 1e-6
    assert rep["spinless_df_dlambda"] <= 1e-5


def test_spin_partials(rng):
    cp, state = draw_state(rng, 3, 3, 2)
    rep = verify_partial_identities(state, cp)
    assert max(rep["spin_partials"].values()) <= 1e-5
    assert rep["pass"]


def test_key_identity_values():
    # both sides are derivatives of closed expressions; compare with the analytic left side
    lj, lk, h, m = 0.9 + 0.4j, -1.2 + 0.3j, 1, 3
    left, right = key_sides(lj, lk, h, m)
    a = lk
    exact = ((m - h - 1) * a ** (m - h - 2) * (a**m - lj**m) - a ** (m - h - 1) * m * a ** (m - 1)) * lj**h / (a**m - lj**m) ** 2
    assert abs(left - exact) <= 1e-7 * abs(exact)
    assert abs(left - right) <= 1e-7 * abs(exact)

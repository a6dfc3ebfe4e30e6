"""Verification suites: each runs one family of checks over random cases.

A suite returns a :class:`SuiteResult` with the worst residual of every
check it performs, the tolerance it was held to, and an overall verdict.
Cases are drawn from a per-case generator seeded by (seed, case id) so a
single case can be reproduced in isolation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import DEFAULT, Tolerances, rel_err
from .coords import canonicalize, orbit_distance, r_function, recover_spectral, s_function, theta_closed
from .curves import curve_polys, default_sample_points, equivariance_check, incidence_check, quotient_residuals, quotient_samples, conjugates
from .dynamics import FlowSpec, H_spectral, H_trace, crosscheck_m1, evolve
from .kernel import lu_solve
from .model import (
    Coupling,
    Quadruple,
    SpectralPoint,
    SpinFraming,
    build_dual,
    build_qmodel,
    derived_constants,
    gauge,
    moment_residual,
    random_coupling,
    random_gauge,
    sample,
    sample_qmodel,
)
from .poisson import State, verify_conjugacy, verify_partial_identities
from .spectral import A_closed, A_eval, C_eval, D_eval, resolvent_closed


@dataclass
class Case:
    case_id: int
    m: int
    n: int
    d: int
    coupling: Coupling
    point: SpectralPoint
    framing: Optional[SpinFraming]
    rng: np.random.Generator

    @property
    def spin(self) -> bool:
        return self.framing is not None


@dataclass
class CaseConfig:
    seed: int = 0
    cases: int = 200
    m: Optional[int] = None
    n: Optional[int] = None
    d: Optional[int] = None
    g: Optional[list] = None
    max_m: int = 4
    max_n: int = 5
    max_d: int = 3


def make_case(cfg: CaseConfig, k: int, max_m=None, max_n=None, max_d=None) -> Case:
    max_m = max_m or cfg.max_m
    max_n = max_n or cfg.max_n
    max_d = cfg.max_d if max_d is None else max_d
    rng = np.random.default_rng([cfg.seed, k])
    if cfg.g is not None:
        m = len(cfg.g)
    else:
        m = cfg.m if cfg.m is not None else int(rng.integers(1, max_m + 1))
    n = cfg.n if cfg.n is not None else int(rng.integers(1, max_n + 1))
    # alternate spinless and spin cases so both are always covered
    d = cfg.d if cfg.d is not None else (0 if k % 2 == 0 else int(rng.integers(1, max_d + 1)) if max_d else 0)
    coupling = derived_constants(m, cfg.g) if cfg.g is not None else random_coupling(rng, m)
    point, framing = sample(rng, m, n, coupling, d or None)
    return Case(k, m, n, d, coupling, point, framing, rng)


def iter_cases(cfg: CaseConfig, count: Optional[int] = None, offset: int = 0, **limits):
    for k in range(count if count is not None else cfg.cases):
        yield make_case(cfg, offset + k, **limits)


@dataclass
class SuiteResult:
    name: str
    checks: dict = field(default_factory=dict)  # name -> (max residual, tolerance)
    cases: int = 0
    info: dict = field(default_factory=dict)
    seconds: float = 0.0

    def record(self, check: str, value: float, tol: float, mode: str = "le") -> None:
        prev = self.checks.get(check)
        value = float(value)
        if prev is None:
            self.checks[check] = [value, tol, mode]
        elif mode == "le":
            prev[0] = max(prev[0], value)
        else:
            prev[0] = min(prev[0], value)

    @staticmethod
    def _ok(value, tol, mode) -> bool:
        if not math.isfinite(value):
            return False
        return value <= tol if mode == "le" else value >= tol

    @property
    def passed(self) -> bool:
        return all(self._ok(*c) for c in self.checks.values())

    @property
    def max_residual(self) -> float:
        vals = [c[0] for c in self.checks.values() if c[2] == "le"]
        return max(vals) if vals else 0.0

    def as_dict(self) -> dict:
        return {
            "suite": self.name,
            "pass": self.passed,
            "cases": self.cases,
            "max_residual": self.max_residual,
            "seconds": round(self.seconds, 3),
            "checks": {
                k: {"value": v, "tolerance": t, "kind": "max" if mode == "le" else "min", "pass": self._ok(v, t, mode)}
                for k, (v, t, mode) in sorted(self.checks.items())
            },
            "info": self.info,
        }


def _random_z(rng: np.random.Generator, point: SpectralPoint, count: int, min_gap: float = 0.05) -> list[complex]:
    out = []
    lm = point.lam**point.m
    while len(out) < count:
        z = complex(rng.uniform(0.3, 2.5) * np.exp(1j * rng.uniform(0, 2 * math.pi)))
        if np.min(np.abs(z**point.m - lm)) > min_gap:
            out.append(z)
    return out


# ------------------------------------------------------------------ suites


def suite_charpoly(cfg: CaseConfig, tol: Tolerances, **_) -> SuiteResult:
    res = SuiteResult("charpoly")
    for case in iter_cases(cfg):
        quad = build_dual(case.point, case.coupling, case.framing)
        for z in _random_z(case.rng, case.point, 10):
            det = A_eval(quad, z)
            closed = A_closed(case.point, z)
            res.record("det_vs_product", rel_err(det, closed), tol.charpoly)
        res.cases += 1
    return res


def suite_resolvent(cfg: CaseConfig, tol: Tolerances, **_) -> SuiteResult:
    res = SuiteResult("resolvent")
    for case in iter_cases(cfg):
        quad = build_dual(case.point, case.coupling, case.framing)
        eye = np.eye(quad.size)
        for z in _random_z(case.rng, case.point, 5):
            R = resolvent_closed(case.point, z)
            M = z * eye - quad.P
            res.record("identity", np.max(np.abs(M @ R - eye)), tol.resolvent_identity)
            lu = lu_solve(M, eye)
            scale = max(1.0, float(np.max(np.abs(lu))))
            res.record("vs_lu", np.max(np.abs(R - lu)) / scale, tol.resolvent_lu)
        res.cases += 1
    return res


def _scaled_residual(quad: Quadruple, coupling: Coupling, g_sign: int = 1) -> float:
    scale = max(1.0, float(np.max(np.abs(quad.X))), float(np.max(np.abs(quad.P))))
    return moment_residual(quad, coupling, g_sign) / scale


def suite_constraint(cfg: CaseConfig, tol: Tolerances, negative_control: bool = False, **_) -> SuiteResult:
    """Moment-map residual of both builders, plus the sign-flip control.

    With ``negative_control`` the w row of every quadruple is negated before
    the check, which must make the suite fail.
    """
    res = SuiteResult("constraint")
    signs = {"dual": set(), "qmodel": set()}
    for case in iter_cases(cfg):
        dual = build_dual(case.point, case.coupling, case.framing)
        qp = sample_qmodel(case.rng, case.m, case.n)
        qm = build_qmodel(qp, case.coupling)
        signs["dual"].add(dual.framing_sign)
        signs["qmodel"].add(qm.framing_sign)
        for label, quad in (("dual", dual), ("qmodel", qm)):
            if negative_control:
                quad = Quadruple(quad.m, quad.n, quad.X, quad.P, quad.v, -quad.w, -quad.framing_sign, None, quad.model)
            res.record(f"{label}_residual", _scaled_residual(quad, case.coupling), tol.constraint)
        # diagnostic only: the dual quadruple against [X, P] = -g + v w
        res.info["dual_mirror_residual"] = max(res.info.get("dual_mirror_residual", 0.0), _scaled_residual(dual, case.coupling, -1))
        # the flipped framing must be detected: residual >= |g| sqrt(n) / 2
        flipped = Quadruple(qm.m, qm.n, qm.X, qm.P, qm.v, -qm.w)
        margin = moment_residual(flipped, case.coupling) / (abs(case.coupling.abs_g) * math.sqrt(case.n) / 2)
        res.record("sign_flip_margin", margin, 1.0, mode="ge")
        res.cases += 1
    res.info["adopted_framing_sign"] = {k: sorted(v) for k, v in signs.items()}
    res.info["negative_control"] = negative_control
    return res


def suite_r_phi(cfg: CaseConfig, tol: Tolerances, **_) -> SuiteResult:
    res = SuiteResult("r_phi")
    for case in iter_cases(cfg):
        r = r_function(case.point, case.coupling, case.framing)
        for k in range(case.n):
            res.record("r_at_lambda_" + ("spin" if case.spin else "spinless"), rel_err(r(case.point.lam[k]), case.point.phi[k]), tol.r_phi)
        res.cases += 1
    return res


def suite_s_theta(cfg: CaseConfig, tol: Tolerances, bracket_cases: int = 100, **_) -> SuiteResult:
    res = SuiteResult("s_theta")
    for case in iter_cases(cfg):
        s = s_function(case.point, case.coupling, case.framing)
        th = theta_closed(case.point, case.coupling, case.framing)
        for k in range(case.n):
            res.record("s_vs_theta_" + ("spin" if case.spin else "spinless"), rel_err(s(case.point.lam[k]), th[k]), tol.s_theta)
        res.cases += 1
    count = min(bracket_cases, cfg.cases)
    for case in iter_cases(cfg, count, offset=10_000, max_m=3, max_n=4, max_d=2):
        rep = verify_conjugacy(State(case.point, case.framing), case.coupling, tol)
        res.record("bracket_lambda_theta", rep["lambda_theta"], tol.bracket)
        res.record("bracket_theta_theta", rep["theta_theta"], tol.bracket)
    res.info["bracket_cases"] = count
    return res


def suite_partials(cfg: CaseConfig, tol: Tolerances, bracket_cases: int = 100, **_) -> SuiteResult:
    res = SuiteResult("partials")
    count = min(bracket_cases, cfg.cases)
    for case in iter_cases(cfg, count, offset=20_000, max_m=3, max_n=4, max_d=2):
        rep = verify_partial_identities(State(case.point, case.framing), case.coupling, tol, rng=case.rng)
        res.record("f_symmetry", rep["f_symmetry"], tol.f_symmetry)
        res.record("key_identity", rep["key_identity"], tol.key_identity)
        if "spinless_df_dlambda" in rep:
            res.record("spinless_df_dlambda", rep["spinless_df_dlambda"], tol.spin_partials)
        for name, val in rep.get("spin_partials", {}).items():
            res.record(f"spin_{name}", val, tol.spin_partials)
        res.cases += 1
    return res


def suite_gauge(cfg: CaseConfig, tol: Tolerances, **_) -> SuiteResult:
    res = SuiteResult("gauge")
    for case in iter_cases(cfg):
        quad = build_dual(case.point, case.coupling, case.framing)
        M = random_gauge(case.rng, quad.size, max_cond=1e3)
        moved = gauge(quad, M)
        for z in _random_z(case.rng, case.point, 3):
            for label, fn in (("A", A_eval), ("C", C_eval), ("D", D_eval)):
                res.record(f"{label}_invariance", rel_err(fn(moved, z), fn(quad, z)), tol.gauge_functions)
        base = recover_spectral(quad, case.coupling)
        after = recover_spectral(moved, case.coupling)
        res.record("recover_invariance", orbit_distance(base.point, after.point), tol.gauge_recover)
        res.cases += 1
    return res


def suite_roundtrip(cfg: CaseConfig, tol: Tolerances, **_) -> SuiteResult:
    res = SuiteResult("roundtrip")
    for case in iter_cases(cfg):
        if case.spin:
            continue
        quad = build_dual(case.point, case.coupling)
        got = recover_spectral(quad, case.coupling)
        want = canonicalize(case.point)
        res.record("recover_vs_canonical", orbit_distance(got.point, want.point), tol.roundtrip)
        res.cases += 1
    return res


def suite_hamiltonians(cfg: CaseConfig, tol: Tolerances, crosscheck: bool = True, **_) -> SuiteResult:
    res = SuiteResult("hamiltonians")
    for case in iter_cases(cfg):
        quad = build_dual(case.point, case.coupling, case.framing)
        t = complex(case.rng.uniform(-1, 1), case.rng.uniform(-1, 1))
        flow = FlowSpec(K=int(case.rng.integers(1, case.n + 1)), t=t)
        moved, fr = evolve(case.point, flow, case.framing)
        rebuilt = build_dual(moved, case.coupling, fr)
        for K in range(1, case.n + 1):
            hs = H_spectral(case.point, K)
            res.record("trace_vs_spectral", rel_err(H_trace(quad, K), hs), tol.hamiltonian)
            res.record("conserved_spectral", rel_err(H_spectral(moved, K), hs), tol.conservation)
            res.record("conserved_trace", rel_err(H_trace(rebuilt, K), H_trace(quad, K)), tol.conservation)
        res.cases += 1
    if crosscheck:
        rng = np.random.default_rng([cfg.seed, 30_000])
        for n in (1, 2, 3):
            qp = sample_qmodel(rng, 1, n, real=True)
            out = crosscheck_m1(qp, 0.7j)
            res.record("m1_projection_vs_rk4", out["max_residual"], tol.crosscheck)
        res.info["crosscheck_g0"] = [0.0, 0.7]
    return res


def suite_curves(cfg: CaseConfig, tol: Tolerances, **_) -> SuiteResult:
    res = SuiteResult("curves")
    for case in iter_cases(cfg):
        for delta in (1, 2):
            curve = curve_polys(case.point, case.coupling, case.framing, delta, tol)
            gamma = conjugates(case.point, case.coupling, case.framing, delta)
            res.record("divisibility", curve.divisibility_residual, tol.divisibility)
            res.record("two_route", curve.two_route_residual, tol.divisibility)
            res.record("deg_q_mismatch", abs(curve.q.degree - (case.n - 1)), 0.0)
            res.record("deg_p_excess", max(0, curve.p.degree - (case.n - 1)), 0.0)
            res.record("incidence", incidence_check(curve, case.point, gamma), tol.incidence)
            res.record("equivariance", equivariance_check(case.point, case.coupling, case.framing, delta), tol.equivariance)
            samples, _ = quotient_samples(curve, default_sample_points(case.point))
            curve_res, surf_res = quotient_residuals(curve, samples)
            res.record("quotient_curve", curve_res / max(1.0, curve.p.scale(), curve.q.scale()), tol.quotient)
            res.record("quotient_surface", surf_res, tol.quotient_identity)
        res.cases += 1
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "charpoly": suite_charpoly,
    "resolvent": suite_resolvent,
    "constraint": suite_constraint,
    "r_phi": suite_r_phi,
    "s_theta": suite_s_theta,
    "partials": suite_partials,
    "gauge": suite_gauge,
    "roundtrip": suite_roundtrip,
    "hamiltonians": suite_hamiltonians,
    "curves": suite_curves,
}

# acceptance criterion number -> suite
CRITERIA = {i + 1: name for i, name in enumerate(SUITES)}


def run_suite(name: str, cfg: CaseConfig, tol: Tolerances = DEFAULT, **kw) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    start = time.perf_counter()
    res = SUITES[name](cfg, tol, **kw)
    res.seconds = time.perf_counter() - start
    return res


def run_all(cfg: CaseConfig, tol: Tolerances = DEFAULT, names=None, **kw) -> list[SuiteResult]:
    return [run_suite(n, cfg, tol, **kw) for n in (names or SUITES)]

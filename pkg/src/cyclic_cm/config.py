"""Numerical thresholds and verification tolerances, collected in one place."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    # kernel thresholds
    pivot: float = 1e-13
    poly_trim: float = 1e-12
    root_step: float = 1e-13
    root_max_iter: int = 500
    node_gap: float = 1e-10
    adjugate_switch: float = 1e-10

    # model thresholds
    lambda_gap: float = 1e-9
    regular_eq: float = 1e-10
    spin_constraint: float = 1e-10
    spectrum_gap: float = 1e-8

    # verification tolerances (acceptance)
    charpoly: float = 1e-9
    resolvent_identity: float = 1e-10
    resolvent_lu: float = 1e-9
    constraint: float = 1e-10
    r_phi: float = 1e-8
    s_theta: float = 1e-8
    bracket: float = 1e-5
    f_symmetry: float = 1e-6
    key_identity: float = 1e-7
    spin_partials: float = 1e-5
    gauge_functions: float = 1e-7
    gauge_recover: float = 1e-6
    roundtrip: float = 1e-7
    hamiltonian: float = 1e-9
    conservation: float = 1e-8
    crosscheck: float = 1e-6
    divisibility: float = 1e-8
    incidence: float = 1e-8
    equivariance: float = 1e-9
    quotient: float = 1e-9
    quotient_identity: float = 1e-12

    def with_overrides(self, **overrides: float) -> "Tolerances":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **overrides)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT = Tolerances()


def rel_err(value, reference) -> float:
    """|value - reference| normalised by max(|reference|, 1).

    Used wherever a tolerance is quoted as relative; the floor keeps the
    measure meaningful for references that happen to be near zero.
    """
    return float(abs(complex(value) - complex(reference)) / max(abs(complex(reference)), 1.0))

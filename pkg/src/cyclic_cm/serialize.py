"""JSON encoding of the value types.

Complex numbers are written as [re, im] pairs, vectors as lists of pairs
and matrices as lists of rows.  Every object carries a "type" tag.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .curves import CurvePolys
from .kernel import DensePoly
from .model import Coupling, QModelPoint, Quadruple, SpectralPoint, SpinFraming, derived_constants


def cnum(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def cvec(a) -> list:
    return [cnum(z) for z in np.asarray(a).ravel()]


def cmat(a) -> list:
    return [cvec(row) for row in np.atleast_2d(np.asarray(a))]


def from_cnum(pair) -> complex:
    return complex(pair[0], pair[1])


def from_cvec(items) -> np.ndarray:
    return np.array([from_cnum(p) for p in items], dtype=complex)


def from_cmat(rows) -> np.ndarray:
    return np.array([[from_cnum(p) for p in row] for row in rows], dtype=complex).reshape(len(rows), -1)


def to_obj(x) -> dict:
    if isinstance(x, Coupling):
        return {"type": "Coupling", "m": x.m, "g": cvec(x.g), "abs_g": cnum(x.abs_g), "c": cvec(x.c)}
    if isinstance(x, SpectralPoint):
        return {"type": "SpectralPoint", "m": x.m, "n": x.n, "lambda": cvec(x.lam), "phi": cvec(x.phi)}
    if isinstance(x, SpinFraming):
        return {"type": "SpinFraming", "d": x.d, "V": [cmat(a) for a in x.V], "W": [cmat(b) for b in x.W]}
    if isinstance(x, QModelPoint):
        return {"type": "QModelPoint", "m": x.m, "n": x.n, "p": cvec(x.p), "q": cvec(x.q)}
    if isinstance(x, Quadruple):
        return {
            "type": "Quadruple",
            "m": x.m,
            "n": x.n,
            "model": x.model,
            "framing_sign": x.framing_sign,
            "constraint_ok": x.constraint_ok,
            "X": cmat(x.X),
            "P": cmat(x.P),
            "v": cmat(x.v),
            "w": cmat(x.w),
        }
    if isinstance(x, CurvePolys):
        return {
            "type": "CurvePolys",
            "delta": x.delta,
            "m": x.m,
            "n": x.n,
            "p": cvec(x.p.coeffs),
            "q": cvec(x.q.coeffs),
            "two_route_residual": x.two_route_residual,
            "divisibility_residual": x.divisibility_residual,
        }
    raise TypeError(f"cannot serialize {type(x).__name__}")


def from_obj(obj: dict) -> Any:
    kind = obj.get("type")
    if kind == "Coupling":
        # c and |g| are derived; recomputing keeps them consistent with g
        return derived_constants(obj["m"], from_cvec(obj["g"]))
    if kind == "SpectralPoint":
        return SpectralPoint.make(obj["m"], from_cvec(obj["lambda"]), from_cvec(obj["phi"]))
    if kind == "SpinFraming":
        return SpinFraming.make([from_cmat(a) for a in obj["V"]], [from_cmat(b) for b in obj["W"]])
    if kind == "QModelPoint":
        return QModelPoint.make(obj["m"], from_cvec(obj["p"]), from_cvec(obj["q"]))
    if kind == "Quadruple":
        return Quadruple(
            obj["m"],
            obj["n"],
            from_cmat(obj["X"]),
            from_cmat(obj["P"]),
            from_cmat(obj["v"]),
            from_cmat(obj["w"]),
            framing_sign=obj.get("framing_sign", 1),
            constraint_ok=obj.get("constraint_ok"),
            model=obj.get("model", "generic"),
        )
    if kind == "CurvePolys":
        return CurvePolys(
            delta=obj["delta"],
            p=DensePoly(from_cvec(obj["p"]), trim_tol=0.0),
            q=DensePoly(from_cvec(obj["q"]), trim_tol=0.0),
            m=obj["m"],
            n=obj["n"],
            two_route_residual=obj.get("two_route_residual", 0.0),
            divisibility_residual=obj.get("divisibility_residual", 0.0),
        )
    raise ValueError(f"unknown object type {kind!r}")


def dumps(x, **kw) -> str:
    return json.dumps(to_obj(x), **kw)


def loads(text: str):
    return from_obj(json.loads(text))


def write(path, x) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(x, indent=1))
        fh.write("\n")


def read(path):
    with open(path) as fh:
        return loads(fh.read())

"""Bivariate copula CDFs and rectangle masses on discrete margins.

Three families are supported: the independence (product) copula, the Gumbel
copula (delta >= 1, delta = 1 is independence) and the Frank copula (any
nonzero delta, delta -> 0 is independence). Joint pmfs on discrete margins
are obtained by inclusion-exclusion over CDF rectangles.

All evaluators accept scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# Coordinates may overshoot [0, 1] by at most this much (accumulated floating
# point drift in cumulative sums) before they are rejected.
COORD_TOL = 1e-12

# |delta| below this evaluates the Frank copula at its independence limit;
# the closed form is a 0/0 expression at delta = 0.
FRANK_INDEPENDENCE_TOL = 1e-8


class CopulaFamily(str, enum.Enum):
    PRODUCT = "product"
    GUMBEL = "gumbel"
    FRANK = "frank"


@dataclass(frozen=True)
class CopulaSpec:
    """A copula family together with its dependence parameter."""

    family: CopulaFamily
    delta: float = 0.0

    def __post_init__(self):
        family = CopulaFamily(self.family)
        delta = float(self.delta)
        if family is CopulaFamily.PRODUCT:
            delta = 0.0
        elif family is CopulaFamily.GUMBEL and delta < 1.0:
            raise ValueError(f"Gumbel copula requires delta >= 1, got {delta}")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "delta", delta)

    def to_json_dict(self) -> dict:
        return {"family": self.family.value, "delta": self.delta}

    @classmethod
    def from_json_dict(cls, d: dict) -> "CopulaSpec":
        return cls(CopulaFamily(d["family"]), float(d.get("delta", 0.0)))


PRODUCT = CopulaSpec(CopulaFamily.PRODUCT)


def _checked_unit(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    bad = (arr < -COORD_TOL) | (arr > 1.0 + COORD_TOL) | ~np.isfinite(arr)
    if np.any(bad):
        value = arr[bad].flat[0] if arr.ndim else float(arr)
        raise ValueError(f"coordinate {name}={value} outside [0, 1]")
    return np.clip(arr, 0.0, 1.0)


def _gumbel_cdf(u: np.ndarray, v: np.ndarray, delta: float) -> np.ndarray:
    # Log-space form of exp(-((-log u)^d + (-log v)^d)^(1/d)): with
    # la = log(-log u), lb = log(-log v), m = max(la, lb), the exponent is
    # exp(m + log1p(exp(-d*|la - lb|)) / d). Stays finite for any delta.
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        la = np.log(-np.log(u))
        lb = np.log(-np.log(v))
        m = np.maximum(la, lb)
        s = np.exp(m + np.log1p(np.exp(-delta * np.abs(la - lb))) / delta)
        return np.exp(-s)


def _log_expm1(x: np.ndarray) -> np.ndarray:
    # log(e^x - 1) for x > 0 without overflow: x + log(1 - e^-x).
    return x + np.log1p(-np.exp(-x))


def _frank_cdf(u: np.ndarray, v: np.ndarray, delta: float) -> np.ndarray:
    # The textbook form -log(1 + (e^-du - 1)(e^-dv - 1)/(e^-d - 1))/d cancels
    # catastrophically once d*min(u, v) exceeds ~37 (all expm1 terms round to
    # -1). Both branches below are cancellation-free for any magnitude.
    with np.errstate(divide="ignore", invalid="ignore"):
        if delta > 0:
            # Numerator a + b - ab - c (a = e^-du, b = e^-dv, c = e^-d)
            # factored into the positive terms a(1 - b) + b(1 - c/b).
            term1 = -delta * u + np.log(-np.expm1(-delta * v))
            term2 = -delta * v + np.log(-np.expm1(-delta * (1.0 - v)))
            log_num = np.logaddexp(term1, term2)
            return -(log_num - np.log(-np.expm1(-delta))) / delta
        # delta < 0: every exponent is positive, so work with |delta| in logs.
        a = -delta
        s = _log_expm1(a * u) + _log_expm1(a * v) - _log_expm1(np.asarray(a, dtype=float))
        return np.logaddexp(0.0, s) / a


def _cdf_core(spec: CopulaSpec, uu: np.ndarray, vv: np.ndarray) -> np.ndarray:
    """CDF on already-validated arrays in [0, 1]; boundary values are patched
    analytically since the closed forms pass through log(0) there."""
    if spec.family is CopulaFamily.PRODUCT:
        return uu * vv
    if spec.family is CopulaFamily.GUMBEL:
        if spec.delta == 1.0:
            return uu * vv
        out = _gumbel_cdf(uu, vv, spec.delta)
    else:
        if abs(spec.delta) < FRANK_INDEPENDENCE_TOL:
            return uu * vv
        out = _frank_cdf(uu, vv, spec.delta)
    out = np.where(uu == 1.0, vv, out)
    out = np.where(vv == 1.0, np.where(uu == 1.0, 1.0, uu), out)
    out = np.where((uu == 0.0) | (vv == 0.0), 0.0, out)
    return out


def copula_cdf(spec: CopulaSpec, u, v):
    """Evaluate C(u, v; delta) for the given family.

    Coordinates may overshoot [0, 1] by at most ``COORD_TOL``. Returns a
    float for scalar inputs, an array otherwise.
    """
    scalar = np.ndim(u) == 0 and np.ndim(v) == 0
    uu, vv = np.broadcast_arrays(_checked_unit(u, "u"), _checked_unit(v, "v"))
    out = np.clip(_cdf_core(spec, uu, vv), 0.0, 1.0)
    return float(out) if scalar else out


def rectangle_mass(spec: CopulaSpec, u_lo, u_hi, v_lo, v_hi):
    """Mass the copula assigns to the rectangle (u_lo, u_hi] x (v_lo, v_hi].

    Computed by inclusion-exclusion over the four corners. Tiny negatives
    from floating point cancellation are clamped to 0.
    """
    u_lo, u_hi = np.asarray(u_lo, float), np.asarray(u_hi, float)
    v_lo, v_hi = np.asarray(v_lo, float), np.asarray(v_hi, float)
    if np.any(u_lo > u_hi) or np.any(v_lo > v_hi):
        raise ValueError("rectangle endpoints out of order")
    mass = (
        copula_cdf(spec, u_hi, v_hi)
        - copula_cdf(spec, u_lo, v_hi)
        - copula_cdf(spec, u_hi, v_lo)
        + copula_cdf(spec, u_lo, v_lo)
    )
    clipped = np.maximum(mass, 0.0)
    if np.ndim(mass) == 0:
        return float(clipped)
    return clipped

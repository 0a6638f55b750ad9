"""Problem instances: coefficients, parameters and initial profiles.

The coefficients are realised as autonomous power laws

    a(r) = a0 * (1 + r)**gamma,      lambda(r) = lambda0 * (1 + r)**beta,

which sit inside the envelopes ``a1 (1+r)^gamma <= a <= a2 (1+r)^gamma``
(and likewise for lambda) whenever ``a1 <= a0 <= a2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Optional

import numpy as np

PROFILE_FAMILIES = ("cosine", "quadratic")
VALIDATION_POINTS = 64


@dataclass(frozen=True)
class ProblemSpec:
    N: int = 3
    p: float = 2.0
    alpha: float = 1.5
    gamma: float = 0.0
    beta: float = 0.0
    a0: float = 1.0
    lambda0: float = 1.0
    a1: Optional[float] = None
    a2: Optional[float] = None
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    mu: float = 1.0
    eta: float = 1.0
    h0: float = 1.0
    g0: float = 1.0
    # "max" is the conservative reading of the small-data threshold; "min" is
    # kept for experiments only.
    s0_rule: str = "max"

    def __post_init__(self):
        # unset envelope bounds default to the tight case a1 = a0 = a2
        for name, base in (("a1", "a0"), ("a2", "a0"), ("lambda1", "lambda0"), ("lambda2", "lambda0")):
            if getattr(self, name) is None:
                object.__setattr__(self, name, getattr(self, base))

    @property
    def s0_min(self) -> float:
        return min(self.h0, self.g0)

    @property
    def s0_max(self) -> float:
        return max(self.h0, self.g0)

    @property
    def s0(self) -> float:
        return self.s0_max if self.s0_rule == "max" else self.s0_min

    def with_(self, **changes) -> "ProblemSpec":
        return replace(self, **changes)


def validate_spec(spec: ProblemSpec) -> list[str]:
    """Return the violated standing assumptions; an empty list means pass."""
    errors = []
    if not (isinstance(spec.N, (int, np.integer)) and spec.N >= 1):
        errors.append("N >= 1 (integer) required")
    if not spec.p > 1:
        errors.append("p > 1 required")
    if not spec.alpha > 1:
        errors.append("alpha > 1 required")
    if not spec.gamma <= 0:
        errors.append("gamma <= 0 required")
    if not spec.beta <= 0:
        errors.append("beta <= 0 required")
    for name in ("a0", "lambda0", "a1", "a2", "lambda1", "lambda2", "mu", "eta", "h0", "g0"):
        if not getattr(spec, name) > 0:
            errors.append(f"{name} > 0 required")
    if not spec.a1 <= spec.a0:
        errors.append("a1 <= a0 required")
    if not spec.a0 <= spec.a2:
        errors.append("a0 <= a2 required")
    if not spec.lambda1 <= spec.lambda0:
        errors.append("lambda1 <= lambda0 required")
    if not spec.lambda0 <= spec.lambda2:
        errors.append("lambda0 <= lambda2 required")
    if spec.s0_rule not in ("max", "min"):
        errors.append("s0_rule must be 'max' or 'min'")
    return errors


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    return r


def coeff_a(spec: ProblemSpec, r):
    """Source coefficient a0 (1 + r)^gamma."""
    r = _check_radius(r)
    out = spec.a0 * (1.0 + r) ** spec.gamma
    return float(out) if out.ndim == 0 else out


def coeff_lambda(spec: ProblemSpec, r):
    """Absorption coefficient lambda0 (1 + r)^beta."""
    r = _check_radius(r)
    out = spec.lambda0 * (1.0 + r) ** spec.beta
    return float(out) if out.ndim == 0 else out


def _cos(k, r):
    return np.cos(k * np.asarray(r, float))


def _dcos(k, r):
    return -k * np.sin(k * np.asarray(r, float))


def _quad(radius, r):
    return 1.0 - (np.asarray(r, float) / radius) ** 2


def _dquad(radius, r):
    return -2.0 * np.asarray(r, float) / radius**2


def _profile(family: str, radius: float) -> tuple[Callable, Callable]:
    # partials of module-level functions keep InitialData picklable
    if family == "cosine":
        k = math.pi / (2.0 * radius)
        return partial(_cos, k), partial(_dcos, k)
    if family == "quadratic":
        return partial(_quad, radius), partial(_dquad, radius)
    raise ValueError(f"unknown profile family {family!r}; expected one of {PROFILE_FAMILIES}")


@dataclass(frozen=True)
class InitialData:
    """Initial pair (A*phi, A*psi) on [0, h0] x [0, g0]."""

    A: float
    family: str
    h0: float
    g0: float
    degenerate: bool = False
    _phi: Callable = field(repr=False, compare=False, default=None)
    _dphi: Callable = field(repr=False, compare=False, default=None)
    _psi: Callable = field(repr=False, compare=False, default=None)
    _dpsi: Callable = field(repr=False, compare=False, default=None)

    def phi(self, r):
        """Unit-amplitude u-profile (zero beyond h0)."""
        r = np.asarray(r, float)
        return np.where(r < self.h0, self._phi(np.minimum(r, self.h0)), 0.0)

    def psi(self, r):
        r = np.asarray(r, float)
        return np.where(r < self.g0, self._psi(np.minimum(r, self.g0)), 0.0)

    def u0(self, r):
        return self.A * self.phi(r)

    def v0(self, r):
        return self.A * self.psi(r)

    def dphi(self, r):
        return self._dphi(r)

    def dpsi(self, r):
        return self._dpsi(r)

    @property
    def sup_u0(self) -> float:
        return float(self.A * self._phi(0.0))

    @property
    def sup_v0(self) -> float:
        return float(self.A * self._psi(0.0))


def profile_violations(data: InitialData, points: int = VALIDATION_POINTS) -> list[str]:
    """Sampled check of the structural assumptions on the profiles."""
    problems = []
    for name, f, df, R in (("phi", data._phi, data._dphi, data.h0), ("psi", data._psi, data._dpsi, data.g0)):
        r = np.linspace(0.0, R, points + 1)
        vals = f(r)
        if abs(vals[-1]) > 1e-12:
            problems.append(f"{name}(front) != 0")
        if abs(df(0.0)) > 1e-12:
            problems.append(f"{name}'(0) != 0")
        if np.any(vals[1:-1] <= 0):
            problems.append(f"{name} not positive inside")
        if np.any(df(r[1:-1]) >= 0) or np.any(np.diff(vals) >= 0):
            problems.append(f"{name} not strictly decreasing")
    return problems


def make_initial_data(spec: ProblemSpec, family: str, A: float,
                      points: int = VALIDATION_POINTS) -> InitialData:
    if A < 0:
        raise ValueError("amplitude A must be >= 0")
    phi, dphi = _profile(family, spec.h0)
    psi, dpsi = _profile(family, spec.g0)
    data = InitialData(A=float(A), family=family, h0=spec.h0, g0=spec.g0,
                       degenerate=(A == 0), _phi=phi, _dphi=dphi, _psi=psi, _dpsi=dpsi)
    problems = profile_violations(data, points)
    if problems:
        raise ValueError("invalid initial profiles: " + "; ".join(problems))
    return data


def fast_caps(spec: ProblemSpec, s0: Optional[float] = None) -> float:
    """min{(1/(16 a2 s0^2))^(1/(p-1)), h0^2/(8 p s0^2 mu), g0^2/(8 s0^2 eta)}."""
    s0 = spec.s0 if s0 is None else s0
    return min((1.0 / (16.0 * spec.a2 * s0**2)) ** (1.0 / (spec.p - 1.0)),
               spec.h0**2 / (8.0 * spec.p * s0**2 * spec.mu),
               spec.g0**2 / (8.0 * s0**2 * spec.eta))


def fast_amplitude_bound(spec: ProblemSpec, data: InitialData, s0: Optional[float] = None) -> float:
    """Largest amplitude for which small-data global decay is guaranteed."""
    return 0.75 * fast_caps(spec, s0) / float(data._phi(0.0) + data._psi(0.0))

"""Closed-form comparison functions and their residual checks.

Three families are provided:

* ``BlowupBarrier``: a self-similar subsolution that becomes infinite at
  ``t = 1/eps``. Its profile is ``W(xi) = d^2 (1 + C/2) - xi^2 / (2C)`` on
  ``[0, dM]`` with ``M = sqrt(C^2 + 2C)``.
* ``FastBarrier``: an exponentially decaying supersolution
  ``c e^{-kt} (1 - (r / s1(t))^2)`` whose fronts stay below ``4 h0``.
* ``CoshBarrier``: a supersolution for ``alpha >= p`` built from
  ``H(s) = e^{-eps m s} cosh(eps s)``.

Residuals are the left-hand side ``U_t - U_rr - (N-1)/r U_r + lambda |U_r|^alpha
- a V^p`` evaluated from the closed forms with exact derivatives. A
subsolution needs it ``<= 0`` and a supersolution ``>= 0``.

The blow-up barrier only works once ``tau = 1 - eps t`` is very small (for
the canonical instance, around 1e-19). Times that close to ``1/eps`` cannot
be written as floats, so its evaluators take ``tau`` directly. The
``t``-based wrappers are kept for convenience.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import InitialData, ProblemSpec, coeff_a, coeff_lambda, fast_caps

REL_SLACK = 1e-12
# the blow-up barrier only works for tau below this level
TAU_START_MAX = 0.5


# ------------------------------------------------------------ blow-up barrier

@dataclass(frozen=True)
class BlowupBarrier:
    d: float
    C: float
    m1: float
    m2: float
    eps: float
    p: float
    tau_star: float
    s0_min: float
    gamma: float
    a1: float
    alpha: float

    @property
    def M(self) -> float:
        return math.sqrt(self.C**2 + 2.0 * self.C)

    @property
    def k(self) -> float:
        return 1.0 / (self.p - 1.0)

    @property
    def hExp(self) -> float:
        return 1.0 / (self.p - 1.0)

    @property
    def support(self) -> float:
        """Support radius dM of the profile (in xi)."""
        return self.d * self.M

    @property
    def gammaBL(self) -> float:
        return (1.0 + self.support) ** self.gamma

    @property
    def W0(self) -> float:
        return self.d**2 * (1.0 + self.C / 2.0)

    @property
    def t_star(self) -> float:
        return (1.0 - self.tau_star) / self.eps

    def W(self, xi):
        xi = np.asarray(xi, float)
        out = np.where(xi < self.support, self.W0 - xi**2 / (2.0 * self.C), 0.0)
        return float(out) if out.ndim == 0 else out

    def m_cap(self) -> float:
        return min(0.5, (self.p - self.alpha) / (self.alpha * (self.p - 1.0)))

    def eps_cap(self) -> float:
        return self.d ** (2.0 * (self.p - 1.0)) * self.a1 * self.gammaBL / (self.hExp * (1.0 + self.C / 2.0))

    def flags(self) -> dict:
        cap = self.m_cap()
        return {
            "m1_range": 0.0 < self.m1 < cap,
            "m2_range": 0.0 < self.m2 < cap,
            "C_m1": self.C > self.hExp / self.m1 if self.m1 > 0 else False,
            "C_m2": self.C > self.hExp / self.m2 if self.m2 > 0 else False,
            "eps_range": 0.0 < self.eps < self.eps_cap(),
            "support_inside": self.support < self.s0_min,
            "tau_star_range": 0.0 < self.tau_star <= TAU_START_MAX,
        }

    @property
    def valid(self) -> bool:
        return all(self.flags().values())


def _blowup_tau(b: BlowupBarrier, t):
    t = np.asarray(t, float)
    if np.any(t < b.t_star * (1 - 1e-15)) or np.any(t >= 1.0 / b.eps):
        raise ValueError("t outside the barrier's life interval [t_star, 1/eps)")
    return 1.0 - b.eps * t


def blowup_eval_tau(b: BlowupBarrier, tau, r):
    """(u, v) of the blow-up barrier at ``tau = 1 - eps t``."""
    tau = np.asarray(tau, float)
    r = np.asarray(r, float)
    if np.any(tau <= 0):
        raise ValueError("tau must be positive")
    u = tau ** (-b.k) * b.W(r / tau**b.m1)
    v = tau ** (-b.hExp) * b.W(r / tau**b.m2)
    return u, v


def blowup_eval(b: BlowupBarrier, t, r):
    return blowup_eval_tau(b, _blowup_tau(b, t), r)


def _blowup_component(b, spec, tau, r, k, m, k_other, m_other):
    xi = r / tau**m
    inside = xi < b.support
    W = np.where(inside, b.W0 - xi**2 / (2.0 * b.C), 0.0)
    dW = np.where(inside, -xi / b.C, 0.0)
    time_part = tau ** (-k - 1.0) * (k * b.eps * W + m * b.eps * xi * dW)
    # -U_rr - (N-1)/r U_r; both derivatives are exact for the quadratic profile
    diffusion = np.where(inside, spec.N * tau ** (-k - 2.0 * m) / b.C, 0.0)
    grad = np.abs(tau ** (-k - m) * dW)
    absorb = coeff_lambda(spec, r) * grad**spec.alpha
    xo = r / tau**m_other
    Wo = np.where(xo < b.support, b.W0 - xo**2 / (2.0 * b.C), 0.0)
    source = coeff_a(spec, r) * (tau ** (-k_other) * Wo) ** spec.p
    return time_part + diffusion + absorb - source


def blowup_residual_tau(b: BlowupBarrier, spec: ProblemSpec, tau, r):
    """(L1, L2) at ``tau = 1 - eps t`` and radius r; both must be <= 0."""
    if not b.valid:
        bad = [k for k, v in b.flags().items() if not v]
        raise ValueError("invalid blow-up barrier: " + ", ".join(bad))
    tau = np.asarray(tau, float)
    r = np.asarray(r, float)
    L1 = _blowup_component(b, spec, tau, r, b.k, b.m1, b.hExp, b.m2)
    L2 = _blowup_component(b, spec, tau, r, b.hExp, b.m2, b.k, b.m1)
    return L1, L2


def blowup_residual(b: BlowupBarrier, spec: ProblemSpec, t, r):
    return blowup_residual_tau(b, spec, _blowup_tau(b, t), r)


def _min_neg_B(b: BlowupBarrier, spec: ProblemSpec, m: float) -> float:
    """min over the support of ``-(k eps W + m eps xi W' - a1 gammaBL W^p)``.

    In terms of W the expression is ``2 m eps W0 + a1 gBL W^p - (k + 2m) eps W``,
    convex on [0, W0], so the minimum is at the critical point or an end.
    """
    k, eps, W0 = b.k, b.eps, b.W0
    coef = spec.a1 * b.gammaBL
    f = lambda W: 2.0 * m * eps * W0 + coef * W**spec.p - (k + 2.0 * m) * eps * W
    Wc = ((k + 2.0 * m) * eps / (spec.p * coef)) ** (1.0 / (spec.p - 1.0))
    return min(f(0.0), f(W0), f(min(Wc, W0)))


def blowup_onset(b: BlowupBarrier, spec: ProblemSpec) -> float:
    """Largest tau at which the residual sign is guaranteed from then on.

    Uses the sufficient condition ``tau^(1-2m) N/C + tau^e lambda2 (dM/C)^alpha
    <= min(-B) / 2`` with ``e = k + 1 - (k + m) alpha``.
    """
    m = max(b.m1, b.m2)
    need = 0.5 * min(_min_neg_B(b, spec, b.m1), _min_neg_B(b, spec, b.m2))
    if need <= 0:
        raise ValueError("profile inequality fails; no onset time exists")
    e = min(b.k + 1.0 - (b.k + mi) * spec.alpha for mi in (b.m1, b.m2))
    if e <= 0:
        raise ValueError("gradient exponent is not positive; m_i too large")
    grad_coef = spec.lambda2 * (b.support / b.C) ** spec.alpha

    def g(tau):
        return tau ** (1.0 - 2.0 * m) * spec.N / b.C + tau**e * grad_coef

    if g(TAU_START_MAX) <= need:
        return TAU_START_MAX
    lo, hi = -700.0, math.log(TAU_START_MAX)
    if g(math.exp(lo)) > need:
        raise ValueError("onset time below double precision range")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(math.exp(mid)) <= need:
            lo = mid
        else:
            hi = mid
    return math.exp(lo)


def canonical_blowup_barrier(spec: ProblemSpec) -> BlowupBarrier:
    """Deterministic valid instance: m at half its cap, C = 2 hExp / m + 1,
    d = s0_min / (2M), eps at half its cap, onset from ``blowup_onset``.

    Raises ValueError when alpha >= p (no admissible exponent m).
    """
    cap = min(0.5, (spec.p - spec.alpha) / (spec.alpha * (spec.p - 1.0)))
    if cap <= 0:
        raise ValueError("not applicable: alpha >= p")
    m = cap / 2.0
    hexp = 1.0 / (spec.p - 1.0)
    C = 2.0 * hexp / m + 1.0
    M = math.sqrt(C**2 + 2.0 * C)
    d = spec.s0_min / (2.0 * M)
    proto = BlowupBarrier(d=d, C=C, m1=m, m2=m, eps=1.0, p=spec.p, tau_star=TAU_START_MAX,
                          s0_min=spec.s0_min, gamma=spec.gamma, a1=spec.a1, alpha=spec.alpha)
    eps = proto.eps_cap() / 2.0
    proto = BlowupBarrier(**{**proto.__dict__, "eps": eps})
    tau = blowup_onset(proto, spec)
    return BlowupBarrier(**{**proto.__dict__, "tau_star": tau})


def blowup_required_amplitude(b: BlowupBarrier, data: InitialData, points: int = 1024) -> float:
    """Smallest A for which A (phi, psi) dominates the barrier at onset.

    The profile minimum over the barrier support is taken by sampling.
    """
    r = np.linspace(0.0, b.support * b.tau_star ** min(b.m1, b.m2), points)
    C0 = min(float(np.min(data.phi(r))), float(np.min(data.psi(r))))
    if C0 <= 0:
        return math.inf
    return b.W0 / (C0 * b.tau_star**b.k)


# ------------------------------------------------------------ fast barrier

@dataclass(frozen=True)
class FastBarrier:
    c: float
    dAmp: float
    k: float
    hRate: float
    l1: float
    l2: float
    h0: float
    g0: float
    cap: float

    def s1(self, t):
        return 2.0 * self.h0 * (2.0 - np.exp(-self.l1 * np.asarray(t, float)))

    def s2(self, t):
        return 2.0 * self.g0 * (2.0 - np.exp(-self.l2 * np.asarray(t, float)))

    def flags(self) -> dict:
        return {"amplitude_bound": self.c <= self.cap * (1 + REL_SLACK) and self.dAmp <= self.cap * (1 + REL_SLACK),
                "amplitudes_equal": self.c == self.dAmp,
                "positive": self.c > 0 and self.dAmp > 0}

    @property
    def valid(self) -> bool:
        return all(self.flags().values())


def make_fast_barrier(spec: ProblemSpec, data: Optional[InitialData] = None,
                      amplitude: Optional[float] = None) -> FastBarrier:
    """Fast barrier with c = d = (4/3) max(|u0|, |v0|), or an explicit amplitude."""
    s0 = spec.s0
    k = 1.0 / (16.0 * s0**2)
    if amplitude is None:
        if data is None:
            amplitude = fast_caps(spec)
        else:
            amplitude = 4.0 / 3.0 * max(data.sup_u0, data.sup_v0)
    return FastBarrier(c=amplitude, dAmp=amplitude, k=k, hRate=k, l1=k / spec.p, l2=k,
                       h0=spec.h0, g0=spec.g0, cap=fast_caps(spec))


def fast_eval(f: FastBarrier, t, r):
    t = np.asarray(t, float)
    r = np.asarray(r, float)
    x1 = r / f.s1(t)
    x2 = r / f.s2(t)
    U = np.where(x1 < 1.0, f.c * np.exp(-f.k * t) * (1.0 - x1**2), 0.0)
    V = np.where(x2 < 1.0, f.dAmp * np.exp(-f.hRate * t) * (1.0 - x2**2), 0.0)
    return U, V


def _fast_component(spec, t, r, amp, rate, front, dfront, other_amp, other_rate, other_front):
    xi = r / front
    E = amp * np.exp(-rate * t)
    body = E * (-rate * (1.0 - xi**2) + 2.0 * xi**2 * dfront / front + 2.0 * spec.N / front**2)
    absorb = coeff_lambda(spec, r) * (2.0 * E * xi / front) ** spec.alpha
    xo = r / other_front
    Vo = np.where(xo < 1.0, other_amp * np.exp(-other_rate * t) * (1.0 - xo**2), 0.0)
    return body + absorb - coeff_a(spec, r) * Vo**spec.p


def fast_residual(f: FastBarrier, spec: ProblemSpec, t, r):
    """(R1, R2) of the fast barrier; both must be >= 0 inside the supports."""
    if not f.flags()["amplitude_bound"]:
        raise ValueError(f"amplitude {f.c:g} exceeds the bound {f.cap:g}")
    t = np.asarray(t, float)
    r = np.asarray(r, float)
    s1, s2 = f.s1(t), f.s2(t)
    ds1 = 2.0 * f.h0 * f.l1 * np.exp(-f.l1 * t)
    ds2 = 2.0 * f.g0 * f.l2 * np.exp(-f.l2 * t)
    R1 = _fast_component(spec, t, r, f.c, f.k, s1, ds1, f.dAmp, f.hRate, s2)
    R2 = _fast_component(spec, t, r, f.dAmp, f.hRate, s2, ds2, f.c, f.k, s1)
    return R1, R2


def fast_front_residual(f: FastBarrier, spec: ProblemSpec, t):
    """``s1' + mu U_r(t, s1)`` and the same for s2; both must be >= 0."""
    t = np.asarray(t, float)
    s1, s2 = f.s1(t), f.s2(t)
    ds1 = 2.0 * f.h0 * f.l1 * np.exp(-f.l1 * t)
    ds2 = 2.0 * f.g0 * f.l2 * np.exp(-f.l2 * t)
    return (ds1 - spec.mu * 2.0 * f.c * np.exp(-f.k * t) / s1,
            ds2 - spec.eta * 2.0 * f.dAmp * np.exp(-f.hRate * t) / s2)


# ------------------------------------------------------------ cosh barrier

@dataclass(frozen=True)
class CoshBarrier:
    C1: float
    C2: float
    eps: float
    m: float
    gamma0: float
    sigma1: float
    sigma2: float
    mu0: float
    notes: tuple = field(default=(), compare=False)

    # e^{-eps m s} cosh(eps s) and its derivatives, written as sums of
    # decaying exponentials (m >= 2) so that large radii do not overflow
    def _parts(self, s):
        s = np.asarray(s, float)
        return np.exp(-self.eps * (self.m - 1.0) * s), np.exp(-self.eps * (self.m + 1.0) * s)

    def H(self, s):
        lo, hi = self._parts(s)
        return 0.5 * (lo + hi)

    def dH(self, s):
        lo, hi = self._parts(s)
        return -0.5 * self.eps * ((self.m - 1.0) * lo + (self.m + 1.0) * hi)

    def d2H(self, s):
        lo, hi = self._parts(s)
        return 0.5 * self.eps**2 * ((self.m - 1.0) ** 2 * lo + (self.m + 1.0) ** 2 * hi)

    def delta(self, i: int, t):
        Ci = self.C1 if i == 1 else self.C2
        return Ci * self.eps * self.m * self.mu0 * np.exp(self.gamma0 * np.asarray(t, float)) / self.gamma0


def cosh_applicable(spec: ProblemSpec) -> list[str]:
    """Reasons the cosh construction does not apply (empty when it does)."""
    out = []
    if spec.alpha < spec.p:
        out.append("alpha < p")
    if spec.gamma > spec.beta * (spec.p - 1.0) / (spec.alpha - 1.0) + 1e-15:
        out.append("gamma > beta (p-1)/(alpha-1)")
    return out


def cosh_sigmas(spec: ProblemSpec, eps: float, m: float):
    if spec.alpha == spec.p:
        return 1.0, 1.0
    base = (spec.lambda1 / spec.a2) ** (1.0 / spec.p) * eps * m
    expo = -spec.p * (spec.alpha - 1.0) / (spec.alpha - spec.p)
    return base**expo, (base / 4.0) ** expo


def make_cosh_barrier(spec: ProblemSpec, data: Optional[InitialData] = None,
                      eps: float = 1.0, m: float = 2.0, C2: float = 1.0,
                      points: int = 256, max_doublings: int = 200) -> CoshBarrier:
    """Cosh barrier with amplitudes doubled until the construction closes.

    C2 (with C1 = 2 C2) is doubled until ``C_i eps^2 mu0 m^2 / 2 >= gamma0``,
    ``delta_1(0) > h0``, ``delta_2(0) > g0`` and, when data are given, the
    barrier dominates them at t = 0 on a sample of the initial balls.
    """
    reasons = cosh_applicable(spec)
    if reasons:
        raise ValueError("not applicable: " + "; ".join(reasons))
    if m < 2:
        raise ValueError("m >= 2 required")
    if spec.alpha == spec.p:
        eps = (spec.a2 / spec.lambda1) ** (1.0 / spec.p) * 4.0 / m
    s1, s2 = cosh_sigmas(spec, eps, m)
    gamma0 = eps**2 * (1.0 + m**2) + spec.lambda1 * max(s1, s2) * m * eps
    mu0 = max(spec.mu, spec.eta)
    for _ in range(max_doublings):
        cb = CoshBarrier(C1=2.0 * C2, C2=C2, eps=eps, m=m, gamma0=gamma0,
                         sigma1=s1, sigma2=s2, mu0=mu0)
        if _cosh_closes(cb, spec, data, points):
            return cb
        C2 *= 2.0
    raise ValueError("cosh barrier amplitudes did not close")


def _cosh_closes(cb: CoshBarrier, spec: ProblemSpec, data, points) -> bool:
    for Ci in (cb.C1, cb.C2):
        if Ci * cb.eps**2 * cb.mu0 * cb.m**2 / 2.0 < cb.gamma0:
            return False
    if not (cb.delta(1, 0.0) > spec.h0 and cb.delta(2, 0.0) > spec.g0):
        return False
    if data is not None:
        U, V = cosh_eval(cb, 0.0, np.linspace(0.0, spec.h0, points))
        if np.any(U < data.u0(np.linspace(0.0, spec.h0, points))):
            return False
        U, V = cosh_eval(cb, 0.0, np.linspace(0.0, spec.g0, points))
        if np.any(V < data.v0(np.linspace(0.0, spec.g0, points))):
            return False
    return True


def cosh_eval(cb: CoshBarrier, t, r):
    t = np.asarray(t, float)
    r = np.asarray(r, float)
    E = np.exp(cb.gamma0 * t)
    d1, d2 = cb.delta(1, t), cb.delta(2, t)
    U = np.where(r < d1, cb.C1 * E * (cb.H(r) - cb.H(d1)), 0.0)
    V = np.where(r < d2, cb.C2 * E * (cb.H(r) - cb.H(d2)), 0.0)
    return U, V


def _cosh_component(cb, spec, t, r, Ci, di, ddi, Vo):
    E = np.exp(cb.gamma0 * t)
    time_part = Ci * E * (cb.gamma0 * (cb.H(r) - cb.H(di)) - cb.dH(di) * ddi)
    dH = cb.dH(r)
    diffusion = -Ci * E * (cb.d2H(r) + (spec.N - 1) / r * dH)
    absorb = coeff_lambda(spec, r) * np.abs(Ci * E * dH) ** spec.alpha
    return time_part + diffusion + absorb - coeff_a(spec, r) * Vo**spec.p


def cosh_residual(cb: CoshBarrier, spec: ProblemSpec, t, r):
    """(R1, R2) of the cosh barrier for r > 0; both must be >= 0."""
    reasons = cosh_applicable(spec)
    if reasons:
        raise ValueError("not applicable: " + "; ".join(reasons))
    t = np.asarray(t, float)
    r = np.asarray(r, float)
    if np.any(r <= 0):
        raise ValueError("residual needs r > 0 (the profile has a corner at the origin)")
    U, V = cosh_eval(cb, t, r)
    E = np.exp(cb.gamma0 * t)
    d1, d2 = cb.delta(1, t), cb.delta(2, t)
    dd1, dd2 = cb.gamma0 * d1, cb.gamma0 * d2
    R1 = _cosh_component(cb, spec, t, r, cb.C1, d1, dd1, V)
    R2 = _cosh_component(cb, spec, t, r, cb.C2, d2, dd2, U)
    return R1, R2


# ------------------------------------------------------------ elementary inequalities

def _positive(**kw):
    for name, v in kw.items():
        if not np.all(np.asarray(v) > 0):
            raise ValueError(f"{name} must be > 0")


def power_sum_minimum(sigma, a, b):
    """Exact minimum of ``x^a + sigma x^-b`` over x > 0."""
    _positive(sigma=sigma, a=a, b=b)
    s = a + b
    return sigma ** (a / s) * ((b / a) ** (a / s) + (a / b) ** (b / s))


def power_lower_bound(x, sigma, a, b, slack: float = REL_SLACK):
    """Whether ``x^a + sigma / x^b >= sigma^(a/(a+b))`` within relative slack."""
    _positive(x=x, sigma=sigma, a=a, b=b)
    x, sigma, a, b = (np.asarray(v, float) for v in (x, sigma, a, b))
    lhs = x**a + sigma / x**b
    rhs = sigma ** (a / (a + b))
    return lhs >= rhs * (1.0 - slack)


def power_shift_bound(x, sigma, alpha, s, m=1.0, kappa=0.0, slack: float = REL_SLACK):
    """Whether ``m^kappa x^alpha >= m^(kappa (s-1)/(alpha-1)) sigma^((alpha-s)/(alpha-1)) x^s - sigma x``.

    With ``kappa = 0`` this is ``x^alpha >= sigma^((alpha-s)/(alpha-1)) x^s - sigma x``.
    """
    _positive(x=x, sigma=sigma, m=m)
    x, sigma, alpha, s, m, kappa = (np.asarray(v, float) for v in (x, sigma, alpha, s, m, kappa))
    if not (np.all(alpha > s) and np.all(s > 1)):
        raise ValueError("alpha > s > 1 required")
    lhs = m**kappa * x**alpha
    pos = m ** (kappa * (s - 1.0) / (alpha - 1.0)) * sigma ** ((alpha - s) / (alpha - 1.0)) * x**s
    rhs = pos - sigma * x
    return lhs >= rhs - slack * np.maximum(np.abs(lhs), pos)


# ------------------------------------------------------------ reports

def _grid_extreme(fn, ts, xs, reduce):
    vals = []
    for t in ts:
        a, b = fn(t, xs)
        vals.append(reduce(np.concatenate([np.atleast_1d(a), np.atleast_1d(b)])))
    return float(reduce(np.array(vals)))


def blowup_residual_max(b: BlowupBarrier, spec: ProblemSpec, nt: int = 200, nx: int = 200) -> float:
    """max(L1, L2) over tau uniform in (0, tau_star] and xi in (0, dM)."""
    taus = b.tau_star * (1.0 - np.arange(nt) / nt)
    xis = b.support * (np.arange(nx) + 0.5) / nx

    def fn(tau, xi):
        return blowup_residual_tau(b, spec, tau, xi * tau ** min(b.m1, b.m2))
    return _grid_extreme(fn, taus, xis, np.max)


def fast_residual_min(f: FastBarrier, spec: ProblemSpec, t_max: float = 100.0,
                      nt: int = 200, nx: int = 200) -> float:
    """min(R1, R2) over t in [0, t_max] and r inside the smaller support."""
    ts = np.linspace(0.0, t_max, nt)

    def fn(t, x):
        r = x * min(f.s1(t), f.s2(t))
        return fast_residual(f, spec, t, r)
    return _grid_extreme(fn, ts, np.linspace(0.0, 1.0, nx, endpoint=False), np.min)


def cosh_residual_min(cb: CoshBarrier, spec: ProblemSpec, t_max: Optional[float] = None,
                      nt: int = 200, nx: int = 200) -> float:
    """min(R1, R2) over t in [0, t_max] and r in (0, delta_i(t)].

    t_max defaults to ten e-folds of the amplitude, ``10 / gamma0``.
    """
    t_max = 10.0 / cb.gamma0 if t_max is None else t_max
    ts = np.linspace(0.0, t_max, nt)
    x = (np.arange(nx) + 1.0) / nx
    vals = []
    for t in ts:
        R1, _ = cosh_residual(cb, spec, t, x * cb.delta(1, t))
        _, R2 = cosh_residual(cb, spec, t, x * cb.delta(2, t))
        vals.append(min(R1.min(), R2.min()))
    return float(min(vals))


def barrier_report(spec: ProblemSpec, data: Optional[InitialData] = None) -> dict:
    """Validity flags, parameters and residual extrema for all three families."""
    out = {}
    try:
        b = canonical_blowup_barrier(spec)
        entry = {"status": "valid" if b.valid else "invalid", "flags": b.flags(),
                 "params": {"d": b.d, "C": b.C, "M": b.M, "m1": b.m1, "m2": b.m2, "eps": b.eps,
                            "k": b.k, "tau_star": b.tau_star, "gammaBL": b.gammaBL}}
        if b.valid:
            entry["residual_max"] = blowup_residual_max(b, spec)
        if data is not None:
            entry["required_amplitude"] = blowup_required_amplitude(b, data)
        out["blowup"] = entry
    except ValueError as exc:
        out["blowup"] = {"status": f"not applicable: {exc}".replace("not applicable: not applicable", "not applicable")}
    f = make_fast_barrier(spec, data)
    entry = {"status": "valid" if f.valid else "invalid", "flags": f.flags(),
             "params": {"c": f.c, "d": f.dAmp, "k": f.k, "l1": f.l1, "l2": f.l2, "cap": f.cap}}
    if f.valid:
        entry["residual_min"] = fast_residual_min(f, spec)
    out["fast"] = entry
    reasons = cosh_applicable(spec)
    if reasons:
        out["cosh"] = {"status": "not applicable: " + "; ".join(reasons)}
    else:
        cb = make_cosh_barrier(spec, data)
        out["cosh"] = {"status": "valid",
                       "params": {"C1": cb.C1, "C2": cb.C2, "eps": cb.eps, "m": cb.m,
                                  "gamma0": cb.gamma0, "sigma1": cb.sigma1, "sigma2": cb.sigma2},
                       "residual_min": cosh_residual_min(cb, spec)}
    return out

"""Explicit time integration of the front-fixed system.

Two explicit schemes advance the packed state:

``heun``
    Two-stage Heun step with the diffusive step
    ``dt = cfl_safety * (min(h, g) * ds)**2 / 2``.
``rkc``
    Damped second-order Runge-Kutta-Chebyshev (Sommeijer, Shampine & Verwer
    1998). The stage count grows with ``sqrt(dt * rho)``, so the step is
    limited by accuracy rather than by the diffusive bound. This is the
    default for long horizons.

Both schemes shrink the step so that the reaction terms (gradient absorption
plus source) cannot move any node by more than ``rel_change`` of the current
sup-norm; ``rkc`` applies the same cap to the full right-hand side. A
positivity bound ``dt <= 2 cfl_safety / rate`` is also enforced, where rate is
the largest diagonal weight of the semi-discrete operator (``heun``) or of
its upwinded first-order part (``rkc``).

The stepping loop is compiled; Python only sees samples, checkpoints,
snapshot times and terminal events.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numba
import numpy as np

from .grid import (ADVECTION_SCHEMES, NormalizedState, advection_code,
                   diffusion_spectral_radius, gradient_interior, project_initial,
                   rhs_kernel, spec_params)
from .model import InitialData, ProblemSpec

logger = logging.getLogger(__name__)

HORIZON = "HorizonReached"
BLOWUP = "BlowUpDetected"
UNDERFLOW = "StepUnderflow"
NONFINITE = "NonFinite"
MAX_STEPS = "MaxStepsReached"
NEGATIVE = "NegativityViolation"
TERMINATIONS = (HORIZON, BLOWUP, UNDERFLOW, NONFINITE, MAX_STEPS, NEGATIVE)

# a component whose sup-norm drops below this is set to zero (avoids
# subnormal arithmetic and kinked near-zero profiles)
EXTINCTION_LEVEL = 1e-250
RKC_DAMPING = 2.0 / 13.0
RKC_MARGIN = 1.2
MAX_RKC_STAGES = 4000
# error weights never drop below this fraction of the sup-norm
ERR_FLOOR = 1e-3


class SolverError(RuntimeError):
    termination = NONFINITE


class NonFiniteError(SolverError):
    termination = NONFINITE


class StepUnderflowError(SolverError):
    termination = UNDERFLOW


class NegativityError(SolverError):
    termination = NEGATIVE


@dataclass(frozen=True)
class StepControl:
    n: int = 256
    dt_init: float = 1e-4
    dt_min: float = 1e-14
    dt_max: float = 0.5
    cfl_safety: float = 0.4
    blow_threshold: float = 1e8
    horizon: float = 1.0
    max_steps: int = 50_000_000
    sample_every: int = 1
    scheme: str = "rkc"
    advection: str = "hybrid"
    rel_change: float = 0.1
    rtol: float = 1e-5
    tol_neg: float = 1e-12
    freeze_fronts: bool = False
    snapshot_times: tuple = ()

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("invalid StepControl: " + "; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            out.append("dt_min <= dt_init <= dt_max required (all > 0)")
        if not self.blow_threshold > 1:
            out.append("blow_threshold > 1 required")
        if not 0 < self.rtol < 1:
            out.append("rtol must lie in (0, 1)")
        if not 0 < self.cfl_safety <= 1:
            out.append("cfl_safety must lie in (0, 1]")
        if self.scheme not in ("heun", "rkc"):
            out.append("scheme must be 'heun' or 'rkc'")
        if self.advection not in ADVECTION_SCHEMES:
            out.append("advection must be one of " + ", ".join(ADVECTION_SCHEMES))
        if self.n < 16:
            out.append("n >= 16 required")
        if self.sample_every < 1:
            out.append("sample_every >= 1 required")
        if not self.horizon > 0:
            out.append("horizon > 0 required")
        return out

    @property
    def dense_threshold(self) -> float:
        """Norm above which every step is recorded (blow-up fit window)."""
        return 0.1 * math.sqrt(self.blow_threshold)


SAMPLE_COLUMNS = ("t", "norm_u", "norm_v", "h", "g")
DIAG_COLUMNS = ("t", "min_w", "min_z", "max_grad_w", "max_grad_z")


@dataclass
class RunRecord:
    spec: ProblemSpec
    data: InitialData
    ctrl: StepControl
    samples: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    termination: str = ""
    t_stop: float = float("nan")
    steps: int = 0
    final_state: Optional[NormalizedState] = None

    def column(self, name: str) -> np.ndarray:
        if name in SAMPLE_COLUMNS:
            i = SAMPLE_COLUMNS.index(name)
            return np.array([row[i] for row in self.samples], dtype=float)
        i = DIAG_COLUMNS.index(name)
        return np.array([row[i] for row in self.diagnostics], dtype=float)

    @property
    def t(self):
        return self.column("t")

    @property
    def norm_u(self):
        return self.column("norm_u")

    @property
    def norm_v(self):
        return self.column("norm_v")

    @property
    def h(self):
        return self.column("h")

    @property
    def g(self):
        return self.column("g")

    def subsample(self, factor: int) -> "RunRecord":
        """Every ``factor``-th sample, always keeping the last one."""
        idx = list(range(0, len(self.samples), factor))
        if idx[-1] != len(self.samples) - 1:
            idx.append(len(self.samples) - 1)
        out = RunRecord(self.spec, self.data, self.ctrl,
                        [self.samples[i] for i in idx], [self.diagnostics[i] for i in idx],
                        list(self.snapshots), self.termination, self.t_stop, self.steps,
                        self.final_state)
        return out


# ---------------------------------------------------------------- kernels

@numba.njit(cache=True)
def _rkc_fill(s, mu, nu, mut, gt):
    """Fill damped RKC2 coefficients for s stages; return the stability bound."""
    w0 = 1.0 + RKC_DAMPING / (s * s)
    T = np.zeros(s + 1)
    dT = np.zeros(s + 1)
    d2T = np.zeros(s + 1)
    T[0] = 1.0
    T[1] = w0
    dT[1] = 1.0
    for j in range(2, s + 1):
        T[j] = 2.0 * w0 * T[j - 1] - T[j - 2]
        dT[j] = 2.0 * T[j - 1] + 2.0 * w0 * dT[j - 1] - dT[j - 2]
        d2T[j] = 4.0 * dT[j - 1] + 2.0 * w0 * d2T[j - 1] - d2T[j - 2]
    w1 = dT[s] / d2T[s]
    b = np.zeros(s + 1)
    for j in range(2, s + 1):
        b[j] = d2T[j] / (dT[j] * dT[j])
    b[0] = b[2]
    b[1] = b[2]
    for j in range(s + 1):
        mu[j] = 0.0
        nu[j] = 0.0
        mut[j] = 0.0
        gt[j] = 0.0
    mut[1] = b[1] * w1
    for j in range(2, s + 1):
        mu[j] = 2.0 * b[j] * w0 / b[j - 1]
        nu[j] = -b[j] / b[j - 2]
        mut[j] = 2.0 * b[j] * w1 / b[j - 1]
        gt[j] = -(1.0 - b[j - 1] * T[j - 1]) * mut[j]
    return (1.0 + w0) / w1


@numba.njit(cache=True)
def _rkc_beta(s):
    w0 = 1.0 + RKC_DAMPING / (s * s)
    T0, T1 = 1.0, w0
    d0, d1 = 0.0, 1.0
    e0, e1 = 0.0, 0.0
    for _ in range(2, s + 1):
        T2 = 2.0 * w0 * T1 - T0
        d2 = 2.0 * T1 + 2.0 * w0 * d1 - d0
        e2 = 4.0 * d1 + 2.0 * w0 * e1 - e0
        T0, T1, d0, d1, e0, e1 = T1, T2, d1, d2, e1, e2
    return (1.0 + w0) * e1 / d1


@numba.njit(cache=True)
def _rkc_stage_count(target):
    s = max(2, int(math.ceil(math.sqrt(target / 0.65))))
    while _rkc_beta(s) < target:
        s += 1
    while s > 2 and _rkc_beta(s - 1) >= target:
        s -= 1
    return s


def rkc_coefficients(s: int):
    """Stage coefficients ``(mu, nu, mu_tilde, gamma_tilde, beta)`` of damped RKC2."""
    if s < 2:
        raise ValueError("RKC needs at least two stages")
    arrs = [np.zeros(s + 1) for _ in range(4)]
    beta = _rkc_fill(s, *arrs)
    return (*arrs, float(beta))


def rkc_stages(dt_rho: float, margin: float = RKC_MARGIN) -> int:
    """Smallest stage count whose stability interval covers ``margin * dt * rho``."""
    return int(_rkc_stage_count(margin * dt_rho))


# march status codes
_HIT, _SAMPLE, _CKPT, _BLOWUP, _NONFINITE, _UNDERFLOW, _NEGATIVE, _MAXSTEPS = range(8)
_STATUS_NAMES = {_BLOWUP: BLOWUP, _NONFINITE: NONFINITE, _UNDERFLOW: UNDERFLOW,
                 _NEGATIVE: NEGATIVE, _MAXSTEPS: MAX_STEPS}


@numba.njit(cache=True)
def _all_finite(y):
    for i in range(len(y)):
        if not np.isfinite(y[i]):
            return False
    return True


@numba.njit(cache=True)
def _sup(y, m2):
    s = 0.0
    for i in range(m2):
        a = abs(y[i])
        if a > s:
            s = a
    return s


@numba.njit(cache=True)
def _advance(y, F0, dt, rho, method, n, N, p, alpha, gamma, beta, a0, lam0, mu, eta,
             freeze, adv, stats, cmu, cnu, cmut, cgt, b0, b1, b2, F, out):
    """One step of size dt from y (F0 = rhs(y)) into ``out``."""
    size = len(y)
    if method == 0:
        for i in range(size):
            b0[i] = y[i] + dt * F0[i]
        rhs_kernel(b0, n, N, p, alpha, gamma, beta, a0, lam0, mu, eta, freeze, adv, F, stats)
        for i in range(size):
            out[i] = y[i] + 0.5 * dt * (F0[i] + F[i])
        return
    s = _rkc_stage_count(RKC_MARGIN * dt * rho)
    if s + 1 > len(cmu):
        s = len(cmu) - 1
    _rkc_fill(s, cmu, cnu, cmut, cgt)
    # the recurrence runs on increments Y_j - y so that slowly moving fronts
    # do not pick up round-off from the full values
    for i in range(size):
        b0[i] = 0.0
        b1[i] = cmut[1] * dt * F0[i]
    for j in range(2, s + 1):
        for i in range(size):
            out[i] = y[i] + b1[i]
        rhs_kernel(out, n, N, p, alpha, gamma, beta, a0, lam0, mu, eta, freeze, adv, F, stats)
        for i in range(size):
            b2[i] = (cmu[j] * b1[i] + cnu[j] * b0[i]
                     + cmut[j] * dt * F[i] + cgt[j] * dt * F0[i])
        for i in range(size):
            b0[i] = b1[i]
            b1[i] = b2[i]
    for i in range(size):
        out[i] = y[i] + b1[i]


@numba.njit(cache=True)
def _tidy(y, n, tol_neg):
    """Clamp round-off negatives, zero extinct components, pin the fronts.

    Returns False when a value lies below the negativity tolerance.
    """
    m = n + 1
    m2 = 2 * m
    tol = tol_neg * max(_sup(y, m2), 1.0)
    for i in range(m2):
        if y[i] < -tol:
            return False
    for i in range(m2):
        if y[i] < 0.0:
            y[i] = 0.0
    for off in (0, m):
        peak = 0.0
        for i in range(off, off + m):
            if y[i] > peak:
                peak = y[i]
        if peak < EXTINCTION_LEVEL:
            for i in range(off, off + m):
                y[i] = 0.0
    y[n] = 0.0
    y[m2 - 1] = 0.0
    return True


@numba.njit(cache=True)
def _rkc_error(y, ynew, F0, F1, dt, m2, rtol, sup):
    """Weighted RMS of the RKC local error estimate."""
    acc = 0.0
    floor = ERR_FLOOR * sup
    for i in range(len(y)):
        est = 0.8 * (y[i] - ynew[i]) + 0.4 * dt * (F0[i] + F1[i])
        if i < m2:
            scale = max(abs(y[i]), abs(ynew[i]), floor)
        else:
            scale = abs(y[i])
        wt = rtol * scale
        if wt > 0.0:
            acc += (est / wt) ** 2
    return math.sqrt(acc / len(y))


@numba.njit(cache=True)
def _march(y, t, k, target, max_steps, sample_every, ckpt_every, dense_thr, blow_thr,
           dt_first, dt_force, method, cfl, rel, rtol, dt_min, dt_max, tol_neg, rho_diff,
           n, N, p, alpha, gamma, beta, a0, lam0, mu, eta, freeze, adv, cap,
           F0, F, ynew, yhalf, b0, b1, b2, cmu, cnu, cmut, cgt, stats):
    """Step y in place until ``target``, a sample or an event.

    ``cap`` is the controller's carried step bound (error estimate for rkc,
    rejected-negativity backoff for heun); it is returned so that splitting
    a run into several calls does not change the step sequence.

    Returns ``(status, t, k, dt_last, cap)``.
    """
    m = n + 1
    m2 = 2 * m
    dt = 0.0
    while True:
        if k >= max_steps:
            return _MAXSTEPS, t, k, dt, cap
        rhs_kernel(y, n, N, p, alpha, gamma, beta, a0, lam0, mu, eta, freeze, adv, F0, stats)
        if not _all_finite(F0):
            return _NONFINITE, t, k, dt, cap
        max_react = stats[0]
        rho_react = stats[1]
        max_diag = stats[2]
        max_adv = stats[3]
        sup = _sup(y, m2)
        fmin = min(y[m2], y[m2 + 1])
        if dt_force > 0.0:
            dt = dt_force
        else:
            if method == 0:
                dt = cfl * (fmin / n) ** 2 / 2.0
                if max_diag > 0.0:
                    dt = min(dt, 2.0 * cfl / max_diag)
            else:
                fsup = _sup(F0, m2)
                dt = rel * sup / fsup if fsup > 0.0 else dt_max
                if max_adv > 0.0:
                    dt = min(dt, 2.0 * cfl / max_adv)
            if max_react > 0.0:
                dt = min(dt, rel * sup / max_react)
            dt = min(dt, dt_max)
            if method == 1:
                rho_now = rho_diff / (fmin * fmin) + rho_react
                dt = min(dt, _rkc_beta(len(cmu) - 1) / (RKC_MARGIN * rho_now))
            if k == 0:
                dt = min(dt, dt_first)
            dt = min(dt, cap)
        hit = t + dt >= target
        if hit:
            dt = target - t
        elif dt < dt_min:
            return _UNDERFLOW, t, k, dt, cap
        rho = rho_diff / (fmin * fmin) + rho_react
        _advance(y, F0, dt, rho, method, n, N, p, alpha, gamma, beta, a0, lam0, mu, eta,
                 freeze, adv, stats, cmu, cnu, cmut, cgt, b0, b1, b2, F, ynew)
        if not _all_finite(ynew) or _sup(ynew, m2) > blow_thr:
            # confirm with two half steps over the same interval
            _advance(y, F0, 0.5 * dt, rho, method, n, N, p, alpha, gamma, beta, a0, lam0,
                     mu, eta, freeze, adv, stats, cmu, cnu, cmut, cgt, b0, b1, b2, F, yhalf)
            if not _all_finite(yhalf):
                return _NONFINITE, t, k, dt, cap
            rhs_kernel(yhalf, n, N, p, alpha, gamma, beta, a0, lam0, mu, eta, freeze, adv, F0, stats)
            if not _all_finite(F0):
                return _NONFINITE, t, k, dt, cap
            rho = rho_diff / min(yhalf[m2], yhalf[m2 + 1]) ** 2 + stats[1]
            _advance(yhalf, F0, 0.5 * dt, rho, method, n, N, p, alpha, gamma, beta, a0, lam0,
                     mu, eta, freeze, adv, stats, cmu, cnu, cmut, cgt, b0, b1, b2, F, ynew)
            if not _all_finite(ynew):
                return _NONFINITE, t, k, dt, cap
            if _sup(ynew, m2) > blow_thr:
                if not _tidy(ynew, n, tol_neg):
                    return _NEGATIVE, t, k, dt, cap
                for i in range(len(y)):
                    y[i] = ynew[i]
                k += 1
                t = target if hit else t + dt
                return _BLOWUP, t, k, dt, cap
        if method == 1 and dt_force <= 0.0:
            rhs_kernel(ynew, n, N, p, alpha, gamma, beta, a0, lam0, mu, eta, freeze, adv, F, stats)
            err = _rkc_error(y, ynew, F0, F, dt, m2, rtol, sup)
            if not err <= 1.0:
                cap = dt * max(0.1, 0.8 * err ** (-1.0 / 3.0)) if err < math.inf else 0.1 * dt
                if cap < dt_min:
                    return _UNDERFLOW, t, k, dt, cap
                continue
            cap = dt * min(10.0, 0.8 * err ** (-1.0 / 3.0)) if err > 0.0 else 10.0 * dt
        if not _tidy(ynew, n, tol_neg):
            cap = 0.5 * dt
            if dt_force > 0.0 or cap < dt_min:
                return _NEGATIVE, t, k, dt, cap
            continue
        if method == 0:
            cap *= 1.5
        for i in range(len(y)):
            y[i] = ynew[i]
        k += 1
        if hit:
            return _HIT, target, k, dt, cap
        t += dt
        if k % sample_every == 0 or _sup(y, m2) > dense_thr:
            return _SAMPLE, t, k, dt, cap
        if ckpt_every > 0 and k % ckpt_every == 0:
            return _CKPT, t, k, dt, cap


class _Integrator:
    """Scratch buffers and parameters for one resolution."""

    def __init__(self, spec: ProblemSpec, ctrl: StepControl):
        self.spec = spec
        self.ctrl = ctrl
        self.n = ctrl.n
        self.params = spec_params(spec)
        self.adv = advection_code(ctrl.advection)
        self.method = 0 if ctrl.scheme == "heun" else 1
        size = 2 * (self.n + 1) + 2
        self.work = [np.empty(size) for _ in range(7)]
        self.coef = [np.zeros(MAX_RKC_STAGES + 1) for _ in range(4)]
        self.stats = np.zeros(4)
        self.rho_diff = diffusion_spectral_radius(self.n, spec.N) if self.method == 1 else 0.0

    def march(self, y, t, k, target, cap=math.inf, dt_force=0.0, max_steps=None, ckpt_every=0):
        c = self.ctrl
        max_steps = c.max_steps if max_steps is None else max_steps
        status, t, k, dt, cap = _march(
            y, float(t), int(k), float(target), int(max_steps), int(c.sample_every),
            int(ckpt_every), c.dense_threshold, c.blow_threshold, c.dt_init, float(dt_force),
            self.method, c.cfl_safety, c.rel_change, c.rtol, c.dt_min, c.dt_max, c.tol_neg,
            self.rho_diff, self.n, *self.params, c.freeze_fronts, self.adv, float(cap),
            *self.work, *self.coef, self.stats)
        return int(status), float(t), int(k), float(dt), float(cap)


def step(state: NormalizedState, spec: ProblemSpec, ctrl: StepControl,
         dt: Optional[float] = None) -> NormalizedState:
    """Advance one step; dt defaults to the scheme's controller choice.

    Raises NonFiniteError, StepUnderflowError or NegativityError. A step that
    crosses the blow-up threshold is returned as is.
    """
    if state.n != ctrl.n:
        ctrl = replace(ctrl, n=state.n)
    integ = _Integrator(spec, ctrl)
    y = state.pack()
    # k = 1 so that dt_init does not cap an explicit controller step
    status, t, _, _, _ = integ.march(y, state.t, 1, math.inf, dt_force=dt or 0.0, max_steps=2)
    if status == _NONFINITE:
        raise NonFiniteError("non-finite value during the step")
    if status == _UNDERFLOW:
        raise StepUnderflowError("required dt below dt_min")
    if status == _NEGATIVE:
        raise NegativityError("state went negative beyond tolerance")
    return NormalizedState.unpack(t, y)


def _diag_row(t, y, n):
    m = n + 1
    w, z = y[:m], y[m:2 * m]
    return (t, float(w.min()), float(z.min()),
            float(gradient_interior(w, n).max()), float(gradient_interior(z, n).max()))


def _sample_row(t, y, n):
    m = n + 1
    return (t, float(np.max(np.abs(y[:m]))), float(np.max(np.abs(y[m:2 * m]))),
            float(y[2 * m]), float(y[2 * m + 1]))


@dataclass
class Progress:
    """Resumable run position: state, step counter and the record so far."""

    state: NormalizedState
    step: int
    samples: list
    diagnostics: list
    snapshots: list
    cap: float = math.inf


def run(spec: ProblemSpec, data: InitialData, ctrl: StepControl,
        resume: Optional[Progress] = None,
        on_checkpoint: Optional[Callable[[Progress], None]] = None,
        checkpoint_every: int = 0) -> RunRecord:
    """Integrate from the projected initial data until a termination event."""
    integ = _Integrator(spec, ctrl)
    n = ctrl.n
    record = RunRecord(spec, data, ctrl)
    if resume is None:
        state = project_initial(spec, data, n)
        k = 0
        y = state.pack()
        t = 0.0
        cap = math.inf
        record.samples.append(_sample_row(t, y, n))
        record.diagnostics.append(_diag_row(t, y, n))
        if 0.0 in ctrl.snapshot_times:
            record.snapshots.append(state.copy())
    else:
        if resume.state.n != n:
            raise ValueError("checkpoint resolution does not match the control")
        y = resume.state.pack()
        t = resume.state.t
        k = resume.step
        cap = resume.cap
        record.samples = list(resume.samples)
        record.diagnostics = list(resume.diagnostics)
        record.snapshots = list(resume.snapshots)
    stops = sorted(ts for ts in ctrl.snapshot_times if 0 < ts < ctrl.horizon)
    stops.append(ctrl.horizon)
    if on_checkpoint is None:
        checkpoint_every = 0

    def add_sample():
        if record.samples[-1][0] != t:
            record.samples.append(_sample_row(t, y, n))
            record.diagnostics.append(_diag_row(t, y, n))

    while True:
        if t >= ctrl.horizon:
            reason = HORIZON
            break
        target = next(ts for ts in stops if ts > t)
        status, t, k, _, cap = integ.march(y, t, k, target, cap, ckpt_every=checkpoint_every)
        if status == _HIT:
            add_sample()
            if target in ctrl.snapshot_times:
                record.snapshots.append(NormalizedState.unpack(t, y))
        elif status == _SAMPLE:
            add_sample()
        elif status == _CKPT:
            pass
        else:
            reason = _STATUS_NAMES[status]
            if status == _NEGATIVE:
                logger.warning("negativity beyond tolerance at t=%.6g", t)
            break
        if checkpoint_every and k % checkpoint_every == 0:
            on_checkpoint(Progress(NormalizedState.unpack(t, y), k, list(record.samples),
                                   list(record.diagnostics), list(record.snapshots), cap))
    add_sample()
    record.termination = reason
    record.t_stop = t
    record.steps = k
    record.final_state = NormalizedState.unpack(t, y)
    return record


def _linfit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(icpt), float(r2)


def fit_blowup(t: Sequence[float], norm: Sequence[float], p: float,
               min_norm: float = 0.0, min_samples: int = 8):
    """Fit ``norm ~ c (T - t)^(-1/(p-1))`` on the last decade of growth.

    Returns ``(T_est, fit_exponent, r2)``.
    """
    t = np.asarray(t, float)
    Y = np.asarray(norm, float)
    ok = np.isfinite(Y) & (Y > min_norm)
    if ok.sum() < min_samples:
        raise ValueError(f"need >= {min_samples} samples above {min_norm:g}, have {int(ok.sum())}")
    window = ok & (Y >= Y[ok].max() / 10.0)
    if window.sum() < min_samples:
        window = ok
    tw, Yw = t[window], Y[window]
    slope, icpt, r2 = _linfit(tw, Yw ** (-(p - 1.0)))
    if slope >= 0:
        raise ValueError("norm is not growing in the fit window")
    T_est = -icpt / slope
    gap = T_est - tw
    good = gap > 0
    if good.sum() >= 2:
        expo_slope, _, _ = _linfit(np.log(gap[good]), np.log(Yw[good]))
        exponent = -expo_slope
    else:
        exponent = float("nan")
    return float(T_est), float(exponent), float(r2)


def estimate_blowup_time(record: RunRecord, p: Optional[float] = None):
    """(T_est, fit_exponent, fit_quality) from a record that blew up."""
    if record.termination not in (BLOWUP, UNDERFLOW):
        raise ValueError(f"record terminated with {record.termination}, not a blow-up")
    p = record.spec.p if p is None else p
    Y = record.norm_u + record.norm_v
    return fit_blowup(record.t, Y, p, min_norm=record.ctrl.dense_threshold)

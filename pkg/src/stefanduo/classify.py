"""Phase labels for finished runs, amplitude thresholds and lifespan fits.

A run is labelled ``BlowUp``, ``GlobalFast``, ``GlobalSlowCandidate`` or
``Undecided``. Slow behaviour is asymptotic and cannot be certified at a
finite horizon, hence "candidate". ``Undecided`` always names the criterion
that failed.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .grid import to_physical
from .model import InitialData, ProblemSpec, make_initial_data
from .solver import (BLOWUP, HORIZON, UNDERFLOW, RunRecord, StepControl,
                     estimate_blowup_time, run)

logger = logging.getLogger(__name__)

BLOWUP_LABEL = "BlowUp"
FAST = "GlobalFast"
SLOW = "GlobalSlowCandidate"
UNDECIDED = "Undecided"
LABELS = (BLOWUP_LABEL, FAST, SLOW, UNDECIDED)
GLOBAL_LABELS = (FAST, SLOW)
MIN_FIT_SAMPLES = 8


@dataclass(frozen=True)
class ClassifyConfig:
    decay_factor: float = 1e-3      # final / initial norm below this for GlobalFast
    fit_quality: float = 0.99       # R^2 of the exponential fit
    front_tol: float = 1e-3         # front increment over last half, relative to h0 + g0
    slow_growth: float = 0.01       # relative front growth per half-horizon
    bounded_factor: float = 10.0    # max norm / initial norm for "bounded"
    blowup_norm: float = 1e4        # StepUnderflow above this counts as blow-up


@dataclass
class Classification:
    label: str
    horizon: float
    T_est: float = math.nan
    fit_exponent: float = math.nan
    fit_quality: float = math.nan
    decay_rate_u: float = math.nan
    decay_rate_v: float = math.nan
    h_inf_est: float = math.nan
    g_inf_est: float = math.nan
    front_growth: float = math.nan
    reason: str = ""
    degenerate: bool = False
    evidence: dict = field(default_factory=dict)

    @property
    def is_global(self) -> bool:
        return self.label in GLOBAL_LABELS

    def as_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items()}
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in out.items()}


class DecayFit(NamedTuple):
    rate: float
    quality: float


def _linfit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(icpt), r2


def fit_decay_rate(record: RunRecord, component: str = "u",
                   window: Optional[tuple] = None) -> DecayFit:
    """Negated least-squares slope of log norm against t.

    Zero norms inside the window are dropped with a warning. A window whose
    norms are all zero is degenerate: rate 0, quality nan.
    """
    if component not in ("u", "v"):
        raise ValueError("component must be 'u' or 'v'")
    t = record.t
    y = record.norm_u if component == "u" else record.norm_v
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, y = t[sel], y[sel]
    if len(y) and np.all(y == 0):
        return DecayFit(0.0, math.nan)
    pos = y > 0
    if not np.all(pos):
        logger.warning("dropping %d zero norms from the decay window", int((~pos).sum()))
    t, y = t[pos], y[pos]
    if len(y) < MIN_FIT_SAMPLES:
        raise ValueError(f"need >= {MIN_FIT_SAMPLES} positive samples, have {len(y)}")
    slope, _, r2 = _linfit(t, np.log(y))
    return DecayFit(-slope, r2)


def _decay_window(record: RunRecord) -> tuple:
    """Second half of the run, or the later half of the positive samples."""
    T = record.t[-1]
    total = record.norm_u + record.norm_v
    late = (record.t >= T / 2) & (total > 0)
    if late.sum() >= MIN_FIT_SAMPLES:
        return (T / 2, T)
    pos_t = record.t[(total > 0) & (record.t > 0)]
    if len(pos_t) < MIN_FIT_SAMPLES:
        return (0.0, T)
    return (pos_t[len(pos_t) // 2], pos_t[-1])


def _front_at(record: RunRecord, col: str, t: float) -> float:
    return float(np.interp(t, record.t, record.column(col)))


def classify_run(record: RunRecord, cfg: ClassifyConfig = ClassifyConfig()) -> Classification:
    if not record.samples:
        raise ValueError("empty record")
    T = float(record.t[-1])
    horizon = record.ctrl.horizon
    spec = record.spec
    final = float(record.norm_u[-1] + record.norm_v[-1])
    initial = float(record.norm_u[0] + record.norm_v[0])

    if record.termination == BLOWUP or (record.termination == UNDERFLOW and final > cfg.blowup_norm):
        out = Classification(BLOWUP_LABEL, horizon, T_est=record.t_stop)
        try:
            out.T_est, out.fit_exponent, out.fit_quality = estimate_blowup_time(record)
        except ValueError as exc:
            out.reason = f"blow-up fit unavailable: {exc}"
        return out

    if record.termination != HORIZON:
        return Classification(UNDECIDED, horizon, reason=f"run ended with {record.termination}")

    h_inf, g_inf = float(record.h[-1]), float(record.g[-1])
    inc = (h_inf - _front_at(record, "h", T / 2)) + (g_inf - _front_at(record, "g", T / 2))
    growth = inc / (_front_at(record, "h", T / 2) + _front_at(record, "g", T / 2))
    evidence = {"initial_norm": initial, "final_norm": final, "front_increment": inc}

    if initial == 0.0:
        return Classification(FAST, horizon, decay_rate_u=0.0, decay_rate_v=0.0,
                              h_inf_est=h_inf, g_inf_est=g_inf, front_growth=0.0,
                              degenerate=True, evidence=evidence)

    window = _decay_window(record)
    evidence["decay_window"] = [float(x) for x in window]
    try:
        ru = fit_decay_rate(record, "u", window)
        rv = fit_decay_rate(record, "v", window)
    except ValueError as exc:
        ru = rv = DecayFit(math.nan, math.nan)
        evidence["fit_error"] = str(exc)
    quality = min(ru.quality, rv.quality) if not (math.isnan(ru.quality) or math.isnan(rv.quality)) else math.nan
    evidence["fit_quality"] = quality

    failed = []
    if not final < cfg.decay_factor * initial:
        failed.append(f"final norm {final:.3g} not below {cfg.decay_factor:g} x initial")
    if not (quality > cfg.fit_quality):
        failed.append(f"exponential fit quality {quality:.3g} <= {cfg.fit_quality:g}")
    if not (ru.rate > 0 and rv.rate > 0):
        failed.append("decay rates not positive")
    if not inc < cfg.front_tol * (spec.h0 + spec.g0):
        failed.append(f"front increment {inc:.3g} over last half-horizon too large")
    if not failed:
        return Classification(FAST, horizon, decay_rate_u=ru.rate, decay_rate_v=rv.rate,
                              h_inf_est=h_inf, g_inf_est=g_inf, front_growth=growth,
                              evidence=evidence)

    peak = float(np.max(record.norm_u + record.norm_v))
    if peak < cfg.bounded_factor * initial and growth > cfg.slow_growth:
        return Classification(SLOW, horizon, decay_rate_u=ru.rate, decay_rate_v=rv.rate,
                              h_inf_est=h_inf, g_inf_est=g_inf, front_growth=growth,
                              evidence=evidence)
    if peak >= cfg.bounded_factor * initial:
        failed.append(f"peak norm {peak:.3g} not bounded by {cfg.bounded_factor:g} x initial")
    else:
        failed.append(f"front growth {growth:.3g} below {cfg.slow_growth:g}")
    return Classification(UNDECIDED, horizon, decay_rate_u=ru.rate, decay_rate_v=rv.rate,
                          h_inf_est=h_inf, g_inf_est=g_inf, front_growth=growth,
                          reason="; ".join(failed), evidence=evidence)


# ------------------------------------------------------------ batch runs

def simulate(spec: ProblemSpec, family: str, A: float, ctrl: StepControl) -> RunRecord:
    return run(spec, make_initial_data(spec, family, A), ctrl)


def _run_and_classify(args):
    spec, family, A, ctrl, cfg = args
    record = simulate(spec, family, A, ctrl)
    return record, classify_run(record, cfg)


def run_many(spec: ProblemSpec, family: str, amplitudes: Sequence[float], ctrl: StepControl,
             cfg: ClassifyConfig = ClassifyConfig(), jobs: int = 1) -> list:
    """[(record, classification)] in the order of ``amplitudes``.

    Runs are independent; with jobs > 1 they execute in worker processes.
    """
    tasks = [(spec, family, float(A), ctrl, cfg) for A in amplitudes]
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_and_classify(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_and_classify, tasks))


@dataclass
class Bracket:
    A_lo: float
    A_hi: float
    widened: bool = False
    history: list = field(default_factory=list)


def bisect_threshold(spec: ProblemSpec, family: str, A_lo: float, A_hi: float,
                     tol_rel: float, ctrl: StepControl,
                     cfg: ClassifyConfig = ClassifyConfig(), jobs: int = 1) -> Bracket:
    """Bracket the global/blow-up transition in the amplitude.

    With ``jobs > 1`` each round evaluates ``jobs`` equally spaced interior
    points at once. An Undecided point stops the search and returns the
    current bracket with ``widened`` set.
    """
    if not (0 <= A_lo < A_hi):
        raise ValueError("0 <= A_lo < A_hi required")
    if not tol_rel > 0:
        raise ValueError("tol_rel > 0 required")
    ends = run_many(spec, family, [A_lo, A_hi], ctrl, cfg, jobs)
    history = [(A_lo, ends[0][1].label), (A_hi, ends[1][1].label)]
    if not ends[0][1].is_global:
        raise ValueError(f"precondition failed: A_lo={A_lo:g} classified {ends[0][1].label}")
    if ends[1][1].label != BLOWUP_LABEL:
        raise ValueError(f"precondition failed: A_hi={A_hi:g} classified {ends[1][1].label}")
    lo, hi = A_lo, A_hi
    width = max(1, jobs)
    while hi / lo - 1.0 >= tol_rel if lo > 0 else True:
        pts = [lo + (hi - lo) * (i + 1) / (width + 1) for i in range(width)]
        results = run_many(spec, family, pts, ctrl, cfg, jobs)
        labels = [c.label for _, c in results]
        history.extend(zip(pts, labels))
        if UNDECIDED in labels:
            logger.warning("undecided amplitude inside [%g, %g]; returning widened bracket", lo, hi)
            return Bracket(lo, hi, widened=True, history=history)
        new_lo, new_hi = lo, hi
        for A, lab in zip(pts, labels):
            if lab == BLOWUP_LABEL:
                new_hi = A
                break
            new_lo = A
        lo, hi = new_lo, new_hi
    return Bracket(lo, hi, history=history)


class LifespanFit(NamedTuple):
    slope: float
    intercept: float
    T_est: dict


def fit_lifespan(amplitudes: Sequence[float], T: Sequence[float]) -> tuple:
    """(slope, intercept) of log T against log A."""
    A = np.asarray(amplitudes, float)
    T = np.asarray(T, float)
    if len(A) < 2 or np.any(A <= 0) or np.any(T <= 0):
        raise ValueError("need >= 2 positive amplitudes and times")
    slope, icpt, _ = _linfit(np.log(A), np.log(T))
    return slope, icpt


def lifespan_scaling(spec: ProblemSpec, family: str, amplitudes: Sequence[float],
                     ctrl: StepControl, cfg: ClassifyConfig = ClassifyConfig(),
                     jobs: int = 1) -> LifespanFit:
    results = run_many(spec, family, amplitudes, ctrl, cfg, jobs)
    T = {}
    for A, (_, c) in zip(amplitudes, results):
        if c.label != BLOWUP_LABEL:
            raise ValueError(f"amplitude {A:g} did not blow up ({c.label}: {c.reason or 'horizon reached'})")
        T[float(A)] = c.T_est
    slope, icpt = fit_lifespan(list(T), list(T.values()))
    return LifespanFit(slope, icpt, T)


# ------------------------------------------------------------ comparison

@dataclass
class ComparisonReport:
    ordered: bool
    times: list
    max_excess_u: float = 0.0
    max_excess_v: float = 0.0
    max_front_excess_h: float = -math.inf
    max_front_excess_g: float = -math.inf
    violations: list = field(default_factory=list)
    profile_checked: bool = False


def comparison_test(record_small: RunRecord, record_large: RunRecord, spec: ProblemSpec,
                    tol_cmp: float = 1e-6, points: int = 1025) -> ComparisonReport:
    """Check u1 <= u2, v1 <= v2 and front ordering at common times.

    Profiles are compared on a physical-radius grid at snapshot times shared
    by both records; norms and fronts are compared at every shared sample.
    ``tol_cmp`` is relative to the larger run's sup-norm at that time.
    """
    if record_small.spec != record_large.spec or record_small.spec != spec:
        raise ValueError("records come from different specs")
    if record_small.data.family != record_large.data.family:
        raise ValueError("records use different profile families")
    if record_small.data.A > record_large.data.A:
        raise ValueError("record_small must have the smaller amplitude")
    t1 = {row[0]: row for row in record_small.samples}
    common = [row for row in record_large.samples if row[0] in t1]
    if not common:
        raise ValueError("records share no sample times")
    rep = ComparisonReport(True, [row[0] for row in common])
    n = record_large.ctrl.n
    for row2 in common:
        t, nu2, nv2, h2, g2 = row2
        _, nu1, nv1, h1, g1 = t1[t]
        sup = max(nu2, nv2)
        tol = tol_cmp * sup
        slack = max(h1, h2, g1, g2) / n
        for name, small, large in (("norm_u", nu1, nu2), ("norm_v", nv1, nv2)):
            if small > large + tol:
                rep.violations.append((t, name, small - large))
        eh, eg = h1 - h2, g1 - g2
        rep.max_front_excess_h = max(rep.max_front_excess_h, eh)
        rep.max_front_excess_g = max(rep.max_front_excess_g, eg)
        if eh > slack:
            rep.violations.append((t, "h", eh))
        if eg > slack:
            rep.violations.append((t, "g", eg))
    s1 = {st.t: st for st in record_small.snapshots}
    for st2 in record_large.snapshots:
        st1 = s1.get(st2.t)
        if st1 is None:
            continue
        rep.profile_checked = True
        R = max(st1.h, st2.h, st1.g, st2.g)
        r = np.linspace(0.0, R, points)
        sup = max(np.max(st2.w), np.max(st2.z))
        tol = tol_cmp * sup
        du = to_physical(st1, "u", r) - to_physical(st2, "u", r)
        dv = to_physical(st1, "v", r) - to_physical(st2, "v", r)
        rep.max_excess_u = max(rep.max_excess_u, float(du.max()))
        rep.max_excess_v = max(rep.max_excess_v, float(dv.max()))
        if du.max() > tol:
            rep.violations.append((st2.t, "u", float(du.max())))
        if dv.max() > tol:
            rep.violations.append((st2.t, "v", float(dv.max())))
    rep.ordered = not rep.violations
    return rep

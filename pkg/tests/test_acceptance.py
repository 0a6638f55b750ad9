"""Acceptance suite: one test per criterion, one PASS/FAIL line per criterion.

The lines are printed as each test finishes and repeated in the terminal
summary. Runs shared between criteria are computed once per session.
"""
import functools
import math
import time

import numpy as np
import pytest

from stefanduo import cli
from stefanduo.barriers import (blowup_residual_max, canonical_blowup_barrier,
                                cosh_residual_min, fast_residual_min, power_sum_minimum,
                                make_cosh_barrier, make_fast_barrier, power_lower_bound,
                                power_shift_bound)
from stefanduo.classify import (BLOWUP_LABEL, classify_run, comparison_test, fit_lifespan)
from stefanduo.io import checkpoint_read, checkpoint_write
from stefanduo.model import ProblemSpec, fast_amplitude_bound, make_initial_data
from stefanduo.solver import BLOWUP, HORIZON, StepControl, estimate_blowup_time, run

pytestmark = pytest.mark.slow

RESULTS = {}
CANON = ProblemSpec()
N_GRID = 256
LIFESPAN_AMPLITUDES = (20.0, 40.0, 80.0, 160.0)
# blow-up criteria look for T_est < 1, so their runs stop at t = 1
BLOWUP_HORIZON = 1.0


def verdict(number, ok, detail):
    line = f"CRITERION {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


@functools.lru_cache(maxsize=None)
def timed_run(A, horizon, spec=CANON, **ctrl):
    data = make_initial_data(spec, "cosine", A)
    t0 = time.perf_counter()
    record = run(spec, data, StepControl(n=N_GRID, horizon=horizon, **ctrl))
    return record, time.perf_counter() - t0


def fast_amplitude():
    return fast_amplitude_bound(CANON, make_initial_data(CANON, "cosine", 1.0))


def criterion1_run():
    return timed_run(fast_amplitude(), 100.0)


def test_criterion_01_global_fast_containment():
    record, elapsed = criterion1_run()
    t = record.t
    sup0 = record.norm_u[0]
    envelope = 4.0 / 3.0 * sup0 * np.exp(-t / 16.0) + 1e-9
    front_cap = 2.0 * (2.0 - np.exp(-t / 32.0)) + 1.0 / N_GRID
    norm_excess = max(np.max(record.norm_u - envelope), np.max(record.norm_v - envelope))
    front_excess = max(np.max(record.h - front_cap), np.max(record.g - front_cap))
    ok = (record.termination == HORIZON and norm_excess <= 0 and front_excess <= 0
          and record.h[-1] < 4 and elapsed < 60)
    verdict(1, ok, f"A={record.data.A:g} {record.termination} samples={len(t)} "
                   f"max(norm-envelope)={norm_excess:.3g} max(front-cap)={front_excess:.3g} "
                   f"h_final={record.h[-1]:.6f} runtime={elapsed:.1f}s")


def test_criterion_02_blowup_detection():
    record, elapsed = timed_run(50.0, BLOWUP_HORIZON)
    detail = f"A=50 {record.termination} t_stop={record.t_stop:.4g} runtime={elapsed:.1f}s"
    ok = record.termination == BLOWUP and elapsed < 60
    if record.termination == BLOWUP:
        T, expo, _ = estimate_blowup_time(record)
        ok = ok and T < 1 and abs(expo - 1.0) <= 0.2
        detail += f" T_est={T:.6g} exponent={expo:.4f}"
    else:
        detail += f" peak={record.norm_u.max():.4g} final={record.norm_u[-1]:.3g}"
    verdict(2, ok, detail)


def test_criterion_03_lifespan_scaling():
    t0 = time.perf_counter()
    runs = {A: timed_run(A, BLOWUP_HORIZON)[0] for A in LIFESPAN_AMPLITUDES}
    elapsed = time.perf_counter() - t0
    labels = {A: classify_run(r).label for A, r in runs.items()}
    T = {A: classify_run(r).T_est for A, r in runs.items() if labels[A] == BLOWUP_LABEL}
    detail = " ".join(f"A={A:g}:{labels[A]}" + (f"(T={T[A]:.4g})" if A in T else "")
                      for A in LIFESPAN_AMPLITUDES)
    ok = len(T) == len(LIFESPAN_AMPLITUDES) and elapsed < 300
    if ok:
        slope, _ = fit_lifespan(list(T), list(T.values()))
        ok = -1.2 <= slope <= -0.8
        detail += f" slope={slope:.4f}"
    else:
        detail += " slope=undefined (not every amplitude blew up)"
    verdict(3, ok, detail + f" runtime={elapsed:.1f}s")


def test_criterion_04_barrier_residuals():
    t0 = time.perf_counter()
    blow = canonical_blowup_barrier(CANON)
    blow_max = blowup_residual_max(blow, CANON, 200, 200)
    fast = make_fast_barrier(CANON, make_initial_data(CANON, "cosine", fast_amplitude()))
    fast_min = fast_residual_min(fast, CANON, nt=200, nx=200)
    variant = ProblemSpec(alpha=2.5, p=2.0, beta=-1.5, gamma=-1.0)
    cosh = make_cosh_barrier(variant, make_initial_data(variant, "cosine", 1.0))
    cosh_min = cosh_residual_min(cosh, variant, nt=200, nx=200)
    elapsed = time.perf_counter() - t0
    ok = (blow.valid and fast.valid and blow_max <= 1e-10 and fast_min >= -1e-10
          and cosh_min >= -1e-10 and elapsed < 10)
    verdict(4, ok, f"blowup max={blow_max:.3g} fast min={fast_min:.3g} "
                   f"cosh min={cosh_min:.3g} runtime={elapsed:.2f}s")


def test_criterion_05_comparison_principle():
    # 501 common output times: the profiles are compared on a physical grid
    # at each of them, norms and fronts at every shared sample
    times = tuple(round(x, 10) for x in np.linspace(0.0, 50.0, 501))
    small, _ = timed_run(0.02, 50.0, snapshot_times=times)
    large, _ = timed_run(0.03, 50.0, snapshot_times=times)
    rep = comparison_test(small, large, CANON, tol_cmp=1e-6)
    ok = rep.ordered and rep.profile_checked and len(rep.times) >= len(times)
    verdict(5, ok, f"shared times={len(rep.times)} max excess u={rep.max_excess_u:.3g} "
                   f"v={rep.max_excess_v:.3g} front excess h={rep.max_front_excess_h:.3g} "
                   f"g={rep.max_front_excess_g:.3g} violations={len(rep.violations)}")


def test_criterion_06_monotonicity():
    records = [criterion1_run()[0], timed_run(50.0, BLOWUP_HORIZON)[0]]
    records += [timed_run(A, BLOWUP_HORIZON)[0] for A in LIFESPAN_AMPLITUDES]
    worst_grad, worst_front = -math.inf, math.inf
    for rec in records:
        d = np.array(rec.diagnostics)
        scale = np.maximum(rec.norm_u, rec.norm_v)
        worst_grad = max(worst_grad, np.max(d[:, 3] - 1e-8 * scale), np.max(d[:, 4] - 1e-8 * scale))
        worst_front = min(worst_front, np.min(np.diff(rec.h)), np.min(np.diff(rec.g)))
    ok = worst_grad <= 0 and worst_front >= 0
    verdict(6, ok, f"runs={len(records)} max(grad - 1e-8 sup)={worst_grad:.3g} "
                   f"min front increment={worst_front:.3g}")


def test_criterion_07_alpha_ge_p_global():
    spec = ProblemSpec(alpha=2.5, p=2.0, beta=-1.5, gamma=-1.0)
    record, elapsed = timed_run(1.0, 50.0, spec=spec, sample_every=10)
    ratio = max(np.max(record.norm_u) / record.norm_u[0], np.max(record.norm_v) / record.norm_v[0])
    ok = record.termination == HORIZON and record.t_stop == 50.0 and ratio < 10
    verdict(7, ok, f"{record.termination} t={record.t_stop:g} max norm / initial={ratio:.4g} "
                   f"runtime={elapsed:.1f}s")


def test_criterion_08_convergence_order():
    # reaction and absorption switched off up to 1e-300, fronts frozen
    heat = ProblemSpec(a0=1e-300, lambda0=1e-300)
    data = make_initial_data(heat, "cosine", 1.0)
    Q = []
    for n in (64, 128, 256):
        rec = run(heat, data, StepControl(n=n, horizon=0.1, freeze_fronts=True))
        Q.append(rec.final_state.w[0])
    order = math.log2((Q[0] - Q[1]) / (Q[1] - Q[2]))
    verdict(8, order >= 1.8, f"u(0, 0.1) for n=64,128,256: {Q[0]:.10f} {Q[1]:.10f} "
                             f"{Q[2]:.10f} observed order={order:.4f}")


def test_criterion_09_inequality_suite():
    rng = np.random.default_rng(20261016)
    size = 10_000
    x = 10.0 ** rng.uniform(-4, 4, size)
    sigma = 10.0 ** rng.uniform(-4, 4, size)
    a = rng.uniform(0.05, 6.0, size)
    b = rng.uniform(0.05, 6.0, size)
    alpha = rng.uniform(1.05, 6.0, size)
    s = 1.0 + rng.uniform(0.01, 0.99, size) * (alpha - 1.0)
    m = 10.0 ** rng.uniform(-3, 3, size)
    kappa = rng.uniform(-3, 3, size)
    minimum = power_sum_minimum(sigma, a, b)
    attains = x**a + sigma * x ** (-b) >= minimum * (1 - 1e-12)
    floor = minimum >= sigma ** (a / (a + b)) * (1 - 1e-12)
    lower = power_lower_bound(x, sigma, a, b, slack=1e-12)
    shift = power_shift_bound(x, sigma, alpha, s, slack=1e-12)
    shift_m = power_shift_bound(x, sigma, alpha, s, m, kappa, slack=1e-12)
    counts = {name: int(np.count_nonzero(~v)) for name, v in
              (("minimum", attains), ("floor", floor), ("lower", lower),
               ("shift", shift), ("shift_m", shift_m))}
    verdict(9, not any(counts.values()), f"samples={size} failures={counts}")


CLI_CONFIG = """
[problem]
N = 3
p = 2
alpha = 1.5
[initial]
family = cosine
A = {A!r}
[solver]
n = {n}
horizon = 100
"""


def test_criterion_10_determinism_and_resume(tmp_path):
    reference, _ = criterion1_run()
    cfg = tmp_path / "c1.ini"
    cfg.write_text(CLI_CONFIG.format(A=fast_amplitude(), n=N_GRID))
    for name in ("a", "b"):
        assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    identical = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
                    for f in files)
    lines = (tmp_path / "a" / "record.csv").read_text().splitlines()[1:]
    same_as_library = [tuple(float(v) for v in ln.split(",")) for ln in lines] == reference.samples

    saved = []

    def keep(progress):
        path = tmp_path / f"step{progress.step}.ckpt"
        checkpoint_write(progress, path, "0" * 64)
        saved.append((progress.step, path))

    data = make_initial_data(CANON, "cosine", fast_amplitude())
    ctrl = StepControl(n=N_GRID, horizon=100.0)
    halted = run(CANON, data, ctrl, on_checkpoint=keep,
                 checkpoint_every=max(1, reference.steps // 8))
    step, path = saved[len(saved) // 2]
    progress = checkpoint_read(path, "0" * 64)
    resumed = run(CANON, data, ctrl, resume=progress)
    done = len(progress.samples)
    remaining_equal = (halted.samples == reference.samples
                       and resumed.samples[done:] == reference.samples[done:]
                       and resumed.steps == reference.steps
                       and np.array_equal(resumed.final_state.w, reference.final_state.w))
    ok = identical and same_as_library and remaining_equal
    verdict(10, ok, f"files={files} byte-identical={identical} cli==library={same_as_library} "
                    f"resume from step {step} (t={progress.state.t:.4g}, "
                    f"{len(reference.samples) - done} remaining samples) exact={remaining_equal}")

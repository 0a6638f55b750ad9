import math

import numpy as np
import pytest

from stefanduo.model import ProblemSpec, make_initial_data
from stefanduo.solver import HORIZON, RunRecord, StepControl


@pytest.fixture
def canon():
    return ProblemSpec()


def synthetic_record(t, norm_u, norm_v=None, h=None, g=None, termination=HORIZON,
                     spec=None, A=1.0):
    """RunRecord built from given sample columns (no simulation)."""
    spec = spec or ProblemSpec()
    t = np.asarray(t, float)
    norm_v = norm_u if norm_v is None else norm_v
    h = np.ones_like(t) if h is None else h
    g = np.ones_like(t) if g is None else g
    ctrl = StepControl(horizon=float(t[-1]))
    rec = RunRecord(spec, make_initial_data(spec, "cosine", A), ctrl)
    rec.samples = [tuple(float(x) for x in row) for row in zip(t, norm_u, norm_v, h, g)]
    rec.diagnostics = [(float(x), 0.0, 0.0, 0.0, 0.0) for x in t]
    rec.termination = termination
    rec.t_stop = float(t[-1])
    rec.steps = len(t)
    return rec


def decay_rate(t, y):
    """Least-squares slope of -log y."""
    return -np.polyfit(np.asarray(t), np.log(np.asarray(y)), 1)[0]


PI2 = math.pi ** 2


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])

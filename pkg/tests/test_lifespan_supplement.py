"""Lifespan scaling above the observed blow-up threshold.

On the canonical instance, amplitudes up to about 120 decay at n = 256, so
the scaling is measured on {160, 320, 640, 1280}. This is a supplement, not
an acceptance criterion.
"""
import pytest

from stefanduo.classify import BLOWUP_LABEL, classify_run, lifespan_scaling, simulate
from stefanduo.model import ProblemSpec
from stefanduo.solver import StepControl

pytestmark = pytest.mark.slow


def test_lifespan_slope_above_threshold():
    fit = lifespan_scaling(ProblemSpec(), "cosine", [160.0, 320.0, 640.0, 1280.0],
                           StepControl(n=256, horizon=1.0), jobs=2)
    T = [fit.T_est[A] for A in sorted(fit.T_est)]
    assert all(a > b for a, b in zip(T, T[1:]))
    assert -1.2 <= fit.slope <= -0.8


@pytest.mark.parametrize("A", [50.0, 80.0])
def test_moderate_amplitudes_do_not_blow_up(A):
    c = classify_run(simulate(ProblemSpec(), "cosine", A, StepControl(n=256, horizon=1.0)))
    assert c.label != BLOWUP_LABEL

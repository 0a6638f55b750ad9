import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stefanduo.grid import (ADVECTION_SCHEMES, MIN_NODES, NormalizedState, advection_code,
                            boundary_gradient, diffusion_spectral_radius, gradient_interior,
                            laplacian_matrix, laplacian_radial, nodes, pack, pde_rhs,
                            project_initial, to_physical)
from stefanduo.model import ProblemSpec, make_initial_data


@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_laplacian_exact_on_quadratic(N):
    # Lap(1 - s^2) = -2N everywhere, origin included
    n = 32
    s = nodes(n)
    lap = laplacian_radial(1.0 - s**2, n, N)
    np.testing.assert_allclose(lap, -2.0 * N, rtol=1e-12)


def test_laplacian_second_order():
    # u = cos(pi s / 2) in N = 3: Lap u = -(pi/2)^2 u - (N-1)/s (pi/2) sin(pi s / 2)
    errs = []
    for n in (64, 128, 256):
        s = nodes(n)
        k = np.pi / 2
        exact = -k**2 * np.cos(k * s[1:n]) - 2.0 / s[1:n] * k * np.sin(k * s[1:n])
        errs.append(np.max(np.abs(laplacian_radial(np.cos(k * s), n, 3)[1:] - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)


def test_gradients():
    n = 40
    s = nodes(n)
    v = 1.0 - s**2
    g = gradient_interior(v, n)
    assert g[0] == 0.0
    np.testing.assert_allclose(g[1:], -2.0 * s[1:n], atol=1e-12)
    assert boundary_gradient(v, n) == pytest.approx(-2.0)


def test_shape_checks():
    with pytest.raises(ValueError):
        laplacian_radial(np.zeros(5), 8, 3)
    with pytest.raises(ValueError):
        gradient_interior(np.zeros(3), 1)


def test_laplacian_matrix_matches_operator():
    n, N = 24, 3
    rng = np.random.default_rng(0)
    v = rng.random(n + 1)
    v[-1] = 0.0
    np.testing.assert_allclose(laplacian_matrix(n, N) @ v[:n], laplacian_radial(v, n, N),
                               rtol=1e-12, atol=1e-9)


def test_spectral_radius():
    n = 32
    rho = diffusion_spectral_radius(n, 3)
    eig = np.linalg.eigvals(laplacian_matrix(n, 3))
    assert rho == pytest.approx(np.max(np.abs(eig)))
    # bounded by the Gershgorin radius at the origin row
    assert rho <= 4.0 * 3 * n**2 + 1e-9
    assert np.all(eig.real < 0)


def test_project_initial(canon):
    data = make_initial_data(canon, "cosine", 3.0)
    st0 = project_initial(canon, data, 32)
    assert st0.w[0] == 3.0 and st0.w[-1] == 0.0 and st0.z[-1] == 0.0
    with pytest.raises(ValueError):
        project_initial(canon, data, MIN_NODES - 1)


def test_pack_roundtrip():
    st0 = NormalizedState(0.5, 1.2, 1.3, np.arange(5.0), np.arange(5.0) * 2)
    back = NormalizedState.unpack(0.5, st0.pack())
    assert back.h == 1.2 and back.g == 1.3
    np.testing.assert_array_equal(back.z, st0.z)


def test_to_physical():
    n = 16
    s = nodes(n)
    state = NormalizedState(0.0, 2.0, 1.0, 1.0 - s**2, 1.0 - s)
    assert to_physical(state, "u", 1.0) == pytest.approx(0.75)
    assert to_physical(state, "v", 0.5) == pytest.approx(0.5)
    np.testing.assert_array_equal(to_physical(state, "u", np.array([2.0, 3.0])), [0.0, 0.0])
    with pytest.raises(ValueError):
        to_physical(state, "x", 0.0)


def test_advection_codes():
    assert set(ADVECTION_SCHEMES) == {"central", "upwind", "hybrid"}
    with pytest.raises(ValueError):
        advection_code("lax")


def test_zero_state_is_stationary(canon):
    n = 32
    state = NormalizedState(0.0, 1.0, 1.0, np.zeros(n + 1), np.zeros(n + 1))
    dw, dz, dh, dg = pde_rhs(state, canon)
    assert not dw.any() and not dz.any() and dh == 0.0 and dg == 0.0


def test_front_speed_and_freeze():
    # w = c (1 - s^2): w_s(1) = -2c so h' = 2 mu c / h
    spec = ProblemSpec(mu=0.5, eta=2.0)
    n = 32
    s = nodes(n)
    state = NormalizedState(0.0, 2.0, 1.0, 3.0 * (1 - s**2), 1.0 - s**2)
    _, _, dh, dg = pde_rhs(state, spec)
    assert dh == pytest.approx(0.5 * 2 * 3.0 / 2.0)
    assert dg == pytest.approx(2.0 * 2 * 1.0 / 1.0)
    _, _, dh, dg = pde_rhs(state, spec, freeze_fronts=True)
    assert dh == 0.0 and dg == 0.0


def test_rhs_heat_part_matches_operator():
    # with negligible reaction and absorption the rhs is Lap_s w / h^2
    spec = ProblemSpec(a0=1e-300, lambda0=1e-300)
    n = 32
    s = nodes(n)
    w = np.cos(np.pi * s / 2)
    state = NormalizedState(0.0, 1.5, 1.5, w, w.copy())
    dw, _, _, _ = pde_rhs(state, spec, freeze_fronts=True)
    np.testing.assert_allclose(dw[:n], laplacian_radial(w, n, 3) / 1.5**2, rtol=1e-12)
    assert dw[n] == 0.0


def test_rhs_reaction_at_origin(canon):
    # at s = 0 the rhs is N * 2 (w1 - w0)/ds^2 / h^2 + a v0^p; absorption vanishes
    n = 16
    w = np.full(n + 1, 2.0)
    w[-1] = 0.0
    state = NormalizedState(0.0, 1.0, 1.0, w, w.copy())
    dw, _, _, _ = pde_rhs(state, canon, freeze_fronts=True)
    assert dw[0] == pytest.approx(4.0)


@pytest.mark.parametrize("scheme", ["central", "upwind", "hybrid"])
def test_schemes_agree_to_first_order(canon, scheme):
    n = 512
    data = make_initial_data(canon, "cosine", 0.5)
    state = project_initial(canon, data, n)
    ref, _, _, _ = pde_rhs(state, canon, advection="central")
    dw, _, _, _ = pde_rhs(state, canon, advection=scheme)
    assert np.max(np.abs(dw - ref)[1:n - 1]) < 5e-2 * np.max(np.abs(ref))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), h=st.floats(0.5, 3.0),
       scheme=st.sampled_from(["central", "upwind", "hybrid"]))
def test_symmetric_states_give_symmetric_rhs(seed, h, scheme):
    spec = ProblemSpec(gamma=-0.5, beta=-1.0)
    n = 24
    w = np.sort(np.random.default_rng(seed).random(n + 1))[::-1].copy()
    w[-1] = 0.0
    state = NormalizedState(0.0, h, h, w, w.copy())
    dw, dz, dh, dg = pde_rhs(state, spec, advection=scheme)
    np.testing.assert_array_equal(dw, dz)
    assert dh == dg


def test_overflow_raises(canon):
    n = 16
    w = np.full(n + 1, 1e200)
    w[-1] = 0.0
    state = NormalizedState(0.0, 1.0, 1.0, w, w.copy())
    with pytest.raises(FloatingPointError):
        pde_rhs(state, canon)


def test_pack_layout():
    y = pack([1, 2], [3, 4], 5, 6)
    np.testing.assert_array_equal(y, [1, 2, 3, 4, 5, 6])

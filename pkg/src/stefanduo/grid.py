"""Front-fixed discretisation on the unit interval.

Each component lives on its own moving ball; with ``s = r / h(t)`` the
u-equation becomes

    w_t = Lap_s w / h^2 + (h' s / h) w_s - lambda(h s) |w_s / h|^alpha + a(h s) v(h s)^p,
    h'  = -mu w_s(1) / h,

and symmetrically for ``z``/``g``. ``v(h s)`` is read off the z-grid at the
same physical radius. Nodes are ``s_j = j / n``; node ``n`` is the front and
always holds zero.

Solver state is packed into one float vector ``[w_0..w_n, z_0..z_n, h, g]``
so that Runge-Kutta stages are plain vector combinations.
"""
from __future__ import annotations

from dataclasses import dataclass

import math

import numba
import numpy as np

from .model import ProblemSpec

MIN_NODES = 16


@dataclass
class NormalizedState:
    t: float
    h: float
    g: float
    w: np.ndarray
    z: np.ndarray

    @property
    def n(self) -> int:
        return len(self.w) - 1

    def pack(self) -> np.ndarray:
        return pack(self.w, self.z, self.h, self.g)

    @classmethod
    def unpack(cls, t: float, y: np.ndarray) -> "NormalizedState":
        m = (len(y) - 2) // 2
        return cls(t=float(t), h=float(y[-2]), g=float(y[-1]),
                   w=y[:m].copy(), z=y[m:2 * m].copy())

    def copy(self) -> "NormalizedState":
        return NormalizedState(self.t, self.h, self.g, self.w.copy(), self.z.copy())


def pack(w, z, h, g) -> np.ndarray:
    return np.concatenate([np.asarray(w, float), np.asarray(z, float), [float(h), float(g)]])


def nodes(n: int) -> np.ndarray:
    return np.arange(n + 1) / n


def project_initial(spec: ProblemSpec, data, n: int) -> NormalizedState:
    """Sample the initial data on both normalised grids (front node forced to 0)."""
    if n < MIN_NODES:
        raise ValueError(f"n must be >= {MIN_NODES}")
    s = nodes(n)
    w = data.u0(spec.h0 * s)
    z = data.v0(spec.g0 * s)
    w[-1] = 0.0
    z[-1] = 0.0
    return NormalizedState(0.0, spec.h0, spec.g0, w, z)


def _check(values, n):
    if n < 2:
        raise ValueError("n must be >= 2")
    values = np.asarray(values, float)
    if values.shape != (n + 1,):
        raise ValueError(f"expected {n + 1} nodal values, got {values.shape}")
    return values


def laplacian_radial(values, n: int, N: int) -> np.ndarray:
    """Radial Laplacian in s at nodes 0..n-1.

    The origin uses the mirror ghost ``v_{-1} = v_1`` and the limit
    ``v_ss + (N-1)/s v_s -> N v_ss``.
    """
    v = _check(values, n)
    ds = 1.0 / n
    out = np.empty(n)
    out[0] = N * 2.0 * (v[1] - v[0]) / ds**2
    s = nodes(n)[1:n]
    out[1:] = ((v[2:] - 2.0 * v[1:-1] + v[:-2]) / ds**2
               + (N - 1) / s * (v[2:] - v[:-2]) / (2.0 * ds))
    return out


def gradient_interior(values, n: int) -> np.ndarray:
    """Central first differences at nodes 0..n-1, exactly 0 at the origin."""
    v = _check(values, n)
    out = np.empty(n)
    out[0] = 0.0
    out[1:] = (v[2:] - v[:-2]) * (n / 2.0)
    return out


def boundary_gradient(values, n: int) -> float:
    """Second-order one-sided derivative at s = 1."""
    v = _check(values, n)
    return float((3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) * (n / 2.0))


def to_physical(state: NormalizedState, which: str, r):
    """Linear interpolation of u (``which='u'``) or v at physical radius r."""
    vals, front = (state.w, state.h) if which == "u" else (state.z, state.g)
    if which not in ("u", "v"):
        raise ValueError("which must be 'u' or 'v'")
    r = np.asarray(r, float)
    x = r / front * state.n
    out = np.interp(x, np.arange(state.n + 1), vals, right=0.0)
    out = np.where(r >= front, 0.0, out)
    return float(out) if out.ndim == 0 else out


def spec_params(spec: ProblemSpec) -> tuple:
    return (int(spec.N), float(spec.p), float(spec.alpha), float(spec.gamma),
            float(spec.beta), float(spec.a0), float(spec.lambda0),
            float(spec.mu), float(spec.eta))


CENTRAL, UPWIND, HYBRID = 0, 1, 2
ADVECTION_SCHEMES = {"central": CENTRAL, "upwind": UPWIND, "hybrid": HYBRID}


def advection_code(name: str) -> int:
    try:
        return ADVECTION_SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown advection scheme {name!r}") from None


@numba.njit(cache=True, inline="always")
def _pow(x, e):
    # common exponents avoid the general pow
    if e == 1.0:
        return x
    if e == 2.0:
        return x * x
    if e == 0.5:
        return math.sqrt(x)
    if e == 1.5:
        return x * math.sqrt(x)
    return x ** e


@numba.njit(cache=True)
def _component(v, other, front, other_front, fdot, n, N, p, alpha, gamma, beta,
               a0, lam0, scheme, out, off, stats):
    ds = 1.0 / n
    inv_ds2 = 1.0 / (ds * ds)
    inv_f2 = 1.0 / (front * front)
    ratio = front / other_front
    same = front == other_front
    for j in range(n):
        s = j * ds
        r = front * s
        lam = lam0 if beta == 0.0 else lam0 * (1.0 + r) ** beta
        if j == 0:
            lap = N * 2.0 * (v[1] - v[0]) * inv_ds2
            transport = 0.0
            diag = 2.0 * N * inv_ds2 * inv_f2
            adv_rate = 0.0
            absorb = 0.0  # symmetric gradient vanishes at the origin
        else:
            grad = (v[j + 1] - v[j - 1]) * (0.5 * n)
            lap = (v[j + 1] - 2.0 * v[j] + v[j - 1]) * inv_ds2 + (N - 1) / s * grad
            diag = 2.0 * inv_ds2 * inv_f2
            pc = grad / front
            apc = abs(pc)
            pa1 = _pow(apc, alpha - 1.0) if apc > 0.0 else 0.0
            q = alpha * lam * pa1 * 0.5 * n / front
            use_central = scheme == CENTRAL
            if scheme == HYBRID:
                left = (inv_ds2 - (N - 1) / s * 0.5 * n) * inv_f2 - fdot * s * 0.5 * n / front
                right = (inv_ds2 + (N - 1) / s * 0.5 * n) * inv_f2
                if pc < 0.0:
                    left -= q
                else:
                    right -= q
                use_central = left >= 0.0 and right >= 0.0
            if use_central:
                transport = fdot * s * grad / front
                absorb = lam * pa1 * apc
                adv_rate = 0.0
            else:
                fwd = (v[j + 1] - v[j]) * n
                bwd = (v[j] - v[j - 1]) * n
                transport = fdot * s * fwd / front
                pm = bwd / front if bwd > 0.0 else 0.0
                pp = -fwd / front if fwd < 0.0 else 0.0
                slope = pm if pm > pp else pp
                sa1 = _pow(slope, alpha - 1.0) if slope > 0.0 else 0.0
                absorb = lam * sa1 * slope
                adv_rate = (fdot * s / front + alpha * lam * sa1) * n / front
        if same:
            vo = other[j]
        else:
            x = j * ratio
            if x >= n:
                vo = 0.0
            else:
                k = int(x)
                frac = x - k
                vo = other[k] * (1.0 - frac) + other[k + 1] * frac
        if vo > 0.0:
            a = a0 if gamma == 0.0 else a0 * (1.0 + r) ** gamma
            vp1 = _pow(vo, p - 1.0)
            src = a * vp1 * vo
            rate = p * a * vp1
        else:
            src = 0.0
            rate = 0.0
        react = src - absorb
        out[off + j] = lap * inv_f2 + transport + react
        if abs(react) > stats[0]:
            stats[0] = abs(react)
        if adv_rate + rate > stats[1]:
            stats[1] = adv_rate + rate
        if diag + adv_rate > stats[2]:
            stats[2] = diag + adv_rate
        if adv_rate > stats[3]:
            stats[3] = adv_rate
    out[off + n] = 0.0


@numba.njit(cache=True)
def rhs_kernel(y, n, N, p, alpha, gamma, beta, a0, lam0, mu, eta, freeze, scheme, out, stats):
    """Fill ``out`` with d/dt of the packed state.

    ``stats`` receives, in order: max |reaction term|, a bound on the
    non-diffusive Jacobian rate, the largest diagonal rate (positivity bound
    for an Euler stage) and the largest upwinded transport rate.
    """
    m = n + 1
    w = y[:m]
    z = y[m:2 * m]
    h = y[2 * m]
    g = y[2 * m + 1]
    if freeze:
        hdot = 0.0
        gdot = 0.0
    else:
        hdot = -mu * (3.0 * w[n] - 4.0 * w[n - 1] + w[n - 2]) * (0.5 * n) / h
        gdot = -eta * (3.0 * z[n] - 4.0 * z[n - 1] + z[n - 2]) * (0.5 * n) / g
    for i in range(4):
        stats[i] = 0.0
    _component(w, z, h, g, hdot, n, N, p, alpha, gamma, beta, a0, lam0, scheme, out, 0, stats)
    _component(z, w, g, h, gdot, n, N, p, alpha, gamma, beta, a0, lam0, scheme, out, m, stats)
    out[2 * m] = hdot
    out[2 * m + 1] = gdot


def pde_rhs(state: NormalizedState, spec: ProblemSpec, freeze_fronts: bool = False,
            advection: str = "central"):
    """Time derivatives ``(dw/dt, dz/dt, dh/dt, dg/dt)`` of a state.

    ``advection`` selects how the first-order terms (mesh transport and the
    gradient absorption) are differenced: ``"central"`` everywhere,
    ``"upwind"`` (forward transport, Godunov absorption) everywhere, or
    ``"hybrid"``, which stays central wherever that keeps the node's
    neighbour weights non-negative and upwinds elsewhere.

    Raises FloatingPointError when a non-finite value appears (overflow).
    """
    n = state.n
    if len(state.z) != n + 1:
        raise ValueError("w and z must share the resolution n")
    y = state.pack()
    out = np.empty_like(y)
    stats = np.zeros(4)
    rhs_kernel(y, n, *spec_params(spec), bool(freeze_fronts), advection_code(advection), out, stats)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite right-hand side (overflow)")
    m = n + 1
    return out[:m], out[m:2 * m], float(out[-2]), float(out[-1])


def laplacian_matrix(n: int, N: int) -> np.ndarray:
    """Dense matrix of ``laplacian_radial`` acting on nodes 0..n-1 (front value 0)."""
    ds = 1.0 / n
    L = np.zeros((n, n))
    L[0, 0] = -2.0 * N / ds**2
    L[0, 1] = 2.0 * N / ds**2
    for j in range(1, n):
        s = j * ds
        L[j, j] = -2.0 / ds**2
        L[j, j - 1] = 1.0 / ds**2 - (N - 1) / (2.0 * s * ds)
        if j + 1 < n:
            L[j, j + 1] = 1.0 / ds**2 + (N - 1) / (2.0 * s * ds)
    return L


_RHO_CACHE: dict = {}


def diffusion_spectral_radius(n: int, N: int) -> float:
    """Largest |eigenvalue| of the discrete radial Laplacian in s (h = 1)."""
    key = (n, N)
    if key not in _RHO_CACHE:
        _RHO_CACHE[key] = float(np.max(np.abs(np.linalg.eigvals(laplacian_matrix(n, N)))))
    return _RHO_CACHE[key]

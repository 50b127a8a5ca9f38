"""Closed-form solutions, scenario initial data and a PDE-residual oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .models import initial_state
from .spectral import SpectralGrid

# periodicity-matched half widths for the gray-soliton setups
GRAY1_HALF_WIDTH = 31.970600318475647
GRAY2_HALF_WIDTH = 409.97784129346803


def _wrap(xi, length):
    return (xi + 0.5 * length) % length - 0.5 * length


# BBM -------------------------------------------------------------------------------


def bbm_parameters(c: float) -> tuple[float, float]:
    """Amplitude ``A = 3(c-1)`` and width ``k = sqrt(1 - 1/c)/2`` of the solitary wave."""
    if not c > 1:
        raise ValueError("BBM solitary waves need c > 1")
    return 3.0 * (c - 1.0), 0.5 * math.sqrt(1.0 - 1.0 / c)


def bbm_solitary(t, x, x0: float = 0.0, c: float = 1.3, length: float | None = None):
    """``1 + A sech(k (x - x0 - c t))^2``; wrapped periodically when ``length`` is given."""
    a, k = bbm_parameters(c)
    xi = np.asarray(x, dtype=float) - x0 - c * t
    if length is not None:
        xi = _wrap(xi, length)
    return 1.0 + a / np.cosh(k * xi) ** 2


def bbm_two_wave(x):
    return bbm_solitary(0.0, x, -20.0, 1.3) + bbm_solitary(0.0, x, 20.0, 1.2) - 1.0


BBM_S5_SPEED = 0.5 * (1.0 + math.sqrt(5.0))


def bbm_s5_initial(x):
    """Benchmark solitary wave ``(3 sqrt5 - 3)/2 sech((sqrt5 - 1)/4 x)^2`` on the unit background."""
    return bbm_solitary(0.0, x, 0.0, BBM_S5_SPEED)


# KdV ---------------------------------------------------------------------------------


def kdv_interaction(ki: float, kj: float) -> float:
    return ((ki - kj) / (ki + kj)) ** 2


@dataclass(frozen=True)
class KdvSolitons:
    ks: tuple[float, ...]
    x0s: tuple[float, ...]
    interaction: Callable[[float, float], float] = kdv_interaction

    def __post_init__(self):
        if len(self.ks) != len(self.x0s):
            raise ValueError("ks and x0s must have equal length")
        if len(set(self.ks)) != len(self.ks) or min(self.ks) <= 0:
            raise ValueError("wave numbers must be positive and distinct")

    def __call__(self, t, x):
        return kdv_multisoliton(t, x, self.ks, self.x0s, self.interaction)


def kdv_multisoliton(t, x, ks: Sequence[float], x0s: Sequence[float], interaction=kdv_interaction):
    """Hirota solution ``12 d^2/dx^2 log F`` with ``F = sum_S A_S exp(sum_{i in S} eta_i)``.

    Uses ``F F'' - F'^2 = 1/2 sum_{S,T} w_S w_T (kappa_S - kappa_T)^2`` with
    ``kappa_S = sum_{i in S} k_i``, which has no cancellation; exponents are
    shifted by their pointwise maximum.
    """
    x = np.asarray(x, dtype=float)
    n = len(ks)
    eta = [k * (x - x0) - k**3 * t for k, x0 in zip(ks, x0s)]
    expo, kappa = [], []
    for r in range(n + 1):
        for subset in itertools.combinations(range(n), r):
            coef = 1.0
            for i, j in itertools.combinations(subset, 2):
                coef *= interaction(ks[i], ks[j])
            e = sum((eta[i] for i in subset), np.zeros_like(x))
            expo.append(e + math.log(coef))
            kappa.append(sum(ks[i] for i in subset))
    expo = np.array(expo)
    w = np.exp(expo - expo.max(axis=0))
    kappa = np.array(kappa)[:, None]
    f = w.sum(axis=0)
    num = 0.5 * np.einsum("s...,t...,st->...", w, w, (kappa - kappa.T) ** 2)
    return 12.0 * num / f**2


KDV_TWO_SOLITON = KdvSolitons((0.75, 0.5), (-50.0, 50.0))
KDV_THREE_SOLITON = KdvSolitons((0.75, 0.5, 0.25), (-100.0, 0.0, 100.0))


def kdv_soliton(t, x, k: float = 0.75, x0: float = 0.0, length: float | None = None):
    """Single soliton ``3 k^2 sech(k (x - x0 - k^2 t) / 2)^2``."""
    xi = np.asarray(x, dtype=float) - x0 - k**2 * t
    if length is not None:
        xi = _wrap(xi, length)
    return 3.0 * k**2 / np.cosh(0.5 * k * xi) ** 2


# NLS -----------------------------------------------------------------------------------


def nls_bright_soliton(t, x):
    """``sech(x + 4t) exp(-i(2x + 3t))``, a solution for ``beta = 2``."""
    x = np.asarray(x, dtype=float)
    return np.exp(-1j * (2 * x + 3 * t)) / np.cosh(x + 4 * t)


def nls_sech_soliton(t, x, amplitude=1.0, velocity=0.0, x0=0.0, phase=0.0, beta=2.0):
    """``a sqrt(2/beta) sech(a (x - x0 - v t)) exp(i (v x / 2 + (a^2 - v^2/4) t + phase))``."""
    x = np.asarray(x, dtype=float)
    a, v = amplitude, velocity
    env = a * math.sqrt(2.0 / beta) / np.cosh(a * (x - x0 - v * t))
    return env * np.exp(1j * (0.5 * v * x + (a * a - 0.25 * v * v) * t + phase))


NLS_TWO_SOLITONS = (
    dict(amplitude=1.0, velocity=2.0, x0=-10.0, phase=0.0),
    dict(amplitude=1.5, velocity=-1.0, x0=10.0, phase=0.5),
)
NLS_THREE_SOLITONS = (
    dict(amplitude=1.0, velocity=2.0, x0=-12.0, phase=0.0),
    dict(amplitude=1.4, velocity=0.0, x0=0.0, phase=1.0),
    dict(amplitude=0.8, velocity=-2.5, x0=14.0, phase=2.0),
)


def nls_soliton_sum(x, solitons, beta=2.0):
    return sum(nls_sech_soliton(0.0, x, beta=beta, **s) for s in solitons)


@dataclass(frozen=True)
class GraySoliton:
    b0: float = 1.5
    b1: float = 1.0
    c: float = 2.0 * math.sqrt(2.0)
    length: float = 2 * GRAY1_HALF_WIDTH

    def __post_init__(self):
        if not 0 < self.b1 < self.b0:
            raise ValueError("need 0 < b1 < b0")

    @property
    def kappa(self) -> float:
        return 0.5 * (self.c - math.sqrt(2 * self.b1))

    @property
    def omega(self) -> float:
        return self.b0 - 0.25 * (self.c**2 - 2 * self.b1)

    def __call__(self, t, x):
        xi = _wrap(np.asarray(x, dtype=float) - self.c * t, self.length)
        b0, b1 = self.b0, self.b1
        s = math.sqrt(0.5 * (b0 - b1))
        shape = 1j * math.sqrt(b1 / b0) + math.sqrt(1 - b1 / b0) * np.tanh(s * xi)
        return math.sqrt(b0) * np.exp(1j * (self.kappa * xi - self.omega * t)) * shape


@dataclass(frozen=True)
class TwoGraySolitons:
    a1: float = 1.0
    a3: float = 1.5
    k: float = 2.0
    length: float = 2 * GRAY2_HALF_WIDTH

    def __post_init__(self):
        if not 0 < self.a1 < self.a3:
            raise ValueError("need 0 < a1 < a3")

    @property
    def mu(self) -> float:
        return 4.0 * math.sqrt(self.a1 * (self.a3 - self.a1))

    @property
    def p(self) -> float:
        return math.sqrt(self.a3 - self.a1)

    def steady(self, t, x):
        a1, a3, mu, p = self.a1, self.a3, self.mu, self.p
        ch_t, sh_t = math.cosh(0.5 * mu * t), math.sinh(0.5 * mu * t)
        ch_x = np.cosh(2 * p * x / math.sqrt(2.0))
        num = (2 * a3 - 4 * a1) * ch_t - 2 * math.sqrt(a1 * a3) * ch_x - 1j * mu * sh_t
        den = 2 * math.sqrt(a3) * ch_t + 2 * math.sqrt(a1) * ch_x
        return np.exp(-1j * a3 * t) * num / den

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        k = self.k
        xi = _wrap(x - 2 * k * t, self.length)
        return np.exp(1j * (k * x - k * k * t)) * self.steady(t, xi)


# residual oracle ---------------------------------------------------------------------

# eighth-order central difference weights for the first derivative, offsets 1..4
_FD8 = (4 / 5, -1 / 5, 4 / 105, -1 / 280)


def time_derivative(closed_form, t, x, h=5e-3):
    # antisymmetric pairs, so time-independent data gives exactly zero
    out = 0.0
    for o, wt in enumerate(_FD8, start=1):
        out = out + wt * (closed_form(t + o * h, x) - closed_form(t - o * h, x))
    return out / h


def residual_oracle(equation: str, closed_form, t: float, grid: SpectralGrid, beta: float = 2.0, h: float = 5e-3):
    """Max-norm residual of the continuous PDE for a closed form at time ``t``.

    Space derivatives are spectral on ``grid``, the time derivative is an
    eighth-order central difference with step ``h``.  BBM is checked in the
    form ``u_t + (1 - d_xx)^{-1} u u_x`` so the difference quotient is never
    differentiated.
    """
    x = grid.node_coords
    k = 2 * np.pi * np.fft.fftfreq(grid.n_nodes, d=grid.dx)
    n = grid.n_nodes
    if n % 2 == 0:
        k[n // 2] = 0.0

    def dx(f, order=1):
        return np.fft.ifft((1j * k) ** order * np.fft.fft(f))

    u = closed_form(t, x)
    ut = time_derivative(closed_form, t, x, h)
    if equation == "bbm":
        flux = np.fft.fft(u * dx(u).real) / (1 + k**2)
        res = ut + np.fft.ifft(flux).real
    elif equation == "kdv":
        res = ut + u * dx(u).real + dx(u, 3).real
    elif equation == "nls":
        res = 1j * ut + dx(u, 2) + beta * np.abs(u) ** 2 * u
    else:
        raise ValueError(f"no residual for equation {equation!r}")
    return float(np.max(np.abs(res)))


# fine reference ------------------------------------------------------------------------


class FineReference:
    """Baseline order-5 run on a refined grid used where no closed form exists.

    Uses ``refine`` times the nodes and ``dt / substeps``.  ``at(t)``
    advances to ``t`` (the last substep is shortened to land exactly) and
    returns the state truncated to the coarse grid.  Requests earlier than
    the current time restart from the initial data, so forward-ordered
    queries are cheapest.

    Parameters
    ----------
    model_factory : callable
        ``grid -> Model``, so the reference uses the same equation and
        parameters on the refined grid.
    initial : callable
        ``x -> values`` on the refined grid's nodes, anything accepted by
        ``initial_state``.
    """

    def __init__(self, model_factory, grid: SpectralGrid, initial, dt: float, refine: int = 4, substeps: int = 100,
                 tableau: str = "ark5", t0: float = 0.0):
        from .integrators import stepper_for
        from .tableaux import get_tableau

        self.coarse = grid
        self.fine = SpectralGrid(grid.xmin, grid.xmax, refine * grid.n_nodes)
        self.model = model_factory(self.fine)
        self.tableau = get_tableau(tableau)
        self._step = stepper_for(self.model, self.tableau)
        self.h = dt / substeps
        self.t0 = t0
        self._initial = initial_state(self.model, initial(self.fine.node_coords))
        self.restarts = 0
        self._reset()

    def _reset(self):
        self.state = self._initial.copy()
        self.t = self.t0

    def at(self, t: float) -> np.ndarray:
        if t < self.t0:
            raise ValueError(f"reference starts at {self.t0}, cannot evaluate at {t}")
        if t < self.t - 1e-13 * max(1.0, abs(t)):
            self.restarts += 1
            self._reset()
        while t - self.t > 1e-14 * max(1.0, abs(t)):
            h = min(self.h, t - self.t)
            self.state = self._step(self.state, self.model, self.tableau, h)
            self.t = t if h < self.h else self.t + h
        return self.coarse.truncate(self.state)

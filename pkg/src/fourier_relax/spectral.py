"""Fourier Galerkin backbone on a periodic interval.

Fields are stored modally as the half spectrum ``c[0..N//2]`` of a real
trigonometric polynomial.  Coefficients are normalized like ``rfft / N`` and
are measured with the phase origin at the left end of the domain, so that on
``[xmin, xmax)``::

    f(x) = sum_j w_j * Re(c_j * exp(i k_j (x - xmin)))

with ``w_0 = 1``, ``w_j = 2`` for interior modes and ``w_{N/2} = 1`` for the
Nyquist mode of an even ``N``.  The Nyquist coefficient is kept as a full
complex number, which gives ``N + 1`` real degrees of freedom for even ``N``.
Nodal samples on ``N`` points cannot see its imaginary part, which is why the
modal representation is the primary one.

All grid methods operate on arrays whose last axis is the half spectrum, so
several fields can be processed in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Sequence

import numpy as np


class ContractError(ValueError):
    """Raised when an operation is called with incompatible arguments."""


class SingularOperatorError(ArithmeticError):
    """Raised when a diagonal modal symbol is not finite on the grid."""


def is_7_smooth(m: int) -> bool:
    if m < 1:
        return False
    for p in (2, 3, 5, 7):
        while m % p == 0:
            m //= p
    return m == 1


def smooth_above(bound: float) -> int:
    """Smallest integer strictly greater than ``bound`` with prime factors in {2,3,5,7}."""
    m = int(np.floor(bound)) + 1
    while not is_7_smooth(m):
        m += 1
    return m


def dealias_grid_size(n: int, degree: int) -> int:
    """Smallest 7-smooth ``M > (degree + 1) n / 2``.

    On ``M`` nodes the product of ``degree`` fields with ``n`` modes has no
    aliasing into the retained modes, so truncation gives the exact L2
    projection.
    """
    if n < 2 or degree < 2:
        raise ContractError(f"need n >= 2 and degree >= 2, got n={n}, degree={degree}")
    return smooth_above((degree + 1) * n / 2)


def quadrature_grid_size(n: int, degree: int) -> int:
    """Smallest 7-smooth ``M > degree n / 2 + 1``; exact for the mean of a degree-``degree`` integrand."""
    return smooth_above(degree * n / 2 + 1)


@lru_cache(maxsize=256)
def _eval_factor(n: int, m: int) -> np.ndarray:
    f = np.full(n // 2 + 1, float(m))
    if n % 2 == 0 and m > n:
        # weight 1 on the source grid becomes an interior mode of weight 2
        f[-1] *= 0.5
    f.flags.writeable = False
    return f


@lru_cache(maxsize=256)
def _truncate_factor(n: int, m: int) -> np.ndarray:
    f = np.full(n // 2 + 1, 1.0 / m)
    if n % 2 == 0 and m > n:
        f[-1] *= 2.0
    f.flags.writeable = False
    return f


# padded sizes up to this use cached dense transforms instead of FFTs; at
# these sizes numpy's per-call FFT overhead dominates
DENSE_LIMIT = 192


@lru_cache(maxsize=64)
def _dense_ops(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Real matrices for evaluation on and projection from ``m`` nodes.

    ``E`` has shape ``(2 n_modes, m)`` and acts on the half spectrum viewed
    as interleaved (re, im) floats; ``P`` has shape ``(m, 2 n_modes)`` and
    returns interleaved floats of the truncated half spectrum.
    """
    nm = n // 2 + 1
    theta = 2 * np.pi * np.outer(np.arange(nm), np.arange(m)) / m
    w = np.full(nm, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    e = np.empty((2 * nm, m))
    e[0::2] = w[:, None] * np.cos(theta)
    e[1::2] = -w[:, None] * np.sin(theta)
    t = _truncate_factor(n, m) if m > n else np.full(nm, 1.0 / m)
    p = np.empty((m, 2 * nm))
    p[:, 0::2] = (t[:, None] * np.cos(theta)).T
    p[:, 1::2] = (-t[:, None] * np.sin(theta)).T
    e.flags.writeable = False
    p.flags.writeable = False
    return e, p


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Uniform periodic grid on ``[xmin, xmax)`` with ``n_nodes`` points."""

    xmin: float
    xmax: float
    n_nodes: int

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ContractError("n_nodes must be positive")
        if not self.xmax > self.xmin:
            raise ContractError("xmax must exceed xmin")

    @property
    def length(self) -> float:
        return self.xmax - self.xmin

    @property
    def n_modes(self) -> int:
        return self.n_nodes // 2 + 1

    @property
    def has_nyquist(self) -> bool:
        return self.n_nodes % 2 == 0

    @property
    def dx(self) -> float:
        return self.length / self.n_nodes

    @cached_property
    def node_coords(self) -> np.ndarray:
        return self.nodes(self.n_nodes)

    def nodes(self, m: int) -> np.ndarray:
        return self.xmin + self.length * np.arange(m) / m

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_modes) / self.length

    @cached_property
    def parseval_weights(self) -> np.ndarray:
        """Weights ``q_j`` with ``<f, g> = sum_j q_j Re(c_j conj(d_j))``."""
        w = np.full(self.n_modes, 2.0 * self.length)
        w[0] = self.length
        if self.has_nyquist:
            w[-1] = 0.5 * self.length
        return w

    def same_as(self, other: "SpectralGrid") -> bool:
        return self is other or (
            self.xmin == other.xmin and self.xmax == other.xmax and self.n_nodes == other.n_nodes
        )

    # transforms -------------------------------------------------------

    def forward(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.n_nodes:
            raise ContractError(f"expected {self.n_nodes} nodal values, got {values.shape[-1]}")
        return np.fft.rfft(values, axis=-1) / self.n_nodes

    def pad(self, coeffs: np.ndarray, m: int) -> np.ndarray:
        """Half spectrum of the same function on an ``m``-node grid, ``m >= N``."""
        n = self.n_nodes
        if m < n:
            raise ContractError(f"cannot evaluate {n}-node field on {m} < {n} nodes")
        if m == n:
            return coeffs
        out = np.zeros(coeffs.shape[:-1] + (m // 2 + 1,), dtype=complex)
        out[..., : self.n_modes] = coeffs
        if self.has_nyquist:
            # weight 1 on the source grid becomes an interior mode of weight 2
            out[..., self.n_modes - 1] *= 0.5
        return out

    def evaluate(self, coeffs: np.ndarray, m: int | None = None) -> np.ndarray:
        m = self.n_nodes if m is None else m
        if m < self.n_nodes:
            raise ContractError(f"cannot evaluate {self.n_nodes}-node field on {m} < {self.n_nodes} nodes")
        # irfft zero-pads; padding and normalization are folded into one factor
        return np.fft.irfft(coeffs * _eval_factor(self.n_nodes, m), n=m, axis=-1)

    def truncate(self, padded: np.ndarray) -> np.ndarray:
        """Exact L2 projection of an ``M``-grid half spectrum (``M > N``) onto this grid's space."""
        out = padded[..., : self.n_modes].copy()
        if self.has_nyquist:
            out[..., -1] *= 2.0
        return out

    def project_nodal(self, values: np.ndarray) -> np.ndarray:
        """``truncate(rfft(values) / M)`` for samples on ``M > N`` nodes."""
        m = values.shape[-1]
        return np.fft.rfft(values, axis=-1)[..., : self.n_modes] * _truncate_factor(self.n_nodes, m)

    # linear operators ---------------------------------------------------

    def derivative_symbol(self, order: int) -> np.ndarray:
        return (1j * self.wavenumbers) ** order

    def derivative(self, coeffs: np.ndarray, order: int = 1) -> np.ndarray:
        if order < 0:
            raise ContractError("derivative order must be non-negative")
        return coeffs * self.derivative_symbol(order)

    def apply_symbol(self, coeffs: np.ndarray, symbol: Callable[[np.ndarray], np.ndarray] | np.ndarray):
        values = symbol(self.wavenumbers) if callable(symbol) else np.asarray(symbol)
        values = np.broadcast_to(values, (self.n_modes,))
        if not np.all(np.isfinite(values)):
            bad = self.wavenumbers[~np.isfinite(values)]
            raise SingularOperatorError(f"symbol is not finite at wavenumbers {bad}")
        return coeffs * values

    # quadratic forms ----------------------------------------------------

    def inner(self, a: np.ndarray, b: np.ndarray) -> float | np.ndarray:
        """Exact L2 inner product ``∫ f g dx`` via Parseval."""
        return np.sum(self.parseval_weights * (a * np.conj(b)).real, axis=-1)

    def norm2(self, a: np.ndarray) -> float | np.ndarray:
        return np.sum(self.parseval_weights * (a.real**2 + a.imag**2), axis=-1)


def _as_floats(c: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(c, dtype=complex).view(float)


class PaddedWorkspace:
    """Zero-padded evaluation helpers for one grid.

    Holds the padded sizes used for projected products and for exact
    integrals.  Not meant to be shared between threads.
    """

    def __init__(self, grid: SpectralGrid):
        self.grid = grid
        self.source_n = grid.n_nodes
        self._proj_sizes: dict[int, int] = {}
        self._quad_sizes: dict[int, int] = {}

    def projection_size(self, degree: int) -> int:
        degree = max(degree, 2)
        if degree not in self._proj_sizes:
            self._proj_sizes[degree] = dealias_grid_size(max(self.source_n, 2), degree)
        return self._proj_sizes[degree]

    def quadrature_size(self, degree: int) -> int:
        if degree not in self._quad_sizes:
            self._quad_sizes[degree] = quadrature_grid_size(self.source_n, max(degree, 1))
        return self._quad_sizes[degree]

    def project(self, pointwise, inputs: Sequence[np.ndarray], degree: int) -> np.ndarray:
        """``P(pointwise(*inputs))`` for a polynomial map of the given degree."""
        m = self.projection_size(degree)
        if m <= DENSE_LIMIT:
            e, p = _dense_ops(self.source_n, m)
            nodal = [_as_floats(c) @ e for c in inputs]
            values = np.ascontiguousarray(pointwise(*nodal), dtype=float)
            return (values @ p).view(complex)
        nodal = [self.grid.evaluate(c, m) for c in inputs]
        return self.grid.project_nodal(np.asarray(pointwise(*nodal)))

    def nodal(self, coeffs: np.ndarray, m: int) -> np.ndarray:
        """Samples on ``m`` nodes, via a dense transform for small ``m``."""
        if m <= DENSE_LIMIT:
            return _as_floats(coeffs) @ _dense_ops(self.source_n, m)[0]
        return self.grid.evaluate(coeffs, m)

    def integrate(self, pointwise, inputs: Sequence[np.ndarray], degree: int) -> float:
        """Exact ``∫ pointwise(*inputs) dx`` for a polynomial map of the given degree."""
        m = self.quadrature_size(degree)
        nodal = [self.nodal(c, m) for c in inputs]
        return float(self.grid.length * np.mean(pointwise(*nodal)))


# Value-level API ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ModalField:
    """A real trigonometric polynomial stored as its half spectrum."""

    grid: SpectralGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n_modes,):
            raise ContractError(f"expected {self.grid.n_modes} coefficients, got shape {c.shape}")
        c[0] = c[0].real
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __add__(self, other: "ModalField") -> "ModalField":
        _check_same_grid(self, other)
        return ModalField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "ModalField") -> "ModalField":
        _check_same_grid(self, other)
        return ModalField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "ModalField":
        return ModalField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "ModalField":
        return ModalField(self.grid, -self.coeffs)


def _check_same_grid(*fields: ModalField):
    g = fields[0].grid
    for f in fields[1:]:
        if not g.same_as(f.grid):
            raise ContractError("fields live on different grids")


def forward_transform(values: Sequence[float], grid: SpectralGrid) -> ModalField:
    return ModalField(grid, grid.forward(np.asarray(values, dtype=float)))


def evaluate_on_grid(f: ModalField, m: int) -> np.ndarray:
    return f.grid.evaluate(f.coeffs, m)


def derivative(f: ModalField, order: int = 1) -> ModalField:
    return ModalField(f.grid, f.grid.derivative(f.coeffs, order))


def apply_diagonal_symbol(f: ModalField, symbol) -> ModalField:
    return ModalField(f.grid, f.grid.apply_symbol(f.coeffs, symbol))


def projected_nonlinearity(inputs: Sequence[ModalField], pointwise, degree: int = 2) -> ModalField:
    _check_same_grid(*inputs)
    grid = inputs[0].grid
    ws = PaddedWorkspace(grid)
    return ModalField(grid, ws.project(pointwise, [f.coeffs for f in inputs], degree))


def inner_product(f: ModalField, g: ModalField) -> float:
    _check_same_grid(f, g)
    return float(f.grid.inner(f.coeffs, g.coeffs))


def integral_of_nonlinearity(inputs: Sequence[ModalField], pointwise, degree: int) -> float:
    _check_same_grid(*inputs)
    ws = PaddedWorkspace(inputs[0].grid)
    return ws.integrate(pointwise, [f.coeffs for f in inputs], degree)

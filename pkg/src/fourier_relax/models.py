"""Fourier Galerkin semidiscretizations of BBM, KdV, NLS and hyperbolized NLS.

A state is a complex array of shape ``(n_fields, grid.n_modes)`` holding the
half spectra of the real fields (``u`` for BBM/KdV, ``(v, w)`` for NLS with
``u = v + i w``, and ``(v, w, nu, omega)`` for the hyperbolized system).

Each model splits its right-hand side into a nonstiff nonlinear part, which
is treated explicitly, and a stiff linear part that is diagonal in modal
space up to a small per-mode block.  The stiff part is described by the
per-mode matrices ``L_k`` so that implicit stages reduce to tiny dense
solves.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .spectral import DENSE_LIMIT, ContractError, ModalField, PaddedWorkspace, SpectralGrid, _dense_ops


class StageSolverSingularError(ArithmeticError):
    def __init__(self, wavenumber: float, z: complex):
        super().__init__(f"(I - z L_k) is singular for k={wavenumber!r}, z={z!r}")
        self.wavenumber = wavenumber
        self.z = z


class InvariantTriple(NamedTuple):
    mass: float
    momentum: float
    energy: float


class Model:
    """Common machinery; subclasses define the split RHS and the invariants."""

    name = "model"
    field_names: tuple[str, ...] = ()
    explicit_only = False

    def __init__(self, grid: SpectralGrid):
        self.grid = grid
        self.ws = PaddedWorkspace(grid)
        self._solver_cache: dict[float, np.ndarray] = {}

    @property
    def n_fields(self) -> int:
        return len(self.field_names)

    # state helpers ----------------------------------------------------

    def from_nodal(self, *values) -> np.ndarray:
        if len(values) != self.n_fields:
            raise ContractError(f"{self.name} needs {self.n_fields} fields, got {len(values)}")
        return np.stack([self.grid.forward(np.asarray(v, dtype=float)) for v in values])

    def to_nodal(self, state: np.ndarray, m: int | None = None) -> np.ndarray:
        return self.grid.evaluate(state, m)

    def fields(self, state: np.ndarray) -> list[ModalField]:
        return [ModalField(self.grid, c) for c in state]

    def check_state(self, state: np.ndarray):
        if state.shape != (self.n_fields, self.grid.n_modes):
            raise ContractError(
                f"{self.name} state must have shape {(self.n_fields, self.grid.n_modes)}, got {state.shape}"
            )

    # right-hand side ----------------------------------------------------

    def nonstiff(self, state: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def stiff_blocks(self) -> np.ndarray:
        """Per-mode matrices ``L_k`` of shape ``(n_modes, n_fields, n_fields)``."""
        return np.zeros((self.grid.n_modes, self.n_fields, self.n_fields), dtype=complex)

    def stiff(self, state: np.ndarray) -> np.ndarray:
        return np.einsum("kij,jk->ik", self._blocks, state)

    def rhs_split(self, state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.nonstiff(state), self.stiff(state)

    def rhs(self, state: np.ndarray) -> np.ndarray:
        nonstiff, stiff = self.rhs_split(state)
        return nonstiff + stiff

    @property
    def stiff_scale(self) -> float:
        """Largest row sum of ``|L_k|`` over all modes (an infinity-norm bound)."""
        if not hasattr(self, "_stiff_scale"):
            self._stiff_scale = float(np.abs(self._blocks).sum(axis=2).max(initial=0.0))
        return self._stiff_scale

    @property
    def _blocks(self) -> np.ndarray:
        if not hasattr(self, "_blocks_cache"):
            self._blocks_cache = self.stiff_blocks()
        return self._blocks_cache

    def implicit_solve(self, z: float, rhs: np.ndarray) -> np.ndarray:
        """Solve ``(I - z L) x = rhs`` mode by mode."""
        if z == 0:
            return rhs.copy()
        inv = self._solver_cache.get(z)
        if inv is None:
            eye = np.eye(self.n_fields)
            mats = eye[None, :, :] - z * self._blocks
            # conditioning, not det, since stiff blocks are badly scaled for small tau
            with np.errstate(all="ignore"):
                cond = np.linalg.cond(mats)
            bad = ~np.isfinite(cond) | (cond > 1e14)
            if np.any(bad):
                k = self.grid.wavenumbers[np.argmax(bad)]
                raise StageSolverSingularError(float(k), z)
            inv = np.linalg.inv(mats)
            if len(self._solver_cache) > 64:
                self._solver_cache.clear()
            self._solver_cache[z] = inv
        return np.einsum("kij,jk->ik", inv, rhs)

    # invariants -----------------------------------------------------------

    def mass(self, state: np.ndarray) -> float:
        raise NotImplementedError

    def momentum(self, state: np.ndarray) -> float:
        raise NotImplementedError

    def energy(self, state: np.ndarray) -> float:
        raise NotImplementedError

    def invariants(self, state: np.ndarray) -> InvariantTriple:
        return InvariantTriple(float(self.mass(state)), float(self.momentum(state)), float(self.energy(state)))

    def energy_on_line(self, base: np.ndarray, direction: np.ndarray):
        """``gamma -> energy(base + gamma * direction)``; models may precompute."""
        coeffs = self.energy_poly_on_line(base, direction)
        if coeffs is not None:
            return lambda gamma: polyval(coeffs, gamma)
        return lambda gamma: self.energy(base + gamma * direction)

    def energy_poly_on_line(self, base: np.ndarray, direction: np.ndarray) -> tuple | None:
        """Ascending coefficients of the energy along the line, if it is a polynomial there."""
        return None

    def _quadratic_on_line(self, quad, base, direction) -> np.ndarray:
        """Coefficients (ascending) of ``quad(base + gamma dir)`` by polarization."""
        q0, q2 = quad(base), quad(direction)
        return np.array([q0, quad(base + direction) - q0 - q2, q2])


def polyval(coeffs, x: float) -> float:
    """Horner evaluation of ascending coefficients on a Python float."""
    out = 0.0
    for c in reversed(coeffs):
        out = out * x + c
    return out


class _ScalarModel(Model):
    field_names = ("u",)

    def _half_square(self, u: np.ndarray) -> np.ndarray:
        return self.ws.project(lambda a: 0.5 * a * a, [u], 2)

    def mass(self, state):
        return self.grid.length * state[0, 0].real

    def cubic_integral(self, state):
        """``∫ u^3 / 6 dx``, exact."""
        return self.ws.integrate(lambda a: a**3 / 6.0, [state[0]], 3)

    def _cubic_on_line(self, base, direction) -> np.ndarray:
        """Coefficients of ``cubic_integral(base + gamma dir)`` from one set of samples."""
        m = self.ws.quadrature_size(3)
        both = self.ws.nodal(np.stack((base[0], direction[0])), m)
        ub, ud = both
        s0, s1 = both @ (ub * ub)
        s2, s3 = both @ (ud * ud)
        scale = self.grid.length / m
        return np.array([scale * s0 / 6, scale * s1 / 2, scale * s2 / 2, scale * s3 / 6])


class BBM(_ScalarModel):
    """``u_t + u u_x - u_txx = 0``; fully nonstiff."""

    name = "bbm"
    explicit_only = True

    def __init__(self, grid):
        super().__init__(grid)
        k = grid.wavenumbers
        self._symbol = -1j * k / (1.0 + k**2)
        self.nodal_ops = self._nodal_ops()

    def _nodal_ops(self):
        """Dense operators ``(E, G, S)`` of the RHS on small grids, else None.

        With ``a = x @ E`` the nodal samples of the interleaved float state
        ``x``, the RHS is ``(a * a) @ S`` and its own samples are
        ``(a * a) @ G``, so explicit stages can run entirely on samples.
        """
        m = self.ws.projection_size(2)
        if m > DENSE_LIMIT:
            return None
        e, p = _dense_ops(self.grid.n_nodes, m)
        sr, si = 0.5 * self._symbol.real, 0.5 * self._symbol.imag
        pr, pi = p[:, 0::2], p[:, 1::2]
        s = np.empty_like(p)
        s[:, 0::2] = pr * sr - pi * si
        s[:, 1::2] = pr * si + pi * sr
        # column-major is markedly faster for row-vector products here
        return e, np.asfortranarray(s @ e), np.asfortranarray(s)

    def nonstiff(self, state):
        self.check_state(state)
        return (self._symbol * self._half_square(state[0]))[None, :]

    def stiff(self, state):
        return np.zeros_like(state)

    def rhs(self, state):
        return self.nonstiff(state)

    def energy_poly_on_line(self, base, direction):
        return tuple(self._cubic_on_line(base, direction))

    def momentum(self, state):
        u = state[0]
        ux = self.grid.derivative(u)
        return 0.5 * (self.grid.norm2(u) + self.grid.norm2(ux))

    def momentum_form(self, coeffs: np.ndarray) -> float:
        """Quadratic form of the momentum applied to a single field."""
        return 0.5 * (self.grid.norm2(coeffs) + self.grid.norm2(self.grid.derivative(coeffs)))

    def energy(self, state):
        return self.cubic_integral(state)


class KdV(_ScalarModel):
    """``u_t + u u_x + u_xxx = 0``; the dispersive term is stiff."""

    name = "kdv"

    def __init__(self, grid):
        super().__init__(grid)
        self._dx = grid.derivative_symbol(1)

    def nonstiff(self, state):
        self.check_state(state)
        return (-self._dx * self._half_square(state[0]))[None, :]

    def stiff_blocks(self):
        return -self.grid.derivative_symbol(3)[:, None, None]

    def stiff(self, state):
        return -self.grid.derivative_symbol(3) * state

    def implicit_solve(self, z, rhs):
        if z == 0:
            return rhs.copy()
        denom = 1.0 + z * self.grid.derivative_symbol(3)
        if np.any(denom == 0):
            k = self.grid.wavenumbers[np.argmax(denom == 0)]
            raise StageSolverSingularError(float(k), z)
        return rhs / denom

    def momentum(self, state):
        return 0.5 * self.grid.norm2(state[0])

    def momentum_form(self, coeffs: np.ndarray) -> float:
        return 0.5 * self.grid.norm2(coeffs)

    def _energy_quadratic(self, state):
        return 0.5 * self.grid.norm2(self.grid.derivative(state[0]))

    def energy(self, state):
        return self._energy_quadratic(state) - self.cubic_integral(state)

    def energy_poly_on_line(self, base, direction):
        c = -self._cubic_on_line(base, direction)
        c[:3] += self._quadratic_on_line(self._energy_quadratic, base, direction)
        return tuple(c)


class NLS(Model):
    """``i u_t + u_xx + beta |u|^2 u = 0`` for ``u = v + i w``.

    With ``collocation=True`` the cubic term is evaluated on the ``N`` nodes
    without de-aliasing (Fourier collocation in the nonlinearity).
    """

    name = "nls"
    field_names = ("v", "w")

    def __init__(self, grid, beta: float = 1.0, collocation: bool = False):
        super().__init__(grid)
        self.beta = float(beta)
        self.collocation = collocation

    def _cubic(self, v, w):
        beta = self.beta

        def term(a, b):
            r = beta * (a * a + b * b)
            return np.stack([-r * b, r * a])

        if self.collocation:
            n = self.grid.n_nodes
            nodal = term(self.grid.evaluate(v, n), self.grid.evaluate(w, n))
            return self.grid.forward(nodal)
        return self.ws.project(term, [v, w], 3)

    def nonstiff(self, state):
        self.check_state(state)
        return self._cubic(state[0], state[1])

    def stiff_blocks(self):
        k2 = self.grid.wavenumbers**2
        blocks = np.zeros((self.grid.n_modes, 2, 2), dtype=complex)
        blocks[:, 0, 1] = k2
        blocks[:, 1, 0] = -k2
        return blocks

    def stiff(self, state):
        k2 = self.grid.wavenumbers**2
        return np.stack([k2 * state[1], -k2 * state[0]])

    def implicit_solve(self, z, rhs):
        if z == 0:
            return rhs.copy()
        zk2 = z * self.grid.wavenumbers**2
        det = 1.0 + zk2**2
        return np.stack([(rhs[0] + zk2 * rhs[1]) / det, (rhs[1] - zk2 * rhs[0]) / det])

    # quadratic invariants as (bi)linear forms, reused by the projection

    def mass_form(self, a, b=None):
        b = a if b is None else b
        return self.grid.inner(a[0], b[0]) + self.grid.inner(a[1], b[1])

    def momentum_form(self, a, b=None):
        # symmetric bilinear form with momentum_form(a, a) = 2 <v, w_x>
        b = a if b is None else b
        d = self.grid.derivative
        return self.grid.inner(a[0], d(b[1])) + self.grid.inner(b[0], d(a[1]))

    def momentum_direction(self, state):
        """Mass-metric gradient direction of the momentum, ``(w_x, -v_x)``."""
        d = self.grid.derivative
        return np.stack([d(state[1]), -d(state[0])])

    def mass(self, state):
        return self.mass_form(state)

    def momentum(self, state):
        return self.momentum_form(state)

    def quartic_integral(self, state):
        """``∫ (v^2 + w^2)^2 dx``, exact."""
        return self.ws.integrate(lambda a, b: (a * a + b * b) ** 2, [state[0], state[1]], 4)

    def _energy_quadratic(self, state):
        d = self.grid.derivative
        return self.grid.norm2(d(state[0])) + self.grid.norm2(d(state[1]))

    def energy(self, state):
        return self._energy_quadratic(state) - 0.5 * self.beta * self.quartic_integral(state)

    def energy_parts_on_line(self, base, direction) -> tuple[np.ndarray, np.ndarray]:
        """Ascending coefficients of the quadratic part and of ``∫ (v^2 + w^2)^2`` on the line."""
        quad = self._quadratic_on_line(self._energy_quadratic, base, direction)
        m = self.ws.quadrature_size(4)
        vb, wb, vd, wd = (self.ws.nodal(c, m) for c in (base[0], base[1], direction[0], direction[1]))
        rb, rd, x = vb * vb + wb * wb, vd * vd + wd * wd, vb * vd + wb * wd
        quart = (self.grid.length / m) * np.array(
            [np.sum(rb * rb), 4 * np.sum(rb * x), np.sum(4 * x * x + 2 * rb * rd), 4 * np.sum(x * rd), np.sum(rd * rd)]
        )
        return quad, quart

    def energy_poly_on_line(self, base, direction):
        quad, quart = self.energy_parts_on_line(base, direction)
        c = -0.5 * self.beta * quart
        c[:3] += quad
        return tuple(c)


class HypNLS(NLS):
    """First-order hyperbolic approximation of NLS with relaxation time ``tau``.

    Fields ``(v, w, nu, omega)``; all first-derivative couplings and the
    ``1/tau`` relaxation sources are in the stiff part.
    """

    name = "hypnls"
    field_names = ("v", "w", "nu", "omega")

    def __init__(self, grid, beta: float = 1.0, tau: float = 1e-3):
        if not tau > 0:
            raise ContractError("tau must be positive")
        super().__init__(grid, beta=beta)
        self.tau = float(tau)

    def nonstiff(self, state):
        self.check_state(state)
        out = np.zeros_like(state)
        out[:2] = self._cubic(state[0], state[1])
        return out

    def stiff_blocks(self):
        ik = 1j * self.grid.wavenumbers
        t = self.tau
        blocks = np.zeros((self.grid.n_modes, 4, 4), dtype=complex)
        blocks[:, 0, 3] = -ik
        blocks[:, 1, 2] = ik
        blocks[:, 2, 1] = ik / t
        blocks[:, 2, 3] = -1.0 / t
        blocks[:, 3, 0] = -ik / t
        blocks[:, 3, 2] = 1.0 / t
        return blocks

    def stiff(self, state):
        d = self.grid.derivative
        v, w, nu, om = state
        t = self.tau
        return np.stack([-d(om), d(nu), (d(w) - om) / t, (-d(v) + nu) / t])

    def implicit_solve(self, z, rhs):
        return Model.implicit_solve(self, z, rhs)

    def _weights(self):
        return (1.0, 1.0, self.tau, self.tau)

    def mass_form(self, a, b=None):
        b = a if b is None else b
        return sum(wt * self.grid.inner(a[i], b[i]) for i, wt in enumerate(self._weights()))

    def momentum_form(self, a, b=None):
        b = a if b is None else b
        d = self.grid.derivative
        g = self.grid.inner
        nls = g(a[0], d(b[1])) + g(b[0], d(a[1]))
        aux = g(a[2], d(b[3])) + g(b[2], d(a[3]))
        return nls + self.tau * aux

    def momentum_direction(self, state):
        d = self.grid.derivative
        return np.stack([d(state[1]), -d(state[0]), d(state[3]), -d(state[2])])

    def _energy_quadratic(self, state):
        d = self.grid.derivative
        g = self.grid
        v, w, nu, om = state
        return 2 * g.inner(nu, d(v)) - g.norm2(nu) + 2 * g.inner(om, d(w)) - g.norm2(om)

    def equilibrium_state(self, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Augment NLS modal fields with ``nu = v_x``, ``omega = w_x``."""
        d = self.grid.derivative
        return np.stack([v, w, d(v), d(w)])


def initial_state(model: Model, values) -> np.ndarray:
    """Modal state from nodal data: a real array, a complex ``u = v + i w``, or a tuple of fields.

    A hyperbolized model given only ``(v, w)`` starts on its equilibrium
    ``nu = v_x``, ``omega = w_x``.
    """
    if isinstance(values, np.ndarray) and np.iscomplexobj(values):
        values = (values.real, values.imag)
    elif not isinstance(values, (tuple, list)):
        values = (values,)
    if isinstance(model, HypNLS) and len(values) == 2:
        g = model.grid
        return model.equilibrium_state(*(g.forward(np.asarray(v, dtype=float)) for v in values))
    return model.from_nodal(*values)


MODELS = {"bbm": BBM, "kdv": KdV, "nls": NLS, "hypnls": HypNLS}


def make_model(equation: str, grid: SpectralGrid, beta: float = 1.0, tau: float = 1e-9, collocation=False):
    if equation == "bbm":
        return BBM(grid)
    if equation == "kdv":
        return KdV(grid)
    if equation == "nls":
        return NLS(grid, beta=beta, collocation=collocation)
    if equation == "hypnls":
        return HypNLS(grid, beta=beta, tau=tau)
    raise ContractError(f"unknown equation {equation!r}")


def unsplit_rhs(m: Model, state: np.ndarray) -> np.ndarray:
    """Right-hand side assembled term by term without the stiff/nonstiff split."""
    g = m.grid
    d = g.derivative
    if isinstance(m, BBM):
        sq = m.ws.project(lambda a: 0.5 * a * a, [state[0]], 2)
        return (-d(sq) / (1 + g.wavenumbers**2))[None]
    if isinstance(m, KdV):
        sq = m.ws.project(lambda a: 0.5 * a * a, [state[0]], 2)
        return (-d(sq) - d(state[0], 3))[None]
    rw = m.ws.project(lambda a, b: (a * a + b * b) * b, [state[0], state[1]], 3)
    rv = m.ws.project(lambda a, b: (a * a + b * b) * a, [state[0], state[1]], 3)
    if isinstance(m, HypNLS):
        v, w, nu, om = state
        return np.stack([
            -d(om) - m.beta * rw,
            d(nu) + m.beta * rv,
            (d(w) - om) / m.tau,
            (-d(v) + nu) / m.tau,
        ])
    v, w = state
    return np.stack([-d(w, 2) - m.beta * rw, d(v, 2) + m.beta * rv])

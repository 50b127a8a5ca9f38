"""Projection onto mass/momentum manifolds combined with energy relaxation.

A relaxed step takes the provisional baseline result ``u_tilde`` and

1. projects it, ``u_hat = proj(u_tilde)``,
2. finds ``gamma`` near 1 with ``E(proj(u_n + gamma (u_hat - u_n))) = E(u_n)``,
3. returns ``proj(u_n + gamma (u_hat - u_n))`` and advances time by ``gamma dt``.

``proj`` enforces mass and momentum for the ``"full"`` policy and only the
mass (or nothing, when mass is linear) for the ``"mass-energy"`` baselines.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .models import BBM, KdV, HypNLS, InvariantTriple, Model, NLS, polyval

log = logging.getLogger(__name__)

_EPS = np.finfo(float).eps

MODES = ("none", "mass-energy", "full")
_MODE_ALIASES = {
    "none": "none",
    "mass-energy": "mass-energy",
    "mass_energy": "mass-energy",
    "full": "full",
    "mass-momentum-energy": "full",
    "mass_momentum_energy": "full",
}


class DegenerateProjectionError(ArithmeticError):
    pass


class ProjectionFailure(ArithmeticError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class NoRootError(ArithmeticError):
    pass


class RelaxationFailure(ArithmeticError):
    pass


@dataclass(frozen=True)
class ConservationPolicy:
    mode: str = "full"
    gamma_tolerance: float = 1e-13
    gamma_bracket: tuple[float, float] = (0.5, 1.5)
    newton_tolerance: float = 1e-13
    max_iterations: int = 100
    newton_max_iterations: int = 25

    def __post_init__(self):
        mode = _MODE_ALIASES.get(self.mode)
        if mode is None:
            raise ValueError(f"unknown conservation mode {self.mode!r}; choose from {MODES}")
        object.__setattr__(self, "mode", mode)
        if not (self.gamma_tolerance > 0 and self.newton_tolerance > 0):
            raise ValueError("tolerances must be positive")
        lo, hi = self.gamma_bracket
        if not lo < 1 < hi:
            raise ValueError("gamma bracket must contain 1")


class RelaxOutcome(NamedTuple):
    state: np.ndarray
    gamma: float
    iterations: int
    residual: float


class RootResult(NamedTuple):
    root: float
    iterations: int
    residual: float


# scalar root -----------------------------------------------------------------------


def scalar_root_solve(
    g: Callable[[float], float],
    guess: float = 1.0,
    bracket: tuple[float, float] = (0.5, 1.5),
    tol: float = 1e-14,
    max_iterations: int = 100,
    expansions: int = 3,
    lower_limit: float = -math.inf,
    probe: float = 1e-4,
    local_iterations: int = 8,
) -> RootResult:
    """Safeguarded secant iteration with a bisection fallback.

    Returns as soon as ``|g| <= tol``.  A few plain secant steps from
    ``guess`` and ``guess + probe`` come first; if they do not converge, a
    sign change is located among the points seen so far or in ``bracket``,
    which is widened (doubling its distance from ``guess``, never below
    ``lower_limit``) at most ``expansions`` times.  The bracketed phase uses
    secant steps, replaced by bisection when they leave the bracket or fail
    to halve it within two steps.

    Raises
    ------
    NoRootError
        No sign change was found, or ``max_iterations`` ran out before the
        bracket shrank to a few ulps.
    """
    seen: list[tuple[float, float]] = []

    def f(x):
        fx = float(g(x))
        seen.append((x, fx))
        return fx

    def done(x, fx):
        return RootResult(x, len(seen), abs(fx))

    lo, hi = bracket
    x0, f0 = guess, f(guess)
    if abs(f0) <= tol:
        return done(x0, f0)
    x1, f1 = guess + probe, f(guess + probe)
    for _ in range(local_iterations):
        if abs(f1) <= tol:
            return done(x1, f1)
        if f1 == f0:
            break
        xn = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (max(lo, lower_limit) <= xn <= hi):
            break
        x0, f0, x1, f1 = x1, f1, xn, f(xn)
    if abs(f1) <= tol:
        return done(x1, f1)

    def tightest():
        pts = sorted(seen)
        best = None
        for (xa, fa), (xb, fb) in zip(pts, pts[1:]):
            if fa * fb <= 0 and (best is None or xb - xa < best[2] - best[0]):
                best = (xa, fa, xb, fb)
        return best

    found = tightest()
    if found is None:
        f(lo), f(hi)
        found = tightest()
        for _ in range(expansions):
            if found is not None:
                break
            lo = max(guess - 2 * (guess - lo), lower_limit)
            hi = guess + 2 * (hi - guess)
            f(lo), f(hi)
            found = tightest()
    if found is None:
        raise NoRootError(f"no sign change of g on [{lo}, {hi}] after {expansions} expansions")
    a, fa, b, fb = found
    for xe, fe in ((a, fa), (b, fb)):
        if abs(fe) <= tol:
            return done(xe, fe)

    best = min((abs(fa), a), (abs(fb), b))
    prev, fprev, cur, fcur = a, fa, b, fb
    widths = [b - a]
    for _ in range(max_iterations):
        width = b - a
        if width <= 4 * _EPS * max(abs(a), abs(b), 1.0):
            # roundoff floor of g reached
            return RootResult(best[1], len(seen), best[0])
        step_ok = fcur != fprev
        if step_ok:
            xn = cur - fcur * (cur - prev) / (fcur - fprev)
            step_ok = a < xn < b
        if step_ok and len(widths) >= 3 and widths[-1] > 0.5 * widths[-3]:
            step_ok = False
        if not step_ok:
            xn = 0.5 * (a + b)
        fn = f(xn)
        best = min(best, (abs(fn), xn))
        if abs(fn) <= tol:
            return done(xn, fn)
        if fn * fa > 0:
            a, fa = xn, fn
        else:
            b, fb = xn, fn
        prev, fprev, cur, fcur = cur, fcur, xn, fn
        widths.append(b - a)
    raise NoRootError(f"root solve hit the iteration cap ({max_iterations}); best |g| = {best[0]:.3e}")


# projections ---------------------------------------------------------------------


def project_bbm_kdv(model: BBM | KdV, u_new: np.ndarray, targets: InvariantTriple) -> np.ndarray:
    """Closed-form orthogonal projection onto fixed mass and momentum.

    Mean is reset to the target mean; the deviation from it is rescaled in
    the norm induced by the momentum.
    """
    grid = model.grid
    mean = targets.mass / grid.length
    dev = u_new[0].copy()
    dev[0] = 0.0
    p_mean = 0.5 * mean**2 * grid.length
    num = targets.momentum - p_mean
    den = model.momentum_form(dev)
    if not (num > 0 and den > 0):
        raise DegenerateProjectionError(
            f"cannot project: P(u_n) - P(mean) = {num:g}, P(u - mean) = {den:g}"
        )
    out = math.sqrt(num / den) * dev
    out[0] = mean
    return out[None, :]


def _quadratic_coefficients(model: NLS, state: np.ndarray):
    d = model.momentum_direction(state)
    return (
        model.mass_form(state),
        model.mass_form(state, d),
        model.mass_form(d),
        model.momentum_form(state),
        model.momentum_form(state, d),
        model.momentum_form(d),
        d,
    )


def project_nls(
    model: NLS,
    state_new: np.ndarray,
    targets: InvariantTriple,
    tol: float = 1e-13,
    max_iterations: int = 25,
    return_multipliers: bool = False,
):
    """Simplified projection ``lam * u + mu * grad_P`` onto fixed mass and momentum.

    ``grad_P`` is ``(w_x, -v_x)`` (and the analogous direction for the
    auxiliary fields of the hyperbolized model).  The two quadratic
    conditions are solved by damped Newton from ``(1, 0)``.
    """
    ma, mad, mdd, pa, pad, pdd, d = _quadratic_coefficients(model, state_new)
    m_t, p_t = targets.mass, targets.momentum
    s_m = abs(m_t) if m_t else 1.0
    s_p = max(abs(p_t), math.sqrt(abs(ma * mdd)), _EPS)

    def residual(lam, mu):
        r1 = lam * lam * ma + 2 * lam * mu * mad + mu * mu * mdd - m_t
        r2 = lam * lam * pa + 2 * lam * mu * pad + mu * mu * pdd - p_t
        return r1, r2

    def size(r):
        return max(abs(r[0]) / s_m, abs(r[1]) / s_p)

    lam, mu = 1.0, 0.0
    r = residual(lam, mu)
    err = size(r)
    it = 0
    while err > tol:
        if it >= max_iterations:
            raise ProjectionFailure(f"Newton did not converge in {max_iterations} iterations", err)
        j11 = 2 * (lam * ma + mu * mad)
        j12 = 2 * (lam * mad + mu * mdd)
        j21 = 2 * (lam * pa + mu * pad)
        j22 = 2 * (lam * pad + mu * pdd)
        det = j11 * j22 - j12 * j21
        if det == 0 or not math.isfinite(det):
            raise ProjectionFailure("singular Newton Jacobian", err)
        dl = (j22 * r[0] - j12 * r[1]) / det
        dm = (-j21 * r[0] + j11 * r[1]) / det
        step = 1.0
        trial = residual(lam - dl, mu - dm)
        while size(trial) >= err and step > 2**-10:
            step *= 0.5
            trial = residual(lam - step * dl, mu - step * dm)
        it += 1
        if size(trial) >= err:
            if err < 100 * tol:
                break  # roundoff floor
            raise ProjectionFailure("Newton stagnated", err)
        lam, mu, r = lam - step * dl, mu - step * dm, trial
        err = size(r)
    out = lam * state_new + mu * d
    if return_multipliers:
        return out, (lam, mu, it)
    return out


def mass_scale(model: NLS, state: np.ndarray, target_mass: float) -> np.ndarray:
    m = model.mass(state)
    if not m > 0:
        raise DegenerateProjectionError("zero mass state cannot be rescaled")
    return math.sqrt(target_mass / m) * state


def hypnls_mass_factors(q2: float, p2: float, tau: float, c: float) -> tuple[float, float]:
    den = q2 + p2 * tau**3
    rad = -p2 * q2 * (tau - 1) ** 2 * tau + c * den
    if den == 0 or rad < 0:
        raise DegenerateProjectionError(f"no real scaling: denominator {den:g}, radicand {rad:g}")
    root = math.sqrt(rad)
    a1 = (p2 * (tau - 1) * tau**2 + root) / den
    a2 = (q2 * (1 - tau) + tau * root) / den
    return a1, a2


def project_hypnls_mass(model: HypNLS, state: np.ndarray, c: float) -> np.ndarray:
    """Scale ``(v, w)`` by ``alpha_1`` and ``(nu, omega)`` by ``alpha_2`` to reach mass ``c``."""
    g = model.grid
    q2 = float(g.norm2(state[0]) + g.norm2(state[1]))
    p2 = float(g.norm2(state[2]) + g.norm2(state[3]))
    a1, a2 = hypnls_mass_factors(q2, p2, model.tau, c)
    out = state.copy()
    out[:2] *= a1
    out[2:] *= a2
    return out


def identity(u):
    return u


def _line_energy(model, mode, targets, base, direction, proj):
    """Closed-form ``gamma -> energy(proj(base + gamma dir))`` where available.

    Along a line every invariant here is a polynomial in ``gamma``; with a
    pure rescaling ``sigma^2 = M_target / M`` the NLS energy becomes
    ``sigma^2 Q - beta/2 sigma^4 R`` with polynomials ``Q`` and ``R``.
    """
    if proj is identity:
        return model.energy_on_line(base, direction)
    if mode == "mass-energy" and type(model) is NLS:
        mass = tuple(model._quadratic_on_line(model.mass_form, base, direction))
        quad, quart = model.energy_parts_on_line(base, direction)
        quad, quart = tuple(quad), tuple(quart)
        half_beta, m0 = 0.5 * model.beta, targets.mass

        def energy(gamma):
            s = m0 / polyval(mass, gamma)
            return s * polyval(quad, gamma) - half_beta * s * s * polyval(quart, gamma)

        return energy
    return None


def _newton_on_polynomial(coeffs, target, tol, lo, hi, max_iterations=6):
    """Newton from gamma = 1 for ``poly(gamma) = target``; None unless it converges inside ``[lo, hi]``.

    Cheap first attempt; the safeguarded solver handles everything else.
    """
    c = list(coeffs)
    c[0] -= target
    dc = [i * c[i] for i in range(1, len(c))]
    x = 1.0
    for it in range(1, max_iterations + 1):
        fx = polyval(c, x)
        if abs(fx) <= tol:
            return x, it, abs(fx)
        slope = polyval(dc, x)
        if slope == 0:
            return None
        x -= fx / slope
        if not lo <= x <= hi:
            return None
    return None


def make_projection(model: Model, mode: str, targets: InvariantTriple, policy: ConservationPolicy | None = None):
    """Projection operator for ``mode`` with the targets of the current step."""
    policy = policy or ConservationPolicy(mode=mode)
    mode = _MODE_ALIASES[mode]
    if mode == "none":
        return identity
    if isinstance(model, (BBM, KdV)):
        if mode == "mass-energy":
            # mass is linear and kept exactly by the baseline method
            return identity
        return lambda u: project_bbm_kdv(model, u, targets)
    if isinstance(model, HypNLS) and mode == "mass-energy":
        return lambda u: project_hypnls_mass(model, u, targets.mass)
    if isinstance(model, NLS):
        if mode == "mass-energy":
            return lambda u: mass_scale(model, u, targets.mass)
        return lambda u: project_nls(
            model, u, targets, tol=policy.newton_tolerance, max_iterations=policy.newton_max_iterations
        )
    raise TypeError(f"no projection for {type(model).__name__}")


def relax_step(
    u_n: np.ndarray,
    u_tilde: np.ndarray,
    policy: ConservationPolicy,
    model: Model,
    targets: InvariantTriple | None = None,
) -> RelaxOutcome:
    """Projection composed with energy relaxation; see the module docstring.

    ``targets`` are the invariants to preserve (by default those of
    ``u_n``); passing the initial invariants avoids slow accumulation of
    roundoff over long runs.
    """
    if policy.mode == "none":
        return RelaxOutcome(u_tilde, 1.0, 0, 0.0)
    if targets is None:
        targets = model.invariants(u_n)
    proj = make_projection(model, policy.mode, targets, policy)
    e_target = targets.energy
    u_hat = proj(u_tilde)
    direction = u_hat - u_n
    if np.abs(direction).max() <= 4 * _EPS * (np.abs(u_n).max() + _EPS):
        log.warning("relaxation degenerate: provisional step equals u_n (steady state); using gamma = 1")
        return RelaxOutcome(u_hat, 1.0, 0, 0.0)

    scale = max(abs(e_target), _EPS)
    lo, hi = policy.gamma_bracket
    if proj is identity:
        coeffs = model.energy_poly_on_line(u_n, direction)
        if coeffs is not None:
            hit = _newton_on_polynomial(coeffs, e_target, policy.gamma_tolerance * scale, lo, hi)
            if hit is not None:
                gamma, iterations, resid = hit
                return RelaxOutcome(u_n + gamma * direction, gamma, iterations, resid / scale)

    cache: dict[float, np.ndarray] = {}
    fast = _line_energy(model, policy.mode, targets, u_n, direction, proj)
    if fast is not None:

        def g(gamma):
            return fast(gamma) - e_target
    else:

        def g(gamma):
            u = proj(u_n + gamma * direction)
            cache[gamma] = u
            return model.energy(u) - e_target

    try:
        res = scalar_root_solve(
            g,
            guess=1.0,
            bracket=(lo, hi),
            tol=policy.gamma_tolerance * scale,
            max_iterations=policy.max_iterations,
            lower_limit=0.05,
        )
    except NoRootError as exc:
        raise RelaxationFailure(f"energy relaxation failed ({exc}); try a smaller time step") from exc
    gamma = res.root
    state = cache.get(gamma)
    if state is None:
        state = proj(u_n + gamma * direction)
    return RelaxOutcome(state, gamma, res.iterations, res.residual / scale)

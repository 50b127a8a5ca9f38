"""Fixed-step IMEX additive and explicit Runge-Kutta steppers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tableaux import ArkTableau


@dataclass
class StepRecord:
    t_before: float
    dt_nominal: float
    t_after: float
    gamma: float = 1.0
    rejected: bool = False
    iterations: int = 0


def ark_step(state: np.ndarray, model, tableau: ArkTableau, dt: float) -> np.ndarray:
    """One IMEX step: nonstiff terms explicit, stiff terms by the ESDIRK part.

    When ``dt a_ii |L| > 1`` the stiff stage derivative is recovered from the
    implicit solve as ``(Y - R) / (dt a_ii)`` instead of applying ``L`` to
    ``Y``, which would amplify roundoff by ``|L|``.  Otherwise ``L Y`` is
    used, whose roundoff shrinks with ``dt`` rather than staying at
    ``eps |Y| / a_ii`` per stage.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    ae, ai = dt * tableau.a_explicit, dt * tableau.a_implicit
    s = tableau.stages
    shape = state.shape
    # stage derivatives stored flat so stage sums are single matmuls
    fe = np.empty((s, state.size), dtype=complex)
    fi = np.empty_like(fe)
    for i in range(s):
        r = state
        if i:
            r = state + (ae[i, :i] @ fe[:i] + ai[i, :i] @ fi[:i]).reshape(shape)
        z = ai[i, i]
        if z:
            y = model.implicit_solve(z, r)
            if z * model.stiff_scale > 1.0:
                fi[i] = ((y - r) / z).ravel()
            else:
                fi[i] = model.stiff(y).ravel()
        else:
            y = r
            fi[i] = model.stiff(y).ravel()
        fe[i] = model.nonstiff(y).ravel()
    return state + (dt * tableau.b @ (fe + fi)).reshape(shape)


def erk_step(state: np.ndarray, model, tableau: ArkTableau, dt: float) -> np.ndarray:
    """One step of the explicit part of ``tableau`` applied to the full RHS."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    a = dt * tableau.a_explicit
    s = tableau.stages
    shape = state.shape
    ops = getattr(model, "nodal_ops", None)
    if ops is not None:
        return _erk_nodal(state, ops, a, dt * tableau.b)
    k = np.empty((s, state.size), dtype=complex)
    for i in range(s):
        y = state + (a[i, :i] @ k[:i]).reshape(shape) if i else state
        k[i] = model.rhs(y).ravel()
    return state + (dt * tableau.b @ k).reshape(shape)


def _nodal_stages(samples, g, a, sq, z):
    """Fill ``sq`` with the squared stage samples; ``Y_i = samples + (sum_j a_ij sq_j) G``."""
    np.multiply(samples, samples, out=sq[0])
    for i in range(1, len(sq)):
        np.dot(a[i, :i], sq[:i], out=z)
        y = np.dot(z, g)
        np.add(y, samples, out=y)
        np.multiply(y, y, out=sq[i])


def _erk_nodal(state, ops, a, b):
    e, g, sm = ops
    x = np.ascontiguousarray(state, dtype=complex).view(float).ravel()
    samples = x @ e
    sq = np.empty((len(b), samples.size))
    _nodal_stages(samples, g, a, sq, np.empty_like(samples))
    return (x + (b @ sq) @ sm).view(complex).reshape(state.shape)


def stepper_for(model, tableau: ArkTableau):
    """ERK for models without a stiff part, ARK otherwise."""
    return erk_step if model.explicit_only else ark_step


def stability_function(tableau: ArkTableau, z_explicit: complex, z_implicit: complex) -> complex:
    """Amplification factor of one step on ``y' = (lam_e + lam_i) y``.

    Stage equations ``Y = 1 + (z_e A_e + z_i A_i) Y`` are solved directly.
    """
    s = tableau.stages
    m = np.eye(s) - z_explicit * tableau.a_explicit - z_implicit * tableau.a_implicit
    y = np.linalg.solve(m, np.ones(s, dtype=complex))
    return complex(1 + (z_explicit + z_implicit) * (tableau.b @ y))


def integrate(
    model,
    state: np.ndarray,
    tableau: ArkTableau,
    dt: float,
    n_steps: int,
    policy=None,
    targets=None,
    t0: float = 0.0,
):
    """Generator over ``(t, state, record)`` after each of ``n_steps`` steps.

    With a relaxation ``policy`` the step is ``relax_step`` applied to the
    provisional state and time advances by ``gamma * dt``.  ``targets``
    defaults to the invariants of the initial state, so roundoff does not
    accumulate in the conserved quantities.
    """
    from .conservation import relax_step

    step = stepper_for(model, tableau)
    relax = policy is not None and policy.mode != "none"
    if relax and targets is None:
        targets = model.invariants(state)
    if _nodal_path_applies(model, policy):
        yield from _nodal_bbm_steps(model, state, tableau, dt, n_steps, policy if relax else None, targets, t0)
        return
    t = t0
    for _ in range(n_steps):
        provisional = step(state, model, tableau, dt)
        gamma, iterations = 1.0, 0
        if relax:
            out = relax_step(state, provisional, policy, model, targets)
            state, gamma, iterations = out.state, out.gamma, out.iterations
        else:
            state = provisional
        rec = StepRecord(t, dt, t + gamma * dt, gamma, False, iterations)
        t = rec.t_after
        yield t, state, rec


def _nodal_path_applies(model, policy) -> bool:
    ops = getattr(model, "nodal_ops", None)
    if ops is None or (policy is not None and policy.mode not in ("none", "mass-energy")):
        return False
    # the de-aliasing samples must also integrate the cubic energy exactly
    return ops[0].shape[1] == model.ws.quadrature_size(3)


def _nodal_bbm_steps(model, state, tableau, dt, n_steps, policy, targets, t0, resync=64):
    """Explicit BBM steps carried out on nodal samples, see ``BBM.nodal_ops``.

    Stages, the update and the energy relaxation (mass is linear, so
    ``"mass-energy"`` is pure energy relaxation) all use samples on the
    de-aliasing grid.  The modal state is advanced alongside and the samples
    are recomputed from it every ``resync`` steps.
    """
    from .conservation import _EPS, NoRootError, RelaxationFailure, _newton_on_polynomial, scalar_root_solve
    from .models import polyval

    e, g, sm = model.nodal_ops
    a, b = dt * tableau.a_explicit, dt * tableau.b
    s = len(b)
    shape = state.shape
    x = np.ascontiguousarray(state, dtype=complex).view(float).ravel().copy()
    samples = x @ e
    w = model.grid.length / samples.size
    sq = np.empty((s, samples.size))
    z = np.empty_like(samples)
    if policy is not None:
        e_target = targets.energy
        scale = max(abs(e_target), _EPS)
        tol = policy.gamma_tolerance * scale
        lo, hi = policy.gamma_bracket
    t = t0
    for n in range(1, n_steps + 1):
        _nodal_stages(samples, g, a, sq, z)
        comb = b @ sq
        d_samples = comb @ g
        d_x = comb @ sm
        gamma, iterations = 1.0, 0
        if policy is not None and np.abs(d_x).max() > 4 * _EPS * (np.abs(x).max() + _EPS):
            ss, dd = samples * samples, d_samples * d_samples
            c = (w * (ss @ samples) / 6, w * (ss @ d_samples) / 2, w * (dd @ samples) / 2, w * (dd @ d_samples) / 6)
            hit = _newton_on_polynomial(c, e_target, tol, lo, hi)
            if hit is None:
                try:
                    res = scalar_root_solve(lambda gm: polyval(c, gm) - e_target, 1.0, (lo, hi), tol,
                                            policy.max_iterations, lower_limit=0.05)
                except NoRootError as exc:
                    raise RelaxationFailure(f"energy relaxation failed ({exc}); try a smaller time step") from exc
                hit = (res.root, res.iterations, res.residual)
            gamma, iterations = hit[0], hit[1]
        x = x + gamma * d_x
        if n % resync == 0:
            samples = x @ e
        else:
            samples = samples + gamma * d_samples
        rec = StepRecord(t, dt, t + gamma * dt, gamma, False, iterations)
        t = rec.t_after
        yield t, x.view(complex).reshape(shape), rec

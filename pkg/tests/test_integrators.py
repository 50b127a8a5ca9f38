import math

import numpy as np
import pytest

from conftest import random_state
from fourier_relax.conservation import ConservationPolicy
from fourier_relax.integrators import ark_step, erk_step, integrate, stability_function, stepper_for
from fourier_relax.models import initial_state, make_model
from fourier_relax.solutions import nls_sech_soliton
from fourier_relax.spectral import SpectralGrid
from fourier_relax.tableaux import get_tableau


def test_bbm_nodal_fast_path_matches_generic(rng):
    m = make_model("bbm", SpectralGrid(-50.0, 50.0, 64))
    assert m.nodal_ops is not None
    u = random_state(m, rng)
    tab = get_tableau("ark5")
    fast = erk_step(u, m, tab, 0.3)
    m.nodal_ops = None
    slow = erk_step(u, m, tab, 0.3)
    assert np.allclose(fast, slow, rtol=0, atol=1e-14 * np.abs(u).max())


def test_bbm_large_grid_has_no_fast_path():
    assert make_model("bbm", SpectralGrid(0.0, 1.0, 256)).nodal_ops is None


def test_stepper_choice():
    g = SpectralGrid(0.0, 1.0, 16)
    assert stepper_for(make_model("bbm", g), get_tableau("ark5")) is erk_step
    assert stepper_for(make_model("kdv", g), get_tableau("ark5")) is ark_step


@pytest.mark.parametrize("name,order", [("ark4", 4), ("ark5", 5), ("rk4", 4)])
def test_stability_function_matches_exponential(name, order):
    tab = get_tableau(name)
    for ze, zi in [(0.02, 0.0), (0.0, 0.02j), (0.01, 0.015j)]:
        r = stability_function(tab, ze, zi)
        z = ze + zi
        assert abs(r - np.exp(z)) < 10 * abs(z) ** (order + 1)


# ARK5 loses some order on stiff dispersive problems (stage order 2), hence the lower bound
@pytest.mark.parametrize("name,lowest", [("ark4", 3.8), ("ark5", 4.3)])
def test_observed_order_on_nls_soliton(name, lowest):
    g = SpectralGrid(-20.0, 20.0, 256)
    m = make_model("nls", g, beta=2.0)
    x = g.node_coords
    u0 = initial_state(m, nls_sech_soliton(0.0, x, amplitude=1.5))
    tab = get_tableau(name)
    errs = []
    for dt in (0.05, 0.025, 0.0125):
        for t, u, _ in integrate(m, u0, tab, dt, round(1 / dt)):
            pass
        exact = initial_state(m, nls_sech_soliton(t, x, amplitude=1.5))
        errs.append(math.sqrt(g.norm2(u - exact).sum()))
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(orders > lowest), orders


def test_tiny_step_is_consistent(rng):
    # stage derivatives must not carry an eps/dt roundoff floor
    m = make_model("kdv", SpectralGrid(-20.0, 20.0, 64))
    u = random_state(m, rng)
    dt = 1e-9
    rate = (ark_step(u, m, get_tableau("ark5"), dt) - u) / dt
    f = m.rhs(u)
    assert np.abs(rate - f).max() < 1e-5 * np.abs(f).max()


def test_integrate_records():
    g = SpectralGrid(-20.0, 20.0, 64)
    m = make_model("kdv", g)
    u0 = m.from_nodal(1 / np.cosh(g.node_coords) ** 2)
    recs = list(integrate(m, u0, get_tableau("ark4"), 0.1, 5, ConservationPolicy("full"), t0=2.0))
    assert len(recs) == 5
    t_prev = 2.0
    for t, u, rec in recs:
        assert rec.t_before == pytest.approx(t_prev)
        assert rec.t_after == pytest.approx(t_prev + rec.gamma * 0.1)
        assert t == rec.t_after and not rec.rejected
        t_prev = t
    assert list(integrate(m, u0, get_tableau("ark4"), 0.1, 0)) == []


def test_invalid_step():
    m = make_model("kdv", SpectralGrid(0.0, 1.0, 8))
    u = np.zeros((1, m.grid.n_modes), dtype=complex)
    with pytest.raises(ValueError):
        ark_step(u, m, get_tableau("ark5"), 0.0)
    with pytest.raises(ValueError):
        erk_step(u, m, get_tableau("ark5"), -1.0)


@pytest.mark.parametrize("mode", ["none", "mass-energy"])
def test_nodal_driver_matches_modal_loop(mode, monkeypatch):
    import fourier_relax.integrators as integ
    from fourier_relax.solutions import BBM_S5_SPEED, bbm_solitary

    g = SpectralGrid(-50.0, 50.0, 100)
    m = make_model("bbm", g)
    u = initial_state(m, bbm_solitary(0.0, g.node_coords, 0.0, BBM_S5_SPEED, g.length))
    tab, policy = get_tableau("ark5"), ConservationPolicy(mode)
    assert integ._nodal_path_applies(m, policy)
    fast = list(integrate(m, u, tab, 0.8, 300, policy))
    monkeypatch.setattr(integ, "_nodal_path_applies", lambda *a: False)
    slow = list(integrate(m, u, tab, 0.8, 300, policy))
    for (tf, uf, rf), (ts, us, rs) in zip(fast[::50], slow[::50]):
        assert tf == pytest.approx(ts, rel=1e-12)
        assert rf.gamma == pytest.approx(rs.gamma, abs=1e-11)
        assert np.abs(uf - us).max() < 1e-10
    if mode == "mass-energy":
        e0 = m.energy(u)
        assert abs(m.energy(fast[-1][1]) - e0) < 1e-13 * abs(e0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinso4.model import CoulombParams, OscParams, energy_closed_form, oscillator_energy
from spinso4.radial import (
    RadialProblem,
    degeneracy_scan,
    grid_eigenvalue,
    linear_radial_eigenvalue,
    oscillator_level,
    solve_self_consistent,
    sturm_count,
)

P = CoulombParams(1.0, 0.8)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**31), st.floats(-5.0, 5.0))
def test_sturm_count_matches_dense(n, seed, x):
    rng = np.random.default_rng(seed)
    d, e = rng.standard_normal(n), rng.standard_normal(n - 1)
    w = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    if np.min(np.abs(w - x)) < 1e-9:
        return
    assert sturm_count(d, e, x) == int(np.sum(w < x))


def test_problem_validation():
    with pytest.raises(ValueError):
        RadialProblem(2, 0, "coulomb", 1.0, 1.0, 0.1, 10.0)
    with pytest.raises(ValueError):
        RadialProblem(3, -1, "coulomb", 1.0, 1.0, 0.1, 10.0)
    with pytest.raises(ValueError):
        RadialProblem(3, 0, "yukawa", 1.0, 1.0, 0.1, 10.0)
    with pytest.raises(ValueError):
        RadialProblem(3, 0, "coulomb", 1.0, 1.0, 0.1, 0.2)
    with pytest.raises(ValueError):
        RadialProblem.coulomb(CoulombParams(1.0, 0.0), 0)
    with pytest.raises(ValueError):
        linear_radial_eigenvalue(RadialProblem.coulomb(P, 0), 0.5, -1)


@pytest.mark.parametrize("l,n_r", [(0, 0), (0, 1), (1, 0), (2, 0)])
def test_fixed_charge_hydrogenic_w(l, n_r):
    # at fixed E the upper equation is hydrogenic with charge kappa = (E + M) k
    energy = energy_closed_form(P, 1)
    kappa = (energy + P.M) * P.k
    n = n_r + l + 1
    prob = RadialProblem.coulomb(P, l, h=0.01, r_max=12.0 * n * n / P.k + 30.0)
    exact = -kappa**2 / (4.0 * n * n)
    assert abs(linear_radial_eigenvalue(prob, energy, n_r) - exact) <= 1e-8 * abs(exact)


@pytest.mark.parametrize("lam,n_r", [(0, 0), (1, 0), (0, 1), (2, 1)])
def test_fixed_energy_oscillator_w(lam, n_r):
    # p^2 + a rho^2 in 4D has eigenvalues 2 sqrt(a) (2 n_r + lam + 2)
    op = OscParams(1.0, 1.0)
    eps = 2.0
    a = 0.5 * (eps + op.m) * op.m * op.omega**2
    prob = RadialProblem.oscillator(op, lam)
    w = linear_radial_eigenvalue(prob, eps, n_r)
    # chi ~ rho^(3/2) at lam = 0 limits the extrapolated order
    assert w == pytest.approx(2.0 * math.sqrt(a) * (2 * n_r + lam + 2), rel=1e-7)
    # the same level in Schrodinger normalisation, mass (eps + m) / 2
    N = 2 * n_r + lam
    schrodinger = (N + 2) * op.omega * math.sqrt(2.0 * op.m / (eps + op.m))
    assert w / (eps + op.m) == pytest.approx(schrodinger, rel=1e-7)


def test_second_order_convergence():
    prob = RadialProblem.oscillator(OscParams(1.0, 1.0), 1)
    w = [grid_eigenvalue(prob, 2.0, 0, prob.h * f) for f in (4.0, 2.0, 1.0)]
    assert (w[0] - w[1]) / (w[1] - w[2]) == pytest.approx(4.0, rel=0.02)


@pytest.mark.parametrize("l,n_r", [(0, 0), (1, 0), (0, 2)])
def test_coulomb_level_matches_closed_form(l, n_r):
    n = n_r + l + 1
    prob = RadialProblem.coulomb(P, l, r_max=12.0 * n * n / P.k)
    energy, trace = solve_self_consistent(prob, n_r)
    assert abs(energy - energy_closed_form(P, n)) <= 1e-6
    assert trace.converged and abs(trace.defect) <= 1e-10
    assert trace.brackets and trace.iterations


def test_small_box_is_doubled():
    prob = RadialProblem.coulomb(P, 0, r_max=4.0)
    energy, _ = solve_self_consistent(prob, 2)
    assert abs(energy - energy_closed_form(P, 3)) <= 1e-6


def test_degeneracy_scan_l_independent():
    scan = degeneracy_scan(P, 2)
    assert len(scan.levels) == 3
    assert max(scan.spread.values()) <= 1e-6
    assert len(scan.energies(2)) == 2
    with pytest.raises(ValueError):
        degeneracy_scan(P, 7)


def test_oscillator_exact_instance():
    eps, trace = oscillator_level(OscParams(1.0, math.sqrt(2.0)), 0)
    assert abs(eps - 3.0) <= 3e-6
    assert trace.converged


@pytest.mark.parametrize("N,lam", [(2, 0), (2, 2), (4, 2)])
def test_oscillator_levels_lambda_independent(N, lam):
    op = OscParams(1.0, 1.0)
    eps, _ = oscillator_level(op, N, lam)
    assert eps == pytest.approx(oscillator_energy(op, N), rel=1e-6)


def test_oscillator_index_validation():
    op = OscParams()
    with pytest.raises(ValueError):
        oscillator_level(op, 2, 1)
    with pytest.raises(ValueError):
        oscillator_level(op, 2, 4)
    with pytest.raises(ValueError):
        oscillator_level(op, -1)

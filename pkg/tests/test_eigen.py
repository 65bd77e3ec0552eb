import numpy as np
import pytest

from spinso4.eigen import (
    EigenSolveError,
    MAX_COUNT,
    casimir_on_eigenvectors,
    cluster_levels,
    default_shift,
    eigensolve_lowest,
    folded_preconditioner,
    start_block,
)
from spinso4.grid import GridSpec, inner, random_field
from spinso4.model import CoulombParams, energy_closed_form
from spinso4.operators import LinOp, build_hamiltonian

P = CoulombParams(1.0, 0.8)
SMALL = GridSpec(16, 16.0)


@pytest.fixture(scope="module")
def ground_pair():
    H = build_hamiltonian(P, SMALL)
    return H, eigensolve_lowest(H, 2, SMALL, default_shift(P), tol=1e-3)


def test_ground_doublet_on_small_grid(ground_pair):
    H, res = ground_pair
    assert len(res.vectors) == 2
    assert np.all(res.residuals <= 1e-3)
    # a 16^3 box resolves the ground level to a few percent
    assert np.all(np.abs(res.energies - energy_closed_form(P, 1)) < 0.05)
    assert abs(res.energies[1] - res.energies[0]) < 1e-6
    gram = np.array([[inner(SMALL, a, b) for b in res.vectors] for a in res.vectors])
    assert np.allclose(gram, np.eye(2), atol=1e-10)
    for e, v in res.pairs():
        r = H(v) - e * v
        assert np.sqrt(inner(SMALL, r, r).real) <= 1e-3 * SMALL.cell_volume**-0.5


def test_casimir_on_small_doublet(ground_pair):
    _, res = ground_pair
    est = casimir_on_eigenvectors(P, SMALL, res.pairs())
    assert est.multiplicity == 2
    assert abs(est.I2 - est.K2) <= 1e-6
    assert abs(est.n_estimate - 1.0) < 0.1
    assert est.closure < 1e-4
    assert set(est.as_dict()) >= {"I2", "K2", "j", "n_estimate"}


def test_input_validation():
    H = build_hamiltonian(P, SMALL)
    for count in (0, MAX_COUNT + 1):
        with pytest.raises(ValueError):
            eigensolve_lowest(H, count, SMALL, 0.7)
    with pytest.raises(ValueError):
        eigensolve_lowest(LinOp(H.apply, "H"), 2, SMALL, 0.7)
    with pytest.raises(ValueError):
        eigensolve_lowest(H, 4, SMALL, 0.7, block=2)
    with pytest.raises(ValueError):
        casimir_on_eigenvectors(P, SMALL, [])
    v = random_field(SMALL, 0)
    with pytest.raises(ValueError):
        casimir_on_eigenvectors(P, SMALL, [(1.2, v)])
    with pytest.raises(ValueError):
        casimir_on_eigenvectors(CoulombParams(1.0, 0.0), SMALL, [(0.5, v)])


def test_iteration_cap_reports_history():
    H = build_hamiltonian(P, SMALL)
    with pytest.raises(EigenSolveError) as err:
        eigensolve_lowest(H, 2, SMALL, default_shift(P), tol=1e-12, max_iter=2, restarts=0)
    assert err.value.history


def test_preconditioner_hermitian_positive():
    prec = folded_preconditioner(SMALL, 1.0, 0.7)
    f, g = random_field(SMALL, 1), random_field(SMALL, 2)
    pf = prec(f.reshape(-1, 1)).reshape(f.shape)
    pg = prec(g.reshape(-1, 1)).reshape(g.shape)
    assert inner(SMALL, f, pg) == pytest.approx(np.conj(inner(SMALL, g, pf)), rel=1e-10)
    assert inner(SMALL, f, pf).real > 0


def test_start_block_deterministic():
    a, b = start_block(SMALL, 3, 7), start_block(SMALL, 3, 7)
    assert a.shape == (4 * 16**3, 3)
    assert np.array_equal(a, b)


def test_cluster_levels():
    e1, e2, e3 = (energy_closed_form(P, n) for n in (1, 2, 3))
    energies = [e1 + 0.02, e1 + 0.02, e2 - 0.001, e2, e2 + 0.004, 0.0]
    clusters = cluster_levels(P, energies)
    assert clusters[1] == [0, 1]
    assert clusters[2] == [2, 3, 4]
    assert 5 not in sum(clusters.values(), [])
    assert default_shift(P, 2) < e2

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinso4.algebra import (
    BLOCKS,
    DEFAULT_POLICY,
    EXACT_FLOOR,
    ProbeError,
    ProbePolicy,
    ResidualReport,
    commutator_residual,
    dirac_algebra_residuals,
    ladder_verdict,
    make_probes,
    nonrel_energy_scaling,
    positive_energy_embedding,
    q_squared_identity_residual,
    runge_lenz_alignment,
    verify_block_conditions,
)
from spinso4.grid import GridSpec, TAIL_BOUND, momentum_tail, norm, position_tail
from spinso4.model import CoulombParams
from spinso4.operators import momentum_op, position_op, scaled_identity

P = CoulombParams(1.0, 0.8)
COARSE = GridSpec(32, 19.5)
FINE = GridSpec(64, 19.5)


def test_probes_deterministic_and_within_tails():
    a = make_probes(COARSE, 3, reference=FINE)
    b = make_probes(COARSE, 3, reference=FINE)
    assert len(a) == DEFAULT_POLICY.count
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert all(norm(COARSE, v) == pytest.approx(1.0, rel=1e-13) for v in a)
    w = DEFAULT_POLICY.width(FINE)
    c = DEFAULT_POLICY.center_widths * w / np.sqrt(3.0) * np.ones(3)
    k = DEFAULT_POLICY.boost_widths / w / np.sqrt(3.0) * np.ones(3)
    assert position_tail(FINE, c, w) <= TAIL_BOUND
    assert momentum_tail(FINE, k, w) <= TAIL_BOUND


def test_probe_tail_violations_raise():
    # the boost does not fit the momentum window of the coarse grid itself
    with pytest.raises(ProbeError):
        make_probes(COARSE, 0)
    with pytest.raises(ProbeError):
        make_probes(COARSE, 0, ProbePolicy(center_widths=9.0), reference=FINE)
    with pytest.raises(ProbeError):
        make_probes(COARSE, 0, reference=GridSpec(64, 20.0))


def test_canonical_commutator_on_packets():
    # on the grid the probes were sized for, [x_i, p_j] = i delta_ij to spectral accuracy
    probes = make_probes(FINE, 1, count=3)
    for i in range(3):
        for j in range(3):
            expected = scaled_identity(1j) if i == j else None
            rep = commutator_residual(position_op(FINE, i), momentum_op(FINE, j), expected,
                                      spec=FINE, probes=probes)
            assert rep.max_residual < 1e-10
            assert rep.probe_count == 3


def test_report_serialises():
    rep = ResidualReport.from_values(("a", "b"), [1e-3, 2e-3], COARSE, 5, 2)
    d = json.loads(json.dumps(rep.as_dict()))
    assert d["max_residual"] == 2e-3 and d["mean_residual"] == pytest.approx(1.5e-3)
    assert d["points_per_axis"] == 32 and d["labels"] == ["a", "b"]


def test_dirac_residuals_single_probe():
    v = make_probes(COARSE, 0, reference=FINE, count=1)[0]
    vals = dirac_algebra_residuals(P, COARSE, v)
    assert vals["[H,S]"] <= EXACT_FLOOR
    for name in ("[H,L]", "[H,Q]", "[L,L]", "[L,Q]", "[Q,Q]", "Q.L", "Q^2"):
        assert 0.0 < vals[name] < 0.5


def test_block_conditions_exact_parts():
    reps = verify_block_conditions(P, COARSE, probes=2, reference=FINE)
    assert set(BLOCKS) <= set(reps)
    assert reps["Q12=Q21"].max_residual <= EXACT_FLOOR
    assert reps["[rhat,V]"].max_residual <= EXACT_FLOOR
    assert reps["Q11=Q12(2M+V)+Q22p2"].max_residual < 0.1


def test_q_squared_identity_coarse():
    rep = q_squared_identity_residual(P, COARSE, probes=1, reference=FINE)
    assert rep.max_residual < 0.3


def test_checks_need_coupling():
    with pytest.raises(ValueError):
        verify_block_conditions(CoulombParams(1.0, 0.0), COARSE, probes=1, reference=FINE)


def test_ladder_verdict_rules():
    assert ladder_verdict([1e-2, 1e-4, 1e-5])
    assert not ladder_verdict([1e-2, 1e-4, 2e-4])      # not monotone
    assert not ladder_verdict([1e-4, 5e-5, 3e-5])      # reduction below 4x
    assert not ladder_verdict([1.0, 0.1, 2e-3])        # final above 1e-3
    assert ladder_verdict([1e-15, 3e-16, 1e-15])       # exact at every level
    assert not ladder_verdict([1e-2, 1e-13, 1e-12])
    assert ladder_verdict([1e-2, 1e-6, 1e-12])


@given(st.lists(st.floats(1e-10, 1.0), min_size=2, max_size=5))
def test_ladder_verdict_property(vals):
    ok = ladder_verdict(vals)
    strictly = all(b < a for a, b in zip(vals, vals[1:]))
    assert ok == (strictly and vals[0] >= 4 * vals[-1] and vals[-1] < 1e-3)


def test_positive_energy_embedding_normalised():
    v = make_probes(COARSE, 0, reference=FINE, count=1)[0]
    psi = positive_energy_embedding(COARSE, v[:2], 20.0)
    assert norm(COARSE, psi) == pytest.approx(1.0, rel=1e-13)
    assert norm(COARSE, psi[2:]) < norm(COARSE, psi[:2])


def test_energy_scaling_closed_form_is_k4():
    s = nonrel_energy_scaling(0.2, source="closed_form")
    assert 15.0 < s.ratio < 16.5
    with pytest.raises(ValueError):
        nonrel_energy_scaling(0.2, source="tables")


def test_runge_lenz_matches_phase_space_average():
    out = runge_lenz_alignment(P, GridSpec(64, 30.0), (3.0, 1.0, -1.0), (0.2, 0.5, 0.3), 1.0)
    assert out["f_residual"] < 1e-10
    assert out["cosine"] > 1.0 - 1e-9
    # the momentum spread term 2c/w^2 moves <R> well away from the point-particle vector
    assert out["classical_cosine"] < 0.9

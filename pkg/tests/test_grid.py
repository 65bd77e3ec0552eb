import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinso4.grid import (
    GridSpec,
    TAIL_BOUND,
    dump_field,
    gaussian_packet,
    grid_for,
    inner,
    load_field,
    momentum_tail,
    norm,
    position_tail,
    random_field,
    transform_to_momentum,
    transform_to_position,
)

SMALL = GridSpec(16, 10.0)


def direct_transform(spec, f):
    """O(N^4) reference: N^(-3/2) sum_j f(x_j) exp(-i p_m . x_j), axis by axis."""
    g = grid_for(spec)
    n = spec.points_per_axis
    E = np.exp(-1j * np.outer(g.p1d, g.x1d)) / np.sqrt(n)
    return np.einsum("ai,bj,ck,sijk->sabc", E, E, E, f)


def test_spec_validation():
    for n in (15, 8, 0):
        with pytest.raises(ValueError):
            GridSpec(n, 10.0)
    with pytest.raises(ValueError):
        GridSpec(16, 0.0)


def test_offset_grid_avoids_origins():
    g = grid_for(GridSpec(16, 8.0))
    assert g.r.min() == pytest.approx(0.5 * 0.5 * np.sqrt(3.0), rel=1e-14)
    assert g.pabs.min() == pytest.approx(np.pi / 8.0 * np.sqrt(3.0), rel=1e-14)
    assert np.all(np.isfinite(g.inv_r)) and np.all(np.isfinite(g.inv_p2))


@pytest.mark.parametrize("offsets", [(True, True), (False, True), (True, False), (False, False)])
def test_transform_matches_direct_sum(offsets):
    spec = GridSpec(16, 7.0, *offsets)
    f = random_field(spec, 3, components=2)
    assert np.allclose(transform_to_momentum(spec, f), direct_transform(spec, f), atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([16, 18, 20, 24]), st.floats(2.0, 40.0), st.integers(0, 2**31))
def test_transform_unitary_and_invertible(n, length, seed):
    spec = GridSpec(n, length)
    f = random_field(spec, seed)
    g = transform_to_momentum(spec, f)
    assert np.linalg.norm(g) == pytest.approx(np.linalg.norm(f), rel=1e-13)
    assert np.allclose(transform_to_position(spec, g), f, atol=1e-13)


def test_inner_product_properties():
    f, g = random_field(SMALL, 1), random_field(SMALL, 2)
    assert inner(SMALL, f, f).real == pytest.approx(1.0, rel=1e-13)
    assert inner(SMALL, f, g) == pytest.approx(np.conj(inner(SMALL, g, f)), abs=1e-15)
    assert inner(SMALL, 2j * f, g) == pytest.approx(-2j * inner(SMALL, f, g), abs=1e-15)
    with pytest.raises(ValueError):
        inner(SMALL, f, g[:2])
    with pytest.raises(ValueError):
        norm(SMALL, np.zeros((4, 8, 8, 8)))


def test_random_field_deterministic():
    assert np.array_equal(random_field(SMALL, 5), random_field(SMALL, 5))
    assert not np.array_equal(random_field(SMALL, 5), random_field(SMALL, 6))


def test_packet_normalised_and_rejected_near_boundary():
    spec = GridSpec(32, 20.0)
    f = gaussian_packet(spec, (1.0, -1.0, 0.5), 1.0, boost=(0.5, 0.0, 0.0), seed=2)
    assert norm(spec, f) == pytest.approx(1.0, rel=1e-13)
    with pytest.raises(ValueError):
        gaussian_packet(spec, (8.0, 0.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        gaussian_packet(spec, (0.0, 0.0, 0.0), 0.0)


def test_packet_diagonal_center_uses_face_distance():
    spec = GridSpec(32, 20.0)
    c = np.full(3, 2.5)
    assert position_tail(spec, c, 1.0) <= TAIL_BOUND
    gaussian_packet(spec, c, 1.0)


def test_tails_monotone():
    spec = GridSpec(32, 20.0)
    assert position_tail(spec, (0, 0, 0), 1.0) < position_tail(spec, (3, 0, 0), 1.0)
    assert momentum_tail(spec, (0, 0, 0), 1.0) < momentum_tail(spec, (2, 0, 0), 1.0)
    assert position_tail(spec, (11, 0, 0), 1.0) == 1.0


def test_dump_roundtrip(tmp_path):
    spec = GridSpec(16, 9.0, True, False)
    f = random_field(spec, 9)
    path = tmp_path / "f.bin"
    dump_field(spec, f, path)
    spec2, f2 = load_field(path)
    assert spec2 == spec
    assert np.array_equal(f2, f)
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(ValueError):
        load_field(path)

"""Offset Cartesian spectral grid, spinor fields and unitary transforms.

Sample points sit at x_j = (j + 1/2 - N/2) h and modes at
p_m = 2 pi (m + 1/2 - N/2) / L, so neither r = 0 nor p = 0 is sampled and
1/r, 1/p and 1/p^2 are finite diagonal multipliers. Fields are plain
complex arrays of shape (components, N, N, N): 2 components for a Pauli
field, 4 for a Dirac field (upper pair first). Momentum-space arrays use
the same natural (centred, increasing) index order as position space.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.fft as sfft

AXES = (-3, -2, -1)
TAIL_BOUND = 1e-12
# distance in widths at which exp(-d^2 / 2) drops below TAIL_BOUND
TAIL_WIDTHS = float(np.sqrt(-2.0 * np.log(TAIL_BOUND)))


@dataclass(frozen=True)
class GridSpec:
    points_per_axis: int
    box_length: float
    position_offset: bool = True
    momentum_offset: bool = True

    def __post_init__(self):
        n = self.points_per_axis
        if n < 16 or n % 2:
            raise ValueError(f"points_per_axis must be even and >= 16, got {n}")
        if not self.box_length > 0:
            raise ValueError("box_length must be positive")

    @property
    def spacing(self) -> float:
        return self.box_length / self.points_per_axis

    @property
    def shape(self) -> tuple[int, int, int]:
        n = self.points_per_axis
        return (n, n, n)

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    def refined(self, points_per_axis: int) -> "GridSpec":
        return GridSpec(points_per_axis, self.box_length, self.position_offset, self.momentum_offset)


class Grid:
    """Sample arrays and transform phases for one GridSpec (use ``grid_for``)."""

    def __init__(self, spec: GridSpec):
        self.spec = spec
        n = spec.points_per_axis
        a = 0.5 if spec.position_offset else 0.0
        b = 0.5 if spec.momentum_offset else 0.0
        idx = np.arange(n)
        self.x1d = (idx + a - n / 2) * spec.spacing
        self.p1d = 2.0 * np.pi * (idx + b - n / 2) / spec.box_length
        # exp(-i p_m x_j) = exp(-2 pi i m j / n) * pre_j * post_m * const
        pre = np.exp(-2j * np.pi * (b - n / 2) * idx / n)
        post = np.exp(-2j * np.pi * idx * (a - n / 2) / n)
        const = np.exp(-2j * np.pi * (b - n / 2) * (a - n / 2) / n)
        self._pre = _outer3(pre)
        self._post = _outer3(post) * const**3
        self._pre_conj = np.conj(self._pre)
        self._post_conj = np.conj(self._post)

    # position space -------------------------------------------------------
    @cached_property
    def x(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays of shapes (N,1,1), (1,N,1), (1,1,N)."""
        return _axes3(self.x1d)

    @cached_property
    def r(self) -> np.ndarray:
        x, y, z = self.x
        return np.sqrt(x * x + y * y + z * z)

    @cached_property
    def inv_r(self) -> np.ndarray:
        return 1.0 / self.r

    @cached_property
    def rhat(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        inv = self.inv_r
        return tuple(c * inv for c in self.x)

    # momentum space -------------------------------------------------------
    @cached_property
    def p(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return _axes3(self.p1d)

    @cached_property
    def p2(self) -> np.ndarray:
        px, py, pz = self.p
        return px * px + py * py + pz * pz

    @cached_property
    def pabs(self) -> np.ndarray:
        return np.sqrt(self.p2)

    @cached_property
    def inv_p2(self) -> np.ndarray:
        return 1.0 / self.p2

    def to_momentum(self, f: np.ndarray) -> np.ndarray:
        check_shape(self.spec, f)
        return self._post * sfft.fftn(self._pre * f, axes=AXES, norm="ortho")

    def to_position(self, g: np.ndarray) -> np.ndarray:
        check_shape(self.spec, g)
        return self._pre_conj * sfft.ifftn(self._post_conj * g, axes=AXES, norm="ortho")


def _outer3(v: np.ndarray) -> np.ndarray:
    return v[:, None, None] * v[None, :, None] * v[None, None, :]


def _axes3(v: np.ndarray):
    return v[:, None, None], v[None, :, None], v[None, None, :]


@lru_cache(maxsize=8)
def grid_for(spec: GridSpec) -> Grid:
    return Grid(spec)


def check_shape(spec: GridSpec, f: np.ndarray, components: int | None = None):
    if f.shape[-3:] != spec.shape or (components is not None and f.shape[:-3] != (components,)):
        want = spec.shape if components is None else (components, *spec.shape)
        raise ValueError(f"field shape {f.shape} does not match grid {want}")


def transform_to_momentum(spec: GridSpec, f: np.ndarray) -> np.ndarray:
    return grid_for(spec).to_momentum(f)


def transform_to_position(spec: GridSpec, g: np.ndarray) -> np.ndarray:
    return grid_for(spec).to_position(g)


def zeros(spec: GridSpec, components: int = 4) -> np.ndarray:
    return np.zeros((components, *spec.shape), dtype=complex)


def inner(spec: GridSpec, f: np.ndarray, g: np.ndarray) -> complex:
    """<f, g> = h^3 sum conj(f) g, antilinear in the first slot."""
    if f.shape != g.shape:
        raise ValueError(f"shape mismatch {f.shape} vs {g.shape}")
    check_shape(spec, f)
    return complex(np.vdot(f, g)) * spec.cell_volume


def norm(spec: GridSpec, f: np.ndarray) -> float:
    check_shape(spec, f)
    return float(np.linalg.norm(f.ravel())) * spec.cell_volume**0.5


def random_field(spec: GridSpec, seed: int, components: int = 4) -> np.ndarray:
    """Unit-norm white-noise field, deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    shape = (components, *spec.shape)
    f = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return f / norm(spec, f)


def position_tail(spec: GridSpec, center, width: float) -> float:
    """Envelope exp(-d^2 / 2 w^2) at the box face nearest to the packet."""
    d = spec.box_length / 2 - np.max(np.abs(np.asarray(center, dtype=float)))
    if d <= 0:
        return 1.0
    return float(np.exp(-0.5 * (d / width) ** 2))


def momentum_tail(spec: GridSpec, boost, width: float) -> float:
    """Momentum envelope exp(-(w d)^2 / 2) at the edge of the mode window."""
    pmax = np.pi / spec.spacing
    d = pmax - np.max(np.abs(np.asarray(boost, dtype=float)))
    if d <= 0:
        return 1.0
    return float(np.exp(-0.5 * (d * width) ** 2))


def gaussian_packet(spec: GridSpec, center, width: float, boost=(0.0, 0.0, 0.0),
                    polarization=None, seed: int = 0) -> np.ndarray:
    """Normalised Dirac field exp(-|x-c|^2 / 2w^2 + i p0.x) times a 4-spinor.

    A missing ``polarization`` is drawn from ``seed``. Packets whose envelope
    exceeds the 1e-12 tail bound on the box boundary are rejected, since the
    periodic wrap would otherwise contaminate every check.
    """
    center = np.asarray(center, dtype=float).reshape(3)
    boost = np.asarray(boost, dtype=float).reshape(3)
    if width <= 0:
        raise ValueError("width must be positive")
    if position_tail(spec, center, width) > TAIL_BOUND:
        raise ValueError(
            f"packet (center={center.tolist()}, width={width}) violates the boundary tail bound"
        )
    if polarization is None:
        rng = np.random.default_rng(seed)
        polarization = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    pol = np.asarray(polarization, dtype=complex).reshape(4)
    g = grid_for(spec)
    x, y, z = g.x
    phase = (
        np.exp(-0.5 * ((x - center[0]) / width) ** 2 + 1j * boost[0] * x)
        * np.exp(-0.5 * ((y - center[1]) / width) ** 2 + 1j * boost[1] * y)
        * np.exp(-0.5 * ((z - center[2]) / width) ** 2 + 1j * boost[2] * z)
    )
    f = pol[:, None, None, None] * phase[None]
    return f / norm(spec, f)


def upper(f: np.ndarray) -> np.ndarray:
    return f[:2]


def lower(f: np.ndarray) -> np.ndarray:
    return f[2:]


def join(up: np.ndarray, low: np.ndarray) -> np.ndarray:
    return np.concatenate([up, low], axis=0)


# binary dump -----------------------------------------------------------------
_MAGIC = b"SO4F"
_HEADER = struct.Struct("<4sIIdBBI")


def dump_field(spec: GridSpec, f: np.ndarray, path) -> None:
    """Write header (magic, version, N, L, offsets, components) + little-endian complex128."""
    check_shape(spec, f)
    comps = f.shape[0] if f.ndim == 4 else 1
    header = _HEADER.pack(_MAGIC, 1, spec.points_per_axis, spec.box_length,
                          int(spec.position_offset), int(spec.momentum_offset), comps)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f, dtype="<c16").tobytes(order="C"))


def load_field(path) -> tuple[GridSpec, np.ndarray]:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, n, length, pos_off, mom_off, comps = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != 1:
        raise ValueError(f"{path}: not a field dump")
    spec = GridSpec(n, length, bool(pos_off), bool(mom_off))
    data = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(comps, n, n, n)
    return spec, data.astype(complex)

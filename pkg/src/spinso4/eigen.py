"""Interior eigenpairs of the grid Hamiltonian and Casimir values on energy clusters.

Bound states sit inside the gap (-M, M), far from either end of the grid
spectrum, so LOBPCG runs on the folded operator (H - shift)^2 whose lowest
eigenvectors are the states nearest the shift. A final Rayleigh-Ritz step
with H itself separates the energies.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.linalg import lobpcg

from .grid import GridSpec, grid_for, inner, norm
from .model import CoulombParams, energy_closed_form, j_from_casimir
from .operators import LinOp, build_L, build_Q, sigma_dot_hat

MAX_COUNT = 30
# damping of the per-mode preconditioner near its poles
PRECOND_DAMPING = 0.05


class EigenSolveError(RuntimeError):
    """LOBPCG did not reach the Ritz tolerance within the iteration cap."""

    def __init__(self, message: str, history: list):
        super().__init__(message)
        self.history = history


@dataclass
class EigenResult:
    energies: np.ndarray
    vectors: list          # grid-normalised Dirac fields
    residuals: np.ndarray  # ||H v - E v|| per pair
    shift: float
    iterations: int
    history: list = field(default_factory=list, repr=False)

    def pairs(self) -> list:
        return list(zip(self.energies.tolist(), self.vectors))


def folded_preconditioner(spec: GridSpec, mass: float, shift: float):
    """Per-mode inverse of the free folded operator (H0 - shift)^2, damped at its poles.

    For each momentum mode (H0 - s)^2 = a + (-2 s) H0 with a = p^2 + M^2 + s^2,
    whose inverse is (a + 2 s H0) / (a^2 - 4 s^2 (p^2 + M^2)).
    """
    g = grid_for(spec)
    ep2 = g.p2 + mass**2
    a = ep2 + shift**2
    den = a * a - 4.0 * shift**2 * ep2 + PRECOND_DAMPING**2 * a
    comps = (4, *spec.shape)

    def apply(f):
        fh = g.to_momentum(f)
        h0 = np.empty_like(fh)
        h0[:2] = mass * fh[:2] + sigma_dot_hat(g, fh[2:])
        h0[2:] = sigma_dot_hat(g, fh[:2]) - mass * fh[2:]
        return g.to_position((a * fh + 2.0 * shift * h0) / den)

    def block(X):
        X = np.asarray(X).reshape(int(np.prod(comps)), -1)
        out = np.empty_like(X)
        for j in range(X.shape[1]):
            out[:, j] = apply(X[:, j].reshape(comps)).ravel()
        return out

    return block


def start_block(spec: GridSpec, size: int, seed: int, width: Optional[float] = None) -> np.ndarray:
    """Seeded Gaussians near the origin with random 4-spinor polarisations."""
    g = grid_for(spec)
    width = spec.box_length / 18.0 if width is None else width
    rng = np.random.default_rng(seed)
    x, y, z = g.x
    cols = []
    for _ in range(size):
        pol = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        c = rng.standard_normal(3) * 0.5 * width
        env = np.exp(-((x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2) / (2.0 * width**2))
        cols.append((pol[:, None, None, None] * env[None]).ravel())
    return np.array(cols).T


def eigensolve_lowest(H: LinOp, count: int, spec: GridSpec, shift: float, tol: float = 1e-4,
                      mass: float = 1.0, block: Optional[int] = None, max_iter: int = 300,
                      restarts: int = 2, seed: int = 0) -> EigenResult:
    """The ``count`` eigenpairs of H nearest above ``shift``, by folded LOBPCG.

    Put the shift slightly below the lowest wanted level. Every returned pair
    has ||H v - E v|| <= tol with ||v|| = 1; vectors are orthonormal in the
    grid inner product.
    """
    if not 1 <= count <= MAX_COUNT:
        raise ValueError(f"count must lie in 1..{MAX_COUNT}")
    if not H.hermitian:
        raise ValueError("eigensolve_lowest needs a Hermitian operator")
    block = count + 4 if block is None else block
    if block < count:
        raise ValueError("block must be at least count")
    comps = (4, *spec.shape)
    n = int(np.prod(comps))
    scale = spec.cell_volume**0.5

    def fold(X):
        X = np.asarray(X).reshape(n, -1)
        out = np.empty_like(X)
        for j in range(X.shape[1]):
            f = X[:, j].reshape(comps)
            h = H(f) - shift * f
            out[:, j] = (H(h) - shift * h).ravel()
        return out

    prec = folded_preconditioner(spec, mass, shift)
    X = start_block(spec, block, seed)
    history = []
    iterations = 0
    inner_tol = tol * 0.1
    for attempt in range(restarts + 1):
        # non-convergence is judged below from the Ritz residuals and reported with the history
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            _, V, hist = lobpcg(fold, X, M=prec, largest=False, tol=inner_tol, maxiter=max_iter,
                                retResidualNormsHistory=True, verbosityLevel=0)
        iterations += len(hist)
        history.extend(np.abs(np.asarray(h)).tolist() for h in hist)
        HV = np.column_stack([H(V[:, j].reshape(comps)).ravel() for j in range(V.shape[1])])
        G = V.conj().T @ HV
        energies, U = np.linalg.eigh(0.5 * (G + G.conj().T))
        V = V @ U
        HV = HV @ U
        res = np.linalg.norm(HV - V * energies, axis=0) / np.linalg.norm(V, axis=0)
        keep = np.sort(np.argsort(np.abs(energies - shift))[:count])
        if np.all(res[keep] <= tol):
            vectors = [V[:, j].reshape(comps) / scale for j in keep]
            vectors = [v / norm(spec, v) for v in vectors]
            return EigenResult(energies[keep], vectors, res[keep], shift, iterations, history)
        X = V
        inner_tol *= 0.1
    raise EigenSolveError(
        f"Ritz residual {res[keep].max():.2e} above {tol:.0e} after {iterations} iterations",
        history,
    )


def default_shift(p: CoulombParams, n: int = 1, offset: float = 0.02) -> float:
    """Shift slightly below the closed-form level n."""
    return energy_closed_form(p, n) - offset * p.M


def cluster_levels(p: CoulombParams, energies: Sequence[float], n_max: int = 6,
                   window: float = 0.3) -> dict:
    """Indices of Ritz values per principal number n.

    A value joins cluster n when it lies within ``window`` times the gap to
    the nearest neighbouring closed-form level.
    """
    levels = [energy_closed_form(p, n) for n in range(1, n_max + 2)]
    clusters = {}
    for idx, e in enumerate(energies):
        n = int(np.argmin([abs(e - lv) for lv in levels[:n_max]])) + 1
        lv = levels[n - 1]
        gaps = [levels[n] - lv]
        if n > 1:
            gaps.append(lv - levels[n - 2])
        if abs(e - lv) <= window * min(gaps):
            clusters.setdefault(n, []).append(idx)
    return clusters


@dataclass
class CasimirEstimate:
    energy: float
    multiplicity: int
    L2: float
    A2: float
    I2: float
    K2: float
    j: float
    n_estimate: float
    closure: float  # worst weak-form <v, ([A_x, A_y] - i L_z) v> relative residual over the cluster
    per_vector: list = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "per_vector"}


def casimir_on_eigenvectors(p: CoulombParams, spec: GridSpec, eigenpairs: Sequence) -> CasimirEstimate:
    """Cluster averages of I^2 and K^2 with A scaled by the cluster energy.

    A = [(-4/k^2)(E^2 - M^2)]^(-1/2) Q, I = (L + A)/2, K = (L - A)/2. All
    operator products are applied, except that L (Hermitian on the grid)
    is moved onto the bra where it appears leftmost.
    """
    if not eigenpairs:
        raise ValueError("empty cluster")
    energy = float(np.mean([e for e, _ in eigenpairs]))
    if not abs(energy) < p.M:
        raise ValueError("A needs |E| < M for a real normalisation")
    if p.k <= 0:
        raise ValueError("A needs k > 0")
    c = (-4.0 / p.k**2 * (energy**2 - p.M**2)) ** -0.5
    Lop, Qop = build_L(spec), build_Q(p, spec)
    rows = []
    closure = 0.0
    for _, v in eigenpairs:
        v = v / norm(spec, v)
        lv = Lop.apply_all(v)
        av = [c * q for q in Qop.apply_all(v)]
        aa = [Qop.apply_all(av[j]) for j in range(3)]  # aa[j][i] = Q_i A_j v
        al = [Qop.apply_all(lv[j]) for j in range(3)]
        L2 = sum(inner(spec, lv[i], lv[i]).real for i in range(3))
        A2 = sum(c * inner(spec, v, aa[i][i]) for i in range(3))
        LA = sum(inner(spec, lv[i], av[i]) for i in range(3))
        AL = sum(c * inner(spec, v, al[i][i]) for i in range(3))
        I2 = 0.25 * (L2 + A2 + LA + AL)
        K2 = 0.25 * (L2 + A2 - LA - AL)
        rows.append({"L2": L2, "A2": A2.real, "I2": I2.real, "K2": K2.real,
                     "imag": max(abs(A2.imag), abs((LA + AL).imag))})
        # weak form with Q moved onto the bra; a second Q application amplifies unresolved modes
        comm = inner(spec, av[0], av[1]) - inner(spec, av[1], av[0]) - 1j * inner(spec, v, lv[2])
        scale = norm(spec, av[0]) * norm(spec, av[1]) + norm(spec, lv[2])
        closure = max(closure, abs(comm) / scale)
    mean = {key: float(np.mean([r[key] for r in rows])) for key in ("L2", "A2", "I2", "K2")}
    j = j_from_casimir(mean["I2"])
    return CasimirEstimate(energy, len(rows), mean["L2"], mean["A2"], mean["I2"], mean["K2"], j,
                           2.0 * j + 1.0, closure, rows)

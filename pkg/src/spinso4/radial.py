"""Partial-wave eigenvalue oracle for the spin-symmetric Coulomb and oscillator problems.

With equal scalar and vector potentials the upper spinor obeys the
second-order equation [p^2 + (E + mass) V - (E^2 - mass^2)] phi = 0. For a
fixed trial energy E this is a linear Schrodinger-type problem whose
eigenvalue W(E) is found on an offset uniform radial grid; the bound-state
energy is the root of W(E) - (E^2 - mass^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import CoulombParams, LevelRecord, OscParams, coulomb_degeneracy, oscillator_bracket

PotentialTag = Literal["coulomb", "oscillator"]


class CutoffError(RuntimeError):
    """The eigenfunction has not decayed at R_max."""


class NoBoundState(RuntimeError):
    """The defect function has no sign change on the energy bracket."""

    def __init__(self, message: str, trace: "SCFTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class RadialProblem:
    """One partial wave: dimension, angular index, potential and radial grid.

    ``strength`` is k for the Coulomb tag and omega for the oscillator tag;
    ``mass`` is M or m respectively.
    """

    dimension: int
    lam: int
    potential: PotentialTag
    strength: float
    mass: float
    h: float
    r_max: float

    def __post_init__(self):
        if self.dimension not in (3, 4):
            raise ValueError("dimension must be 3 or 4")
        if self.lam < 0:
            raise ValueError("angular index must be >= 0")
        if self.potential not in ("coulomb", "oscillator"):
            raise ValueError(f"unknown potential {self.potential!r}")
        if self.h <= 0 or self.r_max <= 4 * self.h:
            raise ValueError("need h > 0 and r_max well above h")

    @classmethod
    def coulomb(cls, p: CoulombParams, l: int, h: Optional[float] = None,
                r_max: Optional[float] = None) -> "RadialProblem":
        if p.k <= 0:
            raise ValueError("Coulomb partial wave needs k > 0")
        # shortest Bohr radius is 1/(M k), reached as E -> M
        bohr = 1.0 / (p.M * p.k)
        if h is None:
            h = min(0.05, max(0.002, bohr / 40.0))
        if r_max is None:
            r_max = 30.0 * bohr * (l + 1)
        return cls(3, l, "coulomb", p.k, p.M, h, r_max)

    @classmethod
    def oscillator(cls, p: OscParams, lam: int, h: Optional[float] = None,
                   r_max: Optional[float] = None) -> "RadialProblem":
        length = (p.m * p.omega) ** -0.5
        if h is None:
            h = length / 400.0
        if r_max is None:
            r_max = 8.0 * length * math.sqrt(lam + 2)
        return cls(4, lam, "oscillator", p.omega, p.m, h, r_max)

    def potential_values(self, rho: np.ndarray) -> np.ndarray:
        if self.potential == "coulomb":
            return -self.strength / rho
        return 0.5 * self.mass * self.strength**2 * rho**2

    def centrifugal(self, rho: np.ndarray) -> np.ndarray:
        nu = self.lam + 0.5 * (self.dimension - 2)
        return (nu * nu - 0.25) / rho**2


@dataclass
class SCFTrace:
    """Every evaluation of the defect g(E) = W(E) - (E^2 - mass^2)."""

    iterations: list = field(default_factory=list)
    brackets: list = field(default_factory=list)
    converged: bool = False
    defect: float = math.nan  # defect at the returned root

    def record(self, energy: float, w: float, defect: float):
        self.iterations.append((energy, w, defect))


def _tridiagonal(prob: RadialProblem, energy: float, h: float):
    n = int(round(prob.r_max / h))
    rho = (np.arange(n) + 0.5) * h
    diag = 2.0 / h**2 + prob.centrifugal(rho) + (energy + prob.mass) * prob.potential_values(rho)
    # Dirichlet at rho = 0 through the odd ghost value chi(-h/2) = -chi(h/2)
    diag[0] += 1.0 / h**2
    off = np.full(n - 1, -1.0 / h**2)
    return diag, off


def sturm_count(diag: np.ndarray, off: np.ndarray, x: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal matrix below x."""
    count = 0
    q = diag[0] - x
    if q < 0:
        count += 1
    off2 = off * off
    tiny = np.finfo(float).tiny
    for i in range(1, len(diag)):
        if q == 0.0:
            q = tiny
        q = diag[i] - x - off2[i - 1] / q
        if q < 0:
            count += 1
    return count


def _grid_eigenpair(prob: RadialProblem, energy: float, n_r: int, h: float, vector: bool):
    diag, off = _tridiagonal(prob, energy, h)
    if n_r >= len(diag):
        raise IndexError(f"radial index {n_r} beyond the {len(diag)}-point window")
    if vector:
        w, v = eigh_tridiagonal(diag, off, select="i", select_range=(n_r, n_r),
                                lapack_driver="stebz")
        return float(w[0]), v[:, 0]
    w = eigh_tridiagonal(diag, off, select="i", select_range=(n_r, n_r),
                         eigvals_only=True, lapack_driver="stebz")
    return float(w[0]), None


def tail_ratio(vec: np.ndarray) -> float:
    """max |chi| over the outer tenth of the grid relative to max |chi|."""
    a = np.abs(vec)
    start = int(0.9 * len(a))
    return float(a[start:].max() / a.max())


def grid_eigenvalue(prob: RadialProblem, energy: float, n_r: int, h: Optional[float] = None) -> float:
    """Unextrapolated W at a single spacing (defaults to ``prob.h``)."""
    return _grid_eigenpair(prob, energy, n_r, prob.h if h is None else h, vector=False)[0]


def linear_radial_eigenvalue(prob: RadialProblem, energy: float, n_r: int,
                             check_tail: bool = False, tail_tol: float = 1e-10) -> float:
    """(n_r+1)-th eigenvalue W of the fixed-energy radial problem.

    Richardson-extrapolated from spacings h and h/2: W = (4 W_{h/2} - W_h) / 3.
    With ``check_tail`` the h/2 eigenfunction must have decayed below
    ``tail_tol`` over the outer tenth of the box.
    """
    if n_r < 0:
        raise ValueError("n_r must be >= 0")
    w_coarse = _grid_eigenpair(prob, energy, n_r, prob.h, vector=False)[0]
    w_fine, vec = _grid_eigenpair(prob, energy, n_r, 0.5 * prob.h, vector=check_tail)
    if check_tail:
        ratio = tail_ratio(vec)
        if ratio > tail_tol:
            raise CutoffError(f"tail ratio {ratio:.2e} at r_max={prob.r_max:g} exceeds {tail_tol:.0e}")
    return (4.0 * w_fine - w_coarse) / 3.0


def energy_bracket(prob: RadialProblem, n_r: int) -> tuple[float, float]:
    delta = 1e-9 * prob.mass
    if prob.potential == "coulomb":
        return -prob.mass + delta, prob.mass - delta
    N = 2 * n_r + prob.lam
    _, hi = oscillator_bracket(OscParams(prob.mass, prob.strength), N)
    return prob.mass + delta, hi


def _bracketed_root(g, a: float, b: float, ga: float, gb: float, trace: SCFTrace,
                    xtol: float, ftol: float, max_iter: int = 200) -> tuple[float, float]:
    """Illinois false position with bisection safeguard; keeps a sign-changing bracket.

    Returns the evaluated point with the smallest |g| and its defect.
    """
    best = (a, ga) if abs(ga) <= abs(gb) else (b, gb)
    side = 0
    for _ in range(max_iter):
        trace.brackets.append((a, b))
        c = (a * gb - b * ga) / (gb - ga)
        if not (min(a, b) < c < max(a, b)) or abs(b - a) > 0.5 * trace_width(trace):
            c = 0.5 * (a + b)
        gc = g(c)
        if abs(gc) < abs(best[1]):
            best = (c, gc)
        if abs(gc) <= ftol or abs(b - a) <= xtol:
            return best
        if (gc > 0) == (gb > 0):
            b, gb = c, gc
            if side == -1:
                ga *= 0.5
            side = -1
        else:
            a, ga = c, gc
            if side == 1:
                gb *= 0.5
            side = 1
    return best


def trace_width(trace: SCFTrace) -> float:
    # bisect whenever the bracket failed to halve over the last three steps
    if len(trace.brackets) < 4:
        return math.inf
    a, b = trace.brackets[-4]
    return abs(b - a)


def solve_self_consistent(prob: RadialProblem, n_r: int, ftol: float = 1e-10,
                          max_doublings: int = 6) -> tuple[float, SCFTrace]:
    """Bound-state energy E with W(E) = E^2 - mass^2 for radial index n_r.

    The box is doubled until the eigenfunction tail at the root is below
    1e-10 of its maximum.
    """
    for _ in range(max_doublings + 1):
        trace = SCFTrace()

        def g(e):
            w = linear_radial_eigenvalue(prob, e, n_r)
            d = w - (e * e - prob.mass**2)
            trace.record(e, w, d)
            return d

        lo, hi = energy_bracket(prob, n_r)
        g_lo, g_hi = g(lo), g(hi)
        if (g_lo > 0) == (g_hi > 0):
            # in a Coulomb box the highest levels may not be bound yet
            if prob.potential == "coulomb":
                prob = replace(prob, r_max=2.0 * prob.r_max)
                continue
            raise NoBoundState(f"no sign change of the defect on [{lo}, {hi}]", trace)
        energy, defect = _bracketed_root(g, lo, hi, g_lo, g_hi, trace, xtol=1e-15 * prob.mass,
                                         ftol=0.1 * ftol)
        _, vec = _grid_eigenpair(prob, energy, n_r, 0.5 * prob.h, vector=True)
        if tail_ratio(vec) > 1e-10:
            prob = replace(prob, r_max=2.0 * prob.r_max)
            continue
        trace.defect = defect
        trace.converged = abs(defect) <= ftol
        return energy, trace
    raise NoBoundState(f"no converged bound state after {max_doublings} box doublings", trace)


@dataclass
class DegeneracyScan:
    levels: list
    spread: dict

    def energies(self, n: int) -> list:
        return [rec.energy for rec in self.levels if rec.n == n]


def degeneracy_scan(p: CoulombParams, n_max: int, h: Optional[float] = None) -> DegeneracyScan:
    """E(n, l) for every l < n <= n_max with n_r = n - 1 - l."""
    if not 1 <= n_max <= 6:
        raise ValueError("n_max must lie in 1..6")
    levels = []
    spread = {}
    for n in range(1, n_max + 1):
        energies = []
        for l in range(n):
            prob = RadialProblem.coulomb(p, l, h=h, r_max=None)
            # the n-th level extends to roughly n^2 Bohr radii
            prob = replace(prob, r_max=max(prob.r_max, 12.0 * n * n / (p.M * p.k)))
            energy, _ = solve_self_consistent(prob, n - 1 - l)
            energies.append(energy)
            levels.append(LevelRecord(n=n, l=l, energy=energy, branch="plus", source="radial",
                                      degeneracy=coulomb_degeneracy(n)))
        spread[n] = max(energies) - min(energies)
    return DegeneracyScan(levels=levels, spread=spread)


def oscillator_level(p: OscParams, N: int, lam: Optional[int] = None,
                     h: Optional[float] = None) -> tuple[float, SCFTrace]:
    """4D level with N = 2 n_r + lam; lam defaults to N mod 2."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if lam is None:
        lam = N % 2
    if lam > N or (N - lam) % 2:
        raise ValueError(f"lam={lam} incompatible with N={N}")
    prob = RadialProblem.oscillator(p, lam, h=h)
    return solve_self_consistent(prob, (N - lam) // 2)

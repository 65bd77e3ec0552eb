"""Closed-form spectra and degeneracy counting.

Everything here is exact or root-polished to near machine precision and
serves as the analytic reference for the grid, radial and KS modules.
Natural units hbar = c = 1 throughout.
"""
from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Literal, Optional

Branch = Literal["plus", "minus"]
Source = Literal["closed_form", "radial", "grid", "quartic"]


@dataclass(frozen=True)
class CoulombParams:
    """Rest mass ``M`` and Coulomb strength ``k`` of V(r) = -k/r."""

    M: float = 1.0
    k: float = 0.8

    def __post_init__(self):
        if not (self.M > 0 and math.isfinite(self.M)):
            raise ValueError(f"M must be positive and finite, got {self.M!r}")
        if not (self.k >= 0 and math.isfinite(self.k)):
            raise ValueError(f"k must be non-negative and finite, got {self.k!r}")


@dataclass(frozen=True)
class OscParams:
    """Rest mass ``m`` and frequency ``omega`` of the 4D oscillator m w^2 u^2 / 2."""

    m: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ValueError(f"m must be positive and finite, got {self.m!r}")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be positive and finite, got {self.omega!r}")


@dataclass(frozen=True)
class LevelRecord:
    n: int
    energy: float
    branch: Branch = "plus"
    source: Source = "closed_form"
    degeneracy: int = 1
    l: Optional[int] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.l is not None and not 0 <= self.l < self.n:
            raise ValueError(f"need 0 <= l < n, got l={self.l}, n={self.n}")
        if self.degeneracy < 1:
            raise ValueError("degeneracy must be >= 1")

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "l": self.l,
            "energy": self.energy,
            "branch": self.branch,
            "source": self.source,
            "degeneracy": self.degeneracy,
        }


def _as_index(value, name: str, lowest: int) -> int:
    if isinstance(value, bool):
        raise TypeError(f"{name} must be an integer, got bool")
    try:
        idx = operator.index(value)
    except TypeError:
        raise TypeError(f"{name} must be an integer, got {value!r}") from None
    if idx < lowest:
        raise ValueError(f"{name} must be >= {lowest}, got {idx}")
    return idx


def energy_closed_form(p: CoulombParams, n: int, branch: Branch = "plus") -> float:
    """E = (+-4n^2 - k^2) / (4n^2 + k^2) * M.

    The minus branch is identically -M for every n and k.
    """
    n = _as_index(n, "n", 1)
    if branch not in ("plus", "minus"):
        raise ValueError(f"branch must be 'plus' or 'minus', got {branch!r}")
    four_n2 = 4.0 * n * n
    k2 = p.k * p.k
    sign = 1.0 if branch == "plus" else -1.0
    return (sign * four_n2 - k2) / (four_n2 + k2) * p.M


def nonrel_limit_energy(p: CoulombParams, n: int) -> float:
    """Rest mass plus the Bohr level, M - k^2 M / (2 n^2)."""
    n = _as_index(n, "n", 1)
    return p.M - p.k * p.k * p.M / (2.0 * n * n)


def oscillator_bracket(p: OscParams, N: int) -> tuple[float, float]:
    """Interval [m, hi] that always contains the physical quartic root."""
    N = _as_index(N, "N", 0)
    c = 2.0 * p.m * p.omega**2
    hi = p.m + 2.0 * c ** (1.0 / 3.0) * (N + 2) ** (2.0 / 3.0) + 1.0
    return p.m, hi


def oscillator_energy(p: OscParams, N: int, rtol: float = 1e-14) -> float:
    """Physical root eps > m of (eps+m)^2 (eps-m)^2 = 2 m w^2 (eps+m) (N+2)^2.

    The double root eps = -m is divided out, leaving the cubic
    (eps+m)(eps-m)^2 = 2 m w^2 (N+2)^2. It is solved for t = eps - m > 0,
    t^2 (t + 2m) = c, which is monotone on t > 0 and avoids cancellation
    when omega is small.
    """
    N = _as_index(N, "N", 0)
    m = p.m
    c = 2.0 * m * p.omega**2 * (N + 2) ** 2
    lo, hi = 0.0, oscillator_bracket(p, N)[1] - m

    def g(t):
        return t * t * (t + 2.0 * m) - c

    # bisection down to a coarse bracket, then guarded Newton
    t = 0.5 * (lo + hi)
    for _ in range(200):
        val = g(t)
        if val > 0:
            hi = t
        else:
            lo = t
        if hi - lo <= 1e-3 * hi:
            break
        t = 0.5 * (lo + hi)
    t = 0.5 * (lo + hi)
    for _ in range(100):
        val = g(t)
        slope = t * (3.0 * t + 4.0 * m)
        step = val / slope if slope > 0 else 0.0
        t_new = t - step
        if not lo <= t_new <= hi:
            t_new = 0.5 * (lo + hi)
        if val > 0:
            hi = min(hi, t)
        elif val < 0:
            lo = max(lo, t)
        if abs(t_new - t) <= rtol * t_new or val == 0:
            t = t_new
            break
        t = t_new
    return m + t


def quartic_residual(p: OscParams, N: int, eps: float) -> float:
    """(eps+m)^2 (eps-m)^2 - 2 m w^2 (eps+m)(N+2)^2 scaled by its first term."""
    m = p.m
    lhs = (eps + m) ** 2 * (eps - m) ** 2
    rhs = 2.0 * m * p.omega**2 * (eps + m) * (N + 2) ** 2
    return (lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def constrained_degeneracy(N: int) -> int:
    """Number of (n1, n2, n3, n4) >= 0 with n1 + n2 = n3 + n4 and sum N."""
    N = _as_index(N, "N", 0)
    if N % 2:
        return 0
    q = N // 2
    # n1+n2 = q has q+1 solutions, independently for n3+n4
    return (q + 1) ** 2


def enumerate_constrained_states(N: int) -> int:
    """Brute-force count of 4D oscillator states with n1 + n2 = n3 + n4 at total N."""
    N = _as_index(N, "N", 0)
    count = 0
    for n1 in range(N + 1):
        for n2 in range(N + 1 - n1):
            for n3 in range(N + 1 - n1 - n2):
                n4 = N - n1 - n2 - n3
                count += n1 + n2 == n3 + n4
    return count


def orbital_degeneracy(n: int) -> int:
    """sum_{l<n} (2l+1) = n^2, the dimension of the SO(4) irrep (j, j)."""
    n = _as_index(n, "n", 1)
    return n * n


def coulomb_degeneracy(n: int) -> int:
    """Total multiplicity 2 n^2: orbital n^2 times the conserved spin doublet."""
    return 2 * orbital_degeneracy(n)


def casimir_value(p: CoulombParams, energy: float) -> float:
    """Scalar value of I^2 = K^2 = [-k^2 (E+M) / (4 (E-M)) - 1] / 4 at energy E."""
    if not -p.M < energy < p.M:
        raise ValueError("Casimir value needs |E| < M")
    return 0.25 * (-(p.k**2) * (energy + p.M) / (4.0 * (energy - p.M)) - 1.0)


def j_from_casimir(value: float) -> float:
    """Invert j(j+1) = value for j >= 0 (clipped at zero for small negatives)."""
    return 0.5 * (-1.0 + math.sqrt(max(1.0 + 4.0 * value, 0.0)))


def closed_form_levels(p: CoulombParams, n_max: int) -> list[LevelRecord]:
    return [
        LevelRecord(
            n=n,
            energy=energy_closed_form(p, n),
            branch="plus",
            source="closed_form",
            degeneracy=coulomb_degeneracy(n),
        )
        for n in range(1, n_max + 1)
    ]

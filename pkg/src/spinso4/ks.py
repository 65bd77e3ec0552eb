"""Kustaanheimo-Stiefel bridge between the 4D oscillator and 3D Coulomb problems.

Two index conventions of the KS map appear here. ``ks_point`` is the form
x = (2(u1u3 - u2u4), 2(u1u4 + u2u3), u1^2 + u2^2 - u3^2 - u4^2). The
constraint u4P1 - u1P4 + u2P3 - u3P2 = 0 and the matrix
Gamma = u1 + i u2 s3 - i u3 s2 + i u4 s1 belong instead to the labelling
x = (u1^2 - u2^2 - u3^2 + u4^2, 2(u1u2 - u3u4), 2(u1u3 + u2u4)), returned by
``ks_point_matched``. The two maps differ by a relabelling of u and a cyclic
relabelling of x. The phase-space lift and the B identity use the matched
map; with the other map the kinetic identity fails off a measure-zero set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .model import OscParams, _as_index, oscillator_energy

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
IDENTITY2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class PhasePoint4:
    u: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float).reshape(4))
        object.__setattr__(self, "P", np.asarray(self.P, dtype=float).reshape(4))


@dataclass(frozen=True)
class PhasePoint3:
    x: np.ndarray
    p: np.ndarray


@dataclass(frozen=True)
class MappedParams:
    M: float
    E: float
    k: float
    m: float
    omega: float
    epsilon: float
    N: int
    n: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class ConstraintViolation(ValueError):
    """Raised when a 4D phase point is off the KS constraint surface."""

    def __init__(self, value: float, tol: float):
        super().__init__(f"constraint value {value:.3e} exceeds tolerance {tol:.3e}")
        self.value = value
        self.tol = tol


def ks_point(u) -> np.ndarray:
    """x = (2(u1u3 - u2u4), 2(u1u4 + u2u3), u1^2 + u2^2 - u3^2 - u4^2).

    Accepts a single 4-vector or an array of shape (..., 4).
    """
    u = np.asarray(u, dtype=float)
    u1, u2, u3, u4 = np.moveaxis(u, -1, 0)
    return np.stack(
        [
            2.0 * (u1 * u3 - u2 * u4),
            2.0 * (u1 * u4 + u2 * u3),
            u1**2 + u2**2 - u3**2 - u4**2,
        ],
        axis=-1,
    )


def half_jacobian(u) -> np.ndarray:
    """A(u) = (dx/du)/2 of ``ks_point``, shape (..., 3, 4)."""
    u = np.asarray(u, dtype=float)
    u1, u2, u3, u4 = np.moveaxis(u, -1, 0)
    rows = [
        [u3, -u4, u1, -u2],
        [u4, u3, u2, u1],
        [u1, u2, -u3, -u4],
    ]
    return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def ks_point_matched(u) -> np.ndarray:
    """KS map in the labelling compatible with the constraint and Gamma."""
    u = np.asarray(u, dtype=float)
    u1, u2, u3, u4 = np.moveaxis(u, -1, 0)
    return np.stack(
        [
            u1**2 - u2**2 - u3**2 + u4**2,
            2.0 * (u1 * u2 - u3 * u4),
            2.0 * (u1 * u3 + u2 * u4),
        ],
        axis=-1,
    )


def half_jacobian_matched(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    u1, u2, u3, u4 = np.moveaxis(u, -1, 0)
    rows = [
        [u1, -u2, -u3, u4],
        [u2, u1, -u4, -u3],
        [u3, u4, u1, u2],
    ]
    return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def constraint_value(pt: PhasePoint4) -> float:
    u, P = pt.u, pt.P
    return float(u[3] * P[0] - u[0] * P[3] + u[1] * P[2] - u[2] * P[1])


def constraint_gradient(u) -> np.ndarray:
    """d(constraint)/dP = (u4, -u3, u2, -u1); also the fibre direction in u."""
    u = np.asarray(u, dtype=float)
    u1, u2, u3, u4 = np.moveaxis(u, -1, 0)
    return np.stack([u4, -u3, u2, -u1], axis=-1)


def project_to_constraint(u, P) -> np.ndarray:
    """Remove the component of P along the constraint gradient."""
    u = np.asarray(u, dtype=float)
    P = np.asarray(P, dtype=float)
    g = constraint_gradient(u)
    coef = np.sum(g * P, axis=-1, keepdims=True) / np.sum(g * g, axis=-1, keepdims=True)
    return P - coef * g


def random_constrained_points(count: int, seed: int, scale: float = 1.0):
    """(u, P) arrays of shape (count, 4) with P projected onto the constraint."""
    rng = np.random.default_rng(seed)
    u = rng.normal(scale=scale, size=(count, 4))
    P = rng.normal(scale=scale, size=(count, 4))
    return u, project_to_constraint(u, P)


def lift_momentum(u, P) -> np.ndarray:
    """p = A(u) P / (2 u.u) with A the matched half Jacobian; vectorised."""
    u = np.asarray(u, dtype=float)
    P = np.asarray(P, dtype=float)
    A = half_jacobian_matched(u)
    r = np.sum(u * u, axis=-1)
    return np.einsum("...ij,...j->...i", A, P) / (2.0 * r)[..., None]


def ks_lift(pt: PhasePoint4, tol: float = 1e-10) -> PhasePoint3:
    u, P = pt.u, pt.P
    r = float(u @ u)
    if r == 0.0:
        raise ValueError("KS lift undefined at u = 0")
    c = constraint_value(pt)
    bound = tol * np.linalg.norm(u) * np.linalg.norm(P)
    if abs(c) > bound:
        raise ConstraintViolation(c, bound)
    return PhasePoint3(x=ks_point_matched(u), p=lift_momentum(u, P))


def kinetic_identity_residual(u, P) -> np.ndarray:
    """|P.P - 4 r p.p| / P.P, r = |x| = u.u; vectorised over leading axes."""
    u = np.asarray(u, dtype=float)
    P = np.asarray(P, dtype=float)
    p = lift_momentum(u, P)
    r = np.sum(u * u, axis=-1)
    PP = np.sum(P * P, axis=-1)
    diff = np.abs(PP - 4.0 * r * np.sum(p * p, axis=-1))
    return diff / np.where(PP > 0, PP, 1.0)


def gamma_of(u) -> np.ndarray:
    """Gamma = u1 + i u2 s3 - i u3 s2 + i u4 s1, shape (..., 2, 2)."""
    u = np.asarray(u, dtype=float)
    u1, u2, u3, u4 = (c[..., None, None] for c in np.moveaxis(u, -1, 0))
    return u1 * IDENTITY2 + 1j * (u2 * SIGMA[2] - u3 * SIGMA[1] + u4 * SIGMA[0])


def b_of(P) -> np.ndarray:
    """B = sigma^mu P_mu with sigma^4 = i."""
    P = np.asarray(P, dtype=float)
    P1, P2, P3, P4 = (c[..., None, None] for c in np.moveaxis(P, -1, 0))
    return P1 * SIGMA[0] + P2 * SIGMA[1] + P3 * SIGMA[2] + 1j * P4 * IDENTITY2


def sigma_dot(p) -> np.ndarray:
    p = np.asarray(p)
    return np.einsum("...i,iab->...ab", p, SIGMA)


def gamma_norm_residual(u) -> np.ndarray:
    """||Gamma Gamma^dag - (u.u) I||_F / (u.u)."""
    G = gamma_of(u)
    r = np.sum(np.asarray(u, dtype=float) ** 2, axis=-1)
    diff = G @ np.conj(np.swapaxes(G, -1, -2)) - r[..., None, None] * IDENTITY2
    return np.linalg.norm(diff, axis=(-2, -1)) / r


def b_identity_residual_batch(u, P) -> np.ndarray:
    """||B - 2 Gamma sigma.p||_F / ||B||_F with p from the lift, vectorised."""
    u = np.asarray(u, dtype=float)
    P = np.asarray(P, dtype=float)
    p = lift_momentum(u, P)
    B = b_of(P)
    rhs = 2.0 * gamma_of(u) @ sigma_dot(p)
    num = np.linalg.norm(B - rhs, axis=(-2, -1))
    den = np.linalg.norm(B, axis=(-2, -1))
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), num)


def b_identity_residual(pt: PhasePoint4) -> float:
    """Relative residual of B = 2 Gamma sigma.p at a constrained point.

    Does not itself enforce the constraint, so it doubles as the
    off-surface negative control.
    """
    return float(b_identity_residual_batch(pt.u, pt.P))


def constraint_flow(pt: PhasePoint4, t_final: float, rtol: float = 1e-12):
    """Integrate the Hamiltonian flow generated by the constraint function.

    du/dt = dC/dP, dP/dt = -dC/du. Returns the end point as a PhasePoint4.
    """

    def rhs(_t, y):
        u, P = y[:4], y[4:]
        du = constraint_gradient(u)
        dP = np.array([P[3], -P[2], P[1], -P[0]])
        return np.concatenate([du, dP])

    y0 = np.concatenate([pt.u, pt.P])
    sol = solve_ivp(rhs, (0.0, t_final), y0, method="DOP853", rtol=rtol, atol=rtol * 1e-2)
    return PhasePoint4(sol.y[:4, -1], sol.y[4:, -1])


def map_oscillator_to_hydrogen(p: OscParams, N: int) -> MappedParams:
    """Parameter map M + E = m + eps, M - E = m w^2 / 8, k = (eps - m) / 4."""
    N = _as_index(N, "N", 0)
    if N % 2:
        raise ValueError(f"N must be even on the constraint surface, got {N}")
    eps = oscillator_energy(p, N)
    return mapped_from_epsilon(p, N, eps)


def mapped_from_epsilon(p: OscParams, N: int, eps: float) -> MappedParams:
    """Same map for a caller-supplied eps (used for sensitivity controls)."""
    half_sum = 0.5 * (p.m + eps)
    half_diff = p.m * p.omega**2 / 16.0
    return MappedParams(
        M=half_sum + half_diff,
        E=half_sum - half_diff,
        k=0.25 * (eps - p.m),
        m=p.m,
        omega=p.omega,
        epsilon=eps,
        N=N,
        n=(N + 2) // 2,
    )


def spectrum_identity_residual(mp: MappedParams) -> float:
    """|4n^2 (M-E) - k^2 (M+E)| / (4n^2 (M-E) + k^2 (M+E)).

    Zero exactly when E = (4n^2 - k^2) M / (4n^2 + k^2).
    """
    four_n2 = 4.0 * mp.n**2
    a = four_n2 * (mp.M - mp.E)
    b = mp.k**2 * (mp.M + mp.E)
    return abs(a - b) / (a + b)

"""Matrix-free operators of the spin-symmetric Dirac-Coulomb problem on the spectral grid.

Every operator is a ``LinOp`` acting on complex arrays of shape
(components, N, N, N). Position-space multipliers act pointwise; momentum
multipliers act pointwise after the unitary offset transform. Vector
operators (L, S, Q, f) are ``VectorOp`` objects whose three components are
produced together, because they share most of their transforms.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .grid import GridSpec, Grid, grid_for, join, lower, upper
from .model import CoulombParams

EPS = np.finfo(float).eps
LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_j, _i, _k] = -1.0


class LinOp:
    """Linear map on fields, available only through ``apply``."""

    def __init__(self, apply: Callable[[np.ndarray], np.ndarray], label: str,
                 hermitian: bool = False):
        self.apply = apply
        self.label = label
        self.hermitian = hermitian

    def __call__(self, f: np.ndarray) -> np.ndarray:
        return self.apply(f)

    def __repr__(self):
        return f"LinOp({self.label})"

    def __matmul__(self, other: "LinOp") -> "LinOp":
        return LinOp(lambda f: self.apply(other.apply(f)), f"{self.label}*{other.label}")

    def __add__(self, other: "LinOp") -> "LinOp":
        return LinOp(lambda f: self.apply(f) + other.apply(f), f"({self.label}+{other.label})",
                     self.hermitian and other.hermitian)

    def __sub__(self, other: "LinOp") -> "LinOp":
        return LinOp(lambda f: self.apply(f) - other.apply(f), f"({self.label}-{other.label})",
                     self.hermitian and other.hermitian)

    def __rmul__(self, scalar) -> "LinOp":
        scalar = complex(scalar) if np.iscomplexobj(scalar) else float(scalar)
        return LinOp(lambda f: scalar * self.apply(f), f"{scalar:g}*{self.label}",
                     self.hermitian and np.isreal(scalar))

    def __neg__(self) -> "LinOp":
        return (-1.0) * self


def identity(label: str = "1") -> LinOp:
    return LinOp(lambda f: f.copy(), label, hermitian=True)


def scaled_identity(c, label: str | None = None) -> LinOp:
    return LinOp(lambda f: c * f, label or f"{c:g}", hermitian=bool(np.isreal(c)))


def zero_op() -> LinOp:
    return LinOp(np.zeros_like, "0", hermitian=True)


def commutator(X: LinOp, Y: LinOp) -> LinOp:
    return LinOp(lambda f: X.apply(Y.apply(f)) - Y.apply(X.apply(f)), f"[{X.label},{Y.label}]")


class VectorOp:
    """Three operator components applied together by ``apply_all``."""

    def __init__(self, apply_all: Callable[[np.ndarray], list], label: str,
                 hermitian: bool = False):
        self.apply_all = apply_all
        self.label = label
        self.hermitian = hermitian

    def component(self, i: int) -> LinOp:
        return LinOp(lambda f: self.apply_all(f)[i], f"{self.label}{'xyz'[i]}", self.hermitian)

    @property
    def components(self) -> list:
        return [self.component(i) for i in range(3)]

    def squared(self) -> LinOp:
        """sum_i X_i X_i."""

        def apply(f):
            first = self.apply_all(f)
            return sum(self.apply_all(g)[i] for i, g in enumerate(first))

        return LinOp(apply, f"{self.label}^2", self.hermitian)

    def dot(self, other: "VectorOp") -> LinOp:
        """sum_i X_i Y_i, with Y applied first."""

        def apply(f):
            inner_ = other.apply_all(f)
            return sum(self.apply_all(g)[i] for i, g in enumerate(inner_))

        return LinOp(apply, f"{self.label}.{other.label}")


# Pauli-level kernels ---------------------------------------------------------

def sigma_dot_hat(g: Grid, fhat: np.ndarray, scale: np.ndarray | None = None) -> np.ndarray:
    """(sigma . p) on a momentum-space 2-spinor, optionally times a multiplier."""
    px, py, pz = g.p
    a, b = fhat[0], fhat[1]
    out = np.empty_like(fhat)
    out[0] = pz * a + (px - 1j * py) * b
    out[1] = (px + 1j * py) * a - pz * b
    if scale is not None:
        out *= scale
    return out


def sigma_dot_p(g: Grid, f: np.ndarray) -> np.ndarray:
    return g.to_position(sigma_dot_hat(g, g.to_momentum(f)))


def helicity(g: Grid, f: np.ndarray) -> np.ndarray:
    """U_p = sigma . p / |p|; Hermitian and unitary."""
    return g.to_position(sigma_dot_hat(g, g.to_momentum(f), 1.0 / g.pabs))


def sigma_apply(i: int, f: np.ndarray) -> np.ndarray:
    a, b = f[0], f[1]
    if i == 0:
        return np.stack([b, a])
    if i == 1:
        return np.stack([-1j * b, 1j * a])
    return np.stack([a, -b])


def gradient_from_hat(g: Grid, fhat: np.ndarray) -> list:
    """[p_x f, p_y f, p_z f] in position space from the transform of f."""
    return [g.to_position(pc * fhat) for pc in g.p]


def orbital_l(g: Grid, f: np.ndarray, fhat: np.ndarray | None = None) -> list:
    """l = r x p, componentwise on every spinor component."""
    if fhat is None:
        fhat = g.to_momentum(f)
    grad = gradient_from_hat(g, fhat)
    x = g.x
    return [x[1] * grad[2] - x[2] * grad[1],
            x[2] * grad[0] - x[0] * grad[2],
            x[0] * grad[1] - x[1] * grad[0]]


def runge_f(g: Grid, f: np.ndarray) -> list:
    """f = p x l - l x p, kept in this order (not rewritten as 2 p x l - 2i p)."""
    fhat = g.to_momentum(f)
    p = g.p
    x = g.x
    lvec = orbital_l(g, f, fhat)
    lhat = [g.to_momentum(c) for c in lvec]
    # (p x l)_i = eps_ijk p_j l_k, assembled in momentum space
    pxl = [g.to_position(p[1] * lhat[2] - p[2] * lhat[1]),
           g.to_position(p[2] * lhat[0] - p[0] * lhat[2]),
           g.to_position(p[0] * lhat[1] - p[1] * lhat[0])]
    # (l x p)_i = eps_ijk l_j p_k with l_j = eps_jab x_a p_b, so l_j p_k f = eps_jab x_a (p_b p_k f)
    pp = {}
    for b in range(3):
        for c in range(b, 3):
            pp[b, c] = pp[c, b] = g.to_position(p[b] * p[c] * fhat)
    out = []
    for i in range(3):
        acc = pxl[i]
        for j in range(3):
            for k in range(3):
                e_ijk = LEVI_CIVITA[i, j, k]
                if e_ijk == 0.0:
                    continue
                for a in range(3):
                    for b in range(3):
                        e_jab = LEVI_CIVITA[j, a, b]
                        if e_jab != 0.0:
                            acc = acc - (e_ijk * e_jab) * (x[a] * pp[b, k])
        out.append(acc)
    return out


def _pos_op(spec: GridSpec, arr_name: str, label: str) -> LinOp:
    g = grid_for(spec)
    arr = getattr(g, arr_name)
    return LinOp(lambda f: arr * f, label, hermitian=True)


def potential_op(p: CoulombParams, spec: GridSpec) -> LinOp:
    g = grid_for(spec)
    v = -p.k * g.inv_r
    return LinOp(lambda f: v * f, "V", hermitian=True)


def position_op(spec: GridSpec, i: int) -> LinOp:
    g = grid_for(spec)
    return LinOp(lambda f: g.x[i] * f, f"x{'xyz'[i]}", hermitian=True)


def momentum_op(spec: GridSpec, i: int) -> LinOp:
    g = grid_for(spec)
    return LinOp(lambda f: g.to_position(g.p[i] * g.to_momentum(f)), f"p{'xyz'[i]}", hermitian=True)


def momentum_multiplier(spec: GridSpec, name: str) -> LinOp:
    """Diagonal momentum multiplier by grid attribute name: 'p2', 'inv_p2', 'pabs'."""
    g = grid_for(spec)
    arr = getattr(g, name)
    return LinOp(lambda f: g.to_position(arr * g.to_momentum(f)), name, hermitian=True)


def rhat_op(spec: GridSpec, i: int) -> LinOp:
    g = grid_for(spec)
    return LinOp(lambda f: g.rhat[i] * f, f"rhat{'xyz'[i]}", hermitian=True)


def runge_f_op(spec: GridSpec) -> VectorOp:
    g = grid_for(spec)
    return VectorOp(lambda f: runge_f(g, f), "f", hermitian=True)


def orbital_l_op(spec: GridSpec) -> VectorOp:
    g = grid_for(spec)
    return VectorOp(lambda f: orbital_l(g, f), "l", hermitian=True)


def sigma_dot_p_op(spec: GridSpec) -> LinOp:
    g = grid_for(spec)
    return LinOp(lambda f: sigma_dot_p(g, f), "sigma.p", hermitian=True)


def helicity_op(spec: GridSpec) -> LinOp:
    g = grid_for(spec)
    return LinOp(lambda f: helicity(g, f), "U_p", hermitian=True)


def pauli_block_ops(p: CoulombParams, spec: GridSpec) -> dict:
    """Blocks of Q on Pauli fields: Q11, Q12 (= Q21), Q22 and the potential.

    Q11 = 2M R + k r/r^2 with R = f/(2Mk) - r/r; Q12 = -r/r; Q22 = f/(k p^2)
    with 1/p^2 applied after f.
    """
    if p.k <= 0:
        raise ValueError("Q needs k > 0")
    g = grid_for(spec)
    M, k = p.M, p.k
    rhat = g.rhat
    inv_r = g.inv_r

    def q11(f):
        fv = runge_f(g, f)
        return [fv[i] / k - 2.0 * M * rhat[i] * f + k * rhat[i] * inv_r * f for i in range(3)]

    def q12(f):
        return [-rhat[i] * f for i in range(3)]

    def q22(f):
        fv = runge_f(g, f)
        return [g.to_position(g.inv_p2 * g.to_momentum(c)) / k for c in fv]

    def runge_r(f):
        fv = runge_f(g, f)
        return [fv[i] / (2.0 * M * k) - rhat[i] * f for i in range(3)]

    return {
        "Q11": VectorOp(q11, "Q11", hermitian=True),
        "Q12": VectorOp(q12, "Q12", hermitian=True),
        "Q21": VectorOp(q12, "Q21", hermitian=True),
        "Q22": VectorOp(q22, "Q22"),
        "R": VectorOp(runge_r, "R", hermitian=True),
        "V": potential_op(p, spec),
        "p2": momentum_multiplier(spec, "p2"),
    }


# Dirac-level operators -------------------------------------------------------

def _swap_sigma_dot_p(g: Grid, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(sigma.p f_upper, sigma.p f_lower) with one forward/inverse pair."""
    fhat = g.to_momentum(f)
    out = np.empty_like(fhat)
    out[:2] = sigma_dot_hat(g, fhat[:2])
    out[2:] = sigma_dot_hat(g, fhat[2:])
    back = g.to_position(out)
    return back[:2], back[2:]


def build_hamiltonian(p: CoulombParams, spec: GridSpec) -> LinOp:
    """H = alpha.p + beta M + (1 + beta) V / 2 with V = -k/r."""
    g = grid_for(spec)
    M = p.M
    v = -p.k * g.inv_r

    def apply(f):
        sp_up, sp_low = _swap_sigma_dot_p(g, f)
        return join((M + v) * f[:2] + sp_low, sp_up - M * f[2:])

    return LinOp(apply, "H", hermitian=True)


def build_free_hamiltonian(p: CoulombParams, spec: GridSpec) -> LinOp:
    return build_hamiltonian(CoulombParams(p.M, 0.0), spec)


def polynomial_in(H: LinOp, coeffs: Sequence[float], label: str) -> LinOp:
    """sum_n coeffs[n] H^n by Horner's rule."""

    def apply(f):
        acc = coeffs[-1] * f
        for c in reversed(coeffs[:-1]):
            acc = H.apply(acc) + c * f
        return acc

    return LinOp(apply, label, hermitian=H.hermitian)


def build_L(spec: GridSpec) -> VectorOp:
    """Deformed orbital angular momentum: l on the upper, U_p l U_p on the lower pair."""
    g = grid_for(spec)

    def apply_all(f):
        up = orbital_l(g, f[:2])
        uhat = sigma_dot_hat(g, g.to_momentum(f[2:]), 1.0 / g.pabs)
        low = orbital_l(g, None, uhat)
        return [join(up[i], helicity(g, low[i])) for i in range(3)]

    return VectorOp(apply_all, "L", hermitian=True)


def build_S(spec: GridSpec) -> VectorOp:
    """Deformed spin: s = sigma/2 on the upper, U_p s U_p on the lower pair."""
    g = grid_for(spec)

    def apply_all(f):
        uf = helicity(g, f[2:])
        return [join(0.5 * sigma_apply(i, f[:2]), helicity(g, 0.5 * sigma_apply(i, uf)))
                for i in range(3)]

    return VectorOp(apply_all, "S", hermitian=True)


def build_J(spec: GridSpec) -> VectorOp:
    """Undeformed total angular momentum l + s on all four components."""
    g = grid_for(spec)

    def apply_all(f):
        lv = orbital_l(g, f)
        return [lv[i] + join(0.5 * sigma_apply(i, f[:2]), 0.5 * sigma_apply(i, f[2:])) for i in range(3)]

    return VectorOp(apply_all, "J", hermitian=True)


def build_Q(p: CoulombParams, spec: GridSpec) -> VectorOp:
    """Conserved vector Q, blockwise

        [[2M R + k r/r^2,      (-r/r) sigma.p                 ],
         [sigma.p (-r/r),      sigma.p (f / (k p^2)) sigma.p  ]].
    """
    if p.k <= 0:
        raise ValueError("Q is undefined for k = 0")
    g = grid_for(spec)
    M, k = p.M, p.k
    rhat = g.rhat
    inv_r = g.inv_r

    def apply_all(f):
        fu = f[:2]
        sp_low = sigma_dot_p(g, f[2:])
        f_up = runge_f(g, fu)
        f_low = runge_f(g, sp_low)
        out = []
        for i in range(3):
            up = f_up[i] / k - 2.0 * M * rhat[i] * fu + k * rhat[i] * inv_r * fu - rhat[i] * sp_low
            low_hat = -g.to_momentum(rhat[i] * fu) + g.inv_p2 * g.to_momentum(f_low[i]) / k
            low = g.to_position(sigma_dot_hat(g, low_hat))
            out.append(join(up, low))
        return out

    # Hermitian only up to the ordering of f and 1/p^2; measured, not assumed
    return VectorOp(apply_all, "Q", hermitian=False)


def normalized_A(p: CoulombParams, spec: GridSpec, energy: float) -> VectorOp:
    """A = [(-4/k^2)(E^2 - M^2)]^(-1/2) Q with H replaced by the scalar E."""
    if not abs(energy) < p.M:
        raise ValueError("A needs |E| < M for a real normalisation")
    scale = (-4.0 / p.k**2 * (energy**2 - p.M**2)) ** -0.5
    Q = build_Q(p, spec)
    return VectorOp(lambda f: [scale * c for c in Q.apply_all(f)], "A")


def upper_embed(f2: np.ndarray) -> np.ndarray:
    return join(f2, np.zeros_like(f2))

"""Probe-based residual engine for the operator algebra.

Every check applies operators to a small set of seeded Gaussian packets and
reports scale-free relative residuals. Probes are placed off the origin and
boosted away from p = 0: the singular multipliers 1/r and 1/p^2 are finite
on the offset grid but unresolved there, and the momentum mesh 2 pi / L does
not refine when only the number of points grows.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .grid import (TAIL_BOUND, GridSpec, gaussian_packet, grid_for, join, momentum_tail, norm,
                   position_tail, inner)
from .model import CoulombParams, energy_closed_form, nonrel_limit_energy
from .operators import (EPS, LEVI_CIVITA, LinOp, build_hamiltonian, build_L, build_Q, build_S,
                        runge_f, sigma_dot_p)
from .radial import RadialProblem, solve_self_consistent

# ladder checks that are exact on the grid sit at round-off at every level
EXACT_FLOOR = 1e-12


@dataclass(frozen=True)
class ProbePolicy:
    """Gaussian packets of width L * width_fraction.

    Centres sit ``center_widths`` widths from the origin and boosts have
    magnitude ``boost_widths`` / width. Both point along cube diagonals with
    random signs, the directions that leave the most room to the box faces
    and to the edge of the momentum window.
    """

    count: int = 8
    width_fraction: float = 1.0 / 19.5
    center_widths: float = 3.9
    boost_widths: float = 4.6

    def width(self, spec: GridSpec) -> float:
        return spec.box_length * self.width_fraction


DEFAULT_POLICY = ProbePolicy()


class ProbeError(ValueError):
    """A probe violates the position or momentum tail bound."""


def _direction(rng: np.random.Generator) -> np.ndarray:
    return rng.choice([-1.0, 1.0], size=3) / np.sqrt(3.0)


def make_probes(spec: GridSpec, seed: int, policy: ProbePolicy = DEFAULT_POLICY,
                reference: Optional[GridSpec] = None, count: Optional[int] = None) -> list:
    """Seeded Dirac packets on ``spec``.

    Tails are validated in position space on ``spec`` and in momentum space
    on ``reference`` (the finest grid of a ladder; defaults to ``spec``).
    """
    reference = spec if reference is None else reference
    if reference.box_length != spec.box_length:
        raise ProbeError("reference grid must share the box length")
    count = policy.count if count is None else count
    rng = np.random.default_rng(seed)
    w = policy.width(spec)
    probes = []
    for _ in range(count):
        center = policy.center_widths * w * _direction(rng)
        boost = policy.boost_widths / w * _direction(rng)
        pol = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        pt = position_tail(spec, center, w)
        mt = momentum_tail(reference, boost, w)
        if pt > TAIL_BOUND or mt > TAIL_BOUND:
            raise ProbeError(
                f"probe tails {pt:.1e} (position) / {mt:.1e} (momentum, N={reference.points_per_axis})"
                f" exceed {TAIL_BOUND:.0e}"
            )
        probes.append(gaussian_packet(spec, center, w, boost, polarization=pol))
    return probes


@dataclass(frozen=True)
class ResidualReport:
    labels: tuple
    probe_count: int
    max_residual: float
    mean_residual: float
    points_per_axis: int
    box_length: float
    seed: int
    residuals: tuple = field(default=(), repr=False)

    @classmethod
    def from_values(cls, labels, values: Sequence[float], spec: GridSpec, seed: int,
                    probe_count: int) -> "ResidualReport":
        vals = tuple(float(v) for v in values)
        return cls(tuple(labels), probe_count, max(vals), float(np.mean(vals)),
                   spec.points_per_axis, spec.box_length, seed, vals)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["labels"] = list(self.labels)
        d["residuals"] = list(self.residuals)
        return d


def relative_residual(spec: GridSpec, res, scale: float) -> float:
    return norm(spec, res) / (scale + EPS)


def _resolve_probes(spec, probes, seed, policy, reference):
    if isinstance(probes, int):
        return make_probes(spec, seed, policy, reference, count=probes)
    return list(probes)


def commutator_residual(X: LinOp, Y: LinOp, expected: Optional[LinOp] = None, *, spec: GridSpec,
                        probes=8, seed: int = 0, policy: ProbePolicy = DEFAULT_POLICY,
                        reference: Optional[GridSpec] = None) -> ResidualReport:
    """||(XY - YX - expected) v|| / (||Xv|| ||Yv|| / ||v|| + ||expected v||) over probes.

    ``probes`` is a count of seeded packets or an explicit list of fields.
    """
    fields = _resolve_probes(spec, probes, seed, policy, reference)
    values = []
    for v in fields:
        xv, yv = X(v), Y(v)
        res = X(yv) - Y(xv)
        if res.shape != v.shape:
            raise ValueError(f"operator output shape {res.shape} differs from probe {v.shape}")
        scale = norm(spec, xv) * norm(spec, yv) / norm(spec, v)
        if expected is not None:
            ev = expected(v)
            res = res - ev
            scale += norm(spec, ev)
        values.append(relative_residual(spec, res, scale))
    label = expected.label if expected is not None else "0"
    return ResidualReport.from_values((X.label, Y.label, label), values, spec, seed, len(fields))


def adjoint_residual(spec: GridSpec, T: LinOp, f, g) -> float:
    """|<f, T g> - <T f, g>| / (||f|| ||T g||)."""
    tg = T(g)
    a = inner(spec, f, tg)
    b = inner(spec, T(f), g)
    return abs(a - b) / (norm(spec, f) * norm(spec, tg) + EPS)


def linearity_residual(spec: GridSpec, T: LinOp, f, g, alpha: complex, beta: complex) -> float:
    """||T(a f + b g) - a T f - b T g|| / (||T f|| + ||T g||)."""
    tf, tg = T(f), T(g)
    res = T(alpha * f + beta * g) - alpha * tf - beta * tg
    return norm(spec, res) / (norm(spec, tf) + norm(spec, tg) + EPS)


# algebra table -----------------------------------------------------------------

CONSERVATION = ("[H,L]", "[H,S]", "[H,Q]")
CLOSURE = ("[L,L]", "[L,Q]", "[Q,Q]")
IDENTITIES = ("Q.L", "Q^2")
BLOCKS = ("Q12=Q21", "[Q11,V]+[Q12,p2]", "[Q12,V]+[Q22,p2]", "Q11=Q12(2M+V)+Q22p2",
          "[f,p2]", "[rhat,V]")
LADDER_CHECKS = CONSERVATION + CLOSURE + IDENTITIES + BLOCKS
DIAGNOSTICS = ("[Q,Q] commuted", "Q^2 commuted", "L.Q", "Q22 ordering", "adjoint Q")


def _pairs():
    return [(i, j, k) for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1))]


def dirac_algebra_residuals(p: CoulombParams, spec: GridSpec, v: np.ndarray) -> dict:
    """Relative residuals of every Dirac-level relation on one probe.

    Vector relations report the worst component. Right-hand sides with
    H^2 - M^2 are applied as written (after L); the commuted ordering is a
    diagnostic.
    """
    nv = lambda f: norm(spec, f)  # noqa: E731
    M, k = p.M, p.k
    H = build_hamiltonian(p, spec)
    Lop, Sop, Qop = build_L(spec), build_S(spec), build_Q(p, spec)
    n0 = nv(v)

    def h2m(f):
        return H(H(f)) - M * M * f

    hv = H(v)
    lv, sv, qv = Lop.apply_all(v), Sop.apply_all(v), Qop.apply_all(v)
    l_hv, s_hv, q_hv = Lop.apply_all(hv), Sop.apply_all(hv), Qop.apply_all(hv)
    nh = nv(hv)
    out = {}

    def conserved(xv, x_hv):
        return max(relative_residual(spec, H(xv[i]) - x_hv[i], nh * nv(xv[i]) / n0) for i in range(3))

    out["[H,L]"] = conserved(lv, l_hv)
    out["[H,S]"] = conserved(sv, s_hv)
    out["[H,Q]"] = conserved(qv, q_hv)

    ll = [Lop.apply_all(lv[j]) for j in range(3)]  # ll[j][i] = L_i L_j v
    lq = [Lop.apply_all(qv[j]) for j in range(3)]  # lq[j][i] = L_i Q_j v
    ql = [Qop.apply_all(lv[j]) for j in range(3)]  # ql[j][i] = Q_i L_j v
    qq = [Qop.apply_all(qv[j]) for j in range(3)]  # qq[j][i] = Q_i Q_j v
    h2_v = h2m(v)
    l_h2 = Lop.apply_all(h2_v)
    h2_l = [h2m(lv[c]) for c in range(3)]
    c_qq = -4.0 / k**2

    r_ll, r_lq, r_qq, r_qq_comm = [], [], [], []
    for i, j, c in _pairs():
        scale_ll = nv(lv[i]) * nv(lv[j]) / n0
        exp = 1j * lv[c]
        r_ll.append(relative_residual(spec, ll[j][i] - ll[i][j] - exp, scale_ll + nv(exp)))
        for a, b, cc, sign in ((i, j, c, 1.0), (j, i, c, -1.0)):
            exp = sign * 1j * qv[cc]
            r_lq.append(relative_residual(spec, lq[b][a] - ql[a][b] - exp,
                                          nv(lv[a]) * nv(qv[b]) / n0 + nv(exp)))
        scale_qq = nv(qv[i]) * nv(qv[j]) / n0
        exp = 1j * c_qq * h2_l[c]
        r_qq.append(relative_residual(spec, qq[j][i] - qq[i][j] - exp, scale_qq + nv(exp)))
        exp = 1j * c_qq * l_h2[c]
        r_qq_comm.append(relative_residual(spec, qq[j][i] - qq[i][j] - exp, scale_qq + nv(exp)))
    out["[L,L]"] = max(r_ll)
    out["[L,Q]"] = max(r_lq)
    out["[Q,Q]"] = max(r_qq)
    out["[Q,Q] commuted"] = max(r_qq_comm)

    q_dot_l = sum(ql[i][i] for i in range(3))
    out["Q.L"] = relative_residual(spec, q_dot_l, sum(nv(ql[i][i]) for i in range(3)))
    l_dot_q = sum(lq[i][i] for i in range(3))
    out["L.Q"] = relative_residual(spec, l_dot_q, sum(nv(lq[i][i]) for i in range(3)))

    q2 = sum(qq[i][i] for i in range(3))
    l2 = sum(ll[i][i] for i in range(3))
    h_v = hv
    hm2 = H(h_v) + 2.0 * M * h_v + M * M * v  # (H + M)^2 v
    rhs = 4.0 / k**2 * h2m(l2 + v) + hm2
    out["Q^2"] = relative_residual(spec, q2 - rhs, nv(q2) + nv(rhs))
    l2_h2 = sum(Lop.apply_all(l_h2[i])[i] for i in range(3))
    rhs_c = 4.0 / k**2 * (l2_h2 + h2_v) + hm2
    out["Q^2 commuted"] = relative_residual(spec, q2 - rhs_c, nv(q2) + nv(rhs_c))
    return out


def pauli_block_residuals(p: CoulombParams, spec: GridSpec, phi: np.ndarray) -> dict:
    """Residuals of the four block conditions and the building-block relations on a Pauli probe."""
    g = grid_for(spec)
    nv = lambda f: norm(spec, f)  # noqa: E731
    M, k = p.M, p.k
    vpot = -k * g.inv_r
    rhat, inv_r = g.rhat, g.inv_r

    def p2(f):
        return g.to_position(g.p2 * g.to_momentum(f))

    def inv_p2(f):
        return g.to_position(g.inv_p2 * g.to_momentum(f))

    def q11_from(f, fv):
        return [fv[i] / k - 2.0 * M * rhat[i] * f + k * rhat[i] * inv_r * f for i in range(3)]

    n0 = nv(phi)
    v_phi, p2_phi = vpot * phi, p2(phi)
    f_phi, f_v, f_p2 = runge_f(g, phi), runge_f(g, v_phi), runge_f(g, p2_phi)
    q11 = q11_from(phi, f_phi)
    q11_v = q11_from(v_phi, f_v)
    q12 = [-rhat[i] * phi for i in range(3)]
    q21 = [-(rhat[i] * phi) for i in range(3)]
    q22 = [inv_p2(c) / k for c in f_phi]
    q22_p2 = [inv_p2(c) / k for c in f_p2]
    q22_alt = [runge_f(g, inv_p2(phi))[i] / k for i in range(3)]  # f (1/p^2) ordering
    nv_v, nv_p2 = nv(v_phi), nv(p2_phi)

    out = {"Q12=Q21": max(relative_residual(spec, q12[i] - q21[i], nv(q12[i])) for i in range(3))}
    r2, r3, r4, rf, rv, rord = [], [], [], [], [], []
    for i in range(3):
        a = q11_v[i] - vpot * q11[i]
        b = -rhat[i] * p2_phi - p2(q12[i])
        scale = nv(q11[i]) * nv_v / n0 + nv(q12[i]) * nv_p2 / n0
        r2.append(relative_residual(spec, a + b, scale))
        a = -rhat[i] * v_phi - vpot * q12[i]
        b = q22_p2[i] - p2(q22[i])
        scale = nv(q12[i]) * nv_v / n0 + nv(q22[i]) * nv_p2 / n0
        r3.append(relative_residual(spec, a + b, scale))
        rhs = -rhat[i] * (2.0 * M * phi + v_phi) + q22_p2[i]
        r4.append(relative_residual(spec, q11[i] - rhs, nv(q11[i]) + nv(rhs)))
        rf.append(relative_residual(spec, f_p2[i] - p2(f_phi[i]), nv(f_phi[i]) * nv_p2 / n0))
        rv.append(relative_residual(spec, -rhat[i] * v_phi + vpot * rhat[i] * phi,
                                    nv(rhat[i] * phi) * nv_v / n0))
        rord.append(relative_residual(spec, q22[i] - q22_alt[i], nv(q22[i]) + nv(q22_alt[i])))
    out["[Q11,V]+[Q12,p2]"] = max(r2)
    out["[Q12,V]+[Q22,p2]"] = max(r3)
    out["Q11=Q12(2M+V)+Q22p2"] = max(r4)
    out["[f,p2]"] = max(rf)
    out["[rhat,V]"] = max(rv)
    out["Q22 ordering"] = max(rord)
    return out


def _pauli(v: np.ndarray) -> np.ndarray:
    return v[:2].copy()


def algebra_level(p: CoulombParams, spec: GridSpec, seed: int = 0,
                  policy: ProbePolicy = DEFAULT_POLICY,
                  reference: Optional[GridSpec] = None) -> dict:
    """ResidualReport for every ladder check and diagnostic at one grid level."""
    if p.k <= 0:
        raise ValueError("the algebra checks need k > 0")
    probes = make_probes(spec, seed, policy, reference)
    per_probe = []
    Q = build_Q(p, spec)
    herm = []
    for idx, v in enumerate(probes):
        vals = dirac_algebra_residuals(p, spec, v)
        vals.update(pauli_block_residuals(p, spec, _pauli(v)))
        partner = probes[(idx + 1) % len(probes)]
        herm.append(max(adjoint_residual(spec, Q.component(i), partner, v) for i in range(3)))
        vals["adjoint Q"] = herm[-1]
        per_probe.append(vals)
    names = LADDER_CHECKS + DIAGNOSTICS
    return {name: ResidualReport.from_values((name,), [d[name] for d in per_probe], spec, seed,
                                             len(probes))
            for name in names}


def verify_block_conditions(p: CoulombParams, spec: GridSpec, probes=8, seed: int = 0,
                            policy: ProbePolicy = DEFAULT_POLICY,
                            reference: Optional[GridSpec] = None) -> dict:
    """ResidualReport per block condition on the upper (Pauli) part of each probe."""
    if p.k <= 0:
        raise ValueError("the block conditions need k > 0")
    fields = _resolve_probes(spec, probes, seed, policy, reference)
    rows = [pauli_block_residuals(p, spec, f[:2].copy() if f.shape[0] == 4 else f) for f in fields]
    return {name: ResidualReport.from_values((name,), [r[name] for r in rows], spec, seed, len(rows))
            for name in BLOCKS + ("Q22 ordering",)}


def q_squared_identity_residual(p: CoulombParams, spec: GridSpec, probes=8, seed: int = 0,
                                policy: ProbePolicy = DEFAULT_POLICY,
                                reference: Optional[GridSpec] = None) -> ResidualReport:
    """Residual of Q^2 - [(4/k^2)(H^2 - M^2)(L^2 + 1) + (H + M)^2], applied right to left."""
    if p.k <= 0:
        raise ValueError("the Q^2 identity needs k > 0")
    fields = _resolve_probes(spec, probes, seed, policy, reference)
    H = build_hamiltonian(p, spec)
    Lop, Qop = build_L(spec), build_Q(p, spec)
    M, k = p.M, p.k
    values = []
    for v in fields:
        q2 = Qop.squared()(v)
        w = Lop.squared()(v) + v
        rhs = 4.0 / k**2 * (H(H(w)) - M * M * w)
        hv = H(v)
        rhs = rhs + H(hv) + 2.0 * M * hv + M * M * v
        values.append(relative_residual(spec, q2 - rhs, norm(spec, q2) + norm(spec, rhs)))
    return ResidualReport.from_values(("Q^2", "(4/k^2)(H^2-M^2)(L^2+1)+(H+M)^2"), values, spec, seed,
                                      len(fields))


# refinement ladder ----------------------------------------------------------------

@dataclass
class LadderResult:
    points: list
    box_length: float
    seed: int
    reports: dict  # name -> list of ResidualReport along the ladder

    def values(self, name: str) -> list:
        return [r.max_residual for r in self.reports[name]]

    def verdict(self, name: str, reduction: float = 4.0, final_bound: float = 1e-3) -> bool:
        return ladder_verdict(self.values(name), reduction, final_bound)


def ladder_verdict(values: Sequence[float], reduction: float = 4.0, final_bound: float = 1e-3) -> bool:
    """Monotone decrease, end-to-end reduction and final bound.

    Relations that hold to round-off at every level cannot decrease further
    and pass when every value is below EXACT_FLOOR.
    """
    vals = list(values)
    if all(v <= EXACT_FLOOR for v in vals):
        return True
    monotone = all(b < a for a, b in zip(vals, vals[1:]))
    return monotone and vals[0] >= reduction * vals[-1] and vals[-1] < final_bound


def refinement_ladder(p: CoulombParams, points: Sequence[int] = (32, 48, 64), box_length: float = 19.5,
                      seed: int = 0, policy: ProbePolicy = DEFAULT_POLICY) -> LadderResult:
    points = list(points)
    if any(b <= a for a, b in zip(points, points[1:])):
        raise ValueError("ladder must be strictly increasing")
    finest = GridSpec(points[-1], box_length)
    reports = {name: [] for name in LADDER_CHECKS + DIAGNOSTICS}
    for n in points:
        level = algebra_level(p, GridSpec(n, box_length), seed, policy, reference=finest)
        for name, rep in level.items():
            reports[name].append(rep)
    return LadderResult(points, box_length, seed, reports)


# non-relativistic limit ------------------------------------------------------------

@dataclass
class LimitRow:
    M: float
    hamiltonian_block: float
    q_block: float
    hamiltonian_literal: float
    q_literal: float


def positive_energy_embedding(spec: GridSpec, phi: np.ndarray, M: float) -> np.ndarray:
    """(phi, sigma.p phi / 2M): the large-M form of a positive-energy spinor."""
    g = grid_for(spec)
    psi = join(phi, sigma_dot_p(g, phi) / (2.0 * M))
    return psi / norm(spec, psi)


def _limit_residuals(p: CoulombParams, spec: GridSpec, psi: np.ndarray) -> tuple[float, float]:
    g = grid_for(spec)
    M, k = p.M, p.k
    vpot = -k * g.inv_r
    H = build_hamiltonian(p, spec)
    Q = build_Q(p, spec)
    nv = lambda f: norm(spec, f)  # noqa: E731

    def p2(f):
        return g.to_position(g.p2 * g.to_momentum(f))

    up, low = psi[:2], psi[2:]
    lhs = H(psi) - M * psi
    lim = join(p2(up) / (2.0 * M) + vpot * up, p2(low) / (2.0 * M))
    r_h = nv(lhs - lim) / (nv(lhs) + nv(lim) + EPS)
    qv = Q.apply_all(psi)
    f_up, f_low = runge_f(g, up), runge_f(g, low)
    r_q = 0.0
    for i in range(3):
        lhs_i = qv[i] / (2.0 * M)
        lim_i = join(f_up[i] / (2.0 * M * k) - g.rhat[i] * up, f_low[i] / (2.0 * M * k))
        r_q = max(r_q, nv(lhs_i - lim_i) / (nv(lhs_i) + nv(lim_i) + EPS))
    return r_h, r_q


def nonrel_limit_study(k: float, masses: Sequence[float], spec: GridSpec, probes: int = 8,
                       seed: int = 0, policy: ProbePolicy = DEFAULT_POLICY) -> list:
    """Large-M block residuals of H - M and Q/2M against their limiting forms.

    The headline columns act on the positive-energy embedding of each Pauli
    probe. The literal columns act on (phi, 0), where the off-diagonal
    sigma.p phi of H - M does not shrink with M.
    """
    masses = list(masses)
    if any(b <= a for a, b in zip(masses, masses[1:])):
        raise ValueError("M ladder must be increasing")
    fields = make_probes(spec, seed, policy, count=probes)
    rows = []
    for M in masses:
        p = CoulombParams(M, k)
        rh, rq, lh, lq = [], [], [], []
        for v in fields:
            phi = v[:2] / norm(spec, v[:2])
            a, b = _limit_residuals(p, spec, positive_energy_embedding(spec, phi, M))
            c, d = _limit_residuals(p, spec, join(phi, np.zeros_like(phi)))
            rh.append(a)
            rq.append(b)
            lh.append(c)
            lq.append(d)
        rows.append(LimitRow(M, max(rh), max(rq), max(lh), max(lq)))
    return rows


def runge_lenz_alignment(p: CoulombParams, spec: GridSpec, center, boost, width: float) -> dict:
    """<R> on an upper-spinor Gaussian packet against its phase-space average.

    For the packet exp(-|x-c|^2 / 2w^2 + i p0.x) the Wigner average of f is
    2 p0 x (c x p0) + 2 c / w^2: the point-particle value plus a momentum
    spread term. ``reference`` uses that average with the grid value of
    <r/|r|>; ``classical`` is the point-particle vector p0 x l0 / (M k) - c/|c|.
    """
    g = grid_for(spec)
    v = gaussian_packet(spec, center, width, boost, polarization=[1, 0, 0, 0])
    phi = v[:2]
    fv = runge_f(g, phi)
    f_mean = np.array([inner(spec, phi, fv[i]).real for i in range(3)])
    rhat_mean = np.array([inner(spec, phi, g.rhat[i] * phi).real for i in range(3)])
    c = np.asarray(center, dtype=float)
    b = np.asarray(boost, dtype=float)
    f_ref = 2.0 * np.cross(b, np.cross(c, b)) + 2.0 * c / width**2
    quantum = f_mean / (2.0 * p.M * p.k) - rhat_mean
    reference = f_ref / (2.0 * p.M * p.k) - rhat_mean
    classical = np.cross(b, np.cross(c, b)) / (p.M * p.k) - c / np.linalg.norm(c)

    def cos(a, b_):
        return float(a @ b_ / (np.linalg.norm(a) * np.linalg.norm(b_)))

    return {"quantum": quantum, "reference": reference, "classical": classical,
            "f_residual": float(np.linalg.norm(f_mean - f_ref) / np.linalg.norm(f_ref)),
            "cosine": cos(quantum, reference), "classical_cosine": cos(quantum, classical)}


@dataclass
class EnergyScaling:
    k: float
    n: int
    deviation: float       # |E - (M - k^2 M / 2n^2)| / M at k
    deviation_half: float  # same at k / 2
    ratio: float
    source: str


def nonrel_energy_scaling(k: float, n: int = 1, M: float = 1.0, source: str = "radial") -> EnergyScaling:
    """Ratio of the relativistic correction at k and k/2 (about 16 for a k^4 term)."""

    def deviation(kk):
        p = CoulombParams(M, kk)
        if source == "radial":
            prob = RadialProblem.coulomb(p, 0)
            prob = RadialProblem.coulomb(p, 0, r_max=max(prob.r_max, 12.0 * n * n / (M * kk)))
            energy, _ = solve_self_consistent(prob, n - 1)
        elif source == "closed_form":
            energy = energy_closed_form(p, n)
        else:
            raise ValueError(f"unknown source {source!r}")
        return abs(energy - nonrel_limit_energy(p, n)) / M

    d1, d2 = deviation(k), deviation(0.5 * k)
    return EnergyScaling(k, n, d1, d2, d1 / d2, source)

"""Command-line driver: configuration, suites, reports.

    spin-so4 run    [--config PATH] [--set K=V ...] [--seed N] [--out DIR] [--format F ...]
    spin-so4 emit   REPORT.json [--out DIR] [--format F ...]
    spin-so4 ladder [--config PATH] [--set K=V ...] [--seed N] [--out DIR]

Exit status: 0 all checks pass, 1 some check failed, 2 configuration or
runtime error.
"""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import platform
import sys
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy

from . import algebra, eigen, ks, model, radial
from .grid import GridSpec
from .model import CoulombParams, OscParams
from .operators import build_hamiltonian

SCHEMA = 1
SUITES = ("spectrum", "algebra", "radial", "ks", "limits")
FORMATS = ("json", "csv", "text")
EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class ConfigError(ValueError):
    pass


# configuration -----------------------------------------------------------------

@dataclass
class RunConfig:
    suites: list = field(default_factory=lambda: ["all"])
    seed: int = 0
    coulomb_M: float = 1.0
    coulomb_k: float = 0.8
    spectrum_k_values: list = field(default_factory=lambda: [0.5, 0.8, 1.2])
    spectrum_n_max: int = 4
    oscillator_m: float = 1.0
    oscillator_omegas: list = field(default_factory=lambda: [1.0, math.sqrt(2.0)])
    oscillator_N_max: int = 8
    grid_ladder: list = field(default_factory=lambda: [32, 48, 64])
    grid_box: float = 19.5
    probes_count: int = 8
    eigen_points: int = 48
    eigen_box: float = 36.0
    eigen_tol: float = 1e-4
    limits_masses: list = field(default_factory=lambda: [5.0, 20.0, 80.0])
    limits_points: int = 64
    ks_samples: int = 100_000
    ks_N_max: int = 40
    output_dir: str = "spin-so4-out"
    output_formats: list = field(default_factory=lambda: ["json", "text"])

    def suite_list(self) -> list:
        return list(SUITES) if "all" in self.suites else list(self.suites)

    def as_dict(self) -> dict:
        return {_dotted(f.name): getattr(self, f.name) for f in fields(self)}


_LIST_ITEM = {
    "suites": str, "spectrum_k_values": float, "oscillator_omegas": float, "grid_ladder": int,
    "limits_masses": float, "output_formats": str,
}


def _dotted(name: str) -> str:
    return name.replace("_", ".", 1)


def _field_name(key: str) -> str:
    return key.strip().replace(".", "_", 1)


def _coerce(name: str, raw: str):
    kind = type(getattr(RunConfig(), name))
    raw = raw.strip()
    if name in _LIST_ITEM:
        items = [s.strip() for s in raw.strip("[]").split(",") if s.strip()]
        return [_scalar(_LIST_ITEM[name], s) for s in items]
    return _scalar(kind, raw)


def _scalar(kind, raw: str):
    if kind is str:
        return raw.strip("'\"")
    if kind is int:
        value = ast.literal_eval(raw)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"expected an integer, got {raw!r}")
        return value
    if raw.startswith("sqrt(") and raw.endswith(")"):
        return math.sqrt(float(raw[5:-1]))
    return float(raw)


def apply_setting(cfg: RunConfig, key: str, raw: str, where: str) -> None:
    name = _field_name(key)
    if name not in {f.name for f in fields(RunConfig)}:
        raise ConfigError(f"{where}: unknown key {key.strip()!r}")
    try:
        setattr(cfg, name, _coerce(name, raw))
    except (ValueError, SyntaxError) as exc:
        raise ConfigError(f"{where}: bad value for {key.strip()!r}: {exc}") from None


def parse_config_text(text: str, source: str = "<config>", cfg: Optional[RunConfig] = None) -> RunConfig:
    """Flat ``dotted.key = value`` lines; ``#`` starts a comment."""
    cfg = RunConfig() if cfg is None else cfg
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {line!r}")
        key, raw = line.split("=", 1)
        apply_setting(cfg, key, raw, f"{source}:{lineno}")
    return cfg


def validate(cfg: RunConfig) -> RunConfig:
    suites = cfg.suite_list()
    if not suites:
        raise ConfigError("suites: empty suite list")
    bad = [s for s in suites if s not in SUITES]
    if bad:
        raise ConfigError(f"suites: unknown suite(s) {bad}; choose from {list(SUITES) + ['all']}")
    if any(b <= a for a, b in zip(cfg.grid_ladder, cfg.grid_ladder[1:])) or not cfg.grid_ladder:
        raise ConfigError("grid.ladder: must be non-empty and strictly increasing")
    bad_fmt = [f for f in cfg.output_formats if f not in FORMATS]
    if bad_fmt:
        raise ConfigError(f"output.formats: unknown format(s) {bad_fmt}")
    try:
        CoulombParams(cfg.coulomb_M, cfg.coulomb_k)
        for k in cfg.spectrum_k_values:
            CoulombParams(cfg.coulomb_M, k)
        for w in cfg.oscillator_omegas:
            OscParams(cfg.oscillator_m, w)
        for n in cfg.grid_ladder + [cfg.eigen_points, cfg.limits_points]:
            GridSpec(n, cfg.grid_box)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


# records -----------------------------------------------------------------------

@dataclass
class Check:
    suite: str
    check: str
    anchor: str
    value: object
    tol: object
    cmp: str = "<="
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return derive_pass(self.as_dict())

    def as_dict(self) -> dict:
        d = {"suite": self.suite, "check": self.check, "anchor": self.anchor, "value": self.value,
             "tol": self.tol, "cmp": self.cmp}
        if self.error is not None:
            d["error"] = self.error
        d["pass"] = derive_pass(d)
        return d


def derive_pass(rec: dict) -> bool:
    """Recompute a pass flag from the record fields alone."""
    if rec.get("error") is not None or rec["value"] is None:
        return False
    v, tol, cmp = rec["value"], rec["tol"], rec["cmp"]
    if cmp == "<=":
        return v <= tol
    if cmp == "<":
        return v < tol
    if cmp == ">=":
        return v >= tol
    if cmp == "==":
        return v == tol
    if cmp == "in":
        return tol[0] <= v <= tol[1]
    if cmp == "ladder":
        return algebra.ladder_verdict(v, tol["reduction"], tol["final"])
    raise ValueError(f"unknown comparator {cmp!r}")


def _f(x) -> float:
    return float(x)


class SuiteRun:
    """Collects checks and tables; a failing computation becomes a failed check."""

    def __init__(self, suite: str):
        self.suite = suite
        self.checks: list = []
        self.tables: dict = {}

    def add(self, check: str, anchor: str, value, tol, cmp: str = "<=") -> None:
        self.checks.append(Check(self.suite, check, anchor, value, tol, cmp))

    def guard(self, check: str, anchor: str, fn: Callable[[], None]) -> None:
        try:
            fn()
        except Exception as exc:  # solver failures are recorded, not raised
            self.checks.append(Check(self.suite, check, anchor, None, None, "<=",
                                     error=f"{type(exc).__name__}: {exc}"))


# suites ------------------------------------------------------------------------

ANCHOR_E = "E+ = (4n^2 - k^2) M / (4n^2 + k^2)"
# the fixed-charge check asks for 1e-8, finer than the default Coulomb spacing delivers
FIXED_CHARGE_H = 0.01
ALIGNMENT_BOX = 30.0


def suite_spectrum(cfg: RunConfig) -> SuiteRun:
    run = SuiteRun("spectrum")
    M = cfg.coulomb_M
    rows = []

    def scan(k):
        p = CoulombParams(M, k)
        result = radial.degeneracy_scan(p, cfg.spectrum_n_max)
        for rec in result.levels:
            closed = model.energy_closed_form(p, rec.n)
            err = abs(rec.energy - closed) / M
            rows.append({"k": k, "n": rec.n, "l": rec.l, "E_radial": rec.energy, "E_closed": closed,
                         "rel_error": err})
            run.add(f"radial vs closed form k={k:g} n={rec.n} l={rec.l}", ANCHOR_E, _f(err), 1e-5)
        if k == cfg.coulomb_k:
            for n, spread in sorted(result.spread.items()):
                run.add(f"l-degeneracy spread k={k:g} n={n}",
                        "E depends on n only (SO(4) multiplets)", _f(spread / M), 1e-6)
            levels = [min(result.energies(n)) for n in range(1, cfg.spectrum_n_max + 1)]
            run.add(f"levels increase with n k={k:g}", "E+ increases towards M",
                    bool(all(b > a for a, b in zip(levels, levels[1:]))), True, "==")

    for k in cfg.spectrum_k_values:
        run.guard(f"radial scan k={k:g}", ANCHOR_E, lambda k=k: scan(k))
    p = CoulombParams(M, cfg.coulomb_k)
    minus = max(abs(model.energy_closed_form(p, n, "minus") + M) for n in range(1, 21))
    run.add("minus branch equals -M", "E- = -M for every n", _f(minus), 1e-15)
    run.tables["spectrum"] = rows
    return run


def suite_radial(cfg: RunConfig) -> SuiteRun:
    run = SuiteRun("radial")
    rows = []
    anchor = "(eps+m)(eps-m)^2 = 2 m w^2 (N+2)^2"

    def oscillator(omega):
        op = OscParams(cfg.oscillator_m, omega)
        for N in range(0, cfg.oscillator_N_max + 1, 2):
            quartic = model.oscillator_energy(op, N)
            for lam in range(N % 2, N + 1, 2):
                eps, trace = radial.oscillator_level(op, N, lam)
                err = abs(eps - quartic) / quartic
                rows.append({"omega": omega, "N": N, "lambda": lam, "eps_radial": eps,
                             "eps_quartic": quartic, "rel_error": err})
                run.add(f"4D solver vs quartic w={omega:.6g} N={N} lambda={lam}", anchor, _f(err), 1e-6)
                run.add(f"self-consistency defect w={omega:.6g} N={N} lambda={lam}",
                        "W(E) = E^2 - m^2 at the root", _f(abs(trace.defect)), 1e-10)

    for omega in cfg.oscillator_omegas:
        run.guard(f"oscillator w={omega:.6g}", anchor, lambda omega=omega: oscillator(omega))

    exact = OscParams(1.0, math.sqrt(2.0))
    run.add("exact instance quartic root (m=1, w=sqrt2, N=0)", anchor,
            _f(abs(model.oscillator_energy(exact, 0) - 3.0)), 1e-10)

    def exact_radial():
        eps, _ = radial.oscillator_level(exact, 0, 0)
        run.add("exact instance 4D solver (m=1, w=sqrt2, N=0)", anchor, _f(abs(eps - 3.0) / 3.0), 1e-6)

    run.guard("exact instance 4D solver (m=1, w=sqrt2, N=0)", anchor, exact_radial)

    def fixed_charge():
        p = CoulombParams(cfg.coulomb_M, cfg.coulomb_k)
        energy = model.energy_closed_form(p, 1)
        kappa = (energy + p.M) * p.k
        for l, n_r in ((0, 0), (0, 1), (1, 0)):
            n = n_r + l + 1
            prob = radial.RadialProblem.coulomb(p, l, h=FIXED_CHARGE_H,
                                                r_max=12.0 * n * n / (p.M * p.k) + 30.0)
            w = radial.linear_radial_eigenvalue(prob, energy, n_r)
            exact_w = -kappa**2 / (4.0 * n * n)
            run.add(f"fixed-charge W l={l} n_r={n_r}", "W = -kappa^2 / 4n^2 at fixed E",
                    _f(abs(w - exact_w) / abs(exact_w)), 1e-8)

    run.guard("fixed-charge W", "W = -kappa^2 / 4n^2 at fixed E", fixed_charge)

    def h_squared():
        p = CoulombParams(cfg.coulomb_M, cfg.coulomb_k)
        energy = model.energy_closed_form(p, 1)
        cases = [("coulomb l=0", radial.RadialProblem.coulomb(p, 0)),
                 ("coulomb l=1", radial.RadialProblem.coulomb(p, 1)),
                 ("oscillator lambda=1", radial.RadialProblem.oscillator(OscParams(1.0, 1.0), 1))]
        for name, prob in cases:
            e = energy if prob.potential == "coulomb" else 2.0
            w = [radial.grid_eigenvalue(prob, e, 0, prob.h * f) for f in (1.0, 0.5, 0.25)]
            ratio = (w[0] - w[1]) / (w[1] - w[2])
            run.add(f"h^2 convergence ratio {name}", "three-point scheme error ~ h^2",
                    _f(ratio), [3.5, 4.5], "in")

    run.guard("h^2 convergence ratio", "three-point scheme error ~ h^2", h_squared)
    run.tables["oscillator"] = rows
    return run


def suite_ks(cfg: RunConfig) -> SuiteRun:
    run = SuiteRun("ks")
    rows = []
    for omega in cfg.oscillator_omegas:
        op = OscParams(cfg.oscillator_m, omega)
        worst = 0.0
        for N in range(0, cfg.ks_N_max + 1, 2):
            mp = ks.map_oscillator_to_hydrogen(op, N)
            res = ks.spectrum_identity_residual(mp)
            worst = max(worst, res)
            rows.append({**mp.as_dict(), "residual": res})
        run.add(f"spectrum bridge w={omega:.6g} even N<={cfg.ks_N_max}",
                "mapped (M, E, k, n) satisfy E = (4n^2 - k^2) M / (4n^2 + k^2)", _f(worst), 1e-12)
    mp = ks.mapped_from_epsilon(OscParams(1.0, 1.0), 2, model.oscillator_energy(OscParams(1.0, 1.0), 2) + 1e-3)
    run.add("sensitivity control eps + 1e-3", "bridge residual reacts to a wrong eps",
            _f(ks.spectrum_identity_residual(mp)), 1e-9, ">=")

    u, P = ks.random_constrained_points(cfg.ks_samples, cfg.seed)
    run.add("Gamma Gamma^dag = u.u I", "Gamma Gamma^dag = u^2 = r", _f(ks.gamma_norm_residual(u).max()), 1e-12)
    run.add("P^2 = 4 r p^2 on the constraint surface", "kinetic identity of the lift",
            _f(ks.kinetic_identity_residual(u, P).max()), 1e-12)
    on = ks.b_identity_residual_batch(u, P)
    run.add("B = 2 Gamma sigma.p on the constraint surface", "B = 2 Gamma sigma.p", _f(on.max()), 1e-12)
    g = ks.constraint_gradient(u)
    bad = P + 0.5 * np.linalg.norm(P, axis=1, keepdims=True) * g / np.linalg.norm(g, axis=1, keepdims=True)
    off = ks.b_identity_residual_batch(u, bad)
    run.add("off-constraint control separation (orders of magnitude)",
            "B = 2 Gamma sigma.p fails off the constraint surface",
            _f(np.log10(off.min() / max(on.max(), np.finfo(float).tiny))), 6.0, ">=")
    norms = np.abs(np.linalg.norm(ks.ks_point(u), axis=1) - np.sum(u * u, axis=1)) / np.sum(u * u, axis=1)
    run.add("|x(u)| = u.u", "r = u^2", _f(norms.max()), 1e-12)
    pt = ks.PhasePoint4(u[0], P[0])
    end = ks.constraint_flow(pt, 2.0)
    run.add("constraint conserved along its own flow", "u4P1 - u1P4 + u2P3 - u3P2 = 0",
            _f(abs(ks.constraint_value(end) - ks.constraint_value(pt))), 1e-10)
    worst = max(abs(model.enumerate_constrained_states(2 * n - 2) - n * n) for n in range(1, 21))
    run.add("constrained states at N = 2n-2 equal n^2 (n<=20)", "n1 + n2 = n3 + n4 gives n^2 states",
            int(worst), 0, "==")
    run.tables["bridge"] = rows
    return run


def suite_algebra(cfg: RunConfig, ladder_only: bool = False) -> SuiteRun:
    run = SuiteRun("algebra")
    p = CoulombParams(cfg.coulomb_M, cfg.coulomb_k)
    policy = algebra.ProbePolicy(count=cfg.probes_count)
    anchors = {
        "[H,L]": "[H, L] = 0", "[H,S]": "[H, S] = 0", "[H,Q]": "[H, Q] = 0",
        "[L,L]": "[L_i, L_j] = i eps_ijk L_k", "[L,Q]": "[L_i, Q_j] = i eps_ijk Q_k",
        "[Q,Q]": "[Q_i, Q_j] = i (-4/k^2)(H^2 - M^2) eps_ijk L_k", "Q.L": "Q . L = 0",
        "Q^2": "Q^2 = (4/k^2)(H^2 - M^2)(L^2 + 1) + (H + M)^2",
        "Q12=Q21": "Q12 = Q21", "[Q11,V]+[Q12,p2]": "[Q11, V] + [Q12, p^2] = 0",
        "[Q12,V]+[Q22,p2]": "[Q12, V] + [Q22, p^2] = 0",
        "Q11=Q12(2M+V)+Q22p2": "Q11 = Q12 (2M + V) + Q22 p^2",
        "[f,p2]": "[f, p^2] = 0", "[rhat,V]": "[-r/r, V] = 0",
    }

    def ladder():
        lad = algebra.refinement_ladder(p, cfg.grid_ladder, cfg.grid_box, cfg.seed, policy)
        tol = {"reduction": 4.0, "final": 1e-3, "floor": algebra.EXACT_FLOOR}
        for name in algebra.LADDER_CHECKS:
            run.add(f"refinement ladder {name}", anchors[name], [_f(v) for v in lad.values(name)], tol,
                    "ladder")
        run.tables["ladder"] = [
            {"check": name, "points": n, "max_residual": rep.max_residual, "mean_residual": rep.mean_residual}
            for name, reps in lad.reports.items() for n, rep in zip(lad.points, reps)
        ]

    run.guard("refinement ladder", "operator algebra", ladder)
    if ladder_only:
        return run

    def casimir():
        spec = GridSpec(cfg.eigen_points, cfg.eigen_box)
        H = build_hamiltonian(p, spec)
        res = eigen.eigensolve_lowest(H, 10, spec, eigen.default_shift(p, 1), tol=cfg.eigen_tol,
                                      mass=p.M, block=14, seed=cfg.seed)
        clusters = eigen.cluster_levels(p, res.energies)
        rows = []
        for n in (1, 2):
            idx = clusters.get(n, [])
            run.add(f"cluster multiplicity n={n}", "2n^2 states per level", len(idx),
                    model.coulomb_degeneracy(n), "==")
            if not idx:
                continue
            est = eigen.casimir_on_eigenvectors(p, spec, [res.pairs()[i] for i in idx])
            rows.append({"n": n, **est.as_dict(), "closed_form": model.energy_closed_form(p, n),
                         "casimir_closed": model.casimir_value(p, est.energy)})
            tol = max(0.01 * max(abs(est.I2), abs(est.K2)), 0.0075)
            run.add(f"I^2 = K^2 on cluster n={n}", "I^2 = K^2 = j(j+1)", _f(abs(est.I2 - est.K2)), _f(tol))
            run.add(f"inverted n on cluster n={n}", "n = 2j + 1", _f(abs(est.n_estimate - n)), 0.05)
        run.add("Ritz residuals", "||H v - E v|| <= tol", _f(res.residuals.max()), cfg.eigen_tol)
        run.tables["casimir"] = rows
        run.tables["ritz"] = [{"energy": e, "residual": r} for e, r in zip(res.energies, res.residuals)]

    run.guard("Casimir on eigenclusters", "I^2 = K^2 = j(j+1)", casimir)
    return run


def suite_limits(cfg: RunConfig) -> SuiteRun:
    run = SuiteRun("limits")
    k = cfg.coulomb_k

    def blocks():
        spec = GridSpec(cfg.limits_points, cfg.grid_box)
        rows = algebra.nonrel_limit_study(k, cfg.limits_masses, spec, cfg.probes_count, cfg.seed)
        for col, anchor in (("hamiltonian_block", "H - M -> diag(p^2/2M - k/r, p^2/2M)"),
                            ("q_block", "Q/2M -> diag(R, f/2Mk)")):
            vals = [getattr(r, col) for r in rows]
            worst = max(b / a for a, b in zip(vals, vals[1:]))
            run.add(f"{col} decreases along M ladder", anchor, _f(worst), 1.0, "<")
        run.tables["limits"] = [r.__dict__ for r in rows]

    run.guard("non-relativistic block limits", "large-M limits", blocks)

    def energies():
        rows = []
        for n in (1, 2):
            for source in ("closed_form", "radial"):
                sc = algebra.nonrel_energy_scaling(k, n, cfg.coulomb_M, source)
                rows.append(sc.__dict__)
                run.add(f"k^4 scaling of E - (M - k^2 M/2n^2), n={n}, {source}",
                        "E+ -> M - k^2 M / (2n^2)", _f(sc.ratio), [12.0, 20.0], "in")
        run.tables["energy_scaling"] = rows

    run.guard("k^4 scaling", "E+ -> M - k^2 M / (2n^2)", energies)

    def alignment():
        p = CoulombParams(cfg.coulomb_M, k)
        # a wider box than the ladder keeps an off-centre unit-width packet inside the tail bound
        spec = GridSpec(cfg.limits_points, ALIGNMENT_BOX)
        out = algebra.runge_lenz_alignment(p, spec, (3.0, 1.0, -1.0), (0.2, 0.5, 0.3), 1.0)
        run.add("<f> on a packet equals its phase-space average", "f = p x l - l x p",
                _f(out["f_residual"]), 1e-10)
        run.add("<R> aligned with the phase-space average", "R = f/(2Mk) - r/r", _f(out["cosine"]),
                0.999999, ">=")
        run.tables["alignment"] = [{key: _jsonable(val) for key, val in out.items()}]

    run.guard("<R> aligned with the phase-space average", "R = f/(2Mk) - r/r", alignment)
    return run


SUITE_FUNCS = {"spectrum": suite_spectrum, "radial": suite_radial, "ks": suite_ks,
               "algebra": suite_algebra, "limits": suite_limits}


# report ------------------------------------------------------------------------

def environment_stamp() -> dict:
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "precision": "float64/complex128"}


def build_report(cfg: RunConfig, runs: list) -> dict:
    checks = [c.as_dict() for r in runs for c in r.checks]
    passed = sum(c["pass"] for c in checks)
    return {
        "schema": SCHEMA,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": cfg.as_dict(),
        "environment": environment_stamp(),
        "checks": checks,
        "tables": {f"{r.suite}.{name}": rows for r in runs for name, rows in r.tables.items()},
        "totals": {"checks": len(checks), "passed": passed, "failed": len(checks) - passed},
    }


def run(cfg: RunConfig) -> dict:
    validate(cfg)
    return build_report(cfg, [SUITE_FUNCS[s](cfg) for s in cfg.suite_list()])


def report_passed(report: dict) -> bool:
    return all(derive_pass(c) for c in report["checks"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def to_json(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


CSV_FIELDS = ("suite", "check", "anchor", "value", "tol", "cmp", "pass")


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for c in report["checks"]:
        w.writerow([json.dumps(_jsonable(c[k])) if isinstance(c[k], (list, dict)) else c[k]
                    for k in CSV_FIELDS])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, float):
        return f"{v:.3e}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}={_fmt(x)}" for k, x in v.items()) + "}"
    return str(v)


def to_text(report: dict) -> str:
    header = ("suite", "check", "anchor", "value", "tol", "pass")
    rows = [[c["suite"], c["check"], c["anchor"], _fmt(c["value"]), f"{c['cmp']} {_fmt(c['tol'])}",
             "PASS" if c["pass"] else "FAIL"] for c in report["checks"]]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)) for r in rows]
    t = report["totals"]
    lines.append(f"\n{t['passed']}/{t['checks']} checks passed")
    return "\n".join(lines) + "\n"


RENDER = {"json": to_json, "csv": to_csv, "text": to_text}
SUFFIX = {"json": "json", "csv": "csv", "text": "txt"}


def emit(report: dict, formats, out_dir, stem: str = "report") -> list:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    paths = []
    for fmt in formats:
        if fmt not in RENDER:
            raise ConfigError(f"unknown format {fmt!r}")
        path = out / f"{stem}.{SUFFIX[fmt]}"
        try:
            path.write_text(RENDER[fmt](report))
        except OSError as exc:
            raise ConfigError(f"cannot write {path}: {exc}") from None
        paths.append(path)
    return paths


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())


def ladder_csv(report: dict) -> str:
    rows = report["tables"].get("algebra.ladder", [])
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["check", "points", "max_residual", "mean_residual"],
                       lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# entry point -------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spin-so4", description="SO(4) checks for the spin-symmetric Dirac-Coulomb problem")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat dotted-key config file")
        sp.add_argument("--set", action="append", default=[], metavar="K=V", help="override a config key")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", action="append", help="output formats, comma-separated or repeated")

    common(sub.add_parser("run", help="run suites and write reports"))
    common(sub.add_parser("ladder", help="operator-algebra refinement ladder only"))
    em = sub.add_parser("emit", help="re-render a JSON report")
    em.add_argument("report")
    em.add_argument("--out", default=".")
    em.add_argument("--format", action="append")
    return ap


def config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        parse_config_text(text, args.config, cfg)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected K=V")
        key, raw = item.split("=", 1)
        apply_setting(cfg, key, raw, "--set")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.output_dir = args.out
    if args.format:
        cfg.output_formats = _formats(args.format)
    return validate(cfg)


def _formats(values) -> list:
    return [f.strip() for v in values for f in v.split(",") if f.strip()]


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "emit":
            report = load_report(args.report)
            emit(report, _formats(args.format or ["text"]), args.out)
            return EXIT_OK if report_passed(report) else EXIT_FAIL
        cfg = config_from_args(args)
        if args.command == "ladder":
            cfg.suites = ["algebra"]
            report = build_report(cfg, [suite_algebra(cfg, ladder_only=True)])
            emit(report, cfg.output_formats, cfg.output_dir, stem="ladder")
            Path(cfg.output_dir, "ladder_table.csv").write_text(ladder_csv(report))
        else:
            report = run(cfg)
            emit(report, cfg.output_formats, cfg.output_dir)
    except (ConfigError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"spin-so4: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(to_text(report))
    return EXIT_OK if report_passed(report) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

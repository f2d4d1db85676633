"""Scenario runner behind the ``peres-lab`` command."""
from __future__ import annotations

import copy
import csv
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import optics, qmatrix, schro1d
from .potentials import PiecewisePotential, load_potential
from .qmatrix import QuatMatrix
from .quaternion import I, J, K, ONE, Quaternion, quat_mul
from .scatter3d import RadialPotential, forward_amplitude, phase_shift, quaternionic_residual

OUTPUT_ENV = "PERES_LAB_OUTPUT"
FORMATS = {"csv", "json"}

DEFAULT_BARRIER_A = [{"x_left": 0.0, "x_right": 1.0, "V_alpha": 0.0, "V2": 0.5, "V3": 0.0}]
DEFAULT_BARRIER_B = [{"x_left": 0.0, "x_right": 1.0, "V_alpha": 0.0, "V2": 0.0, "V3": 0.5}]
DEFAULT_WELL = [{"x_left": 0.0, "x_right": 1.0, "V_alpha": -1.0, "V2": 0.3, "V3": 0.0}]

DEFAULTS = {
    "algebra-check": {"n_pairs": 100, "size": 4, "tol": 1e-12},
    "smatrix-theorem": {"n_trials": 100, "max_size": 8, "tol": 1e-10},
    "scatter1d": {"potential": DEFAULT_BARRIER_A, "energies": [0.5, 1.0, 3.0], "flux_tol": 1e-8},
    "near-zone": {"potential": DEFAULT_BARRIER_A, "E": 1.0, "window": [2.0, 5.0],
                  "grid": {"start": -4.0, "stop": 6.0, "num": 1001},
                  "kappa_rtol": 0.01, "r2_min": 0.9999},
    "two-barrier-scan": {"potential_A": DEFAULT_BARRIER_A, "potential_B": DEFAULT_BARRIER_B,
                         "E": 1.0, "d_max": None, "num": 81, "slope_rtol": 0.1,
                         "far_limit": 1e-10},
    "partial-waves": {"potential": DEFAULT_WELL, "energies": [1.0], "L_max": None,
                      "unitarity_tol": 1e-8, "optical_tol": 1e-6},
    "refractive-index": {"potential": DEFAULT_WELL, "omega": 1.0, "N": 0.01, "c": 1.0},
    "peres": {"preset": "photon_790nm", "control": True, "delta_tol": 1e-10},
}


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


@dataclass
class ScenarioConfig:
    scenario: str
    parameters: dict = field(default_factory=dict)
    output: str | None = None
    formats: tuple = ("csv", "json")
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - {"scenario", "parameters", "output", "formats", "seed"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        scenario = data.get("scenario")
        if scenario not in DEFAULTS:
            raise ConfigError(f"unknown scenario {scenario!r}; choose from {sorted(DEFAULTS)}")
        params = data.get("parameters", {}) or {}
        if not isinstance(params, dict):
            raise ConfigError("parameters must be an object")
        bad = set(params) - set(DEFAULTS[scenario]) - {"preset_file", "A", "B", "relation"}
        if bad:
            raise ConfigError(f"unknown parameters for {scenario}: {sorted(bad)}")
        formats = tuple(data.get("formats", ("csv", "json")))
        if not set(formats) <= FORMATS:
            raise ConfigError(f"formats must be a subset of {sorted(FORMATS)}")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("seed must be an integer")
        merged = copy.deepcopy(DEFAULTS[scenario])
        merged.update(params)
        return cls(scenario, merged, data.get("output"), formats, seed)

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "parameters": self.parameters,
                "formats": list(self.formats), "seed": self.seed}


@dataclass
class RunResult:
    scenario: str
    inputs: dict
    summary: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    invariants: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.invariants.values())

    def check(self, name: str, value, threshold, passed: bool) -> None:
        self.invariants[name] = {"value": _plain(value), "threshold": _plain(threshold),
                                "passed": bool(passed)}

    def add_table(self, name: str, columns, rows) -> None:
        self.tables[name] = {"columns": list(columns), "rows": [list(r) for r in rows]}

    def to_json(self) -> str:
        # wall time is kept out so identical inputs give identical bytes
        doc = {"scenario": self.scenario, "inputs": self.inputs, "summary": self.summary,
               "tables": self.tables, "invariants": self.invariants, "passed": self.passed}
        return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


# scenarios

def _algebra_check(cfg, res, rng):
    p = cfg.parameters
    units = {"1": ONE, "i": I, "j": J, "k": K}
    table = {("i", "i"): -ONE, ("j", "j"): -ONE, ("k", "k"): -ONE,
             ("i", "j"): K, ("j", "i"): -K, ("j", "k"): I, ("k", "j"): -I,
             ("k", "i"): J, ("i", "k"): -J}
    exact = all(quat_mul(units[a], units[b]) == v for (a, b), v in table.items())
    res.check("multiplication_table_exact", exact, True, exact)

    pair_dev = 0.0
    for _ in range(p["n_pairs"]):
        a, b = (Quaternion(*rng.standard_normal(4)) for _ in range(2))
        via_pair = (a.to_pair() * b.to_pair()).to_quaternion()
        pair_dev = max(pair_dev, max(abs(u - v) for u, v in
                                     zip(via_pair.as_tuple(), (a * b).as_tuple())))
    res.check("symplectic_pair_product", pair_dev, p["tol"], pair_dev < p["tol"])

    hom, adj = 0.0, 0.0
    n = p["size"]
    for _ in range(p["n_pairs"]):
        M, N = QuatMatrix.random(n, rng=rng), QuatMatrix.random(n, rng=rng)
        eM, eN = qmatrix.embed_complex(M), qmatrix.embed_complex(N)
        hom = max(hom, np.abs(qmatrix.embed_complex(M @ N) - eM @ eN).max())
        adj = max(adj, np.abs(qmatrix.embed_complex(M.adjoint()) - eM.conj().T).max())
    res.check("embed_homomorphism", float(hom), p["tol"], hom < p["tol"])
    res.check("embed_adjoint", float(adj), p["tol"], adj < p["tol"])
    res.summary.update({"pairs": p["n_pairs"], "size": n})


def _random_h0(rng, n, zero=False):
    """Anti-self-adjoint matrix with well-separated, nonzero (or one zero) energies."""
    U = QuatMatrix.random_unitary(n, rng=rng)
    while True:
        E = np.sort(rng.uniform(0.5, 5.0, n))
        if np.min(np.diff(E), initial=1.0) > 1e-3:
            break
    if zero:
        E[0] = 0.0
    return U @ QuatMatrix(np.diag(1j * E), np.zeros((n, n))) @ U.adjoint(), E


def _smatrix_theorem(cfg, res, rng):
    p = cfg.parameters
    tol = p["tol"]
    worst_jk, worst_comm, worst_unit, worst_zero_jk = 0.0, 0.0, 0.0, math.inf
    all_pass_unitary = True
    exempt_ok = True
    rows = []
    for trial in range(p["n_trials"]):
        n = int(rng.integers(2, p["max_size"] + 1))
        H0 = QuatMatrix.random_antihermitian(n, rng=rng)
        U = qmatrix.expm_quat(H0)
        worst_unit = max(worst_unit, qmatrix.unitarity_residual(U))
        X = QuatMatrix.random(n, rng=rng)
        P = qmatrix.commutant_project(H0, X)
        rep = qmatrix.smatrix_complexity_check(H0, P, tol)
        worst_jk = max(worst_jk, rep.max_jk_residual)
        worst_comm = max(worst_comm, rep.commutator_residual)
        # a unitary S built from the commutant
        G = qmatrix.commutant_project(H0, X - X.adjoint())
        S = qmatrix.expm_quat(G)
        all_pass_unitary &= qmatrix.smatrix_complexity_check(H0, S, tol).passed

        Hz, _ = _random_h0(rng, n, zero=True)
        Pz = qmatrix.commutant_project(Hz, X)
        repz = qmatrix.smatrix_complexity_check(Hz, Pz, tol)
        zero_blocks = [b for b in repz.blocks if b.exempt]
        exempt_ok &= bool(zero_blocks) and repz.max_jk_residual < tol
        if zero_blocks:
            worst_zero_jk = min(worst_zero_jk, zero_blocks[0].jk_residual)
        rows.append([trial, n, rep.max_jk_residual, rep.commutator_residual,
                     zero_blocks[0].jk_residual if zero_blocks else 0.0])
    res.add_table("trials", ["trial", "size", "jk_residual", "commutator_residual",
                             "zero_block_jk"], rows)
    res.check("expm_unitarity", worst_unit, 1e-10, worst_unit < 1e-10)
    res.check("projected_jk_residual", worst_jk, tol, worst_jk < tol)
    res.check("projected_commutator", worst_comm, tol, worst_comm < tol)
    res.check("unitary_commutant_passes", all_pass_unitary, True, all_pass_unitary)
    res.check("zero_block_exempt", exempt_ok, True, exempt_ok)
    res.summary.update({"trials": p["n_trials"],
                        "min_zero_block_jk_retained": worst_zero_jk})


def _pot1d(spec, name="potential"):
    try:
        return load_potential(spec)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid {name}: {exc}") from exc


def _radial(spec, name="potential"):
    try:
        return RadialPotential.from_json(spec)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid {name}: {exc}") from exc


def _positive(value, name):
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a number") from exc
    if not v > 0:
        raise ConfigError(f"{name} must be positive, got {value!r}")
    return v


def _scatter1d(cfg, res, rng):
    p = cfg.parameters
    pot = _pot1d(p["potential"])
    energies = [_positive(E, "energy") for E in p["energies"]]
    rows, worst = [], 0.0
    for E in energies:
        a = schro1d.solve_scattering_1d(pot, E)
        worst = max(worst, a.flux_residual)
        rows.append([E, a.r.real, a.r.imag, a.t.real, a.t.imag,
                     abs(a.c_beta_left), abs(a.c_beta_right), a.flux_residual])
    res.add_table("amplitudes", ["E", "re_r", "im_r", "re_t", "im_t", "abs_c_beta_left",
                                 "abs_c_beta_right", "flux_residual"], rows)
    res.check("flux_conservation", worst, p["flux_tol"], worst < p["flux_tol"])


def _near_zone(cfg, res, rng):
    p = cfg.parameters
    pot = _pot1d(p["potential"])
    E = _positive(p["E"], "E")
    g = p["grid"]
    try:
        grid = np.linspace(float(g["start"]), float(g["stop"]), int(g["num"]))
        window = (float(p["window"][0]), float(p["window"][1]))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"invalid grid/window: {exc}") from exc
    prof = schro1d.wave_profile_1d(pot, E, grid)
    fit = schro1d.beta_decay_rate(prof, window)
    expected = math.sqrt(E)
    rel = abs(fit.kappa_fit - expected) / expected
    res.add_table("profile", ["x", "re_psi_alpha", "im_psi_alpha", "re_psi_beta", "im_psi_beta"],
                  [[x, a.real, a.imag, b.real, b.imag]
                   for x, a, b in zip(prof.x, prof.psi_alpha, prof.psi_beta)])
    res.summary.update({"E": E, "kappa_fit": fit.kappa_fit, "expected_kappa": expected,
                        "r_squared": fit.r_squared, "intercept": fit.intercept,
                        "window": list(window), "t": prof.amplitudes.t, "r": prof.amplitudes.r})
    res.check("kappa_matches_sqrtE", rel, p["kappa_rtol"], rel < p["kappa_rtol"])
    res.check("log_linearity", fit.r_squared, p["r2_min"], fit.r_squared > p["r2_min"])
    res.check("flux_conservation", prof.amplitudes.flux_residual, 1e-8,
              prof.amplitudes.flux_residual < 1e-8)


def _two_barrier_scan(cfg, res, rng):
    p = cfg.parameters
    A, B = _pot1d(p["potential_A"], "potential_A"), _pot1d(p["potential_B"], "potential_B")
    E = _positive(p["E"], "E")
    kappa = math.sqrt(E)
    d_max = 8.0 / kappa if p["d_max"] is None else _positive(p["d_max"], "d_max")
    ds = np.linspace(0.0, d_max, int(p["num"]))
    deltas = schro1d.separation_scan(A, B, ds, E)
    res.add_table("scan", ["d", "delta"], zip(ds, deltas))
    fit = schro1d.fit_log_linear(ds, deltas)
    rel = abs(fit.kappa_fit - kappa) / kappa
    res.summary.update({"E": E, "kappa_fit": fit.kappa_fit, "expected_kappa": kappa,
                        "r_squared": fit.r_squared, "intercept": fit.intercept,
                        "delta_at_d_max": float(deltas[-1]), "d_max": d_max,
                        "delta_at_zero": float(deltas[0])})
    res.check("decay_rate_matches_sqrtE", rel, p["slope_rtol"], rel < p["slope_rtol"])
    res.check("far_zone_delta", float(deltas[-1]), p["far_limit"], deltas[-1] < p["far_limit"])


def _partial_waves(cfg, res, rng):
    p = cfg.parameters
    pot = _radial(p["potential"])
    energies = [_positive(E, "energy") for E in p["energies"]]
    rows, amps = [], []
    worst_u, worst_opt = 0.0, 0.0
    for E in energies:
        s = forward_amplitude(pot, E, p["L_max"])
        for ell in range(s.L_max_used + 1):
            w = phase_shift(pot, E, ell)
            worst_u = max(worst_u, w.unitarity_residual)
            rows.append([E, ell, w.delta_ell, w.S_ell.real, w.S_ell.imag])
        worst_opt = max(worst_opt, s.optical_theorem_residual)
        amps.append({"E": E, "f_forward": s.f_forward, "sigma_total": s.sigma_total,
                     "L_max_used": s.L_max_used,
                     "optical_theorem_residual": s.optical_theorem_residual})
    res.add_table("phases", ["E", "ell", "delta_ell", "re_S", "im_S"], rows)
    res.summary["amplitudes"] = amps
    res.check("unitarity", worst_u, p["unitarity_tol"], worst_u < p["unitarity_tol"])
    res.check("optical_theorem", worst_opt, p["optical_tol"], worst_opt < p["optical_tol"])


def _refractive_index(cfg, res, rng):
    p = cfg.parameters
    pot = _radial(p["potential"])
    omega, c = _positive(p["omega"], "omega"), _positive(p["c"], "c")
    N = float(p["N"])
    if N < 0:
        raise ConfigError("N must be non-negative")
    E = (omega / c) ** 2
    f = forward_amplitude(pot, E).f_forward
    nr = optics.rayleigh_index(f, omega, N, c)
    ns = optics.serber_index(f, omega, N, c)
    res.summary.update({"E": E, "f_forward": f, "n_rayleigh": nr.to_list(),
                        "n_serber": ns.to_list(),
                        "rayleigh_serber_difference": abs(complex(nr.n0, nr.n1) - complex(ns.n0, ns.n1))})
    ok = nr.is_complex and ns.is_complex
    res.check("index_is_complex", [nr.n2, nr.n3, ns.n2, ns.n3], [0.0, 0.0, 0.0, 0.0], ok)


def _peres_slabs(p):
    if "A" in p and "B" in p:
        data = {"A": p["A"], "B": p["B"], "relation": p.get("relation", "rayleigh"),
                "bound_deg": optics.EXPERIMENT_BOUND_DEG}
    else:
        path = p.get("preset_file") or optics.preset_path(p["preset"])
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read preset {path}: {exc}") from exc
        if "relation" in p:
            data["relation"] = p["relation"]
    try:
        A, B = optics.SlabSpec.from_dict(data["A"]), optics.SlabSpec.from_dict(data["B"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid slab spec: {exc}") from exc
    if data.get("relation", "rayleigh") not in ("rayleigh", "serber"):
        raise ConfigError("relation must be 'rayleigh' or 'serber'")
    return data, A, B


def _peres(cfg, res, rng):
    p = cfg.parameters
    data, A, B = _peres_slabs(p)
    relation = data.get("relation", "rayleigh")
    bound = float(data.get("bound_deg", optics.EXPERIMENT_BOUND_DEG))
    rep = optics.peres_pipeline(A, B, relation, bound)
    res.summary["pipeline"] = rep
    complex_idx = all(s["index_from_scattering_is_complex"] for s in rep["slabs"].values())
    res.check("scattering_indices_complex", complex_idx, True, complex_idx)
    res.check("elastic_delta_deg", rep["delta_deg"], p["delta_tol"], rep["delta_deg"] < p["delta_tol"])
    row = {"relation": relation, "delta_deg": rep["delta_deg"], "bound_deg": bound,
           "nA0": rep["slabs"]["A"]["n"][0], "nB0": rep["slabs"]["B"]["n"][0]}
    if p.get("control") and data.get("inject_control"):
        inj = data["inject_control"]
        slabs = []
        for name, slab in (("A", A), ("B", B)):
            d = inj.get(name, {})
            slabs.append(optics.SlabSpec(slab.N, slab.w, slab.omega, slab.scatterer, slab.c,
                                         (d.get("n2", 0.0), d.get("n3", 0.0))))
        ctl = optics.peres_pipeline(*slabs, relation, bound)
        res.summary["control"] = ctl
        res.check("control_exceeds_bound", ctl["delta_deg"], bound, ctl["delta_deg"] > bound)
        row["control_delta_deg"] = ctl["delta_deg"]
    res.add_table("summary", list(row), [list(row.values())])


SCENARIOS = {
    "algebra-check": _algebra_check,
    "smatrix-theorem": _smatrix_theorem,
    "scatter1d": _scatter1d,
    "near-zone": _near_zone,
    "two-barrier-scan": _two_barrier_scan,
    "partial-waves": _partial_waves,
    "refractive-index": _refractive_index,
    "peres": _peres,
}


def run(config: ScenarioConfig) -> RunResult:
    res = RunResult(config.scenario, config.to_dict())
    rng = np.random.default_rng(config.seed)
    t0 = time.perf_counter()
    SCENARIOS[config.scenario](config, res, rng)
    res.wall_time = time.perf_counter() - t0
    return res


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def resolve_output(config: ScenarioConfig, override: str | None = None) -> Path:
    out = override or config.output or os.environ.get(OUTPUT_ENV) or "peres-lab-out"
    path = Path(out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from exc
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory {path} is not writable")
    return path


def write_outputs(result: RunResult, config: ScenarioConfig, out: Path) -> list[Path]:
    written = []
    if "json" in config.formats:
        p = out / "result.json"
        p.write_text(result.to_json())
        written.append(p)
        t = out / "timing.json"
        t.write_text(json.dumps({"wall_time_s": result.wall_time}) + "\n")
    if "csv" in config.formats:
        for name, tab in result.tables.items():
            p = out / f"{name}.csv"
            write_csv(p, tab["columns"], tab["rows"])
            written.append(p)
    return written


PLOT_KINDS = {"decay": "profile", "scan": "scan", "phases": "phases"}


class MissingTableError(ValueError):
    pass


def emit_plot_data(result: dict, kind: str, out: Path) -> list[Path]:
    """Plain numeric columns for plotting, taken from a result document."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}")
    tab = result.get("tables", {}).get(PLOT_KINDS[kind])
    if not tab or not tab.get("rows"):
        raise MissingTableError(f"result has no {PLOT_KINDS[kind]!r} table for kind {kind!r}")
    cols = tab["columns"]
    rows = tab["rows"]
    out.mkdir(parents=True, exist_ok=True)
    if kind == "decay":
        ix, ire, iim = cols.index("x"), cols.index("re_psi_beta"), cols.index("im_psi_beta")
        data = []
        for r in rows:
            mag = math.hypot(r[ire], r[iim])
            if mag > 0:
                data.append([r[ix], math.log(mag)])
        path = out / "decay.csv"
        write_csv(path, ["x", "log_abs_psi_beta"], data)
        s = result.get("summary", {})
        side = out / "decay_fit.json"
        fit = {"slope": -s.get("kappa_fit", float("nan")), "intercept": s.get("intercept"),
               "kappa_fit": s.get("kappa_fit"), "r_squared": s.get("r_squared"),
               "window": s.get("window")}
        side.write_text(json.dumps(_plain(fit), indent=2, sort_keys=True) + "\n")
        return [path, side]
    if kind == "scan":
        data = [[d, math.log(v)] for d, v in rows if v > 0]
        path = out / "scan.csv"
        write_csv(path, ["d", "log_delta"], data)
        return [path]
    iE, il, idl = cols.index("E"), cols.index("ell"), cols.index("delta_ell")
    path = out / "phases.csv"
    write_csv(path, ["E", "ell", "delta_ell"], [[r[iE], r[il], r[idl]] for r in rows])
    return [path]

"""Declarative scenarios: JSON config in, CSV/JSON series plus a manifest out."""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import geometry, qsl, uncertainty
from .dynamics import FieldParams, Trajectory, closed_form_valid, propagate_numeric
from .errors import ConfigError, NotApplicable, SpinQslError
from .spin_algebra import as_spin, bloch_radius, make_spin_system

OUTPUTS = ("trajectory", "hodograph", "frenet", "deviation_curve", "qsl_report",
           "uncertainty_report", "bounds_table", "ratio_table")
FORMATS = ("csv", "json")

_FIG_FIELD = {"h1": 2.0, "h2": 2.0, "H": 1.0, "omega": 1.0, "k": 0.0}
_TABLE_SPINS = ["1/2", "1", "3/2", "2", "5/2", "3", "4", "10"]

PRESETS: dict[str, dict[str, Any]] = {
    "fig1": {"spin": 1, "field": _FIG_FIELD, "t_end": math.pi, "n_steps": 4000,
             "outputs": ["deviation_curve"]},
    "fig2": {"spin": 1, "field": _FIG_FIELD, "t_end": math.pi, "n_steps": 4000,
             "outputs": ["frenet", "hodograph"], "frenet_curve": "hodograph"},
    "fig3": {"spin": 1, "field": _FIG_FIELD, "t_end": math.pi, "n_steps": 4000,
             "outputs": ["uncertainty_report"]},
    "fig4": {"spin": 1, "field": _FIG_FIELD, "t_end": math.pi, "n_steps": 4000,
             "outputs": ["uncertainty_report"]},
    "fig5": {"spin": 1, "field": {"h1": 2.0, "h2": 2.0, "H": 20.0, "omega": 20.0, "k": 0.0},
             "t_end": math.pi, "n_steps": 20000, "sample_every": 5,
             "outputs": ["uncertainty_report"]},
    "bounds_table": {"spin": 1, "field": _FIG_FIELD, "t_end": math.pi / 2, "n_steps": 2000,
                     "outputs": ["bounds_table", "qsl_report"], "spins": _TABLE_SPINS},
    "ratio_table": {"spin": 1, "field": _FIG_FIELD, "t_end": math.pi, "n_steps": 1,
                    "outputs": ["ratio_table"],
                    "spins": ["1/2", "1", "3/2", "2", "5/2", "3", "4", "5", "10", "20", "50"]},
}


@dataclass
class ScenarioConfig:
    spin: float
    field: FieldParams
    t_end: float
    n_steps: Optional[int] = None
    sample_every: int = 1
    outputs: list = field(default_factory=lambda: ["trajectory"])
    frenet_curve: str = "hodograph"
    spins: list = field(default_factory=lambda: list(_TABLE_SPINS))
    out_dir: str = "results"
    format: str = "csv"
    name: str = "scenario"

    @classmethod
    def from_dict(cls, raw: dict, name: str = "scenario") -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {"name", "spin", "field", "t_end", "n_steps", "sample_every", "outputs",
                 "frenet_curve", "spins", "out_dir", "format"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        problems = []

        def grab(key, convert, default=None, required=False):
            if key not in raw:
                if required:
                    problems.append(f"{key}: missing")
                return default
            try:
                return convert(raw[key])
            except (TypeError, ValueError, SpinQslError) as exc:
                problems.append(f"{key}: {exc}")
                return default

        spin = grab("spin", as_spin, required=True)
        fld = grab("field", lambda f: FieldParams(**f), required=True)
        t_end = grab("t_end", float, required=True)
        n_steps = grab("n_steps", lambda v: None if v in (None, "auto") else int(v))
        sample_every = grab("sample_every", int, 1)
        outputs = grab("outputs", list, ["trajectory"])
        frenet_curve = grab("frenet_curve", str, "hodograph")
        spins = grab("spins", lambda v: [as_spin(s) for s in v], [as_spin(s) for s in _TABLE_SPINS])
        out_dir = grab("out_dir", str, "results")
        fmt = grab("format", str, "csv")

        if t_end is not None and not (math.isfinite(t_end) and t_end > 0):
            problems.append("t_end: must be a positive number")
        if n_steps is not None and n_steps < 1:
            problems.append("n_steps: must be >= 1 or 'auto'")
        if sample_every is not None and sample_every < 1:
            problems.append("sample_every: must be >= 1")
        for out in outputs or []:
            if out not in OUTPUTS:
                problems.append(f"outputs: unknown output {out!r} (choose from {', '.join(OUTPUTS)})")
        if frenet_curve not in ("hodograph", "deviation"):
            problems.append("frenet_curve: must be 'hodograph' or 'deviation'")
        if fmt not in FORMATS:
            problems.append("format: must be 'csv' or 'json'")
        if problems:
            raise ConfigError("; ".join(problems))
        return cls(spin=spin, field=fld, t_end=t_end, n_steps=n_steps, sample_every=sample_every,
                   outputs=outputs, frenet_curve=frenet_curve, spins=spins, out_dir=out_dir,
                   format=fmt, name=str(raw.get("name", name)))


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    raw = copy.deepcopy(PRESETS[name])
    raw["name"] = name
    return raw


# --- series builders; each returns (columns, rows, notes) -------------------

def _trajectory_table(traj: Trajectory):
    stats = qsl.energy_stats(traj)
    R = traj.coherence
    cols = ["t[1/omega]", "R1[1]", "R2[1]", "R3[1]", "purity[1]", "energy_variance[omega^2]"]
    return cols, np.column_stack([traj.times, R, traj.purity(), stats.variance]), {}


def _hodograph_table(traj: Trajectory):
    R = traj.coherence
    theta, phi = geometry.to_spherical(R)
    dt = geometry.Curve3D(traj.times, R).step
    theta_rate = geometry.derivative(theta, dt, 1)
    phi_rate = geometry.derivative(np.unwrap(phi), dt, 1)
    cols = ["t[1/omega]", "R1[1]", "R2[1]", "R3[1]", "theta[rad]", "phi[rad]",
            "theta_rate[rad*omega]", "phi_rate[rad*omega]"]
    return cols, np.column_stack([traj.times, R, theta, phi, theta_rate, phi_rate]), {}


def _frenet_table(traj: Trajectory, which: str):
    if which == "hodograph":
        curve = geometry.Curve3D(traj.times, traj.coherence)
    else:
        curve = uncertainty.deviation_curve(traj)
    fd = geometry.frenet_analyze(curve)
    S3 = traj.coherence[:, 2] / math.sqrt(3.0 / traj.system.casimir)
    cols = ["t[1/omega]", "S3[1]", "curvature[1/len]", "torsion[1/len]", "V[len*omega]", "s[len]"]
    data = np.column_stack([traj.times, S3, fd.curvature, fd.torsion, fd.speed, fd.arclength])
    return cols, data, {"curve": which, "torsion_undefined": int((~fd.torsion_defined).sum())}


def _deviation_table(traj: Trajectory):
    curve = uncertainty.deviation_curve(traj)
    cols = ["t[1/omega]", "dS1[1]", "dS2[1]", "dS3[1]", "sum_sq[1]"]
    data = [traj.times, curve.points, np.sum(curve.points ** 2, axis=1)]
    p = traj.params
    notes = {"conservation_asserted": uncertainty.conservation_applicable(p, traj.system.S)}
    if p.k == 0.0 and p.is_resonant() and p.is_consistent():
        cols += ["dS1_closed[1]", "dS2_closed[1]", "dS3_closed[1]"]
        data.append(uncertainty.deviation_closed_form(traj.times, traj.system.S, p))
    return cols, np.column_stack(data), notes


def _uncertainty_table(traj: Trajectory):
    sys = traj.system
    rep = uncertainty.conditional_measures(traj.states, sys)
    std = rep.std_devs
    S3 = traj.coherence[:, 2] / math.sqrt(3.0 / sys.casimir)
    cols = ["t[1/omega]", "S3[1]", "dS1[1]", "dS2[1]", "dS3[1]",
            "M12[1]", "Delta1|2[1]", "Var1|2[1]"]
    data = [traj.times, S3, std, rep.mutual[:, 0, 1], rep.conditional[:, 0, 1],
            rep.conditional_variance[:, 0, 1]]
    for label, idx in (("12", [0, 1]), ("13", [0, 2]), ("23", [1, 2]), ("123", [0, 1, 2])):
        hm, gm, am = uncertainty.product_bounds(std[:, idx])
        n = len(idx)
        cols += [f"prod{label}[1]", f"hm{label}^{n}[1]", f"am{label}^{n}[1]"]
        data += [gm ** n, hm ** n, am ** n]
    return cols, np.column_stack(data), {}


def _qsl_row(cfg: ScenarioConfig, sys):
    p = cfg.field
    if not (p.is_consistent() and p.is_resonant()):
        raise NotApplicable("speed-limit report needs a consistent field at resonance")
    tau = math.pi / p.h
    n = cfg.n_steps or qsl_steps(p, tau)
    traj = propagate_numeric(sys.highest_weight_state(), p, sys, tau, n_steps=n)
    rep = qsl.mt_check(traj, "full")
    cols = ["S[1]", "h[omega]", "H[omega]", "k[1]", "tau[1/omega]", "tau_qsl[1/omega]",
            "tau1[1/omega]", "tau1_qsl[1/omega]", "mt_product[1]", "mt_bound[1]", "mt_margin[1]",
            "mt1_product[1]", "mt1_bound[1]", "mt1_margin[1]", "p[1]"]
    row = [rep.S, rep.h, rep.H, p.k, rep.tau, rep.tau_qsl, rep.tau1, rep.tau1_qsl,
           rep.mt_product, qsl.mt_bound(rep.S), rep.mt_margin,
           rep.mt1_product, qsl.mt1_bound(rep.S), rep.mt1_margin, rep.p_factor]
    notes = {"bound_enforced": rep.bound_enforced}
    if closed_form_valid(p, sys.S):
        cols.append("pole_distance[len]")
        row.append(qsl.pole_distance(p.h, p.H, p.k, sys.S))
    return cols, np.array([row], dtype=float), notes


def qsl_steps(p: FieldParams, tau: float) -> int:
    return max(2000, math.ceil(400 * tau * p.max_rate()))


def _bounds_table(cfg: ScenarioConfig):
    p = cfg.field
    if not p.is_consistent():
        raise NotApplicable("bound formulas need h1 = h2")
    h, H = p.h, p.H
    cols = ["S[1]", "r_B[1]", "p[1]", "tau[1/omega]", "tau_qsl[1/omega]", "tau1[1/omega]",
            "tau1_qsl[1/omega]", "tau_qsl_h0[1/omega]", "tau1_qsl_h0[1/omega]",
            "geodesic_r_b[1]", "geodesic_p[1]"]
    rows = []
    for S in cfg.spins:
        rb = qsl.geodesic_radius(S)
        rows.append([S, bloch_radius(S), qsl.p_factor(S), math.pi / h, qsl.tau_qsl(S, h, H),
                     math.pi / (2 * S * h), qsl.tau1_qsl(S, h, H),
                     qsl.tau_qsl_limit(S, H) if H > 0 else math.nan,
                     qsl.tau1_qsl_limit(S, H) if H > 0 else math.nan,
                     rb, qsl.geodesic_p(S, rb)])
    return cols, np.array(rows, dtype=float), {}


def _ratio_table(cfg: ScenarioConfig):
    rows = [[S, qsl.qsl_ratio_limit(S)] for S in cfg.spins]
    return ["S[1]", "ratio[1]"], np.array(rows, dtype=float), {"large_S_limit": math.pi ** 2 / 4}


# --- writing ---------------------------------------------------------------

def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else format(float(x), ".17g")


def _write(path: Path, cols, data, fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(cols)]
        lines += [",".join(_fmt(v) for v in row) for row in data]
        text = "\n".join(lines) + "\n"
    else:
        payload = {c: [None if math.isnan(v) else float(v) for v in data[:, j]]
                   for j, c in enumerate(cols)}
        text = json.dumps({"columns": list(cols), "data": payload}, indent=1) + "\n"
    path.write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class ResultManifest:
    scenario: str
    entries: dict

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "outputs": self.entries}

    def ok(self) -> bool:
        return all(e["status"] == "ok" for e in self.entries.values())


def run_scenario(cfg: ScenarioConfig, out_dir: Optional[str] = None) -> ResultManifest:
    """Compute every requested output and write it next to ``manifest.json``.

    Outputs outside their regime are recorded as ``not_applicable`` with the
    reason instead of being dropped.
    """
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sys = make_spin_system(cfg.spin)
    traj = None
    needs_traj = {"trajectory", "hodograph", "frenet", "deviation_curve", "uncertainty_report"}
    if needs_traj & set(cfg.outputs):
        traj = propagate_numeric(sys.highest_weight_state(), cfg.field, sys, cfg.t_end,
                                 n_steps=cfg.n_steps, sample_every=cfg.sample_every)

    builders = {
        "trajectory": lambda: _trajectory_table(traj),
        "hodograph": lambda: _hodograph_table(traj),
        "frenet": lambda: _frenet_table(traj, cfg.frenet_curve),
        "deviation_curve": lambda: _deviation_table(traj),
        "uncertainty_report": lambda: _uncertainty_table(traj),
        "qsl_report": lambda: _qsl_row(cfg, sys),
        "bounds_table": lambda: _bounds_table(cfg),
        "ratio_table": lambda: _ratio_table(cfg),
    }
    entries = {}
    for name in cfg.outputs:
        try:
            cols, data, notes = builders[name]()
        except NotApplicable as exc:
            entries[name] = {"status": "not_applicable", "reason": str(exc)}
            continue
        data = np.atleast_2d(np.asarray(data, dtype=float))
        path = out / f"{name}.{cfg.format}"
        digest = _write(path, cols, data, cfg.format)
        entries[name] = {"status": "ok", "path": path.name, "columns": list(cols),
                         "rows": int(data.shape[0]), "sha256": digest, **notes}
    manifest = ResultManifest(cfg.name, entries)
    (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    return manifest

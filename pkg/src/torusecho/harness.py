"""Scenario-driven hbar-ladder sweeps paired with the closed-form limits.

A scenario is a TOML file naming initial data, a potential, a regime, a
ladder of hbar values, a grid of rescaled times and optional two-microlocal
observables. ``run_scenario`` simulates every rung, attaches theory values
and judges the gap trend; ``write_outputs`` and ``emit_plots`` persist the
results deterministically.
"""
from __future__ import annotations

import ast
import csv
import hashlib
import json
import logging
import math
import operator
import os
import platform
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .exceptions import ConfigError, TorusEchoError, TruncationError
from .lattice import PrimitiveDirection
from .microlocal import CONVENTIONS, Observable, convention_gap_bound, two_microlocal
from .oracles import QUADRATURE, classify_limit, predict_strong_overlap, predict_theorem, predict_two_microlocal
from .potentials import RegimeSpec, TrigPotential
from .propagator import DEFAULT_DT_CONTROL, echo
from .states import (
    CoherentSpec,
    FourierState,
    PlaneWaveFamily,
    SuperpositionSpec,
    coherent_state,
    fft_size,
    plane_wave,
    superpose,
)

log = logging.getLogger(__name__)

WORKERS_ENV = "TORUSECHO_WORKERS"
PASS, FAIL, INSUFFICIENT = "pass", "fail", "insufficient ladder"
GAP_FLOOR = 1e-16
CSV_COLUMNS = [
    "hbar", "epsilon", "t", "re_overlap", "im_overlap", "echo", "dt_used", "norm_drift",
    "source", "quantity", "observable", "dir", "convention", "window", "dt_coarse", "n_steps",
]


# ---------------------------------------------------------------------------
# config parsing

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_number(value) -> float:
    """A float, or a string arithmetic expression in numbers and ``pi``."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a number, got {value!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        raise ConfigError(f"unsupported expression {value!r}")

    try:
        return ev(ast.parse(value, mode="eval"))
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse {value!r}") from exc


def _complex(w) -> complex:
    if isinstance(w, dict):
        return complex(float(w.get("re", 0.0)), float(w.get("im", 0.0)))
    return complex(parse_number(w))


def parse_initial_data(d: dict):
    kind = d.get("type")
    if kind == "plane_wave":
        if d.get("family") == "fibonacci":
            return PlaneWaveFamily.fibonacci(float(d.get("max_norm", 600)))
        if "ks" in d:
            ks = tuple((int(a), int(b)) for a, b in d["ks"])
            lim = d.get("limit_direction")
            return PlaneWaveFamily(ks=ks, limit_direction=tuple(map(float, lim)) if lim else None)
        if "base_dir" not in d:
            raise ConfigError("plane_wave data needs base_dir, ks or family")
        omega = d.get("omega")
        return PlaneWaveFamily(
            base_dir=PrimitiveDirection.parse(str(d["base_dir"])),
            m_of_hbar=int(d.get("m", 0)),
            omega=None if omega is None else float(omega),
        )
    if kind == "coherent":
        try:
            return CoherentSpec(
                x0=tuple(parse_number(v) for v in d["x0"]),
                xi0=tuple(parse_number(v) for v in d["xi0"]),
                profile=str(d.get("profile", "gaussian")),
                width=float(d.get("width", 1.0)),
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad coherent data: {exc}") from exc
    if kind == "superposition":
        parts = [parse_initial_data(p) for p in d.get("parts", [])]
        weights = [_complex(w) for w in d.get("weights", [1.0] * len(parts))]
        if len(parts) < 1 or len(parts) != len(weights):
            raise ConfigError("superposition needs parts and one weight per part")
        return SuperpositionSpec(tuple(parts), tuple(weights))
    raise ConfigError(f"unknown initial data type {kind!r}")


def initial_data_to_config(data) -> dict:
    if isinstance(data, PlaneWaveFamily):
        if data.ks is not None:
            d = {"type": "plane_wave", "ks": [list(k) for k in data.ks]}
            if data.limit_direction is not None:
                d["limit_direction"] = list(data.limit_direction)
            return d
        d = {"type": "plane_wave", "base_dir": str(data.base_dir), "m": int(data.m_of_hbar) if not callable(data.m_of_hbar) else None}
        if data.omega is not None:
            d["omega"] = data.omega
        return d
    if isinstance(data, CoherentSpec):
        return {"type": "coherent", "x0": list(data.x0), "xi0": list(data.xi0), "profile": data.profile, "width": data.width}
    return {
        "type": "superposition",
        "parts": [initial_data_to_config(p) for p in data.parts],
        "weights": [{"re": w.real, "im": w.imag} for w in data.weights],
    }


@dataclass(frozen=True)
class ObservableSpec:
    dir: PrimitiveDirection
    observable: Observable

    @property
    def name(self) -> str:
        return self.observable.name or "observable"


@dataclass(frozen=True)
class Verdict:
    trend_rungs: int = 3
    jitter: float = 1e-3
    final_gap_tol: float | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    initial_data: object
    potential: TrigPotential
    regime: RegimeSpec
    hbars: tuple
    times: tuple
    observables: tuple = ()
    conventions: tuple = ("input",)
    dt_control: float = DEFAULT_DT_CONTROL
    window: int | None = None
    max_window: int = 4096
    theory: str = "auto"
    verdict: Verdict = Verdict()
    output: str | None = None
    description: str = ""
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def config_hash(self) -> str:
        cfg = {k: v for k, v in self.raw.items() if k != "output"}
        return hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()


def _ladder(d: dict, data) -> tuple:
    if "hbar" in d:
        hs = [parse_number(h) for h in d["hbar"]]
    elif "log2_hbar" in d:
        hs = [2.0 ** float(e) for e in d["log2_hbar"]]
    elif isinstance(data, PlaneWaveFamily) and data.ks is not None:
        rungs = int(d.get("rungs", 5))
        hs = [1.0 / math.hypot(*k) for k in data.ks[-rungs:]]
    else:
        raise ConfigError("ladder needs hbar, log2_hbar, or an explicit plane-wave sequence")
    return tuple(hs)


def scenario_from_dict(raw: dict, name: str = "scenario") -> Scenario:
    try:
        data = parse_initial_data(raw["initial_data"])
    except KeyError as exc:
        raise ConfigError("scenario needs an [initial_data] table") from exc
    pot = raw.get("potential", [])
    V = TrigPotential.from_config(pot) if pot else TrigPotential.zero()
    reg = raw.get("regime", {})
    regime = RegimeSpec(c=float(reg.get("c", 1.0)), alpha=parse_number(reg.get("alpha", 1.5)))
    hbars = _ladder(raw.get("ladder", {}), data)
    times = tuple(parse_number(t) for t in raw.get("times", {}).get("t", []))
    obs = []
    for o in raw.get("observables", []):
        if "dir" not in o:
            raise ConfigError("each observable needs a dir = \"p/q\"")
        obs.append(ObservableSpec(PrimitiveDirection.parse(str(o["dir"])), Observable.from_config(o)))
    ctl = raw.get("control", {})
    conventions = tuple(ctl.get("conventions", ["input"]))
    for c in conventions:
        if c not in CONVENTIONS:
            raise ConfigError(f"unknown convention {c!r}")
    ver = raw.get("verdict", {})
    tol = ver.get("final_gap_tol")
    s = Scenario(
        name=str(raw.get("name", name)),
        description=str(raw.get("description", "")),
        initial_data=data,
        potential=V,
        regime=regime,
        hbars=hbars,
        times=times,
        observables=tuple(obs),
        conventions=conventions,
        dt_control=float(ctl.get("dt_control", DEFAULT_DT_CONTROL)),
        window=int(ctl["window"]) if "window" in ctl else None,
        max_window=int(ctl.get("max_window", 4096)),
        theory=str(ver.get("theory", "auto")),
        verdict=Verdict(int(ver.get("trend_rungs", 3)), float(ver.get("jitter", 1e-3)), None if tol is None else float(tol)),
        output=raw.get("output"),
        raw=raw,
    )
    validate_scenario(s)
    return s


def bundled_scenarios() -> list[str]:
    root = resources.files("torusecho") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def resolve_scenario_path(name_or_path: str) -> Path:
    p = Path(name_or_path)
    if p.exists():
        return p
    stem = p.name[:-5] if p.name.endswith(".toml") else p.name
    cand = resources.files("torusecho") / "scenarios" / f"{stem}.toml"
    if cand.is_file():
        return Path(str(cand))
    raise ConfigError(f"no scenario file or bundled scenario named {name_or_path!r}")


def load_scenario(name_or_path: str) -> Scenario:
    path = resolve_scenario_path(name_or_path)
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return scenario_from_dict(raw, name=path.stem)


# ---------------------------------------------------------------------------
# states along the ladder


def _combine(states: list[FourierState], weights) -> FourierState:
    centers = np.array([s.center for s in states], dtype=float)
    mid = tuple(int(v) for v in np.rint(centers.mean(axis=0)))
    spread = int(np.max(np.abs(centers - np.asarray(mid)))) if len(states) > 1 else 0
    n = fft_size(max(s.window for s in states) + 2 * spread)
    return superpose([s.relayout(n, mid) for s in states], weights)


def build_state(data, hbar: float, regime: RegimeSpec, window: int | None = None) -> FourierState:
    """Initial state of the family at (approximately, for plane waves) ``hbar``."""
    if isinstance(data, PlaneWaveFamily):
        k = data.k_for(hbar, regime.epsilon(hbar))
        return plane_wave(k, window or 32, center=k)
    if isinstance(data, CoherentSpec):
        st = coherent_state(data, hbar)
        if window and window > st.window:
            st = coherent_state(data, hbar, window=fft_size(window))
        return st
    if isinstance(data, SuperpositionSpec):
        parts = [build_state(p, hbar, regime, window) for p in data.parts]
        h0 = parts[0].hbar
        if any(abs(p.hbar - h0) > 1e-12 * h0 for p in parts):
            raise ConfigError("superposed plane waves must have equal |k| at every rung")
        return _combine(parts, list(data.weights))
    raise ConfigError(f"unknown initial data {type(data).__name__}")


def validate_scenario(s: Scenario) -> None:
    if not s.hbars:
        raise ConfigError("empty hbar ladder")
    realized = []
    for h in s.hbars:
        if not 0 < h < 1:
            raise ConfigError(f"hbar {h} outside (0, 1)")
        if isinstance(s.initial_data, PlaneWaveFamily):
            realized.append(1.0 / math.hypot(*s.initial_data.k_for(h, s.regime.epsilon(h))))
        else:
            realized.append(h)
    if any(b >= a for a, b in zip(realized, realized[1:])):
        raise ConfigError(f"ladder must be strictly decreasing (realized {realized})")
    if s.theory not in ("auto", "theorem", "strong", "none"):
        raise ConfigError(f"unknown theory mode {s.theory!r}")
    if not s.times and not s.observables:
        log.warning("scenario %s has neither times nor observables", s.name)


# ---------------------------------------------------------------------------
# running


@dataclass
class SeriesReport:
    """One gap series along the ladder: ``rows = [(hbar, sim, theory, gap), ...]``."""

    quantity: str
    label: dict
    rows: list
    verdict: str = ""

    def gaps(self) -> list[float]:
        return [r[3] for r in self.rows]


def judge(gaps: list[float], v: Verdict) -> str:
    """Trend verdict from a gap column alone."""
    if len(gaps) < 2:
        return INSUFFICIENT
    if any(not math.isfinite(g) for g in gaps):
        return FAIL
    tail = gaps[-max(2, v.trend_rungs):]
    if any(b > a + v.jitter for a, b in zip(tail, tail[1:])):
        return FAIL
    if v.final_gap_tol is not None and not gaps[-1] < v.final_gap_tol:
        return FAIL
    return PASS


def judge_shrinking(bounds: list[float]) -> str:
    """Each rung strictly below the previous one, or already zero."""
    if len(bounds) < 2:
        return INSUFFICIENT
    ok = all(b == 0.0 or b < a for a, b in zip(bounds, bounds[1:]))
    return PASS if ok else FAIL


@dataclass
class ConvergenceReport:
    scenario: str
    series: list
    samples: list
    manifest: dict
    verdict: str = ""

    def finalize(self, v: Verdict) -> "ConvergenceReport":
        for s in self.series:
            if s.quantity == "convention_gap_bound":
                s.verdict = judge_shrinking(s.gaps())
            else:
                s.verdict = judge(s.gaps(), v)
        vs = [s.verdict for s in self.series]
        if not vs:
            self.verdict = INSUFFICIENT
        elif any(x == FAIL for x in vs):
            self.verdict = FAIL
        elif any(x == INSUFFICIENT for x in vs):
            self.verdict = INSUFFICIENT
        else:
            self.verdict = PASS
        return self

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def table(self) -> str:
        lines = [f"scenario {self.scenario}: {self.verdict}"]
        for s in self.series:
            lab = ", ".join(f"{k}={v}" for k, v in s.label.items())
            lines.append(f"  [{s.verdict}] {s.quantity} ({lab})")
            for h, sim, th, gap in s.rows:
                lines.append(f"    hbar={h:.6g}  sim={_fmt_val(sim)}  theory={_fmt_val(th)}  gap={gap:.3e}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "verdict": self.verdict,
            "series": [
                {
                    "quantity": s.quantity,
                    "label": s.label,
                    "verdict": s.verdict,
                    "rows": [[h, _jsonable(sim), _jsonable(th), gap] for h, sim, th, gap in s.rows],
                }
                for s in self.series
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceReport":
        series = [
            SeriesReport(s["quantity"], s["label"], [(r[0], _unjson(r[1]), _unjson(r[2]), r[3]) for r in s["rows"]], s["verdict"])
            for s in d["series"]
        ]
        return cls(d["scenario"], series, [], {}, d["verdict"])


def _fmt_val(v) -> str:
    if isinstance(v, complex):
        return f"{v.real:.6f}{v.imag:+.6f}j"
    return f"{v:.6f}"


def _jsonable(v):
    return [v.real, v.imag] if isinstance(v, complex) else v


def _unjson(v):
    return complex(v[0], v[1]) if isinstance(v, list) else v


def _theory_mode(s: Scenario) -> str:
    if s.theory != "auto":
        return s.theory
    if s.regime.is_main:
        return "theorem"
    if s.regime.alpha <= 1:
        return "strong"
    return "none"


def _with_growing_window(fn, s: Scenario, hbar: float):
    """Call ``fn(state)``; on truncation rebuild with the suggested window."""
    window = s.window
    while True:
        psi = build_state(s.initial_data, hbar, s.regime, window)
        try:
            return psi, fn(psi)
        except TruncationError as exc:
            need = exc.required_window or 2 * psi.window
            need = fft_size(max(need, psi.window + 2))
            if need > s.max_window:
                raise
            log.info("hbar=%g: window %d too small, retrying with %d", hbar, psi.window, need)
            window = need


def run_rung(s: Scenario, hbar: float) -> dict:
    """All simulation samples at one ladder rung (picklable for worker pools)."""
    out = {"hbar_target": hbar, "echo": [], "micro": []}
    for t in s.times:
        try:
            psi, smp = _with_growing_window(lambda p, t=t: echo(p, s.potential, s.regime, t, s.dt_control), s, hbar)
        except TorusEchoError as exc:
            raise TorusEchoError(f"sample hbar={hbar:g}, t={t:g} failed: {exc}") from exc
        out["echo"].append((t, smp))
        out["window"] = max(out.get("window", 0), smp.window)
        out["hbar"] = psi.hbar
        out["prenorm"] = psi.prenorm
        out["meta"] = psi.meta
    if s.observables or "hbar" not in out:
        psi = build_state(s.initial_data, hbar, s.regime, s.window)
        out.setdefault("hbar", psi.hbar)
        out.setdefault("prenorm", psi.prenorm)
        out.setdefault("meta", psi.meta)
        out["window"] = max(out.get("window", 0), psi.window)
        for o in s.observables:
            vals = {}
            for conv in s.conventions:
                vals[conv] = two_microlocal(psi, psi, o.dir, o.observable, s.regime, convention=conv)
            if len(s.conventions) == 2:
                gap = abs(vals["input"].value - vals["output"].value)
                bound = convention_gap_bound(psi, psi, o.dir, o.observable, s.regime)
            else:
                gap = bound = float("nan")
            out["micro"].append((o.name, str(o.dir), vals, gap, bound))
    return out


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc


def library_versions() -> dict:
    import matplotlib
    import scipy

    from . import __version__

    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
        "torusecho": __version__,
    }


def run_scenario(s: Scenario, out_dir=None, workers: int | None = None) -> ConvergenceReport:
    """Simulate every rung, attach theory values, judge trends; write outputs if ``out_dir``."""
    n = _workers(workers)
    if n > 1 and len(s.hbars) > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            rungs = list(pool.map(run_rung, [s] * len(s.hbars), s.hbars))
    else:
        rungs = [run_rung(s, h) for h in s.hbars]
    rungs.sort(key=lambda r: -r["hbar"])

    mode = _theory_mode(s)
    limit = classify_limit(s.initial_data, s.regime) if s.regime.is_main else None
    theory_t = {}
    for t in s.times:
        if mode == "theorem":
            theory_t[t] = predict_theorem(limit, s.potential, t)
        elif mode == "strong":
            theory_t[t] = predict_strong_overlap(s.initial_data, s.potential, t, s.regime)
    micro_theory = {}
    if s.observables and limit is not None and limit.closed_form:
        for o in s.observables:
            micro_theory[o.name] = predict_two_microlocal(limit, o.dir, o.observable)

    samples, series = [], []
    for t in s.times:
        rows = []
        for r in rungs:
            smp = dict(r["echo"])[t]
            samples.append(_echo_row(smp, "simulation"))
            if t in theory_t:
                th = abs(theory_t[t]) ** 2
                samples.append(_theory_row(smp, theory_t[t]))
                rows.append((smp.hbar, smp.echo, th, abs(smp.echo - th)))
        if t in theory_t:
            series.append(SeriesReport("echo", {"t": t}, rows))
    for o in s.observables:
        for conv in s.conventions:
            rows = []
            for r in rungs:
                name, d, vals, _, _ = next(m for m in r["micro"] if m[0] == o.name)
                smp = vals[conv]
                samples.append(_micro_row(smp, name, "simulation"))
                if name in micro_theory:
                    th = micro_theory[name]
                    samples.append(_micro_row(smp, name, "theory", value=th))
                    rows.append((smp.hbar, smp.value, th, abs(smp.value - th)))
            if name in micro_theory:
                series.append(SeriesReport("two_microlocal", {"observable": name, "dir": str(o.dir), "convention": conv}, rows))
        if len(s.conventions) == 2:
            rows = []
            for r in rungs:
                _, _, _, gap, bound = next(m for m in r["micro"] if m[0] == o.name)
                if gap > bound * (1 + 1e-12) + 1e-15:
                    raise AssertionError(f"convention gap {gap} exceeds its bound {bound}")
                rows.append((r["hbar"], gap, 0.0, bound))
            series.append(SeriesReport("convention_gap_bound", {"observable": o.name, "dir": str(o.dir)}, rows))

    manifest = {
        "scenario": s.name,
        "config_hash": s.config_hash,
        "config": s.raw,
        "versions": library_versions(),
        "regime": s.regime.to_dict(),
        "theory_mode": mode,
        "limit_measure": None if limit is None else limit.to_dict(),
        "conventions": {"two_microlocal_eta_argument": list(s.conventions), "symbol_variable": "xi = 2 pi hbar k"},
        "dt_control": s.dt_control,
        "quadrature": QUADRATURE,
        "rungs": [
            {
                "hbar_target": r["hbar_target"],
                "hbar": r["hbar"],
                "window": r.get("window"),
                "prenorm": r.get("prenorm"),
                "state": _plain(r.get("meta", {})),
                "dt": [{"t": t, "dt_used": smp.dt_used, "dt_coarse": smp.dt_coarse, "n_steps": smp.n_steps} for t, smp in r["echo"]],
            }
            for r in rungs
        ],
    }
    report = ConvergenceReport(s.name, series, samples, manifest).finalize(s.verdict)
    manifest["verdict"] = report.verdict
    if out_dir is None:
        out_dir = s.output
    if out_dir is not None:
        write_outputs(report, out_dir)
    return report


def _plain(obj):
    return json.loads(json.dumps(obj, default=str))


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _echo_row(smp, source: str) -> dict:
    return {
        "hbar": _num(smp.hbar), "epsilon": _num(smp.epsilon), "t": _num(smp.t_rescaled),
        "re_overlap": _num(smp.overlap.real), "im_overlap": _num(smp.overlap.imag), "echo": _num(smp.echo),
        "dt_used": _num(smp.dt_used), "norm_drift": _num(smp.norm_drift), "source": source, "quantity": "echo",
        "observable": "", "dir": "", "convention": "", "window": _num(smp.window),
        "dt_coarse": _num(smp.dt_coarse), "n_steps": _num(smp.n_steps),
    }


def _theory_row(smp, overlap: complex) -> dict:
    return {
        "hbar": _num(smp.hbar), "epsilon": _num(smp.epsilon), "t": _num(smp.t_rescaled),
        "re_overlap": _num(overlap.real), "im_overlap": _num(overlap.imag), "echo": _num(abs(overlap) ** 2),
        "dt_used": "", "norm_drift": "", "source": "theory", "quantity": "echo", "observable": "",
        "dir": "", "convention": "", "window": "", "dt_coarse": "", "n_steps": "",
    }


def _micro_row(smp, name: str, source: str, value=None) -> dict:
    v = smp.value if value is None else value
    return {
        "hbar": _num(smp.hbar), "epsilon": _num(smp.epsilon), "t": "",
        "re_overlap": _num(v.real), "im_overlap": _num(v.imag), "echo": "",
        "dt_used": "", "norm_drift": "", "source": source, "quantity": "two_microlocal",
        "observable": name, "dir": str(smp.dir), "convention": smp.convention,
        "window": "", "dt_coarse": "", "n_steps": "",
    }


def write_outputs(report: ConvergenceReport, out_dir) -> list[Path]:
    """``samples.csv``, ``manifest.json`` and ``report.json`` in ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "samples.csv", out / "manifest.json", out / "report.json"]
    with open(paths[0], "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(report.samples)
    with open(paths[1], "w") as fh:
        json.dump(_plain(report.manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(paths[2], "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def load_report(out_dir) -> ConvergenceReport:
    with open(Path(out_dir) / "report.json") as fh:
        return ConvergenceReport.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# plots


def emit_plots(report: ConvergenceReport, out_dir) -> list[Path]:
    """Echo against t (markers per rung, theory line) and gap against hbar (log-log), as SVG."""
    echo_series = [s for s in report.series if s.quantity == "echo"]
    if not echo_series:
        warnings.warn("report has no echo series; no plots written", stacklevel=2)
        return []
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ts = [s.label["t"] for s in echo_series]
    hbars = [r[0] for r in echo_series[0].rows]
    written = []
    with matplotlib.rc_context({"svg.hashsalt": "torusecho", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for i, h in enumerate(hbars):
            ax.plot(ts, [s.rows[i][1] for s in echo_series], "o", label=f"hbar={h:.4g}")
        ax.plot(ts, [s.rows[0][2] for s in echo_series], "-k", label="limit")
        ax.set_xlabel("t (units of tau_c)")
        ax.set_ylabel("echo")
        ax.legend(fontsize="small")
        p = out / "echo_vs_t.svg"
        fig.savefig(p, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(p)

        fig, ax = plt.subplots(figsize=(6, 4))
        for s in echo_series:
            ax.loglog([r[0] for r in s.rows], [max(r[3], GAP_FLOOR) for r in s.rows], "o-", label=f"t={s.label['t']:.4g}")
        ax.set_xlabel("hbar")
        ax.set_ylabel("|echo - limit|")
        ax.legend(fontsize="small")
        p = out / "gap_vs_hbar.svg"
        fig.savefig(p, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(p)
    return written

"""Run configurations, experiment orchestration and output files."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import itertools
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from kickedrotor import __version__
from kickedrotor.analysis import (
    break_time,
    default_fit_window,
    distribution_ratio,
    energy_ratio,
    loglog_fit,
)
from kickedrotor.classical import (
    TWO_PI,
    ClassicalEnsemble,
    EnergySeries,
    evolve_ensemble,
    grid_ensemble,
    island_fraction,
    poincare_section,
    sample_wigner_gaussian,
    uniform_theta_ensemble,
)
from kickedrotor.errors import DomainError, KickedRotorError, NumericGuardError, ParameterError
from kickedrotor.model import KickSchedule, parse_schedule
from kickedrotor.quantum import (
    EDGE_TOL,
    MomentumDistribution,
    QuantumState,
    evolve_quantum,
    init_fock,
    init_gaussian,
    momentum_distribution,
)

log = logging.getLogger(__name__)

MODES = ("phase-space", "evolve", "compare", "distribution", "sweep", "fit")
OUT_ENV = "KICKEDROTOR_OUT"


class ConfigError(KickedRotorError, ValueError):
    """Invalid run configuration; the message names the offending key."""


@dataclass
class RunConfig:
    mode: str = "compare"
    kappa: tuple[float, ...] = (3.5,)
    k: tuple[float, ...] = ()
    tau: tuple[float, ...] = (0.1,)
    schedule: tuple[str, ...] = ()
    init: str = "fock:0"
    kicks: int = 2000
    basis: int | None = None
    boundary_mult: int = 1
    ensemble: int = 100_000
    seed: int = 0
    out: str | None = None
    fit_window: tuple[int, int] | None = None
    break_threshold: float = 0.2
    break_sustained: int = 10
    grid: int = 30
    section_kicks: int = 300
    island_resolution: int = 64
    band: tuple[float, float] = (8000.0, 90000.0)
    sweep_mode: str = "compare"
    jobs: int = 1
    input: str | None = None
    plots: bool = True

    def schedules(self) -> tuple[str, ...]:
        if self.schedule:
            return self.schedule
        return ("kr", "mkr") if self.mode in ("phase-space", "distribution") else ("mkr",)

    def resolved(self) -> dict:
        d = dataclasses.asdict(self)
        d["schedule"] = list(self.schedules())
        return d


# --------------------------------------------------------------------------- parsing

def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def _parse_int(text) -> int:
    s = str(text).strip()
    if "^" in s:
        base, exp = s.split("^")
        return int(base) ** int(exp)
    return int(s)


def _parse_window(text) -> tuple[int, int] | None:
    if text is None or str(text).strip().lower() in ("", "auto", "none"):
        return None
    lo, hi = str(text).split(":")
    return int(lo), int(hi)


def _parse_band(text) -> tuple[float, float]:
    lo, hi = str(text).split(":")
    return float(lo), float(hi)


def _parse_bool(text) -> bool:
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_PARSERS = {
    "mode": str,
    "kappa": _parse_floats,
    "k": _parse_floats,
    "tau": _parse_floats,
    "schedule": lambda s: tuple(x.strip().lower() for x in str(s).split(",") if x.strip()),
    "init": lambda s: str(s).strip().lower(),
    "kicks": _parse_int,
    "basis": lambda s: None if str(s).strip().lower() in ("", "auto", "none") else _parse_int(s),
    "boundary_mult": _parse_int,
    "ensemble": _parse_int,
    "seed": _parse_int,
    "out": str,
    "fit_window": _parse_window,
    "break_threshold": float,
    "break_sustained": _parse_int,
    "grid": _parse_int,
    "section_kicks": _parse_int,
    "island_resolution": _parse_int,
    "band": _parse_band,
    "sweep_mode": str,
    "jobs": _parse_int,
    "input": str,
    "plots": _parse_bool,
}


def parse_values(raw: dict[str, str]) -> dict:
    """Coerce raw string values to typed config values; keys may use dashes."""
    out = {}
    for key, value in raw.items():
        name = key.strip().replace("-", "_")
        if name not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            out[name] = _PARSERS[name](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from None
    return out


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key] = value
    return raw


def build_config(file_values: dict[str, str] | None = None, overrides: dict[str, str] | None = None) -> RunConfig:
    values = parse_values(file_values or {})
    values.update(parse_values(overrides or {}))
    cfg = RunConfig(**values)
    validate_config(cfg)
    return cfg


def _kappas(cfg: RunConfig) -> tuple[float, ...]:
    if cfg.k:
        return tuple(k * t for k in cfg.k for t in cfg.tau)
    return cfg.kappa


def parse_init(spec: str) -> tuple[str, float]:
    """``fock:m0``, ``gaussian:s``, ``uniform`` or ``wigner[:s]``."""
    kind, _, arg = spec.partition(":")
    if kind == "fock":
        return kind, float(int(arg or 0))
    if kind in ("gaussian", "wigner"):
        s = float(arg) if arg else 9.0
        if not s > 0:
            raise ValueError("Gaussian width must be positive")
        return kind, s
    if kind == "uniform":
        return kind, 0.0
    raise ValueError(f"unknown initial state {spec!r}")


def validate_config(cfg: RunConfig) -> None:
    def need(cond: bool, key: str, msg: str) -> None:
        if not cond:
            raise ConfigError(f"invalid {key!r}: {msg}")

    need(cfg.mode in MODES, "mode", f"{cfg.mode!r} not in {MODES}")
    need(cfg.sweep_mode in MODES[:4], "sweep_mode", f"{cfg.sweep_mode!r} cannot be swept")
    if cfg.mode == "fit":
        need(cfg.input is not None, "input", "fit mode needs an energy CSV")
        return
    need(all(t > 0 and math.isfinite(t) for t in cfg.tau) and len(cfg.tau) > 0, "tau", "must be positive")
    need(all(k > 0 and math.isfinite(k) for k in cfg.k), "k", "must be positive")
    need(all(k > 0 and math.isfinite(k) for k in cfg.kappa) and len(cfg.kappa) > 0, "kappa", "must be positive")
    if cfg.mode != "sweep":
        need(len(cfg.tau) == 1, "tau", "a list of values is only allowed in sweep mode")
        need(len(cfg.k) <= 1 and (cfg.k or len(cfg.kappa) == 1), "kappa", "a list of values is only allowed in sweep mode")
    for s in cfg.schedules():
        try:
            parse_schedule(s)
        except ParameterError as exc:
            raise ConfigError(f"invalid 'schedule': {exc}") from None
    try:
        kind, width = parse_init(cfg.init)
    except ValueError as exc:
        raise ConfigError(f"invalid 'init': {exc}") from None
    need(cfg.kicks >= 1, "kicks", "must be >= 1")
    need(cfg.basis is None or cfg.basis >= 8, "basis", "half-size must be >= 8")
    need(cfg.boundary_mult >= 1, "boundary_mult", "must be an integer >= 1")
    need(cfg.ensemble >= 1, "ensemble", "must be >= 1")
    need(cfg.break_threshold > 0, "break_threshold", "must be positive")
    need(cfg.break_sustained >= 1, "break_sustained", "must be >= 1")
    need(cfg.grid >= 1 and cfg.section_kicks >= 1, "grid", "grid and section_kicks must be >= 1")
    need(cfg.island_resolution >= 32, "island_resolution", "must be >= 32")
    need(cfg.jobs >= 1, "jobs", "must be >= 1")
    need(cfg.band[1] > cfg.band[0] >= 0, "band", "expected 0 <= LO < HI")
    if cfg.fit_window is not None:
        lo, hi = cfg.fit_window
        need(1 <= lo and hi - lo >= 9 and hi <= cfg.kicks, "fit_window", f"{lo}:{hi} outside 1:{cfg.kicks} or shorter than 10")
    if kind == "fock":
        b = cfg.basis or default_basis_half(cfg.kicks, min(cfg.tau), cfg.boundary_mult)
        need(abs(width) * cfg.boundary_mult < b, "init", "Fock index outside the basis")
    if kind in ("gaussian", "wigner"):
        leak = math.erfc(math.pi * cfg.boundary_mult / math.sqrt(width))
        need(leak <= EDGE_TOL, "boundary_mult", f"Gaussian tail {leak:.2e} leaks past the spatial boundary")


def default_basis_half(n_kicks: int, tau: float, boundary_multiplier: int = 1) -> int:
    """Smallest power of two covering ballistic growth of pi per kick with 50% margin."""
    reach = 1.5 * math.pi * n_kicks / tau * boundary_multiplier
    return 1 << max(8, math.ceil(math.log2(reach + 64 * boundary_multiplier)))


# --------------------------------------------------------------------------- outputs

@dataclass
class Manifest:
    out_dir: str
    mode: str
    outputs: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    reports: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def add(self, path: Path, kind: str) -> None:
        data = path.read_bytes()
        self.outputs.append({
            "path": os.path.relpath(path, self.out_dir),
            "kind": kind,
            "sha256": hashlib.sha256(data).hexdigest(),
            "bytes": len(data),
        })

    def to_dict(self) -> dict:
        return {
            "library_version": __version__,
            "mode": self.mode,
            "status": "ok" if self.ok else "failed",
            "outputs": self.outputs,
            "failures": self.failures,
        }


def _fmt(x: float) -> str:
    return repr(float(x))


def write_energy_csv(path: Path, quantum: EnergySeries | None, classical: EnergySeries | None) -> None:
    cols, series = ["kick_index"], []
    if quantum is not None:
        cols.append("E_q")
        series.append(quantum.values)
    if classical is not None:
        cols.append("E_c")
        series.append(classical.values)
    n = len(series[0])
    with open(path, "w", newline="") as fh:
        fh.write("# scaled rotational energy after each kick; E_q = tau^2 <m^2>/2, E_c = <L~^2>/2 (dimensionless)\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for i in range(n):
            w.writerow([i, *(_fmt(s[i]) for s in series)])


def write_distribution_csv(path: Path, dist: MomentumDistribution) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(
            f"# momentum distribution; m is the grid index, physical momentum m/{dist.boundary_multiplier} hbar; "
            "P_m is the probability (dimensionless)\n"
        )
        fh.write("m,P_m\n")
        fh.writelines(f"{m},{_fmt(p)}\n" for m, p in zip(dist.indices.tolist(), dist.probabilities.tolist()))


def write_section_csv(path: Path, points: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("# stroboscopic section after each kick; theta_mod = theta mod 2pi (rad), L_mod = L~ mod 2pi (dimensionless)\n")
        fh.write("theta_mod,L_mod\n")
        fh.writelines(f"{_fmt(t)},{_fmt(l)}\n" for t, l in points.tolist())


def read_energy_csv(path: str | os.PathLike) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    header, body = rows[0], rows[1:]
    if not header or header[0] != "kick_index":
        raise ConfigError(f"{path}: not an energy CSV (missing kick_index column)")
    data = np.array(body, dtype=float)
    return {name: data[:, i] for i, name in enumerate(header)}


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if dataclasses.is_dataclass(o):
        return dataclasses.asdict(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(type(o))


def emit_outputs(manifest: Manifest) -> Path:
    """Write the manifest itself (after data files) and return its path."""
    path = Path(manifest.out_dir) / "manifest.json"
    write_json(path, manifest.to_dict())
    return path


# --------------------------------------------------------------------------- running

@dataclass
class _Arm:
    schedule: KickSchedule
    tag: str
    quantum: EnergySeries | None = None
    classical: EnergySeries | None = None
    state: QuantumState | None = None


def _initial_quantum(cfg: RunConfig, tau: float) -> QuantumState:
    kind, arg = parse_init(cfg.init)
    b = cfg.basis or default_basis_half(cfg.kicks, tau, cfg.boundary_mult)
    if kind in ("fock", "uniform"):
        return init_fock(int(arg), b, cfg.boundary_mult, tau)
    return init_gaussian(arg, b, cfg.boundary_mult, tau)


def _initial_classical(cfg: RunConfig, tau: float) -> ClassicalEnsemble:
    kind, arg = parse_init(cfg.init)
    if kind in ("fock", "uniform"):
        return uniform_theta_ensemble(cfg.ensemble, l_tilde=tau * arg)
    return sample_wigner_gaussian(math.sqrt(arg / 2), tau, cfg.ensemble, cfg.seed)


def _is_quantum_init(cfg: RunConfig) -> bool:
    return parse_init(cfg.init)[0] in ("fock", "gaussian")


def _fit_report(arm: _Arm, cfg: RunConfig) -> dict:
    rep: dict = {}
    n = cfg.kicks
    tb = None
    if arm.quantum is not None and arm.classical is not None:
        bt = break_time(arm.quantum, arm.classical, cfg.break_threshold, cfg.break_sustained)
        tb = bt.t_b
        rep["break_time"] = dataclasses.asdict(bt)
    if n < 10:
        return rep
    window = cfg.fit_window or default_fit_window(tb, n)
    rep["fit_window"] = list(window)
    for name, s in (("quantum", arm.quantum), ("classical", arm.classical)):
        if s is None:
            continue
        try:
            rep[f"fit_{name}"] = dataclasses.asdict(loglog_fit(s, window))
        except (DomainError, ParameterError) as exc:
            rep[f"fit_{name}"] = {"error": str(exc)}
    rep["final_energy"] = {
        name: float(s.values[-1]) for name, s in (("quantum", arm.quantum), ("classical", arm.classical)) if s is not None
    }
    return rep


def _contrast(arms: dict[str, _Arm], cfg: RunConfig) -> dict:
    if "mkr" not in arms or "kr" not in arms:
        return {}
    a, b = arms["mkr"], arms["kr"]
    rep: dict = {"at_kick": cfg.kicks}
    if a.quantum is not None and b.quantum is not None:
        rep["quantum_energy_ratio"] = energy_ratio(a.quantum, b.quantum, cfg.kicks)
    if a.classical is not None and b.classical is not None:
        rep["classical_energy_ratio"] = energy_ratio(a.classical, b.classical, cfg.kicks)
    if a.state is not None and b.state is not None:
        try:
            r = distribution_ratio(momentum_distribution(a.state), momentum_distribution(b.state), cfg.band)
            rep["distribution_ratio"] = dataclasses.asdict(r) | {"band": list(cfg.band)}
        except DomainError as exc:
            rep["distribution_ratio"] = {"error": str(exc)}
    return rep


def run_experiment(cfg: RunConfig) -> Manifest:
    """Run one configuration, writing data, reports, plots and a manifest.

    Numeric-guard trips are recorded in ``manifest.failures``; the other arms
    and all files written so far remain listed.
    """
    validate_config(cfg)
    out_dir = Path(cfg.out or Path(os.environ.get(OUT_ENV, "runs")) / cfg.mode)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(str(out_dir), cfg.mode)
    meta = out_dir / "metadata.json"
    write_json(meta, {
        "library_version": __version__,
        "numpy_version": np.__version__,
        "config": cfg.resolved(),
    })
    manifest.add(meta, "metadata")
    if cfg.mode == "sweep":
        _run_sweep(cfg, manifest)
    elif cfg.mode == "fit":
        _run_fit(cfg, manifest)
    elif cfg.mode == "phase-space":
        _run_phase_space(cfg, manifest)
    else:
        _run_dynamics(cfg, manifest)
    emit_outputs(manifest)
    return manifest


def _run_phase_space(cfg: RunConfig, manifest: Manifest) -> None:
    out = Path(manifest.out_dir)
    kappa = _kappas(cfg)[0]
    cell = (0.0, TWO_PI, 0.0, TWO_PI)
    grid = grid_ensemble(cell, cfg.grid, cfg.grid)
    sections, report = {}, {}
    for tag in cfg.schedules():
        sched = parse_schedule(tag)
        log.info("section %s kappa=%g", tag, kappa)
        pts = poincare_section(grid, sched, kappa, cfg.section_kicks)
        path = out / f"section_{tag}.csv"
        write_section_csv(path, pts)
        manifest.add(path, "section")
        sections[tag] = pts
        report[tag] = {
            "island_fraction": island_fraction(cell, cfg.island_resolution, sched, kappa),
            "points": int(pts.shape[0]),
        }
    rpath = out / "report.json"
    write_json(rpath, {"kappa": kappa, "arms": report})
    manifest.add(rpath, "report")
    manifest.reports = report
    if cfg.plots:
        from kickedrotor import plots

        _plot(manifest, lambda: plots.section_plot(out / "phase_space.svg", sections, kappa), out / "phase_space.svg")


def _run_dynamics(cfg: RunConfig, manifest: Manifest) -> None:
    out = Path(manifest.out_dir)
    tau = cfg.tau[0]
    kappa = _kappas(cfg)[0]
    k = kappa / tau
    quantum = cfg.mode in ("compare", "distribution") or _is_quantum_init(cfg)
    classical = cfg.mode == "compare" or (cfg.mode == "evolve" and not _is_quantum_init(cfg))
    arms: dict[str, _Arm] = {}
    for tag in cfg.schedules():
        arm = _Arm(parse_schedule(tag), tag)
        arms[tag] = arm
        if classical:
            log.info("classical %s kappa=%g kicks=%d", tag, kappa, cfg.kicks)
            _, arm.classical = evolve_ensemble(_initial_classical(cfg, tau), arm.schedule, kappa, cfg.kicks)
        if quantum:
            log.info("quantum %s k=%g tau=%g kicks=%d", tag, k, tau, cfg.kicks)
            try:
                arm.state, arm.quantum = evolve_quantum(_initial_quantum(cfg, tau), arm.schedule, k, cfg.kicks)
            except NumericGuardError as exc:
                manifest.failures.append({"arm": tag, "stage": "quantum", "error": str(exc)})
                continue
        path = out / f"energy_{tag}.csv"
        write_energy_csv(path, arm.quantum, arm.classical)
        manifest.add(path, "energy")
        if cfg.mode == "distribution" and arm.state is not None:
            dpath = out / f"distribution_{tag}.csv"
            write_distribution_csv(dpath, momentum_distribution(arm.state))
            manifest.add(dpath, "distribution")
    report = {
        "kappa": kappa, "tau": tau, "k": k,
        "arms": {tag: _fit_report(arm, cfg) for tag, arm in arms.items() if arm.quantum or arm.classical},
    }
    contrast = _contrast({t: a for t, a in arms.items() if a.quantum or a.classical}, cfg)
    if contrast:
        report["contrast"] = contrast
    rpath = out / "report.json"
    write_json(rpath, report)
    manifest.add(rpath, "report")
    manifest.reports = report
    if cfg.plots:
        from kickedrotor import plots

        done = {t: a for t, a in arms.items() if a.quantum is not None or a.classical is not None}
        epath = out / "energy.svg"
        _plot(manifest, lambda: plots.energy_plot(epath, {t: (a.quantum, a.classical) for t, a in done.items()}), epath)
        if cfg.mode == "distribution":
            dists = {t: momentum_distribution(a.state) for t, a in done.items() if a.state is not None}
            dpath = out / "distribution.svg"
            _plot(manifest, lambda: plots.distribution_plot(dpath, dists), dpath)


def _plot(manifest: Manifest, fn, path: Path) -> None:
    # Plotting is best-effort and must never block data emission.
    try:
        fn()
        manifest.add(path, "plot")
    except Exception as exc:  # noqa: BLE001
        log.warning("plot %s failed: %s", path.name, exc)


def _run_fit(cfg: RunConfig, manifest: Manifest) -> None:
    out = Path(manifest.out_dir)
    cols = read_energy_csv(cfg.input)
    q = EnergySeries(cols["E_q"], "quantum") if "E_q" in cols else None
    c = EnergySeries(cols["E_c"], "classical") if "E_c" in cols else None
    if q is None and c is None:
        raise ConfigError(f"invalid 'input': {cfg.input} has neither E_q nor E_c")
    n = len(q if q is not None else c) - 1
    fit_cfg = dataclasses.replace(cfg, kicks=n)
    report = _fit_report(_Arm(parse_schedule("kr"), "input", q, c), fit_cfg)
    report["input"] = str(cfg.input)
    rpath = out / "fit_report.json"
    write_json(rpath, report)
    manifest.add(rpath, "report")
    manifest.reports = report


def _sweep_point(args: tuple[RunConfig, str]) -> dict:
    cfg, sub = args
    m = run_experiment(cfg)
    return {"dir": sub, "manifest": m.to_dict(), "reports": m.reports}


def _run_sweep(cfg: RunConfig, manifest: Manifest) -> None:
    out = Path(manifest.out_dir)
    kappas = tuple(cfg.k) if cfg.k else cfg.kappa
    points = []
    for x, tau, sched in itertools.product(kappas, cfg.tau, cfg.schedules()):
        kappa = x * tau if cfg.k else x
        sub = f"kappa={kappa:.6g}_tau={tau:.6g}_{sched}"
        child = dataclasses.replace(
            cfg, mode=cfg.sweep_mode, kappa=(kappa,), k=(), tau=(tau,), schedule=(sched,), out=str(out / sub)
        )
        points.append((child, sub))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_sweep_point, points))
    else:
        results = [_sweep_point(p) for p in points]
    for r in results:
        for item in r["manifest"]["outputs"]:
            manifest.outputs.append(item | {"path": str(Path(r["dir"]) / item["path"])})
        manifest.failures.extend(f | {"point": r["dir"]} for f in r["manifest"]["failures"])
    summary = {r["dir"]: r["reports"] for r in results}
    spath = out / "sweep_summary.json"
    write_json(spath, summary)
    manifest.add(spath, "report")
    manifest.reports = summary

# cli.py
# Config-driven runner for revival scenarios.
# Flow: config -> model/lattice/packet -> time scales -> triple -> A(t) series
#       -> revival points (coefficients, classification) -> features -> files.
# Extras: embedded presets, config auto-resolve, optional CSV run log, summary table.

from __future__ import annotations
import argparse, csv, json, math, os, re, sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import find_peaks

from commensurability import (DEFAULT_MAX_DEN, DEFAULT_QMAX, DEFAULT_TOL, CommensurateTriple,
                              classical_beat, enumerate_fractimes, full_revival, revival_triple)
from models import (Box2D, DomainError, EnergyModel, Lattice, ModelFamily, NumericError, Polynomial,
                    StarkHydrogen, TimeScales, derivatives, exact_trev_ratio, stark_lattice,
                    taylor_residual, timescales, validate_point, validate_window)
from packet import (MODES, AutocorrelationSeries, PacketSpec, ParameterError, build_coefficients,
                    phase_provider, sample_series)
from revival import (TIME_NAMES, TuneTarget, cross_term_catalog, point_from_spec, point_report,
                     revival_point, tune_parameter, verify_point)

# --- Project layout awareness (this file lives under <root>/wavepacket) ---
BASE_DIR = Path(__file__).resolve().parent
ROOT_DIR = BASE_DIR.parent
PRESET_DIR = BASE_DIR / "presets"

SCHEMA = 1
PEAK_THRESHOLD = 0.1
DEFAULT_SAMPLES = 4096

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN = 0, 2, 3

# ---------- logging fields ----------
LOG_FIELDS = ["ts_utc", "run_id", "scenario", "command", "mode", "event", "status", "detail"]


class ConfigError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


class ProbeRangeError(ValueError):
    pass


# ---------- small utils ----------
def ensure_log(path: str):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    if not os.path.exists(path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            csv.DictWriter(f, fieldnames=LOG_FIELDS).writeheader()


def write_log(path: Optional[str], row: Dict[str, Any]):
    if not path:
        return
    ensure_log(path)
    row = {**row}
    if isinstance(row.get("detail"), (dict, list)):
        row["detail"] = json.dumps(row["detail"], separators=(",", ":"))
    with open(path, "a", newline="", encoding="utf-8") as f:
        csv.DictWriter(f, fieldnames=LOG_FIELDS).writerow({k: row.get(k, "") for k in LOG_FIELDS})


def now_utc_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def run_id_utc() -> str:
    return datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")


def g15(obj: Any) -> Any:
    """Round every float in a JSON-ready structure to 15 significant digits."""
    if isinstance(obj, float):
        return float(f"{obj:.15g}") if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: g15(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [g15(v) for v in obj]
    return obj


def write_json(path: Path, obj: Any) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(g15(obj), f, indent=2)
        f.write("\n")
    return str(path)


def fmt(row: Sequence[Any], widths: Sequence[int]) -> str:
    return " | ".join(str(s)[:w].ljust(w) for s, w in zip(row, widths))


# ---------- path helpers ----------
def resolve_config_path(arg_value: str) -> str:
    """
    Resolve --config against, in order:
      1) absolute path if provided
      2) current working directory
      3) module directory (wavepacket)
      4) project root
    """
    p = Path(arg_value)
    if p.is_absolute() and p.exists():
        return str(p)
    for base in (Path.cwd(), BASE_DIR, ROOT_DIR):
        cand = (base / arg_value).resolve()
        if cand.exists():
            return str(cand)
    return str(p)


def preset_path(name: str) -> Path:
    p = PRESET_DIR / f"{name}.json"
    if not p.exists():
        known = sorted(x.stem for x in PRESET_DIR.glob("*.json"))
        raise ConfigError(f"unknown preset {name!r} (known: {', '.join(known)})")
    return p


def _line_of(text: str, key: str) -> Optional[int]:
    for i, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return i
    return None


# ---------- time expressions ----------
_EXPR = re.compile(r"^\s*(?:(?P<frac>[-+]?\d+(?:/\d+)?)\s*\*\s*)?(?P<name>[A-Za-z0-9]+)\s*$")


def parse_time_expr(expr: Any) -> Tuple[Fraction, Optional[str]]:
    """Number -> (value, None); "[fraction*]name" -> (fraction, name)."""
    if isinstance(expr, bool):
        raise ValueError(f"time value must be a number or expression, got {expr!r}")
    if isinstance(expr, (int, float)):
        if not math.isfinite(expr):
            raise ValueError(f"time value must be finite, got {expr!r}")
        return Fraction(expr), None
    m = _EXPR.match(str(expr))
    if not m or m.group("name") not in TIME_NAMES + ("trev",):
        raise ValueError(f"bad time expression {expr!r} (expected [fraction*]name with name in "
                         f"{', '.join(TIME_NAMES + ('trev',))})")
    try:
        return Fraction(m.group("frac") or 1), m.group("name")
    except ZeroDivisionError:
        raise ValueError(f"bad time expression {expr!r} (zero denominator)")


def eval_time_expr(expr: Any, ts: TimeScales, triple: Optional[CommensurateTriple]) -> float:
    mult, name = parse_time_expr(expr)
    if name is None:
        return float(mult)
    if name == "trev":
        if triple is None:
            raise DomainError(f"{expr!r}: time scales are incommensurate, no full revival")
        return float(mult * full_revival(triple)) * triple.base_time
    base = ts.get(name)
    if base is None:
        raise DomainError(f"{expr!r}: time scale {name} is absent for this model")
    if triple is not None and name in ("trev1", "trev2", "trev12"):
        # stay on the exact rational grid so probe times coincide with revival points
        return float(mult * abs(triple.factor(name))) * triple.base_time
    return float(mult) * abs(base)


# ---------- config ----------
@dataclass
class ScenarioConfig:
    name: str
    model: EnergyModel
    lattice: Lattice
    packet: PacketSpec
    mode: str = "exact"
    t_start: Any = 0.0
    t_end: Any = 1.0
    n_samples: int = DEFAULT_SAMPLES
    qmax: int = DEFAULT_QMAX
    max_den: int = DEFAULT_MAX_DEN
    tol: float = DEFAULT_TOL
    tmax: Any = None
    probes: List[Any] = field(default_factory=list)
    peak_threshold: float = PEAK_THRESHOLD
    workers: int = 1
    out_dir: str = "out"
    log_path: Optional[str] = None
    tune: Dict[str, Any] = field(default_factory=dict)
    source: Optional[str] = None


def _mode(value: Any) -> str:
    m = str(value).strip().lower().replace("-", "_")
    if m not in MODES:
        raise ValueError(f"unknown evolution mode {value!r} (expected exact or second-order)")
    return m


def _build_model(m: Dict[str, Any]) -> EnergyModel:
    variant = str(m.get("variant", "")).lower()
    if variant == "box2d":
        if "L1_sq" in m or "L2_sq" in m:
            return Box2D.from_squares(Fraction(str(m.get("L1_sq", 1))), Fraction(str(m.get("L2_sq", 1))))
        return Box2D(L1=float(m["L1"]), L2=float(m["L2"]))
    if variant == "stark":
        return StarkHydrogen(F=float(m["F"]))
    if variant == "polynomial":
        coeffs = {(int(p1), int(p2)): float(c) for p1, p2, c in m.get("coeffs") or []}
        return Polynomial(coeffs=coeffs)
    raise ValueError(f"unknown model variant {m.get('variant')!r} (expected box2d, stark, polynomial)")


def _build_lattice(lt: Dict[str, Any], stark: bool) -> Lattice:
    if stark:
        return stark_lattice(int(lt["nbar1"]), int(lt["nbar2"]),
                             int(lt.get("halfwidth1", 12)), int(lt.get("halfwidth2", 12)),
                             single_parity=bool(lt.get("single_parity", True)))
    return Lattice(nbar1=int(lt["nbar1"]), nbar2=int(lt["nbar2"]),
                   step1=int(lt.get("step1", 1)), step2=int(lt.get("step2", 1)),
                   halfwidth1=int(lt.get("halfwidth1", 12)), halfwidth2=int(lt.get("halfwidth2", 12)))


def config_from_dict(cfg: Dict[str, Any], text: str = "", name: str = "scenario",
                     source: Optional[str] = None) -> ScenarioConfig:
    """Validate every section; errors carry the line of the offending section when known."""
    def fail(section: str, e: Exception) -> ConfigError:
        return ConfigError(f"{section}: {e}", _line_of(text, section))

    if cfg.get("schema", SCHEMA) != SCHEMA:
        raise ConfigError(f"unsupported schema {cfg.get('schema')!r} (expected {SCHEMA})", _line_of(text, "schema"))
    try:
        model = _build_model(cfg.get("model") or {})
    except (KeyError, TypeError, ValueError, ZeroDivisionError, OverflowError) as e:
        raise fail("model", e)
    try:
        lattice = _build_lattice(cfg.get("lattice") or {}, isinstance(model, StarkHydrogen))
    except (KeyError, TypeError, ValueError, OverflowError) as e:
        raise fail("lattice", e)
    try:
        pk = cfg.get("packet") or {}
        packet = PacketSpec(lattice=lattice, sigma1=float(pk.get("sigma1", 2.5)), sigma2=float(pk.get("sigma2", 2.5)))
    except (TypeError, ValueError, OverflowError) as e:
        raise fail("packet", e)
    try:
        mode = _mode((cfg.get("evolution") or {}).get("mode", "exact"))
    except ValueError as e:
        raise fail("evolution", e)

    tg = cfg.get("time_grid") or {}
    try:
        t_start, t_end = tg.get("t_start", 0.0), tg.get("t_end", 1.0)
        parse_time_expr(t_start); parse_time_expr(t_end)
        n_samples = int(tg.get("n_samples", DEFAULT_SAMPLES))
        if n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {n_samples}")
        ps, pe = parse_time_expr(t_start), parse_time_expr(t_end)
        if ps[1] is None and pe[1] is None and not pe[0] > ps[0]:
            raise ValueError(f"t_end ({float(pe[0])}) must exceed t_start ({float(ps[0])})")
    except (TypeError, ValueError, OverflowError) as e:
        raise fail("time_grid", e)

    an = cfg.get("analysis") or {}
    try:
        qmax = int(an.get("qmax", DEFAULT_QMAX))
        max_den = int(an.get("max_den", DEFAULT_MAX_DEN))
        tol = float(an.get("tol", DEFAULT_TOL))
        if qmax < 1 or max_den < 1 or not tol > 0:
            raise ValueError(f"need qmax >= 1, max_den >= 1, tol > 0 (got {qmax}, {max_den}, {tol})")
        tmax = an.get("tmax")
        if tmax is not None:
            parse_time_expr(tmax)
        probes = list(an.get("probes") or [])
        for p in probes:
            parse_time_expr(p)
        threshold = float(an.get("peak_threshold", PEAK_THRESHOLD))
        workers = int(an.get("workers", 1))
    except (TypeError, ValueError, OverflowError) as e:
        raise fail("analysis", e)

    out = cfg.get("output") or {}
    return ScenarioConfig(name=str(cfg.get("name") or name), model=model, lattice=lattice, packet=packet,
                          mode=mode, t_start=t_start, t_end=t_end, n_samples=n_samples, qmax=qmax,
                          max_den=max_den, tol=tol, tmax=tmax, probes=probes, peak_threshold=threshold,
                          workers=max(1, workers), out_dir=str(out.get("dir", "out")),
                          log_path=out.get("log_path"), tune=dict(cfg.get("tune") or {}), source=source)


def load_config(path: str) -> ScenarioConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    text = p.read_text(encoding="utf-8")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg} (column {e.colno})", e.lineno)
    if not isinstance(cfg, dict):
        raise ConfigError("top level must be a JSON object", 1)
    return config_from_dict(cfg, text, name=p.stem, source=str(p))


# ---------- scenario pieces ----------
@dataclass
class Scenario:
    cfg: ScenarioConfig
    derivs: Any
    ts: TimeScales
    triple: Optional[CommensurateTriple]


def prepare(cfg: ScenarioConfig) -> Scenario:
    for w in validate_point(cfg.model, cfg.lattice.nbar1, cfg.lattice.nbar2) + validate_window(cfg.model, cfg.lattice):
        print(f"[WARN] {w}")
    ds = derivatives(cfg.model, cfg.lattice)
    ts = timescales(ds, cfg.lattice)
    triple = revival_triple(ts, cfg.max_den, cfg.tol, exact_trev_ratio(cfg.model, cfg.lattice))
    return Scenario(cfg=cfg, derivs=ds, ts=ts, triple=triple)


def time_grid(sc: Scenario) -> Tuple[np.ndarray, List[Tuple[Any, float]]]:
    """Uniform grid with the probe times merged in (sorted, unique)."""
    cfg = sc.cfg
    t0 = eval_time_expr(cfg.t_start, sc.ts, sc.triple)
    t1 = eval_time_expr(cfg.t_end, sc.ts, sc.triple)
    if not t1 > t0:
        raise ConfigError(f"time_grid: t_end ({t1}) must exceed t_start ({t0})")
    probes = [(p, eval_time_expr(p, sc.ts, sc.triple)) for p in cfg.probes]
    extra = [t for _, t in probes if t0 <= t <= t1]
    return np.union1d(np.linspace(t0, t1, cfg.n_samples), np.asarray(extra, dtype=float)), probes


def compute_series(sc: Scenario, times: np.ndarray) -> AutocorrelationSeries:
    grid = build_coefficients(sc.cfg.packet)
    phases = phase_provider(grid, sc.cfg.model, sc.derivs, sc.ts, sc.cfg.lattice, sc.cfg.mode)
    return sample_series(grid, phases, times, workers=sc.cfg.workers)


def probe(series: AutocorrelationSeries, t: float) -> float:
    """|A(t)|^2 by linear interpolation; exact at stored sample times."""
    lo, hi = float(series.times[0]), float(series.times[-1])
    if not lo <= t <= hi:
        raise ProbeRangeError(f"probe time {t!r} outside sampled grid [{lo}, {hi}]")
    return float(np.interp(t, series.times, series.abs2))


def features(series: AutocorrelationSeries, probes: List[Tuple[Any, float]],
             threshold: float = PEAK_THRESHOLD) -> Dict[str, Any]:
    a = np.asarray(series.abs2)
    idx, _ = find_peaks(a, height=threshold)
    idx = list(idx)
    # boundary maxima (t = 0 sits on a full peak)
    if len(a) > 1 and a[0] >= threshold and a[0] > a[1]:
        idx.insert(0, 0)
    if len(a) > 1 and a[-1] >= threshold and a[-1] > a[-2]:
        idx.append(len(a) - 1)
    peaks = [{"t": float(series.times[i]), "abs2": float(a[i])} for i in idx]
    plateaus = [{"expr": str(expr), "t": t, "abs2": probe(series, t)} for expr, t in probes]
    return {"threshold": threshold, "peaks": peaks, "plateaus": plateaus}


def revival_points(sc: Scenario, tmax: Optional[float] = None):
    if sc.triple is None:
        return []
    if tmax is None and sc.cfg.tmax is not None:
        tmax = eval_time_expr(sc.cfg.tmax, sc.ts, sc.triple)
    return [revival_point(f) for f in enumerate_fractimes(sc.triple, sc.ts, sc.cfg.qmax, tmax)]


def revival_report(sc: Scenario, points) -> Dict[str, Any]:
    beat = classical_beat(sc.ts.Tcl1, sc.ts.Tcl2, sc.cfg.max_den, sc.cfg.tol)
    return {
        "scenario": sc.cfg.name,
        "mode": sc.cfg.mode,
        "timescales": sc.ts.as_dict(),
        "derivatives": sc.derivs.as_dict(),
        "taylor_residual": taylor_residual(sc.cfg.model, sc.cfg.lattice, sc.derivs),
        "classical_beat": None if beat is None else {"a": beat.a, "b": beat.b, "Tcl": beat.Tcl},
        "triple": None if sc.triple is None else sc.triple.as_dict(),
        "full_revival": None if sc.triple is None else float(full_revival(sc.triple)) * sc.triple.base_time,
        "points": [point_report(p, sc.ts) for p in points],
    }


def print_summary(report: Dict[str, Any]):
    headers = ["t", "x", "t/trev1", "t/trev2", "t/trev12", "l1", "l2", "waves", "sep"]
    widths = [12, 8, 8, 8, 8, 3, 3, 5, 5]
    print("\n" + "-" * 80)
    print(f"Revival points: {report['scenario']}")
    print("-" * 80)
    print(fmt(headers, widths))
    print("-" * 80)
    for p in report["points"]:
        fr = p["fractions"]
        print(fmt([f"{p['t']:.6g}", p["x"], fr["p1/q1"] or "-", fr["p2/q2"] or "-", fr["p12/q12"] or "-",
                   p["l1"], p["l2"], p["n_waves"], "yes" if p["separable"] else "no"], widths))
    print("-" * 80)
    print(f"Total points: {len(report['points'])}")


def run_scenario(cfg: ScenarioConfig, log_path: Optional[str] = None, command: str = "run") -> Dict[str, str]:
    """series.csv, revivals.json, features.json under cfg.out_dir."""
    rid = run_id_utc()
    base_row = {"run_id": rid, "scenario": cfg.name, "command": command, "mode": cfg.mode}
    log = lambda event, status="ok", detail="": write_log(log_path, {**base_row, "ts_utc": now_utc_iso(),
                                                                      "event": event, "status": status,
                                                                      "detail": detail})
    log("START", detail={"source": cfg.source, "out": cfg.out_dir})
    sc = prepare(cfg)
    log("TIMESCALES", detail=sc.ts.as_dict())
    times, probes = time_grid(sc)
    series = compute_series(sc, times)
    out = Path(cfg.out_dir)
    paths = {"series": series.to_csv(out / "series.csv")}
    log("SERIES", detail={"samples": len(times)})
    points = revival_points(sc)
    report = revival_report(sc, points)
    paths["revivals"] = write_json(out / "revivals.json", report)
    log("REVIVALS", detail={"points": len(points)})
    paths["features"] = write_json(out / "features.json", features(series, probes, cfg.peak_threshold))
    log("FEATURES")
    log("DONE", detail=paths)
    return paths


# ---------- subcommands ----------
def cmd_timescales(cfg: ScenarioConfig, args) -> int:
    sc = prepare(cfg)
    print(f"Scenario: {cfg.name} | model={type(cfg.model).__name__} | lattice=({cfg.lattice.nbar1}, {cfg.lattice.nbar2})")
    for name, v in sc.ts.as_dict().items():
        print(f"  {name:<7} {'absent' if v is None else f'{v:.10g}'}")
    beat = classical_beat(sc.ts.Tcl1, sc.ts.Tcl2, cfg.max_den, cfg.tol)
    if beat is not None:
        print(f"  Tcl1/Tcl2 = {beat.a}/{beat.b}, beat period Tcl = {beat.Tcl:.10g}")
    if sc.triple is None:
        print("[WARN] revival times are incommensurate at this resolution")
        return EXIT_OK
    for a, b in (("trev1", "trev2"), ("trev1", "trev12"), ("trev2", "trev12")):
        r = sc.triple.ratio(a, b)
        if r is not None:
            print(f"  ratio {a}/{b} = {r}")
    print(f"  full revival trev = {float(full_revival(sc.triple)) * sc.triple.base_time:.10g}")
    return EXIT_OK


def cmd_autocorr(cfg: ScenarioConfig, args) -> int:
    sc = prepare(cfg)
    times, probes = time_grid(sc)
    series = compute_series(sc, times)
    path = series.to_csv(Path(cfg.out_dir) / "series.csv")
    print(f"[INFO] series: {len(times)} samples -> {path}")
    for expr, t in probes:
        print(f"  |A({expr} = {t:.10g})|^2 = {probe(series, t):.12g}")
    return EXIT_OK


def cmd_revivals(cfg: ScenarioConfig, args) -> int:
    sc = prepare(cfg)
    report = revival_report(sc, revival_points(sc))
    path = write_json(Path(cfg.out_dir) / "revivals.json", report)
    print_summary(report)
    print(f"[INFO] report -> {path}")
    return EXIT_OK


def cmd_verify(cfg: ScenarioConfig, args) -> int:
    sc = prepare(cfg)
    points = revival_points(sc) + [point_from_spec(s) for s in cross_term_catalog()]
    results = [verify_point(p) for p in points]
    worst = max((r.meta.get("residual", 0.0) for r in results), default=0.0)
    failed = [r for r in results if not r.ok]
    for r in failed:
        print(f"[ERROR] {r.reason} {r.meta}")
    if failed:
        print(f"[ERROR] DOMAIN: {len(failed)} of {len(results)} points fail, max residual {worst:.3e}")
        return EXIT_DOMAIN
    print(f"[INFO] {len(results)} points, max residual {worst:.3e} <= 1e-12, all points pass")
    return EXIT_OK


def parse_target(text: str) -> TuneTarget:
    """'trev1/trev2=3/4' (ratio) or 'trev12=0.5' (absolute)."""
    try:
        lhs, rhs = text.split("=", 1)
        num, _, den = lhs.strip().partition("/")
        return TuneTarget(numerator=num.strip(), denominator=den.strip() or None, value=float(Fraction(rhs.strip())))
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"tune target {text!r}: {e}")


def cmd_tune(cfg: ScenarioConfig, args) -> int:
    param = args.param or cfg.tune.get("param")
    rng = args.range or cfg.tune.get("range")
    target_text = args.target or cfg.tune.get("target")
    if not (param and rng and target_text):
        raise ConfigError("tune needs --param, --range LO HI and --target (or a 'tune' config section)",
                          None)
    target = parse_target(str(target_text))
    family = ModelFamily(cfg.model, param)
    grid_points = int(args.grid_points or cfg.tune.get("grid_points", 201))
    results = tune_parameter(family, cfg.lattice, (float(rng[0]), float(rng[1])), target,
                             grid_points=grid_points, tol=cfg.tol, max_den=cfg.max_den, qmax=cfg.qmax)
    if not results:
        print(f"[WARN] target {target_text} not reached for {param} in [{rng[0]}, {rng[1]}]")
        return EXIT_OK
    for r in results:
        tri = "incommensurate" if r.triple is None else json.dumps(r.triple.as_dict(), separators=(",", ":"))
        print(f"  {param} = {r.param:.12g} | residual {r.residual:.2e} | spectrum {r.spectrum} | {tri}")
    return EXIT_OK


def cmd_run(cfg: ScenarioConfig, args) -> int:
    paths = run_scenario(cfg, log_path=cfg.log_path, command="run")
    for k, v in paths.items():
        print(f"[INFO] {k}: {v}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "timescales": cmd_timescales, "autocorr": cmd_autocorr,
            "revivals": cmd_revivals, "verify": cmd_verify, "tune": cmd_tune}


# ---------- main ----------
class ArgParser(argparse.ArgumentParser):
    """Usage errors as a single [ERROR] CONFIG line, exit 2."""

    def error(self, message: str):
        print(f"[ERROR] CONFIG: {self.prog}: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--config", help="Scenario JSON (absolute, cwd, wavepacket/ or project root)")
    src.add_argument("--preset", help="Embedded scenario: figure1, figure2")
    common.add_argument("--out", help="Output directory (overrides output.dir)")
    common.add_argument("--mode", choices=["exact", "second-order", "second_order", "first-order", "first_order"],
                        help="Phase evolution (overrides evolution.mode)")
    common.add_argument("--qmax", type=int, help="Largest fraction denominator in the revival scan")
    common.add_argument("--samples", type=int, help="Uniform time samples (overrides time_grid.n_samples)")
    common.add_argument("--log", help="Append a CSV run log here")

    ap = ArgParser(prog="wavepacket", description="Wave-packet revival scenarios (autocorrelation, fractional revivals, tuning).")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="series.csv + revivals.json + features.json")
    sub.add_parser("timescales", parents=[common], help="Print time scales and their ratios")
    sub.add_parser("autocorr", parents=[common], help="Write series.csv and print probe values")
    sub.add_parser("revivals", parents=[common], help="Write revivals.json and print the point table")
    sub.add_parser("verify", parents=[common], help="Self-check every revival point plus the cross-term catalog")
    tp = sub.add_parser("tune", parents=[common], help="Find parameter values hitting a time-scale target")
    tp.add_argument("--param", help="L1, L2 (box) or F (Stark)")
    tp.add_argument("--range", nargs=2, type=float, metavar=("LO", "HI"))
    tp.add_argument("--target", help="e.g. trev1/trev2=3/4 or trev12=0.5")
    tp.add_argument("--grid-points", type=int)
    return ap


def apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    if args.out:
        cfg.out_dir = args.out
    if args.mode:
        cfg.mode = _mode(args.mode)
    if args.qmax is not None:
        if args.qmax < 1:
            raise ConfigError(f"--qmax must be >= 1, got {args.qmax}")
        cfg.qmax = args.qmax
    if args.samples is not None:
        if args.samples < 2:
            raise ConfigError(f"--samples must be >= 2, got {args.samples}")
        cfg.n_samples = args.samples
    if args.log:
        cfg.log_path = args.log
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    log_path = args.log
    try:
        if args.preset:
            cfg = load_config(str(preset_path(args.preset)))
        else:
            cfg_path = resolve_config_path(args.config or "scenario_config.json")
            cfg = load_config(cfg_path)
        cfg = apply_overrides(cfg, args)
        log_path = cfg.log_path
        return COMMANDS[args.command](cfg, args)
    except (ProbeRangeError, DomainError, NumericError, ArithmeticError) as e:
        print(f"[ERROR] DOMAIN: {e}", file=sys.stderr)
        write_log(log_path, {"ts_utc": now_utc_iso(), "run_id": run_id_utc(), "command": args.command,
                             "event": "ERROR", "status": "domain", "detail": str(e)})
        return EXIT_DOMAIN
    except (ConfigError, ParameterError, ValueError) as e:
        print(f"[ERROR] CONFIG: {e}", file=sys.stderr)
        write_log(log_path, {"ts_utc": now_utc_iso(), "run_id": run_id_utc(), "command": args.command,
                             "event": "ERROR", "status": "config", "detail": str(e)})
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

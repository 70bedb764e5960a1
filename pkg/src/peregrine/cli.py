"""Command-line front end.

Every run writes CSV rows ``epsilon,metric,value`` and a JSON summary with
``"schema": 1``; the exit code is 0 exactly when every pass flag is true.
Settings come from defaults, then an optional flat ``key=value`` file
(``--config``), then command-line flags.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import PeregrineError, UsageError
from .wavepacket import EPS_MAX

COMMANDS = ("order-study", "packet-snapshot", "nls-evolve", "init-data", "self-test")
SCHEMA = 1


@dataclass
class RunConfig:
    command: str
    epsilon_list: list = field(default_factory=list)
    k: float = 1.0
    s: float = 4.0
    envelope: str = "peregrine"
    points_per_period: int = 32
    half_width_X: float = 10.0
    out: str | None = None
    json: str | None = None
    plot_dir: str | None = None
    fields: str | None = None
    # nls-evolve
    normalization: str = "standard"
    t_start: float = -1.0
    t_end: float = 0.0
    steps: int = 2000
    long_horizon: bool = False
    # overrides
    tol: float = 1e-12
    compat_tol: float = 1e-6
    max_iter: int = 200
    threads: int | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}", "command")
        for key in ("tol", "compat_tol"):
            if not getattr(self, key) > 0:
                raise UsageError(f"{key} must be positive", key)
        if not self.k > 0:
            raise UsageError("k must be positive", "k")
        if self.s < 0:
            raise UsageError("s must be nonnegative", "s")
        if self.points_per_period < 4 or self.points_per_period % 2:
            raise UsageError("points_per_period must be an even integer >= 4",
                             "points_per_period")
        if self.steps < 1 or self.max_iter < 1:
            raise UsageError("steps and max_iter must be positive",
                             "steps" if self.steps < 1 else "max_iter")
        eps = self.epsilon_list
        if any(not 0 < e <= EPS_MAX for e in eps):
            raise UsageError(f"epsilon values must lie in (0, {EPS_MAX}]", "eps")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise UsageError("epsilon list must be strictly decreasing", "eps")
        if self.command == "order-study" and len(eps) < 3:
            raise UsageError("order-study needs at least three epsilon values (--eps)", "eps")
        if self.command == "init-data" and not eps:
            raise UsageError("init-data needs --eps", "eps")
        if self.command == "packet-snapshot" and len(eps) != 1:
            raise UsageError("packet-snapshot takes a single epsilon (--eps)", "eps")
        if self.normalization not in ("standard", "scaled"):
            raise UsageError("normalization must be 'standard' or 'scaled'", "normalization")


# -- parsing -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _eps_list(text: str) -> list:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse epsilon list {text!r}", "eps") from None


def _bool(text) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


# config key -> (RunConfig field, converter)
KEYS = {
    "eps": ("epsilon_list", _eps_list),
    "k": ("k", float),
    "s": ("s", float),
    "envelope": ("envelope", str),
    "points_per_period": ("points_per_period", int),
    "half_width_X": ("half_width_X", float),
    "out": ("out", str),
    "json": ("json", str),
    "plot_dir": ("plot_dir", str),
    "fields": ("fields", str),
    "normalization": ("normalization", str),
    "t_start": ("t_start", float),
    "t_end": ("t_end", float),
    "steps": ("steps", int),
    "long_horizon": ("long_horizon", _bool),
    "tol": ("tol", float),
    "compat_tol": ("compat_tol", float),
    "max_iter": ("max_iter", int),
    "threads": ("threads", int),
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="peregrine", description=__doc__.splitlines()[0],
                 formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="flat key=value file; flags override its values")
    d = RunConfig("self-test")
    S = argparse.SUPPRESS
    ap.add_argument("--eps", default=S, help="comma-separated decreasing epsilons")
    ap.add_argument("--k", default=S, help=f"carrier wavenumber (default {d.k})")
    ap.add_argument("--s", default=S, help=f"Sobolev index (default {d.s})")
    ap.add_argument("--envelope", default=S, choices=("background", "bump", "peregrine"),
                    help="packet envelope (default peregrine; init-data defaults to bump)")
    ap.add_argument("--points-per-period", dest="points_per_period", default=S,
                    help=f"grid nodes per carrier period (default {d.points_per_period})")
    ap.add_argument("--half-width-X", dest="half_width_X", default=S,
                    help=f"box half width in the slow variable (default {d.half_width_X})")
    ap.add_argument("--out", default=S, help="CSV output path (default stdout)")
    ap.add_argument("--json", default=S, help="JSON summary path (default: CSV path with .json)")
    ap.add_argument("--plot-dir", dest="plot_dir", default=S,
                    help="write PNG figures here (needs matplotlib)")
    ap.add_argument("--fields", default=S, help="packet-snapshot / nls-evolve: per-node CSV of the final field")
    ap.add_argument("--normalization", default=S, choices=("standard", "scaled"),
                    help="nls-evolve: NLS normalization (default standard)")
    ap.add_argument("--t-start", dest="t_start", default=S, help=f"(default {d.t_start})")
    ap.add_argument("--t-end", dest="t_end", default=S, help=f"(default {d.t_end})")
    ap.add_argument("--steps", default=S, help=f"(default {d.steps})")
    ap.add_argument("--long-horizon", dest="long_horizon", action="store_const", const="true",
                    default=S, help="allow NLS evolution beyond |T| <= 2")
    ap.add_argument("--tol", default=S, help=f"fixed-point tolerance (default {d.tol})")
    ap.add_argument("--compat-tol", dest="compat_tol", default=S,
                    help=f"(I-1)/(I-2) tolerance (default {d.compat_tol})")
    ap.add_argument("--max-iter", dest="max_iter", default=S,
                    help=f"iteration cap (default {d.max_iter})")
    ap.add_argument("--threads", default=S, help="worker cap (also PEREGRINE_THREADS)")
    return ap


def read_config_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return _read_lines(fh, str(path))


def parse_config(argv=None, config_text: str | None = None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    path = ns.pop("config", None)
    raw = {}
    if config_text is not None:
        raw.update(_read_lines(io.StringIO(config_text)))
    if path:
        raw.update(read_config_file(path))
    raw.update(ns)
    kwargs = {}
    for key, value in raw.items():
        name, conv = KEYS[key]
        try:
            kwargs[name] = conv(value) if not isinstance(value, list) else value
        except (TypeError, ValueError):
            raise UsageError(f"bad value {value!r} for {key}", key) from None
    if command == "init-data" and "envelope" not in kwargs:
        kwargs["envelope"] = "bump"
    return RunConfig(command, **kwargs)


def _read_lines(fh, where: str = "config") -> dict:
    out = {}
    for n, line in enumerate(fh, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{where}:{n}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise UsageError(f"unknown configuration key {key!r}", key)
        out[key] = value
    return out


# -- output ------------------------------------------------------------------

def _num(v) -> str:
    return "" if v is None else repr(float(v))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_outputs(cfg: RunConfig, rows: list, summary: dict, stdout=None) -> None:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon", "metric", "value"])
    for eps, metric, value in rows:
        w.writerow([_num(eps), metric, _num(value)])
    doc = {"schema": SCHEMA, "command": cfg.command,
           "config": {k: v for k, v in asdict(cfg).items()
                      if k not in ("out", "json", "plot_dir", "fields", "threads")},
           **summary}
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(buf.getvalue(), encoding="utf-8")
        jpath = cfg.json or str(Path(cfg.out).with_suffix(".json"))
    else:
        (stdout or sys.stdout).write(buf.getvalue())
        jpath = cfg.json
    if jpath:
        Path(jpath).write_text(text, encoding="utf-8")
    elif not cfg.out:
        (stdout or sys.stdout).write(text)


def _plot_path(cfg: RunConfig, name: str) -> Path | None:
    if not cfg.plot_dir:
        return None
    try:
        import matplotlib  # noqa: F401
    except ImportError:
        raise UsageError("plot_dir needs matplotlib (pip install artifact[plot])",
                         "plot_dir") from None
    d = Path(cfg.plot_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


# -- commands ----------------------------------------------------------------

def _order_study(cfg: RunConfig):
    from .experiments import order_study

    st = order_study(cfg.epsilon_list, cfg.k, cfg.envelope, cfg.points_per_period,
                     cfg.half_width_X)
    rows = [(e, m, v) for e, row in zip(st.epsilons, st.rows) for m, v in row.items()]
    slopes = {}
    for m, rep in st.slopes().items():
        slopes[m] = {"slope": float("inf"), "pass": True} if rep is None else rep.to_dict()
        rows.append((None, f"slope:{m}", slopes[m]["slope"]))
    flags = {m: s["pass"] for m, s in slopes.items() if s.get("target") is not None}
    flags["A_bounds"] = st.a_bounds_ok()
    p = _plot_path(cfg, "order_study.png")
    if p:
        from .figures import order_study_figure
        order_study_figure(st, p)
    return rows, {"envelope": cfg.envelope, "slopes": slopes, "checks": flags}, all(flags.values())


def _packet_snapshot(cfg: RunConfig):
    from .experiments import make_packet, packet_metrics
    from .wavepacket import packet_to_csv

    e = cfg.epsilon_list[0]
    pk = make_packet(e, cfg.k, cfg.envelope, cfg.points_per_period, cfg.half_width_X)
    metrics = packet_metrics(pk)
    rows = [(e, m, v) for m, v in metrics.items()]
    if cfg.fields:
        packet_to_csv(pk, cfg.fields)
    p = _plot_path(cfg, "packet.png")
    if p:
        from .figures import packet_figure
        packet_figure(pk, p)
    ok = 0.5 <= metrics["A_min"] and metrics["A_max"] <= 2
    return rows, {"envelope": cfg.envelope, "n_points": pk.grid.n_points,
                  "metrics": metrics, "checks": {"A_bounds": ok}}, ok


def _nls_evolve(cfg: RunConfig):
    from .nls import (BreatherSpec, NlsParams, breather_residual, evolve, evolve_grid,
                      nls_residual, peregrine_state, state_to_csv)

    p = NlsParams.standard() if cfg.normalization == "standard" else NlsParams.scaled(cfg.k)
    spec = BreatherSpec(p)
    peak = abs(spec(0.0, 0.0)) / abs(spec(1e9, 0.0))
    grid = evolve_grid(p)
    st = peregrine_state(p, grid, cfg.t_start)
    out = evolve(p, st, cfg.t_end - cfg.t_start, cfg.steps, allow_long=cfg.long_horizon)
    exact = spec(grid.nodes, cfg.t_end)
    err = float(np.max(np.abs(out.total().values - exact)))
    if cfg.fields:
        state_to_csv(out, cfg.fields)
    res0 = breather_residual(p)
    res_t = nls_residual(p, peregrine_state(p, None, cfg.t_end), 1e-5)
    metrics = {"peak_ratio": peak, "breather_residual": res0,
               "nls_residual_end": res_t, "evolve_error": err}
    flags = {"peak_ratio": abs(peak - 3) <= 1e-10, "breather_residual": res0 <= 1e-8,
             "evolve_error": err <= 1e-6}
    p_ = _plot_path(cfg, "nls_evolve.png")
    if p_:
        from .figures import nls_figure
        nls_figure(grid.nodes, out.total().values, exact, p_)
    rows = [(None, m, v) for m, v in metrics.items()]
    return rows, {"normalization": cfg.normalization, "metrics": metrics, "checks": flags}, \
        all(flags.values())


def _init_data(cfg: RunConfig):
    from .experiments import compatibility_study
    from .verify import fit_slope

    eps = cfg.epsilon_list
    res = compatibility_study(eps, cfg.k, cfg.envelope, cfg.points_per_period, cfg.tol,
                              cfg.max_iter)
    rows = []
    flags = {}
    for e, row, ctl in zip(eps, res["rows"], res["control"]):
        for m, v in row.items():
            rows.append((e, m, v))
        rows.append((e, "control I-1 velocity", ctl))
        for m in ("I-1 position", "I-1 velocity", "I-2 position", "I-2 velocity"):
            flags[f"{m} @ {e:g}"] = row[m] <= cfg.compat_tol
        flags[f"control @ {e:g}"] = ctl >= 1e-2
    summary = {"envelope": cfg.envelope, "traces": res["traces"]}
    if len(eps) >= 3:
        rep = fit_slope(eps, [r["I-3 localized distance"] for r in res["rows"]], 1.3)
        summary["I-3 slope"] = rep.to_dict()
        rows.append((None, "slope:I-3 localized distance", rep.fitted_slope))
        flags["I-3 slope"] = rep.fitted_slope >= 1.3
    summary["checks"] = flags
    return rows, summary, all(flags.values())


def _self_test(cfg: RunConfig):
    from .selftest import run_self_test

    rep = run_self_test()
    rows = [(None, f"{mod}:{name}", v) for mod, checks in rep.items()
            for name, (v, _) in checks.items()]
    flags = {f"{mod}:{name}": ok for mod, checks in rep.items()
             for name, (_, ok) in checks.items()}
    return rows, {"checks": flags}, all(flags.values())


RUNNERS = {
    "order-study": _order_study,
    "packet-snapshot": _packet_snapshot,
    "nls-evolve": _nls_evolve,
    "init-data": _init_data,
    "self-test": _self_test,
}


def run(cfg: RunConfig, stdout=None) -> int:
    if cfg.threads is not None:
        os.environ["PEREGRINE_THREADS"] = str(cfg.threads)
    try:
        rows, summary, ok = RUNNERS[cfg.command](cfg)
    except PeregrineError as exc:
        failure = {"pass": False, "error": type(exc).__name__, "message": str(exc)}
        write_outputs(cfg, [], failure, stdout)
        return 1
    summary["pass"] = bool(ok)
    write_outputs(cfg, rows, summary, stdout)
    return 0 if ok else 1


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"peregrine: usage error{key}: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

"""``tqa-qaoa`` command line.

Every experiment subcommand writes CSV tables plus one ``manifest.json``
describing the resolved configuration. Options may also come from a
config file (``--config``), either JSON or ``key = value`` lines; flags on
the command line win. Passing a previous ``manifest.json`` as the config
reruns that experiment.

Exit status: 0 on success, 2 for configuration errors, 3 for runtime errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import shutil
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .exceptions import InfeasibleError, TqaQaoaError
from .experiments import (
    N_RANDOM_CAP,
    default_dt_grid,
    ensemble_compare,
    ensemble_landscape,
    ensemble_pattern,
    ensemble_time_scan,
    ensemble_window_scan,
)
from .graphs import Ensemble, format_graph, generate_graph, load_graph
from .optimizer import OptimizerConfig

logger = logging.getLogger("tqa_qaoa")

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class ConfigError(Exception):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


def fmt(x) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


# -- option parsing helpers -----------------------------------------------------


def parse_int_range(spec) -> List[int]:
    """``"5"`` -> [5]; ``"1:4"`` -> [1, 2, 3, 4]; ``"5:20:5"`` -> [5, 10, 15, 20]; ``"1,3"`` -> [1, 3]."""
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, (list, tuple)):
        return [int(v) for v in spec]
    spec = str(spec).strip()
    if "," in spec:
        return [int(v) for v in spec.split(",")]
    parts = [int(v) for v in spec.split(":")]
    if len(parts) == 1:
        return parts
    if len(parts) in (2, 3):
        step = parts[2] if len(parts) == 3 else 1
        if step <= 0:
            raise ValueError("step must be positive")
        return list(range(parts[0], parts[1] + 1, step))
    raise ValueError(f"cannot parse range {spec!r}")


def parse_dt_grid(spec) -> np.ndarray:
    """``"default"``, ``"start:stop:step"`` (inclusive) or a comma list."""
    if spec is None or spec == "default":
        return default_dt_grid()
    if isinstance(spec, (list, tuple)):
        return np.array(spec, dtype=float)
    spec = str(spec)
    if ":" in spec:
        start, stop, step = (float(v) for v in spec.split(":"))
        if step <= 0:
            raise ValueError("step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return np.round(start + step * np.arange(count), 12)
    return np.array([float(v) for v in spec.split(",")])


def read_config_file(path) -> Dict[str, Any]:
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        # a manifest carries its configuration under "config"
        if isinstance(data.get("config"), dict):
            data = data["config"]
        return {k.replace("-", "_"): v for k, v in data.items()}
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


@dataclass
class Option:
    name: str
    convert: Callable
    default: Any
    help: str = ""


COMMON = [
    Option("graphs", str, None, "directory of graph files (overrides generation options)"),
    Option("ensemble", str, "reg3", "reg3, reg3w or er"),
    Option("n", int, 12, "vertex count"),
    Option("q", float, 0.5, "Erdos-Renyi edge probability"),
    Option("count", int, 50, "number of graphs"),
    Option("seed", int, 0, "master seed"),
    Option("out", str, None, "output directory"),
]
OPTIMIZER = [
    Option("grad_tol", float, 1e-5, "gradient-norm stopping tolerance"),
    Option("max_iters", int, None, "BFGS iteration budget (default 400 p)"),
]
COMMAND_OPTIONS = {
    "graphs": COMMON,
    "tqa-scan": COMMON + [
        Option("p", str, "5:20:5", "depths, e.g. 5:20:5"),
        Option("dt_grid", str, "default", "time steps: start:stop:step or comma list"),
    ],
    "window-scan": COMMON + OPTIMIZER + [
        Option("p", int, 5, "depth"),
        Option("dt_grid", str, "default", "time steps: start:stop:step or comma list"),
    ],
    "landscape": COMMON + OPTIMIZER + [
        Option("p", int, 5, "depth"),
        Option("inits", int, 32, "random initializations per graph"),
        Option("k", int, 1, "gamma interval multiplier for weighted graphs"),
        Option("tqa_dt", str, "0.75", "time step of the extra TQA-initialized run, or 'none'"),
    ],
    "compare": COMMON + OPTIMIZER + [
        Option("p", str, "1:10", "depths"),
        Option("dt", str, "0.75", "TQA time step, or 'auto' to fit it from a TQA scan over the same depths"),
        Option("n_random", int, None, "random starts per graph (default 2^p)"),
        Option("dt_grid", str, "default", "time steps used when dt is 'auto'"),
    ],
    "pattern": COMMON + OPTIMIZER + [
        Option("p", int, 10, "depth"),
        Option("dt", float, 0.75, "TQA time step"),
    ],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tqa-qaoa", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for command, options in COMMAND_OPTIONS.items():
        sp = sub.add_parser(command)
        sp.add_argument("--config", default=None, help="JSON or key=value config file")
        for opt in options:
            # defaults are resolved later so that the config file can fill gaps
            sp.add_argument("--" + opt.name.replace("_", "-"), dest=opt.name, default=None, help=opt.help)
    return parser


def resolve_config(args: argparse.Namespace) -> Dict[str, Any]:
    options = COMMAND_OPTIONS[args.command]
    file_values = read_config_file(args.config) if args.config else {}
    known = {o.name for o in options}
    unknown = set(file_values) - known - {"command", "threads"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown option in config file")
    cfg = {}
    for opt in options:
        raw = getattr(args, opt.name)
        if raw is None:
            raw = file_values.get(opt.name, opt.default)
        if raw is None:
            cfg[opt.name] = None
            continue
        try:
            cfg[opt.name] = opt.convert(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(opt.name, f"invalid value {raw!r} ({exc})") from None
    if cfg["out"] is None:
        raise ConfigError("out", "output directory is required")
    try:
        Ensemble.parse(cfg["ensemble"])
    except ValueError:
        raise ConfigError("ensemble", f"unknown ensemble {cfg['ensemble']!r}") from None
    if cfg["count"] < 1:
        raise ConfigError("count", "must be >= 1")
    if "grad_tol" in cfg:
        try:
            OptimizerConfig(grad_tol=cfg["grad_tol"], max_iters=cfg["max_iters"])
        except InfeasibleError as exc:
            raise ConfigError("grad_tol/max_iters", str(exc)) from None
    for key in ("p",):
        if key in cfg:
            try:
                values = parse_int_range(cfg[key])
            except ValueError as exc:
                raise ConfigError(key, str(exc)) from None
            if not values or min(values) < 1:
                raise ConfigError(key, "depths must be positive integers")
    if "dt_grid" in cfg:
        try:
            grid = parse_dt_grid(cfg["dt_grid"])
        except ValueError as exc:
            raise ConfigError("dt_grid", str(exc)) from None
        if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
            raise ConfigError("dt_grid", "must be non-empty, positive and strictly ascending")
    return cfg


def load_or_generate_graphs(cfg) -> List[tuple]:
    """``[(graph_id, Graph), ...]`` from ``--graphs`` or freshly generated."""
    if cfg.get("graphs"):
        folder = Path(cfg["graphs"])
        if not folder.is_dir():
            raise ConfigError("graphs", f"{folder} is not a directory")
        files = sorted(folder.glob("*.txt"))
        if not files:
            raise ConfigError("graphs", f"no graph files in {folder}")
        return [(f.stem, load_graph(f)) for f in files]
    try:
        return [
            (f"g{i:04d}", generate_graph(cfg["ensemble"], cfg["n"], seed=[cfg["seed"], i], q=cfg["q"]))
            for i in range(cfg["count"])
        ]
    except InfeasibleError as exc:
        raise ConfigError("ensemble/n/q", str(exc)) from None


def optimizer_config(cfg) -> OptimizerConfig:
    return OptimizerConfig(grad_tol=cfg["grad_tol"], max_iters=cfg["max_iters"])


class Output:
    """Collects files in a staging directory; moved into place only on success."""

    def __init__(self, out: Path):
        self.out = out
        out.mkdir(parents=True, exist_ok=True)
        self.stage = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
        self.files: List[str] = []

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.stage / name

    def write_csv(self, name: str, header: List[str], rows) -> None:
        with open(self.path(name), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) for v in row])

    def write_text(self, name: str, text: str) -> None:
        self.path(name).write_text(text, encoding="utf-8")

    def commit(self) -> None:
        for name in self.files:
            os.replace(self.stage / name, self.out / name)
        shutil.rmtree(self.stage, ignore_errors=True)

    def abort(self) -> None:
        shutil.rmtree(self.stage, ignore_errors=True)


def _versions() -> Dict[str, str]:
    import numba
    import sklearn

    return {
        "tqa_qaoa": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "numba": numba.__version__,
        "scikit-learn": sklearn.__version__,
    }


def write_manifest(output: Output, command: str, cfg, results: Dict[str, Any]) -> None:
    manifest = {
        "command": command,
        "master_seed": cfg["seed"],
        "config": cfg,
        "caps": {"n_random_cap": N_RANDOM_CAP},
        "versions": _versions(),
        "outputs": sorted(output.files + ["manifest.json"]),
        "results": results,
    }
    output.write_text("manifest.json", json.dumps(manifest, indent=2, sort_keys=True, default=fmt) + "\n")


# -- subcommands ------------------------------------------------------------------


def cmd_graphs(cfg, graphs, output, threads):
    for gid, g in graphs:
        output.write_text(f"{gid}.txt", format_graph(g))
    return {"graph_count": len(graphs)}


def cmd_tqa_scan(cfg, graphs, output, threads):
    p_values = parse_int_range(cfg["p"])
    grid = parse_dt_grid(cfg["dt_grid"])
    scan = ensemble_time_scan([g for _, g in graphs], p_values, grid, threads)
    mean = scan.mean_ratios
    output.write_csv(
        "tqa_scan.csv", ["p", "dt", "T", "r"],
        ((p, dt, p * dt, mean[k, j]) for k, p in enumerate(p_values) for j, dt in enumerate(grid)),
    )
    output.write_csv(
        "tqa_scan_per_graph.csv", ["graph_id", "p", "dt", "T", "r"],
        ((gid, p, dt, p * dt, scan.ratios[i, k, j])
         for i, (gid, _) in enumerate(graphs) for k, p in enumerate(p_values) for j, dt in enumerate(grid)),
    )
    output.write_csv("t_star.csv", ["p", "T_star"], zip(p_values, scan.t_star))
    return {"delta_t": scan.slope, "intercept": scan.intercept, "residual": scan.residual,
            "t_star": dict(zip(map(str, p_values), scan.t_star.tolist()))}


def cmd_window_scan(cfg, graphs, output, threads):
    p = cfg["p"]
    grid = parse_dt_grid(cfg["dt_grid"])
    ws = ensemble_window_scan([g for _, g in graphs], p, grid, optimizer_config(cfg), threads)
    omr, dist = ws.one_minus_r.mean(axis=0), ws.distances.mean(axis=0)
    output.write_csv(
        "window_scan.csv", ["dt", "T", "one_minus_r_opt", "d_init_final"],
        zip(grid, p * grid, omr, dist),
    )
    output.write_csv(
        "window_scan_per_graph.csv",
        ["graph_id", "dt", "T", "one_minus_r_opt", "d_init_final", "one_minus_r_tqa", "status"],
        ((gid, dt, p * dt, ws.one_minus_r[i, j], ws.distances[i, j], ws.tqa_one_minus_r[i, j], ws.statuses[i, j])
         for i, (gid, _) in enumerate(graphs) for j, dt in enumerate(grid)),
    )
    w = ws.window
    output.write_csv("window.csv", ["t_min", "t_max", "t_d"], [(w.t_min, w.t_max, w.t_d)])
    output.write_csv(
        "window_per_graph.csv", ["graph_id", "t_min", "t_max", "t_d", "r_best"],
        ((gid, gw.t_min, gw.t_max, gw.t_d, gw.r_best) for (gid, _), gw in zip(graphs, ws.graph_windows)),
    )
    outside = sum(not gw.contains_t_d for gw in ws.graph_windows)
    return {"t_min": w.t_min, "t_max": w.t_max, "t_d": w.t_d, "r_best": w.r_best,
            "graphs_with_t_d_outside_window": outside}


def _optional_float(value) -> Optional[float]:
    if value is None or str(value).lower() == "none":
        return None
    return float(value)


def cmd_landscape(cfg, graphs, output, threads):
    try:
        tqa_dt = _optional_float(cfg["tqa_dt"])
    except ValueError:
        raise ConfigError("tqa_dt", f"invalid value {cfg['tqa_dt']!r}") from None
    samples = ensemble_landscape([g for _, g in graphs], cfg["p"], cfg["inits"], tqa_dt,
                                 optimizer_config(cfg), cfg["seed"], cfg["k"], threads)
    rows = []
    for (gid, _), s in zip(graphs, samples):
        for j, (rec, (d, dr)) in enumerate(zip(s.records, s.points)):
            rows.append((gid, j, "random", d, dr, rec.status.value))
        if s.tqa_record is not None:
            rows.append((gid, -1, "tqa", s.tqa_point[0], s.tqa_point[1], s.tqa_record.status.value))
    output.write_csv("landscape.csv", ["graph_id", "init_id", "kind", "d", "dr", "status"], rows)
    rand = np.concatenate([s.points for s in samples])
    res = {"mean_d_random": float(rand[:, 0].mean()), "mean_dr_random": float(rand[:, 1].mean())}
    if tqa_dt is not None:
        tqa = np.array([s.tqa_point for s in samples])
        res.update(mean_d_tqa=float(tqa[:, 0].mean()), mean_dr_tqa=float(tqa[:, 1].mean()))
    return res


def cmd_compare(cfg, graphs, output, threads):
    p_values = parse_int_range(cfg["p"])
    graph_list = [g for _, g in graphs]
    results = {}
    if str(cfg["dt"]).lower() == "auto":
        scan = ensemble_time_scan(graph_list, p_values, parse_dt_grid(cfg["dt_grid"]), threads)
        dt = scan.slope
        results["delta_t_fit"] = {"slope": scan.slope, "intercept": scan.intercept, "residual": scan.residual}
    else:
        try:
            dt = float(cfg["dt"])
        except ValueError:
            raise ConfigError("dt", f"invalid value {cfg['dt']!r}") from None
        if not dt > 0:
            raise ConfigError("dt", "must be positive")
    results["dt"] = dt
    rows, summary = [], []
    for p in p_values:
        n_random = cfg["n_random"] if cfg["n_random"] is not None else min(2 ** p, N_RANDOM_CAP)
        res = ensemble_compare(graph_list, p, dt, n_random, optimizer_config(cfg), cfg["seed"], threads)
        rows += [(p, gid, r[0], r[1], n_random) for (gid, _), r in zip(graphs, res)]
        summary.append((p, 1 - res[:, 0].mean(), 1 - res[:, 1].mean()))
    output.write_csv("compare.csv", ["p", "graph_id", "r_best_random", "r_tqa", "n_random_used"], rows)
    output.write_csv("compare_summary.csv", ["p", "mean_1mr_best_random", "mean_1mr_tqa"], summary)
    results["max_mean_gap"] = max(t - b for _, b, t in summary)
    return results


def cmd_pattern(cfg, graphs, output, threads):
    pat = ensemble_pattern([g for _, g in graphs], cfg["p"], cfg["dt"], optimizer_config(cfg))
    output.write_csv(
        "pattern.csv", ["i", "mean_gamma", "sd_gamma", "mean_beta", "sd_beta", "tqa_gamma", "tqa_beta"],
        zip(range(1, cfg["p"] + 1), pat.mean_gamma, pat.sd_gamma, pat.mean_beta, pat.sd_beta,
            pat.tqa_gamma, pat.tqa_beta),
    )
    return {}


COMMANDS = {
    "graphs": cmd_graphs,
    "tqa-scan": cmd_tqa_scan,
    "window-scan": cmd_window_scan,
    "landscape": cmd_landscape,
    "compare": cmd_compare,
    "pattern": cmd_pattern,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    output = None
    try:
        cfg = resolve_config(args)
        graphs = load_or_generate_graphs(cfg)
        output = Output(Path(cfg["out"]))
        results = COMMANDS[args.command](cfg, graphs, output, args.threads)
        if args.command != "graphs":
            write_manifest(output, args.command, cfg, results)
        output.commit()
    except ConfigError as exc:
        if output is not None:
            output.abort()
        print(f"tqa-qaoa: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TqaQaoaError, OSError, ValueError) as exc:
        if output is not None:
            output.abort()
        print(f"tqa-qaoa: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except BaseException:
        if output is not None:
            output.abort()
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())

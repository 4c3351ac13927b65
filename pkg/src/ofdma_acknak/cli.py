"""Command-line entry point: ad-hoc runs, figure presets and sweeps.

Config files are flat ``key = value`` lines; ``#`` starts a comment.  Keys are
RunConfig field names.  Command-line flags override file values.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .baselines import SCHEMES
from .engine import RunConfig, aggregate, run, write_atomic, write_records


class ConfigError(ValueError):
    pass


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INT = {"N", "K", "L", "M", "d", "S", "T_slots", "T_warmup", "realizations", "seed", "S_genie"}
_FLOAT = {"alpha", "snr_db", "kappa_rel", "root_tol"}


def _convert(key: str, raw: str):
    raw = raw.strip()
    if key in _INT:
        return int(raw)
    if key in _FLOAT:
        return float(raw)
    if key == "x_con":
        return None if raw.lower() in ("", "none") else float(raw)
    if key == "resample":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if key == "schemes":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    return raw


def convert_value(key: str, raw: str):
    if key not in _FIELDS:
        raise ConfigError(f"unknown key {key!r}")
    try:
        return _convert(key, raw)
    except ValueError as e:
        raise ConfigError(f"bad value for {key!r}: {e}") from None


def read_config_file(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        try:
            out[key] = convert_value(key, raw)
        except ConfigError as e:
            raise ConfigError(f"{path}:{lineno}: {e}") from None
    return out


def parse_config(path=None, overrides: dict | None = None, base: RunConfig | None = None) -> RunConfig:
    """Merge defaults (or ``base``), a config file and flag overrides, in that order."""
    values = read_config_file(path) if path else {}
    for k, v in (overrides or {}).items():
        if k not in _FIELDS:
            raise ConfigError(f"unknown key {k!r}")
        values[k] = v
    try:
        return replace(base or RunConfig(), **values)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid config: {e}") from None


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    overrides: dict
    sweep_key: str | None = None
    sweep_values: tuple = ()


PRESETS = {p.name: p for p in (
    ExperimentPreset("fig-time-trace", {"realizations": 1}),
    ExperimentPreset("fig-particles", {}, "S", (1, 2, 5, 10, 20, 30, 50)),
    ExperimentPreset("fig-alpha", {}, "alpha", (1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 1e-1)),
    ExperimentPreset("fig-N-scaled-power", {}, "N", (4, 8, 16, 32, 64)),
    ExperimentPreset("fig-N-fixed-power", {"x_con": 320.0}, "N", (4, 8, 16, 32, 64)),
    ExperimentPreset("fig-K", {}, "K", (2, 4, 8, 12, 16)),
    ExperimentPreset("fig-SNR", {}, "snr_db", (0.0, 5.0, 10.0, 15.0, 20.0)),
)}


def parse_sweep(spec: str):
    if "=" not in spec:
        raise ConfigError(f"sweep must look like key=v1,v2,..., got {spec!r}")
    key, raw = spec.split("=", 1)
    key = key.strip()
    vals = tuple(convert_value(key, v) for v in raw.split(",") if v.strip())
    if not vals:
        raise ConfigError("empty sweep")
    return key, vals


def _point_name(key, value) -> str:
    return f"{key}={value}" if key else "run"


def run_sweep(config: RunConfig, out_dir, sweep_key=None, sweep_values=(), log=None) -> dict:
    """Run every sweep point and write records CSVs, summary.json and plot_data.csv."""
    out_dir = Path(out_dir)
    points = [(v, replace(config, **{sweep_key: v})) for v in sweep_values] if sweep_key \
        else [(None, config)]
    summary = {"sweep_key": sweep_key, "seed": config.seed, "goodput_statistic": "goodput_expected",
               "points": []}
    plot = ["x,scheme,mean,stderr"]
    for value, cfg in points:
        name = _point_name(sweep_key, value)
        if log:
            log(f"running {name}")
        records = run(cfg)
        write_records(out_dir / f"records_{name}.csv", records, cfg)
        stats = aggregate(records, cfg)
        summary["points"].append({"x": value, "config": cfg.as_dict(), "schemes": stats})
        for scheme, s in stats.items():
            plot.append(f"{'' if value is None else value},{scheme},{s['mean']!r},{s['stderr']!r}")
    write_atomic(out_dir / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    write_atomic(out_dir / "plot_data.csv", "\n".join(plot) + "\n")
    return summary


def run_preset(name: str, out_dir, overrides: dict | None = None, log=None) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    p = PRESETS[name]
    cfg = parse_config(None, {**p.overrides, **(overrides or {})})
    return run_sweep(cfg, out_dir, p.sweep_key, p.sweep_values, log)


def _add_config_flags(ap: argparse.ArgumentParser):
    for name in _FIELDS:
        if name in ("seed", "realizations", "schemes"):
            continue
        ap.add_argument(f"--{name}", dest=name, metavar="VALUE")
    ap.add_argument("--config", help="flat key = value config file")
    ap.add_argument("--seed")
    ap.add_argument("--realizations")
    ap.add_argument("--schemes", help=f"comma-separated subset of {','.join(SCHEMES)}")
    ap.add_argument("--out-dir", default="results")


def _flag_overrides(ns) -> dict:
    out = {}
    for name in _FIELDS:
        raw = getattr(ns, name, None)
        if raw is not None:
            out[name] = convert_value(name, raw)
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ofdma-acknak", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one configuration or a sweep")
    _add_config_flags(r)
    r.add_argument("--sweep", help="key=v1,v2,... to sweep one field")
    p = sub.add_parser("preset", help="run a figure preset")
    p.add_argument("name", choices=sorted(PRESETS))
    _add_config_flags(p)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)

    def log(msg):
        print(msg, file=sys.stderr)

    try:
        overrides = _flag_overrides(ns)
        if ns.command == "run":
            cfg = parse_config(ns.config, overrides)
            key, vals = parse_sweep(ns.sweep) if ns.sweep else (None, ())
            run_sweep(cfg, ns.out_dir, key, vals, log)
        else:
            p = PRESETS[ns.name]
            base = parse_config(None, p.overrides)
            cfg = parse_config(ns.config, overrides, base)
            run_sweep(cfg, ns.out_dir, p.sweep_key, p.sweep_values, log)
    except (ConfigError, OSError, ValueError) as e:
        log(f"error: {e}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

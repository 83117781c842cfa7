"""Command-line front end: ``kickedtop {evolve,sweep,classical,verify}``.

Every output starts with a metadata header echoing the resolved config, so
identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from math import pi

import numpy as np

from . import __version__, classical, harness
from .dynamics import FloquetParams, evolve, parse_p
from .measures import DISCORD_PRESETS, MEASURES, applicable_measures, report
from .spinalg import ContractError, NumericalError, SpinQuantum, coherent_state

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

# CSV column names differ from report fields only for the three-tangle
COLUMN = {name: name for name in MEASURES} | {"three_tangle": "tangle"}

log = logging.getLogger("kickedtop")


class UsageError(Exception):
    pass


# config: key=value file, then command-line overrides

KEYS = {
    "j": str,
    "p": str,
    "k": float,
    "r_max": int,
    "s": int,
    "k_list": str,
    "t_max": int,
    "theta0": float,
    "phi0": float,
    "measures": str,
    "discord_grid": str,
    "n_initial": int,
    "steps": int,
    "seed": int,
    "out": str,
    "workers": int,
}
DEFAULTS = {
    "j": "1",
    "p": "pi/2",
    "k": 1.0,
    "s": 40,
    "t_max": 100,
    "theta0": 2.5,
    "phi0": 1.1,
    "measures": "all",
    "discord_grid": "coarse",
    "n_initial": 60,
    "steps": 300,
    "seed": 0,
    "workers": 1,
}
# keys that do not change file contents and stay out of the echoed config
NOT_ECHOED = {"out", "workers"}


def read_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def resolve_config(args, command_keys) -> dict:
    raw = dict(DEFAULTS)
    if getattr(args, "config", None):
        raw.update(read_config_file(args.config))
    for key in KEYS:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    cfg = {}
    for key in command_keys:
        if key not in raw:
            continue
        try:
            cfg[key] = KEYS[key](raw[key])
        except ValueError:
            raise UsageError(f"bad value for {key}: {raw[key]!r}") from None
    return cfg


def _spin(cfg) -> SpinQuantum:
    try:
        return SpinQuantum.parse(cfg["j"])
    except (ContractError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad j: {exc}") from None


def _columns(cfg, spin: SpinQuantum) -> list:
    avail = applicable_measures(spin.two_j)
    sel = cfg.get("measures", "all").strip()
    if sel == "all":
        return list(avail)
    wanted = [m.strip() for m in sel.split(",") if m.strip()]
    names = {COLUMN[m]: m for m in MEASURES} | {m: m for m in MEASURES}
    bad = [m for m in wanted if m not in names]
    if bad:
        raise UsageError(f"unknown measures {bad}; choose from {', '.join(COLUMN.values())}")
    chosen = {names[m] for m in wanted}
    missing = chosen - set(avail)
    if missing:
        raise UsageError(f"measures {sorted(missing)} are not defined for j={spin}")
    return [m for m in avail if m in chosen]


def _discord(cfg):
    grid = cfg.get("discord_grid", "coarse")
    if grid not in DISCORD_PRESETS:
        raise UsageError(f"discord_grid must be one of {sorted(DISCORD_PRESETS)}")
    return DISCORD_PRESETS[grid]


def _check_out(cfg):
    out = cfg.get("out")
    if out in (None, "", "-"):
        return None
    parent = os.path.dirname(os.path.abspath(out))
    if not os.path.isdir(parent):
        raise UsageError(f"output directory {parent} does not exist")
    return out


# CSV output


def fmt(x) -> str:
    return "%.12e" % (x + 0.0)  # no negative zero


def metadata_lines(command: str, cfg: dict) -> list:
    lines = [f"# kickedtop {__version__} {command}"]
    for key in sorted(cfg):
        if key not in NOT_ECHOED:
            lines.append(f"# config {key} = {cfg[key]!r}")
    for key, val in harness.CONVENTIONS.items():
        lines.append(f"# convention {key}: {val}")
    return lines


def write_csv(path, meta, header, rows) -> None:
    text = "\n".join(meta + [",".join(header)] + [",".join(r) for r in rows]) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _series_rows(params, spin, cfg, columns, discord, prefix=()):
    psi0 = coherent_state(spin, cfg["theta0"], cfg["phi0"])
    rec = evolve(params, psi0, cfg["t_max"])
    rows = []
    for t, psi in enumerate(rec.states):
        rep = report(psi, discord, measures=columns)
        rows.append([*prefix, str(t)] + [fmt(getattr(rep, m)) for m in columns])
    return rows


def _common_evolution(cfg):
    spin = _spin(cfg)
    if spin.two_j < 2:
        raise UsageError("correlations need j >= 1")
    if cfg["t_max"] < 0:
        raise UsageError("t_max must be >= 0")
    try:
        parse_p(cfg["p"])
        coherent_state(spin, cfg["theta0"], cfg["phi0"])
    except ContractError as exc:
        raise UsageError(str(exc)) from None
    return spin, _columns(cfg, spin), _discord(cfg)


def cmd_evolve(cfg) -> int:
    out = _check_out(cfg)
    spin, columns, discord = _common_evolution(cfg)
    params = FloquetParams.make(spin, cfg["k"], cfg["p"])
    rows = _series_rows(params, spin, cfg, columns, discord)
    write_csv(out, metadata_lines("evolve", cfg), ["t"] + [COLUMN[m] for m in columns], rows)
    return EXIT_OK


def k_grid(cfg) -> list:
    """``(r, k)`` pairs: ``k = r*pi/s`` for ``r = 0..r_max``, or an explicit list indexed from 0."""
    if cfg.get("k_list"):
        try:
            ks = [float(x) for x in cfg["k_list"].split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"bad k_list {cfg['k_list']!r}") from None
        grid = list(enumerate(ks))
    else:
        if "r_max" not in cfg:
            raise UsageError("sweep needs r_max (with s) or k_list")
        if cfg["s"] < 1:
            raise UsageError("s must be >= 1")
        grid = [(r, r * pi / cfg["s"]) for r in range(cfg["r_max"] + 1)]
    if not grid:
        raise UsageError("empty k grid")
    return grid


def _sweep_one(args):
    r, k, cfg, columns, discord = args
    spin = SpinQuantum.parse(cfg["j"])
    params = FloquetParams.make(spin, k, cfg["p"])
    return _series_rows(params, spin, cfg, columns, discord, prefix=(str(r), fmt(k)))


def cmd_sweep(cfg) -> int:
    out = _check_out(cfg)
    spin, columns, discord = _common_evolution(cfg)
    jobs = [(r, k, cfg, columns, discord) for r, k in k_grid(cfg)]
    workers = max(1, cfg.get("workers", 1))
    if workers == 1:
        blocks = [_sweep_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_sweep_one, jobs))  # map keeps r order
    rows = [row for block in blocks for row in block]
    write_csv(out, metadata_lines("sweep", cfg), ["r", "k", "t"] + [COLUMN[m] for m in columns], rows)
    return EXIT_OK


def cmd_classical(cfg) -> int:
    out = _check_out(cfg)
    if cfg["n_initial"] < 1 or cfg["steps"] < 1:
        raise UsageError("n_initial and steps must be >= 1")
    try:
        p, _ = parse_p(cfg["p"])
    except ContractError as exc:
        raise UsageError(str(exc)) from None
    portrait = classical.phase_portrait(cfg["k"], p, cfg["n_initial"], cfg["steps"], seed=cfg["seed"])
    rows = ([str(i), str(t), fmt(th), fmt(ph)] for i, t, th, ph in portrait.rows())
    write_csv(out, metadata_lines("classical", cfg), ["traj_id", "step", "theta", "phi"], rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in harness.SUITE_NAMES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(harness.SUITE_NAMES)}")
    if args.mutate is not None and args.mutate not in harness.MUTATIONS:
        raise UsageError(f"unknown mutation {args.mutate!r}; choose from {', '.join(harness.MUTATIONS)}")
    out = _check_out({"out": args.out})
    grid = args.discord_grid or "coarse"
    if grid not in DISCORD_PRESETS:
        raise UsageError(f"discord_grid must be one of {sorted(DISCORD_PRESETS)}")
    with harness.mutation(args.mutate):
        checks = harness.run_suite(args.suite, workers=max(1, args.workers or 1), discord=DISCORD_PRESETS[grid])
    meta = {"discord_grid": grid, "mutation": args.mutate}
    if out is None:
        import json

        json.dump(harness.suite_report(checks, args.suite, meta), sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        harness.write_report(out, checks, args.suite, meta)
    failed = [c for c in checks if not c.passed]
    for c in failed:
        where = c.worst or {}
        print(
            f"FAIL {c.kind} {c.params} status={c.status} max_dev={c.max_deviation:.3e} at {where}"
            + (f" ({c.detail['error']})" if "error" in c.detail else ""),
            file=sys.stderr,
        )
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed", file=sys.stderr)
    if any(c.detail.get("numerical") for c in failed):
        return EXIT_NUMERICAL
    return EXIT_FAIL if failed else EXIT_OK


GNUPLOT_HEATMAP = """\
# heatmap of one measure over (k, t) from `kickedtop sweep`
# usage: gnuplot -e "datafile='sweep.csv'; col=4" heatmap.gp
set datafile separator ','
set datafile commentschars '#'
set key autotitle columnhead
set xlabel 'k'
set ylabel 't'
set view map
set pm3d map
set palette rgbformulae 33,13,10
set terminal pngcairo size 900,700
set output 'heatmap.png'
splot datafile using 2:3:col with points pointtype 5 pointsize 0.4 palette notitle
"""

GNUPLOT_PORTRAIT = """\
# phase portrait from `kickedtop classical`
# usage: gnuplot -e "datafile='portrait.csv'" portrait.gp
set datafile separator ','
set datafile commentschars '#'
set xlabel 'phi'
set ylabel 'theta'
set xrange [-pi:pi]
set yrange [0:pi]
set terminal pngcairo size 800,600
set output 'portrait.png'
plot datafile every ::1 using 4:3 with dots lc rgb 'black' notitle
"""


def _write_gnuplot(path, text):
    if path:
        with open(path, "w") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kickedtop", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"kickedtop {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, keys):
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--out", help="output path (default stdout)")
        for key in keys:
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, dest=key, default=None, help=f"(default {DEFAULTS.get(key, 'unset')})")

    ev = sub.add_parser("evolve", help="correlation time series for one (j, k, p)")
    common(ev, ["j", "p", "k", "t_max", "theta0", "phi0", "measures", "discord_grid", "seed"])
    sw = sub.add_parser("sweep", help="(k, t) heatmap over k = r*pi/s")
    common(sw, ["j", "p", "r_max", "s", "k_list", "t_max", "theta0", "phi0", "measures", "discord_grid", "seed", "workers"])
    sw.add_argument("--gnuplot", metavar="PATH", help="also write a sample gnuplot script")
    cl = sub.add_parser("classical", help="classical phase portrait")
    common(cl, ["p", "k", "n_initial", "steps", "seed"])
    cl.add_argument("--gnuplot", metavar="PATH", help="also write a sample gnuplot script")
    vf = sub.add_parser("verify", help="run a verification suite, JSON report")
    vf.add_argument("suite", help=f"one of {', '.join(harness.SUITE_NAMES)}")
    vf.add_argument("--out", help="JSON report path (default stdout)")
    vf.add_argument("--workers", type=int, default=1)
    vf.add_argument("--discord-grid", dest="discord_grid", default=None)
    vf.add_argument("--mutate", default=None, help=f"inject a fault: {', '.join(harness.MUTATIONS)}")
    return ap


COMMAND_KEYS = {
    "evolve": ("j", "p", "k", "t_max", "theta0", "phi0", "measures", "discord_grid", "seed", "out"),
    "sweep": ("j", "p", "r_max", "s", "k_list", "t_max", "theta0", "phi0", "measures", "discord_grid", "seed", "out", "workers"),
    "classical": ("p", "k", "n_initial", "steps", "seed", "out"),
}
COMMANDS = {"evolve": cmd_evolve, "sweep": cmd_sweep, "classical": cmd_classical}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "verify":
            return cmd_verify(args)
        cfg = resolve_config(args, COMMAND_KEYS[args.command])
        code = COMMANDS[args.command](cfg)
        if args.command == "sweep":
            _write_gnuplot(args.gnuplot, GNUPLOT_HEATMAP)
        elif args.command == "classical":
            _write_gnuplot(args.gnuplot, GNUPLOT_PORTRAIT)
        return code
    except UsageError as exc:
        print(f"kickedtop: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"kickedtop: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ContractError as exc:
        print(f"kickedtop: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

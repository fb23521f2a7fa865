"""Command-line front end: ``corrqst generate | transfer | sweep | localization | schema``.

Exit codes: 0 success, 1 runtime error, 2 invalid flags or config.
The output directory may be overridden with the CORRQST_OUT environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .disorder import (
    DisorderParams,
    correlated_disorder,
    generate_raw,
    normalize,
    sample_phases,
    write_csv,
)
from .dynamics import (
    find_f_max,
    fidelity_trace,
    occupancy_trace,
    write_fidelity_csv,
    write_trace_csv,
)
from .effective import detuning_ratio, reduce
from .errors import CorrQSTError
from .hamiltonian import ChainSpec, build_channel, build_full
from .spectral import eigendecompose, participation, write_eigenmap_csv
from . import ensemble

log = logging.getLogger("corrqst")

OUT_ENV = "CORRQST_OUT"

_number = {"type": "number"}
RUN_CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "corrqst run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": 1},
        "N": {"type": "integer", "minimum": 2},
        "J": {"type": "number", "exclusiveMinimum": 0},
        "g_list": {"type": "array", "minItems": 1,
                   "items": {"type": "number", "exclusiveMinimum": 0}},
        "alpha_list": {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
        "omega_s": _number,
        "omega_r": _number,
        "samples": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "window_mult": {"type": "number", "exclusiveMinimum": 0},
        "coarse_per_tau": {"type": "integer", "minimum": 1},
        "bin_width": {"type": "number", "exclusiveMinimum": 0},
        "xi_profile": {"type": "boolean"},
        "outputs": {"type": "string"},
        "threads": {"type": "integer", "minimum": 1},
        "trace": {"type": "boolean"},
        "eigenmap": {"type": "boolean"},
    },
}
_RUN_ONLY = ("schema_version", "threads", "trace", "eigenmap")


class ConfigError(ValueError):
    pass


def load_run_config(path) -> tuple[ensemble.SweepConfig, dict]:
    """Read and validate a JSON run configuration; returns (SweepConfig, run-only options)."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(data, RUN_CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config {path}: {exc.message}") from exc
    extra = {k: data.pop(k) for k in _RUN_ONLY if k in data}
    try:
        return ensemble.SweepConfig(**data), extra
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


def _out_dir(arg) -> Path:
    env = os.environ.get(OUT_ENV)
    return Path(env) if env else Path(arg)


def _n_arg(s: str) -> int:
    try:
        n = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if n < 2:
        raise argparse.ArgumentTypeError("N must be >= 2")
    return n


def _alpha_arg(s: str):
    if s.lower() == "none":
        return None
    try:
        a = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be a number or 'none': {s!r}")
    if not np.isfinite(a) or a < 0:
        raise argparse.ArgumentTypeError("alpha must be finite and >= 0")
    return a


def _nonneg(s: str) -> float:
    try:
        x = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")
    if not x >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return x


def _positive(s: str) -> float:
    x = _nonneg(s)
    if x == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return x


def _seed(s: str) -> int:
    try:
        x = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return x


def cmd_generate(args) -> int:
    params = DisorderParams(args.n, args.alpha, args.seed)
    seq = generate_raw(params, sample_phases(params))
    if not args.raw:
        seq = normalize(seq)
    path = _out_dir(args.out) / f"disorder_N{args.n}_a{params.alpha:g}_s{args.seed}.csv"
    write_csv(seq, path)
    print(path)
    return 0


def _transfer_spec(args) -> ChainSpec:
    g_s = args.gs if args.gs is not None else args.g
    g_r = args.gr if args.gr is not None else args.g
    disorder = None if args.alpha is None else correlated_disorder(args.n, args.alpha, args.seed)
    return ChainSpec(args.n, 1.0, g_s, g_r, args.omega_s, args.omega_r, disorder)


def cmd_transfer(args) -> int:
    spec = _transfer_spec(args)
    channel = eigendecompose(build_channel(spec))
    full = eigendecompose(build_full(spec))
    fid = find_f_max(full, spec, args.window_mult, args.coarse_per_tau)
    try:
        eff = reduce(channel, spec)
        ratio = f"{detuning_ratio(eff):.6g}"
        eff_txt = f"h_s={eff.h_s:.6g} h_r={eff.h_r:.6g} J_eff={eff.j_eff:.6g} delta={eff.delta:.6g}"
    except CorrQSTError as exc:
        ratio, eff_txt = "n/a", f"effective model unavailable ({type(exc).__name__})"
    print(f"F_max={fid.f_max:.10f}")
    print(f"t_star={fid.t_star:.10g}")
    if spec.g > 0:
        print(f"t_star/tau={fid.t_star / spec.tau:.6f}")
    print(f"|delta/J_eff|={ratio}")
    print(eff_txt)

    out = _out_dir(args.out)
    stem = f"transfer_N{args.n}_a{'none' if args.alpha is None else f'{args.alpha:g}'}_s{args.seed}"
    if args.trace:
        if spec.g == 0:
            print("trace skipped: tau undefined for g = 0", file=sys.stderr)
        else:
            tr = occupancy_trace(full, spec, args.trace_mult * spec.tau, args.trace_points)
            print(write_trace_csv(tr, out / f"{stem}_trace.csv"))
            if args.fidelity_trace:
                print(write_fidelity_csv(tr.times, fidelity_trace(full, spec, tr.times),
                                         out / f"{stem}_fidelity.csv"))
    if args.eigenmap:
        print(write_eigenmap_csv(full, out / f"{stem}_eigenmap.csv"))
    return 0


def cmd_sweep(args) -> int:
    config, extra = load_run_config(args.config)
    overrides = {}
    if args.samples is not None:
        overrides["samples"] = args.samples
    if args.window_mult is not None:
        overrides["window_mult"] = args.window_mult
    if overrides:
        config = ensemble.SweepConfig(**{**config.to_dict(), **overrides})
    threads = args.threads or extra.get("threads")
    out = _out_dir(args.out if args.out is not None else config.outputs)
    summary = ensemble.run_sweep(config, threads=threads, out_dir=out, resume=not args.fresh)
    if extra.get("trace") or extra.get("eigenmap"):
        _export_best_samples(config, out, extra.get("trace", False), extra.get("eigenmap", False))
    for grp in summary["groups"]:
        F = grp["F_max"]
        mean = "n/a" if F["mean"] is None else f"{F['mean']:.4f} +- {F['sem']:.4f}"
        print(f"alpha={grp['alpha']:g} g={grp['g']:g} F_max={mean} "
              f"|delta/J|={grp['detuning_ratio']['mean']} failed={grp['failed']}")
    print(out / "summary.json")
    return 0


def _export_best_samples(config, out: Path, trace: bool, eigenmap: bool) -> None:
    """Occupation trace / eigenstate map of the highest-F_max sample in each (alpha, g) group."""
    rows = ensemble._read_results(out / "results.csv")
    for a in config.alpha_list:
        for g in config.g_list:
            good = [r for r in rows if r.alpha == a and r.g == g and r.ok]
            if not good:
                continue
            best = max(good, key=lambda r: (r.F_max, -r.index))
            spec = ensemble.sample_spec(config, a, g, best.seed)
            full = eigendecompose(build_full(spec))
            stem = f"best_a{a:g}_g{g:g}_i{best.index}"
            if trace:
                tr = occupancy_trace(full, spec, 2.0 * spec.tau, 2001)
                write_trace_csv(tr, out / "traces" / f"{stem}_trace.csv")
            if eigenmap:
                write_eigenmap_csv(full, out / "traces" / f"{stem}_eigenmap.csv")


def cmd_localization(args) -> int:
    """Mean participation-ratio profile of the bare channel for each alpha."""
    out = _out_dir(args.out) / f"participation_N{args.n}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    profiles = {}
    for a in args.alpha:
        acc = np.zeros(args.n)
        for i in range(args.samples):
            seed = ensemble.sample_seed(args.seed, 0, 0, i)
            spec = ChainSpec(args.n, disorder=correlated_disorder(args.n, a, seed))
            acc += participation(eigendecompose(build_channel(spec)), args.n).xi
        profiles[a] = acc / args.samples
    with out.open("w") as fh:
        fh.write("alpha,k,xi\n")
        for a, xi in profiles.items():
            for k, x in enumerate(xi):
                fh.write(f"{a!r},{k},{float(x)!r}\n")
    print(out)
    return 0


def cmd_schema(args) -> int:
    print(json.dumps(RUN_CONFIG_SCHEMA, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="corrqst", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a correlated disorder sequence as CSV")
    g.add_argument("--n", type=_n_arg, required=True, help="channel length N (>= 2)")
    g.add_argument("--alpha", type=_nonneg, required=True, help="spectral exponent alpha")
    g.add_argument("--seed", type=_seed, default=0, help="RNG seed (default 0)")
    g.add_argument("--raw", action="store_true", help="skip normalization to mean 0 / var 1")
    g.add_argument("--out", default=".", help="output directory (default .)")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("transfer", help="single-sample transfer fidelity")
    t.add_argument("--n", type=_n_arg, default=50, help="channel length N (default 50)")
    t.add_argument("--alpha", type=_alpha_arg, default=None,
                   help="spectral exponent; 'none' (default) disables disorder")
    t.add_argument("--seed", type=_seed, default=0, help="disorder seed (default 0)")
    t.add_argument("--g", type=_nonneg, default=0.001, help="outer coupling g_s = g_r (default 0.001)")
    t.add_argument("--gs", type=_nonneg, default=None, help="sender coupling (overrides --g)")
    t.add_argument("--gr", type=_nonneg, default=None, help="receiver coupling (overrides --g)")
    t.add_argument("--omega-s", type=float, default=0.0, help="sender field (default 0)")
    t.add_argument("--omega-r", type=float, default=0.0, help="receiver field (default 0)")
    t.add_argument("--window-mult", type=_positive, default=20.0,
                   help="search window in units of tau (default 20)")
    t.add_argument("--coarse-per-tau", type=int, default=2000,
                   help="coarse grid points per tau (default 2000)")
    t.add_argument("--trace", action="store_true", help="write t,p_s,p_r,p_ch occupation trace")
    t.add_argument("--fidelity-trace", action="store_true", help="also write t,F (needs --trace)")
    t.add_argument("--trace-mult", type=_positive, default=2.0,
                   help="trace length in units of tau (default 2)")
    t.add_argument("--trace-points", type=int, default=2001, help="trace samples (default 2001)")
    t.add_argument("--eigenmap", action="store_true", help="write k,i,prob eigenstate map")
    t.add_argument("--out", default=".", help="output directory (default .)")
    t.set_defaults(func=cmd_transfer)

    s = sub.add_parser("sweep", help="ensemble sweep from a JSON run configuration")
    s.add_argument("config", help="run configuration file (see `corrqst schema`)")
    s.add_argument("--samples", type=int, default=None, help="override samples per (alpha, g)")
    s.add_argument("--window-mult", type=_positive, default=None, help="override window_mult")
    s.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: available CPUs)")
    s.add_argument("--out", default=None, help="output directory (default: config 'outputs')")
    s.add_argument("--fresh", action="store_true", help="ignore an existing manifest")
    s.set_defaults(func=cmd_sweep)

    loc = sub.add_parser("localization", help="mean participation ratio xi_k versus alpha")
    loc.add_argument("--n", type=_n_arg, default=100, help="channel length N (default 100)")
    loc.add_argument("--alpha", type=_alpha_arg, nargs="+", default=[0.0, 1.0, 2.0, 3.0],
                     help="alpha values (default 0 1 2 3)")
    loc.add_argument("--samples", type=int, default=1000, help="realizations (default 1000)")
    loc.add_argument("--seed", type=_seed, default=0, help="master seed (default 0)")
    loc.add_argument("--out", default=".", help="output directory (default .)")
    loc.set_defaults(func=cmd_localization)

    sc = sub.add_parser("schema", help="print the JSON schema of run configurations")
    sc.set_defaults(func=cmd_schema)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "localization" and None in args.alpha:
        parser.error("localization needs numeric alpha values")
    if args.command == "sweep" and args.samples is not None and args.samples < 1:
        parser.error("--samples must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"corrqst: error: {exc}", file=sys.stderr)
        return 2
    except (CorrQSTError, ValueError, OSError) as exc:
        print(f"corrqst: error: {exc}", file=sys.stderr)
        return 1

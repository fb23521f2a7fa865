"""Reproducible Monte Carlo sweeps over disorder realizations.

Per-sample seeds come from a stable mixing function (numpy SeedSequence)::

    seed = SeedSequence([master_seed, alpha_index, g_index, sample_index])
               .generate_state(1, dtype=uint64)[0]

so every sample is a pure function of the configuration and its grid position,
regardless of worker count or completion order.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .disorder import correlated_disorder
from .dynamics import find_f_max
from .effective import EffectiveTwoSite, detuning_ratio, reduce
from .errors import ConvergenceFailure, NullDynamics, ResonantLevel
from .hamiltonian import ChainSpec, build_channel, build_full
from .spectral import eigendecompose, participation

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
RESULT_COLUMNS = ["alpha", "g", "index", "seed", "F_max", "t_star", "h_s", "h_r", "J_eff",
                  "delta", "status"]
RECOVERABLE = (ResonantLevel, ConvergenceFailure, NullDynamics)


@dataclass(frozen=True)
class SweepConfig:
    N: int = 50
    J: float = 1.0
    g_list: tuple = (0.001,)
    alpha_list: tuple = (0.0, 1.0, 2.0, 3.0)
    omega_s: float = 0.0
    omega_r: float = 0.0
    samples: int = 500
    master_seed: int = 0
    window_mult: float = 20.0
    coarse_per_tau: int = 2000
    bin_width: float = 0.01
    xi_profile: bool = False
    outputs: str = "results"

    def __post_init__(self):
        object.__setattr__(self, "g_list", tuple(float(g) for g in self.g_list))
        object.__setattr__(self, "alpha_list", tuple(float(a) for a in self.alpha_list))
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not self.g_list or not self.alpha_list:
            raise ValueError("g_list and alpha_list must be non-empty")
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if any(g <= 0 for g in self.g_list):
            raise ValueError("outer couplings in g_list must be positive")
        if any(a < 0 for a in self.alpha_list):
            raise ValueError("alpha values must be non-negative")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        if not self.window_mult > 0 or self.coarse_per_tau < 1 or not self.bin_width > 0:
            raise ValueError("window_mult, coarse_per_tau and bin_width must be positive")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["g_list"] = list(self.g_list)
        d["alpha_list"] = list(self.alpha_list)
        return d

    def physics_hash(self) -> str:
        """Hash of every field that affects sample values (not the output path)."""
        d = self.to_dict()
        d.pop("outputs")
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class SampleResult:
    alpha: float
    g: float
    index: int
    seed: int
    F_max: float = float("nan")
    t_star: float = float("nan")
    eff: EffectiveTwoSite | None = None
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def row(self) -> list:
        if self.eff is None:
            nums = [self.F_max, self.t_star, "", "", "", ""]
        else:
            e = self.eff
            nums = [self.F_max, self.t_star, e.h_s, e.h_r, e.j_eff, e.delta]
        cells = [repr(float(x)) if x != "" else "" for x in nums]
        return [repr(self.alpha), repr(self.g), self.index, self.seed] + cells + [self.status]

    @classmethod
    def from_row(cls, row: dict) -> "SampleResult":
        def num(key):
            v = row[key]
            return float(v) if v != "" else float("nan")

        eff = None
        if row["h_s"] != "":
            h_s, h_r, j = num("h_s"), num("h_r"), num("J_eff")
            eff = EffectiveTwoSite(h_s, h_r, j, float("nan"), float("nan"))
        return cls(float(row["alpha"]), float(row["g"]), int(row["index"]), int(row["seed"]),
                   num("F_max"), num("t_star"), eff, row["status"])


def sample_seed(master_seed: int, alpha_index: int, g_index: int, index: int) -> int:
    ss = np.random.SeedSequence([int(master_seed), int(alpha_index), int(g_index), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _grid_index(values: tuple, x: float, name: str) -> int:
    for i, v in enumerate(values):
        if v == float(x):
            return i
    raise ValueError(f"{name}={x} is not in the configured grid {values}")


def sample_spec(config: SweepConfig, alpha: float, g: float, seed: int) -> ChainSpec:
    disorder = correlated_disorder(config.N, alpha, seed)
    return ChainSpec(config.N, config.J, g, g, config.omega_s, config.omega_r, disorder)


def run_sample(config: SweepConfig, alpha: float, g: float, index: int) -> SampleResult:
    """One disorder realization end to end; recoverable numerical failures become a status."""
    if not 0 <= index < config.samples:
        raise ValueError(f"sample index {index} outside [0, {config.samples})")
    ai = _grid_index(config.alpha_list, alpha, "alpha")
    gi = _grid_index(config.g_list, g, "g")
    seed = sample_seed(config.master_seed, ai, gi, index)
    eff = None
    try:
        spec = sample_spec(config, alpha, g, seed)
        eff = reduce(eigendecompose(build_channel(spec)), spec, warn=False)
        if eff.j_eff == 0:
            raise NullDynamics("J' = 0")
        fid = find_f_max(eigendecompose(build_full(spec)), spec, config.window_mult,
                         config.coarse_per_tau)
    except RECOVERABLE as exc:
        log.debug("sample alpha=%s g=%s index=%d failed: %s", alpha, g, index, exc)
        return SampleResult(float(alpha), float(g), index, seed, eff=eff,
                            status=f"failed:{type(exc).__name__}")
    return SampleResult(float(alpha), float(g), index, seed, fid.f_max, fid.t_star, eff)


def histogram(values, bin_width: float = 0.01, range: tuple = (0.5, 1.0)):
    """Fixed-width histogram; bins are [lo, hi) except the last, which also holds `range[1]`.

    Returns (edges, counts).
    """
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    lo, hi = range
    nbins = int(round((hi - lo) / bin_width))
    edges = lo + bin_width * np.arange(nbins + 1)
    v = np.asarray(values, dtype=float)
    if v.size and (v.min() < lo or v.max() > hi):
        raise ValueError(f"values outside histogram range [{lo}, {hi}]")
    idx = np.floor((v - lo) / bin_width + 1e-9).astype(int)
    idx = np.clip(idx, 0, nbins - 1)
    counts = np.bincount(idx, minlength=nbins)
    return edges, counts


def _stats(x: np.ndarray) -> dict:
    if x.size == 0:
        return {"mean": None, "median": None, "std": None, "sem": None, "min": None, "max": None}
    std = float(x.std(ddof=1)) if x.size > 1 else 0.0
    return {
        "mean": float(x.mean()),
        "median": float(np.median(x)),
        "std": std,
        "sem": std / np.sqrt(x.size),
        "min": float(x.min()),
        "max": float(x.max()),
    }


def mean_xi_profile(config: SweepConfig, results: list[SampleResult]) -> list[float]:
    """Energy-ordered mean participation ratio of the bare channel over the given samples."""
    acc = np.zeros(config.N)
    for r in results:
        spec = ChainSpec(config.N, config.J, disorder=correlated_disorder(config.N, r.alpha, r.seed))
        acc += participation(eigendecompose(build_channel(spec)), config.N).xi
    return (acc / max(len(results), 1)).tolist()


def summarize_group(config: SweepConfig, alpha: float, g: float,
                    results: list[SampleResult]) -> dict:
    results = sorted(results, key=lambda r: r.index)
    good = [r for r in results if r.ok]
    failed = [r for r in results if not r.ok]
    F = np.array([r.F_max for r in good])
    ratios = np.array([detuning_ratio(r.eff) for r in good])
    deltas = np.array([r.eff.delta for r in good])
    jeffs = np.array([r.eff.j_eff for r in good])
    edges, counts = histogram(F, config.bin_width)
    reasons: dict[str, int] = {}
    for r in failed:
        reasons[r.status] = reasons.get(r.status, 0) + 1
    out = {
        "alpha": alpha,
        "g": g,
        "samples": len(results),
        "failed": len(failed),
        "failure_reasons": reasons,
        "F_max": _stats(F),
        "fraction_F_above_0.9": float(np.mean(F > 0.9)) if F.size else None,
        "detuning_ratio": _stats(ratios),
        "ratio_of_means": float(abs(deltas.mean() / jeffs.mean())) if F.size else None,
        "t_star": _stats(np.array([r.t_star for r in good])),
        "histogram": {"bin_width": config.bin_width, "edges": edges.tolist(),
                      "counts": counts.tolist()},
    }
    if config.xi_profile:
        out["xi_profile"] = mean_xi_profile(config, good)
    return out


def summarize(config: SweepConfig, results: list[SampleResult]) -> dict:
    """Order-independent aggregation: groups are built after sorting by grid position."""
    groups = []
    for a in config.alpha_list:
        for g in config.g_list:
            members = [r for r in results if r.alpha == a and r.g == g]
            groups.append(summarize_group(config, a, g, members))
    return {
        "schema_version": SCHEMA_VERSION,
        "code_version": __version__,
        "config": config.to_dict(),
        "config_hash": config.physics_hash(),
        "groups": groups,
    }


def run_group(config: SweepConfig, alpha: float, g: float, threads: int | None = None,
              indices=None) -> list[SampleResult]:
    """Run samples of one (alpha, g) cell in memory, returned in index order."""
    indices = range(config.samples) if indices is None else indices
    if threads == 1:
        return [run_sample(config, alpha, g, i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads or os.cpu_count()) as pool:
        out = list(pool.map(lambda i: run_sample(config, alpha, g, i), indices))
    return out


def _read_results(path: Path) -> list[SampleResult]:
    if not path.exists():
        return []
    out = []
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                out.append(SampleResult.from_row(row))
            except (KeyError, ValueError, TypeError):
                # a torn last line from an interrupted write
                continue
    return out


def _write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2) + "\n")
    os.replace(tmp, path)


def _sort_key(config: SweepConfig):
    def key(r: SampleResult):
        return (config.alpha_list.index(r.alpha), config.g_list.index(r.g), r.index)
    return key


def run_sweep(config: SweepConfig, threads: int | None = None, out_dir=None,
              resume: bool = True, max_new: int | None = None) -> dict:
    """Run the full (alpha, g, index) grid and persist results, summary and histograms.

    Completed rows are appended to ``results.csv`` as they finish and the
    manifest records the configuration hash, so an interrupted sweep resumes
    where it stopped.  ``max_new`` caps how many new samples run in this call
    (the sweep is then left incomplete and resumable).
    """
    out = Path(out_dir if out_dir is not None else config.outputs)
    out.mkdir(parents=True, exist_ok=True)
    results_path = out / "results.csv"
    manifest_path = out / "manifest.json"
    chash = config.physics_hash()

    done: list[SampleResult] = []
    if resume and manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        if manifest.get("config_hash") != chash:
            raise ValueError(f"{manifest_path} belongs to a different configuration; "
                             "use a fresh output directory or resume=False")
        done = _read_results(results_path)
    keys_done = {(r.alpha, r.g, r.index) for r in done}

    manifest = {"schema_version": SCHEMA_VERSION, "code_version": __version__,
                "config_hash": chash, "config": config.to_dict(), "complete": False}
    _write_json(manifest_path, manifest)

    pending = [(a, g, i) for a in config.alpha_list for g in config.g_list
               for i in range(config.samples) if (a, g, i) not in keys_done]
    if max_new is not None:
        pending = pending[:max_new]

    # rewrite so the file holds exactly the parsed rows (drops torn lines)
    with results_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for r in sorted(done, key=_sort_key(config)):
            w.writerow(r.row())

    lock = threading.Lock()
    new: list[SampleResult] = []
    with results_path.open("a", newline="") as fh, \
            ThreadPoolExecutor(max_workers=threads or os.cpu_count()) as pool:
        writer = csv.writer(fh)
        futures = [pool.submit(run_sample, config, a, g, i) for a, g, i in pending]
        for fut in as_completed(futures):
            r = fut.result()
            with lock:
                writer.writerow(r.row())
                fh.flush()
                new.append(r)
    log.info("sweep: %d samples reused, %d computed", len(done), len(new))

    results = sorted(done + new, key=_sort_key(config))
    complete = len(results) == len(config.alpha_list) * len(config.g_list) * config.samples
    with results_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for r in results:
            w.writerow(r.row())

    summary = summarize(config, results)
    summary["complete"] = complete
    _write_json(out / "summary.json", summary)
    write_histogram_csv(summary, out / "histogram.csv")
    manifest["complete"] = complete
    manifest["completed_samples"] = len(results)
    _write_json(manifest_path, manifest)
    return summary


def write_histogram_csv(summary: dict, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "g", "bin_lo", "bin_hi", "count"])
        for grp in summary["groups"]:
            edges = grp["histogram"]["edges"]
            for lo, hi, c in zip(edges[:-1], edges[1:], grp["histogram"]["counts"]):
                w.writerow([grp["alpha"], grp["g"], repr(lo), repr(hi), c])
    return path

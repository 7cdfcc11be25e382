"""Monte-Carlo experiment runner: generate, fit, score, aggregate, emit CSVs.

For every (n, sn) cell the runner draws ``mc_replicates`` independent datasets,
fits a forest on each, computes the OOB permutation importance and the
signal-to-noise estimate, and aggregates Monte-Carlo means against the
matching oracle values. Replicates are the parallel unit; every replicate
derives its own substream from (master, model, p, n, sn, replicate), so
results are independent of scheduling and the worker count.
"""

from __future__ import annotations

import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import multiprocessing as mp

import numpy as np

from . import __version__ as _pkg_version
from .datagen import LinkModel, beta_default, generate_dataset, high_dim_model
from .errors import InvalidFigureError, InvalidParameterError, PermimpError
from .forest import ForestParams, fit_forest, oob_mse, sn_estimate
from .importance import MODE_DERANGEMENT, MODES, permutation_importance
from .oracle import DEFAULT_MC_DRAWS, oracle_vector
from .randomness import SeedSpec
from .tree import TreeParams

SN_GRID = (0.5, 1.0, 3.0, 5.0)

RESULTS_COLUMNS = ("model", "n", "sn", "feature", "mc_mean", "mc_se", "oracle", "gap")
RAW_COLUMNS = ("model", "n", "sn", "replicate", "feature", "importance", "sn_hat")


@dataclass
class ExperimentConfig:
    """One simulation experiment: a single model family over an (n, sn) grid."""

    model: str
    n_values: list[int]
    sn_values: list[float]
    mc_replicates: int
    seed: int
    beta: Optional[np.ndarray] = None  # default: [2,4,2,-3,1,0,..] with p=10
    high_dim: bool = False  # p = n + 5 linear-style coefficient layout
    forest: ForestParams = field(default_factory=lambda: ForestParams(m_trees=300))
    importance_mode: str = MODE_DERANGEMENT
    compute_importance: bool = True
    oracle_draws: int = DEFAULT_MC_DRAWS
    name: str = "experiment"
    out_dir: Optional[Path] = None

    def validate(self) -> None:
        if not self.n_values or not self.sn_values:
            raise InvalidParameterError("n and sn lists must be non-empty")
        if self.mc_replicates < 1:
            raise InvalidParameterError("mc_replicates must be >= 1")
        if self.importance_mode not in MODES:
            raise InvalidParameterError(f"unknown importance mode: {self.importance_mode!r}")
        if any(n < 2 for n in self.n_values):
            raise InvalidParameterError("every n must be >= 2")
        if any(not sn > 0 for sn in self.sn_values):
            raise InvalidParameterError("every sn must be positive")
        for n in self.n_values:
            model = self.model_for(n)
            self.forest.resolve(n, model.p)  # raises on bad forest params

    def model_for(self, n: int) -> LinkModel:
        if self.high_dim:
            base = high_dim_model(n)
            return LinkModel(self.model, base.beta)
        beta = self.beta if self.beta is not None else beta_default(10)
        return LinkModel(self.model, beta)

    def master(self) -> SeedSpec:
        return SeedSpec(self.seed)


@dataclass
class CellResult:
    """Aggregated outcome of one (n, sn) cell."""

    model: str
    n: int
    sn: float
    p: int
    importances: Optional[np.ndarray]  # (MC, p) or None when skipped
    sn_hats: np.ndarray  # (MC,)
    oob_mses: np.ndarray  # (MC,)
    oracle: Optional[np.ndarray]
    error: Optional[str] = None

    @property
    def mc_mean(self) -> Optional[np.ndarray]:
        return None if self.importances is None else self.importances.mean(axis=0)

    @property
    def mc_se(self) -> Optional[np.ndarray]:
        if self.importances is None:
            return None
        mc = self.importances.shape[0]
        if mc < 2:
            return np.zeros(self.p)
        return self.importances.std(axis=0, ddof=1) / np.sqrt(mc)

    @property
    def sn_mean(self) -> float:
        return float(self.sn_hats.mean()) if self.sn_hats.size else float("nan")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cells: list[CellResult]
    meta: dict

    def cell(self, n: int, sn: float) -> CellResult:
        for c in self.cells:
            if c.n == n and c.sn == sn:
                return c
        raise KeyError((n, sn))

    def rows(self) -> list[dict]:
        """Aggregate rows: one per (n, sn, feature), plus error rows for failed cells."""
        out = []
        for c in self.cells:
            if c.error is not None:
                out.append({"model": c.model, "n": c.n, "sn": c.sn, "error": c.error})
                continue
            if c.importances is None:
                continue
            mean, se = c.mc_mean, c.mc_se
            for j in range(c.p):
                oracle = None if c.oracle is None else float(c.oracle[j])
                out.append({
                    "model": c.model, "n": c.n, "sn": c.sn, "feature": j + 1,
                    "mc_mean": float(mean[j]), "mc_se": float(se[j]),
                    "oracle": oracle,
                    "gap": None if oracle is None else float(mean[j]) - oracle,
                    "sn_mean": c.sn_mean,
                })
        return out


def _replicate_seed(master: SeedSpec, kind: str, p: int, n: int, sn: float,
                    rep: int) -> SeedSpec:
    return master.child(kind, p, n, float(sn), rep)


def _run_replicate(task: tuple) -> tuple:
    """Worker body: one (cell, replicate) computation. Top-level for pickling."""
    (cell_idx, rep, kind, beta, n, sn, forest_dict, mode, master_dict,
     compute_importance) = task
    try:
        model = LinkModel(kind, np.asarray(beta))
        master = SeedSpec.from_dict(master_dict)
        rs = _replicate_seed(master, kind, model.p, n, sn, rep)
        data = generate_dataset(model, n, sn, rs.child("data"))
        forest = fit_forest(data, ForestParams.from_dict(forest_dict), rs.child("forest"))
        imp = None
        if compute_importance:
            imp = permutation_importance(forest, data, mode=mode,
                                         seed=rs.child("importance")).per_feature
        return (cell_idx, rep, imp, sn_estimate(forest), oob_mse(forest), None)
    except PermimpError as exc:
        return (cell_idx, rep, None, float("nan"), float("nan"),
                f"{exc.slug}: {exc}")


def run_experiment(config: ExperimentConfig, threads: int | None = None,
                   progress: bool = False) -> ExperimentResult:
    """Run all cells of the experiment; a failed cell becomes an error row.

    Fully deterministic for a fixed config seed, independent of ``threads``.
    """
    config.validate()
    master = config.master()
    cells_spec = [(n, sn) for n in config.n_values for sn in config.sn_values]

    tasks = []
    for cell_idx, (n, sn) in enumerate(cells_spec):
        model = config.model_for(n)
        forest_dict = config.forest.to_dict()
        for rep in range(config.mc_replicates):
            tasks.append((cell_idx, rep, config.model, model.beta, n, sn,
                          forest_dict, config.importance_mode, master.to_dict(),
                          config.compute_importance))

    t_start = time.perf_counter()
    results: dict[tuple[int, int], tuple] = {}
    threads = resolve_threads(threads)
    if threads > 1 and len(tasks) > 1:
        ctx = mp.get_context("fork")
        with ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as pool:
            for res in pool.map(_run_replicate, tasks, chunksize=1):
                results[(res[0], res[1])] = res
                if progress:
                    print(f"  replicate {len(results)}/{len(tasks)} done", file=sys.stderr)
    else:
        for task in tasks:
            res = _run_replicate(task)
            results[(res[0], res[1])] = res
            if progress:
                print(f"  replicate {len(results)}/{len(tasks)} done", file=sys.stderr)

    oracle_cache: dict[tuple[str, int], np.ndarray] = {}
    cells: list[CellResult] = []
    for cell_idx, (n, sn) in enumerate(cells_spec):
        model = config.model_for(n)
        p = model.p
        per_rep = [results[(cell_idx, rep)] for rep in range(config.mc_replicates)]
        errors = [r[5] for r in per_rep if r[5] is not None]
        if errors:
            cells.append(CellResult(config.model, n, sn, p, None,
                                    np.empty(0), np.empty(0), None, error=errors[0]))
            continue
        sn_hats = np.array([r[3] for r in per_rep])
        oob_mses = np.array([r[4] for r in per_rep])
        imp = None
        oracle = None
        if config.compute_importance:
            imp = np.vstack([r[2] for r in per_rep])
            key = (config.model, p)
            if key not in oracle_cache:
                oracle_cache[key] = oracle_vector(model, draws=config.oracle_draws)
            oracle = oracle_cache[key]
        cells.append(CellResult(config.model, n, sn, p, imp, sn_hats, oob_mses, oracle))

    meta = {
        "name": config.name,
        "seed": config.seed,
        "model": config.model,
        "high_dim": config.high_dim,
        "n": list(config.n_values),
        "sn": [float(s) for s in config.sn_values],
        "mc_replicates": config.mc_replicates,
        "importance_mode": config.importance_mode,
        "compute_importance": config.compute_importance,
        "forest": config.forest.to_dict(),
        "resolved_forest": {
            str(n): config.forest.resolve(n, config.model_for(n).p).to_dict()
            for n in config.n_values
        },
        "failed_cells": [
            {"n": c.n, "sn": c.sn, "error": c.error} for c in cells if c.error
        ],
        "threads": threads,
        "runtime_seconds": time.perf_counter() - t_start,
        "versions": _versions(),
    }
    result = ExperimentResult(config=config, cells=cells, meta=meta)
    if config.out_dir is not None:
        write_result_bundle([result], Path(config.out_dir))
    return result


def resolve_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("PERMIMP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidParameterError(f"PERMIMP_THREADS is not an integer: {env!r}")
    return os.cpu_count() or 1


def _versions() -> dict:
    import numba

    return {
        "permimp": _pkg_version,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "numba": numba.__version__,
    }


# ---------------------------------------------------------------------------
# CSV / metadata writers (atomic, byte-deterministic for fixed inputs)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_results_csv(results: list[ExperimentResult], path: Path) -> None:
    lines = [",".join(RESULTS_COLUMNS)]
    for result in results:
        for row in result.rows():
            if "error" in row:
                continue
            lines.append(",".join(_fmt(row[c]) for c in RESULTS_COLUMNS))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_raw_csv(results: list[ExperimentResult], path: Path) -> None:
    lines = [",".join(RAW_COLUMNS)]
    for result in results:
        for c in result.cells:
            if c.error is not None:
                continue
            for rep in range(c.sn_hats.size):
                sn_hat = repr(float(c.sn_hats[rep]))
                if c.importances is None:
                    lines.append(",".join([c.model, str(c.n), repr(float(c.sn)),
                                           str(rep), "", "", sn_hat]))
                    continue
                for j in range(c.p):
                    lines.append(",".join([
                        c.model, str(c.n), repr(float(c.sn)), str(rep), str(j + 1),
                        repr(float(c.importances[rep, j])), sn_hat,
                    ]))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_sn_table_csv(results: list[ExperimentResult], path: Path) -> None:
    lines = ["model,n,sn,sn_mean,sn_se"]
    for result in results:
        for c in result.cells:
            if c.error is not None:
                continue
            mc = c.sn_hats.size
            se = 0.0 if mc < 2 else float(c.sn_hats.std(ddof=1) / np.sqrt(mc))
            lines.append(",".join([c.model, str(c.n), repr(float(c.sn)),
                                   repr(c.sn_mean), repr(se)]))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_result_bundle(results: list[ExperimentResult], out_dir: Path,
                        sn_table: bool = False) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_results_csv(results, out_dir / "results.csv")
    write_raw_csv(results, out_dir / "raw.csv")
    if sn_table:
        write_sn_table_csv(results, out_dir / "sn_table.csv")
    meta = [r.meta for r in results]
    _atomic_write(out_dir / "meta.json",
                  json.dumps(meta[0] if len(meta) == 1 else meta, indent=2,
                             sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# TOML configuration


def config_from_toml(path: str | Path) -> ExperimentConfig:
    """Load an ExperimentConfig from a TOML file; see README for the schema."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python 3.10
        import tomli as tomllib
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    try:
        exp = doc["experiment"]
        forest_doc = doc.get("forest", {})
        tree = TreeParams(
            v_try=(int(forest_doc["v_try"]) if forest_doc.get("v_try") else None),
            min_leaf_size=int(forest_doc.get("min_leaf_size", 5)),
            max_leaves=(int(forest_doc["max_leaves"])
                        if forest_doc.get("max_leaves") else None),
        )
        forest = ForestParams(
            m_trees=int(forest_doc.get("m_trees", 300)),
            scheme=forest_doc.get("scheme", "without_replacement"),
            a_n=(int(forest_doc["a_n"]) if forest_doc.get("a_n") else None),
            tree=tree,
        )
        config = ExperimentConfig(
            model=exp["model"],
            n_values=[int(n) for n in exp["n"]],
            sn_values=[float(s) for s in exp["sn"]],
            mc_replicates=int(exp["mc_replicates"]),
            seed=int(exp["seed"]),
            beta=(np.asarray(exp["beta"], dtype=float) if "beta" in exp else None),
            high_dim=bool(exp.get("high_dim", False)),
            forest=forest,
            importance_mode=exp.get("importance_mode", MODE_DERANGEMENT),
            compute_importance=bool(exp.get("compute_importance", True)),
            oracle_draws=int(exp.get("oracle_draws", DEFAULT_MC_DRAWS)),
            name=exp.get("name", Path(path).stem),
            out_dir=(Path(exp["out_dir"]) if "out_dir" in exp else None),
        )
    except KeyError as exc:
        raise InvalidParameterError(f"config is missing required key: {exc}") from None
    config.validate()
    return config


# ---------------------------------------------------------------------------
# Paper-experiment registry


_FIGURE_MODELS = {
    "fig1": "linear", "fig2": "polynomial", "fig3": "trigonometric",
    "fig4": "non_continuous",
    "supp1": "linear", "supp2": "polynomial", "supp3": "trigonometric",
    "supp4": "non_continuous",
    "supp5": "linear", "supp6": "polynomial", "supp7": "trigonometric",
    "supp8": "non_continuous",
}

FIGURE_IDS = tuple(_FIGURE_MODELS) + ("supp_table1",)

_FULL_BUDGET = 1000  # the study ran MC = M = 1,000


def _figure_configs(figure_id: str, scale: float, seed: int) -> tuple[list[ExperimentConfig], bool]:
    if not (0.0 < scale <= 1.0):
        raise InvalidParameterError(f"scale must lie in (0, 1], got {scale}")
    budget = max(1, round(_FULL_BUDGET * scale))
    forest = ForestParams(m_trees=budget)

    def base(model: str, n_values: list[int], high_dim: bool,
             compute_importance: bool = True) -> ExperimentConfig:
        return ExperimentConfig(
            model=model, n_values=n_values, sn_values=list(SN_GRID),
            mc_replicates=budget, seed=seed, high_dim=high_dim, forest=forest,
            compute_importance=compute_importance,
            name=f"{figure_id}-{model}" if figure_id == "supp_table1" else figure_id,
        )

    if figure_id in ("fig1", "fig2", "fig3", "fig4"):
        return [base(_FIGURE_MODELS[figure_id], [50, 1000], False)], False
    if figure_id in ("supp1", "supp2", "supp3", "supp4"):
        return [base(_FIGURE_MODELS[figure_id], [100, 500], False)], False
    if figure_id in ("supp5", "supp6", "supp7", "supp8"):
        return [base(_FIGURE_MODELS[figure_id], [50, 100, 500, 1000], True)], False
    if figure_id == "supp_table1":
        models = ("linear", "polynomial", "trigonometric", "non_continuous")
        return [base(m, [50, 100, 500, 1000], False, compute_importance=False)
                for m in models], True
    raise InvalidFigureError(f"unknown figure id: {figure_id!r} "
                             f"(known: {', '.join(FIGURE_IDS)})")


def reproduce(figure_id: str, scale: float, seed: int,
              out_dir: str | Path | None = None, threads: int | None = None,
              progress: bool = False) -> list[ExperimentResult]:
    """Run a named paper experiment at a scaled (MC, M) budget and emit its CSVs."""
    configs, sn_table = _figure_configs(figure_id, scale, seed)
    results = [run_experiment(cfg, threads=threads, progress=progress)
               for cfg in configs]
    if out_dir is not None:
        write_result_bundle(results, Path(out_dir), sn_table=sn_table)
    return results

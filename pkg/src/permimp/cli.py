"""Command-line surface: train, predict, importance, oracle, simulate, reproduce.

Every randomized subcommand requires an explicit --seed; there is no silent
entropy. Data outputs go to stdout unless --out/--out-dir is given. Exit
codes: 0 ok, 2 input/parameter error, 3 dataset-fingerprint mismatch,
4 unsupported scheme/mode, 5 internal error. Failures print one
machine-parseable line: ``error: <slug>: <message>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import errors
from .datagen import LINK_KINDS, LinkModel, load_dataset_csv
from .forest import (
    ForestParams,
    fit_forest,
    load_model,
    oob_mse,
    residual_variance,
    save_model,
    sn_estimate,
)
from .harness import config_from_toml, reproduce, resolve_threads, run_experiment
from .importance import MODE_DERANGEMENT, MODES, importance_with_oracle, permutation_importance, report_to_csv
from .oracle import DEFAULT_MC_DRAWS, oracle_value
from .randomness import SCHEMES, SeedSpec
from .tree import TreeParams

_EXIT_CODES = {
    "invalid-parameter": 2,
    "invalid-input": 2,
    "missing-provenance": 2,
    "not-additive": 2,
    "invalid-figure": 2,
    "insufficient-oob": 2,
    "degenerate-residuals": 2,
    "wrong-dataset": 3,
    "unsupported-scheme": 4,
    "no-derangement-exists": 4,
}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_data(path: str):
    prov = Path(path).with_suffix(".provenance.json")
    return load_dataset_csv(path, provenance_path=prov if prov.exists() else None)


def _forest_params(args) -> ForestParams:
    tree = TreeParams(v_try=args.v_try, min_leaf_size=args.min_leaf,
                      max_leaves=args.max_leaves)
    return ForestParams(m_trees=args.m_trees, scheme=args.scheme, a_n=args.a_n,
                        tree=tree)


def _cmd_train(args) -> int:
    data = _load_data(args.data)
    model = fit_forest(data, _forest_params(args), SeedSpec(args.seed))
    save_model(model, args.out)
    print(f"trees={model.m_trees} n={model.n} p={model.p} "
          f"scheme={model.params.scheme} a_n={model.params.a_n} "
          f"v_try={model.params.tree.v_try} min_leaf={model.params.tree.min_leaf_size}")
    # degenerate inputs (e.g. a 2-row toy set) can leave the OOB estimators
    # undefined; the model file is still valid, so only the summary degrades
    for label, fn in (("oob_mse", oob_mse), ("sigma2_rf", residual_variance),
                      ("sn_hat", sn_estimate)):
        try:
            print(f"{label}={fn(model)!r}")
        except errors.PermimpError as exc:
            print(f"{label}=unavailable ({exc.slug})")
    return 0


def _cmd_predict(args) -> int:
    data = _load_data(args.data)
    model = load_model(args.model, data=data)
    from .forest import predict

    preds = predict(model, data.features)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["prediction"])
    for v in preds:
        writer.writerow([repr(float(v))])
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_importance(args) -> int:
    data = _load_data(args.data)
    model = load_model(args.model, data=data)
    report = permutation_importance(model, data, mode=args.mode,
                                    seed=SeedSpec(args.seed))
    if data.provenance is not None:
        report = importance_with_oracle(report, data.provenance.model)
    _emit(report_to_csv(report), args.out)
    return 0


def _cmd_oracle(args) -> int:
    beta = np.asarray([float(v) for v in args.beta.split(",")], dtype=float)
    model = LinkModel(args.model_kind, beta)
    labels = range(1, model.p + 1) if args.all else [args.j]
    if not args.all and args.j is None:
        raise errors.InvalidParameterError("pass --j J or --all")
    seed = None if args.seed is None else SeedSpec(args.seed)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["feature", "value", "method", "draws", "std_error"])
    for j in labels:
        ov = oracle_value(model, j, draws=args.mc_draws,
                          seed=None if seed is None else seed.child(j))
        writer.writerow([j, repr(ov.value), ov.method,
                         "" if ov.draws is None else ov.draws,
                         "" if ov.std_error is None else repr(ov.std_error)])
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_simulate(args) -> int:
    config = config_from_toml(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out_dir is not None:
        config.out_dir = Path(args.out_dir)
    if config.out_dir is None:
        raise errors.InvalidParameterError("no output directory (config out_dir or --out-dir)")
    result = run_experiment(config, threads=resolve_threads(args.threads),
                            progress=args.progress)
    print(f"wrote {config.out_dir}/results.csv, raw.csv, meta.json "
          f"({len(result.cells)} cells, {config.mc_replicates} replicates each)")
    return 0


def _cmd_reproduce(args) -> int:
    results = reproduce(args.figure, args.scale, seed=args.seed,
                        out_dir=args.out_dir,
                        threads=resolve_threads(args.threads),
                        progress=args.progress)
    cells = sum(len(r.cells) for r in results)
    print(f"wrote {args.out_dir}: {cells} cells at scale {args.scale}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permimp",
        description="Regression random forests with OOB permutation importance",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="fit a forest on a x1..xp,y CSV")
    train.add_argument("--data", required=True, help="training CSV (x1..xp,y)")
    train.add_argument("--out", required=True, help="output model.json path")
    train.add_argument("--seed", required=True, type=int)
    train.add_argument("--m-trees", type=int, default=300)
    train.add_argument("--scheme", choices=SCHEMES, default="without_replacement")
    train.add_argument("--a-n", type=int, default=None,
                       help="subsample size (default ceil(2n/3))")
    train.add_argument("--v-try", type=int, default=None,
                       help="features tried per node (default max(1, p//3))")
    train.add_argument("--min-leaf", type=int, default=5)
    train.add_argument("--max-leaves", type=int, default=None)
    train.set_defaults(func=_cmd_train)

    pred = sub.add_parser("predict", help="predict every row of a CSV")
    pred.add_argument("--model", required=True)
    pred.add_argument("--data", required=True)
    pred.add_argument("--out", default=None)
    pred.set_defaults(func=_cmd_predict)

    imp = sub.add_parser("importance", help="OOB permutation importance report")
    imp.add_argument("--model", required=True)
    imp.add_argument("--data", required=True)
    imp.add_argument("--mode", choices=MODES, default=MODE_DERANGEMENT)
    imp.add_argument("--seed", required=True, type=int)
    imp.add_argument("--out", default=None)
    imp.set_defaults(func=_cmd_importance)

    orc = sub.add_parser("oracle", help="theoretical importance values")
    orc.add_argument("--model-kind", choices=LINK_KINDS, required=True)
    orc.add_argument("--beta", required=True, help="comma-separated coefficients")
    orc.add_argument("--j", type=int, default=None, help="1-based feature label")
    orc.add_argument("--all", action="store_true", help="all features 1..p")
    orc.add_argument("--mc-draws", type=int, default=DEFAULT_MC_DRAWS)
    orc.add_argument("--seed", type=int, default=None,
                     help="MC substream override (default: fixed calibration stream)")
    orc.add_argument("--out", default=None)
    orc.set_defaults(func=_cmd_oracle)

    sim = sub.add_parser("simulate", help="run a TOML-configured MC experiment")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out-dir", default=None)
    sim.add_argument("--seed", type=int, default=None, help="override config seed")
    sim.add_argument("--threads", type=int, default=None,
                     help="worker processes (default PERMIMP_THREADS or all cores)")
    sim.add_argument("--progress", action="store_true")
    sim.set_defaults(func=_cmd_simulate)

    rep = sub.add_parser("reproduce", help="run a named paper experiment, scaled")
    rep.add_argument("--figure", required=True,
                     help="fig1..fig4, supp1..supp8, or supp_table1")
    rep.add_argument("--scale", type=float, required=True,
                     help="fraction of the full MC=M=1000 budget, in (0, 1]")
    rep.add_argument("--out-dir", required=True)
    rep.add_argument("--seed", required=True, type=int)
    rep.add_argument("--threads", type=int, default=None)
    rep.add_argument("--progress", action="store_true")
    rep.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except errors.PermimpError as exc:
        print(f"error: {exc.slug}: {exc}", file=sys.stderr)
        return _EXIT_CODES.get(exc.slug, 5)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: internal: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())

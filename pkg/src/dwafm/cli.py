"""Operator entry point.

Subcommands: train, eval, baseline, ablate, gradcheck, export-graph,
bench-temporal. Exit codes: 0 ok, 2 config error, 3 data error,
4 numerical fault, 5 gradient-check failure.
"""

from __future__ import annotations

import argparse
import os
import sys

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_CHECK = 5


def _build_parser():
    parser = argparse.ArgumentParser(prog="dwafm")
    parser.add_argument("--threads", type=int, default=0, help="cap BLAS threads")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, checkpoint=False):
        p.add_argument("--config", default=None, help="YAML config file")
        p.add_argument("--data-dir", default=None, help="converted dataset dir")
        p.add_argument("--out-dir", default=None)
        p.add_argument(
            "--set", dest="overrides", action="append", default=[],
            metavar="KEY=VALUE", help="config override (repeatable)",
        )
        p.add_argument(
            "--synthetic", action="store_true",
            help="use the built-in synthetic dataset instead of --data-dir",
        )
        p.add_argument("--synthetic-nodes", type=int, default=8)
        p.add_argument("--synthetic-length", type=int, default=1000)
        if checkpoint:
            p.add_argument("--checkpoint", required=True)

    common(sub.add_parser("train", help="train a model"))
    common(sub.add_parser("eval", help="evaluate a checkpoint"), checkpoint=True)
    common(sub.add_parser("baseline", help="HI baseline metrics"))
    ablate = sub.add_parser("ablate", help="train every ablation variant")
    common(ablate)
    ablate.add_argument("--variants", default=None, help="comma list, default all")
    common(sub.add_parser("gradcheck", help="finite-difference gradient suite"))
    export = sub.add_parser("export-graph", help="dump learned A_g slices as CSV")
    common(export, checkpoint=True)
    export.add_argument(
        "--select", action="append", default=["0:0"],
        metavar="SAMPLE:TIMESTEP", help="which (sample, timestep) slices",
    )
    common(sub.add_parser("bench-temporal", help="compare temporal modules"))
    return parser


def _load_config(args):
    from .config import RunConfig, parse_overrides

    overrides = parse_overrides(args.overrides)
    if args.data_dir:
        overrides["data_dir"] = args.data_dir
    if args.out_dir:
        overrides["out_dir"] = args.out_dir
    if args.config:
        return RunConfig.from_file(args.config, overrides)
    return RunConfig.from_dict(overrides)


def _load_dataset(args, config):
    from .data import load_dataset_dir, prepare_dataset
    from .synthetic import generate_synthetic

    if args.synthetic:
        series, graph = generate_synthetic(
            n_nodes=args.synthetic_nodes,
            length=args.synthetic_length,
            seed=config.seed,
        )
        return prepare_dataset(series, graph, config.t_in, config.t_out)
    if not config.data_dir:
        from .config import ConfigError

        raise ConfigError("no dataset: pass --data-dir or --synthetic")
    return load_dataset_dir(config.data_dir, config.t_in, config.t_out)


def _snapshot(config, out_dir):
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config.save(out / "config.resolved.yaml")


def cmd_train(args):
    import yaml

    from .model import make_model
    from .training import train

    config = _load_config(args)
    dataset = _load_dataset(args, config)
    _snapshot(config, config.out_dir)
    model = make_model(config, dataset.graph, dataset.stats, dataset.n_day)
    _, rows, test = train(model, dataset, config, config.out_dir)
    print(yaml.safe_dump({"test": test.to_dict()}, sort_keys=False))
    return EXIT_OK


def cmd_eval(args):
    import yaml

    from .model import DwafmModel
    from .training import evaluate

    config = _load_config(args)
    dataset = _load_dataset(args, config)
    model = DwafmModel.load(args.checkpoint, dataset.graph)
    report = evaluate(model, dataset.test, model.config.batch_size, per_horizon=True)
    print(yaml.safe_dump({"test": report.to_dict()}, sort_keys=False))
    return EXIT_OK


def cmd_baseline(args):
    import yaml

    from .training import hi_baseline

    config = _load_config(args)
    dataset = _load_dataset(args, config)
    report = hi_baseline(dataset.test, dataset.stats, per_horizon=True)
    print(yaml.safe_dump({"hi_test": report.to_dict()}, sort_keys=False))
    return EXIT_OK


def cmd_ablate(args):
    from dataclasses import replace
    from pathlib import Path

    import yaml

    from .config import VARIANTS
    from .model import make_model
    from .training import train

    config = _load_config(args)
    dataset = _load_dataset(args, config)
    variants = (
        args.variants.split(",") if args.variants else list(VARIANTS)
    )
    results = {}
    for variant in variants:
        vcfg = replace(config, variant=variant).validate()
        out = Path(config.out_dir) / variant
        _snapshot(vcfg, out)
        model = make_model(vcfg, dataset.graph, dataset.stats, dataset.n_day)
        _, rows, test = train(model, dataset, vcfg, out)
        results[variant] = {
            "val_mae": min(r["val_mae"] for r in rows),
            "test": test.to_dict(),
        }
        print(f"{variant}: val_mae={results[variant]['val_mae']:.4f} "
              f"test_mae={test.mae:.4f}")
    report_path = Path(config.out_dir) / "ablation_report.yaml"
    report_path.write_text(yaml.safe_dump(results, sort_keys=True))
    print(f"wrote {report_path}")
    return EXIT_OK


def cmd_gradcheck(args):
    from .config import VARIANTS
    from .training import gradcheck_variant

    failed = False
    for variant in VARIANTS:
        ok, max_err, _ = gradcheck_variant(variant)
        status = "PASS" if ok else "FAIL"
        print(f"gradcheck {variant}: {status} (max rel err {max_err:.3e})")
        failed = failed or not ok
    return EXIT_CHECK if failed else EXIT_OK


def cmd_export_graph(args):
    import numpy as np

    from .data import collate
    from .embedding import export_dynamic_graph
    from .model import DwafmModel

    config = _load_config(args)
    dataset = _load_dataset(args, config)
    model = DwafmModel.load(args.checkpoint, dataset.graph)
    selections = []
    for spec_str in args.select:
        b, t = spec_str.split(":")
        selections.append((int(b), int(t)))
    max_sample = max(b for b, _ in selections)
    batch = collate(dataset.test[: max_sample + 1])
    _, dyn = model.forward(batch, training=False, return_graph=True)
    if dyn is None:
        print("ERROR 2 this variant has no dynamic graph", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = config.out_dir
    files = export_dynamic_graph(np.asarray(dyn.a_g.data), selections, out_dir)
    for f in files:
        print(f)
    return EXIT_OK


def cmd_bench_temporal(args):
    from dataclasses import replace
    from pathlib import Path

    import yaml

    from .config import TEMPORAL_KINDS
    from .model import make_model
    from .training import train

    config = _load_config(args)
    dataset = _load_dataset(args, config)
    results = {}
    for kind in TEMPORAL_KINDS:
        kcfg = replace(config, temporal_kind=kind).validate()
        out = Path(config.out_dir) / f"temporal_{kind}"
        _snapshot(kcfg, out)
        model = make_model(kcfg, dataset.graph, dataset.stats, dataset.n_day)
        _, rows, test = train(model, dataset, kcfg, out)
        results[kind] = test.to_dict()
        print(
            f"{kind}: mae={test.mae:.4f} rmse={test.rmse:.4f} "
            f"mape={test.mape_pct:.4f} s/epoch={test.wall_seconds_per_epoch:.2f}"
        )
    report_path = Path(config.out_dir) / "temporal_benchmark.yaml"
    report_path.write_text(yaml.safe_dump(results, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "baseline": cmd_baseline,
    "ablate": cmd_ablate,
    "gradcheck": cmd_gradcheck,
    "export-graph": cmd_export_graph,
    "bench-temporal": cmd_bench_temporal,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:  # map failures onto the documented exit codes
        from .config import ConfigError
        from .data import DataError
        from .training import NumericalFault

        if isinstance(exc, ConfigError):
            code = EXIT_CONFIG
        elif isinstance(exc, (DataError, FileNotFoundError)):
            code = EXIT_DATA
        elif isinstance(exc, (NumericalFault, FloatingPointError)):
            code = EXIT_NUMERIC
        else:
            raise
        print(f"ERROR {code} {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())

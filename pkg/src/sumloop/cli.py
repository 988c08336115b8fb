"""Command-line interface.

    sumloop run    --config run.yaml [--resume [RUN_ID]]
    sumloop grid   --spec grid.yaml [--workers N] [--dry-run]
    sumloop eval   --predictions preds.ndjson --test test.ndjson [--micro]
    sumloop max    --test test.ndjson
    sumloop synth  --n 1100 --seed 1 --out corpus.ndjson
    sumloop serve  --run RUN_ID --port 8765
    sumloop report --results results.ndjson --out results.csv

Exit codes: 0 success, 1 configuration/validation error, 2 adapter or
protocol error, 3 run suspended awaiting annotation. Prediction files
are newline-delimited JSON objects with ``id`` and ``summary`` fields.
The checkpoint root defaults to ``./runs`` and can be set with the
SUMLOOP_CHECKPOINT_ROOT environment variable or ``--checkpoint-root``.
"""

from __future__ import annotations

import argparse
import json
import logging
import statistics
import sys
from pathlib import Path

from .annotation import AnnotationError
from .corpus import CorpusError, load_corpus, write_corpus
from .loop_engine import ConfigError, RunSuspended
from .metrics import (
    ConceptLexicon,
    EvaluationError,
    LexiconError,
    MetricsReport,
    NegexRules,
    RulesError,
    evaluate,
    theoretical_max,
)
from .model_adapter import AdapterError
from .runstate import RunDir, default_checkpoint_root
from .strategies import StrategyError
from .wire import ProtocolError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ADAPTER = 2
EXIT_SUSPENDED = 3

logger = logging.getLogger("sumloop")


def _load_lexicon(path: str | None) -> ConceptLexicon:
    if path:
        return ConceptLexicon.load(path)
    from .synth import default_lexicon

    return default_lexicon()


def _load_rules(path: str | None) -> NegexRules:
    return NegexRules.load(path) if path else NegexRules.default()


def _print_report(report: MetricsReport, label: str) -> None:
    print(f"{label} ({report.aggregation}, n={report.n_examples}):")
    print(f"  concept_f1      {report.concept_f1:.6f}")
    print(f"  affirmation_f1  {report.affirmation_f1:.6f}")
    print(f"  rouge_l_f1      {report.rouge_l_f1:.6f}")


def _write_per_example_csv(report: MetricsReport, path: str) -> None:
    lines = ["sample_id,concept_f1,affirmation_f1,rouge_l_f1"]
    lines += [
        f"{e.sample_id},{e.concept_f1!r},{e.affirmation_f1!r},{e.rouge_l_f1!r}"
        for e in report.per_example
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- subcommands ------------------------------------------------------------


def cmd_run(args) -> int:
    from .config import load_run_config
    from .results import append_result

    config, paths = load_run_config(args.config, args.checkpoint_root)
    if args.resume is not None and args.resume != "":
        config = _override_run_id(config, args.resume)
    resume = args.resume is not None

    run_dir = RunDir(paths.checkpoint_root, config.run_id)
    state = run_dir.read_state()
    if resume and state is not None and state.get("status") == "complete":
        print(f"run {config.run_id!r} is already complete; nothing to do")
        return EXIT_OK

    engine = paths.load_engine()
    result = engine.run_experiment(config, resume=resume)
    append_result(paths.results, result)
    final = result.per_iteration[-1]
    print(
        f"run {config.run_id!r} complete: {len(result.per_iteration)} entries, "
        f"final concept_f1 {final['concept_f1']:.4f}, "
        f"rouge_l_f1 {final['rouge_l_f1']:.4f} "
        f"(results in {paths.results})"
    )
    return EXIT_OK


def _override_run_id(config, run_id: str):
    from dataclasses import replace

    return replace(config, run_id=run_id)


def cmd_grid(args) -> int:
    from .config import load_grid_spec
    from .grid import decomposition, expand_grid, grid_experiments, run_campaign

    spec, paths = load_grid_spec(args.spec, args.checkpoint_root)
    runs = expand_grid(spec)
    print(decomposition(spec))
    if args.dry_run:
        for run in runs:
            print(
                f"{run.run_id} iter{run.iteration} "
                f"(dropout={run.dropout:g}, l0={run.l0_size}, "
                f"pl={run.pl.value}, hl={run.hl.value})"
            )
        print(f"{len(runs)} unique training runs")
        return EXIT_OK

    configs = grid_experiments(spec)
    records = run_campaign(configs, paths, workers=args.workers)
    csv_path = paths.results.with_suffix(".csv")
    print(f"campaign complete: {len(records)} runs, CSV projection at {csv_path}")
    return EXIT_OK


def _load_predictions(path: str) -> list[tuple[str, str]]:
    pairs = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                pairs.append((record["id"], record["summary"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise EvaluationError(f"{path}: line {lineno}: bad prediction record ({exc})")
    return pairs


def cmd_eval(args) -> int:
    test_set = load_corpus(args.test)
    report = evaluate(
        _load_predictions(args.predictions),
        test_set,
        _load_lexicon(args.lexicon),
        _load_rules(args.negex),
        aggregation="micro" if args.micro else "macro",
        concept_source=args.concept_source,
    )
    _print_report(report, "evaluation")
    if args.per_example_csv:
        _write_per_example_csv(report, args.per_example_csv)
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_max(args) -> int:
    test_set = load_corpus(args.test)
    report = theoretical_max(
        test_set,
        _load_lexicon(args.lexicon),
        _load_rules(args.negex),
        aggregation="micro" if args.micro else "macro",
        concept_source=args.concept_source,
    )
    _print_report(report, "theoretical maximum")
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synth import generate_corpus

    lexicon = _load_lexicon(args.lexicon)
    corpus = generate_corpus(
        n=args.n,
        seed=args.seed,
        lexicon=lexicon,
        zero_concept_fraction=args.zero_fraction,
        max_concepts=args.max_concepts,
        id_prefix=args.prefix,
    )
    write_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} samples to {args.out}")
    if args.test_n:
        test = generate_corpus(
            n=args.test_n,
            seed=args.seed + 1,
            lexicon=lexicon,
            zero_concept_fraction=args.zero_fraction,
            max_concepts=args.max_concepts,
            id_prefix="test",
        )
        write_corpus(test, args.test_out)
        print(f"wrote {len(test)} test samples to {args.test_out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .annotation import serve

    ui_dir = args.ui
    if ui_dir is None:
        bundled = Path(__file__).parent.parent.parent / "frontend" / "dist"
        ui_dir = bundled if bundled.is_dir() else None
    root = args.checkpoint_root or default_checkpoint_root()
    print(f"serving annotation API for run {args.run!r} on http://127.0.0.1:{args.port}")
    serve(root, args.run, args.port, ui_dir)
    return EXIT_OK


def cmd_report(args) -> int:
    from .results import load_results, report_best_dropout, write_csv

    records = load_results(args.results)
    if not records:
        print(f"no completed runs in {args.results}", file=sys.stderr)
        return EXIT_CONFIG
    write_csv(records, args.out)
    print(f"wrote {args.out}")

    reported = report_best_dropout(records, per_metric=args.per_metric)
    if args.best_out:
        Path(args.best_out).write_text(
            json.dumps(reported, ensure_ascii=False, sort_keys=True, indent=1),
            encoding="utf-8",
        )
        print(f"wrote {args.best_out}")

    if args.saturation_out:
        _write_saturation_csv(reported, args.saturation_out)
        print(f"wrote {args.saturation_out}")
    if args.plot:
        _plot_saturation(reported, args.plot)
        print(f"wrote {args.plot}")
    return EXIT_OK


def _saturation_rows(reported: list[dict]) -> list[dict]:
    buckets: dict[tuple, dict[str, list[float]]] = {}
    for group in reported:
        pl = group["group"]["pl"]
        for entry in group["per_iteration"]:
            key = (pl, entry["n_labeled"])
            bucket = buckets.setdefault(key, {"concept": [], "affirmation": [], "rouge": []})
            bucket["concept"].append(entry["concept_f1"])
            bucket["affirmation"].append(entry["affirmation_f1"])
            bucket["rouge"].append(entry["rouge_l_f1"])
    rows = []
    for (pl, n_train), bucket in sorted(buckets.items()):
        row = {"pl": pl, "n_train_points": n_train, "n_runs": len(bucket["concept"])}
        for name, values in bucket.items():
            row[f"mean_{name}_f1"] = statistics.fmean(values)
            row[f"std_{name}_f1"] = statistics.pstdev(values) if len(values) > 1 else 0.0
        rows.append(row)
    return rows


def _write_saturation_csv(reported: list[dict], path: str) -> None:
    rows = _saturation_rows(reported)
    columns = [
        "pl", "n_train_points", "n_runs",
        "mean_concept_f1", "std_concept_f1",
        "mean_affirmation_f1", "std_affirmation_f1",
        "mean_rouge_f1", "std_rouge_f1",
    ]
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in columns))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _plot_saturation(reported: list[dict], path: str) -> None:
    try:
        import matplotlib
    except ImportError:
        raise ConfigError(
            "plot output needs matplotlib (pip install 'sumloop[plot]'); "
            "the CSV outputs carry the same data"
        )
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = _saturation_rows(reported)
    metrics = [("mean_concept_f1", "concept F1"), ("mean_affirmation_f1", "affirmation F1"),
               ("mean_rouge_f1", "ROUGE-L F1")]
    fig, axes = plt.subplots(1, 3, figsize=(14, 4), sharex=True)
    for ax, (column, label) in zip(axes, metrics):
        for pl in sorted({r["pl"] for r in rows}):
            series = [r for r in rows if r["pl"] == pl]
            series.sort(key=lambda r: r["n_train_points"])
            ax.plot(
                [r["n_train_points"] for r in series],
                [r[column] for r in series],
                marker="o",
                label=f"pl={pl}",
            )
        ax.set_xlabel("training points")
        ax.set_ylabel(label)
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sumloop",
        description="Iterative labeling loops and evaluation for conversation summarization.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Execute one experiment from a config file.")
    run.add_argument("--config", required=True, help="Run config (YAML).")
    run.add_argument(
        "--resume", nargs="?", const="", default=None, metavar="RUN_ID",
        help="Continue a suspended or crashed run (optionally overriding the run id).",
    )
    run.add_argument("--checkpoint-root", help="Checkpoint directory root.")
    run.set_defaults(func=cmd_run)

    grid = sub.add_parser("grid", help="Expand and execute an experiment grid.")
    grid.add_argument("--spec", required=True, help="Grid spec (YAML).")
    grid.add_argument("--workers", type=int, default=1, help="Parallel run workers.")
    grid.add_argument("--dry-run", action="store_true",
                      help="Print the deduplicated training-run list and count; write nothing.")
    grid.add_argument("--checkpoint-root", help="Checkpoint directory root.")
    grid.set_defaults(func=cmd_grid)

    ev = sub.add_parser("eval", help="Score a prediction file against a test set.")
    ev.add_argument("--predictions", required=True)
    ev.add_argument("--test", required=True)
    ev.add_argument("--lexicon")
    ev.add_argument("--negex")
    ev.add_argument("--micro", action="store_true", help="Micro (summed) aggregation.")
    ev.add_argument("--concept-source", choices=("reference", "conversation"),
                    default="reference",
                    help="Text the reference concept set is extracted from.")
    ev.add_argument("--per-example-csv", help="Also write per-example scores.")
    ev.add_argument("--json", action="store_true", help="Print the aggregate as JSON.")
    ev.set_defaults(func=cmd_eval)

    mx = sub.add_parser("max", help="Theoretical metric maxima of a test set.")
    mx.add_argument("--test", required=True)
    mx.add_argument("--lexicon")
    mx.add_argument("--negex")
    mx.add_argument("--micro", action="store_true")
    mx.add_argument("--concept-source", choices=("reference", "conversation"),
                    default="reference")
    mx.add_argument("--json", action="store_true")
    mx.set_defaults(func=cmd_max)

    synth = sub.add_parser("synth", help="Generate a synthetic conversation corpus.")
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--out", required=True)
    synth.add_argument("--zero-fraction", type=float, default=0.0,
                       help="Exact fraction of samples with no lexicon concepts.")
    synth.add_argument("--max-concepts", type=int, default=3)
    synth.add_argument("--prefix", default="synth")
    synth.add_argument("--lexicon")
    synth.add_argument("--test-n", type=int, default=0, help="Also generate a test split.")
    synth.add_argument("--test-out", default="test.ndjson")
    synth.set_defaults(func=cmd_synth)

    serve = sub.add_parser("serve", help="Serve the annotation API (and UI) for a run.")
    serve.add_argument("--run", required=True, metavar="RUN_ID")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--checkpoint-root")
    serve.add_argument("--ui", help="Directory with the built annotation UI.")
    serve.set_defaults(func=cmd_serve)

    report = sub.add_parser("report", help="Project results to CSV and reporting tables.")
    report.add_argument("--results", required=True, help="Results store (NDJSON).")
    report.add_argument("--out", required=True, help="CSV projection path.")
    report.add_argument("--best-out", help="Best-of-dropout table (JSON).")
    report.add_argument("--per-metric", action="store_true",
                        help="Report per-metric maxima across dropout variants.")
    report.add_argument("--saturation-out", help="Saturation-curve data (CSV).")
    report.add_argument("--plot", help="Optional saturation line chart (PNG).")
    report.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except RunSuspended as exc:
        print(f"suspended: {exc}", file=sys.stderr)
        return EXIT_SUSPENDED
    except (AdapterError, ProtocolError) as exc:
        print(f"adapter error: {exc}", file=sys.stderr)
        return EXIT_ADAPTER
    except (
        ConfigError,
        CorpusError,
        EvaluationError,
        LexiconError,
        RulesError,
        StrategyError,
        AnnotationError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Experiment grid expansion and campaign execution.

The default grid crosses dropout {0.1, 0.5}, pseudo-labeling
{none, top 1%}, expert labeling {none, bottom/middle/random 1%}, and
six seed-set sizes. A *training run* is one (dropout, l0_size,
strategy, iteration) fit. Iteration-0 fits are identical across every
strategy sharing (dropout, l0_size) -- the model only sees L_0 -- so
the expansion emits them once, owned by the baseline experiment:

    per (dropout, l0_size) cell: 1 shared iteration-0 run
        + (non-trivial strategy combos) x n_iterations

For the full default grid that is 12 x (1 + 7 x 3) = 264 unique training
runs across 96 experiment configs (12 baselines + 84 strategy runs).

Campaigns are idempotent: completed run ids are read from the results
store and skipped, and partially-finished runs resume from their
checkpoints, so killing and re-invoking a campaign converges to the
same results as an uninterrupted one.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import load_corpus
from .loop_engine import AdapterSpec, HlMode, LoopEngine, RunConfig
from .metrics import ConceptLexicon, NegexRules
from .results import append_record, append_result, completed_run_ids, load_results, write_csv
from .strategies import SelectionKind, StrategySpec

logger = logging.getLogger("sumloop")

DEFAULT_L0_SIZES = (100, 250, 500, 750, 1000, 1250)
DEFAULT_DROPOUTS = (0.1, 0.5)
DEFAULT_PL = (SelectionKind.NONE, SelectionKind.TOP)
DEFAULT_HL = (SelectionKind.NONE, SelectionKind.BOTTOM, SelectionKind.MIDDLE, SelectionKind.RANDOM)


@dataclass(frozen=True)
class GridSpec:
    l0_sizes: tuple[int, ...] = DEFAULT_L0_SIZES
    dropouts: tuple[float, ...] = DEFAULT_DROPOUTS
    pl_kinds: tuple[SelectionKind, ...] = DEFAULT_PL
    hl_kinds: tuple[SelectionKind, ...] = DEFAULT_HL
    pl_fraction: float = 0.01
    hl_fraction: float = 0.01
    n_iterations: int = 3
    seed: int = 42
    adapter: AdapterSpec = field(default_factory=AdapterSpec)
    epochs: int = 6
    effective_batch_size: int = 128


@dataclass(frozen=True)
class TrainingRun:
    """One unique fit in the campaign (the unit a campaign budget counts)."""

    run_id: str
    dropout: float
    l0_size: int
    pl: SelectionKind
    hl: SelectionKind
    iteration: int


def _fmt_dropout(dropout: float) -> str:
    return f"{dropout:g}"


def run_id_for(spec: GridSpec, dropout: float, l0_size: int, pl: SelectionKind, hl: SelectionKind) -> str:
    return f"d{_fmt_dropout(dropout)}_l{l0_size:04d}_pl-{pl.value}_hl-{hl.value}_s{spec.seed}"


def expand_grid(spec: GridSpec) -> list[TrainingRun]:
    """All unique training runs, with shared iteration-0 fits deduplicated."""
    runs: list[TrainingRun] = []
    for dropout in spec.dropouts:
        for l0_size in spec.l0_sizes:
            baseline_id = run_id_for(spec, dropout, l0_size, SelectionKind.NONE, SelectionKind.NONE)
            runs.append(
                TrainingRun(baseline_id, dropout, l0_size, SelectionKind.NONE, SelectionKind.NONE, 0)
            )
            for pl in spec.pl_kinds:
                for hl in spec.hl_kinds:
                    if pl is SelectionKind.NONE and hl is SelectionKind.NONE:
                        continue
                    run_id = run_id_for(spec, dropout, l0_size, pl, hl)
                    for iteration in range(1, spec.n_iterations + 1):
                        runs.append(TrainingRun(run_id, dropout, l0_size, pl, hl, iteration))
    return runs


def decomposition(spec: GridSpec) -> str:
    cells = len(spec.dropouts) * len(spec.l0_sizes)
    combos = len(spec.pl_kinds) * len(spec.hl_kinds) - 1
    per_cell = 1 + combos * spec.n_iterations
    total = cells * per_cell
    return (
        f"{cells} (dropout x l0_size) cells x (1 shared iteration-0 run + "
        f"{combos} strategy combos x {spec.n_iterations} iterations = {per_cell}) "
        f"= {total} unique training runs"
    )


def grid_experiments(spec: GridSpec) -> list[RunConfig]:
    """Executable experiment configs: baselines plus strategy runs."""
    configs: list[RunConfig] = []
    for dropout in spec.dropouts:
        for l0_size in spec.l0_sizes:
            for pl in spec.pl_kinds:
                for hl in spec.hl_kinds:
                    trivial = pl is SelectionKind.NONE and hl is SelectionKind.NONE
                    strategy = StrategySpec(
                        pl=pl, hl=hl,
                        pl_fraction=spec.pl_fraction, hl_fraction=spec.hl_fraction,
                    )
                    configs.append(
                        RunConfig(
                            run_id=run_id_for(spec, dropout, l0_size, pl, hl),
                            l0_size=l0_size,
                            dropout=dropout,
                            strategy=strategy,
                            n_iterations=0 if trivial else spec.n_iterations,
                            seed=spec.seed,
                            adapter=spec.adapter,
                            hl_mode=HlMode.SIMULATED_ORACLE,
                            epochs=spec.epochs,
                            effective_batch_size=spec.effective_batch_size,
                        )
                    )
    return configs


@dataclass(frozen=True)
class CampaignPaths:
    corpus: Path
    test_set: Path
    lexicon: Path | None
    negex: Path | None
    checkpoint_root: Path
    results: Path

    def load_engine(self) -> LoopEngine:
        lexicon = (
            ConceptLexicon.load(self.lexicon) if self.lexicon else _default_lexicon()
        )
        rules = NegexRules.load(self.negex) if self.negex else NegexRules.default()
        return LoopEngine(
            corpus=load_corpus(self.corpus),
            test_set=load_corpus(self.test_set),
            lexicon=lexicon,
            rules=rules,
            checkpoint_root=self.checkpoint_root,
        )


def _default_lexicon() -> ConceptLexicon:
    from importlib import resources

    with resources.as_file(resources.files("sumloop.data") / "lexicon.tsv") as p:
        return ConceptLexicon.load(p)


def _run_one(config_record: dict, paths: CampaignPaths) -> dict:
    # Worker entry point: loads its own engine so processes share nothing.
    engine = paths.load_engine()
    config = RunConfig.from_record(config_record)
    result = engine.run_experiment(config, resume=True)
    record = result.to_record()
    record["run_id"] = config.run_id
    return record


def run_campaign(
    configs: list[RunConfig],
    paths: CampaignPaths,
    workers: int = 1,
) -> list[dict]:
    """Execute all configs not yet in the results store; returns all records."""
    done = completed_run_ids(paths.results)
    todo = [c for c in configs if c.run_id not in done]
    if done:
        logger.info("campaign: %d runs already complete, %d to go", len(done), len(todo))

    if workers <= 1:
        engine = paths.load_engine()
        for config in todo:
            result = engine.run_experiment(config, resume=True)
            append_result(paths.results, result)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_run_one, config.to_record(), paths): config for config in todo
            }
            for future in as_completed(futures):
                append_record(paths.results, future.result())

    records = load_results(paths.results)
    write_csv(records, paths.results.with_suffix(".csv"))
    return records

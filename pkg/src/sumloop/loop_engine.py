"""Iterative labeling loop: fit, score, select, commit, evaluate.

One experiment owns a seeded pool split and runs ``n_iterations + 1``
entries. Entry ``i`` fits the adapter on the current labeled set L_i,
evaluates that model on the held-out test set, and (except at the final
entry) scores the unlabeled pool, selects pseudo- and expert-label
candidates, and commits them to form L_{i+1}. Committed labels carry
``iteration_added = i + 1``, so every entry's record pairs its metric
point with the exact number of training points the evaluated model saw,
and the iteration-0 fit is the shared baseline across strategies.

Pseudo-labeling always selects first; expert labeling draws from the
remainder, so no sample can receive both labels in one iteration.
Budgets are frozen from |U_0| and clamp (with a warning) when the
unlabeled pool runs low.

In ``live_human`` mode the expert step enqueues annotation tasks and
suspends the run with a resumable checkpoint; resuming commits the
submitted summaries once the queue is drained.
"""

from __future__ import annotations

import enum
import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .annotation import enqueue, load_iteration_tasks
from .corpus import (
    Corpus,
    CorpusError,
    LabelRecord,
    PoolState,
    Provenance,
    reveal_gold,
    split_pools,
)
from .external import ExternalProcessAdapter
from .metrics import ConceptLexicon, MetricsReport, NegexRules, evaluate
from .model_adapter import (
    AdapterKind,
    ExtractiveLeadAdapter,
    ModelHyperparams,
    OracleNoiseAdapter,
    check_prediction_batch,
)
from .rng import derive_seed
from .runstate import (
    STATUS_AWAITING,
    STATUS_COMPLETE,
    STATUS_RUNNING,
    RunDir,
)
from .strategies import (
    Budgets,
    ScoreEntry,
    ScoreNormalization,
    ScoreTable,
    SelectionKind,
    StrategySpec,
    select,
)

logger = logging.getLogger("sumloop")


class ConfigError(ValueError):
    """Invalid run configuration."""


class RunSuspended(Exception):
    """Run is waiting for live annotation; resume once the queue drains."""

    def __init__(self, run_id: str, iteration: int, pending_count: int) -> None:
        super().__init__(
            f"run {run_id!r} suspended at iteration {iteration}: "
            f"{pending_count} annotation tasks pending"
        )
        self.run_id = run_id
        self.iteration = iteration
        self.pending_count = pending_count


class HlMode(enum.Enum):
    SIMULATED_ORACLE = "simulated_oracle"
    LIVE_HUMAN = "live_human"


@dataclass(frozen=True)
class AdapterSpec:
    kind: AdapterKind = AdapterKind.ORACLE_NOISE
    noise_rate: float = 0.3
    curve_c: float | None = None
    lead_k: int = 2
    command: tuple[str, ...] | None = None
    address: tuple[str, int] | None = None
    fit_timeout: float | None = None
    predict_timeout: float | None = 600.0

    def build(self):
        if self.kind is AdapterKind.ORACLE_NOISE:
            return OracleNoiseAdapter(rate=self.noise_rate, curve_c=self.curve_c)
        if self.kind is AdapterKind.EXTRACTIVE_LEAD:
            return ExtractiveLeadAdapter(k=self.lead_k)
        if self.command is None and self.address is None:
            raise ConfigError("external adapter needs a command or an address")
        return ExternalProcessAdapter(
            command=self.command,
            address=self.address,
            fit_timeout=self.fit_timeout,
            predict_timeout=self.predict_timeout,
        )

    def to_record(self) -> dict:
        return {
            "kind": self.kind.value,
            "noise_rate": self.noise_rate,
            "curve_c": self.curve_c,
            "lead_k": self.lead_k,
            "command": list(self.command) if self.command else None,
            "address": list(self.address) if self.address else None,
            "fit_timeout": self.fit_timeout,
            "predict_timeout": self.predict_timeout,
        }

    @classmethod
    def from_record(cls, record: dict) -> "AdapterSpec":
        return cls(
            kind=AdapterKind(record["kind"]),
            noise_rate=record.get("noise_rate", 0.3),
            curve_c=record.get("curve_c"),
            lead_k=record.get("lead_k", 2),
            command=tuple(record["command"]) if record.get("command") else None,
            address=tuple(record["address"]) if record.get("address") else None,
            fit_timeout=record.get("fit_timeout"),
            predict_timeout=record.get("predict_timeout", 600.0),
        )


@dataclass(frozen=True)
class RunConfig:
    run_id: str
    l0_size: int
    dropout: float = 0.1
    strategy: StrategySpec = field(default_factory=StrategySpec)
    n_iterations: int = 0
    seed: int = 42
    adapter: AdapterSpec = field(default_factory=AdapterSpec)
    score_normalization: ScoreNormalization = ScoreNormalization.NONE
    hl_mode: HlMode = HlMode.SIMULATED_ORACLE
    epochs: int = 6
    effective_batch_size: int = 128

    def __post_init__(self) -> None:
        if not self.run_id:
            raise ConfigError("run_id must be nonempty")
        if self.l0_size <= 0:
            raise ConfigError(f"l0_size must be > 0, got {self.l0_size}")
        if self.n_iterations < 0:
            raise ConfigError(f"n_iterations must be >= 0, got {self.n_iterations}")
        if self.strategy.is_trivial and self.n_iterations != 0:
            raise ConfigError(
                "additional iterations need an active labeling strategy; "
                "set n_iterations to 0 when both pl and hl are none"
            )

    def hyperparams(self) -> ModelHyperparams:
        return ModelHyperparams(
            dropout=self.dropout,
            epochs=self.epochs,
            effective_batch_size=self.effective_batch_size,
        )

    def strategy_seed(self) -> int:
        return self.strategy.seed if self.strategy.seed != 0 else self.seed

    def to_record(self) -> dict:
        return {
            "run_id": self.run_id,
            "l0_size": self.l0_size,
            "dropout": self.dropout,
            "pl": self.strategy.pl.value,
            "hl": self.strategy.hl.value,
            "pl_fraction": self.strategy.pl_fraction,
            "hl_fraction": self.strategy.hl_fraction,
            "strategy_seed": self.strategy.seed,
            "n_iterations": self.n_iterations,
            "seed": self.seed,
            "adapter": self.adapter.to_record(),
            "score_normalization": self.score_normalization.value,
            "hl_mode": self.hl_mode.value,
            "epochs": self.epochs,
            "effective_batch_size": self.effective_batch_size,
        }

    @classmethod
    def from_record(cls, record: dict) -> "RunConfig":
        return cls(
            run_id=record["run_id"],
            l0_size=record["l0_size"],
            dropout=record["dropout"],
            strategy=StrategySpec(
                pl=SelectionKind(record["pl"]),
                hl=SelectionKind(record["hl"]),
                pl_fraction=record["pl_fraction"],
                hl_fraction=record["hl_fraction"],
                seed=record.get("strategy_seed", 0),
            ),
            n_iterations=record["n_iterations"],
            seed=record["seed"],
            adapter=AdapterSpec.from_record(record["adapter"]),
            score_normalization=ScoreNormalization(record["score_normalization"]),
            hl_mode=HlMode(record["hl_mode"]),
            epochs=record.get("epochs", 6),
            effective_batch_size=record.get("effective_batch_size", 128),
        )


@dataclass
class ExperimentResult:
    config: RunConfig
    per_iteration: list[dict]
    started_at: str
    finished_at: str

    def __post_init__(self) -> None:
        expected = self.config.n_iterations + 1
        if len(self.per_iteration) != expected:
            raise ConfigError(
                f"run {self.config.run_id!r}: expected {expected} iteration entries, "
                f"got {len(self.per_iteration)}"
            )

    def to_record(self, include_timing: bool = True) -> dict:
        entries = self.per_iteration
        if not include_timing:
            entries = [{k: v for k, v in e.items() if k != "wall_time"} for e in entries]
        record = {"config": self.config.to_record(), "per_iteration": entries}
        if include_timing:
            record["started_at"] = self.started_at
            record["finished_at"] = self.finished_at
        return record

    def serialize(self) -> str:
        """Canonical deterministic form; wall-clock fields excluded."""
        return json.dumps(self.to_record(include_timing=False), sort_keys=True)


def _added_at(pool: PoolState, iteration: int) -> tuple[int, int]:
    """Labels the pool gained at a given iteration, split by provenance."""
    pseudo = expert = 0
    for record in pool.labeled.values():
        if record.iteration_added != iteration:
            continue
        if record.provenance is Provenance.PSEUDO_MODEL:
            pseudo += 1
        elif record.provenance is Provenance.EXPERT_HUMAN:
            expert += 1
    return pseudo, expert


def _entry_record(
    iteration: int, pool: PoolState, metrics: MetricsReport, wall_time: dict
) -> dict:
    added_pseudo, added_expert = _added_at(pool, iteration)
    return {
        "iteration": iteration,
        "n_labeled": len(pool.labeled),
        "n_unlabeled": len(pool.unlabeled),
        "added_pseudo": added_pseudo,
        "added_expert": added_expert,
        "concept_f1": metrics.concept_f1,
        "affirmation_f1": metrics.affirmation_f1,
        "rouge_l_f1": metrics.rouge_l_f1,
        "n_examples": metrics.n_examples,
        "wall_time": wall_time,
    }


class LoopEngine:
    """Executes experiments over one corpus / test-set / metrics setup."""

    def __init__(
        self,
        corpus: Corpus,
        test_set: Corpus,
        lexicon: ConceptLexicon,
        rules: NegexRules,
        checkpoint_root: str | Path = "runs",
    ) -> None:
        overlap = {s.id for s in corpus} & {s.id for s in test_set}
        if overlap:
            raise ConfigError(f"test set overlaps the training corpus: {sorted(overlap)[:5]}")
        missing_gold = [s.id for s in test_set if s.gold_summary is None]
        if missing_gold:
            raise ConfigError(f"test samples without gold summaries: {missing_gold[:5]}")
        self.corpus = corpus
        self.test_samples = sorted(test_set, key=lambda s: s.id)
        self.lexicon = lexicon
        self.rules = rules
        self.checkpoint_root = Path(checkpoint_root)

    def budgets_for(self, config: RunConfig) -> Budgets:
        return Budgets.from_spec(config.strategy, len(self.corpus) - config.l0_size)

    # -- single iteration --------------------------------------------------

    def run_iteration(
        self,
        pool: PoolState,
        config: RunConfig,
        iteration: int,
        adapter=None,
    ) -> tuple[PoolState, MetricsReport]:
        """Fit on the current pool, evaluate, then select and commit.

        Returns the advanced pool and the fitted model's test metrics.
        Selection is skipped at the final entry (iteration ==
        n_iterations), which covers metrics-only baselines.
        """
        owns_adapter = adapter is None
        if owns_adapter:
            adapter = config.adapter.build()
        try:
            handle, metrics, _ = self._fit_and_eval(pool, config, iteration, adapter)
            if iteration < config.n_iterations:
                pool = self._select_and_commit(
                    pool, config, iteration, adapter, handle, self.budgets_for(config)
                )
            return pool, metrics
        finally:
            if owns_adapter:
                adapter.close()

    def _fit_and_eval(self, pool: PoolState, config: RunConfig, iteration: int, adapter):
        labeled_pairs = [
            (self.corpus.by_id[sid], pool.labeled[sid]) for sid in sorted(pool.labeled)
        ]
        fit_seed = derive_seed(config.seed, f"fit-i{iteration}")
        t0 = time.perf_counter()
        handle = adapter.fit(labeled_pairs, config.hyperparams(), config.run_id, fit_seed)
        t1 = time.perf_counter()
        predictions = adapter.predict(handle, self.test_samples)
        check_prediction_batch(predictions, self.test_samples)
        metrics = evaluate(
            [(p.sample_id, p.summary) for p in predictions],
            self.test_samples,
            self.lexicon,
            self.rules,
        )
        t2 = time.perf_counter()
        return handle, metrics, {"fit": t1 - t0, "eval": t2 - t1}

    def _clamped(self, budget: int, available: int, what: str, run_id: str) -> int:
        if budget > available:
            logger.warning(
                "run %s: %s budget %d clamped to %d remaining unlabeled samples",
                run_id, what, budget, available,
            )
            return available
        return budget

    def _select_ids(self, pool, config, iteration, adapter, handle, budgets):
        """PL first, then HL over the remainder of the scored pool."""
        unlabeled = [self.corpus.by_id[sid] for sid in sorted(pool.unlabeled)]
        if not unlabeled:
            if budgets.b_pseudo or budgets.b_expert:
                logger.warning(
                    "run %s: unlabeled pool is empty at iteration %d; "
                    "budgets clamped to zero", config.run_id, iteration,
                )
            return [], []
        predictions = adapter.predict(handle, unlabeled)
        check_prediction_batch(predictions, unlabeled)
        by_id = {p.sample_id: p for p in predictions}
        table = ScoreTable(
            tuple(ScoreEntry(p.sample_id, p.log_likelihood, p.token_count) for p in predictions),
            config.score_normalization,
        )
        seed = config.strategy_seed()
        b_p = self._clamped(budgets.b_pseudo, len(table), "pseudo", config.run_id)
        pl_ids = select(config.strategy.pl, table, b_p, derive_seed(seed, f"pl-i{iteration}"))
        taken = set(pl_ids)
        remainder = ScoreTable(
            tuple(e for e in table.entries if e.sample_id not in taken),
            table.normalization,
        )
        b_e = self._clamped(budgets.b_expert, len(remainder), "expert", config.run_id)
        hl_ids = select(config.strategy.hl, remainder, b_e, derive_seed(seed, f"hl-i{iteration}"))
        pseudo_records = [
            LabelRecord(
                sample_id=sid,
                summary=by_id[sid].summary,
                provenance=Provenance.PSEUDO_MODEL,
                iteration_added=iteration + 1,
                confidence_at_selection=by_id[sid].log_likelihood,
            )
            for sid in pl_ids
        ]
        return pseudo_records, hl_ids

    def _select_and_commit(self, pool, config, iteration, adapter, handle, budgets):
        pseudo_records, hl_ids = self._select_ids(
            pool, config, iteration, adapter, handle, budgets
        )
        expert_records = reveal_gold(pool, self.corpus, hl_ids, iteration + 1)
        return pool.commit(pseudo_records + expert_records, iteration + 1)

    # -- full experiment -----------------------------------------------------

    def run_experiment(self, config: RunConfig, resume: bool = False) -> ExperimentResult:
        run_dir = RunDir(self.checkpoint_root, config.run_id)
        started_at = datetime.now(timezone.utc).isoformat()
        entries: list[dict] = []
        pool = None
        start_entry = 0

        state = run_dir.read_state() if resume else None
        pending = run_dir.read_pending_selection() if resume else None
        if state is not None:
            echoed = state.get("config")
            if echoed is not None and echoed != config.to_record():
                raise ConfigError(
                    f"run {config.run_id!r}: checkpointed config does not match; "
                    "resume with the original configuration"
                )
            if state.get("status") == STATUS_COMPLETE:
                entries = [run_dir.read_record(i) for i in range(config.n_iterations + 1)]
                return ExperimentResult(
                    config,
                    entries,
                    state.get("started_at", started_at),
                    state.get("finished_at", started_at),
                )
            started_at = state.get("started_at", started_at)
            last = run_dir.last_complete_iteration()
            if last is not None:
                entries = [run_dir.read_record(i) for i in range(last + 1)]
                pool = run_dir.read_pool(last)
                start_entry = last + 1
        elif run_dir.state_path.exists():
            raise ConfigError(
                f"run directory for {config.run_id!r} already exists; "
                "resume it or pick a fresh run_id"
            )

        if pool is None and pending is None:
            pool = split_pools(self.corpus, config.l0_size, config.seed)
            run_dir.write_state(
                {
                    "status": STATUS_RUNNING,
                    "config": config.to_record(),
                    "started_at": started_at,
                }
            )

        budgets = self.budgets_for(config)
        adapter = config.adapter.build()
        try:
            if pending is not None:
                pool, entry = self._finish_pending(run_dir, config, pending)
                entries.append(entry)
                start_entry = pending["entry_iteration"] + 1

            for iteration in range(start_entry, config.n_iterations + 1):
                entry, pool = self._run_entry(
                    run_dir, config, pool, iteration, adapter, budgets
                )
                entries.append(entry)
        finally:
            adapter.close()

        finished_at = datetime.now(timezone.utc).isoformat()
        run_dir.set_status(STATUS_COMPLETE, finished_at=finished_at)
        result = ExperimentResult(config, entries, started_at, finished_at)
        self._check_growth(result)
        return result

    def _run_entry(self, run_dir, config, pool, iteration, adapter, budgets):
        handle, metrics, wall = self._fit_and_eval(pool, config, iteration, adapter)
        entry = _entry_record(iteration, pool, metrics, wall)

        if iteration < config.n_iterations:
            t0 = time.perf_counter()
            pseudo_records, hl_ids = self._select_ids(
                pool, config, iteration, adapter, handle, budgets
            )
            if config.hl_mode is HlMode.LIVE_HUMAN and hl_ids:
                pool = self._live_expert_step(
                    run_dir, config, pool, iteration, pseudo_records, hl_ids, entry
                )
            else:
                expert_records = reveal_gold(pool, self.corpus, hl_ids, iteration + 1)
                pool = pool.commit(pseudo_records + expert_records, iteration + 1)
            entry["wall_time"]["select"] = time.perf_counter() - t0

        run_dir.write_checkpoint(iteration, pool, entry)
        return entry, pool

    def _live_expert_step(
        self, run_dir, config, pool, iteration, pseudo_records, hl_ids, entry
    ) -> PoolState:
        commit_iteration = iteration + 1
        samples = [self.corpus.by_id[sid] for sid in hl_ids]
        enqueue(run_dir, samples, commit_iteration)
        tasks = load_iteration_tasks(run_dir, commit_iteration)
        pending = [t for t in tasks if t.status == "pending"]
        if pending:
            run_dir.write_pending_selection(
                {
                    "entry_iteration": iteration,
                    "commit_iteration": commit_iteration,
                    "entry_record": entry,
                    "pseudo_records": [r.to_record() for r in pseudo_records],
                    "hl_sample_ids": list(hl_ids),
                    "pool_before": pool.to_record(),
                }
            )
            run_dir.set_status(STATUS_AWAITING, awaiting_iteration=commit_iteration)
            raise RunSuspended(config.run_id, commit_iteration, len(pending))
        expert_records = self._expert_records_from_tasks(tasks, commit_iteration)
        return pool.commit(pseudo_records + expert_records, commit_iteration)

    @staticmethod
    def _expert_records_from_tasks(tasks, commit_iteration: int) -> list[LabelRecord]:
        return [
            LabelRecord(
                sample_id=t.sample_id,
                summary=t.submitted_summary,
                provenance=Provenance.EXPERT_HUMAN,
                iteration_added=commit_iteration,
            )
            for t in tasks
        ]

    def _finish_pending(self, run_dir, config, pending):
        """Commit a suspended selection after its annotation queue drained."""
        commit_iteration = pending["commit_iteration"]
        tasks = load_iteration_tasks(run_dir, commit_iteration)
        open_tasks = [t for t in tasks if t.status == "pending"]
        if open_tasks:
            raise RunSuspended(config.run_id, commit_iteration, len(open_tasks))
        pool = PoolState.from_record(pending["pool_before"])
        pseudo_records = [LabelRecord.from_record(r) for r in pending["pseudo_records"]]
        expert_records = self._expert_records_from_tasks(tasks, commit_iteration)
        pool = pool.commit(pseudo_records + expert_records, commit_iteration)
        entry = pending["entry_record"]
        run_dir.write_checkpoint(pending["entry_iteration"], pool, entry)
        run_dir.clear_pending_selection()
        run_dir.set_status(STATUS_RUNNING, awaiting_iteration=None)
        return pool, entry

    @staticmethod
    def _check_growth(result: ExperimentResult) -> None:
        entries = result.per_iteration
        for prev, cur in zip(entries, entries[1:]):
            grown = cur["n_labeled"] - prev["n_labeled"]
            if grown != cur["added_pseudo"] + cur["added_expert"]:
                raise CorpusError(
                    f"run {result.config.run_id!r}: labeled-set growth {grown} does not "
                    f"match recorded additions at iteration {cur['iteration']}"
                )

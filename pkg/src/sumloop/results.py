"""Append-only results store and reporting projections.

Completed runs append one JSON record per line; a crash can at worst
leave a truncated final line, which loading skips, so re-invoking a
campaign sees exactly the runs that finished. Loading also
de-duplicates by run id (first record wins).

Projections:

* a flat CSV with one row per (run, iteration) for plotting saturation
  curves: run_id, dropout, l0_size, pl, hl, iteration, n_train_points,
  concept_f1, affirmation_f1, rouge_l_f1; rows sorted by (run_id,
  iteration) so identical result sets project to identical bytes;
* best-of-dropout reporting: runs differing only in dropout are grouped
  and the run with the higher final concept F1 is reported whole
  (per-metric max across the pair is available as a comparison mode,
  but a chimera of two runs never represents a single model).
"""

from __future__ import annotations

import io
import json
import os
from pathlib import Path

from .loop_engine import ExperimentResult

CSV_COLUMNS = (
    "run_id",
    "dropout",
    "l0_size",
    "pl",
    "hl",
    "iteration",
    "n_train_points",
    "concept_f1",
    "affirmation_f1",
    "rouge_l_f1",
)


def append_record(path: str | Path, record: dict) -> None:
    line = json.dumps(record, ensure_ascii=False, sort_keys=True)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(line + "\n")
        handle.flush()
        os.fsync(handle.fileno())


def append_result(path: str | Path, result: ExperimentResult) -> None:
    record = result.to_record()
    record["run_id"] = result.config.run_id
    append_record(path, record)


def load_results(path: str | Path) -> list[dict]:
    """Parse the store, skipping torn lines and duplicate run ids."""
    path = Path(path)
    if not path.exists():
        return []
    records: list[dict] = []
    seen: set[str] = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            continue  # torn tail from a crash mid-append
        run_id = record.get("run_id")
        if run_id is None or run_id in seen:
            continue
        seen.add(run_id)
        records.append(record)
    return records


def completed_run_ids(path: str | Path) -> set[str]:
    return {r["run_id"] for r in load_results(path)}


def csv_rows(records: list[dict]) -> list[dict]:
    rows = []
    for record in records:
        config = record["config"]
        for entry in record["per_iteration"]:
            rows.append(
                {
                    "run_id": record["run_id"],
                    "dropout": config["dropout"],
                    "l0_size": config["l0_size"],
                    "pl": config["pl"],
                    "hl": config["hl"],
                    "iteration": entry["iteration"],
                    "n_train_points": entry["n_labeled"],
                    "concept_f1": entry["concept_f1"],
                    "affirmation_f1": entry["affirmation_f1"],
                    "rouge_l_f1": entry["rouge_l_f1"],
                }
            )
    rows.sort(key=lambda r: (r["run_id"], r["iteration"]))
    return rows


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(records: list[dict]) -> str:
    out = io.StringIO()
    out.write(",".join(CSV_COLUMNS) + "\n")
    for row in csv_rows(records):
        out.write(",".join(_cell(row[c]) for c in CSV_COLUMNS) + "\n")
    return out.getvalue()


def write_csv(records: list[dict], path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(render_csv(records), encoding="utf-8")


# -- best-of-dropout reporting ---------------------------------------------

_GROUP_FIELDS = (
    "l0_size",
    "pl",
    "hl",
    "pl_fraction",
    "hl_fraction",
    "n_iterations",
    "seed",
    "score_normalization",
    "hl_mode",
)

METRIC_FIELDS = ("concept_f1", "affirmation_f1", "rouge_l_f1")


def _group_key(config: dict) -> tuple:
    return tuple(config.get(f) for f in _GROUP_FIELDS)


def report_best_dropout(records: list[dict], per_metric: bool = False) -> list[dict]:
    """Collapse dropout variants within each otherwise-identical group.

    Default: the variant with the higher concept F1 at its final entry
    wins and its full report is carried (ties to the lower dropout).
    ``per_metric=True`` instead takes, per iteration and metric, the max
    across variants; such rows describe no single run and say so.
    """
    groups: dict[tuple, list[dict]] = {}
    for record in records:
        groups.setdefault(_group_key(record["config"]), []).append(record)

    reported = []
    for key in sorted(groups, key=str):
        variants = sorted(groups[key], key=lambda r: r["config"]["dropout"])
        group_desc = dict(zip(_GROUP_FIELDS, key))
        if len(variants) == 1:
            only = variants[0]
            reported.append(
                {
                    "group": group_desc,
                    "winner_run_id": only["run_id"],
                    "dropout": only["config"]["dropout"],
                    "per_iteration": only["per_iteration"],
                    "note": "single dropout variant; passed through",
                }
            )
            continue
        if per_metric:
            merged = []
            for entries in zip(*(v["per_iteration"] for v in variants)):
                row = dict(entries[0])
                for metric in METRIC_FIELDS:
                    row[metric] = max(e[metric] for e in entries)
                merged.append(row)
            reported.append(
                {
                    "group": group_desc,
                    "winner_run_id": None,
                    "dropout": None,
                    "per_iteration": merged,
                    "note": "per-metric max across dropout variants; not a single run",
                }
            )
        else:
            winner = max(
                variants,
                key=lambda r: (r["per_iteration"][-1]["concept_f1"], -r["config"]["dropout"]),
            )
            reported.append(
                {
                    "group": group_desc,
                    "winner_run_id": winner["run_id"],
                    "dropout": winner["config"]["dropout"],
                    "per_iteration": winner["per_iteration"],
                    "note": None,
                }
            )
    return reported

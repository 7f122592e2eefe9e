"""Experiment orchestration: repeats, worker pool, report emission.

A run is a grid of (repeat, estimator, combiner) AUC measurements. Work is
cut into pure tasks keyed by (repeat, stage); every task derives its own
random streams from the master seed, so results are identical for any
worker count and records are sorted canonically before emission.

records.csv is byte-reproducible for a given config and master seed. The
wall_time_ms column is therefore left empty there; measured timings live
in timings.csv and report.json. A record's wall time covers its whole
estimator stage for that repeat (all requested combiners), and the three
estimators that reuse the shared level-one build also absorb that build's
time, so stage costs are comparable.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from ._version import __version__
from .combiners import fit_combiner
from .config import ExperimentConfig, config_to_mapping
from .core import Dataset, RngStream, SummaryStat, summarize
from .dataio import load_csv
from .errors import StacksureError
from .learners import warm_up
from .synth import GaussianClassParams, generate_params, sample_dataset
from .validation import (
    ESTIMATOR_NAMES,
    EvaluationRecord,
    bbc_sl,
    build_level_one,
    independent_cv_estimate,
    nested_cv_multi,
    new_data_multi,
    training_set_estimate,
)

__all__ = ["ReportBundle", "run_experiment", "emit_report"]

_L1_STAGE = "l1_group"
_L1_ESTIMATORS = ("training_set", "independent_cv", "bbc_sl")


@dataclass
class ReportBundle:
    """Everything a run produced: records, summaries, weights, metadata."""

    records: list[EvaluationRecord]
    summaries: dict[tuple[str, str], SummaryStat]
    weights_log: list[dict]
    run_metadata: dict = field(default_factory=dict)


def _repeat_dataset(
    cfg: ExperimentConfig, params, root: RngStream, repeat: int
) -> tuple[Dataset, GaussianClassParams | None]:
    """Dataset for one repeat plus the parameters that generated it (if any)."""
    if cfg.mode == "csv":
        return _csv_dataset_cached(cfg.data_path), None
    if cfg.fresh_params:
        params = generate_params(cfg.generator, root.child("params", repeat))
    return sample_dataset(params, cfg.n_obs, root.child("data", repeat)), params


_CSV_CACHE: dict[str, Dataset] = {}


def _csv_dataset_cached(path: str) -> Dataset:
    if path not in _CSV_CACHE:
        _CSV_CACHE[path] = load_csv(path)
    return _CSV_CACHE[path]


def _run_stage(cfg: ExperimentConfig, params, repeat: int, stage: str):
    """Compute every record of one (repeat, stage) task."""
    root = RngStream(cfg.master_seed)
    D, params = _repeat_dataset(cfg, params, root, repeat)
    rng = root.child("rep", repeat)
    proto = cfg.protocol
    specs = list(proto.learners)
    requested = cfg.expanded_estimators
    records: list[EvaluationRecord] = []
    weights: list[dict] = []

    def add(estimator, combiner, value, stream, ms):
        undefined = value is None
        records.append(
            EvaluationRecord(
                estimator=estimator,
                combiner=combiner,
                auc=float("nan") if undefined else float(value),
                repeat_index=repeat,
                seed=stream.token(),
                wall_time_ms=int(round(ms)),
                undefined=undefined,
            )
        )

    if stage == _L1_STAGE:
        t0 = time.perf_counter()
        try:
            L1 = build_level_one(
                specs, D, proto.k_inner, rng.child("l1"), proto.feature_m, proto.stratified
            )
        except (StacksureError, ValueError):
            L1 = None
        l1_ms = (time.perf_counter() - t0) * 1000.0

        def guarded(compute):
            if L1 is None:
                return None
            try:
                return compute()
            except (StacksureError, ValueError):
                return None

        if "training_set" in requested:
            t0 = time.perf_counter()
            values = {}
            for method in proto.combiners:
                stream = rng.child("train_est", method)

                def compute(method=method, stream=stream):
                    value = training_set_estimate(L1, method, stream)
                    model = fit_combiner(method, L1, stream.child("fit"))
                    weights.append(
                        {"repeat": repeat, "combiner": method, **model.weight_summary()}
                    )
                    return value

                values[method] = guarded(compute)
            est_ms = (time.perf_counter() - t0) * 1000.0
            for method in proto.combiners:
                add("training_set", method, values[method], rng.child("train_est", method), est_ms + l1_ms)

        if "independent_cv" in requested:
            t0 = time.perf_counter()
            values = {
                method: guarded(
                    lambda method=method: independent_cv_estimate(
                        L1, method, proto.k_inner, rng.child("indep", method), proto.stratified
                    )
                )
                for method in proto.combiners
            }
            est_ms = (time.perf_counter() - t0) * 1000.0
            for method in proto.combiners:
                add("independent_cv", method, values[method], rng.child("indep", method), est_ms + l1_ms)

        if "bbc_sl" in requested:
            t0 = time.perf_counter()

            def bbc_value(method):
                est = bbc_sl(L1, method, proto.n_boot, rng.child("bbc"))
                return est.pooled_auc if proto.bbc_pooled else est.auc

            values = {
                method: guarded(lambda method=method: bbc_value(method))
                for method in proto.combiners
            }
            est_ms = (time.perf_counter() - t0) * 1000.0
            for method in proto.combiners:
                add("bbc_sl", method, values[method], rng.child("bbc", method), est_ms + l1_ms)
        return records, weights

    if stage == "nested_cv":
        t0 = time.perf_counter()
        stream = rng.child("nested")
        try:
            results = nested_cv_multi(specs, proto.combiners, D, proto, stream)
            values = {m: results[m].auc for m in proto.combiners}
        except (StacksureError, ValueError):
            values = {m: None for m in proto.combiners}
        est_ms = (time.perf_counter() - t0) * 1000.0
        for method in proto.combiners:
            add("nested_cv", method, values[method], stream.child(method), est_ms)
        return records, weights

    if stage in ("new_data_100", "new_data_90"):
        fraction = 1.0 if stage == "new_data_100" else 0.9
        t0 = time.perf_counter()
        stream = rng.child(stage)
        try:
            values = new_data_multi(
                specs,
                proto.combiners,
                D,
                params,
                cfg.n_new,
                fraction,
                stream,
                proto.k_inner,
                proto.feature_m,
                proto.stratified,
            )
        except (StacksureError, ValueError):
            values = {m: None for m in proto.combiners}
        est_ms = (time.perf_counter() - t0) * 1000.0
        for method in proto.combiners:
            add(stage, method, values[method], stream.child(method), est_ms)
        return records, weights

    raise ValueError(f"unknown stage {stage!r}")


# worker-side state set by the pool initializer
_WORKER_CFG: ExperimentConfig | None = None
_WORKER_PARAMS: GaussianClassParams | None = None


def _init_worker(cfg: ExperimentConfig, params) -> None:
    global _WORKER_CFG, _WORKER_PARAMS
    _WORKER_CFG = cfg
    _WORKER_PARAMS = params
    warm_up()


def _run_stage_in_worker(task: tuple[int, str]):
    repeat, stage = task
    return _run_stage(_WORKER_CFG, _WORKER_PARAMS, repeat, stage)


def _record_sort_key(cfg: ExperimentConfig):
    combiner_rank = {m: i for i, m in enumerate(cfg.protocol.combiners)}

    def key(record: EvaluationRecord):
        return (
            ESTIMATOR_NAMES.index(record.estimator),
            combiner_rank[record.combiner],
            record.repeat_index,
        )

    return key


def run_experiment(cfg: ExperimentConfig) -> ReportBundle:
    """Run every requested estimator for every repeat and combiner."""
    t_start = time.perf_counter()
    root = RngStream(cfg.master_seed)
    params = None
    if cfg.mode == "synthetic" and not cfg.fresh_params:
        seed_stream = (
            RngStream(cfg.generator.seed) if cfg.generator.seed is not None else root
        )
        params = generate_params(cfg.generator, seed_stream.child("params"))

    requested = cfg.expanded_estimators
    stages = []
    if any(e in requested for e in _L1_ESTIMATORS):
        stages.append(_L1_STAGE)
    for stage in ("nested_cv", "new_data_100", "new_data_90"):
        if stage in requested:
            stages.append(stage)
    tasks = [(repeat, stage) for repeat in range(cfg.repeats) for stage in stages]

    results = []
    if cfg.worker_count == 1 or len(tasks) <= 1:
        warm_up()
        for task in tasks:
            results.append(_run_stage(cfg, params, task[0], task[1]))
    else:
        ctx = get_context("fork")
        warm_up()  # compile before forking so children inherit the jitted code
        with ProcessPoolExecutor(
            max_workers=cfg.worker_count,
            mp_context=ctx,
            initializer=_init_worker,
            initargs=(cfg, params),
        ) as pool:
            results = list(pool.map(_run_stage_in_worker, tasks))

    records: list[EvaluationRecord] = []
    weights_log: list[dict] = []
    for recs, weights in results:
        records.extend(recs)
        weights_log.extend(weights)
    records.sort(key=_record_sort_key(cfg))
    weights_log.sort(key=lambda w: (w["combiner"], w["repeat"]))

    summaries = {}
    for estimator in requested:
        for method in cfg.protocol.combiners:
            values = [
                r.auc
                for r in records
                if r.estimator == estimator and r.combiner == method and not r.undefined
            ]
            if values:
                summaries[(estimator, method)] = summarize(values)

    metadata = {
        "config": config_to_mapping(cfg),
        "versions": {"stacksure": __version__, "numpy": np.__version__},
        "n_records": len(records),
        "n_undefined": sum(r.undefined for r in records),
        "total_wall_time_ms": int(round((time.perf_counter() - t_start) * 1000.0)),
    }
    return ReportBundle(
        records=records, summaries=summaries, weights_log=weights_log, run_metadata=metadata
    )


def _format_auc(record: EvaluationRecord) -> str:
    return "undefined" if record.undefined else f"{record.auc:.17g}"


def emit_report(bundle: ReportBundle, output_dir) -> list[Path]:
    """Write records.csv, summary.csv, timings.csv, boxplot.csv, report.json.

    records.csv carries the reproducible payload (its wall_time_ms column
    is intentionally blank); timings.csv holds the measured stage times.
    """
    if not bundle.records:
        raise ValueError("refusing to emit a report with no records")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    records_path = out / "records.csv"
    with open(records_path, "w") as fh:
        fh.write("estimator,combiner,repeat,seed,auc,wall_time_ms\n")
        for r in bundle.records:
            fh.write(f"{r.estimator},{r.combiner},{r.repeat_index},{r.seed},{_format_auc(r)},\n")
    written.append(records_path)

    timings_path = out / "timings.csv"
    with open(timings_path, "w") as fh:
        fh.write("estimator,combiner,repeat,wall_time_ms\n")
        for r in bundle.records:
            fh.write(f"{r.estimator},{r.combiner},{r.repeat_index},{r.wall_time_ms}\n")
    written.append(timings_path)

    estimators = [e for e in ESTIMATOR_NAMES if any(r.estimator == e for r in bundle.records)]
    combiners = list(dict.fromkeys(r.combiner for r in bundle.records))
    summary_path = out / "summary.csv"
    with open(summary_path, "w") as fh:
        fh.write("combiner," + ",".join(estimators) + "\n")
        for method in combiners:
            cells = []
            for estimator in estimators:
                stat = bundle.summaries.get((estimator, method))
                cells.append(
                    f"{stat.mean:.3f}±{stat.se_of_mean:.3f}" if stat else "undefined"
                )
            fh.write(method + "," + ",".join(cells) + "\n")
    written.append(summary_path)

    boxplot_path = out / "boxplot.csv"
    with open(boxplot_path, "w") as fh:
        fh.write("estimator,combiner,repeat,auc\n")
        for r in bundle.records:
            if not r.undefined:
                fh.write(f"{r.estimator},{r.combiner},{r.repeat_index},{r.auc:.17g}\n")
    written.append(boxplot_path)

    report = {
        "run_metadata": bundle.run_metadata,
        "records": [
            {
                "estimator": r.estimator,
                "combiner": r.combiner,
                "repeat": r.repeat_index,
                "seed": r.seed,
                "auc": None if r.undefined else r.auc,
                "undefined": r.undefined,
                "wall_time_ms": r.wall_time_ms,
            }
            for r in bundle.records
        ],
        "summaries": [
            {
                "estimator": estimator,
                "combiner": method,
                "mean": stat.mean,
                "se_of_mean": stat.se_of_mean,
                "count": stat.count,
            }
            for (estimator, method), stat in sorted(bundle.summaries.items())
        ],
        "combiner_weights": bundle.weights_log,
    }
    report_path = out / "report.json"
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(report_path)
    return written

"""Multi-seed experiment drivers: ablations, design comparisons, sweeps.

Every experiment follows the same shape: generate one scenario per seed,
run each memory policy on the *same* scenario, evaluate, and aggregate
means across seeds. Sharing the scenario across policies makes the
comparisons paired, which is what the sign test assumes.

Parallelism is opt-in via the ``SASM_THREADS`` environment variable
(default 1). Seeds fan out over a thread pool and results are collected
in submission order, so output bytes do not depend on the thread count.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .memory import MemoryPolicy
from .metrics import MetricsReport, SequencePair, evaluate
from .simulator import Scenario, ScenarioConfig, generate_scenario
from .tracker import FrameResult, Tracker, TrackerConfig

__all__ = [
    "EPSILON_GRID",
    "MEMORY_GRID",
    "ABLATION_ROWS",
    "DESIGN_ROWS",
    "thread_count",
    "track_scenario",
    "evaluate_tracking",
    "run_single",
    "run_policy_suite",
    "mean",
    "paired_sign_test",
    "summarize",
    "ablation_table",
    "design_table",
    "sweep_table",
    "render_table_markdown",
    "render_table_csv",
]

EPSILON_GRID: Tuple[float, ...] = (0.05, 0.1, 0.2, 0.3, 0.4)
MEMORY_GRID: Tuple[int, ...] = (5, 10, 15, 20)

# Row label -> policy, in presentation order.
ABLATION_ROWS: Tuple[Tuple[str, MemoryPolicy], ...] = (
    ("baseline", MemoryPolicy.NONE),
    ("+sasm", MemoryPolicy.SPARSE),
    ("+sasm+ofs", MemoryPolicy.SPARSE_OFS),
)
DESIGN_ROWS: Tuple[Tuple[str, MemoryPolicy], ...] = (
    ("dense", MemoryPolicy.DENSE),
    ("sparse", MemoryPolicy.SPARSE),
    ("delaying", MemoryPolicy.DELAYING),
    ("sparse+ofs", MemoryPolicy.SPARSE_OFS),
)

_METRIC_FIELDS = ("hota", "deta", "assa", "mota", "idf1")


def thread_count() -> int:
    """Worker count from SASM_THREADS; invalid or missing means 1."""
    raw = os.environ.get("SASM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def track_scenario(
    scenario: Scenario,
    tracker_cfg: Optional[TrackerConfig] = None,
    policy: MemoryPolicy = MemoryPolicy.SPARSE_OFS,
) -> List[FrameResult]:
    """Run the tracker over every detection frame of a scenario."""
    tracker = Tracker(tracker_cfg, policy=policy)
    return [
        tracker.step(dets, frame_idx)
        for frame_idx, dets in enumerate(scenario.detections, start=1)
    ]


def evaluate_tracking(scenario: Scenario, results: Sequence[FrameResult]) -> MetricsReport:
    pred = [list(r.tracks) for r in results]
    return evaluate(SequencePair(gt=scenario.gt, pred=pred))


def run_single(
    scenario_cfg: ScenarioConfig,
    tracker_cfg: Optional[TrackerConfig],
    policy: MemoryPolicy,
) -> MetricsReport:
    scenario = generate_scenario(scenario_cfg)
    return evaluate_tracking(scenario, track_scenario(scenario, tracker_cfg, policy))


def _map_seeds(fn: Callable[[int], object], seeds: Sequence[int]) -> List[object]:
    """Apply fn to each seed, preserving seed order regardless of thread count."""
    workers = thread_count()
    if workers == 1 or len(seeds) <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


def run_policy_suite(
    base_cfg: ScenarioConfig,
    tracker_cfg: Optional[TrackerConfig],
    policies: Sequence[MemoryPolicy],
    seeds: Sequence[int],
) -> Dict[MemoryPolicy, List[MetricsReport]]:
    """Per-policy reports over seeds; each seed's scenario is shared by all policies."""
    policy_order = list(policies)

    def one_seed(seed: int) -> List[MetricsReport]:
        scenario = generate_scenario(dataclasses.replace(base_cfg, seed=seed))
        return [
            evaluate_tracking(scenario, track_scenario(scenario, tracker_cfg, policy))
            for policy in policy_order
        ]

    per_seed = _map_seeds(one_seed, seeds)
    return {
        policy: [reports[i] for reports in per_seed]
        for i, policy in enumerate(policy_order)
    }


def mean(values: Iterable[float]) -> float:
    xs = list(values)
    if not xs:
        raise ValueError("mean of empty sequence")
    return sum(xs) / len(xs)


def paired_sign_test(baseline: Sequence[float], treatment: Sequence[float]) -> Tuple[int, int, float]:
    """One-sided sign test that treatment > baseline on paired values.

    Ties are dropped. Returns (wins, n_informative, p_value) where the
    p-value is the exact binomial tail P(X >= wins) under fair coin flips.
    """
    if len(baseline) != len(treatment):
        raise ValueError("paired samples must have equal length")
    wins = sum(1 for b, t in zip(baseline, treatment) if t > b)
    losses = sum(1 for b, t in zip(baseline, treatment) if t < b)
    n = wins + losses
    if n == 0:
        return 0, 0, 1.0
    p = sum(math.comb(n, k) for k in range(wins, n + 1)) / 2.0**n
    return wins, n, p


def summarize(reports: Sequence[MetricsReport]) -> Dict[str, float]:
    """Mean of each core metric over seeds, plus mean switch count."""
    out = {name: mean(getattr(r, name) for r in reports) for name in _METRIC_FIELDS}
    out["idsw"] = mean(float(r.idsw) for r in reports)
    return out


def _metric_lists(reports: Sequence[MetricsReport], name: str) -> List[float]:
    return [getattr(r, name) for r in reports]


def _policy_rows(
    rows: Sequence[Tuple[str, MemoryPolicy]],
    base_cfg: ScenarioConfig,
    tracker_cfg: Optional[TrackerConfig],
    seeds: Sequence[int],
) -> Tuple[List[Dict[str, object]], Dict[MemoryPolicy, List[MetricsReport]]]:
    suite = run_policy_suite(base_cfg, tracker_cfg, [p for _, p in rows], seeds)
    table = []
    for label, policy in rows:
        entry: Dict[str, object] = {"variant": label}
        entry.update(summarize(suite[policy]))
        table.append(entry)
    return table, suite


def ablation_table(
    base_cfg: ScenarioConfig,
    tracker_cfg: Optional[TrackerConfig],
    seeds: Sequence[int],
) -> Tuple[List[Dict[str, object]], Dict[MemoryPolicy, List[MetricsReport]]]:
    """Stacked ablation: no memory, sparse memory, sparse memory + selector."""
    return _policy_rows(ABLATION_ROWS, base_cfg, tracker_cfg, seeds)


def design_table(
    base_cfg: ScenarioConfig,
    tracker_cfg: Optional[TrackerConfig],
    seeds: Sequence[int],
) -> Tuple[List[Dict[str, object]], Dict[MemoryPolicy, List[MetricsReport]]]:
    """Storage-rule comparison: dense vs sparse, delaying vs overlap-aware."""
    return _policy_rows(DESIGN_ROWS, base_cfg, tracker_cfg, seeds)


def sweep_table(
    base_cfg: ScenarioConfig,
    tracker_cfg: Optional[TrackerConfig],
    seeds: Sequence[int],
    policy: MemoryPolicy = MemoryPolicy.SPARSE_OFS,
) -> List[Dict[str, object]]:
    """Hyperparameter sweep: epsilon at fixed size, then size at fixed epsilon.

    Scenarios depend only on the seed, so they are generated once per seed
    and reused across every (epsilon, m_max) cell.
    """
    cfg = tracker_cfg if tracker_cfg is not None else TrackerConfig()
    cells: List[Tuple[str, float, int]] = []
    for eps in EPSILON_GRID:
        cells.append(("epsilon", eps, cfg.memory.m_max))
    for m in MEMORY_GRID:
        cells.append(("memory_len", cfg.memory.epsilon, m))

    def one_seed(seed: int) -> List[MetricsReport]:
        scenario = generate_scenario(dataclasses.replace(base_cfg, seed=seed))
        reports = []
        for _, eps, m in cells:
            memory = dataclasses.replace(cfg.memory, epsilon=eps, m_max=m)
            cell_cfg = dataclasses.replace(cfg, memory=memory)
            reports.append(evaluate_tracking(scenario, track_scenario(scenario, cell_cfg, policy)))
        return reports

    per_seed = _map_seeds(one_seed, seeds)
    table = []
    for i, (kind, eps, m) in enumerate(cells):
        entry: Dict[str, object] = {
            "sweep": kind,
            "epsilon": eps,
            "memory_len": m,
        }
        entry.update(summarize([reports[i] for reports in per_seed]))
        table.append(entry)
    return table


def _format_cell(value: object) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def render_table_markdown(table: Sequence[Dict[str, object]]) -> str:
    """Aligned markdown table; column order follows the first row's keys."""
    if not table:
        return ""
    columns = list(table[0].keys())
    cells = [[_format_cell(row[c]) for c in columns] for row in table]
    widths = [
        max(len(columns[j]), max(len(r[j]) for r in cells)) for j in range(len(columns))
    ]
    header = "| " + " | ".join(c.ljust(w) for c, w in zip(columns, widths)) + " |"
    rule = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
    body = [
        "| " + " | ".join(v.rjust(w) for v, w in zip(r, widths)) + " |" for r in cells
    ]
    return "\n".join([header, rule, *body])


def render_table_csv(table: Sequence[Dict[str, object]]) -> str:
    if not table:
        return ""
    columns = list(table[0].keys())
    lines = [",".join(columns)]
    lines.extend(",".join(_format_cell(row[c]) for c in columns) for row in table)
    return "\n".join(lines)

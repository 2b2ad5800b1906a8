"""Neutral-drift simulations pairing stratigraphic columns with perfect tracking.

Each replicate evolves a fixed-size population, records every birth and
death in a :class:`PerfectTracker`, and carries a :class:`StratColumn` per
individual, so reconstructions can be scored against exact ground truth.

Time convention: founders are born at generation 0 with depth-0 columns.
Under Wright-Fisher every generation replaces the whole population with
offspring that deposit on birth. Under Moran a generation is ``N``
birth-death events in which newborns copy their parent's column, after which
every live column deposits once; depths therefore stay equal to the
generation count in both models.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .column import WIDTHS, StratColumn, inherit, write_population
from .perfect import PerfectTracker
from .policies import PolicySpec, gap_bound
from .reconstruct import build_trie, pairwise_mrca_matrix, trie_to_tree
from .tree import PhyloTree, _pair, to_newick

MODELS = ("wright_fisher", "moran")


@dataclass(frozen=True)
class SimConfig:
    population_size: int
    generations: int
    policy: PolicySpec
    model: str = "wright_fisher"
    width: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError(f"population_size must be >= 2, got {self.population_size}")
        if self.generations < 1:
            raise ValueError(f"generations must be >= 1, got {self.generations}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.width not in WIDTHS:
            raise ValueError(f"width must be one of {WIDTHS}, got {self.width}")


@dataclass
class SimResult:
    config: SimConfig
    events: list[dict]
    columns: list[StratColumn]
    truth: PhyloTree
    tracker: PerfectTracker
    timelapse: list[dict] = field(default_factory=list)


def run_sim(config: SimConfig, tracker_mode: str = "pruning") -> SimResult:
    """Run one replicate; identical configs give identical results."""
    master = np.random.SeedSequence(config.seed)
    select_seq, column_seq = master.spawn(2)
    rng = np.random.default_rng(select_seq)
    n = config.population_size
    tracker = PerfectTracker(tracker_mode)
    events: list[dict] = []

    def birth(taxon, parent, time):
        tracker.on_birth(taxon, parent, time)
        events.append({"op": "birth", "id": taxon, "parent": parent, "time": time})

    def removal(taxon):
        tracker.on_removal(taxon)
        events.append({"op": "remove", "id": taxon})

    ids = list(range(n))
    pop = [
        StratColumn(config.policy, config.width, seed=s, id=str(i))
        for i, s in zip(ids, column_seq.spawn(n))
    ]
    for taxon in ids:
        birth(taxon, None, 0)
    next_id = n
    timelapse = [_snapshot(0, tracker, pop)]

    for gen in range(1, config.generations + 1):
        if config.model == "wright_fisher":
            parents = rng.integers(n, size=n)
            new_ids, new_pop = [], []
            for p in parents.tolist():
                birth(next_id, ids[p], gen)
                new_pop.append(inherit(pop[p], id=str(next_id)))
                new_ids.append(next_id)
                next_id += 1
            for taxon in ids:
                removal(taxon)
            ids, pop = new_ids, new_pop
        else:
            for _ in range(n):
                p, v = rng.integers(n, size=2).tolist()
                birth(next_id, ids[p], gen)
                child = pop[p].clone(id=str(next_id))
                removal(ids[v])
                ids[v], pop[v] = next_id, child
                next_id += 1
            for col in pop:
                col.deposit()
        timelapse.append(_snapshot(gen, tracker, pop))

    return SimResult(config, events, pop, tracker.extant_tree(), tracker, timelapse)


def _snapshot(gen: int, tracker: PerfectTracker, pop: Sequence[StratColumn]) -> dict:
    sizes = [len(c) for c in pop]
    return {
        "generation": gen,
        "live": len(pop),
        "tracker_nodes": len(tracker),
        "mean_strata": sum(sizes) / len(sizes),
        "max_strata": max(sizes),
    }


def true_divergence_times(truth: PhyloTree) -> dict[tuple, int | None]:
    """Last generation each pair of leaves shared a lineage (``None`` if never).

    Two lineages split below their common ancestor ``A`` at the earlier birth
    of the two children of ``A`` they descend through; their columns last
    agree one generation before. A leaf standing for ``A`` itself does not
    count as a split.
    """
    below: dict[int, list] = {}
    out: dict[tuple, int | None] = {}
    for node in truth.postorder():
        if node.is_leaf:
            below[id(node)] = [node.label]
            continue
        groups = []
        for child in node.children:
            is_self = (
                child.is_leaf and node.taxon is not None and str(child.label) == str(node.taxon)
            )
            groups.append((math.inf if is_self else child.origin_time, below.pop(id(child))))
        for i, (ti, left) in enumerate(groups):
            for tj, right in groups[i + 1 :]:
                split = min(ti, tj) - 1
                value = None if split < 0 else int(split)
                for x in left:
                    for y in right:
                        out[_pair(x, y)] = value
        below[id(node)] = [x for _, g in groups for x in g]
    return out


@dataclass
class ComparisonReport:
    pairs: int
    containment_rate: float
    mean_window_width: float
    max_normalized_error: float
    fork_containment_rate: float
    window_ceiling_violations: int
    trie_stats: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def evaluate(truth: PhyloTree, columns: Sequence[StratColumn]) -> ComparisonReport:
    """Score MRCA windows and trie reconstruction against tracked truth."""
    labels = {str(x) for x in truth.leaf_labels()}
    ids = [str(c.id) for c in columns]
    if labels != set(ids) or len(ids) != len(set(ids)):
        missing = sorted(labels.symmetric_difference(ids))[:5]
        raise ValueError(f"truth leaves and column ids differ (e.g. {missing})")
    truth_div = true_divergence_times(truth)
    matrix = pairwise_mrca_matrix(columns)
    root, stats = build_trie(columns)
    forks = trie_to_tree(root).mrca_times()

    contained = forked = windows = violations = 0
    widths: list[int] = []
    worst = 0.0
    total = 0
    for i in range(len(columns)):
        for j in range(i + 1, len(columns)):
            a, b = columns[i], columns[j]
            key = _pair(str(a.id), str(b.id))
            actual = truth_div[key]
            bounds = matrix[i, j]
            total += 1
            if bounds is None:
                contained += actual is None
                continue
            windows += 1
            if actual is not None and actual in bounds:
                contained += 1
            if bounds.lower <= forks[key] <= bounds.upper:
                forked += 1
            depth = min(a.depth, b.depth)
            widths.append(bounds.width)
            if bounds.width > gap_bound(a.policy, depth, bounds.lower):
                violations += 1
            recency = depth - (actual if actual is not None else 0)
            worst = max(worst, bounds.width / max(1, recency))
    return ComparisonReport(
        pairs=total,
        containment_rate=contained / total if total else 1.0,
        mean_window_width=float(np.mean(widths)) if widths else 0.0,
        max_normalized_error=worst,
        fork_containment_rate=forked / windows if windows else 1.0,
        window_ceiling_violations=violations,
        trie_stats=stats.as_dict(),
    )


def timelapse_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf,
        fieldnames=["generation", "live", "tracker_nodes", "mean_strata", "max_strata"],
        lineterminator="\n",
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


ARTIFACTS = ("events.jsonl", "population.jsonl", "truth.nwk", "timelapse.csv")


def write_artifacts(result: SimResult, out_dir: str | Path) -> dict[str, Path]:
    """Write the event log, population, truth tree and timelapse of a run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    texts = {
        "events.jsonl": "".join(json.dumps(e, sort_keys=True) + "\n" for e in result.events),
        "population.jsonl": "".join(line + "\n" for line in write_population(result.columns)),
        "truth.nwk": to_newick(result.truth) + "\n",
        "timelapse.csv": timelapse_csv(result.timelapse),
    }
    paths = {}
    for name, text in texts.items():
        paths[name] = out / name
        paths[name].write_text(text)
    return paths

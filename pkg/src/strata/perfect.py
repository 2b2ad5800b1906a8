"""Centralized perfect phylogeny tracking, with optional extinct-lineage pruning.

Unit-operation accounting: one unit per node insertion, per liveness flip,
per node removal and per counter change.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator

from .tree import PhyloTree, TreeNode


@dataclass
class TaxonRecord:
    id: Hashable
    parent: Hashable | None
    birth_time: int
    alive: bool = True
    living_offspring_lineages: int = 0


class PerfectTracker:
    """Forest of taxon records fed by birth and removal events.

    In ``"pruning"`` mode a record is deleted as soon as it is dead and no
    live taxon descends from it; each parent counts its children still in the
    forest. ``"naive"`` mode keeps every record ever created.
    """

    def __init__(self, mode: str = "pruning", compact_stems: bool = False):
        if mode not in ("naive", "pruning"):
            raise ValueError(f"mode must be 'naive' or 'pruning', got {mode!r}")
        self.mode = mode
        self.compact_stems = compact_stems
        self.records: dict[Hashable, TaxonRecord] = {}
        self.roots: set[Hashable] = set()
        self.op_counter = 0
        self.removal_ops = 0
        self.births = 0
        self.removals = 0

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, taxon) -> bool:
        return taxon in self.records

    def live(self) -> list:
        return [r.id for r in self.records.values() if r.alive]

    def on_birth(self, child_id: Hashable, parent_id: Hashable | None = None, birth_time: int = 0) -> None:
        if child_id in self.records:
            raise KeyError(f"duplicate taxon id {child_id!r}")
        if parent_id is not None and parent_id not in self.records:
            raise KeyError(f"unknown parent id {parent_id!r}")
        self.records[child_id] = TaxonRecord(child_id, parent_id, birth_time)
        self.op_counter += 1
        self.births += 1
        if parent_id is None:
            self.roots.add(child_id)
        elif self.mode == "pruning":
            self.records[parent_id].living_offspring_lineages += 1
            self.op_counter += 1

    def on_removal(self, taxon_id: Hashable) -> int:
        """Mark ``taxon_id`` dead and prune; return the number of records removed."""
        rec = self.records.get(taxon_id)
        if rec is None:
            raise KeyError(f"unknown taxon id {taxon_id!r}")
        if not rec.alive:
            raise ValueError(f"taxon {taxon_id!r} is already dead")
        before = self.op_counter
        rec.alive = False
        self.op_counter += 1
        self.removals += 1
        removed = 0
        if self.mode == "pruning":
            while rec is not None and not rec.alive and rec.living_offspring_lineages == 0:
                del self.records[rec.id]
                self.roots.discard(rec.id)
                self.op_counter += 1
                removed += 1
                if rec.parent is None:
                    break
                rec = self.records[rec.parent]
                rec.living_offspring_lineages -= 1
                self.op_counter += 1
            if self.compact_stems:
                self._compact_stems()
        self.removal_ops += self.op_counter - before
        return removed

    def _compact_stems(self) -> None:
        """Drop dead roots with exactly one surviving lineage, promoting the child."""
        for root in list(self.roots):
            rec = self.records[root]
            while not rec.alive and rec.living_offspring_lineages == 1:
                (child,) = self._children_of(rec.id)
                del self.records[rec.id]
                self.roots.discard(rec.id)
                rec = self.records[child]
                rec.parent = None
                self.roots.add(child)

    def _children_of(self, taxon) -> list:
        return [r.id for r in self.records.values() if r.parent == taxon]

    def apply(self, event: dict) -> None:
        op = event.get("op")
        if op == "birth":
            self.on_birth(event["id"], event.get("parent"), event.get("time", 0))
        elif op == "remove":
            self.on_removal(event["id"])
        else:
            raise ValueError(f"unknown event op {op!r}")

    def living_offspring_recount(self) -> dict:
        """Children-in-forest counts recomputed from scratch (for audits)."""
        counts = {k: 0 for k in self.records}
        for r in self.records.values():
            if r.parent is not None:
                counts[r.parent] += 1
        return counts

    def extant_tree(self) -> PhyloTree:
        """Current forest as a tree; a synthetic root joins multiple roots.

        A live taxon that also has descendants becomes an internal node with a
        zero-length leaf for itself, so every live taxon is a leaf.
        """
        nodes: dict[Hashable, TreeNode] = {}
        for rec in self.records.values():
            nodes[rec.id] = TreeNode(rec.birth_time, taxon=rec.id)
        for rec in sorted(self.records.values(), key=lambda r: (r.birth_time, str(r.id))):
            if rec.parent is not None:
                nodes[rec.parent].add(nodes[rec.id])
        for rec in self.records.values():
            node = nodes[rec.id]
            if node.is_leaf:
                node.label = str(rec.id)
            elif rec.alive:
                node.add(TreeNode(rec.birth_time, label=str(rec.id), taxon=rec.id))
        roots = sorted(self.roots, key=lambda r: (self.records[r].birth_time, str(r)))
        if len(roots) == 1:
            return PhyloTree(nodes[roots[0]])
        top = TreeNode(0)
        for r in roots:
            top.add(nodes[r])
        return PhyloTree(top)


def read_events(lines: Iterable[str]) -> Iterator[dict]:
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            event = json.loads(line)
        except json.JSONDecodeError as err:
            raise ValueError(f"line {lineno}: malformed event ({err})") from None
        if not isinstance(event, dict) or event.get("op") not in ("birth", "remove"):
            raise ValueError(f"line {lineno}: event must have op 'birth' or 'remove'")
        yield event


def replay(events: Iterable[dict], mode: str = "pruning") -> PerfectTracker:
    tracker = PerfectTracker(mode)
    for event in events:
        tracker.apply(event)
    return tracker

"""Population-level phylogeny reconstruction from stratigraphic columns.

Columns share differentia up to their lineages' divergence, so a trie keyed by
``(time, differentia)`` recovers the tree: columns are inserted youngest first
and fork off wherever their next stratum is missing from the trie.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .column import MrcaBounds, StratColumn, expected_spurious_matches, mrca_bounds
from .tree import PhyloTree, TreeNode, parse_newick, to_newick

__all__ = [
    "TrieNode",
    "TrieStats",
    "build_trie",
    "trie_to_tree",
    "reconstruct_tree",
    "correct_origin_times",
    "pairwise_mrca_matrix",
    "matrix_to_csv",
    "to_newick",
    "parse_newick",
]


class TrieNode:
    __slots__ = ("time", "differentia", "parent", "children", "members")

    def __init__(self, time: int, differentia: int | None, parent: "TrieNode | None" = None):
        self.time = time
        self.differentia = differentia
        self.parent = parent
        self.children: dict[tuple[int, int], TrieNode] = {}
        self.members: list = []

    def add_child(self, time: int, differentia: int) -> "TrieNode":
        child = TrieNode(time, differentia, self)
        self.children[(time, differentia)] = child
        return child

    def __repr__(self):
        return f"TrieNode(t={self.time}, d={self.differentia}, children={len(self.children)})"


@dataclass
class TrieStats:
    """Per-insertion wildcard instrumentation, in insertion order.

    ``explored[i]`` counts wildcard edges followed while placing column ``i``;
    ``skipped[i]`` counts distinct trie time points that column had pruned.
    """

    order: list = field(default_factory=list)
    explored: list[int] = field(default_factory=list)
    skipped: list[int] = field(default_factory=list)

    @property
    def total_explored(self) -> int:
        return sum(self.explored)

    def as_dict(self) -> dict:
        return {
            "insertions": len(self.explored),
            "wildcard_edges_explored": self.total_explored,
            "max_wildcard_edges_per_insertion": max(self.explored, default=0),
            "max_wildcard_positions": max(self.skipped, default=0),
        }


def _check_population(columns: Sequence[StratColumn]) -> None:
    if not columns:
        return
    first = columns[0]
    for col in columns[1:]:
        if col.policy != first.policy:
            raise ValueError(f"mixed policies: {first.policy} vs {col.policy}")
        if col.width != first.width:
            raise ValueError(f"mixed differentia widths: {first.width} vs {col.width}")
    for col in columns:
        if col.depth is None:
            raise ValueError(f"column {col.id!r} is empty")


class _Placement:
    """Best-evidenced path search for one column, memoized per (node, index)."""

    def __init__(self, strata: list[tuple[int, int]]):
        self.strata = strata
        self.memo: dict[tuple[int, int], tuple[int, list[TrieNode]]] = {}
        self.explored = 0
        self.skipped: set[int] = set()

    def best(self, node: TrieNode, i: int) -> tuple[int, list[TrieNode]]:
        strata = self.strata
        path: list[TrieNode] = []
        score = 0
        while i < len(strata):
            t, d = strata[i]
            exact = node.children.get((t, d))
            wild = [c for c in node.children.values() if c.time < t]
            if not wild:
                if exact is None:
                    break
                path.append(exact)
                node, i, score = exact, i + 1, score + 1
                continue
            s, tail = self._branch(node, i, exact, wild)
            return score + s, path + tail
        return score, path

    def _branch(self, node, i, exact, wild):
        key = (id(node), i)
        if key in self.memo:
            return self.memo[key]
        options = [(c, True) for c in wild]
        if exact is not None:
            options.append((exact, False))
        # ties go to the smallest differentia, then the smallest time
        options.sort(key=lambda o: (o[0].differentia, o[0].time))
        best_score, best_path = 0, []
        for child, is_wild in options:
            if is_wild:
                self.explored += 1
                self.skipped.add(child.time)
                s, tail = self.best(child, i)
            else:
                s, tail = self.best(child, i + 1)
                s += 1
            if s > best_score:
                best_score, best_path = s, [child] + tail
        self.memo[key] = (best_score, best_path)
        return best_score, best_path


def build_trie(columns: Sequence[StratColumn]) -> tuple[TrieNode, TrieStats]:
    """Insert columns youngest first (ties by id) into a fresh trie.

    Where the trie holds a time point the column has pruned, every branch is
    tried and the one matching the longest run of the column's strata wins.
    """
    _check_population(columns)
    root = TrieNode(-1, None)
    stats = TrieStats()
    for col in sorted(columns, key=lambda c: (c.depth, str(c.id))):
        strata = list(col.strata())
        search = _Placement(strata)
        consumed, path = search.best(root, 0)
        node = path[-1] if path else root
        for t, d in strata[consumed:]:
            node = node.add_child(t, d)
        node.members.append(col.id)
        stats.order.append(col.id)
        stats.explored.append(search.explored)
        stats.skipped.append(len(search.skipped))
    return root, stats


def trie_to_tree(root: TrieNode, polytomy_mode: str = "keep") -> PhyloTree:
    """Tree of the trie with unifurcations collapsed.

    Internal nodes take the time of their trie node (the last stratum shared by
    the clade). ``polytomy_mode="bifurcate"`` splits each multifurcation into a
    left-deep cascade of bifurcations joined by zero-length edges.
    """
    if polytomy_mode not in ("keep", "bifurcate"):
        raise ValueError(f"polytomy_mode must be 'keep' or 'bifurcate', got {polytomy_mode!r}")
    top = TreeNode(0, key=(0, -1))
    mapping = {id(root): top}
    stack = [root]
    while stack:
        tnode = stack.pop()
        here = mapping[id(tnode)]
        kids = sorted(tnode.children.values(), key=lambda c: (c.time, c.differentia))
        if kids and tnode.parent is not None:
            here.gap = float(np.mean([c.time - tnode.time for c in kids]))
        for member in sorted(tnode.members, key=str):
            here.add(TreeNode(tnode.time, label=member, key=(tnode.time, tnode.differentia, str(member))))
        for child in kids:
            node = here.add(TreeNode(child.time, key=(child.time, child.differentia)))
            mapping[id(child)] = node
            stack.append(child)
    tree = PhyloTree(top).collapse_unifurcations()
    if polytomy_mode == "bifurcate":
        _bifurcate(tree)
    return tree


def _bifurcate(tree: PhyloTree) -> None:
    for node in list(tree.preorder()):
        if len(node.children) <= 2:
            continue
        kids = sorted(node.children, key=lambda c: c.key)
        acc = kids[0]
        for nxt in kids[1:-1]:
            joint = TreeNode(node.origin_time, gap=node.gap, key=node.key)
            joint.add(acc)
            joint.add(nxt)
            acc = joint
        node.children = []
        node.add(acc)
        node.add(kids[-1])


def reconstruct_tree(columns: Sequence[StratColumn], polytomy_mode: str = "keep") -> PhyloTree:
    root, _ = build_trie(columns)
    return trie_to_tree(root, polytomy_mode)


def correct_origin_times(tree: PhyloTree, width: int) -> PhyloTree:
    """Shift internal nodes earlier by the expected spurious-match overshoot.

    The shift is ``expected_spurious_matches(width)`` times the node's mean
    gap to its children, never placing a node before its parent (or time 0).
    """
    bias = float(expected_spurious_matches(width))
    out = tree.copy()
    for node in out.preorder():
        if node.is_leaf:
            continue
        floor = node.parent.origin_time if node.parent is not None else 0
        gap = node.gap if node.gap is not None else 1.0
        node.origin_time = max(floor, node.origin_time - bias * gap)
    return out


def pairwise_mrca_matrix(columns: Sequence[StratColumn]) -> np.ndarray:
    """Symmetric object array of :class:`MrcaBounds` (``None`` for unrelated pairs)."""
    _check_population(columns)
    n = len(columns)
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = mrca_bounds(columns[i], columns[j])
    return out


def matrix_to_csv(columns: Sequence[StratColumn], matrix: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id_a", "id_b", "lower", "upper", "confidence"])
    for i in range(len(columns)):
        for j in range(i + 1, len(columns)):
            bounds: MrcaBounds | None = matrix[i, j]
            if bounds is None:
                writer.writerow([columns[i].id, columns[j].id, "", "", ""])
            else:
                writer.writerow(
                    [columns[i].id, columns[j].id, bounds.lower, bounds.upper,
                     repr(bounds.collision_confidence)]
                )
    return buf.getvalue()

"""Rooted phylogenies with origin times, plus Newick reading and writing."""

from __future__ import annotations

import re
from typing import Iterator


class TreeNode:
    """Tree vertex. ``origin_time`` is absolute; edge lengths are differences.

    Leaves carry a ``label``. Internal nodes may carry the ``taxon`` they stand
    for (ground-truth trees do, reconstructed trees do not).
    """

    __slots__ = ("label", "taxon", "origin_time", "children", "parent", "gap", "key")

    def __init__(self, origin_time=0, label=None, taxon=None, gap=None, key=()):
        self.label = label
        self.taxon = taxon
        self.origin_time = origin_time
        self.children: list[TreeNode] = []
        self.parent: TreeNode | None = None
        self.gap = gap
        self.key = key

    def add(self, child: "TreeNode") -> "TreeNode":
        child.parent = self
        self.children.append(child)
        return child

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def edge_length(self):
        if self.parent is None:
            return self.origin_time
        return self.origin_time - self.parent.origin_time

    def __repr__(self):
        name = self.label if self.label is not None else self.taxon
        return f"TreeNode({name!r}, t={self.origin_time}, children={len(self.children)})"


class PhyloTree:
    def __init__(self, root: TreeNode):
        self.root = root

    def preorder(self) -> Iterator[TreeNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def postorder(self) -> Iterator[TreeNode]:
        out = list(self.preorder())
        return reversed(out)

    def leaves(self) -> list[TreeNode]:
        return [n for n in self.preorder() if n.is_leaf]

    def leaf_labels(self) -> list:
        return [n.label for n in self.leaves()]

    def __len__(self) -> int:
        return sum(1 for _ in self.preorder())

    def copy(self) -> "PhyloTree":
        mapping = {}
        for node in self.preorder():
            dup = TreeNode(node.origin_time, node.label, node.taxon, node.gap, node.key)
            mapping[id(node)] = dup
            if node.parent is not None:
                mapping[id(node.parent)].add(dup)
        return PhyloTree(mapping[id(self.root)])

    def collapse_unifurcations(self) -> "PhyloTree":
        """Copy with every single-child node spliced out (the root included)."""
        tree = self.copy()
        root = tree.root
        while len(root.children) == 1:
            root = root.children[0]
        root.parent = None
        stack = [root]
        while stack:
            node = stack.pop()
            children = []
            for child in node.children:
                while len(child.children) == 1:
                    child = child.children[0]
                child.parent = node
                children.append(child)
            node.children = children
            stack.extend(children)
        return PhyloTree(root)

    def signature(self) -> tuple:
        """Canonical multiset of (clade leaf labels, origin time) over all nodes.

        Two trees with equal signatures are isomorphic with matching times.
        """
        clades: dict[int, frozenset] = {}
        items = []
        for node in self.postorder():
            if node.is_leaf:
                clade = frozenset([node.label])
            else:
                clade = frozenset().union(*(clades[id(c)] for c in node.children))
            clades[id(node)] = clade
            items.append((tuple(sorted(map(str, clade))), node.origin_time))
        return tuple(sorted(items))

    def mrca_times(self) -> dict[tuple, object]:
        """Origin time of the deepest shared node for every unordered leaf pair."""
        below: dict[int, list] = {}
        out = {}
        for node in self.postorder():
            if node.is_leaf:
                below[id(node)] = [node.label]
                continue
            groups = [below.pop(id(c)) for c in node.children]
            for i, left in enumerate(groups):
                for right in groups[i + 1 :]:
                    for x in left:
                        for y in right:
                            out[_pair(x, y)] = node.origin_time
            below[id(node)] = [x for g in groups for x in g]
        return out


def _pair(x, y) -> tuple:
    return (x, y) if str(x) <= str(y) else (y, x)


# --- Newick -------------------------------------------------------------------

_PLAIN = re.compile(r"^[^\s(),:;'\[\]]+$")


def _quote(label) -> str:
    text = str(label)
    if _PLAIN.match(text):
        return text
    return "'" + text.replace("'", "''") + "'"


def _length(value) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def to_newick(tree: PhyloTree) -> str:
    """Newick text with branch lengths in generations.

    >>> root = TreeNode(0)
    >>> _ = root.add(TreeNode(3, label="a")); _ = root.add(TreeNode(3, label="b"))
    >>> to_newick(PhyloTree(root))
    '(a:3,b:3):0;'
    """
    parts: list[str] = []
    # iterative post-order writer; chains can be deeper than the recursion limit
    stack: list[tuple[TreeNode, int]] = [(tree.root, 0)]
    while stack:
        node, state = stack.pop()
        if node is None:
            parts.append(",")
            continue
        if node.children and state == 0:
            parts.append("(")
            stack.append((node, 1))
            for i, child in enumerate(reversed(node.children)):
                stack.append((child, 0))
                if i < len(node.children) - 1:
                    stack.append((None, 2))  # type: ignore[arg-type]
            continue
        if node.children:
            parts.append(")")
        name = node.label if node.is_leaf else node.taxon
        if name is not None:
            parts.append(_quote(name))
        parts.append(":" + _length(node.edge_length))
    return "".join(parts) + ";"


_TOKEN = re.compile(r"\s*('(?:[^']|'')*'|[(),:;]|[^\s(),:;']+)")


def parse_newick(text: str) -> PhyloTree:
    """Parse Newick produced by :func:`to_newick` (or any tree with lengths).

    Origin times are accumulated from the root's own branch length downward;
    a missing length counts as zero.
    """
    tokens = [m.group(1) for m in _TOKEN.finditer(text.strip())]
    if not tokens or tokens[-1] != ";":
        raise ValueError("Newick text must end with ';'")
    lengths: dict[int, float] = {}
    names: dict[int, str] = {}
    root = TreeNode()
    node = root
    stack: list[TreeNode] = []
    expect_length = False
    for tok in tokens[:-1]:
        if expect_length:
            lengths[id(node)] = float(tok)
            expect_length = False
        elif tok == "(":
            stack.append(node)
            node = node.add(TreeNode())
        elif tok == ",":
            if not stack:
                raise ValueError("unbalanced ',' in Newick text")
            node = stack[-1].add(TreeNode())
        elif tok == ")":
            if not stack:
                raise ValueError("unbalanced ')' in Newick text")
            node = stack.pop()
        elif tok == ":":
            expect_length = True
        else:
            if tok.startswith("'"):
                tok = tok[1:-1].replace("''", "'")
            names[id(node)] = tok
    if stack:
        raise ValueError("unbalanced '(' in Newick text")
    tree = PhyloTree(root)
    for n in tree.preorder():
        base = n.parent.origin_time if n.parent is not None else 0
        t = base + lengths.get(id(n), 0.0)
        n.origin_time = int(t) if float(t).is_integer() else t
        name = names.get(id(n))
        if n.is_leaf:
            n.label = name
        else:
            n.taxon = name
    return tree

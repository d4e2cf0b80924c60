"""Alternating discrete/continuous search tree with an append-only backup log."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterator


@dataclass(eq=False)
class KappaEntry:
    """One sampled continuous parameter under a continuous node, with its outcome."""

    index: int
    kappa: Any
    child: DiscreteNode
    reward: float
    feasible: bool
    n: int = 0
    q: float = 0.0


@dataclass(eq=False)
class ContinuousNode:
    id: int
    action: Hashable
    n: int = 0
    entries: list[KappaEntry] = field(default_factory=list)

    @property
    def U(self) -> list[Any]:
        return [e.kappa for e in self.entries]

    @property
    def Q(self) -> dict[int, float]:
        return {e.index: e.q for e in self.entries}

    def find(self, kappa: Any) -> KappaEntry | None:
        for e in self.entries:
            if e.kappa == kappa:
                return e
        return None


@dataclass(eq=False)
class DiscreteNode:
    id: int
    state: Any
    depth: int
    n: int = 0
    children: dict[Hashable, ContinuousNode] = field(default_factory=dict)
    edge_n: dict[Hashable, int] = field(default_factory=dict)
    edge_q: dict[Hashable, float] = field(default_factory=dict)

    @property
    def U(self) -> list[Hashable]:
        """Tried discrete actions in insertion order."""
        return list(self.children)

    @property
    def Q(self) -> dict[Hashable, float]:
        return dict(self.edge_q)


@dataclass(frozen=True)
class BackupRecord:
    node: int
    level: str  # "discrete" or "continuous"
    key: str
    total: float
    q: float
    n: int
    phase: str  # "warmup" or "search"


@dataclass(eq=False)
class SearchTree:
    """Owns node ids and the backup log; one tree per planning call."""

    root: DiscreteNode | None = None
    next_id: int = 0
    log: list[BackupRecord] = field(default_factory=list)
    record_log: bool = True

    def new_discrete(self, state: Any, depth: int) -> DiscreteNode:
        node = DiscreteNode(self.next_id, state, depth)
        self.next_id += 1
        return node

    def new_continuous(self, action: Hashable) -> ContinuousNode:
        node = ContinuousNode(self.next_id, action)
        self.next_id += 1
        return node

    def backup_entry(self, cont: ContinuousNode, entry: KappaEntry, total: float, phase: str) -> None:
        entry.n += 1
        entry.q += (total - entry.q) / entry.n
        if self.record_log:
            self.log.append(BackupRecord(cont.id, "continuous", str(entry.index), total, entry.q, entry.n, phase))

    def backup_edge(self, node: DiscreteNode, action: Hashable, total: float, phase: str) -> None:
        n = node.edge_n.get(action, 0) + 1
        q = node.edge_q.get(action, 0.0)
        q += (total - q) / n
        node.edge_n[action] = n
        node.edge_q[action] = q
        if self.record_log:
            self.log.append(BackupRecord(node.id, "discrete", str(action), total, q, n, phase))

    def walk(self) -> Iterator[DiscreteNode | ContinuousNode]:
        if self.root is None:
            return
        stack: list[DiscreteNode | ContinuousNode] = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if isinstance(node, DiscreteNode):
                stack.extend(reversed(list(node.children.values())))
            else:
                stack.extend(reversed([e.child for e in node.entries]))

    def signature(self) -> list[tuple]:
        """Structural fingerprint (ids, counts, values) for exact tree comparison."""
        out = []
        for node in self.walk():
            if isinstance(node, DiscreteNode):
                edges = tuple((str(a), node.edge_n.get(a, 0), node.edge_q.get(a, 0.0)) for a in node.children)
                out.append(("D", node.id, node.depth, node.n, repr(node.state), edges))
            else:
                entries = tuple((e.index, repr(e.kappa), e.n, e.q, e.reward, e.feasible, e.child.id) for e in node.entries)
                out.append(("C", node.id, str(node.action), node.n, entries))
        return out

    def write_log(self, path) -> None:
        with open(path, "w") as fh:
            for rec in self.log:
                fh.write(json.dumps(rec.__dict__) + "\n")

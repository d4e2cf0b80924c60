"""UCT with progressive widening over hybrid actions, warm-up from concrete plans, rollouts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Protocol, Sequence

import numpy as np

from stalm.planner.config import PlannerConfig
from stalm.planner.tree import ContinuousNode, DiscreteNode, KappaEntry, SearchTree


class PlanningModel(Protocol):
    """What the search needs from a domain; :class:`stalm.motion.Env` satisfies it."""

    def legal_actions(self, s: Any) -> Sequence[Hashable]: ...

    def sample(self, s: Any, a: Hashable, rng: np.random.Generator) -> Any: ...

    def step(self, s: Any, a: Hashable, k: Any) -> tuple[Any, float, bool]: ...

    def is_goal(self, s: Any) -> bool: ...

    def is_failed(self, s: Any) -> bool: ...


# value(state, depth, previous action, previous state) -> estimate
ValueFn = Callable[[Any, int, Hashable, Any], float]


class PWViolation(AssertionError):
    """Raised if a continuous node is visited with no parameters and no room to sample."""


@dataclass(frozen=True)
class Step:
    action: Hashable
    params: Any
    reward: float
    state: Any
    feasible: bool


@dataclass(frozen=True)
class ConcretePlan:
    """Executed prefix of a task plan: each action with its sampled parameters and outcome."""

    start: Any
    steps: tuple[Step, ...]
    achieved_goal: bool

    @property
    def end_state(self) -> Any:
        return self.steps[-1].state if self.steps else self.start

    @property
    def actions(self) -> tuple[Hashable, ...]:
        return tuple(st.action for st in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class SearchStats:
    simulations: int = 0
    rollouts: int = 0
    samples: int = 0
    value_calls: int = 0
    max_depth: int = 0
    pw_checks: int = 0
    # (|U|, n) at every draw instant; kept only when the config asks for a trace
    pw_draws: list[tuple[int, int]] = field(default_factory=list)


@dataclass(eq=False)
class Search:
    """One planning call: a model, a config, an RNG stream and a tree."""

    model: PlanningModel
    cfg: PlannerConfig
    value_fn: ValueFn | None = None
    rng: np.random.Generator = None  # type: ignore[assignment]
    tree: SearchTree = field(default_factory=SearchTree)
    stats: SearchStats = field(default_factory=SearchStats)

    def __post_init__(self) -> None:
        if self.rng is None:
            self.rng = np.random.default_rng(self.cfg.seed)

    # -------------------------------------------------------------- helpers

    def terminal(self, s: Any, depth: int) -> bool:
        return depth >= self.cfg.horizon or self.model.is_failed(s) or self.model.is_goal(s)

    def value(self, s: Any, depth: int, a: Hashable, parent: Any) -> float:
        self.stats.value_calls += 1
        if self.value_fn is not None:
            return self.value_fn(s, depth, a, parent)
        return self.rollout(s, depth)

    def rollout(self, s: Any, depth: int) -> float:
        """Uniform-random policy for at most ``min(rollout_depth, H - depth)`` steps."""
        self.stats.rollouts += 1
        m = self.model
        if m.is_failed(s) or m.is_goal(s):
            return 0.0
        total, discount = 0.0, 1.0
        for _ in range(max(0, min(self.cfg.rollout_depth, self.cfg.horizon - depth))):
            acts = m.legal_actions(s)
            if not acts:
                break
            a = acts[int(self.rng.integers(len(acts)))]
            k = m.sample(s, a, self.rng)
            self.stats.samples += 1
            s, r, _ = m.step(s, a, k)
            total += discount * r
            discount *= self.cfg.gamma
            if m.is_failed(s) or m.is_goal(s):
                break
        return total

    def ucb(self, q: float, n_parent: int, n_child: int) -> float:
        return q + self.cfg.c_uct * math.sqrt(math.log(n_parent) / (1 + n_child))

    def pw_bound(self, n: int) -> float:
        return self.cfg.k_alpha * n**self.cfg.c_alpha

    # -------------------------------------------------------------- tree building

    def root_for(self, s: Any, depth: int) -> DiscreteNode:
        if self.tree.root is None:
            self.tree.root = self.tree.new_discrete(s, depth)
        return self.tree.root

    def expand(self, node: DiscreteNode, a: Hashable) -> ContinuousNode:
        cont = node.children.get(a)
        if cont is None:
            cont = self.tree.new_continuous(a)
            node.children[a] = cont
        return cont

    def insert(self, cont: ContinuousNode, node: DiscreteNode, kappa: Any, outcome: tuple[Any, float, bool]) -> KappaEntry:
        entry = cont.find(kappa)
        if entry is None:
            s2, r, ok = outcome
            child = self.tree.new_discrete(s2, node.depth + 1)
            entry = KappaEntry(len(cont.entries), kappa, child, r, ok)
            cont.entries.append(entry)
        return entry

    # -------------------------------------------------------------- simulate

    def simulate(self, node: DiscreteNode, s: Any, depth: int) -> float:
        self.stats.max_depth = max(self.stats.max_depth, depth)
        node.n += 1
        acts = list(self.model.legal_actions(s))
        if not acts:
            return 0.0
        best, best_score = None, -math.inf
        for a in acts:
            score = self.ucb(node.edge_q.get(a, 0.0), node.n, node.edge_n.get(a, 0))
            if score > best_score:
                best, best_score = a, score
        a = best
        cont = self.expand(node, a)
        cont.n += 1
        self.stats.pw_checks += 1
        if len(cont.entries) <= self.pw_bound(cont.n):
            if self.cfg.trace:
                self.stats.pw_draws.append((len(cont.entries), cont.n))
            kappa = self.model.sample(s, a, self.rng)
            self.stats.samples += 1
            if cont.find(kappa) is None:
                self.insert(cont, node, kappa, self.model.step(s, a, kappa))
        elif not cont.entries:
            raise PWViolation("continuous node has no entries to select from")
        entry = max(cont.entries, key=lambda e: (self.ucb(e.q, cont.n, e.n), -e.index))
        child, r = entry.child, entry.reward
        if self.terminal(child.state, depth + 1):
            child.n += 1
            total = r
        elif child.n == 0:
            child.n += 1
            total = r + self.cfg.gamma * self.value(child.state, depth + 1, a, s)
        else:
            total = r + self.cfg.gamma * self.simulate(child, child.state, depth + 1)
        self.tree.backup_entry(cont, entry, total, "search")
        self.tree.backup_edge(node, a, total, "search")
        return total

    # -------------------------------------------------------------- warm-up

    def add_to_tree(self, node: DiscreteNode, plan: ConcretePlan, i: int) -> float:
        step = plan.steps[i]
        a = step.action
        cont = self.expand(node, a)
        cont.n += 1
        entry = self.insert(cont, node, step.params, (step.state, step.reward, step.feasible))
        child = entry.child
        child.n += 1
        r = entry.reward
        if i == len(plan.steps) - 1 or self.terminal(child.state, child.depth):
            if self.terminal(child.state, child.depth):
                total = r
            else:
                total = r + self.cfg.gamma * self.value(child.state, child.depth, a, node.state)
        else:
            total = r + self.cfg.gamma * self.add_to_tree(child, plan, i + 1)
        self.tree.backup_entry(cont, entry, total, "warmup")
        self.tree.backup_edge(node, a, total, "warmup")
        return total

    def warm_up(self, root: DiscreteNode, plans: Sequence[ConcretePlan]) -> DiscreteNode:
        for plan in plans:
            if not plan.steps:
                continue
            root.n += 1
            self.add_to_tree(root, plan, 0)
        return root


def best_root_entry(root: DiscreteNode, legal: Sequence[Hashable] | None = None) -> tuple[Hashable, KappaEntry] | None:
    """Action with the best edge Q, then its best kappa entry; ties keep the earliest.

    Choosing the action first pools every kappa tried under it, so one lucky
    single-visit entry cannot outvote an action whose entries agree. Warm-up
    plans may add actions that are not legal at the root; ``legal`` filters them.
    """
    allowed = None if legal is None else set(legal)
    best_a, best_q = None, -math.inf
    for a, cont in root.children.items():
        if allowed is not None and a not in allowed:
            continue
        if root.edge_n.get(a, 0) > 0 and root.edge_q[a] > best_q and any(e.n > 0 for e in cont.entries):
            best_a, best_q = a, root.edge_q[a]
    if best_a is None:
        return None
    entry = max((e for e in root.children[best_a].entries if e.n > 0), key=lambda e: (e.q, -e.index))
    return best_a, entry


def warm_started_uct(
    model: PlanningModel,
    plans: Sequence[ConcretePlan],
    s0: Any,
    h0: int,
    cfg: PlannerConfig,
    budget: int | None = None,
    value_fn: ValueFn | None = None,
    rng: np.random.Generator | None = None,
) -> Search:
    """Warm the tree with ``plans`` then run ``budget`` (default ``cfg.n_budget``) simulations."""
    search = Search(model, cfg, value_fn, rng)
    root = search.root_for(s0, h0)
    search.warm_up(root, plans)
    n = cfg.n_budget if budget is None else budget
    if not search.terminal(s0, h0):
        for _ in range(n):
            search.simulate(root, s0, h0)
            search.stats.simulations += 1
    return search

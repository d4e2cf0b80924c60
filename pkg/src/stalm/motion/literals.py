"""Grounded literals for the symbolic state, with an incremental occlusion cache."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum

from stalm.geom import ConvexPolygon, bbox_overlap, intersects
from stalm.motion.env import WORLD, Env
from stalm.world import RELATIVE_DIRECTIONS, Direction, Kind, WorldState, at_position


class Predicate(str, Enum):
    ROBOT_HOLDING = "RobotHolding"
    HAND_AVAILABLE = "HandAvailable"
    AT_POSITION = "AtPosition"
    IS_CLOSED = "IsClosed"
    PICK_OCCLUDED_BY = "PickOccludedBy"
    PLACE_OCCLUDED_BY = "PlaceOccludedBy"


# argument kinds per predicate; "occ" is any movable, door or the world sentinel
SIGNATURES: dict[Predicate, tuple[str, ...]] = {
    Predicate.ROBOT_HOLDING: ("movable",),
    Predicate.HAND_AVAILABLE: (),
    Predicate.AT_POSITION: ("movable", "dir", "ref"),
    Predicate.IS_CLOSED: ("door",),
    Predicate.PICK_OCCLUDED_BY: ("movable", "occ"),
    Predicate.PLACE_OCCLUDED_BY: ("movable", "dir", "ref", "occ"),
}


@dataclass(frozen=True, order=True)
class GroundedLiteral:
    predicate: str
    args: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        pred = Predicate(self.predicate)
        object.__setattr__(self, "predicate", pred.value)
        object.__setattr__(self, "args", tuple(str(a) for a in self.args))
        if len(self.args) != len(SIGNATURES[pred]):
            raise ValueError(f"{pred.value} takes {len(SIGNATURES[pred])} arguments, got {self.args}")
        if "dir" in SIGNATURES[pred]:
            Direction(self.args[SIGNATURES[pred].index("dir")])

    def check_kinds(self, kind_of) -> None:
        """Validate argument kinds against ``kind_of(name) -> Kind``."""
        for want, arg in zip(SIGNATURES[Predicate(self.predicate)], self.args):
            if want == "dir":
                continue
            if want == "occ":
                if arg != WORLD and kind_of(arg) is Kind.REGION:
                    raise ValueError(f"{self}: occluder {arg} is a region")
            elif want == "ref":
                if kind_of(arg) is Kind.DOOR:
                    raise ValueError(f"{self}: reference {arg} is a door")
            elif kind_of(arg) is not Kind(want):
                raise ValueError(f"{self}: {arg} is not a {want}")

    def pddl(self) -> str:
        return "(" + " ".join((self.predicate,) + self.args) + ")"

    def __str__(self) -> str:
        return self.pddl()


@dataclass(frozen=True)
class LiteralSet:
    literals: frozenset[GroundedLiteral]
    provenance: tuple[tuple[GroundedLiteral, int], ...] = field(default=(), compare=False)

    def __iter__(self):
        return iter(sorted(self.literals))

    def __len__(self) -> int:
        return len(self.literals)

    def __contains__(self, lit: object) -> bool:
        return lit in self.literals

    def with_predicate(self, pred: Predicate | str) -> list[GroundedLiteral]:
        p = Predicate(pred).value
        return sorted(l for l in self.literals if l.predicate == p)

    def pick_occluders(self, o: str) -> set[str]:
        return {l.args[1] for l in self.literals if l.predicate == Predicate.PICK_OCCLUDED_BY.value and l.args[0] == o}

    def place_occluders(self, o: str, dir: Direction | str, ref: str) -> set[str]:
        key = (o, str(dir), ref)
        return {l.args[3] for l in self.literals if l.predicate == Predicate.PLACE_OCCLUDED_BY.value and l.args[:3] == key}


# grounding keys: ("pick", o) or ("place", o, dir, ref)
Grounding = tuple[str, ...]


def groundings(env: Env, s: WorldState) -> list[Grounding]:
    """Occlusion groundings defined in ``s``: placed subjects for pick, placed refs for relative place."""
    prob = env.problem
    movables = sorted(m.name for m in prob.movables)
    regions = sorted(r.name for r in prob.regions)
    placed = [m for m in movables if s.pose(m) is not None]
    out: list[Grounding] = [("pick", o) for o in placed]
    for o in movables:
        out += [("place", o, Direction.ON.value, r) for r in regions]
        for ref in placed:
            if ref != o:
                out += [("place", o, d.value, ref) for d in RELATIVE_DIRECTIONS]
    return out


def _reach_corridor(env: Env, s: WorldState, g: Grounding) -> tuple[str | None, ConvexPolygon | None]:
    if g[0] == "pick":
        return env.pick_corridor(s, g[1])
    return env.place_corridor(s, Direction(g[2]), g[3])


def _reach_set(env: Env, s: WorldState, g: Grounding) -> frozenset[str]:
    region, corridor = _reach_corridor(env, s, g)
    if region is None:
        return frozenset({WORLD})
    return frozenset(env.reach_occluders(s, corridor, region, (g[1],)))


def _nav_set(env: Env, s: WorldState, g: Grounding) -> set[str]:
    prob = env.problem
    if g[0] == "pick":
        region = prob.region_of(s, g[1])
    elif g[2] == Direction.ON.value:
        region = g[3]
    else:
        region = prob.region_of(s, g[3])
    if region is None:
        return {WORLD}
    return env.nav_occluders(s, prob.region_map[region].base_pose, (g[1],))


@dataclass
class _Entry:
    reach: dict[Grounding, frozenset[str]]
    generation: dict[Grounding, int]


@dataclass
class LiteralCache:
    """Per-state reach-occlusion tables, derived incrementally from a parent state.

    Only the arm-reach part of an occlusion literal is cached; the base-motion
    part is rebuilt from memoized nominal paths because it depends on where the
    robot currently stands.
    """

    env: Env
    capacity: int = 4096
    enabled: bool = True
    generation: int = 0
    hits: int = 0
    misses: int = 0
    _table: OrderedDict = field(default_factory=OrderedDict, repr=False)

    def _store(self, s: WorldState, entry: _Entry) -> None:
        self._table[s] = entry
        self._table.move_to_end(s)
        while len(self._table) > self.capacity:
            self._table.popitem(last=False)

    def reach_table(self, s: WorldState, parent: WorldState | None = None) -> _Entry:
        if self.enabled and s in self._table:
            self.hits += 1
            self._table.move_to_end(s)
            return self._table[s]
        self.generation += 1
        if self.enabled and parent is not None and parent in self._table:
            entry = self._derive(self._table[parent], parent, s)
        else:
            self.misses += 1
            entry = self._fresh(s)
        if self.enabled:
            self._store(s, entry)
        return entry

    def _fresh(self, s: WorldState) -> _Entry:
        reach = {g: _reach_set(self.env, s, g) for g in groundings(self.env, s)}
        return _Entry(reach, {g: self.generation for g in reach})

    def _derive(self, old: _Entry, parent: WorldState, s: WorldState) -> _Entry:
        """Reuse the parent's table, touching only groundings affected by moved objects.

        Pick leaves every remaining corridor intact except that the lifted object
        stops blocking; Open changes no reach corridor; Place may add the placed
        object to existing corridors and creates the groundings that refer to it.
        """
        prev, cur = parent.pose_map, s.pose_map
        changed = {n for n in set(prev) | set(cur) if prev.get(n) != cur.get(n)}
        if not changed:
            return old
        reach: dict[Grounding, frozenset[str]] = {}
        gen: dict[Grounding, int] = {}
        env, prob = self.env, self.env.problem
        new_fps = {n: prob.footprint(n, cur[n]) for n in changed if n in cur}
        for g in groundings(env, s):
            touches = g[1] in changed or (g[0] == "place" and g[3] in changed)
            if g not in old.reach or touches:
                reach[g] = _reach_set(env, s, g)
                gen[g] = self.generation
                continue
            occ = old.reach[g] - changed
            if new_fps:
                _, corridor = _reach_corridor(env, s, g)
                for n, fp in new_fps.items():
                    if n != g[1] and corridor is not None and bbox_overlap(corridor.bbox, fp.bbox) and intersects(corridor, fp):
                        occ |= {n}
            reach[g] = frozenset(occ)
            gen[g] = self.generation if occ != old.reach[g] else old.generation[g]
        return _Entry(reach, gen)


def compute_literals(
    env: Env, s: WorldState, cache: LiteralCache | None = None, parent: WorldState | None = None
) -> LiteralSet:
    """Full symbolic state of ``s``; ``cache`` (with the parent state) enables reuse."""
    prob = env.problem
    lits: dict[GroundedLiteral, int] = {}
    tag = cache.generation if cache is not None else 0

    def emit(lit: GroundedLiteral, generation: int = tag) -> None:
        lits.setdefault(lit, generation)

    if s.holding is None:
        emit(GroundedLiteral(Predicate.HAND_AVAILABLE))
    else:
        emit(GroundedLiteral(Predicate.ROBOT_HOLDING, (s.holding,)))
    for d in s.closed_doors():
        emit(GroundedLiteral(Predicate.IS_CLOSED, (d,)))

    placed = [n for n, _ in s.poses]
    for o in placed:
        for r in sorted(prob.region_map):
            if at_position(s, o, Direction.ON, r, prob):
                emit(GroundedLiteral(Predicate.AT_POSITION, (o, Direction.ON.value, r)))
        for ref in placed:
            if ref == o:
                continue
            for d in RELATIVE_DIRECTIONS:
                if at_position(s, o, d, ref, prob):
                    emit(GroundedLiteral(Predicate.AT_POSITION, (o, d.value, ref)))

    if cache is not None:
        entry = cache.reach_table(s, parent)
        reach, gens = entry.reach, entry.generation
    else:
        reach = {g: _reach_set(env, s, g) for g in groundings(env, s)}
        gens = {g: 0 for g in reach}
    for g, reach_occ in reach.items():
        occ = set(reach_occ) | _nav_set(env, s, g)
        for x in sorted(occ):
            if g[0] == "pick":
                emit(GroundedLiteral(Predicate.PICK_OCCLUDED_BY, (g[1], x)), gens[g])
            else:
                emit(GroundedLiteral(Predicate.PLACE_OCCLUDED_BY, (g[1], g[2], g[3], x)), gens[g])
    return LiteralSet(frozenset(lits), tuple(sorted(lits.items())))

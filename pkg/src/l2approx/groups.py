"""Deck groups, their towers of finite quotients and regular representations.

Group elements are plain hashable values: ``()`` for the trivial group, an
``int`` id for an explicit finite group, and a tuple of ints (exponent vector)
for a free abelian group.  A group object knows how to multiply them.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Sequence

from .linalg import QMatrix

Element = Hashable


class GroupError(ValueError):
    pass


class Group:
    """Interface shared by the supported group families."""

    kind: str = "abstract"

    @property
    def identity(self) -> Element:
        raise NotImplementedError

    def mul(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def inv(self, a: Element) -> Element:
        raise NotImplementedError

    def contains(self, a: Element) -> bool:
        raise NotImplementedError

    def coerce(self, raw) -> Element:
        """Turn a JSON value into an element, raising ``GroupError`` if foreign."""
        raise NotImplementedError

    def to_json(self, a: Element):
        raise NotImplementedError

    @property
    def generators(self) -> list[Element]:
        raise NotImplementedError

    @property
    def is_finite(self) -> bool:
        return False

    def word_length(self, a: Element) -> int:
        raise NotImplementedError

    def ball(self, radius: int) -> list[Element]:
        """Elements of word length ``<= radius``, in a deterministic order."""
        raise NotImplementedError

    def sort_key(self, a: Element):
        return a

    def check(self, a: Element) -> Element:
        if not self.contains(a):
            raise GroupError(f"{a!r} is not an element of {self}")
        return a

    def descriptor(self) -> dict:
        raise NotImplementedError


class TrivialGroup(Group):
    kind = "trivial"

    @property
    def identity(self):
        return ()

    def mul(self, a, b):
        return ()

    def inv(self, a):
        return ()

    def contains(self, a):
        return a == ()

    def coerce(self, raw):
        if raw in ((), [], None, 0):
            return ()
        raise GroupError(f"{raw!r} is not the unit of the trivial group")

    def to_json(self, a):
        return []

    @property
    def generators(self):
        return []

    @property
    def is_finite(self):
        return True

    @property
    def order(self) -> int:
        return 1

    @property
    def elements(self) -> list:
        return [()]

    def word_length(self, a):
        self.check(a)
        return 0

    def ball(self, radius):
        return [()] if radius >= 0 else []

    def descriptor(self):
        return {"kind": "trivial"}

    def __eq__(self, other):
        return isinstance(other, TrivialGroup)

    def __hash__(self):
        return hash("trivial")

    def __repr__(self):
        return "TrivialGroup()"


class FiniteGroup(Group):
    """Finite group given by a multiplication table over ids ``0..n-1``."""

    kind = "finite"

    def __init__(self, table: Sequence[Sequence[int]], generators: Sequence[int] | None = None):
        n = len(table)
        self.table = tuple(tuple(int(x) for x in row) for row in table)
        if n == 0 or any(len(r) != n for r in self.table):
            raise GroupError("multiplication table must be a non-empty square")
        if any(not 0 <= x < n for r in self.table for x in r):
            raise GroupError("multiplication table has entries outside the element range")
        ids = [e for e in range(n) if all(self.table[e][x] == x and self.table[x][e] == x for x in range(n))]
        if len(ids) != 1:
            raise GroupError("multiplication table has no two-sided identity")
        self._identity = ids[0]
        inverses = []
        for a in range(n):
            inv = [b for b in range(n) if self.table[a][b] == self._identity]
            if len(inv) != 1 or self.table[inv[0]][a] != self._identity:
                raise GroupError(f"element {a} has no two-sided inverse")
            inverses.append(inv[0])
        self._inverses = tuple(inverses)
        for a, b, c in itertools.product(range(n), repeat=3):
            t = self.table
            if t[t[a][b]][c] != t[a][t[b][c]]:
                raise GroupError(f"multiplication table is not associative at {(a, b, c)}")
        if generators is None:
            generators = [a for a in range(n) if a != self._identity]
        self._generators = [self.check(int(g)) for g in generators]
        dist = self._distances
        if len(dist) != n:
            raise GroupError("declared generators do not generate the group")

    @property
    def identity(self):
        return self._identity

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inverses[a]

    def contains(self, a):
        return isinstance(a, int) and not isinstance(a, bool) and 0 <= a < len(self.table)

    def coerce(self, raw):
        if isinstance(raw, list) and len(raw) == 1:
            raw = raw[0]
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise GroupError(f"finite group elements are integer ids, got {raw!r}")
        return self.check(raw)

    def to_json(self, a):
        return a

    @property
    def generators(self):
        return list(self._generators)

    @property
    def is_finite(self):
        return True

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def elements(self) -> list[int]:
        return list(range(len(self.table)))

    @cached_property
    def _distances(self) -> dict[int, int]:
        gens = set(self._generators) | {self._inverses[g] for g in self._generators}
        dist = {self._identity: 0}
        queue = deque([self._identity])
        while queue:
            a = queue.popleft()
            for g in sorted(gens):
                b = self.table[a][g]
                if b not in dist:
                    dist[b] = dist[a] + 1
                    queue.append(b)
        return dist

    def word_length(self, a):
        return self._distances[self.check(a)]

    def ball(self, radius):
        return sorted(a for a, d in self._distances.items() if d <= radius)

    def descriptor(self):
        return {"kind": "finite", "table": [list(r) for r in self.table], "generators": self._generators}

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and self.table == other.table

    def __hash__(self):
        return hash(self.table)

    def __repr__(self):
        return f"FiniteGroup(order={len(self.table)})"


def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)], generators=[1 % n] if n > 1 else [])


class FreeAbelianGroup(Group):
    """Z^rank with the standard unit-vector generators."""

    kind = "free_abelian"

    def __init__(self, rank: int):
        if rank < 1:
            raise GroupError("free abelian rank must be >= 1")
        self.rank = rank

    @property
    def identity(self):
        return (0,) * self.rank

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def contains(self, a):
        return (
            isinstance(a, tuple)
            and len(a) == self.rank
            and all(isinstance(x, int) and not isinstance(x, bool) for x in a)
        )

    def coerce(self, raw):
        if isinstance(raw, int) and not isinstance(raw, bool) and self.rank == 1:
            raw = [raw]
        if not isinstance(raw, (list, tuple)):
            raise GroupError(f"free abelian elements are exponent vectors, got {raw!r}")
        return self.check(tuple(raw))

    def to_json(self, a):
        return list(a)

    @property
    def generators(self):
        return [tuple(1 if i == j else 0 for j in range(self.rank)) for i in range(self.rank)]

    def word_length(self, a):
        return sum(abs(x) for x in self.check(a))

    def ball(self, radius):
        if radius < 0:
            return []
        out = [v for v in itertools.product(range(-radius, radius + 1), repeat=self.rank) if sum(map(abs, v)) <= radius]
        return sorted(out)

    def descriptor(self):
        return {"kind": "free_abelian", "rank": self.rank}

    def __eq__(self, other):
        return isinstance(other, FreeAbelianGroup) and self.rank == other.rank

    def __hash__(self):
        return hash(("Z", self.rank))

    def __repr__(self):
        return f"FreeAbelianGroup({self.rank})"


# ---------------------------------------------------------------------------
# finite quotients


@dataclass(frozen=True, eq=False)
class TowerLevel:
    """Finite quotient ``G_k`` of the tower, with a fixed enumeration of its elements."""

    k: int
    group: Group
    elements: tuple = field(repr=False)
    modulus: int | None = None

    def project_fn(self, g: Element) -> Element:
        if self.modulus is None:
            return g
        m = self.modulus
        return tuple(x % m for x in g)

    def mul_fn(self, a: Element, b: Element) -> Element:
        if self.modulus is None:
            return self.group.mul(a, b)
        m = self.modulus
        return tuple((x + y) % m for x, y in zip(a, b))

    @cached_property
    def position(self) -> dict:
        return {h: i for i, h in enumerate(self.elements)}

    @property
    def order(self) -> int:
        """``[Gamma : Gamma_k]``."""
        return len(self.elements)

    def project(self, g: Element) -> Element:
        self.group.check(g)
        return self.project_fn(g)

    def quotient_mul(self, h1, h2):
        return self.mul_fn(h1, h2)

    def right_multiplication(self, h) -> list[int]:
        """``perm[x] = position of elements[x] * h``."""
        return self._right_tables[self._index_of(h)]

    def _index_of(self, h) -> int:
        try:
            return self.position[h]
        except KeyError:
            raise GroupError(f"{h!r} is not an element of the level-{self.k} quotient") from None

    @cached_property
    def _right_tables(self) -> _LazyTables:
        return _LazyTables(self)

    def regular_representation(self, h) -> QMatrix:
        """Permutation matrix with row ``x`` carrying a 1 in column ``x*h``.

        With this convention ``rep(h1 h2) = rep(h1) rep(h2)`` and
        ``rep(h^-1) = rep(h)^T``.
        """
        perm = self.right_multiplication(h)
        n = self.order
        return QMatrix(n, n, {x: {perm[x]: 1} for x in range(n)})


class _LazyTables:
    def __init__(self, level: TowerLevel):
        self.level = level
        self.cache: dict[int, list[int]] = {}

    def __getitem__(self, idx: int) -> list[int]:
        t = self.cache.get(idx)
        if t is None:
            lv = self.level
            h = lv.elements[idx]
            pos = lv.position
            t = [pos[lv.mul_fn(x, h)] for x in lv.elements]
            self.cache[idx] = t
        return t


@dataclass(frozen=True, eq=False)
class GroupTower:
    group: Group
    levels: tuple[TowerLevel, ...]
    nested: bool = True

    def __len__(self):
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    def level(self, k: int) -> TowerLevel:
        for lv in self.levels:
            if lv.k == k:
                return lv
        raise KeyError(k)

    def descriptor(self) -> dict:
        d = self.group.descriptor()
        if isinstance(self.group, FreeAbelianGroup):
            d["schedule"] = [lv.modulus for lv in self.levels]
            if not self.nested:
                d["nested"] = False
        else:
            d["levels"] = len(self.levels)
        return d

    def reduce(self, h, k_from: int, k_to: int):
        """Quotient map ``G_{k_from} -> G_{k_to}`` (nested towers only)."""
        if not self.nested:
            raise GroupError("quotient maps between levels need a nested tower")
        lv_to = self.level(k_to)
        if isinstance(self.group, FreeAbelianGroup):
            return tuple(x % lv_to.modulus for x in h)
        return h


def _free_abelian_level(group: FreeAbelianGroup, k: int, m: int) -> TowerLevel:
    elements = tuple(itertools.product(range(m), repeat=group.rank))
    return TowerLevel(k=k, group=group, elements=elements, modulus=m)


def _constant_level(group: Group, k: int) -> TowerLevel:
    return TowerLevel(k=k, group=group, elements=tuple(group.elements))


def dyadic_schedule(k_max: int) -> list[int]:
    return [2**k for k in range(1, k_max + 1)]


def make_tower(
    group: Group,
    schedule: Sequence[int] | int | None = None,
    nested: bool = True,
    level_numbers: Sequence[int] | None = None,
) -> GroupTower:
    """Tower of finite quotients.

    For ``Z^n`` the schedule lists moduli ``m_1 | m_2 | ...`` and level ``k`` is
    ``(Z/m_k)^n``.  With ``nested=False`` any strictly increasing moduli are
    accepted; the result is then a sequence of quotients rather than a tower.
    Finite and trivial groups get the constant tower; an int schedule gives its
    number of levels.  Levels are numbered ``1, 2, ...`` unless
    ``level_numbers`` says otherwise.
    """
    if isinstance(group, FreeAbelianGroup):
        if schedule is None:
            schedule = dyadic_schedule(8)
        elif isinstance(schedule, int):
            schedule = dyadic_schedule(schedule)
        schedule = [int(m) for m in schedule]
        if not schedule:
            raise GroupError("empty schedule")
        if any(m < 1 for m in schedule):
            raise GroupError("moduli must be positive")
        for a, b in zip(schedule, schedule[1:]):
            if b <= a:
                raise GroupError(f"schedule must be strictly increasing ({a} then {b})")
            if nested and b % a:
                raise GroupError(f"schedule is not a divisibility chain ({a} does not divide {b})")
        ks = list(level_numbers) if level_numbers is not None else list(range(1, len(schedule) + 1))
        if len(ks) != len(schedule):
            raise GroupError("level_numbers and schedule differ in length")
        levels = tuple(_free_abelian_level(group, k, m) for k, m in zip(ks, schedule))
        return GroupTower(group, levels, nested)
    if not group.is_finite:
        raise GroupError(f"no tower available for {group!r}")
    if schedule is None:
        count = 1
    elif isinstance(schedule, int):
        count = schedule
    else:
        count = len(schedule)
    if count < 1:
        raise GroupError("empty schedule")
    return GroupTower(group, tuple(_constant_level(group, k) for k in range(1, count + 1)), True)


def group_from_json(d: dict) -> Group:
    kind = d.get("kind")
    if kind == "trivial":
        return TrivialGroup()
    if kind == "finite":
        if "table" not in d:
            raise GroupError("finite group descriptor needs a 'table'")
        return FiniteGroup(d["table"], d.get("generators"))
    if kind == "free_abelian":
        return FreeAbelianGroup(int(d.get("rank", 1)))
    raise GroupError(f"unknown group kind {kind!r}")


def tower_from_json(d: dict, k_max: int | None = None) -> GroupTower:
    """Parse a tower descriptor.

    ``schedule`` is a list of moduli or ``{"rule": "dyadic"|"linear", "k_max": K,
    "start": s}``; ``linear`` means ``m_k = k`` and is never nested.
    """
    group = group_from_json(d)
    nested = bool(d.get("nested", True))
    sched = d.get("schedule")
    if isinstance(group, FreeAbelianGroup):
        if sched is None:
            sched = {"rule": "dyadic"}
        if isinstance(sched, dict):
            rule = sched.get("rule", "dyadic")
            kk = int(sched.get("k_max", k_max or 8))
            if rule == "dyadic":
                sched = dyadic_schedule(kk)
            elif rule == "linear":
                sched = list(range(int(sched.get("start", 1)), kk + 1))
                if k_max is not None:
                    sched = [m for m in sched if m <= k_max]
                return make_tower(group, sched, nested=False, level_numbers=sched)
            else:
                raise GroupError(f"unknown schedule rule {rule!r}")
        if k_max is not None:
            sched = list(sched)[:k_max]
        return make_tower(group, sched, nested=nested)
    count = d.get("levels", k_max or 1)
    if k_max is not None:
        count = min(int(count), k_max) if "levels" in d else k_max
    return make_tower(group, int(count))

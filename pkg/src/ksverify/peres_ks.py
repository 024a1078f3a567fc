"""Peres's 33 rays, their completion to orthonormal bases, and a KS coloring prover.

A Kochen-Specker coloring assigns 0 or 1 to every ray so that each basis
contains exactly one ray valued 1.  :func:`solve_coloring` decides whether
such a coloring exists by exhaustive backtracking with unit propagation.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from ksverify.exact_algebra import (
    SQRT2,
    QuadRat,
    Ray,
    Vec3Exact,
    canonicalize,
    cross,
    dot,
    format_quadrat,
    parse_quadrat,
)

PERES_SEEDS: tuple[Vec3Exact, ...] = (
    Vec3Exact.of(0, 0, 1),
    Vec3Exact.of(0, 1, 1),
    Vec3Exact(QuadRat(0), QuadRat(1), SQRT2),
    Vec3Exact(QuadRat(1), QuadRat(1), SQRT2),
)


class RayFileError(ValueError):
    """Raised for malformed ray or basis files; carries the offending line."""

    def __init__(self, message: str, lineno: Optional[int] = None) -> None:
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


@dataclass(frozen=True)
class RaySet:
    """Distinct canonical rays; a ray's id is its index in ``rays``."""

    rays: tuple[Ray, ...]

    def __post_init__(self) -> None:
        if len(set(self.rays)) != len(self.rays):
            raise ValueError("RaySet contains duplicate rays")

    @classmethod
    def from_vectors(cls, vectors: Iterable[Vec3Exact]) -> RaySet:
        """Canonicalize and deduplicate, keeping first-seen order."""
        seen: dict[Ray, None] = {}
        for v in vectors:
            seen.setdefault(canonicalize(v), None)
        return cls(tuple(seen))

    def __len__(self) -> int:
        return len(self.rays)

    def __getitem__(self, i: int) -> Ray:
        return self.rays[i]

    def __contains__(self, ray: object) -> bool:
        return ray in self._index

    @property
    def _index(self) -> dict[Ray, int]:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {r: i for i, r in enumerate(self.rays)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def index(self, ray: Ray) -> int:
        return self._index[ray]


@dataclass(frozen=True)
class Basis:
    """Three ray ids, stored sorted."""

    members: tuple[int, int, int]

    def __post_init__(self) -> None:
        m = tuple(sorted(self.members))
        if len(m) != 3 or len(set(m)) != 3:
            raise ValueError(f"a basis needs three distinct ray ids, got {self.members}")
        object.__setattr__(self, "members", m)

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True)
class ColoringProblem:
    ray_count: int
    bases: tuple[Basis, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "bases", tuple(self.bases))
        for b in self.bases:
            for r in b:
                if not 0 <= r < self.ray_count:
                    raise ValueError(f"basis {b.members} references ray {r} >= {self.ray_count}")

    def restrict(self, basis_indices: Iterable[int]) -> ColoringProblem:
        return ColoringProblem(self.ray_count, tuple(self.bases[i] for i in basis_indices))


@dataclass(frozen=True)
class SearchCertificate:
    satisfiable: bool
    nodes_explored: int
    max_depth: int
    assignment: Optional[tuple[int, ...]] = None

    @property
    def result(self) -> str:
        return "SAT" if self.satisfiable else "UNSAT"

    def to_dict(self) -> dict:
        d = {
            "result": self.result,
            "nodes_explored": self.nodes_explored,
            "max_depth": self.max_depth,
        }
        if self.assignment is not None:
            d["assignment"] = list(self.assignment)
        return d


def _orbit(seed: Vec3Exact) -> list[Vec3Exact]:
    out = []
    for perm in itertools.permutations(tuple(seed)):
        for signs in itertools.product((1, -1), repeat=3):
            out.append(Vec3Exact(*(c * s for c, s in zip(perm, signs))))
    return out


def peres_orbits() -> list[RaySet]:
    """The four seed orbits under coordinate permutations and sign flips."""
    return [RaySet.from_vectors(_orbit(s)) for s in PERES_SEEDS]


def peres_33() -> RaySet:
    return RaySet.from_vectors(r.v for orbit in peres_orbits() for r in orbit.rays)


def complete_bases(s: RaySet) -> tuple[RaySet, list[Basis]]:
    """Complete every orthogonal pair of ``s`` to a basis via the cross product.

    Returns the enlarged ray set (original rays keep their ids, new rays are
    appended in discovery order) and the distinct bases in discovery order.
    """
    rays = list(s.rays)
    index = {r: i for i, r in enumerate(rays)}
    bases: dict[Basis, None] = {}
    n = len(rays)
    for i in range(n):
        for j in range(i + 1, n):
            if not dot(rays[i].v, rays[j].v).is_zero():
                continue
            third = canonicalize(cross(rays[i].v, rays[j].v))
            k = index.get(third)
            if k is None:
                k = len(rays)
                rays.append(third)
                index[third] = k
            bases.setdefault(Basis((i, j, k)), None)
    return RaySet(tuple(rays)), list(bases)


def orthogonality_graph(s: RaySet) -> list[tuple[int, int]]:
    return [
        (i, j)
        for i in range(len(s))
        for j in range(i + 1, len(s))
        if dot(s[i].v, s[j].v).is_zero()
    ]


def peres_problem() -> tuple[RaySet, list[Basis], ColoringProblem]:
    """The 57-ray, 40-basis coloring problem built from :func:`peres_33`."""
    rays, bases = complete_bases(peres_33())
    return rays, bases, ColoringProblem(len(rays), tuple(bases))


def check_assignment(p: ColoringProblem, f: Sequence[int] | Mapping[int, int]) -> bool:
    """True iff every basis of ``p`` has exactly one member valued 1."""
    for b in p.bases:
        ones = 0
        for r in b:
            try:
                v = f[r]
            except (IndexError, KeyError):
                raise KeyError(f"assignment has no value for ray {r}") from None
            if v not in (0, 1):
                raise ValueError(f"ray {r} has non-boolean value {v!r}")
            ones += v
        if ones != 1:
            return False
    return True


class _Search:
    """Backtracking over ray values with basis-level unit propagation."""

    def __init__(self, p: ColoringProblem) -> None:
        self.n = p.ray_count
        self.bases = [b.members for b in p.bases]
        self.incident: list[list[int]] = [[] for _ in range(self.n)]
        for bi, b in enumerate(self.bases):
            for r in b:
                self.incident[r].append(bi)
        self.order = sorted(
            (r for r in range(self.n) if self.incident[r]),
            key=lambda r: (-len(self.incident[r]), r),
        )
        self.value: list[Optional[int]] = [None] * self.n
        self.trail: list[int] = []
        self.nodes = 0
        self.max_depth = 0

    def _assign(self, r: int, v: int, queue: list[tuple[int, int]]) -> bool:
        cur = self.value[r]
        if cur is not None:
            return cur == v
        self.value[r] = v
        self.trail.append(r)
        for bi in self.incident[r]:
            members = self.bases[bi]
            vals = [self.value[m] for m in members]
            ones = vals.count(1)
            zeros = vals.count(0)
            if ones > 1 or zeros == 3:
                return False
            if ones == 1:
                queue.extend((m, 0) for m, x in zip(members, vals) if x is None)
            elif zeros == 2:
                queue.extend((m, 1) for m, x in zip(members, vals) if x is None)
        return True

    def _propagate(self, r: int, v: int) -> bool:
        queue = [(r, v)]
        while queue:
            r, v = queue.pop()
            if not self._assign(r, v, queue):
                return False
        return True

    def _undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            self.value[self.trail.pop()] = None

    def run(self, depth: int = 0) -> bool:
        self.max_depth = max(self.max_depth, depth)
        var = next((r for r in self.order if self.value[r] is None), None)
        if var is None:
            return True
        for v in (1, 0):
            self.nodes += 1
            mark = len(self.trail)
            if self._propagate(var, v) and self.run(depth + 1):
                return True
            self._undo(mark)
        return False


def solve_coloring(p: ColoringProblem) -> SearchCertificate:
    """Decide KS-colorability of ``p`` exhaustively.

    Branching order is by descending number of bases containing the ray,
    ties broken by id, trying 1 before 0.  Rays in no basis are set to 0.
    """
    search = _Search(p)
    sat = search.run()
    if not sat:
        return SearchCertificate(False, search.nodes, search.max_depth)
    assignment = tuple(v if v is not None else 0 for v in search.value)
    if not check_assignment(p, assignment):
        raise AssertionError("solver produced an assignment that violates a basis")
    return SearchCertificate(True, search.nodes, search.max_depth, assignment)


# -- file formats -----------------------------------------------------------


def _content_lines(text: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_rays(text: str) -> RaySet:
    """Parse one ray per line: three ``a+b√2`` numbers, ``#`` starts a comment."""
    vectors = []
    for lineno, fields in _content_lines(text):
        if len(fields) != 3:
            raise RayFileError(f"expected 3 components, got {len(fields)}", lineno)
        try:
            v = Vec3Exact(*(parse_quadrat(f) for f in fields))
        except ValueError as e:
            raise RayFileError(str(e), lineno) from None
        if v.is_zero():
            raise RayFileError("zero vector is not a ray", lineno)
        vectors.append(v)
    return RaySet.from_vectors(vectors)


def format_rays(s: RaySet) -> str:
    lines = [f"# {len(s)} rays, canonical form (first nonzero component = 1)"]
    for r in s.rays:
        lines.append(" ".join(format_quadrat(c) for c in r))
    return "\n".join(lines) + "\n"


def parse_bases(text: str) -> list[Basis]:
    """Parse one basis per line as three integer ray ids."""
    bases = []
    for lineno, fields in _content_lines(text):
        if len(fields) != 3:
            raise RayFileError(f"expected 3 ray ids, got {len(fields)}", lineno)
        try:
            ids = tuple(int(f) for f in fields)
            bases.append(Basis(ids))
        except ValueError as e:
            raise RayFileError(str(e), lineno) from None
    return bases


def to_dot(s: RaySet, edges: Optional[Sequence[tuple[int, int]]] = None) -> str:
    if edges is None:
        edges = orthogonality_graph(s)
    lines = ["graph orthogonality {"]
    for i, r in enumerate(s.rays):
        lines.append(f'  {i} [label="{i}", tooltip="{r}"];')
    for i, j in edges:
        lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def certificate_json(cert: SearchCertificate) -> str:
    return json.dumps(cert.to_dict(), sort_keys=True)

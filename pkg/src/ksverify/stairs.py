"""Steering a maximally entangled qutrit pair onto the Peres bases.

Measuring particle A in the conjugate of a Peres basis leaves particle B in
the corresponding basis vector, so every projector onto a Peres ray has a
certain outcome at B.  If those outcomes were pre-existing local values they
would form a KS coloring of the 57 rays, which :func:`locality_contradiction`
shows cannot exist.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ksverify.exact_algebra import Ray
from ksverify.peres_ks import (
    Basis,
    ColoringProblem,
    RaySet,
    SearchCertificate,
    complete_bases,
    peres_33,
    solve_coloring,
)
from ksverify.qsim import (
    ALG_TOL,
    SPEC_TOL,
    DensityOperator,
    PureState,
    QuantumError,
    born_prob,
    fidelity_pure,
    partial_trace,
)

DIM = 3


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Pure state of two d-level systems, A-major: index ``a * d + b``."""

    amplitudes: np.ndarray
    dim: int = DIM

    def __post_init__(self) -> None:
        v = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if v.shape[0] != self.dim ** 2:
            raise QuantumError(f"expected {self.dim ** 2} amplitudes, got {v.shape[0]}")
        if abs(np.vdot(v, v).real - 1) > ALG_TOL:
            raise QuantumError("bipartite state is not normalized")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def product(cls, a: PureState, b: PureState) -> BipartiteState:
        return cls(np.kron(a.amplitudes, b.amplitudes), a.dim)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def reduced(self, keep: int) -> DensityOperator:
        return DensityOperator(partial_trace(self.density(), (self.dim, self.dim), keep))


def max_entangled(d: int = DIM) -> BipartiteState:
    v = np.zeros(d * d, dtype=complex)
    for k in range(d):
        v[k * d + k] = 1 / np.sqrt(d)
    return BipartiteState(v, d)


def conjugate_state(psi: PureState) -> PureState:
    return PureState(psi.amplitudes.conj())


def ray_state(ray: Ray) -> PureState:
    """Embed an exact ray as a normalized complex vector."""
    return PureState.normalized(np.array(ray.to_floats(), dtype=complex))


@dataclass(frozen=True, eq=False)
class ConditionalOutcome:
    probability: float
    state_b: Optional[DensityOperator]


def measure_at_A(state: BipartiteState, basis: Sequence[PureState]) -> list[ConditionalOutcome]:
    """Von Neumann measurement of A in ``basis``; B's state conditioned on each outcome."""
    d = state.dim
    vecs = np.array([s.amplitudes for s in basis])
    if vecs.shape != (d, d) or not np.allclose(vecs.conj() @ vecs.T, np.eye(d), rtol=0.0, atol=ALG_TOL):
        raise QuantumError("measurement basis at A is not orthonormal")
    psi = state.amplitudes.reshape(d, d)
    out = []
    for v in vecs:
        # (<v| (x) 1)|Psi>: unnormalized state of B.
        b = v.conj() @ psi
        p = float(np.vdot(b, b).real)
        if p <= ALG_TOL:
            out.append(ConditionalOutcome(0.0, None))
            continue
        rho = np.outer(b, b.conj()) / p
        out.append(ConditionalOutcome(p, DensityOperator((rho + rho.conj().T) / 2)))
    return out


@dataclass(frozen=True)
class SteeringRecord:
    k: int
    outcome: int
    prob_at_A: float
    fidelity_B: float
    certainty: dict[int, float]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "outcome": self.outcome,
            "prob_at_A": self.prob_at_A,
            "fidelity_B": self.fidelity_B,
            "certainty": {str(j): p for j, p in self.certainty.items()},
        }

    def certain(self) -> bool:
        return all(
            abs(p - (1.0 if j == self.outcome else 0.0)) <= SPEC_TOL
            for j, p in self.certainty.items()
        )


@dataclass(frozen=True)
class SteeringReport:
    records: tuple[SteeringRecord, ...]
    coloring: Optional[SearchCertificate] = None

    @property
    def all_certain(self) -> bool:
        return all(r.certain() for r in self.records)

    def max_fidelity_error(self) -> float:
        return max(abs(r.fidelity_B - 1) for r in self.records)

    def max_prob_error(self) -> float:
        return max(abs(r.prob_at_A - 1 / DIM) for r in self.records)

    def to_dict(self) -> dict:
        summary = {"all_certain": self.all_certain, "checks": len(self.records)}
        if self.coloring is not None:
            summary["coloring"] = self.coloring.result
        return {"records": [r.to_dict() for r in self.records], "summary": summary}


def peres_structure() -> tuple[RaySet, list[Basis]]:
    return complete_bases(peres_33())


def steer_basis(k: int, rays: RaySet, basis: Basis, state: Optional[BipartiteState] = None) -> list[SteeringRecord]:
    """Records for the three outcomes of measuring A in the conjugate of ``basis``.

    Outcomes are numbered 1..3 in increasing ray id.
    """
    if state is None:
        state = max_entangled()
    targets = [ray_state(rays[r]) for r in basis]
    outcomes = measure_at_A(state, [conjugate_state(t) for t in targets])
    records = []
    for j, (res, target) in enumerate(zip(outcomes, targets), start=1):
        if res.state_b is None:
            raise QuantumError(f"basis {k} outcome {j} has zero probability")
        certainty = {jj: born_prob(res.state_b, t.projector()) for jj, t in enumerate(targets, start=1)}
        records.append(SteeringRecord(k, j, res.probability, fidelity_pure(res.state_b, target), certainty))
    return records


def verify_certainties(ks: Optional[Iterable[int]] = None, with_coloring: bool = True) -> SteeringReport:
    """Steering records for bases ``ks`` (1-based; all 40 by default)."""
    rays, bases = peres_structure()
    if ks is None:
        ks = range(1, len(bases) + 1)
    records = []
    state = max_entangled()
    for k in ks:
        if not 1 <= k <= len(bases):
            raise IndexError(f"basis index {k} outside 1..{len(bases)}")
        records.extend(steer_basis(k, rays, bases[k - 1], state))
    coloring = locality_contradiction() if with_coloring else None
    return SteeringReport(tuple(records), coloring)


def local_value_problem(basis_indices: Optional[Iterable[int]] = None) -> ColoringProblem:
    """The coloring problem a local pre-existing value map would have to solve.

    ``basis_indices`` are 1-based; by default all bases are included.
    """
    rays, bases = peres_structure()
    if basis_indices is None:
        chosen = bases
    else:
        chosen = [bases[k - 1] for k in basis_indices]
    return ColoringProblem(len(rays), tuple(chosen))


def locality_contradiction(basis_indices: Optional[Iterable[int]] = None) -> SearchCertificate:
    return solve_coloring(local_value_problem(basis_indices))

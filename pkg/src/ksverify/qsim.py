"""Small-dimension quantum mechanics with dense numpy matrices.

States, effects, POVMs and instruments (outcome-indexed Kraus families), the
Born rule and the post-measurement update, detection of preparation
operations via the Choi matrix, the Fig. 1 preparation circuits, classical
Bayes updating and state reconstruction from mutually unbiased bases.

Tensor products are ordered with the first factor most significant, i.e.
``|a b> = kron(|a>, |b>)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Optional, Sequence

import numpy as np

ALG_TOL = 1e-12
SPEC_TOL = 1e-10


class QuantumError(ValueError):
    pass


class ImpossibleOutcomeError(QuantumError):
    """Conditioning on an outcome whose probability is zero."""


def _as_matrix(m, name: str) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise QuantumError(f"{name} must be a square matrix, got shape {a.shape}")
    a.setflags(write=False)
    return a


def _is_hermitian(m: np.ndarray, tol: float = ALG_TOL) -> bool:
    return np.allclose(m, m.conj().T, rtol=0.0, atol=tol)


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if abs(np.vdot(v, v).real - 1.0) > ALG_TOL:
            raise QuantumError(f"state is not normalized: |psi|^2 = {np.vdot(v, v).real!r}")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def normalized(cls, amplitudes) -> PureState:
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise QuantumError("cannot normalize the zero vector")
        return cls(v / n)

    @classmethod
    def basis(cls, d: int, k: int) -> PureState:
        v = np.zeros(d, dtype=complex)
        v[k] = 1.0
        return cls(v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> DensityOperator:
        return DensityOperator(self.projector())


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _as_matrix(self.matrix, "density operator")
        if not _is_hermitian(m):
            raise QuantumError("density operator is not Hermitian")
        if abs(np.trace(m).real - 1.0) > ALG_TOL:
            raise QuantumError(f"density operator has trace {np.trace(m).real!r}")
        if np.linalg.eigvalsh(m).min() < -SPEC_TOL:
            raise QuantumError("density operator has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def maximally_mixed(cls, d: int) -> DensityOperator:
        return cls(np.eye(d) / d)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True, eq=False)
class Effect:
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _as_matrix(self.matrix, "effect")
        if not _is_hermitian(m):
            raise QuantumError("effect is not Hermitian")
        ev = np.linalg.eigvalsh(m)
        if ev.min() < -SPEC_TOL or ev.max() > 1 + SPEC_TOL:
            raise QuantumError("effect eigenvalues must lie in [0, 1]")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Povm:
    effects: Mapping[Hashable, Effect]

    def __post_init__(self) -> None:
        effects = dict(self.effects)
        if not effects:
            raise QuantumError("a POVM needs at least one outcome")
        total = sum(e.matrix for e in effects.values())
        d = total.shape[0]
        if not np.allclose(total, np.eye(d), rtol=0.0, atol=ALG_TOL):
            raise QuantumError("POVM effects do not sum to the identity")
        object.__setattr__(self, "effects", effects)

    @property
    def outcomes(self) -> list:
        return list(self.effects)


@dataclass(frozen=True, eq=False)
class Instrument:
    """Kraus operators grouped by outcome: ``kraus[d] = [A_d1, A_d2, ...]``.

    The total map must be trace preserving, i.e. the induced effects
    ``E_d = sum_j A_dj^dagger A_dj`` form a POVM.
    """

    kraus: Mapping[Hashable, Sequence[np.ndarray]]
    povm: Povm = field(init=False, repr=False)

    def __post_init__(self) -> None:
        kraus = {d: tuple(_as_matrix(a, "Kraus operator") for a in ops) for d, ops in self.kraus.items()}
        if not kraus or any(len(ops) == 0 for ops in kraus.values()):
            raise QuantumError("every outcome needs at least one Kraus operator")
        dims = {a.shape[0] for ops in kraus.values() for a in ops}
        if len(dims) != 1:
            raise QuantumError("Kraus operators have mismatched dimensions")
        object.__setattr__(self, "kraus", kraus)
        # Raises if the effects are not complete.
        object.__setattr__(self, "povm", Povm({d: Effect(self.effect_matrix(d)) for d in kraus}))

    @property
    def dim(self) -> int:
        return next(iter(self.kraus.values()))[0].shape[0]

    @property
    def outcomes(self) -> list:
        return list(self.kraus)

    def effect_matrix(self, outcome: Hashable) -> np.ndarray:
        return sum(dagger(a) @ a for a in self.kraus[outcome])

    def completeness_defect(self) -> float:
        total = sum(self.effect_matrix(d) for d in self.kraus)
        return float(np.abs(total - np.eye(self.dim)).max())

    def apply(self, outcome: Hashable, rho: np.ndarray) -> np.ndarray:
        """Unnormalized ``sum_j A_dj rho A_dj^dagger``."""
        return sum(a @ rho @ dagger(a) for a in self.kraus[outcome])

    def coarse_grained(self, label: Hashable = "all") -> Instrument:
        """Forget the outcome: one outcome carrying every Kraus operator."""
        return Instrument({label: [a for ops in self.kraus.values() for a in ops]})

    @classmethod
    def projective(cls, basis: Sequence[PureState]) -> Instrument:
        return cls({j: [s.projector()] for j, s in enumerate(basis)})

    @classmethod
    def unitary(cls, u: np.ndarray) -> Instrument:
        return cls({0: [u]})


@dataclass(frozen=True, eq=False)
class Observable:
    """``sum_k eigenvalue_k |phi_k><phi_k|`` over an orthonormal basis."""

    eigenvalues: tuple[float, ...]
    eigenvectors: tuple[PureState, ...]

    def __post_init__(self) -> None:
        if len(self.eigenvalues) != len(self.eigenvectors):
            raise QuantumError("need one eigenvector per eigenvalue")
        vecs = np.array([s.amplitudes for s in self.eigenvectors])
        d = vecs.shape[1]
        if vecs.shape[0] != d or not np.allclose(vecs.conj() @ vecs.T, np.eye(d), rtol=0.0, atol=ALG_TOL):
            raise QuantumError("eigenvectors must form an orthonormal basis")
        object.__setattr__(self, "eigenvalues", tuple(float(x) for x in self.eigenvalues))
        object.__setattr__(self, "eigenvectors", tuple(self.eigenvectors))

    @classmethod
    def rank_one(cls, psi: PureState) -> Observable:
        """The projector ``|psi><psi|`` as an observable with eigenvalues 1, 0, ..., 0."""
        d = psi.dim
        m = np.eye(d, dtype=complex) - psi.projector()
        # Orthonormal complement of psi from the eigenvectors of 1 - |psi><psi|.
        w, v = np.linalg.eigh(m)
        rest = [PureState.normalized(v[:, i]) for i in np.argsort(w)[1:]]
        return cls((1.0,) + (0.0,) * (d - 1), (psi, *rest))

    def projectors(self) -> list[np.ndarray]:
        return [s.projector() for s in self.eigenvectors]

    def matrix(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.eigenvalues, self.projectors()))


def _matrix_of(x) -> np.ndarray:
    if isinstance(x, (DensityOperator, Effect)):
        return x.matrix
    if isinstance(x, PureState):
        return x.projector()
    return np.asarray(x, dtype=complex)


def born_prob(rho, e) -> float:
    """``tr(rho E)`` clamped to [0, 1]."""
    r = _matrix_of(rho)
    m = _matrix_of(e)
    if r.shape != m.shape:
        raise QuantumError(f"dimension mismatch: state {r.shape} vs effect {m.shape}")
    p = float(np.real(np.trace(r @ m)))
    return min(1.0, max(0.0, p))


def outcome_probabilities(rho, inst: Instrument | Povm) -> dict:
    povm = inst.povm if isinstance(inst, Instrument) else inst
    return {d: born_prob(rho, e) for d, e in povm.effects.items()}


def update(rho, inst: Instrument, outcome: Hashable) -> DensityOperator:
    """Post-measurement state ``A_d(rho) / p_d``."""
    r = _matrix_of(rho)
    if outcome not in inst.kraus:
        raise QuantumError(f"unknown outcome {outcome!r}")
    if r.shape[0] != inst.dim:
        raise QuantumError("dimension mismatch between state and instrument")
    out = inst.apply(outcome, r)
    p = float(np.real(np.trace(out)))
    if p <= ALG_TOL:
        raise ImpossibleOutcomeError(f"outcome {outcome!r} has probability {p!r}")
    out = out / p
    # Restore exact Hermiticity lost to rounding.
    return DensityOperator((out + dagger(out)) / 2)


# -- preparation operations ---------------------------------------------------


def choi_matrix(inst: Instrument, outcome: Hashable) -> np.ndarray:
    """``sum_ij |i><j| (x) A_d(|i><j|)``, input factor first."""
    d = inst.dim
    blocks = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            eij = np.zeros((d, d), dtype=complex)
            eij[i, j] = 1.0
            blocks[i * d:(i + 1) * d, j * d:(j + 1) * d] = inst.apply(outcome, eij)
    return blocks


def reshuffle(choi: np.ndarray, d: int) -> np.ndarray:
    """Rearrange so that ``X (x) Y`` maps to the rank-one ``vec(X) vec(Y)^T``."""
    return choi.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


class PreparationKind(enum.Enum):
    NOT_PREPARATION = "not_preparation"
    STOCHASTIC = "stochastic"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True, eq=False)
class Preparation:
    kind: PreparationKind
    state: Optional[DensityOperator] = None

    @property
    def is_preparation(self) -> bool:
        return self.kind is not PreparationKind.NOT_PREPARATION


def classify_preparation(inst: Instrument, outcome: Hashable) -> Preparation:
    """Decide whether outcome ``outcome`` of ``inst`` prepares a fixed state.

    A preparation acts as ``rho -> tr(E rho) sigma``; its Choi matrix is then
    ``E^T (x) sigma`` and the reshuffled Choi matrix has rank one.
    """
    d = inst.dim
    choi = choi_matrix(inst, outcome)
    s = np.linalg.svd(reshuffle(choi, d), compute_uv=False)
    if s[0] <= SPEC_TOL or (len(s) > 1 and s[1] > SPEC_TOL):
        return Preparation(PreparationKind.NOT_PREPARATION)
    # Partial trace over the input factor gives tr(E) * sigma.
    out = np.einsum("iaib->ab", choi.reshape(d, d, d, d))
    sigma = out / np.trace(out).real
    sigma = DensityOperator((sigma + dagger(sigma)) / 2)
    effect = inst.effect_matrix(outcome)
    if np.allclose(effect, np.eye(d), rtol=0.0, atol=ALG_TOL):
        return Preparation(PreparationKind.DETERMINISTIC, sigma)
    return Preparation(PreparationKind.STOCHASTIC, sigma)


def certainty_check(rho, obs: Observable) -> Optional[float]:
    """The eigenvalue a measurement of ``obs`` yields with certainty, if any."""
    for lam, proj in zip(obs.eigenvalues, obs.projectors()):
        if born_prob(rho, proj) >= 1 - SPEC_TOL:
            return lam
    return None


# -- composite systems and the Fig. 1 circuits -------------------------------

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)

# System is the first (most significant) qubit, apparatus the second.
CNOT_SYS_TO_APP = np.kron(P0, I2) + np.kron(P1, X)
CNOT_APP_TO_SYS = np.kron(I2, P0) + np.kron(X, P1)


def partial_trace(rho: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Reduced state of subsystem ``keep`` (0 or 1) of a bipartite operator."""
    da, db = dims
    t = np.asarray(rho).reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijik->jk", t)


def fig1_instrument(circuit: str, apparatus: PureState) -> Instrument:
    """The operation a Fig. 1 device induces on the system qubit.

    Circuit ``a`` keeps the apparatus reading as outcome label 0/1; circuits
    ``b`` and ``c`` are unitary, so the apparatus is traced out and the
    instrument has a single outcome.
    """
    if apparatus.dim != 2:
        raise QuantumError("apparatus must be a qubit")
    circuit = circuit.lower()
    g = apparatus.amplitudes
    if circuit == "a":
        kraus = {}
        for a in (0, 1):
            corr = np.linalg.matrix_power(X, a)
            # <a|_app CNOT |g>_app, then X^a on the system.
            bra = np.kron(I2, np.eye(2, dtype=complex)[a][None, :])
            ket = np.kron(I2, g[:, None])
            kraus[a] = [corr @ bra @ CNOT_SYS_TO_APP @ ket]
        return Instrument(kraus)
    if circuit in ("b", "c"):
        u = CNOT_APP_TO_SYS @ CNOT_SYS_TO_APP
        ket = np.kron(I2, g[:, None])
        ops = [np.kron(I2, np.eye(2, dtype=complex)[k][None, :]) @ u @ ket for k in (0, 1)]
        return Instrument({0: ops})
    raise QuantumError(f"unknown circuit {circuit!r}; expected a, b or c")


@dataclass(frozen=True, eq=False)
class CircuitRun:
    system_out: DensityOperator
    apparatus_out: DensityOperator
    outcome_distribution: dict
    # Per-outcome joint states for circuit a; empty for b and c.
    conditional_system: dict


FIG1_DEFAULT_APPARATUS = {"a": 0, "b": 0, "c": 1}


def run_fig1(circuit: str, system_in: PureState, apparatus_in: Optional[PureState] = None) -> CircuitRun:
    """Simulate one of the three Fig. 1 circuits on the joint system+apparatus.

    ``system_out`` and ``apparatus_out`` are the reduced states after the
    circuit, averaged over the measurement outcome for circuit ``a``.
    """
    circuit = circuit.lower()
    if circuit not in FIG1_DEFAULT_APPARATUS:
        raise QuantumError(f"unknown circuit {circuit!r}; expected a, b or c")
    if apparatus_in is None:
        apparatus_in = PureState.basis(2, FIG1_DEFAULT_APPARATUS[circuit])
    if system_in.dim != 2 or apparatus_in.dim != 2:
        raise QuantumError("Fig. 1 circuits act on two qubits")
    psi = CNOT_SYS_TO_APP @ np.kron(system_in.amplitudes, apparatus_in.amplitudes)
    joint0 = np.outer(psi, psi.conj())

    if circuit == "a":
        meas = Instrument({a: [np.kron(I2, p)] for a, p in ((0, P0), (1, P1))})
        joint = np.zeros((4, 4), dtype=complex)
        dist = {}
        conditional = {}
        for a in (0, 1):
            p = born_prob(joint0, meas.povm.effects[a])
            dist[a] = p
            if p <= ALG_TOL:
                continue
            post = update(joint0, meas, a).matrix
            corr = np.kron(np.linalg.matrix_power(X, a), I2)
            post = corr @ post @ dagger(corr)
            conditional[a] = DensityOperator(partial_trace(post, (2, 2), 0))
            joint += p * post
    else:
        psi = CNOT_APP_TO_SYS @ psi
        joint = np.outer(psi, psi.conj())
        dist = {}
        conditional = {}
    sys_out = partial_trace(joint, (2, 2), 0)
    app_out = partial_trace(joint, (2, 2), 1)
    return CircuitRun(
        DensityOperator((sys_out + dagger(sys_out)) / 2),
        DensityOperator((app_out + dagger(app_out)) / 2),
        dist,
        conditional,
    )


# -- classical Bayes ------------------------------------------------------------


def bayes_update(prior: Sequence[float], likelihoods, datum: int) -> np.ndarray:
    """Posterior over hypotheses after observing ``datum``.

    ``likelihoods[h][d]`` is Pr(d|h); a 1-D array is read as the column for
    the observed datum.
    """
    prior = np.asarray(prior, dtype=float)
    if abs(prior.sum() - 1.0) > ALG_TOL or (prior < 0).any():
        raise ValueError("prior must be a probability vector")
    lik = np.asarray(likelihoods, dtype=float)
    col = lik if lik.ndim == 1 else lik[:, datum]
    joint = col * prior
    evidence = joint.sum()
    if evidence <= 0:
        raise ZeroDivisionError(f"datum {datum} has zero probability under the prior")
    return joint / evidence


# -- mutually unbiased bases ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MubSet:
    dim: int
    bases: tuple[tuple[PureState, ...], ...]
    labels: tuple[str, ...]

    def projector(self, k: int, j: int) -> np.ndarray:
        return self.bases[k][j].projector()

    def max_bias_error(self) -> float:
        """Largest deviation of a cross-basis overlap ``|<e|f>|^2`` from ``1/d``."""
        worst = 0.0
        for k in range(len(self.bases)):
            for l in range(k + 1, len(self.bases)):
                for e in self.bases[k]:
                    for f in self.bases[l]:
                        ov = abs(np.vdot(e.amplitudes, f.amplitudes)) ** 2
                        worst = max(worst, abs(ov - 1 / self.dim))
        return worst


def mub_set(d: int) -> MubSet:
    """Complete MUB sets for qubits (Z, X, Y) and qutrits (standard + 3 Fourier-phase)."""
    if d == 2:
        s = 1 / np.sqrt(2)
        bases = (
            (PureState([1, 0]), PureState([0, 1])),
            (PureState([s, s]), PureState([s, -s])),
            (PureState([s, 1j * s]), PureState([s, -1j * s])),
        )
        return MubSet(2, bases, ("Z", "X", "Y"))
    if d == 3:
        w = np.exp(2j * np.pi / 3)
        k = np.arange(3)
        bases = [tuple(PureState.basis(3, j) for j in range(3))]
        for shift in range(3):
            bases.append(tuple(PureState(w ** (j * k + shift * k * k) / np.sqrt(3)) for j in range(3)))
        return MubSet(3, tuple(bases), ("Z", "F0", "F1", "F2"))
    raise QuantumError(f"MUB sets are provided for d = 2 or 3, not {d}")


def state_to_probs(rho, m: MubSet) -> np.ndarray:
    """Row k holds the outcome probabilities of a measurement in basis k."""
    return np.array([[born_prob(rho, s.projector()) for s in basis] for basis in m.bases])


@dataclass(frozen=True, eq=False)
class Reconstruction:
    matrix: np.ndarray
    positive: bool

    def density(self) -> DensityOperator:
        return DensityOperator(self.matrix)


def probs_to_state(table, m: MubSet) -> Reconstruction:
    """Invert the Born rule: ``rho = sum_kj p_kj Pi_kj - I``.

    The result is Hermitian with unit trace for any table with normalized
    rows; ``positive`` reports whether it is also a valid density operator.
    """
    t = np.asarray(table, dtype=float)
    if t.shape != (m.dim + 1, m.dim):
        raise QuantumError(f"expected a {m.dim + 1}x{m.dim} table, got {t.shape}")
    if np.abs(t.sum(axis=1) - 1).max() > SPEC_TOL:
        raise QuantumError("each row of the probability table must sum to 1")
    rho = -np.eye(m.dim, dtype=complex)
    for k, basis in enumerate(m.bases):
        for j, s in enumerate(basis):
            rho = rho + t[k, j] * s.projector()
    rho = (rho + dagger(rho)) / 2
    positive = bool(np.linalg.eigvalsh(rho).min() >= -SPEC_TOL)
    return Reconstruction(rho, positive)


def trace_distance(a, b) -> float:
    diff = _matrix_of(a) - _matrix_of(b)
    return 0.5 * float(np.abs(np.linalg.eigvalsh((diff + dagger(diff)) / 2)).sum())


def fidelity_pure(rho, psi: PureState) -> float:
    """``<psi|rho|psi>``."""
    r = _matrix_of(rho)
    return float(np.real(np.vdot(psi.amplitudes, r @ psi.amplitudes)))


# -- random sampling for tests and the CLI ----------------------------------------


def random_pure_state(d: int, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState.normalized(v)


def random_density(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityOperator:
    """Ginibre-distributed density operator of the given rank (full by default)."""
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    m = g @ dagger(g)
    m = m / np.trace(m).real
    return DensityOperator((m + dagger(m)) / 2)


def random_instrument(d: int, outcomes: int, kraus_per_outcome: int, rng: np.random.Generator) -> Instrument:
    """Random instrument from a Haar-ish isometry cut into Kraus blocks."""
    n = outcomes * kraus_per_outcome
    g = rng.normal(size=(n * d, d)) + 1j * rng.normal(size=(n * d, d))
    q, _ = np.linalg.qr(g)
    blocks = [q[i * d:(i + 1) * d, :] for i in range(n)]
    return Instrument({o: blocks[o * kraus_per_outcome:(o + 1) * kraus_per_outcome] for o in range(outcomes)})

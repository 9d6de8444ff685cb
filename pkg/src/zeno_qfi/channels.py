"""Unitary dilations of noisy channels and Kraus extraction.

A dilation is a time-parameterized unitary on system + environment whose
partial trace over the environment (started in |0...0>) reproduces the
channel.  Two representations are supported: an ordered list of Pauli
rotations exp(-i rate t P / 2), which scales to large registers, and a
dense Hermitian generator G with U(t) = exp(-i G t).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dense import (
    DENSE_QUBIT_CAP,
    DenseOperator,
    check_dense_cap,
    hermitian_expm,
)
from .exceptions import (
    DimensionMismatchError,
    HermiticityError,
    TracePreservationError,
)
from .paulis import OperatorSum, PauliTerm, pauli_rotation_apply
from .states import (
    ENVIRONMENT,
    SYSTEM,
    StateVector,
    Subsystem,
    register_order,
    system_env_matrix,
)

COMPLETENESS_TOL = 1e-10
KRAUS_PRUNE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DilatedEvolution:
    """Time-parameterized unitary U(t) on a labeled register.

    Exactly one of ``rotations`` (ordered (rate, PauliTerm) pairs, applied
    first-to-last) or ``dense_generator`` must be given.  Both forms satisfy
    U(0) = identity by construction.
    """

    labels: tuple[Subsystem, ...]
    rotations: tuple[tuple[float, PauliTerm], ...] | None = None
    dense_generator: DenseOperator | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        n = len(self.labels)
        if (self.rotations is None) == (self.dense_generator is None):
            raise ValueError("specify exactly one of rotations or dense_generator")
        if self.rotations is not None:
            rots = tuple((float(r), p) for r, p in self.rotations)
            for _, p in rots:
                if p.n_qubits != n:
                    raise DimensionMismatchError("rotation string size mismatch")
                if abs(p.coefficient - 1.0) > 1e-12:
                    raise ValueError("rotation Pauli strings must have unit coefficient")
            object.__setattr__(self, "rotations", rots)
        else:
            if self.dense_generator.dim != 2**n:
                raise DimensionMismatchError("generator dimension mismatch")
            if not self.dense_generator.is_hermitian():
                raise HermiticityError("dense generator must be Hermitian")

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @classmethod
    def from_rotations(cls, labels, rotations) -> "DilatedEvolution":
        return cls(labels=tuple(labels), rotations=tuple(rotations))

    @classmethod
    def from_generator(cls, labels, generator: DenseOperator) -> "DilatedEvolution":
        return cls(labels=tuple(labels), dense_generator=generator)


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Finite set of system-space Kraus operators at a fixed time.

    The completeness residual max|sum K^dag K - I| is computed on
    construction and must stay below 1e-10.
    """

    operators: tuple[DenseOperator, ...]
    time: float
    completeness_residual: float = field(init=False)

    def __post_init__(self):
        ops = tuple(self.operators)
        if not ops:
            raise ValueError("KrausSet needs at least one operator")
        dim = ops[0].dim
        if any(k.dim != dim for k in ops):
            raise DimensionMismatchError("Kraus operators of unequal dimension")
        acc = np.zeros((dim, dim), dtype=np.complex128)
        for k in ops:
            acc += k.matrix.conj().T @ k.matrix
        residual = float(np.abs(acc - np.eye(dim)).max())
        if residual > COMPLETENESS_TOL:
            raise TracePreservationError(
                f"Kraus completeness residual {residual:.3e} exceeds {COMPLETENESS_TOL:.0e}"
            )
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "completeness_residual", residual)

    @property
    def dim(self) -> int:
        return self.operators[0].dim


@dataclass(frozen=True)
class DephasingCouplingModel:
    """N system qubits, each coupled to its own environment qubit.

    Per pair the evolution is a local Z rotation at rate ``omega0`` followed
    by a ZX coupling at rate ``gamma``; all 2N rotation terms commute, so the
    ordering is immaterial.
    """

    n: int
    omega0: float
    gamma: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit pair")
        if not (np.isfinite(self.omega0) and np.isfinite(self.gamma)):
            raise ValueError("rates must be finite")

    @property
    def labels(self) -> tuple[Subsystem, ...]:
        return (SYSTEM,) * self.n + (ENVIRONMENT,) * self.n

    def dilation(self) -> DilatedEvolution:
        width = 2 * self.n
        rotations = []
        for i in range(self.n):
            z_i = "I" * i + "Z" + "I" * (width - i - 1)
            zx_i = list("I" * width)
            zx_i[i] = "Z"
            zx_i[self.n + i] = "X"
            rotations.append((self.omega0, PauliTerm(1.0, z_i)))
            rotations.append((self.gamma, PauliTerm(1.0, "".join(zx_i))))
        return DilatedEvolution.from_rotations(self.labels, rotations)


def build_dephasing_model(n: int, omega0: float, gamma: float) -> DilatedEvolution:
    """Dilation with N system qubits each dephasing-coupled to one
    environment qubit (system block first, then environment block)."""
    return DephasingCouplingModel(n, omega0, gamma).dilation()


def evolve(u: DilatedEvolution, state: StateVector, t: float) -> StateVector:
    """Apply U(t) to a state; norm is preserved to rounding."""
    if u.labels != state.labels:
        raise DimensionMismatchError("evolution register does not match the state")
    if u.rotations is not None:
        out = state
        for rate, pauli in u.rotations:
            out = pauli_rotation_apply(pauli, rate * t, out)
        return out
    unitary = hermitian_expm(u.dense_generator, t)
    return StateVector(unitary.matrix @ state.amplitudes, state.labels)


def _embedded_basis_indices(labels: tuple[Subsystem, ...]) -> np.ndarray:
    """Full-register index of |s>_S |0...0>_E for each system index s."""
    n_env = sum(1 for l in labels if l is ENVIRONMENT)
    d_sys = 2 ** sum(1 for l in labels if l is SYSTEM)
    order = register_order(labels)
    return order.reshape(d_sys, 2**n_env)[:, 0]


def kraus_from_dilation(
    u: DilatedEvolution, t: float, dense_cap: int = DENSE_QUBIT_CAP
) -> KrausSet:
    """Extract Kraus operators K_l = (I_S x <l|_E) U(t) (I_S x |0...0>_E).

    Operators are ordered by the environment outcome l; those with
    Frobenius norm below 1e-12 are pruned.  The register is enumerated
    densely, so it must fit under the cap.
    """
    check_dense_cap(u.n_qubits, dense_cap)
    d_sys = 2 ** sum(1 for l in u.labels if l is SYSTEM)
    d_env = 2 ** sum(1 for l in u.labels if l is ENVIRONMENT)
    columns = _embedded_basis_indices(u.labels)
    # stacked[s, s', l] = <s', l| U |s, 0>
    stacked = np.empty((d_sys, d_sys, d_env), dtype=np.complex128)
    for s in range(d_sys):
        amps = np.zeros(2**u.n_qubits, dtype=np.complex128)
        amps[columns[s]] = 1.0
        evolved = evolve(u, StateVector(amps, u.labels), t)
        stacked[s] = system_env_matrix(evolved)
    operators = []
    for l in range(d_env):
        mat = stacked[:, :, l].T
        if np.linalg.norm(mat) >= KRAUS_PRUNE_TOL:
            operators.append(DenseOperator(mat))
    return KrausSet(tuple(operators), time=float(t))


def apply_channel(kraus: KrausSet, rho: DenseOperator) -> DenseOperator:
    """Operator-sum action sum_l K_l rho K_l^dag on a system operator."""
    if rho.dim != kraus.dim:
        raise DimensionMismatchError("density matrix does not match the Kraus set")
    out = np.zeros_like(rho.matrix)
    for k in kraus.operators:
        out = out + k.matrix @ rho.matrix @ k.matrix.conj().T
    return DenseOperator(out)


def finite_difference_generator(
    u_of_t, h: float, residual_tol: float = 1e-6
) -> DenseOperator:
    """Hermitian generator of a unitary family from a central difference.

    Evaluates G = i (U(h) - U(-h)) / (2h) with one level of Richardson
    extrapolation, so the truncation error is O(h^4).  A non-Hermitian
    residue above ``residual_tol`` means the family does not satisfy
    U(0) = I with a Hermitian generator, and raises.
    """

    def estimate(step: float) -> np.ndarray:
        return 1j * (u_of_t(step) - u_of_t(-step)) / (2.0 * step)

    d1 = estimate(h)
    d2 = estimate(h / 2.0)
    gen = (4.0 * d2 - d1) / 3.0
    residue = float(np.abs(gen - gen.conj().T).max())
    if residue > residual_tol:
        raise HermiticityError(
            f"finite-difference generator has non-Hermitian residue {residue:.3e}"
        )
    return DenseOperator((gen + gen.conj().T) / 2.0)


def generator(u: DilatedEvolution, dense_cap: int = DENSE_QUBIT_CAP):
    """Hermitian generator G with U(t) = exp(-i G t) at t -> 0.

    Rotation-list dilations yield the exact Pauli sum of rate/2-weighted
    strings.  Dense dilations are differentiated numerically with step
    1e-4 over the fastest rate.
    """
    if u.rotations is not None:
        terms = [PauliTerm(rate / 2.0, p.factors) for rate, p in u.rotations]
        return OperatorSum(terms, hermitian=True, n_qubits=u.n_qubits)
    check_dense_cap(u.n_qubits, dense_cap)
    rates = np.abs(np.linalg.eigvalsh(u.dense_generator.matrix))
    fastest = float(rates.max()) if rates.size else 0.0
    h = 1e-4 / max(fastest, 1e-12)
    return finite_difference_generator(
        lambda t: hermitian_expm(u.dense_generator, t).matrix, h
    )

"""Pauli-string operators and their action on state vectors.

A Pauli string acts on a basis index by a bit flip (X, Y factors) and a
sign depending on the bits under its Z and Y factors, so application costs
O(2^n) per term with no dense matrix.  This is what carries registers past
the dense cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .dense import DENSE_QUBIT_CAP, DenseOperator, check_dense_cap
from .exceptions import DimensionMismatchError, HermiticityError
from .states import StateVector

PAULI_CHARS = "IXYZ"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

# (a, b) -> (phase, c) with a.b = phase * c for single-qubit Paulis.
_SINGLE_PRODUCTS = {
    ("X", "Y"): (1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("Y", "X"): (-1j, "Z"),
    ("Z", "Y"): (-1j, "X"),
    ("X", "Z"): (-1j, "Y"),
}

HERMITICITY_TOL = 1e-12
COEFF_PRUNE_TOL = 1e-15
IMAG_RESIDUE_TOL = 1e-10


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli string, e.g. 0.5 * Z x I x X."""

    coefficient: complex
    factors: str

    def __post_init__(self):
        object.__setattr__(self, "coefficient", complex(self.coefficient))
        if not self.factors or any(c not in PAULI_CHARS for c in self.factors):
            raise ValueError(f"invalid Pauli factors {self.factors!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    @property
    def is_identity(self) -> bool:
        return set(self.factors) == {"I"}

    def scaled(self, scalar: complex) -> "PauliTerm":
        return PauliTerm(self.coefficient * scalar, self.factors)


def pauli_product(f1: str, f2: str) -> tuple[complex, str]:
    """Product of two Pauli strings as (phase, factors), f1 acting first on
    the left: result = f1 . f2."""
    if len(f1) != len(f2):
        raise DimensionMismatchError("Pauli strings of unequal length")
    phase = 1.0 + 0.0j
    chars = []
    for a, b in zip(f1, f2):
        if a == "I":
            chars.append(b)
        elif b == "I" or a == b:
            chars.append("I" if a == b else a)
        else:
            p, c = _SINGLE_PRODUCTS[(a, b)]
            phase *= p
            chars.append(c)
    return phase, "".join(chars)


def paulis_commute(f1: str, f2: str) -> bool:
    """Two Pauli strings commute iff they anticommute on an even number of
    qubit positions."""
    if len(f1) != len(f2):
        raise DimensionMismatchError("Pauli strings of unequal length")
    clashes = sum(1 for a, b in zip(f1, f2) if a != "I" and b != "I" and a != b)
    return clashes % 2 == 0


class OperatorSum:
    """Weighted sum of Pauli strings, optionally certified Hermitian.

    Construction canonicalizes: duplicate strings are merged, negligible
    coefficients dropped, and terms sorted by factor string.  With
    ``hermitian=True`` every merged coefficient must be real to 1e-12
    (Pauli strings are Hermitian, so real weights are the whole check).
    """

    def __init__(self, terms, hermitian: bool = True, n_qubits: int | None = None):
        terms = tuple(terms)
        if terms:
            n = terms[0].n_qubits
            if any(t.n_qubits != n for t in terms):
                raise DimensionMismatchError("terms act on different register sizes")
        elif n_qubits is None:
            raise ValueError("empty OperatorSum needs an explicit n_qubits")
        else:
            n = n_qubits
        if n_qubits is not None and n_qubits != n:
            raise DimensionMismatchError("n_qubits does not match the terms")

        merged: dict[str, complex] = {}
        for t in terms:
            merged[t.factors] = merged.get(t.factors, 0.0) + t.coefficient
        canonical = []
        for factors in sorted(merged):
            c = merged[factors]
            if abs(c) <= COEFF_PRUNE_TOL:
                continue
            if hermitian and abs(c.imag) > HERMITICITY_TOL:
                raise HermiticityError(
                    f"term {factors} has non-real coefficient {c} in a Hermitian sum"
                )
            canonical.append(PauliTerm(c, factors))

        self._terms = tuple(canonical)
        self._hermitian = bool(hermitian)
        self._n = n

    @property
    def terms(self) -> tuple[PauliTerm, ...]:
        return self._terms

    @property
    def hermitian(self) -> bool:
        return self._hermitian

    @property
    def n_qubits(self) -> int:
        return self._n

    def coefficient_of(self, factors: str) -> complex:
        for t in self._terms:
            if t.factors == factors:
                return t.coefficient
        return 0.0 + 0.0j

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return OperatorSum(
            self._terms + other._terms,
            hermitian=self._hermitian and other._hermitian,
            n_qubits=self._n,
        )

    def __mul__(self, scalar) -> "OperatorSum":
        scalar = complex(scalar)
        return OperatorSum(
            tuple(t.scaled(scalar) for t in self._terms),
            hermitian=self._hermitian and abs(scalar.imag) <= HERMITICITY_TOL,
            n_qubits=self._n,
        )

    __rmul__ = __mul__

    def __repr__(self):
        body = " + ".join(f"({t.coefficient:g})*{t.factors}" for t in self._terms)
        return f"OperatorSum[{body or '0'}]"

    @classmethod
    def from_term(cls, coefficient: complex, factors: str, hermitian: bool = True):
        return cls((PauliTerm(coefficient, factors),), hermitian=hermitian)


def _apply_string(factors: str, amplitudes: np.ndarray) -> np.ndarray:
    """Apply a unit-coefficient Pauli string by bit manipulation."""
    n = len(factors)
    flip = 0
    sign_mask = 0
    n_y = 0
    for j, ch in enumerate(factors):
        bit = 1 << (n - 1 - j)
        if ch in ("X", "Y"):
            flip |= bit
        if ch in ("Y", "Z"):
            sign_mask |= bit
        if ch == "Y":
            n_y += 1
    idx = np.arange(amplitudes.size, dtype=np.int64)
    parity = np.zeros(amplitudes.size, dtype=np.int64)
    mask = sign_mask
    while mask:
        low = mask & -mask
        parity ^= (idx >> (int(low).bit_length() - 1)) & 1
        mask ^= low
    phase = (1j**n_y) * (1.0 - 2.0 * parity)
    out = np.empty_like(amplitudes)
    out[idx ^ flip] = phase * amplitudes
    return out


def apply_operator(op, state: StateVector) -> StateVector:
    """Apply a PauliTerm or OperatorSum to a state (result unnormalized).

    Cost is O(terms * 2^n); no dense matrix is formed.
    """
    if isinstance(op, PauliTerm):
        op = OperatorSum((op,), hermitian=abs(op.coefficient.imag) <= HERMITICITY_TOL)
    if op.n_qubits != state.n_qubits:
        raise DimensionMismatchError(
            f"operator on {op.n_qubits} qubits applied to {state.n_qubits}-qubit state"
        )
    out = np.zeros_like(state.amplitudes)
    for t in op.terms:
        out += t.coefficient * _apply_string(t.factors, state.amplitudes)
    return StateVector(out, state.labels)


def _applied_vector(op, state: StateVector) -> np.ndarray:
    if isinstance(op, DenseOperator):
        if op.dim != state.dim:
            raise DimensionMismatchError("dense operator does not match state size")
        return op.matrix @ state.amplitudes
    return apply_operator(op, state).amplitudes


def expectation(op, state: StateVector) -> float:
    """Real expectation value <psi|O|psi> of a Hermitian operator.

    Accepts an OperatorSum (with its hermitian flag set) or a Hermitian
    DenseOperator.  An imaginary residue above 1e-10 raises, since it
    signals a non-Hermitian input rather than rounding noise.
    """
    if isinstance(op, OperatorSum) and not op.hermitian:
        raise HermiticityError("expectation requires a Hermitian operator sum")
    if isinstance(op, DenseOperator) and not op.is_hermitian():
        raise HermiticityError("expectation requires a Hermitian matrix")
    value = complex(np.vdot(state.amplitudes, _applied_vector(op, state)))
    if abs(value.imag) > IMAG_RESIDUE_TOL:
        raise HermiticityError(f"imaginary residue {value.imag:.3e} exceeds tolerance")
    return float(value.real)


def variance(op, state: StateVector) -> float:
    """Variance <O^2> - <O>^2 on a state, computed as |O psi|^2 - <O>^2.

    The squared-norm form is robust near eigenstates; values in
    [-1e-12, 0) are clamped to zero, anything lower raises.
    """
    if isinstance(op, OperatorSum) and not op.hermitian:
        raise HermiticityError("variance requires a Hermitian operator sum")
    if isinstance(op, DenseOperator) and not op.is_hermitian():
        raise HermiticityError("variance requires a Hermitian matrix")
    vec = _applied_vector(op, state)
    mean = complex(np.vdot(state.amplitudes, vec))
    if abs(mean.imag) > IMAG_RESIDUE_TOL:
        raise HermiticityError(f"imaginary residue {mean.imag:.3e} exceeds tolerance")
    second = float(np.vdot(vec, vec).real)
    var = second - mean.real**2
    if var < -1e-12:
        raise ValueError(f"variance {var:.3e} below numerical tolerance")
    return max(var, 0.0)


def to_dense(op, dense_cap: int = DENSE_QUBIT_CAP) -> DenseOperator:
    """Dense matrix of a PauliTerm or OperatorSum (register within cap)."""
    if isinstance(op, PauliTerm):
        op = OperatorSum((op,), hermitian=False)
    check_dense_cap(op.n_qubits, dense_cap)
    dim = 2**op.n_qubits
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for t in op.terms:
        mat += t.coefficient * reduce(
            np.kron, (PAULI_MATRICES[c] for c in t.factors)
        )
    return DenseOperator(mat)


def pauli_rotation_apply(
    pauli: PauliTerm, theta: float, state: StateVector
) -> StateVector:
    """Apply exp(-i theta P / 2) for a unit-coefficient Pauli string P.

    Uses P^2 = I, so the rotation is cos(theta/2) - i sin(theta/2) P,
    exactly unitary at any register size.
    """
    if abs(pauli.coefficient - 1.0) > 1e-12:
        raise ValueError("pauli_rotation_apply needs a unit-coefficient Pauli string")
    if pauli.n_qubits != state.n_qubits:
        raise DimensionMismatchError("rotation string does not match register size")
    rotated = np.cos(theta / 2.0) * state.amplitudes - 1j * np.sin(
        theta / 2.0
    ) * _apply_string(pauli.factors, state.amplitudes)
    return StateVector(rotated, state.labels)

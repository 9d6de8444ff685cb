"""Channel quantum Fisher information via variational minimization.

Monitoring system and environment together can only add information, so
four times the variance of the effective generator upper-bounds the channel
QFI.  The bound is tightened by adding a conjugated environment operator
h'(tau) = U'(tau)^dag h_E U'(tau) to the generator and minimizing over the
coefficients of h_E in a Hermitian basis.  Because the variance is an exact
quadratic in those coefficients, the minimum is one positive-semidefinite
linear solve, with an SLD eigen-decomposition oracle and closed-form
expressions for the dephasing-coupling model as independent checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, isfinite, sin, sqrt

import numpy as np

from .channels import DilatedEvolution, generator
from .dense import (
    DENSE_QUBIT_CAP,
    DenseOperator,
    check_dense_cap,
    hermitian_expm,
    partial_trace,
)
from .exceptions import (
    ConvergenceError,
    DimensionMismatchError,
    PoleProximityError,
)
from .paulis import (
    OperatorSum,
    PauliTerm,
    apply_operator,
    pauli_product,
    paulis_commute,
    to_dense,
)
from .states import (
    ENVIRONMENT,
    SYSTEM,
    StateVector,
    Subsystem,
    register_order,
)
from .zeno import ZenoProjector, ZenoSchedule, survival_probability_exact

POLE_TOL = 1e-8
GRAM_CUTOFF = 1e-10
SLD_EIGENVALUE_FLOOR = 1e-10
SLD_CONVERGENCE_TOL = 1e-5


@dataclass(frozen=True, eq=False)
class EnvOperatorBasis:
    """Hermitian operators acting as the identity on every system qubit."""

    elements: tuple[OperatorSum, ...]
    labels: tuple[Subsystem, ...]

    def __post_init__(self):
        elements = tuple(self.elements)
        labels = tuple(self.labels)
        if not elements:
            raise ValueError("basis must contain at least one element")
        sys_pos = [i for i, l in enumerate(labels) if l is SYSTEM]
        for op in elements:
            if not op.hermitian:
                raise ValueError("basis elements must be Hermitian")
            if op.n_qubits != len(labels):
                raise DimensionMismatchError("basis element does not match register")
            for term in op.terms:
                if any(term.factors[p] != "I" for p in sys_pos):
                    raise ValueError(
                        "basis elements must act trivially on system qubits"
                    )
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def single_qubit_paulis(cls, labels) -> "EnvOperatorBasis":
        """X, Y, Z on each environment qubit separately (3 per qubit)."""
        labels = tuple(labels)
        n = len(labels)
        elements = []
        for p, l in enumerate(labels):
            if l is not ENVIRONMENT:
                continue
            for ch in "XYZ":
                factors = "I" * p + ch + "I" * (n - p - 1)
                elements.append(OperatorSum.from_term(1.0, factors))
        return cls(tuple(elements), labels)

    @classmethod
    def symmetric(cls, labels) -> "EnvOperatorBasis":
        """Permutation-symmetric ansatz: sums of X, of Y, and of Z over all
        environment qubits (3 elements regardless of size)."""
        labels = tuple(labels)
        n = len(labels)
        env_pos = [i for i, l in enumerate(labels) if l is ENVIRONMENT]
        if not env_pos:
            raise ValueError("register has no environment qubits")
        elements = []
        for ch in "XYZ":
            terms = [
                PauliTerm(1.0, "I" * p + ch + "I" * (n - p - 1)) for p in env_pos
            ]
            elements.append(OperatorSum(terms))
        return cls(tuple(elements), labels)

    @classmethod
    def complete(cls, labels) -> "EnvOperatorBasis":
        """Every non-identity Pauli string on the environment (4^k - 1
        elements for k environment qubits), including correlated multi-qubit
        strings.

        This exhausts the Hermitian operators on the environment up to an
        identity shift, so minimizing over it makes the variational bound
        tight; single-qubit bases can stay strictly above the channel QFI
        on entangled inputs.  Element count grows fast, so this is meant
        for small registers and oracle work.
        """
        import itertools

        labels = tuple(labels)
        n = len(labels)
        env_pos = [i for i, l in enumerate(labels) if l is ENVIRONMENT]
        if not env_pos:
            raise ValueError("register has no environment qubits")
        elements = []
        for combo in itertools.product("IXYZ", repeat=len(env_pos)):
            if all(ch == "I" for ch in combo):
                continue
            factors = ["I"] * n
            for p, ch in zip(env_pos, combo):
                factors[p] = ch
            elements.append(OperatorSum.from_term(1.0, "".join(factors)))
        return cls(tuple(elements), labels)


@dataclass(frozen=True, eq=False)
class VariationalSolution:
    """Optimal basis coefficients and the minimized information bound."""

    coefficients: np.ndarray
    qfi: float
    gram_condition: float

    def __post_init__(self):
        coeff = np.array(self.coefficients, dtype=float)
        coeff.setflags(write=False)
        object.__setattr__(self, "coefficients", coeff)


@dataclass(frozen=True)
class AnalyticParams:
    """Parameters of the N-pair dephasing-coupling model at one interval."""

    n: int
    omega0: float
    gamma: float
    tau: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if not self.tau > 0:
            raise ValueError("interval must be positive")
        if not (isfinite(self.omega0) and isfinite(self.gamma)):
            raise ValueError("rates must be finite")


def _applied(op, state: StateVector) -> np.ndarray:
    if isinstance(op, DenseOperator):
        if op.dim != state.dim:
            raise DimensionMismatchError("operator does not match state size")
        return op.matrix @ state.amplitudes
    return apply_operator(op, state).amplitudes


def qfi_upper_bound(h_prime, psi_full: StateVector) -> float:
    """Channel-information bound 4 Var(H') on the enlarged register."""
    vec = _applied(h_prime, psi_full)
    mean = float(np.vdot(psi_full.amplitudes, vec).real)
    second = float(np.vdot(vec, vec).real)
    return 4.0 * max(second - mean**2, 0.0)


def _mutually_commuting(op: OperatorSum) -> bool:
    terms = op.terms
    return all(
        paulis_commute(terms[i].factors, terms[j].factors)
        for i in range(len(terms))
        for j in range(i + 1, len(terms))
    )


def _conjugate_by_rotation(
    terms: list[PauliTerm], theta: float, axis: str
) -> list[PauliTerm]:
    """R^dag Q R for R = exp(-i theta P/2): Q if [P,Q]=0, otherwise
    cos(theta) Q - i sin(theta) QP."""
    out: list[PauliTerm] = []
    c, s = cos(theta), sin(theta)
    for q in terms:
        if paulis_commute(q.factors, axis):
            out.append(q)
            continue
        phase, prod = pauli_product(q.factors, axis)
        out.append(PauliTerm(q.coefficient * c, q.factors))
        out.append(PauliTerm(q.coefficient * (-1j) * s * phase, prod))
    return out


def conjugate_env_operator(
    h_env: OperatorSum, h_hat, tau: float, dense_cap: int = DENSE_QUBIT_CAP
):
    """Heisenberg picture of an environment operator under exp(-i H_hat tau).

    When H_hat is a Pauli sum of mutually commuting terms, the evolution
    factorizes into Pauli rotations and the conjugation stays inside the
    Pauli algebra at any register size.  Otherwise the product is formed
    densely, which requires the register to fit under the cap.
    """
    if isinstance(h_hat, OperatorSum) and _mutually_commuting(h_hat):
        terms = list(h_env.terms)
        for term in h_hat.terms:
            theta = 2.0 * term.coefficient.real * tau
            terms = _conjugate_by_rotation(terms, theta, term.factors)
        return OperatorSum(terms, hermitian=h_env.hermitian, n_qubits=h_env.n_qubits)
    check_dense_cap(h_env.n_qubits, dense_cap)
    h_dense = h_hat if isinstance(h_hat, DenseOperator) else to_dense(h_hat, dense_cap)
    u = hermitian_expm(h_dense, tau)
    h_mat = to_dense(h_env, dense_cap).matrix
    return DenseOperator(u.matrix.conj().T @ h_mat @ u.matrix)


def minimize_qfi_bound(
    h_hat,
    basis: EnvOperatorBasis,
    psi_full: StateVector,
    tau: float,
    dense_cap: int = DENSE_QUBIT_CAP,
) -> VariationalSolution:
    """Minimize 4 Var(H_hat + sum_k c_k h'_k) over the coefficients c.

    The variance is an exact quadratic in c, so the optimum solves the
    normal equations A c = -b built from symmetrized covariances on the
    initial state.  Degenerate Gram matrices are handled by a pseudo-inverse
    with singular values below 1e-10 of the largest treated as zero; the
    raw condition number is reported for diagnostics.
    """
    conjugated = [
        conjugate_env_operator(h, h_hat, tau, dense_cap) for h in basis.elements
    ]
    amps = psi_full.amplitudes
    base_vec = _applied(h_hat, psi_full)
    base_mean = float(np.vdot(amps, base_vec).real)
    vecs = [_applied(op, psi_full) for op in conjugated]
    means = np.array([float(np.vdot(amps, v).real) for v in vecs])

    k = len(vecs)
    gram = np.empty((k, k))
    cross = np.empty(k)
    for i in range(k):
        cross[i] = float(np.vdot(base_vec, vecs[i]).real) - base_mean * means[i]
        for j in range(i, k):
            cov = float(np.vdot(vecs[i], vecs[j]).real) - means[i] * means[j]
            gram[i, j] = gram[j, i] = cov

    u, s, vt = np.linalg.svd(gram, hermitian=True)
    s_max = float(s.max(initial=0.0))
    if s_max == 0.0:
        coeff = np.zeros(k)
        condition = float("inf")
    else:
        inv = np.where(s > GRAM_CUTOFF * s_max, 1.0 / np.where(s > 0, s, 1.0), 0.0)
        coeff = -(vt.T @ (inv * (u.T @ cross)))
        s_min = float(s.min())
        condition = s_max / s_min if s_min > 0 else float("inf")

    combined = base_vec + sum(c * v for c, v in zip(coeff, vecs))
    mean = base_mean + float(coeff @ means)
    var = float(np.vdot(combined, combined).real) - mean**2
    return VariationalSolution(coeff, 4.0 * max(var, 0.0), condition)


def _minimize_by_gradient_descent(
    h_hat,
    basis: EnvOperatorBasis,
    psi_full: StateVector,
    tau: float,
    steps: int = 2000,
    learning_rate: float = 0.05,
) -> VariationalSolution:
    """Plain gradient descent on the same quadratic; debug cross-check only."""
    conjugated = [
        conjugate_env_operator(h, h_hat, tau) for h in basis.elements
    ]
    amps = psi_full.amplitudes
    base_vec = _applied(h_hat, psi_full)
    base_mean = float(np.vdot(amps, base_vec).real)
    vecs = [_applied(op, psi_full) for op in conjugated]
    means = np.array([float(np.vdot(amps, v).real) for v in vecs])
    k = len(vecs)
    gram = np.array(
        [
            [float(np.vdot(vecs[i], vecs[j]).real) - means[i] * means[j] for j in range(k)]
            for i in range(k)
        ]
    )
    cross = np.array(
        [float(np.vdot(base_vec, vecs[i]).real) - base_mean * means[i] for i in range(k)]
    )
    scale = max(float(np.abs(gram).max()), 1.0)
    coeff = np.zeros(k)
    for _ in range(steps):
        coeff = coeff - learning_rate * (gram @ coeff + cross) / scale
    combined = base_vec + sum(c * v for c, v in zip(coeff, vecs))
    mean = base_mean + float(coeff @ means)
    var = float(np.vdot(combined, combined).real) - mean**2
    return VariationalSolution(coeff, 4.0 * max(var, 0.0), float("nan"))


def optimal_env_coefficients(p: AnalyticParams) -> tuple[float, float, float]:
    """Closed-form optimum (alpha, beta, gamma) of the symmetric ansatz.

    Only the Y component survives:
    beta = omega0 N sin(Gamma tau) / 2[N sin^2(Gamma tau) + cos^2(Gamma tau)].
    """
    phase = p.gamma * p.tau
    s, c = sin(phase), cos(phase)
    beta = p.omega0 * p.n * s / (2.0 * (p.n * s**2 + c**2))
    return 0.0, beta, 0.0


def qfi_one_qubit(p: AnalyticParams) -> float:
    """Optimal channel QFI of one dephasing-coupled qubit:
    omega0^2 cos^2(Gamma tau) + Gamma^2."""
    return p.omega0**2 * cos(p.gamma * p.tau) ** 2 + p.gamma**2


def qfi_ghz(p: AnalyticParams) -> float:
    """Optimal channel QFI of the N-qubit maximally entangled state:
    omega0^2 N^2 / (1 + N tan^2(Gamma tau)) + N Gamma^2.

    Evaluated in the pole-free form N^2 c^2 / (c^2 + N s^2); proximity to
    the tangent pole is still flagged because the expression is no longer
    a faithful optimum there.
    """
    phase = p.gamma * p.tau
    c, s = cos(phase), sin(phase)
    if abs(c) < POLE_TOL:
        raise PoleProximityError(
            f"cos(gamma*tau) = {c:.2e} too close to the tangent pole"
        )
    return p.omega0**2 * p.n**2 * c**2 / (c**2 + p.n * s**2) + p.n * p.gamma**2


def qfi_ghz_large_n(p: AnalyticParams) -> float:
    """Large-N limit N [Gamma^2 + omega0^2 cot^2(Gamma tau)] of the
    entangled-state QFI."""
    phase = p.gamma * p.tau
    s, c = sin(phase), cos(phase)
    if abs(s) < POLE_TOL:
        raise PoleProximityError(
            f"sin(gamma*tau) = {s:.2e} too close to the cotangent pole"
        )
    return p.n * (p.gamma**2 + p.omega0**2 * (c / s) ** 2)


def qfi_separable(p: AnalyticParams) -> float:
    """Channel QFI of the N-qubit product state, N times the one-qubit
    value by additivity."""
    return p.n * qfi_one_qubit(p)


def qfi_ratio_asymptote(p: AnalyticParams) -> float:
    """N -> infinity limit of the entangled/separable QFI ratio:
    [Gamma^2 + omega0^2 cot^2] / [Gamma^2 + omega0^2 cos^2]."""
    phase = p.gamma * p.tau
    s, c = sin(phase), cos(phase)
    if abs(s) < POLE_TOL:
        raise PoleProximityError(
            f"sin(gamma*tau) = {s:.2e} too close to the cotangent pole"
        )
    return (p.gamma**2 + p.omega0**2 * (c / s) ** 2) / (
        p.gamma**2 + p.omega0**2 * c**2
    )


def zeno_time_bound(
    p: AnalyticParams, m: int, entangled: bool = True, asymptotic: bool = False
) -> float:
    """Upper bound 2 / sqrt(m F_Q) on the Zeno time for one state family.

    The entangled family uses the exact finite-N formula unless
    ``asymptotic`` selects the flagged large-N cotangent variant.
    """
    if m < 1:
        raise ValueError("need at least one measurement")
    if entangled:
        fq = qfi_ghz_large_n(p) if asymptotic else qfi_ghz(p)
    else:
        if asymptotic:
            raise ValueError("the separable bound has no separate large-N variant")
        fq = qfi_separable(p)
    return 2.0 / sqrt(m * fq)


def _density_from_initial(initial, n_system: int) -> np.ndarray:
    if isinstance(initial, StateVector):
        if initial.count(ENVIRONMENT):
            raise ValueError("initial state must live on system qubits only")
        amps = initial.amplitudes
        return np.outer(amps, amps.conj())
    if isinstance(initial, DenseOperator):
        return np.array(initial.matrix)
    raise TypeError("initial must be a StateVector or DenseOperator")


def _sld_information(rho: np.ndarray, drho: np.ndarray) -> float:
    """QFI from the symmetric-logarithmic-derivative eigen expansion."""
    lam, vecs = np.linalg.eigh(rho)
    d = vecs.conj().T @ drho @ vecs
    total = 0.0
    for i in range(lam.size):
        for j in range(lam.size):
            denom = lam[i] + lam[j]
            if denom > SLD_EIGENVALUE_FLOOR:
                total += 2.0 * abs(d[i, j]) ** 2 / denom
    return float(total)


def qfi_sld_oracle(
    evolution: DilatedEvolution,
    initial,
    tau: float,
    dtau: float | None = None,
    dense_cap: int = DENSE_QUBIT_CAP,
) -> float:
    """Channel QFI at interval tau from the mixed-state SLD formula.

    The system (pure state or density matrix) is paired with the
    environment in |0...0>, evolved densely under the dilation's generator,
    and traced down to rho_S(t); the derivative is a central difference in
    tau.  The estimate must agree with its half-step refinement to 1e-5
    relative, and the refined value is returned.  This path is independent
    of the variational solver and serves as its oracle.
    """
    check_dense_cap(evolution.n_qubits, dense_cap)
    if not tau > 0:
        raise ValueError("interval must be positive")
    step = 1e-4 * tau if dtau is None else float(dtau)
    if not step > 0:
        raise ValueError("dtau must be positive")

    labels = evolution.labels
    gen = generator(evolution, dense_cap)
    gen_mat = gen.matrix if isinstance(gen, DenseOperator) else to_dense(gen, dense_cap).matrix
    w, v = np.linalg.eigh(gen_mat)

    n_sys = sum(1 for l in labels if l is SYSTEM)
    d_sys = 2**n_sys
    d_env = 2 ** (len(labels) - n_sys)
    rho0 = _density_from_initial(initial, n_sys)
    if rho0.shape != (d_sys, d_sys):
        raise DimensionMismatchError("initial state does not match the system register")
    embed = register_order(labels).reshape(d_sys, d_env)[:, 0]
    rho_full0 = np.zeros((2 ** len(labels),) * 2, dtype=np.complex128)
    rho_full0[np.ix_(embed, embed)] = rho0

    def rho_system(t: float) -> np.ndarray:
        u = (v * np.exp(-1j * w * t)) @ v.conj().T
        full = u @ rho_full0 @ u.conj().T
        return partial_trace(DenseOperator(full), labels, SYSTEM).matrix

    rho_mid = rho_system(tau)

    def estimate(d: float) -> float:
        drho = (rho_system(tau + d) - rho_system(tau - d)) / (2.0 * d)
        return _sld_information(rho_mid, drho)

    coarse = estimate(step)
    fine = estimate(step / 2.0)
    if abs(coarse - fine) > SLD_CONVERGENCE_TOL * max(abs(fine), 1e-12):
        raise ConvergenceError(
            f"SLD derivative did not converge: {coarse:.8e} vs {fine:.8e} "
            f"at dtau {step:.3e}; reduce dtau"
        )
    return fine


def fisher_from_survival(
    evolution: DilatedEvolution,
    projector: ZenoProjector,
    env0: StateVector,
    tau: float,
    dtau: float | None = None,
) -> float:
    """Information bound [dP/dtau]^2 / (P (1-P)) from the single-measurement
    survival probability, differentiated numerically.

    Matches 4 Var(H_hat) only to leading order in tau, so comparisons are
    meaningful in the short-interval regime.
    """
    if not tau > 0:
        raise ValueError("interval must be positive")
    step = 1e-4 * tau if dtau is None else float(dtau)
    if not 0 < step < tau:
        raise ValueError("dtau must be positive and smaller than tau")

    def survival(t: float) -> float:
        return survival_probability_exact(
            evolution, projector, env0, ZenoSchedule(1, t)
        )

    p_mid = survival(tau)
    denom = p_mid * (1.0 - p_mid)
    if denom < 1e-14:
        raise ValueError("survival probability too close to 0 or 1 to differentiate")
    dp = (survival(tau + step) - survival(tau - step)) / (2.0 * step)
    return dp**2 / denom

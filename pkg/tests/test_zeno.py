import numpy as np
import pytest

from zeno_qfi.channels import (
    DilatedEvolution,
    build_dephasing_model,
    generator,
)
from zeno_qfi.dense import DenseOperator
from zeno_qfi.paulis import OperatorSum, PauliTerm, to_dense, variance
from zeno_qfi.states import (
    ENVIRONMENT,
    SYSTEM,
    StateVector,
    basis_state,
    ghz_state,
    plus_state,
    tensor_state,
    zero_environment,
)
from zeno_qfi.zeno import (
    ZenoProjector,
    ZenoSchedule,
    conditional_state,
    survival_probability_exact,
    survival_probability_quadratic,
    zeno_hamiltonian,
    zeno_time,
)


def one_pair_setup(omega0=1.0, gamma=1.0):
    model = build_dephasing_model(1, omega0, gamma)
    projector = ZenoProjector(plus_state(1))
    env0 = zero_environment(1)
    return model, projector, env0


# ---- schedules and projectors ----


def test_schedule_validation():
    with pytest.raises(ValueError):
        ZenoSchedule(0, 0.1)
    with pytest.raises(ValueError):
        ZenoSchedule(3, 0.0)
    assert ZenoSchedule(4, 0.25).total_time == pytest.approx(1.0)


def test_projector_requires_system_labels():
    with pytest.raises(ValueError):
        ZenoProjector(zero_environment(1))


# ---- exact survival probability ----


def test_commuting_projector_survives_exactly():
    # psi0 = |0> is a Z eigenstate, so the projector commutes with both
    # rotation axes and nothing ever leaks out
    model = build_dephasing_model(1, 1.0, 1.0)
    projector = ZenoProjector(basis_state(0, (SYSTEM,)))
    p = survival_probability_exact(
        model, projector, zero_environment(1), ZenoSchedule(10, 0.3)
    )
    assert p == pytest.approx(1.0, abs=1e-12)


def test_single_measurement_closed_system():
    omega0, tau = 1.0, 0.8
    model, projector, env0 = one_pair_setup(omega0, 0.0)
    p = survival_probability_exact(model, projector, env0, ZenoSchedule(1, tau))
    assert p == pytest.approx(np.cos(omega0 * tau / 2) ** 2, abs=1e-12)


def test_single_measurement_with_coupling():
    """m=1 survival has the closed form cos^2(w t/2)cos^2(g t/2) +
    sin^2(w t/2)sin^2(g t/2)."""
    omega0, gamma, tau = 1.0, 1.3, 0.6
    model, projector, env0 = one_pair_setup(omega0, gamma)
    p = survival_probability_exact(model, projector, env0, ZenoSchedule(1, tau))
    a, b = omega0 * tau / 2, gamma * tau / 2
    expected = np.cos(a) ** 2 * np.cos(b) ** 2 + np.sin(a) ** 2 * np.sin(b) ** 2
    assert p == pytest.approx(expected, abs=1e-12)


def test_survival_in_unit_range():
    model, projector, env0 = one_pair_setup()
    for m, tau in ((1, 2.0), (7, 0.3), (40, 0.01)):
        p = survival_probability_exact(model, projector, env0, ZenoSchedule(m, tau))
        assert 0.0 <= p <= 1.0 + 1e-12


def test_survival_close_to_quadratic_at_small_tau():
    model, projector, env0 = one_pair_setup()
    m, tau = 20, 0.01
    exact = survival_probability_exact(model, projector, env0, ZenoSchedule(m, tau))
    # Var(H) = (w^2 + g^2)/4 = 0.5 for this model and state
    quad = 1 - m * 0.5 * tau**2
    rates = np.hypot(1.0, 1.0)
    assert abs(exact - quad) <= 5 * m * tau**3 * rates**3


def test_survival_invariant_under_global_phase():
    model, _, env0 = one_pair_setup()
    shifted = ZenoProjector(
        StateVector(np.exp(0.7j) * plus_state(1).amplitudes, (SYSTEM,))
    )
    schedule = ZenoSchedule(5, 0.2)
    p1 = survival_probability_exact(
        model, ZenoProjector(plus_state(1)), env0, schedule
    )
    p2 = survival_probability_exact(model, shifted, env0, schedule)
    assert p1 == pytest.approx(p2, rel=1e-12)


def test_survival_invariant_under_environment_relabeling():
    """Swapping which environment qubit each system qubit couples to cannot
    change the survival probability when the environment starts symmetric."""
    canonical = build_dephasing_model(2, 1.0, 1.0)
    swapped = DilatedEvolution.from_rotations(
        canonical.labels,
        (
            (1.0, PauliTerm(1.0, "ZIII")),
            (1.0, PauliTerm(1.0, "ZIIX")),  # system 0 -> environment 1
            (1.0, PauliTerm(1.0, "IZII")),
            (1.0, PauliTerm(1.0, "IZXI")),  # system 1 -> environment 0
        ),
    )
    projector = ZenoProjector(ghz_state(2))
    env0 = zero_environment(2)
    schedule = ZenoSchedule(4, 0.35)
    p1 = survival_probability_exact(canonical, projector, env0, schedule)
    p2 = survival_probability_exact(swapped, projector, env0, schedule)
    assert p1 == pytest.approx(p2, rel=1e-12)


def test_zeno_convergence_in_measurement_number():
    """At fixed total time the survival probability climbs toward one as
    the measurements get denser."""
    model, projector, env0 = one_pair_setup()
    total = 1.0
    values = [
        survival_probability_exact(
            model, projector, env0, ZenoSchedule(m, total / m)
        )
        for m in (1, 2, 4, 8, 16, 32, 64, 128, 256)
    ]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] >= 0.98


# ---- conditional state ----


def test_conditional_state_without_evolution():
    model, projector, env0 = one_pair_setup(0.0, 0.0)
    rho = conditional_state(model, projector, env0, ZenoSchedule(3, 0.5))
    expected = np.full((2, 2), 0.5)
    np.testing.assert_allclose(rho.matrix, expected, atol=1e-13)


def test_conditional_state_commuting_case():
    model = build_dephasing_model(1, 1.0, 1.0)
    projector = ZenoProjector(basis_state(0, (SYSTEM,)))
    rho = conditional_state(model, projector, zero_environment(1), ZenoSchedule(5, 0.4))
    np.testing.assert_allclose(rho.matrix, [[1, 0], [0, 0]], atol=1e-13)


def test_conditional_state_high_fidelity_in_zeno_regime():
    model, projector, env0 = one_pair_setup()
    rho = conditional_state(model, projector, env0, ZenoSchedule(50, 0.01))
    fidelity = float(
        np.real(plus_state(1).amplitudes.conj() @ rho.matrix @ plus_state(1).amplitudes)
    )
    assert fidelity >= 0.99
    assert rho.trace.real == pytest.approx(1.0, abs=1e-12)


def test_conditional_state_unit_trace_whenever_probability_survives():
    model, projector, env0 = one_pair_setup(1.0, 0.4)
    for m, tau in ((3, 0.7), (20, 0.05)):
        schedule = ZenoSchedule(m, tau)
        p = survival_probability_exact(model, projector, env0, schedule)
        if p > 1e-10:
            rho = conditional_state(model, projector, env0, schedule)
            assert rho.trace.real == pytest.approx(1.0, abs=1e-12)


def test_conditional_state_raises_on_vanishing_probability():
    # gamma = 0 and omega0 tau = pi sends |+> to |-> exactly
    model, projector, env0 = one_pair_setup(1.0, 0.0)
    with pytest.raises(ValueError, match="too small"):
        conditional_state(model, projector, env0, ZenoSchedule(1, np.pi))


# ---- zeno hamiltonian ----


def test_zeno_hamiltonian_unchanged_for_plus_projector():
    """<+|Z|+> = 0 kills the filtered part, so the generator passes through
    as the same Pauli sum."""
    model, projector, _ = one_pair_setup()
    h_se = generator(model)
    h_hat = zeno_hamiltonian(h_se, projector, model.labels)
    assert h_hat is h_se


def test_zeno_hamiltonian_identity_generator():
    labels = (SYSTEM, ENVIRONMENT)
    h_se = OperatorSum.from_term(1.0, "II")
    projector = ZenoProjector(plus_state(1))
    h_hat = zeno_hamiltonian(h_se, projector, labels)
    assert isinstance(h_hat, DenseOperator)
    # I - M: annihilates psi0 x anything
    psi_full = tensor_state(plus_state(1), zero_environment(1))
    assert variance(h_hat, psi_full) == pytest.approx(0.0, abs=1e-12)
    proj = np.kron(np.full((2, 2), 0.5), np.eye(2))
    np.testing.assert_allclose(h_hat.matrix, np.eye(4) - proj, atol=1e-12)


def test_zeno_hamiltonian_matches_dense_formula():
    rng = np.random.default_rng(67)
    labels = (SYSTEM, ENVIRONMENT)
    terms = []
    for factors in ("ZI", "XX", "YZ", "ZZ", "XI"):
        terms.append(PauliTerm(rng.normal(), factors))
    h_se = OperatorSum(terms)
    amps = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi0 = StateVector(amps / np.linalg.norm(amps), (SYSTEM,))
    projector = ZenoProjector(psi0)
    h_hat = zeno_hamiltonian(h_se, projector, labels)
    assert isinstance(h_hat, DenseOperator)
    h = to_dense(h_se).matrix
    m = np.kron(np.outer(psi0.amplitudes, psi0.amplitudes.conj()), np.eye(2))
    np.testing.assert_allclose(h_hat.matrix, h - m @ h @ m, atol=1e-12)


# ---- quadratic expansion ----


def test_quadratic_survival_on_eigenstate():
    h_hat = OperatorSum.from_term(1.0, "ZI")
    psi_full = tensor_state(basis_state(0, (SYSTEM,)), zero_environment(1))
    assert survival_probability_quadratic(
        h_hat, psi_full, ZenoSchedule(10, 0.1)
    ) == pytest.approx(1.0)


def test_quadratic_survival_uses_generator_variance():
    model, projector, env0 = one_pair_setup()
    h_hat = zeno_hamiltonian(generator(model), projector, model.labels)
    psi_full = tensor_state(projector.psi0, env0)
    m, tau = 12, 0.05
    value = survival_probability_quadratic(h_hat, psi_full, ZenoSchedule(m, tau))
    assert value == pytest.approx(1 - m * 0.5 * tau**2, rel=1e-12)


def test_quadratic_survival_goes_negative_unclamped():
    model, projector, env0 = one_pair_setup()
    h_hat = generator(model)
    psi_full = tensor_state(projector.psi0, env0)
    value = survival_probability_quadratic(h_hat, psi_full, ZenoSchedule(100, 1.0))
    assert value < 0.0


def test_quadratic_error_scales_as_m_tau_cubed():
    """|P_exact - P_quad| / (m tau^3) stays bounded as tau halves."""
    model, projector, env0 = one_pair_setup()
    h_hat = zeno_hamiltonian(generator(model), projector, model.labels)
    psi_full = tensor_state(projector.psi0, env0)
    m = 20
    ratios = []
    for tau in (1e-2, 5e-3, 2.5e-3):
        schedule = ZenoSchedule(m, tau)
        exact = survival_probability_exact(model, projector, env0, schedule)
        quad = survival_probability_quadratic(h_hat, psi_full, schedule)
        ratios.append(abs(exact - quad) / (m * tau**3))
    assert ratios[1] <= ratios[0] * 1.1 + 1e-12
    assert ratios[2] <= ratios[1] * 1.1 + 1e-12


# ---- zeno time ----


def test_zeno_time_arithmetic():
    assert zeno_time(100, 4.0) == pytest.approx(0.1)
    assert zeno_time(1, 4 * 0.5) == pytest.approx(np.sqrt(2.0))


def test_zeno_time_validation():
    with pytest.raises(ValueError):
        zeno_time(0, 1.0)
    with pytest.raises(ValueError):
        zeno_time(10, 0.0)


def test_zeno_time_consistent_with_quadratic_form():
    """P_quad = 1 - (tau / tau_qz)^2 at m measurements when tau_qz is built
    from 4 Var(H)."""
    model, projector, env0 = one_pair_setup()
    h_hat = generator(model)
    psi_full = tensor_state(projector.psi0, env0)
    m, tau = 25, 0.02
    var = variance(h_hat, psi_full)
    tau_qz = zeno_time(m, 4 * var)
    quad = survival_probability_quadratic(h_hat, psi_full, ZenoSchedule(m, tau))
    assert quad == pytest.approx(1 - (tau / tau_qz) ** 2, rel=1e-12)

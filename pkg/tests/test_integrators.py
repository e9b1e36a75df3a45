import numpy as np
import pytest

from clebsch import integrators as it
from clebsch.errors import NonConvergence

OSC = np.array([[0.0, 1.0], [-1.0, 0.0]])


def oscillator(t, y):
    return OSC @ y


def oscillator_jac(t, y):
    return OSC


def pendulum(t, y):
    return np.array([y[1], -np.sin(y[0])])


@pytest.mark.parametrize("scheme", it.SCHEMES)
def test_zero_rhs_is_exact(scheme):
    y0 = np.array([1.0, -2.0, 3.5])
    rec = it.integrate(lambda t, y: np.zeros_like(y), y0, 1.0, it.StepperSpec(0.1, scheme))
    assert np.all(rec.states == y0)
    assert len(rec) == 11


def test_zero_horizon_returns_initial_state():
    rec = it.integrate(oscillator, [1.0, 0.0], 0.0, it.StepperSpec(0.1), diagnostics={"e": lambda t, y: y @ y})
    assert rec.times.tolist() == [0.0]
    assert rec.diagnostics["e"].tolist() == [1.0]


def test_step_count_validation():
    assert it.step_count(1.0, 0.1) == 10
    with pytest.raises(ValueError):
        it.step_count(1.0, 0.3)
    with pytest.raises(ValueError):
        it.step_count(-1.0, 0.1)
    with pytest.raises(ValueError):
        it.StepperSpec(0.0)
    with pytest.raises(ValueError):
        it.StepperSpec(0.1, "euler")


def test_rk4_global_error_order_four():
    errs = []
    steps = (0.1, 0.05, 0.025)
    for dt in steps:
        rec = it.integrate(oscillator, [1.0, 0.0], 2.0, it.StepperSpec(dt))
        errs.append(np.linalg.norm(rec.states[-1] - [np.cos(2.0), -np.sin(2.0)]))
    assert abs(it.convergence_slope(steps, errs) - 4.0) < 0.1


def test_rk4_energy_slope_on_linear_oscillator_is_five():
    # for a linear system the RK4 amplification factor has modulus 1 - h^6/72,
    # so the energy error per unit time scales like dt^5
    errs = []
    steps = (0.1, 0.05, 0.025)
    for dt in steps:
        rec = it.integrate(oscillator, [1.0, 0.0], 4.0, it.StepperSpec(dt))
        errs.append(abs(rec.states[-1] @ rec.states[-1] / 2 - 0.5))
    assert abs(it.convergence_slope(steps, errs) - 5.0) < 0.2


def test_rk4_global_error_order_four_nonlinear():
    errs = []
    steps = (0.1, 0.05, 0.025)
    ref = it.integrate(pendulum, [1.2, 0.3], 4.0, it.StepperSpec(0.001)).states[-1]
    for dt in steps:
        rec = it.integrate(pendulum, [1.2, 0.3], 4.0, it.StepperSpec(dt))
        errs.append(np.linalg.norm(rec.states[-1] - ref))
    assert abs(it.convergence_slope(steps, errs) - 4.0) < 0.3


def test_implicit_midpoint_energy_bounded_long_run():
    spec = it.StepperSpec(0.1, "implicit_midpoint")
    y = np.array([1.0, 0.0])
    worst = 0.0
    for i in range(100_000):
        y = it.step(oscillator, y, spec, i * 0.1, jacobian=oscillator_jac)
        if i % 1000 == 0:
            worst = max(worst, abs(y @ y - 1.0))
    assert worst < 1e-10
    assert abs(y @ y - 1.0) < 1e-10


def test_implicit_midpoint_fixed_point_and_order_two():
    errs = []
    steps = (0.1, 0.05, 0.025)
    for dt in steps:
        rec = it.integrate(pendulum, [1.2, 0.3], 2.0, it.StepperSpec(dt, "implicit_midpoint"))
        ref = it.integrate(pendulum, [1.2, 0.3], 2.0, it.StepperSpec(0.001)).states[-1]
        errs.append(np.linalg.norm(rec.states[-1] - ref))
    assert abs(it.convergence_slope(steps, errs) - 2.0) < 0.2


def test_implicit_midpoint_nonconvergence():
    with pytest.raises(NonConvergence) as info:
        it.step(lambda t, y: 50.0 * y**2, np.array([1.0]), it.StepperSpec(1.0, "implicit_midpoint", max_newton=5))
    assert info.value.iterations == 5


def test_integration_is_deterministic():
    a = it.integrate(pendulum, [1.0, 0.5], 3.0, it.StepperSpec(0.01))
    b = it.integrate(pendulum, [1.0, 0.5], 3.0, it.StepperSpec(0.01))
    assert np.array_equal(a.states, b.states)


def test_sampling_and_callback():
    seen = []
    rec = it.integrate(
        oscillator,
        [1.0, 0.0],
        1.0,
        it.StepperSpec(0.1),
        every=3,
        store_states=False,
        diagnostics={"r": lambda t, y: y @ y},
        callback=lambda i, t, y: seen.append(i),
    )
    assert rec.states is None
    np.testing.assert_allclose(rec.times, [0.0, 0.3, 0.6, 0.9, 1.0])
    assert seen == list(range(1, 11))


def test_convergence_slope_helper():
    assert abs(it.convergence_slope([1, 2, 4], [1, 4, 16]) - 2.0) < 1e-12
    assert np.isnan(it.convergence_slope([1, 2, 4], [1, 0, 16]))


def test_lattice_smoke_run():
    from clebsch import ymh

    geom = ymh.LatticeGeometry(4, 1.0)
    pot = ymh.HiggsPotential(0.5, 1.0)
    state = ymh.smooth_initial_state(geom, "u1", np.random.default_rng(0))
    rhs = ymh.lattice_vector_field(geom, state, pot)
    rec = it.integrate(rhs, ymh.pack_state(state), 0.5, it.StepperSpec(0.05))
    end = ymh.unpack_state(rec.states[-1], state)
    h0 = ymh.ymh_hamiltonian(geom, state, pot)
    assert abs(ymh.ymh_hamiltonian(geom, end, pot) - h0) < 1e-6 * max(1.0, abs(h0))

import numpy as np
import pytest

from clebsch import gr
from clebsch.errors import SingularMetric
from clebsch.integrators import StepperSpec, convergence_slope, integrate

KASNER = np.array([2.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0])
I3 = np.eye(3)
ZERO = np.zeros((3, 3))


def random_spd(rng):
    m = rng.normal(size=(3, 3))
    return m @ m.T + np.eye(3)


def random_sym(rng):
    m = rng.normal(size=(3, 3))
    return m + m.T


def constrained_state(rng, sign=1.0):
    """Random data on the Hamiltonian constraint: k = a g + B, B g-traceless, a = +-|B|/sqrt 6."""
    g = random_spd(rng)
    gi = np.linalg.inv(g)
    b = random_sym(rng)
    b = b - np.trace(gi @ b) / 3.0 * g
    a = sign * np.sqrt(np.trace(gi @ b @ gi @ b) / 6.0)
    return gr.AdmState(g, gr.gr_legendre(gr.AdmState(g, ZERO), a * g + b))


def test_state_validation():
    with pytest.raises(ValueError):
        gr.AdmState(np.array([[1.0, 2.0, 0], [0, 1, 0], [0, 0, 1]]), ZERO)
    with pytest.raises(SingularMetric):
        gr.AdmState(np.diag([1.0, 0.0, 1.0]), ZERO)
    with pytest.raises(SingularMetric):
        gr.AdmState(np.diag([1.0, -1.0, 1.0]), ZERO)
    with pytest.raises(ValueError):
        gr.AdmState(I3, ZERO, lapse=0.0)
    assert gr.AdmState(np.diag([4.0, 1.0, 1.0]), ZERO).volume_density == 2.0


def test_effective_velocity_examples(rng):
    s = gr.AdmState(random_spd(rng), ZERO)
    assert np.all(gr.gr_effective_velocity(s, ZERO).k == 0)
    np.testing.assert_allclose(gr.gr_effective_velocity(s, 2 * s.g).k, s.g)
    s2 = gr.AdmState(s.g, ZERO, lapse=2.0)
    np.testing.assert_allclose(gr.gr_effective_velocity(s2, 2 * s.g).k, 0.5 * s.g)


def test_lagrangian_examples(rng):
    s = gr.AdmState(I3, ZERO)
    assert gr.gr_lagrangian(s, ZERO) == 0
    assert gr.gr_lagrangian(s, I3) == -6.0
    g = random_spd(rng)
    h = random_sym(rng)
    one = gr.AdmState(g, ZERO, lapse=1.0)
    two = gr.AdmState(g, ZERO, lapse=2.0)
    l1 = gr.gr_lagrangian(one, gr.gr_effective_velocity(one, h))
    l2 = gr.gr_lagrangian(two, gr.gr_effective_velocity(two, h))
    assert abs(l2 - 0.5 * l1) < 1e-12 * abs(l1)


def test_legendre_examples():
    s = gr.AdmState(I3, ZERO)
    assert np.all(gr.gr_legendre(s, ZERO) == 0)
    np.testing.assert_allclose(gr.gr_legendre(s, I3), -2 * I3)
    k = np.diag([1.0, -1.0, 0.0])
    np.testing.assert_allclose(gr.gr_legendre(s, k), k)


def test_legendre_is_lagrangian_derivative(rng):
    # pi = dL/dg_dot as a density: sqrt(det g) pi_bar with dL/dk = 2 l sqrt(det g) pi_bar
    for _ in range(10):
        g = random_spd(rng)
        s = gr.AdmState(g, ZERO, lapse=1.3)
        k = random_sym(rng)
        dk = random_sym(rng)
        h = 1e-6
        fd = (gr.gr_lagrangian(s, k + h * dk) - gr.gr_lagrangian(s, k - h * dk)) / (2 * h)
        pred = 2 * s.lapse * s.volume_density * np.trace(gr.gr_legendre(s, k) @ dk)
        assert abs(fd - pred) < 1e-6 * max(1.0, abs(pred))


def test_legendre_round_trip(rng):
    for _ in range(20):
        g = random_spd(rng)
        k = random_sym(rng)
        s = gr.AdmState(g, ZERO)
        pb = gr.gr_legendre(s, k)
        back = gr.gr_inverse_legendre(gr.AdmState(g, pb)).k
        assert np.max(np.abs(back - k)) < 1e-12 * max(1.0, np.max(np.abs(k)))


def test_momentum_map_homogeneous_is_zero(rng):
    assert np.all(gr.gr_momentum_map(constrained_state(rng)) == 0)
    const = np.broadcast_to(random_sym(rng), (4, 4, 4, 3, 3))
    assert np.max(np.abs(gr.momentum_map_field(random_spd(rng), const, 0.5))) == 0


def test_momentum_map_field_sinusoid(rng):
    n, spacing = 8, 0.25
    length = n * spacing
    kx = 2 * np.pi / length
    amp = random_sym(rng)
    x = np.arange(n) * spacing
    pi_field = np.sin(kx * x)[:, None, None, None, None] * np.broadcast_to(amp, (n, n, n, 3, 3))
    g = random_spd(rng)
    out = gr.momentum_map_field(g, pi_field, spacing)
    # only d_0 pi^{0k} survives; its central difference is sin(k a)/a cos(k x)
    div = (np.sin(kx * spacing) / spacing) * np.cos(kx * x)[:, None, None, None] * amp[0]
    np.testing.assert_allclose(out, np.broadcast_to(2 * div @ g.T, out.shape), atol=1e-12)


def test_constraint_examples():
    diff, ham = gr.gr_constraints(gr.AdmState(I3, ZERO))
    assert np.all(diff == 0) and ham == 0
    iso = gr.AdmState(I3, gr.gr_legendre(gr.AdmState(I3, ZERO), I3))
    assert abs(gr.hamiltonian_constraint(iso) - 6.0) < 1e-14
    for t0 in (1.0, 1.7, 3.0):
        assert abs(gr.hamiltonian_constraint(gr.kasner_state(KASNER, t0))) < 1e-13


def test_adm_hamiltonian_examples(rng):
    assert gr.adm_hamiltonian(gr.AdmState(random_spd(rng), ZERO)) == 0
    assert abs(gr.adm_hamiltonian(gr.AdmState(I3, -2 * I3)) + 6.0) < 1e-14
    assert abs(gr.adm_hamiltonian(gr.kasner_state(KASNER))) < 1e-13
    for _ in range(10):
        s = constrained_state(rng, sign=rng.choice([-1.0, 1.0]))
        assert abs(gr.adm_hamiltonian(s)) < 1e-12


def test_adm_hamiltonian_is_minus_constraint(rng):
    for _ in range(10):
        g = random_spd(rng)
        s = gr.AdmState(g, random_sym(rng), lapse=0.7)
        expected = -s.lapse * s.volume_density * gr.hamiltonian_constraint(s)
        assert abs(gr.adm_hamiltonian(s) - expected) < 1e-10 * max(1.0, abs(expected))
        canonical = gr.adm_hamiltonian_canonical(g, s.volume_density * s.pi_bar, s.lapse)
        assert abs(canonical - gr.adm_hamiltonian(s)) < 1e-10 * max(1.0, abs(canonical))


def test_partials_match_finite_differences(rng):
    for _ in range(50):
        g = random_spd(rng)
        pi = random_sym(rng)
        lapse = rng.uniform(0.5, 2.0)
        d_g, d_pi = gr.adm_partials(g, pi, lapse)
        for grad, wrt in ((d_g, "g"), (d_pi, "pi")):
            v = random_sym(rng)
            h = 1e-6

            def f(e):
                if wrt == "g":
                    return gr.adm_hamiltonian_canonical(g + e * v, pi, lapse)
                return gr.adm_hamiltonian_canonical(g, pi + e * v, lapse)

            fd = (f(h) - f(-h)) / (2 * h)
            pred = np.trace(grad @ v)
            assert abs(fd - pred) < 1e-7 * max(1.0, abs(pred))


def test_rhs_examples(rng):
    s = gr.AdmState(random_spd(rng), ZERO)
    g_dot, pb_dot = gr.adm_rhs(s)
    assert np.all(g_dot == 0) and np.max(np.abs(pb_dot)) == 0
    # g_dot = 2 l k: the evolution reproduces the effective velocity
    s = constrained_state(rng)
    g_dot, _ = gr.adm_rhs(s, lapse=1.5)
    np.testing.assert_allclose(g_dot, 3.0 * gr.gr_inverse_legendre(s).k, atol=1e-12)


def test_kasner_evolution_matches_closed_form():
    s = gr.kasner_state(KASNER, 1.0)
    rec = integrate(gr.adm_vector_field(1.0), gr.pack(s), 1.0, StepperSpec(1e-3), t0=1.0, every=100)
    for t, y in zip(rec.times, rec.states):
        g = gr.unpack(y).g
        exact = gr.kasner_metric(KASNER, t)
        assert np.max(np.abs(g - exact) / np.abs(np.diag(exact)).max()) < 1e-10
    p = gr.fitted_kasner_exponents(gr.unpack(rec.states[-1]).g, 2.0)
    assert abs(p.sum() - 1) < 1e-10 and abs(p @ p - 1) < 1e-10


def test_kasner_exponent_validation():
    gr.check_kasner_exponents([1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        gr.check_kasner_exponents([0.5, 0.5, 0.5])
    with pytest.raises(ValueError):
        gr.check_kasner_exponents([1.0, 0.0])


def test_hamiltonian_constraint_drift_order_four(rng):
    s = constrained_state(rng)
    steps = (0.02, 0.01, 0.005)
    errs = []
    for dt in steps:
        rec = integrate(gr.adm_vector_field(1.0), gr.pack(s), 1.0, StepperSpec(dt))
        errs.append(max(abs(gr.hamiltonian_constraint(gr.unpack(y))) for y in rec.states))
    assert abs(convergence_slope(steps, errs) - 4.0) < 0.3


def test_time_dependent_lapse_is_reparametrization():
    # with lapse l(t) the Kasner metric follows proper time tau = t0 + int l dt
    s = gr.kasner_state(KASNER, 1.0)
    lapse = lambda t: 1.0 + 0.5 * t
    rec = integrate(gr.adm_vector_field(lapse), gr.pack(s), 1.0, StepperSpec(1e-3))
    tau = 1.0 + 1.0 + 0.25
    np.testing.assert_allclose(gr.unpack(rec.states[-1]).g, gr.kasner_metric(KASNER, tau), rtol=1e-10)


def test_collapse_raises_singular_metric():
    # a Kasner solution run backwards hits the singularity at t = 0
    s = gr.kasner_state(KASNER, 1.0)
    with pytest.raises(SingularMetric):
        integrate(gr.adm_vector_field(-1.0), gr.pack(s), 2.0, StepperSpec(0.01))

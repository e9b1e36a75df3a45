"""Fixed-step time integration shared by every backend.

States are flat float arrays; the backends provide ``pack``/``unpack``
helpers.  Right-hand sides have the signature ``rhs(t, y) -> dy/dt``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergence

SCHEMES = ("rk4", "implicit_midpoint")


@dataclass(frozen=True)
class StepperSpec:
    dt: float
    scheme: str = "rk4"
    newton_tol: float = 1e-12
    max_newton: int = 50

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be a positive finite number, got {self.dt!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.max_newton < 1:
            raise ValueError("max_newton must be >= 1")


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray | None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)


def rk4_step(rhs, y, t, dt):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def implicit_midpoint_step(rhs, y, t, dt, tol=1e-12, max_iter=50, jacobian=None):
    """One implicit-midpoint step ``Y = y + dt f(t + dt/2, (y + Y)/2)``.

    Solves for the midpoint ``z = (y + Y)/2``.  With ``jacobian(t, z)`` a
    Newton iteration is used (exact in one iteration for linear right-hand
    sides); otherwise plain fixed-point iteration.
    """
    tm = t + 0.5 * dt
    h = 0.5 * dt
    z = y + h * rhs(t, y)
    for it in range(1, max_iter + 1):
        if jacobian is None:
            z_new = y + h * rhs(tm, z)
        else:
            resid = z - y - h * rhs(tm, z)
            jac = np.eye(y.size) - h * np.asarray(jacobian(tm, z))
            z_new = z - np.linalg.solve(jac, resid)
        delta = np.max(np.abs(z_new - z)) if z.size else 0.0
        z = z_new
        if delta <= tol * max(1.0, float(np.max(np.abs(z))) if z.size else 1.0):
            return 2.0 * z - y
    raise NonConvergence(
        f"implicit midpoint did not converge in {max_iter} iterations (last update {delta:.3e})",
        iterations=max_iter,
        residual=delta,
    )


def step(rhs, y, spec, t=0.0, jacobian=None):
    """Advance ``y`` by one step of ``spec.scheme``."""
    y = np.asarray(y, dtype=float)
    if spec.scheme == "rk4":
        return rk4_step(rhs, y, t, spec.dt)
    return implicit_midpoint_step(
        rhs, y, t, spec.dt, tol=spec.newton_tol, max_iter=spec.max_newton, jacobian=jacobian
    )


def step_count(horizon, dt):
    """Number of fixed steps covering ``horizon``; it must be a multiple of ``dt``."""
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    n = int(round(horizon / dt))
    if abs(n * dt - horizon) > 1e-9 * max(1.0, abs(horizon)):
        raise ValueError(f"horizon {horizon} is not an integer multiple of dt {dt}")
    return n


def integrate(
    rhs,
    initial,
    horizon,
    spec,
    diagnostics=None,
    t0=0.0,
    every=1,
    store_states=True,
    jacobian=None,
    callback=None,
):
    """Fixed-step integration with diagnostics sampled every ``every`` steps.

    ``diagnostics`` maps a name to ``f(t, y)`` returning a float or array.  The
    initial and the final state are always sampled.  ``callback(i, t, y)``
    runs after each step; errors it raises propagate unchanged.
    """
    if every < 1:
        raise ValueError("every must be >= 1")
    diagnostics = diagnostics or {}
    n = step_count(horizon, spec.dt)
    y = np.array(initial, dtype=float)
    times, states = [], []
    diag = {name: [] for name in diagnostics}

    def sample(t, y):
        times.append(t)
        if store_states:
            states.append(y.copy())
        for name, f in diagnostics.items():
            diag[name].append(f(t, y))

    sample(t0, y)
    for i in range(1, n + 1):
        t = t0 + (i - 1) * spec.dt
        y = step(rhs, y, spec, t, jacobian=jacobian)
        if callback is not None:
            callback(i, t + spec.dt, y)
        if i % every == 0 or i == n:
            sample(t0 + i * spec.dt, y)

    return TrajectoryRecord(
        times=np.array(times),
        states=np.array(states) if store_states else None,
        diagnostics={k: np.array(v) for k, v in diag.items()},
    )


def convergence_slope(steps, errors):
    """Least-squares slope of ``log(errors)`` against ``log(steps)``."""
    steps = np.asarray(steps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0) or not np.all(np.isfinite(errors)):
        return float("nan")
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)

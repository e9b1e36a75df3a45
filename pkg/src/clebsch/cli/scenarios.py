"""Build and run configured scenarios; write CSV time series and JSON summaries."""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .. import core, extended, gr
from ..errors import NonConvergence
from ..integrators import StepperSpec, convergence_slope, integrate
from ..lie import get_group
from ..ymh import checkpoint as ckpt
from ..ymh import lattice as lat
from ..ymh.initial import smooth_initial_state
from .config import normalized, validate_config

OUTPUT_ENV = "CLEBSCH_OUTPUT_DIR"
CSV_NAME = "timeseries.csv"
SUMMARY_NAME = "summary.json"
CHECKPOINT_NAME = "checkpoint.bin"


@dataclass
class Scenario:
    """Everything the run loop needs: packed initial state, vector field and a
    row function producing one CSV row per sample."""

    rhs: Callable
    y0: np.ndarray
    t0: float
    columns: list
    row: Callable
    drift_column: str
    finish: Callable | None = None


def csv_columns(backend, group):
    """Column names, a pure function of ``(backend, group)``."""
    if backend == "gr":
        return ["t", "H", "ham_constraint", "diffeo_norm", "J_0", "J_1", "J_2", "g_00", "g_11", "g_22"]
    d = get_group(group).dim
    js = [f"J_{i}" for i in range(d)]
    if backend == "finite":
        return ["t", "H", "C_norm"] + js
    if backend == "extended":
        return ["t", "H", "C_norm", "nu_norm"] + js
    if backend == "ymh":
        return ["t", "H", "gauss_l2", "gauss_linf"] + js
    raise ValueError(f"unknown backend {backend!r}")


def _xi_function(m, dim):
    base = np.zeros(dim) if m.xi is None else np.array(m.xi, dtype=float)
    if m.xi_oscillation is None:
        return lambda t: base
    amp = np.array(m.xi_oscillation, dtype=float)
    freq = m.xi_frequency
    return lambda t: base + amp * np.sin(freq * t)


def _mechanics(config):
    m = config.mechanics
    group = get_group(config.group)
    space = core.standard_space(group, m.bodies)
    potential = core.invariant_potential(space, m.stiffness, m.quartic, m.pair, m.xi_weight)
    ham = core.mechanical_hamiltonian(m.mass, potential, is_G_invariant=True)
    xi_of_t = _xi_function(m, group.dim)
    rng = np.random.default_rng(m.seed)
    q0 = rng.normal(size=space.dim) if m.q0 is None else np.array(m.q0, dtype=float)
    p0 = rng.normal(size=space.dim) if m.p0 is None else np.array(m.p0, dtype=float)
    if m.project_constraint:
        level = ham.dxi(q0, p0, xi_of_t(0.0))
        p0 = core.project_to_momentum_level(space, q0, p0, level)
    return space, ham, xi_of_t, q0, p0


def build_finite(config):
    space, ham, xi_of_t, q0, p0 = _mechanics(config)
    n = space.dim

    def row(t, y):
        q, p = y[:n], y[n:]
        state = core.ClebschState(q, p, xi_of_t(t), t)
        c = core.momentum_constraint_residual(space, ham, state)
        return [t, ham.value(q, p, state.xi), float(np.linalg.norm(c))] + list(core.momentum_map(space, q, p))

    return Scenario(
        rhs=core.clebsch_vector_field(space, ham, xi_of_t),
        y0=core.pack(q0, p0),
        t0=0.0,
        columns=csv_columns("finite", config.group),
        row=row,
        drift_column="C_norm",
    )


def build_extended(config):
    space, ham, xi_of_t, q0, p0 = _mechanics(config)
    n = space.dim
    nu0 = np.zeros(space.group.dim)

    def row(t, y):
        q, p, nu = y[:n], y[n : 2 * n], y[2 * n :]
        state = extended.ExtendedState(q, p, xi_of_t(t), nu, t)
        primary, secondary = extended.dirac_constraints(space, ham, state)
        return [
            t,
            ham.value(q, p, state.xi),
            float(np.linalg.norm(secondary)),
            float(np.linalg.norm(primary)),
        ] + list(core.momentum_map(space, q, p))

    return Scenario(
        rhs=extended.extended_vector_field(space, ham, xi_of_t),
        y0=np.concatenate([q0, p0, nu0]),
        t0=0.0,
        columns=csv_columns("extended", config.group),
        row=row,
        drift_column="C_norm",
    )


def build_ymh(config):
    c = config.lattice
    potential = lat.HiggsPotential(c.mu, c.v)
    if c.checkpoint_in is not None:
        geom, state, _, header = ckpt.read_checkpoint(c.checkpoint_in)
        if state.group != config.group or geom.n != c.n or geom.a != c.a:
            raise ValueError(
                f"lattice.checkpoint_in: checkpoint has group={state.group}, n={geom.n}, a={geom.a}; "
                f"config has group={config.group}, n={c.n}, a={c.a}"
            )
    else:
        geom = lat.LatticeGeometry(c.n, c.a)
        state = smooth_initial_state(geom, config.group, np.random.default_rng(c.seed), amplitude=c.amplitude, higgs_vev=c.v)
    if c.a0 is not None:
        state = state.replace(A0=np.broadcast_to(np.array(c.a0, dtype=float), state.A0.shape).copy())
    t0 = float(state.t)

    def row(t, y):
        s = lat.unpack_state(y, state, t)
        j = lat.gauss_residual(geom, s)
        l2 = math.sqrt(geom.volume * float(np.sum(j * j)))
        linf = float(np.max(np.abs(j)))
        charge = geom.volume * np.sum(j, axis=(0, 1, 2))
        return [t, lat.ymh_hamiltonian(geom, s, potential), l2, linf] + list(charge)

    def finish(y, t, out_dir):
        if config.output.checkpoint:
            final = lat.unpack_state(y, state, t)
            ckpt.write_checkpoint(out_dir / CHECKPOINT_NAME, geom, final, potential, dt=config.integrator.dt)
            return {"checkpoint": CHECKPOINT_NAME}
        return {}

    return Scenario(
        rhs=lat.lattice_vector_field(geom, state, potential),
        y0=lat.pack_state(state),
        t0=t0,
        columns=csv_columns("ymh", config.group),
        row=row,
        drift_column="gauss_linf",
        finish=finish,
    )


def build_gr(config):
    c = config.gravity
    p = np.array(c.kasner_exponents, dtype=float)
    start = gr.kasner_state(p, c.t0)
    t0 = c.t0

    def lapse(t):
        return c.lapse + c.lapse_rate * (t - t0)

    def proper_time(t):
        s = t - t0
        return t0 + c.lapse * s + 0.5 * c.lapse_rate * s * s

    def row(t, y):
        state = gr.AdmState(y[:9].reshape(3, 3), y[9:].reshape(3, 3), lapse=lapse(t), t=t)
        diffeo, ham = gr.gr_constraints(state)
        return [t, gr.adm_hamiltonian(state), ham, float(np.linalg.norm(diffeo))] + list(diffeo) + list(np.diag(state.g))

    def finish(y, t, out_dir):
        tau = proper_time(t)
        if tau == t0:
            return {"kasner_exponents": None, "proper_time": tau}
        fitted = gr.fitted_kasner_exponents(y[:9].reshape(3, 3), tau, t0=t0, g0=start.g)
        exact = gr.kasner_metric(p, tau)
        rel = np.abs(np.diag(y[:9].reshape(3, 3)) / np.diag(exact) - 1.0)
        return {
            "kasner_exponents": fitted.tolist(),
            "kasner_sum_error": float(fitted.sum() - 1.0),
            "kasner_square_sum_error": float(np.dot(fitted, fitted) - 1.0),
            "metric_relative_error": float(rel.max()),
            "proper_time": tau,
        }

    return Scenario(
        rhs=gr.adm_vector_field(lapse),
        y0=gr.pack(start),
        t0=t0,
        columns=csv_columns("gr", None),
        row=row,
        drift_column="ham_constraint",
        finish=finish,
    )


BUILDERS = {"finite": build_finite, "extended": build_extended, "ymh": build_ymh, "gr": build_gr}


def output_root(config):
    return Path(os.environ.get(OUTPUT_ENV) or config.output.directory)


def format_value(x):
    return f"{float(x):.17g}"


def write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join(format_value(x) for x in r) + "\n")


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, data):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_json_safe(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def simulate(config, out_dir):
    """Run one scenario into ``out_dir``; returns the summary dict.

    Raises :class:`NonConvergence` (with the failing step index in the
    message) when the state stops being finite or a solver fails.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scenario = BUILDERS[config.backend](config)
    spec = StepperSpec(
        dt=config.integrator.dt,
        scheme=config.integrator.scheme,
        newton_tol=config.integrator.newton_tol,
        max_newton=config.integrator.max_newton,
    )
    progress = {"step": 0, "y": scenario.y0}

    def watch(i, t, y):
        if not np.all(np.isfinite(y)):
            raise NonConvergence(f"state became non-finite at step {i} (t={t:.6g})", iterations=i)
        progress["step"] = i
        progress["y"] = y

    start = time.perf_counter()
    try:
        record = integrate(
            scenario.rhs,
            scenario.y0,
            config.horizon,
            spec,
            diagnostics={"row": scenario.row},
            t0=scenario.t0,
            every=config.output.cadence,
            store_states=False,
            callback=watch,
        )
    except ArithmeticError as err:
        failed = progress["step"] + 1
        if f"step {failed}" in str(err):
            raise
        raise type(err)(f"step {failed}: {err}") from err
    wall = time.perf_counter() - start

    rows = record.diagnostics["row"]
    write_csv(out_dir / CSV_NAME, scenario.columns, rows)
    final = dict(zip(scenario.columns, rows[-1].tolist()))
    col = scenario.columns.index(scenario.drift_column)
    h = scenario.columns.index("H")
    summary = {
        "config": normalized(config),
        "wall_time_s": wall,
        "steps": int(round(config.horizon / config.integrator.dt)),
        "final": final,
        "constraint_drift": float(np.max(np.abs(rows[:, col] - rows[0, col]))),
        "energy_drift": float(np.max(np.abs(rows[:, h] - rows[0, h]))),
        "drift_column": scenario.drift_column,
    }
    if scenario.finish is not None:
        summary.update(scenario.finish(progress["y"], record.times[-1], out_dir))
    write_json(out_dir / SUMMARY_NAME, summary)
    return summary


def slope_or_na(dts, drifts):
    slope = convergence_slope(dts, drifts)
    return "not-applicable" if not math.isfinite(slope) else slope


def sweep(config, dts, out_dir):
    """Run ``config`` for each ``dt`` and fit drift slopes against ``dt``."""
    if len(dts) < 3:
        raise ValueError("sweep needs at least three dt values")
    out_dir = Path(out_dir)
    runs = []
    drift_column = None
    for dt in dts:
        data = normalized(config)
        data["integrator"]["dt"] = dt
        cfg = validate_config(data)
        summary = simulate(cfg, out_dir / f"dt_{format_value(dt)}")
        drift_column = summary["drift_column"]
        runs.append({"dt": dt, "constraint_drift": summary["constraint_drift"], "energy_drift": summary["energy_drift"]})
    report = {
        "config": normalized(config),
        "dt": list(dts),
        "runs": runs,
        "drift_column": drift_column,
        "constraint_slope": slope_or_na(dts, [r["constraint_drift"] for r in runs]),
        "energy_slope": slope_or_na(dts, [r["energy_drift"] for r in runs]),
    }
    write_json(out_dir / "sweep.json", report)
    return report

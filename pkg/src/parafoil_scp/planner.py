"""Two-phase successive convexification loop for the landing problem.

Phase one iterates linearize / build / solve / update with a fixed
substituted-input tolerance until the cost stalls; phase two reruns the
loop with the tolerance promoted to a penalised slack, seeded by the
phase-one output.  Every accepted iterate is a dynamically feasible
trajectory, so planning can be truncated at any iteration (anytime
property).  Replanning warm-starts from the tail of a previous solution.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .atmosphere import SpeedProfile, TimeAltitudeMap
from .dynamics import (
    DiscreteTransition,
    FourDofState,
    ReferenceSolution,
    SubstitutedTrajectory,
    discrete_step,
    recover_reference,
)
from .socp import SocpSolver, SolveStatus
from .transcription import (
    BoundaryData,
    Mesh,
    ScpWeights,
    build_mesh,
    build_phase1,
    build_phase2,
    evaluate_cost,
)
from .wind import WindProfile

PHASE2_MAX_ITER = 5
REPLAN_ALTITUDE_MARGIN = 50.0  # m above z_f below which replanning is refused


class ReplanDomainError(ValueError):
    """Replan requested outside the altitude band of the previous plan."""


@dataclass
class PlannerDiagnostics:
    iterations_phase1: int = 0
    iterations_phase2: int = 0
    cost_history: list = field(default_factory=list)
    max_residual_h: float = 0.0
    per_iteration_time: list = field(default_factory=list)
    converged: bool = False
    solver_failure: bool = False
    final_miss: float = math.nan

    @property
    def iterations(self) -> int:
        return self.iterations_phase1 + self.iterations_phase2

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "iterations_phase1": self.iterations_phase1,
            "iterations_phase2": self.iterations_phase2,
            "cost_history": list(self.cost_history),
            "residuals": [self.max_residual_h],
            "times_ms": [1e3 * t for t in self.per_iteration_time],
            "converged": self.converged,
            "solver_failure": self.solver_failure,
            "final_miss_m": self.final_miss,
        }


@dataclass(frozen=True)
class Scenario:
    """Everything the planner needs for one instance."""

    profile: SpeedProfile
    time_map: TimeAltitudeMap
    wind: WindProfile
    bounds: BoundaryData
    weights: ScpWeights
    n_nodes: int = 40


def initial_guess(mesh: Mesh, bounds: BoundaryData) -> SubstitutedTrajectory:
    """Constant-heading guess: u aligned with the initial input direction,
    renormalized per node to the local speed, positions propagated through
    the exact discrete dynamics (wind included)."""
    n = mesh.n_nodes
    direction = bounds.u0_r / np.linalg.norm(bounds.u0_r)
    u = mesh.v_k[:, None] * direction[None, :]
    x = np.empty((n, 2))
    x[0] = bounds.x0_r
    for k in range(n - 1):
        trans = DiscreteTransition(mesh.dt_k[k], mesh.w_k[k])
        x[k + 1] = discrete_step(trans, x[k], u[k], u[k + 1])
    return SubstitutedTrajectory(mesh.node_times, x, u)


def _residual_h(mesh: Mesh, u: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.norm(u, axis=1) - mesh.v_k)))


def _run_scp(
    mesh: Mesh,
    bounds: BoundaryData,
    weights: ScpWeights,
    start: SubstitutedTrajectory,
    builder,
    max_iter: int,
    diag: PlannerDiagnostics,
    phase: int,
    solver: SocpSolver,
    keep_iterates: list | None,
):
    """One SCP phase; returns (last accepted iterate, eps value, converged)."""
    current = start
    prev_cost = None
    eps_val = None
    converged = False
    warm = None
    for _ in range(max_iter):
        t0 = time.perf_counter()
        problem = builder(mesh, bounds, weights, current)
        sol = solver.solve(problem, warm=warm)
        elapsed = time.perf_counter() - t0
        if sol.status not in (SolveStatus.OPTIMAL, SolveStatus.MAX_ITER):
            diag.solver_failure = True
            break
        x, u, eps = problem.extract(sol.primal)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
            diag.solver_failure = True
            break
        if sol.status == SolveStatus.OPTIMAL and sol.dual_eq is not None:
            warm = (sol.primal, sol.dual_eq, sol.dual_cone)
        else:
            warm = None
        current = SubstitutedTrajectory(mesh.node_times, x, u)
        eps_val = eps
        cost = evaluate_cost(mesh, bounds, weights, x, u, eps)
        diag.cost_history.append(cost)
        diag.per_iteration_time.append(elapsed)
        diag.max_residual_h = max(diag.max_residual_h, _residual_h(mesh, u))
        if phase == 1:
            diag.iterations_phase1 += 1
        else:
            diag.iterations_phase2 += 1
        if keep_iterates is not None:
            keep_iterates.append(current)
        if prev_cost is not None:
            change = abs(cost - prev_cost) / max(abs(prev_cost), 1.0)
            if change < weights.conv_tol:
                converged = True
                break
        prev_cost = cost
    return current, eps_val, converged


def plan(
    scenario: Scenario,
    mesh: Mesh | None = None,
    start: SubstitutedTrajectory | None = None,
    keep_iterates: list | None = None,
    solver: SocpSolver | None = None,
) -> tuple[ReferenceSolution, PlannerDiagnostics]:
    """Run the two-phase SCP and recover the reference solution.

    On solver failure or iteration exhaustion the last accepted iterate is
    still recovered and returned, flagged in the diagnostics.
    """
    if scenario.time_map.final_time <= scenario.time_map.t0:
        raise ValueError("final time must exceed the initial time")
    if mesh is None:
        mesh = build_mesh(
            scenario.time_map, scenario.profile, scenario.wind, scenario.n_nodes
        )
    if start is None:
        start = initial_guess(mesh, scenario.bounds)
    if solver is None:
        # The outer loop only needs the subproblem to ~1e-6; the default
        # solver tolerance would spend extra interior-point iterations.
        solver = SocpSolver(tol=1e-6)
    diag = PlannerDiagnostics()
    if keep_iterates is not None:
        keep_iterates.append(start)

    iterate, _, conv1 = _run_scp(
        mesh,
        scenario.bounds,
        scenario.weights,
        start,
        build_phase1,
        scenario.weights.max_iter,
        diag,
        1,
        solver,
        keep_iterates,
    )
    if not diag.solver_failure:
        iterate, _, conv2 = _run_scp(
            mesh,
            scenario.bounds,
            scenario.weights,
            iterate,
            build_phase2,
            PHASE2_MAX_ITER,
            diag,
            2,
            solver,
            keep_iterates,
        )
    else:
        conv2 = False
    diag.converged = conv1 and not diag.solver_failure

    reference = recover_reference(iterate, scenario.time_map)
    diag.final_miss = float(np.linalg.norm(iterate.x[-1] - scenario.bounds.xf_r))
    return reference, diag


def replan(
    previous: ReferenceSolution,
    new_state: FourDofState,
    scenario: Scenario,
    keep_iterates: list | None = None,
    solver: SocpSolver | None = None,
) -> tuple[ReferenceSolution, PlannerDiagnostics]:
    """Recompute the plan from a new state, warm-started from the old tail.

    The time-of-flight map is rebuilt from the current altitude; the warm
    start interpolates the previous substituted input over normalized
    time-to-go and renormalizes it to the local speed.
    """
    sp = scenario.profile
    z_f = scenario.time_map.z_f
    prev_z0 = sp.z0
    if not (z_f + REPLAN_ALTITUDE_MARGIN < new_state.z <= prev_z0 + 1e-9):
        raise ReplanDomainError(
            f"replan altitude {new_state.z} m outside "
            f"({z_f + REPLAN_ALTITUDE_MARGIN}, {prev_z0}] m"
        )

    v_now, r_now = sp.speeds_at(new_state.z)
    new_profile = SpeedProfile(new_state.z, v_now, r_now, sp.atmosphere)
    new_map = TimeAltitudeMap(new_profile, t0=0.0, z_f=z_f)
    new_bounds = BoundaryData(
        x0_r=np.array([new_state.px, new_state.py]),
        u0_r=v_now * np.array([math.cos(new_state.psi), math.sin(new_state.psi)]),
        xf_r=scenario.bounds.xf_r,
        uf_r=scenario.bounds.uf_r,
        psi_dot_max=scenario.bounds.psi_dot_max,
    )
    new_scenario = Scenario(
        profile=new_profile,
        time_map=new_map,
        wind=scenario.wind,
        bounds=new_bounds,
        weights=scenario.weights,
        n_nodes=scenario.n_nodes,
    )
    mesh = build_mesh(new_map, new_profile, scenario.wind, scenario.n_nodes)

    # Warm start: previous u_r over normalized time-to-go, renormalized.
    prev_times = previous.node_times
    prev_span = previous.t_f - previous.t0
    prev_u_dir = np.column_stack(
        [np.cos(previous.x_star[:, 2]), np.sin(previous.x_star[:, 2])]
    )
    tau_prev = (prev_times - previous.t0) / prev_span
    # Map the new horizon onto the tail of the previous one, starting at the
    # previous progress fraction closest to the current altitude.
    z_prev = previous.x_star[:, 3]
    tau_start = float(np.interp(-new_state.z, -z_prev, tau_prev))
    tau_new = tau_start + (1.0 - tau_start) * (mesh.node_times - mesh.node_times[0]) / (
        mesh.t_f - mesh.node_times[0]
    )
    ux = np.interp(tau_new, tau_prev, prev_u_dir[:, 0])
    uy = np.interp(tau_new, tau_prev, prev_u_dir[:, 1])
    psi_interp = np.arctan2(uy, ux)
    # Slew from the actual current heading toward the interpolated profile
    # at a rate the chord-form turn cones accept.  The tracking controller
    # can leave the vehicle pointing far off the old plan; without this
    # limit the guess has an unreachable jump after the pinned first input
    # and the first trust-regioned subproblem can be infeasible.
    psi_g = np.empty(mesh.n_nodes)
    psi_g[0] = new_state.psi
    eps_h = scenario.weights.eps_h
    for k in range(mesh.n_nodes - 1):
        v_lo = max(min(mesh.v_k[k], mesh.v_k[k + 1]) - eps_h, 0.0)
        half_arc = 0.5 * min(new_bounds.psi_dot_max * mesh.dt_k[k], math.pi)
        ratio = v_lo * math.sin(half_arc) / max(mesh.v_k[k], mesh.v_k[k + 1])
        d_max = 2.0 * math.asin(min(ratio, 1.0))
        step = math.remainder(psi_interp[k + 1] - psi_g[k], 2.0 * math.pi)
        psi_g[k + 1] = psi_g[k] + min(max(step, -d_max), d_max)
    u = mesh.v_k[:, None] * np.column_stack([np.cos(psi_g), np.sin(psi_g)])
    # Pin the first node to the actual current heading.
    u[0] = new_bounds.u0_r
    x = np.empty((mesh.n_nodes, 2))
    x[0] = new_bounds.x0_r
    for k in range(mesh.n_nodes - 1):
        trans = DiscreteTransition(mesh.dt_k[k], mesh.w_k[k])
        x[k + 1] = discrete_step(trans, x[k], u[k], u[k + 1])
    start = SubstitutedTrajectory(mesh.node_times, x, u)

    return plan(
        new_scenario,
        mesh=mesh,
        start=start,
        keep_iterates=keep_iterates,
        solver=solver,
    )

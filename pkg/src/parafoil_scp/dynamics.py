"""4-DOF kinematic model, exact discrete transition and reference recovery.

The continuous model drives horizontal position with the density-scaled
airspeed rotated by the heading angle plus wind; heading rate is the single
control input and altitude falls at the sink rate.  In the substituted
variables (planar velocity vector in place of the heading trigonometry) the
dynamics is a pure integrator, whose discrete transition under a piecewise
linear input is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .atmosphere import SpeedProfile, TimeAltitudeMap
from .wind import WindProfile


class DegenerateInputError(ValueError):
    """Substituted input too short to define a heading direction."""


@dataclass(frozen=True)
class FourDofState:
    """Parafoil pose: horizontal position, heading (unwrapped) and altitude."""

    px: float
    py: float
    psi: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.px, self.py, self.psi, self.z])

    @classmethod
    def from_array(cls, arr) -> "FourDofState":
        return cls(float(arr[0]), float(arr[1]), float(arr[2]), float(arr[3]))


@dataclass(frozen=True)
class SubstitutedTrajectory:
    """SCP iterate: node times, positions x (N,2) and substituted inputs u (N,2)."""

    times: np.ndarray
    x: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        x = np.asarray(self.x, dtype=float)
        u = np.asarray(self.u, dtype=float)
        n = times.size
        if x.shape != (n, 2) or u.shape != (n, 2):
            raise ValueError("x and u must have shape (N, 2) matching times")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)

    @property
    def n_nodes(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class DiscreteTransition:
    """One-interval transition of the substituted integrator dynamics.

    The state matrix is the identity and both input matrices are
    (dt/2) * I, so only dt and the integrated wind need to be stored.
    """

    dt: float
    w_k: np.ndarray  # integrated wind over the interval, m (2-vector)

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "w_k", np.asarray(self.w_k, dtype=float))

    @property
    def A_d(self) -> np.ndarray:
        return np.eye(2)

    @property
    def B_minus(self) -> np.ndarray:
        return 0.5 * self.dt * np.eye(2)

    @property
    def B_plus(self) -> np.ndarray:
        return 0.5 * self.dt * np.eye(2)


def discrete_step(trans: DiscreteTransition, x_k, u_k, u_k1) -> np.ndarray:
    """x_{k+1} = x_k + (dt/2)(u_k + u_{k+1}) + W_k.

    Exact (machine precision) for piecewise-linear substituted input.
    """
    x_k = np.asarray(x_k, dtype=float)
    u_k = np.asarray(u_k, dtype=float)
    u_k1 = np.asarray(u_k1, dtype=float)
    return x_k + 0.5 * trans.dt * (u_k + u_k1) + trans.w_k


# -- continuous truth propagation ------------------------------------------


def _derivative(
    state: np.ndarray,
    turn_rate: float,
    wind: WindProfile | None,
    profile: SpeedProfile,
    speed_scale: float = 1.0,
    sink_scale: float = 1.0,
) -> np.ndarray:
    px, py, psi, z = state
    v, r = profile.speeds_at(z)
    wx, wy = wind.wind_at(z) if wind is not None else (0.0, 0.0)
    return np.array(
        [
            speed_scale * v * math.cos(psi) + wx,
            speed_scale * v * math.sin(psi) + wy,
            turn_rate,
            -sink_scale * r,
        ]
    )


def rk4_step(
    state: FourDofState,
    turn_rate: float,
    wind: WindProfile | None,
    profile: SpeedProfile,
    dt: float,
    speed_scale: float = 1.0,
    sink_scale: float = 1.0,
) -> FourDofState:
    """One classic Runge-Kutta step with the turn-rate command held constant.

    speed_scale / sink_scale multiply the nominal speeds; they stay at 1 for
    the planner's truth check and carry dispersions in the closed-loop plant.
    """
    y = state.as_array()
    args = (turn_rate, wind, profile, speed_scale, sink_scale)
    k1 = _derivative(y, *args)
    k2 = _derivative(y + 0.5 * dt * k1, *args)
    k3 = _derivative(y + 0.5 * dt * k2, *args)
    k4 = _derivative(y + dt * k3, *args)
    return FourDofState.from_array(y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))


def propagate_4dof(
    state: FourDofState,
    turn_rate_cmd: float,
    wind: WindProfile | None,
    profile: SpeedProfile,
    dt: float,
    max_step: float = 0.25,
) -> FourDofState:
    """Propagate over dt with a constant turn-rate command.

    Internally subdivides so each RK4 step is at most max_step seconds.
    """
    n = max(1, int(math.ceil(dt / max_step)))
    h = dt / n
    out = state
    for _ in range(n):
        out = rk4_step(out, turn_rate_cmd, wind, profile, h)
    return out


def propagate_reference(
    initial: FourDofState,
    node_times: np.ndarray,
    u_star: np.ndarray,
    wind: WindProfile | None,
    profile: SpeedProfile,
    substeps: int = 20,
) -> list[FourDofState]:
    """Truth propagation of a piecewise-constant command over a mesh.

    Returns the state at every node; substeps RK4 steps per mesh interval.
    """
    states = [initial]
    cur = initial
    for k in range(len(u_star)):
        dt = (node_times[k + 1] - node_times[k]) / substeps
        for _ in range(substeps):
            cur = rk4_step(cur, float(u_star[k]), wind, profile, dt)
        states.append(cur)
    return states


# -- reference recovery ----------------------------------------------------


def unwrap_headings(u: np.ndarray) -> np.ndarray:
    """Node headings atan2(u_y, u_x) with 2*pi jumps removed sequentially."""
    raw = np.arctan2(u[:, 1], u[:, 0])
    return np.unwrap(raw)


@dataclass(frozen=True)
class ReferenceSolution:
    """Recovered feedforward: node states (px, py, psi, z) and the
    piecewise-constant turn-rate command per mesh interval."""

    node_times: np.ndarray
    x_star: np.ndarray  # (N, 4)
    u_star: np.ndarray  # (N-1,)

    def __post_init__(self):
        node_times = np.asarray(self.node_times, dtype=float)
        x_star = np.asarray(self.x_star, dtype=float)
        u_star = np.asarray(self.u_star, dtype=float)
        n = node_times.size
        if x_star.shape != (n, 4) or u_star.shape != (n - 1,):
            raise ValueError("inconsistent reference solution shapes")
        object.__setattr__(self, "node_times", node_times)
        object.__setattr__(self, "x_star", x_star)
        object.__setattr__(self, "u_star", u_star)

    @property
    def t0(self) -> float:
        return float(self.node_times[0])

    @property
    def t_f(self) -> float:
        return float(self.node_times[-1])

    def _interval(self, t: float) -> int:
        k = int(np.searchsorted(self.node_times, t, side="right") - 1)
        return min(max(k, 0), len(self.u_star) - 1)

    def command_at(self, t: float) -> float:
        """Feedforward turn rate at time t (piecewise constant)."""
        return float(self.u_star[self._interval(t)])

    def state_at(self, t: float) -> np.ndarray:
        """Reference state at time t, linear interpolation between nodes."""
        k = self._interval(t)
        t0, t1 = self.node_times[k], self.node_times[k + 1]
        lam = (t - t0) / (t1 - t0)
        lam = min(max(lam, 0.0), 1.0)
        return (1.0 - lam) * self.x_star[k] + lam * self.x_star[k + 1]

    def to_records(self) -> list[dict]:
        """Trajectory records {t, px, py, z, psi, u_cmd} at the nodes."""
        recs = []
        for k, t in enumerate(self.node_times):
            u_cmd = float(self.u_star[min(k, len(self.u_star) - 1)])
            recs.append(
                {
                    "t": float(t),
                    "px": float(self.x_star[k, 0]),
                    "py": float(self.x_star[k, 1]),
                    "z": float(self.x_star[k, 3]),
                    "psi": float(self.x_star[k, 2]),
                    "u_cmd": u_cmd,
                }
            )
        return recs

    def to_json(self) -> str:
        return json.dumps(self.to_records(), indent=1)

    @classmethod
    def from_records(cls, recs: list[dict]) -> "ReferenceSolution":
        node_times = np.array([r["t"] for r in recs])
        x_star = np.array([[r["px"], r["py"], r["psi"], r["z"]] for r in recs])
        u_star = np.array([r["u_cmd"] for r in recs[:-1]])
        return cls(node_times, x_star, u_star)


def recover_reference(
    traj: SubstitutedTrajectory, time_map: TimeAltitudeMap
) -> ReferenceSolution:
    """Recover heading and turn-rate references from a substituted iterate.

    Node headings come from the direction of u_k; the turn-rate command is
    the finite difference of headings over each interval, matching the
    piecewise-constant deflection actually applied.
    """
    speeds = np.array(
        [
            time_map.speed_profile.horizontal_speed(time_map.altitude_of_time(t))
            for t in traj.times
        ]
    )
    norms = np.linalg.norm(traj.u, axis=1)
    if np.any(norms < 0.1 * speeds):
        raise DegenerateInputError("substituted input shorter than 0.1 * v(z)")
    psi = unwrap_headings(traj.u)
    dts = np.diff(traj.times)
    u_star = np.diff(psi) / dts
    zs = np.array([time_map.altitude_of_time(t) for t in traj.times])
    x_star = np.column_stack([traj.x, psi, zs])
    return ReferenceSolution(traj.times, x_star, u_star)

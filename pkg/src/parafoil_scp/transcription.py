"""Discrete convex subproblem construction for the SCP iterations.

Builds the temporal mesh (node speeds, interval-averaged speeds, integrated
wind) and assembles one convex subproblem per iteration in canonical conic
form:

    minimize    c'y + const
    subject to  A y = b
                G y + s = h,   s in R+^l x Q^d1 x ... x Q^dk

where Q^d is the second-order cone {(s0, s1): s0 >= ||s1||}.  Phase one
treats the substituted-input tolerance as a fixed parameter; phase two
promotes it to a nonnegative decision variable penalised in the objective.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

_EYE2 = np.eye(2)

from .atmosphere import SpeedProfile, TimeAltitudeMap
from .dynamics import SubstitutedTrajectory
from .wind import WindProfile, integrated_wind


class DegenerateLinearizationError(ValueError):
    """Linearization input vanishes at some node."""


@dataclass(frozen=True)
class Mesh:
    """Temporal mesh with per-node speeds and per-interval wind integrals."""

    node_times: np.ndarray  # (N,), strictly increasing, last = t_f
    node_altitudes: np.ndarray  # (N,)
    dt_k: np.ndarray  # (N-1,)
    v_k: np.ndarray  # horizontal speed at nodes, (N,)
    v_tilde_k: np.ndarray  # interval-averaged horizontal speed, (N-1,)
    w_k: np.ndarray  # integrated wind per interval, (N-1, 2)

    @property
    def n_nodes(self) -> int:
        return self.node_times.size

    @property
    def t_f(self) -> float:
        return float(self.node_times[-1])


def build_mesh(
    time_map: TimeAltitudeMap,
    profile: SpeedProfile,
    wind_profile: WindProfile,
    n_nodes: int,
) -> Mesh:
    """Uniform mesh over [t0, t_f] with Simpson-averaged interval speeds."""
    if n_nodes < 3:
        raise ValueError("mesh needs at least 3 nodes")
    t0, tf = time_map.t0, time_map.final_time
    node_times = np.linspace(t0, tf, n_nodes)
    node_altitudes = np.array([time_map.altitude_of_time(t) for t in node_times])
    dt_k = np.diff(node_times)
    v_k = np.array([profile.horizontal_speed(z) for z in node_altitudes])

    # Simpson quadrature of v(z(t)) over each interval.
    n_sub = 16
    w_simpson = np.ones(n_sub + 1)
    w_simpson[1:-1:2] = 4.0
    w_simpson[2:-1:2] = 2.0
    w_simpson /= 3.0 * n_sub
    v_tilde = np.empty(n_nodes - 1)
    for k in range(n_nodes - 1):
        ts = np.linspace(node_times[k], node_times[k + 1], n_sub + 1)
        vs = np.array(
            [profile.horizontal_speed(time_map.altitude_of_time(t)) for t in ts]
        )
        v_tilde[k] = w_simpson @ vs

    w_k = np.array(
        [
            integrated_wind(wind_profile, time_map, node_times[k], node_times[k + 1])
            for k in range(n_nodes - 1)
        ]
    )
    return Mesh(node_times, node_altitudes, dt_k, v_k, v_tilde, w_k)


@dataclass(frozen=True)
class ScpWeights:
    """Cost weights, tolerances and stopping parameters of the SCP."""

    alpha1: float = 1.0e4  # final-position weight
    alpha2: float = 1.0e2  # final-heading weight
    alpha5: float = 1.0e3  # slack weight (phase two)
    eps_h: float = 0.25  # substituted-input tolerance, m/s
    eps_u: float = 4.5  # trust-region radius, m/s
    conv_tol: float = 1.0e-3  # relative cost-change stopping threshold
    max_iter: int = 50

    def __post_init__(self):
        if not (self.alpha1 >= 10.0 * self.alpha2 and self.alpha2 >= 10.0):
            raise ValueError("weights must satisfy alpha1 >= 10*alpha2 >= 100")
        if self.eps_h <= 0.0 or self.eps_u <= 0.0:
            raise ValueError("eps_h and eps_u must be positive")
        if self.conv_tol <= 0.0 or self.max_iter < 1:
            raise ValueError("conv_tol must be positive and max_iter >= 1")

    @classmethod
    def defaults_for(cls, profile: SpeedProfile, z_f: float, **overrides):
        """Default tolerances scaled to the scenario's speed range."""
        base = dict(
            eps_h=0.05 * profile.horizontal_speed(z_f),
            eps_u=0.3 * profile.horizontal_speed(profile.z0),
        )
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class BoundaryData:
    """Boundary conditions of the subproblem in the substituted variables."""

    x0_r: np.ndarray  # initial position, m (2,)
    u0_r: np.ndarray  # initial substituted input, m/s (2,)
    xf_r: np.ndarray  # target position, m (2,)
    uf_r: np.ndarray  # target heading encoding, m/s (2,)
    psi_dot_max: float  # rad/s

    def __post_init__(self):
        for name in ("x0_r", "u0_r", "xf_r", "uf_r"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.psi_dot_max <= 0.0:
            raise ValueError("psi_dot_max must be positive")

    @classmethod
    def from_headings(
        cls,
        x0,
        psi0: float,
        xf,
        psi_f: float,
        profile: SpeedProfile,
        z_f: float,
        psi_dot_max: float,
    ) -> "BoundaryData":
        """Encode headings as substituted-input vectors.

        The terminal encoding is the *negated* heading direction scaled by
        the landing speed, so the linear terminal cost term is minimised at
        alignment with psi_f.
        """
        v0 = profile.horizontal_speed(profile.z0)
        vf = profile.horizontal_speed(z_f)
        u0_r = v0 * np.array([math.cos(psi0), math.sin(psi0)])
        uf_r = -vf * np.array([math.cos(psi_f), math.sin(psi_f)])
        return cls(np.asarray(x0, float), u0_r, np.asarray(xf, float), uf_r, psi_dot_max)


@dataclass
class ConvexSubproblem:
    """One convexified instance in canonical conic form, plus layout metadata.

    Cone ordering in (G, h): l nonnegative rows first, then the second-order
    cone blocks in soc_dims order.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    h: np.ndarray
    dim_nonneg: int
    soc_dims: list
    obj_const: float
    n_nodes: int
    has_eps_var: bool

    @property
    def n_vars(self) -> int:
        return self.c.size

    # Variable layout: x (2N), u (2N), q (N-1), s_pos (1), [eps].
    def idx_x(self, k: int) -> slice:
        return slice(2 * k, 2 * k + 2)

    def idx_u(self, k: int) -> slice:
        n = self.n_nodes
        return slice(2 * n + 2 * k, 2 * n + 2 * k + 2)

    def idx_q(self, k: int) -> int:
        return 4 * self.n_nodes + k

    @property
    def idx_spos(self) -> int:
        return 5 * self.n_nodes - 1

    @property
    def idx_eps(self) -> int:
        if not self.has_eps_var:
            raise AttributeError("phase-one subproblem has no slack variable")
        return 5 * self.n_nodes

    def extract(self, primal: np.ndarray):
        """Split a primal vector into (x nodes, u nodes, eps or None)."""
        n = self.n_nodes
        x = primal[: 2 * n].reshape(n, 2).copy()
        u = primal[2 * n : 4 * n].reshape(n, 2).copy()
        eps = float(primal[self.idx_eps]) if self.has_eps_var else None
        return x, u, eps

    # -- sparse triplet text format ---------------------------------------

    def to_triplets(self) -> str:
        """Documented text export for cross-checking with external solvers."""
        buf = io.StringIO()
        buf.write("socp-triplets 1\n")
        socs = " ".join(str(d) for d in self.soc_dims)
        buf.write(
            f"dims n={self.n_vars} p={self.b.size} m={self.h.size} "
            f"l={self.dim_nonneg} socs={socs}\n"
        )
        buf.write(f"const {float(self.obj_const)!r}\n")
        for i, v in enumerate(self.c):
            if v != 0.0:
                buf.write(f"c {i} {float(v)!r}\n")
        for (i, j), v in np.ndenumerate(self.A):
            if v != 0.0:
                buf.write(f"A {i} {j} {float(v)!r}\n")
        for i, v in enumerate(self.b):
            if v != 0.0:
                buf.write(f"b {i} {float(v)!r}\n")
        for (i, j), v in np.ndenumerate(self.G):
            if v != 0.0:
                buf.write(f"G {i} {j} {float(v)!r}\n")
        for i, v in enumerate(self.h):
            if v != 0.0:
                buf.write(f"h {i} {float(v)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_triplets(cls, text: str) -> "ConvexSubproblem":
        lines = text.strip().splitlines()
        if not lines or not lines[0].startswith("socp-triplets"):
            raise ValueError("not a socp-triplets document")
        dims = {}
        for tok in lines[1].split()[1:]:
            if "=" in tok:
                key, _, val = tok.partition("=")
                if key != "socs" and val:
                    dims[key] = int(val)
        # The socs list contains spaces; parse it from the raw line tail.
        raw = lines[1]
        socs = [int(x) for x in raw.split("socs=")[1].split()] if "socs=" in raw else []
        n, p, m, l = dims["n"], dims["p"], dims["m"], dims["l"]
        c = np.zeros(n)
        A = np.zeros((p, n))
        b = np.zeros(p)
        G = np.zeros((m, n))
        h = np.zeros(m)
        obj_const = 0.0
        for ln in lines[2:]:
            parts = ln.split()
            if parts[0] == "const":
                obj_const = float(parts[1])
            elif parts[0] == "c":
                c[int(parts[1])] = float(parts[2])
            elif parts[0] == "A":
                A[int(parts[1]), int(parts[2])] = float(parts[3])
            elif parts[0] == "b":
                b[int(parts[1])] = float(parts[2])
            elif parts[0] == "G":
                G[int(parts[1]), int(parts[2])] = float(parts[3])
            elif parts[0] == "h":
                h[int(parts[1])] = float(parts[2])
            else:
                raise ValueError(f"unknown record {parts[0]!r}")
        return cls(c, A, b, G, h, l, socs, obj_const, 0, False)


def j2_coefficients(mesh: Mesh) -> np.ndarray:
    """Positive weights of the quadratic turn-energy surrogate per interval."""
    v_k = mesh.v_k
    return (v_k[:-1] ** 2 * v_k[1:] ** 2) / (mesh.v_tilde_k**6 * mesh.dt_k)


def _build(
    mesh: Mesh,
    bounds: BoundaryData,
    weights: ScpWeights,
    linearization: SubstitutedTrajectory,
    phase_two: bool,
) -> ConvexSubproblem:
    n = mesh.n_nodes
    if linearization.n_nodes != n:
        raise ValueError("linearization node count does not match mesh")
    u_bar = linearization.u
    u_bar_norm = np.linalg.norm(u_bar, axis=1)
    if np.any(u_bar_norm < 1e-6):
        raise DegenerateLinearizationError("linearization input vanishes at a node")
    u_hat = u_bar / u_bar_norm[:, None]

    n_vars = 5 * n + (1 if phase_two else 0)
    c = np.zeros(n_vars)
    obj_const = weights.alpha2

    def ix(k):
        return slice(2 * k, 2 * k + 2)

    def iu(k):
        return slice(2 * n + 2 * k, 2 * n + 2 * k + 2)

    iq0 = 4 * n
    ispos = 5 * n - 1
    ieps = 5 * n  # only valid when phase_two

    # Objective: alpha1 * ||x_{N-1} - xf|| via epigraph, normalized terminal
    # heading term, J2 epigraphs, and (phase two) the slack penalty.
    c[ispos] = weights.alpha1
    vf2 = float(bounds.uf_r @ bounds.uf_r)
    c[iu(n - 1)] += weights.alpha2 * bounds.uf_r / vf2
    c[iq0 : iq0 + n - 1] = j2_coefficients(mesh)
    if phase_two:
        c[ieps] = weights.alpha5

    # Equalities: initial position, initial input, dynamics.
    p_rows = 4 + 2 * (n - 1)
    A = np.zeros((p_rows, n_vars))
    b = np.zeros(p_rows)
    A[0:2, ix(0)] = _EYE2
    b[0:2] = bounds.x0_r
    A[2:4, iu(0)] = _EYE2
    b[2:4] = bounds.u0_r
    for k in range(n - 1):
        r = 4 + 2 * k
        A[r : r + 2, ix(k + 1)] = _EYE2
        A[r : r + 2, ix(k)] = -_EYE2
        A[r : r + 2, iu(k)] = -0.5 * mesh.dt_k[k] * _EYE2
        A[r : r + 2, iu(k + 1)] = -0.5 * mesh.dt_k[k] * _EYE2
        b[r : r + 2] = mesh.w_k[k]

    # Cones.
    l = n + (2 if phase_two else 0)
    soc_dims = [3] + [4] * (n - 1) + [3] * n + [3] * (n - 1) + [3] * n
    m_rows = l + sum(soc_dims)
    G = np.zeros((m_rows, n_vars))
    h = np.zeros(m_rows)
    row = 0

    # Linearized substituted-input lower bound: u_hat_k . u_k >= v_k - eps.
    for k in range(n):
        G[row, iu(k)] = -u_hat[k]
        if phase_two:
            G[row, ieps] = -1.0
            h[row] = -mesh.v_k[k]
        else:
            h[row] = -(mesh.v_k[k] - weights.eps_h)
        row += 1
    if phase_two:
        G[row, ieps] = -1.0  # eps >= 0
        row += 1
        # The promoted tolerance may only shrink the first-phase budget:
        # without this cap it can grow across second-phase relinearizations
        # and void the input-norm (and hence turn-rate) guarantees.
        G[row, ieps] = 1.0  # eps <= eps_h
        h[row] = weights.eps_h
        row += 1

    # Terminal-position epigraph: (s_pos; x_{N-1} - xf) in Q3.
    G[row, ispos] = -1.0
    G[row + 1 : row + 3, ix(n - 1)] = -_EYE2
    h[row + 1 : row + 3] = -bounds.xf_r
    row += 3

    # J2 epigraphs: q_k >= ||u_{k+1} - u_k||^2 as
    # ||(2 du; q_k - 1)|| <= q_k + 1.
    for k in range(n - 1):
        G[row, iq0 + k] = -1.0
        h[row] = 1.0
        G[row + 1 : row + 3, iu(k + 1)] = -2.0 * _EYE2
        G[row + 1 : row + 3, iu(k)] = 2.0 * _EYE2
        G[row + 3, iq0 + k] = -1.0
        h[row + 3] = -1.0
        row += 4

    # Substituted-input norm upper bound: ||u_k|| <= v_k + eps.
    for k in range(n):
        if phase_two:
            G[row, ieps] = -1.0
            h[row] = mesh.v_k[k]
        else:
            h[row] = mesh.v_k[k] + weights.eps_h
        G[row + 1 : row + 3, iu(k)] = -_EYE2
        row += 3

    # Heading-rate cones, exact chord form:
    #   ||u_{k+1} - u_k|| <= 2 r_k sin(min(psi_dot_max dt_k, pi) / 2),
    # with radius r_k = min(v_k, v_{k+1}) - eps_h, the smallest norm the
    # input constraints allow.  For any inputs with norms >= r_k the chord
    # bound implies a heading change of at most psi_dot_max * dt_k, so the
    # recovered turn-rate command respects its limit at finite step sizes,
    # where the small-angle arc bound dt * v * psi_dot_max does not.
    for k in range(n - 1):
        r_min = max(min(mesh.v_k[k], mesh.v_k[k + 1]) - weights.eps_h, 1e-9)
        half_arc = 0.5 * min(bounds.psi_dot_max * mesh.dt_k[k], math.pi)
        h[row] = 2.0 * r_min * math.sin(half_arc)
        G[row + 1 : row + 3, iu(k + 1)] = -_EYE2
        G[row + 1 : row + 3, iu(k)] = _EYE2
        row += 3

    # Trust-region cones: ||u_k - u_bar_k|| <= eps_u.
    for k in range(n):
        h[row] = weights.eps_u
        G[row + 1 : row + 3, iu(k)] = -_EYE2
        h[row + 1 : row + 3] = -u_bar[k]
        row += 3

    assert row == m_rows
    return ConvexSubproblem(
        c, A, b, G, h, l, soc_dims, obj_const, n, phase_two
    )


def build_phase1(
    mesh: Mesh,
    bounds: BoundaryData,
    weights: ScpWeights,
    linearization: SubstitutedTrajectory,
) -> ConvexSubproblem:
    """Phase-one subproblem: fixed substituted-input tolerance eps_h."""
    return _build(mesh, bounds, weights, linearization, phase_two=False)


def build_phase2(
    mesh: Mesh,
    bounds: BoundaryData,
    weights: ScpWeights,
    linearization: SubstitutedTrajectory,
) -> ConvexSubproblem:
    """Phase-two subproblem: the tolerance becomes a penalised variable."""
    return _build(mesh, bounds, weights, linearization, phase_two=True)


def evaluate_cost(
    mesh: Mesh,
    bounds: BoundaryData,
    weights: ScpWeights,
    x: np.ndarray,
    u: np.ndarray,
    eps: float | None = None,
) -> float:
    """Objective value of an iterate, computed directly from the trajectory."""
    vf2 = float(bounds.uf_r @ bounds.uf_r)
    term_pos = weights.alpha1 * float(np.linalg.norm(x[-1] - bounds.xf_r))
    term_head = weights.alpha2 * (float(u[-1] @ bounds.uf_r) / vf2 + 1.0)
    du = np.diff(u, axis=0)
    j2 = float(j2_coefficients(mesh) @ np.sum(du * du, axis=1))
    total = term_pos + term_head + j2
    if eps is not None:
        total += weights.alpha5 * eps
    return total

"""Primal-dual interior-point solver for second-order cone programs.

Solves the canonical conic form produced by the transcription module:

    minimize    c'x
    subject to  A x = b
                G x + s = h,   s in K = R+^l x Q^d1 x ... x Q^dk

with a Nesterov-Todd scaled Mehrotra predictor-corrector method and a dense
normal-equations KKT solve, sized for the few-hundred-variable problems one
mesh produces.  The dual iterate z lives in the same cone K.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    MAX_ITER = "MaxIter"
    INFEASIBLE = "Infeasible"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class ConicSolution:
    primal: np.ndarray
    objective: float
    status: SolveStatus
    iterations: int
    solve_time: float
    dual_eq: np.ndarray | None = None
    dual_cone: np.ndarray | None = None
    gap: float = math.nan
    primal_residual: float = math.nan
    dual_residual: float = math.nan


# -- cone utilities --------------------------------------------------------


class _Cones:
    """Index bookkeeping plus Jordan-algebra primitives for R+^l x SOCs.

    Internally the solver permutes the cone rows so that all second-order
    cone blocks of equal dimension sit in one contiguous span; every
    primitive then runs vectorized over an (n_blocks, dim) reshape view
    with no gather/scatter.  to_internal/to_external convert between the
    caller's row order and the permuted one.
    """

    def __init__(self, l: int, soc_dims: list[int]):
        self.l = int(l)
        self.soc_dims = [int(d) for d in soc_dims]
        self.m = self.l + sum(self.soc_dims)
        # Original-layout block slices (for callers and equilibration).
        self.slices = []
        off = self.l
        for d in self.soc_dims:
            self.slices.append(slice(off, off + d))
            off += d

        # Permutation putting equal-dimension blocks back to back.
        order = sorted(range(len(self.soc_dims)), key=lambda i: self.soc_dims[i])
        perm = list(range(self.l))
        self.groups = []  # (dim, contiguous slice in internal layout, n_blocks)
        pos = self.l
        i = 0
        while i < len(order):
            d = self.soc_dims[order[i]]
            j = i
            while j < len(order) and self.soc_dims[order[j]] == d:
                perm.extend(range(self.slices[order[j]].start, self.slices[order[j]].stop))
                j += 1
            n_b = j - i
            self.groups.append((d, slice(pos, pos + n_b * d), n_b))
            pos += n_b * d
            i = j
        self.perm = np.asarray(perm, dtype=int)
        self.inv_perm = np.argsort(self.perm)
        self.identity_permuted = self.perm.size == self.m and bool(
            np.all(self.perm == np.arange(self.m))
        )
        # Barrier degree: one per LP row, one per SOC block.
        self.degree = self.l + len(self.soc_dims)

    def to_internal(self, u: np.ndarray) -> np.ndarray:
        return u if self.identity_permuted else u[..., self.perm]

    def to_external(self, u: np.ndarray) -> np.ndarray:
        return u if self.identity_permuted else u[..., self.inv_perm]

    def identity(self) -> np.ndarray:
        """Cone identity element, in internal layout."""
        e = np.zeros(self.m)
        e[: self.l] = 1.0
        for d, sl, _ in self.groups:
            e[sl.start : sl.stop : d] = 1.0
        return e

    def min_eig(self, u: np.ndarray) -> float:
        """Smallest cone eigenvalue; positive iff u is strictly interior."""
        vals = []
        if self.l:
            vals.append(float(np.min(u[: self.l])))
        for d, sl, n_b in self.groups:
            blk = u[sl].reshape(n_b, d)
            vals.append(float(np.min(blk[:, 0] - np.linalg.norm(blk[:, 1:], axis=1))))
        return min(vals) if vals else math.inf

    def product(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Jordan product u o v."""
        out = np.empty(self.m)
        out[: self.l] = u[: self.l] * v[: self.l]
        for d, sl, n_b in self.groups:
            ub = u[sl].reshape(n_b, d)
            vb = v[sl].reshape(n_b, d)
            ob = out[sl].reshape(n_b, d)
            ob[:, 0] = np.sum(ub * vb, axis=1)
            ob[:, 1:] = ub[:, :1] * vb[:, 1:] + vb[:, :1] * ub[:, 1:]
        return out

    def solve_product(self, lam: np.ndarray, d_vec: np.ndarray) -> np.ndarray:
        """Solve lam o x = d_vec for x (lam strictly interior)."""
        out = np.empty(self.m)
        out[: self.l] = d_vec[: self.l] / lam[: self.l]
        for d, sl, n_b in self.groups:
            lb = lam[sl].reshape(n_b, d)
            db = d_vec[sl].reshape(n_b, d)
            ob = out[sl].reshape(n_b, d)
            l0, l1 = lb[:, 0], lb[:, 1:]
            d0, d1 = db[:, 0], db[:, 1:]
            det = l0 * l0 - np.sum(l1 * l1, axis=1)
            x0 = (l0 * d0 - np.sum(l1 * d1, axis=1)) / det
            ob[:, 0] = x0
            ob[:, 1:] = (d1 - x0[:, None] * l1) / l0[:, None]
        return out

    def max_step(self, u: np.ndarray, du: np.ndarray) -> float:
        """Largest t with u + t*du in the cone (u strictly interior).

        u/du may also be (k, m) stacks; the minimum over all rows is
        returned, so one call can cover both the s and z updates.
        """
        u = np.atleast_2d(u)
        du = np.atleast_2d(du)
        k = u.shape[0]
        t = math.inf
        if self.l:
            neg = du[:, : self.l] < 0
            if np.any(neg):
                t = min(t, float(np.min(-u[:, : self.l][neg] / du[:, : self.l][neg])))
        for d, sl, n_b in self.groups:
            ub = u[:, sl].reshape(k, n_b, d)
            db = du[:, sl].reshape(k, n_b, d)
            u0, u1 = ub[..., 0], ub[..., 1:]
            d0, d1 = db[..., 0], db[..., 1:]
            # J(u + t du) = c2 t^2 + 2 c1 t + c0 > 0 and u0 + t d0 > 0.
            c2 = d0 * d0 - np.sum(d1 * d1, axis=-1)
            c1 = u0 * d0 - np.sum(u1 * d1, axis=-1)
            c0 = u0 * u0 - np.sum(u1 * u1, axis=-1)
            disc = c1 * c1 - c2 * c0
            sq = np.sqrt(np.maximum(disc, 0.0))
            quad = (np.abs(c2) > 1e-300) & (disc >= 0.0)
            c2_safe = np.where(quad, c2, 1.0)
            r1 = np.where(quad, (-c1 - sq) / c2_safe, np.inf)
            r2 = np.where(quad, (-c1 + sq) / c2_safe, np.inf)
            lin = (~quad) & (np.abs(c1) > 1e-300) & (disc >= 0.0)
            r3 = np.where(lin, -c0 / np.where(lin, 2.0 * c1, 1.0), np.inf)
            neg0 = d0 < 0.0
            r4 = np.where(neg0, -u0 / np.where(neg0, d0, 1.0), np.inf)
            roots = np.concatenate((r1, r2, r3, r4))
            pos = roots > 0.0
            if np.any(pos):
                t = min(t, float(np.min(roots[pos])))
        return t


class _Scaling:
    """Nesterov-Todd scaling point for the current (s, z) pair.

    All vectors/matrices are in the cones' internal (permuted) layout.
    """

    def __init__(self, cones: _Cones, s: np.ndarray, z: np.ndarray):
        self.cones = cones
        self.w_lp = np.sqrt(s[: cones.l] / z[: cones.l]) if cones.l else np.zeros(0)
        self.soc = []  # per group: (eta (n_b,), w_bar (n_b, d))
        for d, sl, n_b in cones.groups:
            sb_blk = s[sl].reshape(n_b, d)
            zb_blk = z[sl].reshape(n_b, d)
            js = sb_blk[:, 0] ** 2 - np.sum(sb_blk[:, 1:] ** 2, axis=1)
            jz = zb_blk[:, 0] ** 2 - np.sum(zb_blk[:, 1:] ** 2, axis=1)
            if np.any(js <= 0.0) or np.any(jz <= 0.0):
                raise FloatingPointError("iterate left the cone interior")
            sb = sb_blk / np.sqrt(js)[:, None]
            zb = zb_blk / np.sqrt(jz)[:, None]
            gamma = np.sqrt((1.0 + np.sum(sb * zb, axis=1)) / 2.0)
            w_bar = np.empty_like(sb)
            w_bar[:, 0] = (sb[:, 0] + zb[:, 0]) / (2.0 * gamma)
            w_bar[:, 1:] = (sb[:, 1:] - zb[:, 1:]) / (2.0 * gamma[:, None])
            eta = (js / jz) ** 0.25
            self.soc.append((eta, w_bar))

    def apply(self, u: np.ndarray, inverse: bool = False) -> np.ndarray:
        """W u (or W^-1 u); W is symmetric."""
        out = np.empty_like(u)
        l = self.cones.l
        sign = -1.0 if inverse else 1.0
        if l:
            out[:l] = u[:l] / self.w_lp if inverse else u[:l] * self.w_lp
        for (eta, w_bar), (d, sl, n_b) in zip(self.soc, self.cones.groups):
            scale = 1.0 / eta if inverse else eta
            ub = u[sl].reshape(n_b, d)
            ob = out[sl].reshape(n_b, d)
            u0, u1 = ub[:, 0], ub[:, 1:]
            w0, w1 = w_bar[:, 0], w_bar[:, 1:]
            dot = np.sum(w1 * u1, axis=1)
            ob[:, 0] = scale * (w0 * u0 + sign * dot)
            coef = scale * (sign * u0 + dot / (1.0 + w0))
            ob[:, 1:] = coef[:, None] * w1
            ob[:, 1:] += scale[:, None] * u1
        return out

    def apply_matrix(self, M: np.ndarray, inverse: bool = False) -> np.ndarray:
        """Apply the (symmetric) scaling blockwise to the rows of M."""
        out = np.empty_like(M)
        n = M.shape[1]
        l = self.cones.l
        sign = -1.0 if inverse else 1.0
        if l:
            w = 1.0 / self.w_lp if inverse else self.w_lp
            np.multiply(M[:l], w[:, None], out=out[:l])
        for (eta, w_bar), (d, sl, n_b) in zip(self.soc, self.cones.groups):
            scale = (1.0 / eta if inverse else eta)[:, None, None]
            blk = M[sl].reshape(n_b, d, n)
            ob = out[sl].reshape(n_b, d, n)
            b0, b1 = blk[:, 0, :], blk[:, 1:, :]
            w0, w1 = w_bar[:, 0], w_bar[:, 1:]
            dot = np.einsum("bi,bin->bn", w1, b1)
            ob[:, 0, :] = scale[:, 0] * (w0[:, None] * b0 + sign * dot)
            # coef (n_b, n): shared multiplier of w1 for the tail rows.
            coef = scale[:, 0] * (sign * b0 + dot / (1.0 + w0)[:, None])
            np.multiply(w1[:, :, None], coef[:, None, :], out=ob[:, 1:, :])
            ob[:, 1:, :] += scale * b1
        return out

    def lam(self, z: np.ndarray) -> np.ndarray:
        """Scaled point lambda = W z = W^-1 s."""
        return self.apply(z)


def _equilibrate(A, G, c, cones: _Cones, n_sweeps: int = 2):
    """Ruiz equilibration of the stacked constraint matrix.

    Returns (column scaling d, A-row scaling e_a, G-row scaling e_g,
    objective scaling s_obj).  Rows belonging to one second-order cone share
    a single scaling factor so cone membership is preserved.
    """
    p, n = A.shape
    m = G.shape[0]
    d = np.ones(n)
    e_a = np.ones(p)
    e_g = np.ones(m)
    # Row groups of G: each LP row alone, each SOC block together.
    group_starts = np.concatenate(
        [np.arange(cones.l), [sl.start for sl in cones.slices]]
    ).astype(int)
    group_ends = np.concatenate(
        [np.arange(1, cones.l + 1), [sl.stop for sl in cones.slices]]
    ).astype(int)
    # Expand a per-group scale back to per-row.
    row_group = np.repeat(
        np.arange(group_starts.size), group_ends - group_starts
    )

    A_w = A.copy()
    G_w = G.copy()
    for _ in range(n_sweeps):
        col_max = np.maximum(
            np.max(np.abs(A_w), axis=0) if p else 0.0, np.max(np.abs(G_w), axis=0)
        )
        col_scale = 1.0 / np.sqrt(np.maximum(col_max, 1e-12))
        A_w *= col_scale[None, :]
        G_w *= col_scale[None, :]
        d *= col_scale

        if p:
            row_max_a = np.max(np.abs(A_w), axis=1)
            ra = 1.0 / np.sqrt(np.maximum(row_max_a, 1e-12))
            A_w *= ra[:, None]
            e_a *= ra
        row_max_g = np.max(np.abs(G_w), axis=1)
        blk_max = np.maximum.reduceat(row_max_g, group_starts)
        rg = (1.0 / np.sqrt(np.maximum(blk_max, 1e-12)))[row_group]
        G_w *= rg[:, None]
        e_g *= rg

    s_obj = max(1.0, float(np.max(np.abs(d * c))))
    return d, e_a, e_g, s_obj


# -- solver ----------------------------------------------------------------


class SocpSolver:
    """Reusable solver instance; cheap to construct, no shared state."""

    def __init__(
        self,
        tol: float = 1e-7,
        feas_tol: float = 1e-8,
        max_iter: int = 100,
        step_frac: float = 0.99,
        warm_shift: float = 5e-2,
    ):
        self.tol = tol
        self.feas_tol = feas_tol
        self.max_iter = max_iter
        self.step_frac = step_frac
        self.warm_shift = warm_shift

    def solve(self, problem, warm: tuple | None = None) -> ConicSolution:
        """Solve one problem; warm optionally carries (x, y, z) of a nearby
        problem's solution (unscaled) to start from."""
        t_start = time.perf_counter()
        c = np.asarray(problem.c, dtype=float)
        A = np.asarray(problem.A, dtype=float)
        b = np.asarray(problem.b, dtype=float)
        G = np.asarray(problem.G, dtype=float)
        h = np.asarray(problem.h, dtype=float)
        obj_const = float(getattr(problem, "obj_const", 0.0))
        cones = _Cones(problem.dim_nonneg, problem.soc_dims)
        n, p, m = c.size, b.size, h.size
        if A.shape != (p, n) or G.shape != (m, n) or cones.m != m:
            raise ValueError("inconsistent problem dimensions")

        d_col, e_a, e_g, s_obj = _equilibrate(A, G, c, cones)
        A_s = e_a[:, None] * A * d_col[None, :] if p else A * d_col[None, :]
        G_s = e_g[:, None] * G * d_col[None, :]
        b_s = e_a * b
        h_s = e_g * h
        c_s = d_col * c / s_obj
        # Work in the cone-grouped internal row order from here on.
        if not cones.identity_permuted:
            G_s = G_s[cones.perm]
            h_s = h_s[cones.perm]

        init = None
        if warm is not None:
            wx, wy, wz = warm
            if wx.size == n and np.all(np.isfinite(wx)):
                x0 = wx / d_col
                y0 = wy / (s_obj * e_a) if p else np.zeros(0)
                z0 = cones.to_internal(wz / (s_obj * e_g))
                s0 = h_s - G_s @ x0
                e = cones.identity()
                # Push both cone iterates strictly interior and keep the
                # complementarity measure away from zero; the shift trades
                # warmness for centrality.
                for u in (s0, z0):
                    a = cones.min_eig(u)
                    base = self.warm_shift * (1.0 + float(np.max(np.abs(u))))
                    u += max(base, -1.5 * a + base) * e
                init = (x0, y0, s0, z0)

        try:
            sol = self._solve_core(c_s, A_s, b_s, G_s, h_s, cones, t_start, init)
        except (FloatingPointError, np.linalg.LinAlgError):
            if init is not None:
                # A badly conditioned warm point can sink the very first
                # scaling; the default cold start is always well defined,
                # so fall back to it before reporting failure.
                return self.solve(problem, warm=None)
            return ConicSolution(
                primal=np.full(n, np.nan),
                objective=math.nan,
                status=SolveStatus.NUMERICAL_FAILURE,
                iterations=0,
                solve_time=time.perf_counter() - t_start,
            )
        if sol.status == SolveStatus.NUMERICAL_FAILURE and init is not None:
            return self.solve(problem, warm=None)

        # Undo the scaling and report residuals of the original problem.
        x = d_col * sol.primal
        y = s_obj * e_a * sol.dual_eq
        z = s_obj * e_g * cones.to_external(sol.dual_cone)
        s_cone = h - G @ x
        sol.primal = x
        sol.dual_eq = y
        sol.dual_cone = z
        sol.objective = float(c @ x) + obj_const
        sol.gap = float(max(s_cone @ z, 0.0))
        sol.primal_residual = float(
            max(
                np.linalg.norm(A @ x - b) / max(1.0, np.linalg.norm(b)),
                0.0,
            )
        )
        sol.dual_residual = float(
            np.linalg.norm(A.T @ y + G.T @ z + c) / max(1.0, np.linalg.norm(c))
        )
        # The scaled-space loop can stop at its numerical floor while the
        # unscaled solution is in fact accurate; judge by what we return.
        if sol.status == SolveStatus.MAX_ITER:
            rel_gap = sol.gap / max(1.0, abs(sol.objective - obj_const))
            phi = max(sol.primal_residual, sol.dual_residual, rel_gap)
            if phi <= max(self.tol, 1e-6):
                sol.status = SolveStatus.OPTIMAL
        sol.solve_time = time.perf_counter() - t_start
        return sol

    # -- internals --------------------------------------------------------

    def _kkt_factor(self, A, Gs, reg=1e-11, buf=None):
        """Factor [Gs'Gs  A'; A  0] with tiny static regularization.

        buf optionally reuses a preassembled matrix whose constant A blocks
        and regularized corner were filled by a previous call.
        """
        n = Gs.shape[1]
        p = A.shape[0]
        if buf is None:
            buf = np.zeros((n + p, n + p))
            buf[:n, n:] = A.T
            buf[n:, :n] = A
            buf.flat[(n + p) * n + n :: n + p + 1] = -reg
        np.matmul(Gs.T, Gs, out=buf[:n, :n])
        buf.flat[: (n + p) * n : n + p + 1] += reg
        # lu_factor copies its input (overwrite_a=False), so buf survives.
        return scipy.linalg.lu_factor(buf, check_finite=False), buf

    def _kkt_solve(self, lu, A, G, Gs, W, bx, by, bz):
        """Solve the scaled KKT system for (dx, dy, dz)."""
        n = G.shape[1]
        v0 = W.apply(bz, inverse=True)
        rhs = np.concatenate([bx + Gs.T @ v0, by])
        sol = scipy.linalg.lu_solve(lu, rhs, check_finite=False)
        dx, dy = sol[:n], sol[n:]
        dz = W.apply(Gs @ dx - v0, inverse=True)
        return dx, dy, dz

    def _initial_point(self, c, A, b, G, h, cones):
        """Least-squares style initialization pushed into the cone interior."""
        n, p, m = c.size, b.size, h.size
        lu, _ = self._kkt_factor(A, G)

        # Primal: minimize ||s|| s.t. Ax=b, Gx+s=h.
        sol = scipy.linalg.lu_solve(lu, np.concatenate([G.T @ h, b]), check_finite=False)
        x0 = sol[:n]
        s0 = h - G @ x0
        # Dual: minimize ||z|| s.t. A'y + G'z + c = 0.
        sol = scipy.linalg.lu_solve(lu, np.concatenate([-c, np.zeros(p)]), check_finite=False)
        y0 = sol[n:]
        z0 = G @ sol[:n]

        e = cones.identity()
        for u in (s0, z0):
            a = cones.min_eig(u)
            if a <= 0.0:
                u += (1.0 - a) * e
            elif a < 1e-8:
                u += e
        return x0, y0, s0, z0

    def _solve_core(self, c, A, b, G, h, cones, t_start, init=None):
        n, p, m = c.size, b.size, h.size
        x, y, s, z = init if init is not None else self._initial_point(
            c, A, b, G, h, cones
        )
        e = cones.identity()
        status = SolveStatus.MAX_ITER
        it = 0

        norm_b = max(1.0, np.linalg.norm(b))
        norm_h = max(1.0, np.linalg.norm(h))
        norm_c = max(1.0, np.linalg.norm(c))

        def metrics(x, y, s, z):
            rx = A.T @ y + G.T @ z + c
            ry = A @ x - b
            rz = G @ x + s - h
            gap = s @ z
            rel_gap = gap / max(1.0, abs(c @ x))
            pres = max(np.linalg.norm(ry) / norm_b, np.linalg.norm(rz) / norm_h)
            dres = np.linalg.norm(rx) / norm_c
            return rx, ry, rz, gap, rel_gap, pres, dres

        best = (x, y, s, z)
        best_phi = math.inf
        kkt_buf = None

        for it in range(1, self.max_iter + 1):
            rx, ry, rz, gap, rel_gap, pres, dres = metrics(x, y, s, z)
            mu = gap / cones.degree
            phi = max(pres, dres, rel_gap)
            if not math.isfinite(phi):
                raise FloatingPointError("iterate lost finiteness")
            if phi < best_phi:
                best_phi = phi
                best = (x, y, s, z)

            if pres <= self.feas_tol and dres <= self.feas_tol and rel_gap <= self.tol:
                status = SolveStatus.OPTIMAL
                break

            # Diverging after having been nearly converged: numerical floor
            # reached, return the best iterate seen.
            if phi > 100.0 * best_phi and best_phi < 1e-5:
                x, y, s, z = best
                status = (
                    SolveStatus.OPTIMAL
                    if best_phi <= max(self.tol, 10.0 * self.feas_tol)
                    else SolveStatus.MAX_ITER
                )
                break

            # Crude infeasibility heuristic: complementarity collapsed while
            # the residuals never came down.
            if mu < 1e-14 and (pres > 1e-4 or dres > 1e-4):
                status = SolveStatus.INFEASIBLE
                break

            try:
                W = _Scaling(cones, s, z)
            except FloatingPointError:
                # Cancellation at the cone boundary.  A diverging dual with
                # residuals still large is an infeasibility certificate in
                # the making; otherwise report the best iterate we reached.
                x, y, s, z = best
                diverged = float(np.max(np.abs(z))) > 1e10 * (
                    1.0 + float(np.max(np.abs(h)))
                )
                status = (
                    SolveStatus.INFEASIBLE
                    if diverged and best_phi > 1e-5
                    else SolveStatus.NUMERICAL_FAILURE
                )
                break
            lam = W.lam(z)
            Gs = W.apply_matrix(G, inverse=True)
            lu, kkt_buf = self._kkt_factor(A, Gs, buf=kkt_buf)

            lam_lam = cones.product(lam, lam)

            # Predictor (affine) direction.
            q_a = cones.solve_product(lam, -lam_lam)
            bz = -rz - W.apply(q_a)
            dx_a, dy_a, dz_a = self._kkt_solve(lu, A, G, Gs, W, -rx, -ry, bz)
            Wdz_a = W.apply(dz_a)
            ds_a = W.apply(q_a - Wdz_a)

            alpha_a = min(
                1.0, cones.max_step(np.stack((s, z)), np.stack((ds_a, dz_a)))
            )
            mu_aff = ((s + alpha_a * ds_a) @ (z + alpha_a * dz_a)) / cones.degree
            sigma = max(0.0, min(1.0, mu_aff / mu)) ** 3

            # Corrector with Mehrotra second-order term.
            corr = cones.product(W.apply(ds_a, inverse=True), Wdz_a)
            q_c = cones.solve_product(lam, sigma * mu * e - lam_lam - corr)
            bz = -rz - W.apply(q_c)
            dx, dy, dz = self._kkt_solve(lu, A, G, Gs, W, -rx, -ry, bz)
            ds = W.apply(q_c - W.apply(dz))

            alpha = self.step_frac * cones.max_step(
                np.stack((s, z)), np.stack((ds, dz))
            )
            alpha = min(1.0, alpha)
            if alpha < 1e-13:
                x, y, s, z = best
                status = (
                    SolveStatus.OPTIMAL
                    if best_phi <= max(self.tol, 10.0 * self.feas_tol)
                    else SolveStatus.NUMERICAL_FAILURE
                )
                break

            x = x + alpha * dx
            y = y + alpha * dy
            s = s + alpha * ds
            z = z + alpha * dz

        if status == SolveStatus.MAX_ITER and best_phi <= max(
            self.tol, 10.0 * self.feas_tol
        ):
            x, y, s, z = best
            status = SolveStatus.OPTIMAL

        _, _, _, gap, rel_gap, pres, dres = metrics(x, y, s, z)
        return ConicSolution(
            primal=x.copy(),
            objective=float(c @ x),
            status=status,
            iterations=it,
            solve_time=time.perf_counter() - t_start,
            dual_eq=y.copy(),
            dual_cone=z.copy(),
            gap=float(gap),
            primal_residual=float(pres),
            dual_residual=float(dres),
        )


def solve(problem, tol: float = 1e-7) -> ConicSolution:
    """Solve one ConvexSubproblem to the given relative duality-gap tolerance."""
    return SocpSolver(tol=tol).solve(problem)

"""Stochastic horizontal wind profiles: steady shear plus two gust bands.

The wind seen by the parafoil is modelled per horizontal axis as the sum of
a power-law shear profile and two first-order shaped-noise gust components,
a low-frequency/high-amplitude one and a high-frequency/low-amplitude one.
Profiles are generated once on an altitude grid and then interpolated, so
the planner can consume wind as a known function of altitude.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .atmosphere import SpeedProfile, TimeAltitudeMap

DEFAULT_GRID_SPACING = 1.0  # m


@dataclass(frozen=True)
class DrydenParams:
    """Parameters of the shear + gust wind generator.

    w_ref/z_ref/shear_exponent define the steady power-law shear profile
    w_ss(z) = w_ref * (z / z_ref)**shear_exponent blowing toward heading_rad.
    Each gust band is an Ornstein-Uhlenbeck (first-order low-pass) process
    with stationary intensity sigma and break frequency V/L, V being the
    local airspeed magnitude.  x and y channels use independent seeds.
    """

    w_ref: float = 5.0
    z_ref: float = 10.0
    shear_exponent: float = 0.14
    sigma_LF: float = 2.0
    L_LF: float = 600.0
    sigma_HF: float = 0.5
    L_HF: float = 60.0
    seed_x: int = 1
    seed_y: int = 2
    heading_rad: float = 0.0

    def __post_init__(self):
        if self.sigma_LF < 0.0 or self.sigma_HF < 0.0:
            raise ValueError("gust intensities must be nonnegative")
        if self.L_LF <= 0.0 or self.L_HF <= 0.0:
            raise ValueError("gust length scales must be positive")
        if self.z_ref <= 0.0:
            raise ValueError("z_ref must be positive")


@dataclass(frozen=True)
class WindProfile:
    """Tabulated horizontal wind versus altitude, interpolated linearly."""

    grid: np.ndarray  # strictly increasing altitudes, m
    wx: np.ndarray  # m/s
    wy: np.ndarray  # m/s

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        wx = np.asarray(self.wx, dtype=float)
        wy = np.asarray(self.wy, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid must be a 1-D array with at least two nodes")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        if wx.shape != grid.shape or wy.shape != grid.shape:
            raise ValueError("wx/wy must match the grid shape")
        if not (np.all(np.isfinite(wx)) and np.all(np.isfinite(wy))):
            raise ValueError("wind values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "wx", wx)
        object.__setattr__(self, "wy", wy)

    @classmethod
    def zero(cls, z_lo: float = 0.0, z_hi: float = 5000.0) -> "WindProfile":
        grid = np.array([z_lo, z_hi])
        return cls(grid, np.zeros(2), np.zeros(2))

    @classmethod
    def constant(cls, wx: float, wy: float, z_lo: float = 0.0, z_hi: float = 5000.0):
        grid = np.array([z_lo, z_hi])
        return cls(grid, np.full(2, float(wx)), np.full(2, float(wy)))

    def wind_at(self, z) -> tuple:
        """(wx, wy) at altitude z by linear interpolation; clamps outside."""
        z_arr = np.asarray(z, dtype=float)
        if np.any(z_arr < self.grid[0]) or np.any(z_arr > self.grid[-1]):
            warnings.warn(
                "wind query outside profile grid; clamping to boundary value",
                stacklevel=2,
            )
        wx = np.interp(z_arr, self.grid, self.wx)
        wy = np.interp(z_arr, self.grid, self.wy)
        if np.isscalar(z) or z_arr.ndim == 0:
            return float(wx), float(wy)
        return wx, wy

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("z_m,wx_ms,wy_ms\n")
        for z, wx, wy in zip(self.grid, self.wx, self.wy):
            buf.write(f"{float(z)!r},{float(wx)!r},{float(wy)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "WindProfile":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].strip() != "z_m,wx_ms,wy_ms":
            raise ValueError("expected header 'z_m,wx_ms,wy_ms'")
        data = np.array(
            [[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float
        )
        return cls(data[:, 0], data[:, 1], data[:, 2])


def _gust_component(
    rng: np.random.Generator,
    sigma: float,
    length_scale: float,
    airspeeds: np.ndarray,
    dts: np.ndarray,
) -> np.ndarray:
    """One OU gust series over the (top-down) node sequence.

    Exact discretization of dy/dt = -(V/L) y + noise with stationary
    standard deviation sigma.  The noise draws are consumed regardless of
    sigma so components generated separately superpose exactly.
    """
    n = airspeeds.size
    draws = rng.standard_normal(n)
    out = np.empty(n)
    out[0] = sigma * draws[0]
    for k in range(1, n):
        tau = length_scale / airspeeds[k]
        a = math.exp(-dts[k - 1] / tau)
        out[k] = a * out[k - 1] + sigma * math.sqrt(1.0 - a * a) * draws[k]
    return out


def steady_shear(params: DrydenParams, z) -> np.ndarray:
    """Steady power-law shear wind magnitude at altitude z, m/s."""
    z_arr = np.maximum(np.asarray(z, dtype=float), 0.0)
    return params.w_ref * (z_arr / params.z_ref) ** params.shear_exponent


def generate_profile(
    params: DrydenParams,
    profile_speed: SpeedProfile,
    grid: np.ndarray,
) -> WindProfile:
    """Generate a wind profile on the given (increasing) altitude grid.

    Deterministic for fixed seeds.  The gust filters run top-down in the
    time order implied by the sink rate, so the sample spacing matches the
    descent through each altitude band.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be 1-D and strictly increasing")

    # Top-down ordering: the parafoil traverses high altitudes first.
    z_desc = grid[::-1]
    airspeeds = np.array([profile_speed.airspeed(z) for z in z_desc])
    sink = np.array([profile_speed.sink_rate(z) for z in z_desc])
    # Local traversal time of each band, from dt = dz / r at the band mean.
    dz = -np.diff(z_desc)
    r_mid = 0.5 * (sink[:-1] + sink[1:])
    dts = dz / r_mid

    mag = steady_shear(params, z_desc)
    ss_x = mag * math.cos(params.heading_rad)
    ss_y = mag * math.sin(params.heading_rad)

    def channel(seed, steady):
        rng_lf = np.random.default_rng([int(seed), 0])
        rng_hf = np.random.default_rng([int(seed), 1])
        lf = _gust_component(rng_lf, params.sigma_LF, params.L_LF, airspeeds, dts)
        hf = _gust_component(rng_hf, params.sigma_HF, params.L_HF, airspeeds, dts)
        return steady + lf + hf

    wx_desc = channel(params.seed_x, ss_x)
    wy_desc = channel(params.seed_y, ss_y)
    return WindProfile(grid, wx_desc[::-1].copy(), wy_desc[::-1].copy())


def default_grid(z_lo: float, z_hi: float, spacing: float = DEFAULT_GRID_SPACING):
    """Altitude grid covering [z_lo, z_hi] at roughly the given spacing."""
    n = max(2, int(round((z_hi - z_lo) / spacing)) + 1)
    return np.linspace(z_lo, z_hi, n)


_SIMPSON_PANELS = 8  # per wind-grid segment; >= the required 8 sub-points


def integrated_wind(
    profile: WindProfile,
    time_map: TimeAltitudeMap,
    t_a: float,
    t_b: float,
    panels_per_segment: int = _SIMPSON_PANELS,
) -> np.ndarray:
    """Wind displacement integral_[t_a, t_b] w(z(t)) dt, m (2-vector).

    Evaluated in altitude via dt = -dz / r(z), split exactly at the wind
    grid nodes so the piecewise-linear interpolant is smooth on every
    quadrature segment, then composite Simpson per segment.  This keeps the
    result additive over adjacent time intervals to machine precision.
    """
    tf = time_map.final_time
    if not (time_map.t0 - 1e-9 <= t_a <= t_b <= tf + 1e-9):
        raise ValueError(f"[{t_a}, {t_b}] outside [{time_map.t0}, {tf}]")
    if t_b == t_a:
        return np.zeros(2)

    z_hi = time_map.altitude_of_time(t_a)
    z_lo = time_map.altitude_of_time(t_b)
    interior = profile.grid[(profile.grid > z_lo) & (profile.grid < z_hi)]
    cuts = np.concatenate(([z_lo], interior, [z_hi]))

    sp = time_map.speed_profile
    atm = sp.atmosphere
    base0 = 1.0 - sp.z0 * atm.c_rho

    def inv_sink(z):
        # 1 / r(z) = ((1 - z c_rho)/(1 - z0 c_rho))**(c_e/2) / r0
        return ((1.0 - z * atm.c_rho) / base0) ** (atm.c_e / 2.0) / sp.r0

    m = panels_per_segment + (panels_per_segment % 2)
    # Simpson weights for m panels, shared by every segment.
    w_s = np.ones(m + 1)
    w_s[1:-1:2] = 4.0
    w_s[2:-1:2] = 2.0
    w_s /= 3.0

    total = np.zeros(2)
    frac = np.linspace(0.0, 1.0, m + 1)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        zs = lo + (hi - lo) * frac
        f = inv_sink(zs)
        wx = np.interp(zs, profile.grid, profile.wx) * f
        wy = np.interp(zs, profile.grid, profile.wy) * f
        h = (hi - lo) / m
        total += h * np.array([w_s @ wx, w_s @ wy])
    return total

"""Air density model, altitude-dependent speeds and the time/altitude map.

The descent rate of a gliding parafoil is tied to air density, so altitude
and elapsed time are related one-to-one.  This module provides the density
power law, the density-scaled horizontal/vertical speeds and the closed-form
time-of-altitude map (with its exact inverse) used everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Guard against 0**negative at the singular altitude 1/c_rho.
_DOMAIN_EPS = 1e-12


class AltitudeDomainError(ValueError):
    """Altitude (or time) outside the validity range of the density model."""


@dataclass(frozen=True)
class AtmosphereModel:
    """Power-law air density: rho(z) = c_h * (1 - z*c_rho)**c_e.

    c_h   -- density at sea level, kg/m^3
    c_rho -- inverse length scale, 1/m (0 selects a uniform atmosphere)
    c_e   -- dimensionless exponent
    """

    c_h: float = 1.225
    c_rho: float = 2.256e-5
    c_e: float = 4.2559

    def __post_init__(self):
        if self.c_h <= 0.0:
            raise ValueError(f"c_h must be positive, got {self.c_h}")
        if self.c_rho < 0.0:
            raise ValueError(f"c_rho must be nonnegative, got {self.c_rho}")
        if self.c_e <= 0.0:
            raise ValueError(f"c_e must be positive, got {self.c_e}")

    @property
    def max_altitude(self) -> float:
        """Upper edge of the model's validity range, m."""
        if self.c_rho == 0.0:
            return math.inf
        return 1.0 / self.c_rho

    def _base(self, z: float) -> float:
        base = 1.0 - z * self.c_rho
        if base <= _DOMAIN_EPS:
            raise AltitudeDomainError(
                f"altitude {z} m at or beyond model ceiling {self.max_altitude} m"
            )
        return base

    def density(self, z: float) -> float:
        """Air density at altitude z, kg/m^3."""
        return self.c_h * self._base(z) ** self.c_e


@dataclass(frozen=True)
class SpeedProfile:
    """Horizontal airspeed and sink rate scaled with density from a reference.

    Assuming lift balances weight along the descent, airspeed scales as
    sqrt(rho(z0)/rho(z)), so the glide ratio v/r is altitude independent.

    z0 -- reference altitude, m
    v0 -- horizontal airspeed at z0, m/s
    r0 -- sink rate at z0, m/s (positive down)
    """

    z0: float
    v0: float
    r0: float
    atmosphere: AtmosphereModel = AtmosphereModel()

    def __post_init__(self):
        if self.v0 <= 0.0 or self.r0 <= 0.0:
            raise ValueError("v0 and r0 must be positive")
        self.atmosphere.density(self.z0)  # validates z0

    def scale(self, z: float) -> float:
        """Common speed scaling sqrt(rho(z0)/rho(z))."""
        return math.sqrt(self.atmosphere.density(self.z0) / self.atmosphere.density(z))

    def speeds_at(self, z: float) -> tuple[float, float]:
        """(horizontal airspeed, sink rate) at altitude z, m/s."""
        s = self.scale(z)
        return self.v0 * s, self.r0 * s

    def horizontal_speed(self, z: float) -> float:
        return self.v0 * self.scale(z)

    def sink_rate(self, z: float) -> float:
        return self.r0 * self.scale(z)

    def airspeed(self, z: float) -> float:
        """Total airspeed magnitude sqrt(v^2 + r^2) at altitude z."""
        return math.hypot(self.v0, self.r0) * self.scale(z)

    @property
    def glide_ratio(self) -> float:
        return self.v0 / self.r0


@dataclass(frozen=True)
class TimeAltitudeMap:
    """Analytic change of variables between descent time and altitude.

    With sink rate r(z) known, t(z) = t0 + integral_z^z0 deta / r(eta) has a
    closed form, and so does its inverse z(t).  The final time t_f = t(z_f)
    is therefore fixed by the current density and sink-rate measurement.
    """

    speed_profile: SpeedProfile
    t0: float = 0.0
    z_f: float = 0.0

    def __post_init__(self):
        if self.z_f > self.speed_profile.z0:
            raise ValueError("z_f must not exceed the reference altitude z0")
        self.speed_profile.atmosphere.density(self.z_f)  # validates z_f

    # -- helpers -----------------------------------------------------------

    def _sqrt_rho_antiderivative(self, z: float) -> float:
        """Antiderivative of sqrt(rho(eta)) evaluated at z."""
        atm = self.speed_profile.atmosphere
        p = atm.c_e / 2.0 + 1.0
        base = 1.0 - z * atm.c_rho
        return -math.sqrt(atm.c_h) * base**p / (atm.c_rho * p)

    @property
    def _rate_norm(self) -> float:
        """r0 * sqrt(rho(z0)): converts sqrt-density integrals to time."""
        sp = self.speed_profile
        return sp.r0 * math.sqrt(sp.atmosphere.density(sp.z0))

    # -- public map --------------------------------------------------------

    def time_of_altitude(self, z: float) -> float:
        """Time at which the descent reaches altitude z, s."""
        sp = self.speed_profile
        if not (self.z_f - 1e-9 <= z <= sp.z0 + 1e-9):
            raise AltitudeDomainError(
                f"altitude {z} m outside descent range [{self.z_f}, {sp.z0}] m"
            )
        if sp.atmosphere.c_rho == 0.0:
            return self.t0 + (sp.z0 - z) / sp.r0
        num = self._sqrt_rho_antiderivative(sp.z0) - self._sqrt_rho_antiderivative(z)
        return self.t0 + num / self._rate_norm

    def altitude_of_time(self, t: float) -> float:
        """Exact functional inverse of time_of_altitude."""
        sp = self.speed_profile
        tf = self.final_time
        if not (self.t0 - 1e-9 <= t <= tf + 1e-9):
            raise AltitudeDomainError(f"time {t} s outside [{self.t0}, {tf}] s")
        atm = sp.atmosphere
        if atm.c_rho == 0.0:
            return sp.z0 - sp.r0 * (t - self.t0)
        p = atm.c_e / 2.0 + 1.0
        base0 = 1.0 - sp.z0 * atm.c_rho
        basep = base0**p + (t - self.t0) * self._rate_norm * atm.c_rho * p / math.sqrt(
            atm.c_h
        )
        return (1.0 - basep ** (1.0 / p)) / atm.c_rho

    @property
    def final_time(self) -> float:
        """Fixed landing time t_f = t(z_f), s."""
        sp = self.speed_profile
        if sp.atmosphere.c_rho == 0.0:
            return self.t0 + (sp.z0 - self.z_f) / sp.r0
        num = self._sqrt_rho_antiderivative(sp.z0) - self._sqrt_rho_antiderivative(
            self.z_f
        )
        return self.t0 + num / self._rate_norm

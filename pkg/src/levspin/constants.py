"""Physical constants (SI) and NV-centre parameters."""

import math

from scipy import constants as _c

HBAR = _c.hbar
MU_0 = _c.mu_0
G_ACCEL = 9.8  # m/s^2, value used throughout the levitation model

# Electron gyromagnetic ratio from g_e = 2 and mu_B = 14 MHz/mT.
G_ELECTRON = 2.0
MU_B_HZ_PER_T = 14e9
GAMMA_E = 2 * math.pi * G_ELECTRON * MU_B_HZ_PER_T  # rad s^-1 T^-1

# NV ground-state zero-field splitting.
D_ZFS = 2 * math.pi * 2.87e9  # rad/s

TWO_PI = 2 * math.pi


class AngularFrequency(float):
    """A rate in rad/s that also reports its value in Hz."""

    @property
    def hz(self) -> float:
        return float(self) / TWO_PI

    @classmethod
    def from_hz(cls, f: float) -> "AngularFrequency":
        return cls(TWO_PI * f)

    def __repr__(self) -> str:
        return f"AngularFrequency({float(self)!r} rad/s = {self.hz!r} Hz)"

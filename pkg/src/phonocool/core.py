"""Domain types, parameter validation, and unit conventions.

All rates and frequencies are angular (rad/s).  By convention the cavity
half-linewidth kappa2 is the natural unit: the CLI fixes kappa2 = 1 and
every other rate is a ratio to it, but the types below accept any
consistent unit system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class ParameterError(ValueError):
    """A physical parameter violates one of its invariants."""


def _require_finite(name: str, value) -> None:
    v = complex(value)
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise ParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Parameters of the two-phonon + cavity linear system.

    kappa2   cavity half-linewidth (full linewidth is 2*kappa2)
    delta    cavity detuning from the pump + mean phonon frequency
    omega    phonon half-splitting, (Omega_1 - Omega_2)/2
    gamma1, gamma2   phonon half-widths
    g1, g2   pump-enhanced couplings (complex)
    nbar1, nbar2     thermal occupancies; nbar2 defaults to nbar1
    """

    kappa2: float = 1.0
    delta: float = 0.0
    omega: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    g1: complex = 0j
    g2: complex = 0j
    nbar1: float = 0.0
    nbar2: float | None = None

    def __post_init__(self):
        # normalize field types; nbar2 falls back to nbar1 (two nearby
        # modes at the same ambient temperature)
        object.__setattr__(self, "kappa2", float(self.kappa2))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "gamma1", float(self.gamma1))
        object.__setattr__(self, "gamma2", float(self.gamma2))
        object.__setattr__(self, "g1", complex(self.g1))
        object.__setattr__(self, "g2", complex(self.g2))
        object.__setattr__(self, "nbar1", float(self.nbar1))
        nbar2 = self.nbar1 if self.nbar2 is None else self.nbar2
        object.__setattr__(self, "nbar2", float(nbar2))


def validate(params: SystemParams) -> SystemParams:
    """Check all SystemParams invariants; return the params unchanged.

    Raises ParameterError naming the first violated field.  Validation is
    idempotent and every downstream operation calls it, so an invalid
    parameter set cannot propagate into the numerics.
    """
    for name in ("kappa2", "delta", "omega", "gamma1", "gamma2",
                 "g1", "g2", "nbar1", "nbar2"):
        _require_finite(name, getattr(params, name))
    if not params.kappa2 > 0:
        raise ParameterError("kappa2 must be positive")
    if params.gamma1 < 0:
        raise ParameterError("gamma1 must be nonnegative")
    if params.gamma2 < 0:
        raise ParameterError("gamma2 must be nonnegative")
    if params.nbar1 < 0:
        raise ParameterError("nbar1 must be nonnegative")
    if params.nbar2 < 0:
        raise ParameterError("nbar2 must be nonnegative")
    return params


@dataclass(frozen=True)
class PhononModeSpec:
    """A single phonon mode: center frequency, half-width, occupancy."""

    center_frequency: float
    half_width: float
    occupancy: float

    def __post_init__(self):
        _require_finite("center_frequency", self.center_frequency)
        _require_finite("half_width", self.half_width)
        _require_finite("occupancy", self.occupancy)
        if not self.center_frequency > 0:
            raise ParameterError("center_frequency must be positive")
        if self.half_width < 0:
            raise ParameterError("half_width must be nonnegative")
        if self.occupancy < 0:
            raise ParameterError("occupancy must be nonnegative")


def system_from_modes(mode1: PhononModeSpec, mode2: PhononModeSpec,
                      kappa2: float = 1.0, delta: float = 0.0,
                      g1: complex = 0j, g2: complex = 0j) -> SystemParams:
    """Build SystemParams from two phonon mode specs.

    The rotating frame is centered on the mean phonon frequency, so only
    the half-splitting (Omega_1 - Omega_2)/2 enters the dynamics.
    """
    half_split = 0.5 * (mode1.center_frequency - mode2.center_frequency)
    return validate(SystemParams(
        kappa2=kappa2, delta=delta, omega=half_split,
        gamma1=mode1.half_width, gamma2=mode2.half_width,
        g1=g1, g2=g2,
        nbar1=mode1.occupancy, nbar2=mode2.occupancy,
    ))


@dataclass(frozen=True)
class ThreeWaveParams:
    """Parameters of the deterministic three-wave amplitude equations.

    kappa1, kappa2   optical half-widths of pump and anti-Stokes modes
    Gamma            phonon half-width
    Delta1, Delta2   cavity detunings of the two optical modes
    delta            three-wave frequency mismatch
    beta             complex coupling constant
    pump             dimensionless external drive amplitude
    """

    kappa1: float
    kappa2: float
    Gamma: float
    Delta1: float = 0.0
    Delta2: float = 0.0
    delta: float = 0.0
    beta: complex = 0j
    pump: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "pump", complex(self.pump))


def validate_three_wave(params: ThreeWaveParams) -> ThreeWaveParams:
    """Check ThreeWaveParams invariants; raises ParameterError on the first violation.

    Zero optical widths are allowed so the lossless (Manley-Rowe) regime
    is representable.
    """
    for name in ("kappa1", "kappa2", "Gamma", "Delta1", "Delta2",
                 "delta", "beta", "pump"):
        _require_finite(name, getattr(params, name))
    if params.kappa1 < 0:
        raise ParameterError("kappa1 must be nonnegative")
    if params.kappa2 < 0:
        raise ParameterError("kappa2 must be nonnegative")
    if params.Gamma < 0:
        raise ParameterError("Gamma must be nonnegative")
    return params


@dataclass(frozen=True)
class ThreeWaveState:
    """Instantaneous complex amplitudes (a1, a2, u) at time t."""

    a1: complex
    a2: complex
    u: complex
    t: float = 0.0

    def __post_init__(self):
        for name in ("a1", "a2", "u", "t"):
            _require_finite(name, getattr(self, name))

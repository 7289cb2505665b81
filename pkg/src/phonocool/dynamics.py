"""Deterministic dynamics: three-wave amplitude evolution, drift matrix of
the two-phonon + cavity system, adiabatic cavity elimination, and the
collective (super/sub-radiant) mode analysis."""
from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (SystemParams, ThreeWaveParams, ThreeWaveState,
                   validate, validate_three_wave)


class IntegrationError(RuntimeError):
    """The fixed-step integrator refused to run or produced non-finite values."""


# ---------------------------------------------------------------------------
# three-wave amplitude equations


@dataclass(frozen=True)
class Trajectory:
    """Sampled three-wave trajectory; behaves as a sequence of ThreeWaveState."""

    t: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    u: np.ndarray

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, i) -> ThreeWaveState:
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return ThreeWaveState(a1=self.a1[i], a2=self.a2[i], u=self.u[i],
                              t=float(self.t[i]))

    def save_csv(self, path, time_unit: str = "s") -> None:
        data = np.column_stack([
            self.t,
            self.a1.real, self.a1.imag,
            self.a2.real, self.a2.imag,
            self.u.real, self.u.imag,
        ])
        header = (f"time unit: {time_unit}; amplitudes dimensionless\n"
                  "t, Re(a1), Im(a1), Re(a2), Im(a2), Re(u), Im(u)")
        np.savetxt(path, data, fmt="%.17g", delimiter=",",
                   header=header, comments="# ")


def evolve_three_wave(params: ThreeWaveParams, init: ThreeWaveState,
                      t_end: float, dt: float) -> Trajectory:
    """Integrate the three-wave amplitude equations with fixed-step RK4.

    The equations, with explicit mismatch phases and the pump drive folded
    into the pump-mode damping term:

        da2/dt = -kappa2 a2 - i Delta2 a2 - i beta  u  a1 e^{+i delta t}
        da1/dt = -kappa1 (a1 - pump) - i Delta1 a1 - i beta* u* a2 e^{-i delta t}
        du/dt  = -Gamma  u - i beta* a1* a2 e^{-i delta t}

    A stability guard requires dt * max(rates) < 0.1, where the rate scale
    includes |beta| times the largest initial amplitude.
    """
    p = validate_three_wave(params)
    if not dt > 0:
        raise IntegrationError("dt must be positive")
    amp = max(abs(init.a1), abs(init.a2), abs(init.u), abs(p.pump))
    rate = max(p.kappa1, p.kappa2, p.Gamma, abs(p.Delta1), abs(p.Delta2),
               abs(p.delta), abs(p.beta) * amp)
    if dt * rate >= 0.1:
        raise IntegrationError(
            f"stability guard violated: dt*max(rates) = {dt * rate:.3g} >= 0.1")

    n_steps = int(round(t_end / dt))
    t = np.arange(n_steps + 1) * dt
    a1 = np.empty(n_steps + 1, dtype=complex)
    a2 = np.empty(n_steps + 1, dtype=complex)
    u = np.empty(n_steps + 1, dtype=complex)
    a1[0], a2[0], u[0] = init.a1, init.a2, init.u

    k1c, k2c, G = p.kappa1, p.kappa2, p.Gamma
    iD1, iD2 = 1j * p.Delta1, 1j * p.Delta2
    b, bc = p.beta, p.beta.conjugate()
    drive = k1c * p.pump
    delta = p.delta

    def rhs(ti, y1, y2, yu):
        ph = cmath.exp(1j * delta * ti)
        d2 = -k2c * y2 - iD2 * y2 - 1j * b * yu * y1 * ph
        d1 = -k1c * y1 + drive - iD1 * y1 - 1j * bc * yu.conjugate() * y2 / ph
        du = -G * yu - 1j * bc * y1.conjugate() * y2 / ph
        return d1, d2, du

    half = 0.5 * dt
    sixth = dt / 6.0
    y1, y2, yu = complex(init.a1), complex(init.a2), complex(init.u)
    for n in range(n_steps):
        tn = n * dt
        p1, p2, pu = rhs(tn, y1, y2, yu)
        q1, q2, qu = rhs(tn + half, y1 + half * p1, y2 + half * p2, yu + half * pu)
        r1, r2, ru = rhs(tn + half, y1 + half * q1, y2 + half * q2, yu + half * qu)
        s1, s2, su = rhs(tn + dt, y1 + dt * r1, y2 + dt * r2, yu + dt * ru)
        y1 += sixth * (p1 + 2 * q1 + 2 * r1 + s1)
        y2 += sixth * (p2 + 2 * q2 + 2 * r2 + s2)
        yu += sixth * (pu + 2 * qu + 2 * ru + su)
        a1[n + 1], a2[n + 1], u[n + 1] = y1, y2, yu
        if not (cmath.isfinite(y1) and cmath.isfinite(y2) and cmath.isfinite(yu)):
            raise IntegrationError(f"non-finite state at t = {tn + dt:.6g}")
    return Trajectory(t=t, a1=a1, a2=a2, u=u)


# ---------------------------------------------------------------------------
# linear system drift


@dataclass(frozen=True)
class DriftMatrix:
    """Drift of the linear (a2, b1, b2) system: d/dt x = m x + noise."""

    m: np.ndarray
    labels: tuple[str, str, str] = ("a2", "b1", "b2")

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex)
        object.__setattr__(self, "m", m)
        if m.shape != (3, 3):
            raise ValueError("drift matrix must be 3x3")


def drift_matrix(params: SystemParams) -> DriftMatrix:
    """Drift matrix of the two-phonon + cavity quantum Langevin system."""
    p = validate(params)
    m = np.array([
        [-1j * p.delta - p.kappa2, -1j * p.g1, -1j * p.g2],
        [-1j * np.conj(p.g1), -1j * p.omega - p.gamma1, 0.0],
        [-1j * np.conj(p.g2), 0.0, 1j * p.omega - p.gamma2],
    ], dtype=complex)
    return DriftMatrix(m=m)


# ---------------------------------------------------------------------------
# adiabatic elimination of the cavity


@dataclass(frozen=True)
class AdiabaticReduction:
    """Reduced (b1, b2) drift after eliminating the fast cavity mode.

    gamma_eff    optically broadened half-widths of the two modes
    omega_shift  optical frequency pulls (same sign convention for both)
    cross_coupling  cavity-mediated mode-mode coupling g1* g2/(kappa2 + i delta)
    guard_ok     whether kappa2 > 10 max(gamma1, gamma2) held
    """

    matrix: np.ndarray
    gamma_eff: tuple[float, float]
    omega_shift: tuple[float, float]
    cross_coupling: complex
    guard_ok: bool


def adiabatic_reduce(params: SystemParams) -> AdiabaticReduction:
    """Eliminate the cavity adiabatically, returning the 2x2 phonon drift.

    Valid for kappa2 >> gamma_i; outside that regime a warning is issued
    but the algebraic reduction is still returned.
    """
    p = validate(params)
    guard_ok = p.kappa2 > 10.0 * max(p.gamma1, p.gamma2)
    if not guard_ok:
        warnings.warn(
            "adiabatic elimination assumes kappa2 >> gamma_i; "
            f"kappa2 = {p.kappa2:g} vs max gamma = {max(p.gamma1, p.gamma2):g}",
            stacklevel=2)
    pole = p.kappa2 + 1j * p.delta
    bare = np.diag([-1j * p.omega - p.gamma1, 1j * p.omega - p.gamma2]).astype(complex)
    g = np.array([p.g1, p.g2])
    induced = np.outer(np.conj(g), g) / pole
    lor = p.kappa2**2 + p.delta**2
    gamma_eff = (p.gamma1 + abs(p.g1)**2 * p.kappa2 / lor,
                 p.gamma2 + abs(p.g2)**2 * p.kappa2 / lor)
    omega_shift = (-p.delta * abs(p.g1)**2 / lor,
                   -p.delta * abs(p.g2)**2 / lor)
    return AdiabaticReduction(
        matrix=bare - induced,
        gamma_eff=gamma_eff,
        omega_shift=omega_shift,
        cross_coupling=complex(np.conj(p.g1) * p.g2 / pole),
        guard_ok=guard_ok,
    )


@dataclass(frozen=True)
class CollectiveModes:
    """Eigenmodes of the reduced phonon drift, labeled against the
    symmetric/antisymmetric combinations (b1 +- b2)/sqrt(2).

    rate_plus / rate_minus are complex decay rates (minus the eigenvalues);
    labeling is "collective" when the overlap assignment is unambiguous,
    "decoupled" when the reduced drift is diagonal (labels fall back to the
    bare b1/b2 basis), and "degenerate" when the eigenvalues or overlaps
    tie and no labeling is meaningful.
    """

    rate_plus: complex
    rate_minus: complex
    vec_plus: np.ndarray
    vec_minus: np.ndarray
    labeling: str


def _fix_phase(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    ph = v[i] / abs(v[i]) if v[i] != 0 else 1.0
    return v / ph


def collective_rates(params: SystemParams, tol: float = 1e-9) -> CollectiveModes:
    """Diagonalize the adiabatically reduced drift and identify the
    super-radiant (+) and sub-radiant (-) collective modes."""
    red = adiabatic_reduce(params)
    m = red.matrix
    scale = max(np.abs(m).max(), 1e-300)

    if max(abs(m[0, 1]), abs(m[1, 0])) <= tol * scale:
        # no cavity-mediated coupling: report in the bare (b1, b2) basis
        return CollectiveModes(
            rate_plus=-m[0, 0], rate_minus=-m[1, 1],
            vec_plus=np.array([1.0, 0.0], dtype=complex),
            vec_minus=np.array([0.0, 1.0], dtype=complex),
            labeling="decoupled")

    w, v = np.linalg.eig(m)
    vecs = [_fix_phase(v[:, 0]), _fix_phase(v[:, 1])]
    if abs(w[0] - w[1]) <= tol * scale:
        return CollectiveModes(
            rate_plus=-w[0], rate_minus=-w[1],
            vec_plus=vecs[0], vec_minus=vecs[1],
            labeling="degenerate")

    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / np.sqrt(2.0)
    # score both assignments by total overlap with (b1 +- b2)/sqrt(2)
    s01 = abs(plus @ vecs[0]) + abs(minus @ vecs[1])
    s10 = abs(plus @ vecs[1]) + abs(minus @ vecs[0])
    if abs(s01 - s10) <= tol:
        return CollectiveModes(
            rate_plus=-w[0], rate_minus=-w[1],
            vec_plus=vecs[0], vec_minus=vecs[1],
            labeling="degenerate")
    ip, im_ = (0, 1) if s01 > s10 else (1, 0)
    return CollectiveModes(
        rate_plus=-w[ip], rate_minus=-w[im_],
        vec_plus=vecs[ip], vec_minus=vecs[im_],
        labeling="collective")

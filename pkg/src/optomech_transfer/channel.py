"""Closed-form (adiabatic) model of the photon-phonon-photon channel.

The upload and readout pulses act as beamsplitters between the optical
pulse and the mechanical mode, storage is a thermal loss on the mechanics,
and the imperfect cavity coupling is a pure loss applied twice.  The round
trip is then a phase-insensitive Gaussian channel

    Q_out = sqrt(T) Q_in + sqrt(1 - T) Q_N,    Q = X, Y

characterised by the total transmittance ``T`` and the variance ``VN`` of
the admixed noise mode.  Quadratures follow ``X = a + a^dag`` so the
vacuum variance is 1.

All rates are in units of the cavity decay rate kappa and all durations in
units of 1/kappa.  The functions accept scalars or numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError

__all__ = [
    "SystemParams",
    "PulseSchedule",
    "EffectiveChannel",
    "swap_transmittance",
    "storage_decay",
    "total_transmittance",
    "added_noise_variance",
    "negativity_threshold",
    "entanglement_threshold",
    "dVN_dT_fixed_T1",
    "dVN_dT_fixed_T2",
    "noise_vs_transmittance_curve",
    "adiabatic_channel",
]


@dataclass(frozen=True)
class SystemParams:
    """Rates and occupations of the optomechanical system (units of kappa).

    Attributes
    ----------
    kappa_e : float
        Decay rate into the waveguide; ``eta = kappa_e / kappa``.
    gamma : float
        Mechanical damping rate.
    omega_m : float
        Mechanical frequency.
    g0_sqrtN1, g0_sqrtN2 : float
        Enhanced coupling of the upload and readout pulse.
    n0 : float
        Initial thermal occupation of the mechanical mode.
    nth : float
        Occupation of the mechanical bath.
    kappa : float
        Total cavity decay rate, the unit of every other rate.
    """

    kappa_e: float
    gamma: float
    omega_m: float
    g0_sqrtN1: float
    g0_sqrtN2: float
    n0: float
    nth: float
    kappa: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError("kappa must be positive")
        if not 0 < self.kappa_e <= self.kappa:
            raise DomainError(f"need 0 < kappa_e <= kappa, got kappa_e={self.kappa_e}")
        if self.omega_m <= 0:
            raise DomainError("omega_m must be positive")
        for name in ("gamma", "g0_sqrtN1", "g0_sqrtN2", "n0", "nth"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")

    @property
    def eta(self) -> float:
        return self.kappa_e / self.kappa


@dataclass(frozen=True)
class PulseSchedule:
    """Durations of the upload pulse, the storage and the readout pulse."""

    tau1: float
    tau2: float
    tau_s: float

    def __post_init__(self):
        for name in ("tau1", "tau2", "tau_s"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")


@dataclass(frozen=True)
class EffectiveChannel:
    """Total transmittance and added-noise variance (shot-noise units)."""

    T: float
    VN: float


def _check_nonnegative(**kwargs):
    for name, value in kwargs.items():
        if np.any(np.asarray(value) < 0):
            raise DomainError(f"{name} must be non-negative")


def _check_unit_interval(**kwargs):
    for name, value in kwargs.items():
        v = np.asarray(value)
        if np.any((v < 0) | (v > 1)):
            raise DomainError(f"{name} must lie in [0, 1]")


def swap_transmittance(g, tau, kappa=1.0):
    """Transmittance ``1 - exp(-2 g^2 tau / kappa)`` of a pulsed state swap."""
    _check_nonnegative(g=g, tau=tau)
    g = np.asarray(g, dtype=float)
    return -np.expm1(-2.0 * g * g * np.asarray(tau, dtype=float) / kappa)


def storage_decay(gamma, tau_s):
    """Mechanical energy transmittance ``exp(-gamma tau_s)`` during storage."""
    _check_nonnegative(gamma=gamma, tau_s=tau_s)
    return np.exp(-np.asarray(gamma, dtype=float) * np.asarray(tau_s, dtype=float))


def total_transmittance(T1, T2, eta, delta):
    _check_unit_interval(T1=T1, T2=T2, eta=eta, delta=delta)
    return np.asarray(T1) * np.asarray(T2) * np.asarray(eta) ** 2 * np.asarray(delta)


def added_noise_variance(params: SystemParams, T1, T2, delta):
    """Variance of the noise mode admixed by the channel.

    Contributions are the residual initial mechanical state, the bath
    admixed during storage and vacuum from every optical loss.  The bath
    is ignored during the swap pulses.

    Raises
    ------
    SingularityError
        If the total transmittance reaches 1.
    """
    eta = params.eta
    T = total_transmittance(T1, T2, eta, delta)
    if np.any(T >= 1):
        raise SingularityError("added noise variance diverges at total transmittance 1")
    T1, T2, delta = (np.asarray(v, dtype=float) for v in (T1, T2, delta))
    thermal = 2 * params.n0 * delta * (1 - T1) + 2 * params.nth * (1 - delta)
    return 1 + T2 * eta / (1 - T) * thermal


def _check_threshold_arg(T):
    T = np.asarray(T, dtype=float)
    if np.any(T < 0):
        raise DomainError("transmittance must be non-negative")
    if np.any(T >= 1):
        raise DomainError("threshold is undefined for transmittance >= 1")
    return T


def negativity_threshold(T):
    """Largest added noise ``T / (1 - T)`` keeping W(0, 0) of |1> negative."""
    T = _check_threshold_arg(T)
    return T / (1 - T)


def entanglement_threshold(T):
    """Largest added noise ``2 T / (1 - T) + 1`` that preserves entanglement."""
    T = _check_threshold_arg(T)
    return 2 * T / (1 - T) + 1


def dVN_dT_fixed_T2(params: SystemParams, T1, T2, delta):
    """Analytic derivative of VN w.r.t. the total transmittance at fixed T2."""
    eta, n0, nth = params.eta, params.n0, params.nth
    T = total_transmittance(T1, T2, eta, delta)
    denom = (1 - T) ** 2
    return (-2 * n0 * (1 - delta * eta**2 * T2) / (eta * denom)
            + 2 * nth * (1 - delta) * eta * T2 / denom)


def dVN_dT_fixed_T1(params: SystemParams, T1, T2, delta):
    """Analytic derivative of VN w.r.t. the total transmittance at fixed T1."""
    eta, n0, nth = params.eta, params.n0, params.nth
    T = total_transmittance(T1, T2, eta, delta)
    denom = eta * (1 - T) ** 2 * T1
    return 2 * n0 * (1 - T1) / denom + 2 * nth * (1 - delta) / (delta * denom)


_SWEEPS = ("T1_fixed", "T2_fixed", "T1_eq_T2")


def noise_vs_transmittance_curve(params: SystemParams, sweep: str, fixed_value=None,
                                 n_points: int = 101, delta=1.0, upper=1.0):
    """Trace VN against the total transmittance along one line family.

    Parameters
    ----------
    sweep : {"T1_fixed", "T2_fixed", "T1_eq_T2"}
        Which swap transmittance stays constant.  The other one (or both,
        for ``"T1_eq_T2"``) runs over ``[0, upper)``.
    fixed_value : float
        The constant transmittance; ignored for ``"T1_eq_T2"``.
    n_points : int
        Number of samples, at least 2.
    delta : float
        Storage decay.
    upper : float
        Exclusive upper end of the swept transmittance.

    Returns
    -------
    T, VN : ndarray
        Samples ordered by the swept transmittance.
    """
    if sweep not in _SWEEPS:
        raise DomainError(f"sweep must be one of {_SWEEPS}, got {sweep!r}")
    if n_points < 2:
        raise DomainError("n_points must be at least 2")
    if not 0 < upper <= 1:
        raise DomainError("upper must lie in (0, 1]")
    s = np.linspace(0.0, upper, n_points, endpoint=False)
    if sweep == "T1_eq_T2":
        T1 = T2 = s
    else:
        if fixed_value is None:
            raise DomainError(f"sweep {sweep!r} needs a fixed_value")
        _check_unit_interval(fixed_value=fixed_value)
        fixed = np.full_like(s, fixed_value)
        T1, T2 = (fixed, s) if sweep == "T1_fixed" else (s, fixed)
    T = total_transmittance(T1, T2, params.eta, delta)
    return T, added_noise_variance(params, T1, T2, delta)


def adiabatic_channel(params: SystemParams, schedule: PulseSchedule) -> EffectiveChannel:
    """Compose the closed forms for one pulse schedule."""
    T1 = swap_transmittance(params.g0_sqrtN1, schedule.tau1, params.kappa)
    T2 = swap_transmittance(params.g0_sqrtN2, schedule.tau2, params.kappa)
    delta = storage_decay(params.gamma, schedule.tau_s)
    T = total_transmittance(T1, T2, params.eta, delta)
    return EffectiveChannel(float(T), float(added_noise_variance(params, T1, T2, delta)))

"""Recovered single-photon state, its Wigner function and nonclassicality tests.

A single photon passing the effective channel ``(T, VN)`` is equivalent to
pure loss ``T`` followed by random Gaussian displacements with mean photon
number ``n_add = (1 - T)(VN - 1)/2``.  The output is diagonal in the Fock
basis, and its photon-number distribution has a closed form in terms of
``q = n_add / (1 + n_add)``::

    thermal:            p0_k = (1 - q) q^k
    displaced |1>:      p1_k = q^k (k (1 - q)^2 + q^2) / n_add
    output:             p_k  = T p1_k + (1 - T) p0_k
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import DomainError, TruncationError

__all__ = [
    "GaussianChannelSpec",
    "FockState",
    "WignerGrid",
    "NonGaussBoundaryPoint",
    "NonGaussVerdict",
    "apply_channel_single_photon",
    "photon_number_distribution",
    "wigner_of_state",
    "wigner_at_origin",
    "negativity_preserved",
    "nongauss_boundary",
    "p1G_of_p0",
    "nongauss_certified",
    "fock_triple",
]

TAIL_TOL = 1e-10
DEFAULT_DIM = 60


@dataclass(frozen=True)
class GaussianChannelSpec:
    """Virtual beamsplitter of transmittance ``T`` admixing noise ``VN``."""

    T: float
    VN: float

    def __post_init__(self):
        if not 0 <= self.T <= 1:
            raise DomainError(f"T must lie in [0, 1], got {self.T}")
        if not self.VN >= 1:
            raise DomainError(f"VN must be at least the vacuum variance 1, got {self.VN}")

    @property
    def added_photons(self) -> float:
        return (1 - self.T) * (self.VN - 1) / 2


@dataclass(frozen=True)
class FockState:
    """Truncated density matrix with the probability lost beyond ``dim``."""

    rho: np.ndarray
    tail: float = 0.0

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.rho))

    @classmethod
    def fock(cls, n, dim=DEFAULT_DIM):
        rho = np.zeros((dim, dim))
        rho[n, n] = 1.0
        return cls(rho)

    @classmethod
    def from_probabilities(cls, probs, tail=0.0):
        return cls(np.diag(np.asarray(probs, dtype=float)), tail)


@dataclass(frozen=True)
class WignerGrid:
    """Wigner function samples, ``values[i, j] = W(x_axis[j], y_axis[i])``.

    Normalised so that the vacuum reads ``exp(-(x^2 + y^2)/2) / 2 pi``.
    """

    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray

    def integral(self) -> float:
        dx = self.x_axis[1] - self.x_axis[0]
        dy = self.y_axis[1] - self.y_axis[0]
        return float(self.values.sum() * dx * dy)


@dataclass(frozen=True)
class NonGaussBoundaryPoint:
    r: float
    p0: float
    p1G: float


@dataclass(frozen=True)
class NonGaussVerdict:
    certified: bool
    margin: float
    p0: float
    p1: float
    p1G: float


def _tail_mass(T, n, dim):
    if n == 0:
        return 0.0 if dim >= 2 else T
    q = n / (1 + n)
    qd = q**dim
    return T * qd * (dim / (n * (1 + n)) + 1) + (1 - T) * qd


def photon_number_distribution(spec: GaussianChannelSpec, dim: int) -> np.ndarray:
    """Photon-number probabilities ``p_0 .. p_{dim-1}`` of the channel output."""
    T, n = spec.T, spec.added_photons
    k = np.arange(dim, dtype=float)
    if n == 0:
        p = np.zeros(dim)
        p[0] = 1 - T
        if dim > 1:
            p[1] = T
        return p
    q = n / (1 + n)
    qk = q**k
    thermal = (1 - q) * qk
    photon = qk * (k * (1 - q) ** 2 + q * q) / n
    return T * photon + (1 - T) * thermal


def apply_channel_single_photon(spec: GaussianChannelSpec, dim: int | None = None) -> FockState:
    """Output state of ``|1>`` sent through the channel.

    With ``dim=None`` the truncation starts at 60 and grows until the lost
    probability is below 1e-10.  An explicit ``dim`` that is too small
    raises :class:`TruncationError` carrying a suggested dimension.
    """
    n = spec.added_photons
    if dim is None:
        dim = DEFAULT_DIM
        while _tail_mass(spec.T, n, dim) >= TAIL_TOL:
            dim += 20
    else:
        if dim < 2:
            raise DomainError("dim must be at least 2")
        if _tail_mass(spec.T, n, dim) >= TAIL_TOL:
            need = dim
            while _tail_mass(spec.T, n, need) >= TAIL_TOL:
                need += 10
            raise TruncationError(
                f"dim={dim} leaves a tail above {TAIL_TOL}; use dim >= {need}", need)
    return FockState.from_probabilities(photon_number_distribution(spec, dim),
                                        _tail_mass(spec.T, n, dim))


def _weighted_laguerre_sum(coeffs, x):
    """``sum_k c_k exp(-x/2) L_k(x)`` via the scaled three-term recurrence.

    The scaled functions stay bounded by 1 for ``x >= 0``, so nothing
    overflows for large radii.
    """
    prev = np.exp(-x / 2)
    total = coeffs[0] * prev
    if len(coeffs) == 1:
        return total
    cur = (1 - x) * prev
    total = total + coeffs[1] * cur
    for k in range(1, len(coeffs) - 1):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
        total = total + coeffs[k + 1] * cur
    return total


def wigner_of_state(state: FockState, extent: float = 6.0, n_points: int = 201,
                    x_axis=None, y_axis=None) -> WignerGrid:
    """Wigner function of a Fock-diagonal state on a square grid.

    Uses ``W_k(x, y) = (-1)^k exp(-r^2/2) L_k(r^2) / 2 pi``.  The grid is
    ``[-extent, extent]^2`` with ``n_points`` per axis unless explicit axes
    are given.  A warning is issued when the grid does not capture the
    full normalisation.
    """
    off = state.rho - np.diag(np.diag(state.rho))
    if np.abs(off).max(initial=0.0) > 1e-12:
        raise DomainError("only Fock-diagonal (phase-insensitive) states are supported")
    if x_axis is None:
        x_axis = np.linspace(-extent, extent, n_points)
    if y_axis is None:
        y_axis = x_axis
    x_axis = np.asarray(x_axis, dtype=float)
    y_axis = np.asarray(y_axis, dtype=float)
    X, Y = np.meshgrid(x_axis, y_axis)
    p = state.diagonal
    coeffs = p * (-1.0) ** np.arange(len(p))
    values = _weighted_laguerre_sum(coeffs, X**2 + Y**2) / (2 * np.pi)
    grid = WignerGrid(x_axis, y_axis, values)
    if len(x_axis) > 1 and len(y_axis) > 1:
        norm = grid.integral()
        if abs(norm - (1 - state.tail)) > 1e-3:
            warnings.warn(f"Wigner grid integrates to {norm:.6f}; enlarge the grid",
                          RuntimeWarning, stacklevel=2)
    return grid


def wigner_at_origin(state: FockState) -> float:
    p = state.diagonal
    return float(np.sum(p * (-1.0) ** np.arange(len(p))) / (2 * np.pi))


def negativity_preserved(spec: GaussianChannelSpec) -> bool:
    """Whether W(0, 0) of the transmitted photon stays negative."""
    if spec.T >= 1:
        raise DomainError("negativity test needs T < 1")
    return spec.VN < spec.T / (1 - spec.T)


def _boundary(r):
    r = np.asarray(r, dtype=float)
    decay = np.exp(-np.exp(r) * np.sinh(r))
    cosh = np.cosh(r)
    with np.errstate(over="ignore", invalid="ignore"):
        p1G = np.where(decay > 0, np.expm1(4 * r) / 4 * decay / cosh**3, 0.0)
    return decay / cosh, p1G


def nongauss_boundary(r):
    """Point ``(p0(r), p1G(r))`` on the Gaussian-mixture boundary.

    Accepts an array of ``r`` as well and then returns the two arrays
    ``(p0, p1G)``.
    """
    if np.any(np.asarray(r) < 0):
        raise DomainError("boundary parameter r must be non-negative")
    p0, p1G = _boundary(r)
    if np.ndim(r) == 0:
        return NonGaussBoundaryPoint(float(r), float(p0), float(p1G))
    return p0, p1G


def p1G_of_p0(p0: float) -> float:
    """Largest single-photon probability of a Gaussian mixture with vacuum ``p0``."""
    if not 0 < p0 <= 1:
        raise DomainError(f"p0 must lie in (0, 1], got {p0}")
    if p0 == 1:
        return 0.0
    r = bisect(lambda r: _boundary(r)[0] - p0, 0.0, 30.0, xtol=1e-12)
    return float(_boundary(r)[1])


def nongauss_certified(state: FockState) -> NonGaussVerdict:
    p0, p1 = state.diagonal[:2]
    # boundary tends to 0 as p0 -> 0
    p1G = p1G_of_p0(p0) if p0 > 0 else 0.0
    margin = p1 - p1G
    return NonGaussVerdict(bool(margin > 0), float(margin), float(p0), float(p1), p1G)


def fock_triple(state: FockState):
    """``(p0, p1, p2plus)`` with the truncation deficit counted in ``p2plus``."""
    p0, p1 = (float(v) for v in state.diagonal[:2])
    return p0, p1, 1.0 - p0 - p1

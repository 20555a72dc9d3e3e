"""Time-domain moment propagation of the linearised optomechanical dynamics.

The cavity field ``a_c`` and mechanical mode ``a_m`` obey (rotating frame,
red-detuned pump, rates in units of kappa)::

    da_c/dt = -kappa a_c - g a_m + r g a_m^dag e^{2i w_m t}
              + sqrt(2 kappa_e) a_in + sqrt(2 (kappa - kappa_e)) a_vac
    da_m/dt = -gamma/2 a_m + g a_c + r g a_c^dag e^{2i w_m t} + sqrt(gamma) a_th

with ``r = 0`` under the rotating-wave approximation and ``r = 1`` for the
full dynamics.  The output field is ``a_out = -a_in + sqrt(2 kappa_e) a_c``.

Two accumulator modes ``B_in(t) = int f_in a_in`` and ``B_out(t) = int
f_out a_out`` are propagated along with the system, so that after the last
pulse they equal the input and output temporal modes.  The state carried
through the integration is the Hermitian matrix ``H = V + i Omega`` of
symmetrised covariances ``V`` and commutators ``Omega = [z, z^T] / 2i`` for
``z = (X_c, Y_c, X_m, Y_m, X_in, Y_in, X_out, Y_out)``.  Propagating
``Omega`` explicitly keeps ``H >= 0`` a genuine physicality test even while
the accumulators are only partially filled.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .channel import PulseSchedule, SystemParams
from .errors import ConfigurationError, DomainError

__all__ = [
    "PulseStage",
    "TemporalMode",
    "MomentState",
    "ExtractedChannel",
    "adiabatic_envelopes",
    "schedule_stages",
    "storage_evolution",
    "propagate",
    "propagate_rwa",
    "propagate_full",
    "default_dt",
    "matched_modes",
]

NORM_TOL = 1e-8
_N = 8  # phase-space dimension of (cavity, mechanics, B_in, B_out)


@dataclass(frozen=True)
class PulseStage:
    stage_kind: str
    duration: float
    coupling: float

    def __post_init__(self):
        if self.stage_kind not in ("upload", "storage", "readout"):
            raise DomainError(f"unknown stage kind {self.stage_kind!r}")
        if self.duration < 0 or self.coupling < 0:
            raise DomainError("duration and coupling must be non-negative")
        if self.stage_kind == "storage" and self.coupling != 0:
            raise DomainError("the pump is off during storage")


def schedule_stages(params: SystemParams, schedule: PulseSchedule) -> list[PulseStage]:
    return [
        PulseStage("upload", schedule.tau1, params.g0_sqrtN1),
        PulseStage("storage", schedule.tau_s, 0.0),
        PulseStage("readout", schedule.tau2, params.g0_sqrtN2),
    ]


@dataclass(frozen=True)
class TemporalMode:
    """Normalised real envelope on ``[0, duration]``.

    The envelope is ``Re sum_k c_k exp(r_k (t - t_ref))`` with complex
    amplitudes ``c_k`` and rates ``r_k``.  Build modes with
    :meth:`exponential` (the adiabatic shapes) or :func:`matched_modes`.

    Attributes
    ----------
    rate_G : float or None
        Swap rate ``G`` of an exponential mode, None otherwise.
    """

    duration: float
    amplitudes: tuple
    rates: tuple
    t_ref: float = 0.0
    rate_G: float | None = None

    def __post_init__(self):
        if self.duration <= 0:
            raise DomainError("temporal mode needs a positive duration")
        if not 1 <= len(self.amplitudes) == len(self.rates) <= 2:
            raise DomainError("a temporal mode holds one or two exponential terms")

    @classmethod
    def exponential(cls, duration, G, rising=True):
        """``exp(G t)`` (rising) or ``exp(-G t)`` (falling), normalised."""
        if G < 0:
            raise DomainError("rate_G must be non-negative")
        if G == 0:
            return cls(duration, (1 / math.sqrt(duration),), (0.0,), 0.0, 0.0)
        c = math.sqrt(-2 * G / math.expm1(-2 * G * duration))
        if rising:
            return cls(duration, (c,), (G,), duration, G)
        return cls(duration, (c,), (-G,), 0.0, G)

    @property
    def normalization(self) -> float:
        """Prefactor of the bare exponential of an exponential mode.

        This is ``sqrt(2G / (exp(2G tau) - 1))`` for a rising mode and
        ``sqrt(2G / (1 - exp(-2G tau)))`` for a falling one.
        """
        G, tau = self.rate_G, self.duration
        if G is None:
            raise AttributeError("only exponential modes carry a closed-form prefactor")
        if G == 0:
            return 1 / math.sqrt(tau)
        if self.rates[0].real > 0:
            return math.sqrt(2 * G / math.expm1(2 * G * tau))
        return math.sqrt(-2 * G / math.expm1(-2 * G * tau))

    def packed(self, offset=0.0) -> np.ndarray:
        """Kernel representation, with the time origin shifted by ``offset``."""
        c = list(self.amplitudes) + [0.0] * (2 - len(self.amplitudes))
        r = list(self.rates) + [0.0] * (2 - len(self.rates))
        return np.array([complex(c[0]), complex(r[0]), complex(c[1]), complex(r[1]),
                         self.t_ref + offset])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = np.clip(t, 0, self.duration) - self.t_ref
        f = sum(c * np.exp(r * u) for c, r in zip(self.amplitudes, self.rates))
        inside = (t >= 0) & (t <= self.duration)
        return np.where(inside, np.real(f), 0.0)

    def norm(self) -> float:
        """Numerical ``int |f|^2 dt`` by composite Gauss-Legendre quadrature."""
        fastest = max(abs(complex(r)) for r in self.rates)
        panels = max(1, math.ceil(self.duration * fastest / 4))
        nodes, weights = np.polynomial.legendre.leggauss(40)
        edges = np.linspace(0, self.duration, panels + 1)
        half = 0.5 * np.diff(edges)[:, None]
        t = edges[:-1, None] + half * (nodes + 1)
        return float(np.sum(half * weights * self(t) ** 2))


def _normalised(duration, amplitudes, rates, t_ref):
    # closed-form int f^2 for a real f = sum c_k exp(r_k u)
    u_a, u_b = -t_ref, duration - t_ref
    total = 0.0
    for cj, rj in zip(amplitudes, rates):
        for ck, rk in zip(amplitudes, rates):
            s = rj + rk
            if abs(s) * duration < 1e-12:
                integral = duration
            else:
                integral = (np.exp(s * u_b) - np.exp(s * u_a)) / s
            total += cj * ck * integral
    scale = 1 / math.sqrt(abs(total.real))
    return TemporalMode(duration, tuple(complex(c) * scale for c in amplitudes),
                        tuple(complex(r) for r in rates), t_ref)


def adiabatic_envelopes(G1, G2, tau1, tau2) -> tuple[TemporalMode, TemporalMode]:
    """Input and output modes of the adiabatic swap, ``exp(G1 t)`` and ``exp(-G2 t)``.

    ``G_i = g_i^2 / kappa`` is the effective swap rate of pulse ``i``.
    """
    if G1 <= 0 or G2 <= 0:
        raise DomainError("adiabatic envelopes need positive rates")
    return (TemporalMode.exponential(tau1, G1, rising=True),
            TemporalMode.exponential(tau2, G2, rising=False))


@dataclass(frozen=True)
class MomentState:
    """First and second moments of ``(cavity, mechanics, B_in, B_out)``.

    ``cov`` is the symmetrised covariance in shot-noise units and ``comm``
    the commutator matrix ``[z_i, z_j] / 2i``.
    """

    mean: np.ndarray
    cov: np.ndarray
    comm: np.ndarray

    def physicality(self) -> float:
        """Smallest eigenvalue of ``cov + i comm`` (non-negative if physical)."""
        return float(np.linalg.eigvalsh(self.cov + 1j * self.comm).min())


@dataclass(frozen=True)
class ExtractedChannel:
    """Effective channel read off the accumulated temporal modes.

    Attributes
    ----------
    T_full : float
        Mean squared singular value of the 2x2 input-to-output quadrature
        transfer matrix.
    VN_full : float
        Added-noise variance, averaged over X and Y.  NaN when
        ``1 - T_full`` is below 1e-12 (``singular`` is then set).
    xy_asymmetry : float
        ``|Var X_N - Var Y_N|``.
    transfer : ndarray
        The 2x2 transfer matrix.
    output_mean : ndarray
        Quadrature means of the output mode.
    min_physicality : float
        Smallest eigenvalue of ``cov + i comm`` over all steps, or NaN if
        not monitored.
    """

    T_full: float
    VN_full: float
    xy_asymmetry: float
    transfer: np.ndarray = field(repr=False)
    output_mean: np.ndarray = field(repr=False)
    final_state: MomentState = field(repr=False)
    min_physicality: float = float("nan")
    singular: bool = False


def storage_evolution(mech_cov_in, gamma, tau_s, nth):
    """Mechanical covariance after free thermalisation for ``tau_s``."""
    if gamma < 0 or tau_s < 0 or nth < 0:
        raise DomainError("gamma, tau_s and nth must be non-negative")
    delta = math.exp(-gamma * tau_s)
    cov = np.asarray(mech_cov_in, dtype=float)
    return delta * cov + (1 - delta) * (2 * nth + 1) * np.eye(cov.shape[0])


# -- integration kernel -----------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _envelope(t, env):
    u = t - env[4].real
    return (env[0] * cmath.exp(env[1] * u) + env[2] * cmath.exp(env[3] * u)).real


@numba.njit(cache=True, nogil=True)
def _rhs(H, m, t, g, rapid, wm, kap, kap_e, gam, nth, fin, fout, mu, A, Q, dH, dm):
    phi = 2.0 * wm * t
    cr = rapid * math.cos(phi)
    sr = rapid * math.sin(phi)
    A[:, :] = 0.0
    A[0, 0] = -kap
    A[1, 1] = -kap
    A[0, 2] = -g + g * cr
    A[0, 3] = g * sr
    A[1, 2] = g * sr
    A[1, 3] = -g - g * cr
    A[2, 2] = -0.5 * gam
    A[3, 3] = -0.5 * gam
    A[2, 0] = g + g * cr
    A[2, 1] = g * sr
    A[3, 0] = g * sr
    A[3, 1] = g - g * cr
    s_e = math.sqrt(2.0 * kap_e)
    A[6, 0] = fout * s_e
    A[7, 1] = fout * s_e

    # noise gains of the a_in, a_vac, a_th quadrature pairs (diagonal blocks)
    k_in0 = s_e          # cavity
    k_in2 = fin          # B_in
    k_in3 = -fout        # B_out
    k_vac = math.sqrt(2.0 * (kap - kap_e))
    k_th = math.sqrt(gam)
    vth = 2.0 * nth + 1.0

    # Q = K N K^T with N = [[v, i], [-i, v]] per noise pair
    Q[:, :] = 0.0
    rows_in = (0, 4, 6)
    gains_in = (k_in0, k_in2, k_in3)
    for a in range(3):
        for b in range(3):
            w = gains_in[a] * gains_in[b]
            i0 = rows_in[a]
            j0 = rows_in[b]
            Q[i0, j0] += w
            Q[i0 + 1, j0 + 1] += w
            Q[i0, j0 + 1] += 1j * w
            Q[i0 + 1, j0] -= 1j * w
    w = k_vac * k_vac
    Q[0, 0] += w
    Q[1, 1] += w
    Q[0, 1] += 1j * w
    Q[1, 0] -= 1j * w
    w = k_th * k_th
    Q[2, 2] += w * vth
    Q[3, 3] += w * vth
    Q[2, 3] += 1j * w
    Q[3, 2] -= 1j * w

    # P = A H, only the first four columns of A are populated
    for i in range(_N):
        for j in range(_N):
            acc = 0.0j
            for k in range(4):
                acc += A[i, k] * H[k, j]
            dH[i, j] = acc
    for i in range(_N):
        for j in range(i, _N):
            v = dH[i, j] + dH[j, i].conjugate() + Q[i, j]
            dH[i, j] = v
            dH[j, i] = v.conjugate()

    for i in range(_N):
        acc = 0.0
        for k in range(4):
            acc += A[i, k] * m[k]
        dm[i] = acc
    dm[0] += s_e * fin * mu[0]
    dm[1] += s_e * fin * mu[1]
    dm[4] += fin * mu[0]
    dm[5] += fin * mu[1]


@numba.njit(cache=True, nogil=True)
def _integrate(H, m, stages, env_in, env_out, rapid, wm, kap, kap_e, gam, nth, mu, check):
    A = np.zeros((_N, _N))
    Q = np.zeros((_N, _N), dtype=np.complex128)
    k1 = np.zeros((_N, _N), dtype=np.complex128)
    k2 = np.zeros_like(k1)
    k3 = np.zeros_like(k1)
    k4 = np.zeros_like(k1)
    tmp = np.zeros_like(k1)
    l1 = np.zeros(_N)
    l2 = np.zeros(_N)
    l3 = np.zeros(_N)
    l4 = np.zeros(_N)
    mtmp = np.zeros(_N)
    min_eig = np.inf
    if check:
        min_eig = np.linalg.eigvalsh(H)[0]
    for s in range(stages.shape[0]):
        t0 = stages[s, 0]
        h = stages[s, 1]
        n = int(stages[s, 2])
        g = stages[s, 3]
        fin_on = stages[s, 4] > 0.0
        fout_on = stages[s, 5] > 0.0
        for step in range(n):
            t = t0 + step * h
            ta = t
            tb = t + 0.5 * h
            tc = t + h
            fa = fb = fc = 0.0
            oa = ob = oc = 0.0
            if fin_on:
                fa = _envelope(ta, env_in)
                fb = _envelope(tb, env_in)
                fc = _envelope(tc, env_in)
            if fout_on:
                oa = _envelope(ta, env_out)
                ob = _envelope(tb, env_out)
                oc = _envelope(tc, env_out)
            _rhs(H, m, ta, g, rapid, wm, kap, kap_e, gam, nth, fa, oa, mu, A, Q, k1, l1)
            for i in range(_N):
                mtmp[i] = m[i] + 0.5 * h * l1[i]
                for j in range(_N):
                    tmp[i, j] = H[i, j] + 0.5 * h * k1[i, j]
            _rhs(tmp, mtmp, tb, g, rapid, wm, kap, kap_e, gam, nth, fb, ob, mu, A, Q, k2, l2)
            for i in range(_N):
                mtmp[i] = m[i] + 0.5 * h * l2[i]
                for j in range(_N):
                    tmp[i, j] = H[i, j] + 0.5 * h * k2[i, j]
            _rhs(tmp, mtmp, tb, g, rapid, wm, kap, kap_e, gam, nth, fb, ob, mu, A, Q, k3, l3)
            for i in range(_N):
                mtmp[i] = m[i] + h * l3[i]
                for j in range(_N):
                    tmp[i, j] = H[i, j] + h * k3[i, j]
            _rhs(tmp, mtmp, tc, g, rapid, wm, kap, kap_e, gam, nth, fc, oc, mu, A, Q, k4, l4)
            for i in range(_N):
                m[i] += h / 6.0 * (l1[i] + 2.0 * l2[i] + 2.0 * l3[i] + l4[i])
                for j in range(_N):
                    H[i, j] += h / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
            if check:
                e = np.linalg.eigvalsh(H)[0]
                if e < min_eig:
                    min_eig = e
    return min_eig


# -- driver -----------------------------------------------------------------

def default_dt(params: SystemParams, rapid: bool) -> float:
    """0.01/kappa under RWA; additionally 0.02/omega_m with rapid terms."""
    dt = 0.01 / params.kappa
    if rapid:
        dt = min(dt, 0.02 / params.omega_m)
    return dt


def _check_dt(params, dt, rapid):
    fastest = params.kappa
    if rapid:
        fastest = max(fastest, 2 * params.omega_m)
    if not dt > 0 or dt * fastest > 0.1:
        raise ConfigurationError(
            f"step dt={dt} does not resolve the fastest rate {fastest} (need dt*rate <= 0.1)")


def _check_mode(mode: TemporalMode, duration: float, label: str):
    if abs(mode.duration - duration) > 1e-12 * max(1.0, duration):
        raise DomainError(f"{label} mode spans {mode.duration}, stage lasts {duration}")
    if abs(mode.norm() - 1) > NORM_TOL:
        raise DomainError(f"{label} mode is not normalised")


def _initial_state(params):
    H = np.zeros((_N, _N), dtype=np.complex128)
    J = np.array([[1.0, 1j], [-1j, 1.0]])
    H[0:2, 0:2] = J
    H[2:4, 2:4] = J + 2 * params.n0 * np.eye(2)
    return H


def propagate(params: SystemParams, schedule: PulseSchedule, input_mode: TemporalMode,
              output_mode: TemporalMode, *, rapid: bool, dt: float | None = None,
              alpha: complex = 0.0, check_physical: bool = False) -> ExtractedChannel:
    """Integrate the moment equations over upload, storage and readout.

    Parameters
    ----------
    rapid : bool
        Keep the terms oscillating at ``2 omega_m``.
    dt : float, optional
        Nominal step; each stage uses the largest step not exceeding it
        that divides the stage evenly.  Defaults to :func:`default_dt`.
    alpha : complex
        Coherent amplitude carried by the input temporal mode.  Only the
        means depend on it.
    check_physical : bool
        Track the smallest eigenvalue of ``cov + i comm`` at every step.
    """
    if dt is None:
        dt = default_dt(params, rapid)
    _check_dt(params, dt, rapid)
    if schedule.tau1 > 0:
        _check_mode(input_mode, schedule.tau1, "input")
    if schedule.tau2 > 0:
        _check_mode(output_mode, schedule.tau2, "output")

    rows = []
    t0 = 0.0
    for stage in schedule_stages(params, schedule):
        if stage.duration > 0:
            n = max(1, math.ceil(stage.duration / dt - 1e-9))
            rows.append([t0, stage.duration / n, n, stage.coupling,
                         stage.stage_kind == "upload", stage.stage_kind == "readout"])
        t0 += stage.duration
    stages = np.array(rows, dtype=float).reshape(-1, 6)

    env_in = input_mode.packed()
    env_out = output_mode.packed(offset=schedule.tau1 + schedule.tau_s)

    H = _initial_state(params)
    m = np.zeros(_N)
    mu = np.array([2 * complex(alpha).real, 2 * complex(alpha).imag])
    min_eig = _integrate(H, m, stages, env_in, env_out, float(rapid), params.omega_m,
                         params.kappa, params.kappa_e, params.gamma, params.nth, mu,
                         check_physical)
    # a zero-length pulse has an empty mode window; the mode is then an
    # independent vacuum mode rather than an unfilled accumulator
    for skipped, block in ((schedule.tau1 == 0, slice(4, 6)), (schedule.tau2 == 0, slice(6, 8))):
        if skipped:
            H[block, :] = 0
            H[:, block] = 0
            H[block, block] = np.array([[1.0, 1j], [-1j, 1.0]])
            m[block] = 0
    state = MomentState(mean=m, cov=H.real.copy(), comm=H.imag.copy())
    return _extract(state, float(min_eig) if check_physical else float("nan"))


def _extract(state: MomentState, min_eig: float) -> ExtractedChannel:
    V = state.cov
    V_ii = V[4:6, 4:6]
    V_oi = V[6:8, 4:6]
    V_oo = V[6:8, 6:8]
    if np.linalg.norm(V_ii) == 0:
        M = np.zeros((2, 2))
    else:
        M = V_oi @ np.linalg.inv(V_ii)
    T = float(np.sum(M * M) / 2)
    noise = V_oo - M @ V_ii @ M.T
    singular = 1 - T < 1e-12
    if singular:
        VN, asym = float("nan"), float("nan")
    else:
        vx, vy = noise[0, 0] / (1 - T), noise[1, 1] / (1 - T)
        VN, asym = float((vx + vy) / 2), float(abs(vx - vy))
    return ExtractedChannel(T, VN, asym, M, state.mean[6:8].copy(), state, min_eig, singular)


def propagate_rwa(params, schedule, input_mode, output_mode, **kwargs) -> ExtractedChannel:
    """Moment propagation with the rapid ``exp(2i omega_m t)`` terms dropped."""
    return propagate(params, schedule, input_mode, output_mode, rapid=False, **kwargs)


def propagate_full(params, schedule, input_mode, output_mode, **kwargs) -> ExtractedChannel:
    """Moment propagation keeping the counter-rotating terms.

    The step must resolve ``2 omega_m``; see :func:`default_dt`.
    """
    return propagate(params, schedule, input_mode, output_mode, rapid=True, **kwargs)


def _drift(params: SystemParams, g):
    # RWA drift of (a_c, a_m) amplitudes
    return np.array([[-params.kappa, -g], [g, -0.5 * params.gamma]])


def _response_terms(params, g, row, col):
    """``[exp(M s)]_{row, col}`` as a sum of two exponentials in ``s``."""
    M = _drift(params, g)
    lam = np.linalg.eigvals(M).astype(complex)
    if abs(lam[0] - lam[1]) < 1e-7 * params.kappa:
        # exceptional point: split the degenerate pair slightly
        M = _drift(params, g * (1 + 1e-6))
        lam = np.linalg.eigvals(M).astype(complex)
    eye = np.eye(2)
    amps = [((M - lam[1] * eye) / (lam[0] - lam[1]))[row, col],
            ((M - lam[0] * eye) / (lam[1] - lam[0]))[row, col]]
    return amps, list(lam)


def matched_modes(params: SystemParams, schedule: PulseSchedule, kind: str = "matched"):
    """Input and output temporal modes for the pulses of ``schedule``.

    Parameters
    ----------
    kind : {"matched", "adiabatic"}
        ``"adiabatic"`` gives the exponentials ``exp(+-G t)`` with
        ``G = g^2 / kappa``.  ``"matched"`` uses the exact RWA impulse
        responses: the input envelope is the time-reversed response of the
        mechanics to the input field, the output envelope the response of
        the cavity field to the mechanics.  Both reduce to the adiabatic
        shapes for ``g << kappa``.

    Zero-duration or zero-coupling pulses fall back to a flat envelope.
    """
    if kind not in ("matched", "adiabatic"):
        raise DomainError(f"unknown envelope kind {kind!r}")
    tau1 = schedule.tau1 or 1.0
    tau2 = schedule.tau2 or 1.0
    g1, g2 = params.g0_sqrtN1, params.g0_sqrtN2
    if kind == "adiabatic" or g1 == 0:
        mode_in = TemporalMode.exponential(tau1, g1**2 / params.kappa, rising=True)
    else:
        # f_in(t) ~ [exp(M (tau1 - t))]_{m, c}
        amps, lam = _response_terms(params, g1, 1, 0)
        mode_in = _normalised(tau1, amps, [-x for x in lam], tau1)
    if kind == "adiabatic" or g2 == 0:
        mode_out = TemporalMode.exponential(tau2, g2**2 / params.kappa, rising=False)
    else:
        # f_out(t) ~ [exp(M t)]_{c, m}
        amps, lam = _response_terms(params, g2, 0, 1)
        mode_out = _normalised(tau2, amps, lam, 0.0)
    return mode_in, mode_out

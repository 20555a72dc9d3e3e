"""Independent reference computations used to freeze and check expected values.

Nothing here imports the package's closed forms.
"""
import mpmath as mp
import numpy as np
import scipy.linalg as sla

mp.mp.dps = 40


def beamsplitter_photon_through_thermal(T, VN, dim):
    """Diagonal of the output when |1> meets a thermal ancilla on a beamsplitter.

    Brute force in truncated two-mode Fock space: the ancilla keeps ``dim``
    levels, the beamsplitter ``exp(theta (a^dag b - a b^dag))`` is
    exponentiated numerically inside each fixed-total-photon block, and
    the ancilla is traced out.
    """
    n = (VN - 1) / 2
    q = n / (1 + n)
    ancilla = (1 - q) * q ** np.arange(dim)
    theta = np.arccos(np.sqrt(T))
    out = np.zeros(dim + 1)
    for m in range(dim):
        total = m + 1
        gen = np.zeros((total + 1, total + 1))
        for k in range(total):
            # a^dag b : |k, N-k> -> |k+1, N-k-1>
            gen[k + 1, k] = np.sqrt((k + 1) * (total - k))
        U = sla.expm(theta * (gen - gen.T))
        amp = U[:, 1]  # input |1>_a |m>_b
        out[: total + 1] += ancilla[m] * np.abs(amp) ** 2
    return out


def beamsplitter_full_space(T, VN, dim):
    """Same as above with the full ``dim^2`` two-mode unitary (small dims only)."""
    n = (VN - 1) / 2
    q = n / (1 + n)
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    eye = np.eye(dim)
    A, B = np.kron(a, eye), np.kron(eye, a)
    theta = np.arccos(np.sqrt(T))
    U = sla.expm(theta * (A.conj().T @ B - A @ B.conj().T))
    rho_b = np.diag((1 - q) * q ** np.arange(dim))
    rho_a = np.zeros((dim, dim))
    rho_a[1, 1] = 1
    rho = U @ np.kron(rho_a, rho_b) @ U.conj().T
    return np.real(np.einsum("ajbj->ab", rho.reshape(dim, dim, dim, dim)).diagonal())


def wigner_origin_gaussian_convolution(T, VN):
    """W(0, 0) of the transmitted photon from the phase-space convolution.

    Scaled single-photon Wigner function convolved with a Gaussian of
    variance ``(1 - T) VN``, integrated analytically.
    """
    s2 = mp.mpf(1 - T) * VN
    if s2 == 0:
        return float(-1 / (2 * mp.pi))
    a = 1 + mp.mpf(T) / s2
    return float((2 - a) / (2 * mp.pi * s2 * a * a))


def swap_T(g, tau):
    return 1 - mp.e ** (-2 * mp.mpf(g) ** 2 * tau)


def adiabatic_VN(n0, nth, eta, T1, T2, delta):
    T = T1 * T2 * mp.mpf(eta) ** 2 * delta
    return T, 1 + T2 * eta / (1 - T) * (2 * n0 * delta * (1 - T1) + 2 * nth * (1 - delta))


def boundary(r):
    r = mp.mpf(r)
    decay = mp.e ** (-mp.e**r * mp.sinh(r))
    return decay / mp.cosh(r), (mp.e ** (4 * r) - 1) / 4 * decay / mp.cosh(r) ** 3


def p1G_at(p0):
    r = mp.findroot(lambda r: boundary(r)[0] - p0, 0.2)
    return boundary(r)[1]

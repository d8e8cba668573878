"""Independent reference computations used by the tests.

None of these share code with the package: they are built from textbook
identities in extended precision.
"""

import mpmath as mp
import numpy as np

mp.mp.dps = 50


def symbol_A_mp(zeta, k, Ebar):
    zeta = mp.mpc(zeta)
    a = mp.mpf(k) ** 2 * mp.mpf(Ebar) ** 2 / (zeta**2 - mp.mpf(k) ** 2)
    k2 = mp.mpf(k) ** 2
    return mp.matrix([[-k2 - a, -a], [a, a + k2]])


def expm_mp(M):
    """Matrix exponential by scaling and squaring of a Taylor series."""
    return mp.expm(M)


def _exp_coeffs_in_a(z, k, order):
    """Taylor coefficients in ``a`` of ``exp(i z (Ainf + a B))``, ``B = [[-1,-1],[1,1]]``.

    Uses ``exp(izA) = cos(x) I + i z sinc(x) A`` with ``x^2 = z^2 k^2 (k^2 + 2a)``;
    both ``cos`` and ``sinc`` are entire in ``x^2``, hence in ``a``.
    """
    z = mp.mpf(z)
    k = mp.mpf(k)

    def cos_part(a):
        x2 = z**2 * k**2 * (k**2 + 2 * a)
        return mp.cos(mp.sqrt(x2))

    def sinc_part(a):
        x2 = z**2 * k**2 * (k**2 + 2 * a)
        x = mp.sqrt(x2)
        return mp.sin(x) / x if x != 0 else mp.mpf(1)

    cs = mp.taylor(cos_part, 0, order)
    ss = mp.taylor(sinc_part, 0, order)
    Ainf = mp.matrix([[-k**2, 0], [0, k**2]])
    B = mp.matrix([[-1, -1], [1, 1]])
    I2 = mp.eye(2)
    coeffs = []
    for m in range(order + 1):
        C = cs[m] * I2 + 1j * z * ss[m] * Ainf
        if m >= 1:
            C += 1j * z * ss[m - 1] * B
        coeffs.append(C)
    return coeffs


def laurent_kernel(t, z, k, Ebar, p_order, terms=40):
    """Kernel value as the sum of residues at ``zeta = +-k`` from Laurent series.

    The integrand is ``exp(i t zeta) exp(i z A(zeta)) (k^2/(zeta^2-k^2))^p``.
    Near ``zeta = s k + w`` one has ``a = k^2 Ebar^2 / (w (2 s k + w))``; every
    factor is expanded in ``w`` and the ``w^{-1}`` coefficient is collected.
    The contour normalization ``(1/2pi) oint`` turns each residue into ``i``
    times it.
    """
    k = mp.mpf(k)
    t = mp.mpf(t)
    E2 = mp.mpf(Ebar) ** 2
    coeffs = _exp_coeffs_in_a(z, k, terms)
    total = mp.matrix(2, 2)
    for s in (1, -1):
        c2 = 2 * s * k
        res = mp.matrix(2, 2)
        for m in range(terms + 1):
            # a^m p^order = (k^2 E2)^m k^(2p) w^{-(m+p)} (c2 + w)^{-(m+p)}
            q = m + p_order
            if q == 0:
                continue  # entire, no residue
            pref = (k**2 * E2) ** m * k ** (2 * p_order) * c2 ** (-q)
            if pref == 0:
                continue
            # need coefficient of w^{q-1} in exp(i t w) (1 + w/c2)^{-q}
            acc = mp.mpf(0)
            for i in range(q):
                j = q - 1 - i
                acc += mp.binomial(-q, i) * c2 ** (-i) * (1j * t) ** j / mp.factorial(j)
            res += coeffs[m] * (pref * acc)
        total += res * mp.exp(1j * t * s * k)
    return np.array([[complex(total[i, j]) * 1j for j in range(2)] for i in range(2)])


def residue_E1_free(t, z, k):
    """First-order kernel with no background: residues of simple poles.

    ``(1/2pi) oint exp(i t zeta) diag(e^{-izk^2}, e^{izk^2}) k^2/(zeta^2-k^2)``
    ``= i (k/2) (e^{ikt} - e^{-ikt}) diag(...) = -k sin(kt) diag(...)``.
    """
    return -k * np.sin(k * t) * np.diag([np.exp(-1j * z * k**2), np.exp(1j * z * k**2)])


def bessel_i0_series(x):
    return float(mp.besseli(0, x))

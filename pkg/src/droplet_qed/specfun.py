"""Riccati-Bessel functions of integer order and complex argument.

``psi_l(z) = z j_l(z)`` is the regular interior solution and
``xi_l(z) = z h_l^(1)(z)`` the outgoing exterior one.  Both satisfy

    f'' + (1 - l(l+1)/z**2) f = 0,    psi xi' - psi' xi = i.

The regular function is built from the minimal-solution ratios
``psi_n/psi_{n+1}`` obtained by downward recurrence and normalized against
``sin z`` (or ``psi_1`` near zeros of ``sin z``).  The outgoing function is
built by upward recurrence of ``xi_n/xi_{n-1}``.  That recurrence loses
about ``exp(2 |Im z|)`` in relative accuracy once the order passes the
turning point ``l ~ |z|`` in the lower half-plane (the incoming solution
grows relative to the outgoing one there), so for ``Im z < -2`` the
values come from the AMOS Hankel routines in :mod:`scipy.special` instead.

Magnitudes are carried as (mantissa, power-of-two exponent) pairs so that
orders up to :data:`L_MAX` never overflow internally; only the final
unscaled value can.
"""

import numpy as np
from scipy import special

from .errors import DomainError

L_MAX = 500

# Below this imaginary part the upward xi recurrence is trusted only in the
# oscillatory region (order below |z|); past the turning point AMOS takes over.
_XI_RECURRENCE_FLOOR = -2.0

# Beyond this binary exponent a value is not representable as a double.
_EXP_LIMIT = 1000


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _check_order(l):
    if int(l) != l or l < 0:
        raise DomainError(f"order must be a non-negative integer, got {l!r}")
    if l > L_MAX:
        raise DomainError(f"order {l} exceeds supported maximum {L_MAX}")
    return int(l)


def _start_order(l, z):
    """Order at which the downward ratio recurrence is seeded."""
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    return int(max(l, zmax) + 20 + 4 * zmax ** (1 / 3))


def _renormalize(m, e):
    """Pull the binary exponent of ``m`` into ``e``; exact in floating point."""
    _, k = np.frexp(np.abs(m))
    return np.ldexp(m.real, -k) + 1j * np.ldexp(m.imag, -k), e + k


def _unscale(m, e, what):
    if np.any((e > _EXP_LIMIT) & (m != 0)):
        raise OverflowError(f"{what} exceeds the representable range")
    if np.any((e < -_EXP_LIMIT) & (m != 0)):
        raise OverflowError(f"{what} underflows the representable range")
    return np.ldexp(m.real, e) + 1j * np.ldexp(m.imag, e)


def _psi_ratios(lmax, z):
    """Ratios ``rho_n = psi_n/psi_{n+1}`` for n = 0..lmax."""
    top = _start_order(lmax, z)
    rho = (2 * top + 3) / z
    out = np.empty((lmax + 1,) + z.shape, dtype=complex)
    for n in range(top - 1, -1, -1):
        rho = (2 * n + 3) / z - 1.0 / rho
        if n <= lmax:
            out[n] = rho
    return out


def _xi_ratios(lmax, z):
    """Ratios ``tau_n = xi_n/xi_{n-1}`` for n = 0..lmax (``xi_{-1} = e^{iz}``)."""
    out = np.empty((lmax + 1,) + z.shape, dtype=complex)
    tau = np.full(z.shape, -1j)
    out[0] = tau
    for n in range(1, lmax + 1):
        tau = (2 * n - 1) / z - 1.0 / tau
        out[n] = tau
    return out


def _finite(value, what):
    if not np.all(np.isfinite(value)):
        raise OverflowError(f"{what} is not finite")
    return value


def _unwrap(a):
    return complex(a) if np.ndim(a) == 0 else a


def riccati_psi(l, z):
    """Regular Riccati-Bessel function ``psi_l(z) = z j_l(z)`` and its derivative.

    Parameters
    ----------
    l : int
        Order, ``0 <= l <= L_MAX``.
    z : complex or array_like
        Argument.  ``z = 0`` is allowed and returns exact values.

    Returns
    -------
    value, derivative : complex or ndarray

    Raises
    ------
    DomainError
        If ``l`` is negative, non-integer or larger than ``L_MAX``.
    OverflowError
        If the result is not representable in double precision.
    """
    l = _check_order(l)
    z = _as_complex(z)
    zero = z == 0
    zs = np.where(zero, 1.0, z)

    rho = _psi_ratios(max(l, 1), zs)
    sin, cos = np.sin(zs), np.cos(zs)
    psi1 = sin / zs - cos
    use_sin = np.abs(sin) >= np.abs(psi1)
    # normalization constant for the chain u_0 = 1, u_n = u_{n-1}/rho_{n-1}
    norm = np.where(use_sin, sin, psi1 * rho[0])

    m, e = _renormalize(norm, np.zeros(z.shape, dtype=int))
    prev_m, prev_e = None, None
    for n in range(l):
        prev_m, prev_e = m, e
        m, e = _renormalize(m / rho[n], e)
    value = _unscale(m, e, f"psi_{l}")
    if l == 0:
        deriv = cos
    else:
        # psi_l' = psi_{l-1} - (l/z) psi_l, evaluated on the common exponent
        dm = prev_m - (l / zs) * prev_m / rho[l - 1]
        deriv = _unscale(dm, prev_e, f"psi_{l}'")
    value = np.where(zero, 0.0, value)
    deriv = np.where(zero, 1.0 if l == 0 else 0.0, deriv)
    return _unwrap(_finite(value, "psi")), _unwrap(_finite(deriv, "psi'"))


def riccati_xi(l, z):
    """Outgoing Riccati-Hankel function ``xi_l(z) = z h_l^(1)(z)`` and its derivative.

    Raises
    ------
    DomainError
        For ``z == 0`` (singular point) or an unsupported order.
    OverflowError
        When the outgoing wave grows beyond double range (small ``|z|`` at
        high order, or large negative ``Im z``).
    """
    l = _check_order(l)
    z = _as_complex(z)
    if np.any(z == 0):
        raise DomainError("xi_l is singular at z = 0")
    lower = (z.imag < _XI_RECURRENCE_FLOOR) & (np.abs(z) <= l)
    value = np.empty(z.shape, dtype=complex)
    deriv = np.empty(z.shape, dtype=complex)
    if np.any(~lower):
        value[~lower], deriv[~lower] = _xi_by_recurrence(l, z[~lower])
    if np.any(lower):
        value[lower], deriv[lower] = _xi_by_amos(l, z[lower])
    return _unwrap(_finite(value, "xi")), _unwrap(_finite(deriv, "xi'"))


def _xi_by_recurrence(l, z):
    tau = _xi_ratios(l, z)
    # start the chain at xi_{-1} = exp(iz)
    m, e = _renormalize(np.exp(1j * z), np.zeros(z.shape, dtype=int))
    for n in range(l + 1):
        prev_m, prev_e = m, e
        m, e = _renormalize(m * tau[n], e)
    value = _unscale(m, e, f"xi_{l}")
    dm = prev_m - (l / z) * prev_m * tau[l]
    return value, _unscale(dm, prev_e, f"xi_{l}'")


def _xi_by_amos(l, z):
    with np.errstate(over="ignore", invalid="ignore"):
        pref = np.sqrt(np.pi * z / 2)
        value = pref * special.hankel1(l + 0.5, z)
        prev = pref * special.hankel1(l - 0.5, z)
        deriv = prev - (l / z) * value
    if not (np.all(np.isfinite(value)) and np.all(np.isfinite(deriv))):
        raise OverflowError(f"xi_{l} exceeds the representable range")
    return value, deriv


def psi_log_derivatives(lmax, z):
    """``psi_n'(z)/psi_n(z)`` for every order ``n = 0..lmax``.

    Returns an array of shape ``(lmax + 1,) + shape(z)``.  Ratios never
    overflow, so this is the form used by the characteristic equations.
    Entries are infinite at (real) zeros of ``psi_n``.
    """
    lmax = _check_order(lmax)
    z = _as_complex(z)
    if np.any(z == 0):
        raise DomainError("log-derivative of psi_l is singular at z = 0")
    rho = _psi_ratios(lmax, z)
    out = np.empty_like(rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[0] = 1.0 / z - 1.0 / rho[0]
    n = np.arange(1, lmax + 1).reshape((-1,) + (1,) * z.ndim)
    out[1:] = rho[:-1] - n / z
    return out


def xi_log_derivatives(lmax, z):
    """``xi_n'(z)/xi_n(z)`` for every order ``n = 0..lmax``."""
    lmax = _check_order(lmax)
    z = _as_complex(z)
    if np.any(z == 0):
        raise DomainError("log-derivative of xi_l is singular at z = 0")
    tau = _xi_ratios(lmax, z)
    n = np.arange(lmax + 1).reshape((-1,) + (1,) * z.ndim)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 / tau - n / z


def _broadcast_orders(l, z):
    l = np.asarray(l)
    if np.any(l != np.floor(l)) or np.any(l < 0):
        raise DomainError("orders must be non-negative integers")
    if np.any(l > L_MAX):
        raise DomainError(f"order exceeds supported maximum {L_MAX}")
    l, z = np.broadcast_arrays(l.astype(int), _as_complex(z))
    if np.any(z == 0):
        raise DomainError("log-derivatives are singular at z = 0")
    return l, z


def psi_log_derivative(l, z, phase=False):
    """``psi_l'(z)/psi_l(z)`` with elementwise orders.

    ``l`` and ``z`` broadcast against each other, so a batch of resonances
    with different orders is handled by a single downward sweep.  With
    ``phase=True`` the argument of ``psi_l(z)`` (modulo 2 pi) is returned as
    well; it stays defined where ``|psi_l|`` itself would underflow.
    """
    l, z = _broadcast_orders(l, z)
    top = _start_order(int(l.max(initial=0)), z)
    rho = (2 * top + 3) / z
    rho_l = np.empty(z.shape, dtype=complex)
    rho_lm1 = np.empty(z.shape, dtype=complex)
    arg = np.zeros(z.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        for n in range(top - 1, -1, -1):
            rho = (2 * n + 3) / z - 1.0 / rho
            np.copyto(rho_l, rho, where=(l == n))
            np.copyto(rho_lm1, rho, where=(l == n + 1))
            if phase:
                arg -= np.where(n < l, np.angle(rho), 0.0)
        out = np.where(l == 0, 1.0 / z - 1.0 / rho_l, rho_lm1 - l / z)
    if not phase:
        return _unwrap(out)
    sin = np.sin(z)
    psi1 = sin / z - np.cos(z)
    norm = np.where(np.abs(sin) >= np.abs(psi1), sin, psi1 * rho)
    return _unwrap(out), _unwrap(np.angle(norm) + arg)


def xi_log_derivative(l, z):
    """``xi_l'(z)/xi_l(z)`` with elementwise orders (upward sweep)."""
    l, z = _broadcast_orders(l, z)
    tau = np.full(z.shape, -1j)
    tau_l = np.full(z.shape, -1j)
    with np.errstate(divide="ignore", invalid="ignore"):
        for n in range(1, int(l.max(initial=0)) + 1):
            tau = (2 * n - 1) / z - 1.0 / tau
            np.copyto(tau_l, tau, where=(l == n))
        return _unwrap(1.0 / tau_l - l / z)


def psi_phases(lmax, z):
    """Arguments of ``psi_n(z)`` for ``n = 0..lmax`` (modulo 2 pi)."""
    lmax = _check_order(lmax)
    z = _as_complex(z)
    rho = _psi_ratios(max(lmax, 1), z)
    sin = np.sin(z)
    psi1 = sin / z - np.cos(z)
    norm = np.where(np.abs(sin) >= np.abs(psi1), sin, psi1 * rho[0])
    out = np.empty((lmax + 1,) + z.shape)
    out[0] = np.angle(norm)
    if lmax:
        out[1:] = out[0] - np.cumsum(np.angle(rho[:lmax]), axis=0)
    return out

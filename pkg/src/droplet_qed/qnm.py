"""Quasi-normal modes (morphology-dependent resonances) of a dielectric sphere.

The radial mode function is ``psi_l(n0 w r)`` inside and ``xi_l(w r)``
outside.  Continuity of ``f`` and ``beta f'`` at the surface, with
``beta = 1`` (TE) or ``1/eps`` (TM), gives in the size parameter
``x = w a / c``

    TE:  n0   psi_l'(n0 x)/psi_l(n0 x) - xi_l'(x)/xi_l(x) = 0
    TM:  1/n0 psi_l'(n0 x)/psi_l(n0 x) - xi_l'(x)/xi_l(x) = 0

Roots are stored on the decaying branch ``Im x < 0`` (time factor
``exp(-i w t)``); the mirror roots ``-conj(x)`` are implied and never
stored.  The full width in ``x`` is ``2 |Im x|``.

Roots for a whole range of orders are located together: a phase scan
along ``Im x = -w_inf/4`` seeds a batched complex Newton iteration, and
the argument principle over the search rectangle certifies that no root
was missed.  The contour integrand is ``F(x) psi_l(n0 x)``, which has the
same zeros as ``F`` but none of its poles.
"""

from dataclasses import dataclass, field
from enum import Enum
import csv
import io
import json
import math

import numpy as np

from . import specfun
from .errors import ConvergenceError, DomainError, MissedRootError, RangeError

SOLVER_VERSION = "1"

REFINE_TOL = 1e-10
RECHECK_TOL = 1e-8
STEP_TOL = 1e-12
DEDUP_RADIUS = 1e-8
SCAN_STEP = 0.05

_MAX_NEWTON = 60
_MAX_STEP = 0.5
# Top edge of the counting rectangle; no QNM lies in the upper half-plane.
_TOP = 0.25
_LEFT = 0.05
_MAX_DPHASE = np.pi / 4
# below this |Im x| the imaginary part is polished on the real axis
_NARROW = 1e-8


class Polarization(str, Enum):
    TE = "TE"
    TM = "TM"


def _pol(pol):
    try:
        return Polarization(pol)
    except ValueError:
        raise DomainError(f"unknown polarization {pol!r}") from None


@dataclass(frozen=True)
class QnmMode:
    """One resonance ``x_lj`` of angular momentum ``l`` and radial order ``j``."""

    pol: Polarization
    l: int
    j: int
    x: complex
    width_x: float
    k_factor: float

    @property
    def re_x(self):
        return self.x.real

    @property
    def k_gamma(self):
        """``K * width``, independent of the width for TE modes."""
        return self.k_factor * self.width_x


@dataclass(frozen=True)
class ModeTable:
    """All resonances of one polarization with ``0 < Re x <= x_max``.

    ``modes`` is sorted by ``(l, j)``.  ``fsr_x`` is the spacing of
    consecutive least-leaky (``j = 1``) modes at the middle of the band.
    """

    n0: float
    pol: Polarization
    modes: tuple
    x_max: float
    max_width: float
    fsr_x: float = field(default=float("nan"))

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(sorted(self.modes, key=lambda m: (m.l, m.j))))
        if math.isnan(self.fsr_x):
            object.__setattr__(self, "fsr_x", _band_fsr(self))

    def __len__(self):
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def arrays(self):
        """``(l, re_x, width_x, k_factor)`` as numpy arrays."""
        l = np.array([m.l for m in self.modes], dtype=int)
        re_x = np.array([m.x.real for m in self.modes])
        width = np.array([m.width_x for m in self.modes])
        k = np.array([m.k_factor for m in self.modes])
        return l, re_x, width, k

    def least_leaky(self):
        """The ``j = 1`` modes ordered by ``l``."""
        return [m for m in self.modes if m.j == 1]

    def coverage(self):
        """Band ``(lo, hi)`` inside which the table is complete for DOS sums.

        Orders above the table's largest ``l`` have no resonance below
        ``x_max``, but their tails reach down; the upper limit keeps a
        margin of five free spectral ranges.
        """
        ll = self.least_leaky()
        if len(ll) < 2:
            return (0.0, 0.0)
        return (ll[0].x.real + 5 * self.fsr_x, self.x_max - 5 * self.fsr_x)


def asymptotic_width(n0):
    """Limiting width ``(1/n0) ln((n0+1)/(n0-1))`` of high-order resonances."""
    if not n0 > 1:
        raise DomainError(f"refractive index must exceed 1, got {n0}")
    return math.log((n0 + 1) / (n0 - 1)) / n0


def _char(pol, l, n0, x, phase=False):
    """Characteristic function and its x-derivative, elementwise in ``l``, ``x``.

    Uses ``D' = l(l+1)/z^2 - 1 - D^2`` for both Riccati log-derivatives.
    """
    x = np.asarray(x, dtype=complex)
    z = n0 * x
    if phase:
        dpsi, arg = specfun.psi_log_derivative(l, z, phase=True)
    else:
        dpsi = specfun.psi_log_derivative(l, z)
    dxi = specfun.xi_log_derivative(l, x)
    ll = np.asarray(l) * (np.asarray(l) + 1)
    with np.errstate(invalid="ignore", over="ignore"):
        dpsi_p = ll / z**2 - 1 - dpsi**2
        dxi_p = ll / x**2 - 1 - dxi**2
        if pol is Polarization.TE:
            f = n0 * dpsi - dxi
            fp = n0**2 * dpsi_p - dxi_p
        else:
            f = dpsi / n0 - dxi
            fp = dpsi_p - dxi_p
    if phase:
        return f, fp, arg
    return f, fp


def characteristic_value(pol, l, n0, x):
    """Matching function whose roots are the resonances.

    ``l = 0`` is accepted for testing; vector modes need ``l >= 1``.

    Raises
    ------
    DomainError
        For ``n0 <= 1``, ``x == 0`` or when ``x`` sits on a pole (zero of
        ``psi_l(n0 x)`` or ``xi_l(x)``).
    """
    pol = _pol(pol)
    if not n0 > 1:
        raise DomainError(f"refractive index must exceed 1, got {n0}")
    if np.any(np.asarray(x) == 0):
        raise DomainError("characteristic function is undefined at x = 0")
    f, _ = _char(pol, l, n0, x)
    if not np.all(np.isfinite(f)):
        raise DomainError("x lies on a pole of the characteristic function")
    return complex(f) if np.ndim(f) == 0 else f


def _newton(pol, l, n0, x, max_iter=_MAX_NEWTON):
    """Damped complex Newton, batched over (order, seed) pairs.

    Returns roots, a convergence mask and the final residuals.
    """
    x = np.array(x, dtype=complex)
    l = np.broadcast_to(np.asarray(l, dtype=int), x.shape).copy()
    active = np.ones(x.shape, dtype=bool)
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        f, fp = _char(pol, l[idx], n0, x[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / fp
        bad = ~np.isfinite(step)
        big = np.abs(step) > _MAX_STEP
        step[big] *= _MAX_STEP / np.abs(step[big])
        step[bad] = 0
        x[idx] -= step
        conv = (np.abs(step) < STEP_TOL) & ~bad
        # abandon iterates that wander far from the physical strip
        lost = bad | (x[idx].real <= 0) | (x[idx].imag > 1.0) | (x[idx].imag < -10.0)
        done[idx[conv]] = True
        active[idx[conv | lost]] = False
    f, _ = _char(pol, l, n0, x)
    resid = np.abs(f)
    converged = done & (resid < REFINE_TOL)
    return x, converged, resid, active


def _contour(x_lo, x_hi, y_bot, y_top, step):
    """Counter-clockwise rectangle sampled at roughly ``step``; closed."""
    nx = max(int(math.ceil((x_hi - x_lo) / step)), 4)
    ny = max(int(math.ceil((y_top - y_bot) / step)), 4)
    xs = np.linspace(x_lo, x_hi, nx + 1)
    ys = np.linspace(y_bot, y_top, ny + 1)
    pts = np.concatenate([
        xs[:-1] + 1j * y_bot,
        x_hi + 1j * ys[:-1],
        xs[::-1][:-1] + 1j * y_top,
        x_lo + 1j * ys[::-1],
    ])
    return pts


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def _phase(pol, l, n0, x):
    """Argument of ``F(x) psi_l(n0 x)`` (elementwise orders)."""
    f, _, arg = _char(pol, l, n0, x, phase=True)
    return np.angle(f) + arg


def left_edge(l, n0):
    """Left boundary of the search window for order ``l``.

    For ``Re x`` below about ``(l + 1/2)/(2 n0)`` the field is evanescent
    both inside and outside the sphere and the matching function has no
    zero in the strip; starting there also keeps the contour away from the
    origin, where the phase of ``psi_l`` turns like ``(l+1) arg z``.
    """
    return max(_LEFT, 0.5 * (l + 0.5) / n0)


def winding_count(pol, l, n0, x_lo, x_hi, y_bot, y_top=_TOP, step=SCAN_STEP):
    """Number of resonances inside a rectangle, by the argument principle.

    ``l`` may be a sequence (with ``x_lo`` scalar or one value per order);
    one count per order is returned in that case.  Sampling is refined until
    the phase of ``F psi_l`` moves by less than pi/4 between neighbours.
    """
    pol = _pol(pol)
    ls = np.atleast_1d(np.asarray(l, dtype=int))
    lo = np.broadcast_to(np.asarray(x_lo, dtype=float), ls.shape)
    total = np.zeros(ls.size)
    segs = []
    for i, (li, xl) in enumerate(zip(ls, lo)):
        pts = _contour(xl, x_hi, y_bot, y_top, step)
        closed = np.append(pts, pts[:1])
        phase = _phase(pol, li, n0, closed)
        dphi = _wrap(np.diff(phase))
        fine = np.abs(dphi) <= _MAX_DPHASE
        total[i] = dphi[fine].sum()
        k = np.flatnonzero(~fine)
        segs.append((np.full(k.size, i), closed[k], closed[k + 1], phase[k], phase[k + 1]))

    # segments that still move too fast are bisected, all orders batched
    owner, za, zb, pa, pb = (np.concatenate(c) for c in zip(*segs))
    while owner.size:
        if np.min(np.abs(zb - za)) < 1e-11:
            raise MissedRootError("a resonance lies on the counting contour")
        zm = 0.5 * (za + zb)
        pm = _phase(pol, ls[owner], n0, zm)
        d1, d2 = _wrap(pm - pa), _wrap(pb - pm)
        ok1, ok2 = np.abs(d1) <= _MAX_DPHASE, np.abs(d2) <= _MAX_DPHASE
        np.add.at(total, owner[ok1], d1[ok1])
        np.add.at(total, owner[ok2], d2[ok2])
        owner = np.concatenate([owner[~ok1], owner[~ok2]])
        za, zb = np.concatenate([za[~ok1], zm[~ok2]]), np.concatenate([zm[~ok1], zb[~ok2]])
        pa, pb = np.concatenate([pa[~ok1], pm[~ok2]]), np.concatenate([pm[~ok1], pb[~ok2]])

    counts = total / (2 * np.pi)
    rounded = np.rint(counts)
    if np.any(np.abs(counts - rounded) > 0.1):
        raise MissedRootError(f"non-integer winding number {counts}")
    rounded = rounded.astype(int)
    return int(rounded[0]) if np.ndim(l) == 0 else rounded


def _scan_seeds(pol, ls, n0, lo, x_hi, y_line, step=SCAN_STEP):
    """Local minima of ``|F|`` along a horizontal line, for every order in ``ls``.

    ``lo`` holds the left edge of each order's window.
    """
    xs = np.arange(lo.min(), x_hi + step, step) + 1j * y_line
    lmax = int(ls.max())
    dpsi = specfun.psi_log_derivatives(lmax, n0 * xs)[ls]
    dxi = specfun.xi_log_derivatives(lmax, xs)[ls]
    f = n0 * dpsi - dxi if pol is Polarization.TE else dpsi / n0 - dxi
    mag = np.abs(f)
    mag[~np.isfinite(mag)] = np.inf
    inner = (mag[:, 1:-1] <= mag[:, :-2]) & (mag[:, 1:-1] <= mag[:, 2:])
    oi, ki = np.nonzero(inner)
    keep = xs[ki + 1].real >= lo[oi]
    seeds_l = ls[oi[keep]]
    seeds_x = xs[ki + 1][keep]
    # the ends of the line can hide a minimum just outside the window
    seeds_l = np.concatenate([seeds_l, ls, ls])
    seeds_x = np.concatenate([seeds_x, lo + 1j * y_line, np.full(ls.size, xs[-1])])
    return seeds_l, seeds_x


def _dedup(roots):
    roots = np.sort_complex(np.asarray(roots))
    keep = []
    for r in roots:
        if all(abs(r - k) > DEDUP_RADIUS for k in keep[-4:]):
            keep.append(r)
    return np.array(keep, dtype=complex)


def _in_window(r, x_lo, x_hi, y_bot):
    return (r.real > x_lo) & (r.real <= x_hi) & (r.imag >= y_bot) & (r.imag <= 1e-12)


def _grid_seeds(x_lo, x_hi, y_bot, nx, ny=4):
    xs = np.linspace(x_lo, x_hi, nx + 2)[1:-1]
    ys = np.linspace(y_bot, 0.0, ny + 2)[1:-1]
    return (xs[:, None] + 1j * ys[None, :]).ravel()


def _recover(pol, l, n0, roots, x_lo, x_hi, y_bot, depth=0):
    """Locate roots missed by the scan: bisect the window and reseed densely."""
    expected = winding_count(pol, l, n0, x_lo, x_hi, y_bot)
    inside = roots[_in_window(roots, x_lo, x_hi, y_bot)]
    if inside.size == expected:
        return inside
    if x_hi - x_lo < 0.5 or depth > 12:
        seeds = _grid_seeds(x_lo, x_hi, y_bot, 12, 8)
        x, ok, _, _ = _newton(pol, l, n0, seeds)
        found = _dedup(np.concatenate([inside, x[ok]]))
        found = found[_in_window(found, x_lo, x_hi, y_bot)]
        if found.size != expected:
            raise MissedRootError(
                f"l={l}: {found.size} roots accepted in Re x in ({x_lo:.4g}, {x_hi:.4g}], "
                f"argument principle counts {expected}",
                expected=expected, found=found.size,
            )
        return found
    mid = 0.5 * (x_lo + x_hi)
    seeds = _grid_seeds(x_lo, x_hi, y_bot, 8)
    x, ok, _, _ = _newton(pol, l, n0, seeds)
    pool = _dedup(np.concatenate([inside, x[ok]]))
    left = _recover(pol, l, n0, pool, x_lo, mid, y_bot, depth + 1)
    right = _recover(pol, l, n0, pool, mid, x_hi, y_bot, depth + 1)
    return np.concatenate([left, right])


def _polish_narrow(pol, l, n0, roots):
    """Recompute tiny imaginary parts on the real axis.

    For very high-Q resonances the last complex Newton step leaves
    round-off from the real part in ``Im x``.  On the real axis ``Im F`` is
    the pure radiation term and is computed to full relative precision, so
    a first-order step ``-Im F/Re F'`` recovers ``Im x``.
    """
    narrow = np.abs(roots.imag) < _NARROW
    if not np.any(narrow):
        return roots
    xr = roots.real[narrow].astype(complex)
    f, fp = _char(pol, l, n0, xr)
    roots = roots.copy()
    roots[narrow] = roots.real[narrow] - 1j * (f.imag / fp.real)
    return roots


def solve_roots(pol, ls, n0, x_max, max_width, certify=True):
    """Complex resonances for each order in ``ls``; ``{l: sorted roots}``.

    Orders may include ``l = 0`` (scalar test case).  Roots satisfy
    ``0 < Re x <= x_max`` and ``2 |Im x| <= max_width``.
    """
    pol = _pol(pol)
    w_inf = asymptotic_width(n0)
    if not x_max > 0:
        raise DomainError("x_max must be positive")
    if max_width < w_inf:
        raise DomainError(f"max_width {max_width} is below the asymptotic width {w_inf:.6f}")
    ls = np.atleast_1d(np.asarray(ls, dtype=int))
    y_bot = -max_width / 2
    lo = {int(li): left_edge(li, n0) for li in ls}
    ls = np.array([li for li in ls if lo[int(li)] < x_max], dtype=int)
    if ls.size == 0:
        return {}

    edges = np.array([lo[int(li)] for li in ls])
    seeds_l, seeds_x = _scan_seeds(pol, ls, n0, edges, x_max, -w_inf / 4)
    x, ok, resid, stuck = _newton(pol, seeds_l, n0, seeds_x)
    seed_lo = np.array([lo[int(li)] for li in seeds_l])
    # with certification the winding count decides; a stalled seed only matters without it
    if not certify and np.any(stuck & _in_window(x, seed_lo, x_max, y_bot)):
        k = int(np.flatnonzero(stuck & _in_window(x, seed_lo, x_max, y_bot))[0])
        raise ConvergenceError(
            f"Newton refinement did not converge for l={seeds_l[k]} from seed {seeds_x[k]:.6g}",
            seed=complex(seeds_x[k]),
        )

    out = {}
    for li in ls:
        sel = (seeds_l == li) & ok
        out[int(li)] = _polish_narrow(pol, int(li), n0, _dedup(x[sel]))
        out[int(li)] = out[int(li)][_in_window(out[int(li)], lo[int(li)], x_max, y_bot)]
    if certify:
        counts = winding_count(pol, ls, n0, edges, x_max, y_bot)
        for li, count in zip(ls, np.atleast_1d(counts)):
            if out[int(li)].size != count:
                found = _recover(pol, int(li), n0, out[int(li)], lo[int(li)], x_max, y_bot)
                out[int(li)] = _polish_narrow(pol, int(li), n0, _dedup(found))
    return out


def _k_factor(pol, l, n0, x):
    width = 2 * abs(x.imag)
    kg = (2 * l + 1) / ((n0**2 - 1) * x.real**2)
    if pol is Polarization.TM:
        # share of the surface normalization that is tangential
        d = specfun.psi_log_derivative(l, n0 * x)
        tangential = abs(d**2)
        kg *= tangential / abs(d**2 + l * (l + 1) / x**2)
    return float(kg / width)


def _make_modes(pol, l, n0, roots):
    modes = []
    for j, r in enumerate(sorted(roots, key=lambda r: r.real), start=1):
        r = complex(r.real, min(r.imag, -0.0))
        width = 2 * abs(r.imag)
        modes.append(QnmMode(pol, int(l), j, r, width, _k_factor(pol, l, n0, r)))
    return modes


def find_modes(pol, l, n0, x_max, max_width):
    """All resonances of order ``l`` with ``0 < Re x <= x_max``, ``width <= max_width``.

    Each root is refined to ``|F| < 1e-10`` with a final Newton step below
    ``1e-12``; ``j`` counts roots by increasing ``Re x``.

    Raises
    ------
    ConvergenceError
        If Newton refinement stalls inside the search window.
    MissedRootError
        If the accepted roots disagree with the argument-principle count.
    """
    if int(l) != l or l < 1:
        raise DomainError("vector resonances need l >= 1")
    pol = _pol(pol)
    roots = solve_roots(pol, [l], n0, x_max, max_width)[int(l)]
    return _make_modes(pol, l, n0, roots)


def max_order(n0, x_max):
    """Largest ``l`` that can have a resonance with ``Re x <= x_max``."""
    return min(int(n0 * x_max) + 2, specfun.L_MAX)


def build_mode_table(pol, n0, x_max, max_width=None, orders=None):
    """Solve every order that contributes below ``x_max`` and assemble a table.

    ``max_width`` defaults to 1.2 times the asymptotic width.
    """
    pol = _pol(pol)
    if max_width is None:
        max_width = 1.2 * asymptotic_width(n0)
    if orders is None:
        orders = range(1, max_order(n0, x_max) + 1)
    ls = np.array(list(orders), dtype=int)
    roots = solve_roots(pol, ls, n0, x_max, max_width)
    modes = []
    for li in ls:
        modes.extend(_make_modes(pol, li, n0, roots[int(li)]))
    return ModeTable(n0=n0, pol=pol, modes=tuple(modes), x_max=x_max, max_width=max_width)


def _j1_arrays(table):
    ll = table.least_leaky()
    l = np.array([m.l for m in ll], dtype=int)
    x = np.array([m.x.real for m in ll])
    return ll, l, x


def _band_fsr(table):
    ll, l, x = _j1_arrays(table)
    if len(ll) < 2:
        return float("nan")
    mid = 0.5 * (x[0] + x[-1])
    try:
        return fsr_spacing(table, mid)
    except RangeError:
        return float(np.median(np.diff(x)))


def fsr_spacing(table, x0):
    """Local free spectral range at ``x0``.

    The spacing ``Re x_{l+1,1} - Re x_{l,1}`` of the consecutive
    least-leaky modes bracketing ``x0``.
    """
    ll, l, x = _j1_arrays(table)
    k = np.searchsorted(x, x0, side="right") - 1
    if k < 0 or k + 1 >= len(ll) or l[k + 1] != l[k] + 1:
        raise RangeError(f"x0 = {x0} is outside the band covered by the table")
    return float(x[k + 1] - x[k])


def least_leaky_mode(table, x0):
    """The ``j = 1`` resonance closest to ``x0``.

    Ties go to the narrower mode.
    """
    ll, l, x = _j1_arrays(table)
    if len(ll) < 2 or not (x[0] <= x0 <= x[-1]):
        raise RangeError(f"x0 = {x0} is outside the band covered by the table")
    dist = np.abs(x - x0)
    best = np.flatnonzero(dist == dist.min())
    return min((ll[i] for i in best), key=lambda m: m.width_x)


def local_fsr(pol, n0, x0):
    """Free spectral range at ``x0`` from only the orders whose ``j = 1`` mode is nearby.

    Much cheaper than a full table when just the spacing is needed.
    """
    pol = _pol(pol)
    top = int(n0 * x0) + 3
    orders = range(max(1, int(0.75 * n0 * x0) - 2), top + 1)
    table = build_mode_table(pol, n0, x0 + 3.0, orders=orders)
    return fsr_spacing(table, x0)


TABLE_COLUMNS = ("pol", "l", "j", "re_x", "im_x", "width_x", "k_factor")


def _rows(table):
    for m in table.modes:
        yield (m.pol.value, m.l, m.j, repr(m.x.real), repr(m.x.imag), repr(m.width_x), repr(float(m.k_factor)))


def table_to_csv(table):
    """Mode table as CSV; floats use their shortest round-trip decimal form."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    w.writerows(_rows(table))
    return buf.getvalue()


def _mode_from_fields(rec):
    pol = _pol(rec["pol"])
    x = complex(float(rec["re_x"]), float(rec["im_x"]))
    return QnmMode(pol, int(rec["l"]), int(rec["j"]), x, float(rec["width_x"]), float(rec["k_factor"]))


def _table_from_modes(modes, n0, x_max, max_width, fsr_x=float("nan")):
    if not modes:
        raise ValueError("mode table is empty")
    pols = {m.pol for m in modes}
    if len(pols) != 1:
        raise ValueError("mixed polarizations in one table")
    return ModeTable(n0=n0, pol=pols.pop(), modes=tuple(modes), x_max=x_max,
                     max_width=max_width, fsr_x=fsr_x)


def table_from_csv(text, n0, x_max, max_width):
    """Read a table written by :func:`table_to_csv`.

    The CSV holds only the modes, so the table parameters are passed in.
    """
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != TABLE_COLUMNS:
        raise ValueError(f"expected columns {','.join(TABLE_COLUMNS)}")
    return _table_from_modes([_mode_from_fields(r) for r in reader], n0, x_max, max_width)


def table_to_json(table):
    """Table parameters plus one record per mode."""
    doc = {
        "solver_version": SOLVER_VERSION,
        "n0": table.n0,
        "pol": table.pol.value,
        "x_max": table.x_max,
        "max_width": table.max_width,
        "fsr_x": table.fsr_x,
        "modes": [dict(zip(TABLE_COLUMNS, (m.pol.value, m.l, m.j, m.x.real, m.x.imag,
                                           m.width_x, float(m.k_factor))))
                  for m in table.modes],
    }
    return json.dumps(doc, indent=1) + "\n"


def table_from_json(text):
    doc = json.loads(text)
    modes = [_mode_from_fields(r) for r in doc["modes"]]
    return _table_from_modes(modes, doc["n0"], doc["x_max"], doc["max_width"], doc["fsr_x"])

"""Surface density of states and decay rates of a broadened surface emitter.

Everything inside this module works in the size parameter ``x = w a / c``.
Laboratory quantities are converted at the boundary:

    alpha = 2 pi / lambda0          [1/um]
    beta  = 2 pi * gamma_h_cm * 1e-4  [1/um]
    x0 = alpha a,   Gamma_h^x = beta a

The density of states on the surface is a sum of Lorentzians, one per TE
resonance, each carrying the weight ``K gamma = (2l+1)/((n0^2-1) (Re x)^2)``.
An emitter with homogeneous width ``Gamma_h`` sees the same sum with every
resonance broadened by ``Gamma_h``; its weak-coupling rate is that sum
scaled by ``3/m``.
"""

from dataclasses import dataclass, field, asdict
from enum import Enum
import csv
import io
import json
import math
import warnings

import numpy as np

from .errors import (
    CurvePointError, DomainError, DropletQEDError, RangeError, RegimeError, ValidationError,
)
from .qnm import Polarization, QnmMode, fsr_spacing, least_leaky_mode

# speed of light in um/s
C_UM_PER_S = 2.99792458e14

STRONG_FACTOR = 100.0
DEFAULT_WINDOW_FSR = 30.0


class BackgroundWarning(UserWarning):
    """The background share went negative; the closed form is outside its range."""


class Regime(str, Enum):
    WEAK = "weak"
    STRONG = "strong"
    INTERMEDIATE = "intermediate"


class Method(str, Enum):
    CLOSED_FORM = "closed_form"
    MODE_SUM = "mode_sum"


@dataclass(frozen=True)
class SphereSpec:
    """Dielectric sphere of index ``n0`` and radius ``radius_um``."""

    n0: float
    radius_um: float

    def __post_init__(self):
        if not (math.isfinite(self.n0) and self.n0 > 1):
            raise ValidationError("n0", f"must exceed 1, got {self.n0}")
        if not (0 < self.radius_um < 1e4):
            raise ValidationError("radius_um", f"must lie in (0, 1e4), got {self.radius_um}")


@dataclass(frozen=True)
class EmitterSpec:
    """Lorentzian emitter.

    Parameters
    ----------
    lambda0_nm : float
        Center wavelength of the transition in nm.
    gamma_h_cm : float
        Homogeneous FWHM as a wavenumber in 1/cm.
    dipole_dof : int
        Number of dipole degrees of freedom, 1 to 3.  A dipole lying in the
        surface has two.
    tau0_ns : float
        Vacuum lifetime in ns.
    """

    lambda0_nm: float = 560.0
    gamma_h_cm: float = 50.0
    dipole_dof: int = 2
    tau0_ns: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.lambda0_nm) and self.lambda0_nm > 0):
            raise ValidationError("lambda0_nm", f"must be positive, got {self.lambda0_nm}")
        if not (math.isfinite(self.gamma_h_cm) and self.gamma_h_cm >= 0):
            raise ValidationError("gamma_h_cm", f"must be >= 0, got {self.gamma_h_cm}")
        if self.dipole_dof not in (1, 2, 3):
            raise ValidationError("dipole_dof", f"must be 1, 2 or 3, got {self.dipole_dof}")
        if not (math.isfinite(self.tau0_ns) and self.tau0_ns > 0):
            raise ValidationError("tau0_ns", f"must be positive, got {self.tau0_ns}")

    @classmethod
    def from_wavenumbers(cls, alpha, beta, dipole_dof=2, tau0_ns=1.0):
        """Build from ``alpha`` and ``beta`` given directly in 1/um."""
        if not (alpha > 0 and beta >= 0):
            raise ValidationError("alpha", "alpha must be positive and beta non-negative")
        return cls(2 * math.pi / alpha * 1e3, beta / (2 * math.pi * 1e-4), dipole_dof, tau0_ns)

    @property
    def alpha(self):
        """Vacuum wavenumber ``2 pi/lambda0`` in 1/um."""
        return 2 * math.pi / (self.lambda0_nm * 1e-3)

    @property
    def beta(self):
        """Homogeneous width as an angular wavenumber in 1/um."""
        return 2 * math.pi * self.gamma_h_cm * 1e-4

    def size_parameter(self, radius_um):
        return self.alpha * radius_um

    def gamma_h_x(self, radius_um):
        """Homogeneous width in units of the size parameter."""
        return self.beta * radius_um


@dataclass(frozen=True)
class DecayResult:
    rate_vs_vacuum: float
    rate_vs_bulk: float
    regime: Regime
    dominant_mode: QnmMode | None = None


@dataclass(frozen=True)
class DecayCurve:
    """Rate relative to the bulk value, sampled over radius.

    ``params`` is a flat snapshot of everything the curve depends on
    (index, emitter, local-field factor, spacing, method).
    """

    points: tuple
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = tuple((float(a), float(r)) for a, r in self.points)
        radii = [a for a, _ in pts]
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValidationError("points", "radii must be strictly increasing")
        if not all(math.isfinite(r) and r > 0 for _, r in pts):
            raise ValidationError("points", "rates must be finite and positive")
        object.__setattr__(self, "points", pts)

    @property
    def radii(self):
        return np.array([a for a, _ in self.points])

    @property
    def rates(self):
        return np.array([r for _, r in self.points])

    def to_csv(self):
        return _write_csv(("radius_um", "rate_vs_bulk"), self.points)

    @classmethod
    def from_csv(cls, text, params=None):
        rows = _read_csv(text, ("radius_um", "rate_vs_bulk"))
        return cls(points=tuple(rows), params=dict(params or {}))

    def to_json(self):
        doc = {"params": self.params,
               "points": [{"radius_um": a, "rate_vs_bulk": r} for a, r in self.points]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        pts = tuple((p["radius_um"], p["rate_vs_bulk"]) for p in doc["points"])
        return cls(points=pts, params=doc.get("params", {}))


def _write_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        # repr gives the shortest decimal that round-trips
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _read_csv(text, header):
    reader = csv.reader(io.StringIO(text))
    got = next(reader, None)
    if got is None or tuple(h.strip() for h in got) != tuple(header):
        raise ValidationError("header", f"expected {','.join(header)}, got {got}")
    return [tuple(float(v) for v in row) for row in reader if row]


def dos_to_csv(x, dos):
    return _write_csv(("x", "dos_over_rho0"), zip(np.atleast_1d(x), np.atleast_1d(dos)))


def dos_to_json(x, dos, params=None):
    doc = {"params": dict(params or {}),
           "points": [{"x": float(a), "dos_over_rho0": float(b)}
                      for a, b in zip(np.atleast_1d(x), np.atleast_1d(dos))]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def dos_from_csv(text):
    rows = _read_csv(text, ("x", "dos_over_rho0"))
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def dos_from_json(text):
    doc = json.loads(text)
    x = np.array([p["x"] for p in doc["points"]], dtype=float)
    return x, np.array([p["dos_over_rho0"] for p in doc["points"]], dtype=float)


def _weights(table):
    """``(Re x, width, K gamma)`` arrays of a TE table."""
    if table.pol is not Polarization.TE:
        raise DomainError("the surface density of states is built from TE modes only")
    l, rx, width, _ = table.arrays()
    kg = (2 * l + 1) / ((table.n0**2 - 1) * rx**2)
    return rx, width, kg


def _check_coverage(table, x):
    lo, hi = table.coverage()
    x = np.atleast_1d(x)
    if x.size and (x.min() < lo or x.max() > hi):
        raise RangeError(f"x outside the table coverage [{lo:.4g}, {hi:.4g}]")


def lorentzian_sum(x, re_x, width, k_gamma, extra_width_x=0.0):
    """``sum K gamma g/((2 (x - Re x))^2 + g^2)`` with ``g = width + extra_width_x``.

    Each term is a Lorentzian of FWHM ``g`` whose peak is ``K gamma/g``.
    This is the density of states for ``extra_width_x = 0`` and, times
    ``3/m``, the broadened emitter's rate otherwise.
    """
    re_x, width, k_gamma = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (re_x, width, k_gamma))
    g = width + extra_width_x
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array([np.sum(k_gamma * g / ((2 * (xv - re_x)) ** 2 + g**2)) for xv in xs])
    return float(out[0]) if np.ndim(x) == 0 else out


def density_of_states(x, table, extra_width_x=0.0, window_fsr=None):
    """Surface density of states ``rho/rho0`` from a TE mode table.

    Parameters
    ----------
    x : float or array_like
        Size parameter(s), inside ``table.coverage()``.
    table : ModeTable
        TE resonances.
    extra_width_x : float
        Added to every resonance width.  Zero gives the bare cavity
        spectrum; the emitter's ``Gamma_h^x`` gives the spectrum it
        effectively samples.  Peak weights ``K gamma`` are kept.
    window_fsr : float, optional
        Keep only resonances within this many local spacings of each ``x``.
        By default every resonance in the table contributes.

    Raises
    ------
    RangeError
        If any ``x`` falls outside the table coverage.
    """
    if extra_width_x < 0:
        raise DomainError("extra_width_x must be non-negative")
    _check_coverage(table, x)
    rx, width, kg = _weights(table)
    if window_fsr is None:
        return lorentzian_sum(x, rx, width, kg, extra_width_x)
    out = []
    for xv in np.atleast_1d(x):
        near = np.abs(rx - xv) <= window_fsr * fsr_spacing(table, xv)
        out.append(lorentzian_sum(xv, rx[near], width[near], kg[near], extra_width_x))
    return out[0] if np.ndim(x) == 0 else np.array(out)


def dos_band_integral(table, x_lo, x_hi, extra_width_x=0.0):
    """Exact integral of :func:`density_of_states` over ``[x_lo, x_hi]``.

    Each Lorentzian integrates to an arctangent, so arbitrarily narrow
    resonances are handled without quadrature error.
    """
    _check_coverage(table, [x_lo, x_hi])
    rx, width, kg = _weights(table)
    g = width + extra_width_x
    return float(np.sum(0.5 * kg * (np.arctan(2 * (x_hi - rx) / g) - np.arctan(2 * (x_lo - rx) / g))))


def real_cavity_factor(n0):
    """Local-field factor ``(3 n0^2/(2 n0^2 + 1))^2`` of an empty spherical cavity."""
    if not n0 >= 1:
        raise DomainError(f"n0 must be at least 1, got {n0}")
    return (3 * n0**2 / (2 * n0**2 + 1)) ** 2


def bulk_asymptote(n0, xi_lc):
    """Large-radius limit ``3/(2 n0 xi)`` of the closed-form rate."""
    return 3 / (2 * n0 * xi_lc)


def extract_local_field_factor(g, n0):
    """Local-field factor implied by the large-radius rate ``g``."""
    if not g > 0:
        raise DomainError(f"g must be positive, got {g}")
    if not n0 > 1:
        raise DomainError(f"n0 must exceed 1, got {n0}")
    return 3 / (2 * n0 * g)


def background_weight(k_times_gamma, fsr_x):
    """Share of the average density left outside the resonant mode.

    May be negative, which means the resonance alone exceeds the sum rule.
    """
    if not fsr_x > 0:
        raise DomainError("fsr_x must be positive")
    return 1 - (math.pi / 2) * k_times_gamma / fsr_x


def classify_coupling(emitter, sphere, mode):
    """Compare the vacuum Rabi term with the damping of the single-mode equation.

    Returns ``(regime, margin)`` with ``margin = (K gamma/tau0)/((Gamma_h+gamma)/2)^2``
    evaluated in 1/s^2.  Strong above 100, weak below 1/100.
    """
    a = sphere.radius_um
    to_rate = C_UM_PER_S / a          # x-width -> angular frequency
    gamma = mode.width_x * to_rate
    gamma_h = emitter.gamma_h_x(a) * to_rate
    tau0 = emitter.tau0_ns * 1e-9
    lhs = mode.k_gamma * to_rate / tau0
    rhs = ((gamma_h + gamma) / 2) ** 2
    margin = math.inf if rhs == 0 else lhs / rhs
    if margin > STRONG_FACTOR:
        return Regime.STRONG, margin
    if margin < 1 / STRONG_FACTOR:
        return Regime.WEAK, margin
    return Regime.INTERMEDIATE, margin


def _sinhc(z):
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    return np.where(small, 1 + z * z / 6, np.sinh(zs) / zs)


def single_mode_amplitude(K, gamma, gamma_h, tau0, t):
    """Excited-state amplitude coupled to one damped mode.

    Solves ``C'' + ((gamma_h + gamma)/2) C' + (K gamma/(4 tau0)) C = 0`` with
    ``C(0) = 1``, ``C'(0) = 0``.  Written as
    ``exp(-b t/2) (cosh(s t) + (b/2) t sinhc(s t))`` with ``b = (gamma_h+gamma)/2``
    and ``s^2 = b^2/4 - K gamma/(4 tau0)``, which is continuous through the
    critically damped point.  Rates share one inverse-time unit with ``t``.
    """
    b = (gamma_h + gamma) / 2
    w2 = K * gamma / (4 * tau0)
    s = np.sqrt(complex(b * b / 4 - w2))
    t = np.asarray(t, dtype=float)
    c = np.exp(-b * t / 2) * (np.cosh(s * t) + (b / 2) * t * _sinhc(s * t))
    return complex(c) if c.ndim == 0 else c


def decay_rate_general(emitter, sphere, table, xi_lc, window_fsr=DEFAULT_WINDOW_FSR):
    """Weak-coupling rate from the full resonance sum.

    Every TE resonance within ``window_fsr`` spacings of ``x0 = alpha a``
    contributes ``K gamma (Gamma_h + gamma)/((2 dx)^2 + (Gamma_h + gamma)^2)``;
    the sum times ``3/m`` is the rate relative to vacuum.

    Raises
    ------
    RegimeError
        If the resonance nearest ``x0`` is strongly coupled.
    RangeError
        If the table does not reach ``x0 + window_fsr * fsr``.
    """
    if not xi_lc > 0:
        raise DomainError("xi_lc must be positive")
    if abs(sphere.n0 - table.n0) > 1e-12:
        raise DomainError(f"sphere index {sphere.n0} differs from table index {table.n0}")
    a = sphere.radius_um
    x0 = emitter.size_parameter(a)
    _check_coverage(table, x0)
    fsr = fsr_spacing(table, x0)
    if x0 + window_fsr * fsr > table.x_max:
        raise RangeError(f"table ends at x = {table.x_max:g}, sum needs {x0 + window_fsr * fsr:.4g}")

    mode = least_leaky_mode(table, x0)
    regime, _ = classify_coupling(emitter, sphere, mode)
    if regime is Regime.STRONG:
        raise RegimeError(f"a = {a:g} um is strongly coupled to l = {mode.l}; the Markov rate is invalid")

    rx, width, kg = _weights(table)
    near = np.abs(rx - x0) <= window_fsr * fsr
    total = lorentzian_sum(x0, rx[near], width[near], kg[near], emitter.gamma_h_x(a))
    vac = 3 / emitter.dipole_dof * total
    return DecayResult(vac, vac / (sphere.n0 * xi_lc), regime, mode)


def decay_rate_closed_form(emitter, sphere, xi_lc, fsr_x):
    """Rate relative to the bulk value with the ``1/a`` and ``1/a^2`` terms.

    One resonant least-leaky mode of weight ``2 n0/((n0^2-1) x0)`` on top of
    the background it leaves behind in the sum rule, for a tangential dipole.

    Raises
    ------
    DomainError
        For ``dipole_dof != 2`` or zero homogeneous width.
    """
    if emitter.dipole_dof != 2:
        raise DomainError("the closed form holds for tangential dipoles (dipole_dof = 2)")
    if emitter.beta == 0:
        raise DomainError("the closed form is singular for gamma_h = 0; use the mode sum")
    if not (xi_lc > 0 and fsr_x > 0):
        raise DomainError("xi_lc and fsr_x must be positive")
    n0, a = sphere.n0, sphere.radius_um
    c = 2 * n0 / (n0**2 - 1) / emitter.alpha
    bracket = 1 + c * (1 / (emitter.beta * a * a) - (math.pi / 2) / (fsr_x * a))
    return 1.5 * bracket / (n0 * xi_lc)


def curve_params(emitter, n0, xi_lc, fsr_x, method):
    return {
        "n0": n0,
        **asdict(emitter),
        "xi_lc": xi_lc,
        "fsr_x": fsr_x,
        "method": Method(method).value,
    }


def build_decay_curve(emitter, n0, radii, xi_lc, method, table=None, fsr_x=None):
    """Evaluate one method over a strictly increasing list of radii.

    ``fsr_x`` is needed by the closed form; for the mode sum it defaults to
    the table's own spacing and is recorded in the snapshot only.

    Raises
    ------
    CurvePointError
        Wrapping the error of the first failing radius.
    """
    method = Method(method)
    radii = [float(a) for a in radii]
    if method is Method.MODE_SUM and table is None:
        raise DomainError("the mode sum needs a mode table")
    if fsr_x is None:
        if table is None:
            raise DomainError("the closed form needs fsr_x or a table")
        fsr_x = table.fsr_x
    points = []
    negative = []
    for a in radii:
        try:
            sphere = SphereSpec(n0, a)
            if method is Method.CLOSED_FORM:
                rate = decay_rate_closed_form(emitter, sphere, xi_lc, fsr_x)
                kg = 2 * n0 / ((n0**2 - 1) * emitter.size_parameter(a))
                if background_weight(kg, fsr_x) < 0:
                    negative.append(a)
            else:
                rate = decay_rate_general(emitter, sphere, table, xi_lc).rate_vs_bulk
        except DropletQEDError as exc:
            raise CurvePointError(a, exc) from exc
        points.append((a, rate))
    if negative:
        warnings.warn(
            f"background weight is negative for {len(negative)} radii (first {negative[0]:g} um); "
            "the resonance exceeds the sum rule there",
            BackgroundWarning, stacklevel=2,
        )
    return DecayCurve(points=tuple(points), params=curve_params(emitter, n0, xi_lc, fsr_x, method))

import math

import numpy as np
import pytest

from droplet_qed import emission as em
from droplet_qed import qnm
from droplet_qed.emission import EmitterSpec, SphereSpec
from droplet_qed.errors import (
    CurvePointError, DomainError, RangeError, RegimeError, ValidationError,
)

from oracles import kernel_equation_amplitude, volterra_amplitude

N0 = 1.47
XI_RC = 1.4838662260554587
# emitter with the rounded wavenumbers alpha = 11.2, beta = 0.0314
REFERENCE_EMITTER = EmitterSpec.from_wavenumbers(11.2, 0.0314)


def sphere(a):
    return SphereSpec(N0, a)


# ---------------------------------------------------------------- specs

def test_wavenumbers_from_lab_units():
    e = EmitterSpec()
    assert abs(e.alpha / 11.2 - 1) < 5e-3
    assert abs(e.beta / 0.0314 - 1) < 5e-3
    assert abs(e.alpha - 11.219973762820688) < 1e-12
    assert abs(REFERENCE_EMITTER.alpha - 11.2) < 1e-12 and abs(REFERENCE_EMITTER.beta - 0.0314) < 1e-15


@pytest.mark.parametrize("kw", [
    {"lambda0_nm": 0}, {"gamma_h_cm": -1}, {"dipole_dof": 4}, {"tau0_ns": 0},
])
def test_emitter_validation(kw):
    with pytest.raises(ValidationError):
        EmitterSpec(**kw)


def test_sphere_validation():
    for n0, a in [(1.0, 1.0), (1.47, 0.0), (1.47, 1e4)]:
        with pytest.raises(ValidationError):
            SphereSpec(n0, a)


# ------------------------------------------------- local-field factors

def test_real_cavity_factor():
    assert em.real_cavity_factor(1.0) == 1.0
    # 1.48389 as usually quoted is rounded up by 2.4e-5
    assert abs(em.real_cavity_factor(N0) - 1.483866) < 1e-6
    assert abs(em.real_cavity_factor(1e6) - 9 / 4) < 1e-9
    with pytest.raises(DomainError):
        em.real_cavity_factor(0.9)


def test_extract_local_field_factor():
    assert abs(em.extract_local_field_factor(3 / (2 * N0), N0) - 1) < 1e-15
    # 0.6877 is itself rounded, hence the looser bound
    assert abs(em.extract_local_field_factor(0.6877, N0) - 1.4839) < 2e-4
    assert abs(em.extract_local_field_factor(0.729, N0) - 1.400) < 1e-3
    with pytest.raises(DomainError):
        em.extract_local_field_factor(0.0, N0)


def test_background_weight():
    assert em.background_weight(0.0, 0.7) == 1.0
    assert abs(em.background_weight(2 / math.pi * 0.7, 0.7)) < 1e-15
    kg = 2.5325 / 84
    assert abs(em.background_weight(kg, 0.7) - 0.932346) < 1e-6
    assert em.background_weight(1.0, 0.7) < 0
    with pytest.raises(DomainError):
        em.background_weight(0.1, 0.0)


# ------------------------------------------------------------ closed form

# evaluated by hand from the formula before the build
@pytest.mark.parametrize("a,expected", [
    (2.0, 1.7512143483848168), (7.5, 0.7291811106385617), (50.0, 0.6826708288120105),
])
def test_closed_form_values(a, expected):
    got = em.decay_rate_closed_form(REFERENCE_EMITTER, sphere(a), XI_RC, 0.7)
    assert abs(got / expected - 1) < 1e-6


def test_closed_form_guards():
    with pytest.raises(DomainError):
        em.decay_rate_closed_form(EmitterSpec(dipole_dof=3), sphere(5), XI_RC, 0.7)
    with pytest.raises(DomainError):
        em.decay_rate_closed_form(EmitterSpec(gamma_h_cm=0), sphere(5), XI_RC, 0.7)


def test_closed_form_curve():
    c = em.build_decay_curve(REFERENCE_EMITTER, N0, [2, 7.5, 50], XI_RC, "closed_form", fsr_x=0.7)
    assert np.allclose(c.rates, [1.7512143483848168, 0.7291811106385617, 0.6826708288120105], rtol=1e-6)
    assert c.params["xi_lc"] == XI_RC and c.params["fsr_x"] == 0.7
    radii = np.linspace(40, 400, 50)
    c = em.build_decay_curve(REFERENCE_EMITTER, N0, radii, XI_RC, "closed_form", fsr_x=0.7)
    lim = em.bulk_asymptote(N0, XI_RC)
    assert np.all(np.abs(c.rates / lim - 1) < 0.01)
    # past the minimum the curve climbs back to the limit from below
    c = em.build_decay_curve(REFERENCE_EMITTER, N0, np.linspace(1, 20, 200), XI_RC, "closed_form", fsr_x=0.7)
    assert np.all(np.diff(c.rates[:100]) < 0)


def test_empty_curve_keeps_params():
    c = em.build_decay_curve(REFERENCE_EMITTER, N0, [], XI_RC, "closed_form", fsr_x=0.7)
    assert c.points == () and c.params["n0"] == N0


def test_negative_background_warns():
    with pytest.warns(em.BackgroundWarning):
        em.build_decay_curve(REFERENCE_EMITTER, N0, [0.2, 0.3], XI_RC, "closed_form", fsr_x=0.7)


def test_curve_serialization_round_trip():
    c = em.build_decay_curve(REFERENCE_EMITTER, N0, np.linspace(1, 3, 7), XI_RC, "closed_form", fsr_x=0.7)
    text = c.to_csv()
    assert text.splitlines()[0] == "radius_um,rate_vs_bulk"
    assert em.DecayCurve.from_csv(text).points == c.points
    back = em.DecayCurve.from_json(c.to_json())
    assert back.points == c.points and back.params == c.params
    with pytest.raises(ValidationError):
        em.DecayCurve(points=((2.0, 1.0), (1.0, 1.0)))


# ------------------------------------------------------- coupling regime

def _mode(x, l=140):
    w = 2 * abs(x.imag)
    k = (2 * l + 1) / ((N0**2 - 1) * x.real**2) / w
    return qnm.QnmMode(qnm.Polarization.TE, l, 1, x, w, k)


def test_typical_broadening_is_weak():
    e = EmitterSpec(gamma_h_cm=100, tau0_ns=1)
    m = _mode(100 - 1e-12j)
    regime, margin = em.classify_coupling(e, sphere(10), m)
    assert regime is em.Regime.WEAK and margin < 1e-2


def test_vanishing_damping_is_strong():
    e = EmitterSpec(gamma_h_cm=0, tau0_ns=1)
    margins = []
    for w in (1e-6, 1e-9, 1e-12):
        regime, margin = em.classify_coupling(e, sphere(10), _mode(100 - 0.5j * w))
        margins.append(margin)
    assert regime is em.Regime.STRONG
    assert margins[0] < margins[1] < margins[2]


def test_margin_decreases_with_broadening():
    m = _mode(100 - 1e-10j)
    margins = [em.classify_coupling(EmitterSpec(gamma_h_cm=g), sphere(10), m)[1]
               for g in np.linspace(0.01, 200, 40)]
    assert np.all(np.diff(margins) < 0)


# ------------------------------------------------- single-mode dynamics

def test_amplitude_without_coupling():
    t = np.linspace(0, 20, 11)
    assert np.allclose(em.single_mode_amplitude(0.0, 0.3, 1.0, 1.0, t), 1.0)


def test_amplitude_rabi_limit():
    t = np.linspace(0, 20, 201)
    K, tau0 = 8.0, 2.0
    # gamma_h = -gamma removes the damping term entirely
    c = em.single_mode_amplitude(K, 0.5, -0.5, tau0, t)
    w = math.sqrt(K * 0.5 / (4 * tau0))
    assert np.allclose(c, np.cos(w * t), atol=1e-12)


def test_amplitude_generic_against_kernel_equation():
    t = np.linspace(0, 20, 401)
    got = em.single_mode_amplitude(5.0, 0.2, 1.0, 1.0, t)
    ref = kernel_equation_amplitude(5.0, 0.2, 1.0, 1.0, t)
    assert np.max(np.abs(got - ref)) < 1e-6
    tv, cv = volterra_amplitude(5.0, 0.2, 1.0, 1.0, 20.0, 0.01)
    assert np.max(np.abs(em.single_mode_amplitude(5.0, 0.2, 1.0, 1.0, tv).real - cv)) < 1e-3


def test_amplitude_critical_damping_is_continuous():
    # damping coefficient b = (gamma_h + gamma)/2 = 0.6 and K gamma/(4 tau0) = b^2/4
    b, gamma, tau0 = 0.6, 0.3, 1.0
    K = b * b / gamma
    t = np.linspace(0, 20, 81)
    c = em.single_mode_amplitude(K, gamma, 2 * b - gamma, tau0, t)
    lam = -b / 2
    assert np.allclose(c, (1 - lam * t) * np.exp(lam * t), atol=1e-12)
    near = em.single_mode_amplitude(K * (1 + 1e-9), gamma, 2 * b - gamma, tau0, t)
    assert np.max(np.abs(near - c)) < 1e-7


def test_amplitude_satisfies_its_equation():
    K, gamma, gamma_h, tau0 = 3.0, 0.4, 0.7, 1.5
    h = 1e-3
    t = np.arange(0, 20 + h / 2, h)
    c = em.single_mode_amplitude(K, gamma, gamma_h, tau0, t).real
    d1 = (c[2:] - c[:-2]) / (2 * h)
    d2 = (c[2:] - 2 * c[1:-1] + c[:-2]) / h**2
    res = d2 + (gamma_h + gamma) / 2 * d1 + K * gamma / (4 * tau0) * c[1:-1]
    assert np.max(np.abs(res)) < 1e-6 * np.max(np.abs(c))


# --------------------------------------------------- density of states

def test_single_lorentzian_values():
    K, w = 40.0, 0.02
    kg = K * w
    assert abs(em.lorentzian_sum(10.0, [10.0], [w], [kg]) - K) < 1e-12
    assert abs(em.lorentzian_sum(10.0 + w / 2, [10.0], [w], [kg]) - K / 2) < 1e-12


def test_limiting_cases_single_mode():
    K, w = 500.0, 1e-3
    kg = K * w
    # m = 3 on resonance: rate = K gamma/(Gamma_h + gamma)
    narrow = 3 / 3 * em.lorentzian_sum(7.0, [7.0], [w], [kg], extra_width_x=w / 1e3)
    assert abs(narrow / K - 1) < 0.01
    fsr = 0.7
    gh = 1e3 * w
    broad = em.lorentzian_sum(7.0, [7.0], [w], [fsr], extra_width_x=gh)
    assert abs(broad / (fsr / gh) - 1) < 0.01


def test_dos_positive_and_guarded(small_table):
    lo, hi = small_table.coverage()
    xs = np.linspace(lo, hi, 3001)
    assert np.all(em.density_of_states(xs, small_table) > 0)
    with pytest.raises(RangeError):
        em.density_of_states(hi + 1, small_table)
    tm = qnm.build_mode_table("TM", N0, 20.0)
    with pytest.raises(DomainError):
        em.density_of_states(10.0, tm)


def test_band_integral_matches_quadrature(small_table):
    # broadened spectrum is smooth enough for plain quadrature
    from scipy import integrate
    a, b = 30.0, 31.5
    xs = np.linspace(a, b, 20001)
    ys = em.density_of_states(xs, small_table, 0.05)
    assert abs(integrate.simpson(ys, x=xs) / em.dos_band_integral(small_table, a, b, 0.05) - 1) < 1e-6


def test_width_substitution_matches_rate(te_table):
    e = EmitterSpec()
    for a in (4.0, 7.5, 12.0):
        x0 = e.size_parameter(a)
        res = em.decay_rate_general(e, sphere(a), te_table, XI_RC)
        dos = em.density_of_states(x0, te_table, e.gamma_h_x(a), window_fsr=em.DEFAULT_WINDOW_FSR)
        assert abs(3 / e.dipole_dof * dos / res.rate_vs_vacuum - 1) < 1e-9
        assert res.rate_vs_bulk == res.rate_vs_vacuum / (N0 * XI_RC)
        assert res.regime is em.Regime.WEAK and res.dominant_mode.j == 1


def test_general_rate_guards(te_table):
    with pytest.raises(RangeError):
        em.decay_rate_general(EmitterSpec(), sphere(16.5), te_table, XI_RC)
    strong = EmitterSpec(gamma_h_cm=0, tau0_ns=1)
    m = qnm.least_leaky_mode(te_table, 100.0)
    a = m.re_x / strong.alpha
    with pytest.raises(RegimeError):
        em.decay_rate_general(strong, sphere(a), te_table, XI_RC)
    with pytest.raises(CurvePointError, match="radius 16.5"):
        em.build_decay_curve(EmitterSpec(), N0, [5, 16.5], XI_RC, "mode_sum", table=te_table)
    with pytest.raises(DomainError):
        em.build_decay_curve(EmitterSpec(), N0, [5], XI_RC, "mode_sum")


def test_dos_csv_round_trip():
    x = np.array([1.0, 1.5, 2.0])
    y = np.array([0.3, 1 / 3, 2.5])
    bx, by = em.dos_from_csv(em.dos_to_csv(x, y))
    assert np.array_equal(bx, x) and np.array_equal(by, y)
    bx, by = em.dos_from_json(em.dos_to_json(x, y))
    assert np.array_equal(bx, x) and np.array_equal(by, y)

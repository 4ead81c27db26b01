"""Command-line front end.

    droplet-qed modes        solve (or load) the TE table for the sweep
    droplet-qed dos          density of states over the sweep
    droplet-qed decay-curve  rate versus radius, optionally the three-curve preset
    droplet-qed extract-lfc  local-field factor from a large-radius rate

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then command-line flags.  Radii are in micrometers.
"""

import argparse
import json
from dataclasses import dataclass, replace
import logging
import math
import os
from pathlib import Path
import sys
import tempfile

import numpy as np

from . import emission, qnm
from .emission import EmitterSpec, Method
from .errors import DropletQEDError, ParseError, ValidationError

log = logging.getLogger("droplet_qed")

CACHE_ENV = "DROPLET_QED_CACHE"
FIG1_SCALES = (1.0, 0.95, 0.90)
FIG1_SWEEP = (1.0, 20.0, 400)

# marks a flag that was not given ("--xi real-cavity" legitimately parses to None)
_UNSET = object()

# spacing estimate used only to size tables before any mode is known
_FSR_GUESS = 0.75


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings.

    ``xi = None`` selects the real-cavity factor and ``fsr = None`` a
    computed spacing; a number fixes either explicitly.
    """

    n0: float = 1.47
    lambda0_nm: float = 560.0
    gamma_h_cm: float = 50.0
    dipole_dof: int = 2
    tau0_ns: float = 1.0
    xi: float | None = None
    fsr: float | None = None
    a_min: float = 1.0
    a_max: float = 20.0
    steps: int = 400
    method: Method = Method.CLOSED_FORM
    output_path: str | None = None
    output_format: str = "csv"

    def __post_init__(self):
        if not (math.isfinite(self.n0) and self.n0 > 1):
            raise ValidationError("n0", f"must exceed 1, got {self.n0}")
        for name in ("xi", "fsr"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ValidationError(name, f"must be positive, got {v}")
        if not (0 < self.a_min < self.a_max < 1e4):
            raise ValidationError("a_min", f"need 0 < a_min < a_max < 1e4, got {self.a_min}, {self.a_max}")
        if self.steps < 1:
            raise ValidationError("steps", f"must be at least 1, got {self.steps}")
        if self.output_format not in ("csv", "json"):
            raise ValidationError("format", f"must be csv or json, got {self.output_format!r}")
        object.__setattr__(self, "method", Method(self.method))
        self.emitter()

    def emitter(self):
        return EmitterSpec(self.lambda0_nm, self.gamma_h_cm, self.dipole_dof, self.tau0_ns)

    def radii(self):
        if self.steps == 1:
            return [self.a_min]
        return list(np.linspace(self.a_min, self.a_max, self.steps))

    def xi_value(self):
        return emission.real_cavity_factor(self.n0) if self.xi is None else self.xi


# config-file key -> (RunConfig field, parser)
def _float(text):
    return float(text)


def _int(text):
    v = float(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text}")
    return int(v)


def _xi(text):
    return None if text.strip().lower() in ("real-cavity", "real_cavity") else float(text)


def _fsr(text):
    return None if text.strip().lower() == "computed" else float(text)


def _method(text):
    return Method(text.strip().replace("-", "_"))


def _path(text):
    return text.strip() or None


_KEYS = {
    "n0": ("n0", _float),
    "lambda0_nm": ("lambda0_nm", _float),
    "gamma_h_cm": ("gamma_h_cm", _float),
    "m": ("dipole_dof", _int),
    "tau0_ns": ("tau0_ns", _float),
    "xi": ("xi", _xi),
    "fsr": ("fsr", _fsr),
    "a_min": ("a_min", _float),
    "a_max": ("a_max", _float),
    "steps": ("steps", _int),
    "method": ("method", _method),
    "out": ("output_path", _path),
    "format": ("output_format", str.strip),
}
_ALIASES = {"dipole_dof": "m", "output_path": "out", "output_format": "format"}


def _apply(values, base=None):
    """RunConfig from ``base`` with ``values`` (field name -> value) applied."""
    base = base or RunConfig()
    try:
        return replace(base, **values)
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("method", str(exc)) from None


def parse_config(source, base=None):
    """Parse ``key = value`` text into a :class:`RunConfig`.

    Blank lines and ``#`` comments are ignored.  Raises :class:`ParseError`
    for malformed lines or unknown keys and :class:`ValidationError` for
    values out of bounds.
    """
    values = {}
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key = value, got {raw.strip()!r}", line=lineno)
        key, text = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key).replace("-", "_")
        if key not in _KEYS:
            raise ParseError(f"unknown key {key!r}", line=lineno)
        name, conv = _KEYS[key]
        try:
            values[name] = conv(text)
        except ValueError as exc:
            raise ParseError(f"bad value for {key}: {exc}", line=lineno) from None
    return _apply(values, base)


def render(config):
    """Inverse of :func:`parse_config`: every field as one ``key = value`` line."""
    out = []
    for key, (name, _) in _KEYS.items():
        v = getattr(config, name)
        if name == "xi" and v is None:
            text = "real-cavity"
        elif name == "fsr" and v is None:
            text = "computed"
        elif v is None:
            text = ""
        elif isinstance(v, Method):
            text = v.value
        elif isinstance(v, float):
            text = repr(v)
        else:
            text = str(v)
        out.append(f"{key} = {text}")
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------- cache

def cache_dir():
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path.home() / ".cache" / "droplet_qed"


def cache_key(n0, pol, x_max, max_width):
    return (round(n0, 6), qnm.Polarization(pol).value, float(x_max), float(max_width), qnm.SOLVER_VERSION)


def _cache_path(key):
    n0, pol, x_max, width, version = key
    return cache_dir() / f"{pol}_n{n0:.6f}_x{x_max!r}_w{width!r}_v{version}.json"


def atomic_write(path, text):
    """Write ``text`` to a temporary sibling, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _load_cached(path, key):
    text = path.read_text(encoding="utf-8")
    table = qnm.table_from_json(text)
    version = json.loads(text).get("solver_version")
    got = cache_key(table.n0, table.pol, table.x_max, table.max_width)[:-1] + (version,)
    if got != key:
        raise ValueError(f"cache entry key {got} does not match {key}")
    return table


def load_or_solve(n0, x_max, max_width=None, pol="TE"):
    """Mode table for ``(n0, pol, x_max, max_width)``, from cache when possible.

    Returns ``(table, hit)``.  Unreadable entries are re-solved with a warning.
    """
    if max_width is None:
        max_width = 1.2 * qnm.asymptotic_width(n0)
    key = cache_key(n0, pol, x_max, max_width)
    path = _cache_path(key)
    if path.exists():
        try:
            return _load_cached(path, key), True
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            log.warning("cache entry %s is unreadable (%s); solving again", path, exc)
    table = qnm.build_mode_table(pol, round(n0, 6), x_max, max_width)
    try:
        atomic_write(path, qnm.table_to_json(table))
    except OSError as exc:
        log.warning("could not write cache entry %s: %s", path, exc)
    return table, False


def table_extent(config):
    """``x_max`` that covers the sweep plus the mode-sum window and coverage margin."""
    x_top = config.emitter().size_parameter(config.a_max)
    margin = (emission.DEFAULT_WINDOW_FSR + 6) * _FSR_GUESS
    # rounded up so that nearby sweeps share a cache entry
    return float(math.ceil((x_top + margin) / 5) * 5)


def _fsr_value(config, table=None):
    if config.fsr is not None:
        return config.fsr
    x_mid = config.emitter().size_parameter(0.5 * (config.a_min + config.a_max))
    if table is not None:
        return qnm.fsr_spacing(table, x_mid)
    return qnm.local_fsr("TE", config.n0, x_mid)


# -------------------------------------------------------------- commands

class _Stage(Exception):
    """Carries the failing stage name to the exit handler."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")


def _run_stage(stage, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (DropletQEDError, OSError, ValueError) as exc:
        raise _Stage(stage, exc) from exc


def _emit(path, text, check):
    """Write an output file (or stdout for ``None``/``-``) and read it back."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    atomic_write(path, text)
    check(Path(path).read_text(encoding="utf-8"))


def cmd_modes(config):
    x_max = table_extent(config)
    table, hit = _run_stage("solve", load_or_solve, config.n0, x_max)
    x_mid = config.emitter().size_parameter(0.5 * (config.a_min + config.a_max))
    fsr = _run_stage("fsr", qnm.fsr_spacing, table, x_mid)
    if config.output_format == "json":
        text, check = qnm.table_to_json(table), qnm.table_from_json
    else:
        text = qnm.table_to_csv(table)

        def check(t):
            qnm.table_from_csv(t, table.n0, table.x_max, table.max_width)
    _run_stage("write", _emit, config.output_path, text, check)
    print(
        f"{len(table)} TE modes up to x = {x_max:g} ({'cached' if hit else 'solved'}); "
        f"fsr at x = {x_mid:.4g}: {fsr:.6f}; asymptotic width {qnm.asymptotic_width(config.n0):.6f}",
        file=sys.stderr,
    )
    return 0


def cmd_dos(config, bare=False):
    table, _ = _run_stage("solve", load_or_solve, config.n0, table_extent(config))
    em = config.emitter()
    radii = np.asarray(config.radii())
    xs = em.alpha * radii
    if bare:
        dos = _run_stage("dos", emission.density_of_states, xs, table)
    else:
        dos = np.array([
            _run_stage("dos", emission.density_of_states, x, table, em.gamma_h_x(a))
            for x, a in zip(xs, radii)
        ])
    params = {"n0": config.n0, "lambda0_nm": config.lambda0_nm,
              "gamma_h_cm": 0.0 if bare else config.gamma_h_cm}
    if config.output_format == "json":
        text = emission.dos_to_json(xs, dos, params)

        def check(t):
            emission.dos_from_json(t)
    else:
        text = emission.dos_to_csv(xs, dos)

        def check(t):
            emission.dos_from_csv(t)
    _run_stage("write", _emit, config.output_path, text, check)
    return 0


def _curve_text(curve, fmt, overlay):
    if fmt == "json":
        if overlay is not None:
            curve = emission.DecayCurve(curve.points, {**curve.params, "overlay": overlay})
        return curve.to_json(), emission.DecayCurve.from_json
    if overlay is not None:
        log.warning("--overlay is recorded only in JSON output")
    return curve.to_csv(), emission.DecayCurve.from_csv


def _fig1_path(base, scale, fmt):
    base = Path(base or "fig1")
    stem = base.stem if base.suffix in (".csv", ".json") else base.name
    return str(base.with_name(f"{stem}_xi{round(scale * 100):03d}.{fmt}"))


def cmd_decay_curve(config, fig1=False, overlay=None):
    if overlay is not None:
        overlay = str(Path(overlay).resolve())
        if not Path(overlay).is_file():
            raise _Stage("overlay", FileNotFoundError(f"no such file: {overlay}"))
    if fig1:
        a_min, a_max, steps = FIG1_SWEEP
        config = replace(config, a_min=a_min, a_max=a_max, steps=steps, xi=None)
    table = None
    if config.method is Method.MODE_SUM:
        table, _ = _run_stage("solve", load_or_solve, config.n0, table_extent(config))
    fsr = _run_stage("fsr", _fsr_value, config, table)
    em = config.emitter()
    scales = FIG1_SCALES if fig1 else (None,)
    for scale in scales:
        xi = config.xi_value() if scale is None else scale * emission.real_cavity_factor(config.n0)
        curve = _run_stage("curve", emission.build_decay_curve, em, config.n0, config.radii(),
                           xi, config.method, table=table, fsr_x=fsr)
        text, check = _curve_text(curve, config.output_format, overlay)
        path = config.output_path if scale is None else _fig1_path(config.output_path, scale, config.output_format)
        _run_stage("write", _emit, path, text, check)
        if scale is not None:
            print(f"wrote {path} (xi = {xi:.6f})", file=sys.stderr)
    return 0


def cmd_extract_lfc(g, n0):
    xi = _run_stage("extract", emission.extract_local_field_factor, g, n0)
    xi_rc = emission.real_cavity_factor(n0)
    print(f"xi = {xi:.6f}")
    print(f"xi_real_cavity = {xi_rc:.6f}")
    print(f"ratio = {xi / xi_rc:.6f}")
    return 0


# ------------------------------------------------------------------ main

def _flag_value(text, conv):
    try:
        return conv(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value settings file")
    flags = [
        ("--n0", "n0", "refractive index of the droplet"),
        ("--lambda0-nm", "lambda0_nm", "emission line center [nm]"),
        ("--gamma-h-cm", "gamma_h_cm", "homogeneous linewidth [cm^-1]"),
        ("--m", "m", "dipole degrees of freedom (2 or 3)"),
        ("--tau0-ns", "tau0_ns", "free-space lifetime [ns]"),
        ("--xi", "xi", "local-field factor, a number or 'real-cavity'"),
        ("--fsr", "fsr", "mode spacing in x, a number or 'computed'"),
        ("--a-min", "a_min", "smallest radius [um]"),
        ("--a-max", "a_max", "largest radius [um]"),
        ("--steps", "steps", "number of radii"),
        ("--method", "method", "closed_form or mode_sum"),
        ("--out", "out", "output file (stdout if omitted)"),
        ("--format", "format", "csv or json"),
    ]
    for flag, key, text in flags:
        conv = _KEYS[key][1]
        common.add_argument(flag, dest=f"set_{key}", default=_UNSET, metavar=key.upper(), help=text,
                            type=lambda t, c=conv: _flag_value(t, c))

    parser = argparse.ArgumentParser(prog="droplet-qed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("modes", parents=[common], help="solve the TE mode table")
    p = sub.add_parser("dos", parents=[common], help="density of states over the sweep")
    p.add_argument("--bare", action="store_true", help="cavity spectrum without the emitter width")
    p = sub.add_parser("decay-curve", parents=[common], help="decay rate versus radius")
    p.add_argument("--fig1", action="store_true", help="three-curve preset, a in [1, 20] um")
    p.add_argument("--overlay", help="experimental data file to reference in JSON metadata")
    p = sub.add_parser("extract-lfc", help="local-field factor from a large-radius rate")
    p.add_argument("--g", type=float, required=True, help="measured rate relative to bulk")
    p.add_argument("--n0", type=float, default=1.47, help="refractive index of the droplet")
    return parser


def config_from_args(args):
    base = RunConfig()
    if args.config:
        base = parse_config(Path(args.config).read_text(encoding="utf-8"))
    values = {}
    for key, (name, _) in _KEYS.items():
        v = getattr(args, f"set_{key}", _UNSET)
        if v is not _UNSET:
            values[name] = v
    return _apply(values, base)


def main(argv=None):
    logging.basicConfig(format="%(levelname)s: %(message)s", level=logging.INFO)
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    try:
        if args.command == "extract-lfc":
            return cmd_extract_lfc(args.g, args.n0)
        try:
            config = config_from_args(args)
        except (DropletQEDError, OSError) as exc:
            raise _Stage("config", exc) from exc
        if args.command == "modes":
            return cmd_modes(config)
        if args.command == "dos":
            return cmd_dos(config, bare=args.bare)
        return cmd_decay_curve(config, fig1=args.fig1, overlay=args.overlay)
    except _Stage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

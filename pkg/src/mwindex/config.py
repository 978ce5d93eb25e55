"""Run configuration read from a TOML file.

Every dimensional quantity is an inline table ``{ value = ..., unit = "..." }``.
Accepted unit tags depend on the kind of quantity:

=============  ==========================================================
mass           amu, au (electron masses), si (kg)
length         si (m), au (bohr), fm
energy         si (J), au (hartree), K (k_B * kelvin)
C6 / C12       si (J m^6 / J m^12), au
density        si (1/m^3), mTorr (converted with the gas temperature)
temperature    K
speed          si (m/s)
polarizability au
=============  ==========================================================
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import constants as const
from .constants import CollisionSystem, ParticleSpecies
from .errors import ConfigError, MwIndexError
from .potentials import HardSphere, LennardJones, PureC6, ScatteringLength, SquareWell
from .thermal import DeltaRest, DriftingMB, MaxwellBoltzmann

FORMULA_NAMES = ("fixed_centers", "forrey", "fizeau_legacy", "corrected", "neutron")

_SCALES = {
    "mass": {"amu": const.AMU, "au": const.CONSTANTS.m_e, "si": 1.0},
    "length": {"si": 1.0, "au": const.A0, "fm": 1e-15},
    "energy": {"si": 1.0, "au": const.HARTREE, "K": const.K_B},
    "c6": {"si": 1.0, "au": const.c6_au_to_si(1.0)},
    "c12": {"si": 1.0, "au": const.c12_au_to_si(1.0)},
    "temperature": {"K": 1.0},
    "speed": {"si": 1.0},
    "polarizability": {"au": 1.0},
}


@dataclass(frozen=True)
class Scan:
    v_min: float
    v_max: float
    points: int
    spacing: str = "log"

    def velocities(self):
        if self.spacing == "log":
            v = np.geomspace(self.v_min, self.v_max, self.points)
        else:
            v = np.linspace(self.v_min, self.v_max, self.points)
        v[0], v[-1] = self.v_min, self.v_max
        return [float(x) for x in v]


@dataclass(frozen=True)
class McSettings:
    seed: int
    n_samples: int


@dataclass(frozen=True)
class RunConfig:
    projectile: ParticleSpecies
    target: ParticleSpecies
    potential: object
    n_t: float
    temperature: float | None
    distribution: object
    v_p: float | None
    scan: Scan | None
    L: float | None
    formulas: tuple
    output_path: str | None = None
    output_format: str = "csv"
    mc: McSettings | None = None
    neutron_imaginary: bool = False
    alpha_au: float | None = None
    C6_au: float | None = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def system(self) -> CollisionSystem:
        return CollisionSystem(self.projectile, self.target)

    def velocities(self):
        if self.scan is not None:
            return self.scan.velocities()
        if self.v_p is None:
            raise ConfigError("beam.v_p or beam.scan is required")
        return [self.v_p]


def quantity(table, key, kind, *, required=True, default=None):
    """Read ``table[key]`` as ``{value, unit}`` and convert to SI."""
    if key not in table:
        if required:
            raise ConfigError(f"missing quantity '{key}'")
        return default
    item = table[key]
    if not isinstance(item, dict) or "value" not in item or "unit" not in item:
        raise ConfigError(f"'{key}' must be an inline table {{ value = ..., unit = \"...\" }}")
    unit = item["unit"]
    scales = _SCALES[kind]
    if unit not in scales:
        raise ConfigError(f"unit '{unit}' not allowed for {kind} '{key}' (use one of {sorted(scales)})")
    value = item["value"]
    if isinstance(value, list):
        return [_number(key, v) * scales[unit] for v in value]
    return _number(key, value) * scales[unit]


def _number(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' value must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"'{key}' value must be finite")
    return float(value)


def _section(doc, name, required=True):
    sec = doc.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"missing [{name}] section")
        return None
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return sec


def _species(doc, name):
    sec = _section(doc, name)
    return ParticleSpecies(str(sec.get("label", name)), quantity(sec, "mass", "mass"))


def _potential(sec):
    branch = sec.get("branch")
    if branch == "pure_c6":
        return PureC6(quantity(sec, "C6", "c6"))
    if branch == "lennard_jones":
        if "epsilon" in sec or "r_m" in sec:
            return LennardJones.from_well(quantity(sec, "epsilon", "energy"), quantity(sec, "r_m", "length"))
        return LennardJones(quantity(sec, "C12", "c12"), quantity(sec, "C6", "c6"))
    if branch == "hard_sphere":
        return HardSphere(quantity(sec, "R", "length"))
    if branch == "square_well":
        return SquareWell(quantity(sec, "V0", "energy"), quantity(sec, "R", "length"))
    if branch == "scattering_length":
        return ScatteringLength(quantity(sec, "a", "length"))
    raise ConfigError(
        f"unknown potential branch {branch!r}; expected pure_c6, lennard_jones, "
        "hard_sphere, square_well or scattering_length"
    )


def _gas(sec, target):
    temperature = quantity(sec, "temperature", "temperature", required=False)
    kind = sec.get("distribution", "maxwell_boltzmann")
    dens = sec.get("density")
    if not isinstance(dens, dict) or "unit" not in dens or "value" not in dens:
        raise ConfigError("gas.density must be { value = ..., unit = \"si\" | \"mTorr\" }")
    if dens["unit"] == "mTorr":
        if temperature is None:
            raise ConfigError("a density in mTorr needs gas.temperature")
        n_t = const.pressure_to_density(_number("density", dens["value"]) * 1e-3 * const.TORR, temperature)
    elif dens["unit"] == "si":
        n_t = _number("density", dens["value"])
    else:
        raise ConfigError(f"unit '{dens['unit']}' not allowed for density (use si or mTorr)")
    if not n_t > 0:
        raise ConfigError("gas density must be > 0")

    if kind == "delta_rest":
        dist = DeltaRest()
    elif kind in ("maxwell_boltzmann", "drifting_mb"):
        if temperature is None:
            raise ConfigError(f"distribution {kind} needs gas.temperature")
        if kind == "maxwell_boltzmann":
            dist = MaxwellBoltzmann(temperature, target.mass)
        else:
            drift = quantity(sec, "drift", "speed")
            if not isinstance(drift, list) or len(drift) != 3:
                raise ConfigError("gas.drift must hold a 3-vector value")
            dist = DriftingMB(temperature, target.mass, tuple(drift))
    else:
        raise ConfigError(f"unknown distribution {kind!r}")
    return n_t, temperature, dist


def _beam(sec):
    scan = None
    if "scan" in sec:
        s = sec["scan"]
        spacing = s.get("spacing", "log")
        points = s.get("points")
        if spacing not in ("log", "linear"):
            raise ConfigError("scan.spacing must be 'log' or 'linear'")
        if not isinstance(points, int) or isinstance(points, bool) or points < 2:
            raise ConfigError("scan.points must be an integer >= 2")
        v_min = quantity(s, "v_min", "speed")
        v_max = quantity(s, "v_max", "speed")
        if not (0 < v_min < v_max):
            raise ConfigError("scan needs 0 < v_min < v_max")
        scan = Scan(v_min, v_max, points, spacing)
    v_p = quantity(sec, "v_p", "speed", required=False)
    if v_p is not None and not v_p > 0:
        raise ConfigError("beam.v_p must be > 0")
    if v_p is None and scan is None:
        raise ConfigError("[beam] needs v_p or a scan table")
    return v_p, scan


def parse_config(doc: dict) -> RunConfig:
    """Validate a parsed TOML document and build a RunConfig."""
    try:
        projectile = _species(doc, "projectile")
        target = _species(doc, "target")
        potential = _potential(_section(doc, "potential"))
        n_t, temperature, dist = _gas(_section(doc, "gas"), target)
        v_p, scan = _beam(_section(doc, "beam"))
        slab = _section(doc, "slab", required=False)
        L = quantity(slab, "L", "length") if slab is not None else None
        if L is not None and L < 0:
            raise ConfigError("slab.L must be >= 0")

        formulas = doc.get("formulas", ["corrected"])
        if not isinstance(formulas, list) or not formulas:
            raise ConfigError("'formulas' must be a non-empty list")
        for name in formulas:
            if name not in FORMULA_NAMES:
                raise ConfigError(f"unknown formula {name!r}; expected one of {', '.join(FORMULA_NAMES)}")
        if "neutron" in formulas and not isinstance(potential, ScatteringLength):
            raise ConfigError("formula 'neutron' needs potential.branch = 'scattering_length'")

        out = _section(doc, "output", required=False) or {}
        fmt = out.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError("output.format must be csv or json")

        mc = None
        mc_sec = _section(doc, "mc", required=False)
        if mc_sec is not None:
            seed, n = mc_sec.get("seed"), mc_sec.get("n_samples")
            for key, val in (("seed", seed), ("n_samples", n)):
                if not isinstance(val, int) or isinstance(val, bool):
                    raise ConfigError(f"mc.{key} must be an integer")
            if not (0 <= seed < 2**64) or n <= 0:
                raise ConfigError("mc.seed must be a u64 and mc.n_samples > 0")
            mc = McSettings(seed, n)

        est = _section(doc, "estimate", required=False) or {}
        alpha_au = quantity(est, "alpha", "polarizability", required=False)
        c6_au = None
        if "C6" in est:
            c6_au = const.c6_si_to_au(quantity(est, "C6", "c6"))
        elif isinstance(potential, (PureC6, LennardJones)):
            c6_au = const.c6_si_to_au(potential.C6)
        neutron = _section(doc, "neutron", required=False) or {}

        return RunConfig(
            projectile=projectile,
            target=target,
            potential=potential,
            n_t=n_t,
            temperature=temperature,
            distribution=dist,
            v_p=v_p,
            scan=scan,
            L=L,
            formulas=tuple(formulas),
            output_path=out.get("path"),
            output_format=fmt,
            mc=mc,
            neutron_imaginary=bool(neutron.get("imaginary", False)),
            alpha_au=alpha_au,
            C6_au=c6_au,
            raw=doc,
        )
    except ConfigError:
        raise
    except (MwIndexError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return parse_config(doc)

"""Command-line front end.

Subcommands
-----------
index     one row per (v_p, formula)
scan      one row per v_p, three columns per formula
validate  invariant checks with achieved values; exit 1 if any fails
estimate  optics index and matter-wave magnitude estimate side by side

Exit codes: 0 ok, 1 validation failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import mc, refindex, scattering, thermal
from .config import McSettings, RunConfig, load_config
from .constants import CollisionSystem, c6_au_to_si
from .errors import ConfigError, MwIndexError
from .potentials import ScatteringLength

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
TOL_ENV = "MWINDEX_TOL_OVERRIDE"
DEFAULT_SAMPLES = 100_000

INDEX_COLUMNS = [
    "v_p", "formula", "re_n_minus_1", "im_n_minus_1", "rho", "sigma_eff", "quad_error",
    "lambda_over_spacing", "range_over_spacing", "mean_field", "valid",
]
SLAB_COLUMNS = ["transmission", "phase"]
MC_COLUMNS = ["mc_transmission", "mc_std_error"]
SCAN_SUFFIXES = ["re", "im", "sigma_eff"]

EPILOG = f"""\
index columns: {', '.join(INDEX_COLUMNS)}, then {', '.join(SLAB_COLUMNS)} when [slab] is
set, then {', '.join(MC_COLUMNS)} when Monte Carlo is enabled.
scan columns: v_p, then <formula>_re, <formula>_im, <formula>_sigma_eff per formula.
validate columns: check, value, tolerance, passed.
estimate columns: optics_ratio, optics_n_minus_1, matter_im_ratio, matter_im_ratio_wavevector.
Monte Carlo runs only with an [mc] table or an explicit --seed.
"""


class NumericalFailure(Exception):
    """A computation failed; the message names the operation and its inputs."""


# ---------------------------------------------------------------------------
# formatting


def _cell(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def render(rows, columns, fmt):
    if fmt == "json":
        data = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(data, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# computation


def _point_seed(settings: McSettings, index: int) -> int:
    child = np.random.SeedSequence(settings.seed).spawn(index + 1)[index]
    return int(child.generate_state(1, np.uint64)[0])


def _sample(cfg: RunConfig):
    return refindex.GasSample(cfg.target, cfg.n_t, cfg.distribution, cfg.potential)


def compute_point(cfg: RunConfig, v_p: float, mc_seed: int | None = None, mc_samples: int = 0):
    """All selected formulas at one projectile speed.

    Returns a dict with ``results`` (formula -> IndexResult) and optional
    slab and Monte Carlo values.
    """
    system = cfg.system
    sample = _sample(cfg)
    k_p = system.k_projectile(v_p)
    op = "amplitude"
    try:
        amp = None
        if any(f in cfg.formulas for f in ("forrey", "fizeau_legacy", "corrected")) or cfg.L is not None:
            amp = refindex.thermal_amplitude(
                scattering.amplitude_model(cfg.potential, system), system, cfg.distribution, v_p
            )
        results = {}
        for name in cfg.formulas:
            op = name
            if name == "fixed_centers":
                static = CollisionSystem.static_target(cfg.projectile)
                f = scattering.amplitude_model(cfg.potential, static)(k_p)
                res = refindex.index_fixed_centers(f, cfg.n_t, k_p)
            elif name == "forrey":
                res = refindex.index_forrey(system, sample, v_p, amplitude=amp)
            elif name == "fizeau_legacy":
                res = refindex.index_fizeau_legacy(system, sample, v_p, amplitude=amp)
            elif name == "corrected":
                res = refindex.index_corrected(system, sample, v_p, amplitude=amp)
            else:
                res = refindex.index_neutron(
                    cfg.potential.a, system, cfg.n_t, k_p,
                    distribution=cfg.distribution, imaginary=cfg.neutron_imaginary,
                )
            results[name] = refindex.with_validity(res, sample, system, v_p)
        out = {"v_p": v_p, "k_p": k_p, "results": results}
        if cfg.L is not None and mc_seed is not None:
            op = "mc_transmission"
            conf = mc.McConfig(mc_seed, mc_samples, cfg.distribution)
            sigma = scattering.cross_section_from_amplitude(amp, system) if amp.vectorized else None
            est = mc.mc_transmission(sample, system, v_p, cfg.L, conf, sigma=sigma)
            out["mc"] = est
        return out
    except MwIndexError as exc:
        raise NumericalFailure(f"{op} failed at v_p={v_p!r} m/s: {exc}") from exc


def _index_rows(cfg, point):
    rows = []
    n_t, k_p = cfg.n_t, point["k_p"]
    for name, res in point["results"].items():
        rep = res.diagnostics
        n1 = res.n_minus_1
        row = {
            "v_p": point["v_p"],
            "formula": name,
            "re_n_minus_1": n1.real,
            "im_n_minus_1": n1.imag,
            "rho": res.rho,
            "sigma_eff": 2.0 * k_p * n1.imag / n_t,
            "quad_error": res.quad_error,
            "lambda_over_spacing": rep.lambda_over_spacing,
            "range_over_spacing": rep.range_over_spacing,
            "mean_field": rep.mean_field,
            "valid": rep.passed,
        }
        if cfg.L is not None:
            row["transmission"], row["phase"] = refindex.transmission_wave(n1, k_p, cfg.L)
        if "mc" in point:
            row["mc_transmission"] = point["mc"].mean
            row["mc_std_error"] = point["mc"].std_error
        rows.append(row)
    return rows


def _scan_row(cfg, point):
    row = {"v_p": point["v_p"]}
    for name, res in point["results"].items():
        n1 = res.n_minus_1
        row[f"{name}_re"] = n1.real
        row[f"{name}_im"] = n1.imag
        row[f"{name}_sigma_eff"] = 2.0 * point["k_p"] * n1.imag / cfg.n_t
    return row


def _mc_settings(cfg, args):
    """(seed, n_samples) or None; never seeds implicitly."""
    seed = args.seed if args.seed is not None else (cfg.mc.seed if cfg.mc else None)
    if seed is None:
        return None
    n = args.samples or (cfg.mc.n_samples if cfg.mc else DEFAULT_SAMPLES)
    return McSettings(seed, n)


def _run_points(cfg, velocities, settings, jobs):
    tasks = []
    for i, v in enumerate(velocities):
        seed = _point_seed(settings, i) if settings else None
        tasks.append((cfg, v, seed, settings.n_samples if settings else 0))
    if jobs <= 1 or len(tasks) <= 1:
        return [compute_point(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_compute_packed, tasks))


def _compute_packed(task):
    return compute_point(*task)


def cmd_index(cfg, args):
    settings = _mc_settings(cfg, args)
    points = _run_points(cfg, cfg.velocities(), settings, args.jobs)
    columns = list(INDEX_COLUMNS)
    if cfg.L is not None:
        columns += SLAB_COLUMNS
        if settings is not None:
            columns += MC_COLUMNS
    rows = [r for p in points for r in _index_rows(cfg, p)]
    return rows, columns, EXIT_OK


def cmd_scan(cfg, args):
    if cfg.scan is None:
        raise ConfigError("scan needs a [beam.scan] table")
    points = _run_points(cfg, cfg.scan.velocities(), None, args.jobs)
    columns = ["v_p"] + [f"{f}_{s}" for f in cfg.formulas for s in SCAN_SUFFIXES]
    return [_scan_row(cfg, p) for p in points], columns, EXIT_OK


def tolerance_scale() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return 1.0
    try:
        scale = float(raw)
    except ValueError as exc:
        raise ConfigError(f"{TOL_ENV} must be a number, got {raw!r}") from exc
    if not scale > 0:
        raise ConfigError(f"{TOL_ENV} must be > 0")
    return scale


def _reference_alpha(cfg):
    dist = cfg.distribution
    if isinstance(dist, (thermal.MaxwellBoltzmann, thermal.DriftingMB)):
        return dist.alpha
    return thermal.thermal_speed(cfg.temperature or 300.0, cfg.target.mass)


def validation_checks(cfg: RunConfig, settings: McSettings | None, scale: float = 1.0):
    """Run the invariant suite; returns a list of result dicts."""
    checks = []

    def add(name, value, tol):
        tol = tol * scale
        checks.append({"check": name, "value": value, "tolerance": tol, "passed": bool(value <= tol)})

    system = cfg.system
    v_p = cfg.velocities()[0]
    alpha = _reference_alpha(cfg)

    resid = max(abs(thermal.normalization(x * alpha, alpha) - 1.0) for x in (1e-3, 1e-1, 1.0, 10.0, 1e3))
    add("normalization", resid, 1e-10)

    mb = thermal.MaxwellBoltzmann(cfg.temperature or 300.0, cfg.target.mass)
    second = thermal.average_over_targets(lambda v: v * v, mb, v_p, rtol=1e-12)
    add("second_moment", abs(second / (v_p**2 + 1.5 * mb.alpha**2) - 1.0), 1e-10)

    base_amp = scattering.amplitude_model(cfg.potential, system)
    # T -> 0: alpha = 1e-6 v_p
    t_cold = (1e-6 * v_p) ** 2 * cfg.target.mass / (2.0 * thermal.K_B)
    cold = refindex.GasSample(cfg.target, cfg.n_t, thermal.MaxwellBoltzmann(t_cold, cfg.target.mass), cfg.potential)
    amp = refindex.thermal_amplitude(base_amp, system, cold.distribution, v_p)
    vals = [f(system, cold, v_p, amplitude=amp).n_minus_1
            for f in (refindex.index_forrey, refindex.index_fizeau_legacy, refindex.index_corrected)]
    spread = max(abs(a - b) for a in vals for b in vals) / abs(vals[2])
    add("t0_equivalence", spread, 1e-9)

    sample = _sample(cfg)
    amp = refindex.thermal_amplitude(base_amp, system, cfg.distribution, v_p)
    res = refindex.index_corrected(system, sample, v_p, amplitude=amp)
    s_eff = refindex.beam_effective_cross_section(system, sample, v_p, amplitude=amp)
    lhs = res.n_minus_1.imag
    rhs = cfg.n_t * s_eff / (2.0 * system.k_projectile(v_p))
    add("cross_formalism_identity", abs(lhs - rhs) / abs(rhs) if rhs else abs(lhs), 1e-12)

    if settings is not None:
        conf = mc.McConfig(settings.seed, settings.n_samples, cfg.distribution)
        est = mc.mc_relative_speed_moments(conf, v_p, 2)
        exact = thermal.average_over_targets(lambda v: v * v, cfg.distribution, v_p, rtol=1e-12)
        add("mc_relative_speed_moment", _z(est, exact), 3.0)
        sigma = scattering.cross_section_from_amplitude(amp, system) if amp.vectorized else \
            mc.vectorized_cross_section(system, cfg.potential, cfg.distribution, v_p)
        est = mc.mc_effective_cross_section(sigma, conf, v_p)
        add("mc_effective_cross_section", _z(est, s_eff), 3.0)
        if cfg.L is not None:
            t_bl = math.exp(-cfg.n_t * s_eff * cfg.L)
            est = mc.mc_transmission(sample, system, v_p, cfg.L, conf, sigma=sigma)
            add("mc_transmission", _z(est, t_bl), 3.0)
            t_wave = refindex.transmission_wave(res.n_minus_1, system.k_projectile(v_p), cfg.L)[0]
            add("wave_vs_beer_lambert", abs(t_wave / t_bl - 1.0), 1e-8)
    return checks


def _z(est, exact):
    if est.std_error == 0:
        return 0.0 if est.mean == exact else math.inf
    return abs(est.mean - exact) / est.std_error


def cmd_validate(cfg, args):
    checks = validation_checks(cfg, _mc_settings(cfg, args), tolerance_scale())
    code = EXIT_OK if all(c["passed"] for c in checks) else EXIT_VALIDATION
    for c in checks:
        if not c["passed"]:
            print(f"check failed: {c['check']} (value {c['value']!r} > tolerance {c['tolerance']!r})",
                  file=sys.stderr)
    return checks, ["check", "value", "tolerance", "passed"], code


def cmd_estimate(cfg, args):
    if cfg.alpha_au is None and cfg.C6_au is None:
        raise ConfigError("estimate needs [estimate] alpha and/or a C6 coefficient")
    row = {}
    if cfg.alpha_au is not None:
        row["optics_ratio"] = refindex.optics_index(1.0, cfg.alpha_au)
        row["optics_n_minus_1"] = refindex.optics_index(cfg.n_t, cfg.alpha_au)
    if cfg.C6_au is not None:
        v_p = cfg.velocities()[0]
        m_p = cfg.projectile.mass
        row["matter_im_ratio"] = refindex.magnitude_estimate_im(cfg.C6_au, m_p, v_p)
        row["matter_im_ratio_wavevector"] = refindex.magnitude_estimate_im_wavevector(c6_au_to_si(cfg.C6_au), m_p, v_p)
    columns = ["optics_ratio", "optics_n_minus_1", "matter_im_ratio", "matter_im_ratio_wavevector"]
    return [row], columns, EXIT_OK


COMMANDS = {"index": cmd_index, "scan": cmd_scan, "validate": cmd_validate, "estimate": cmd_estimate}


def build_parser():
    p = argparse.ArgumentParser(
        prog="mwindex",
        description="Index of refraction of a dilute gas for matter waves.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, metavar="PATH", help="TOML run configuration")
    p.add_argument("--output", metavar="PATH", help="output file (default: config output.path or stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default: config or csv)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, metavar="N",
                   help="worker processes for multi-point runs")
    p.add_argument("--seed", type=int, metavar="U64", help="Monte Carlo seed (enables Monte Carlo)")
    p.add_argument("--samples", type=int, metavar="N", help="Monte Carlo sample count")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is not None and not (0 <= args.seed < 2**64):
            raise ConfigError("--seed must be a 64-bit unsigned integer")
        if args.samples is not None and args.samples <= 0:
            raise ConfigError("--samples must be > 0")
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = load_config(args.config)
        rows, columns, code = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MwIndexError as exc:
        print(f"numerical error in {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    text = render(rows, columns, args.format or cfg.output_format)
    path = args.output or cfg.output_path
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``axirot <command> [options]``.

Settings come from built-in defaults, then an optional ``--config`` file of
``key=value`` lines, then ``--set key=value`` flags, then dedicated flags.
Every command that writes a file also writes ``<output>.meta`` echoing the
full configuration.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import experiments, io
from .estimators import ESTIMATORS, HistogramConfig, Method, RansacConfig
from .exceptions import AxirotError, DegenerateCorrespondence, InvalidInput
from .geometry import Correspondence, pairwise_angles
from .synthetic import CylinderSpec, LatticeSpec, NoiseSpec, generate_pair, sample_cylinder

SEED_ENV = "AXIROT_SEED"

EXIT_OK = 0
EXIT_INPUT = 2

_TYPES = {
    "seed": int,
    "method": str,
    "units": str,
    "jobs": int,
    "success_probability": float,
    "outlier_fraction": float,
    "sampson_threshold": float,
    "min_inlier_fraction": float,
    "max_iterations": int,
    "histogram_range_min": float,
    "histogram_range_max": float,
    "histogram_bin_width": float,
    "histogram_min_peak": int,
    "distance_to_axis": float,
    "cylinder_height": float,
    "cylinder_radius": float,
    "noise_sigma": float,
    "inliers": int,
    "outliers": int,
    "rotation_angle": float,
    "trials": int,
    "angle_min": float,
    "angle_max": float,
    "angle_step": float,
    "sigma_min": float,
    "sigma_max": float,
    "sigma_count": int,
    "lattice_side": float,
    "lattice_distance": float,
    "lattice_points": int,
    "repeats": int,
    "discard_below": float,
    "pixel_scale": float,
    "max_shift": int,
    "pair": str,
}

_BASE = {
    "method": "ransac",
    "units": "deg",
    "jobs": 1,
    "success_probability": 0.999,
    "outlier_fraction": 0.95,
    "sampson_threshold": 8e-4,
    "min_inlier_fraction": 0.6,
    "max_iterations": 100_000,
    "histogram_range_min": -90.0,
    "histogram_range_max": 90.0,
    "histogram_bin_width": 1.0,
    "histogram_min_peak": 2,
}

_SYNTHETIC = {
    "outlier_fraction": 0.7,
    "sampson_threshold": 0.01,
    "min_inlier_fraction": 0.25,
    "distance_to_axis": 200.0,
    "cylinder_height": 230.0,
    "cylinder_radius": 115.0,
    "noise_sigma": 1e-4,
    "inliers": 30,
    "outliers": 70,
    "rotation_angle": 30.0,
}

_DEFAULTS = {
    "estimate": {},
    "synth": _SYNTHETIC,
    "sweep": {**_SYNTHETIC, "trials": 300, "angle_min": -80.0, "angle_max": 80.0, "angle_step": 5.0},
    "noise": {
        **_SYNTHETIC,
        "inliers": 100,
        "outliers": 0,
        "trials": 1000,
        "sigma_min": 1e-6,
        "sigma_max": 1e-3,
        "sigma_count": 10,
    },
    "condmap": {
        "lattice_side": 200.0,
        "lattice_distance": 200.0,
        "lattice_points": 21,
        "rotation_angle": 21.0,
        "noise_sigma": 0.004,
        "repeats": 100,
        "discard_below": 60.0,
    },
    "shift": {"rotation_angle": 1.0, "pixel_scale": experiments.DEFAULT_PIXEL_SCALE, "max_shift": 5, "pair": ""},
}


def _artifact_version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _coerce(key, value, source):
    if key not in _TYPES:
        raise InvalidInput(f"unknown setting {key!r} in {source}")
    try:
        return _TYPES[key](value)
    except ValueError:
        raise InvalidInput(f"setting {key}={value!r} in {source} is not a valid {_TYPES[key].__name__}") from None


def _settings(args):
    settings = {**_BASE, **_DEFAULTS[args.command]}
    if args.config:
        for key, value in io.load_config(args.config).items():
            settings[key] = _coerce(key, value, args.config)
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidInput(f"--set expects key=value, got {item!r}")
        settings[key.strip()] = _coerce(key.strip(), value.strip(), "--set")
    if args.jobs is not None:
        settings["jobs"] = args.jobs
    if getattr(args, "method", None):
        settings["method"] = args.method
    if getattr(args, "units", None):
        settings["units"] = args.units

    if args.seed is not None:
        settings["seed"] = args.seed
    elif "seed" not in settings:
        settings["seed"] = int(os.environ.get(SEED_ENV, "0"))
    if not 0 <= settings["seed"] < 2**64:
        raise InvalidInput(f"seed must fit in an unsigned 64-bit integer, got {settings['seed']}")
    if settings["method"] not in [m.value for m in Method] + ["all"]:
        raise InvalidInput(f"unknown method {settings['method']!r}")
    if settings["units"] not in ("deg", "rad"):
        raise InvalidInput(f"units must be deg or rad, got {settings['units']!r}")
    return settings


def _ransac_config(s, seed=None):
    return RansacConfig(
        success_probability=s["success_probability"],
        outlier_fraction=s["outlier_fraction"],
        sampson_threshold=s["sampson_threshold"],
        min_inlier_fraction=s["min_inlier_fraction"],
        max_iterations_cap=s["max_iterations"],
        rng_seed=s["seed"] if seed is None else seed,
    )


def _histogram_config(s):
    return HistogramConfig(
        range_min_deg=s["histogram_range_min"],
        range_max_deg=s["histogram_range_max"],
        bin_width_deg=s["histogram_bin_width"],
        min_peak_count=s["histogram_min_peak"],
    )


def _cylinder(s):
    return CylinderSpec(
        axis_distance=s["distance_to_axis"],
        height=s["cylinder_height"],
        radius=s["cylinder_radius"],
        point_count=s["inliers"] + s["outliers"],
    )


def _sweep_config(s, angle_grid=None):
    return experiments.SweepConfig(
        angle_grid_deg=tuple(angle_grid) if angle_grid is not None else (s["rotation_angle"],),
        trials_per_angle=s["trials"],
        scene=_cylinder(s),
        noise=NoiseSpec(sigma=s["noise_sigma"], rng_seed=s["seed"]),
        outlier_count=s["outliers"],
        inlier_count=s["inliers"],
        ransac=_ransac_config(s),
        histogram=_histogram_config(s),
        master_seed=s["seed"],
        noise_angle_deg=s.get("rotation_angle", 30.0),
    )


def _write_meta(path, command, settings, extra=None):
    meta = {"artifact_version": _artifact_version(), "command": command}
    meta.update(sorted(settings.items()))
    meta.update(extra or {})
    io.write_metadata(f"{path}.meta", meta)


def _format_angle(angle, units):
    return f"angle_deg={math.degrees(angle):.6f}" if units == "deg" else f"angle_rad={angle:.9f}"


def cmd_estimate(args, s):
    pairs = io.parse_correspondences(args.correspondences)
    if np.all(np.isnan(pairwise_angles(pairs))):
        raise DegenerateCorrespondence("every correspondence is degenerate (u = v = 0)")

    methods = list(Method) if s["method"] == "all" else [Method(s["method"])]
    blocks = []
    failure = None
    for method in methods:
        try:
            if method is Method.RANSAC:
                result = ESTIMATORS[method](pairs, _ransac_config(s), n_jobs=s["jobs"])
            elif method is Method.HISTOGRAM:
                result = ESTIMATORS[method](pairs, _histogram_config(s))
            else:
                result = ESTIMATORS[method](pairs)
        except AxirotError as exc:
            if len(methods) == 1:
                raise
            failure = failure or exc
            blocks.append(f"method={method.value}\nerror={type(exc).__name__}: {exc}\n")
            continue
        blocks.append(
            "\n".join(
                [
                    f"method={method.value}",
                    _format_angle(result.angle, s["units"]),
                    "inlier_rows=" + ",".join(str(i + 1) for i in result.inlier_indices),
                    f"mean_squared_residual={io.format_real(result.mean_squared_residual)}",
                    f"iterations={result.iterations_run}",
                ]
            )
            + "\n"
        )
    report = "\n".join(blocks)
    sys.stdout.write(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(report)
        _write_meta(args.output, "estimate", s, {"input": args.correspondences})
    if failure is not None:
        print(f"axirot: {type(failure).__name__}: {failure}", file=sys.stderr)
        return failure.exit_code
    return EXIT_OK


def cmd_synth(args, s):
    scene = _cylinder(s)
    points = sample_cylinder(scene, np.random.SeedSequence([s["seed"], 0]).generate_state(1)[0])
    noise = NoiseSpec(sigma=s["noise_sigma"], rng_seed=int(np.random.SeedSequence([s["seed"], 1]).generate_state(1)[0]))
    data = generate_pair(points, math.radians(s["rotation_angle"]), scene.axis_distance, noise, s["outliers"])
    io.write_correspondences(args.output, data.pairs)
    _write_meta(
        args.output,
        "synth",
        s,
        {
            "ground_truth_angle_deg": float(s["rotation_angle"]),
            "inlier_rows": ",".join(str(i + 1) for i in np.flatnonzero(data.inlier_flags)),
        },
    )
    return EXIT_OK


def _angle_grid(s):
    grid = np.arange(s["angle_min"], s["angle_max"] + s["angle_step"] / 2, s["angle_step"])
    return [float(a) for a in np.round(grid, 12)]


def cmd_sweep(args, s):
    cfg = _sweep_config(s, _angle_grid(s))
    rows = experiments.run_angle_sweep(cfg, n_jobs=s["jobs"])
    io.write_table(args.output, rows)
    _write_meta(args.output, "sweep", s)
    return EXIT_OK


def cmd_noise(args, s):
    cfg = _sweep_config(s)
    sigmas = np.logspace(math.log10(s["sigma_min"]), math.log10(s["sigma_max"]), s["sigma_count"])
    rows = experiments.run_noise_sweep(cfg, sigmas, n_jobs=s["jobs"])
    io.write_table(args.output, rows)
    _write_meta(args.output, "noise", s, {"noise_angle_deg": float(cfg.noise_angle_deg)})
    return EXIT_OK


def cmd_condmap(args, s):
    spec = LatticeSpec(side=s["lattice_side"], center_distance=s["lattice_distance"], points_per_edge=s["lattice_points"])
    result = experiments.run_conditioning_map(
        spec,
        math.radians(s["rotation_angle"]),
        NoiseSpec(sigma=s["noise_sigma"], rng_seed=s["seed"]),
        s["repeats"],
        s["discard_below"],
    )
    rows = [
        (float(p[0]), float(p[1]), float(p[2]), float(e))
        for p, e in zip(result.retained_points, result.mean_error_deg[result.retained])
    ]
    io.write_rows(args.output, ("x", "y", "z", "mean_error_deg"), rows)
    _write_meta(args.output, "condmap", s, {"retained": len(rows), "lattice_points_total": len(result.points)})
    return EXIT_OK


def cmd_shift(args, s):
    alpha = math.radians(s["rotation_angle"])
    if s["pair"]:
        try:
            base = Correspondence(*(float(v) for v in s["pair"].split(",")))
        except (TypeError, ValueError):
            raise InvalidInput(f"pair must be four comma-separated reals, got {s['pair']!r}") from None
    else:
        base = experiments.shift_fixture(alpha)
    k = s["max_shift"]
    grid = [(dx, dy) for dy in range(-k, k + 1) for dx in range(-k, k + 1)]
    result = experiments.run_shift_sensitivity(base, alpha, grid, s["pixel_scale"])
    rows = [
        (int(dx), int(dy), float(np.degrees(a)), float(e))
        for (dx, dy), a, e in zip(grid, result.angles, result.errors_deg)
    ]
    io.write_rows(args.output, ("dx_px", "dy_px", "angle_deg", "error_deg"), rows)
    _write_meta(args.output, "shift", s, {"base_pair": ",".join(io.format_real(v) for v in base)})
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "synth": cmd_synth,
    "sweep": cmd_sweep,
    "noise": cmd_noise,
    "condmap": cmd_condmap,
    "shift": cmd_shift,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="axirot", description="Axial rotation angle estimation from point correspondences.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output_required=True):
        p.add_argument("--config", help="key=value settings file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one setting (repeatable)")
        p.add_argument("--seed", type=int, help=f"master seed (default: ${SEED_ENV} or 0)")
        p.add_argument("--jobs", type=int, help="worker count; results do not depend on it")
        p.add_argument("-o", "--output", required=output_required, help="output file")

    p = sub.add_parser("estimate", help="estimate the rotation angle from a correspondence file")
    p.add_argument("correspondences", help="CSV with header x,y,x_prime,y_prime")
    p.add_argument("--method", choices=[m.value for m in Method] + ["all"])
    p.add_argument("--units", choices=["deg", "rad"])
    common(p, output_required=False)

    for name, text in [
        ("synth", "write a synthetic cylinder correspondence file"),
        ("sweep", "estimator error versus rotation angle"),
        ("noise", "estimator error versus detection noise"),
        ("condmap", "ill-conditioned lattice points"),
        ("shift", "angle sensitivity to shifting one point"),
    ]:
        common(sub.add_parser(name, help=text))
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _settings(args)
        return COMMANDS[args.command](args, settings)
    except AxirotError as exc:
        print(f"axirot: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"axirot: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

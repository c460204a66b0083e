"""``plasmonprobe`` command line: sweeps, maps, spectra, traces and images.

Exit status is 0 on success, 2 for configuration errors and 3 for numerical
failures; errors go to stderr as ``error: <kind>: <detail>`` lines.
"""
import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io as pio
from .atoms import refractive_index
from .config import dump_resolved, load_config
from .errors import ConfigError, NotEvanescentError, NumericalError
from .imaging import dispersive_image, gaussian_density_map
from .metrics import atom_stack, delta_R_exact, optimize_qnd_angle, qnd_max_atoms
from .optics import field_enhancement, find_resonance_angle, reflectivity
from .spectra import spectrum
from .traces import fit_gaussian_peak, synthesize_time_trace
from .units import cm3_to_m3, gamma_to_mhz, m3_to_cm3, m_to_nm, m_to_um, rad_to_deg


def _map_ordered(fn, items, jobs):
    """``map`` that keeps input order, in worker processes when ``jobs > 1``."""
    if jobs <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _angle_or_resonance(cfg, angle):
    return find_resonance_angle(cfg.stack) if angle is None else angle


def angle_sweep_rows(cfg):
    theta = cfg.angle_sweep.values()
    n4 = refractive_index(cfg.medium)
    r_bare = reflectivity(cfg.stack, theta)
    r_atoms = reflectivity(atom_stack(cfg.stack, n4, cfg.z_b), theta)
    dr = delta_R_exact(cfg.stack, cfg.medium, cfg.z_b, theta)
    n_max = qnd_max_atoms(cfg.stack, cfg.medium, cfg.z_b, theta, cfg.efficiency)
    return np.column_stack([rad_to_deg(theta), r_bare, r_atoms, dr, np.atleast_1d(n_max)])


def _qnd_point(args):
    stack, medium, z_b, efficiency = args
    theta, n_max = optimize_qnd_angle(stack, medium, z_b, efficiency, strict=False)
    return rad_to_deg(theta), n_max


def qnd_map_rows(cfg, jobs=1):
    items = [
        (cfg.stack, cfg.medium.with_density(rho).with_detuning(d), cfg.z_b, cfg.efficiency)
        for rho in cfg.density_sweep.values()
        for d in cfg.detuning_sweep.values()
    ]
    results = _map_ordered(_qnd_point, items, jobs)
    return np.array(
        [(m3_to_cm3(it[1].density), it[1].detuning, th, n) for it, (th, n) in zip(items, results)]
    )


def spectrum_rows(cfg):
    theta = _angle_or_resonance(cfg, cfg.spectrum_angle)
    medium = cfg.medium.with_density(cfg.spectrum_density)
    s = spectrum(cfg.scenario, cfg.stack, medium, theta)
    linewidth = cfg.resolved["linewidth_mhz"]
    return np.column_stack([s.detunings, gamma_to_mhz(s.detunings, linewidth), m_to_nm(s.z_b), s.delta_r])


def trace_for(cfg):
    theta = _angle_or_resonance(cfg, cfg.angle)
    t = cfg.trace
    return synthesize_time_trace(
        cfg.cloud,
        cfg.beam,
        cfg.stack,
        cfg.medium,
        cfg.z_b,
        theta,
        t["sample_rate"],
        t["noise_rms"],
        seed=cfg.seed,
        noise=t["noise"],
        photons_per_sample=t["photons_per_sample"],
        efficiency=cfg.efficiency,
        tail=t["tail"],
        lowpass_hz=t["lowpass_hz"],
    )


def image_for(cfg):
    im = cfg.image
    if im["density_map"]:
        density, pitch = pio.read_matrix(im["density_map"])
        density = cm3_to_m3(density)
    else:
        density, pitch = gaussian_density_map(cfg.cloud, im["shape"], im["pitch"]), im["pitch"]
    theta = _angle_or_resonance(cfg, cfg.angle)
    image = dispersive_image(
        density, cfg.stack, cfg.medium, cfg.z_b, theta, pitch, im["resolution"], im["method"]
    )
    return image, pitch


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(cfg, columns, units, rows):
    header = dump_resolved(cfg)
    if cfg.out_format == "matrix":
        return pio.format_matrix(rows, 0.0, header)
    # "auto" and "csv"
    return pio.format_csv(columns, units, rows, header)


def cmd_resonance(cfg, args):
    theta = find_resonance_angle(cfg.stack)
    print(f"theta_sp_deg={rad_to_deg(theta):.10g}")
    print(f"enhancement={float(field_enhancement(cfg.stack, theta)):.10g}")
    print(f"R_min={float(reflectivity(cfg.stack, theta)):.10g}")


def cmd_angle_sweep(cfg, args):
    rows = angle_sweep_rows(cfg)
    _emit(_table(cfg, ["theta", "R_bare", "R_atoms", "delta_R", "N_max"], ["deg", "1", "1", "1", "atoms"], rows), cfg.out_path)


def cmd_qnd_map(cfg, args):
    rows = qnd_map_rows(cfg, args.jobs)
    _emit(_table(cfg, ["density", "detuning", "theta_opt", "N_max"], ["cm^-3", "Gamma", "deg", "atoms"], rows), cfg.out_path)


def cmd_spectrum(cfg, args):
    rows = spectrum_rows(cfg)
    _emit(_table(cfg, ["detuning", "detuning_freq", "z_b", "delta_R"], ["Gamma", "MHz", "nm", "1"], rows), cfg.out_path)


def cmd_trace(cfg, args):
    trace = trace_for(cfg)
    rows = np.column_stack([trace.t, trace.signal])
    _emit(_table(cfg, ["t", "delta_R"], ["s", "1"], rows), cfg.out_path)
    fit = fit_gaussian_peak(trace)
    print(
        f"info: fit height={fit.height:.6g} width_s={fit.width:.6g} noise_std={fit.noise_std:.6g} snr={fit.snr:.6g}",
        file=sys.stderr,
    )


def cmd_image(cfg, args):
    image, pitch = image_for(cfg)
    header = dump_resolved(cfg)
    if cfg.out_format == "csv":
        ny, nx = image.shape
        x = m_to_um((np.arange(nx) - (nx - 1) / 2) * pitch)
        y = m_to_um((np.arange(ny) - (ny - 1) / 2) * pitch)
        xx, yy = np.meshgrid(x, y)
        rows = np.column_stack([xx.ravel(), yy.ravel(), image.ravel()])
        text = pio.format_csv(["x", "y", "delta_R"], ["um", "um", "1"], rows, header)
    else:
        text = pio.format_matrix(image, pitch, header)
    _emit(text, cfg.out_path)
    if args.png:
        lo, hi = pio.write_png16(image, args.png)
        print(f"info: png range delta_R=[{lo:.6g}, {hi:.6g}]", file=sys.stderr)


COMMANDS = {
    "resonance": (cmd_resonance, "resonance angle and plasmonic enhancement of the bare stack"),
    "angle-sweep": (cmd_angle_sweep, "R without/with atoms, ΔR and N_max versus incidence angle"),
    "qnd-map": (cmd_qnd_map, "angle-optimized N_max over a density x detuning grid"),
    "spectrum": (cmd_spectrum, "ΔR versus detuning"),
    "trace": (cmd_trace, "synthetic ΔR time trace of the cloud passage"),
    "image": (cmd_image, "per-pixel ΔR image of the cloud"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry, dotted path (repeatable)")
    common.add_argument("--seed", type=int, help="random seed (overrides config)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "matrix"), help="output format")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    parser = argparse.ArgumentParser(prog="plasmonprobe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "image":
            p.add_argument("--png", help="also write a 16-bit grayscale PNG")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    flags = {}
    if args.seed is not None:
        flags["seed"] = args.seed
    if args.out is not None:
        flags["output.path"] = args.out
    if args.format is not None:
        flags["output.format"] = args.format
    try:
        if args.jobs < 1:
            raise ConfigError(("--jobs", "must be >= 1"))
        cfg = load_config(args.config, args.sets, flags)
        COMMANDS[args.command][0](cfg, args)
    except ConfigError as exc:
        for field, message in exc.errors:
            print(f"error: config: {field}: {message}", file=sys.stderr)
        return 2
    except NotEvanescentError as exc:
        print(f"error: config: geometry: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: numeric: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

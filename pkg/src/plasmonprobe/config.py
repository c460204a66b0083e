"""Run configuration: YAML file plus ``--set`` overrides, resolved to SI objects.

Keys carry their unit as a suffix (``_nm``, ``_um``, ``_deg``, ``_cm3``,
``_mhz``, ``_gamma``, ``_ms``, ``_hz``, ``_cm_s``). Precedence, lowest
first: built-in defaults, config file, ``--set key=value`` items, explicit
command-line flags. Material indices come from the packaged table, then
every ``*.yaml`` in the directory named by ``PLASMONPROBE_MATERIALS``, then
the config's own ``materials`` section.
"""
import copy
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .atoms import AtomicMedium, AtomicTransition
from .cloud import BeamModel, CloudModel
from .errors import ConfigError
from .optics import Layer, LayerStack
from .spectra import SpectrumScenario, ZbTable
from .units import cm3_to_m3, deg_to_rad, mhz_to_angular, mhz_to_gamma, nm_to_m, um_to_m

MATERIALS_ENV = "PLASMONPROBE_MATERIALS"

DEFAULTS = {
    "materials": {},
    "wavelength_nm": 780.0,
    "linewidth_mhz": 6.0,
    "stack": {
        "incidence": "glass",
        "layers": [{"material": "gold", "thickness_nm": 40.0}],
        "gap": "vacuum",
    },
    "z_b_nm": 100.0,
    "atoms": {"density_cm3": 1.0e13, "detuning_gamma": -30.0, "absorption": True},
    "probe": {"angle_deg": "auto", "efficiency": 1.0, "max_absorbed_photons": 1.0},
    "angle_sweep": {"start_deg": 41.0, "stop_deg": 50.0, "points": 451},
    "qnd_map": {
        "density": {"start_cm3": 1.0e11, "stop_cm3": 1.0e13, "points": 21, "scale": "log"},
        "detuning": {"start_gamma": -40.0, "stop_gamma": 40.0, "points": 41, "scale": "linear"},
    },
    "spectrum": {
        "detuning": {"start_gamma": -10.0, "stop_gamma": 10.0, "points": 201, "scale": "linear"},
        "density_cm3": 5.0e11,
        "z_b_nm": 500.0,
        "z_b_table": None,
        "plateau_amplitude": 0.0,
        "plateau_width_gamma": 1.0,
        "angle_deg": "auto",
    },
    "cloud": {"radii_um": [50.0, 155.0, 50.0], "atom_number": 368000.0, "velocity_cm_s": 12.7},
    "beam": {"waists_um": [146.0, 111.0]},
    "trace": {
        "sample_rate_hz": 1.0e5,
        "noise": "white",
        "noise_rms": 1.0e-5,
        "photons_per_sample": None,
        "tail_ms": 4.0,
        "lowpass_hz": None,
    },
    "image": {"shape": [64, 64], "pitch_um": 4.0, "resolution_um": 12.0, "method": "linear", "density_map": None},
    "seed": 0,
    "output": {"path": None, "format": "auto"},  # auto: csv for tables, matrix for images
}

# keys that may be given in either of two units; the first is canonical
_ALTERNATIVES = {("atoms",): ("detuning_gamma", "detuning_mhz")}


def parse_complex(value):
    """Index from a number or a string like ``0.18+4.9j``."""
    if isinstance(value, bool):
        raise ValueError(f"not a refractive index: {value!r}")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    return complex(str(value).replace(" ", ""))


def format_complex(z):
    return repr(complex(z))


def _read_yaml(path):
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError((str(path), "top level must be a mapping"))
    return data


def _material_sources():
    with resources.as_file(resources.files("plasmonprobe") / "data" / "materials.yaml") as p:
        yield str(p), _read_yaml(p)
    directory = os.environ.get(MATERIALS_ENV)
    if directory:
        d = Path(directory)
        if not d.is_dir():
            raise ConfigError((MATERIALS_ENV, f"not a directory: {directory}"))
        for p in sorted(d.glob("*.yaml")):
            yield str(p), _read_yaml(p)


def load_materials():
    """Material table ``name -> (index, wavelength_nm or None)`` from package data and the env directory."""
    table = {}
    errors = []
    for source, data in _material_sources():
        wl = data.get("wavelength_nm")
        for name, value in (data.get("materials") or {}).items():
            try:
                table[str(name)] = (parse_complex(value), None if wl is None else float(wl))
            except (TypeError, ValueError):
                errors.append((f"{source}:materials.{name}", f"cannot parse index {value!r}"))
    if errors:
        raise ConfigError(errors)
    return table


def deep_merge(base, override):
    """Recursive dict merge; ``override`` wins, lists are replaced whole."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def parse_value(text):
    """YAML scalar with a float fallback so that ``1e13`` is a number."""
    value = yaml.safe_load(text) if text.strip() else None
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    return value


def parse_set(item):
    """``a.b.c=value`` -> (['a', 'b', 'c'], value)."""
    key, sep, text = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError((item, "expected key=value"))
    return key.strip().split("."), parse_value(text)


def set_dotted(cfg, path, value):
    node = cfg
    for part in path[:-1]:
        if not isinstance(node.get(part), dict):
            node[part] = {}
        node = node[part]
    node[path[-1]] = value


def _user_layer(path=None, sets=(), overrides=None):
    layer = _read_yaml(path) if path is not None else {}
    for item in sets:
        keys, value = parse_set(item)
        set_dotted(layer, keys, value)
    for keys, value in (overrides or {}).items():
        set_dotted(layer, keys.split("."), value)
    return layer


def _merge_with_defaults(user):
    merged = deep_merge(DEFAULTS, user)
    for prefix, keys in _ALTERNATIVES.items():
        node_user, node = user, merged
        for part in prefix:
            node_user = node_user.get(part, {}) if isinstance(node_user, dict) else {}
            node = node[part]
        given = [k for k in keys if isinstance(node_user, dict) and k in node_user]
        if given:
            for k in keys:
                if k not in given:
                    node.pop(k, None)
    return merged


@dataclass(frozen=True)
class Sweep:
    """Grid of ``points`` values from ``start`` to ``stop`` (SI or units of Γ)."""

    start: float
    stop: float
    points: int
    scale: str = "linear"

    def values(self):
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration: ``resolved`` is the canonical tree, the rest is SI."""

    resolved: dict
    stack: LayerStack
    medium: AtomicMedium
    z_b: float
    angle: float  # None selects the resonance angle
    efficiency: float
    max_absorbed_photons: float
    angle_sweep: Sweep
    density_sweep: Sweep
    detuning_sweep: Sweep
    scenario: SpectrumScenario
    spectrum_density: float
    spectrum_angle: float
    cloud: CloudModel
    beam: BeamModel
    trace: dict
    image: dict
    seed: int
    out_path: str
    out_format: str


class _Reader:
    """Typed access into the merged tree that records every problem."""

    def __init__(self, tree):
        self.tree = tree
        self.errors = []

    def error(self, path, message):
        self.errors.append((".".join(map(str, path)), message))

    def get(self, path):
        node = self.tree
        for part in path:
            if isinstance(node, list) and isinstance(part, int) and part < len(node):
                node = node[part]
            elif isinstance(node, dict) and part in node:
                node = node[part]
            else:
                return None
        return node

    def put(self, path, value):
        parent = self.get(path[:-1])
        parent[path[-1]] = value

    def number(self, *path, positive=False, nonneg=False, integer=False, optional=False, lo=None, hi=None):
        value = self.get(path)
        if value is None:
            if not optional:
                self.error(path, "missing value")
            return None
        try:
            if isinstance(value, bool):
                raise ValueError
            x = float(value)
        except (TypeError, ValueError):
            self.error(path, f"not a number: {value!r}")
            return None
        if not math.isfinite(x):
            self.error(path, "must be finite")
            return None
        if integer:
            if x != int(x):
                self.error(path, "must be an integer")
                return None
            x = int(x)
        if positive and not x > 0:
            self.error(path, "must be > 0")
            return None
        if nonneg and x < 0:
            self.error(path, "must be >= 0")
            return None
        if (lo is not None and x < lo) or (hi is not None and x > hi):
            self.error(path, f"must lie in [{lo}, {hi}]")
            return None
        self.put(path, x)
        return x

    def choice(self, *path, options):
        value = self.get(path)
        if value not in options:
            self.error(path, f"must be one of {', '.join(map(str, options))}")
            return None
        return value

    def vector(self, *path, length, positive=True):
        value = self.get(path)
        if not isinstance(value, (list, tuple)) or len(value) != length:
            self.error(path, f"must be a list of {length} numbers")
            return None
        out = []
        for i, v in enumerate(value):
            try:
                x = float(v)
            except (TypeError, ValueError):
                self.error(path + (str(i),), f"not a number: {v!r}")
                return None
            if positive and not x > 0:
                self.error(path + (str(i),), "must be > 0")
                return None
            out.append(x)
        self.put(path, out)
        return out

    def angle(self, *path):
        value = self.get(path)
        if value == "auto":
            return None
        x = self.number(*path, nonneg=True)
        if x is not None and x >= 90:
            self.error(path, "must be below 90 degrees")
            return None
        return None if x is None else deg_to_rad(x)

    def sweep(self, *path, unit, convert=lambda v: v, positive=False):
        start = self.number(*path, f"start_{unit}", positive=positive)
        stop = self.number(*path, f"stop_{unit}", positive=positive)
        points = self.number(*path, "points", positive=True, integer=True)
        scale = self.get(path + ("scale",)) or "linear"
        if scale not in ("linear", "log"):
            self.error(path + ("scale",), "must be linear or log")
            return None
        if scale == "log" and (start is not None and start <= 0 or stop is not None and stop <= 0):
            self.error(path, "log sweep needs positive bounds")
            return None
        if None in (start, stop, points):
            return None
        if points > 1 and start == stop:
            self.error(path, "degenerate range: start equals stop")
            return None
        return Sweep(convert(start), convert(stop), points, scale)


def _resolve_materials(r, table):
    for name, value in (r.get(("materials",)) or {}).items():
        try:
            table[str(name)] = (parse_complex(value), None)
        except (TypeError, ValueError):
            r.error(("materials", str(name)), f"cannot parse index {value!r}")
    wavelength = r.number("wavelength_nm", positive=True)
    used = [r.get(("stack", "incidence")), r.get(("stack", "gap"))]
    used += [layer.get("material") if isinstance(layer, dict) else None for layer in r.get(("stack", "layers")) or []]
    resolved = {}
    for name in used:
        if name not in table:
            r.error(("stack",), f"undefined material {name!r}")
            continue
        index, wl = table[name]
        if wl is not None and wavelength is not None and abs(wl - wavelength) > 1e-9 * wl:
            r.error(("materials", name), f"tabulated at {wl:g} nm, run uses {wavelength:g} nm")
        resolved[name] = index
    r.put(("materials",), {k: format_complex(v) for k, v in sorted(resolved.items())})
    return resolved, wavelength


def _build_stack(r, materials, wavelength):
    layers_cfg = r.get(("stack", "layers"))
    if not isinstance(layers_cfg, list):
        r.error(("stack", "layers"), "must be a list of {material, thickness_nm}")
        return None
    layers = [("incidence", math.inf)]
    for i, item in enumerate(layers_cfg):
        if not isinstance(item, dict) or "material" not in item:
            r.error(("stack", "layers", str(i)), "needs material and thickness_nm")
            return None
        d = r.number("stack", "layers", i, "thickness_nm", nonneg=True)
        layers.append((item["material"], None if d is None else nm_to_m(d)))
    layers.append(("gap", math.inf))
    names = [r.get(("stack", "incidence"))] + [m for m, _ in layers[1:-1]] + [r.get(("stack", "gap"))]
    if wavelength is None or any(n not in materials for n in names) or any(d is None for _, d in layers):
        return None
    try:
        return LayerStack(
            tuple(Layer(materials[n], d) for n, (_, d) in zip(names, layers)), nm_to_m(wavelength)
        )
    except ValueError as exc:
        r.error(("stack",), str(exc))
        return None


def _build_medium(r, transition):
    density = r.number("atoms", "density_cm3", nonneg=True)
    gamma = r.get(("atoms", "detuning_gamma"))
    mhz = r.get(("atoms", "detuning_mhz"))
    absorption = r.get(("atoms", "absorption"))
    if not isinstance(absorption, bool):
        r.error(("atoms", "absorption"), "must be true or false")
    if (gamma is None) == (mhz is None):
        r.error(("atoms",), "give exactly one of detuning_gamma, detuning_mhz")
        return None
    if mhz is not None:
        x = r.number("atoms", "detuning_mhz")
        linewidth = r.get(("linewidth_mhz",))
        if x is None or not isinstance(linewidth, float):
            return None
        detuning = mhz_to_gamma(x, linewidth)
        r.tree["atoms"].pop("detuning_mhz")
        r.put(("atoms", "detuning_gamma"), detuning)
    else:
        detuning = r.number("atoms", "detuning_gamma")
    if None in (density, detuning, transition) or not isinstance(absorption, bool):
        return None
    return AtomicMedium(detuning, cm3_to_m3(density), transition, absorption)


def _build_scenario(r):
    grid = r.sweep("spectrum", "detuning", unit="gamma")
    amplitude = r.number("spectrum", "plateau_amplitude", lo=0.0, hi=1.0)
    width = r.number("spectrum", "plateau_width_gamma", positive=True)
    table = r.get(("spectrum", "z_b_table"))
    if table is None:
        z_b = r.number("spectrum", "z_b_nm", nonneg=True)
        z_b = None if z_b is None else nm_to_m(z_b)
    else:
        try:
            d = [float(v) for v in table["detuning_gamma"]]
            z = [nm_to_m(float(v)) for v in table["z_b_nm"]]
            z_b = ZbTable(d, z)
            r.put(("spectrum", "z_b_table"), {"detuning_gamma": d, "z_b_nm": [float(v) for v in table["z_b_nm"]]})
        except (KeyError, TypeError, ValueError) as exc:
            r.error(("spectrum", "z_b_table"), f"needs detuning_gamma and z_b_nm lists ({exc})")
            z_b = None
    if None in (grid, amplitude, width, z_b):
        return None
    try:
        return SpectrumScenario(tuple(grid.values()), z_b, amplitude, width)
    except ValueError as exc:
        r.error(("spectrum",), str(exc))
        return None


def _build_cloud(r):
    radii = r.vector("cloud", "radii_um", length=3)
    number = r.number("cloud", "atom_number", positive=True)
    velocity = r.number("cloud", "velocity_cm_s")
    waists = r.vector("beam", "waists_um", length=2)
    if None in (radii, number, velocity, waists):
        return None, None
    cloud = CloudModel.from_atom_number(tuple(um_to_m(x) for x in radii), number, velocity * 1e-2)
    return cloud, BeamModel(tuple(um_to_m(x) for x in waists))


def _build_trace(r):
    noise = r.choice("trace", "noise", options=("white", "shot"))
    out = {
        "sample_rate": r.number("trace", "sample_rate_hz", positive=True),
        "noise": noise,
        "noise_rms": r.number("trace", "noise_rms", nonneg=True),
        "photons_per_sample": r.number("trace", "photons_per_sample", positive=True, optional=noise != "shot"),
        "tail": r.number("trace", "tail_ms", nonneg=True),
        "lowpass_hz": r.number("trace", "lowpass_hz", positive=True, optional=True),
    }
    if out["tail"] is not None:
        out["tail"] *= 1e-3
    return out


def _build_image(r):
    shape = r.get(("image", "shape"))
    if not (isinstance(shape, list) and len(shape) == 2 and all(isinstance(v, int) and v > 0 for v in shape)):
        r.error(("image", "shape"), "must be two positive integers [rows, cols]")
        shape = None
    pitch = r.number("image", "pitch_um", positive=True)
    resolution = r.number("image", "resolution_um", positive=True, optional=True)
    return {
        "shape": None if shape is None else tuple(shape),
        "pitch": None if pitch is None else um_to_m(pitch),
        "resolution": None if resolution is None else um_to_m(resolution),
        "method": r.choice("image", "method", options=("linear", "exact")),
        "density_map": r.get(("image", "density_map")),
    }


def resolve(user):
    """Validate ``user`` (a partial tree) against the defaults; return a RunConfig.

    Raises ConfigError listing every invalid field.
    """
    if not isinstance(user, dict):
        raise ConfigError(("config", "top level must be a mapping"))
    r = _Reader(_merge_with_defaults(user))
    unknown = sorted(set(user) - set(DEFAULTS))
    for key in unknown:
        r.error((key,), "unknown key")
    materials, wavelength = _resolve_materials(r, load_materials())
    linewidth = r.number("linewidth_mhz", positive=True)
    transition = None
    if wavelength is not None and linewidth is not None:
        transition = AtomicTransition(nm_to_m(wavelength), mhz_to_angular(linewidth))
    stack = _build_stack(r, materials, wavelength)
    medium = _build_medium(r, transition)
    z_b = r.number("z_b_nm", nonneg=True)
    angle = r.angle("probe", "angle_deg")
    efficiency = r.number("probe", "efficiency", lo=0.0, hi=1.0)
    budget = r.number("probe", "max_absorbed_photons", positive=True)
    angle_sweep = r.sweep("angle_sweep", unit="deg", convert=deg_to_rad)
    density_sweep = r.sweep("qnd_map", "density", unit="cm3", convert=cm3_to_m3, positive=True)
    detuning_sweep = r.sweep("qnd_map", "detuning", unit="gamma")
    if angle_sweep is not None and max(angle_sweep.start, angle_sweep.stop) >= math.pi / 2:
        r.error(("angle_sweep",), "angles must stay below 90 degrees")
    scenario = _build_scenario(r)
    spectrum_density = r.number("spectrum", "density_cm3", nonneg=True)
    spectrum_angle = r.angle("spectrum", "angle_deg")
    cloud, beam = _build_cloud(r)
    trace = _build_trace(r)
    image = _build_image(r)
    seed = r.number("seed", nonneg=True, integer=True)
    out_format = r.choice("output", "format", options=("auto", "csv", "matrix"))
    if r.errors:
        raise ConfigError(r.errors)
    return RunConfig(
        resolved=r.tree,
        stack=stack,
        medium=medium,
        z_b=nm_to_m(z_b),
        angle=angle,
        efficiency=efficiency,
        max_absorbed_photons=budget,
        angle_sweep=angle_sweep,
        density_sweep=density_sweep,
        detuning_sweep=detuning_sweep,
        scenario=scenario,
        spectrum_density=cm3_to_m3(spectrum_density),
        spectrum_angle=spectrum_angle,
        cloud=cloud,
        beam=beam,
        trace=trace,
        image=image,
        seed=seed,
        out_path=r.get(("output", "path")),
        out_format=out_format,
    )


def load_config(path=None, sets=(), overrides=None):
    """Defaults < file at ``path`` < ``sets`` (``key=value`` strings) < ``overrides``."""
    return resolve(_user_layer(path, sets, overrides))


def dump_resolved(cfg):
    """Canonical YAML text of the resolved configuration.

    The output path is left out so that reruns into different files stay
    byte-identical.
    """
    tree = copy.deepcopy(cfg.resolved)
    tree["output"].pop("path", None)
    return yaml.safe_dump(tree, sort_keys=True, default_flow_style=None)

"""Text output: CSV tables with a units header, row-major matrices, optional PNG.

Every file may start with ``# ``-prefixed lines carrying the resolved run
configuration as YAML; ``read_config_header`` recovers it.
"""
import io

import numpy as np
import yaml

_FMT = "%.17g"


def _comment(text):
    return "".join(f"# {line}\n" for line in text.splitlines())


def format_csv(columns, units, rows, header=""):
    """CSV text: comment header, a ``units`` comment, column names, then rows."""
    if len(columns) != len(units):
        raise ValueError("one unit per column")
    out = io.StringIO()
    out.write(_comment(header))
    out.write("# units: " + ",".join(units) + "\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_FMT % float(v) for v in row) + "\n")
    return out.getvalue()


def format_matrix(matrix, pixel_pitch, header=""):
    """Row-major matrix text preceded by ``# matrix rows cols pixel_pitch_m``."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    out = io.StringIO()
    out.write(_comment(header))
    out.write(f"# matrix {m.shape[0]} {m.shape[1]} {_FMT % pixel_pitch}\n")
    for row in m:
        out.write(" ".join(_FMT % v for v in row) + "\n")
    return out.getvalue()


def read_csv(path):
    """Column names, units and the data array of a file written by ``format_csv``."""
    units = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# units: "):
                units = line[len("# units: "):].strip().split(",")
            elif not line.startswith("#"):
                columns = line.strip().split(",")
                break
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return columns, units, data


def read_matrix(path):
    """``(matrix, pixel_pitch)`` from a file written by ``format_matrix``."""
    shape = pitch = None
    with open(path, encoding="utf-8") as fh:
        lines = fh.readlines()
    for line in lines:
        if line.startswith("# matrix "):
            _, _, rows, cols, p = line.split()
            shape, pitch = (int(rows), int(cols)), float(p)
    if shape is None:
        raise ValueError(f"{path}: missing '# matrix' header")
    body = [line for line in lines if not line.startswith("#") and line.strip()]
    m = np.loadtxt(body, ndmin=2)
    if m.shape != shape:
        raise ValueError(f"{path}: header says {shape}, found {m.shape}")
    return m, pitch


def read_config_header(path):
    """Resolved configuration tree embedded in the leading comment lines."""
    lines = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("# ") or line.startswith(("# units: ", "# matrix ")):
                break
            lines.append(line[2:])
    return yaml.safe_load("".join(lines)) or {}


def write_png16(matrix, path):
    """Linearly rescale to the full 16-bit range and save as grayscale PNG."""
    from PIL import Image

    m = np.asarray(matrix, dtype=float)
    lo, hi = float(m.min()), float(m.max())
    scaled = np.zeros_like(m) if hi == lo else (m - lo) / (hi - lo)
    Image.fromarray(np.round(scaled * 65535).astype(np.uint16)).save(path)
    return lo, hi

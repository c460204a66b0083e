"""Bracketed scalar minimization: coarse grid scan followed by golden-section."""
import math

import numpy as np

from .errors import NoBracketError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, a, b, tol=1e-6):
    """Minimize a unimodal ``f`` on ``[a, b]``; returns the abscissa.

    The interval is shrunk until it is shorter than ``tol``.
    """
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def minimize_bracketed(f, lo, hi, n_grid=400, tol=1e-6, vectorized=True):
    """Locate the minimum of ``f`` on ``[lo, hi]``.

    ``f`` is sampled on ``n_grid`` equally spaced points; the best sample and
    its two neighbours form the bracket that golden-section search refines to
    ``tol``. With ``vectorized`` the grid is passed to ``f`` as one array.

    Raises
    ------
    NoBracketError
        If the best grid sample sits on either end of the interval, i.e. the
        objective looks monotone there.
    """
    if not hi > lo:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if n_grid < 3:
        raise ValueError("n_grid must be at least 3")
    grid = np.linspace(lo, hi, n_grid)
    if vectorized:
        values = np.asarray(f(grid), dtype=float)
    else:
        values = np.array([f(x) for x in grid], dtype=float)
    values = np.where(np.isnan(values), np.inf, values)
    i = int(np.argmin(values))
    if i == 0 or i == n_grid - 1:
        raise NoBracketError(f"minimum at interval edge {grid[i]:.9g}; no bracket in [{lo:.9g}, {hi:.9g}]")

    def scalar(x):
        return float(f(np.float64(x)))

    return golden_section(scalar, grid[i - 1], grid[i + 1], tol)

"""Independent verification oracle built on binning, not on Fourier series.

The unit interval is split into equal bins; the transfer operator is
discretized by exact interval-image intersections of the monotone branches
(deterministic, no sampling).  Stationary vectors of the resulting sparse
column-stochastic matrix and central-difference derivatives of them provide
the cross-checks for the spectral solvers.  The only shared code with the
spectral path is the map's lift and its Newton inversion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fourier import FourierSeries
from .maps import CircleMap, PerturbedFamily

STATIONARY_TOL = 1e-12
STATIONARY_MAXIT = 20_000


@dataclass(frozen=True, eq=False)
class UlamModel:
    """Bin-transition discretization of a map at a given resolution.

    matrix[i, j] is the fraction of bin j mapped into bin i; columns sum to
    one.  stationary holds density values per bin (sums to the bin count).
    """

    bins: int
    matrix: sp.csc_matrix
    stationary: np.ndarray

    def __post_init__(self) -> None:
        s = np.array(self.stationary, dtype=float)
        s.flags.writeable = False
        object.__setattr__(self, "stationary", s)


def _transition_matrix(circle_map: CircleMap, bins: int) -> sp.csc_matrix:
    d = circle_map.degree
    start = float(circle_map.lift(0.0))
    lo = int(np.ceil(start * bins - 1e-9))
    hi = int(np.floor((start + d) * bins + 1e-9))
    targets = np.arange(lo, hi + 1) / bins
    if targets[0] > start + 1e-15:
        targets = np.concatenate(([start], targets))
    if targets[-1] < start + d - 1e-15:
        targets = np.concatenate((targets, [start + d]))
    y = circle_map.invert_lift(targets)
    # L(0) = start and L(1) = start + d hold identically; pin the endpoints
    # so the preimage segments tile [0, 1] exactly and columns sum to one.
    y[0], y[-1] = 0.0, 1.0

    y_lo, y_hi = y[:-1], y[1:]
    mids = 0.5 * (targets[:-1] + targets[1:])
    image_bin = np.minimum((np.mod(mids, 1.0) * bins).astype(int), bins - 1)

    j0 = np.minimum((y_lo * bins).astype(int), bins - 1)
    edge = (j0 + 1) / bins
    first = np.minimum(y_hi, edge) - y_lo
    second = np.maximum(y_hi - edge, 0.0)
    rows = np.concatenate((image_bin, image_bin))
    cols = np.concatenate((j0, np.minimum(j0 + 1, bins - 1)))
    vals = np.concatenate((first, second)) * bins
    mask = vals > 0.0
    matrix = sp.coo_matrix((vals[mask], (rows[mask], cols[mask])),
                           shape=(bins, bins)).tocsc()
    col_defect = float(np.max(np.abs(matrix.sum(axis=0) - 1.0)))
    if col_defect > 1e-12:
        raise RuntimeError(f"column sums off by {col_defect:.3e}; bad branch cover")
    return matrix


def _stationary_vector(matrix: sp.csc_matrix, bins: int) -> np.ndarray:
    v = np.ones(bins)
    for _ in range(STATIONARY_MAXIT):
        nxt = matrix @ v
        residual = float(np.mean(np.abs(nxt - v)))
        v = nxt
        if residual < 0.1 * STATIONARY_TOL:
            break
    else:
        raise RuntimeError("stationary iteration did not converge")
    v = np.maximum(v, 0.0)
    v *= bins / v.sum()
    final = float(np.mean(np.abs(matrix @ v - v)))
    if final > STATIONARY_TOL:
        raise RuntimeError(f"stationary residual {final:.3e} > {STATIONARY_TOL:.0e}")
    return v


def ulam_build(circle_map: CircleMap, bins: int) -> UlamModel:
    """Transition fractions from branch-wise preimages of the bin endpoints."""
    if bins < 2:
        raise ValueError("need at least 2 bins")
    matrix = _transition_matrix(circle_map, bins)
    return UlamModel(bins, matrix, _stationary_vector(matrix, bins))


def fd_response(family: PerturbedFamily, delta: float, bins: int) -> np.ndarray:
    """Central-difference derivative of the binned stationary density."""
    plus = ulam_build(family.member(delta), bins).stationary
    minus = ulam_build(family.member(-delta), bins).stationary
    return (plus - minus) / (2.0 * delta)


def bin_averages(series: FourierSeries, bins: int) -> np.ndarray:
    """Exact per-bin averages of the series (mode-wise closed form)."""
    n = series.modes
    h = 1.0 / bins
    factors = np.ones(n.size, dtype=complex)
    nz = n != 0
    angular = 2j * np.pi * n[nz] * h
    factors[nz] = (np.exp(angular) - 1.0) / angular
    spectrum = np.zeros(bins, dtype=complex)
    np.add.at(spectrum, n % bins, series.coeffs * factors)
    values = np.fft.ifft(spectrum) * bins
    return values.real


def compare_l1(binned: np.ndarray, series: FourierSeries) -> float:
    """L1 distance between a binned density and a series averaged per bin."""
    binned = np.asarray(binned, dtype=float)
    return float(np.mean(np.abs(binned - bin_averages(series, binned.size))))

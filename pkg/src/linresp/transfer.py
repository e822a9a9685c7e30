"""Transfer operator of an expanding circle map.

(L w)(x) = sum over preimages y of x of w(y)/T'(y).  The operator pushes
densities forward, preserves the integral, and on the zero-mean subspace
I - L is invertible (spectral gap), which is what the response and control
solvers exploit.  The Galerkin matrix in the Fourier basis is assembled via
the duality  integral (L w) phi = integral w (phi o T), so no preimages are
needed for matrix entries.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fourier import (DEFAULT_ORDER, FourierSeries, GridFunction, dft, idft,
                      next_pow2)
from .maps import CircleDiffeo, CircleMap

QUADRATURE_FACTOR = 8
CONDITION_LIMIT = 1e12


class SpectralGapError(RuntimeError):
    """Power iteration failed to settle on the invariant density."""


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Dense Galerkin matrix of the transfer operator, modes -N..N.

    entries[j, k] = integral_0^1 e^{2 pi i k x} e^{-2 pi i j T(x)} dx
    (row j = output mode, column k = input mode), computed by trapezoidal
    quadrature, which is spectrally accurate for these analytic integrands.
    """

    entries: np.ndarray
    order: int
    quad_size: int

    def __post_init__(self) -> None:
        e = np.array(self.entries, dtype=complex)
        n = 2 * self.order + 1
        if e.shape != (n, n):
            raise ValueError(f"entries must be {n}x{n}")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    def apply(self, series: FourierSeries) -> FourierSeries:
        vec = series.with_order(self.order).coeffs
        return FourierSeries(self.entries @ vec).hermitian_symmetrized()

    @cached_property
    def restricted_condition(self) -> float:
        """Condition number of I - M restricted to the nonzero modes."""
        return float(np.linalg.cond(self._restricted_system()))

    def to_dict(self) -> dict:
        """Row-major debug serialization."""
        return {"N": self.order, "quad_size": self.quad_size,
                "entries": [[[float(v.real), float(v.imag)] for v in row]
                            for row in self.entries]}

    def _restricted_system(self) -> np.ndarray:
        mid = self.order
        sys = np.eye(2 * self.order + 1, dtype=complex) - self.entries
        return np.delete(np.delete(sys, mid, axis=0), mid, axis=1)


def _galerkin_entries(circle_map: CircleMap, row_order: int, col_order: int,
                      quad_size: int) -> np.ndarray:
    x = np.arange(quad_size) / quad_size
    lift = circle_map.lift(x)
    rows = np.arange(-row_order, row_order + 1)
    cols = np.arange(-col_order, col_order + 1)
    left = np.exp(-2j * np.pi * np.outer(rows, lift))
    right = np.exp(2j * np.pi * np.outer(x, cols))
    return (left @ right) / quad_size


def galerkin_matrix(circle_map: CircleMap, order: int,
                    quad_size: int | None = None) -> TransferMatrix:
    """Galerkin matrix at truncation ``order`` (quadrature >= 8*order)."""
    if quad_size is None:
        quad_size = next_pow2(max(QUADRATURE_FACTOR * order, 128))
    if quad_size < QUADRATURE_FACTOR * order:
        raise ValueError(f"quadrature size {quad_size} < {QUADRATURE_FACTOR}*order")
    entries = _galerkin_entries(circle_map, order, order, quad_size)
    return TransferMatrix(entries, order, quad_size)


def apply_transfer_pointwise(circle_map: CircleMap, series: FourierSeries,
                             points: np.ndarray) -> np.ndarray:
    """(L w)(x) at the given points via Newton preimages."""
    y = circle_map.preimages(points)
    values = series.evaluate(y) / circle_map.evaluate(y, 1)
    return values.sum(axis=0)


def apply_transfer(circle_map: CircleMap, w, out_order: int | None = None,
                   sample_size: int | None = None):
    """Apply the transfer operator; returns the same kind as the input.

    Grid input is interpreted as the trigonometric interpolant of its
    samples and the result is returned on the same grid.  Series input is
    sampled on a fine grid (default next_pow2(max(8*out_order, 2N+2))) and
    re-projected at ``out_order`` (defaults to the input order).
    """
    if isinstance(w, GridFunction):
        series = dft(w, (w.size - 1) // 2)
        return GridFunction(apply_transfer_pointwise(circle_map, series, w.nodes))
    if not isinstance(w, FourierSeries):
        raise TypeError("w must be a GridFunction or FourierSeries")
    if out_order is None:
        out_order = w.order
    if sample_size is None:
        sample_size = next_pow2(max(QUADRATURE_FACTOR * out_order,
                                    2 * w.order + 2, 256))
    x = np.arange(sample_size) / sample_size
    values = apply_transfer_pointwise(circle_map, w, x)
    return dft(GridFunction(values), out_order)


def fixed_point_residual(circle_map: CircleMap, density: FourierSeries,
                         grid: int = 1024) -> float:
    """sup norm of L(rho) - rho, evaluated pointwise (not in the Galerkin system)."""
    x = np.arange(grid) / grid
    return float(np.max(np.abs(
        apply_transfer_pointwise(circle_map, density, x) - density.evaluate(x))))


def invariant_density(circle_map: CircleMap, order: int = DEFAULT_ORDER,
                      matrix: TransferMatrix | None = None,
                      tol: float = 1e-10, maxit: int = 10_000) -> FourierSeries:
    """Invariant density as the fixed point of the Galerkin matrix.

    Power iteration starting from the uniform density; the residual-based
    stop projects the geometric tail (Aitken style) and the final iterate is
    verified to satisfy ||M rho - rho||_inf < tol.  Normalized to mean 1 and
    checked to be strictly positive on a 4096-point grid.
    """
    if matrix is None:
        matrix = galerkin_matrix(circle_map, order)
    elif matrix.order != order:
        raise ValueError("matrix order does not match requested order")
    mid = order
    v = np.zeros(2 * order + 1, dtype=complex)
    v[mid] = 1.0
    previous_residual = np.inf
    for _ in range(maxit):
        nxt = matrix.entries @ v
        nxt /= nxt[mid]
        residual = float(np.max(np.abs(nxt - v)))
        v = nxt
        ratio = residual / previous_residual if previous_residual > 0 else 0.0
        previous_residual = residual
        if residual == 0.0 or (ratio < 1.0 and residual * ratio / (1.0 - ratio) < 0.1 * tol):
            if float(np.max(np.abs(matrix.entries @ v - v))) < tol:
                break
    else:
        raise SpectralGapError(
            f"power iteration did not reach residual {tol:.1e} in {maxit} steps")
    rho = FourierSeries(v).hermitian_symmetrized()
    samples = idft(rho, next_pow2(max(4096, 2 * order + 2))).samples
    if float(np.min(samples)) <= 0.0:
        raise SpectralGapError(
            "computed density is not strictly positive; truncation too small?")
    return rho


def solve_zero_mean(circle_map: CircleMap, rhs: FourierSeries,
                    order: int = DEFAULT_ORDER,
                    matrix: TransferMatrix | None = None) -> FourierSeries:
    """Solve (I - L) v = rhs on the zero-mean subspace, returning mean-zero v.

    The rhs must have zero mean (|mode 0| < 1e-10), which is exactly the
    subspace where I - L is invertible.  A condition number above 1e12 for
    the restricted system is reported as a warning.
    """
    if abs(rhs.coeff(0)) > 1e-10:
        raise ValueError(f"rhs mean {rhs.coeff(0):.3e} is not zero")
    if rhs.order > order:
        raise ValueError(f"rhs order {rhs.order} exceeds solver truncation {order}")
    if matrix is None:
        matrix = galerkin_matrix(circle_map, order)
    elif matrix.order != order:
        raise ValueError("matrix order does not match requested order")
    if matrix.restricted_condition > CONDITION_LIMIT:
        warnings.warn(
            f"restricted system condition {matrix.restricted_condition:.3e} > "
            f"{CONDITION_LIMIT:.0e}: truncation under-resolved", RuntimeWarning)
    mid = order
    b = np.delete(rhs.with_order(order).coeffs, mid)
    sol = np.linalg.solve(matrix._restricted_system(), b)
    v = np.insert(sol, mid, 0.0)
    result = FourierSeries(v).hermitian_symmetrized()
    residual = float(np.max(np.abs(
        np.delete((np.eye(2 * order + 1) - matrix.entries) @ result.coeffs, mid) - b)))
    if residual > 1e-10:
        raise SpectralGapError(f"zero-mean solve residual {residual:.3e} > 1e-10")
    return result


def build_conjugate(circle_map: CircleMap, diffeo: CircleDiffeo,
                    order: int = 128, sample_size: int | None = None) -> CircleMap:
    """The conjugated map S = h o T o h^{-1} as a CircleMap.

    S's periodic part is sampled through Newton inversion of h and
    re-projected, so downstream transfer applications of S use their own
    preimages and derivatives rather than the conjugacy's chain rule.
    """
    if sample_size is None:
        sample_size = next_pow2(max(8 * order, 1024))
    x = np.arange(sample_size) / sample_size
    inner = diffeo.invert(x)
    lifted = circle_map.lift(inner)
    outer = lifted + diffeo.displacement.evaluate(lifted)
    periodic = dft(GridFunction(outer - circle_map.degree * x), order)
    return CircleMap(circle_map.degree, periodic)


def transfer_conjugacy_check(circle_map: CircleMap, diffeo: CircleDiffeo,
                             w: FourierSeries, grid: int = 1024,
                             conjugate_order: int = 128) -> float:
    """Max-norm residual of (L_S w) o h = (1/h') L_T((w o h) h') on a grid.

    S = h o T o h^{-1} is rebuilt independently (see build_conjugate), so the
    two sides share no preimage computations.  Test-only diagnostic.
    """
    conjugate = build_conjugate(circle_map, diffeo, conjugate_order)
    x = np.arange(grid) / grid
    hx = np.mod(diffeo.evaluate(x), 1.0)
    left = apply_transfer_pointwise(conjugate, w, hx)

    size = next_pow2(max(8 * conjugate_order, 1024))
    xs = np.arange(size) / size
    composed = dft(GridFunction(w.evaluate(diffeo.evaluate(xs)) * diffeo.deriv(xs)),
                   conjugate_order)
    right = apply_transfer_pointwise(circle_map, composed, x) / diffeo.deriv(x)
    return float(np.max(np.abs(left - right)))

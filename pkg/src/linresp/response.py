"""Forward linear response: derivative of the invariant density.

For a family T_delta = T0 + delta*eps the derivative operator of the
transfer operators acts as

    D w = -L0( (eps * w / T0')' )

(the compact product-rule form of the three-term expansion), and the
first-order density change is rho1 = (I - L0)^{-1} D rho, solved on the
zero-mean subspace.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fourier import (DEFAULT_ORDER, FourierSeries, GridFunction, dft,
                      differentiate, l1_norm, next_pow2, sup_norm)
from .maps import CircleMap, PerturbedFamily
from .transfer import (TransferMatrix, apply_transfer, fixed_point_residual,
                       galerkin_matrix, invariant_density, solve_zero_mean)

# Products are formed at PAD_FACTOR*N modes and truncated back to N.
PAD_FACTOR = 4
CROSS_CHECK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ResponseProblem:
    """A map together with its invariant density and working truncation."""

    map: CircleMap
    density: FourierSeries
    order: int = DEFAULT_ORDER

    def __post_init__(self) -> None:
        if abs(self.density.coeff(0) - 1.0) > 1e-10:
            raise ValueError("density must be normalized to mean 1")
        residual = fixed_point_residual(self.map, self.density)
        if residual > 1e-9:
            raise ValueError(
                f"density fixed-point residual {residual:.3e} > 1e-9")

    @classmethod
    def for_map(cls, circle_map: CircleMap, order: int = DEFAULT_ORDER) -> "ResponseProblem":
        matrix = galerkin_matrix(circle_map, order)
        rho = invariant_density(circle_map, order, matrix=matrix)
        problem = cls(circle_map, rho, order)
        problem.__dict__["matrix"] = matrix
        return problem

    @cached_property
    def matrix(self) -> TransferMatrix:
        return galerkin_matrix(self.map, self.order)


def derivative_operator(problem: ResponseProblem, direction: FourierSeries,
                        w: FourierSeries, check: bool = True) -> FourierSeries:
    """Apply the derivative operator D (at perturbation ``direction``) to w.

    Production path is the compact form -L((eps*w/T')'); with ``check`` the
    three-term form -L(w eps'/T') - L(eps w'/T') + L(eps T''/(T')^2 w) is
    evaluated as well and the two must agree within 1e-9 in sup norm.
    """
    circle_map, order = problem.map, problem.order
    pad = PAD_FACTOR * order
    size = next_pow2(max(2 * pad + 2, 2 * direction.order + 2, 2 * w.order + 2))
    x = np.arange(size) / size
    ev = direction.evaluate(x)
    wv = w.evaluate(x)
    tp = circle_map.evaluate(x, 1)
    product = dft(GridFunction(ev * wv / tp), pad)
    result = apply_transfer(circle_map, -differentiate(product), out_order=order)
    if check:
        epv = differentiate(direction).evaluate(x)
        wpv = differentiate(w).evaluate(x)
        tpp = circle_map.evaluate(x, 2)
        combined = dft(GridFunction(-wv * epv / tp - ev * wpv / tp
                                    + ev * tpp * wv / tp**2), pad)
        alt = apply_transfer(circle_map, combined, out_order=order)
        gap = sup_norm(result - alt, grid=1024)
        if gap > CROSS_CHECK_TOL:
            raise RuntimeError(
                f"compact and three-term forms disagree by {gap:.3e} (> 1e-9)")
    return result


def forward_response(problem: ResponseProblem, direction: FourierSeries,
                     check: bool = True) -> FourierSeries:
    """First-order density change rho1 for the perturbation ``direction``."""
    drho = derivative_operator(problem, direction, problem.density, check=check)
    if abs(drho.coeff(0)) > 1e-10:
        raise ValueError(
            f"derivative term has mean {drho.coeff(0):.3e}; expected zero")
    return solve_zero_mean(problem.map, drho, problem.order, matrix=problem.matrix)


def finite_difference_response_check(problem: ResponseProblem,
                                     direction: FourierSeries, delta: float,
                                     grid: int = 4096) -> float:
    """L1 gap between the central-difference density derivative and rho1.

    Invariant densities of T_{+delta} and T_{-delta} are computed spectrally,
    so the gap scales as O(delta^2).
    """
    family = PerturbedFamily(problem.map, direction)
    rho_plus = invariant_density(family.member(delta), problem.order)
    rho_minus = invariant_density(family.member(-delta), problem.order)
    fd = (rho_plus - rho_minus) * (0.5 / delta)
    return l1_norm(fd - forward_response(problem, direction), grid)

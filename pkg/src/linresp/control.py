"""Inverse control of the invariant density.

Given a prescribed first-order density change rho1, find a map perturbation
eps realizing it.  Two routes:

* a particular solution by the two-step scheme: choose g with
  L0(g) = (I - L0) rho1 via the conjugacy closed form, then integrate the
  resulting first-order linear ODE in closed form ((eps*rho/T')' = -g);
* the minimal solution in a derivative-weighted Sobolev norm, by
  constrained least squares on the truncated constraint A eps = r with a
  truncated-SVD pseudoinverse.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fourier import (FourierSeries, GridFunction, SobolevWeights,
                      antiderivative, dft, differentiate, next_pow2,
                      sobolev_norm, sup_norm)
from .response import ResponseProblem, derivative_operator, forward_response
from .transfer import _galerkin_entries, apply_transfer, apply_transfer_pointwise

PSEUDOINVERSE_CUTOFF = 1e-10
FEASIBILITY_TOL = 1e-8
ROUNDTRIP_TOL = 1e-6
# Entries of the assembled constraint matrix below this (relative to its
# largest entry) are quadrature round-off, not data; clearing them keeps the
# weighted SVD's null space aligned with the operator's true kernel.
ASSEMBLY_NOISE_FLOOR = 1e-13


class InfeasibleTargetError(RuntimeError):
    """The target is not realizable at this truncation."""


@dataclass(frozen=True, eq=False)
class ControlSolution:
    """A perturbation realizing a target density change.

    residual is the Euclidean norm of the truncated constraint defect
    ||A eps - r||_2; norm is the Sobolev norm the solution was scored with.
    """

    epsilon: FourierSeries
    residual: float
    norm: float
    method: str

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon.to_dict(), "residual": self.residual,
                "norm": self.norm, "method": self.method}


def _require_zero_mean(series: FourierSeries, what: str) -> None:
    if abs(series.coeff(0)) > 1e-10:
        raise ValueError(f"{what} has mean {series.coeff(0):.3e}; densities "
                         "integrate to 1, so the change must have zero mean")


def step1_g(problem: ResponseProblem, target: FourierSeries,
            out_order: int | None = None) -> FourierSeries:
    """Solve L0(g) = (I - L0) rho1 in closed form.

    With f = (I - L0) rho1, the function g = (f o T0) * rho / (rho o T0)
    satisfies L0(g) = f exactly (the conjugacy to a Haar-preserving map,
    simplified so that no numerical inversion is needed).  Verified to
    ||L0 g - f||_inf < 1e-9 and integral g = 0 within 1e-10.
    """
    _require_zero_mean(target, "target density change")
    circle_map, rho = problem.map, problem.density
    order = problem.order
    if out_order is None:
        out_order = (circle_map.degree + 1) * order
    f = target.with_order(order) - apply_transfer(circle_map, target, out_order=order)
    size = next_pow2(max(4 * out_order, 512))
    x = np.arange(size) / size
    image = circle_map.lift(x)
    values = f.evaluate(image) * rho.evaluate(x) / rho.evaluate(image)
    g = dft(GridFunction(values), out_order)
    check = np.arange(1024) / 1024
    defect = float(np.max(np.abs(
        apply_transfer_pointwise(circle_map, g, check) - f.evaluate(check))))
    if defect > 1e-9:
        raise RuntimeError(f"step-1 verification failed: ||L g - f||_inf = {defect:.3e}")
    if abs(g.coeff(0)) > 1e-10:
        raise RuntimeError(f"step-1 verification failed: integral g = {g.coeff(0):.3e}")
    return g


def step2_epsilon(problem: ResponseProblem, g: FourierSeries,
                  out_order: int | None = None) -> FourierSeries:
    """Solve the first-order linear ODE for eps in closed form.

    The equation -eps' rho/T' - eps rho'/T' + eps rho T''/(T')^2 = g is the
    exact derivative identity (eps*rho/T')' = -g, so with G the zero-mean
    primitive of g, eps = (T'/rho) (C - G), the free constant C fixed by
    integral eps = 0.  The pointwise ODE residual is verified below 1e-9.
    """
    _require_zero_mean(g, "step-2 right-hand side")
    circle_map, rho = problem.map, problem.density
    if out_order is None:
        out_order = g.order + problem.order
    primitive = antiderivative(g)
    size = next_pow2(max(4 * out_order, 512))
    x = np.arange(size) / size
    base = circle_map.evaluate(x, 1) / rho.evaluate(x)
    gvals = primitive.evaluate(x)
    c = float(np.mean(base * gvals) / np.mean(base))
    eps = dft(GridFunction(base * (c - gvals)), out_order)

    check = np.arange(1024) / 1024
    tp = circle_map.evaluate(check, 1)
    tpp = circle_map.evaluate(check, 2)
    rv = rho.evaluate(check)
    rpv = differentiate(rho).evaluate(check)
    ev = eps.evaluate(check)
    epv = differentiate(eps).evaluate(check)
    residual = float(np.max(np.abs(
        -epv * rv / tp - ev * rpv / tp + ev * rv * tpp / tp**2 - g.evaluate(check))))
    if residual > 1e-9:
        raise RuntimeError(f"step-2 ODE residual {residual:.3e} > 1e-9")
    return eps


def _constraint_rhs(problem: ResponseProblem, target: FourierSeries,
                    order: int) -> np.ndarray:
    if target.order > order:
        raise ValueError(f"target order {target.order} exceeds truncation {order}")
    t = target.with_order(order)
    image = apply_transfer(problem.map, t, out_order=order)
    return t.coeffs - image.coeffs


def constraint_matrix(problem: ResponseProblem, order: int) -> np.ndarray:
    """Matrix A mapping eps coefficients to those of L0(-(eps*rho/T')').

    Assembled as (-Galerkin) x (derivative) x (multiplication by rho/T'),
    each factor exact up to spectral quadrature; one column equals one
    forward application of the compact-form operator to a basis mode.
    """
    circle_map, rho = problem.map, problem.density
    size = next_pow2(max(8 * order, 256))
    x = np.arange(size) / size
    mult = dft(GridFunction(rho.evaluate(x) / circle_map.evaluate(x, 1)), order)

    wide = 2 * order  # products of order-N data with the order-N multiplier
    k = np.arange(-wide, wide + 1)
    n = np.arange(-order, order + 1)
    offset = k[:, None] - n[None, :]
    conv = np.where(np.abs(offset) <= mult.order,
                    mult.coeffs[np.clip(offset + mult.order, 0, 2 * mult.order)],
                    0.0)
    deriv_conv = (2j * np.pi * k)[:, None] * conv
    quad = next_pow2(max(8 * wide, 256))
    galerkin = _galerkin_entries(circle_map, order, wide, quad)
    matrix = -(galerkin @ deriv_conv)
    matrix[np.abs(matrix) < ASSEMBLY_NOISE_FLOOR * np.max(np.abs(matrix))] = 0.0
    return matrix


def _weighted_svd(problem: ResponseProblem, weights: SobolevWeights, order: int):
    a = constraint_matrix(problem, order)
    scale = 1.0 / np.sqrt(weights.mode_weights(order))
    u, s, vh = np.linalg.svd(a * scale[None, :])
    return a, scale, u, s, vh


def minimal_norm_control(problem: ResponseProblem, target: FourierSeries,
                         weights: SobolevWeights = SobolevWeights(),
                         order: int | None = None) -> ControlSolution:
    """Minimal Sobolev-norm perturbation realizing the target.

    Solves min ||eps||_W subject to A eps = r through the weighted normal
    equations eps = W^{-1} A* (A W^{-1} A*)^+ r, realized as a truncated-SVD
    pseudoinverse of A W^{-1/2} (singular values below 1e-10 of the largest
    are treated as null space).  A constraint defect above 1e-8 means the
    target is not realizable at this truncation.
    """
    _require_zero_mean(target, "target density change")
    if order is None:
        order = problem.order
    a, scale, u, s, vh = _weighted_svd(problem, weights, order)
    r = _constraint_rhs(problem, target, order)
    keep = s > PSEUDOINVERSE_CUTOFF * s[0]
    coef = (vh[keep].conj().T) @ ((u[:, keep].conj().T @ r) / s[keep])
    eps = FourierSeries(scale * coef).hermitian_symmetrized()
    residual = float(np.linalg.norm(a @ eps.coeffs - r))
    if residual > FEASIBILITY_TOL:
        raise InfeasibleTargetError(
            f"constraint residual {residual:.3e} > {FEASIBILITY_TOL:.0e}: target not "
            f"realizable at truncation {order}; retry with a larger order")
    return ControlSolution(eps, residual, sobolev_norm(eps, weights), "minimal_norm")


def solve_control(problem: ResponseProblem, target: FourierSeries,
                  weights: SobolevWeights = SobolevWeights()) -> ControlSolution:
    """Particular solution via the two-step scheme, with an end-to-end check.

    forward_response of the returned eps must reproduce the target within
    1e-6 in sup norm.  The reported norm uses ``weights`` (default: plain L2).
    """
    g = step1_g(problem, target)
    eps = step2_epsilon(problem, g)
    realized = forward_response(problem, eps)
    gap = sup_norm(realized - target)
    if gap > ROUNDTRIP_TOL:
        raise RuntimeError(f"two-step round trip error {gap:.3e} > 1e-6")
    drho = derivative_operator(problem, eps, problem.density, check=False)
    residual = float(np.linalg.norm(
        drho.coeffs - _constraint_rhs(problem, target, problem.order)))
    if residual > FEASIBILITY_TOL:
        raise RuntimeError(f"two-step constraint defect {residual:.3e} > 1e-8")
    return ControlSolution(eps, residual, sobolev_norm(eps, weights), "two_step")


def kernel_directions(problem: ResponseProblem, order: int | None = None,
                      count: int = 6,
                      weights: SobolevWeights = SobolevWeights()) -> list[FourierSeries]:
    """W-orthonormal directions spanning the numerical null space of A.

    Perturbations along these directions change the invariant density only
    at second order.  If fewer than ``count`` null directions exist at this
    truncation, the available ones are returned with a warning.
    """
    if order is None:
        order = problem.order
    _, scale, _, s, vh = _weighted_svd(problem, weights, order)
    null = vh[s <= PSEUDOINVERSE_CUTOFF * s[0]].conj().T
    if null.size == 0:
        warnings.warn("no null directions at this truncation", RuntimeWarning)
        return []
    # Real (Hermitian) combinations: the null space is conjugation symmetric,
    # so split each vector into its J-invariant parts and re-orthonormalize.
    flip = lambda v: np.conj(v[::-1])
    candidates = []
    for v in null.T:
        candidates.append(0.5 * (v + flip(v)))
        candidates.append((v - flip(v)) / 2j)
    basis = np.array(candidates).T
    gram = basis.conj().T @ basis
    lam, q = np.linalg.eigh(gram.real)
    keep = lam > 1e-12 * max(lam[-1], 1e-300)
    ortho = basis @ (q[:, keep] / np.sqrt(lam[keep]))
    ortho = ortho[:, ::-1]  # largest eigenvalue first: deterministic order
    found = ortho.shape[1]
    if found < count:
        warnings.warn(f"only {found} null directions exist at truncation {order} "
                      f"(requested {count})", RuntimeWarning)
    return [FourierSeries(scale * ortho[:, i]).hermitian_symmetrized()
            for i in range(min(count, found))]


def minimal_norm_truncation_report(problem: ResponseProblem, target: FourierSeries,
                                   weights: SobolevWeights = SobolevWeights(),
                                   order: int | None = None) -> dict:
    """Minimal norms at truncations (N, 2N) and their difference."""
    if order is None:
        order = problem.order
    low = minimal_norm_control(problem, target, weights, order)
    high = minimal_norm_control(problem, target, weights, 2 * order)
    return {"order": order, "norm": low.norm,
            "order_doubled": 2 * order, "norm_doubled": high.norm,
            "difference": abs(high.norm - low.norm)}


def weighted_inner_product(f: FourierSeries, g: FourierSeries,
                           weights: SobolevWeights) -> complex:
    """W-inner product sum_n W(n) conj(f_n) g_n."""
    order = max(f.order, g.order)
    w = weights.mode_weights(order)
    return complex(np.sum(w * np.conj(f.with_order(order).coeffs)
                          * g.with_order(order).coeffs))

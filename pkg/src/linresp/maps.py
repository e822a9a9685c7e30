"""Expanding circle maps given as lifts x -> d*x + p(x).

The periodic part p is a trigonometric polynomial, so derivatives to any
order are exact and branch inverses can be found by Newton iteration on the
strictly increasing lift.  One-parameter families T_delta = T0 + delta*eps
model first-order perturbations of the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fourier import (FourierSeries, antiderivative, constant, differentiate,
                      horner_values, next_pow2, zeros)

EXPANSIVITY_MARGIN = 1e-9
FAMILY_MARGIN = 0.05
NEWTON_TOL = 1e-13
NEWTON_MAXIT = 100


class NotExpandingError(ValueError):
    """The lift's derivative does not stay above 1."""


class PreimageError(RuntimeError):
    """Branch inversion failed to converge; the map is corrupted."""


def _validation_grid(order: int) -> np.ndarray:
    size = max(4096, next_pow2(8 * (order + 1)))
    return np.arange(size) / size


def _solve_increasing(value_slope, target, seed, lo, hi,
                      tol=NEWTON_TOL, maxit=NEWTON_MAXIT):
    """Vectorized root finding for a strictly increasing function.

    ``value_slope(y)`` returns the pair (f(y), f'(y)).  Newton from the seed,
    clipped to the bracket [lo, hi]; points that have not converged after
    ``maxit`` sweeps fall back to bisection plus a Newton polish.
    """
    y = np.clip(np.asarray(seed, dtype=float), lo, hi)
    for _ in range(maxit):
        value, slope = value_slope(y)
        resid = value - target
        if np.max(np.abs(resid)) < tol:
            return y
        y = np.clip(y - resid / slope, lo, hi)
    bad = np.abs(value_slope(y)[0] - target) >= tol
    if np.any(bad):
        a = np.array(lo[bad] if np.ndim(lo) else np.full(int(bad.sum()), lo))
        b = np.array(hi[bad] if np.ndim(hi) else np.full(int(bad.sum()), hi))
        t = target[bad]
        for _ in range(120):
            m = 0.5 * (a + b)
            left = value_slope(m)[0] <= t
            a = np.where(left, m, a)
            b = np.where(left, b, m)
        yb = 0.5 * (a + b)
        for _ in range(3):
            value, slope = value_slope(yb)
            yb = yb - (value - t) / slope
        y[bad] = yb
        if np.max(np.abs(value_slope(y)[0] - target)) >= tol:
            raise PreimageError(
                "branch inversion did not converge; map is not expanding or corrupted")
    return y


@dataclass(frozen=True, eq=False)
class CircleMap:
    """Degree-d expanding circle map with lift L(x) = d*x + p(x).

    Construction verifies expansivity: min over a fine grid of d + p'(x)
    must exceed 1 + 1e-9.
    """

    degree: int
    periodic_part: FourierSeries

    def __post_init__(self) -> None:
        d = int(self.degree)
        if d < 2:
            raise ValueError(f"degree must be >= 2, got {self.degree}")
        object.__setattr__(self, "degree", d)
        x = _validation_grid(self.periodic_part.order)
        deriv = d + differentiate(self.periodic_part).evaluate(x)
        min_deriv = float(np.min(deriv))
        if min_deriv <= 1.0 + EXPANSIVITY_MARGIN:
            raise NotExpandingError(
                f"min lift derivative {min_deriv:.6g} <= 1: map is not expanding")
        pvals = self.periodic_part.evaluate(x)
        pad = 1e-9 + 1e-3 * (float(np.max(pvals)) - float(np.min(pvals)))
        object.__setattr__(self, "_min_deriv", min_deriv)
        object.__setattr__(self, "_p_lo", float(np.min(pvals)) - pad)
        object.__setattr__(self, "_p_hi", float(np.max(pvals)) + pad)
        object.__setattr__(self, "_lift0", float(self.periodic_part.evaluate(0.0)))

    @cached_property
    def _derivs(self) -> tuple[FourierSeries, FourierSeries, FourierSeries]:
        p1 = differentiate(self.periodic_part)
        return p1, differentiate(p1), differentiate(p1, 2)

    @property
    def min_derivative(self) -> float:
        return self._min_deriv

    def lift(self, x):
        return self.degree * np.asarray(x, dtype=float) + self.periodic_part.evaluate(x)

    def evaluate(self, x, deriv: int = 0):
        """Map value (mod 1) for deriv=0; T', T'', T''' for deriv=1..3."""
        if deriv == 0:
            return np.mod(self.lift(x), 1.0)
        if deriv == 1:
            return self.degree + self._derivs[0].evaluate(x)
        if deriv in (2, 3):
            return self._derivs[deriv - 1].evaluate(x)
        raise ValueError("deriv must be in 0..3")

    def __call__(self, x):
        return self.evaluate(x)

    def _lift_pair(self, y):
        """(L(y), L'(y)) with the unit-circle exponentials computed once."""
        z = np.exp(2j * np.pi * y)
        p = horner_values(self.periodic_part.coeffs, y, z).real
        dp = horner_values(self._derivs[0].coeffs, y, z).real
        return self.degree * y + p, self.degree + dp

    def invert_lift(self, targets):
        """Solve L(y) = t for each t; the unique real solution of the lift."""
        t = np.asarray(targets, dtype=float)
        scalar = t.ndim == 0
        tf = np.atleast_1d(t).ravel()
        shift = np.floor((tf - self._lift0) / self.degree)
        base = tf - self.degree * shift  # now within [L(0), L(0)+d)
        seed = (base - self._lift0) / self.degree
        lo = (base - self._p_hi) / self.degree
        hi = (base - self._p_lo) / self.degree
        y = _solve_increasing(self._lift_pair, base, seed, lo, hi) + shift
        if scalar:
            return float(y[0])
        return y.reshape(t.shape)

    def preimages(self, x):
        """All d preimages of x, ordered by branch: L(y_i) = x + k_i, y_i in [0,1).

        Newton residual below 1e-13; branches are strictly increasing.
        """
        xa = np.asarray(x, dtype=float)
        scalar = xa.ndim == 0
        xf = np.mod(np.atleast_1d(xa).ravel(), 1.0)
        kmin = np.ceil(self._lift0 - xf)  # first integer k with x + k >= L(0)
        targets = xf[None, :] + kmin[None, :] + np.arange(self.degree)[:, None]
        y = self.invert_lift(targets.ravel()).reshape(self.degree, xf.size)
        if scalar:
            return y[:, 0]
        return y.reshape((self.degree,) + xa.shape)

    def to_dict(self) -> dict:
        return {"degree": self.degree, "periodic_part": self.periodic_part.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "CircleMap":
        return cls(int(data["degree"]), FourierSeries.from_dict(data["periodic_part"]))


def doubling_map() -> CircleMap:
    """The linear degree-2 map x -> 2x (mod 1)."""
    return CircleMap(2, zeros(0))


@dataclass(frozen=True, eq=False)
class PerturbedFamily:
    """One-parameter family T_delta = T0 + delta*eps of circle maps.

    Members stay uniformly expanding for |delta| < delta_max, computed with
    a safety margin on the base map's expansivity.
    """

    base: CircleMap
    direction: FourierSeries

    @cached_property
    def delta_max(self) -> float:
        x = _validation_grid(self.direction.order)
        slope = float(np.max(np.abs(differentiate(self.direction).evaluate(x))))
        room = self.base.min_derivative - 1.0 - FAMILY_MARGIN
        if room <= 0.0:
            return 0.0
        if slope == 0.0:
            return np.inf
        return room / slope

    def member(self, delta: float) -> CircleMap:
        if not abs(delta) < self.delta_max:
            raise ValueError(
                f"|delta| = {abs(delta):.6g} >= delta_max = {self.delta_max:.6g}: "
                "perturbation breaks expansivity")
        return CircleMap(self.base.degree,
                         self.base.periodic_part + delta * self.direction)

    def preimage_shift(self, x: float, branch: int, delta: float) -> float:
        """First-order prediction of the branch preimage under T_delta."""
        if not abs(delta) < self.delta_max:
            raise ValueError("|delta| >= delta_max")
        y0 = self.base.preimages(x)[branch]
        return float(y0 - delta * self.direction.evaluate(y0)
                     / self.base.evaluate(y0, 1))


@dataclass(frozen=True, eq=False)
class CircleDiffeo:
    """Orientation-preserving circle diffeomorphism h(x) = x + q(x).

    q is periodic; h' = 1 + q' must stay strictly positive.
    """

    displacement: FourierSeries

    def __post_init__(self) -> None:
        x = _validation_grid(self.displacement.order)
        deriv = 1.0 + differentiate(self.displacement).evaluate(x)
        if float(np.min(deriv)) <= 0.0:
            raise ValueError("h' <= 0 somewhere: not a diffeomorphism")
        q = self.displacement.evaluate(x)
        pad = 1e-9 + 1e-3 * (float(np.max(q)) - float(np.min(q)))
        object.__setattr__(self, "_q_lo", float(np.min(q)) - pad)
        object.__setattr__(self, "_q_hi", float(np.max(q)) + pad)

    @cached_property
    def _dq(self) -> FourierSeries:
        return differentiate(self.displacement)

    def evaluate(self, x):
        return np.asarray(x, dtype=float) + self.displacement.evaluate(x)

    def deriv(self, x):
        return 1.0 + self._dq.evaluate(x)

    def _pair(self, y):
        z = np.exp(2j * np.pi * y)
        q = horner_values(self.displacement.coeffs, y, z).real
        dq = horner_values(self._dq.coeffs, y, z).real
        return y + q, 1.0 + dq

    def invert(self, x):
        """Newton inversion of h (solves y + q(y) = x)."""
        xa = np.asarray(x, dtype=float)
        scalar = xa.ndim == 0
        flat = np.atleast_1d(xa).ravel()
        y = _solve_increasing(self._pair, flat, flat,
                              flat - self._q_hi, flat - self._q_lo)
        if scalar:
            return float(y[0])
        return y.reshape(xa.shape)

    @classmethod
    def identity(cls) -> "CircleDiffeo":
        return cls(zeros(0))

    @classmethod
    def from_density(cls, density: FourierSeries) -> "CircleDiffeo":
        """h(x) = integral of the density from 0 to x, for a mean-1 density."""
        if abs(density.coeff(0) - 1.0) > 1e-8:
            raise ValueError("density must have mean 1")
        primitive = antiderivative(density - constant(1.0))
        return cls(primitive.plus_constant(-primitive.evaluate(0.0)))

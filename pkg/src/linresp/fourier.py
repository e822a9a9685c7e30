"""Truncated Fourier algebra for real 1-periodic functions.

Functions live on the unit circle and are represented either by complex
Fourier coefficients (mode n multiplies e^{2 pi i n x}, n = -N..N) or by
samples on the uniform grid x_j = j/M.  Real-valuedness is encoded as the
Hermitian symmetry coeffs[-n] == conj(coeffs[n]); every operation here
preserves that symmetry exactly.  All values are immutable and all
operations are pure, so everything is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_ORDER = 64


def next_pow2(n: int) -> int:
    """Smallest power of two >= max(n, 2)."""
    m = 2
    while m < n:
        m *= 2
    return m


@dataclass(frozen=True)
class SobolevWeights:
    """Parameters (a, b, c, d) of the derivative-weighted Sobolev norm.

    The norm is realized as the quadratic form

        ||f||^2 = ||f||_2^2 + a^2 ||f'||_2^2 + b^2 ||f''||_2^2
                  + c^2 ||f'''||_2^2 + d^2 ||f''''||_2^2,

    which is diagonal in the Fourier basis with per-mode weight
    W(n) = 1 + a^2 (2 pi n)^2 + b^2 (2 pi n)^4 + c^2 (2 pi n)^6
    + d^2 (2 pi n)^8 >= 1.  The plain L2 norm is a = b = c = d = 0.
    """

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0.0:
                raise ValueError(f"weight {name!r} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)

    def mode_weights(self, order: int) -> np.ndarray:
        """Diagonal weights W(n) for n = -order..order."""
        n = np.arange(-order, order + 1)
        w = 2.0 * np.pi * n
        return (1.0 + (self.a * w) ** 2 + (self.b * w**2) ** 2
                + (self.c * w**3) ** 2 + (self.d * w**4) ** 2)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}

    @classmethod
    def from_dict(cls, data: dict) -> "SobolevWeights":
        return cls(float(data.get("a", 0.0)), float(data.get("b", 0.0)),
                   float(data.get("c", 0.0)), float(data.get("d", 0.0)))


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Truncated Fourier coefficients of a real periodic function.

    ``coeffs`` has length 2N+1 and is indexed by mode n = -N..N; mode n
    multiplies e^{2 pi i n x}.
    """

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coeffs must be one-dimensional with odd length (modes -N..N)")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        n = self.order
        return np.arange(-n, n + 1)

    def coeff(self, n: int) -> complex:
        """Coefficient of mode n; zero beyond the truncation."""
        if abs(n) > self.order:
            return 0.0 + 0.0j
        return complex(self.coeffs[n + self.order])

    @property
    def mean(self) -> float:
        """Integral over one period (real part of mode 0)."""
        return float(self.coeffs[self.order].real)

    @property
    def hermitian_defect(self) -> float:
        """Max deviation from coeffs[-n] == conj(coeffs[n])."""
        return float(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))))

    def hermitian_symmetrized(self) -> "FourierSeries":
        return FourierSeries(0.5 * (self.coeffs + np.conj(self.coeffs[::-1])))

    def evaluate(self, x):
        """Evaluate at points x (scalar or array); returns real values.

        Raises if the imaginary residue exceeds 1e-12 relative to the
        coefficient mass, which signals broken Hermitian symmetry.
        """
        xa = np.asarray(x, dtype=float)
        scalar = xa.ndim == 0
        flat = np.atleast_1d(xa).ravel()
        out = horner_values(self.coeffs, flat)
        _check_imag(out, float(np.sum(np.abs(self.coeffs))))
        vals = out.real
        if scalar:
            return float(vals[0])
        return vals.reshape(xa.shape)

    def __call__(self, x):
        return self.evaluate(x)

    def with_order(self, order: int) -> "FourierSeries":
        """Zero-pad or truncate to the given order."""
        if order == self.order:
            return self
        c = np.zeros(2 * order + 1, dtype=complex)
        m = min(order, self.order)
        c[order - m:order + m + 1] = self.coeffs[self.order - m:self.order + m + 1]
        return FourierSeries(c)

    def plus_constant(self, value: float) -> "FourierSeries":
        c = np.array(self.coeffs)
        c[self.order] += value
        return FourierSeries(c)

    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        n = max(self.order, other.order)
        return FourierSeries(self.with_order(n).coeffs + other.with_order(n).coeffs)

    def __sub__(self, other: "FourierSeries") -> "FourierSeries":
        n = max(self.order, other.order)
        return FourierSeries(self.with_order(n).coeffs - other.with_order(n).coeffs)

    def __neg__(self) -> "FourierSeries":
        return FourierSeries(-self.coeffs)

    def __mul__(self, scalar) -> "FourierSeries":
        s = _real_scalar(scalar)
        return FourierSeries(self.coeffs * s)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "FourierSeries":
        return self * (1.0 / _real_scalar(scalar))

    def to_dict(self) -> dict:
        return {"N": self.order,
                "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}

    @classmethod
    def from_dict(cls, data: dict) -> "FourierSeries":
        order = int(data["N"])
        pairs = data["coeffs"]
        if len(pairs) != 2 * order + 1:
            raise ValueError("coeffs length does not match N")
        return cls(np.array([complex(re, im) for re, im in pairs]))


def horner_values(coeffs: np.ndarray, x: np.ndarray,
                  z: np.ndarray | None = None) -> np.ndarray:
    """Complex series values by Horner recurrence on the unit circle.

    ``z`` may carry a precomputed e^{2 pi i x} so callers evaluating several
    series at the same points pay for the exponentials once.  Stable because
    |z| == 1.
    """
    if z is None:
        z = np.exp(2j * np.pi * x)
    acc = np.full(x.shape, coeffs[-1], dtype=complex)
    for k in range(coeffs.size - 2, -1, -1):
        acc *= z
        acc += coeffs[k]
    order = (coeffs.size - 1) // 2
    if order:
        acc *= np.exp(-2j * np.pi * order * x)
    return acc


def _real_scalar(scalar) -> float:
    if isinstance(scalar, complex):
        if scalar.imag != 0.0:
            raise TypeError("only real scalars keep the function real-valued")
        return scalar.real
    return float(scalar)


def _check_imag(values: np.ndarray, coeff_mass: float) -> None:
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue > 1e-12 * max(1.0, coeff_mass):
        raise ValueError(
            f"imaginary residue {residue:.3e} exceeds tolerance; "
            "Hermitian symmetry is broken")


def zeros(order: int = 0) -> FourierSeries:
    return FourierSeries(np.zeros(2 * order + 1, dtype=complex))


def constant(value: float) -> FourierSeries:
    return FourierSeries(np.array([complex(value)]))


def sine(k: int, amplitude: float = 1.0) -> FourierSeries:
    """amplitude * sin(2 pi k x) as a truncated series of order k."""
    if k < 1:
        raise ValueError("frequency must be >= 1")
    c = np.zeros(2 * k + 1, dtype=complex)
    c[2 * k] = amplitude / 2j
    c[0] = -amplitude / 2j
    return FourierSeries(c)


def cosine(k: int, amplitude: float = 1.0) -> FourierSeries:
    """amplitude * cos(2 pi k x) as a truncated series of order k."""
    if k < 1:
        raise ValueError("frequency must be >= 1")
    c = np.zeros(2 * k + 1, dtype=complex)
    c[2 * k] = amplitude / 2
    c[0] = amplitude / 2
    return FourierSeries(c)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples at the uniform nodes x_j = j/M, with M a power of two."""

    samples: np.ndarray

    def __post_init__(self) -> None:
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if s.size < 2 or s.size & (s.size - 1):
            raise ValueError(f"grid size must be a power of two >= 2, got {s.size}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def size(self) -> int:
        return self.samples.size

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.size) / self.size


def dft(grid: GridFunction, order: int) -> FourierSeries:
    """Discrete Fourier coefficients of the samples, Hermitian-symmetrized.

    Exact for trigonometric polynomials of degree <= order sampled on
    M >= 2*order + 1 points; smaller grids alias and are rejected.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if grid.size < 2 * order + 1:
        raise ValueError(
            f"grid size {grid.size} < 2*{order}+1 aliases mode +-{order}")
    spectrum = np.fft.fft(grid.samples) / grid.size
    n = np.arange(-order, order + 1)
    c = spectrum[n % grid.size]
    return FourierSeries(0.5 * (c + np.conj(c[::-1])))


def idft(series: FourierSeries, size: int) -> GridFunction:
    """Samples on the M-point grid; M must be a power of two >= 2N+1."""
    if size < 2 * series.order + 1:
        raise ValueError(
            f"grid size {size} < 2*{series.order}+1 cannot carry all modes")
    spectrum = np.zeros(size, dtype=complex)
    spectrum[series.modes % size] = series.coeffs
    values = np.fft.ifft(spectrum) * size
    _check_imag(values, float(np.sum(np.abs(series.coeffs))))
    return GridFunction(values.real.copy())


def differentiate(series: FourierSeries, order: int = 1) -> FourierSeries:
    """Derivative of the given order: mode n is scaled by (2 pi i n)^order."""
    if not 1 <= order <= 4:
        raise ValueError("derivative order must be in 1..4")
    factors = (2j * np.pi * series.modes) ** order
    return FourierSeries(series.coeffs * factors)


def antiderivative(series: FourierSeries) -> FourierSeries:
    """Zero-mean primitive: mode n divided by 2 pi i n, mode 0 set to 0.

    Requires a zero-mean input (|mode 0| <= 1e-10); otherwise the primitive
    would not be periodic.  Integration constants are the caller's business.
    """
    mid = series.order
    if abs(series.coeffs[mid]) > 1e-10:
        raise ValueError(
            f"mean {series.coeffs[mid]:.3e} != 0: antiderivative is not periodic")
    c = np.array(series.coeffs)
    n = series.modes.astype(float)
    n[mid] = 1.0  # avoid 0/0; mode 0 is overwritten below
    c = c / (2j * np.pi * n)
    c[mid] = 0.0
    return FourierSeries(c)


def multiply(f: FourierSeries, g: FourierSeries, order: int | None = None) -> FourierSeries:
    """Pointwise product, computed pseudospectrally without aliasing.

    The product is formed on a grid of size >= 2(N_f + N_g) + 1 (2x zero
    padding) and truncated to ``order`` (defaults to N_f + N_g, which is
    exact).
    """
    full = f.order + g.order
    if order is None:
        order = full
    size = next_pow2(2 * full + 2)
    values = idft(f, size).samples * idft(g, size).samples
    return dft(GridFunction(values), min(order, (size - 1) // 2)).with_order(order)


def sobolev_norm(series: FourierSeries, weights: SobolevWeights) -> float:
    """sqrt(sum_n W(n) |c_n|^2) with the quadratic-form weights W(n)."""
    w = weights.mode_weights(series.order)
    return float(np.sqrt(np.sum(w * np.abs(series.coeffs) ** 2)))


def l2_norm(series: FourierSeries) -> float:
    """Plain L2 norm (Parseval)."""
    return sobolev_norm(series, SobolevWeights())


def sup_norm(series: FourierSeries, grid: int = 4096) -> float:
    size = next_pow2(max(grid, 2 * series.order + 2))
    return float(np.max(np.abs(idft(series, size).samples)))


def l1_norm(series: FourierSeries, grid: int = 4096) -> float:
    size = next_pow2(max(grid, 2 * series.order + 2))
    return float(np.mean(np.abs(idft(series, size).samples)))

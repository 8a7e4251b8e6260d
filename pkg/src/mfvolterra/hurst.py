"""Domain types: Hurst functions, time grids and quadrature settings."""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError

SHAPES = ("constant", "affine-clamped", "sinusoidal", "table-interpolated", "custom")


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 8:
            raise DomainError("max_subdivisions must be at least 8")

    def halved(self):
        return QuadratureSpec(self.abs_tol / 2, self.rel_tol / 2, self.max_subdivisions)


DEFAULT_QUAD = QuadratureSpec()


class HurstFunction:
    """A Hurst function h with values in [a, b] inside (1/2, 1).

    Every evaluation is checked against the declared bounds. ``derivative``
    is None when the function is not declared differentiable.
    """

    def __init__(self, func, a, b, derivative=None, holder_exponent=1.0,
                 descriptor="custom", params=None):
        a, b = float(a), float(b)
        if not (0.5 < a <= b < 1.0):
            raise DomainError(f"Hurst bounds must satisfy 1/2 < a <= b < 1, got [{a}, {b}]")
        if holder_exponent <= 1.0 and not b < holder_exponent:
            raise DomainError("sup h must be smaller than the Holder exponent beta")
        if descriptor not in SHAPES:
            raise DomainError(f"unknown Hurst shape {descriptor!r}")
        self._func = func
        self._deriv = derivative
        self.a = a
        self.b = b
        self.holder_exponent = float(holder_exponent)
        self.descriptor = descriptor
        self.params = dict(params or {})

    @property
    def differentiable(self):
        return self._deriv is not None

    def __call__(self, t):
        val = self._func(t)
        arr = np.asarray(val, dtype=float)
        # tiny slack for rounding in sin/clip
        if np.any(arr < self.a - 1e-13) or np.any(arr > self.b + 1e-13) or not np.all(np.isfinite(arr)):
            raise DomainError(
                f"h({t!r}) = {val!r} leaves its declared range [{self.a}, {self.b}]")
        if arr.ndim == 0:
            return float(arr)
        return arr

    def derivative(self, t):
        if self._deriv is None:
            raise DomainError(f"Hurst function {self.descriptor!r} is not differentiable")
        val = np.asarray(self._deriv(t), dtype=float)
        if not np.all(np.isfinite(val)):
            raise DomainError(f"h'({t!r}) is not finite")
        return float(val) if val.ndim == 0 else val

    def describe(self):
        return {"shape": self.descriptor, "a": self.a, "b": self.b,
                "holder_exponent": self.holder_exponent, **self.params}

    def __repr__(self):
        return f"HurstFunction({self.descriptor}, a={self.a}, b={self.b}, {self.params})"


def constant(H):
    H = float(H)
    return HurstFunction(lambda t: np.full_like(np.asarray(t, dtype=float), H)[()],
                         H, H, derivative=lambda t: np.zeros_like(np.asarray(t, dtype=float))[()],
                         descriptor="constant", params={"H": H})


def sinusoidal(mean, amplitude, omega=2 * np.pi, phase=0.0):
    """h(t) = mean + amplitude * sin(omega t + phase)."""
    m, r, w, p = float(mean), abs(float(amplitude)), float(omega), float(phase)
    return HurstFunction(lambda t: m + r * np.sin(w * np.asarray(t, dtype=float) + p),
                         m - r, m + r,
                         derivative=lambda t: r * w * np.cos(w * np.asarray(t, dtype=float) + p),
                         descriptor="sinusoidal",
                         params={"mean": m, "amplitude": r, "omega": w, "phase": p})


def affine_clamped(h0, slope, a, b, T=None):
    """h(t) = clip(h0 + slope t, a, b).

    The clamp makes h only Lipschitz, so a derivative is attached only when
    a horizon T is given and the clamp never engages on [0, T].
    """
    h0, c, a, b = float(h0), float(slope), float(a), float(b)

    def f(t):
        return np.clip(h0 + c * np.asarray(t, dtype=float), a, b)[()]

    deriv = None
    if T is not None and a <= h0 <= b and a <= h0 + c * float(T) <= b:
        deriv = lambda t: np.full_like(np.asarray(t, dtype=float), c)[()]  # noqa: E731
    return HurstFunction(f, a, b, derivative=deriv, descriptor="affine-clamped",
                         params={"h0": h0, "slope": c})


def table_interpolated(times, values, differentiable=True):
    """Monotone cubic (PCHIP) interpolation of tabulated values, or piecewise
    linear when ``differentiable`` is False."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or times.shape != values.shape or times.size < 2:
        raise DomainError("table needs matching 1-D times and values (>= 2 points)")
    if np.any(np.diff(times) <= 0):
        raise DomainError("table times must be strictly increasing")
    a, b = float(values.min()), float(values.max())
    params = {"times": times.tolist(), "values": values.tolist(),
              "interpolation": "pchip" if differentiable else "linear"}
    if differentiable:
        interp = PchipInterpolator(times, values, extrapolate=False)
        dinterp = interp.derivative()

        def f(t):
            return interp(np.clip(t, times[0], times[-1]))[()]

        def df(t):
            tt = np.asarray(t, dtype=float)
            inside = (tt >= times[0]) & (tt <= times[-1])
            return np.where(inside, dinterp(np.clip(tt, times[0], times[-1])), 0.0)[()]

        return HurstFunction(f, a, b, derivative=df, descriptor="table-interpolated", params=params)

    def g(t):
        return np.interp(t, times, values)[()]

    return HurstFunction(g, a, b, derivative=None, descriptor="table-interpolated", params=params)


def from_config(spec, T=1.0):
    """Build a HurstFunction from a config mapping with a ``shape`` key."""
    shape = spec.get("shape")
    if shape == "constant":
        return constant(spec["H"])
    if shape == "sinusoidal":
        return sinusoidal(spec["mean"], spec["amplitude"], spec.get("omega", 2 * np.pi),
                          spec.get("phase", 0.0))
    if shape == "affine-clamped":
        return affine_clamped(spec["h0"], spec["slope"], spec["a"], spec["b"], T)
    if shape == "table-interpolated":
        return table_interpolated(spec["times"], spec["values"],
                                  spec.get("interpolation", "pchip") == "pchip")
    raise DomainError(f"unknown Hurst shape {shape!r}")


@dataclass(frozen=True)
class TimeGrid:
    times: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise DomainError("a time grid needs at least one point")
        if t[0] != 0.0:
            raise DomainError("a time grid must start at 0")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise DomainError("grid times must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def uniform(cls, T, n):
        """n + 1 equally spaced points on [0, T]."""
        if not T > 0:
            raise DomainError("horizon T must be positive")
        return cls(np.linspace(0.0, float(T), int(n) + 1))

    @property
    def T(self):
        return float(self.times[-1])

    @property
    def n(self):
        return self.times.size - 1

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        return isinstance(other, TimeGrid) and np.array_equal(self.times, other.times)

    def __hash__(self):
        return hash(self.times.tobytes())

"""Magnetic field models over the cubic cell.

Fields are sparse polynomials in (x, y, z): a mapping from exponent
triples to coefficients. This keeps every mode integral in closed form.
Fields that are not polynomial can be supplied as a callable or as values
on a uniform grid (`TabulatedField`); those fall back to quadrature.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Mapping, Optional, Union

import numpy as np

Exponent = tuple[int, int, int]


@dataclass(frozen=True)
class Polynomial:
    """Sparse trivariate polynomial, immutable.

    ``terms`` maps ``(i, j, k)`` to the coefficient of ``x**i y**j z**k``.
    Zero coefficients are dropped on construction.
    """

    terms: Mapping[Exponent, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for key, c in dict(self.terms).items():
            key = tuple(int(e) for e in key)
            if len(key) != 3 or min(key) < 0:
                raise ValueError(f"bad exponent triple {key!r}")
            if c != 0:
                clean[key] = clean.get(key, 0.0) + float(c)
        object.__setattr__(self, "terms", {k: v for k, v in clean.items() if v != 0})

    @classmethod
    def zero(cls):
        return cls({})

    @classmethod
    def constant(cls, c):
        return cls({(0, 0, 0): c})

    def is_zero(self):
        return not self.terms

    @property
    def degree(self):
        return max((sum(k) for k in self.terms), default=0)

    def __call__(self, x, y, z):
        x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
        out = np.zeros(x.shape)
        for (i, j, k), c in self.terms.items():
            out = out + c * x**i * y**j * z**k
        return out if out.ndim else float(out)

    def __add__(self, other):
        merged = dict(self.terms)
        for k, c in other.terms.items():
            merged[k] = merged.get(k, 0.0) + c
        return Polynomial(merged)

    def __neg__(self):
        return Polynomial({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial({k: c * other for k, c in self.terms.items()})
        out: dict = {}
        for (a, ca), (b, cb) in product(self.terms.items(), other.terms.items()):
            key = (a[0] + b[0], a[1] + b[1], a[2] + b[2])
            out[key] = out.get(key, 0.0) + ca * cb
        return Polynomial(out)

    __rmul__ = __mul__

    def diff(self, axis):
        out = {}
        for key, c in self.terms.items():
            if key[axis] > 0:
                new = list(key)
                new[axis] -= 1
                out[tuple(new)] = out.get(tuple(new), 0.0) + c * key[axis]
        return Polynomial(out)

    def odd_axes(self):
        """Axes along which the polynomial is odd (every exponent odd)."""
        if self.is_zero():
            return (True, True, True)
        return tuple(all(k[a] % 2 == 1 for k in self.terms) for a in range(3))

    def active_axes(self):
        return tuple(any(k[a] > 0 for k in self.terms) for a in range(3))

    def to_list(self):
        return [[list(k), c] for k, c in sorted(self.terms.items())]

    @classmethod
    def from_spec(cls, spec):
        """Build from ``{"x^i y^j z^k": c}``-free forms: a dict keyed by
        exponent triples/strings, or a list of ``[[i, j, k], c]`` pairs."""
        if isinstance(spec, Polynomial):
            return spec
        if isinstance(spec, Mapping):
            items = spec.items()
        else:
            items = ((tuple(k), c) for k, c in spec)
        terms = {}
        for k, c in items:
            if isinstance(k, str):
                k = tuple(int(t) for t in k.replace("(", "").replace(")", "").split(","))
            terms[tuple(k)] = c
        return cls(terms)


@dataclass(frozen=True)
class TabulatedField:
    """Field samples on a uniform grid spanning the closed cube.

    ``values[i, j, k]`` is the field at ``(x_i, y_j, z_k)`` with
    ``x_i = -L/2 + i L/(n-1)``. Evaluated off-grid by cubic spline
    interpolation.
    """

    values: np.ndarray
    L: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or min(v.shape) < 4:
            raise ValueError("tabulated field needs a 3-D grid with at least 4 points per axis")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    def __call__(self, x, y, z):
        from scipy.interpolate import RegularGridInterpolator

        axes = [np.linspace(-self.L / 2, self.L / 2, n) for n in self.values.shape]
        interp = RegularGridInterpolator(axes, self.values, method="cubic")
        x, y, z = np.broadcast_arrays(x, y, z)
        pts = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=-1)
        return interp(pts).reshape(x.shape)


FieldComponent = Union[Polynomial, TabulatedField, Callable]


@dataclass(frozen=True)
class FieldModel:
    """B = (B0 + Bz1) z-hat + Bx x-hat + By y-hat, in nT, on the cube."""

    B0: float
    bz1: FieldComponent = field(default_factory=Polynomial.zero)
    bx: FieldComponent = field(default_factory=Polynomial.zero)
    by: FieldComponent = field(default_factory=Polynomial.zero)
    kind: str = "custom"
    strength: float = 0.0

    @property
    def is_polynomial(self):
        return all(isinstance(c, Polynomial) for c in (self.bz1, self.bx, self.by))

    @property
    def has_transverse(self):
        return not all(isinstance(c, Polynomial) and c.is_zero() for c in (self.bx, self.by))

    def transverse_square(self):
        """Bx^2 + By^2 as a polynomial (equal to B+ B- for real fields)."""
        if not (isinstance(self.bx, Polynomial) and isinstance(self.by, Polynomial)):
            raise TypeError("transverse_square needs polynomial Bx, By")
        return self.bx * self.bx + self.by * self.by

    def divergence(self):
        if not self.is_polynomial:
            raise TypeError("divergence only available for polynomial fields")
        return self.bx.diff(0) + self.by.diff(1) + self.bz1.diff(2)

    def curl(self):
        if not self.is_polynomial:
            raise TypeError("curl only available for polynomial fields")
        bx, by, bz = self.bx, self.by, self.bz1
        return (bz.diff(1) - by.diff(2), bx.diff(2) - bz.diff(0), by.diff(0) - bx.diff(1))

    def evaluate(self, x, y, z):
        """Return (Bx, By, Bz) at the given points; Bz includes B0."""
        comps = []
        for c in (self.bx, self.by, self.bz1):
            comps.append(np.asarray(c(x, y, z), dtype=float))
        comps[2] = comps[2] + self.B0
        return tuple(comps)

    def max_abs(self, L, n=33):
        """Max |Bz1|, |Bx|, |By| over the cell (grid incl. the 8 corners)."""
        g = np.linspace(-L / 2, L / 2, n)
        X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
        return {
            name: float(np.max(np.abs(comp(X, Y, Z))))
            for name, comp in (("bz1", self.bz1), ("bx", self.bx), ("by", self.by))
        }


def uniform(B0):
    return FieldModel(B0=B0, kind="uniform")


def linear_gradient(B0, G1):
    """B = G1 [-(x x + y y)/2 + z z] + B0 z (nT, G1 in nT/cm)."""
    return FieldModel(
        B0=B0,
        bz1=Polynomial({(0, 0, 1): G1}),
        bx=Polynomial({(1, 0, 0): -G1 / 2}),
        by=Polynomial({(0, 1, 0): -G1 / 2}),
        kind="linear_gradient",
        strength=G1,
    )


def quadratic_gradient(B0, G2):
    """B = G2 [-xz x - yz y + z^2 z] + B0 z (nT, G2 in nT/cm^2)."""
    return FieldModel(
        B0=B0,
        bz1=Polynomial({(0, 0, 2): G2}),
        bx=Polynomial({(1, 0, 1): -G2}),
        by=Polynomial({(0, 1, 1): -G2}),
        kind="quadratic_gradient",
        strength=G2,
    )


def custom(B0, bz1=None, bx=None, by=None):
    conv = lambda c: Polynomial.zero() if c is None else (
        Polynomial.from_spec(c) if isinstance(c, (Mapping, list, tuple)) else c
    )
    return FieldModel(B0=B0, bz1=conv(bz1), bx=conv(bx), by=conv(by), kind="custom")


def build_field(kind, B0, strength=0.0, **components):
    if kind == "uniform":
        return uniform(B0)
    if kind == "linear_gradient":
        return linear_gradient(B0, strength)
    if kind == "quadratic_gradient":
        return quadratic_gradient(B0, strength)
    if kind == "custom":
        return custom(B0, **components)
    raise ValueError(f"unknown field kind {kind!r}")


def with_b0(model: FieldModel, B0: float) -> FieldModel:
    return FieldModel(B0=B0, bz1=model.bz1, bx=model.bx, by=model.by,
                      kind=model.kind, strength=model.strength)


def scaled(model: FieldModel, factor: float) -> FieldModel:
    """Same B0, nonuniform parts multiplied by ``factor``."""
    if not model.is_polynomial:
        raise TypeError("scaling only supported for polynomial fields")
    return FieldModel(B0=model.B0, bz1=model.bz1 * factor, bx=model.bx * factor,
                      by=model.by * factor, kind=model.kind, strength=model.strength * factor)


def is_divergence_free(model: FieldModel, tol: Optional[float] = 0.0):
    div = model.divergence()
    return all(abs(c) <= tol for c in div.terms.values())

"""Scalar, vector and metric fields on the asymptotic chart.

Every field lives in one Cartesian chart on the annulus ``r >= r_min``.
Evaluators are vectorised: they take points of shape ``(..., 3)`` and return
arrays of shape ``(...)``.  A field may carry an exact 2-jet evaluator (built
with :mod:`chargedmass.jets`); otherwise derivatives come from a single
fourth-order central-difference stencil.
"""

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, EvaluationError
from .jets import Jet
from .quadrature import SphereQuadrature

DEFAULT_H_REL = 1e-4
# points within this relative distance of the inner radius count as inside
DOMAIN_RTOL = 1e-12

# (i, j) index pairs of the six independent metric components
METRIC_INDEX = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


@dataclass(frozen=True)
class ChartPoint:
    x: float
    y: float
    z: float

    @property
    def r(self):
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=float)


def as_points(p):
    """Coerce a ChartPoint, a 3-sequence or an ``(..., 3)`` array to an array."""
    if isinstance(p, ChartPoint):
        return p.as_array()
    pts = np.asarray(p, dtype=float)
    if pts.shape[-1:] != (3,):
        raise ValueError(f"points must have trailing dimension 3, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DomainError("non-finite chart coordinates")
    return pts


def radius(pts):
    return np.sqrt(np.sum(pts * pts, axis=-1))


def _finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise EvaluationError(f"non-finite {what}")
    return arr


@dataclass(frozen=True)
class ScalarField:
    """A closed-form scalar field with optional exact 2-jet."""

    evaluator: Callable
    exact_jet: Optional[Callable] = None
    decay: float = 0.0
    r_min: float = 0.0
    name: str = ""

    @classmethod
    def from_formula(cls, fn, *, decay=0.0, r_min=0.0, name=""):
        """Build a field from ``fn(x, y, z, r)`` written with :mod:`jets` functions.

        The same formula yields plain values on arrays and exact jets on
        :class:`Jet` inputs.
        """

        def evaluator(pts):
            pts = np.asarray(pts, dtype=float)
            x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
            out = fn(x, y, z, np.sqrt(x * x + y * y + z * z))
            return np.broadcast_to(np.asarray(out, dtype=float), x.shape)

        def exact_jet(pts):
            x, y, z = Jet.variables(pts)
            r = (x * x + y * y + z * z) ** 0.5
            out = fn(x, y, z, r)
            if not isinstance(out, Jet):
                out = x._const(out)
            return out

        return cls(evaluator, exact_jet, decay=decay, r_min=r_min, name=name)

    @classmethod
    def constant(cls, c, name=""):
        c = float(c)
        return cls.from_formula(lambda x, y, z, r: c, decay=np.inf if c == 0 else 0.0, name=name or repr(c))

    @classmethod
    def pointwise(cls, fn, **kwargs):
        """Wrap a non-vectorised ``fn(x, y, z) -> float``; derivatives via FD."""

        def evaluator(pts):
            pts = np.asarray(pts, dtype=float)
            flat = pts.reshape(-1, 3)
            out = np.array([fn(*row) for row in flat], dtype=float)
            return out.reshape(pts.shape[:-1])

        return cls(evaluator, None, **kwargs)

    def __call__(self, p):
        pts = as_points(p)
        self._check_domain(pts)
        return _finite(np.asarray(self.evaluator(pts), dtype=float), f"value of field {self.name!r}")

    def _check_domain(self, pts, margin=None):
        r = radius(pts)
        if margin is None:
            if np.any(r < self.r_min * (1.0 - DOMAIN_RTOL)):
                raise DomainError(f"point at r={float(np.min(r)):.6g} outside domain r >= {self.r_min:.6g}")
        elif np.any(r - margin <= self.r_min):
            raise DomainError(
                f"finite-difference stencil at r={float(np.min(r)):.6g} reaches the domain edge r={self.r_min:.6g}"
            )

    def without_exact_jet(self):
        """Same field, derivatives forced through finite differences."""
        return replace(self, exact_jet=None)


def combine(fn, *fields, name="", decay=None):
    """Pointwise combination ``fn(*fields)``; exact jets kept when all inputs have one."""

    def evaluator(pts):
        return fn(*(f.evaluator(pts) for f in fields))

    exact = None
    if all(f.exact_jet is not None for f in fields):

        def exact(pts):
            return fn(*(f.exact_jet(pts) for f in fields))

    return ScalarField(
        evaluator,
        exact,
        decay=min((f.decay for f in fields), default=0.0) if decay is None else decay,
        r_min=max((f.r_min for f in fields), default=0.0),
        name=name,
    )


# fourth-order first-derivative weights at offsets -2, -1, 1, 2 (divide by 12h)
_D1 = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))
# fourth-order second-derivative weights at offsets -2..2 (divide by 12h^2)
_D2 = ((-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0))


def _stencil():
    """Offsets (in units of h) and per-output weights of the full Hessian stencil."""
    offsets = [np.zeros(3)]
    index = {(0, 0, 0): 0}

    def slot(v):
        key = tuple(int(t) for t in v)
        if key not in index:
            index[key] = len(offsets)
            offsets.append(np.array(key, dtype=float))
        return index[key]

    grad_terms = [[] for _ in range(3)]
    hess_terms = [[[] for _ in range(3)] for _ in range(3)]
    for i in range(3):
        e = np.eye(3)[i]
        for a, w in _D1:
            grad_terms[i].append((slot(a * e), w / 12.0))
        for a, w in _D2:
            hess_terms[i][i].append((slot(a * e), w / 12.0))
        for j in range(i + 1, 3):
            f = np.eye(3)[j]
            for a, wa in _D1:
                for b, wb in _D1:
                    hess_terms[i][j].append((slot(a * e + b * f), wa * wb / 144.0))
    n = len(offsets)
    G = np.zeros((3, n))
    H = np.zeros((3, 3, n))
    for i in range(3):
        for s, w in grad_terms[i]:
            G[i, s] += w
        for j in range(i, 3):
            for s, w in hess_terms[i][j]:
                H[i, j, s] += w
                if i != j:
                    H[j, i, s] += w
    return np.array(offsets), G, H


_OFFSETS, _GRAD_W, _HESS_W = _stencil()


def fd_step(pts, h_rel=DEFAULT_H_REL):
    return h_rel * np.maximum(1.0, radius(pts))


def field_jet(field, p, h_rel=DEFAULT_H_REL):
    """Return the 2-jet of ``field`` at ``p`` as a :class:`Jet`."""
    pts = as_points(p)
    if field.exact_jet is not None:
        field._check_domain(pts)
        out = field.exact_jet(pts)
        if not isinstance(out, Jet):
            raise TypeError("exact_jet must return a Jet")
        shape = pts.shape[:-1]
        out = Jet(
            np.broadcast_to(out.val, shape).copy(),
            np.broadcast_to(out.grad, shape + (3,)).copy(),
            np.broadcast_to(out.hess, shape + (3, 3)).copy(),
        )
    else:
        h = fd_step(pts, h_rel)
        field._check_domain(pts, margin=2.0 * h)
        samples = pts[..., None, :] + h[..., None, None] * _OFFSETS
        vals = np.asarray(field.evaluator(samples), dtype=float)
        vals = np.broadcast_to(vals, samples.shape[:-1])
        val = vals[..., 0]
        # differences against the centre: stencil weights sum to zero, and a
        # constant field then gets exactly zero derivatives
        dv = vals - val[..., None]
        grad = np.einsum("...s,is->...i", dv, _GRAD_W) / h[..., None]
        hess = np.einsum("...s,ijs->...ij", dv, _HESS_W) / (h * h)[..., None, None]
        out = Jet(val.copy(), grad, hess)
    for arr, what in ((out.val, "value"), (out.grad, "gradient"), (out.hess, "Hessian")):
        _finite(arr, f"{what} of field {field.name!r}")
    return out


def jet(field, p, h_rel=DEFAULT_H_REL):
    """Value, gradient and Hessian of a scalar field at ``p``.

    Uses the field's exact jet when present, otherwise fourth-order central
    differences with step ``h = h_rel * max(1, r)``; the Hessian comes from
    one combined stencil, never from nested gradient calls.

    Returns
    -------
    value : ndarray, shape (...)
    gradient : ndarray, shape (..., 3)
    hessian : ndarray, shape (..., 3, 3)
    """
    j = field_jet(field, p, h_rel)
    return j.val, j.grad, j.hess


@dataclass(frozen=True)
class VectorField:
    """Contravariant Cartesian components ``V^1, V^2, V^3``."""

    components: tuple
    decay: float = 2.0
    name: str = ""

    def __post_init__(self):
        if len(self.components) != 3:
            raise ValueError("a vector field needs exactly three components")

    @classmethod
    def zero(cls):
        z = ScalarField.constant(0.0)
        return cls((z, z, z), decay=np.inf, name="0")

    @classmethod
    def from_formula(cls, fn, *, decay=2.0, r_min=0.0, name=""):
        """``fn(x, y, z, r)`` returns the three components."""
        comps = tuple(
            ScalarField.from_formula(lambda x, y, z, r, _i=i: fn(x, y, z, r)[_i], decay=decay, r_min=r_min)
            for i in range(3)
        )
        return cls(comps, decay=decay, name=name)

    @property
    def r_min(self):
        return max(c.r_min for c in self.components)

    def __call__(self, p):
        pts = as_points(p)
        return np.stack([c(pts) for c in self.components], axis=-1)

    def without_exact_jet(self):
        return replace(self, components=tuple(c.without_exact_jet() for c in self.components))


def vector_jet(V, p, h_rel=DEFAULT_H_REL):
    """Values ``(..., 3)`` and first derivatives ``(..., 3, 3)`` with ``[i, k] = d_k V^i``."""
    jets = [field_jet(c, p, h_rel) for c in V.components]
    return np.stack([j.val for j in jets], axis=-1), np.stack([j.grad for j in jets], axis=-2)


@dataclass(frozen=True)
class MetricField:
    """Symmetric Cartesian metric from six component fields.

    ``components`` are ordered g11, g12, g13, g22, g23, g33.
    """

    components: tuple
    r_min: float = 0.0
    decay: float = 1.0
    name: str = ""

    def __post_init__(self):
        if len(self.components) != 6:
            raise ValueError("a metric needs exactly six components")

    @classmethod
    def conformally_flat(cls, factor, *, r_min=None, decay=None, name=""):
        """``factor * delta``."""
        zero = ScalarField.constant(0.0)
        comps = (factor, zero, zero, factor, zero, factor)
        return cls(
            comps,
            r_min=factor.r_min if r_min is None else r_min,
            decay=factor.decay if decay is None else decay,
            name=name or factor.name,
        )

    @classmethod
    def euclidean(cls):
        return cls.conformally_flat(ScalarField.constant(1.0), r_min=0.0, decay=np.inf, name="euclidean")

    def component(self, i, j):
        return self.components[METRIC_INDEX.index((min(i, j), max(i, j)))]

    def __call__(self, p):
        pts = as_points(p)
        self._check_domain(pts)
        vals = [np.broadcast_to(c(pts), pts.shape[:-1]) for c in self.components]
        nb = pts.ndim - 1
        return np.moveaxis(_assemble(vals), (0, 1), (nb, nb + 1))

    def _check_domain(self, pts):
        r = radius(pts)
        if np.any(r < self.r_min * (1.0 - DOMAIN_RTOL)):
            raise DomainError(f"point at r={float(np.min(r)):.6g} outside domain r >= {self.r_min:.6g}")

    def without_exact_jet(self):
        return replace(self, components=tuple(c.without_exact_jet() for c in self.components))

    @property
    def has_exact_jet(self):
        return all(c.exact_jet is not None for c in self.components)


def _assemble(comps):
    """Six component arrays of shape S + T -> symmetric array S + (3, 3) + T.

    ``comps[k]`` has shape ``S + T`` where the trailing shape T is whatever
    the caller carries (derivative axes); ``S`` is the point-batch shape.
    """
    c = np.stack(comps, axis=0)
    idx = np.array([[0, 1, 2], [1, 3, 4], [2, 4, 5]])
    out = c[idx]  # (3, 3) + S + T
    return out


def metric_jet(g, p, h_rel=DEFAULT_H_REL):
    """Metric values and derivatives at ``p``.

    Returns
    -------
    gij : (..., 3, 3)
    dg : (..., 3, 3, 3) with ``dg[..., i, j, k] = d_k g_ij``
    ddg : (..., 3, 3, 3, 3) with ``ddg[..., i, j, k, l] = d_k d_l g_ij``
    """
    pts = as_points(p)
    g._check_domain(pts)
    jets = [field_jet(c, pts, h_rel) for c in g.components]
    nb = pts.ndim - 1
    gij = np.moveaxis(_assemble([j.val for j in jets]), (0, 1), (nb, nb + 1))
    dg = np.moveaxis(_assemble([j.grad for j in jets]), (0, 1), (nb, nb + 1))
    ddg = np.moveaxis(_assemble([j.hess for j in jets]), (0, 1), (nb, nb + 1))
    return gij, dg, ddg


def leading_minors(gij):
    """The three leading principal minors of a batch of 3x3 matrices."""
    m1 = gij[..., 0, 0]
    m2 = gij[..., 0, 0] * gij[..., 1, 1] - gij[..., 0, 1] * gij[..., 1, 0]
    m3 = np.linalg.det(gij)
    return np.stack([m1, m2, m3], axis=-1)


def is_positive_definite(g, p):
    """Sylvester's criterion at each point."""
    return np.all(leading_minors(g(p)) > 0, axis=-1)


@dataclass(frozen=True)
class DecayReport:
    radii: np.ndarray
    sup_deviation: np.ndarray  # max over angles and components of |g_ij - delta_ij| (or |V|)
    scaled: np.ndarray  # sup_deviation * r**tau
    tau: float
    bounded: bool
    derivative_scaled: Optional[np.ndarray] = None

    def rows(self):
        return [
            {"radius": float(r), "sup_deviation": float(s), "scaled": float(c)}
            for r, s, c in zip(self.radii, self.sup_deviation, self.scaled)
        ]


# a decay claim fails on samples when the scaled deviation grows by more than this
DECAY_GROWTH_LIMIT = 2.0


def _bounded(scaled):
    head = max(float(scaled[0]), 1e-300)
    return bool(np.all(scaled <= DECAY_GROWTH_LIMIT * head + 1e-14))


def decay_report(g, radii, tau=None, angular=(8, 16)):
    """Sampled ``sup_ij |g_ij - delta_ij| * r**tau`` on a fixed angular grid per radius."""
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be a non-empty increasing list")
    if np.any(radii < g.r_min):
        raise DomainError("decay radii must lie in the domain")
    tau = g.decay if tau is None else tau
    dirs = SphereQuadrature(*angular).nodes
    sup = []
    for r in radii:
        dev = g(r * dirs) - np.eye(3)
        sup.append(float(np.max(np.abs(dev))))
    sup = np.array(sup)
    scaled = sup * radii**tau
    return DecayReport(radii, sup, scaled, float(tau), _bounded(scaled))


def vector_decay_report(V, radii, tau=None, angular=(8, 16), h_rel=DEFAULT_H_REL):
    """Sampled ``sup |V| * r**tau`` and ``sup |dV| * r**(tau + 1)`` (Euclidean norms)."""
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be a non-empty increasing list")
    tau = V.decay if tau is None else tau
    dirs = SphereQuadrature(*angular).nodes
    sup, dsup = [], []
    for r in radii:
        val, d = vector_jet(V, r * dirs, h_rel)
        sup.append(float(np.max(np.linalg.norm(val, axis=-1))))
        dsup.append(float(np.max(np.linalg.norm(d, axis=(-2, -1)))))
    sup, dsup = np.array(sup), np.array(dsup)
    scaled = sup * radii**tau
    dscaled = dsup * radii ** (tau + 1.0)
    return DecayReport(radii, sup, scaled, float(tau), _bounded(scaled) and _bounded(dscaled), dscaled)

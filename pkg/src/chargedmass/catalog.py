"""Exact solutions with closed-form jets, used as oracles throughout.

Spherically symmetric slices are written in the Cartesian chart as
``g_ij = delta_ij + (g_rr(r) - 1) x_i x_j / r**2``.
"""

from dataclasses import dataclass, field
import inspect
import math
from typing import Optional

from . import jets as J
from .fields import MetricField, ScalarField, VectorField


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: dict
    metric: MetricField
    E: Optional[VectorField] = None
    B: Optional[VectorField] = None
    phi: Optional[ScalarField] = None
    # quantity name -> closed-form value (numbers, or callables of r for profiles)
    known_invariants: dict = field(default_factory=dict)

    @property
    def r_min(self):
        return self.metric.r_min

    @property
    def label(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.name}({args})"


def radial_metric(grr, *, r_min, decay=1.0, name=""):
    """Cartesian metric of ``g_rr(r) dr^2 + r^2 dOmega^2``; ``grr`` is a jet-aware function of r."""

    def component(i, j):
        def fn(x, y, z, r):
            xs = (x, y, z)
            out = (grr(r) - 1.0) * xs[i] * xs[j] / (r * r)
            return out + 1.0 if i == j else out

        return ScalarField.from_formula(fn, decay=decay, r_min=r_min, name=f"{name}[{i + 1}{j + 1}]")

    comps = tuple(component(i, j) for i, j in ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)))
    return MetricField(comps, r_min=r_min, decay=decay, name=name)


def rn_lapse(m, q, p=0.0):
    """``1 - 2m/r + (q^2 + p^2)/r^2`` (three dimensions)."""
    qq = q * q + p * p
    return lambda r: 1.0 - 2.0 * m / r + qq / (r * r)


def euclidean():
    """Flat metric ``delta`` on all of R^3."""
    return CatalogEntry(
        "euclidean",
        {},
        MetricField.euclidean(),
        known_invariants={"mass": 0.0, "scalar_curvature": lambda r: 0.0 * r},
    )


def schwarzschild_isotropic(m):
    """``(1 + m/2r)^4 delta`` on ``r >= m/2``; the sphere ``r = m/2`` is minimal."""
    if not m > 0:
        raise ValueError("schwarzschild_isotropic needs m > 0")
    psi4 = ScalarField.from_formula(
        lambda x, y, z, r: (1.0 + m / (2.0 * r)) ** 4, decay=1.0, r_min=m / 2.0, name="psi^4"
    )
    g = MetricField.conformally_flat(psi4, name=f"schwarzschild_isotropic(m={m:g})")
    return CatalogEntry(
        "schwarzschild_isotropic",
        {"m": m},
        g,
        known_invariants={
            "mass": m,
            "scalar_curvature": lambda r: 0.0 * r,
            "minimal_sphere_radius": m / 2.0,
        },
    )


def _radial_field(charge, lapse, r_min, name):
    # E^r = (charge / r^2) g_rr^(-1/2): sqrt(g_rr) r^2 E^r = charge on every sphere
    def fn(x, y, z, r):
        s = charge * J.sqrt(lapse(r)) / (r * r * r)
        return (s * x, s * y, s * z)

    return VectorField.from_formula(fn, decay=2.0, r_min=r_min, name=name)


def rn_slice(m, q, p=0.0):
    """Time-symmetric Reissner-Nordstrom slice outside the outer horizon.

    ``g_rr = (1 - 2m/r + (q^2+p^2)/r^2)^-1``; the electric field has
    ``|E|_g = q/r^2``, vanishing divergence and flux ``q``; B likewise with ``p``.
    """
    qq = q * q + p * p
    if m < math.sqrt(qq):
        raise ValueError(f"rn_slice needs m >= sqrt(q^2 + p^2), got m={m}, q={q}, p={p}")
    r_plus = m + math.sqrt(max(m * m - qq, 0.0))
    lapse = rn_lapse(m, q, p)
    label = f"rn_slice(m={m:g}, q={q:g}, p={p:g})"
    g = radial_metric(lambda r: 1.0 / lapse(r), r_min=r_plus, name=label)
    return CatalogEntry(
        "rn_slice",
        {"m": m, "q": q, "p": p},
        g,
        E=_radial_field(q, lapse, r_plus, "E"),
        B=_radial_field(p, lapse, r_plus, "B"),
        known_invariants={
            "mass": m,
            "electric_charge": q,
            "magnetic_charge": p,
            "scalar_curvature": lambda r: 2.0 * qq / r**4,
            "horizon_radius": r_plus,
        },
    )


def extreme_rn(q):
    """Extreme slice ``m = |q|``; its horizon sits at ``r = |q|``."""
    if q == 0:
        raise ValueError("extreme_rn needs q != 0")
    base = rn_slice(abs(q), q, 0.0)
    return CatalogEntry("extreme_rn", {"q": q}, base.metric, E=base.E, B=base.B, known_invariants=base.known_invariants)


def radial_conformal(a, tau=1.0):
    """Conformal exponent ``a r^-tau``."""
    if tau < 0.5:
        raise ValueError("radial_conformal needs tau >= 1/2")
    return ScalarField.from_formula(lambda x, y, z, r: a * r ** (-tau), decay=tau, name=f"{a:g}*r^-{tau:g}")


def coulomb(q0):
    """``E^i = q0 x^i / r^3``."""
    return VectorField.from_formula(
        lambda x, y, z, r: (q0 * x / r**3, q0 * y / r**3, q0 * z / r**3), decay=2.0, name=f"coulomb({q0:g})"
    )


def harmonic_hair(a):
    """Scalar field ``a / r``."""
    return ScalarField.from_formula(lambda x, y, z, r: a / r, decay=1.0, name=f"{a:g}/r")


METRICS = {
    "euclidean": euclidean,
    "schwarzschild_isotropic": schwarzschild_isotropic,
    "rn_slice": rn_slice,
    "extreme_rn": extreme_rn,
}

SCALARS = {"radial_conformal": radial_conformal, "harmonic_hair": harmonic_hair}

VECTORS = {"coulomb": coulomb}


def describe():
    """One line per addressable catalog member, for ``--list-catalog``."""
    lines = []
    for kind, table in (("metric", METRICS), ("scalar", SCALARS), ("vector", VECTORS)):
        for name, fn in table.items():
            doc = (inspect.getdoc(fn) or "").splitlines()
            lines.append(f"{kind:7s} {name}{inspect.signature(fn)}  {doc[0] if doc else ''}".rstrip())
    return lines

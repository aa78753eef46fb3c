"""Conformal rescalings and residual checks of the conformal identities.

Two conventions are in play and every result records which one it used:

``"e2f"``  g' = e^{2f} g with the intermediate metric gbar = e^{f} g
``"ef"``   g' = e^{f} g (used by the inner-boundary mass-difference identity)
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
from typing import Optional

import numpy as np

from . import jets as J
from .asymptotics import DEFAULT_LADDER, LimitEstimate, adm_mass, extrapolate, sphere_normal_and_area
from .errors import DomainError
from .fields import DEFAULT_H_REL, MetricField, ScalarField, as_points, combine, field_jet
from .geometry import (
    divergence,
    gradient_norm_sq,
    laplace_beltrami,
    norm_sq,
    scalar_curvature,
)
from .quadrature import SphereQuadrature, compensated_sum, gauss_legendre_interval

CONVENTIONS = ("e2f", "ef")
# angular rule for the bulk shells of the mass-difference identity
DEFAULT_BULK_ANGULAR = (8, 16)


def rescale(g, f, c):
    """Metric with components ``e^{c f} g_ij``.

    Exact jets are composed by the chain and product rules when ``f`` and the
    components of ``g`` all carry them.
    """
    c = float(c)
    if c == 0.0:
        return g
    factor = combine(lambda fv: J.exp(c * fv), f, name=f"exp({c:g}*{f.name})")
    comps = tuple(combine(lambda a, b: a * b, factor, gc, name=gc.name) for gc in g.components)
    return MetricField(
        comps,
        r_min=max(g.r_min, f.r_min),
        decay=min(g.decay, f.decay),
        name=f"exp({c:g}*f)*{g.name}",
    )


def power_rescale(g, phi, power=4):
    """Metric ``phi^power g``."""
    comps = tuple(combine(lambda a, b: a**power * b, phi, gc, name=gc.name) for gc in g.components)
    return MetricField(comps, r_min=max(g.r_min, phi.r_min), decay=g.decay, name=f"phi^{power}*{g.name}")


@dataclass(frozen=True)
class ConformalTriple:
    g: MetricField
    f: ScalarField
    convention: str = "e2f"
    g_prime: MetricField = field(init=False)
    g_bar: Optional[MetricField] = field(init=False)

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")
        if self.convention == "e2f":
            object.__setattr__(self, "g_prime", rescale(self.g, self.f, 2.0))
            object.__setattr__(self, "g_bar", rescale(self.g, self.f, 1.0))
        else:
            object.__setattr__(self, "g_prime", rescale(self.g, self.f, 1.0))
            object.__setattr__(self, "g_bar", None)


def eq2_sides(g, f, p, h_rel=DEFAULT_H_REL):
    """Both sides of the conformal scalar-curvature relation for gbar = e^f g (n = 3).

    Left: ``S_gbar`` computed directly.  Right:
    ``e^{-f} (S_g/2 + e^{2f} S_g'/2 + (n-1)(n-2)/4 |grad f|_g^2)``.
    """
    pts = as_points(p)
    triple = ConformalTriple(g, f, "e2f")
    fv = f(pts)
    lhs = scalar_curvature(triple.g_bar, pts, h_rel)
    n = 3
    rhs = np.exp(-fv) * (
        0.5 * scalar_curvature(g, pts, h_rel)
        + 0.5 * np.exp(2.0 * fv) * scalar_curvature(triple.g_prime, pts, h_rel)
        + 0.25 * (n - 1) * (n - 2) * gradient_norm_sq(g, f, pts, h_rel)
    )
    return lhs, rhs


def eq2_residual(g, f, p, h_rel=DEFAULT_H_REL):
    lhs, rhs = eq2_sides(g, f, p, h_rel)
    return lhs - rhs


def transform_residuals(g, f, E, p, convention="contravariant", h_rel=DEFAULT_H_REL):
    """Residuals of the field transformation laws under gbar = e^f g.

    Returns ``(norm_law_residual, div_law_residual)``:

    * norm law: ``|E|^2_gbar - e^{s} |E|^2_g`` with ``s = +f`` when the
      components of E are held fixed as a vector (``"contravariant"``) and
      ``s = -f`` when held fixed as a covector (``"covariant"``);
    * divergence law: ``div_gbar E - (div_g E + 3/2 df(E))`` with E held
      fixed as a vector, whatever the norm convention.
    """
    if convention not in ("contravariant", "covariant"):
        raise ValueError("convention must be 'contravariant' or 'covariant'")
    pts = as_points(p)
    gbar = rescale(g, f, 1.0)
    fj = field_jet(f, pts, h_rel)
    covariant = convention == "covariant"
    sign = -1.0 if covariant else 1.0
    norm_res = norm_sq(gbar, E, pts, covariant) - np.exp(sign * fj.val) * norm_sq(g, E, pts, covariant)
    df_E = np.einsum("...i,...i->...", fj.grad, E(pts))
    div_res = divergence(gbar, E, pts, h_rel) - (divergence(g, E, pts, h_rel) + 1.5 * df_E)
    return norm_res, div_res


@dataclass(frozen=True)
class MassAdditivity:
    m_g: LimitEstimate
    m_g_prime: LimitEstimate
    m_g_bar: LimitEstimate
    convention: str = "e2f"

    @property
    def residual(self):
        return self.m_g.value + self.m_g_prime.value - 2.0 * self.m_g_bar.value


def mass_additivity(g, f, radii=DEFAULT_LADDER, quad=None, **kwargs):
    """ADM masses of g, g' = e^{2f} g and gbar = e^f g; ``residual = m_g + m_g' - 2 m_gbar``."""
    triple = ConformalTriple(g, f, "e2f")
    return MassAdditivity(
        adm_mass(g, radii, quad, **kwargs),
        adm_mass(triple.g_prime, radii, quad, **kwargs),
        adm_mass(triple.g_bar, radii, quad, **kwargs),
    )


@dataclass(frozen=True)
class MassDifference:
    lhs: float
    boundary_term: float
    bulk_term: float
    m_g: LimitEstimate
    m_g_prime: LimitEstimate
    bulk: LimitEstimate
    tail: str
    convention: str = "ef"
    normal_orientation: str = "decreasing-r"

    @property
    def rhs(self):
        return self.boundary_term + self.bulk_term

    @property
    def residual(self):
        return self.lhs - self.rhs


def _bulk_breakpoints(r0, radii):
    pts = [r0]
    r = 2.0 * r0
    while r < radii[0]:
        pts.append(r)
        r *= 2.0
    pts.extend(float(x) for x in radii if x > pts[-1])
    return pts


def mass_difference_identity(
    g,
    f,
    r0,
    radii=DEFAULT_LADDER,
    quad=None,
    *,
    bulk_quad=None,
    radial_nodes=12,
    tail="fit",
    p=1.0,
    order=None,
    h_rel=DEFAULT_H_REL,
    workers=1,
):
    """Inner-boundary identity for ``m(g') - m(g)`` with ``g' = e^f g`` (n = 3).

    ``rhs = (1/8pi) int_{r=r0} e^{f/4} df(nu) dA_g
    + (1/16pi) int_{r>r0} e^{f/4} (e^f S_g' - S_g) dV_g``
    with ``nu`` the g-unit normal pointing to decreasing r.  The bulk
    integral is accumulated shell by shell up to the largest ladder radius;
    ``tail="fit"`` extrapolates the partial integrals at the ladder radii to
    infinity, ``tail="none"`` truncates at ``R_max``.
    """
    if tail not in ("fit", "none"):
        raise ValueError("tail must be 'fit' or 'none'")
    quad = quad or SphereQuadrature()
    bulk_quad = bulk_quad or SphereQuadrature(*DEFAULT_BULK_ANGULAR)
    radii = np.asarray(radii, dtype=float)
    if r0 <= max(g.r_min, f.r_min) or r0 >= radii[0]:
        raise DomainError(f"inner boundary r0={r0:g} must lie in the domain and below the ladder")
    g_prime = rescale(g, f, 1.0)
    m_g = adm_mass(g, radii, quad, p=p, order=order, h_rel=h_rel, workers=workers)
    m_gp = adm_mass(g_prime, radii, quad, p=p, order=order, h_rel=h_rel, workers=workers)

    # boundary term on r = r0
    dirs = quad.nodes
    pts = r0 * dirs
    n_out, area = sphere_normal_and_area(g(pts), dirs, r0)
    fj = field_jet(f, pts, h_rel)
    df_nu = -np.einsum("...i,...i->...", fj.grad, n_out)
    boundary = quad.integrate(np.exp(fj.val / 4.0) * df_nu * area) / (8.0 * math.pi)

    # bulk term, shell by shell
    def shell(r):
        spts = r * bulk_quad.nodes
        fv = f(spts)
        gij = g(spts)
        integrand = np.exp(fv / 4.0) * (
            np.exp(fv) * scalar_curvature(g_prime, spts, h_rel) - scalar_curvature(g, spts, h_rel)
        )
        return bulk_quad.integrate(integrand * np.sqrt(np.linalg.det(gij))) * r * r

    edges = _bulk_breakpoints(r0, radii)
    cumulative = {}
    terms = []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes, weights = gauss_legendre_interval(a, b, radial_nodes)
        if workers and workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                vals = list(pool.map(shell, nodes))
        else:
            vals = [shell(r) for r in nodes]
        terms.extend(w * v for w, v in zip(weights, vals))
        cumulative[b] = compensated_sum(terms) / (16.0 * math.pi)
    ladder = [float(r) for r in radii if r in cumulative]
    partial = [cumulative[r] for r in ladder]
    bulk_est = extrapolate(ladder, partial, p=p, order=order, quantity="bulk_integral")
    bulk_value = bulk_est.value if tail == "fit" else partial[-1]
    return MassDifference(
        lhs=m_gp.value - m_g.value,
        boundary_term=boundary,
        bulk_term=bulk_value,
        m_g=m_g,
        m_g_prime=m_gp,
        bulk=bulk_est,
        tail=tail,
    )


def scalar_relation_sides(g, phi, p, h_rel=DEFAULT_H_REL):
    """``S_g'`` for g' = phi^4 g, and ``phi^-5 (-8 Delta_g phi + S_g phi)``."""
    pts = as_points(p)
    ph = phi(pts)
    if np.any(ph <= 0):
        raise DomainError("scalar field must be positive where the relation is evaluated")
    direct = scalar_curvature(power_rescale(g, phi, 4), pts, h_rel)
    relation = ph**-5 * (-8.0 * laplace_beltrami(g, phi, pts, h_rel) + scalar_curvature(g, pts, h_rel) * ph)
    return direct, relation


def scalar_relation_residual(g, phi, p, h_rel=DEFAULT_H_REL):
    direct, relation = scalar_relation_sides(g, phi, p, h_rel)
    return direct - relation

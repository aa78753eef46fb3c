"""Per-theorem verification reports built from margin scans and limits.

A *margin* is (left side - right side) of an inequality, so a nonnegative
margin means the inequality holds at that point.  Pointwise hypotheses are
checked on a reproducible low-discrepancy sample of an annulus together
with a quadrature grid on its inner sphere; conclusions compare
extrapolated masses and charges.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq
from scipy.stats import qmc

from .asymptotics import DEFAULT_LADDER, adm_mass, flux_charge
from .conformal import ConformalTriple, power_rescale
from .errors import DomainError
from .fields import DEFAULT_H_REL, ScalarField, VectorField, field_jet, radius
from .geometry import (
    boundary_curvature,
    divergence,
    gradient_norm_sq,
    laplace_beltrami,
    norm_sq,
    scalar_curvature,
    sphere_mean_curvature,
    sphere_unit_normal,
)
from .quadrature import SphereQuadrature

MARGINAL_TOL = 1e-4
CONCLUSION_TOL = 5e-3

HOLDS = "holds-on-samples"
VIOLATED = "violated"
MARGINAL = "marginal"

HOLD_HOLD = "hypotheses-hold-conclusion-holds"
FAIL_HOLD = "hypotheses-fail-conclusion-holds"
FAIL_FAIL = "hypotheses-fail-conclusion-fails"
FLAG = "hypotheses-hold-conclusion-fails"

_QUANTILES = (0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0)


@dataclass(frozen=True)
class Region:
    """Annulus ``r_in <= r <= r_out`` sampled by a scrambled Sobol sequence.

    Radii are spread uniformly in r (not in volume) so the inner part of the
    annulus, where margins are usually smallest, is sampled densely.  The
    inner sphere is added on a ``boundary`` Gauss-Legendre grid.
    """

    r_in: float
    r_out: float
    samples: int = 256
    seed: int = 0
    boundary: tuple = (4, 8)

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise ValueError("region needs 0 < r_in < r_out")
        if self.samples < 1:
            raise ValueError("region needs at least one sample")

    def points(self):
        m = max(int(math.ceil(math.log2(self.samples))), 0)
        u = qmc.Sobol(d=3, scramble=True, seed=self.seed).random_base2(m)[: self.samples]
        r = self.r_in + (self.r_out - self.r_in) * u[:, 0]
        cos_t = 2.0 * u[:, 1] - 1.0
        sin_t = np.sqrt(1.0 - cos_t**2)
        ph = 2.0 * math.pi * u[:, 2]
        interior = r[:, None] * np.stack([sin_t * np.cos(ph), sin_t * np.sin(ph), cos_t], axis=-1)
        inner = self.r_in * SphereQuadrature(*self.boundary).nodes
        return np.concatenate([inner, interior])

    def check_domain(self, r_min):
        if self.r_in <= r_min:
            raise DomainError(f"region r_in={self.r_in:g} must exceed the domain radius {r_min:g}")

    def as_dict(self):
        return {
            "r_in": self.r_in,
            "r_out": self.r_out,
            "samples": self.samples,
            "seed": self.seed,
            "boundary": list(self.boundary),
            "scheme": "scrambled-sobol+inner-sphere",
        }


def classify_margin(min_margin, tol=MARGINAL_TOL):
    if not np.isfinite(min_margin):
        return VIOLATED
    if abs(min_margin) < tol:
        return MARGINAL
    return HOLDS if min_margin > 0 else VIOLATED


@dataclass(frozen=True)
class ConditionReport:
    name: str
    min_margin: float
    argmin: tuple
    verdict: str
    tol: float
    n_samples: int
    summary: dict
    region: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    # per-sample data, kept for profile output but not serialised
    sample_radii: np.ndarray = field(default=None, repr=False, compare=False)
    sample_margins: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def argmin_radius(self):
        return float(np.linalg.norm(self.argmin)) if self.argmin else float("nan")

    @property
    def holds(self):
        return self.verdict in (HOLDS, MARGINAL)

    def as_dict(self):
        return {
            "name": self.name,
            "min_margin": self.min_margin,
            "argmin": list(self.argmin),
            "argmin_radius": self.argmin_radius,
            "verdict": self.verdict,
            "tol": self.tol,
            "n_samples": self.n_samples,
            "summary": dict(self.summary),
            "region": dict(self.region),
            "diagnostics": dict(self.diagnostics),
        }


def condition_report(name, pts, margins, tol=MARGINAL_TOL, region=None, diagnostics=None):
    """Reduce per-point margins to a :class:`ConditionReport`.

    Ties in the minimum resolve to the first sample, so the argmin is
    deterministic.
    """
    margins = np.asarray(margins, dtype=float)
    pts = np.asarray(pts, dtype=float).reshape(-1, 3)
    diagnostics = dict(diagnostics or {})
    if margins.size == 0 or np.all(np.isnan(margins)):
        min_margin, argmin = float("nan"), ()
        summary = {}
    else:
        k = int(np.nanargmin(margins))
        min_margin, argmin = float(margins[k]), tuple(float(c) for c in pts[k])
        qs = np.nanquantile(margins, _QUANTILES)
        summary = {f"q{int(round(q * 100)):02d}": float(v) for q, v in zip(_QUANTILES, qs)}
        summary["negative_fraction"] = float(np.mean(margins < 0))
    if np.any(np.isnan(margins)):
        diagnostics.setdefault("nan_samples", int(np.sum(np.isnan(margins))))
    return ConditionReport(
        name=name,
        min_margin=min_margin,
        argmin=argmin,
        verdict=classify_margin(min_margin, tol),
        tol=tol,
        n_samples=int(margins.size),
        summary=summary,
        region=dict(region or {}),
        diagnostics=diagnostics,
        sample_radii=radius(pts),
        sample_margins=margins,
    )


def classify_theorem(hypotheses, conclusion_margin, conclusion_tol=CONCLUSION_TOL):
    """Classification from stored hypothesis verdicts and the conclusion margin."""
    hyp = all(h.holds for h in hypotheses)
    concl = bool(np.isfinite(conclusion_margin) and conclusion_margin >= -conclusion_tol)
    if hyp:
        return HOLD_HOLD if concl else FLAG
    return FAIL_HOLD if concl else FAIL_FAIL


@dataclass(frozen=True)
class TheoremReport:
    theorem: str
    hypotheses: list
    estimates: dict
    conclusion_margin: float
    conclusion_tol: float
    classification: str
    inputs: dict = field(default_factory=dict)
    auxiliary: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def flagged(self):
        return self.classification == FLAG

    def recompute_classification(self):
        return classify_theorem(self.hypotheses, self.conclusion_margin, self.conclusion_tol)

    def as_dict(self):
        return {
            "theorem": self.theorem,
            "inputs": dict(self.inputs),
            "hypotheses": [h.as_dict() for h in self.hypotheses],
            "estimates": {k: v.as_dict() for k, v in self.estimates.items()},
            "conclusion_margin": self.conclusion_margin,
            "conclusion_tol": self.conclusion_tol,
            "classification": self.classification,
            "auxiliary": [a.as_dict() for a in self.auxiliary],
            "diagnostics": dict(self.diagnostics),
        }


def _theorem_report(theorem, hypotheses, estimates, conclusion_margin, conclusion_tol, inputs, auxiliary=(), diagnostics=None):
    classification = classify_theorem(hypotheses, conclusion_margin, conclusion_tol)
    diagnostics = dict(diagnostics or {})
    if classification == FLAG:
        # a numerical counterexample: keep everything needed to reproduce it
        diagnostics["flag"] = {
            "hypothesis_min_margins": {h.name: h.min_margin for h in hypotheses},
            "hypothesis_argmins": {h.name: list(h.argmin) for h in hypotheses},
            "estimate_errors": {k: v.error_estimate for k, v in estimates.items()},
            "estimate_raw": {k: list(v.raw) for k, v in estimates.items()},
        }
    return TheoremReport(
        theorem=theorem,
        hypotheses=list(hypotheses),
        estimates=dict(estimates),
        conclusion_margin=float(conclusion_margin),
        conclusion_tol=conclusion_tol,
        classification=classification,
        inputs=dict(inputs),
        auxiliary=list(auxiliary),
        diagnostics=diagnostics,
    )


def _zero_scalar(f):
    return ScalarField.constant(0.0, name="0") if f is None else f


def _zero_vector(V):
    return VectorField.zero() if V is None else V


def _name(obj):
    return getattr(obj, "name", "") or type(obj).__name__


def dominant_charge_margin(g, E=None, region=None, include_div=False, B=None, tol=MARGINAL_TOL, h_rel=DEFAULT_H_REL):
    """Pointwise ``S_g - 2|E|^2_g [- 2|B|^2_g] [- |div_g E|]`` over a region."""
    E = _zero_vector(E)
    region.check_domain(max(g.r_min, E.r_min))
    pts = region.points()
    margin = scalar_curvature(g, pts, h_rel) - 2.0 * norm_sq(g, E, pts)
    if B is not None:
        margin = margin - 2.0 * norm_sq(g, B, pts)
    if include_div:
        margin = margin - np.abs(divergence(g, E, pts, h_rel))
    name = "dominant_charge" + ("+div" if include_div else "")
    return condition_report(name, pts, margin, tol, region.as_dict(), {"index_convention": "contravariant"})


def _electric_hypotheses(g, f, E, B, pts, tol, region, h_rel):
    triple = ConformalTriple(g, f, "e2f")
    fj = field_jet(f, pts, h_rel)
    ef = np.exp(fj.val)
    rhs = 4.0 * norm_sq(g, E, pts)
    if B is not None:
        rhs = rhs + 4.0 * norm_sq(g, B, pts)
    hyp1 = scalar_curvature(g, pts, h_rel) + ef**2 * scalar_curvature(triple.g_prime, pts, h_rel) - rhs
    # (e^f)_i E^i read as e^f f_i E^i; the gradient pairs directly with contravariant E
    df_E = np.einsum("...i,...i->...", fj.grad, E(pts))
    hyp2 = gradient_norm_sq(g, f, pts, h_rel) - np.abs(3.0 * ef * df_E) - np.abs(ef * divergence(g, E, pts, h_rel))
    rd = region.as_dict()
    reports = [
        condition_report("conformal_scalar_sum", pts, hyp1, tol, rd),
        condition_report("gradient_vs_field", pts, hyp2, tol, rd, {"reading": "e^f * df(E)"}),
    ]
    return triple, reports


def _masses_and_charges(g, g_prime, E, B, radii, quad, kw):
    est = {
        "m_g": adm_mass(g, radii, quad, **kw),
        "m_g_prime": adm_mass(g_prime, radii, quad, **kw),
        "Q": flux_charge(g, E, radii, quad, p=kw.get("p", 1.0), order=kw.get("order"), workers=kw.get("workers", 1)),
    }
    if B is not None:
        est["P"] = flux_charge(g, B, radii, quad, p=kw.get("p", 1.0), order=kw.get("order"), workers=kw.get("workers", 1))
    return est


def theorem_electric(
    g,
    f=None,
    E=None,
    region=None,
    radii=DEFAULT_LADDER,
    quad=None,
    *,
    tol=MARGINAL_TOL,
    conclusion_tol=CONCLUSION_TOL,
    h_rel=DEFAULT_H_REL,
    p=1.0,
    order=None,
    workers=1,
):
    """Electric conformal positive-mass instance with g' = e^{2f} g.

    Hypotheses: ``S_g + e^{2f} S_g' - 4|E|^2_g`` and
    ``|grad f|^2_g - |3 e^f df(E)| - |e^f div_g E|``.
    Conclusion margin: ``m_g + m_g' - 2|Q|``.
    """
    return _electromagnetic(
        "electric", g, f, E, None, region, radii, quad, tol, conclusion_tol, h_rel, p, order, workers
    )


def theorem_electromagnetic(
    g,
    f=None,
    E=None,
    B=None,
    region=None,
    radii=DEFAULT_LADDER,
    quad=None,
    *,
    tol=MARGINAL_TOL,
    conclusion_tol=CONCLUSION_TOL,
    h_rel=DEFAULT_H_REL,
    p=1.0,
    order=None,
    workers=1,
):
    """Electromagnetic instance: adds ``4|B|^2_g`` to the curvature hypothesis,
    requires the magnetic density for ``gbar = e^f g`` to vanish, and compares
    against ``2 sqrt(Q^2 + P^2)``."""
    return _electromagnetic(
        "electromagnetic", g, f, E, _zero_vector(B), region, radii, quad, tol, conclusion_tol, h_rel, p, order, workers
    )


def _electromagnetic(theorem, g, f, E, B, region, radii, quad, tol, conclusion_tol, h_rel, p, order, workers):
    f, E = _zero_scalar(f), _zero_vector(E)
    quad = quad or SphereQuadrature()
    r_min = max(g.r_min, f.r_min, E.r_min, B.r_min if B is not None else 0.0)
    region.check_domain(r_min)
    pts = region.points()
    triple, hyps = _electric_hypotheses(g, f, E, B, pts, tol, region, h_rel)
    if B is not None:
        div_b = divergence(triple.g_bar, B, pts, h_rel)
        hyps.append(condition_report("magnetic_density", pts, -np.abs(div_b), tol, region.as_dict(), {"metric": "gbar = e^f g"}))
    kw = {"p": p, "order": order, "h_rel": h_rel, "workers": workers}
    est = _masses_and_charges(g, triple.g_prime, E, B, radii, quad, kw)
    charge = abs(est["Q"].value) if B is None else math.hypot(est["Q"].value, est["P"].value)
    conclusion = est["m_g"].value + est["m_g_prime"].value - 2.0 * charge
    inputs = {"g": _name(g), "f": _name(f), "E": _name(E), "convention": "e2f"}
    if B is not None:
        inputs["B"] = _name(B)
    return _theorem_report(theorem, hyps, est, conclusion, conclusion_tol, inputs)


def boundary_condition_margin(
    g,
    f=None,
    E=None,
    r0=1.0,
    *,
    angular=(32, 64),
    lambda0_source="induced",
    summed=False,
    tol=MARGINAL_TOL,
    h_rel=DEFAULT_H_REL,
):
    """Inner-boundary condition ``lambda0 - H - df(nu)/4 - |g(E, nu)|`` on ``r = r0``.

    ``nu`` is the g-unit normal pointing to increasing r (into the manifold).
    ``H`` is the averaged trace by default; ``lambda0`` comes from the
    intrinsic curvature of the sphere unless ``lambda0_source="ambient"``.
    Both alternatives are reported in the diagnostics when they differ.
    """
    if lambda0_source not in ("induced", "ambient"):
        raise ValueError(f"unknown lambda0 source {lambda0_source!r}")
    f, E = _zero_scalar(f), _zero_vector(E)
    r_min = max(g.r_min, f.r_min, E.r_min)
    if r0 < r_min:
        raise DomainError(f"boundary sphere r0={r0:g} lies outside the domain r >= {r_min:g}")
    quad = SphereQuadrature(*angular)
    pts = r0 * quad.nodes
    bc = boundary_curvature(g, r0, angular, h_rel)
    lam = bc.lambda0_induced if lambda0_source == "induced" else bc.lambda0_ambient
    h_avg = sphere_mean_curvature(g, r0, pts, summed=False, h_rel=h_rel)
    h_sum = 2.0 * h_avg
    nu = sphere_unit_normal(g, pts)
    df_nu = np.einsum("...i,...i->...", field_jet(f, pts, h_rel).grad, nu)
    e_nu = np.abs(np.einsum("...ij,...i,...j->...", g(pts), E(pts), nu))
    rest = 0.25 * df_nu + e_nu
    margin = lam - (h_sum if summed else h_avg) - rest
    diagnostics = {
        "convention": "ef",
        "normal": "increasing-r",
        "H_convention": "summed" if summed else "average",
        "lambda0_source": lambda0_source,
        "lambda0": lam,
        "H_range": [float(np.min(h_sum if summed else h_avg)), float(np.max(h_sum if summed else h_avg))],
    }
    if np.max(np.abs(h_sum - h_avg)) > 1e-6:
        other = h_avg if summed else h_sum
        diagnostics["alternative_H"] = {
            "H_convention": "average" if summed else "summed",
            "min_margin": float(np.min(lam - other - rest)) if np.isfinite(lam) else float("nan"),
        }
    lam_other = bc.lambda0_ambient if lambda0_source == "induced" else bc.lambda0_induced
    if not (np.isfinite(lam) and np.isfinite(lam_other) and abs(lam - lam_other) <= 1e-6):
        diagnostics["alternative_lambda0"] = {
            "lambda0_source": "ambient" if lambda0_source == "induced" else "induced",
            "lambda0": lam_other,
            "induced_inf_S": bc.induced_inf,
            "ambient_inf_S": bc.ambient_inf,
        }
    if not np.isfinite(lam):
        diagnostics["lambda0_undefined"] = "negative infimum of the boundary scalar curvature"
    region = {"sphere_radius": r0, "angular": list(angular)}
    return condition_report("boundary_condition", pts, margin, tol, region, diagnostics)


def _zero_locus_radius(phi, direction, r_in, r_out):
    """Radius of the first sign change of ``phi`` along the ray through ``direction``."""
    direction = direction / np.linalg.norm(direction)
    rs = np.linspace(r_in, r_out, 257)
    vals = phi(rs[:, None] * direction)
    for k in range(rs.size - 1):
        if vals[k] == 0.0:
            return float(rs[k])
        if vals[k] * vals[k + 1] < 0:
            return float(brentq(lambda t: float(phi(t * direction)), rs[k], rs[k + 1], xtol=1e-14))
    return float("nan")


def scalar_field_theorem(
    g,
    phi,
    region=None,
    radii=DEFAULT_LADDER,
    quad=None,
    *,
    tol=MARGINAL_TOL,
    conclusion_tol=CONCLUSION_TOL,
    h_rel=DEFAULT_H_REL,
    p=1.0,
    order=None,
    workers=1,
):
    """Conformal scalar-field instance with g' = phi^4 g.

    Hypothesis: ``S_g + S_g' phi^4 / 3 - 2 phi^-2 |grad phi|^2_g``.
    Conclusion margin: ``m_g``.  Auxiliary reports: the direct-versus-relation
    residual for ``S_g'`` (times ``phi^4``) and the residual of
    ``24 T00 = 3 S_g phi^2 + S_g' phi^6 - 6 |grad phi|^2`` with
    ``T00 = S_g phi^2/6 - |grad phi|^2/4 - phi Delta_g phi / 3`` and ``S_g'``
    taken from the relation.
    """
    quad = quad or SphereQuadrature()
    region.check_domain(max(g.r_min, phi.r_min))
    pts = region.points()
    rd = region.as_dict()
    ph = phi(pts)
    inputs = {"g": _name(g), "phi": _name(phi), "convention": "phi^4"}
    m_g = adm_mass(g, radii, quad, p=p, order=order, h_rel=h_rel, workers=workers)
    est = {"m_g": m_g}
    if np.any(ph <= 0):
        k = int(np.argmin(ph))
        zr = _zero_locus_radius(phi, pts[k], region.r_in, region.r_out)
        hyp = condition_report(
            "scalar_hypothesis",
            pts,
            np.full(ph.shape, np.nan),
            tol,
            rd,
            {"rejected": "phi is not positive on the region", "zero_locus_radius": zr},
        )
        return _theorem_report("scalar_field", [hyp], est, m_g.value, conclusion_tol, inputs)
    S = scalar_curvature(g, pts, h_rel)
    S_direct = scalar_curvature(power_rescale(g, phi, 4), pts, h_rel)
    grad2 = gradient_norm_sq(g, phi, pts, h_rel)
    lap = laplace_beltrami(g, phi, pts, h_rel)
    S_rel = ph**-5 * (-8.0 * lap + S * ph)
    hyp = S + S_direct * ph**4 / 3.0 - 2.0 * grad2 / ph**2
    t00 = S * ph**2 / 6.0 - grad2 / 4.0 - ph * lap / 3.0
    eq_c = 24.0 * t00 - (3.0 * S * ph**2 + S_rel * ph**6 - 6.0 * grad2)
    aux = [
        # in the units of the hypothesis term S_g' phi^4
        condition_report("scalar_relation_residual", pts, -np.abs(S_direct - S_rel) * ph**4, tol, rd),
        condition_report("energy_identity_residual", pts, -np.abs(eq_c), tol, rd),
    ]
    return _theorem_report(
        "scalar_field",
        [condition_report("scalar_hypothesis", pts, hyp, tol, rd)],
        est,
        m_g.value,
        conclusion_tol,
        inputs,
        aux,
    )

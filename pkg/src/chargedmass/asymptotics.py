"""Limits at infinity: ADM mass and charge fluxes over a radius ladder.

Each flux is integrated over coordinate spheres with :class:`SphereQuadrature`
and the ladder of per-radius values is extrapolated to ``r -> infinity``
with the model ``v(r) = v_inf + sum_k c_k r^(-k p)``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import least_squares

from .fields import DEFAULT_H_REL, metric_jet
from .geometry import inverse_metric
from .quadrature import SphereQuadrature, compensated_sum

DEFAULT_LADDER = (16.0, 32.0, 64.0, 128.0, 256.0)
DEFAULT_ORDER = 3
OMEGA_2 = 4.0 * math.pi


@dataclass(frozen=True)
class LimitEstimate:
    value: float
    radii: tuple
    raw: tuple
    p: float
    order: int
    fit_residual: float
    error_estimate: float
    monotone_tail: bool
    quantity: str = ""
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "quantity": self.quantity,
            "value": self.value,
            "radii": list(self.radii),
            "raw": list(self.raw),
            "p": self.p,
            "order": self.order,
            "fit_residual": self.fit_residual,
            "error_estimate": self.error_estimate,
            "monotone_tail": self.monotone_tail,
            "diagnostics": dict(self.diagnostics),
        }


def _poly_fit(radii, values, p, order):
    t = (radii[0] / radii) ** p
    A = np.vander(t, order + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    resid = values - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def _power_fit(radii, values):
    t = radii[0] / radii

    def resid(params):
        v, c, p = params
        return v + c * t**p - values

    guess_c = float(values[0] - values[-1])
    sol = least_squares(resid, x0=[float(values[-1]), guess_c, 1.0], bounds=([-np.inf, -np.inf, 0.05], [np.inf, np.inf, 10.0]))
    v, _, p = sol.x
    return float(v), float(p), float(np.sqrt(np.mean(sol.fun**2)))


def extrapolate(radii, values, p=1.0, order=None, quantity=""):
    """Extrapolate a ladder of values to ``r -> infinity``.

    Parameters
    ----------
    radii, values : sequences of equal length (>= 3), radii increasing
    p : float or ``"auto"``
        Decay exponent of the correction terms.  ``"auto"`` fits a single
        term ``c r^-p`` with free ``p``.
    order : int, optional
        Number of correction terms (fixed-``p`` model only).  Defaults to
        ``min(DEFAULT_ORDER, len(radii) - 2)``, leaving one residual degree
        of freedom.
    """
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    n = radii.size
    if n < 3:
        raise ValueError("extrapolation needs at least 3 radii")
    if values.shape != radii.shape or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be increasing and match values")
    diagnostics = {}
    if p == "auto":
        value, p_fit, resid = _power_fit(radii, values)
        alt, _, _ = _power_fit(radii[1:], values[1:]) if n > 3 else (value, p_fit, resid)
        order = 1
        diagnostics["p_fitted"] = p_fit
    else:
        p_fit = float(p)
        order = min(DEFAULT_ORDER, n - 2) if order is None else int(order)
        if not 1 <= order <= n - 1:
            raise ValueError(f"order must be in [1, {n - 1}] for {n} radii")
        value, resid = _poly_fit(radii, values, p_fit, order)
        if n - 1 >= order + 1:
            alt, _ = _poly_fit(radii[1:], values[1:], p_fit, order)
        else:
            alt, _ = _poly_fit(radii, values, p_fit, max(order - 1, 1))
    dev = np.abs(values - value)
    scale = 1e-12 * max(1.0, abs(value))
    monotone = bool(np.all(np.diff(dev) <= scale))
    if not monotone:
        diagnostics["flag"] = "non-monotone tail"
    return LimitEstimate(
        value=value,
        radii=tuple(float(r) for r in radii),
        raw=tuple(float(v) for v in values),
        p=p_fit,
        order=order,
        fit_residual=resid,
        error_estimate=abs(value - alt),
        monotone_tail=monotone,
        quantity=quantity,
        diagnostics=diagnostics,
    )


def _ladder_map(fn, radii, workers):
    # values are gathered in ladder order; accumulation inside fn is sequential
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, radii))
    return [fn(r) for r in radii]


def _check_ladder(radii, r_min):
    radii = np.asarray(radii, dtype=float)
    if radii.size < 3:
        raise ValueError("a radius ladder needs at least 3 radii")
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    if radii[0] <= r_min:
        raise ValueError(f"ladder radius {radii[0]:g} not inside the domain r > {r_min:g}")
    return radii


def sphere_normal_and_area(gij, dirs, r):
    """g-unit outward normal ``n^j`` and area factor ``dA_g / dOmega`` on a coordinate sphere."""
    ginv = inverse_metric(gij)
    n = np.einsum("...jk,...k->...j", ginv, dirs)
    dr_norm = np.sqrt(np.einsum("...j,...j->...", n, dirs))
    area = np.sqrt(np.linalg.det(gij)) * dr_norm * r * r
    return n / dr_norm[..., None], area


def adm_flux_density(g, r, quad, measure="euclidean", h_rel=DEFAULT_H_REL):
    """Integrand of the ADM flux at the quadrature nodes of the sphere of radius r (per dOmega)."""
    dirs = quad.nodes
    gij, dg, _ = metric_jet(g, r * dirs, h_rel)
    # w_j = d_i g_ij - d_j g_ii
    w = np.einsum("...iji->...j", dg) - np.einsum("...iij->...j", dg)
    if measure == "euclidean":
        return np.einsum("...j,...j->...", w, dirs) * r * r
    if measure == "induced":
        n, area = sphere_normal_and_area(gij, dirs, r)
        return np.einsum("...j,...j->...", w, n) * area
    raise ValueError(f"unknown measure {measure!r}")


def adm_mass_at(g, r, quad, measure="euclidean", h_rel=DEFAULT_H_REL):
    """ADM surface integral at a single radius, normalised by ``1/(2(n-1) omega_2)``."""
    return quad.integrate(adm_flux_density(g, r, quad, measure, h_rel)) / (4.0 * OMEGA_2)


def adm_mass(g, radii=DEFAULT_LADDER, quad=None, *, measure="euclidean", p=1.0, order=None, h_rel=DEFAULT_H_REL, workers=1):
    """ADM mass as an extrapolated limit over a radius ladder.

    The flux ``(d_i g_ij - d_j g_ii) nu^j`` is integrated with the Euclidean
    unit normal and measure by default (``measure="induced"`` uses the
    g-unit normal and g-area instead); both share the same limit.
    """
    quad = quad or SphereQuadrature()
    radii = _check_ladder(radii, g.r_min)
    raw = _ladder_map(lambda r: adm_mass_at(g, r, quad, measure, h_rel), radii, workers)
    est = extrapolate(radii, raw, p=p, order=order, quantity="adm_mass")
    est.diagnostics.update({"measure": measure, "quadrature": [quad.n_theta, quad.n_phi]})
    return est


def charge_flux_at(g, V, r, quad):
    """``(1/4pi) int g(V, n_g) dA_g`` over the coordinate sphere of radius r."""
    dirs = quad.nodes
    pts = r * dirs
    gij = g(pts)
    v = V(pts)
    n, area = sphere_normal_and_area(gij, dirs, r)
    density = np.einsum("...ij,...i,...j->...", gij, v, n) * area
    return quad.integrate(density) / OMEGA_2


def flux_charge(g, V, radii=DEFAULT_LADDER, quad=None, *, p=1.0, order=None, workers=1):
    """Total charge of ``V`` measured with metric ``g`` (extrapolated flux / 4pi)."""
    quad = quad or SphereQuadrature()
    radii = _check_ladder(radii, max(g.r_min, V.r_min))
    raw = _ladder_map(lambda r: charge_flux_at(g, V, r, quad), radii, workers)
    est = extrapolate(radii, raw, p=p, order=order, quantity="flux_charge")
    est.diagnostics.update({"quadrature": [quad.n_theta, quad.n_phi]})
    return est

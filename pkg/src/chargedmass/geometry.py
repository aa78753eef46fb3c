"""Pointwise Riemannian geometry on the asymptotic chart.

All routines are vectorised over point batches.  The array kernels
(``*_from_jets``) are dimension-agnostic so the same code serves the ambient
3-metric and the induced 2-metric of coordinate spheres.
"""

from dataclasses import dataclass

import numpy as np

from . import jets as J
from .errors import GeometryError
from .fields import DEFAULT_H_REL, as_points, field_jet, metric_jet, radius, vector_jet
from .jets import Jet, pullback
from .quadrature import SphereQuadrature

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class ConnectionCoefficients:
    """``gamma[..., k, i, j]`` is the Christoffel symbol of the second kind."""

    gamma: np.ndarray
    point: np.ndarray


def inverse_metric(gij):
    det = np.linalg.det(gij)
    if np.any(~np.isfinite(det)) or np.any(det <= 0):
        raise GeometryError("metric is singular or not positive definite (det <= 0)")
    cond = np.linalg.cond(gij)
    if np.any(cond > CONDITION_LIMIT):
        raise GeometryError(f"metric condition number {float(np.max(cond)):.3g} exceeds {CONDITION_LIMIT:g}")
    return np.linalg.inv(gij)


def christoffel_from_jets(ginv, dg):
    # T[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    T = np.einsum("...jli->...lij", dg) + np.einsum("...ilj->...lij", dg) - np.einsum("...ijl->...lij", dg)
    return 0.5 * np.einsum("...kl,...lij->...kij", ginv, T)


def ricci_from_jets(ginv, dg, ddg):
    """Ricci tensor ``R_ij`` from metric, first and second derivatives."""
    T = np.einsum("...jli->...lij", dg) + np.einsum("...ilj->...lij", dg) - np.einsum("...ijl->...lij", dg)
    dT = (
        np.einsum("...jlim->...lijm", ddg)
        + np.einsum("...iljm->...lijm", ddg)
        - np.einsum("...ijlm->...lijm", ddg)
    )
    dginv = -np.einsum("...ka,...abm,...bl->...klm", ginv, dg, ginv)
    gamma = 0.5 * np.einsum("...kl,...lij->...kij", ginv, T)
    # dgamma[k, i, j, m] = d_m Gamma^k_ij
    dgamma = 0.5 * (np.einsum("...klm,...lij->...kijm", dginv, T) + np.einsum("...kl,...lijm->...kijm", ginv, dT))
    return (
        np.einsum("...kijk->...ij", dgamma)
        - np.einsum("...kikj->...ij", dgamma)
        + np.einsum("...kkl,...lij->...ij", gamma, gamma)
        - np.einsum("...kjl,...lik->...ij", gamma, gamma)
    )


def scalar_curvature_from_jets(gij, dg, ddg):
    ginv = inverse_metric(gij)
    return np.einsum("...ij,...ij->...", ginv, ricci_from_jets(ginv, dg, ddg))


def christoffel(g, p, h_rel=DEFAULT_H_REL):
    """Levi-Civita connection ``Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)``."""
    pts = as_points(p)
    gij, dg, _ = metric_jet(g, pts, h_rel)
    return ConnectionCoefficients(christoffel_from_jets(inverse_metric(gij), dg), pts)


def scalar_curvature(g, p, h_rel=DEFAULT_H_REL):
    """Scalar curvature ``S_g`` at ``p`` (contracted Ricci tensor)."""
    return scalar_curvature_from_jets(*metric_jet(g, as_points(p), h_rel))


def laplace_beltrami(g, u, p, h_rel=DEFAULT_H_REL):
    """``Delta_g u = g^ij (d_i d_j u - Gamma^k_ij d_k u)``."""
    pts = as_points(p)
    gij, dg, _ = metric_jet(g, pts, h_rel)
    ginv = inverse_metric(gij)
    gamma = christoffel_from_jets(ginv, dg)
    uj = field_jet(u, pts, h_rel)
    return np.einsum("...ij,...ij->...", ginv, uj.hess - np.einsum("...kij,...k->...ij", gamma, uj.grad))


def divergence(g, V, p, h_rel=DEFAULT_H_REL):
    """``div_g V = (1/sqrt(det g)) d_i (sqrt(det g) V^i)`` by the product rule.

    ``d_i log sqrt(det g) = 1/2 g^ab d_i g_ab``.
    """
    pts = as_points(p)
    gij, dg, _ = metric_jet(g, pts, h_rel)
    ginv = inverse_metric(gij)
    val, dV = vector_jet(V, pts, h_rel)
    dlogvol = 0.5 * np.einsum("...ab,...abi->...i", ginv, dg)
    return np.einsum("...ii->...", dV) + np.einsum("...i,...i->...", val, dlogvol)


def divergence_via_christoffel(g, V, p, h_rel=DEFAULT_H_REL):
    """``nabla_i V^i = d_i V^i + Gamma^i_ik V^k``; independent route for checks."""
    pts = as_points(p)
    gij, dg, _ = metric_jet(g, pts, h_rel)
    gamma = christoffel_from_jets(inverse_metric(gij), dg)
    val, dV = vector_jet(V, pts, h_rel)
    return np.einsum("...ii->...", dV) + np.einsum("...iik,...k->...", gamma, val)


def norm_sq(g, V, p, covariant=False):
    """Squared norm of a vector field.

    With ``covariant=False`` (default) the components are contravariant and
    ``|V|^2 = g_ij V^i V^j``; with ``covariant=True`` they are read as a
    covector and ``|V|^2 = g^ij V_i V_j``.
    """
    pts = as_points(p)
    gij = g(pts)
    v = V(pts)
    m = inverse_metric(gij) if covariant else gij
    return np.einsum("...ij,...i,...j->...", m, v, v)


def gradient_norm_sq(g, u, p, h_rel=DEFAULT_H_REL):
    """``|grad u|_g^2 = g^ij d_i u d_j u``."""
    pts = as_points(p)
    du = field_jet(u, pts, h_rel).grad
    return np.einsum("...ij,...i,...j->...", inverse_metric(g(pts)), du, du)


def _check_on_sphere(pts, r0):
    if np.any(np.abs(radius(pts) - r0) > 1e-12 * max(1.0, r0)):
        raise ValueError(f"points must lie on the coordinate sphere r = {r0}")


def sphere_unit_normal(g, pts):
    """g-unit normal of the coordinate spheres through ``pts``, pointing to increasing r."""
    gij = g(pts)
    ginv = inverse_metric(gij)
    dr = pts / radius(pts)[..., None]
    n = np.einsum("...ij,...j->...i", ginv, dr)
    return n / np.sqrt(np.einsum("...i,...i->...", n, dr))[..., None]


def sphere_mean_curvature(g, r0, p, summed=False, h_rel=DEFAULT_H_REL):
    """Mean curvature of the coordinate sphere ``r = r0`` at points ``p`` on it.

    Computed as the divergence of the outward (increasing-r) unit normal of
    the level sets of ``r``.  Returns the average of the two principal
    curvatures, or their sum with ``summed=True``.
    """
    pts = as_points(p)
    _check_on_sphere(pts, r0)
    gij, dg, _ = metric_jet(g, pts, h_rel)
    ginv = inverse_metric(gij)
    gamma = christoffel_from_jets(ginv, dg)
    rr = radius(pts)
    dF = pts / rr[..., None]
    hessF = (np.eye(3) - dF[..., :, None] * dF[..., None, :]) / rr[..., None, None]
    covhess = hessF - np.einsum("...kij,...k->...ij", gamma, dF)
    gradF = np.einsum("...ij,...j->...i", ginv, dF)
    normsq = np.einsum("...i,...i->...", gradF, dF)
    norm = np.sqrt(normsq)
    h_sum = (
        np.einsum("...ij,...ij->...", ginv, covhess) - np.einsum("...i,...j,...ij->...", gradF, gradF, covhess) / normsq
    ) / norm
    if np.any(~np.isfinite(h_sum)):
        raise GeometryError("degenerate induced metric on coordinate sphere")
    return h_sum if summed else 0.5 * h_sum


def induced_sphere_metric(g, r0, theta, phi, h_rel=DEFAULT_H_REL):
    """Induced metric on ``r = r0`` in (theta, phi) coordinates with its derivatives.

    Returns ``(h, dh, ddh)`` shaped like the ambient metric jets but 2-dimensional.
    """
    ang = np.stack([np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)], axis=-1)
    th, ph = Jet.variables(ang)
    st, ct, sp, cp = J.sin(th), J.cos(th), J.sin(ph), J.cos(ph)
    X = [r0 * st * cp, r0 * st * sp, r0 * ct]
    tangents = (
        [r0 * ct * cp, r0 * ct * sp, -r0 * st],
        [-r0 * st * sp, r0 * st * cp, 0.0 * th],
    )
    pts = np.stack([x.val for x in X], axis=-1)
    gij, dg, ddg = metric_jet(g, pts, h_rel)
    comp = [[pullback(gij[..., i, j], dg[..., i, j, :], ddg[..., i, j, :, :], X) for j in range(3)] for i in range(3)]
    h = [[None, None], [None, None]]
    for a in range(2):
        for b in range(a, 2):
            acc = None
            for i in range(3):
                for j in range(3):
                    term = comp[i][j] * tangents[a][i] * tangents[b][j]
                    acc = term if acc is None else acc + term
            h[a][b] = h[b][a] = acc
    hv = np.stack([np.stack([h[a][b].val for b in range(2)], axis=-1) for a in range(2)], axis=-2)
    dh = np.stack([np.stack([h[a][b].grad for b in range(2)], axis=-2) for a in range(2)], axis=-3)
    ddh = np.stack([np.stack([h[a][b].hess for b in range(2)], axis=-3) for a in range(2)], axis=-4)
    return hv, dh, ddh


def induced_sphere_scalar_curvature(g, r0, angular=(32, 64), h_rel=DEFAULT_H_REL):
    """Intrinsic scalar curvature (= 2 K) of ``r = r0`` on the angular grid."""
    quad = SphereQuadrature(*angular)
    h, dh, ddh = induced_sphere_metric(g, r0, quad.theta, quad.phi, h_rel)
    return scalar_curvature_from_jets(h, dh, ddh), quad


@dataclass(frozen=True)
class BoundaryCurvature:
    r0: float
    induced_inf: float
    ambient_inf: float
    lambda0_induced: float
    lambda0_ambient: float


def lambda0_from_infimum(inf_s, n=3, atol=1e-12):
    """``1/2 sqrt((n-1)/(n-2) inf S)``; NaN when the infimum is negative.

    Infima within ``atol`` of zero are roundoff of a scalar-flat boundary and
    give 0.
    """
    if not np.isfinite(inf_s) or inf_s < -atol:
        return float("nan")
    inf_s = max(inf_s, 0.0)
    return 0.5 * float(np.sqrt((n - 1) / (n - 2) * inf_s))


def boundary_curvature(g, r0, angular=(32, 64), h_rel=DEFAULT_H_REL):
    """Both readings of the boundary eigenvalue bound on the sphere ``r = r0``."""
    s_ind, quad = induced_sphere_scalar_curvature(g, r0, angular, h_rel)
    s_amb = scalar_curvature(g, r0 * quad.nodes, h_rel)
    inf_ind, inf_amb = float(np.min(s_ind)), float(np.min(s_amb))
    return BoundaryCurvature(r0, inf_ind, inf_amb, lambda0_from_infimum(inf_ind), lambda0_from_infimum(inf_amb))


def boundary_lambda0(g, r0, source="induced", angular=(32, 64), h_rel=DEFAULT_H_REL):
    """Lower bound for the first boundary Dirac eigenvalue on ``r = r0``.

    ``source="induced"`` uses the intrinsic scalar curvature of the sphere,
    ``"ambient"`` the ambient ``S_g`` restricted to it.  NaN signals a
    negative infimum (bound undefined).
    """
    if source == "induced":
        s, _ = induced_sphere_scalar_curvature(g, r0, angular, h_rel)
    elif source == "ambient":
        s = scalar_curvature(g, r0 * SphereQuadrature(*angular).nodes, h_rel)
    else:
        raise ValueError(f"unknown curvature source {source!r}")
    return lambda0_from_infimum(float(np.min(s)))

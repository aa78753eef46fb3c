"""Regenerate ``tests/fixtures/symbolic.json`` with sympy.

The package never imports sympy; these values are an independent
computer-algebra route for the curvature engine.  Run from the repository
root::

    python tests/oracles/make_symbolic_fixtures.py
"""

import json
from pathlib import Path

import sympy as sp

x, y, z = sp.symbols("x y z", real=True)
X = (x, y, z)
r = sp.sqrt(x**2 + y**2 + z**2)
OUT = Path(__file__).resolve().parents[1] / "fixtures" / "symbolic.json"


def christoffel(g, ginv):
    return [
        [[sp.Rational(1, 2) * sum(ginv[k, l] * (sp.diff(g[j, l], X[i]) + sp.diff(g[i, l], X[j]) - sp.diff(g[i, j], X[l])) for l in range(3)) for j in range(3)] for i in range(3)]
        for k in range(3)
    ]


def scalar_curvature(ginv, gamma):
    S = 0
    for i in range(3):
        for j in range(3):
            ric = 0
            for k in range(3):
                ric += sp.diff(gamma[k][i][j], X[k]) - sp.diff(gamma[k][k][j], X[i])
                for l in range(3):
                    ric += gamma[k][k][l] * gamma[l][i][j] - gamma[k][i][l] * gamma[l][k][j]
            S += ginv[i, j] * ric
    return S


def laplacian(ginv, gamma, u):
    return sum(
        ginv[i, j] * (sp.diff(u, X[i], X[j]) - sum(gamma[k][i][j] * sp.diff(u, X[k]) for k in range(3)))
        for i in range(3)
        for j in range(3)
    )


def at(expr, p):
    return float(sp.N(expr.subs({x: p[0], y: p[1], z: p[2]}), 30))


def radial(grr):
    """Cartesian form of grr dr^2 + r^2 dOmega^2 and its closed-form inverse."""
    xs = sp.Matrix(X)
    proj = (xs * xs.T) / r**2
    return sp.eye(3) + (grr - 1) * proj, sp.eye(3) + (1 / grr - 1) * proj


def main():
    fixtures = {}
    m = sp.Integer(1)
    psi = 1 + m / (2 * r)
    g, ginv = psi**4 * sp.eye(3), psi**-4 * sp.eye(3)
    gam = christoffel(g, ginv)
    pts = [(10, 0, 0), (6, 0, 8)]
    fixtures["schwarzschild_m1"] = {
        "points": pts,
        "christoffel": [[[[at(gam[k][i][j], p) for j in range(3)] for i in range(3)] for k in range(3)] for p in pts],
        "scalar_curvature": [at(scalar_curvature(ginv, gam), p) for p in pts],
        "laplacian_psi": [at(laplacian(ginv, gam, psi), p) for p in pts],
        "laplacian_r2": [at(laplacian(ginv, gam, r**2), p) for p in pts],
    }
    # conformal metric e^{2u} delta with u = 1/r
    u = 1 / r
    gam_c = christoffel(sp.exp(2 * u) * sp.eye(3), sp.exp(-2 * u) * sp.eye(3))
    p = (3, 0, 0)
    fixtures["conformal_exp2u_u_1_over_r"] = {
        "point": p,
        "christoffel": [[[at(gam_c[k][i][j], p) for j in range(3)] for i in range(3)] for k in range(3)],
    }
    # Reissner-Nordstrom slice m=2, q=1 and a dyonic one
    for label, (mm, qq) in {"rn_m2_q1": (2, 1), "rn_m3_q1_p2": (3, 5)}.items():
        grr = 1 / (1 - 2 * sp.Integer(mm) / r + sp.Integer(qq) / r**2)
        gr, gr_inv = radial(grr)
        gam_r = christoffel(gr, gr_inv)
        rpts = [(5, 0, 0), (3, 4, 12)] if mm == 2 else [(7, 0, 0), (2, 3, 6)]
        fixtures[label] = {
            "points": rpts,
            "scalar_curvature": [at(scalar_curvature(gr_inv, gam_r), q) for q in rpts],
        }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixtures, indent=1, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()

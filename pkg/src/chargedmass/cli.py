"""Command-line driver: read a run configuration, execute checks, write reports.

Usage::

    chargedmass run scene.toml [--out DIR] [--seed N] [--workers N]
    chargedmass --list-catalog
    chargedmass --schema

Exit status: 0 when every check ran and no theorem instance was flagged,
1 when some instance classified as hypotheses-hold-conclusion-fails, 2 for
an invalid configuration and 3 when a check failed numerically (the
partial report is still written).
"""

import argparse
import ast
import copy
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import catalog as cat
from .asymptotics import DEFAULT_LADDER, DEFAULT_ORDER, adm_mass, flux_charge
from .conformal import (
    ConformalTriple,
    eq2_residual,
    mass_additivity,
    mass_difference_identity,
    scalar_relation_residual,
    transform_residuals,
)
from .errors import ChargedMassError, ConfigError, ExpressionSyntaxError
from .expression import expression_parse, vector_parse
from .fields import DEFAULT_H_REL, MetricField, ScalarField, VectorField, decay_report
from .geometry import scalar_curvature
from .quadrature import SphereQuadrature
from .verdicts import (
    CONCLUSION_TOL,
    FLAG,
    MARGINAL_TOL,
    Region,
    boundary_condition_margin,
    dominant_charge_margin,
    scalar_field_theorem,
    theorem_electric,
    theorem_electromagnetic,
)

EXIT_OK, EXIT_FLAG, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULT_NUMERICS = {
    "radii": list(DEFAULT_LADDER),
    "quad": [32, 64],
    "angular": [32, 64],
    "bulk_quad": [8, 16],
    "radial_nodes": 12,
    "h_rel": DEFAULT_H_REL,
    "p": 1.0,
    "order": None,
    "marginal_tol": MARGINAL_TOL,
    "conclusion_tol": CONCLUSION_TOL,
    "residual_tol": 1e-5,
    "mass_tol": 1e-3,
    "seed": 0,
    "samples": 256,
    "region": None,
}
SCENE_KEYS = ("metric", "f", "E", "B", "phi")
OUTPUT_KEYS = {"dir": ".", "report": "report.json", "csv": True}

# check name -> allowed parameters with defaults
CHECKS = {
    "adm_mass": {"metric": "g", "measure": "euclidean"},
    "flux_charge": {"metric": "g", "field": "E"},
    "decay_report": {"tau": None},
    "scalar_curvature": {"points": None},
    "dominant_charge_margin": {"include_div": False, "include_B": False},
    "theorem_electric": {},
    "theorem_electromagnetic": {},
    "boundary_condition_margin": {"r0": None, "summed": False, "lambda0_source": "induced"},
    "scalar_field_theorem": {},
    "eq2_residual": {},
    "transform_residuals": {"convention": "contravariant"},
    "mass_additivity": {},
    "mass_difference_identity": {"r0": None, "tail": "fit"},
    "scalar_relation_residual": {},
}
METRIC_ROLES = ("g", "g_prime", "g_bar")
# scene fields each check cannot do without
REQUIRES = {
    "eq2_residual": ("f",),
    "transform_residuals": ("f", "E"),
    "mass_additivity": ("f",),
    "mass_difference_identity": ("f",),
    "scalar_field_theorem": ("phi",),
    "scalar_relation_residual": ("phi",),
}


# ----------------------------------------------------------------------------
# configuration


def load_config(path):
    """Read a TOML (or ``.json``) configuration file into a dict."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from exc
    if path.endswith(".json"):
        try:
            return json.loads(raw.decode("utf-8"))
        except ValueError as exc:
            raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        return tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid TOML: {exc}") from exc


def _reject_unknown(section, allowed, where):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")


def _number(value, key, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    if integer and int(value) != value:
        raise ConfigError(f"{key} must be an integer")
    return int(value) if integer else float(value)


def _pair(value, key):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{key} must be a list of two numbers")
    return value


def resolve_config(cfg, seed=None):
    """Validate ``cfg`` and return it with every default made explicit.

    The result is itself a valid configuration and resolving it again is a
    no-op, which is what makes the report's config echo re-runnable.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a table")
    _reject_unknown(cfg, ("scene", "numerics", "checks", "output"), "top level")
    scene = cfg.get("scene")
    if not isinstance(scene, dict) or "metric" not in scene:
        raise ConfigError("scene.metric is required")
    _reject_unknown(scene, SCENE_KEYS, "scene")

    num = dict(DEFAULT_NUMERICS)
    given = cfg.get("numerics", {})
    if not isinstance(given, dict):
        raise ConfigError("numerics must be a table")
    _reject_unknown(given, DEFAULT_NUMERICS, "numerics")
    num.update(given)
    if seed is not None:
        num["seed"] = seed
    radii = num["radii"]
    if not isinstance(radii, (list, tuple)) or len(radii) < 3:
        raise ConfigError("numerics.radii must list at least 3 radii")
    num["radii"] = [_number(r, "numerics.radii") for r in radii]
    if any(b <= a for a, b in zip(num["radii"], num["radii"][1:])):
        raise ConfigError("numerics.radii must be strictly increasing")
    for key in ("quad", "angular", "bulk_quad"):
        num[key] = [_number(v, f"numerics.{key}", integer=True) for v in _pair(num[key], f"numerics.{key}")]
    for key in ("h_rel", "marginal_tol", "conclusion_tol", "residual_tol", "mass_tol"):
        num[key] = _number(num[key], f"numerics.{key}")
    for key in ("radial_nodes", "seed", "samples"):
        num[key] = _number(num[key], f"numerics.{key}", integer=True)
    if num["seed"] < 0:
        raise ConfigError("numerics.seed must be nonnegative")
    if num["p"] != "auto":
        num["p"] = _number(num["p"], "numerics.p")
    if num["order"] is None:
        num["order"] = 1 if num["p"] == "auto" else min(DEFAULT_ORDER, len(num["radii"]) - 2)
    num["order"] = _number(num["order"], "numerics.order", integer=True)

    checks = cfg.get("checks")
    if not isinstance(checks, list) or not checks:
        raise ConfigError("checks must be a non-empty list")
    resolved_checks = []
    for k, chk in enumerate(checks):
        if isinstance(chk, str):
            chk = {"name": chk}
        if not isinstance(chk, dict) or "name" not in chk:
            raise ConfigError(f"checks[{k}] needs a name")
        name = chk["name"]
        if name not in CHECKS:
            raise ConfigError(f"unknown check {name!r} in checks[{k}].name")
        params = dict(CHECKS[name])
        _reject_unknown({key: v for key, v in chk.items() if key != "name"}, params, f"checks[{k}] ({name})")
        params.update({key: v for key, v in chk.items() if key != "name"})
        resolved_checks.append({"name": name, **params})

    out = dict(OUTPUT_KEYS)
    given_out = cfg.get("output", {})
    if not isinstance(given_out, dict):
        raise ConfigError("output must be a table")
    _reject_unknown(given_out, OUTPUT_KEYS, "output")
    out.update(given_out)

    resolved = {"scene": copy.deepcopy(scene), "numerics": num, "checks": resolved_checks, "output": out}
    scene_objs = build_scene(resolved["scene"])
    for k, chk in enumerate(resolved_checks):
        _check_requirements(k, chk, scene_objs)
    if num["region"] is None:
        r_in = max(2.0, scene_objs.r_min + 1.0)
        num["region"] = [r_in, max(50.0, 2.0 * r_in)]
    num["region"] = [_number(v, "numerics.region") for v in _pair(num["region"], "numerics.region")]
    return resolved, scene_objs


def _check_requirements(k, chk, scene):
    name = chk["name"]
    need = list(REQUIRES.get(name, ()))
    if chk.get("metric", "g") != "g":
        if chk["metric"] not in METRIC_ROLES:
            raise ConfigError(f"checks[{k}].metric must be one of {METRIC_ROLES}")
        need.append("f")
    if name == "flux_charge":
        if chk["field"] not in ("E", "B"):
            raise ConfigError(f"checks[{k}].field must be 'E' or 'B'")
        need.append(chk["field"])
    if name == "dominant_charge_margin" and chk["include_B"]:
        need.append("B")
    for what in need:
        if getattr(scene, what) is None:
            raise ConfigError(f"checks[{k}] ({name}) needs scene.{what}")


# ----------------------------------------------------------------------------
# scene


class Scene:
    def __init__(self, metric, entry=None, f=None, E=None, B=None, phi=None):
        self.metric = metric
        self.entry = entry
        self.f = f
        self.E = E
        self.B = B
        self.phi = phi

    @property
    def r_min(self):
        return max(
            [self.metric.r_min]
            + [x.r_min for x in (self.f, self.E, self.B, self.phi) if x is not None]
        )


def _catalog_call(text, table, key):
    """``name(k=v, ...)`` resolved against a catalog table, or None if not a catalog reference."""
    try:
        node = ast.parse(text.strip(), mode="eval").body
    except SyntaxError:
        return None
    if not (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in table):
        if isinstance(node, ast.Name) and node.id in table:
            node = ast.Call(func=node, args=[], keywords=[])
        else:
            return None
    try:
        args = [ast.literal_eval(a) for a in node.args]
        kwargs = {kw.arg: ast.literal_eval(kw.value) for kw in node.keywords}
    except ValueError as exc:
        raise ConfigError(f"{key}: catalog arguments must be numbers") from exc
    try:
        return table[node.func.id](*args, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"{key}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _expression(text, key, **kw):
    try:
        return expression_parse(text, **kw)
    except ExpressionSyntaxError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _scalar(spec, key):
    if spec is None:
        return None
    if isinstance(spec, bool):
        raise ConfigError(f"{key} must be an expression or catalog reference")
    if isinstance(spec, (int, float)):
        return ScalarField.constant(float(spec))
    if isinstance(spec, dict):
        _reject_unknown(spec, ("expr", "r_min", "decay"), key)
        if "expr" not in spec:
            raise ConfigError(f"{key}.expr is required")
        return _expression(spec["expr"], key, r_min=float(spec.get("r_min", 0.0)), decay=float(spec.get("decay", 1.0)))
    if not isinstance(spec, str):
        raise ConfigError(f"{key} must be an expression or catalog reference")
    found = _catalog_call(spec, cat.SCALARS, key)
    return found if found is not None else _expression(spec, key)


def _vector(spec, key, entry):
    if spec is None or spec == "none":
        return None
    if spec == "catalog":
        field = getattr(entry, key, None) if entry is not None else None
        if field is None:
            raise ConfigError(f"scene.{key}: the scene metric has no catalog {key} field")
        return field
    if isinstance(spec, list):
        try:
            return vector_parse([str(s) for s in spec])
        except (ExpressionSyntaxError, ValueError) as exc:
            raise ConfigError(f"scene.{key}: {exc}") from exc
    if isinstance(spec, str):
        found = _catalog_call(spec, cat.VECTORS, f"scene.{key}")
        if found is None:
            raise ConfigError(f"scene.{key}: unknown vector field {spec!r}")
        return found
    raise ConfigError(f"scene.{key} must be 'catalog', 'none', a catalog reference or three expressions")


def _metric(spec):
    if isinstance(spec, str):
        entry = _catalog_call(spec, cat.METRICS, "scene.metric")
        if entry is None:
            raise ConfigError(f"scene.metric: unknown catalog metric {spec!r}")
        return entry.metric, entry
    if isinstance(spec, dict):
        _reject_unknown(spec, ("components", "conformal_factor", "r_min", "decay"), "scene.metric")
        r_min = float(spec.get("r_min", 0.0))
        decay = float(spec.get("decay", 1.0))
        if ("components" in spec) == ("conformal_factor" in spec):
            raise ConfigError("scene.metric needs exactly one of components or conformal_factor")
        if "conformal_factor" in spec:
            factor = _expression(spec["conformal_factor"], "scene.metric.conformal_factor", r_min=r_min, decay=decay)
            return MetricField.conformally_flat(factor, name=spec["conformal_factor"] + "*delta"), None
        comps = spec["components"]
        if not isinstance(comps, list) or len(comps) != 6:
            raise ConfigError("scene.metric.components must list g11, g12, g13, g22, g23, g33")
        fields = tuple(
            _expression(str(c), f"scene.metric.components[{k}]", r_min=r_min, decay=decay) for k, c in enumerate(comps)
        )
        return MetricField(fields, r_min=r_min, decay=decay, name="expression metric"), None
    raise ConfigError("scene.metric must be a catalog reference or a table")


def build_scene(scene):
    metric, entry = _metric(scene["metric"])
    return Scene(
        metric,
        entry,
        f=_scalar(scene.get("f"), "scene.f"),
        E=_vector(scene.get("E"), "E", entry),
        B=_vector(scene.get("B"), "B", entry),
        phi=_scalar(scene.get("phi"), "scene.phi"),
    )


# ----------------------------------------------------------------------------
# checks


def _need(obj, what, check):
    if obj is None:
        raise ConfigError(f"check {check!r} needs scene.{what}")
    return obj


def _field_name(x):
    return None if x is None else (x.name or "")


def _metric_role(scene, role, check):
    if role not in METRIC_ROLES:
        raise ConfigError(f"check {check!r}: metric must be one of {METRIC_ROLES}")
    if role == "g":
        return scene.metric
    triple = ConformalTriple(scene.metric, _need(scene.f, "f", check), "e2f")
    return triple.g_prime if role == "g_prime" else triple.g_bar


def _residual_summary(values, tol):
    values = np.abs(np.asarray(values, dtype=float))
    worst = float(np.max(values))
    return {"max_abs_residual": worst, "tol": tol, "n_points": int(values.size)}, (
        "within-tolerance" if worst < tol else "exceeds-tolerance"
    )


def run_check(chk, scene, num, workers=1):
    """Execute one resolved check; returns ``(result dict, ladders, profiles)``."""
    name = chk["name"]
    quad = SphereQuadrature(*num["quad"])
    radii = num["radii"]
    region = Region(num["region"][0], num["region"][1], num["samples"], num["seed"])
    lim = {"p": num["p"], "order": num["order"], "workers": workers}
    tol, ctol, rtol = num["marginal_tol"], num["conclusion_tol"], num["residual_tol"]
    h = num["h_rel"]
    inputs = {"metric": scene.metric.name, "f": _field_name(scene.f), "E": _field_name(scene.E),
              "B": _field_name(scene.B), "phi": _field_name(scene.phi)}
    inputs = {k: v for k, v in inputs.items() if v is not None}
    result = {"check": name, "inputs": inputs, "parameters": {k: v for k, v in chk.items() if k != "name"}}
    ladders, profiles = [], []

    if name == "adm_mass":
        g = _metric_role(scene, chk["metric"], name)
        est = adm_mass(g, radii, quad, measure=chk["measure"], h_rel=h, **lim)
        result.update(estimates={"mass": est.as_dict()}, classification=None, diagnostics={})
        ladders.append(("mass", est))
    elif name == "flux_charge":
        g = _metric_role(scene, chk["metric"], name)
        if chk["field"] not in ("E", "B"):
            raise ConfigError("check 'flux_charge': field must be 'E' or 'B'")
        V = _need(getattr(scene, chk["field"]), chk["field"], name)
        est = flux_charge(g, V, radii, quad, **lim)
        result.update(estimates={"charge": est.as_dict()}, classification=None, diagnostics={})
        ladders.append(("charge_" + chk["field"], est))
    elif name == "decay_report":
        rep = decay_report(scene.metric, radii, tau=chk["tau"])
        result.update(
            estimates={"decay": {"tau": rep.tau, "rows": [list(r) for r in rep.rows()]}},
            classification="bounded" if rep.bounded else "unbounded",
            diagnostics={},
        )
    elif name == "scalar_curvature":
        pts = chk["points"] if chk["points"] is not None else [[r, 0.0, 0.0] for r in num["region"]]
        pts = np.asarray(pts, dtype=float)
        S = scalar_curvature(scene.metric, pts, h)
        result.update(
            estimates={"points": pts.tolist(), "scalar_curvature": np.atleast_1d(S).tolist()},
            classification=None,
            diagnostics={},
        )
    elif name == "dominant_charge_margin":
        B = _need(scene.B, "B", name) if chk["include_B"] else None
        rep = dominant_charge_margin(scene.metric, scene.E, region, include_div=chk["include_div"], B=B, tol=tol, h_rel=h)
        result.update(margins=rep.as_dict(), classification=rep.verdict, diagnostics={})
        profiles.append((rep.name, rep))
    elif name in ("theorem_electric", "theorem_electromagnetic", "scalar_field_theorem"):
        kw = {"tol": tol, "conclusion_tol": ctol, "h_rel": h, **lim}
        if name == "theorem_electric":
            rep = theorem_electric(scene.metric, scene.f, scene.E, region, radii, quad, **kw)
        elif name == "theorem_electromagnetic":
            rep = theorem_electromagnetic(scene.metric, scene.f, scene.E, scene.B, region, radii, quad, **kw)
        else:
            rep = scalar_field_theorem(scene.metric, _need(scene.phi, "phi", name), region, radii, quad, **kw)
        d = rep.as_dict()
        result.update(
            margins={"hypotheses": d["hypotheses"], "conclusion": d["conclusion_margin"],
                     "conclusion_tol": d["conclusion_tol"], "auxiliary": d["auxiliary"]},
            estimates=d["estimates"],
            classification=rep.classification,
            diagnostics=d["diagnostics"],
        )
        result["inputs"].update(rep.inputs)
        ladders.extend(rep.estimates.items())
        profiles.extend((c.name, c) for c in rep.hypotheses)
    elif name == "boundary_condition_margin":
        r0 = chk["r0"] if chk["r0"] is not None else num["region"][0]
        rep = boundary_condition_margin(
            scene.metric, scene.f, scene.E, float(r0), angular=tuple(num["angular"]),
            lambda0_source=chk["lambda0_source"], summed=bool(chk["summed"]), tol=tol, h_rel=h,
        )
        result.update(margins=rep.as_dict(), classification=rep.verdict, diagnostics={})
    elif name == "eq2_residual":
        res = eq2_residual(scene.metric, _need(scene.f, "f", name), region.points(), h)
        summary, cls = _residual_summary(res, rtol)
        result.update(margins=summary, classification=cls, diagnostics={"convention": "e2f", "region": region.as_dict()})
    elif name == "transform_residuals":
        E = _need(scene.E, "E", name)
        norm_res, div_res = transform_residuals(scene.metric, _need(scene.f, "f", name), E, region.points(), chk["convention"], h)
        s1, c1 = _residual_summary(norm_res, rtol)
        s2, c2 = _residual_summary(div_res, rtol)
        cls = "within-tolerance" if c1 == c2 == "within-tolerance" else "exceeds-tolerance"
        result.update(margins={"norm_law": s1, "divergence_law": s2}, classification=cls,
                      diagnostics={"convention": chk["convention"], "region": region.as_dict()})
    elif name == "mass_additivity":
        ma = mass_additivity(scene.metric, _need(scene.f, "f", name), radii, quad, h_rel=h, **lim)
        ests = {"m_g": ma.m_g, "m_g_prime": ma.m_g_prime, "m_g_bar": ma.m_g_bar}
        summary, cls = _residual_summary([ma.residual], num["mass_tol"])
        summary["residual"] = ma.residual
        result.update(estimates={k: v.as_dict() for k, v in ests.items()}, margins=summary, classification=cls,
                      diagnostics={"convention": "e2f"})
        ladders.extend(ests.items())
    elif name == "mass_difference_identity":
        r0 = chk["r0"] if chk["r0"] is not None else 0.5 * (scene.r_min + radii[0]) if scene.r_min > 0 else 1.0
        md = mass_difference_identity(
            scene.metric, _need(scene.f, "f", name), float(r0), radii, quad,
            bulk_quad=SphereQuadrature(*num["bulk_quad"]), radial_nodes=num["radial_nodes"], tail=chk["tail"],
            h_rel=h, **lim,
        )
        summary, cls = _residual_summary([md.residual], num["mass_tol"])
        summary.update(lhs=md.lhs, rhs=md.rhs, boundary_term=md.boundary_term, bulk_term=md.bulk_term, residual=md.residual)
        ests = {"m_g": md.m_g, "m_g_prime": md.m_g_prime, "bulk_integral": md.bulk}
        result.update(estimates={k: v.as_dict() for k, v in ests.items()}, margins=summary, classification=cls,
                      diagnostics={"convention": md.convention, "normal": md.normal_orientation, "tail": md.tail, "r0": float(r0)})
        ladders.extend(ests.items())
    elif name == "scalar_relation_residual":
        res = scalar_relation_residual(scene.metric, _need(scene.phi, "phi", name), region.points(), h)
        summary, cls = _residual_summary(res, rtol)
        result.update(margins=summary, classification=cls, diagnostics={"region": region.as_dict()})
    return result, ladders, profiles


# ----------------------------------------------------------------------------
# output


def _fmt_float(x):
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if all(c not in text for c in ".eninf"):
        text += ".0"
    return text


def dumps(obj, indent=2, _level=0):
    """JSON text with every float written to 17 significant digits (non-finite -> null)."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _ladder_rows(index, quantity, est):
    return [[index, quantity, r, v] for r, v in zip(est.radii, est.raw)]


def _profile_rows(index, condition, rep, bins=16):
    radii, margins = rep.sample_radii, rep.sample_margins
    if radii is None or radii.size == 0 or np.all(np.isnan(margins)):
        return []
    lo, hi = float(np.min(radii)), float(np.max(radii))
    edges = np.linspace(lo, hi, bins + 1)
    which = np.clip(np.searchsorted(edges, radii, side="right") - 1, 0, bins - 1)
    rows = []
    for b in range(bins):
        sel = (which == b) & ~np.isnan(margins)
        if np.any(sel):
            rows.append([index, condition, float(np.max(radii[sel])), float(np.min(margins[sel])), int(np.sum(sel))])
    return rows


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt_float(v) if isinstance(v, float) else v for v in row])


def report_schema():
    """JSON Schema of the report written by ``run``."""
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "chargedmass run report",
        "type": "object",
        "required": ["version", "config_echo", "results", "status"],
        "additionalProperties": False,
        "properties": {
            "version": {"type": "string"},
            "status": {"type": "integer", "enum": [EXIT_OK, EXIT_FLAG, EXIT_NUMERIC]},
            "config_echo": {
                "type": "object",
                "required": ["scene", "numerics", "checks"],
                "properties": {
                    "scene": {"type": "object"},
                    "numerics": {"type": "object"},
                    "checks": {"type": "array", "items": {"type": "object", "required": ["name"]}},
                },
            },
            "results": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["check", "inputs", "classification", "diagnostics"],
                    "properties": {
                        "check": {"type": "string", "enum": sorted(CHECKS)},
                        "inputs": {"type": "object"},
                        "parameters": {"type": "object"},
                        "margins": {"type": "object"},
                        "estimates": {"type": "object"},
                        "classification": {"type": ["string", "null"]},
                        "diagnostics": {"type": "object"},
                        "error": {"type": "string"},
                    },
                    "anyOf": [
                        {"required": ["margins"]},
                        {"required": ["estimates"]},
                        {"required": ["error"]},
                    ],
                },
            },
        },
    }


def execute(resolved, scene, workers=1):
    """Run every check; returns ``(report dict, ladder rows, profile rows, status)``."""
    num = resolved["numerics"]
    results, ladder_rows, profile_rows = [], [], []
    status = EXIT_OK
    for k, chk in enumerate(resolved["checks"]):
        try:
            res, ladders, profiles = run_check(chk, scene, num, workers)
        except ConfigError:
            raise
        except (ChargedMassError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            res = {
                "check": chk["name"],
                "inputs": {},
                "parameters": {key: v for key, v in chk.items() if key != "name"},
                "classification": "error",
                "error": f"{type(exc).__name__}: {exc}",
                "diagnostics": {},
            }
            ladders, profiles = [], []
            status = EXIT_NUMERIC
        if res.get("classification") == FLAG and status == EXIT_OK:
            status = EXIT_FLAG
        results.append(res)
        for quantity, est in ladders:
            ladder_rows.extend(_ladder_rows(k, quantity, est))
        for condition, rep in profiles:
            profile_rows.extend(_profile_rows(k, condition, rep))
    echo = {key: resolved[key] for key in ("scene", "numerics", "checks")}
    report = {"version": __version__, "status": status, "config_echo": echo, "results": results}
    return report, ladder_rows, profile_rows, status


def run(config, out=None, seed=None, workers=1):
    """Run a configuration (path or dict) and write the artifacts; returns the exit status."""
    cfg = load_config(config) if isinstance(config, str) else config
    resolved, scene = resolve_config(cfg, seed)
    report, ladder_rows, profile_rows, status = execute(resolved, scene, workers)
    outdir = out if out is not None else resolved["output"]["dir"]
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, resolved["output"]["report"]), "w") as fh:
        fh.write(dumps(report) + "\n")
    if resolved["output"]["csv"]:
        _write_csv(os.path.join(outdir, "ladder.csv"), ["check", "quantity", "radius", "value"], ladder_rows)
        _write_csv(
            os.path.join(outdir, "profiles.csv"), ["check", "condition", "radius", "min_margin", "samples"], profile_rows
        )
    return status


def build_parser():
    parser = argparse.ArgumentParser(prog="chargedmass", description=__doc__.splitlines()[0])
    parser.add_argument("--list-catalog", action="store_true", help="list catalog members and exit")
    parser.add_argument("--schema", action="store_true", help="print the report JSON schema and exit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")
    p_run = sub.add_parser("run", help="run the checks of a configuration file")
    p_run.add_argument("config", help="TOML (or .json) run configuration")
    p_run.add_argument("--out", help="output directory (overrides output.dir)")
    p_run.add_argument("--seed", type=int, help="sampling seed (overrides numerics.seed)")
    p_run.add_argument("--workers", type=int, default=1, help="threads for integrand evaluation")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_catalog:
        print("\n".join(cat.describe()))
        return EXIT_OK
    if args.schema:
        print(json.dumps(report_schema(), indent=2))
        return EXIT_OK
    if args.command != "run":
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None and args.seed < 0:
        print("config error: --seed must be nonnegative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        status = run(args.config, out=args.out, seed=args.seed, workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if status == EXIT_FLAG:
        print("FLAG: a theorem instance classified as hypotheses-hold-conclusion-fails", file=sys.stderr)
    elif status == EXIT_NUMERIC:
        print("numerical failure in at least one check; partial report written", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())

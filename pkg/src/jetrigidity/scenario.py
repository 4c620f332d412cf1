"""Scenario files: parsing, validation, builtin catalog and execution.

A scenario names a structure (explicit jets or a named generator), an optional
pipeline of correspondence steps and a list of checks.  ``expect`` is optional
on every check and step; without it the result is reported only.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any, Callable, Dict, List, Optional

import jsonschema

from . import cartan, correspond, geometries, rigidity
from .jetcore import DEFAULT_MAX_ORDER, JetError, JetPoly, MapJet, OrderError, jet_agree_up_to
from .structures import GeometricStructure, classify_lightlike, generalized_conformal_of
from .tensorjet import SymTensorJet, VectorFieldJet

SCENARIO_SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Malformed scenario file (with location information when available)."""


def _load_schema() -> dict:
    return json.loads(resources.files("jetrigidity").joinpath("schemas/scenario.schema.json").read_text())


SCHEMA = _load_schema()
_SCENARIO_VALIDATOR = jsonschema.Draft202012Validator({"$ref": "#/$defs/scenario", "$defs": SCHEMA["$defs"]})


# ---------------------------------------------------------------- generators

STRUCTURE_GENERATORS: Dict[str, Callable[..., GeometricStructure]] = {
    "heisenberg": lambda order: geometries.heisenberg(order),
    "dz_minus_xdy": lambda order: geometries.dz_minus_xdy(order),
    "flat": lambda order, n: geometries.flat(n, order),
    "degenerate_line": lambda order: geometries.degenerate_line(order),
    "conformal_lightlike": lambda order, n, slopes=None: geometries.conformal_lightlike(n, order, slopes),
    "lightcone": lambda order, n: geometries.lightcone(n, order),
    "singular_metric": lambda order, d, center=0: geometries.singular_metric(d, order, Fraction(str(center))),
    "framing_xd": lambda order, d: geometries.framing_xd(d, order),
}

MAP_GENERATORS: Dict[str, Callable[..., MapJet]] = {
    "identity": lambda order, n: MapJet.identity(n, order),
    "cubic": lambda order: geometries.cubic_map(order),
    "heisenberg_family": lambda order, m: geometries.heisenberg_family_map(m, order),
    "rotation": lambda order, c="3/5", s="4/5", n=3: geometries.rotation_map(order, Fraction(c), Fraction(s), n),
}

FRAME_GENERATORS: Dict[str, Callable[..., List[VectorFieldJet]]] = {
    "heisenberg_frame": lambda order: geometries.heisenberg_frame(order),
}


def _generate(table, spec: dict, order: int, what: str):
    name = spec["generator"]
    if name not in table:
        raise ScenarioError(f"unknown {what} generator {name!r}; known: {', '.join(sorted(table))}")
    params = {k: v for k, v in spec.items() if k != "generator"}
    try:
        return table[name](order, **params)
    except TypeError as exc:
        raise ScenarioError(f"bad parameters for {what} generator {name!r}: {exc}") from None


# ---------------------------------------------------------------- scenario object

@dataclass
class Scenario:
    name: str
    dim: Optional[int]
    order: Optional[int]
    structure_spec: Optional[dict]
    checks: List[dict]
    pipeline: List[dict] = field(default_factory=list)
    description: str = ""
    source: str = "<memory>"

    @classmethod
    def from_dict(cls, data: dict, source: str = "<memory>") -> "Scenario":
        _reject_floats(data, source)
        errors = sorted(_SCENARIO_VALIDATOR.iter_errors(data),
                        key=lambda e: list(e.absolute_path))
        if errors:
            e = errors[0]
            path = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in e.absolute_path) or "<root>"
            raise ScenarioError(f"{source}: {path}: {e.message}")
        sc = cls(data["name"], data.get("dim"), data.get("order"), data.get("structure"),
                 list(data.get("checks", [])), list(data.get("pipeline", [])), data.get("description", ""), source)
        if sc.structure_spec is not None and (sc.dim is None or sc.order is None):
            raise ScenarioError(f"{source}: scenario {sc.name!r} has a structure but no dim/order")
        return sc

    def to_dict(self) -> dict:
        """Canonical form: explicit jets re-serialized, generator specs kept verbatim."""
        d: Dict[str, Any] = {"name": self.name}
        if self.description:
            d["description"] = self.description
        if self.dim is not None:
            d["dim"] = self.dim
        if self.order is not None:
            d["order"] = self.order
        if self.structure_spec is not None:
            d["structure"] = (copy.deepcopy(self.structure_spec) if "generator" in self.structure_spec
                              else self.build_structure().to_dict())
        if self.pipeline:
            d["pipeline"] = copy.deepcopy(self.pipeline)
        d["checks"] = copy.deepcopy(self.checks)
        return d

    def build_structure(self) -> Optional[GeometricStructure]:
        if self.structure_spec is None:
            return None
        spec = self.structure_spec
        if "generator" in spec:
            s = _generate(STRUCTURE_GENERATORS, spec, self.order, "structure")
            if s.dim != self.dim:
                raise ScenarioError(f"{self.source}: generator gives dimension {s.dim}, scenario says {self.dim}")
            return s
        return GeometricStructure.from_dict(spec, self.dim, self.order)

    def required_order(self, check: dict) -> int:
        op = check["op"]
        if op == "subrigidity":
            return check["ks"]
        if op in ("killing_dims", "iso_jet_dims", "lorentz_span"):
            ks = check.get("ks") or list(range(1, check.get("kmax", 1) + 1))
            return max(ks) + check.get("depth", 4 if op == "iso_jet_dims" else 0)
        if op in ("map_isometry", "pipeline_coherence"):
            return max(check.get("k", 1), check.get("k_from", 1)) - 1
        return 0

    @staticmethod
    def max_check_order(check: dict) -> int:
        """Largest jet order a check asks for (compared with ``--max-order``)."""
        vals = []
        for key in ("k", "ks", "kmax", "k_from"):
            v = check.get(key)
            vals += v if isinstance(v, list) else [v] if isinstance(v, int) else []
        return max(vals + [0])


def _reject_floats(obj, source: str, path: str = ""):
    if isinstance(obj, float):
        raise ScenarioError(f"{source}: {path or '<root>'}: float {obj!r} refused; use a rational string like \"3/2\"")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _reject_floats(v, source, f"{path}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _reject_floats(v, source, f"{path}[{i}]")


def parse_text(text: str, source: str = "<memory>") -> List[Scenario]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    items = data["scenarios"] if isinstance(data, dict) and "scenarios" in data else [data]
    if not isinstance(items, list):
        raise ScenarioError(f"{source}: 'scenarios' must be a list")
    return [Scenario.from_dict(it, source) for it in items]


def parse_file(path: str) -> List[Scenario]:
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read(), path)


# ---------------------------------------------------------------- builtins

def _builtin_files():
    root = resources.files("jetrigidity").joinpath("scenarios")
    return sorted((p for p in root.iterdir() if p.name.endswith(".json")), key=lambda p: p.name)


def builtin_catalog() -> Dict[str, dict]:
    """Builtin name -> {description, scenarios}; sorted by name."""
    out = {}
    for p in _builtin_files():
        data = json.loads(p.read_text())
        name = p.name[:-5]
        scen = parse_text(p.read_text(), f"builtin:{name}")
        out[name] = {"description": data.get("description", scen[0].description),
                     "scenarios": [s.name for s in scen]}
    return dict(sorted(out.items()))


def load_builtin(name: str) -> List[Scenario]:
    for p in _builtin_files():
        if p.name[:-5] == name:
            return parse_text(p.read_text(), f"builtin:{name}")
    raise ScenarioError(f"unknown builtin {name!r}; run `jetrigidity list`")


def builtin_text(name: str) -> str:
    for p in _builtin_files():
        if p.name[:-5] == name:
            return p.read_text()
    raise ScenarioError(f"unknown builtin {name!r}")


# ---------------------------------------------------------------- execution

def _poly(data, dim, order) -> JetPoly:
    return JetPoly.from_dict(data, dim, order)


def _map(spec, dim, order) -> MapJet:
    if isinstance(spec, dict):
        return _generate(MAP_GENERATORS, spec, order, "map")
    return MapJet([_poly(c, dim, order) for c in spec])


def _frame(spec, dim, order) -> List[VectorFieldJet]:
    if isinstance(spec, dict):
        return _generate(FRAME_GENERATORS, spec, order, "frame")
    return [VectorFieldJet.from_dict(X, dim, order) for X in spec]


_MISSING = object()


def _outcome(expected, actual) -> str:
    if expected is _MISSING:
        return "report"
    return "pass" if expected == actual else "fail"


def _canon_poly(d: dict, dim: int, order: int) -> dict:
    return JetPoly.from_dict(d, dim, order).to_dict()


class _Runner:
    def __init__(self, sc: Scenario, max_order: int, emit_witnesses: bool):
        self.sc = sc
        self.max_order = max_order
        self.emit = emit_witnesses
        self.sigma = sc.build_structure()
        self.ctx: Dict[str, Any] = {}

    # -- structure checks
    def subrigidity(self, c):
        v = rigidity.subrigidity_infinitesimal(self.sigma, c["ks"], c["k"])
        res = v.to_dict(with_witness=self.emit)
        if v.witness is not None:
            res["witness_rechecked"] = rigidity.is_killing(self.sigma, v.witness)
            res["witness_order"] = v.witness.order
        return res, v.holds

    def map_isometry(self, c):
        f = _map(c["map"], self.sigma.dim, self.sc.order)
        chk = rigidity.check_map_isometry_jet(f, self.sigma, c["k"])
        res = chk.to_dict()
        agree = {}
        for j in c.get("jet_identity_orders", []):
            agree[str(j)] = jet_agree_up_to(f, MapJet.identity(f.source_dim, f.order), j)
        if agree:
            res["jet_equals_identity"] = agree
        return res, chk.verdict

    def max_isometry_order(self, c):
        f = _map(c["map"], self.sigma.dim, self.sc.order)
        j = rigidity.max_isometry_order(f, self.sigma)
        return {"max_order": j}, j

    def killing_dims(self, c):
        depth = c.get("depth", 0)
        ks = c.get("ks") or list(range(1, c["kmax"] + 1))
        dims, filt = {}, {}
        for k in ks:
            sp = rigidity.killing_jets(self.sigma, k, depth)
            dims[str(k)] = sp.dim
            filt[str(k)] = {str(j): v for j, v in sorted(sp.filtered_dims.items())}
        return {"depth": depth, "dims": dims, "filtered": filt}, [dims[str(k)] for k in ks]

    def iso_jet_dims(self, c):
        depth = c.get("depth", rigidity.DEFAULT_DEPTH)
        t = rigidity.iso_jet_dims(self.sigma, c["kmax"], depth)
        d = t.to_dict()
        actual = [t.dims[k] for k in sorted(t.dims)]
        if "expect_trend" in c:
            d["trend_expected"] = c["expect_trend"]
            d["trend_outcome"] = "pass" if c["expect_trend"] == t.trend else "fail"
        return d, actual

    def classify(self, c):
        cl = classify_lightlike(self.sigma.g)
        return cl.to_dict(), cl.tag

    def generalized_conformal(self, c):
        gc = generalized_conformal_of(self.sigma.g)
        return {"shape": gc.shape()}, gc.shape()

    def lorentz_span(self, c):
        n = self.sigma.dim
        depth = c.get("depth", 0)
        per = {}
        ok = True
        fields = geometries.lorentz_fields(n, self.sc.order)
        for k in c["ks"]:
            sp = rigidity.killing_jets(self.sigma, k, depth)
            lor = [X.truncate(k) for X in fields]
            contained = all(sp.contains(X) for X in lor)
            span = len(rigidity.linalg.canonical_basis([rigidity._field_to_vec(X, k) for X in lor]))
            per[str(k)] = {"killing_dim": sp.dim, "lorentz_span_dim": span, "lorentz_inside": contained,
                           "exhausts": contained and span == sp.dim}
            ok = ok and contained and span == sp.dim
        return {"depth": depth, "per_order": per, "algebra_dim": len(fields)}, ok

    def pipeline_coherence(self, c):
        hbar = self.ctx.get("hbar")
        if hbar is None:
            raise ScenarioError("pipeline_coherence needs an 'extend' pipeline step")
        hb = GeometricStructure.riemannian(hbar)
        rows, ok = [], True
        for i, spec in enumerate(c["maps"]):
            f = _map(spec, self.sigma.dim, self.sc.order)
            a = rigidity.check_map_isometry_jet(f, self.sigma, c["k_from"]).verdict
            b = rigidity.check_map_isometry_jet(f, hb, c["k_to"]).verdict if a else None
            rows.append({"map": i, "source_verdict": a, "hbar_verdict": b})
            ok = ok and (not a or b)
        return {"k_from": c["k_from"], "k_to": c["k_to"], "maps": rows}, ok

    # -- algebra checks
    def prolongation(self, c):
        h = cartan.named_algebra(c["algebra"]) if isinstance(c["algebra"], str) else \
            cartan.MatrixAlgebra.from_matrices(c["algebra"])
        dims, verified = [], True
        for k in range(1, c["kmax"] + 1):
            sp = cartan.prolongation(h, k)
            dims.append(sp.dim)
            verified = verified and sp.verify()
        return {"algebra": h.name or "custom", "dims": dims, "basis_rechecked": verified,
                "closed_under_bracket": h.is_closed()}, dims

    def finite_type(self, c):
        h = cartan.named_algebra(c["algebra"])
        t = cartan.finite_type_order(h, c["kmax"])
        return {"algebra": h.name, "finite_type_order": t}, t

    def duality(self, c):
        a, b = (cartan.named_algebra(x) for x in c["algebras"])
        da = [cartan.prolongation(a, k).dim for k in range(1, c["kmax"] + 1)]
        db = [cartan.prolongation(b, k).dim for k in range(1, c["kmax"] + 1)]
        dual = cartan.prolongation_dims(cartan.dual_algebra(a), c["kmax"])
        return {"algebras": c["algebras"], "dims": {a.name: da, b.name: db},
                "dims_of_minus_transpose": [dual[k] for k in sorted(dual)]}, da == db

    # -- pipeline
    def run_step(self, st):
        step = st["step"]
        s = self.sigma
        if step == "normalize":
            frame = _frame(st["frame"], s.dim, self.sc.order)
            self.ctx["frame"] = frame
            pipe = correspond.contact_to_riemannian(s.omega, s.H, frame, audit_dependencies=True)
            self.ctx.update(nd=pipe.normalized, pipe=pipe)
            return {"f": pipe.normalized.f.to_dict(), "order": pipe.normalized.f.order}, pipe.normalized.f.to_dict()
        if step == "reeb":
            R = self.ctx["pipe"].reeb
            self.ctx["reeb"] = R
            return {"reeb": R.to_dict(), "order": R.order}, R.to_dict()
        if step == "extend":
            pipe = self.ctx["pipe"]
            self.ctx["hbar"] = pipe.hbar
            return {"hbar": pipe.hbar.to_dict("h"), "order": pipe.hbar.order, "order_audit": pipe.audit}, \
                pipe.hbar.to_dict("h")
        if step == "quotient":
            data = correspond.conformal_quotient(s.g)
            self.ctx["quotient"] = data
            return data.to_dict(), data.c.to_dict()
        if step == "lift":
            data = self.ctx.get("quotient")
            if data is None:
                raise ScenarioError("'lift' needs a preceding 'quotient' step")
            nq = data.base_dim
            psi = _map(st["psi"], nq, self.sc.order)
            f = _poly(st["f"], nq, self.sc.order)
            lift = correspond.isometric_lift(psi, f, data)
            return lift.to_dict(), lift.delta.to_dict()
        raise ScenarioError(f"unknown pipeline step {step!r}")

    def expected_for_step(self, st):
        exp = st.get("expect", _MISSING)
        if exp is _MISSING:
            return _MISSING
        s = self.sigma
        step = st["step"]
        if step in ("normalize", "quotient"):
            return _canon_poly(exp, s.dim, self.sc.order)
        if step == "lift":
            return _canon_poly(exp, s.dim, self.sc.order)
        if step == "reeb":
            return VectorFieldJet.from_dict(exp, s.dim, self.sc.order).to_dict()
        if step == "extend":
            return SymTensorJet.from_dict(exp, s.dim, self.sc.order).to_dict("h")
        return exp


_OPS = {"subrigidity", "map_isometry", "max_isometry_order", "killing_dims", "iso_jet_dims", "classify",
        "generalized_conformal", "lorentz_span", "pipeline_coherence", "prolongation", "finite_type", "duality"}
_NEEDS_STRUCTURE = _OPS - {"prolongation", "finite_type", "duality"}


def run_scenario(sc: Scenario, max_order: int = DEFAULT_MAX_ORDER, emit_witnesses: bool = False) -> dict:
    """Execute one scenario; never raises for per-check failures (they become 'error' rows)."""
    out: Dict[str, Any] = {"name": sc.name, "source": sc.source}
    if sc.description:
        out["description"] = sc.description
    try:
        runner = _Runner(sc, max_order, emit_witnesses)
    except (JetError, ScenarioError, ValueError) as exc:
        out.update(status="error", error=f"{type(exc).__name__}: {exc}", steps=[], checks=[])
        return out
    if runner.sigma is not None:
        out["structure"] = {"kind": runner.sigma.kind, "dim": runner.sigma.dim, "order": runner.sigma.order}
    steps = []
    for i, st in enumerate(sc.pipeline):
        row: Dict[str, Any] = {"step": st["step"], "index": i}
        try:
            res, actual = runner.run_step(st)
            expected = runner.expected_for_step(st)
            row.update(result=res, outcome=_outcome(expected, actual))
            if "expect" in st:
                row["expected"] = st["expect"]
        except (JetError, ScenarioError, ValueError, KeyError) as exc:
            row.update(outcome="error", error=f"{type(exc).__name__}: {exc}")
        steps.append(row)
    checks = []
    for i, c in enumerate(sc.checks):
        op = c["op"]
        row = {"op": op, "index": i, "params": {k: v for k, v in c.items() if k not in ("op", "expect", "note")}}
        if "note" in c:
            row["note"] = c["note"]
        try:
            if op not in _OPS:
                raise ScenarioError(f"unknown check op {op!r}")
            if op in _NEEDS_STRUCTURE and runner.sigma is None:
                raise ScenarioError(f"check #{i} ({op}) needs a structure")
            top = sc.max_check_order(c)
            if top > max_order:
                raise OrderError(f"check #{i} ({op}) asks for order {top} > --max-order {max_order}")
            if op in _NEEDS_STRUCTURE:
                need = sc.required_order(c)
                if need > sc.order:
                    raise OrderError(f"check #{i} ({op}) needs structure order {need}, scenario has {sc.order}")
            res, actual = getattr(runner, op)(c)
            outcome = _outcome(c.get("expect", _MISSING), actual)
            if outcome == "pass" and res.get("trend_outcome") == "fail":
                outcome = "fail"
            row.update(result=res, outcome=outcome)
            if "expect" in c:
                row["expected"] = c["expect"]
        except (JetError, ScenarioError, ValueError, KeyError) as exc:
            row.update(outcome="error", error=f"{type(exc).__name__}: {exc}")
        checks.append(row)
    rows = steps + checks
    if any(r["outcome"] == "error" for r in rows):
        status = "error"
    elif any(r["outcome"] == "fail" for r in rows):
        status = "fail"
    elif any(r["outcome"] == "pass" for r in rows):
        status = "pass"
    else:
        status = "report"
    out.update(status=status, steps=steps, checks=checks)
    return out

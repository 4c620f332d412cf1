"""The eleven acceptance criteria, each checked exactly and logged as one pass/fail line.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.  Criteria whose claim does not survive
exact computation are still implemented at full strength; they fail and the
detail string records the numbers.
"""
from __future__ import annotations

import os
import random
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import acceptance_log  # noqa: E402
import oracles  # noqa: E402
import randjets  # noqa: E402
from jetrigidity import cartan, geometries  # noqa: E402
from jetrigidity.correspond import conformal_quotient, contact_to_riemannian, isometric_lift  # noqa: E402
from jetrigidity.jetcore import JetPoly, MapJet, mapjet_compose, mapjet_inverse, variables  # noqa: E402
from jetrigidity.linalg import canonical_basis  # noqa: E402
from jetrigidity.rigidity import (  # noqa: E402
    DEFAULT_DEPTH,
    _field_to_vec,
    check_map_isometry_jet,
    iso_jet_dims,
    killing_jets,
    subrigidity_infinitesimal,
)
from jetrigidity.scenario import load_builtin  # noqa: E402
from jetrigidity.structures import GeometricStructure, classify_lightlike  # noqa: E402
from jetrigidity.tensorjet import (  # noqa: E402
    SymTensorJet,
    VectorFieldJet,
    exterior_derivative,
    from_quadratic_form,
    interior_product,
    lie_bracket,
    lie_derivative,
    pullback_tensor,
    sym_product,
    wedge,
)

HALF = Fraction(1, 2)
CASES = 1000


def const(n, m, v):
    return JetPoly.constant(n, m, v)


def same(a, b) -> bool:
    """Equality of two jets on their common order."""
    m = min(a.order, b.order)
    return (a - b).truncate(m).is_zero()


def same_map(f: MapJet, g: MapJet) -> bool:
    return all(same(a, b) for a, b in zip(f.components, g.components))


# ---------------------------------------------------------------- criteria

def criterion_1():
    v = subrigidity_infinitesimal(geometries.heisenberg(4), 4, 1)
    return v.holds, f"(4,1) holds={v.holds} audit={v.dims_audit}"


def criterion_2():
    sigma = geometries.dz_minus_xdy(4)
    f = geometries.cubic_map(4)
    chk = check_map_isometry_jet(f, sigma, 3)
    ident = MapJet.identity(3, 4)
    jet1_id = all((a - b).truncate(1).is_zero() for a, b in zip(f.components, ident.components))
    jet2_id = all((a - b).truncate(2).is_zero() for a, b in zip(f.components, ident.components))
    v = subrigidity_infinitesimal(dz := geometries.dz_minus_xdy(3), 3, 1)
    witness = v.witness.to_dict() if v.witness is not None else None
    # the witness must be a genuine Killing 3-jet with zero 1-jet and non-zero 2-jet
    sound = witness is not None and killing_jets(dz, 3).contains(v.witness) \
        and v.witness.truncate(1).is_zero() and not v.witness.truncate(2).is_zero()
    ok = chk.verdict and jet1_id and not jet2_id and not v.holds and sound
    return ok, (f"Iso^3={chk.verdict} jet1=id:{jet1_id} jet2=id:{jet2_id} "
                f"(3,1) holds={v.holds} witness={witness}")


def criterion_3():
    g = geometries.conformal_lightlike(4, 3)
    v = subrigidity_infinitesimal(g, 3, 1)
    cls = classify_lightlike(g.g)
    tag = cls.to_dict()["class"]
    ok = v.holds and tag == "transversally_conformal_generic"
    return ok, f"(3,1) holds={v.holds} class={tag}"


def criterion_4():
    dims = {k: killing_jets(geometries.degenerate_line(k), k).dim for k in range(1, 6)}
    closed = {k: 1 + (k + 1) * (k + 2) // 2 for k in range(1, 6)}
    held = [(ks, k) for ks in range(1, 6) for k in range(0, ks)
            if subrigidity_infinitesimal(geometries.degenerate_line(ks), ks, k).holds]
    n_tests = sum(ks for ks in range(1, 6))
    ok = dims == closed and not held
    return ok, f"dims={list(dims.values())} closed form={list(closed.values())} " \
               f"sub-rigid pairs {len(held)}/{n_tests}"


def _hand_hbar(order):
    """dx^2 + dy^2 + (dz + x dy - y dx)^2 / 4, expanded by hand."""
    x, y, _ = variables(3, order)
    q = Fraction(1, 4)
    one = const(3, order, 1)
    return SymTensorJet.from_matrix([
        [one + (y * y).scale(q), (x * y).scale(-q), y.scale(-q)],
        [(x * y).scale(-q), one + (x * x).scale(q), x.scale(q)],
        [y.scale(-q), x.scale(q), const(3, order, q)],
    ])


def _coherence_maps(order, rng):
    """Candidate map jets fixing 0: exact symmetries, their perturbations and a few non-isometries."""
    x, y, z = variables(3, order)
    maps = [MapJet.identity(3, order), MapJet([x, -y, -z]), MapJet([-x, y, -z]),
            geometries.cubic_map(order), MapJet([x.scale(2), y.scale(2), z.scale(4)])]
    for c, s in [(Fraction(3, 5), Fraction(4, 5)), (Fraction(5, 13), Fraction(-12, 13)), (0, 1)]:
        maps.append(geometries.rotation_map(order, c, s))
    for m in range(3, order + 1):
        maps.append(geometries.heisenberg_family_map(m, order))
    exact = maps[:3] + maps[5:8]
    for _ in range(24):
        base = rng.choice(exact)
        bump = MapJet([p + randjets.poly(rng, 3, order, 2, min_degree=rng.choice([4, 5, 6]))
                       for p in variables(3, order)])
        maps.append(mapjet_compose(base, bump))
    return maps


def criterion_5():
    m = 6
    s = geometries.heisenberg(m)
    pipe = contact_to_riemannian(s.omega, s.H, geometries.heisenberg_frame(m))
    f_ok = pipe.normalized.f == const(3, pipe.normalized.f.order, HALF)
    R_ok = pipe.reeb == VectorFieldJet.coordinate(3, pipe.reeb.order, 2, 2)
    h_ok = pipe.hbar == _hand_hbar(pipe.hbar.order)
    s3 = geometries.heisenberg(3)
    audit = contact_to_riemannian(s3.omega, s3.H, geometries.heisenberg_frame(3), audit_dependencies=True)
    audit_ok = audit.hbar.order == 1 and audit.audit["independent_of_higher_input"]
    hb = GeometricStructure.riemannian(pipe.hbar)
    rng = random.Random(5)
    n_iso = n_bad = 0
    for f in _coherence_maps(m, rng):
        if check_map_isometry_jet(f, s, 4).verdict:
            n_iso += 1
            if not check_map_isometry_jet(f, hb, 2).verdict:
                n_bad += 1
    ok = f_ok and R_ok and h_ok and audit_ok and n_iso >= 20 and n_bad == 0
    return ok, (f"f=1/2:{f_ok} R=2d/dz:{R_ok} hbar=hand:{h_ok} audit 3->{audit.hbar.order} "
                f"coherent {n_iso - n_bad}/{n_iso} Iso^4 maps")


def criterion_6():
    o3 = cartan.finite_type_order(cartan.orthogonal(3), 5)
    co3 = cartan.finite_type_order(cartan.conformal(3), 5)
    sub = cartan.prolongation_dims(cartan.subriemannian(3), 5)
    light = cartan.prolongation_dims(cartan.lightlike(3), 5)
    positive = all(v > 0 for v in list(sub.values()) + list(light.values()))
    dual = list(sub.values()) == list(light.values())
    ok = o3 == 1 and co3 == 2 and positive and dual
    return ok, (f"type o(3)={o3} co(3)={co3} sub={list(sub.values())} light={list(light.values())} "
                f"all>0:{positive} level-by-level equal:{dual}")


def criterion_7():
    parts, ok = [], True
    for d in (1, 3):
        strong = subrigidity_infinitesimal(geometries.framing_xd(d, d + 2), d + 2, 1)
        weak = subrigidity_infinitesimal(geometries.framing_xd(d, d + 1), d + 1, 1)
        parts.append(f"d={d}: ({d + 2},1)={strong.holds} ({d + 1},1)={weak.holds}")
        ok = ok and strong.holds
    v = subrigidity_infinitesimal(geometries.framing_xd(2, 4), 4, 1)
    x = variables(1, 4)[0]
    w = v.witness
    is_x2 = w is not None and w.truncate(2) == VectorFieldJet([(x * x).truncate(2)]).scale(w[0].coeff((2,)))
    sc = next(s for s in load_builtin("framing-xd") if s.name == "framing-xd-d2")
    claim = [c for c in sc.checks if c["op"] == "subrigidity" and c["ks"] == 4 and c["k"] == 1]
    report_only = bool(claim) and all("expect" not in c and "report only" in c.get("note", "") for c in claim)
    parts.append(f"d=2: (4,1)={v.holds} witness 2-jet ~ x^2 d/dx:{is_x2} scenario report-only:{report_only}")
    ok = ok and not v.holds and is_x2 and report_only
    return ok, "; ".join(parts)


def criterion_8():
    n = 3
    rows, ok = [], True
    for k in (2, 3, 4):
        space = killing_jets(geometries.lightcone(n, k + DEFAULT_DEPTH), k, DEFAULT_DEPTH)
        lor = [X.truncate(k) for X in geometries.lorentz_fields(n, k + DEFAULT_DEPTH)]
        inside = all(space.contains(X) for X in lor)
        span = len(canonical_basis([_field_to_vec(X, k) for X in lor]))
        rows.append(f"k={k}: span {span}/{space.dim} inside={inside}")
        ok = ok and inside and span == space.dim == 6
    return ok, "; ".join(rows)


def criterion_9():
    parts, ok = [], True
    for d in (1, 2):
        kmax = 2 * d + 2
        at0 = iso_jet_dims(geometries.singular_metric(d, kmax + DEFAULT_DEPTH), kmax).dims
        at1 = iso_jet_dims(geometries.singular_metric(d, kmax + DEFAULT_DEPTH, center=1), kmax).dims
        z = all(at0[k] == 0 for k in range(2 * d + 1, kmax + 1))
        o = all(at1[k] == 1 for k in range(1, kmax + 1))
        parts.append(f"d={d}: center0 {dict(at0)} center1 {dict(at1)}")
        ok = ok and z and o
    return ok, "; ".join(parts)


def criterion_10():
    m, n = 5, 3
    r = variables(n, m)[2]
    g = from_quadratic_form(n, m, {(0, 0): const(n, m, 1) + r, (1, 1): const(n, m, 1) + r})
    data = conformal_quotient(g)
    q = variables(2, m)
    lift = isometric_lift(MapJet([q[0].scale(2), q[1].scale(2)]), const(2, m, 4), data)
    want = (variables(3, lift.delta.order)[2] - 3).scale(Fraction(1, 4))
    delta_ok = lift.delta == want
    full = lift.phi.order - 1
    # independent recheck in sympy: g is polynomial, so pull it back by the full map (2q, delta)
    xs = oracles.syms(n)
    G = oracles.metric_matrix(g)
    F = [2 * xs[0], 2 * xs[1], oracles.to_expr(lift.delta, xs)]
    resid = (oracles.pullback_metric(G, F, xs) - G).applyfunc(lambda e: oracles.truncate(e, xs, m))
    pb_ok = lift.pullback_verified_to == full and resid.is_zero_matrix
    return delta_ok and pb_ok, (f"delta={lift.delta.to_dict()} engine pullback verified to order "
                                f"{lift.pullback_verified_to}/{full}, sympy residual zero to order {m}: "
                                f"{resid.is_zero_matrix}")


# -- criterion 11: seeded randomized identities

def _ring(rng):
    n, m = rng.choice([1, 2, 3]), rng.choice([2, 3, 4])
    a, b, c = (randjets.poly(rng, n, m) for _ in range(3))
    return (a * b) * c == a * (b * c) and a * (b + c) == a * b + a * c and a * b == b * a \
        and (a * b).truncate(m - 1) == a.truncate(m - 1) * b.truncate(m - 1)


def _wedge(rng):
    n, m = rng.choice([2, 3, 4]), rng.choice([2, 3])
    p, q = rng.randint(0, n), rng.randint(0, n)
    a, b = randjets.form(rng, n, p, m), randjets.form(rng, n, q, m)
    ab = wedge(a, b)
    comm = same(ab, wedge(b, a).scale((-1) ** (p * q)))
    lhs = exterior_derivative(ab)
    rhs = wedge(exterior_derivative(a), b) + wedge(a, exterior_derivative(b)).scale((-1) ** p)
    dd = exterior_derivative(exterior_derivative(a)).is_zero() if p + 2 <= n and m >= 2 else True
    sq = wedge(a, a).is_zero() if p % 2 else True
    return comm and same(lhs, rhs) and dd and sq


def _lie(rng):
    n, m = rng.choice([2, 3]), rng.choice([3, 4])
    X, Y, Z = (randjets.field(rng, n, m) for _ in range(3))
    jac = lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X)) + lie_bracket(Z, lie_bracket(X, Y))
    anti = same(lie_bracket(X, Y), lie_bracket(Y, X).scale(-1))
    p = rng.randint(1, n - 1)
    a, b = randjets.form(rng, n, p, m), randjets.form(rng, n, 1, m)
    cartan_ok = same(lie_derivative(X, a),
                     interior_product(X, exterior_derivative(a)) + exterior_derivative(interior_product(X, a)))
    deriv = same(lie_derivative(X, wedge(a, b)), wedge(lie_derivative(X, a), b) + wedge(a, lie_derivative(X, b)))
    h = randjets.poly(rng, n, m)
    commutator = same(lie_bracket(X, Y).apply(h), X.apply(Y.apply(h)) - Y.apply(X.apply(h)))
    return jac.is_zero() and anti and cartan_ok and deriv and commutator


def _functorial(rng):
    n, m = rng.choice([(2, 3), (2, 4), (3, 3)])
    f, g = randjets.diffeo(rng, n, m), randjets.diffeo(rng, n, m)
    T = randjets.sym(rng, n, m) if rng.random() < 0.5 else randjets.form(rng, n, rng.randint(0, n), m)
    return same(pullback_tensor(mapjet_compose(f, g), T), pullback_tensor(g, pullback_tensor(f, T))) \
        and same(pullback_tensor(MapJet.identity(n, m), T), T)


def _compose_inverse(rng):
    n, m = rng.choice([(1, 4), (1, 5), (2, 3), (2, 4), (3, 2), (3, 3)])
    f, g = randjets.diffeo(rng, n, m), randjets.diffeo(rng, n, m)
    fi = mapjet_inverse(f)
    ident = MapJet.identity(n, m)
    return same_map(mapjet_compose(f, fi), ident) and same_map(mapjet_compose(fi, f), ident) \
        and same_map(mapjet_inverse(mapjet_compose(f, g)), mapjet_compose(mapjet_inverse(g), fi))


def _gauge(rng, i):
    """Random gauge (u omega, H + omega . beta) must not change a sub-Riemannian verdict."""
    heis = i % 2 == 0
    ks = 4 if heis else 3
    sigma = geometries.heisenberg(ks) if heis else geometries.dz_minus_xdy(ks)
    u = randjets.unit(rng, 3, ks)
    beta = randjets.form(rng, 3, 1, ks, terms=2)
    omega = sigma.omega.scale(u)
    moved = GeometricStructure.subriemannian(omega, sigma.H + sym_product(omega, beta))
    return subrigidity_infinitesimal(moved, ks, 1).holds == heis


PROPERTIES = [
    ("ring identities", _ring),
    ("wedge and d identities", _wedge),
    ("Lie identities", _lie),
    ("pullback functoriality", _functorial),
    ("compose/inverse round trips", _compose_inverse),
    ("gauge invariance of sub-Riemannian verdicts", None),
]


def criterion_11():
    parts, ok = [], True
    for idx, (name, fn) in enumerate(PROPERTIES):
        rng = random.Random(1000 + idx)
        fails = 0
        for i in range(CASES):
            good = _gauge(rng, i) if fn is None else fn(rng)
            fails += not good
        parts.append(f"{name}: {fails}/{CASES} failures")
        ok = ok and fails == 0
    return ok, "; ".join(parts)


CRITERIA = {
    1: ("Heisenberg is (4,1)-sub-rigid", criterion_1),
    2: ("cubic map in Iso^3 for dz - x dy, (3,1) fails with witness", criterion_2),
    3: ("(1+r)dq^2 on R^4 is (3,1)-sub-rigid, transversally conformal generic", criterion_3),
    4: ("dx^2 on R^2: closed-form dims, no sub-rigidity up to order 5", criterion_4),
    5: ("contact to Riemannian pipeline and coherence", criterion_5),
    6: ("finite type suite and level-by-level duality", criterion_6),
    7: ("framing x^d d/dx suite", criterion_7),
    8: ("lightcone n=3: Lorentz fields exhaust Killing jets (dim 6)", criterion_8),
    9: ("singular metric x^(2d) dx^2: dims 0 at 0, 1 at 1", criterion_9),
    10: ("isometric lift of a homothety", criterion_10),
    11: (f"randomized exact identities, {CASES} cases each", criterion_11),
}


def run_criterion(num: int):
    title, fn = CRITERIA[num]
    try:
        ok, detail = fn()
    except Exception as exc:  # recorded as a failure, re-raised by the test
        acceptance_log.RESULTS[num] = (title, False, f"{type(exc).__name__}: {exc}")
        raise
    acceptance_log.RESULTS[num] = (title, bool(ok), detail)
    return ok, detail


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_acceptance(num):
    ok, detail = run_criterion(num)
    print(acceptance_log.line(num))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for num in sorted(CRITERIA):
        try:
            run_criterion(num)
        except Exception:
            pass
        print(acceptance_log.line(num), flush=True)
        failed += not acceptance_log.RESULTS[num][1]
    sys.exit(1 if failed else 0)

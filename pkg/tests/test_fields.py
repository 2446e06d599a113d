"""Field presentations checked against the direct level-m linear algebra."""

import random

import pytest

from qfext.errors import NotASubfield
from qfext.fields import (
    adjoin,
    canonical_rbase,
    compositum,
    defining_equations,
    degree,
    di_finite,
    exponents,
    field_equal,
    frob_field,
    intersect_fields,
    is_modular,
    k_of_Kpn,
    linearly_disjoint,
    lm_lower_saturation,
    make_field,
    member_field,
    rbase,
    root_intersect,
    rp_closure,
    trivial_field,
    um_closure,
)
from qfext.linalg import Ambient, expand, intersect, member, rref
from qfext.pexp import Context

CTX = Context(2, ("X", "Z1", "Z2"))
CTX_XY = Context(2, ("X", "Y"))
CTX3 = Context(3, ("X", "Y"))


def theta_n(ctx, n):
    X, Z1, Z2 = ctx.var(0), ctx.var(1), ctx.var(2)
    th = Z1.frob(-1) * X.frob(-2) + Z2.frob(-1)
    for m in range(2, n + 1):
        th = Z1.frob(-1) * X.frob(-2 * m) + th.frob(-1)
    return th


def K1(ctx=CTX):
    """k(X^(1/4), theta_1), the running 8-dimensional example."""
    return make_field([ctx.root_mono(0, 1, 2), theta_n(ctx, 1)])


# -- oracle helpers -----------------------------------------------------------


def oracle_span(gens, m):
    """Monomial-product span of k(gens) in the level-m ambient (brute force)."""
    ctx = gens[0].ctx
    amb = Ambient(ctx, m)
    rows = [expand(ctx.one, amb)]
    elems = [ctx.one]
    for g in gens:
        lv = g.level()
        elems = [e * g**a for a in range(ctx.p**lv) for e in elems]
    for e in elems:
        rows.append(expand(e, amb))
    return rref(rows, amb), amb


def oracle_degree(gens, m):
    return oracle_span(gens, m)[0].rank


# -- construction and membership ----------------------------------------------


def test_make_field_empty_is_k():
    k = make_field([], ctx=CTX)
    assert degree(k) == 1
    assert k.is_rooted_only


def test_make_field_tensor_degree():
    f = make_field([CTX_XY.root_mono(0, 1, 1), CTX_XY.root_mono(1, 1, 1)])
    assert degree(f) == 4 == oracle_degree([CTX_XY.root_mono(0, 1, 1), CTX_XY.root_mono(1, 1, 1)], 1)


def test_make_field_k1_degree_matches_oracle():
    gens = [CTX.root_mono(0, 1, 2), theta_n(CTX, 1)]
    assert degree(make_field(gens)) == 8 == oracle_degree(gens, 2)


def test_make_field_dependent_generators_legal():
    th = theta_n(CTX, 1)
    f = make_field([CTX.root_mono(0, 1, 2), th, th * th])
    assert degree(f) == 8


def test_member_field_basics():
    f = K1()
    th = theta_n(CTX, 1)
    assert member_field(th, f)
    assert member_field(th**3 * CTX.root_mono(0, 1, 2), f)
    assert member_field(CTX.var(1).frob(1), trivial_field(CTX))
    assert not member_field(CTX.root_mono(1, 1, 1), f)  # Z1^(1/2) outside K1


def test_membership_matches_oracle_randomized():
    rng = random.Random(11)
    f = K1()
    span, amb = oracle_span([CTX.root_mono(0, 1, 2), theta_n(CTX, 1)], 2)
    pool = [
        CTX.root_mono(0, 1, 1),
        CTX.root_mono(1, 1, 1),
        theta_n(CTX, 1) * CTX.root_mono(0, 3, 2),
        CTX.root_mono(2, 1, 1),
        CTX.root_mono(0, 1, 2) + CTX.root_mono(1, 1, 1),
    ]
    for x in pool:
        assert member_field(x, f) == (member(expand(x, amb), span) is not None)


def test_degree_tower_and_guard():
    f = K1()
    sub = make_field([CTX.root_mono(0, 1, 1)])
    assert degree(f, over=sub) == 4
    assert degree(f, over=f) == 1
    other = make_field([CTX.root_mono(1, 1, 1)])
    with pytest.raises(NotASubfield):
        degree(f, over=other)


def test_degree_of_root_lattice():
    assert degree(trivial_field(CTX_XY, (1, 1))) == 4  # [k^(1/p):k] = p^2 at r=2


# -- frobenius images, compositum, intersections -------------------------------


def test_k_of_kpn_examples():
    f = make_field([CTX.root_mono(0, 1, 2)])
    assert field_equal(k_of_Kpn(f, 1), make_field([CTX.root_mono(0, 1, 1)]))
    k1 = K1()
    e = max(canonical_rbase(k1).exponents)
    assert field_equal(k_of_Kpn(k1, e), trivial_field(CTX))


def test_k_of_kpn_theta_recurrence():
    # k(K_2^p) = k(X^(1/8), theta_1) since theta_2^p = Z1 X^(1/8) + theta_1
    K2 = make_field([CTX.root_mono(0, 1, 4), theta_n(CTX, 2)])
    got = k_of_Kpn(K2, 1)
    want = make_field([CTX.root_mono(0, 1, 3), theta_n(CTX, 1)])
    assert field_equal(got, want)


def test_compositum_degree_of_disjoint_parts():
    a = make_field([CTX_XY.root_mono(0, 1, 2)])
    b = make_field([CTX_XY.root_mono(1, 1, 1)])
    assert degree(compositum(a, b)) == 8


def test_intersect_fields_identity_and_absorption():
    f = K1()
    assert field_equal(intersect_fields(f, f), f)
    big = make_field([CTX.root_mono(0, 1, 2), theta_n(CTX, 1), CTX.root_mono(1, 1, 1)])
    assert field_equal(intersect_fields(big, f), f)


def test_intersect_fields_nontrivial():
    # derived from the subspace-intersection oracle at level 1:
    # k(X^(1/2), Y^(1/2)) & k(X^(1/2), (XY)^(1/2)) = k(X^(1/2))
    xh = CTX_XY.root_mono(0, 1, 1)
    yh = CTX_XY.root_mono(1, 1, 1)
    f = make_field([xh, yh])
    g = make_field([xh, xh * yh])
    got = intersect_fields(f, g)

    span_f, amb = oracle_span([xh, yh], 1)
    span_g, _ = oracle_span([xh, xh * yh], 1)
    inter = intersect(span_f, span_g)
    assert degree(got) == inter.rank == 4

    f2 = make_field([xh])
    g2 = make_field([yh])
    got2 = intersect_fields(f2, g2)
    span2 = intersect(oracle_span([xh], 1)[0], oracle_span([yh], 1)[0])
    assert degree(got2) == span2.rank == 1


def test_root_intersect_examples():
    f = K1()
    assert field_equal(root_intersect(f, 0), trivial_field(CTX))
    assert field_equal(root_intersect(f, 1), make_field([CTX.root_mono(0, 1, 1)]))
    assert field_equal(root_intersect(f, 2), f)  # exponent reached
    assert field_equal(root_intersect(f, 5), f)


def test_root_intersect_matches_subspace_oracle():
    # k^(1/2) & K1 via the level-2 ambient: intersect K1-span with the
    # expansion of the full p^(-1) lattice
    f = K1()
    span_f, amb = oracle_span([CTX.root_mono(0, 1, 2), theta_n(CTX, 1)], 2)
    lattice = []
    for a in range(2):
        for b in range(2):
            for c in range(2):
                el = CTX.one
                if a:
                    el = el * CTX.root_mono(0, 1, 1)
                if b:
                    el = el * CTX.root_mono(1, 1, 1)
                if c:
                    el = el * CTX.root_mono(2, 1, 1)
                lattice.append(expand(el, amb))
    span_l = rref(lattice, amb)
    inter = intersect(span_f, span_l)
    got = root_intersect(f, 1)
    assert degree(got) == inter.rank == 2


# -- rp closure ---------------------------------------------------------------


def test_rp_closure_trivial_for_finite():
    assert field_equal(rp_closure(make_field([CTX.root_mono(0, 1, 1)])), trivial_field(CTX))
    assert field_equal(rp_closure(K1()), trivial_field(CTX))


def test_rp_closure_relative():
    f = K1()
    over = make_field([CTX.root_mono(0, 1, 2)])
    got = rp_closure(f, over=over)
    assert field_equal(got, over)


# -- r-bases, exponents, defining equations ------------------------------------


def test_rbase_sizes():
    assert len(rbase(make_field([CTX_XY.root_mono(0, 1, 1), CTX_XY.root_mono(1, 1, 1)]))) == 2
    assert len(rbase(make_field([CTX_XY.root_mono(0, 1, 2)]))) == 1
    assert len(rbase(K1())) == 2


def test_rbase_cardinality_invariant_under_order():
    rng = random.Random(7)
    gens = [CTX.root_mono(0, 1, 2), theta_n(CTX, 1), theta_n(CTX, 1) * CTX.root_mono(0, 1, 2)]
    sizes = set()
    for _ in range(5):
        rng.shuffle(gens)
        sizes.add(len(rbase(make_field(gens))))
    assert sizes == {2}


def test_canonical_rbase_examples():
    rep = canonical_rbase(make_field([CTX_XY.root_mono(0, 1, 2), CTX_XY.root_mono(1, 1, 1)]))
    assert rep.exponents == (2, 1)
    rep = canonical_rbase(K1())
    assert rep.exponents == (2, 1)
    assert canonical_rbase(K1(), over=K1()).exponents == ()


def test_exponents_of_root_lattice():
    f = trivial_field(CTX, (2, 2, 2))
    assert exponents(f) == (2, 2, 2)
    assert di_finite(trivial_field(CTX)) == 0


def test_exponent_identity_os_vs_di_drop():
    # o_s = inf{ m : di(k(K^(p^m))/k) < s }, both sides computed independently
    for f in (K1(), make_field([CTX.root_mono(0, 1, 3), theta_n(CTX, 2)])):
        exps = exponents(f)
        e = max(exps)
        dis = [di_finite(k_of_Kpn(f, m)) for m in range(e + 1)]
        for s in range(1, len(exps) + 1):
            o_s = exps[s - 1]
            alt = min(m for m in range(e + 1) if dis[m] < s)
            assert o_s == alt


def test_defining_equations_k1():
    f = K1()
    rep = canonical_rbase(f)
    eqs = defining_equations(f, report=rep)
    (consts,) = eqs.constants
    # theta_1^2 = Z2 * 1 + Z1 * X^(1/2), in the Lambda_2 basis {1, X^(1/2)}
    assert consts[(0,)] == CTX.var(2)
    assert consts[(1,)] == CTX.var(1)


def test_defining_equations_tensor_trivial():
    f = make_field([CTX_XY.root_mono(0, 1, 2), CTX_XY.root_mono(1, 1, 1)])
    eqs = defining_equations(f)
    (consts,) = eqs.constants
    assert consts == {(0,): CTX_XY.var(1)}


# -- linear disjointness and modularity ----------------------------------------


def test_linear_disjointness_basics():
    a = make_field([CTX_XY.root_mono(0, 1, 1)])
    b = make_field([CTX_XY.root_mono(1, 1, 1)])
    assert linearly_disjoint(a, b)
    assert not linearly_disjoint(a, a)
    assert linearly_disjoint(trivial_field(CTX_XY), trivial_field(CTX_XY))


def test_exponent_criterion_for_linear_disjointness():
    # LD iff o_j(K1 K2 / K2) = o_j(K1/k) for all j, both sides independent
    rng = random.Random(3)
    pool = [
        make_field([CTX_XY.root_mono(0, 1, 1)]),
        make_field([CTX_XY.root_mono(1, 1, 2)]),
        make_field([CTX_XY.root_mono(0, 1, 1) + CTX_XY.root_mono(1, 1, 1)]),
        make_field([CTX_XY.root_mono(0, 1, 2), CTX_XY.root_mono(1, 1, 1)]),
    ]
    for a in pool:
        for b in pool:
            ld = linearly_disjoint(a, b)
            comp = compositum(a, b)
            lhs = exponents(comp, over=b)
            rhs = exponents(a)
            assert ld == (lhs == rhs)


def test_modularity_tensor_and_k1():
    tensor = make_field([CTX_XY.root_mono(0, 1, 2), CTX_XY.root_mono(1, 1, 1)])
    assert is_modular(tensor, method="both").modular
    v = is_modular(K1(), method="both")
    assert not v.modular
    j, eps, c = v.witness
    assert j == 2 and c in (CTX.var(1), CTX.var(2))


def test_modularity_exponent_one_always():
    f = make_field([CTX.root_mono(0, 1, 1), theta_n(CTX, 1).frob(1)])
    rep = canonical_rbase(f)
    assert max(rep.exponents) == 1
    assert is_modular(f, method="both").modular


def test_modular_consequences_pr23():
    # K/k modular => root_intersect(K,n)/k and K/root_intersect(K,n) modular
    f = make_field([CTX_XY.root_mono(0, 1, 2), CTX_XY.root_mono(1, 1, 1)])
    for n in (1, 2):
        kn = root_intersect(f, n)
        assert is_modular(kn).modular
        assert is_modular(f, over=kn).modular


def test_frobenius_modularity_apr2():
    f = make_field([CTX_XY.root_mono(0, 1, 2), CTX_XY.root_mono(1, 1, 1)])
    assert is_modular(f).modular
    for m in (0, 1):
        for n in (m, m + 1):
            im = frob_field(f, m)
            base = trivial_field(CTX_XY, (-n, -n))
            assert is_modular(im, over=base).modular


def test_waterhouse_intersection_stability():
    # K/L1, K/L2 modular => K/(L1 & L2) modular
    xh, yh = CTX_XY.root_mono(0, 1, 2), CTX_XY.root_mono(1, 1, 2)
    K = make_field([xh, yh])
    L1 = make_field([xh.frob(1), yh])
    L2 = make_field([xh, yh.frob(1)])
    assert is_modular(K, over=L1).modular and is_modular(K, over=L2).modular
    inter = intersect_fields(L1, L2)
    assert is_modular(K, over=inter, method="both").modular


# -- um and lm ------------------------------------------------------------------


def test_um_closure_of_modular_is_identity():
    f = make_field([CTX_XY.root_mono(0, 1, 2), CTX_XY.root_mono(1, 1, 1)])
    closure, adjoined = um_closure(f)
    assert adjoined == [] and field_equal(closure, f)


def test_um_closure_k1():
    f = K1()
    closure, adjoined = um_closure(f)
    want = make_field([CTX.root_mono(0, 1, 2), CTX.root_mono(1, 1, 1), CTX.root_mono(2, 1, 1)])
    assert field_equal(closure, want)
    assert {a.key() for a in adjoined} == {CTX.root_mono(1, 1, 1).key(), CTX.root_mono(2, 1, 1).key()}
    again, more = um_closure(closure)
    assert more == [] and field_equal(again, closure)


def test_um_minimality_spot_check():
    # any probed field strictly between K and um is non-modular; candidates
    # that regenerate the full closure (theta plus one root gives the other)
    # are skipped by the degree guard
    f = K1()
    closure, adjoined = um_closure(f)
    assert not is_modular(f).modular
    for drop in adjoined:
        keep = [a for a in adjoined if a.key() != drop.key()]
        smaller = adjoin(f, keep)
        if degree(smaller) < degree(closure):
            assert not is_modular(smaller).modular


def test_um_bound_inside_root_lattice():
    f = K1()
    closure, _ = um_closure(f)
    e = max(canonical_rbase(f).exponents)
    bound = trivial_field(CTX, (e,) * 3)
    assert bound.contains_field(closure)


def test_lm_lower_saturation_modular_case():
    f = make_field([CTX_XY.root_mono(0, 1, 2), CTX_XY.root_mono(1, 1, 1)])
    low, certified, forced = lm_lower_saturation(f)
    assert certified and forced == [] and field_equal(low, trivial_field(CTX_XY))


def test_lm_lower_saturation_k1():
    low, certified, forced = lm_lower_saturation(K1())
    assert certified
    assert field_equal(low, make_field([CTX.root_mono(0, 1, 1)]))


def test_di_monotonicity_thm6():
    # random nested chains: di(L'/L) <= di(K/k)
    rng = random.Random(5)
    K = make_field([CTX.root_mono(0, 1, 2), theta_n(CTX, 2), CTX.root_mono(1, 1, 1)])
    di_K = di_finite(K)
    L = make_field([CTX.root_mono(0, 1, 1)])
    Lp = make_field([CTX.root_mono(0, 1, 2), theta_n(CTX, 1)])
    assert di_finite(Lp, over=L) <= di_K


def test_compositum_di_bound_cor4():
    a = make_field([CTX_XY.root_mono(0, 1, 1) + CTX_XY.root_mono(1, 1, 1)])
    b = make_field([CTX_XY.root_mono(1, 1, 2)])
    comp = compositum(a, b)
    assert di_finite(comp) <= di_finite(a) + di_finite(b)
    assert di_finite(comp, over=b) <= di_finite(a)
    if linearly_disjoint(a, b):
        assert di_finite(comp) == di_finite(a) + di_finite(b)

"""Level-m expansion and exact subspace algebra over k."""

import pytest

from hypothesis import given, settings
from hypothesis import strategies as st

from qfext.errors import LevelTooLow
from qfext.linalg import Ambient, KVector, contract, expand, intersect, member, rref
from qfext.pexp import Context

CTX = Context(2, ("X", "Z1", "Z2"))
CTX_XY = Context(2, ("X", "Y"))


def theta1(ctx=CTX):
    return ctx.var(1).frob(-1) * ctx.var(0).frob(-2) + ctx.var(2).frob(-1)


def test_expand_unit_coordinate():
    amb = Ambient(CTX, 1)
    v = expand(CTX.root_mono(0, 1, 1), amb)
    assert v.coords == {(1, 0, 0): CTX.one}


def test_expand_rationalizes_denominator():
    amb = Ambient(CTX_XY, 1)
    one = CTX_XY.one
    xh = CTX_XY.root_mono(0, 1, 1)
    v = expand(one / (one + xh), amb)
    inv = one / (one + CTX_XY.var(0))
    assert v.coords == {(0, 0): inv, (1, 0): inv}


def test_expand_theta1_support():
    # derived by direct symbolic expansion: theta1 = Z1^(2/4) X^(1/4) + Z2^(2/4)
    amb = Ambient(CTX, 2)
    v = expand(theta1(), amb)
    assert sorted(v.coords) == [(0, 0, 2), (1, 2, 0)]
    assert all(c == CTX.one for c in v.coords.values())


def test_expand_level_guard():
    with pytest.raises(LevelTooLow):
        expand(theta1(), Ambient(CTX, 1))


def test_contract_round_trip():
    amb = Ambient(CTX, 2)
    xs = [theta1(), CTX.one / (CTX.one + CTX.var(0)), CTX.zero]
    for x in xs:
        assert contract(expand(x, amb)) == x


def test_contract_single_coordinate():
    amb = Ambient(CTX, 1)
    c = CTX.one / (CTX.one + CTX.var(1))
    v = KVector(amb, {(1, 0, 0): c})
    assert contract(v) == c * CTX.root_mono(0, 1, 1)


def test_rref_duplicate_rows():
    amb = Ambient(CTX, 1)
    v = expand(theta1().frob(1), amb)
    basis = rref([v, v], amb)
    assert basis.rank == 1


def test_rref_dependency():
    amb = Ambient(CTX_XY, 1)
    one = expand(CTX_XY.one, amb)
    xh = expand(CTX_XY.root_mono(0, 1, 1), amb)
    both = expand(CTX_XY.one + CTX_XY.root_mono(0, 1, 1), amb)
    assert rref([one, xh, both], amb).rank == 2


def test_rref_full_monomial_basis():
    amb = Ambient(CTX_XY, 1)
    rows = []
    for a in range(2):
        for b in range(2):
            el = CTX_XY.one
            if a:
                el = el * CTX_XY.root_mono(0, a, 1)
            if b:
                el = el * CTX_XY.root_mono(1, b, 1)
            rows.append(expand(el, amb))
    assert rref(rows, amb).rank == 4 == amb.dim


def test_rref_idempotent():
    amb = Ambient(CTX, 1)
    rows = [
        expand(CTX.root_mono(0, 1, 1) + CTX.root_mono(1, 1, 1), amb),
        expand(CTX.root_mono(1, 1, 1), amb),
        expand(CTX.one, amb),
    ]
    b1 = rref(rows, amb)
    b2 = rref(list(b1.rows), amb)
    assert b1 == b2


def test_member_basics():
    amb = Ambient(CTX_XY, 1)
    basis = rref([expand(CTX_XY.one, amb)], amb)
    assert member(expand(CTX_XY.zero, amb), basis) is not None
    assert member(basis.rows[0], basis) is not None
    assert member(expand(CTX_XY.root_mono(0, 1, 1), amb), basis) is None


def test_intersect_identities():
    amb = Ambient(CTX_XY, 1)
    a = rref([expand(CTX_XY.one, amb), expand(CTX_XY.root_mono(0, 1, 1), amb)], amb)
    full = rref(
        [
            expand(e, amb)
            for e in (
                CTX_XY.one,
                CTX_XY.root_mono(0, 1, 1),
                CTX_XY.root_mono(1, 1, 1),
                CTX_XY.root_mono(0, 1, 1) * CTX_XY.root_mono(1, 1, 1),
            )
        ],
        amb,
    )
    assert intersect(a, a) == a
    assert intersect(full, a) == a


def test_intersect_lines():
    # derived by brute force on the 4-dim ambient: span{1,X^(1/2)} & span{1,Y^(1/2)} = span{1}
    amb = Ambient(CTX_XY, 1)
    a = rref([expand(CTX_XY.one, amb), expand(CTX_XY.root_mono(0, 1, 1), amb)], amb)
    b = rref([expand(CTX_XY.one, amb), expand(CTX_XY.root_mono(1, 1, 1), amb)], amb)
    got = intersect(a, b)
    assert got == rref([expand(CTX_XY.one, amb)], amb)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=15), min_size=1, max_size=4),
       st.lists(st.integers(min_value=0, max_value=15), min_size=1, max_size=4))
def test_dimension_formula(ia, ib):
    # dim A + dim B = dim(A+B) + dim(A & B) on random monomial subspaces
    amb = Ambient(CTX_XY, 2)

    def mono(i):
        a, b = divmod(i, 4)
        el = CTX_XY.one
        if a:
            el = el * CTX_XY.root_mono(0, a, 2)
        if b:
            el = el * CTX_XY.root_mono(1, b, 2)
        return expand(el, amb)

    span_a = rref([mono(i) for i in ia], amb)
    span_b = rref([mono(i) for i in ib], amb)
    span_sum = rref([mono(i) for i in ia + ib], amb)
    inter = intersect(span_a, span_b)
    assert span_a.rank + span_b.rank == span_sum.rank + inter.rank


def test_frobenius_compatibility():
    # coords of frob(x,1) at level m are the coords of x at level m+1 pushed
    # through alpha -> alpha mod p^m (integer carries fold into k)
    m = 2
    x = theta1() + CTX.var(0).frob(-3) + CTX.var(2).frob(-1) * CTX.var(0)
    down = expand(x, Ambient(CTX, m + 1))
    predicted = {}
    for alpha, c in down.coords.items():
        beta = tuple(a % 2**m for a in alpha)
        carry = CTX.one
        for i, a in enumerate(alpha):
            if a // 2**m:
                carry = carry * CTX.root_mono(i, a // 2**m, 0)
        cur = predicted.get(beta, CTX.zero)
        predicted[beta] = cur + c.frob(1) * carry
    predicted = {b: c for b, c in predicted.items() if not c.is_zero}
    up = expand(x.frob(1), Ambient(CTX, m))
    assert predicted == up.coords

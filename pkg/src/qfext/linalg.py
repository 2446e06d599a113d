"""Canonical k-linear expansion at a fixed level and exact linear algebra.

The ambient at level m is the k-vector space k^(p^-m) with its monomial
basis X^(alpha/p^m), alpha in [0, p^m)^r; vectors are sparse maps from
alpha to elements of k.  Subspaces are stored in reduced row echelon form
under lexicographic column order on alpha, so equality of subspaces is
structural equality.  This module is the small, direct reference engine;
field presentations use the rooted-base machinery instead and are checked
against this one in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LevelTooLow
from .pexp import Context, PElement
from .span import RootedBase, decompose

__all__ = [
    "Ambient",
    "KVector",
    "SubspaceBasis",
    "expand",
    "contract",
    "rref",
    "member",
    "intersect",
]


@dataclass(frozen=True)
class Ambient:
    """Level-m monomial ambient over k = F_p(X_1..X_r); dimension p^(rm)."""

    ctx: Context
    m: int

    @property
    def dim(self) -> int:
        return self.ctx.p ** (self.ctx.nvars * self.m)


class KVector:
    """Sparse vector: alpha-index -> nonzero element of k."""

    __slots__ = ("ambient", "coords")

    def __init__(self, ambient: Ambient, coords: dict):
        self.ambient = ambient
        self.coords = {a: c for a, c in coords.items() if not c.is_zero}

    def is_zero(self) -> bool:
        return not self.coords

    def scale(self, c: PElement) -> "KVector":
        return KVector(self.ambient, {a: c * x for a, x in self.coords.items()})

    def sub_scaled(self, other: "KVector", c: PElement) -> "KVector":
        out = dict(self.coords)
        for a, x in other.coords.items():
            cur = out.get(a)
            val = (cur - c * x) if cur is not None else -(c * x)
            if val.is_zero:
                out.pop(a, None)
            else:
                out[a] = val
        return KVector(self.ambient, out)

    def pivot(self):
        return min(self.coords) if self.coords else None

    def __eq__(self, other):
        return self.ambient == other.ambient and self.coords == other.coords

    def __repr__(self):
        items = ", ".join(f"{a}:{c}" for a, c in sorted(self.coords.items()))
        return f"KVector({items})"


def expand(x: PElement, ambient: Ambient) -> KVector:
    """Coordinates of x over the level-m monomial basis (exact).

    Denominators are pushed into k via 1/g = g^(p^m - 1)/g^(p^m), so the
    coordinates are honest elements of k.
    """
    if x.level() > ambient.m:
        raise LevelTooLow(f"element level {x.level()} exceeds ambient level {ambient.m}")
    base = RootedBase.of(ambient.ctx)
    scale = ambient.ctx.p**ambient.m
    coords = {}
    for col, c in decompose(x, base).items():
        alpha = tuple(int(q * scale) for q in col.pat)
        coords[alpha] = c
    return KVector(ambient, coords)


def contract(v: KVector) -> PElement:
    """Left inverse of expand."""
    ctx = v.ambient.ctx
    acc = ctx.zero
    for alpha, c in v.coords.items():
        mono = ctx.one
        for i, a in enumerate(alpha):
            if a:
                mono = mono * ctx.root_mono(i, a, v.ambient.m)
        acc = acc + c * mono
    return acc


class SubspaceBasis:
    """Rows in RREF: strictly increasing pivots (lex on alpha), pivot = 1."""

    __slots__ = ("ambient", "rows")

    def __init__(self, ambient: Ambient, rows):
        self.ambient = ambient
        self.rows = tuple(rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def __eq__(self, other):
        return self.ambient == other.ambient and self.rows == other.rows

    def reduce(self, v: KVector) -> KVector:
        for row in self.rows:
            piv = row.pivot()
            c = v.coords.get(piv)
            if c is not None:
                v = v.sub_scaled(row, c)
        return v


def rref(rows, ambient: Ambient = None) -> SubspaceBasis:
    """Reduced row echelon form of the span of the given vectors."""
    rows = list(rows)
    if ambient is None:
        if not rows:
            raise ValueError("need an ambient for the empty family")
        ambient = rows[0].ambient
    basis: list = []
    for v in rows:
        for row in basis:
            c = v.coords.get(row.pivot())
            if c is not None:
                v = v.sub_scaled(row, c)
        if v.is_zero():
            continue
        piv = v.pivot()
        v = v.scale(v.coords[piv].inv())
        basis = [
            (row.sub_scaled(v, row.coords[piv]) if piv in row.coords else row) for row in basis
        ]
        basis.append(v)
        basis.sort(key=lambda r: r.pivot())
    return SubspaceBasis(ambient, basis)


def member(v: KVector, basis: SubspaceBasis):
    """Coordinates of v over basis.rows, or None if v is outside the span."""
    coords = []
    for row in basis.rows:
        c = v.coords.get(row.pivot())
        if c is not None:
            coords.append(c)
            v = v.sub_scaled(row, c)
        else:
            coords.append(v.ambient.ctx.zero)
    if not v.is_zero():
        return None
    return coords


def intersect(a: SubspaceBasis, b: SubspaceBasis) -> SubspaceBasis:
    """span(a) & span(b), Zassenhaus-style on doubled columns."""
    if a.ambient != b.ambient:
        raise ValueError("ambient mismatch")
    amb = a.ambient

    def widen(v: KVector, both: bool) -> dict:
        out = {}
        for alpha, c in v.coords.items():
            out[(0,) + alpha] = c
            if both:
                out[(1,) + alpha] = c
        return out

    work: list = []
    raw = [widen(r, True) for r in a.rows] + [widen(r, False) for r in b.rows]
    inter_rows = []
    for coords in raw:
        v = coords
        for row in work:
            piv = min(row)
            c = v.get(piv)
            if c is not None:
                v = {k: x for k, x in v.items()}
                for kk, x in row.items():
                    cur = v.get(kk)
                    val = (cur - c * x) if cur is not None else -(c * x)
                    if val.is_zero:
                        v.pop(kk, None)
                    else:
                        v[kk] = val
        if not v:
            continue
        piv = min(v)
        if piv[0] == 1:
            inter_rows.append(KVector(amb, {kk[1:]: c for kk, c in v.items()}))
        else:
            c = v[piv].inv()
            work.append({kk: c * x for kk, x in v.items()})
            work.sort(key=min)
    return rref(inter_rows, amb)

"""Exact linear algebra over rooted bases B = F_p(X_1^(p^-c_1), ..., X_r^(p^-c_r)).

A rooted base is a rational function field generated over F_p by fixed
p-power roots of the variables (depths may be negative: depth -n means the
base only contains X^(p^n)).  Omega splits as a free B-module with one
column per residue pattern of the exponent vector modulo the base lattice;
vectors are sparse dicts column -> coefficient with coefficients in B.

Elimination is fraction-free: rows are scaled to polynomial entries (row
scaling by nonzero base elements does not change the row space), reduction
cross-multiplies and then strips monomial content and Bareiss-style exact
factors.  Division only happens when a caller asks for coordinates, so the
polynomial gcd machinery stays off the hot path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .pexp import Context, PElement, PPoly, _poly_mul

TAG_BLOCK = 9  # tag columns sort after every real block


# exact integer scale for pattern fractions: divisible by every p^t we can
# meet (p <= 7, depth <= 96); keeps column ordering in pure int arithmetic
_COL_SCALE = (2 * 3 * 5 * 7) ** 96


class Col:
    """Interned column label: (block, residue pattern).

    Pattern dict keys are by far the hottest objects in the engine, so the
    hash is precomputed, equality is identity (one instance per label) and
    the graded-lex order is precomputed as an integer tuple.
    """

    __slots__ = ("block", "pat", "sort", "_hash")
    _cache: dict = {}

    def __new__(cls, block, pat):
        key = (block, pat)
        hit = cls._cache.get(key)
        if hit is not None:
            return hit
        self = super().__new__(cls)
        self.block = block
        self.pat = pat
        vals = []
        for q in pat:
            num, den = q.numerator, q.denominator
            scaled, rem = divmod(_COL_SCALE, den)
            if rem:
                raise ValueError(f"pattern denominator {den} out of range")
            vals.append(num * scaled)
        self.sort = (block, sum(vals), tuple(vals))
        self._hash = hash(key)
        cls._cache[key] = self
        return self

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __lt__(self, other):
        return self.sort < other.sort

    def __repr__(self):
        return f"Col({self.block},{self.pat})"

    def with_block(self, block) -> "Col":
        return Col(block, self.pat)


def _vp(n: int, p: int) -> int:
    """p-adic valuation; caller guarantees n != 0."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class RootedBase:
    """F_p(X_i^(p^-depths_i)); depth 0 per variable gives k itself."""

    ctx: Context
    depths: tuple

    @staticmethod
    def of(ctx: Context, depths=None) -> "RootedBase":
        if depths is None:
            depths = (0,) * ctx.nvars
        return RootedBase(ctx, tuple(depths))

    def contains(self, el: PElement) -> bool:
        return el.in_lattice(self.depths)

    def lattice_level(self, el: PElement) -> int:
        """Least s >= 0 with frobenius(el, s) inside the base lattice."""
        p = self.ctx.p
        s = 0
        for poly in (el.num, el.den):
            for k in poly.terms:
                for i, e in enumerate(k):
                    if e:
                        need = poly.level - self.depths[i] - _vp(e, p)
                        if need > s:
                            s = need
        return s

    def deepen(self, i: int, depth: int) -> "RootedBase":
        d = list(self.depths)
        d[i] = max(d[i], depth)
        return RootedBase(self.ctx, tuple(d))

    def shift(self, n: int) -> "RootedBase":
        """Image base under frobenius^n (depths drop by n)."""
        return RootedBase(self.ctx, tuple(c - n for c in self.depths))

    def join(self, other: "RootedBase") -> "RootedBase":
        return RootedBase(self.ctx, tuple(max(a, b) for a, b in zip(self.depths, other.depths)))

    def meet(self, other: "RootedBase") -> "RootedBase":
        return RootedBase(self.ctx, tuple(min(a, b) for a, b in zip(self.depths, other.depths)))

    def leq(self, other: "RootedBase") -> bool:
        return all(a <= b for a, b in zip(self.depths, other.depths))

    def degree_over(self, other: "RootedBase") -> int:
        if not other.leq(self):
            raise ValueError("not a subbase")
        return self.ctx.p ** sum(a - b for a, b in zip(self.depths, other.depths))

    def root_elements(self):
        """The defining root monomials X_i^(p^-c_i) with positive depth."""
        out = []
        for i, c in enumerate(self.depths):
            if c > 0:
                out.append(self.ctx.root_mono(i, 1, c))
        return out


# -- pattern decomposition ------------------------------------------------


def _split_exponent(e: int, lv: int, depth: int, p: int):
    """exponent e/p^lv -> (base-lattice part, residue) as Fractions."""
    q = Fraction(e, p**lv)
    mod = Fraction(p) ** (-depth)
    res = q % mod
    return q - res, res


def decompose(el: PElement, base: RootedBase, block: int = 0) -> dict:
    """Write el as sum of pattern-column monomials with coefficients in B.

    Returns {(block, total, pattern): coeff} with coeff a PElement of the
    base field.  Uses 1/g = g^(p^s - 1)/g^(p^s) to push the denominator
    into the base lattice first.
    """
    ctx = base.ctx
    p = ctx.p
    if el.is_zero:
        return {}
    num, den = el.num, el.den
    s = 0
    for k in den.terms:
        for i, e in enumerate(k):
            if e:
                need = den.level - base.depths[i] - _vp(e, p)
                if need > s:
                    s = need
    if s > 0:
        num = _poly_mul(num, _poly_pow(den, p**s - 1))
        den = den.frob(s)
    buckets: dict = {}
    for k, c in num.terms.items():
        pat = []
        latt = []
        for i, e in enumerate(k):
            if e:
                li, ri = _split_exponent(e, num.level, base.depths[i], p)
            else:
                li, ri = Fraction(0), Fraction(0)
            pat.append(ri)
            latt.append(li)
        col = Col(block, tuple(pat))
        buckets.setdefault(col, []).append((tuple(latt), c))
    out = {}
    one = PPoly(ctx, 0, {ctx._zero_key: 1})
    inv_den = PElement(ctx, one, den) if not den.is_one else None
    for col, terms in buckets.items():
        poly = _poly_from_fraction_keys(ctx, terms)
        coeff = PElement._raw(ctx, poly, one)
        if inv_den is not None:
            coeff = coeff * inv_den
        if not coeff.is_zero:
            out[col] = coeff
    return out


def _poly_from_fraction_keys(ctx: Context, terms):
    lv = 0
    for latt, _ in terms:
        for q in latt:
            d = q.denominator
            t = 0
            while d > 1:
                d //= ctx.p
                t += 1
            lv = max(lv, t)
    scale = ctx.p**lv
    data: dict = {}
    for latt, c in terms:
        key = tuple(int(q * scale) for q in latt)
        data[key] = (data.get(key, 0) + c) % ctx.p
    return PPoly(ctx, lv, {k: c for k, c in data.items() if c}).normalized()


def _poly_pow(poly: PPoly, n: int) -> PPoly:
    acc = PPoly(poly.ctx, 0, {poly.ctx._zero_key: 1})
    base = poly
    while n:
        if n & 1:
            acc = _poly_mul(acc, base)
        n >>= 1
        if n:
            base = _poly_mul(base, base)
    return acc


def pattern_monomial(base: RootedBase, col: Col) -> PElement:
    """The monomial X^pattern for a real column."""
    pat = col.pat
    ctx = base.ctx
    el = ctx.one
    for i, q in enumerate(pat):
        if q:
            e = q.numerator
            d = q.denominator
            t = 0
            while d > 1:
                d //= ctx.p
                t += 1
            el = el * ctx.root_mono(i, e, t)
    return el


def recompose(coords: dict, base: RootedBase) -> PElement:
    acc = base.ctx.zero
    for col, coeff in coords.items():
        if col.block == TAG_BLOCK:
            continue
        acc = acc + coeff * pattern_monomial(base, col)
    return acc


# -- sparse polynomial-entry vectors ---------------------------------------


def clear_vec(ctx: Context, vec: dict):
    """Scale a vector so every entry is polynomial; returns (vec, factor)."""
    factor = ctx.one
    for c in list(vec.values()):
        if not c.den.is_one:
            d = PElement._raw(ctx, c.den, ctx.one.den)
            factor = factor * d
            vec = {col: x * d for col, x in vec.items()}
    return vec, factor


def _vec_combine(q: PElement, v: dict, c: PElement, w: dict) -> dict:
    """q*v - c*w (all entries polynomial)."""
    out = {}
    for col, x in v.items():
        out[col] = q * x
    for col, y in w.items():
        cur = out.get(col)
        val = (cur - c * y) if cur is not None else -(c * y)
        if val.is_zero:
            out.pop(col, None)
        else:
            out[col] = val
    return out


def _strip_vec(ctx: Context, vec: dict, base: RootedBase, try_factor: PPoly = None) -> dict:
    """Remove common monomial content (kept inside the base lattice) and, if
    given, a Bareiss factor that divides every entry exactly."""
    if not vec:
        return vec
    if try_factor is not None and not try_factor.is_one and any(
        len(x.num.terms) > 8 for x in vec.values()
    ):
        quots = {}
        for col, x in vec.items():
            q = _exact_div(x.num, try_factor)
            if q is None:
                quots = None
                break
            quots[col] = q
        if quots is not None:
            vec = {col: PElement._raw(ctx, q, ctx.one.den) for col, q in quots.items()}
    # monomial content, floored into the base lattice
    p = ctx.p
    lv = max(x.num.level for x in vec.values())
    lo = None
    for x in vec.values():
        for k in x.num.align(lv):
            if lo is None:
                lo = list(k)
            else:
                for i, e in enumerate(k):
                    if e < lo[i]:
                        lo[i] = e
    floored = []
    for i, e in enumerate(lo):
        d = lv - base.depths[i]
        if d > 0:
            e -= e % (p**d)
        floored.append(e)
    if any(floored):
        shift = PPoly(ctx, lv, {tuple(floored): 1}).normalized()
        out = {}
        for col, x in vec.items():
            num = {tuple(a - b for a, b in zip(k, floored)): c for k, c in x.num.align(lv).items()}
            out[col] = PElement._raw(ctx, PPoly(ctx, lv, num).normalized(), ctx.one.den)
        return out
    return vec


def _eliminate(ctx: Context, base: RootedBase, vec: dict, c: PElement, row: dict, piv, prev):
    """Kill the pivot entry c of vec using row (pivot column piv).

    Uses plain subtraction when c/q divides exactly (the common case: pivot
    coefficients are usually monomials); otherwise cross-multiplies and
    strips content Bareiss-style.  Returns (vec, new_prev)."""
    q = row[piv]
    if q.num.is_one:
        return _vec_combine(ctx.one, vec, c, row), prev
    ratio = _exact_div(c.num, q.num) if (q.num.is_monomial() or len(q.num.terms) <= 16) else None
    if ratio is not None:
        scaled = PElement._raw(ctx, ratio, ctx.one.den)
        return _vec_combine(ctx.one, vec, scaled, row), prev
    vec = _vec_combine(q, vec, c, row)
    vec = _strip_vec(ctx, vec, base, prev)
    return vec, q.num


def _exact_div(num: PPoly, den: PPoly):
    """num / den as a PPoly, or None if the division is not exact."""
    if den.is_one:
        return num
    if num.is_zero:
        return num
    ctx = num.ctx
    p = ctx.p
    lv = max(num.level, den.level)
    rem = dict(num.align(lv))
    dterms = den.align(lv)
    dlead = max(dterms, key=lambda k: (sum(k), k))
    dc = dterms[dlead]
    dcinv = pow(dc, -1, p)
    quot = {}
    while rem:
        rlead = max(rem, key=lambda k: (sum(k), k))
        qk = tuple(a - b for a, b in zip(rlead, dlead))
        if any(e < 0 for e in qk):
            return None
        qc = (rem[rlead] * dcinv) % p
        quot[qk] = qc
        for k, c in dterms.items():
            kk = tuple(a + b for a, b in zip(qk, k))
            vv = (rem.get(kk, 0) - qc * c) % p
            if vv:
                rem[kk] = vv
            else:
                rem.pop(kk, None)
    return PPoly(ctx, lv, quot).normalized()


class Span:
    """Row space over a rooted base, kept in echelon form with polynomial
    entries (pivot coefficients are not normalized to one; row scaling is
    immaterial to the row space).

    With track=True every inserted vector carries a tag column, so member
    queries can return coordinates over the inserted generators.
    """

    def __init__(self, base: RootedBase, track: bool = False):
        self.base = base
        self.ctx = base.ctx
        self.track = track
        self.rows: list = []
        self.pivots: list = []
        self.n_inserted = 0

    def __len__(self):
        return len(self.rows)

    def _pivot(self, vec: dict):
        best = None
        for col in vec:
            if col.block != TAG_BLOCK and (best is None or col < best):
                best = col
        return best

    def reduce(self, vec: dict) -> dict:
        prev = None
        for piv, row in zip(self.pivots, self.rows):
            c = vec.get(piv)
            if c is not None:
                vec, prev = _eliminate(self.ctx, self.base, vec, c, row, piv, prev)
        return vec

    def insert_vec(self, vec: dict) -> bool:
        vec = dict(vec)
        if self.track:
            vec[Col(TAG_BLOCK, (Fraction(self.n_inserted),))] = self.ctx.one
        self.n_inserted += 1
        vec, _ = clear_vec(self.ctx, vec)
        vec = self.reduce(vec)
        piv = self._pivot(vec)
        if piv is None:
            return False
        vec = _strip_vec(self.ctx, vec, self.base)
        for i, row in enumerate(self.rows):
            c = row.get(piv)
            if c is not None:
                new, _ = _eliminate(self.ctx, self.base, row, c, vec, piv, None)
                self.rows[i] = new
        idx = 0
        while idx < len(self.pivots) and self.pivots[idx] < piv:
            idx += 1
        self.pivots.insert(idx, piv)
        self.rows.insert(idx, vec)
        return True

    def insert_element(self, el: PElement) -> bool:
        return self.insert_vec(decompose(el, self.base))

    def residue(self, el: PElement) -> dict:
        vec, _ = clear_vec(self.ctx, decompose(el, self.base))
        return self.reduce(vec)

    def contains_element(self, el: PElement) -> bool:
        r = self.residue(el)
        return all(col.block == TAG_BLOCK for col in r)

    def coords(self, el: PElement):
        """Coordinates over the inserted generators, or None (track only).

        The query gets a sentinel tag so the cross-multiplication scale
        picked up during reduction can be divided back out.
        """
        if not self.track:
            raise ValueError("span built without tracking")
        sentinel = Col(TAG_BLOCK, (Fraction(-1),))
        vec = dict(decompose(el, self.base))
        vec[sentinel] = self.ctx.one
        vec, _ = clear_vec(self.ctx, vec)
        r = self.reduce(vec)
        tau = None
        for col, c in r.items():
            if col.block != TAG_BLOCK:
                return None
            if col is sentinel:
                tau = c
        out = {}
        for col, c in r.items():
            if col is not sentinel:
                out[int(col.pat[0])] = -(c / tau)
        return out

    def copy(self) -> "Span":
        s = Span(self.base, self.track)
        s.rows = [dict(r) for r in self.rows]
        s.pivots = list(self.pivots)
        s.n_inserted = self.n_inserted
        return s


def intersect_spans(a: Span, b: Span) -> list:
    """Zassenhaus: vectors (over the common base) spanning row(a) & row(b)."""
    assert a.base == b.base and not a.track and not b.track
    work = Span(a.base)
    combined = []
    for row in a.rows:
        v = {col: c for col, c in row.items()}
        v.update({col.with_block(1): c for col, c in row.items()})
        combined.append(v)
    for row in b.rows:
        combined.append(dict(row))
    out = Span(a.base)
    for v in combined:
        v = work.reduce(v)
        piv = work._pivot(v)
        if piv is None:
            continue
        if piv.block == 1:
            out.insert_vec({col.with_block(0): c for col, c in v.items() if col.block == 1})
        else:
            work.insert_vec(v)
    return out.rows

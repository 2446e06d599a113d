"""Finite purely inseparable extensions presented by generators.

A FieldPresentation is a rooted base (per-variable p-power roots, which cost
nothing in the linear algebra) together with the generators that are not
pure variable roots.  Degrees, memberships and relative exponents are
computed over the base, so the expensive ambient dimension is the product of
the *relative* orders of the non-pure generators only.

Membership of an element x of small level uses the reduction lemma for
simple extensions: if x lies in E(g) and x^(p^l) lies in E, then x already
lies in E(g^(p^(e-l))) where e is the order of g over E.  Iterating this
over all generator directions shrinks any membership or intersection
question to a small subfield before a span is ever built.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceeded, InternalInconsistency, NotASubfield
from .pexp import Context, PElement, PPoly, _poly_mul
from .span import Col, RootedBase, Span, _vp, decompose, intersect_spans, recompose

MAX_SPAN_ROWS = 200_000
MAX_EQUATION_TERMS = 300_000


class FieldPresentation:
    """Immutable field F = B(g_1, ..., g_s) inside the perfect closure."""

    _interned: dict = {}

    def __new__(cls, base: RootedBase, gens=()):
        gens = tuple(gens)
        key = (base.depths, tuple(g.key() for g in gens))
        cached = cls._interned.get((base.ctx, key))
        if cached is not None:
            return cached
        self = super().__new__(cls)
        self.ctx = base.ctx
        self.base = base
        self.gens = gens
        self._span = None
        self._basis_elements = None
        self._orders = None
        self._ord_cache = {}
        self._member_cache = {}
        cls._interned[(base.ctx, key)] = self
        return self

    # -- identity ------------------------------------------------------

    def key(self):
        return (self.base.depths, tuple(g.key() for g in self.gens))

    def __repr__(self):
        roots = [
            f"{self.ctx.names[i]}^(1/p^{c})" if c > 0 else (f"{self.ctx.names[i]}^(p^{-c})" if c < 0 else self.ctx.names[i])
            for i, c in enumerate(self.base.depths)
        ]
        gens = [g.as_str() for g in self.gens]
        return "F_p(" + ", ".join(roots + gens) + ")"

    @property
    def is_rooted_only(self) -> bool:
        return not self.gens

    def contains_k(self) -> bool:
        return all(c >= 0 for c in self.base.depths)

    # -- degrees ---------------------------------------------------------

    def rel_orders(self):
        """Orders o(g_t / B(g_1..g_{t-1})), the relative tower exponents."""
        if self._orders is None:
            orders = []
            for t in range(len(self.gens)):
                sub = FieldPresentation(self.base, self.gens[:t])
                orders.append(order_over(self.gens[t], sub))
            self._orders = tuple(orders)
        return self._orders

    def degree_over_base(self) -> int:
        return self.ctx.p ** sum(self.rel_orders())

    def degree(self) -> int:
        """[F : k]; requires k inside F (all depths nonnegative)."""
        if not self.contains_k():
            raise NotASubfield("field does not contain k")
        return self.ctx.p ** sum(self.base.depths) * self.degree_over_base()

    def deg_over(self, base: RootedBase) -> int:
        return self.base.degree_over(base) * self.degree_over_base()

    # -- spans -----------------------------------------------------------

    def span(self) -> Span:
        if self._span is None:
            span, elems = self._build_span(self.base)
            self._span = span
            self._basis_elements = elems
        return self._span

    def basis_elements(self):
        self.span()
        return self._basis_elements

    def _build_span(self, base: RootedBase, cap: int = MAX_SPAN_ROWS):
        """Multiplicative basis span of F over the given subbase of F.base."""
        ctx = self.ctx
        gap = self.base.degree_over(base)
        total = gap * self.degree_over_base()
        if total > cap:
            raise BudgetExceeded(f"span of {total} rows exceeds cap {cap}")
        elems = [ctx.one]
        for i, c in enumerate(self.base.depths):
            b = base.depths[i]
            if c > b:
                step = ctx.root_mono(i, 1, c)
                elems = [e * step**a for a in range(ctx.p ** (c - b)) for e in elems]
        orders = self.rel_orders()
        for g, o in zip(self.gens, orders):
            elems = [e * g**d for d in range(ctx.p**o) for e in elems]
        span = Span(base)
        for e in elems:
            if not span.insert_vec(decompose(e, base)):
                raise InternalInconsistency("presentation basis is dependent")
        return span, elems

    def span_over(self, base: RootedBase, cap: int = MAX_SPAN_ROWS) -> Span:
        if base == self.base:
            sp = self.span()
            if len(sp.rows) * 1 > cap:
                raise BudgetExceeded("span cap")
            return sp
        span, _ = self._build_span(base, cap)
        return span

    # -- membership -------------------------------------------------------

    def contains(self, x: PElement) -> bool:
        key = x.key()
        hit = self._member_cache.get(key)
        if hit is None:
            hit = self._contains_impl(x)
            self._member_cache[key] = hit
        return hit

    def contains_quick(self, x: PElement) -> bool:
        """Cheap certified membership; False means unknown, not refuted.

        Pure single-variable roots are tested against each simple subfield
        B(g_t) via the q-simple lattice fact: the subfields of B(g)/B are
        exactly the B(g^(p^s)), so the root lies in B(g) iff the matching
        generator power lies in the root's lattice.
        """
        if self.base.lattice_level(x) == 0:
            return True
        root = self._as_pure_root(x)
        if root is not None:
            i, t = root
            rel = t - self.base.depths[i]
            lattice = self.base.deepen(i, t)
            for g, o in zip(self.gens, self.rel_orders()):
                if rel <= o and lattice.contains(g.frob(o - rel)):
                    return True
        return False

    def _contains_impl(self, x: PElement) -> bool:
        ell = self.base.lattice_level(x)
        if ell == 0:
            return True
        if self.contains_quick(x):
            return True
        root = self._as_pure_root(x)
        if root is not None and len(self.gens) == 1:
            return False  # exact: q-simple lattice test already said no
        red = self if all(o <= ell for o in self.rel_orders()) else reduce_to_level(self, ell)
        return red.span().contains_element(x)

    def _as_pure_root(self, x: PElement):
        """(i, depth) if x is a base multiple of a single-variable pure root."""
        d = decompose(x, self.base)
        d.pop(_trivial_col(self.ctx), None)
        if len(d) != 1:
            return None
        (col,) = d
        live = [i for i, q in enumerate(col.pat) if q]
        if len(live) != 1:
            return None
        i = live[0]
        den = col.pat[i].denominator
        t = 0
        while den > 1:
            den //= self.ctx.p
            t += 1
        return i, t

    def contains_field(self, other: "FieldPresentation") -> bool:
        for i, c in enumerate(other.base.depths):
            if c > self.base.depths[i]:
                if not self.contains(self.ctx.root_mono(i, 1, c)):
                    return False
        return all(self.contains(g) for g in other.gens)


def trivial_field(ctx: Context, depths=None) -> FieldPresentation:
    return FieldPresentation(RootedBase.of(ctx, depths))


# -- construction -----------------------------------------------------------


def make_field(gens, ctx: Context = None, base: RootedBase = None) -> FieldPresentation:
    """Build a presentation from generators; pure roots move into the base.

    Dependent generators are legal; they are kept unless they fall into the
    base entirely (minimization is rbase's job).
    """
    gens = list(gens)
    if ctx is None:
        if base is not None:
            ctx = base.ctx
        elif gens:
            ctx = gens[0].ctx
        else:
            raise ValueError("need ctx for the empty field")
    if base is None:
        base = RootedBase.of(ctx)
    kept = []
    queue = list(gens)
    changed = True
    while changed:
        changed = False
        next_queue = []
        for g in queue:
            d = decompose(g, base)
            d.pop(_trivial_col(ctx), None)
            if not d:
                continue  # generator already in the base
            if len(d) == 1:
                (col,) = d
                pat = col.pat
                live = [i for i, q in enumerate(pat) if q]
                if len(live) == 1:
                    i = live[0]
                    t = _ppow_of(pat[i].denominator, ctx.p)
                    base = base.deepen(i, t)
                    changed = True
                    continue
            next_queue.append(g)
        queue = next_queue
        if changed:
            queue = kept + queue
            kept = []
    seen = set()
    for g in queue:
        g = _clean_gen(g, base)
        if g.key() not in seen:
            seen.add(g.key())
            kept.append(g)
    return FieldPresentation(base, tuple(kept))


def _clean_gen(g: PElement, base: RootedBase) -> PElement:
    """Rescale a generator by base elements: clear its denominator into the
    base lattice and strip base-lattice monomial content.  Rescaling by
    nonzero base elements changes neither the field nor any relative order
    over a field containing the base."""
    ctx = g.ctx
    p = ctx.p
    if not g.den.is_one:
        s = 0
        for k in g.den.terms:
            for i, e in enumerate(k):
                if e:
                    need = g.den.level - base.depths[i] - _vp(e, p)
                    if need > s:
                        s = need
        # g * den^(p^s) = num * den^(p^s - 1), computed without any gcd
        num = g.num
        for i in range(s):
            step = g.den.frob(i)
            for _ in range(p - 1):
                num = _poly_mul(num, step)
        g = PElement._raw(ctx, num, ctx.one.den)
    lv = g.num.level
    lo = None
    for k in g.num.terms:
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
        num = {tuple(a - b for a, b in zip(k, floored)): c for k, c in g.num.terms.items()}
        g = PElement._raw(ctx, PPoly(ctx, lv, num).normalized(), ctx.one.den)
    return g


def _trivial_col(ctx):
    return Col(0, (Fraction(0),) * ctx.nvars)


def _ppow_of(d: int, p: int) -> int:
    t = 0
    while d > 1:
        d //= p
        t += 1
    return t


def compositum(f: FieldPresentation, g: FieldPresentation) -> FieldPresentation:
    return make_field(f.gens + g.gens, ctx=f.ctx, base=f.base.join(g.base))


def adjoin(f: FieldPresentation, elems) -> FieldPresentation:
    return make_field(f.gens + tuple(elems), ctx=f.ctx, base=f.base)


def frob_field(f: FieldPresentation, n: int) -> FieldPresentation:
    """F^(p^n); for n > 0 the result no longer contains k."""
    if n == 0:
        return f
    return make_field([g.frob(n) for g in f.gens], ctx=f.ctx, base=f.base.shift(n))


def k_of_Kpn(f: FieldPresentation, n: int) -> FieldPresentation:
    """k(F^(p^n))."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    depths = tuple(max(c - n, 0) for c in f.base.depths)
    return make_field([g.frob(n) for g in f.gens], ctx=f.ctx, base=RootedBase(f.ctx, depths))


# -- relative orders and the reduction lemma --------------------------------


def order_over(x: PElement, field: FieldPresentation) -> int:
    """o(x/F): least s with x^(p^s) in F."""
    key = x.key()
    hit = field._ord_cache.get(key)
    if hit is not None:
        return hit
    s = field.base.lattice_level(x)
    while s > 0 and field.contains(x.frob(s - 1)):
        s -= 1
    field._ord_cache[key] = s
    return s


def reduce_to_level(field: FieldPresentation, ell: int) -> FieldPresentation:
    """Subfield containing every x in F with lattice level <= ell over F.base.

    Fixpoint of the reduction lemma across generator directions; the result
    has every relative order <= ell, so its span stays small.
    """
    gens = list(field.gens)
    changed = True
    while changed:
        changed = False
        for t in range(len(gens)):
            others = gens[:t] + gens[t + 1 :]
            sub = FieldPresentation(field.base, tuple(others))
            e = order_over(gens[t], sub)
            if e == 0:
                gens.pop(t)
                changed = True
                break
            if e > ell:
                gens[t] = gens[t].frob(e - ell)
                changed = True
    return FieldPresentation(field.base, tuple(gens))


def reduce_rel(field: FieldPresentation, low: FieldPresentation, ell: int = 1) -> FieldPresentation:
    """Subfield of F containing low^(p^-ell) & F, with small size over low.

    Like reduce_to_level but relative: every direction (generators and root
    depths beyond low's) is cut to relative order <= ell over the compositum
    of low and the remaining directions.
    """
    ctx = field.ctx
    depths = list(field.base.depths)
    gens = list(field.gens)
    changed = True
    while changed:
        changed = False
        for t in range(len(gens)):
            others = gens[:t] + gens[t + 1 :]
            sub = make_field(others + list(low.gens), ctx=ctx, base=RootedBase(ctx, tuple(depths)).join(low.base))
            e = order_over(gens[t], sub)
            if e == 0:
                gens.pop(t)
                changed = True
                break
            if e > ell:
                gens[t] = gens[t].frob(e - ell)
                changed = True
        if changed:
            continue
        for i in range(ctx.nvars):
            li = low.base.depths[i]
            if depths[i] <= li + ell or li < 0:
                continue
            # o(X^(1/p^c) / E) = c - d* with d* the deepest root of X_i already
            # in the fully lowered compositum E; the reduction lemma then cuts
            # the depth to d* + ell in one jump
            lowered = list(depths)
            lowered[i] = li
            sub = make_field(
                gens + list(low.gens), ctx=ctx, base=RootedBase(ctx, tuple(lowered)).join(low.base)
            )
            d = _root_depth(sub, i, max(li, 0), depths[i])
            if d + ell < depths[i]:
                depths[i] = d + ell
                changed = True
    return make_field(
        gens + list(low.gens), ctx=ctx, base=RootedBase(ctx, tuple(depths)).join(low.base)
    )


def _root_depth(field: FieldPresentation, i: int, start: int, cap: int) -> int:
    """Max d <= cap with X_i^(1/p^d) in the field, given the start depth is.

    Climbs one depth at a time; each probe reduces the field relative to the
    root content certified so far, so the spans involved stay tiny even when
    the generators are deep.
    """
    ctx = field.ctx
    d = start
    while d < cap:
        root = ctx.root_mono(i, 1, d + 1)
        if field.contains_quick(root):
            d += 1
            continue
        low = FieldPresentation(field.base.deepen(i, d))
        probe = reduce_rel(field, low, 1)
        if probe.contains(root):
            d += 1
        else:
            break
    return d


# -- membership / degree public wrappers ------------------------------------


def member_field(x: PElement, f: FieldPresentation) -> bool:
    return f.contains(x)


def degree(f: FieldPresentation, over: FieldPresentation = None) -> int:
    if over is None:
        return f.degree()
    if not f.contains_field(over):
        raise NotASubfield(f"{over} is not inside {f}")
    meet = f.base.meet(over.base)
    return f.deg_over(meet) // over.deg_over(meet)


def field_equal(f: FieldPresentation, g: FieldPresentation) -> bool:
    if f is g:
        return True
    meet = f.base.meet(g.base)
    return f.deg_over(meet) == g.deg_over(meet) and f.contains_field(g)


# -- intersections -----------------------------------------------------------


def intersect_fields(
    f: FieldPresentation,
    g: FieldPresentation,
    cap: int = MAX_SPAN_ROWS,
    prefer=(),
) -> FieldPresentation:
    """F & G as a field presentation (subspace intersection + regeneration).

    `prefer` lists candidate generators tried first when re-presenting the
    intersection; natural elements (e.g. frobenius powers of tower
    generators) keep presentations small across iterated intersections.
    """
    meet = f.base.meet(g.base)
    if f.is_rooted_only and g.is_rooted_only:
        return FieldPresentation(meet)
    # every element of f & g has lattice level over the meet bounded by both
    # sides' content, so reduce the bigger side before spanning anything
    low_meet = FieldPresentation(meet)
    ell = min(_content_level(f, meet), _content_level(g, meet))
    if _content_level(f, meet) > ell:
        f = reduce_rel(f, low_meet, ell)
    if _content_level(g, meet) > ell:
        g = reduce_rel(g, low_meet, ell)
    span_f = f.span_over(meet, cap)
    span_g = g.span_over(meet, cap)
    rows = intersect_spans(span_f, span_g)
    wspan = Span(meet)
    for r in rows:
        wspan.insert_vec(r)
    rank = len(wspan.rows)
    elems = [c for c in prefer if wspan.contains_element(c)]
    elems += sorted(
        (recompose(r, meet) for r in rows),
        key=lambda e: (len(e.num.terms) + len(e.den.terms), e.num.level, e.key()),
    )
    # regenerate as a chain: preferred elements first (kept even when they
    # are redundant as generators, low relative orders keep spans cheap),
    # then the smallest recomposed rows until the degree is reached
    cur = FieldPresentation(meet)
    preferred = len(elems) - rank
    for idx, cand in enumerate(elems):
        if cur.deg_over(meet) == rank:
            break
        if not cur.contains(cand):
            cur = adjoin(cur, [cand])
        elif idx < preferred:
            cur = adjoin(cur, [cand])
    if cur.deg_over(meet) != rank:
        raise InternalInconsistency("intersection regeneration lost content")
    return cur


def _content_level(f: FieldPresentation, base: RootedBase) -> int:
    """Largest lattice level over `base` of anything in f's presentation."""
    ell = 0
    for i, c in enumerate(f.base.depths):
        ell = max(ell, c - base.depths[i])
    for g in f.gens:
        ell = max(ell, base.lattice_level(g))
    return ell


def minimize_gens(f: FieldPresentation) -> FieldPresentation:
    """Drop redundant generators, latest-first (earlier gens are preferred)."""
    gens = list(f.gens)
    changed = True
    while changed:
        changed = False
        for t in range(len(gens) - 1, -1, -1):
            rest = FieldPresentation(f.base, tuple(gens[:t] + gens[t + 1 :]))
            if rest.contains(gens[t]):
                gens.pop(t)
                changed = True
                break
    return FieldPresentation(f.base, tuple(gens))


def step_root(f: FieldPresentation, low: FieldPresentation) -> FieldPresentation:
    """low^(p^-1) & F for low inside F."""
    reduced = reduce_rel(f, low, 1)
    low_root = make_field(
        [g.frob(-1) for g in low.gens],
        ctx=f.ctx,
        base=RootedBase(f.ctx, tuple(c + 1 for c in low.base.depths)),
    )
    prefer = list(low.gens)
    for g in f.gens:
        for t in range(f.base.lattice_level(g), -1, -1):
            prefer.append(g.frob(t))  # deepest frobenius power first: chains
    return intersect_fields(reduced, low_root, prefer=prefer)


def root_intersect(f: FieldPresentation, n: int, low: FieldPresentation = None) -> FieldPresentation:
    """low^(p^-n) & F (low defaults to k).  Iterated one-root steps."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    cur = low if low is not None else trivial_field(f.ctx)
    for _ in range(n):
        nxt = step_root(f, cur)
        if field_equal(nxt, cur):
            return cur  # stationary: stays stationary for all larger n
        cur = nxt
    return cur


def root_intersect_chain(f: FieldPresentation, n: int, low: FieldPresentation = None):
    """[low^(p^-j) & F for j in 0..n]; shares work across the chain."""
    cur = low if low is not None else trivial_field(f.ctx)
    out = [cur]
    for _ in range(n):
        nxt = step_root(f, cur)
        if field_equal(nxt, cur):
            nxt = cur
        out.append(nxt)
        cur = nxt
    return out


# -- relatively perfect closure ----------------------------------------------


def rp_closure(f: FieldPresentation, over: FieldPresentation = None) -> FieldPresentation:
    """Largest relatively perfect subextension of F/L: stationary L(F^(p^n))."""
    low = over if over is not None else trivial_field(f.ctx)
    base0 = f.base.meet(low.base)
    cur = compositum(low, f)
    i = 0
    while True:
        i += 1
        nxt = compositum(low, frob_field(f, i))
        if nxt.deg_over(base0) == cur.deg_over(base0):
            return nxt
        cur = nxt


# -- r-bases, exponents, defining equations ----------------------------------


@dataclass(frozen=True)
class RBaseReport:
    elements: tuple
    exponents: tuple
    relative_to: FieldPresentation


def r_generators(f: FieldPresentation, over: FieldPresentation) -> list:
    """Natural r-generator of F/L: base roots beyond L plus the gens."""
    out = []
    for i, c in enumerate(f.base.depths):
        if c > over.base.depths[i] or (c > 0 and not over.contains(f.ctx.root_mono(i, 1, c))):
            out.append(f.ctx.root_mono(i, 1, c))
    out.extend(f.gens)
    return out


def rbase(f: FieldPresentation, over: FieldPresentation = None) -> list:
    """Minimal generator set of F over L(F^p) (greedy removal)."""
    low = over if over is not None else trivial_field(f.ctx)
    cands = r_generators(f, low)
    lkp = compositum(low, frob_field(f, 1))
    keep = list(cands)
    changed = True
    while changed:
        changed = False
        for t in range(len(keep)):
            rest = adjoin(lkp, keep[:t] + keep[t + 1 :])
            if rest.contains(keep[t]):
                keep.pop(t)
                changed = True
                break
    return keep


def canonical_rbase(f: FieldPresentation, over: FieldPresentation = None) -> RBaseReport:
    """Greedy maximal-exponent r-base (completion algorithm).

    Ties break on the candidate's position in the stored generator order, so
    the element list is deterministic; the exponent list is order-invariant.
    """
    low = over if over is not None else trivial_field(f.ctx)
    cands = r_generators(f, low)
    chosen = []
    exps = []
    cur = low
    while True:
        best = None
        best_o = 0
        for a in cands:
            o = order_over(a, cur)
            if o > best_o:
                best, best_o = a, o
        if best is None:
            break
        chosen.append(best)
        exps.append(best_o)
        cands = [a for a in cands if a is not best]
        cur = adjoin(cur, [best])
    return RBaseReport(tuple(chosen), tuple(exps), low)


def exponents(f: FieldPresentation, over: FieldPresentation = None) -> tuple:
    return canonical_rbase(f, over).exponents


def di_finite(f: FieldPresentation, over: FieldPresentation = None) -> int:
    return len(canonical_rbase(f, over).exponents)


@dataclass(frozen=True)
class DefiningEquations:
    """alpha_j^(p^m_j) = sum_eps C_eps * (alpha_1..alpha_{j-1})^(p^m_j eps)."""

    report: RBaseReport
    constants: tuple  # per j >= 2: dict eps-tuple -> C_eps in L


def defining_equations(f: FieldPresentation, over: FieldPresentation = None, report: RBaseReport = None) -> DefiningEquations:
    low = over if over is not None else trivial_field(f.ctx)
    if report is None:
        report = canonical_rbase(f, low)
    ctx = f.ctx
    p = ctx.p
    alphas = report.elements
    ms = report.exponents
    all_consts = []
    low_basis = low.basis_elements()
    for j in range(2, len(alphas) + 1):
        mj = ms[j - 1]
        sizes = [p ** (ms[i] - mj) for i in range(j - 1)]
        count = 1
        for s in sizes:
            count *= s
        if count * len(low_basis) > MAX_EQUATION_TERMS:
            raise BudgetExceeded(f"defining equation family of size {count}")
        eps_list = [()]
        for s in sizes:
            eps_list = [pref + (v,) for pref in eps_list for v in range(s)]
        span = Span(low.base, track=True)
        tags = []
        for eps in eps_list:
            mono = ctx.one
            for i, e in enumerate(eps):
                if e:
                    mono = mono * alphas[i].frob(mj) ** e
            for gamma in low_basis:
                tags.append((eps, gamma))
                span.insert_vec(decompose(gamma * mono, low.base))
        target = alphas[j - 1].frob(mj)
        coords = span.coords(target)
        if coords is None:
            raise InternalInconsistency("defining equation expansion failed")
        consts: dict = {}
        for idx, c in coords.items():
            eps, gamma = tags[idx]
            consts[eps] = consts.get(eps, ctx.zero) + c * gamma
        consts = {e: v for e, v in consts.items() if not v.is_zero}
        for v in consts.values():
            if not low.contains(v):
                raise InternalInconsistency("defining constant escaped the base field")
        all_consts.append(consts)
    return DefiningEquations(report, tuple(all_consts))


# -- linear disjointness and modularity ---------------------------------------


def linearly_disjoint(e1: FieldPresentation, e2: FieldPresentation) -> bool:
    """Linear disjointness over the base field: [E1E2:B] = [E1:B][E2:B].

    B is k (or the deepest k^(p^c) inside both when the fields are frobenius
    images); shared pure roots deliberately count against disjointness.
    """
    meet = e1.base.meet(e2.base)
    ctx = e1.ctx
    base = RootedBase(ctx, tuple(min(d, 0) for d in meet.depths))
    return compositum(e1, e2).deg_over(base) == e1.deg_over(base) * e2.deg_over(base)


def linearly_disjoint_over_intersection(
    e1: FieldPresentation, e2: FieldPresentation, cap: int = MAX_SPAN_ROWS
) -> bool:
    """Sweedler-style disjointness over D = E1 & E2, via the degree identity
    [E1E2:B] * [D:B] = [E1:B] * [E2:B] over any common base B inside D."""
    meet = e1.base.meet(e2.base)
    d1 = e1.deg_over(meet)
    d2 = e2.deg_over(meet)
    dc = compositum(e1, e2).deg_over(meet)
    dm = intersect_fields(e1, e2, cap).deg_over(meet)
    return dc * dm == d1 * d2


@dataclass(frozen=True)
class ModularityVerdict:
    modular: bool
    witness: object = None  # (j, eps, C) from the criterion or a failing level n
    method: str = "criterion"


def is_modular(
    f: FieldPresentation,
    over: FieldPresentation = None,
    method: str = "criterion",
    cap: int = MAX_SPAN_ROWS,
) -> ModularityVerdict:
    """Modularity of F/L.

    method: "criterion" (canonical r-base defining constants), "direct"
    (level-by-level linear disjointness) or "both" (cross-checked; raises
    InternalInconsistency on disagreement).
    """
    low = over if over is not None else trivial_field(f.ctx)
    verdict_c = verdict_d = None
    if method in ("criterion", "both"):
        verdict_c = _modular_criterion(f, low)
    if method in ("direct", "both"):
        verdict_d = _modular_direct(f, low, cap)
    if verdict_c is not None and verdict_d is not None and verdict_c.modular != verdict_d.modular:
        raise InternalInconsistency(
            f"modularity criterion={verdict_c.modular} direct={verdict_d.modular} for {f} over {low}"
        )
    return verdict_c if verdict_c is not None else verdict_d


def _modular_criterion(f: FieldPresentation, low: FieldPresentation) -> ModularityVerdict:
    report = canonical_rbase(f, low)
    if len(report.elements) <= 1:
        return ModularityVerdict(True)
    eqs = defining_equations(f, low, report)
    for j, consts in zip(range(2, len(report.elements) + 1), eqs.constants):
        mj = report.exponents[j - 1]
        for eps, c in sorted(consts.items()):
            if not f.contains(c.frob(-mj)):
                return ModularityVerdict(False, witness=(j, eps, c))
    return ModularityVerdict(True)


def _modular_direct(f: FieldPresentation, low: FieldPresentation, cap: int) -> ModularityVerdict:
    report = canonical_rbase(f, low)
    e = max(report.exponents, default=0)
    for n in range(1, e):
        if not linearly_disjoint_over_intersection(frob_field(f, n), low, cap):
            return ModularityVerdict(False, witness=n, method="direct")
    return ModularityVerdict(True, method="direct")


# -- modular closures ----------------------------------------------------------


def um_closure(f: FieldPresentation, over: FieldPresentation = None):
    """Saturation upward: adjoin roots of failing defining constants.

    Returns (closure, adjoined) where adjoined lists the roots added, in
    order.  The closure is modular over L and contained in L^(p^-e).
    """
    low = over if over is not None else trivial_field(f.ctx)
    cur = f
    adjoined = []
    guard = 0
    while True:
        guard += 1
        if guard > 64:
            raise BudgetExceeded("um saturation did not stabilize")
        report = canonical_rbase(cur, low)
        if len(report.elements) <= 1:
            return cur, adjoined
        eqs = defining_equations(cur, low, report)
        new = []
        for j, consts in zip(range(2, len(report.elements) + 1), eqs.constants):
            mj = report.exponents[j - 1]
            for eps, c in sorted(consts.items()):
                root = c.frob(-mj)
                if not cur.contains(root):
                    new.append(root)
        if not new:
            return cur, adjoined
        adjoined.extend(new)
        cur = adjoin(cur, new)


def lm_lower_saturation(f: FieldPresentation, over: FieldPresentation = None, extra_candidates=()):
    """Necessary-condition saturation toward lm(F/L) from below.

    Scans two-term relations x^(p^j) = a*y^(p^j) + b with a, b in the current
    lower bound; when a p^-j root of a or b is provably outside F, y^(p^j)
    is forced into lm and gets adjoined.  certified=True means the sandwich
    closed: F is modular over the returned field, which then equals lm(F/L).
    """
    low = over if over is not None else trivial_field(f.ctx)
    cur = low
    forced = []
    changed = True
    while changed:
        changed = False
        report = canonical_rbase(f, cur)
        xs = list(report.elements) + [g for g in extra_candidates if not cur.contains(g)]
        ys = list(dict.fromkeys(list(report.elements) + list(extra_candidates) + r_generators(f, cur)))
        for x in xs:
            ox = order_over(x, cur)
            for j in range(1, ox + 1):
                xj = x.frob(j)
                for y in ys:
                    if y.key() == x.key():
                        continue
                    yj = y.frob(j)
                    if cur.contains(yj) or not f.contains(yj):
                        continue
                    ab = _two_term_coords(xj, yj, cur)
                    if ab is None:
                        continue
                    a, b = ab
                    bad = (not a.is_zero and not f.contains(a.frob(-j))) or (
                        not b.is_zero and not f.contains(b.frob(-j))
                    )
                    if bad:
                        forced.append(yj)
                        cur = adjoin(cur, [yj])
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break
    certified = _modular_criterion(f, cur).modular
    return cur, certified, forced


def _two_term_coords(xj: PElement, yj: PElement, low: FieldPresentation):
    """Solve xj = a*yj + b with a, b in low; None if unsolvable."""
    span = Span(low.base, track=True)
    tags = []
    for gamma in low.basis_elements():
        tags.append(("a", gamma))
        span.insert_vec(decompose(gamma * yj, low.base))
    for gamma in low.basis_elements():
        tags.append(("b", gamma))
        span.insert_vec(decompose(gamma, low.base))
    coords = span.coords(xj)
    if coords is None:
        return None
    a = low.ctx.zero
    b = low.ctx.zero
    for idx, c in coords.items():
        kind, gamma = tags[idx]
        if kind == "a":
            a = a + c * gamma
        else:
            b = b + c * gamma
    return a, b

"""Exact arithmetic in the perfect closure of a rational function field.

Elements live in Omega = F_p(X_1^(p^-inf), ..., X_r^(p^-inf)): fractions of
sparse polynomials whose monomial exponents are nonnegative rationals with
p-power denominators.  A polynomial stores integer exponent vectors together
with a single scale `level`; the true exponent of variable i in a monomial
with key `k` is k[i] / p^level.

Canonical form: polynomial levels are minimal, fraction is gcd-reduced after
rescaling exponents to integers, and the denominator is monic under graded
lexicographic order.  Two equal elements of Omega are structurally equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy.polys.domains import GF
from sympy.polys.rings import ring as _sympy_ring

MonKey = tuple  # integer exponent vector at the poly's level

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class PrimeP:
    """The field characteristic; validated prime (2 <= p, small in practice)."""

    p: int

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")


@dataclass(frozen=True)
class PExp:
    """Exponent num / p^denom_pow with p not dividing num unless denom_pow=0."""

    num: int
    denom_pow: int

    @staticmethod
    def make(num: int, denom_pow: int, p: int) -> "PExp":
        if num < 0 or denom_pow < 0:
            raise ValueError("negative exponent data")
        while denom_pow > 0 and num % p == 0:
            num //= p
            denom_pow -= 1
        if num == 0:
            denom_pow = 0
        return PExp(num, denom_pow)

    @staticmethod
    def from_fraction(q: Fraction, p: int) -> "PExp":
        if q < 0:
            raise ValueError("exponents must be nonnegative")
        den = q.denominator
        t = 0
        while den % p == 0:
            den //= p
            t += 1
        if den != 1:
            raise ValueError(f"denominator of {q} is not a power of p={p}")
        return PExp(q.numerator, t)

    def as_fraction(self, p: int) -> Fraction:
        return Fraction(self.num, p**self.denom_pow)


@dataclass(frozen=True)
class PMonomial:
    """A single term: nonzero coefficient in F_p and exponent map."""

    coeff: int
    exps: tuple  # tuple of PExp, one per variable (zero exponents included)


class Context:
    """Shared characteristic and variable names; intern one per (p, names)."""

    _cache: dict = {}

    def __new__(cls, p: int, names: tuple):
        names = tuple(names)
        key = (p, names)
        ctx = cls._cache.get(key)
        if ctx is None:
            ctx = super().__new__(cls)
            ctx._init(p, names)
            cls._cache[key] = ctx
        return ctx

    def _init(self, p: int, names: tuple):
        PrimeP(p)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        self.p = p
        self.names = names
        self.nvars = len(names)
        self._zero_key = (0,) * self.nvars
        self.zero = PElement._raw(self, PPoly(self, 0, {}), PPoly(self, 0, {self._zero_key: 1}))
        self.one = self.scalar(1)

    def __repr__(self):
        return f"Context(p={self.p}, vars={','.join(self.names)})"

    # -- constructors -------------------------------------------------

    def scalar(self, c: int) -> "PElement":
        c %= self.p
        one = PPoly(self, 0, {self._zero_key: 1})
        if c == 0:
            return PElement._raw(self, PPoly(self, 0, {}), one)
        return PElement._raw(self, PPoly(self, 0, {self._zero_key: c}), one)

    def var(self, i) -> "PElement":
        return self.root_mono(i, 1, 0)

    def var_named(self, name: str) -> "PElement":
        return self.var(self.names.index(name))

    def root_mono(self, i, num: int, denom_pow: int, coeff: int = 1) -> "PElement":
        """coeff * X_i^(num/p^denom_pow)."""
        if isinstance(i, str):
            i = self.names.index(i)
        e = PExp.make(num, denom_pow, self.p)
        key = [0] * self.nvars
        key[i] = e.num
        poly = PPoly(self, e.denom_pow, {tuple(key): coeff % self.p})
        one = PPoly(self, 0, {self._zero_key: 1})
        return PElement._raw(self, poly.normalized(), one)

    def from_monomials(self, monos) -> "PElement":
        acc = self.zero
        for m in monos:
            term = self.scalar(m.coeff)
            for i, e in enumerate(m.exps):
                if e.num:
                    term = term * self.root_mono(i, e.num, e.denom_pow)
            acc = acc + term
        return acc

    @property
    def sring(self):
        return _gf_ring(self.p, self.names)


@lru_cache(maxsize=None)
def _gf_ring(p: int, names: tuple):
    R, *gens = _sympy_ring(",".join(f"v{i}" for i in range(len(names))), GF(p, symmetric=False))
    return R


def _scale_keys(terms: dict, p: int, n: int) -> dict:
    if n == 0:
        return terms
    f = p**n
    return {tuple(e * f for e in k): c for k, c in terms.items()}


class PPoly:
    """Sparse polynomial with p-power-denominator exponents (see module doc)."""

    __slots__ = ("ctx", "level", "terms", "_key")

    def __init__(self, ctx: Context, level: int, terms: dict):
        self.ctx = ctx
        self.level = level
        self.terms = terms
        self._key = None

    # construction keeps raw data; normalized() produces canonical form
    def normalized(self) -> "PPoly":
        p = self.ctx.p
        terms = {k: c % p for k, c in self.terms.items() if c % p}
        level = self.level
        while level > 0 and all(all(e % p == 0 for e in k) for k in terms):
            terms = {tuple(e // p for e in k): c for k, c in terms.items()}
            level -= 1
        if not terms:
            level = 0
        return PPoly(self.ctx, level, terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_one(self) -> bool:
        return self.terms == {self.ctx._zero_key: 1}

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def key(self):
        if self._key is None:
            self._key = (self.level, tuple(sorted(self.terms.items())))
        return self._key

    def align(self, level: int) -> dict:
        return _scale_keys(self.terms, self.ctx.p, level - self.level)

    def leading(self, level=None):
        """Max key under graded lex at the given alignment level."""
        lv = self.level if level is None else level
        terms = self.align(lv)
        return max(terms, key=lambda k: (sum(k), k)), lv

    def monomials(self):
        p = self.ctx.p
        out = []
        for k, c in sorted(self.terms.items()):
            out.append(
                PMonomial(c, tuple(PExp.make(e, self.level, p) for e in k))
            )
        return out

    def frob(self, n: int) -> "PPoly":
        if self.is_zero or n == 0:
            return self
        if n > 0:
            if self.level >= n:
                return PPoly(self.ctx, self.level - n, self.terms)
            return PPoly(self.ctx, 0, _scale_keys(self.terms, self.ctx.p, n - self.level)).normalized()
        return PPoly(self.ctx, self.level - n, self.terms).normalized()


def _poly_add(a: PPoly, b: PPoly) -> PPoly:
    lv = max(a.level, b.level)
    out = dict(a.align(lv))
    p = a.ctx.p
    for k, c in b.align(lv).items():
        c2 = (out.get(k, 0) + c) % p
        if c2:
            out[k] = c2
        else:
            out.pop(k, None)
    return PPoly(a.ctx, lv, out).normalized()


def _poly_neg(a: PPoly) -> PPoly:
    p = a.ctx.p
    return PPoly(a.ctx, a.level, {k: (-c) % p for k, c in a.terms.items()})


def _poly_mul(a: PPoly, b: PPoly) -> PPoly:
    if a.is_zero or b.is_zero:
        return PPoly(a.ctx, 0, {})
    lv = max(a.level, b.level)
    ta, tb = a.align(lv), b.align(lv)
    p = a.ctx.p
    out: dict = {}
    if len(ta) > len(tb):
        ta, tb = tb, ta
    for ka, ca in ta.items():
        for kb, cb in tb.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            c = (out.get(k, 0) + ca * cb) % p
            if c:
                out[k] = c
            else:
                out.pop(k, None)
    return PPoly(a.ctx, lv, out).normalized()


def _content_key(terms: dict):
    it = iter(terms)
    first = next(it)
    lo = list(first)
    for k in it:
        for i, e in enumerate(k):
            if e < lo[i]:
                lo[i] = e
    return tuple(lo)


def _shift_down(terms: dict, shift) -> dict:
    if not any(shift):
        return terms
    return {tuple(e - s for e, s in zip(k, shift)): c for k, c in terms.items()}


def _sympy_gcd_quo(ctx: Context, num: dict, den: dict):
    R = ctx.sring
    a = R.from_dict({k: int(c) for k, c in num.items()})
    b = R.from_dict({k: int(c) for k, c in den.items()})
    g = a.gcd(b)
    if g == R.one:
        return num, den
    qa = {m: int(c) for m, c in a.quo(g).terms()}
    qb = {m: int(c) for m, c in b.quo(g).terms()}
    return qa, qb


class PElement:
    """An element of Omega in canonical fraction form.  Immutable."""

    __slots__ = ("ctx", "num", "den", "_key", "_hash")

    def __init__(self, ctx: Context, num: PPoly, den: PPoly):
        num = num.normalized()
        den = den.normalized()
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        num, den = _reduce_fraction(ctx, num, den)
        self.ctx = ctx
        self.num = num
        self.den = den
        self._key = None
        self._hash = None

    @staticmethod
    def _raw(ctx, num: PPoly, den: PPoly) -> "PElement":
        el = object.__new__(PElement)
        el.ctx = ctx
        el.num = num
        el.den = den
        el._key = None
        el._hash = None
        return el

    # -- canonical identity -------------------------------------------

    def key(self):
        if self._key is None:
            self._key = (self.num.key(), self.den.key())
        return self._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, PElement):
            return NotImplemented
        return self.ctx is other.ctx and self.key() == other.key()

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_one(self) -> bool:
        return self.num.is_one and self.den.is_one

    def level(self) -> int:
        """Smallest m with frobenius(self, m) having all-integer exponents."""
        return max(self.num.level, self.den.level)

    def in_lattice(self, depths) -> bool:
        """True if every exponent of X_i lies in p^-depths[i] * Z."""
        for poly in (self.num, self.den):
            lv = poly.level
            for k in poly.terms:
                for i, e in enumerate(k):
                    d = lv - depths[i]
                    if d > 0 and e % (self.ctx.p**d):
                        return False
        return True

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: "PElement") -> "PElement":
        self._check(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.den.key() == other.den.key():
            return PElement(self.ctx, _poly_add(self.num, other.num), self.den)
        num = _poly_add(_poly_mul(self.num, other.den), _poly_mul(other.num, self.den))
        return PElement(self.ctx, num, _poly_mul(self.den, other.den))

    def __neg__(self) -> "PElement":
        return PElement._raw(self.ctx, _poly_neg(self.num), self.den)

    def __sub__(self, other: "PElement") -> "PElement":
        return self + (-other)

    def __mul__(self, other: "PElement") -> "PElement":
        self._check(other)
        if self.is_zero or other.is_zero:
            return self.ctx.zero
        return PElement(self.ctx, _poly_mul(self.num, other.num), _poly_mul(self.den, other.den))

    def inv(self) -> "PElement":
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero")
        return PElement(self.ctx, self.den, self.num)

    def __truediv__(self, other: "PElement") -> "PElement":
        return self * other.inv()

    def __pow__(self, n: int) -> "PElement":
        if n < 0:
            return self.inv() ** (-n)
        acc = self.ctx.one
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base if n > 1 else base
            n >>= 1
        return acc

    def frob(self, n: int) -> "PElement":
        """self^(p^n); exact for negative n as well (p-power roots)."""
        if n == 0 or self.is_zero:
            return self
        return PElement._raw(self.ctx, self.num.frob(n), self.den.frob(n))

    def _check(self, other):
        if self.ctx is not other.ctx:
            raise ValueError("mixed contexts")

    # -- display --------------------------------------------------------

    def __repr__(self):
        return self.as_str()

    def as_str(self) -> str:
        num = _poly_str(self.num)
        if self.den.is_one:
            return num
        return f"({num}) / ({_poly_str(self.den)})"


def _poly_str(poly: PPoly) -> str:
    if poly.is_zero:
        return "0"
    ctx = poly.ctx
    parts = []
    for k, c in sorted(poly.terms.items(), key=lambda kv: (-sum(kv[0]), kv[0])):
        factors = []
        if c != 1 or not any(k):
            factors.append(str(c))
        for i, e in enumerate(k):
            if e:
                q = Fraction(e, ctx.p**poly.level)
                if q == 1:
                    factors.append(ctx.names[i])
                else:
                    factors.append(f"{ctx.names[i]}^({q})")
        parts.append("*".join(factors))
    return " + ".join(parts)


def _reduce_fraction(ctx: Context, num: PPoly, den: PPoly):
    if num.is_zero:
        return num, PPoly(ctx, 0, {ctx._zero_key: 1})
    if den.is_one:
        return num, den
    lv = max(num.level, den.level)
    tn, td = num.align(lv), den.align(lv)
    shift = tuple(min(a, b) for a, b in zip(_content_key(tn), _content_key(td)))
    tn, td = _shift_down(tn, shift), _shift_down(td, shift)
    if len(tn) > 1 and len(td) > 1:
        tn, td = _sympy_gcd_quo(ctx, tn, td)
    # monic denominator under graded lex
    lead = max(td, key=lambda k: (sum(k), k))
    c = td[lead]
    if c != 1:
        cinv = pow(c, -1, ctx.p)
        tn = {k: (v * cinv) % ctx.p for k, v in tn.items()}
        td = {k: (v * cinv) % ctx.p for k, v in td.items()}
    return PPoly(ctx, lv, tn).normalized(), PPoly(ctx, lv, td).normalized()


# -- module-level operation aliases matching the public surface ---------


def add(a: PElement, b: PElement) -> PElement:
    return a + b


def mul(a: PElement, b: PElement) -> PElement:
    return a * b


def neg(a: PElement) -> PElement:
    return -a


def inv(a: PElement) -> PElement:
    return a.inv()


def frobenius(a: PElement, n: int) -> PElement:
    return a.frob(n)


def level(a: PElement) -> int:
    return a.level()

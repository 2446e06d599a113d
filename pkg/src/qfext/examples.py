"""The worked extension families used across tests and experiments.

All of these live over rational function fields k = F_p(vars) and present
unbounded-exponent towers by explicit level rules; the recurrences are the
interesting part (each new level mixes a fresh deep root into the previous
generator via a p-th root).
"""

from functools import lru_cache

from .fields import FieldPresentation, make_field
from .pexp import Context, PElement
from .towers import ProbePolicy, Tower


def theta_chain(ctx: Context, n: int, var_x=0, var_c=1, var_t=2) -> PElement:
    """theta_1 = Zc^(1/p) X^(1/p^2) + Zt^(1/p); theta_n mixes X^(1/p^(2n))."""
    X, C, T = ctx.var(var_x), ctx.var(var_c), ctx.var(var_t)
    th = C.frob(-1) * X.frob(-2) + T.frob(-1)
    for m in range(2, n + 1):
        th = C.frob(-1) * X.frob(-2 * m) + th.frob(-1)
    return th


def e1_context(p: int = 2) -> Context:
    return Context(p, ("X", "Z1", "Z2"))


def e1_tower(p: int = 2, policy: ProbePolicy = ProbePolicy()) -> Tower:
    """K_n = k(X^(1/p^(2n)), theta_n): relatively perfect, di 2, not
    lq-modular; its closure tower is k(X^(1/p^n))."""
    ctx = e1_context(p)

    def gens_of(n):
        return [ctx.root_mono(0, 1, 2 * n), theta_chain(ctx, n)]

    def samples_of(n):
        return [theta_chain(ctx, i) for i in range(1, n + 1)]

    return Tower(ctx, "e1", gens_of, policy, samples_of)


def tensor_tower(p: int = 2, policy: ProbePolicy = ProbePolicy()) -> Tower:
    """K_n = k(X^(1/p^(2n)), Y^(1/p^n)): modular, hence lq-modular; di 2."""
    ctx = Context(p, ("X", "Y"))

    def gens_of(n):
        return [ctx.root_mono(0, 1, 2 * n), ctx.root_mono(1, 1, n)]

    return Tower(ctx, "tensor", gens_of, policy)


def simple_tower(p: int = 2, policy: ProbePolicy = ProbePolicy()) -> Tower:
    """k(X^(1/p^n)): the q-simple prototype."""
    ctx = Context(p, ("X", "Y"))

    def gens_of(n):
        return [ctx.root_mono(0, 1, n)]

    return Tower(ctx, "simple", gens_of, policy)


# -- the T-family (iterated theta chains over fresh coefficient pairs) --------


def t_context(p: int, s: int) -> Context:
    names = ["X"]
    for j in range(1, s + 1):
        names += [f"a{j}", f"b{j}"]
    return Context(p, tuple(names))


def t_element(ctx: Context, j: int, i: int):
    """T_i^j: T_i^0 = X^(1/p^i); T_i^j = a_j^(1/p) T_{2i}^{j-1} + (T_{i-1}^j)^(1/p)."""
    return _t_element_cached(ctx, j, i)


@lru_cache(maxsize=None)
def _t_element_cached(ctx: Context, j: int, i: int):
    if j == 0:
        return ctx.root_mono(0, 1, i) if i else ctx.var(0)
    a = ctx.var_named(f"a{j}")
    b = ctx.var_named(f"b{j}")
    if i == 1:
        return a.frob(-1) * _t_element_cached(ctx, j - 1, 2) + b.frob(-1)
    return a.frob(-1) * _t_element_cached(ctx, j - 1, 2 * i) + _t_element_cached(ctx, j, i - 1).frob(-1)


def e3_tower(s: int, p: int = 2, policy: ProbePolicy = ProbePolicy()) -> Tower:
    """K_s = k(T_0(X), ..., T_s(X)); e-closed of order s."""
    ctx = t_context(p, s)

    def gens_of(n):
        gens = [ctx.root_mono(0, 1, (2**s) * n)]
        for j in range(1, s + 1):
            gens.append(t_element(ctx, j, (2 ** (s - j)) * n))
        return gens

    def samples_of(n):
        out = []
        for j in range(1, s + 1):
            for i in range(1, (2 ** (s - j)) * n + 1):
                out.append(t_element(ctx, j, i))
        return out

    return Tower(ctx, f"e3[{s}]", gens_of, policy, samples_of)


def e5_tower(p: int = 2, policy: ProbePolicy = ProbePolicy()) -> Tower:
    """K_1 = k(T_0, T_1, T_2)(a1^(1/p^inf)): dm 2 but dmi 3."""
    ctx = t_context(p, 2)

    def gens_of(n):
        return [
            ctx.root_mono(0, 1, 4 * n),
            ctx.var_named("a1").frob(-2 * n),
            t_element(ctx, 1, 2 * n),
            t_element(ctx, 2, n),
        ]

    def samples_of(n):
        out = [ctx.var_named("a1").frob(-2 * n), ctx.var_named("b1").frob(-2 * n)]
        for i in range(1, 2 * n + 1):
            out.append(t_element(ctx, 1, i))
        for i in range(1, n + 1):
            out.append(t_element(ctx, 2, i))
        return out

    return Tower(ctx, "e5", gens_of, policy, samples_of)


# -- the upper-closure example -------------------------------------------------


def ulqm_context(p: int = 2) -> Context:
    return Context(p, ("X", "Y", "Z"))


def ulqm_truncation(n: int, m: int, p: int = 2) -> FieldPresentation:
    """Finite stage of k(X^(1/p^inf), theta^(1/p^inf)) with
    theta = X^(1/p^2) Y^(1/p) + Z^(1/p)."""
    ctx = ulqm_context(p)
    theta = ctx.var(0).frob(-2) * ctx.var(1).frob(-1) + ctx.var(2).frob(-1)
    return make_field([ctx.root_mono(0, 1, n), theta.frob(-m)])

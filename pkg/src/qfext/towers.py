"""Unbounded-exponent q-finite extensions presented by level rules.

A Tower materializes finite truncations K_1 <= K_2 <= ... of an extension
K/k; every invariant of K/k is probed level by level and reported as a
StabilizedValue carrying a certified/heuristic flag: stationarity inside a
finite window plus a recorded bound argument is certification in the sense
used here, never a claim about unprobed levels.

Invariants use the intersection filtration k_j = k^(p^-j) & K: the table
U_s^j = j - o_s(k_j/k), its first unbounded row (the lq-modularity index),
the closure tower built from frobenius-shifted intersections, the iterated
closure chain with its minimal decomposition rank, and the reverse chain of
smallest subfields with lq-modular quotient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BudgetExceeded, MonotonicityViolation, UncertifiedStep
from .fields import (
    FieldPresentation,
    compositum,
    degree,
    di_finite,
    exponents,
    field_equal,
    frob_field,
    k_of_Kpn,
    lm_lower_saturation,
    make_field,
    step_root,
    trivial_field,
)
from .pexp import Context
from .span import RootedBase


@dataclass(frozen=True)
class ProbePolicy:
    """Probe depth and stabilization window; verify_levels caps the exact
    K_{n-1} <= K_n membership check (recurrences vouch beyond it)."""

    n_max: int = 8
    window: int = 3
    verify_levels: int = 4


@dataclass(frozen=True)
class StabilizedValue:
    value: object
    first_stable_level: int
    window_len: int
    certified: bool
    note: str = ""

    def map(self, f):
        return StabilizedValue(f(self.value), self.first_stable_level, self.window_len, self.certified, self.note)


class Tower:
    """Finitely presented tower of fields; levels are cached and verified."""

    def __init__(self, ctx: Context, name: str, gens_of, policy: ProbePolicy = ProbePolicy(), samples_of=None):
        self.ctx = ctx
        self.name = name
        self._gens_of = gens_of
        self.policy = policy
        self._samples_of = samples_of
        self._levels: dict = {}
        self._verified = 0
        self._caches: dict = {}

    def materialize(self, n: int) -> FieldPresentation:
        if n < 0:
            raise ValueError("levels start at 0")
        if n > self.policy.n_max:
            raise BudgetExceeded(f"level {n} beyond probe budget {self.policy.n_max}")
        hit = self._levels.get(n)
        if hit is not None:
            return hit
        if n == 0:
            f = trivial_field(self.ctx)
        else:
            f = make_field(list(self._gens_of(n)), ctx=self.ctx)
        self._levels[n] = f
        if 1 <= n <= self.policy.verify_levels and (n - 1) in self._levels:
            prev = self._levels[n - 1]
            if not f.contains_field(prev):
                raise MonotonicityViolation(f"{self.name}: level {n-1} not inside level {n}")
            self._verified = max(self._verified, n)
        return f

    def samples(self, n: int):
        """Known interesting elements at level n (recurrence symbol values)."""
        if self._samples_of is None:
            return []
        return list(self._samples_of(n))

    def __repr__(self):
        return f"Tower({self.name})"


def constant_tower(f: FieldPresentation, name: str, policy: ProbePolicy = ProbePolicy()) -> Tower:
    return Tower(f.ctx, name, lambda n: list(f.gens) + f.base.root_elements(), policy)


def derived_tower(ctx, name, level_fn, policy, samples_of=None) -> Tower:
    t = Tower(ctx, name, lambda n: [], policy, samples_of)

    def materialize(n, _t=t, _fn=level_fn):
        if n > _t.policy.n_max:
            raise BudgetExceeded(f"level {n} beyond probe budget {_t.policy.n_max}")
        hit = _t._levels.get(n)
        if hit is None:
            hit = _t._levels[n] = _fn(n)
        return hit

    t.materialize = materialize
    return t


# -- pairing a stage tower under a bigger tower -----------------------------


def _stage_level(tower: Tower, stage, m: int) -> FieldPresentation:
    """Largest probed stage level inside tower level m (stage may be None=k)."""
    if stage is None:
        return trivial_field(tower.ctx)
    K = tower.materialize(m)
    cache = tower._caches.setdefault(("stage", id(stage)), {})
    if m in cache:
        return cache[m]
    best = trivial_field(tower.ctx)
    for n in range(min(m, stage.policy.n_max), -1, -1):
        cand = stage.materialize(n)
        if K.contains_field(cand):
            best = cand
            break
    cache[m] = best
    return best


# -- the intersection filtration --------------------------------------------


def _kn_chain(tower: Tower, m: int, j_max: int, stage=None):
    """[L^(p^-j) & K_m for j=0..j_max] with L the paired stage level."""
    key = ("chain", id(stage) if stage is not None else None, m)
    chain = tower._caches.get(key)
    if chain is None:
        chain = tower._caches[key] = [_stage_level(tower, stage, m)]
    K = tower.materialize(m)
    while len(chain) <= j_max:
        nxt = step_root(K, chain[-1])
        if field_equal(nxt, chain[-1]):
            nxt = chain[-1]
        chain.append(nxt)
    return chain


def kn_of(tower: Tower, j: int, stage=None, strict: bool = False) -> StabilizedValue:
    """k_j = k^(p^-j) & K as a stabilized level field.

    Certified when the degree is stationary across the window: the chain is
    increasing and bounded by [k^(p^-j):k] = p^(rj), so stationarity plus
    the bound is the recorded certificate.
    """
    pol = tower.policy
    degs = []
    values = []
    stable_at = None
    for m in range(1, pol.n_max + 1):
        f = _kn_chain(tower, m, j, stage)[j]
        values.append(f)
        degs.append(degree(f))
        if len(degs) >= pol.window and len(set(degs[-pol.window :])) == 1:
            stable_at = m - pol.window + 1
            break
    if stable_at is None:
        if strict:
            raise BudgetExceeded(f"k_{j} of {tower.name} did not stabilize by level {pol.n_max}")
        return StabilizedValue(values[-1], len(degs), 1, False, "no stabilization window within probe budget")
    note = f"degree stationary for {pol.window} levels; bounded above by p^(r*{j})"
    return StabilizedValue(values[-1], stable_at, pol.window, True, note)


@dataclass(frozen=True)
class UTable:
    """U_s^j = j - o_s(k_j/k) for s rows, j columns 1..N."""

    rows: tuple  # rows[s-1][j-1]
    exps: tuple  # e_s^j
    verdicts: tuple  # per row: "bounded" | "growing" | "unknown"
    certified: tuple  # per row: window certificates honored

    def row(self, s):
        return self.rows[s - 1]


def u_table(tower: Tower, n_levels: int = None, stage=None, t_rows: int = None) -> UTable:
    pol = tower.policy
    N = n_levels if n_levels is not None else pol.n_max - pol.window + 1
    ks = [kn_of(tower, j, stage) for j in range(1, N + 1)]
    if t_rows is None:
        t_rows = max((len(exponents_rel(tower, k.value, stage)) for k in ks), default=0)
    exps = []
    for k in ks:
        e = exponents_rel(tower, k.value, stage)
        exps.append(tuple(e) + (0,) * (t_rows - len(e)))
    rows = []
    for s in range(1, t_rows + 1):
        row = tuple(j - exps[j - 1][s - 1] for j in range(1, N + 1))
        for a, b in zip(row, row[1:]):
            if b < a:
                raise MonotonicityViolation(f"U_{s} row decreases: {row}")
        rows.append(row)
    verdicts = []
    certs = []
    W = pol.window
    for s, row in enumerate(rows, start=1):
        stationary_tail = len(set(row[-W:])) == 1 if len(row) >= W else False
        grows_each_window = all(
            len(set(row[i : i + W])) > 1 for i in range(0, len(row) - W + 1)
        ) if len(row) >= W else row[-1] > row[0]
        if grows_each_window and not stationary_tail:
            verdicts.append("growing")
            certs.append(all(k.certified for k in ks))
        elif stationary_tail:
            verdicts.append("bounded")
            certs.append(all(k.certified for k in ks))
        else:
            verdicts.append("unknown")
            certs.append(False)
    return UTable(tuple(rows), tuple(tuple(e[s] for e in exps) for s in range(t_rows)), tuple(verdicts), tuple(certs))


def exponents_rel(tower: Tower, f: FieldPresentation, stage) -> tuple:
    """Exponents of the intersection field over the deepest paired stage level."""
    if stage is None:
        return exponents(f)
    for n in range(stage.policy.n_max, -1, -1):
        cand = stage.materialize(n)
        if f.contains_field(cand):
            return exponents(f, over=cand)
    return exponents(f)


def tower_di(tower: Tower, stage=None) -> StabilizedValue:
    """di(K/L) = sup di(k_j/L); certified at the variable-count bound or on a
    stationary window."""
    pol = tower.policy
    r = tower.ctx.nvars
    best = 0
    history = []
    for j in range(1, pol.n_max - pol.window + 2):
        k = kn_of(tower, j, stage)
        d = len(exponents_rel(tower, k.value, stage))
        if d < best:
            raise MonotonicityViolation("di of the filtration decreased")
        best = d
        history.append(d)
        if stage is None and best == r:
            return StabilizedValue(best, j, 1, True, "reached the imperfection-degree bound di(k)=r")
        if len(history) >= pol.window and len(set(history[-pol.window :])) == 1:
            return StabilizedValue(best, j - pol.window + 1, pol.window, True, f"stationary for {pol.window} levels")
    return StabilizedValue(best, len(history), 1, False, "di still moving at probe budget")


def ilqm(tower: Tower, stage=None) -> StabilizedValue:
    """First s whose U_s^j column is unbounded; t+1 means lq-modular."""
    di = tower_di(tower, stage)
    table = u_table(tower, stage=stage, t_rows=di.value)
    val = di.value + 1
    certified = di.certified
    for s, verdict in enumerate(table.verdicts, start=1):
        certified = certified and table.certified[s - 1]
        if verdict == "growing":
            val = s
            break
        if verdict == "unknown":
            val = s
            certified = False
            break
    if val == 1:
        raise MonotonicityViolation("Ilqm < 2 is impossible; presentation bug")
    return StabilizedValue(val, 0, tower.policy.window, certified, "windowed row classification")


@dataclass(frozen=True)
class LqVerdict:
    ilqm: StabilizedValue
    t: int
    lq_modular: bool
    evidence: UTable


def lq_verdict(tower: Tower, stage=None) -> LqVerdict:
    di = tower_di(tower, stage)
    table = u_table(tower, stage=stage, t_rows=di.value)
    iv = ilqm(tower, stage)
    return LqVerdict(iv, di.value, iv.value == di.value + 1, table)


# -- relatively perfect closure ----------------------------------------------


def tower_contains(big: Tower, small: Tower, shift: int = None, levels=None) -> bool:
    """Windowed level-wise containment small_n <= big_(n+shift)."""
    pol = big.policy
    shifts = range(0, pol.window + 1) if shift is None else [shift]
    levels = levels or range(1, pol.window + 3)
    for s in shifts:
        ok = True
        for n in levels:
            if n + s > pol.n_max:
                ok = False
                break
            if not big.materialize(n + s).contains_field(small.materialize(n)):
                ok = False
                break
        if ok:
            return True
    return False


def tower_equiv(a: Tower, b: Tower) -> bool:
    return tower_contains(a, b) and tower_contains(b, a)


def tower_rp(tower: Tower):
    """(n0, rp tower): K/k_n0 is relatively perfect at probe depth, and the
    rp tower realizes the stationary k(K^(p^c)) chain."""
    pol = tower.policy
    # smallest c with k(K^(p^c)) ~ k(K^(p^(c+1))) level-wise in the window
    def shifted(c):
        return derived_tower(
            tower.ctx,
            f"rp[{c}]({tower.name})",
            lambda n, c=c: k_of_Kpn(tower.materialize(min(n + c, pol.n_max)), c),
            pol,
            tower._samples_of,
        )

    c = 0
    while c + 1 <= pol.window + 1:
        if tower_equiv(shifted(c), shifted(c + 1)):
            break
        c += 1
    rp = shifted(c)
    # n0: smallest n with k_n(K_{m+1}^p) >= K_m across the window
    n0 = None
    for n in range(0, pol.n_max - pol.window):
        ok = True
        for m in range(1, pol.window + 1):
            if m + 1 > pol.n_max:
                break
            kn = kn_of(tower, n).value if n else trivial_field(tower.ctx)
            lift = compositum(kn, k_of_Kpn(tower.materialize(m + 1), 1))
            if not lift.contains_field(tower.materialize(m)):
                ok = False
                break
        if ok:
            n0 = n
            break
    certified = n0 is not None
    sv = StabilizedValue(
        n0 if n0 is not None else pol.n_max,
        n0 if n0 is not None else pol.n_max,
        pol.window,
        certified,
        "k_n(K^p) recovers K level-wise in the window" if certified else "no relative perfection witness at probe depth",
    )
    return sv, rp


# -- the closure tower ---------------------------------------------------------


def h_closure(tower: Tower, stage=None):
    """Largest relatively perfect lq-modular subextension, as a tower.

    Levels follow the shifted filtration k(k_n^(p^(e_i0^n))); the report
    carries the size/perfection/lq-modularity checks on the probed levels.
    """
    pol = tower.policy
    verdict = lq_verdict(tower, stage)
    i0 = verdict.ilqm.value
    t = verdict.t
    N = len(verdict.evidence.rows[0]) if verdict.evidence.rows else 0
    if verdict.lq_modular:
        _, rp = tower_rp(tower)
        report = {
            "ilqm": i0,
            "di": t,
            "e_bound": 0,
            "lq_modular_input": True,
            "certified": verdict.ilqm.certified,
        }
        return rp, report
    e_bound = 0
    for s in range(1, i0):
        e_bound = max(e_bound, max(verdict.evidence.rows[s - 1]))

    def raw_level(j):
        # k(k_j^(p^(e_i0^j))): the shifted filtration whose union is the closure
        kj = kn_of(tower, j, stage).value
        exps = exponents_rel(tower, kj, stage)
        e = exps[i0 - 1] if i0 - 1 < len(exps) else 0
        img = frob_field(kj, e)
        depths = tuple(max(c, 0) for c in img.base.depths)
        return make_field(list(img.gens), ctx=tower.ctx, base=RootedBase(tower.ctx, depths))

    raw_pol = ProbePolicy(2 * pol.n_max, pol.window, 0)
    raw = derived_tower(tower.ctx, f"Hraw({tower.name})", raw_level, raw_pol)
    canon = canonical_relevel(raw, name=f"H({tower.name})")
    report = {
        "ilqm": i0,
        "di": t,
        "e_bound": e_bound,
        "di_M": tower_di(canon).value,
        "relatively_perfect": tower_equiv(canon, tower_rp(canon)[1]),
        "lq_modular_input": False,
        "certified": verdict.ilqm.certified,
    }
    report["di_matches"] = report["di_M"] == i0 - 1
    return canon, report


def canonical_relevel(tower: Tower, name=None) -> Tower:
    """Re-present a tower by its own intersection filtration k^(p^-n) & M."""
    pol = tower.policy

    def level_fn(n):
        if n == 0:
            return trivial_field(tower.ctx)
        return kn_of(tower, n).value

    return derived_tower(tower.ctx, name or f"canon({tower.name})", level_fn, pol, tower._samples_of)


def h_chain(tower: Tower):
    """H_0 = k <= H_1 <= ... until K/H_i is finite at probe depth."""
    pol = tower.policy
    stages = []
    cur_stage = None
    for i in range(1, tower.ctx.nvars + 2):
        rel_di = tower_di(tower, cur_stage)
        if rel_di.value == 0:
            break
        h, report = h_closure(tower, cur_stage)
        stages.append((h, report))
        nxt = h
        if cur_stage is not None:
            nxt = merge_stage(cur_stage, h)
        cur_stage = nxt
    return stages


def merge_stage(a: Tower, b: Tower) -> Tower:
    def level_fn(n):
        return compositum(a.materialize(n), b.materialize(n))

    return derived_tower(a.ctx, f"{a.name}*{b.name}", level_fn, a.policy, a._samples_of)


def dm(tower: Tower) -> StabilizedValue:
    """Degree of modularity: first i with K/H_i finite at probe depth."""
    stages = h_chain(tower)
    certified = all(rep["certified"] for _, rep in stages)
    value = len(stages) if stages else 1
    last_stage = stages[-1][0] if stages else None
    rel = tower_di(tower, last_stage)
    if rel.value == 0:
        note = "quotient became finite after the last closure stage"
    else:
        note = "chain still open at probe depth"
        certified = False
    return StabilizedValue(value, value, tower.policy.window, certified and rel.certified, note)


def is_e_closed(tower: Tower) -> bool:
    return dm(tower).value == tower_di(tower).value


def is_q_simple(obj) -> bool:
    if isinstance(obj, Tower):
        return tower_di(obj).value == 1
    return di_finite(obj) == 1


# -- the reverse (lqm) chain ----------------------------------------------------


def tower_lm(tower: Tower, stage=None):
    """Level-wise lower saturation toward lm(K/k) with a probe certificate."""
    pol = tower.policy

    def level_fn(n):
        K = tower.materialize(n)
        low = _stage_level(tower, stage, n)
        cand = tower.samples(min(n + 2, pol.n_max)) + tower.samples(n)
        cand = [c for c in cand if K.contains(c)]
        lowf, certified, forced = lm_lower_saturation(K, over=low, extra_candidates=cand)
        level_fn.cert[n] = certified
        return lowf

    level_fn.cert = {}
    t = derived_tower(tower.ctx, f"lm({tower.name})", level_fn, pol, tower._samples_of)
    return t, level_fn.cert


def tower_lqm(tower: Tower, stage=None):
    """lqm(K/L) = rp(lm(K/L)/L) as a tower, plus a deferred certificate
    reader (the saturation certificates fill in as levels materialize)."""
    lm_t, certs = tower_lm(tower, stage)
    _, rp = tower_rp(lm_t)

    def cert():
        return all(certs.values()) if certs else True

    return rp, cert


def mi_chain(tower: Tower):
    """Descending chain m_{j+1} = lqm(m_j/k) ending at k; dmi = its length."""
    pol = tower.policy
    chain = [tower]
    certs = []
    cur = tower
    for _ in range(tower.ctx.nvars + 2):
        if _tower_is_trivial(cur):
            break
        nxt, cert_fn = tower_lqm(cur)
        # force materialization inside probe depth, then read certificates
        for n in range(1, pol.window + 1):
            nxt.materialize(n)
        chain.append(nxt)
        certs.append(cert_fn())
        cur = nxt
    if not _tower_is_trivial(chain[-1]):
        raise UncertifiedStep("mi chain did not reach k within the variable-count bound")
    dmi_val = len(chain) - 1
    certified = all(certs)
    return chain, StabilizedValue(dmi_val, dmi_val, pol.window, certified, "chain reached k")


def _tower_is_trivial(tower: Tower) -> bool:
    pol = tower.policy
    probe = range(1, pol.window + 1)
    return all(degree(tower.materialize(n)) == 1 for n in probe)


def decomposition_report(tower: Tower) -> dict:
    """Both decompositions: the closure chain and the reverse lqm chain."""
    stages = h_chain(tower)
    dm_sv = dm(tower)
    chain, dmi_sv = mi_chain(tower)
    di_sv = tower_di(tower)
    assert dm_sv.value <= di_sv.value, "dm exceeded di(rp) bound"
    assert dm_sv.value <= dmi_sv.value, "dm exceeded dmi"
    return {
        "di": di_sv,
        "dm": dm_sv,
        "dmi": dmi_sv,
        "h_chain": [rep for _, rep in stages],
        "mi_chain_len": len(chain) - 1,
        "e_closed": dm_sv.value == di_sv.value,
    }

"""Exact top-K search for non-redundant dependency rules ranked by MI.

The search walks the antecedent lattice level by level.  For every node and
every (consequent, polarity) it keeps an *alive* flag; a flag dies for the
whole subtree once no specialisation can be both non-redundant and good
enough for the current top-K.  Both death conditions are inherited by
supersets, so a child is alive for a consequent only if all its immediate
subsets are.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .dataset import Dataset, popcount
from .measures import leverage, mi_cells, mi_upper_bound

log = logging.getLogger(__name__)

__all__ = [
    "Rule",
    "TopKList",
    "MinerConfig",
    "rank_key",
    "make_rule",
    "mine_top_k",
    "is_redundant",
    "expand_frontier",
    "canonical_emission",
]

# pruning slack; only ever makes pruning weaker
_REL_SLACK = 1e-9


@dataclass(frozen=True)
class Rule:
    """Dependency rule ``antecedent -> consequent = polarity``.

    ``n_c`` and ``n_qc`` are taken at the rule's polarity.
    """

    antecedent: tuple[int, ...]
    consequent: int
    polarity: int
    n_q: int
    n_c: int
    n_qc: int
    n: int
    goodness: float

    @property
    def leverage(self) -> float:
        return leverage(self.n, self.n_q, self.n_c, self.n_qc)

    @property
    def confidence(self) -> float:
        return self.n_qc / self.n_q

    @property
    def neg_confidence(self) -> float:
        """P(C != polarity | not Q)."""
        n_nq = self.n - self.n_q
        return ((self.n - self.n_c) - (self.n_q - self.n_qc)) / n_nq if n_nq else float("nan")

    def format(self, names: Sequence[str]) -> str:
        lhs = "&".join(names[a] for a in self.antecedent)
        rhs = names[self.consequent] if self.polarity else "~" + names[self.consequent]
        return f"{lhs} -> {rhs}"


def rank_key(r: Rule):
    """Strict total order: better rules sort first."""
    return (-r.goodness, -r.n_q, len(r.antecedent), r.antecedent, r.consequent, r.polarity)


def make_rule(d: Dataset, antecedent: Sequence[int], consequent: int, polarity: int) -> Rule:
    """Count and score one rule from the data (no validity check)."""
    q = tuple(antecedent)
    n_q = popcount(d.cover(q))
    n_a = int(d.supports[consequent])
    n_qa = popcount(d.cover(q) & d.words[consequent])
    mi = float(mi_cells([d.n], [n_q], [n_a], [n_qa])[0])
    if polarity:
        return Rule(q, consequent, 1, n_q, n_a, n_qa, d.n, mi)
    return Rule(q, consequent, 0, n_q, d.n - n_a, n_q - n_qa, d.n, mi)


def canonical_emission(antecedent: Sequence[int], consequent: int,
                       consequent_pool=None) -> bool:
    """Single-attribute rules a -> b and b -> a express one dependency; keep a < b.

    When ``a`` is not itself an allowed consequent, b -> a is the only form
    the search can produce and it is kept.
    """
    if len(antecedent) > 1:
        return True
    a = antecedent[0]
    if consequent_pool is not None and a not in consequent_pool:
        return True
    return a < consequent


class TopKList:
    """The K best rules under :func:`rank_key` plus the first runner-up."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self._keys: list = []
        self._rules: list[Rule] = []

    def __len__(self):
        return min(len(self._rules), self.k)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __getitem__(self, i):
        return self.rules[i]

    @property
    def rules(self) -> list[Rule]:
        return self._rules[: self.k]

    @property
    def tau(self) -> float:
        """Goodness of the K-th rule, -inf while fewer than K are held."""
        if len(self._rules) < self.k:
            return -math.inf
        return self._rules[self.k - 1].goodness

    @property
    def boundary_tie(self) -> bool:
        """True when the best excluded rule ties the K-th rule on goodness."""
        return (len(self._rules) > self.k
                and self._rules[self.k].goodness == self._rules[self.k - 1].goodness)

    def insert(self, r: Rule) -> bool:
        key = rank_key(r)
        if len(self._keys) > self.k and key >= self._keys[-1]:
            return False
        pos = bisect.bisect_left(self._keys, key)
        if pos < len(self._keys) and self._keys[pos] == key:
            return False
        self._keys.insert(pos, key)
        self._rules.insert(pos, r)
        if len(self._keys) > self.k + 1:
            self._keys.pop()
            self._rules.pop()
        return pos < self.k


@dataclass(frozen=True)
class MinerConfig:
    k: int = 100
    max_antecedent: Optional[int] = None
    consequents: Optional[tuple[int, ...]] = None
    polarity_mode: str = "both"
    use_bounds: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_antecedent is not None and self.max_antecedent < 1:
            raise ValueError("max_antecedent must be >= 1")
        if self.polarity_mode not in ("both", "positive"):
            raise ValueError("polarity_mode must be 'both' or 'positive'")

    @property
    def polarities(self) -> tuple[int, ...]:
        return (1, 0) if self.polarity_mode == "both" else (1,)


def _usable_attributes(d: Dataset) -> list[int]:
    return [int(a) for a in np.flatnonzero(~d.degenerate)]


def _consequents(d: Dataset, cfg: MinerConfig) -> list[int]:
    usable = set(_usable_attributes(d))
    if cfg.consequents is None:
        return sorted(usable)
    return sorted(a for a in set(cfg.consequents) if a in usable)


def is_redundant(candidate: Rule, parents: Sequence[Rule]) -> bool:
    """True iff some generalisation with the same consequent literal is at least as good.

    Parents that do not express positive dependence toward the candidate's
    polarity are not rules of that literal and are ignored.
    """
    best = -math.inf
    cand = set(candidate.antecedent)
    for p in parents:
        if (p.consequent != candidate.consequent or p.polarity != candidate.polarity
                or not set(p.antecedent) < cand or p.n * p.n_qc <= p.n_q * p.n_c):
            continue
        best = max(best, p.goodness)
    return candidate.goodness <= best


def _node_bound(d: Dataset, cover: np.ndarray, n_q: int, cons: Sequence[int],
                polarities: Sequence[int]) -> float:
    best = 0.0
    for a in cons:
        n_qa = popcount(cover & d.words[a])
        n_a = int(d.supports[a])
        if 1 in polarities:
            best = max(best, mi_upper_bound(n_qa, n_a, d.n))
        if 0 in polarities:
            best = max(best, mi_upper_bound(n_q - n_qa, d.n - n_a, d.n))
    return best


def expand_frontier(d: Dataset, node: Sequence[int], tau: float,
                    cfg: MinerConfig) -> Iterator[tuple[int, ...]]:
    """Canonical extensions of ``node`` that could still reach goodness ``tau``.

    A child ``node + (a,)`` with ``a > max(node)`` is yielded when the MI
    bound of some permitted consequent outside the child reaches ``tau``.
    """
    usable = _usable_attributes(d)
    cons = _consequents(d, cfg)
    start = node[-1] if node else -1
    base = d.cover(node)
    for a in usable:
        if a <= start:
            continue
        child = tuple(node) + (a,)
        cover = base & d.words[a]
        n_q = popcount(cover)
        if n_q == 0:
            continue
        if tau == -math.inf:
            yield child
            continue
        free = [c for c in cons if c not in child]
        if free and _node_bound(d, cover, n_q, free, cfg.polarities) >= tau:
            yield child


@dataclass
class _Level:
    """One lattice level: antecedents with their covers and per-consequent state."""

    keys: list                # antecedent tuples
    covers: np.ndarray        # (L, W) uint64
    alive: np.ndarray         # (L, m, 2) bool; col 0: c=1, col 1: c=0
    best_incl: np.ndarray     # (L, m, 2) best goodness among valid rules with antecedent <= node


# bound on words touched per batch, keeps the (B, m, W) temporary small
_BATCH_WORDS = 1 << 22


@dataclass
class _Search:
    d: Dataset
    cfg: MinerConfig
    cons: np.ndarray
    cons_words: np.ndarray
    n_a: np.ndarray
    top: TopKList
    pool: frozenset = frozenset()
    evaluated: int = 0
    stats: dict = field(default_factory=dict)

    def evaluate(self, keys: list, covers: np.ndarray, alive: np.ndarray,
                 best_gen: np.ndarray) -> _Level:
        """Score a batch of antecedents, emit rules, return the surviving nodes."""
        out = []
        m, w = self.cons_words.shape
        step = max(1, _BATCH_WORDS // max(1, m * w))
        for lo in range(0, len(keys), step):
            sl = slice(lo, lo + step)
            out.append(self._evaluate(keys[sl], covers[sl], alive[sl], best_gen[sl]))
        if not out:
            return _Level([], covers[:0], alive[:0], best_gen[:0])
        return _Level([k for lv in out for k in lv.keys],
                      np.concatenate([lv.covers for lv in out]),
                      np.concatenate([lv.alive for lv in out]),
                      np.concatenate([lv.best_incl for lv in out]))

    def _evaluate(self, keys, covers, alive, best_gen) -> _Level:
        n = self.d.n
        b = len(keys)
        self.evaluated += b
        n_q = np.bitwise_count(covers).sum(axis=1, dtype=np.int64)[:, None]
        n_qa = np.bitwise_count(covers[:, None, :] & self.cons_words[None]).sum(
            axis=2, dtype=np.int64)
        n_a = np.broadcast_to(self.n_a, n_qa.shape)
        n_q = np.broadcast_to(n_q, n_qa.shape)
        pos_room = n_qa
        neg_room = n_q - n_qa
        # one pass: rule MI, then the specialisation bounds for c=1 and c=0
        vals = mi_cells(n,
                        np.stack([np.maximum(n_q, 1), np.maximum(pos_room, 1),
                                  np.maximum(neg_room, 1)]),
                        np.stack([n_a, n_a, n - n_a]),
                        np.stack([n_qa, np.maximum(pos_room, 1), np.maximum(neg_room, 1)]))
        mi = np.where(n_q > 0, vals[0], 0.0)
        ub = np.stack([np.where(pos_room > 0, vals[1], 0.0),
                       np.where(neg_room > 0, vals[2], 0.0)], axis=2)
        lev = n * n_qa - n_q * n_a
        valid = np.stack([lev > 0, lev < 0], axis=2)
        emit = alive & valid & (mi[..., None] > best_gen)
        tau = self.top.tau
        if tau > -math.inf:
            emit &= mi[..., None] >= tau
        for i, r, col in zip(*np.nonzero(emit)):
            q = keys[i]
            a = int(self.cons[r])
            if not canonical_emission(q, a, self.pool):
                continue
            nq, na, nqa = int(n_q[i, r]), int(n_a[i, r]), int(n_qa[i, r])
            if col == 0:
                rule = Rule(q, a, 1, nq, na, nqa, n, float(mi[i, r]))
            else:
                rule = Rule(q, a, 0, nq, n - na, nq - nqa, n, float(mi[i, r]))
            self.top.insert(rule)

        best_incl = np.where(valid, np.maximum(best_gen, mi[..., None]), best_gen)
        if self.cfg.max_antecedent is not None and len(keys[0]) >= self.cfg.max_antecedent:
            return _Level([], covers[:0], alive[:0], best_incl[:0])
        keep = alive & np.stack([pos_room > 0, neg_room > 0], axis=2)
        if self.cfg.use_bounds:
            keep &= ~(ub < best_incl - _slack(best_incl))
            tau = self.top.tau
            if tau > -math.inf:
                keep &= ~(ub < tau - _REL_SLACK * max(1.0, abs(tau)))
        live = keep.any(axis=(1, 2))
        idx = np.flatnonzero(live)
        return _Level([keys[i] for i in idx], covers[idx], keep[idx], best_incl[idx])


def _slack(v):
    with np.errstate(invalid="ignore"):
        return np.where(np.isfinite(v), _REL_SLACK * np.maximum(1.0, np.abs(v)), 0.0)


def mine_top_k(d: Dataset, cfg: MinerConfig) -> TopKList:
    """The K best non-redundant positive-leverage rules, exactly."""
    usable = _usable_attributes(d)
    if d.n < 2 or len(usable) < 2:
        raise ValueError("dataset is degenerate: need n >= 2 and two non-constant attributes")
    cons = np.array(_consequents(d, cfg), dtype=np.int64)
    top = TopKList(cfg.k)
    if cons.size == 0:
        return top
    m = cons.size
    s = _Search(d, cfg, cons, d.words[cons], d.supports[cons].astype(np.int64), top,
                pool=frozenset(int(a) for a in cons))
    pol_mask = np.ones((m, 2), dtype=bool)
    if cfg.polarity_mode == "positive":
        pol_mask[:, 1] = False
    cons_pos = {int(a): i for i, a in enumerate(cons)}

    keys, alive = [], []
    for a in usable:
        al = pol_mask.copy()
        if a in cons_pos:
            al[cons_pos[a]] = False
        if al.any():
            keys.append((a,))
            alive.append(al)
    if not keys:
        return top
    level = s.evaluate(keys, d.words[[k[0] for k in keys]], np.stack(alive),
                       np.full((len(keys), m, 2), -math.inf))
    size = 1
    while level.keys:
        size += 1
        pos = {q: i for i, q in enumerate(level.keys)}
        by_prefix: dict[tuple[int, ...], list[int]] = {}
        for q in level.keys:
            by_prefix.setdefault(q[:-1], []).append(q[-1])
        children, parents = [], []
        for prefix, lasts in by_prefix.items():
            lasts.sort()
            for i, a in enumerate(lasts):
                for b in lasts[i + 1:]:
                    child = prefix + (a, b)
                    subs = [pos.get(child[:j] + child[j + 1:]) for j in range(size)]
                    if None in subs:
                        continue
                    children.append(child)
                    parents.append(subs)
        if not children:
            break
        # every attribute of the child sits in some immediate subset, so the
        # intersection already kills consequents inside the antecedent
        par = np.array(parents)
        alive = level.alive[par].all(axis=1)
        best_gen = level.best_incl[par].max(axis=1)
        ok = alive.any(axis=(1, 2))
        idx = np.flatnonzero(ok)
        # last two entries of each parent list are child minus b and child minus a
        covers = level.covers[par[idx, -1]] & d.words[[children[i][-1] for i in idx]]
        level = s.evaluate([children[i] for i in idx], covers, alive[idx], best_gen[idx])
        log.debug("level %d: %d live nodes, tau=%g", size, len(level.keys), top.tau)
    s.stats["evaluated"] = s.evaluated
    top.stats = s.stats
    log.info("mined %d rules from %d evaluated antecedents", len(top), s.evaluated)
    return top

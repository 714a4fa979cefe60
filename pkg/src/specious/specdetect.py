"""Post-processing detection of specious rules in a ranked rule list.

Each rule is compared only against rules ranked above it.  The first better
rule that explains it away fixes its verdict and mediator.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence


from .dataset import Dataset, popcount
from .measures import (
    ConditionalStats,
    PairCounts,
    birch_p,
    birch_p_nested_sub,
    birch_p_nested_super,
    conditional_leverages,
    conditional_signs,
    leverage,
    signed_conditional_mi,
)
from .miner import Rule, rank_key

log = logging.getLogger(__name__)

__all__ = [
    "VerdictKind",
    "Verdict",
    "AlignedPair",
    "align_pair",
    "orientation_filter",
    "check_equivalence",
    "classify_pair",
    "spec_detect",
    "ys_bound_check",
    "evidence_p",
]


class VerdictKind(enum.Enum):
    NON_SPECIOUS = "non-specious"
    TYPE0 = "type0"  # equivalent antecedents
    TYPE1 = "type1"  # superfluous generalisation
    TYPE2 = "type2"  # Yule-Simpson reversal
    TYPE3 = "type3"  # insignificant partial dependence


@dataclass(frozen=True)
class AlignedPair:
    """Judged rule as Q' -> C' = c and mediator as X' -> C' = a."""

    judged: Rule
    mediator: Rule
    q: tuple[int, ...]
    x: tuple[int, ...]
    consequent: int
    c: int
    a: int
    judged_reversed: bool = False
    mediator_reversed: bool = False


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    mediator: Optional[Rule] = None
    mediator_index: Optional[int] = None
    evidence: Optional[ConditionalStats] = None
    equivalence_form: Optional[str] = None
    pair: Optional[AlignedPair] = None
    pathological: bool = False

    @property
    def specious(self) -> bool:
        return self.kind is not VerdictKind.NON_SPECIOUS


NON_SPECIOUS = Verdict(VerdictKind.NON_SPECIOUS)


def align_pair(ri: Rule, rj: Rule) -> Optional[AlignedPair]:
    """Orient both rules onto a shared consequent attribute, or None.

    Only single-attribute sides are reversed; ``{x} -> A=a`` and
    ``{A} -> x=a`` express the same dependency.
    """
    Q, C, X, A = ri.antecedent, ri.consequent, rj.antecedent, rj.consequent
    c, a = ri.polarity, rj.polarity
    if C == A:
        return AlignedPair(ri, rj, Q, X, C, c, a)
    if X == (C,):
        return AlignedPair(ri, rj, Q, (A,), C, c, a, mediator_reversed=True)
    if Q == (A,):
        return AlignedPair(ri, rj, (C,), X, A, c, a, judged_reversed=True)
    if len(Q) == 1 and Q == X:
        return AlignedPair(ri, rj, (C,), (A,), Q[0], c, a, True, True)
    return None


def orientation_filter(pair: AlignedPair, pc: PairCounts) -> bool:
    """Keep unless polarities differ while X' and Q' are positively dependent."""
    if pair.c == pair.a:
        return True
    return not pc.n * pc.n_xq > pc.n_x * pc.n_q


def check_equivalence(pc: PairCounts) -> Optional[str]:
    """'direct' if X' and Q' cover the same rows, 'complement' if X' covers ~Q'."""
    if pc.n_x == pc.n_q == pc.n_xq:
        return "direct"
    if pc.n_xq == 0 and pc.n_x + pc.n_q == pc.n:
        return "complement"
    return None


def ys_bound_check(delta_qc: float, delta_xq: float, delta_xc: float, p_x: float) -> bool:
    """Necessary condition for a Yule-Simpson reversal of Q -> C by X."""
    if not 0.0 < p_x < 1.0:
        raise ValueError("p_x must lie strictly between 0 and 1")
    return delta_qc <= delta_xq * delta_xc / (p_x * (1.0 - p_x))


def evidence_p(pc: PairCounts, q: Sequence[int], x: Sequence[int]) -> float:
    """Birch's p-value, through the reduced forms for nested antecedents."""
    sq, sx = set(q), set(x)
    if sq < sx:
        # X' = Q'Z: only the ~X' stratum varies
        return birch_p_nested_sub(pc.n, pc.n_c, pc.n_x, pc.n_xc,
                                  pc.n_q - pc.n_x, pc.n_qc - pc.n_xc)
    if sx < sq:
        return birch_p_nested_super(pc.n_x, pc.n_xc, pc.n_q, pc.n_qc)
    return birch_p(pc)


class _Counter:
    """Cached covers over one dataset."""

    def __init__(self, d: Dataset):
        self.d = d
        self._cov: dict = {}

    def cover(self, s):
        v = self._cov.get(s)
        if v is None:
            v = self.d.cover(s)
            self._cov[s] = (v, popcount(v))
            return self._cov[s]
        return v

    def counts(self, pair: AlignedPair) -> PairCounts:
        d = self.d
        cx, n_x = self.cover(pair.x)
        cq, n_q = self.cover(pair.q)
        cc, n_c = self._col(pair)
        xq = cx & cq
        return PairCounts(d.n, n_x, n_q, n_c, popcount(xq), popcount(cx & cc),
                          popcount(cq & cc), popcount(xq & cc),
                          polarity_q=pair.c, polarity_x=pair.a)

    def _col(self, pair):
        key = ("col", pair.consequent, pair.c)
        v = self._cov.get(key)
        if v is None:
            col = self.d.column(pair.consequent, pair.c)
            v = self._cov[key] = (col, popcount(col))
        return v


def classify_pair(pair: AlignedPair, d: Dataset, theta: float = 0.5,
                  pc: Optional[PairCounts] = None, with_birch: bool = False) -> Verdict:
    """Apply the four speciousness cases, in order, to one kept pair.

    A pathological pair (X' and C'=c cover the same rows while both
    conditional leverages are <= 0) is returned as NON_SPECIOUS with
    ``pathological=True``; the caller decides it once survivors are known.
    """
    if pc is None:
        from .dataset import pair_counts
        pc = pair_counts(d, pair.x, pair.q, pair.consequent, pair.c, pair.a)
    form = check_equivalence(pc)
    if form is not None:
        return _verdict(VerdictKind.TYPE0, pair, pc, with_birch, equivalence_form=form)
    mi_s = signed_conditional_mi(pc)
    if set(pair.q) < set(pair.x) and pair.c == pair.a and mi_s <= theta:
        return _verdict(VerdictKind.TYPE1, pair, pc, with_birch, mi_s=mi_s)
    if _maybe_reversal(pc):
        s1, s2 = conditional_signs(pc)
        if s1 <= 0 and s2 <= 0:
            if pc.n_x == pc.n_xc == pc.n_c:
                v = _verdict(VerdictKind.NON_SPECIOUS, pair, pc, with_birch, mi_s=mi_s)
                return replace(v, pathological=True)
            return _verdict(VerdictKind.TYPE2, pair, pc, with_birch, mi_s=mi_s)
    if mi_s < theta:
        return _verdict(VerdictKind.TYPE3, pair, pc, with_birch, mi_s=mi_s)
    return NON_SPECIOUS


def _maybe_reversal(pc: PairCounts) -> bool:
    if not 0 < pc.n_x < pc.n:
        return True
    p_x = pc.n_x / pc.n
    d_qc = leverage(pc.n, pc.n_q, pc.n_c, pc.n_qc)
    d_xq = leverage(pc.n, pc.n_x, pc.n_q, pc.n_xq)
    d_xc = leverage(pc.n, pc.n_x, pc.n_c, pc.n_xc)
    # tolerance keeps the float pre-filter conservative; exact signs decide
    return ys_bound_check(d_qc - 1e-12, d_xq, d_xc, p_x)


def _verdict(kind, pair, pc, with_birch, mi_s=None, equivalence_form=None):
    d1, d2 = conditional_leverages(pc)
    if mi_s is None:
        mi_s = signed_conditional_mi(pc)
    p_b = evidence_p(pc, pair.q, pair.x) if with_birch else None
    return Verdict(kind, pair.mediator, None, ConditionalStats(d1, d2, mi_s, p_b),
                   equivalence_form, pair)


def _relation_rules(index: dict, x: tuple, q: tuple) -> list[int]:
    """Positions of rules stating the X'-Q' dependency (either direction)."""
    hits = []
    if len(q) == 1:
        hits += index.get((x, q[0]), [])
    if len(x) == 1:
        hits += index.get((q, x[0]), [])
    return hits


def spec_detect(rules: Sequence[Rule], d: Dataset, theta: float = 0.5,
                alpha: float = 0.05, threads: int = 1) -> list[tuple[Rule, Verdict]]:
    """Classify every rule of a ranked list; output keeps the input order.

    ``alpha`` is not used for pruning; verdicts whose Birch p-value falls
    below it are logged as suspicious.
    """
    rules = list(rules)
    keys = [rank_key(r) for r in rules]
    if any(not keys[i] < keys[i + 1] for i in range(len(keys) - 1)):
        raise ValueError("rules must be strictly ordered by rank_key")
    counter = _Counter(d)
    for r in rules:
        counter.cover(r.antecedent)

    def scan(i):
        ri = rules[i]
        pending = []
        for j in range(i):
            pair = align_pair(ri, rules[j])
            if pair is None:
                continue
            pc = counter.counts(pair)
            if not orientation_filter(pair, pc):
                continue
            v = classify_pair(pair, d, theta, pc=pc)
            if v.pathological:
                pending.append((j, v))
                continue
            if v.specious:
                return pending, replace(v, mediator_index=j)
        return pending, None

    if threads > 1 and len(rules) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            scanned = list(ex.map(scan, range(len(rules))))
    else:
        scanned = [scan(i) for i in range(len(rules))]

    index: dict = {}
    for m, r in enumerate(rules):
        index.setdefault((r.antecedent, r.consequent), []).append(m)

    # pathological pairs prune only when a surviving rule carries the X'-Q'
    # dependency; resolve to a fixpoint in rank order
    surviving = {i for i, (_, definite) in enumerate(scanned) if definite is None}
    final: list[Verdict] = []
    for _ in range(len(rules) + 2):
        cur = []
        for i, (pending, definite) in enumerate(scanned):
            verdict = definite or NON_SPECIOUS
            for j, v in pending:
                hits = _relation_rules(index, v.pair.x, v.pair.q)
                if any(m in surviving and m != i for m in hits):
                    verdict = replace(v, kind=VerdictKind.TYPE2, mediator_index=j,
                                      pathological=True)
                    break
            cur.append(verdict)
            if verdict.specious:
                surviving.discard(i)
            else:
                surviving.add(i)
        if cur == final:
            break
        final = cur

    out = []
    for r, v in zip(rules, final):
        if v.specious:
            pc = counter.counts(v.pair)
            ev = replace(v.evidence, p_b=evidence_p(pc, v.pair.q, v.pair.x))
            v = replace(v, evidence=ev)
            if v.kind is VerdictKind.TYPE3 and ev.p_b < alpha:
                log.warning("type3 prune with p_B=%.3g < alpha=%g: %s", ev.p_b, alpha,
                            r.format(d.names))
        out.append((r, v))
    return out

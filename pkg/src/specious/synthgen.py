"""Synthetic data with planted structure, and exhaustive reference oracles.

The oracles deliberately avoid the packed bit-vectors and the level-wise
search: they count on a dense boolean matrix and enumerate everything.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset
from .measures import PairCounts, mi_cells, signed_conditional_mi
from .miner import MinerConfig, Rule, TopKList, canonical_emission, rank_key

__all__ = [
    "PlantSpec",
    "UnrealizableSpec",
    "plant_simpson",
    "plant_equivalent",
    "random_dataset",
    "brute_force_birch",
    "brute_force_top_k",
    "brute_force_detect",
    "write_truth",
]

BRUTE_BIRCH_MAX_N = 200
BRUTE_TOPK_MAX_K = 12


class UnrealizableSpec(ValueError):
    """The requested planted structure has no integer-count realisation."""


@dataclass(frozen=True)
class PlantSpec:
    n: int = 1000
    p_x: float = 0.5
    q_given_x: float = 0.8
    q_given_not_x: float = 0.2
    c_given_x: float = 0.8
    c_given_not_x: float = 0.2
    delta1: float = -0.01
    delta2: float = -0.01
    noise: int = 10
    noise_density: float = 0.5
    seed: int = 0

    def validate(self):
        probs = {"p_x": self.p_x, "q_given_x": self.q_given_x,
                 "q_given_not_x": self.q_given_not_x, "c_given_x": self.c_given_x,
                 "c_given_not_x": self.c_given_not_x, "noise_density": self.noise_density}
        for k, v in probs.items():
            if not 0.0 <= v <= 1.0:
                raise UnrealizableSpec(f"{k}={v} is not a probability")
        if not 0.0 < self.p_x < 1.0:
            raise UnrealizableSpec("p_x must lie strictly between 0 and 1")
        if self.delta1 > 0 or self.delta2 > 0:
            raise UnrealizableSpec("within-stratum leverages must be <= 0")
        if self.n < 4 or self.noise < 0:
            raise UnrealizableSpec("need n >= 4 and noise >= 0")
        p_x, p_nx = self.p_x, 1.0 - self.p_x
        p_q = p_x * self.q_given_x + p_nx * self.q_given_not_x
        p_c = p_x * self.c_given_x + p_nx * self.c_given_not_x
        d_xq = p_x * self.q_given_x - p_x * p_q
        d_xc = p_x * self.c_given_x - p_x * p_c
        bound = d_xq * d_xc / (p_x * p_nx)
        if bound <= 0:
            raise UnrealizableSpec(
                "X must be dependent on both Q and C in the same direction: "
                f"delta(X,Q)*delta(X,C)/(p_x p_~x) = {bound:.4g} leaves no room for a paradox")
        d_qc = self.delta1 + self.delta2 + bound
        if d_qc <= 0:
            raise UnrealizableSpec(
                f"implied marginal delta(Q,C) = {d_qc:.4g} is not positive")


def _round(v: float) -> int:
    return int(math.floor(v + 0.5))


def _plant_counts(spec: PlantSpec, nudge: int):
    n = spec.n
    n_x = _round(n * spec.p_x)
    n_nx = n - n_x
    n_xq = _round(n_x * spec.q_given_x)
    n_nxq = _round(n_nx * spec.q_given_not_x)
    n_xc = _round(n_x * spec.c_given_x)
    n_nxc = _round(n_nx * spec.c_given_not_x)
    n_xqc = _round(n * spec.delta1 + n_xq * n_xc / n_x) - nudge
    n_nxqc = _round(n * spec.delta2 + n_nxq * n_nxc / n_nx) - nudge
    n_xqc = min(max(n_xqc, max(0, n_xq + n_xc - n_x)), min(n_xq, n_xc))
    n_nxqc = min(max(n_nxqc, max(0, n_nxq + n_nxc - n_nx)), min(n_nxq, n_nxc))
    return PairCounts(n, n_x, n_xq + n_nxq, n_xc + n_nxc, n_xq, n_xc,
                      n_xqc + n_nxqc, n_xqc)


def _paradox_holds(pc: PairCounts) -> bool:
    lev_qc = pc.n * pc.n_qc - pc.n_q * pc.n_c
    s1 = pc.n_xqc * pc.n_x - pc.n_xq * pc.n_xc
    s2 = pc.n_nxqc * pc.n_nx - pc.n_nxq * pc.n_nxc
    return lev_qc > 0 and s1 <= 0 and s2 <= 0 and 0 < pc.n_x < pc.n


def plant_simpson(spec: PlantSpec, max_retries: int = 8):
    """Dataset whose exact counts show a Yule-Simpson reversal of Q -> C by X.

    Attributes are X, Q, C (ids 0, 1, 2) followed by independent noise
    columns.  Returns ``(dataset, truth)``.
    """
    spec.validate()
    for nudge in range(max_retries + 1):
        pc = _plant_counts(spec, nudge)
        if _paradox_holds(pc):
            break
    else:
        raise UnrealizableSpec(
            f"no integer realisation with delta(Q,C) > 0 and both conditional "
            f"leverages <= 0 at n={spec.n} after {max_retries} retries")
    rng = np.random.default_rng(spec.seed)
    cells = pc.cells()
    pattern = [(x, q, c) for x in (1, 0) for q in (1, 0) for c in (1, 0)]
    block = np.repeat(np.array(pattern, dtype=bool), cells, axis=0)
    block = block[rng.permutation(spec.n)]
    noise = rng.random((spec.n, spec.noise)) < spec.noise_density
    m = np.hstack([block, noise])
    names = [str(i + 1) for i in range(m.shape[1])]
    d = Dataset.from_matrix(m, names, source=f"plant_simpson(seed={spec.seed})")
    truth = {
        "kind": "simpson",
        "x": names[0], "q": names[1], "c": names[2],
        "x_id": 0, "q_id": 1, "c_id": 2,
        "counts": {f: getattr(pc, f) for f in
                   ("n", "n_x", "n_q", "n_c", "n_xq", "n_xc", "n_qc", "n_xqc")},
        "delta_qc": (pc.n * pc.n_qc - pc.n_q * pc.n_c) / pc.n ** 2,
        "delta1": (pc.n_xqc * pc.n_x - pc.n_xq * pc.n_xc) / (pc.n * pc.n_x),
        "delta2": (pc.n_nxqc * pc.n_nx - pc.n_nxq * pc.n_nxc) / (pc.n * pc.n_nx),
        "spec": asdict(spec),
    }
    return d, truth


def plant_equivalent(d: Dataset, source: int, mode: str = "copy"):
    """Append an exact copy or exact complement of attribute ``source``.

    Returns ``(dataset, truth)``; the new attribute is the last one.
    """
    if mode not in ("copy", "complement"):
        raise ValueError("mode must be 'copy' or 'complement'")
    if not 0 <= source < d.k:
        raise KeyError(f"unknown attribute id {source}")
    m = d.to_matrix()
    col = m[:, source] if mode == "copy" else ~m[:, source]
    try:
        new_name = str(max(int(nm) for nm in d.names) + 1)
    except ValueError:
        new_name = (d.names[source] + "_copy") if mode == "copy" else ("not_" + d.names[source])
    out = Dataset.from_matrix(np.column_stack([m, col]), list(d.names) + [new_name],
                              source=f"{d.source}+{mode}({d.names[source]})")
    truth = {"kind": "equiv", "mode": mode, "source": d.names[source], "target": new_name,
             "source_id": source, "target_id": d.k}
    return out, truth


def random_dataset(rng: np.random.Generator, n: int, k: int,
                   density: Optional[Sequence[float]] = None) -> Dataset:
    """Independent Bernoulli columns with per-column densities."""
    if density is None:
        density = rng.uniform(0.1, 0.9, size=k)
    m = rng.random((n, k)) < np.asarray(density)
    return Dataset.from_matrix(m)


def write_truth(truth: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- oracles ------------------------------------------------------------------

def brute_force_birch(pc: PairCounts) -> float:
    """Birch's p-value by exhaustive enumeration with exact integers."""
    if pc.n > BRUTE_BIRCH_MAX_N:
        raise ValueError(f"enumeration guard: n={pc.n} > {BRUTE_BIRCH_MAX_N}")
    n_xnq = pc.n_x - pc.n_xq
    n_nxnq = pc.n_nx - pc.n_nxq
    num = 0
    for i in range(0, min(pc.n_xq, pc.n_xc) + 1):
        a = math.comb(pc.n_xq, i) * math.comb(n_xnq, pc.n_xc - i)
        if a == 0:
            continue
        for j in range(max(0, pc.n_qc - i), min(pc.n_nxq, pc.n_nxc) + 1):
            num += a * math.comb(pc.n_nxq, j) * math.comb(n_nxnq, pc.n_nxc - j)
    den = math.comb(pc.n_x, pc.n_xc) * math.comb(pc.n_nx, pc.n_nxc)
    return float(Fraction(num, den))


def _subsets_dp(rows: np.ndarray, attrs: list[int], cons: list[int], pols, cap):
    """Exhaustive (antecedent, consequent, polarity) table over the lattice."""
    n = rows.shape[0]
    n_a = rows[:, cons].sum(axis=0).astype(np.int64)
    best: dict[tuple, np.ndarray] = {(): np.full((len(cons), 2), -math.inf)}
    out = []
    for size in range(1, len(attrs) + 1):
        if cap is not None and size > cap:
            break
        for q in itertools.combinations(attrs, size):
            cover = rows[:, list(q)].all(axis=1)
            n_q = int(cover.sum())
            n_qa = rows[cover][:, cons].sum(axis=0).astype(np.int64)
            mi = mi_cells(n, n_q, n_a, n_qa)
            lev = n * n_qa - n_q * n_a
            valid = np.stack([lev > 0, lev < 0], axis=1)
            gen = np.full((len(cons), 2), -math.inf)
            for drop in range(size):
                sub = q[:drop] + q[drop + 1:]
                gen = np.maximum(gen, best[sub])
            best[q] = np.where(valid, np.maximum(gen, mi[:, None]), gen)
            out.append((q, n_q, n_a, n_qa, mi, valid, gen))
    return out


def brute_force_top_k(d: Dataset, cfg: MinerConfig) -> TopKList:
    """Top-K non-redundant rules by enumerating every antecedent."""
    usable = [a for a in range(d.k) if not d.degenerate[a]]
    if len(usable) > BRUTE_TOPK_MAX_K:
        raise ValueError(f"enumeration guard: {len(usable)} attributes > {BRUTE_TOPK_MAX_K}")
    if cfg.consequents is None:
        cons = usable
    else:
        cons = sorted(a for a in set(cfg.consequents) if a in usable)
    pool = set(cons)
    pols = (1, 0) if cfg.polarity_mode == "both" else (1,)
    rows = d.to_matrix()
    found = []
    if cons and d.n:
        for q, n_q, n_a, n_qa, mi, valid, gen in _subsets_dp(rows, usable, cons, pols,
                                                            cfg.max_antecedent):
            for ci, a in enumerate(cons):
                if a in q or not canonical_emission(q, a, pool):
                    continue
                for col, c in enumerate((1, 0)):
                    if c not in pols or not valid[ci, col] or not mi[ci] > gen[ci, col]:
                        continue
                    n_c = int(n_a[ci]) if c else d.n - int(n_a[ci])
                    n_qc = int(n_qa[ci]) if c else n_q - int(n_qa[ci])
                    found.append(Rule(q, a, c, n_q, n_c, n_qc, d.n, float(mi[ci])))
    found.sort(key=rank_key)
    top = TopKList(cfg.k)
    for r in found[: cfg.k + 1]:
        top.insert(r)
    return top


def _orientations(ri: Rule, rj: Rule):
    """All shared-consequent orientations, preference order first.

    Yields (q', x', consequent, judged_reversed, mediator_reversed).
    """
    Q, C, X, A = ri.antecedent, ri.consequent, rj.antecedent, rj.consequent
    if C == A:
        yield Q, X, C, False, False
    if X == (C,):
        yield Q, (A,), C, False, True
    if Q == (A,):
        yield (C,), X, A, True, False
    if len(Q) == 1 and Q == X:
        yield (C,), (A,), Q[0], True, True


def brute_force_detect(rules: Sequence[Rule], d: Dataset, theta: float = 0.5):
    """Speciousness by testing every ordered pair of rules.

    Returns a list of ``(kind, mediator_index)`` with kind in
    {"non-specious", "type0".."type3"}.
    """
    rows = d.to_matrix()
    n = d.n
    K = len(rules)

    def cov(s):
        return rows[:, list(s)].all(axis=1) if s else np.ones(n, dtype=bool)

    def judge(i, j):
        ri, rj = rules[i], rules[j]
        orient = next(_orientations(ri, rj), None)
        if orient is None:
            return None
        q, x, cons, _, _ = orient
        c, a = ri.polarity, rj.polarity
        vx, vq = cov(x), cov(q)
        vc = rows[:, cons] if c else ~rows[:, cons]
        n_x, n_q, n_c = int(vx.sum()), int(vq.sum()), int(vc.sum())
        n_xq = int((vx & vq).sum())
        if c != a and n * n_xq > n_x * n_q:
            return None
        n_xc = int((vx & vc).sum())
        n_qc = int((vq & vc).sum())
        n_xqc = int((vx & vq & vc).sum())
        if n_x == n_q == n_xq or (n_xq == 0 and n_x + n_q == n):
            return ("type0", None)
        pc = PairCounts(n, n_x, n_q, n_c, n_xq, n_xc, n_qc, n_xqc)
        mi_s = signed_conditional_mi(pc)
        if set(q) < set(x) and c == a and mi_s <= theta:
            return ("type1", None)
        # exact conditional leverage signs via Fractions
        d1 = Fraction(n_xqc, n) - Fraction(n_xq, n) * Fraction(n_xc, n_x) if n_x else 0
        nx = n - n_x
        d2 = (Fraction(n_qc - n_xqc, n) - Fraction(n_q - n_xq, n) * Fraction(n_c - n_xc, nx)
              if nx else 0)
        if d1 <= 0 and d2 <= 0:
            if n_x == n_xc == n_c:
                return ("pathological", (x, q))
            return ("type2", None)
        if mi_s < theta:
            return ("type3", None)
        return None

    table = [[judge(i, j) if i != j else None for j in range(K)] for i in range(K)]

    def relation_rules(x, q):
        # rules expressing the X'-Q' dependency in either direction
        hits = []
        for m, r in enumerate(rules):
            if (len(q) == 1 and r.antecedent == tuple(x) and r.consequent == q[0]) or \
               (len(x) == 1 and r.antecedent == tuple(q) and r.consequent == x[0]):
                hits.append(m)
        return hits

    def resolve(surviving):
        out = []
        for i in range(K):
            verdict = ("non-specious", None)
            for j in range(i):
                v = table[i][j]
                if v is None:
                    continue
                if v[0] == "pathological":
                    if any(m in surviving and m != i for m in relation_rules(*v[1])):
                        verdict = ("type2", j)
                        break
                    continue
                verdict = (v[0], j)
                break
            out.append(verdict)
            if verdict[0] != "non-specious":
                surviving.discard(i)
            else:
                surviving.add(i)
        return out

    surviving = set(range(K))
    for i in range(K):
        for j in range(i):
            v = table[i][j]
            if v is not None and v[0] != "pathological":
                surviving.discard(i)
                break
    prev = None
    for _ in range(K + 2):
        cur = resolve(surviving)
        if cur == prev:
            break
        prev = cur
    return cur

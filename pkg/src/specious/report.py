"""Rule files, verdict reports and run summaries.

Rule and verdict files are tab-separated with one header line.  Floats are
written with 6 significant digits there; the JSON summary keeps full
precision.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset, DataError
from .miner import Rule, make_rule
from .specdetect import Verdict, VerdictKind

__all__ = [
    "RULE_COLUMNS",
    "REPORT_COLUMNS",
    "RunSummary",
    "write_rules",
    "read_rules",
    "write_report",
    "summarize",
    "equivalence_statements",
]

RULE_COLUMNS = ("rank", "antecedent", "consequent", "polarity", "n_q", "n_c", "n_qc", "M",
                "leverage")
REPORT_COLUMNS = RULE_COLUMNS + ("verdict", "mediator_rank", "delta1", "delta2", "mi_s",
                                 "p_b", "equivalence_form")
KINDS = [k.value for k in VerdictKind]


def _g(v) -> str:
    if v is None:
        return ""
    return f"{v:.6g}"


def _rule_cells(rank: int, r: Rule, names: Sequence[str]) -> list[str]:
    return [str(rank), "&".join(names[a] for a in r.antecedent), names[r.consequent],
            str(r.polarity), str(r.n_q), str(r.n_c), str(r.n_qc), _g(r.goodness),
            _g(r.leverage)]


def write_rules(rules: Sequence[Rule], names: Sequence[str], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(RULE_COLUMNS)
        for i, r in enumerate(rules, start=1):
            w.writerow(_rule_cells(i, r, names))


def read_rules(path, d: Dataset) -> list[Rule]:
    """Parse a rule file and rebuild every rule against ``d``.

    Counts are recomputed from the data and must match the file; goodness is
    taken from the recomputation so no precision is lost to the TSV.
    """
    rules = []
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    with fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if header is None or tuple(header[:len(RULE_COLUMNS)]) != RULE_COLUMNS:
            raise DataError(f"{path}: not a rule file (bad header)")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            rec = dict(zip(header, row))
            try:
                q = tuple(sorted(d.index(nm) for nm in rec["antecedent"].split("&")))
                c = d.index(rec["consequent"])
                pol = int(rec["polarity"])
                want = (int(rec["n_q"]), int(rec["n_c"]), int(rec["n_qc"]))
            except (KeyError, ValueError) as e:
                raise DataError(f"{path}:{lineno}: {e}") from None
            if pol not in (0, 1):
                raise DataError(f"{path}:{lineno}: polarity must be 0 or 1")
            r = make_rule(d, q, c, pol)
            if (r.n_q, r.n_c, r.n_qc) != want:
                raise DataError(
                    f"{path}:{lineno}: counts {want} do not match the dataset "
                    f"({r.n_q}, {r.n_c}, {r.n_qc}); wrong dataset for this rule file?")
            rules.append(r)
    return rules


def write_report(results: Sequence[tuple[Rule, Verdict]], names: Sequence[str], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for i, (r, v) in enumerate(results, start=1):
            ev = v.evidence
            w.writerow(_rule_cells(i, r, names) + [
                v.kind.value,
                "" if v.mediator_index is None else str(v.mediator_index + 1),
                _g(ev.delta1 if ev else None), _g(ev.delta2 if ev else None),
                _g(ev.mi_s if ev else None), _g(ev.p_b if ev else None),
                v.equivalence_form or ""])


def equivalence_statements(results, names: Sequence[str]) -> list[str]:
    """Human-readable form of every Type0 verdict, e.g. ``a == ~b``."""
    out = []
    for r, v in results:
        if v.kind is not VerdictKind.TYPE0:
            continue
        q = "&".join(names[a] for a in v.pair.q)
        x = "&".join(names[a] for a in v.pair.x)
        out.append(f"{q} == {x}" if v.equivalence_form == "direct" else f"{q} == ~({x})")
    return out


def _mean(xs):
    return float(np.mean(xs)) if len(xs) else None


def _profile(rules: Sequence[Rule]) -> dict:
    return {
        "count": len(rules),
        "mean_M": _mean([r.goodness for r in rules]),
        "mean_frequency": _mean([r.n_qc for r in rules]),
        "mean_confidence": _mean([r.confidence for r in rules]),
        "mean_neg_confidence": _mean([r.neg_confidence for r in rules
                                      if not math.isnan(r.neg_confidence)]),
        "mean_leverage": _mean([r.leverage for r in rules]),
        "mean_antecedent_size": _mean([len(r.antecedent) for r in rules]),
    }


@dataclass
class RunSummary:
    """Machine-readable outcome of one mine/detect run."""

    dataset: dict
    config: dict
    counts: dict = field(default_factory=dict)
    proportions: dict = field(default_factory=dict)
    specious: dict = field(default_factory=dict)
    non_specious: dict = field(default_factory=dict)
    evidence: dict = field(default_factory=dict)
    type3_significant: int = 0
    boundary_tie: Optional[bool] = None
    equivalences: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())


def summarize(results: Sequence[tuple[Rule, Verdict]], d: Dataset, config: dict,
              alpha: float = 0.05, timings: Optional[dict] = None,
              boundary_tie: Optional[bool] = None) -> RunSummary:
    """Aggregate verdicts; Type0 rules are left out of every statistic but the counts."""
    counts = {k: 0 for k in KINDS}
    for _, v in results:
        counts[v.kind.value] += 1
    total = len(results)
    props = {k: (c / total if total else 0.0) for k, c in counts.items()}
    props["specious"] = 1.0 - props["non-specious"] if total else 0.0
    spec = [(r, v) for r, v in results if v.specious and v.kind is not VerdictKind.TYPE0]
    plain = [r for r, v in results if not v.specious]
    pbs = [v.evidence.p_b for _, v in spec if v.evidence.p_b is not None]
    evidence = {
        "mean_p_b": _mean(pbs),
        "min_p_b": float(min(pbs)) if pbs else None,
        "mean_delta1": _mean([v.evidence.delta1 for _, v in spec]),
        "mean_delta2": _mean([v.evidence.delta2 for _, v in spec]),
        "mean_mi_s": _mean([v.evidence.mi_s for _, v in spec]),
    }
    sig = sum(1 for _, v in spec if v.kind is VerdictKind.TYPE3
              and v.evidence.p_b is not None and v.evidence.p_b < alpha)
    return RunSummary(
        dataset=d.describe(),
        config=dict(config),
        counts=counts,
        proportions=props,
        specious=_profile([r for r, _ in spec]),
        non_specious=_profile(plain),
        evidence=evidence,
        type3_significant=sig,
        boundary_tie=boundary_tie,
        equivalences=equivalence_statements(results, d.names),
        timings=dict(timings or {}),
    )

"""Group fairness and utility metrics.

All metrics are pure functions of predictions, ground truth, and group
membership.  Gap metrics live in [0, 1] internally; external reporting
multiplies by 100 (percentage points).  Undefined conditionals surface as
errors or explicit None values, never as a silent 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyEvaluationError, UndefinedMetricError


@dataclass
class PredictionSet:
    """Predictions, ground truth, and group ids over an evaluation mask."""

    predicted: np.ndarray
    actual: np.ndarray
    sensitive: np.ndarray
    mask: np.ndarray = None  # bool array; None = evaluate everything

    def masked(self):
        p = np.asarray(self.predicted)
        a = np.asarray(self.actual)
        s = np.asarray(self.sensitive)
        if not (len(p) == len(a) == len(s)):
            raise UndefinedMetricError("prediction/actual/sensitive lengths differ")
        if self.mask is None:
            return p, a, s
        m = np.asarray(self.mask, dtype=bool)
        return p[m], a[m], s[m]


def dp_gap_binary(preds, positive_class=1):
    """|P(pred=1 | group 0) - P(pred=1 | group 1)| over the masked nodes."""
    p, _, s = preds.masked()
    groups = np.unique(s)
    if len(groups) != 2:
        raise UndefinedMetricError(
            f"binary demographic parity needs exactly 2 groups in mask, found {len(groups)}"
        )
    r0 = np.mean(p[s == groups[0]] == positive_class)
    r1 = np.mean(p[s == groups[1]] == positive_class)
    return float(abs(r0 - r1))


def dp_gap_multi(preds, num_classes=None):
    """Mean over present groups of the max per-class deviation from independence.

    For each group, takes max over classes j of
    |P(pred=j) - P(pred=j | group)|, then averages over the groups present
    in the mask.  Absent groups carry no evidence and are excluded.
    """
    p, _, s = preds.masked()
    if len(p) == 0:
        raise EmptyEvaluationError("demographic parity over an empty mask")
    if num_classes is None:
        num_classes = int(p.max()) + 1 if len(p) else 1
    groups = np.unique(s)
    marginal = np.array([np.mean(p == j) for j in range(num_classes)])
    total = 0.0
    for g in groups:
        cond = np.array([np.mean(p[s == g] == j) for j in range(num_classes)])
        total += float(np.max(np.abs(marginal - cond)))
    return total / len(groups)


def eo_gap(preds, positive_class=1):
    """|TPR(group 0) - TPR(group 1)| for the positive class."""
    p, a, s = preds.masked()
    groups = np.unique(s)
    if len(groups) != 2:
        raise UndefinedMetricError(
            f"equal opportunity needs exactly 2 groups in mask, found {len(groups)}"
        )
    tprs = []
    for g in groups:
        pos = (s == g) & (a == positive_class)
        if not np.any(pos):
            raise UndefinedMetricError(
                f"group {g} has no actual positives; equal opportunity undefined"
            )
        tprs.append(np.mean(p[pos] == positive_class))
    return float(abs(tprs[0] - tprs[1]))


def prule(preds, positive_class=1):
    """p%-rule: 100 * min(rate0, rate1) / max(rate0, rate1).

    Undefined (returns None is NOT an option here; raises) when both group
    positive rates are zero.
    """
    p, _, s = preds.masked()
    groups = np.unique(s)
    if len(groups) != 2:
        raise UndefinedMetricError(
            f"p%-rule needs exactly 2 groups in mask, found {len(groups)}"
        )
    r0 = np.mean(p[s == groups[0]] == positive_class)
    r1 = np.mean(p[s == groups[1]] == positive_class)
    hi = max(r0, r1)
    if hi == 0:
        raise UndefinedMetricError("both group positive rates are 0; p%-rule undefined")
    return float(100.0 * min(r0, r1) / hi)


def utility(preds, positive_class=1):
    """(accuracy, F1).

    Binary problems use the positive-class F1; multi-class uses macro-F1.
    F1 is 0 by convention when precision or recall is degenerate.
    """
    p, a, _ = preds.masked()
    if len(p) == 0:
        raise EmptyEvaluationError("utility over an empty mask")
    acc = float(np.mean(p == a))
    classes = np.unique(np.concatenate([a, p]))
    if len(classes) <= 2:
        f1 = _f1_for_class(p, a, positive_class)
    else:
        f1 = float(np.mean([_f1_for_class(p, a, c) for c in classes]))
    return acc, f1


def _f1_for_class(p, a, c):
    tp = np.sum((p == c) & (a == c))
    fp = np.sum((p == c) & (a != c))
    fn = np.sum((p != c) & (a == c))
    denom = 2 * tp + fp + fn
    return float(2 * tp / denom) if denom else 0.0


@dataclass
class FairnessReport:
    """Utility and fairness summary for one evaluation.

    Gap fields are internal [0, 1] values; the *_pp properties give the
    percentage-point form used in external reports.  Metrics that are
    undefined on the evaluated data are None.
    """

    acc: float
    f1: float
    dp_gap: float = None
    eo_gap: float = None
    prule: float = None
    per_group_positive_rate: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    mode: str = "full"

    @property
    def dp_gap_pp(self):
        return None if self.dp_gap is None else 100.0 * self.dp_gap

    @property
    def eo_gap_pp(self):
        return None if self.eo_gap is None else 100.0 * self.eo_gap

    def fields(self):
        fmt = lambda v: "NA" if v is None else f"{v:.6f}"
        return {
            "acc": fmt(self.acc),
            "f1": fmt(self.f1),
            "dp_gap_pp": fmt(self.dp_gap_pp),
            "eo_gap_pp": fmt(self.eo_gap_pp),
            "prule": fmt(self.prule),
        }

    def to_kv(self):
        lines = [f"{k} {v}" for k, v in self.fields().items()]
        for g in sorted(self.per_group_positive_rate):
            lines.append(f"positive_rate_group_{g} {self.per_group_positive_rate[g]:.6f}")
        lines.append(f"mode {self.mode}")
        return "\n".join(lines) + "\n"

    def to_table(self):
        f = self.fields()
        header = "  ".join(f"{k:>10s}" for k in f)
        row = "  ".join(f"{v:>10s}" for v in f.values())
        return header + "\n" + row + "\n"


def compute_report(preds, positive_class=1, dp_form="auto", mode="full"):
    """Assemble a FairnessReport from a PredictionSet.

    dp_form: "binary" (two-group positive-rate gap), "multi" (per-class
    max deviation averaged over groups), or "auto" (binary when the data
    has 2 classes and 2 groups, else multi).
    """
    p, a, s = preds.masked()
    if len(p) == 0:
        raise EmptyEvaluationError("report over an empty mask")
    acc, f1 = utility(preds, positive_class)
    groups = np.unique(s)
    classes = np.unique(np.concatenate([a, p]))
    is_binary = len(groups) == 2 and len(classes) <= 2

    if dp_form == "auto":
        dp_form = "binary" if is_binary else "multi"
    if dp_form == "binary":
        dp = dp_gap_binary(preds, positive_class) if len(groups) == 2 else None
    else:
        dp = dp_gap_multi(preds)

    eo = pr = None
    if is_binary:
        try:
            eo = eo_gap(preds, positive_class)
        except UndefinedMetricError:
            eo = None
        try:
            pr = prule(preds, positive_class)
        except UndefinedMetricError:
            pr = None

    rates = {int(g): float(np.mean(p[s == g] == positive_class)) for g in groups}
    counts = {
        "n": int(len(p)),
        "correct": int(np.sum(p == a)),
        "per_group": {int(g): int(np.sum(s == g)) for g in groups},
    }
    return FairnessReport(
        acc=acc,
        f1=f1,
        dp_gap=dp,
        eo_gap=eo,
        prule=pr,
        per_group_positive_rate=rates,
        counts=counts,
        mode=mode,
    )

"""
Inferential statistics over evaluation outcomes.

Correct/wrong counts per condition are compared with chi-square tests (an
omnibus k x 2 test, then pairwise 2 x 2 post-hoc tests with Bonferroni
correction); predicted probabilities are compared with one-way ANOVA and
Tukey's HSD.
"""

import itertools
from typing import Dict, List, Mapping, Sequence, Tuple

import bittensor as bt
import numpy as np
from scipy import stats

from phishlens.errors import DegenerateTable, InsufficientGroups, ZeroWithinVariance
from phishlens.protocol import AnovaResult, ChiSquareResult, PairwiseChiSquare

Counts = Tuple[int, int]


def _check_margins(table: np.ndarray) -> None:
    if (table.sum(axis=0) == 0).any() or (table.sum(axis=1) == 0).any():
        raise DegenerateTable(f"zero margin in contingency table {table.tolist()}")


def chi_square_2x2(group_a: Counts, group_b: Counts, yates: bool = True) -> Tuple[float, float]:
    """
    Pearson chi-square of ``[[correct_a, wrong_a], [correct_b, wrong_b]]`` with df=1.

    Raises:
        DegenerateTable: a row or column sums to zero (its p-value is 1).
    """
    # Canonical row order: (A, B) and (B, A) give identical floats.
    rows = sorted([tuple(int(x) for x in group_a), tuple(int(x) for x in group_b)])
    table = np.array(rows, dtype=np.float64)
    _check_margins(table)
    statistic, p_value, _, _ = stats.chi2_contingency(table, correction=yates)
    return float(statistic), float(p_value)


def chi_square_omnibus(groups: Sequence[Counts], yates: bool = True) -> ChiSquareResult:
    """k x 2 test of independence between group and correctness."""
    if len(groups) < 2:
        raise InsufficientGroups("the omnibus test needs at least two groups")
    table = np.array([[int(c), int(w)] for c, w in groups], dtype=np.float64)
    dof = len(groups) - 1
    try:
        _check_margins(table)
    except DegenerateTable:
        return ChiSquareResult(statistic=0.0, p_value=DegenerateTable.p_value, dof=dof, degenerate=True)
    statistic, p_value, dof, _ = stats.chi2_contingency(table, correction=yates and dof == 1)
    return ChiSquareResult(statistic=float(statistic), p_value=float(p_value), dof=int(dof))


def bonferroni(p_values: Sequence[float]) -> List[float]:
    """Each p times the number of tests, capped at 1."""
    p = np.asarray(list(p_values), dtype=np.float64)
    return np.minimum(p * len(p), 1.0).tolist()


def pairwise_chi_square(groups: Mapping[str, Counts], yates: bool = True) -> List[PairwiseChiSquare]:
    """All-pairs 2 x 2 tests in the mapping's order, Bonferroni-corrected over the pairs."""
    names = list(groups)
    raw = []
    for a, b in itertools.combinations(names, 2):
        try:
            statistic, p_value = chi_square_2x2(groups[a], groups[b], yates=yates)
            degenerate = False
        except DegenerateTable:
            statistic, p_value, degenerate = 0.0, DegenerateTable.p_value, True
        raw.append((a, b, statistic, p_value, degenerate))
    corrected = bonferroni([r[3] for r in raw])
    return [
        PairwiseChiSquare(a=a, b=b, statistic=s, p_raw=p, p_corrected=pc, degenerate=d)
        for (a, b, s, p, d), pc in zip(raw, corrected)
    ]


def _samples(groups: Sequence[Sequence[float]]) -> List[np.ndarray]:
    if len(groups) < 2:
        raise InsufficientGroups("at least two groups are required")
    arrays = [np.asarray(g, dtype=np.float64) for g in groups]
    for i, a in enumerate(arrays):
        if a.size < 2:
            raise InsufficientGroups(f"group {i} has {a.size} observation(s); at least two are required")
    return arrays


# Between-group sums of squares below this fraction of the total are rounding noise.
RELATIVE_SS_TOLERANCE = 1e-12


def _sums_of_squares(arrays: List[np.ndarray]) -> Tuple[float, float]:
    grand = float(np.concatenate(arrays).mean())
    ss_between = sum(a.size * (float(a.mean()) - grand) ** 2 for a in arrays)
    ss_within = sum(float(((a - a.mean()) ** 2).sum()) for a in arrays)
    return ss_between, ss_within


def _check_within_variance(arrays: List[np.ndarray]) -> None:
    ss_between, ss_within = _sums_of_squares(arrays)
    if ss_between <= RELATIVE_SS_TOLERANCE * (ss_between + ss_within):
        raise ZeroWithinVariance(0.0, 1.0)
    if ss_within > 0:
        return
    raise ZeroWithinVariance(float("inf"), 0.0)


def anova_oneway(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """
    One-way ANOVA, df1 = k - 1 and df2 = N - k.

    When every group is constant, F is +inf with p = 0 if the group means
    differ, and F = 0 with p = 1 if they are all equal.
    """
    arrays = _samples(groups)
    df1 = len(arrays) - 1
    df2 = sum(a.size for a in arrays) - len(arrays)
    try:
        _check_within_variance(arrays)
    except ZeroWithinVariance as e:
        return AnovaResult(f=e.f, df1=df1, df2=df2, p_value=e.p_value)
    result = stats.f_oneway(*arrays)
    f, p_value = float(result.statistic), float(result.pvalue)
    if not (np.isfinite(f) and np.isfinite(p_value)):
        bt.logging.debug(f"f_oneway returned F={f}, p={p_value}; using the equal-means limit")
        f, p_value = 0.0, 1.0
    return AnovaResult(f=f, df1=df1, df2=df2, p_value=p_value)


def tukey_hsd(groups: Sequence[Sequence[float]]) -> List[List[float]]:
    """
    Pairwise p-values of Tukey's HSD (Tukey-Kramer for unequal sizes) as a
    symmetric k x k matrix with ones on the diagonal.
    """
    arrays = _samples(groups)
    k = len(arrays)
    try:
        _check_within_variance(arrays)
    except ZeroWithinVariance as e:
        if e.p_value == 1.0:
            return [[1.0] * k for _ in range(k)]
        means = [a.mean() for a in arrays]
        return [[1.0 if means[i] == means[j] else 0.0 for j in range(k)] for i in range(k)]
    pvalues = np.clip(np.nan_to_num(stats.tukey_hsd(*arrays).pvalue, nan=1.0), 0.0, 1.0)
    np.fill_diagonal(pvalues, 1.0)
    return pvalues.tolist()


def stats_matrix(pairs: Sequence[PairwiseChiSquare], names: Sequence[str]) -> Dict[str, List[List[float]]]:
    """Square matrices (statistic, raw p, corrected p) indexed like ``names``."""
    index = {n: i for i, n in enumerate(names)}
    size = len(names)
    statistic = [[0.0] * size for _ in range(size)]
    p_raw = [[1.0] * size for _ in range(size)]
    p_corrected = [[1.0] * size for _ in range(size)]
    for pair in pairs:
        i, j = index[pair.a], index[pair.b]
        for matrix, value in ((statistic, pair.statistic), (p_raw, pair.p_raw), (p_corrected, pair.p_corrected)):
            matrix[i][j] = matrix[j][i] = value
    return {"statistic": statistic, "p_raw": p_raw, "p_corrected": p_corrected}

"""Scoring recovered latents: correlation matrix, matching, MCC, DCI.

Matching and the derived scores work on absolute correlations, since a
sign flip of a recovered latent is a successful recovery; the signed
matrix is still reported. Disentanglement is one minus the mean row
entropy of the row-normalized absolute matrix, completeness the same over
columns, with entropies in base n so both land in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    ConstantColumn,
    DegenerateMatrix,
    NonSquare,
    RowCountMismatch,
)
from .scm import SampleMatrix

MAX_ASSIGNMENT_SIZE = 64
_ZERO_SUM_TOL = 1e-12


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson correlations, rows = true latents, columns = estimates."""

    values: np.ndarray
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]

    @property
    def is_square(self) -> bool:
        return self.values.shape[0] == self.values.shape[1]


@dataclass(frozen=True)
class EvalReport:
    correlation: CorrelationMatrix
    permutation: tuple[int, ...]
    mcc: float
    disentanglement: float
    completeness: float


def _as_matrix(data) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(data, SampleMatrix):
        return np.asarray(data.data, dtype=float), data.labels
    values = np.asarray(data, dtype=float)
    return values, tuple(f"c{j}" for j in range(values.shape[1]))


def correlation_matrix(true_data, est_data) -> CorrelationMatrix:
    z, row_labels = _as_matrix(true_data)
    z_hat, col_labels = _as_matrix(est_data)
    if z.shape[0] != z_hat.shape[0]:
        raise RowCountMismatch(
            f"row counts differ: {z.shape[0]} vs {z_hat.shape[0]}"
        )
    if z.shape[0] < 3:
        raise RowCountMismatch("need at least 3 rows to correlate")
    def standardized_columns(name, m):
        cols = []
        for j in range(m.shape[1]):
            col = np.ascontiguousarray(m[:, j])
            std = col.std()
            if std == 0:
                raise ConstantColumn(f"{name} column {j} is constant")
            cols.append((col - col.mean()) / std)
        return cols

    # column-by-column dot products: unlike a BLAS matrix product, the
    # result for a pair of columns does not depend on where the columns
    # sit in the matrix, so permuting inputs permutes the output exactly
    zc = standardized_columns("true", z)
    hc = standardized_columns("estimated", z_hat)
    n_rows = z.shape[0]
    corr = np.empty((len(zc), len(hc)))
    for i, zi in enumerate(zc):
        for j, hj in enumerate(hc):
            corr[i, j] = np.dot(zi, hj) / n_rows
    corr = np.clip(corr, -1.0, 1.0)
    return CorrelationMatrix(values=corr, row_labels=row_labels, col_labels=col_labels)


def best_permutation(corr: CorrelationMatrix) -> tuple[tuple[int, ...], float]:
    """Column assignment maximizing the summed absolute correlation.

    Solved exactly as a linear assignment problem; returns the permutation
    (``perm[i]`` is the estimate matched to true latent ``i``) and the mean
    matched absolute correlation.
    """
    if not corr.is_square:
        raise NonSquare(f"matrix is {corr.values.shape}, matching needs square")
    n = corr.values.shape[0]
    if n > MAX_ASSIGNMENT_SIZE:
        raise NonSquare(f"matching limited to {MAX_ASSIGNMENT_SIZE} columns")
    weights = np.abs(corr.values)
    rows, cols = linear_sum_assignment(-weights)
    perm = tuple(int(c) for c in cols[np.argsort(rows)])
    mcc = float(weights[rows, cols].sum() / n)
    return perm, mcc


def _entropy_score(lines: np.ndarray, base: int) -> float:
    """Mean of 1 - H(line) over normalized nonzero lines, entropy base
    ``base``. A zero line counts as maximally dispersed (score 0).

    Values are summed in sorted order throughout, so permuting the matrix
    cannot perturb the result by a rounding ulp.
    """
    scores = []
    for line in lines:
        ordered = np.sort(line)
        total = ordered.sum()
        if total <= _ZERO_SUM_TOL:
            scores.append(0.0)
            continue
        p = ordered / total
        nz = p[p > 0]
        entropy = float(-(nz * np.log(nz)).sum() / np.log(base))
        scores.append(1.0 - entropy)
    return float(np.sort(scores).sum() / len(scores))


def dci_scores(corr: CorrelationMatrix) -> tuple[float, float]:
    """Disentanglement and completeness from the absolute correlations.

    Row-normalize |corr| and take one minus the mean base-n row entropy for
    disentanglement; columns symmetrically for completeness.
    """
    if not corr.is_square:
        raise NonSquare(f"matrix is {corr.values.shape}, DCI needs square")
    n = corr.values.shape[0]
    if n < 2:
        raise NonSquare("DCI needs at least two latents")
    magnitude = np.abs(corr.values)
    if magnitude.sum() <= _ZERO_SUM_TOL:
        raise DegenerateMatrix("all correlations are zero; entropy undefined")
    d = _entropy_score(magnitude, n)
    c = _entropy_score(magnitude.T, n)
    return d, c


def evaluate(true_data, est_data) -> EvalReport:
    """Correlate, match, and score; the composition of the three steps."""
    corr = correlation_matrix(true_data, est_data)
    perm, mcc = best_permutation(corr)
    d, c = dci_scores(corr)
    return EvalReport(
        correlation=corr,
        permutation=perm,
        mcc=mcc,
        disentanglement=d,
        completeness=c,
    )


def eval_report_to_json(report: EvalReport) -> dict:
    return {
        "correlation": report.correlation.values.tolist(),
        "row_labels": list(report.correlation.row_labels),
        "col_labels": list(report.correlation.col_labels),
        "permutation": list(report.permutation),
        "mcc": report.mcc,
        "disentanglement": report.disentanglement,
        "completeness": report.completeness,
    }

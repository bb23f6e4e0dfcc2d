"""Numerical checks of the identifiability rank conditions.

For a partition of the unobserved nodes into groups, each conditioning
sample contributes one row holding, per group, the first derivatives of
the conditional log-density at an evaluation point followed by the second
derivatives (the diagonal of the Hessian). Identifiability needs these
rows — or their differences against the first row, in the
external-auxiliary variant — to span twice the group count.

The report keeps the full singular-value spectrum and per-block variation
across rows, because the most common failure is structural: a Gaussian
model whose conditional covariance does not depend on the conditioning
values has a constant second-derivative block, which caps the achievable
rank no matter how many samples are added.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsep import LatentPartition
from .errors import (
    DimensionMismatch,
    NonFiniteDensity,
    SingularCovariance,
    TooFewSamples,
)
from .scm import (
    GaussianConditional,
    ScmSpec,
    _substream,
    analytic_covariance,
    conditional,
)

DIRECT = "direct"
SUBTRACTED = "subtracted"

DEFAULT_RANK_TOL = 1e-8
DEGENERATE_BLOCK_TOL = 1e-12
DEFAULT_ROWS_PER_GROUP = 4  # rows = 4 * group count unless overridden


@dataclass(frozen=True)
class ScoreMatrix:
    """Stacked derivative rows, one per conditioning sample.

    ``rows`` is M x (2 * n_u) where n_u is the total unobserved dimension:
    first all first-derivative blocks in group order, then all
    second-derivative blocks in the same order.
    """

    rows: np.ndarray
    conditioning_samples: np.ndarray
    point: np.ndarray
    group_sizes: tuple[int, ...]

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])

    @property
    def latent_dim(self) -> int:
        return sum(self.group_sizes)


@dataclass(frozen=True)
class RankReport:
    variant: str
    required_rank: int
    achieved_rank: int
    singular_values: tuple[float, ...]
    tolerance: float
    verdict: str
    group_count: int
    ambient_dim: int
    sample_count: int
    first_block_variation: float
    second_block_variation: float
    degenerate_blocks: tuple[str, ...]

    @property
    def satisfied(self) -> bool:
        return self.verdict == "satisfied"


def _inverse_covariance(cov: np.ndarray) -> np.ndarray:
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    svals = np.linalg.svd(cov, compute_uv=False)
    if svals[0] == 0.0 or svals[-1] <= 1e-12 * svals[0]:
        raise SingularCovariance("group covariance is numerically singular")
    return np.linalg.inv(cov)


def gaussian_score_row(conditionals, point, conditioning_values) -> np.ndarray:
    """Closed-form derivative row for Gaussian group conditionals.

    ``point`` concatenates per-group evaluation values in group order. For
    group mean m and covariance S the first-derivative block is
    ``-S^-1 (z - m)`` and the second-derivative block ``-diag(S^-1)``. A
    conditional carrying a precomputed ``mean`` uses it directly; otherwise
    the mean is its affine map evaluated at ``conditioning_values``.
    """
    point = np.asarray(point, dtype=float)
    sizes = [len(c.targets) for c in conditionals]
    if point.shape != (sum(sizes),):
        raise DimensionMismatch(
            f"evaluation point must have dimension {sum(sizes)}, got {point.shape}"
        )
    first = []
    second = []
    offset = 0
    for cond in conditionals:
        k = len(cond.targets)
        z = point[offset : offset + k]
        offset += k
        mean = cond.mean if cond.mean is not None else cond.mean_at(conditioning_values)
        inv = _inverse_covariance(cond.covariance)
        first.append(-inv @ (z - mean))
        second.append(-np.diag(inv))
    return np.concatenate(first + second)


def finite_difference_score_row(
    logps, group_sizes, point, conditioning_values, h: float = 1e-4
) -> np.ndarray:
    """Derivative row from per-group log-density callables.

    ``logps[j]`` takes (group values, conditioning values) and returns the
    log-density of group j; ``group_sizes[j]`` is its dimension. First
    derivatives use central differences, second derivatives the three-point
    stencil. Works for any density, not just Gaussian ones.
    """
    if h <= 0:
        raise DimensionMismatch("step size must be positive")
    if len(logps) != len(group_sizes):
        raise DimensionMismatch("one log-density callable per group required")
    point = np.asarray(point, dtype=float)
    if point.shape != (sum(group_sizes),):
        raise DimensionMismatch(
            f"evaluation point must have dimension {sum(group_sizes)}, got {point.shape}"
        )
    first = []
    second = []
    offset = 0
    for logp, k in zip(logps, group_sizes):
        z = point[offset : offset + k]
        offset += k
        center = float(logp(z, conditioning_values))
        grad = np.empty(k)
        curv = np.empty(k)
        for l in range(k):
            step = np.zeros(k)
            step[l] = h
            hi = float(logp(z + step, conditioning_values))
            lo = float(logp(z - step, conditioning_values))
            grad[l] = (hi - lo) / (2.0 * h)
            curv[l] = (hi - 2.0 * center + lo) / (h * h)
        if not (np.isfinite(center) and np.isfinite(grad).all() and np.isfinite(curv).all()):
            raise NonFiniteDensity("log-density evaluated to a non-finite value")
        first.append(grad)
        second.append(curv)
    return np.concatenate(first + second)


def score_matrix_for_scm(
    spec: ScmSpec,
    part: LatentPartition,
    n_rows: int | None = None,
    seed: int | None = None,
    point=None,
) -> ScoreMatrix:
    """Assemble derivative rows for a Gaussian SCM and a latent partition.

    Group conditionals are taken given the full observed set. Conditioning
    samples come from the model's marginal over the observed nodes
    (substream 2 of the seed, defaulting to the spec's); the evaluation
    point, unless supplied, from the marginal over the unobserved nodes
    (substream 3). The point is ordered group by group.
    """
    groups = part.groups
    if not groups:
        raise DimensionMismatch("partition has no unobserved groups")
    d = len(groups)
    if n_rows is None:
        n_rows = DEFAULT_ROWS_PER_GROUP * d
    observed = tuple(sorted(spec.dag.observed))
    if not observed:
        raise DimensionMismatch("SCM has no observed nodes to condition on")

    sigma = analytic_covariance(spec)
    obs_cov = sigma[np.ix_(observed, observed)]
    samples_rng = _substream(spec.seed if seed is None else seed, 2)
    z_obs = samples_rng.multivariate_normal(
        np.zeros(len(observed)), obs_cov, size=n_rows, method="svd"
    )

    group_order = [v for g in groups for v in g]
    if point is None:
        point_rng = _substream(spec.seed if seed is None else seed, 3)
        unobs_sorted = tuple(sorted(group_order))
        joint = point_rng.multivariate_normal(
            np.zeros(len(unobs_sorted)),
            sigma[np.ix_(unobs_sorted, unobs_sorted)],
            method="svd",
        )
        by_id = dict(zip(unobs_sorted, joint))
        point = np.array([by_id[v] for v in group_order])
    else:
        point = np.asarray(point, dtype=float)
        if point.shape != (len(group_order),):
            raise DimensionMismatch(
                f"evaluation point must have dimension {len(group_order)}"
            )

    conditionals = [conditional(spec, g, observed) for g in groups]
    rows = np.vstack(
        [gaussian_score_row(conditionals, point, z) for z in z_obs]
    )
    return ScoreMatrix(
        rows=rows,
        conditioning_samples=z_obs,
        point=point,
        group_sizes=tuple(len(g) for g in groups),
    )


def _numerical_rank(matrix: np.ndarray, tol: float) -> tuple[int, np.ndarray]:
    svals = np.linalg.svd(matrix, compute_uv=False) if matrix.size else np.zeros(0)
    if svals.size == 0 or svals[0] == 0.0:
        return 0, svals
    return int(np.sum(svals > tol * svals[0])), svals


def _block_variation(rows: np.ndarray, latent_dim: int) -> tuple[float, float]:
    if rows.shape[0] == 0:
        return 0.0, 0.0
    spread = rows.max(axis=0) - rows.min(axis=0)
    return float(spread[:latent_dim].max()), float(spread[latent_dim:].max())


def _report(variant, rank_input, matrix: ScoreMatrix, d, tol) -> RankReport:
    rank, svals = _numerical_rank(rank_input, tol)
    required = 2 * d
    first_var, second_var = _block_variation(matrix.rows, matrix.latent_dim)
    degenerate = []
    if matrix.n_rows > 1:
        if first_var < DEGENERATE_BLOCK_TOL:
            degenerate.append("first-derivative")
        if second_var < DEGENERATE_BLOCK_TOL:
            degenerate.append("second-derivative")
    return RankReport(
        variant=variant,
        required_rank=required,
        achieved_rank=rank,
        singular_values=tuple(float(s) for s in svals),
        tolerance=tol,
        verdict="satisfied" if rank >= required else "violated",
        group_count=d,
        ambient_dim=2 * matrix.latent_dim,
        sample_count=matrix.n_rows,
        first_block_variation=first_var,
        second_block_variation=second_var,
        degenerate_blocks=tuple(degenerate),
    )


def check_rank_direct(matrix: ScoreMatrix, d: int | None = None, tol: float = DEFAULT_RANK_TOL) -> RankReport:
    """Rank of the raw derivative rows against the 2d requirement."""
    if d is None:
        d = len(matrix.group_sizes)
    if matrix.n_rows < 2 * d:
        raise TooFewSamples(
            f"direct variant needs at least {2 * d} rows, got {matrix.n_rows}"
        )
    return _report(DIRECT, matrix.rows, matrix, d, tol)


def check_rank_subtracted(matrix: ScoreMatrix, d: int | None = None, tol: float = DEFAULT_RANK_TOL) -> RankReport:
    """Rank of the rows differenced against row 0 (needs 2d+1 rows)."""
    if d is None:
        d = len(matrix.group_sizes)
    if matrix.n_rows < 2 * d + 1:
        raise TooFewSamples(
            f"subtracted variant needs at least {2 * d + 1} rows, got {matrix.n_rows}"
        )
    diffs = matrix.rows[1:] - matrix.rows[0]
    return _report(SUBTRACTED, diffs, matrix, d, tol)


def rank_report_to_json(report: RankReport) -> dict:
    return {
        "variant": report.variant,
        "required_rank": report.required_rank,
        "achieved_rank": report.achieved_rank,
        "singular_values": list(report.singular_values),
        "tolerance": report.tolerance,
        "verdict": report.verdict,
        "group_count": report.group_count,
        "ambient_dim": report.ambient_dim,
        "sample_count": report.sample_count,
        "first_block_variation": report.first_block_variation,
        "second_block_variation": report.second_block_variation,
        "degenerate_blocks": list(report.degenerate_blocks),
    }

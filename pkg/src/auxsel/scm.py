"""Linear structural causal model: spec, sampling, closed-form Gaussians.

Each node is a linear combination of its parents plus independent noise.
Noise scales are in standard-deviation units for every family, so the
model covariance is (I - B)^-1 diag(scale^2) (I - B)^-T regardless of the
family; Gaussian conditionals additionally require Gaussian noise.

Randomness is split into named substreams keyed on the spec seed: noise
for node ``i`` comes from substream ``(0, i)`` and the coefficient for
edge ``(p, c)`` from ``(1, p, c)``, so extending a graph with new nodes
never perturbs existing columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    FormatError,
    InvalidId,
    NonGaussianNoise,
    OverlappingSets,
    SingularConditioning,
)
from .graph import Dag, topological_order

GAUSSIAN = "gaussian"
LAPLACE = "laplace"

COEFF_LOW, COEFF_HIGH = 0.5, 1.0


@dataclass(frozen=True)
class NoiseSpec:
    family: str
    scale: float = 1.0


@dataclass(frozen=True)
class ScmSpec:
    dag: Dag
    coefficients: dict[tuple[int, int], float]
    noise: tuple[NoiseSpec, ...]
    seed: int

    def __post_init__(self):
        if set(self.coefficients) != set(self.dag.edges):
            raise InvalidId("coefficient keys must equal the edge set")
        if len(self.noise) != self.dag.n:
            raise InvalidId(f"expected {self.dag.n} noise entries")
        for ns in self.noise:
            if ns.family not in (GAUSSIAN, LAPLACE):
                raise InvalidId(f"unknown noise family {ns.family!r}")
            if not ns.scale > 0:
                raise InvalidId("noise scales must be strictly positive")

    @property
    def is_gaussian(self) -> bool:
        return all(ns.family == GAUSSIAN for ns in self.noise)


@dataclass(frozen=True)
class SampleMatrix:
    """N x n data matrix; columns follow node id order."""

    data: np.ndarray
    labels: tuple[str, ...]

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    def columns(self, ids) -> np.ndarray:
        return self.data[:, list(ids)]


@dataclass(frozen=True)
class GaussianConditional:
    """Conditional law of ``targets`` given ``given``: mean is the affine
    map ``intercept + coefficients @ values``; covariance does not depend
    on the conditioning values."""

    targets: tuple[int, ...]
    given: tuple[int, ...]
    intercept: np.ndarray
    coefficients: np.ndarray
    covariance: np.ndarray
    mean: np.ndarray | None = None

    def mean_at(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != (len(self.given),):
            raise InvalidId(
                f"expected {len(self.given)} conditioning values, got {values.shape}"
            )
        return self.intercept + self.coefficients @ values


def _substream(seed: int, *key: int) -> np.random.Generator:
    entropy = int(seed) & (2**64 - 1)
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=key))


def random_spec(dag: Dag, seed: int) -> ScmSpec:
    """Draw edge coefficients uniformly from [0.5, 1.0], unit Gaussian noise."""
    coefficients = {
        (p, c): float(_substream(seed, 1, p, c).uniform(COEFF_LOW, COEFF_HIGH))
        for p, c in sorted(dag.edges)
    }
    noise = tuple(NoiseSpec(GAUSSIAN, 1.0) for _ in range(dag.n))
    return ScmSpec(dag=dag, coefficients=coefficients, noise=noise, seed=int(seed))


def _noise_column(spec: ScmSpec, node: int, n_samples: int) -> np.ndarray:
    rng = _substream(spec.seed, 0, node)
    ns = spec.noise[node]
    if ns.family == GAUSSIAN:
        return rng.normal(0.0, ns.scale, n_samples)
    # Laplace with variance scale^2 needs diversity parameter scale/sqrt(2).
    return rng.laplace(0.0, ns.scale / math.sqrt(2.0), n_samples)


def sample(spec: ScmSpec, n_samples: int) -> SampleMatrix:
    """Ancestral sampling in topological order."""
    if n_samples < 1:
        raise InvalidId("need at least one sample")
    data = np.empty((n_samples, spec.dag.n))
    for node in topological_order(spec.dag):
        col = _noise_column(spec, node, n_samples)
        for parent in spec.dag.parents[node]:
            col = col + spec.coefficients[(parent, node)] * data[:, parent]
        data[:, node] = col
    return SampleMatrix(data=data, labels=spec.dag.labels)


def analytic_covariance(spec: ScmSpec) -> np.ndarray:
    """Exact model covariance (I - B)^-1 diag(scale^2) (I - B)^-T, with
    B[child, parent] the edge coefficient. Gaussian specs only."""
    if not spec.is_gaussian:
        raise NonGaussianNoise("analytic covariance is defined for Gaussian specs")
    n = spec.dag.n
    b = np.zeros((n, n))
    for (p, c), beta in spec.coefficients.items():
        b[c, p] = beta
    inv = np.linalg.inv(np.eye(n) - b)
    lam = np.diag([ns.scale**2 for ns in spec.noise])
    cov = inv @ lam @ inv.T
    return (cov + cov.T) / 2.0


def conditional(spec: ScmSpec, group, given, values=None) -> GaussianConditional:
    """Gaussian conditional of ``group`` given ``given`` via the Schur
    complement of the analytic covariance. All marginal means are zero, so
    the affine mean map has zero intercept."""
    if not spec.is_gaussian:
        raise NonGaussianNoise("closed-form conditionals require Gaussian noise")
    targets = tuple(sorted(int(v) for v in group))
    cond = tuple(sorted(int(v) for v in given))
    if set(targets) & set(cond):
        raise OverlappingSets("group and conditioning sets overlap")
    for v in targets + cond:
        if not 0 <= v < spec.dag.n:
            raise InvalidId(f"node id {v} out of range")

    sigma = analytic_covariance(spec)
    s_gg = sigma[np.ix_(targets, targets)]
    if not cond:
        coeff = np.zeros((len(targets), 0))
        cov = s_gg
    else:
        s_cc = sigma[np.ix_(cond, cond)]
        s_gc = sigma[np.ix_(targets, cond)]
        svals = np.linalg.svd(s_cc, compute_uv=False)
        if svals[-1] <= 1e-10 * svals[0]:
            raise SingularConditioning(
                f"conditioning covariance is singular (smallest/largest "
                f"singular value {svals[-1]:.3e}/{svals[0]:.3e})"
            )
        coeff = s_gc @ np.linalg.inv(s_cc)
        cov = s_gg - coeff @ s_gc.T
    cov = (cov + cov.T) / 2.0
    intercept = np.zeros(len(targets))

    mean = None
    if values is not None:
        values = np.asarray(values, dtype=float)
        if values.shape != (len(cond),):
            raise InvalidId(
                f"expected {len(cond)} conditioning values, got {values.shape}"
            )
        mean = intercept + coeff @ values
    return GaussianConditional(
        targets=targets,
        given=cond,
        intercept=intercept,
        coefficients=coeff,
        covariance=cov,
        mean=mean,
    )


# --- JSON spec format ---------------------------------------------------

def spec_to_json(spec: ScmSpec) -> dict:
    return {
        "seed": spec.seed,
        "coefficients": [
            {"parent": p, "child": c, "beta": spec.coefficients[(p, c)]}
            for p, c in sorted(spec.coefficients)
        ],
        "noise": [
            {"family": ns.family, "scale": ns.scale} for ns in spec.noise
        ],
    }


def spec_from_json(dag: Dag, obj) -> ScmSpec:
    if not isinstance(obj, dict):
        raise FormatError("SCM spec JSON must be an object")
    unknown = set(obj) - {"seed", "coefficients", "noise"}
    if unknown:
        raise FormatError(f"unknown SCM spec keys: {sorted(unknown)}")
    try:
        coefficients = {
            (int(e["parent"]), int(e["child"])): float(e["beta"])
            for e in obj["coefficients"]
        }
        noise = tuple(
            NoiseSpec(str(e["family"]), float(e["scale"])) for e in obj["noise"]
        )
        seed = int(obj["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed SCM spec: {exc}") from exc
    return ScmSpec(dag=dag, coefficients=coefficients, noise=noise, seed=seed)

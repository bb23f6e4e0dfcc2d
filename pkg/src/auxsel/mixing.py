"""Volume-preserving mixing functions with exact inverses.

Two families, both with |det J| = 1 everywhere by construction:

* ``special-orthogonal`` — a fixed rotation matrix (det +1);
* ``additive-coupling-stack`` — layers mapping (a, b) to (a, b + t(a))
  for a fixed cubic-polynomial coupling t, alternating which half drives,
  so the composition mixes every coordinate while each layer has a unit
  triangular Jacobian.

Inverses are closed form: transpose for the rotation, subtraction in
reverse layer order for the couplings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DimensionTooSmall, FormatError
from .scm import SampleMatrix

SPECIAL_ORTHOGONAL = "special-orthogonal"
ADDITIVE_COUPLING = "additive-coupling-stack"

COUPLING_COEFF_RANGE = 0.5  # raw coefficient draws ~ Uniform[-0.5, 0.5]
COUPLING_DEGREE = 3
# Raw draws are divided by driver_dim * COUPLING_POWER_SCALE^(power-1).
# Without this, stacked layers iterate the cubic on their own output and
# overflow on realistic data, losing the closed-form inverse to roundoff.
COUPLING_POWER_SCALE = 16.0


@dataclass(frozen=True)
class CouplingLayer:
    """One additive coupling step.

    ``flip=False`` leaves columns [0, split) unchanged and shifts the rest
    by a polynomial in them; ``flip=True`` swaps the roles. ``coeffs`` has
    shape (degree, driver_dim, driven_dim), one matrix per power 1..degree.
    """

    split: int
    flip: bool
    coeffs: np.ndarray

    def shift(self, driver: np.ndarray) -> np.ndarray:
        total = np.zeros((driver.shape[0], self.coeffs.shape[2]))
        for power in range(1, COUPLING_DEGREE + 1):
            total += (driver**power) @ self.coeffs[power - 1]
        return total


@dataclass(frozen=True)
class MixingSpec:
    kind: str
    n: int
    seed: int
    matrix: np.ndarray | None = None
    layers: tuple[CouplingLayer, ...] = ()


def random_mixing(kind: str, n: int, seed: int, layers: int = 3) -> MixingSpec:
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))
    if kind == SPECIAL_ORTHOGONAL:
        if n < 1:
            raise DimensionTooSmall("need at least one dimension")
        q, r = np.linalg.qr(rng.standard_normal((n, n)))
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        return MixingSpec(kind=kind, n=n, seed=int(seed), matrix=q)
    if kind == ADDITIVE_COUPLING:
        if n < 2:
            raise DimensionTooSmall("coupling needs at least two dimensions")
        if layers < 1:
            raise DimensionTooSmall("need at least one coupling layer")
        split = n // 2
        built = []
        for i in range(layers):
            flip = i % 2 == 1
            driver_dim = n - split if flip else split
            driven_dim = split if flip else n - split
            coeffs = rng.uniform(
                -COUPLING_COEFF_RANGE,
                COUPLING_COEFF_RANGE,
                (COUPLING_DEGREE, driver_dim, driven_dim),
            )
            for power in range(1, COUPLING_DEGREE + 1):
                coeffs[power - 1] /= driver_dim * COUPLING_POWER_SCALE ** (power - 1)
            built.append(CouplingLayer(split=split, flip=flip, coeffs=coeffs))
        return MixingSpec(kind=kind, n=n, seed=int(seed), layers=tuple(built))
    raise FormatError(f"unknown mixing kind {kind!r}")


def _as_array(data) -> tuple[np.ndarray, tuple[str, ...] | None]:
    if isinstance(data, SampleMatrix):
        return data.data, data.labels
    return np.asarray(data, dtype=float), None


def _wrap(values: np.ndarray, labels):
    if labels is None:
        return values
    return SampleMatrix(data=values, labels=labels)


def forward(spec: MixingSpec, data):
    """Apply the mixing row-wise; accepts and returns the input's type."""
    values, labels = _as_array(data)
    if values.ndim != 2 or values.shape[1] != spec.n:
        raise DimensionMismatch(
            f"expected {spec.n} columns, got shape {values.shape}"
        )
    if spec.kind == SPECIAL_ORTHOGONAL:
        return _wrap(values @ spec.matrix.T, labels)
    out = values.copy()
    for layer in spec.layers:
        head, tail = out[:, : layer.split], out[:, layer.split :]
        if layer.flip:
            head = head + layer.shift(tail)
        else:
            tail = tail + layer.shift(head)
        out = np.hstack([head, tail])
    return _wrap(out, labels)


def inverse(spec: MixingSpec, data):
    """Exact inverse of :func:`forward`."""
    values, labels = _as_array(data)
    if values.ndim != 2 or values.shape[1] != spec.n:
        raise DimensionMismatch(
            f"expected {spec.n} columns, got shape {values.shape}"
        )
    if spec.kind == SPECIAL_ORTHOGONAL:
        return _wrap(values @ spec.matrix, labels)
    out = values.copy()
    for layer in reversed(spec.layers):
        head, tail = out[:, : layer.split], out[:, layer.split :]
        if layer.flip:
            head = head - layer.shift(tail)
        else:
            tail = tail - layer.shift(head)
        out = np.hstack([head, tail])
    return _wrap(out, labels)


def numeric_jacobian_determinant(spec: MixingSpec, point, h: float = 1e-5) -> float:
    """Central-difference Jacobian determinant at one point."""
    point = np.asarray(point, dtype=float)
    if point.shape != (spec.n,):
        raise DimensionMismatch(f"expected a point of dimension {spec.n}")
    jac = np.empty((spec.n, spec.n))
    for j in range(spec.n):
        delta = np.zeros(spec.n)
        delta[j] = h
        hi = forward(spec, (point + delta)[None, :])[0]
        lo = forward(spec, (point - delta)[None, :])[0]
        jac[:, j] = (hi - lo) / (2.0 * h)
    return float(np.linalg.det(jac))


# --- JSON mixing format --------------------------------------------------

def mixing_to_json(spec: MixingSpec) -> dict:
    if spec.kind == SPECIAL_ORTHOGONAL:
        return {
            "kind": spec.kind,
            "n": spec.n,
            "seed": spec.seed,
            "matrix": spec.matrix.tolist(),
        }
    return {
        "kind": spec.kind,
        "n": spec.n,
        "seed": spec.seed,
        "layers": [
            {
                "split": layer.split,
                "flip": layer.flip,
                "coeffs": layer.coeffs.tolist(),
            }
            for layer in spec.layers
        ],
    }


def mixing_from_json(obj) -> MixingSpec:
    if not isinstance(obj, dict):
        raise FormatError("mixing spec JSON must be an object")
    kind = obj.get("kind")
    try:
        n = int(obj["n"])
        seed = int(obj["seed"])
        if kind == SPECIAL_ORTHOGONAL:
            matrix = np.asarray(obj["matrix"], dtype=float)
            if matrix.shape != (n, n):
                raise FormatError(f"matrix must be {n}x{n}")
            return MixingSpec(kind=kind, n=n, seed=seed, matrix=matrix)
        if kind == ADDITIVE_COUPLING:
            layers = tuple(
                CouplingLayer(
                    split=int(e["split"]),
                    flip=bool(e["flip"]),
                    coeffs=np.asarray(e["coeffs"], dtype=float),
                )
                for e in obj["layers"]
            )
            return MixingSpec(kind=kind, n=n, seed=seed, layers=layers)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed mixing spec: {exc}") from exc
    raise FormatError(f"unknown mixing kind {kind!r}")

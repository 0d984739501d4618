"""Bi-objective evaluators: the synthetic keyword-spotting problem and
closed-form benchmarks with known Pareto fronts.

Both objectives are minimized: ``f1`` is negated accuracy and ``f2`` is model
size in bytes (for the KWS problem).  The accuracy model is a deterministic
stand-in for training-and-validating a real network; every constant in it is
a fixture of this package, not a measured value.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping, NamedTuple

import numpy as np

from .space import (
    Configuration,
    ContinuousRange,
    IntegerRange,
    SearchSpace,
    SpaceMismatchError,
    default_kws_space,
)

__all__ = [
    "Bounds",
    "ObjectiveProblem",
    "ObjectiveVector",
    "UnknownProblemError",
    "benchmark_biobjective",
    "dscnn_param_count",
    "dscnn_size_bytes",
    "evaluate_kws",
    "get_problem",
    "list_problems",
    "make_kws_problem",
    "normalize_array",
    "normalize_objectives",
    "synthetic_accuracy",
]

logger = logging.getLogger(__name__)


class ObjectiveVector(NamedTuple):
    f1: float
    f2: float


# ((f1_lo, f1_hi), (f2_lo, f2_hi)); must bracket everything the problem can
# return so normalized metrics stay in [0, 1].
Bounds = tuple[tuple[float, float], tuple[float, float]]


@dataclass(frozen=True)
class ObjectiveProblem:
    """A black-box bi-objective problem over a search space.

    ``evaluate`` must be a pure function of the configuration id.
    ``eval_cost_model`` maps a configuration to simulated wall-clock seconds
    per evaluation, standing in for the training time a real problem would
    spend; archives record this simulated clock so runs stay reproducible.
    """

    name: str
    space: SearchSpace
    evaluate: Callable[[Configuration], ObjectiveVector]
    nominal_bounds: Bounds
    eval_cost_model: Callable[[Configuration], float] | None = None


class UnknownProblemError(KeyError):
    pass


# --------------------------------------------------------------------------
# Synthetic KWS problem
# --------------------------------------------------------------------------

# Fixture constants for the synthetic accuracy model (NOT measured values).
# Accuracy saturates with parameter count, with small structured dents so the
# trade-off front is not a pure one-dimensional curve.
ACC_CEILING = 0.95
CAPACITY_SCALE = 40_000.0  # parameter count at which accuracy reaches ~63% of ceiling
SMALL_KERNEL_FACTOR = 0.99  # multiplier when kernel_size == 3 (5x5 kernels score 1.0)
NO_BATCHNORM_FACTOR = 0.985
DROPOUT_CURVATURE = 0.1
DROPOUT_SWEET_SPOT = 0.25
JITTER_SPAN = 0.01  # configuration-keyed deterministic jitter, +/- this much

NUM_CLASSES = 10
BYTES_PER_PARAM = 4  # float32 weights, no quantization

# Simulated seconds per evaluation: base cost plus a per-parameter term.
SIM_SECONDS_BASE = 5.0
SIM_SECONDS_PER_PARAM = 2.5e-4

KWS_BOUNDS: Bounds = ((-1.0, 0.0), (4000.0, 670_000.0))

_KWS_SPACE = default_kws_space()


def _kws_values(cfg: Configuration) -> dict[str, Any]:
    try:
        _KWS_SPACE.validate(cfg)
    except SpaceMismatchError as exc:
        raise SpaceMismatchError(f"not a KWS configuration: {exc}") from exc
    return _KWS_SPACE.values_dict(cfg)


def dscnn_param_count(values: Mapping[str, Any]) -> int:
    """Parameter count of the depthwise-separable CNN described by ``values``.

    Layer by layer (all convs have biases; batch norm adds 4 parameters per
    channel after each conv when enabled):

    - standard ``k x k`` conv, 1 input channel -> ``filters_1``:
      ``k*k*filters_1 + filters_1``
    - for each extra conv layer j = 2..conv_layers: a depthwise ``k x k``
      conv over ``filters_{j-1}`` channels (``k*k*f_prev + f_prev``) followed
      by a 1x1 pointwise conv (``f_prev*f_j + f_j``)
    - global average pooling (no parameters), then ``dense_layers`` dense
      layers chained ``filters_L -> units_1 -> ...``, each ``in*out + out``
    - final dense layer to NUM_CLASSES outputs, with bias

    Dormant filter/unit entries beyond the active depth are ignored.
    """
    k = int(values["kernel_size"])
    n_conv = int(values["conv_layers"])
    filters = [int(values[f"filters_{j}"]) for j in range(1, 4)]
    n_dense = int(values["dense_layers"])
    units = [int(values[f"units_{j}"]) for j in range(1, 4)]
    bn = bool(values["batch_norm"])

    def bn_params(channels: int) -> int:
        return 4 * channels if bn else 0

    params = k * k * 1 * filters[0] + filters[0] + bn_params(filters[0])
    for j in range(1, n_conv):
        f_prev, f_cur = filters[j - 1], filters[j]
        params += k * k * f_prev + f_prev + bn_params(f_prev)  # depthwise
        params += f_prev * f_cur + f_cur + bn_params(f_cur)  # pointwise
    fan_in = filters[n_conv - 1]
    for j in range(n_dense):
        params += fan_in * units[j] + units[j]
        fan_in = units[j]
    params += fan_in * NUM_CLASSES + NUM_CLASSES
    return params


def dscnn_size_bytes(cfg: Configuration) -> int:
    """Exact float32 memory footprint (bytes) of the model for ``cfg``."""
    return BYTES_PER_PARAM * dscnn_param_count(_kws_values(cfg))


def _config_jitter(cfg: Configuration) -> float:
    digest = hashlib.sha256((cfg.id + "/acc-jitter").encode("ascii")).digest()
    u = int.from_bytes(digest[:8], "big") / 2**64
    return (2.0 * u - 1.0) * JITTER_SPAN


def synthetic_accuracy(cfg: Configuration) -> float:
    """Deterministic stand-in for validation accuracy on the KWS task.

    Saturating in model capacity with diminishing returns, dented by kernel
    size, batch norm, and distance of the dropout rate from a sweet spot,
    plus a small hash-keyed jitter so equal-size models are not exact ties.
    """
    values = _kws_values(cfg)
    p = dscnn_param_count(values)
    capacity = 1.0 - math.exp(-p / CAPACITY_SCALE)
    m_kernel = 1.0 if int(values["kernel_size"]) == 5 else SMALL_KERNEL_FACTOR
    m_bn = 1.0 if values["batch_norm"] else NO_BATCHNORM_FACTOR
    d = float(values["dropout"])
    dropout_penalty = DROPOUT_CURVATURE * (d - DROPOUT_SWEET_SPOT) ** 2
    acc = ACC_CEILING * capacity * m_kernel * m_bn * (1.0 - dropout_penalty)
    acc += _config_jitter(cfg)
    return min(max(acc, 0.0), 1.0)


def evaluate_kws(cfg: Configuration) -> ObjectiveVector:
    """(-accuracy, size_bytes) for a KWS configuration."""
    f1 = -synthetic_accuracy(cfg)
    f2 = float(dscnn_size_bytes(cfg))
    if not (-1.0 <= f1 <= 0.0) or not (f2 > 0.0) or not math.isfinite(f1):
        raise ValueError(f"objective invariant violated: ({f1}, {f2})")
    return ObjectiveVector(f1, f2)


def _kws_sim_seconds(cfg: Configuration) -> float:
    return SIM_SECONDS_BASE + SIM_SECONDS_PER_PARAM * dscnn_param_count(_kws_values(cfg))


def make_kws_problem() -> ObjectiveProblem:
    return ObjectiveProblem(
        name="kws",
        space=_KWS_SPACE,
        evaluate=evaluate_kws,
        nominal_bounds=KWS_BOUNDS,
        eval_cost_model=_kws_sim_seconds,
    )


# --------------------------------------------------------------------------
# Closed-form benchmarks (known Pareto fronts, used to test metrics and the
# optimizer against exact answers)
# --------------------------------------------------------------------------

SCHAFFER_X_LO = -10.0
SCHAFFER_X_HI = 10.0
SCHAFFER_GRID_POINTS = 201


def _schaffer_values(x: float) -> ObjectiveVector:
    return ObjectiveVector(x * x, (x - 2.0) * (x - 2.0))


def _evaluate_schaffer(cfg: Configuration) -> ObjectiveVector:
    return _schaffer_values(float(cfg.values[0]))


def schaffer_grid_x(index: int) -> float:
    """The x value of grid point ``index`` on the discretized Schaffer problem."""
    step = (SCHAFFER_X_HI - SCHAFFER_X_LO) / (SCHAFFER_GRID_POINTS - 1)
    return SCHAFFER_X_LO + index * step


def _evaluate_schaffer_grid(cfg: Configuration) -> ObjectiveVector:
    return _schaffer_values(schaffer_grid_x(int(cfg.values[0])))


def _evaluate_convex_quadratic(cfg: Configuration) -> ObjectiveVector:
    x1, x2 = float(cfg.values[0]), float(cfg.values[1])
    f1 = (x1 - 0.25) ** 2 + (x2 - 0.25) ** 2
    f2 = (x1 - 0.75) ** 2 + (x2 - 0.75) ** 2
    return ObjectiveVector(f1, f2)


def _make_schaffer() -> ObjectiveProblem:
    space = SearchSpace((ContinuousRange("x", SCHAFFER_X_LO, SCHAFFER_X_HI),))
    return ObjectiveProblem(
        name="schaffer-n1",
        space=space,
        evaluate=_evaluate_schaffer,
        nominal_bounds=((0.0, 100.0), (0.0, 144.0)),
        eval_cost_model=lambda cfg: 1.0,
    )


def _make_schaffer_grid() -> ObjectiveProblem:
    space = SearchSpace((IntegerRange("i", 0, SCHAFFER_GRID_POINTS - 1),))
    return ObjectiveProblem(
        name="schaffer-n1-grid",
        space=space,
        evaluate=_evaluate_schaffer_grid,
        nominal_bounds=((0.0, 100.0), (0.0, 144.0)),
        eval_cost_model=lambda cfg: 1.0,
    )


def _make_convex_quadratic() -> ObjectiveProblem:
    space = SearchSpace(
        (ContinuousRange("x1", 0.0, 1.0), ContinuousRange("x2", 0.0, 1.0))
    )
    return ObjectiveProblem(
        name="convex-quadratic-2d",
        space=space,
        evaluate=_evaluate_convex_quadratic,
        nominal_bounds=((0.0, 1.2), (0.0, 1.2)),
        eval_cost_model=lambda cfg: 1.0,
    )


_BENCHMARKS: dict[str, Callable[[], ObjectiveProblem]] = {
    "convex-quadratic-2d": _make_convex_quadratic,
    "schaffer-n1": _make_schaffer,
    "schaffer-n1-grid": _make_schaffer_grid,
}

_PROBLEMS: dict[str, Callable[[], ObjectiveProblem]] = {"kws": make_kws_problem, **_BENCHMARKS}


def benchmark_biobjective(name: str) -> ObjectiveProblem:
    """Closed-form benchmark problem with an analytically known Pareto front."""
    try:
        return _BENCHMARKS[name]()
    except KeyError:
        raise UnknownProblemError(
            f"unknown benchmark {name!r}; available: {sorted(_BENCHMARKS)}"
        ) from None


def get_problem(name: str) -> ObjectiveProblem:
    try:
        return _PROBLEMS[name]()
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {name!r}; available: {sorted(_PROBLEMS)}"
        ) from None


def list_problems() -> list[str]:
    return sorted(_PROBLEMS)


# --------------------------------------------------------------------------
# Objective normalization
# --------------------------------------------------------------------------


def normalize_objectives(y: ObjectiveVector, bounds: Bounds) -> ObjectiveVector:
    """Affinely map both objectives to [0, 1] using the problem's nominal bounds.

    Values outside the bounds are clamped (and flagged in the run log); the
    map is increasing per objective, so dominance relations are preserved.
    """
    out = []
    for value, (lo, hi) in zip(y, bounds):
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"degenerate normalization bounds ({lo}, {hi})")
        u = (value - lo) / (hi - lo)
        if u < 0.0 or u > 1.0:
            logger.warning("objective value %s outside nominal bounds (%s, %s); clamped", value, lo, hi)
            u = min(max(u, 0.0), 1.0)
        out.append(u)
    return ObjectiveVector(out[0], out[1])


def normalize_array(ys: np.ndarray, bounds: Bounds) -> np.ndarray:
    """Vectorized :func:`normalize_objectives` for an (n, 2) array."""
    ys = np.asarray(ys, dtype=float)
    lo = np.array([bounds[0][0], bounds[1][0]])
    hi = np.array([bounds[0][1], bounds[1][1]])
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
        raise ValueError(f"degenerate normalization bounds {bounds}")
    u = (ys - lo) / (hi - lo)
    if np.any(u < 0.0) or np.any(u > 1.0):
        logger.warning("objective values outside nominal bounds; clamped")
        u = np.clip(u, 0.0, 1.0)
    return u

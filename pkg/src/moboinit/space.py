"""Mixed discrete/continuous search spaces with a unit-hypercube encoding.

A :class:`SearchSpace` is an ordered list of dimensions.  Configurations are
fixed-length value tuples; per-layer parameters that are inactive for shallow
architectures stay in the tuple as dormant values so that the encoded vector
always has the same length.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

__all__ = [
    "Boolean",
    "Categorical",
    "Configuration",
    "ContinuousRange",
    "IntegerRange",
    "SearchSpace",
    "SpaceMismatchError",
    "default_kws_space",
    "distance",
    "encode",
    "perturb",
    "sample_uniform",
]

# Scale of the Gaussian step used to perturb continuous dimensions, as a
# fraction of the dimension's range.  Tunable; ±1 grid step is used for
# integer dimensions.
CONTINUOUS_STEP_FRACTION = 0.1


class SpaceMismatchError(ValueError):
    """A configuration does not belong to the space it was used with."""


@dataclass(frozen=True)
class IntegerRange:
    """Integers lo, lo+step, ... up to hi (inclusive when on the grid)."""

    name: str
    lo: int
    hi: int
    step: int = 1

    kind = "int"

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"{self.name}: lo {self.lo} > hi {self.hi}")
        if self.step < 1:
            raise ValueError(f"{self.name}: step must be >= 1, got {self.step}")

    @property
    def n_values(self) -> int:
        return (self.hi - self.lo) // self.step + 1

    @property
    def grid_max(self) -> int:
        return self.lo + (self.n_values - 1) * self.step

    @property
    def width(self) -> int:
        return 1

    def contains(self, value: Any) -> bool:
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            return False
        return self.lo <= value <= self.hi and (value - self.lo) % self.step == 0

    def sample(self, rng) -> int:
        return int(self.lo + int(rng.integers(0, self.n_values)) * self.step)

    def encode(self, value: int) -> tuple[float, ...]:
        if self.n_values == 1:
            return (0.0,)
        return ((value - self.lo) / (self.grid_max - self.lo),)

    def decode(self, coords: Sequence[float]) -> int:
        if self.n_values == 1:
            return self.lo
        idx = int(round(float(coords[0]) * (self.n_values - 1)))
        idx = min(max(idx, 0), self.n_values - 1)
        return self.lo + idx * self.step

    def can_move(self, value: int) -> bool:
        return self.n_values > 1

    def perturb(self, value: int, rng) -> int:
        # +/- one grid step; at an endpoint the only legal move is forced.
        at_lo = value - self.step < self.lo
        at_hi = value + self.step > self.grid_max
        if at_lo and at_hi:
            raise ValueError(f"{self.name}: no neighbor exists for {value}")
        if at_lo:
            return value + self.step
        if at_hi:
            return value - self.step
        return value + (self.step if rng.random() < 0.5 else -self.step)


@dataclass(frozen=True)
class Categorical:
    """Unordered finite choices, one-hot encoded to avoid fake ordering."""

    name: str
    choices: tuple[Any, ...]

    kind = "categorical"

    def __post_init__(self) -> None:
        if len(self.choices) < 2:
            raise ValueError(f"{self.name}: need >= 2 choices")
        if len(set(self.choices)) != len(self.choices):
            raise ValueError(f"{self.name}: duplicate choices")

    @property
    def n_values(self) -> int:
        return len(self.choices)

    @property
    def width(self) -> int:
        return len(self.choices)

    def contains(self, value: Any) -> bool:
        return any(value == c and type(value) is type(c) for c in self.choices)

    def sample(self, rng) -> Any:
        return self.choices[int(rng.integers(0, len(self.choices)))]

    def encode(self, value: Any) -> tuple[float, ...]:
        onehot = [0.0] * len(self.choices)
        onehot[self.choices.index(value)] = 1.0
        return tuple(onehot)

    def decode(self, coords: Sequence[float]) -> Any:
        return self.choices[int(np.argmax(coords))]

    def can_move(self, value: Any) -> bool:
        return True

    def perturb(self, value: Any, rng) -> Any:
        others = [c for c in self.choices if c != value]
        return others[int(rng.integers(0, len(others)))]


@dataclass(frozen=True)
class Boolean:
    name: str

    kind = "bool"

    @property
    def n_values(self) -> int:
        return 2

    @property
    def width(self) -> int:
        return 1

    def contains(self, value: Any) -> bool:
        return isinstance(value, bool)

    def sample(self, rng) -> bool:
        return bool(rng.random() >= 0.5)

    def encode(self, value: bool) -> tuple[float, ...]:
        return (1.0 if value else 0.0,)

    def decode(self, coords: Sequence[float]) -> bool:
        return bool(coords[0] >= 0.5)

    def can_move(self, value: bool) -> bool:
        return True

    def perturb(self, value: bool, rng) -> bool:
        return not value


@dataclass(frozen=True)
class ContinuousRange:
    name: str
    lo: float
    hi: float

    kind = "continuous"

    def __post_init__(self) -> None:
        if not (self.lo < self.hi):
            raise ValueError(f"{self.name}: need lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def n_values(self) -> None:
        return None

    @property
    def width(self) -> int:
        return 1

    def contains(self, value: Any) -> bool:
        if isinstance(value, bool) or not isinstance(value, (int, float, np.floating)):
            return False
        return self.lo <= float(value) <= self.hi

    def sample(self, rng) -> float:
        return float(self.lo + (self.hi - self.lo) * rng.random())

    def encode(self, value: float) -> tuple[float, ...]:
        return ((float(value) - self.lo) / (self.hi - self.lo),)

    def decode(self, coords: Sequence[float]) -> float:
        u = min(max(float(coords[0]), 0.0), 1.0)
        return self.lo + u * (self.hi - self.lo)

    def can_move(self, value: float) -> bool:
        return True

    def perturb(self, value: float, rng) -> float:
        scale = CONTINUOUS_STEP_FRACTION * (self.hi - self.lo)
        # Redraw when clamping collapses the step back onto the input; the
        # neighbor must differ in this dimension.
        for _ in range(1000):
            cand = float(value) + scale * float(rng.standard_normal())
            cand = min(max(cand, self.lo), self.hi)
            if cand != value:
                return cand
        raise RuntimeError(f"{self.name}: could not move off {value}")


Dimension = IntegerRange | Categorical | Boolean | ContinuousRange

_DIM_KINDS = {
    "int": IntegerRange,
    "categorical": Categorical,
    "bool": Boolean,
    "continuous": ContinuousRange,
}


def _stable_id(values: tuple[Any, ...]) -> str:
    payload = json.dumps(list(values), separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:16]


@dataclass(frozen=True)
class Configuration:
    """Fixed-length value tuple plus a stable content hash."""

    values: tuple[Any, ...]
    id: str = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "id", _stable_id(self.values))


@dataclass(frozen=True)
class SearchSpace:
    dims: tuple[Dimension, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(self.dims))
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError("dimension names must be unique")

    @property
    def dim_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)

    @property
    def encoded_width(self) -> int:
        return sum(d.width for d in self.dims)

    def discrete_lattice_size(self) -> int:
        """Number of grid points, ignoring continuous dimensions."""
        n = 1
        for d in self.dims:
            if d.kind != "continuous":
                n *= d.n_values
        return n

    def configuration(self, values: Sequence[Any]) -> Configuration:
        cfg = Configuration(tuple(_to_scalar(v) for v in values))
        self.validate(cfg)
        return cfg

    def validate(self, cfg: Configuration) -> None:
        if len(cfg.values) != len(self.dims):
            raise SpaceMismatchError(
                f"configuration has {len(cfg.values)} values, space has {len(self.dims)} dims"
            )
        for dim, value in zip(self.dims, cfg.values):
            if not dim.contains(value):
                raise SpaceMismatchError(f"value {value!r} outside domain of {dim.name}")

    def values_dict(self, cfg: Configuration) -> dict[str, Any]:
        return dict(zip(self.dim_names, cfg.values))

    def decode_vector(self, u: Sequence[float]) -> Configuration:
        """Snap a point of the unit hypercube to the nearest grid configuration."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.encoded_width,):
            raise SpaceMismatchError(
                f"encoded vector has shape {u.shape}, expected ({self.encoded_width},)"
            )
        values = []
        pos = 0
        for dim in self.dims:
            values.append(dim.decode(u[pos : pos + dim.width]))
            pos += dim.width
        return Configuration(tuple(values))

    def to_dict(self) -> dict[str, Any]:
        dims = []
        for d in self.dims:
            if d.kind == "int":
                params: dict[str, Any] = {"lo": d.lo, "hi": d.hi, "step": d.step}
            elif d.kind == "categorical":
                params = {"choices": list(d.choices)}
            elif d.kind == "continuous":
                params = {"lo": d.lo, "hi": d.hi}
            else:
                params = {}
            dims.append({"name": d.name, "kind": d.kind, "params": params})
        return {"dims": dims}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SearchSpace":
        dims: list[Dimension] = []
        for spec in data["dims"]:
            kind = spec["kind"]
            if kind not in _DIM_KINDS:
                raise ValueError(f"unknown dimension kind {kind!r}")
            params = dict(spec.get("params", {}))
            if kind == "categorical":
                params["choices"] = tuple(params["choices"])
            dims.append(_DIM_KINDS[kind](name=spec["name"], **params))
        return cls(tuple(dims))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SearchSpace":
        return cls.from_dict(json.loads(text))


def _to_scalar(v: Any) -> Any:
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def sample_uniform(space: SearchSpace, rng) -> Configuration:
    """Sample every dimension independently and uniformly over its domain."""
    return Configuration(tuple(d.sample(rng) for d in space.dims))


def encode(space: SearchSpace, cfg: Configuration) -> np.ndarray:
    """Map a configuration into [0, 1]^d (one-hot blocks for categoricals)."""
    space.validate(cfg)
    coords: list[float] = []
    for dim, value in zip(space.dims, cfg.values):
        coords.extend(dim.encode(value))
    return np.array(coords, dtype=float)


def perturb(space: SearchSpace, cfg: Configuration, rng) -> Configuration:
    """Return a neighbor differing from ``cfg`` in exactly one dimension."""
    space.validate(cfg)
    movable = [i for i, (d, v) in enumerate(zip(space.dims, cfg.values)) if d.can_move(v)]
    if not movable:
        raise ValueError("no dimension of this space can move")
    i = movable[int(rng.integers(0, len(movable)))]
    values = list(cfg.values)
    values[i] = space.dims[i].perturb(values[i], rng)
    return Configuration(tuple(values))


def distance(space: SearchSpace, a: Configuration, b: Configuration) -> float:
    """Euclidean distance between encoded configurations."""
    return float(np.linalg.norm(encode(space, a) - encode(space, b)))


def default_kws_space() -> SearchSpace:
    """The keyword-spotting DS-CNN hyperparameter space used by the `kws` problem.

    Per-layer filter and unit dimensions are always present; entries beyond
    the active depth (``conv_layers`` / ``dense_layers``) are dormant.
    """
    return SearchSpace(
        (
            IntegerRange("conv_layers", 1, 3),
            IntegerRange("filters_1", 16, 64, step=8),
            IntegerRange("filters_2", 16, 64, step=8),
            IntegerRange("filters_3", 16, 64, step=8),
            Categorical("kernel_size", (3, 5)),
            IntegerRange("stride", 1, 2),
            ContinuousRange("dropout", 0.0, 0.5),
            Boolean("batch_norm"),
            IntegerRange("dense_layers", 1, 3),
            IntegerRange("units_1", 32, 256, step=32),
            IntegerRange("units_2", 32, 256, step=32),
            IntegerRange("units_3", 32, 256, step=32),
        )
    )

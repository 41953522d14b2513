"""Problem instances: a symmetric travel-time matrix plus a separation threshold.

Two seeded generators are provided. ``generate_cities`` scatters sites around
three cities of decreasing size on a 240x240 map; ``generate_general`` draws
every distance independently from a uniform law.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InstanceValidationError, InvalidConfigError

DEFAULT_THRESHOLD = 60.0


@dataclass(frozen=True, eq=False)
class Instance:
    """n sites, threshold D (minutes) and the n x n travel-time matrix."""

    n: int
    threshold: float
    distances: np.ndarray

    def __post_init__(self):
        d = np.array(self.distances, dtype=np.float64)
        d.setflags(write=False)
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "n", int(self.n))
        validate_instance(self)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.n == other.n
            and self.threshold == other.threshold
            and np.array_equal(self.distances, other.distances)
        )

    __hash__ = None

    def near_mask(self) -> np.ndarray:
        """Boolean matrix of pairs with d_ij < D, diagonal excluded."""
        m = self.distances < self.threshold
        np.fill_diagonal(m, False)
        return m

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "threshold": self.threshold,
            "distances": self.distances.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        try:
            n = data["n"]
            threshold = data["threshold"]
            rows = data["distances"]
        except KeyError as exc:
            raise InstanceValidationError(f"missing key {exc.args[0]!r}") from None
        if not isinstance(rows, list) or len(rows) != n:
            raise InstanceValidationError(
                f"distances must have {n} rows, got {len(rows) if isinstance(rows, list) else type(rows).__name__}"
            )
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != n:
                raise InstanceValidationError(f"row {i} must have {n} entries", pair=(i, None))
        return cls(n=n, threshold=threshold, distances=np.array(rows, dtype=np.float64))


def validate_instance(inst: Instance) -> None:
    n, d = inst.n, inst.distances
    if n < 1:
        raise InstanceValidationError(f"n must be positive, got {n}")
    if d.shape != (n, n):
        raise InstanceValidationError(f"distances shape {d.shape} does not match n={n}")
    if not (math.isfinite(inst.threshold) and inst.threshold > 0):
        raise InstanceValidationError(f"threshold must be a positive finite number, got {inst.threshold}")
    bad = ~np.isfinite(d)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise InstanceValidationError(f"non-finite distance at ({i},{j})", pair=(i, j))
    diag = np.flatnonzero(np.diag(d) != 0)
    if diag.size:
        i = int(diag[0])
        raise InstanceValidationError(f"nonzero diagonal entry at ({i},{i}): {d[i, i]}", pair=(i, i))
    neg = d < 0
    if neg.any():
        i, j = map(int, np.argwhere(neg)[0])
        raise InstanceValidationError(f"negative distance at ({i},{j}): {d[i, j]}", pair=(i, j))
    asym = np.triu(d != d.T, k=1)
    if asym.any():
        i, j = map(int, np.argwhere(asym)[0])
        raise InstanceValidationError(
            f"asymmetric distances at ({i},{j}): {d[i, j]} != {d[j, i]}", pair=(i, j)
        )


# ---------------------------------------------------------------- generators


@dataclass(frozen=True)
class CitiesConfig:
    n: int
    seed: int = 0
    threshold: float = DEFAULT_THRESHOLD
    map_side: float = 240.0
    city_count: int = 3
    proportions: tuple = (1 / 2, 1 / 3, 1 / 6)
    variance_low: float = 80.0
    variance_high: float = 160.0
    min_center_separation: float = 80.0

    def validate(self):
        if self.n < 2:
            raise InvalidConfigError(f"cities generator needs n >= 2, got {self.n}")
        if len(self.proportions) != self.city_count:
            raise InvalidConfigError("one proportion per city required")
        if abs(sum(self.proportions) - 1.0) > 1e-12:
            raise InvalidConfigError(f"proportions must sum to 1, got {sum(self.proportions)}")
        if not self.variance_low < self.variance_high:
            raise InvalidConfigError("variance_low must be below variance_high")
        if self.map_side <= 0 or self.threshold <= 0:
            raise InvalidConfigError("map_side and threshold must be positive")


@dataclass(frozen=True)
class GeneralConfig:
    n: int
    seed: int = 0
    threshold: float = DEFAULT_THRESHOLD
    dist_high: float = 240.0

    def validate(self):
        if self.n < 2:
            raise InvalidConfigError(f"general generator needs n >= 2, got {self.n}")
        if self.dist_high <= 0 or self.threshold <= 0:
            raise InvalidConfigError("dist_high and threshold must be positive")


@dataclass
class CitiesLayout:
    """Geometry behind a cities instance, kept for diagnostics and tests."""

    centers: np.ndarray
    variances: np.ndarray
    labels: np.ndarray
    coords: np.ndarray = field(repr=False)

    def counts(self) -> tuple:
        return tuple(int(c) for c in np.bincount(self.labels, minlength=len(self.centers)))


def city_sizes(n: int, proportions) -> list:
    """Round-half-up share for every city but the last, which takes the rest."""
    sizes = [int(math.floor(n * p + 0.5)) for p in proportions[:-1]]
    sizes.append(n - sum(sizes))
    if sizes[-1] < 0:
        raise InvalidConfigError(f"proportions {proportions} overflow n={n}")
    return sizes


def _draw_centers(rng: np.random.Generator, cfg: CitiesConfig) -> np.ndarray:
    for _ in range(10_000):
        centers = rng.uniform(0.0, cfg.map_side, size=(cfg.city_count, 2))
        gaps = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() >= cfg.min_center_separation:
            return centers
    raise InvalidConfigError("could not place city centers with the requested separation")


def cities_layout(cfg: CitiesConfig) -> CitiesLayout:
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    centers = _draw_centers(rng, cfg)
    variances = rng.uniform(cfg.variance_low, cfg.variance_high, size=cfg.city_count)
    sizes = city_sizes(cfg.n, cfg.proportions)
    labels = np.repeat(np.arange(cfg.city_count), sizes)
    noise = rng.standard_normal((cfg.n, 2)) * np.sqrt(variances)[labels, None]
    coords = centers[labels] + noise
    return CitiesLayout(centers=centers, variances=variances, labels=labels, coords=coords)


def euclidean_matrix(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt((diff**2).sum(axis=-1))
    # exact symmetry regardless of rounding in the subtraction
    d = np.triu(d, k=1)
    return d + d.T


def generate_cities(cfg: CitiesConfig) -> Instance:
    layout = cities_layout(cfg)
    return Instance(cfg.n, cfg.threshold, euclidean_matrix(layout.coords))


def generate_general(cfg: GeneralConfig) -> Instance:
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    iu = np.triu_indices(cfg.n, k=1)
    d = np.zeros((cfg.n, cfg.n))
    d[iu] = rng.uniform(0.0, cfg.dist_high, size=len(iu[0]))
    return Instance(cfg.n, cfg.threshold, d + d.T)


def generate(env: str, n: int, seed: int, threshold: float = DEFAULT_THRESHOLD) -> Instance:
    """Dispatch on the environment name used by the CLI and config files."""
    if env == "cities":
        return generate_cities(CitiesConfig(n=n, seed=seed, threshold=threshold))
    if env == "general":
        return generate_general(GeneralConfig(n=n, seed=seed, threshold=threshold))
    raise InvalidConfigError(f"unknown environment {env!r}; expected 'cities' or 'general'")


# ---------------------------------------------------------------- file I/O


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict()), encoding="utf-8")


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return Instance.from_dict(data)

"""Distributions and reproducible random-stream allocation.

Every sampling activity in a model owns a dedicated pseudorandom stream so
that scenarios sharing a master seed differ only through the parameter under
study (common random numbers). Streams are PCG-64 generators derived from
``(master_seed, replication_index, stream_index)`` through numpy's
``SeedSequence`` entropy mixer, which guarantees independent, collision-free
streams without a global registry.

Distribution JSON encoding (all time parameters in the owning model's unit):

    {"family": "exponential", "mean": 22.72}
    {"family": "lognormal", "mean": 128, "sd": 50}
    {"family": "deterministic", "value": 5}
    {"family": "discrete", "labels": [...], "p": [...]}
    {"family": "triangular", "low": 1, "mode": 2, "high": 4}
    {"family": "uniform", "low": 0, "high": 1}
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError

_UINT64_MASK = 0xFFFFFFFFFFFFFFFF


def lognormal_mu_sigma(mean: float, sd: float) -> tuple[float, float]:
    """Convert a target (mean, sd) into log-scale (mu, sigma) parameters.

    mu = ln(mean^2 / sqrt(sd^2 + mean^2)), sigma = sqrt(ln(1 + sd^2/mean^2));
    the resulting lognormal has exactly the requested first two moments.
    """
    if mean <= 0:
        raise ValueError(f"lognormal mean must be > 0, got {mean!r}")
    if sd < 0:
        raise ValueError(f"lognormal sd must be >= 0, got {sd!r}")
    mu = math.log(mean * mean / math.sqrt(sd * sd + mean * mean))
    sigma = math.sqrt(math.log(1.0 + (sd * sd) / (mean * mean)))
    return mu, sigma


class Distribution:
    """Base class for sampling families. Invalid parameters are rejected at
    construction; ``sample`` never validates."""

    family = "base"

    def sample(self, rng: np.random.Generator):
        raise NotImplementedError

    def sample_n(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(Distribution):
    mean: float

    family = "exponential"

    def __post_init__(self):
        if self.mean <= 0:
            raise ValueError(f"exponential mean must be > 0, got {self.mean!r}")

    def sample(self, rng):
        return rng.exponential(self.mean)

    def sample_n(self, rng, n):
        return rng.exponential(self.mean, size=n)

    def to_json(self):
        return {"family": "exponential", "mean": self.mean}


@dataclass(frozen=True)
class LognormalMeanSd(Distribution):
    """Lognormal parameterised by its own mean and standard deviation.

    With sd = 0 this degenerates to a point mass at ``mean``.
    """

    mean: float
    sd: float

    family = "lognormal"

    def __post_init__(self):
        lognormal_mu_sigma(self.mean, self.sd)  # validates

    @cached_property
    def mu_sigma(self) -> tuple[float, float]:
        return lognormal_mu_sigma(self.mean, self.sd)

    def sample(self, rng):
        mu, sigma = self.mu_sigma
        if sigma == 0.0:
            return self.mean
        return rng.lognormal(mu, sigma)

    def sample_n(self, rng, n):
        mu, sigma = self.mu_sigma
        if sigma == 0.0:
            return np.full(n, self.mean)
        return rng.lognormal(mu, sigma, size=n)

    def to_json(self):
        return {"family": "lognormal", "mean": self.mean, "sd": self.sd}


@dataclass(frozen=True)
class Deterministic(Distribution):
    value: float

    family = "deterministic"

    def sample(self, rng):
        return self.value

    def sample_n(self, rng, n):
        return np.full(n, self.value)

    def to_json(self):
        return {"family": "deterministic", "value": self.value}


@dataclass(frozen=True)
class Discrete(Distribution):
    """Finite pmf over arbitrary labels."""

    labels: tuple
    p: tuple

    family = "discrete"

    def __post_init__(self):
        if len(self.labels) != len(self.p) or not self.labels:
            raise ValueError("discrete labels and p must be non-empty and equal length")
        if any(q < 0 for q in self.p):
            raise ValueError("discrete probabilities must be non-negative")
        total = math.fsum(self.p)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"discrete probabilities must sum to 1, got {total!r}")

    def sample(self, rng):
        return self.labels[rng.choice(len(self.p), p=self.p)]

    def sample_n(self, rng, n):
        idx = rng.choice(len(self.p), size=n, p=self.p)
        return np.asarray(self.labels, dtype=object)[idx]

    def to_json(self):
        return {"family": "discrete", "labels": list(self.labels), "p": list(self.p)}


@dataclass(frozen=True)
class Triangular(Distribution):
    low: float
    mode: float
    high: float

    family = "triangular"

    def __post_init__(self):
        if not (self.low <= self.mode <= self.high):
            raise ValueError(f"triangular requires low <= mode <= high, got {self!r}")

    def sample(self, rng):
        if self.low == self.high:
            return self.low
        return rng.triangular(self.low, self.mode, self.high)

    def sample_n(self, rng, n):
        if self.low == self.high:
            return np.full(n, self.low)
        return rng.triangular(self.low, self.mode, self.high, size=n)

    def to_json(self):
        return {"family": "triangular", "low": self.low, "mode": self.mode, "high": self.high}


@dataclass(frozen=True)
class Uniform(Distribution):
    low: float
    high: float

    family = "uniform"

    def __post_init__(self):
        if self.low > self.high:
            raise ValueError(f"uniform requires low <= high, got {self!r}")

    def sample(self, rng):
        return rng.uniform(self.low, self.high)

    def sample_n(self, rng, n):
        return rng.uniform(self.low, self.high, size=n)

    def to_json(self):
        return {"family": "uniform", "low": self.low, "high": self.high}


_FAMILIES = {
    "exponential": (Exponential, ("mean",)),
    "lognormal": (LognormalMeanSd, ("mean", "sd")),
    "deterministic": (Deterministic, ("value",)),
    "discrete": (Discrete, ("labels", "p")),
    "triangular": (Triangular, ("low", "mode", "high")),
    "uniform": (Uniform, ("low", "high")),
}


def distribution_from_json(doc, path: str = "") -> Distribution:
    """Parse a distribution document; raises :class:`ConfigError` naming ``path``."""
    if not isinstance(doc, Mapping):
        raise ConfigError(path, f"expected a distribution object, got {type(doc).__name__}")
    family = doc.get("family")
    if family not in _FAMILIES:
        known = ", ".join(sorted(_FAMILIES))
        raise ConfigError(f"{path}.family" if path else "family",
                          f"unknown family {family!r}; expected one of: {known}")
    cls, fields = _FAMILIES[family]
    kwargs = {}
    for name in fields:
        if name not in doc:
            raise ConfigError(f"{path}.{name}" if path else name, "missing required parameter")
        value = doc[name]
        if name in ("labels", "p"):
            value = tuple(value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from exc


def spawn_streams(master_seed: int, replication_index: int, n: int) -> list[np.random.Generator]:
    """Spawn ``n`` independent PCG-64 streams for one replication.

    Deterministic: the same ``(master_seed, replication_index, stream_index)``
    triple always yields the same stream state, and distinct triples give
    statistically independent streams.
    """
    if n < 1:
        raise ValueError(f"stream count must be >= 1, got {n!r}")
    if replication_index < 0:
        raise ValueError(f"replication index must be >= 0, got {replication_index!r}")
    seed = int(master_seed) & _UINT64_MASK
    return [
        np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(replication_index, i))))
        for i in range(n)
    ]


def stream_table(names: Sequence[str], master_seed: int, replication_index: int) -> dict[str, np.random.Generator]:
    """Spawn one stream per slot name; slot index = position in ``names``.

    The model's ordered slot table is the audit trail for stream allocation:
    renaming or reordering slots changes sampled values, adding new slots at
    the end does not disturb existing ones.
    """
    streams = spawn_streams(master_seed, replication_index, len(names))
    return dict(zip(names, streams))


def stream_state(rng: np.random.Generator) -> dict:
    """Serializable snapshot of a stream's state (plain ints and strings)."""
    return rng.bit_generator.state


def stream_from_state(state: dict) -> np.random.Generator:
    """Rebuild a stream from :func:`stream_state`; subsequent draws match."""
    bg = np.random.PCG64()
    bg.state = state
    return np.random.Generator(bg)

"""Joint prior specification and parameter-set drawing.

A prior is an ordered list of named, independent marginal distributions.
Entry order is fixed and defines the parameter-dimension order used by
every downstream consumer (simulation tables, scaling, density grids).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np


class Uniform:
    """Continuous uniform on [lo, hi)."""

    kind = "uniform"

    def __init__(self, lo: float, hi: float):
        if not hi > lo:
            raise ValueError(f"uniform requires lo < hi, got ({lo}, {hi})")
        self.lo = float(lo)
        self.hi = float(hi)

    def draw(self, rng) -> float:
        return self.lo + (self.hi - self.lo) * rng.random()

    def density(self, value: float) -> float:
        if self.lo <= value <= self.hi:
            return 1.0 / (self.hi - self.lo)
        return 0.0

    def support(self):
        return self.lo, self.hi

    def __repr__(self):
        return f"uniform({self.lo}, {self.hi})"


class DiscreteUniform:
    """Integer uniform on {lo, lo+1, ..., hi} inclusive."""

    kind = "discrete-uniform"

    def __init__(self, lo: int, hi: int):
        if not hi > lo:
            raise ValueError(f"discrete-uniform requires lo < hi, got ({lo}, {hi})")
        self.lo = int(lo)
        self.hi = int(hi)

    def draw(self, rng) -> float:
        return float(rng.integers(self.lo, self.hi + 1))

    def density(self, value: float) -> float:
        if self.lo <= value <= self.hi and float(value).is_integer():
            return 1.0 / (self.hi - self.lo + 1)
        return 0.0

    def support(self):
        return float(self.lo), float(self.hi)

    def __repr__(self):
        return f"discrete-uniform({self.lo}, {self.hi})"


class ShiftedGeometric:
    """offset + count-of-failures geometric with the given mean excess.

    Support is {offset, offset+1, ...}; success probability is
    p = 1/(mean+1), so the expected value is offset + mean.
    """

    kind = "shifted-geometric"

    def __init__(self, offset: float, mean: float):
        if mean <= 0:
            raise ValueError(f"shifted-geometric requires mean > 0, got {mean}")
        self.offset = int(offset)
        self.mean = float(mean)
        self.p = 1.0 / (self.mean + 1.0)

    def draw(self, rng) -> float:
        # numpy's geometric counts trials (support {1, 2, ...})
        return float(self.offset + rng.geometric(self.p) - 1)

    def density(self, value: float) -> float:
        k = value - self.offset
        if k < 0 or not float(k).is_integer():
            return 0.0
        return self.p * (1.0 - self.p) ** k

    def support(self):
        return float(self.offset), math.inf

    def __repr__(self):
        return f"shifted-geometric({self.offset}, {self.mean})"


_DIST_PATTERN = re.compile(r"^\s*([a-z-]+)\s*\(\s*([^)]*)\s*\)\s*$")


def parse_distribution(text: str):
    """Parse e.g. 'uniform(0, 7)' or 'shifted-geometric(200, 1000)'."""
    m = _DIST_PATTERN.match(text)
    if not m:
        raise ValueError(f"cannot parse distribution: {text!r}")
    name, argtext = m.group(1), m.group(2)
    args = [float(a) for a in argtext.split(",")] if argtext.strip() else []
    if len(args) != 2:
        raise ValueError(f"distribution {name} takes 2 arguments, got {args}")
    if name == "uniform":
        return Uniform(*args)
    if name == "discrete-uniform":
        return DiscreteUniform(*args)
    if name in ("shifted-geometric", "geometric"):
        return ShiftedGeometric(*args)
    raise ValueError(f"unknown distribution: {name!r}")


@dataclass(frozen=True)
class PriorEntry:
    name: str
    dist: object
    pmin: float
    pmax: float

    def __post_init__(self):
        if not self.pmin < self.pmax:
            raise ValueError(
                f"{self.name}: bounds require pmin < pmax, got ({self.pmin}, {self.pmax})"
            )
        lo, hi = self.dist.support()
        if self.dist.kind != "shifted-geometric":
            if lo < self.pmin or hi > self.pmax:
                raise ValueError(
                    f"{self.name}: support [{lo}, {hi}] outside bounds "
                    f"[{self.pmin}, {self.pmax}]"
                )


# Scaling bounds for the unbounded geometric tail default to a few means
# past the offset; the bounds only affect the affine scaling, not the draw.
GEOMETRIC_BOUND_MEANS = 4.0


def _default_bounds(dist) -> tuple[float, float]:
    if dist.kind == "shifted-geometric":
        return float(dist.offset), float(dist.offset + GEOMETRIC_BOUND_MEANS * dist.mean)
    return dist.support()


@dataclass(frozen=True)
class ParameterSet:
    """One joint draw from a PriorSpec, with its joint prior density."""

    values: tuple
    prior_density: float

    def __post_init__(self):
        if not self.prior_density > 0:
            raise ValueError(f"prior_density must be positive, got {self.prior_density}")


class PriorSpec:
    """Ordered collection of independent marginal priors."""

    def __init__(self, entries: list[PriorEntry]):
        if not entries:
            raise ValueError("prior needs at least one entry")
        names = [e.name for e in entries]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names: {names}")
        self.entries = list(entries)

    @classmethod
    def from_pairs(cls, pairs, bounds: dict | None = None) -> "PriorSpec":
        """Build from (name, distribution-or-string) pairs.

        `bounds` optionally overrides the scaling bounds per name.
        """
        bounds = bounds or {}
        entries = []
        for name, dist in pairs:
            if isinstance(dist, str):
                dist = parse_distribution(dist)
            pmin, pmax = bounds.get(name, _default_bounds(dist))
            entries.append(PriorEntry(name, dist, float(pmin), float(pmax)))
        return cls(entries)

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    @property
    def n_params(self) -> int:
        return len(self.entries)

    @property
    def bounds(self) -> list[tuple[float, float]]:
        return [(e.pmin, e.pmax) for e in self.entries]

    def density(self, values) -> float:
        if len(values) != len(self.entries):
            raise ValueError("value count does not match prior dimension")
        out = 1.0
        for entry, v in zip(self.entries, values):
            out *= entry.dist.density(v)
        return out

    def draw(self, rng: np.random.Generator) -> ParameterSet:
        values = tuple(e.dist.draw(rng) for e in self.entries)
        return ParameterSet(values=values, prior_density=self.density(values))

    def __repr__(self):
        inner = ", ".join(f"{e.name}={e.dist!r}" for e in self.entries)
        return f"PriorSpec({inner})"


def draw_parameters(prior: PriorSpec, rng: np.random.Generator) -> ParameterSet:
    """Draw one joint parameter set; each value is drawn independently."""
    return prior.draw(rng)

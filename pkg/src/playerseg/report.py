"""Cluster report: the engine->UI contract.

Per cluster and feature: five summary statistics (type-7 quartiles) and a
64-point Gaussian KDE curve over the globally min-max normalized values.
Normalization is global across all players so violins from different
clusters share one [0, 1] axis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InvalidSpec


@dataclass
class FeatureSummary:
    median: float
    q1: float
    q3: float
    min: float
    max: float

    def as_dict(self) -> dict:
        return {
            "min": self.min,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.max,
        }


@dataclass
class ClusterEntry:
    cluster_id: int
    size: int
    stats: dict[str, FeatureSummary | None]
    density: dict[str, list[tuple[float, float]]]


@dataclass
class ClusterReport:
    features: list[str]
    normalization: dict[str, tuple[float, float]]
    clusters: list[ClusterEntry]

    def to_json_dict(self) -> dict:
        return {
            "features": list(self.features),
            "normalization": {
                f: {"min": lo, "max": hi}
                for f, (lo, hi) in self.normalization.items()
            },
            "clusters": [
                {
                    "id": c.cluster_id,
                    "size": c.size,
                    "stats": {
                        f: (s.as_dict() if s is not None else None)
                        for f, s in c.stats.items()
                    },
                    "density": {
                        f: [[pos, val] for pos, val in curve]
                        for f, curve in c.density.items()
                    },
                }
                for c in self.clusters
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


# JSON schema of the report payload (consumed by the UI and by tests).
REPORT_SCHEMA = {
    "type": "object",
    "required": ["features", "normalization", "clusters"],
    "properties": {
        "features": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "normalization": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["min", "max"],
                "properties": {"min": {"type": "number"}, "max": {"type": "number"}},
            },
        },
        "clusters": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "size", "stats", "density"],
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "size": {"type": "integer", "minimum": 0},
                    "stats": {
                        "type": "object",
                        "additionalProperties": {
                            "oneOf": [
                                {"type": "null"},
                                {
                                    "type": "object",
                                    "required": ["min", "q1", "median", "q3", "max"],
                                    "additionalProperties": {"type": "number"},
                                },
                            ]
                        },
                    },
                    "density": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "array",
                            "items": {
                                "type": "array",
                                "items": {"type": "number"},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                        },
                    },
                },
            },
        },
    },
}


def summarize(values) -> FeatureSummary:
    """Five-number summary with type-7 (linear interpolation) quartiles."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise EmptyInput("cannot summarize an empty list")
    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])
    return FeatureSummary(
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        min=float(v.min()),
        max=float(v.max()),
    )


def kde(
    values,
    grid_points: int = 64,
    bandwidth: str | float = "scott",
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian KDE sampled on a uniform inclusive grid over [0, 1].

    Scott's rule h = std(ddof=1) * n^(-1/5); degenerate samples (std 0 or a
    single value) fall back to h = 0.01.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))  # order-independent sums
    if v.size == 0:
        raise EmptyInput("cannot estimate a density from no values")
    if grid_points < 2:
        raise InvalidSpec("grid_points must be >= 2")
    if bandwidth == "scott":
        sigma = float(v.std(ddof=1)) if v.size > 1 else 0.0
        scale = max(1.0, float(np.abs(v).max()))
        if sigma <= 1e-12 * scale:  # all-equal up to rounding noise
            sigma = 0.0
        h = sigma * v.size ** (-1.0 / 5.0) if sigma > 0 else 0.01
    else:
        h = float(bandwidth)
        if h <= 0:
            raise InvalidSpec("bandwidth must be positive")
    grid = np.linspace(0.0, 1.0, grid_points)
    z = (grid[:, None] - v[None, :]) / h
    dens = np.exp(-0.5 * z**2).sum(axis=1) / (v.size * h * np.sqrt(2.0 * np.pi))
    return grid, dens


def build_report(
    matrix: np.ndarray,
    feature_names: list[str],
    assignments,
    k: int,
    grid_points: int = 64,
) -> ClusterReport:
    """Normalize features globally to [0, 1] and summarize each
    (cluster, feature) slice; empty clusters appear with size 0 and null
    statistics."""
    x = np.asarray(matrix, dtype=np.float64)
    labels = np.asarray(assignments, dtype=np.int64)
    if grid_points < 16:
        raise InvalidSpec("report density curves need at least 16 sample points")
    if x.ndim != 2 or x.shape[1] != len(feature_names):
        raise DimensionMismatch("feature_names must match matrix columns")
    if labels.shape[0] != x.shape[0]:
        raise DimensionMismatch("assignments must match matrix rows")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise InvalidSpec("assignments outside [0, K)")

    lows = x.min(axis=0)
    highs = x.max(axis=0)
    span = highs - lows
    normalized = np.where(span > 0, (x - lows) / np.maximum(span, 1e-300), 0.0)

    normalization = {
        name: (float(lows[j]), float(highs[j]))
        for j, name in enumerate(feature_names)
    }
    clusters: list[ClusterEntry] = []
    for c in range(k):
        members = normalized[labels == c]
        stats: dict[str, FeatureSummary | None] = {}
        density: dict[str, list[tuple[float, float]]] = {}
        for j, name in enumerate(feature_names):
            if members.shape[0] == 0:
                stats[name] = None
                density[name] = []
                continue
            stats[name] = summarize(members[:, j])
            grid, dens = kde(members[:, j], grid_points=grid_points)
            density[name] = [(float(g), float(v)) for g, v in zip(grid, dens)]
        clusters.append(
            ClusterEntry(
                cluster_id=c,
                size=int(members.shape[0]),
                stats=stats,
                density=density,
            )
        )
    return ClusterReport(
        features=list(feature_names), normalization=normalization, clusters=clusters
    )

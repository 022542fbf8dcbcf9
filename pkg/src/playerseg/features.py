"""Attribute scoring: redundancy (mean absolute pairwise correlation),
multicollinearity (VIF), and PCA contribution, combined into the composite
ranking score.

Two score formulas exist: the published-table-consistent default
``(1-corr) + (1-vif) + (1-pca)`` and the prose variant that rewards
correlation instead of penalizing it. The table form is the default because
it reproduces the published Top-10 scores exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateColumn, InvalidSpec
from .dimred import pca_fit

SCORE_FORMULAS = ("table", "prose")


@dataclass
class FeatureScore:
    feature: str
    avg_correlation: float
    vif: float
    pca_contribution: float
    norm_corr: float
    norm_vif: float
    norm_pca: float
    score: float


def average_correlation(matrix: np.ndarray, column: int) -> float:
    """Mean |Pearson r| between `column` and every other column.

    Zero-variance counterpart columns contribute 0; a zero-variance scored
    column raises DegenerateColumn.
    """
    x = np.asarray(matrix, dtype=np.float64)
    n, d = x.shape
    if n < 2 or d < 2:
        raise InvalidSpec("need N >= 2 and d >= 2")
    if not 0 <= column < d:
        raise InvalidSpec(f"column {column} out of range")
    centered = x - x.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    if norms[column] == 0:
        raise DegenerateColumn(column)
    total = 0.0
    for j in range(d):
        if j == column or norms[j] == 0:
            continue
        r = float(centered[:, column] @ centered[:, j]) / (norms[column] * norms[j])
        total += abs(r)
    return total / (d - 1)


def vif(matrix: np.ndarray, column: int) -> float:
    """1/(1-R^2) from regressing `column` on the remaining columns plus an
    intercept; +inf when the fit is numerically perfect."""
    x = np.asarray(matrix, dtype=np.float64)
    n, d = x.shape
    if not 0 <= column < d:
        raise InvalidSpec(f"column {column} out of range")
    y = x[:, column]
    others = np.delete(x, column, axis=1)
    design = np.column_stack([np.ones(n), others])
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0:
        return np.inf
    r2 = 1.0 - ss_res / ss_tot
    if r2 >= 1.0 - 1e-12:
        return np.inf
    return 1.0 / (1.0 - r2)


def pca_contribution(matrix: np.ndarray, column: int) -> float:
    """Explained-variance-weighted squared loading of `column`.

    The matrix is z-scored per column first (zero-variance columns become
    all zeros), so the result lies in [0, 1].
    """
    x = np.asarray(matrix, dtype=np.float64)
    n, d = x.shape
    if not 0 <= column < d:
        raise InvalidSpec(f"column {column} out of range")
    std = x.std(axis=0)
    z = np.where(std > 0, (x - x.mean(axis=0)) / np.maximum(std, 1e-300), 0.0)
    rank = np.linalg.matrix_rank(z - z.mean(axis=0)) if n > 1 else 0
    if rank == 0:
        return 0.0
    model = pca_fit(z, min(rank, min(n - 1, d)))
    loadings = model.components[:, column]
    return float((model.explained_variance_ratio * loadings**2).sum())


def min_max_normalize(values) -> np.ndarray:
    """(v - min)/(max - min) with +inf clamped to the finite batch max.

    Batches whose finite spread is pure rounding noise count as degenerate
    and map to zeros (+inf entries still map to 1), keeping scores invariant
    under per-column rescaling of the input matrix.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise InvalidSpec("empty batch")
    if np.isnan(v).any() or np.isneginf(v).any():
        raise InvalidSpec("batch values must be real or +inf")
    was_inf = np.isposinf(v)
    finite = v[~was_inf]
    if finite.size == 0:
        return np.zeros_like(v)
    clamped = np.minimum(v, finite.max())
    lo, hi = clamped.min(), clamped.max()
    if hi - lo <= 1e-12 * max(1.0, abs(hi), abs(lo)):
        out = np.zeros_like(v)
        out[was_inf] = 1.0
        return out
    return (clamped - lo) / (hi - lo)


def composite_score(
    norm_pca: float, norm_vif: float, norm_corr: float, formula: str = "table"
) -> float:
    """Composite ranking score from the three normalized metrics."""
    if formula == "table":
        return float((1.0 - norm_corr) + (1.0 - norm_vif) + (1.0 - norm_pca))
    if formula == "prose":
        return float(norm_corr + (1.0 - norm_vif) + (1.0 - norm_pca))
    raise InvalidSpec(f"unknown formula {formula!r}")


def rank_features(
    matrix: np.ndarray, names: list[str], formula: str = "table"
) -> list[FeatureScore]:
    """Score every column and sort descending by composite score (ties by
    name ascending)."""
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 2:
        raise InvalidSpec("need at least two columns")
    if len(names) != x.shape[1]:
        raise InvalidSpec("names must match the column count")
    d = x.shape[1]
    corrs = np.array([average_correlation(x, j) for j in range(d)])
    vifs = np.array([vif(x, j) for j in range(d)])
    pcas = np.array([pca_contribution(x, j) for j in range(d)])
    n_corr = min_max_normalize(corrs)
    n_vif = min_max_normalize(vifs)
    n_pca = min_max_normalize(pcas)
    scores = [
        FeatureScore(
            feature=names[j],
            avg_correlation=float(corrs[j]),
            vif=float(vifs[j]),
            pca_contribution=float(pcas[j]),
            norm_corr=float(n_corr[j]),
            norm_vif=float(n_vif[j]),
            norm_pca=float(n_pca[j]),
            score=composite_score(n_pca[j], n_vif[j], n_corr[j], formula),
        )
        for j in range(d)
    ]
    return sorted(scores, key=lambda s: (-s.score, s.feature))

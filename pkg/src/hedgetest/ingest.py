"""Expression-matrix ingestion for sequential gene screening.

Pipeline: natural log (optional for data already on log scale), per-gene
standardization against the normal-group mean and standard deviation, then
the standard normal CDF.  A gene that is standard normal under the null
comes out Uniform(0, 1) with mean 1/2, which is what the bounded-outcome
betting process expects.  Two tumor samples per gene are held out to pick a
betting fraction and never appear in the test sequence.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import norm

#: Candidate betting fractions for the per-gene plug-in.
LAMBDA_GRID = tuple(round(0.1 * k, 10) for k in range(1, 11))


class ZeroVarianceError(ValueError):
    """A gene with no variation in the normal group cannot be standardized."""


@dataclass(frozen=True)
class ExpressionMatrix:
    """Genes by samples, with each column labeled by its group."""

    gene_ids: tuple[str, ...]
    values: np.ndarray               # shape (genes, samples)
    groups: tuple[str, ...]          # per-column label

    def __post_init__(self):
        m, n = self.values.shape
        if len(self.gene_ids) != m:
            raise ValueError("one id per gene row required")
        if len(self.groups) != n:
            raise ValueError("one group label per sample column required")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("expression matrix contains missing or non-finite values")
        if len(set(self.groups)) != 2:
            raise ValueError(
                f"sample labels must partition into two groups, got {sorted(set(self.groups))}")

    def column_mask(self, label: str) -> np.ndarray:
        return np.array([g == label for g in self.groups])


@dataclass(frozen=True)
class UniformMatrix:
    """Transformed matrix with per-gene sequences in [0, 1]."""

    gene_ids: tuple[str, ...]
    values: np.ndarray
    groups: tuple[str, ...]
    skipped_gene_ids: tuple[str, ...]


def load_expression_matrix(path, normal_label: str = "normal",
                           tumor_label: str = "tumor") -> ExpressionMatrix:
    """Read a delimited text matrix: header of group labels, one gene per row.

    The first column holds gene ids; the delimiter is sniffed from the
    header (comma or tab).
    """
    with open(path, newline="") as fh:
        first = fh.readline()
        delimiter = "\t" if first.count("\t") >= first.count(",") else ","
        fh.seek(0)
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader)
        groups = tuple(h.strip() for h in header[1:])
        gene_ids, rows = [], []
        for row in reader:
            if not row:
                continue
            gene_ids.append(row[0].strip())
            rows.append([float(v) for v in row[1:]])
    labels = set(groups)
    if labels != {normal_label, tumor_label}:
        raise ValueError(
            f"expected groups {{{normal_label!r}, {tumor_label!r}}}, found {sorted(labels)}")
    return ExpressionMatrix(tuple(gene_ids), np.asarray(rows, dtype=float), groups)


def transform_to_uniform(matrix: ExpressionMatrix, *, normal_label: str = "normal",
                         log_transform: bool = True) -> UniformMatrix:
    """Map each gene's samples to [0, 1] via normal-group standardization and Phi.

    Genes with zero variance in the normal group are flagged and skipped.
    Pass log_transform=False for data already on a log scale.
    """
    values = matrix.values
    if log_transform:
        if np.any(values <= 0.0):
            raise ValueError("log transform requires strictly positive expression values")
        values = np.log(values)
    normal = matrix.column_mask(normal_label)
    if not normal.any():
        raise ValueError(f"no columns labeled {normal_label!r}")
    mu = values[:, normal].mean(axis=1)
    sd = values[:, normal].std(axis=1, ddof=1)
    keep = sd > 0.0
    z = (values[keep] - mu[keep, None]) / sd[keep, None]
    uniform = norm.cdf(z)
    kept_ids = tuple(g for g, k in zip(matrix.gene_ids, keep) if k)
    skipped = tuple(g for g, k in zip(matrix.gene_ids, keep) if not k)
    if not kept_ids:
        raise ZeroVarianceError("every gene has zero variance in the normal group")
    return UniformMatrix(kept_ids, uniform, matrix.groups, skipped)


def standardize_gene(values: Sequence[float], normal_values: Sequence[float]) -> np.ndarray:
    """Uniform transform of one gene; raises on a constant normal group."""
    ref = np.asarray(normal_values, dtype=float)
    sd = ref.std(ddof=1)
    if sd == 0.0:
        raise ZeroVarianceError("constant normal-group values")
    return norm.cdf((np.asarray(values, dtype=float) - ref.mean()) / sd)


def estimate_lambda(held_out: Sequence[float],
                    grid: Sequence[float] = LAMBDA_GRID) -> float:
    """Betting fraction from two held-out transformed tumor samples.

    Plug-in 4 * |mean(held_out) - 1/2| snapped to the nearest grid point:
    deterministic and monotone in the evidence of deviation from the null
    mean; a dead-center pair maps to the smallest candidate fraction.
    """
    pair = np.asarray(held_out, dtype=float)
    if pair.shape != (2,):
        raise ValueError(f"exactly two held-out values required, got shape {pair.shape}")
    grid_arr = np.asarray(grid, dtype=float)
    raw = 2.0 * abs(pair.mean() - 0.5) * 2.0
    return float(grid_arr[np.argmin(np.abs(grid_arr - raw))])


@dataclass(frozen=True)
class ScreeningInput:
    """Per-gene test sequences and betting fractions ready for the harness."""

    gene_ids: tuple[str, ...]
    sequences: np.ndarray            # shape (genes, test samples)
    lambdas: np.ndarray              # shape (genes,)
    held_out_columns: tuple[int, ...]


def prepare_screening(uniform: UniformMatrix, *, tumor_label: str = "tumor",
                      n_held_out: int = 2,
                      grid: Sequence[float] = LAMBDA_GRID) -> ScreeningInput:
    """Split off the held-out tumor columns and fix each gene's fraction.

    The first n_held_out tumor columns (in file order) are used for the
    fraction plug-in and discarded from the test sequences; the remaining
    columns keep their original order.
    """
    tumor_cols = [i for i, g in enumerate(uniform.groups) if g == tumor_label]
    if len(tumor_cols) < n_held_out:
        raise ValueError(
            f"need at least {n_held_out} tumor samples, found {len(tumor_cols)}")
    held = tuple(tumor_cols[:n_held_out])
    test_cols = [i for i in range(uniform.values.shape[1]) if i not in held]
    lambdas = np.array([estimate_lambda(uniform.values[g, list(held)], grid)
                        for g in range(uniform.values.shape[0])])
    return ScreeningInput(uniform.gene_ids, uniform.values[:, test_cols],
                          lambdas, held)

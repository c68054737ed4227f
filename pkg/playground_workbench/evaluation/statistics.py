"""
Significance Testing

Two-tailed Welch t-test with Welch-Satterthwaite degrees of freedom; the
Student-t tail comes from scipy.stats.
"""

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from ..core.errors import UndefinedTestError

logger = logging.getLogger(__name__)

ALPHA = 0.05


@dataclass(frozen=True)
class WelchResult:
    t_statistic: float
    p_value: float
    dof: float
    significant: bool


def welch_test(sample_a: Sequence[float], sample_b: Sequence[float], alpha: float = ALPHA) -> WelchResult:
    """
    Welch's unequal-variance t-test.

    Raises:
        UndefinedTestError: A sample has fewer than 2 values or zero variance
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise UndefinedTestError(f"Welch test needs two samples of size >= 2, got {a.size} and {b.size}")
    var_a, var_b = a.var(ddof=1), b.var(ddof=1)
    if var_a == 0.0 or var_b == 0.0:
        raise UndefinedTestError("Welch test is undefined for a sample with zero variance")

    se_a, se_b = var_a / a.size, var_b / b.size
    t = (a.mean() - b.mean()) / np.sqrt(se_a + se_b)
    dof = (se_a + se_b) ** 2 / (se_a ** 2 / (a.size - 1) + se_b ** 2 / (b.size - 1))
    p = float(min(1.0, 2.0 * stats.t.sf(abs(t), dof)))
    return WelchResult(t_statistic=float(t), p_value=p, dof=float(dof), significant=p < alpha)


def compare_architectures(samples_by_variant: Mapping[str, Sequence[float]],
                          reference: str = "ma", alpha: float = ALPHA) -> pd.DataFrame:
    """Welch test of every variant's per-seed scores against the reference variant."""
    if reference not in samples_by_variant:
        raise UndefinedTestError(f"no samples for the reference variant '{reference}'")
    base = samples_by_variant[reference]
    rows = []
    for variant, sample in samples_by_variant.items():
        row = {"variant": variant, "mean": float(np.mean(sample)), "std": float(np.std(sample)),
               "t_statistic": None, "p_value": None, "significant": None}
        if variant != reference:
            try:
                result = welch_test(base, sample, alpha)
                row.update(t_statistic=result.t_statistic, p_value=result.p_value,
                           significant=result.significant)
            except UndefinedTestError as e:
                logger.warning(f"{reference} vs {variant}: {e}")
        rows.append(row)
    return pd.DataFrame(rows)

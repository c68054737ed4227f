"""
Evaluation Reports

Per-goal metric records (success rate or F1) held in a pandas DataFrame, with
split and generalization-type breakdowns.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional

import pandas as pd

from ..core.errors import MissingCoverageError
from ..language.grammar import GENERALIZATION_NAMES

logger = logging.getLogger(__name__)

RECORD_COLUMNS = ["goal", "split", "gen_type", "metric", "value", "n_samples"]
EXTRAPOLATION_TYPE = 2


@dataclass
class EvalReport:
    """Per-goal records {goal, split, gen_type, metric, value, n_samples}."""

    records: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=RECORD_COLUMNS))

    @classmethod
    def from_records(cls, records: Iterable[Mapping[str, Any]]) -> "EvalReport":
        frame = pd.DataFrame(list(records), columns=RECORD_COLUMNS)
        return cls(frame)

    def __len__(self) -> int:
        return len(self.records)

    def metric(self, name: str) -> "EvalReport":
        return EvalReport(self.records[self.records["metric"] == name].reset_index(drop=True))

    def mean(self, split: Optional[str] = None) -> float:
        frame = self.records if split is None else self.records[self.records["split"] == split]
        return float(frame["value"].mean()) if len(frame) else 0.0

    def summary(self) -> pd.DataFrame:
        """Mean, standard deviation and goal count per metric and split."""
        grouped = self.records.groupby(["metric", "split"])["value"]
        return grouped.agg(["mean", "std", "count"]).reset_index()

    def to_records(self) -> List[Dict[str, Any]]:
        frame = self.records.astype(object).where(self.records.notna(), None)
        return frame.to_dict(orient="records")

    def merged(self, other: "EvalReport") -> "EvalReport":
        return EvalReport(pd.concat([self.records, other.records], ignore_index=True))


def per_type_report(report: EvalReport) -> pd.DataFrame:
    """
    Mean and standard deviation of the test-goal records per generalization type.

    Type 2 (attribute extrapolation) is flagged: colour generalization to new
    objects is expected to fail.

    Raises:
        MissingCoverageError: Some of the five types have no record
    """
    test = report.records[report.records["split"] == "test"].dropna(subset=["gen_type"])
    present = set(int(t) for t in test["gen_type"])
    missing = sorted(set(GENERALIZATION_NAMES) - present)
    if missing:
        raise MissingCoverageError(f"report has no test goal of generalization type(s) {missing}")

    rows = []
    for gen_type, name in sorted(GENERALIZATION_NAMES.items()):
        values = test.loc[test["gen_type"].astype(int) == gen_type, "value"].astype(float)
        rows.append({
            "gen_type": gen_type,
            "name": name,
            "count": int(len(values)),
            "mean": float(values.mean()),
            "std": float(values.std(ddof=0)),
            "note": "extrapolation" if gen_type == EXTRAPOLATION_TYPE else "",
        })
    table = pd.DataFrame(rows)
    logger.debug(f"Per-type report over {len(test)} test records")
    return table

"""
Core utilities and report export for the Playground Workbench
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping

import numpy as np
import pandas as pd

from .. import __version__

logger = logging.getLogger(__name__)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    return str(value)


def export_to_json(data: Dict[str, Any], filename: str) -> None:
    """Export data to JSON file with proper formatting."""
    try:
        with open(filename, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2, default=_json_default, ensure_ascii=False)
    except OSError as e:
        logger.error(f"Failed to export to {filename}: {e}")
        raise


def write_records(records: Iterable[Mapping[str, Any]], filename: str) -> int:
    """
    Write line-delimited JSON records.

    Keys are sorted and no timestamp is added, so identical runs produce
    byte-identical files.
    """
    count = 0
    with open(filename, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True, default=_json_default))
            f.write('\n')
            count += 1
    logger.debug(f"Wrote {count} records to {filename}")
    return count


def read_records(filename: str) -> List[Dict[str, Any]]:
    """Read line-delimited JSON records."""
    with open(filename, 'r', encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]


class WorkbenchReport:
    """Named result sections exported as one JSON document."""

    def __init__(self, command: str, out_dir: str):
        self.command = command
        self.out_dir = Path(out_dir)
        self.data: Dict[str, Any] = {}

    def add_section(self, section_name: str, section_data: Any) -> None:
        """Add a section to the report; DataFrames are stored as records."""
        if isinstance(section_data, pd.DataFrame):
            section_data = section_data.to_dict(orient='records')
        self.data[section_name] = section_data

    def export(self, base_filename: str = None) -> str:
        """Export report to a JSON file inside the output directory."""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        filename = self.out_dir / f"{base_filename or self.command}_report.json"

        report = {
            'metadata': {
                'command': self.command,
                'code_version': __version__,
                'report_type': base_filename or self.command
            },
            'data': self.data
        }

        export_to_json(report, str(filename))
        logger.info(f"Report exported: {filename}")
        return str(filename)

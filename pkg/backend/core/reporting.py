"""
Reporting
CSV emission of sweep aggregates and line-delimited run/trace records
"""

import io
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, TextIO, Union

import pandas as pd

from models.learning import TraceRecord
from models.metrics import AggregateMetrics, RunMetrics

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "axis_value",
    "algorithm",
    "mean_requested_bits",
    "std_requested_bits",
    "mean_slack_bps",
    "iterations_mean",
    "oca_match_fraction",
]


def aggregates_frame(rows: Sequence[AggregateMetrics]) -> pd.DataFrame:
    records = [{
        "axis_value": row.axis_value,
        "algorithm": row.algorithm.value,
        "mean_requested_bits": row.mean_requested_bits,
        "std_requested_bits": row.std_requested_bits,
        "mean_slack_bps": row.mean_slack_bps,
        "iterations_mean": row.iterations_mean,
        "oca_match_fraction": row.oca_match_fraction,
    } for row in rows]
    return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)


def write_csv(rows: Sequence[AggregateMetrics], out: Union[str, Path, TextIO],
              master_seed: Optional[int] = None, deterministic: bool = False) -> None:
    """
    Header comments (timestamp unless deterministic, master seed) followed
    by one row per (axis value, algorithm). Identical inputs give identical
    bytes when `deterministic` is set.
    """
    buffer = io.StringIO()
    if not deterministic:
        buffer.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
    if master_seed is not None:
        buffer.write(f"# master_seed={master_seed}\n")
    aggregates_frame(rows).to_csv(buffer, index=False, float_format="%.10g", lineterminator="\n")

    if isinstance(out, (str, Path)):
        Path(out).write_text(buffer.getvalue())
        logger.info("Wrote %d CSV rows to %s", len(rows), out)
    else:
        out.write(buffer.getvalue())


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def _write_lines(records: List[dict], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if not records:
        path.write_text("")
        return
    pd.DataFrame.from_records(records).to_json(path, orient="records", lines=True)


def write_trace(records: Iterable[TraceRecord], path: Union[str, Path]) -> None:
    """One JSON object per line: t, player, action, observed_u, p"""
    _write_lines([r.to_dict() for r in records], Path(path))


def write_runs(runs: Iterable[RunMetrics], path: Union[str, Path]) -> None:
    """Per-run metrics, one JSON object per line, to recompute the CSV aggregates"""
    _write_lines([r.to_dict() for r in runs], Path(path))


def read_lines(path: Union[str, Path]) -> pd.DataFrame:
    path = Path(path)
    if path.stat().st_size == 0:
        return pd.DataFrame()
    return pd.read_json(path, orient="records", lines=True)

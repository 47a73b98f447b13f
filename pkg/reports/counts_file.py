"""
Counts CSV ingestion.

Format: header "category,count", one row per category. Categories are 1-based
indices, or generator labels when the generator is labelled. Missing categories
count 0; repeated rows are summed.
"""
from pathlib import Path
from typing import Optional, Sequence, Union

import pandas as pd
from loguru import logger

from numerics import ValidationError
from posterior import CountVector

REQUIRED_COLUMNS = ['category', 'count']


class CountsFileError(ValidationError):
    """Counts file could not be read or does not fit the generator"""
    pass


def _resolve_category(value: str, dim: int, labels: Optional[Sequence[str]]) -> int:
    if labels:
        lookup = {label: i for i, label in enumerate(labels)}
        if value in lookup:
            return lookup[value]
    if value.isdigit():
        index = int(value)
        if 1 <= index <= dim:
            return index - 1
        raise CountsFileError(f"category {index} outside 1..{dim}")
    raise CountsFileError(f"unknown category {value!r}")


def counts_from_frame(frame: pd.DataFrame, dim: int,
                      labels: Optional[Sequence[str]] = None) -> CountVector:
    """Build a CountVector from a category/count table"""
    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise CountsFileError(f"counts file missing column(s): {', '.join(missing)}")

    counts = [0] * dim
    for category, count in zip(frame['category'], frame['count']):
        if pd.isna(category) or pd.isna(count):
            raise CountsFileError("counts file has an empty cell")
        try:
            value = float(count)
        except (TypeError, ValueError):
            raise CountsFileError(f"count {count!r} is not a number")
        if value < 0 or value != int(value):
            raise CountsFileError(f"count {count!r} must be a nonnegative integer")
        counts[_resolve_category(str(category).strip(), dim, labels)] += int(value)
    return CountVector.of(counts)


def read_counts(path: Union[str, Path], dim: int,
                labels: Optional[Sequence[str]] = None) -> CountVector:
    """
    Read a counts CSV

    Args:
        path: CSV file with header "category,count"
        dim: Generator dimension d
        labels: Generator labels, if any

    Returns:
        CountVector of length d
    """
    try:
        frame = pd.read_csv(path, dtype={'category': str})
    except FileNotFoundError:
        raise CountsFileError(f"counts file not found: {path}")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise CountsFileError(f"cannot parse counts file {path}: {e}")
    frame.columns = [str(c).strip() for c in frame.columns]
    counts = counts_from_frame(frame, dim, labels)
    logger.info(f"Counts loaded from {path}: n={counts.n} over {dim} categories")
    return counts


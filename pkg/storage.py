"""Instance/result JSON files and the benchmark CSV report."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from costmodel import connectivity_table
from domains import INFINITY
from errors import InvalidInputError
from lattice import MAX_RELATIONS, from_members, members, rank_order
from models import MISSING, DpResult, QueryInstance, SetFunction

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

REPORT_COLUMNS = ['n', 'rep', 'algorithm', 'cost_value', 'elapsed_ns', 'splits_enumerated', 'ring_multiplications']


def _read_json(path: PathLike) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise InvalidInputError(f"file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"{path} is not valid JSON: {e}") from None


def _write_json(document: Any, path: PathLike):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(document, handle, indent=2)
        handle.write('\n')


def _relation_index(item, names: List[str], n: int) -> int:
    if isinstance(item, str):
        if item not in names:
            raise InvalidInputError(f"unknown relation '{item}'")
        return names.index(item)
    if isinstance(item, bool) or not isinstance(item, int) or not 0 <= item < n:
        raise InvalidInputError(f"relation index {item!r} outside [0, {n})")
    return item


def instance_from_dict(document: Dict[str, Any]) -> QueryInstance:
    """📥 Build and validate an instance from its JSON document"""
    if not isinstance(document, dict):
        raise InvalidInputError("instance document must be a JSON object")
    for key in ('n', 'relations', 'edges', 'cardinalities'):
        if key not in document:
            raise InvalidInputError(f"instance is missing '{key}'")

    n = document['n']
    if not isinstance(n, int) or not 1 <= n <= MAX_RELATIONS:
        raise InvalidInputError(f"n={n!r} outside [1, {MAX_RELATIONS}]")
    names = [str(name) for name in document['relations']]
    if len(names) != n:
        raise InvalidInputError(f"expected {n} relation names, got {len(names)}")

    edges = []
    for edge in document['edges']:
        if not isinstance(edge, (list, tuple)) or len(edge) != 2:
            raise InvalidInputError(f"edge {edge!r} must be a pair")
        edges.append(tuple(_relation_index(x, names, n) for x in edge))

    values = np.full(1 << n, MISSING, dtype=np.int64)
    values[0] = 0
    seen = set()
    for entry in document['cardinalities']:
        try:
            relations, value = entry['set'], entry['value']
        except (TypeError, KeyError):
            raise InvalidInputError(f"cardinality entry {entry!r} needs 'set' and 'value'") from None
        s = from_members(_relation_index(x, names, n) for x in relations)
        if s == 0:
            raise InvalidInputError("cardinality of the empty set cannot be given")
        if s in seen:
            raise InvalidInputError(f"duplicated cardinality for {members(s)}")
        if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < INFINITY:
            raise InvalidInputError(f"cardinality of {members(s)} must be a non-negative integer, got {value!r}")
        seen.add(s)
        values[s] = value

    q = QueryInstance(n, names, edges, SetFunction(n, values),
                      cross_products=bool(document.get('cross_products', True)))

    required = np.ones(1 << n, dtype=bool) if q.cross_products else connectivity_table(q)
    required[0] = False
    absent = np.flatnonzero(required & (values == MISSING))
    if len(absent):
        sample = ', '.join(str(members(int(s))) for s in absent[:5])
        raise InvalidInputError(f"{len(absent)} required cardinalities are missing, e.g. {sample}")
    return q


def instance_to_dict(q: QueryInstance) -> Dict[str, Any]:
    order, _ = rank_order(q.n)
    values = q.cardinality.values
    return {
        'n': q.n,
        'relations': list(q.names),
        'edges': [list(edge) for edge in q.edges],
        'cross_products': q.cross_products,
        'cardinalities': [
            {'set': members(int(s)), 'value': int(values[s])}
            for s in order.tolist() if s and values[s] != MISSING
        ],
    }


def load_instance(path: PathLike) -> QueryInstance:
    """📂 Read an instance file"""
    q = instance_from_dict(_read_json(path))
    logger.info(f"📂 Loaded {path}: {q.describe()}")
    return q


def save_instance(q: QueryInstance, path: PathLike):
    """💾 Write an instance file"""
    _write_json(instance_to_dict(q), path)
    logger.info(f"💾 Instance saved: {path}")


def save_result(result: DpResult, names: Optional[List[str]], path: PathLike):
    _write_json(result.to_dict(names), path)
    logger.info(f"💾 Result saved: {path}")


def load_result(path: PathLike) -> Dict[str, Any]:
    document = _read_json(path)
    missing = {'algorithm', 'cost', 'join_tree', 'elapsed_ns', 'stats'} - set(document)
    if missing:
        raise InvalidInputError(f"result file lacks {', '.join(sorted(missing))}")
    return document


def empty_report() -> pd.DataFrame:
    return pd.DataFrame({column: pd.Series(dtype=object if column in ('algorithm', 'cost_value') else 'int64')
                         for column in REPORT_COLUMNS})


def write_report(report: pd.DataFrame, path: PathLike):
    """📊 CSV with the fixed column order"""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    report.reindex(columns=REPORT_COLUMNS).to_csv(path, index=False)
    logger.info(f"📊 Report written: {path} ({len(report)} rows)")


def read_report(path: PathLike) -> pd.DataFrame:
    try:
        report = pd.read_csv(path)
    except FileNotFoundError:
        raise InvalidInputError(f"file not found: {path}") from None
    if list(report.columns) != REPORT_COLUMNS:
        raise InvalidInputError(f"{path} does not have the benchmark columns {REPORT_COLUMNS}")
    return report

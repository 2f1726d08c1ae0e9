from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import networkx as nx
import numpy as np

from config import config
from domains import INFINITY
from errors import ConsistencyError, InvalidInputError
from lattice import MAX_RELATIONS, full_set, members, popcount_table

# marker for cardinalities absent from a loaded instance
MISSING = -1


class CostFunction(str, Enum):
    """💰 Cost function"""
    OUT = "out"
    MAX = "max"
    SMJ = "smj"


class Algorithm(str, Enum):
    """🧠 Optimizer variants exposed by the CLI"""
    DPSUB_OUT = "dpsub-out"
    DPSUB_MAX = "dpsub-max"
    DPSUB_SMJ = "dpsub-smj"
    DPCONV_MAX = "dpconv-max"
    DPCONV_OUT = "dpconv-out"
    CCAP_NAIVE = "ccap-naive"
    CCAP_FAST = "ccap-fast"

    @property
    def cost(self) -> CostFunction:
        if self in (Algorithm.DPSUB_MAX, Algorithm.DPCONV_MAX):
            return CostFunction.MAX
        if self is Algorithm.DPSUB_SMJ:
            return CostFunction.SMJ
        return CostFunction.OUT

    @property
    def oracle(self) -> Optional['Algorithm']:
        """The naive algorithm whose value this one must reproduce"""
        return {
            Algorithm.DPCONV_MAX: Algorithm.DPSUB_MAX,
            Algorithm.DPCONV_OUT: Algorithm.DPSUB_OUT,
            Algorithm.CCAP_FAST: Algorithm.CCAP_NAIVE,
        }.get(self)

    @classmethod
    def parse(cls, name: str) -> 'Algorithm':
        try:
            return cls(name.strip())
        except ValueError:
            raise InvalidInputError(f"unknown algorithm '{name}', expected one of "
                                    f"{', '.join(a.value for a in cls)}") from None


@dataclass(eq=False)
class SetFunction:
    """📐 Dense table of 2^n values indexed by relation-set mask"""
    n: int
    values: np.ndarray

    def __post_init__(self):
        if not 0 <= self.n <= MAX_RELATIONS:
            raise InvalidInputError(f"n={self.n} outside [0, {MAX_RELATIONS}]")
        self.values = np.asarray(self.values)
        if self.values.shape != (1 << self.n,):
            raise InvalidInputError(f"set function over n={self.n} needs {1 << self.n} values, "
                                    f"got shape {self.values.shape}")

    @classmethod
    def zeros(cls, n: int, dtype=np.int64) -> 'SetFunction':
        return cls(n, np.zeros(1 << n, dtype=dtype))

    @classmethod
    def full(cls, n: int, value, dtype=np.int64) -> 'SetFunction':
        return cls(n, np.full(1 << n, value, dtype=dtype))

    @classmethod
    def from_list(cls, values: List[Any], dtype=None) -> 'SetFunction':
        size = len(values)
        n = size.bit_length() - 1
        if size == 0 or 1 << n != size:
            raise InvalidInputError(f"set function length {size} is not a power of two")
        if dtype is None:
            dtype = np.int64 if all(isinstance(v, (int, np.integer)) for v in values) else object
        array = np.empty(size, dtype=dtype)
        array[:] = values
        return cls(n, array)

    def __getitem__(self, s):
        return self.values[s]

    def __len__(self) -> int:
        return len(self.values)

    def copy(self) -> 'SetFunction':
        return SetFunction(self.n, self.values.copy())

    def tolist(self) -> List[Any]:
        return self.values.tolist()


@dataclass(frozen=True)
class JoinTree:
    """🌳 Binary join tree; a leaf carries a relation index"""
    relation: Optional[int] = None
    left: Optional['JoinTree'] = None
    right: Optional['JoinTree'] = None

    @classmethod
    def leaf(cls, relation: int) -> 'JoinTree':
        return cls(relation=int(relation))

    @classmethod
    def join(cls, left: 'JoinTree', right: 'JoinTree') -> 'JoinTree':
        if left.relations & right.relations:
            raise ValueError("join subtrees must span disjoint relation sets")
        return cls(left=left, right=right)

    @property
    def is_leaf(self) -> bool:
        return self.relation is not None

    @property
    def relations(self) -> int:
        """Mask of the relations spanned"""
        if self.is_leaf:
            return 1 << self.relation
        return self.left.relations | self.right.relations

    def inner_nodes(self) -> Iterator['JoinTree']:
        if self.is_leaf:
            return
        yield self
        yield from self.left.inner_nodes()
        yield from self.right.inner_nodes()

    def leaves(self) -> List[int]:
        if self.is_leaf:
            return [self.relation]
        return self.left.leaves() + self.right.leaves()

    def to_nested(self, names: Optional[List[str]] = None) -> Union[str, int, list]:
        """🪆 Nested arrays of relation names (indices without names)"""
        if self.is_leaf:
            return names[self.relation] if names else self.relation
        return [self.left.to_nested(names), self.right.to_nested(names)]

    @classmethod
    def parse(cls, nested, names: Optional[List[str]] = None) -> 'JoinTree':
        if isinstance(nested, (list, tuple)):
            if len(nested) != 2:
                raise InvalidInputError(f"join node must have two children, got {nested!r}")
            return cls.join(cls.parse(nested[0], names), cls.parse(nested[1], names))
        if isinstance(nested, str):
            if not names or nested not in names:
                raise InvalidInputError(f"unknown relation '{nested}'")
            return cls.leaf(names.index(nested))
        return cls.leaf(int(nested))

    def render(self, names: Optional[List[str]] = None) -> str:
        if self.is_leaf:
            return names[self.relation] if names else f"R{self.relation}"
        return f"({self.left.render(names)} ⋈ {self.right.render(names)})"


@dataclass(eq=False)
class QueryInstance:
    """🗂️ Query graph plus its cardinality function"""
    n: int
    names: List[str]
    edges: List[Tuple[int, int]]
    cardinality: SetFunction
    cross_products: bool = True

    def __post_init__(self):
        if not 1 <= self.n <= min(MAX_RELATIONS, config.MAX_RELATIONS):
            raise InvalidInputError(f"n={self.n} outside [1, {min(MAX_RELATIONS, config.MAX_RELATIONS)}]")
        if len(self.names) != self.n:
            raise InvalidInputError(f"expected {self.n} relation names, got {len(self.names)}")
        if len(set(self.names)) != self.n:
            raise InvalidInputError("relation names must be unique")
        normalized = set()
        for edge in self.edges:
            a, b = (int(x) for x in edge)
            if not (0 <= a < self.n and 0 <= b < self.n) or a == b:
                raise InvalidInputError(f"invalid edge {edge!r}")
            normalized.add((min(a, b), max(a, b)))
        self.edges = sorted(normalized)
        if self.cardinality.n != self.n:
            raise InvalidInputError(f"cardinality table covers n={self.cardinality.n}, instance has n={self.n}")
        values = self.cardinality.values.astype(np.int64)
        if np.any(values < MISSING):
            raise InvalidInputError("cardinalities must be non-negative")
        for i in range(self.n):
            if values[1 << i] == MISSING:
                raise InvalidInputError(f"base cardinality of relation {self.names[i]} is missing")
        self.cardinality = SetFunction(self.n, values)
        if self.max_cardinality * max(self.n, 1) >= INFINITY:
            raise InvalidInputError(f"W·n = {self.max_cardinality * self.n} reaches the INFINITY sentinel")

    @property
    def full(self) -> int:
        return full_set(self.n)

    @cached_property
    def max_cardinality(self) -> int:
        """W: largest cardinality over sets of at least two relations"""
        values = self.cardinality.values
        mask = (popcount_table(self.n) >= 2) & (values != MISSING)
        return int(values[mask].max()) if np.any(mask) else 0

    @cached_property
    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def c(self, s: int) -> int:
        """📏 Cardinality of a set; reading an absent entry is a bug in the caller"""
        value = int(self.cardinality.values[s])
        if value == MISSING:
            raise ConsistencyError(f"cardinality of {members(s)} read but not present")
        return value

    def base_size(self, relation: int) -> int:
        return int(self.cardinality.values[1 << relation])

    def describe(self) -> str:
        kind = "cross products" if self.cross_products else "connected only"
        return f"n={self.n}, edges={len(self.edges)}, W={self.max_cardinality}, {kind}"


@dataclass
class OptimizerStats:
    """📈 Per-run counters"""
    splits: int = 0
    mults: int = 0
    probes: int = 0
    layer_ns: List[int] = field(default_factory=list)
    elapsed_ns: int = 0

    def merge(self, other: 'OptimizerStats'):
        self.splits += other.splits
        self.mults += other.mults
        self.probes += other.probes
        self.layer_ns.extend(other.layer_ns)

    def to_dict(self) -> Dict[str, int]:
        return {'splits': self.splits, 'mults': self.mults}


@dataclass(eq=False)
class DpResult:
    """🏁 Outcome of one optimization.

    dp_table holds the final DP value per subset. dpconv-max is the exception:
    its table holds the {0, 1} feasibility flags of the last feasible probe,
    1 where the set can be built with no intermediate above gamma.
    """
    algorithm: str
    cost: CostFunction
    optimal_value: Union[int, float]
    dp_table: SetFunction
    tree: Optional[JoinTree]
    stats: OptimizerStats = field(default_factory=OptimizerStats)
    gamma: Optional[int] = None

    @property
    def feasible(self) -> bool:
        if self.cost is CostFunction.SMJ:
            return bool(np.isfinite(self.optimal_value))
        return self.optimal_value < INFINITY

    def to_dict(self, names: Optional[List[str]] = None) -> Dict[str, Any]:
        """📋 Result JSON document"""
        if not self.feasible:
            cost = None
        elif self.cost is CostFunction.SMJ:
            cost = float(self.optimal_value)
        else:
            cost = int(self.optimal_value)
        return {
            'algorithm': self.algorithm,
            'cost': cost,
            'gamma': self.gamma,
            'join_tree': self.tree.to_nested(names) if self.tree else None,
            'elapsed_ns': int(self.stats.elapsed_ns),
            'stats': self.stats.to_dict(),
        }


@dataclass
class GammaSearchState:
    """🔎 Binary lifting over decreasing candidate thresholds.

    candidates[0] (the largest cardinality) is always feasible and feasibility
    holds on a prefix, so p ends on the last feasible candidate.
    """
    candidates: List[int]
    p: int = 0
    step: int = 0

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("candidate list is empty")
        if any(a <= b for a, b in zip(self.candidates, self.candidates[1:])):
            raise ValueError("candidates must be strictly decreasing")
        if not self.step:
            self.step = 1 << max(0, (len(self.candidates) - 1).bit_length() - 1)
            if len(self.candidates) == 1:
                self.step = 0

    @property
    def done(self) -> bool:
        return self.step == 0

    def probe(self) -> Optional[int]:
        """Index of the next candidate to test, None when it is out of range"""
        index = self.p + self.step
        return index if index < len(self.candidates) else None

    def record(self, feasible: bool):
        if feasible:
            self.p += self.step
        self.step //= 2

    @property
    def gamma(self) -> int:
        return self.candidates[self.p]


@dataclass
class BenchConfig:
    """🏋️ Benchmark sweep settings"""
    algorithms: List[Algorithm] = field(default_factory=list)
    sizes: Tuple[int, int] = (3, 12)
    repetitions: int = 5
    seed: int = 0
    max_cardinality: int = field(default_factory=lambda: config.MAX_CARDINALITY)
    output: Optional[str] = None
    timing: bool = True
    workers: int = 1

    def validate(self):
        lo, hi = self.sizes
        if self.repetitions < 1:
            raise InvalidInputError("repetitions must be at least 1")
        if not 2 <= lo <= hi <= MAX_RELATIONS:
            raise InvalidInputError(f"sizes {lo}..{hi} must lie within [2, {MAX_RELATIONS}]")
        if not 0 <= self.seed < 1 << 64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")
        if self.max_cardinality < 1:
            raise InvalidInputError("max_cardinality must be at least 1")
        if self.workers < 1:
            raise InvalidInputError("workers must be at least 1")

    @property
    def size_range(self) -> range:
        return range(self.sizes[0], self.sizes[1] + 1)

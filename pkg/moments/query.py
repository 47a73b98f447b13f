"""
Moment queries: disjoint category sets with nonnegative integer exponents,
plus multinomial counting helpers over multiset permutations.
"""
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from numerics import ValidationError


class QueryError(ValidationError):
    """Malformed or inconsistent moment query"""
    pass


def count_distinct_permutations(exponents: Sequence[int]) -> int:
    """
    Number of distinct permutations of a multiset with k_i copies of label i

    Exact (Python integers): k! / prod(k_i!).
    """
    if any(k < 0 for k in exponents):
        raise QueryError(f"exponents must be nonnegative, got {list(exponents)}")
    result = math.factorial(sum(exponents))
    for k in exponents:
        result //= math.factorial(k)
    return result


def log_count_distinct_permutations(exponents: Sequence[int]) -> float:
    """log #S(k) via log-Gamma, safe for totals beyond 170"""
    k = np.asarray(exponents, dtype=float)
    return float(gammaln(k.sum() + 1) - gammaln(k + 1).sum())


def distinct_permutations(exponents: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """
    Yield every distinct arrangement of k_1 zeros, k_2 ones, ... in lexicographic order

    Labels are 0-based indices into the query's set list.
    """
    items: List[int] = [i for i, k in enumerate(exponents) for _ in range(k)]
    n = len(items)
    while True:
        yield tuple(items)
        # next permutation (lexicographic, skips duplicates)
        i = n - 2
        while i >= 0 and items[i] >= items[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while items[j] <= items[i]:
            j -= 1
        items[i], items[j] = items[j], items[i]
        items[i + 1:] = reversed(items[i + 1:])


def lattice_states(bounds: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """All integer vectors l with 0 <= l <= bounds componentwise"""
    if not bounds:
        yield ()
        return
    head, rest = bounds[0], bounds[1:]
    for value in range(head + 1):
        for tail in lattice_states(rest):
            yield (value,) + tail


@dataclass(frozen=True)
class MomentQuery:
    """Disjoint category sets A_1..A_n (0-based categories) with exponents k_1..k_n"""
    sets: Tuple[FrozenSet[int], ...]
    exponents: Tuple[int, ...]

    def __post_init__(self):
        if len(self.sets) != len(self.exponents):
            raise QueryError("each set needs exactly one exponent")
        for k in self.exponents:
            if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
                raise QueryError(f"exponents must be nonnegative integers, got {k!r}")
        seen: Dict[int, int] = {}
        for index, members in enumerate(self.sets):
            for category in members:
                if category in seen:
                    raise QueryError(
                        f"sets {seen[category] + 1} and {index + 1} overlap at category {category + 1}"
                    )
                seen[category] = index

    @classmethod
    def build(cls, pairs: Iterable[Tuple[Iterable[int], int]]) -> 'MomentQuery':
        sets, exponents = [], []
        for members, k in pairs:
            sets.append(frozenset(int(c) for c in members))
            exponents.append(int(k))
        return cls(tuple(sets), tuple(exponents))

    @classmethod
    def from_singletons(cls, exponents: Mapping[int, int]) -> 'MomentQuery':
        """Query prod_x nu(x)^{k_x} from a {category: exponent} mapping"""
        return cls.build(((c,), k) for c, k in sorted(exponents.items()))

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> 'MomentQuery':
        """Singleton query over every category with a nonzero count"""
        return cls.from_singletons({x: int(k) for x, k in enumerate(counts) if k})

    @classmethod
    def parse(cls, text: str, dim: int, labels: Optional[Sequence[str]] = None) -> 'MomentQuery':
        """
        Parse the command-line syntax "A1:exp,A2:exp,..."

        A set is a '+'-joined list of 1-based categories, 'a-b' ranges or labels,
        e.g. "3:2,5+7:1,10-12:1".
        """
        lookup = {label: i for i, label in enumerate(labels)} if labels else {}
        pairs = []
        for chunk in text.split(','):
            chunk = chunk.strip()
            if not chunk:
                continue
            if ':' not in chunk:
                raise QueryError(f"query term {chunk!r} must look like SET:EXPONENT")
            set_text, exp_text = chunk.rsplit(':', 1)
            try:
                exponent = int(exp_text)
            except ValueError:
                raise QueryError(f"exponent {exp_text!r} is not an integer")
            members = set()
            for token in set_text.split('+'):
                token = token.strip()
                if token in lookup:
                    members.add(lookup[token])
                elif '-' in token and all(p.strip().isdigit() for p in token.split('-', 1)):
                    lo, hi = (int(p) for p in token.split('-', 1))
                    if lo > hi:
                        raise QueryError(f"empty range {token!r}")
                    members.update(range(lo - 1, hi))
                elif token.isdigit():
                    members.add(int(token) - 1)
                else:
                    raise QueryError(f"unknown category {token!r}")
            pairs.append((members, exponent))
        if not pairs:
            raise QueryError("empty query")
        query = cls.build(pairs)
        query.check_dimension(dim)
        return query

    @property
    def total(self) -> int:
        return int(sum(self.exponents))

    def check_dimension(self, dim: int):
        for members in self.sets:
            for category in members:
                if not 0 <= category < dim:
                    raise QueryError(f"category {category + 1} outside 1..{dim}")

    def reduced(self) -> 'MomentQuery':
        """Drop zero-exponent entries"""
        keep = [i for i, k in enumerate(self.exponents) if k > 0]
        return MomentQuery(tuple(self.sets[i] for i in keep), tuple(self.exponents[i] for i in keep))

    def masks(self, dim: int) -> np.ndarray:
        """n x d 0/1 membership matrix; row i is the diagonal of D(A_i)"""
        self.check_dimension(dim)
        out = np.zeros((len(self.sets), dim))
        for i, members in enumerate(self.sets):
            out[i, list(members)] = 1.0
        return out

    def relabelled(self, order: Sequence[int]) -> 'MomentQuery':
        """Same query after category c is renamed order[c]"""
        return MomentQuery(tuple(frozenset(int(order[c]) for c in members) for members in self.sets),
                           self.exponents)

    def __str__(self) -> str:
        terms = []
        for members, k in zip(self.sets, self.exponents):
            terms.append('+'.join(str(c + 1) for c in sorted(members)) + f":{k}")
        return ','.join(terms)

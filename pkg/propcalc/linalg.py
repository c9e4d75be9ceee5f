"""
Exact sparse linear algebra over the rationals.

Vectors are dicts from basis label to Fraction with no zero entries. A linear
map is stored column-wise: source label -> image vector. Row reduction keeps
rows fully reduced so that kernels come out with an identity block on the
free columns and solutions have minimal support in the given column order.
"""

from collections.abc import Iterable, Mapping, Sequence
from fractions import Fraction

import numpy as np

Vector = dict[str, Fraction]
Columns = Mapping[str, Mapping[str, Fraction]]

RHS = "\x00rhs"  # augmented column, ordered after every real column


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def vector(items: Mapping[str, object] | Iterable[tuple[str, object]]) -> Vector:
    """Build a clean vector, dropping zero coefficients."""
    pairs = items.items() if isinstance(items, Mapping) else items
    out: Vector = {}
    for label, value in pairs:
        c = to_fraction(value)
        if c:
            out[label] = out.get(label, Fraction(0)) + c
            if not out[label]:
                del out[label]
    return out


def add_into(target: Vector, source: Mapping[str, Fraction], scale: Fraction | int = 1) -> Vector:
    """target += scale * source, in place."""
    if not scale:
        return target
    for label, value in source.items():
        c = target.get(label, 0) + scale * value
        if c:
            target[label] = c
        else:
            target.pop(label, None)
    return target


def scaled(v: Mapping[str, Fraction], scale: Fraction | int) -> Vector:
    if not scale:
        return {}
    return {label: scale * value for label, value in v.items()}


def combine(terms: Iterable[tuple[Fraction | int, Mapping[str, Fraction]]]) -> Vector:
    out: Vector = {}
    for scale, v in terms:
        add_into(out, v, scale)
    return out


def apply(columns: Columns, v: Mapping[str, Fraction]) -> Vector:
    """Apply a column-stored map to a vector. Labels outside the source map to zero."""
    out: Vector = {}
    for label, coeff in v.items():
        image = columns.get(label)
        if image:
            add_into(out, image, coeff)
    return out


def compose(outer: Columns, inner: Columns) -> dict[str, Vector]:
    return {label: apply(outer, image) for label, image in inner.items()}


def transpose(columns: Columns) -> dict[str, Vector]:
    rows: dict[str, Vector] = {}
    for src, image in columns.items():
        for tgt, value in image.items():
            if value:
                rows.setdefault(tgt, {})[src] = Fraction(value)
    return rows


def vectors_equal(u: Mapping[str, Fraction], v: Mapping[str, Fraction]) -> bool:
    keys = set(u) | set(v)
    return all(u.get(k, 0) == v.get(k, 0) for k in keys)


class RowReducer:
    """
    Incremental reduced row echelon form.

    Each stored row has coefficient 1 at its pivot and 0 at every other pivot.
    Pivots are the smallest available column in `order`. With `track=True`
    every row also carries the combination of input rows it came from, which
    is what inconsistency witnesses are made of.
    """

    def __init__(self, order: Mapping[str, int], track: bool = False):
        self.order = order
        self.track = track
        self.rows: dict[str, Vector] = {}
        self.combos: dict[str, Vector] = {}
        self._holders: dict[str, set[str]] = {}  # column -> pivots whose row uses it

    def _key(self, column: str):
        if column == RHS:
            return (1, 0)
        return (0, self.order[column])

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, row: Mapping[str, Fraction], combo: Vector | None = None) -> tuple[Vector, Vector]:
        r = dict(row)
        c = dict(combo) if combo is not None else {}
        for column in [col for col in r if col in self.rows]:
            coeff = r.get(column)
            if not coeff:
                continue
            add_into(r, self.rows[column], -coeff)
            if self.track:
                add_into(c, self.combos[column], -coeff)
        return r, c

    def add(self, row: Mapping[str, Fraction], row_id: str | None = None) -> tuple[str | None, Vector, Vector]:
        """
        Insert a row. Returns (pivot, remainder, combination); pivot is None
        when the row was already in the span.
        """
        combo = {row_id: Fraction(1)} if (self.track and row_id is not None) else {}
        r, c = self.reduce(row, combo)
        if not r:
            return None, r, c
        pivot = min(r, key=self._key)
        lead = r[pivot]
        if lead != 1:
            r = {k: v / lead for k, v in r.items()}
            if self.track:
                c = {k: v / lead for k, v in c.items()}
        for holder in list(self._holders.get(pivot, ())):
            other = self.rows[holder]
            coeff = other.get(pivot)
            if not coeff:
                continue
            before = set(other)
            add_into(other, r, -coeff)
            if self.track:
                add_into(self.combos[holder], c, -coeff)
            for col in before - set(other):
                self._holders.get(col, set()).discard(holder)
            for col in set(other) - before:
                self._holders.setdefault(col, set()).add(holder)
        self._holders.pop(pivot, None)
        self.rows[pivot] = r
        if self.track:
            self.combos[pivot] = c
        for col in r:
            if col != pivot:
                self._holders.setdefault(col, set()).add(pivot)
        return pivot, r, c


def _order_of(labels: Sequence[str]) -> dict[str, int]:
    return {label: i for i, label in enumerate(labels)}


def rank(columns: Columns, source: Sequence[str]) -> int:
    """Rank of a column-stored map whose source basis is `source`."""
    reducer = RowReducer(_order_of(source))
    for row in transpose({s: columns.get(s, {}) for s in source}).values():
        reducer.add(row)
    return reducer.rank


def kernel(columns: Columns, source: Sequence[str]) -> list[tuple[str, Vector]]:
    """
    Kernel basis of a column-stored map.

    Returns (free label, vector) pairs; each vector has coefficient 1 at its
    free label and 0 at every other free label, so coordinates of a kernel
    element are read off at the free labels.
    """
    reducer = RowReducer(_order_of(source))
    for row in transpose({s: columns.get(s, {}) for s in source}).values():
        reducer.add(row)
    free = [s for s in source if s not in reducer.rows]
    basis: dict[str, Vector] = {f: {f: Fraction(1)} for f in free}
    for pivot, row in reducer.rows.items():
        for col, value in row.items():
            if col != pivot:
                basis[col][pivot] = -value
    return [(f, basis[f]) for f in free]


def solve(
    columns: Columns, rhs: Mapping[str, Fraction], source: Sequence[str]
) -> tuple[Vector | None, Vector | None]:
    """
    Solve A x = rhs exactly.

    Returns (x, None) with free variables set to zero, or (None, witness) where
    the witness y is a functional on the target with y·A = 0 and y·rhs != 0.
    """
    rows = transpose({s: columns.get(s, {}) for s in source})
    for label, value in rhs.items():
        if value:
            rows.setdefault(label, {})[RHS] = Fraction(value)
    reducer = RowReducer(_order_of(source), track=True)
    for label in sorted(rows, key=str):
        pivot, r, c = reducer.add(rows[label], label)
        if pivot == RHS:
            return None, {k: v / r[RHS] for k, v in c.items()}
    x: Vector = {}
    for pivot, row in reducer.rows.items():
        value = row.get(RHS)
        if value:
            x[pivot] = value
    return x, None


def to_dense(columns: Columns, rows: Sequence[str], cols: Sequence[str]) -> np.ndarray:
    """Dense object-array matrix with Fraction entries, rows x cols."""
    out = np.empty((len(rows), len(cols)), dtype=object)
    out.fill(Fraction(0))
    row_index = _order_of(rows)
    for j, col in enumerate(cols):
        for label, value in columns.get(col, {}).items():
            out[row_index[label], j] = Fraction(value)
    return out


def dense_row_reduce(matrix: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Plain Gaussian elimination on an object array; returns (echelon form, pivot columns)."""
    a = matrix.copy()
    m, n = a.shape
    pivots: list[int] = []
    i = 0
    for j in range(n):
        if i >= m:
            break
        nonzero = [k for k in range(i, m) if a[k, j] != 0]
        if not nonzero:
            continue
        k = nonzero[0]
        if k != i:
            a[[i, k], :] = a[[k, i], :]
        a[i, :] = a[i, :] / a[i, j]
        for k in range(m):
            if k != i and a[k, j] != 0:
                a[k, :] = a[k, :] - a[k, j] * a[i, :]
        pivots.append(j)
        i += 1
    return a, pivots


def dense_rank(matrix: np.ndarray) -> int:
    if matrix.size == 0:
        return 0
    return len(dense_row_reduce(matrix)[1])


def dense_kernel(matrix: np.ndarray) -> list[np.ndarray]:
    m, n = matrix.shape
    if m == 0:
        basis = []
        for j in range(n):
            v = np.array([Fraction(0)] * n, dtype=object)
            v[j] = Fraction(1)
            basis.append(v)
        return basis
    reduced, pivots = dense_row_reduce(matrix)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = np.array([Fraction(0)] * n, dtype=object)
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -reduced[i, f]
        basis.append(v)
    return basis

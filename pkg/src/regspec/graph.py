"""Simple d-regular graphs and the switching calculus on them.

A graph keeps two views of its adjacency: sorted neighbour lists (``N x d``
int32) for O(d) iteration, and a little-endian packed bit matrix for O(1)
edge queries. Both are read-only; every operation returns a new graph.

Switchings follow the index convention ``xi(i, j, k, l) = D_ij + D_kl -
D_ik - D_jl`` where ``D_xy`` is the symmetric single-edge matrix; applying
``xi`` replaces edges ``ik, jl`` by ``ij, kl``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .errors import DomainError, SwitchInfeasibleError

__all__ = [
    "RegularGraph",
    "SwitchMove",
    "SignedPerturbation",
    "delta_matrix",
    "xi",
    "xi_dense",
    "chi",
    "apply_switch",
    "discrete_derivative",
    "power_row",
    "power_entry",
    "power_row_deviation",
    "RowDeviation",
    "complement",
    "format_graph",
    "parse_graph",
    "write_graphs",
    "read_graphs",
]

_INT64_MAX = np.iinfo(np.int64).max


def _readonly(a):
    a.flags.writeable = False
    return a


class RegularGraph:
    """Immutable simple d-regular graph on ``n_vertices`` vertices."""

    __slots__ = ("n_vertices", "degree", "_nbrs", "_bits")

    def __init__(self, neighbors, *, validate=True):
        nbrs = np.array(neighbors, dtype=np.int32, copy=True)
        if nbrs.ndim != 2:
            raise DomainError("neighbour table must be two-dimensional (N x d)")
        n, d = nbrs.shape
        if n == 0:
            raise DomainError("a graph needs at least one vertex")
        nbrs.sort(axis=1)
        dense = np.zeros((n, n), dtype=bool)
        if d:
            rows = np.repeat(np.arange(n), d)
            flat = nbrs.ravel()
            if validate:
                if flat.min() < 0 or flat.max() >= n:
                    raise DomainError("neighbour index out of range")
                if np.any(nbrs[:, 1:] == nbrs[:, :-1]):
                    raise DomainError("repeated neighbour (multi-edge)")
                if np.any(nbrs == np.arange(n)[:, None]):
                    raise DomainError("self-loop")
            dense[rows, flat] = True
            if validate and not np.array_equal(dense, dense.T):
                raise DomainError("adjacency is not symmetric")
        self.n_vertices = int(n)
        self.degree = int(d)
        self._nbrs = _readonly(nbrs)
        self._bits = _readonly(np.packbits(dense, axis=1, bitorder="little"))

    # -- construction -----------------------------------------------------
    @classmethod
    def from_edges(cls, n, edges):
        edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        adj = np.zeros((n, n), dtype=np.int8)
        if len(edges):
            if np.any(edges[:, 0] == edges[:, 1]):
                raise DomainError("self-loop")
            adj[edges[:, 0], edges[:, 1]] += 1
            adj[edges[:, 1], edges[:, 0]] += 1
        return cls.from_adjacency(adj)

    @classmethod
    def from_adjacency(cls, matrix):
        a = np.asarray(matrix)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError("adjacency must be square")
        if not np.all((a == 0) | (a == 1)):
            raise DomainError("adjacency entries must be 0 or 1")
        if np.any(np.diag(a)):
            raise DomainError("self-loop")
        if not np.array_equal(a, a.T):
            raise DomainError("adjacency is not symmetric")
        deg = a.sum(axis=1)
        if np.any(deg != deg[0]):
            raise DomainError("graph is not regular")
        n, d = a.shape[0], int(deg[0])
        nbrs = np.nonzero(a)[1].reshape(n, d)
        return cls(nbrs, validate=False)

    @classmethod
    def _from_bits(cls, n, bits):
        """Trusted constructor from a packed bit matrix (sampler output)."""
        dense = np.unpackbits(bits, axis=1, count=n, bitorder="little")
        deg = dense.sum(axis=1)
        d = int(deg[0])
        g = cls.__new__(cls)
        g.n_vertices = int(n)
        g.degree = d
        g._nbrs = _readonly(np.nonzero(dense)[1].astype(np.int32).reshape(n, d))
        g._bits = _readonly(np.array(bits, dtype=np.uint8, copy=True))
        return g

    # -- queries ----------------------------------------------------------
    @property
    def n_edges(self):
        return self.n_vertices * self.degree // 2

    @property
    def neighbor_table(self):
        return self._nbrs

    @property
    def bits(self):
        return self._bits

    def neighbors(self, v):
        return self._nbrs[v]

    def has_edge(self, u, v):
        return bool((self._bits[u, v >> 3] >> (v & 7)) & 1)

    def a(self, u, v):
        """Adjacency entry as an int."""
        return int((self._bits[u, v >> 3] >> (v & 7)) & 1)

    def adjacency(self, dtype=np.int64):
        dense = np.unpackbits(self._bits, axis=1, count=self.n_vertices, bitorder="little")
        return dense.astype(dtype, copy=False)

    def edges(self):
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        n, d = self._nbrs.shape
        rows = np.repeat(np.arange(n, dtype=np.int32), d)
        flat = self._nbrs.ravel()
        keep = rows < flat
        return np.column_stack([rows[keep], flat[keep]])

    def to_sparse(self, dtype=np.float64):
        from scipy.sparse import csr_matrix

        n, d = self._nbrs.shape
        indptr = np.arange(0, n * d + 1, d)
        return csr_matrix((np.ones(n * d, dtype=dtype), self._nbrs.ravel(), indptr), shape=(n, n))

    def key(self):
        return self._bits.tobytes()

    def degree_sequence(self):
        return np.full(self.n_vertices, self.degree)

    def __eq__(self, other):
        if not isinstance(other, RegularGraph):
            return NotImplemented
        return self.n_vertices == other.n_vertices and self.key() == other.key()

    def __hash__(self):
        return hash((self.n_vertices, self.key()))

    def __repr__(self):
        return f"RegularGraph(N={self.n_vertices}, d={self.degree})"


@dataclass(frozen=True)
class SwitchMove:
    """Index quadruple ``(i, j, k, l)`` of pairwise distinct vertices."""

    i: int
    j: int
    k: int
    l: int

    def __post_init__(self):
        idx = (self.i, self.j, self.k, self.l)
        if any(int(v) != v or v < 0 for v in idx):
            raise DomainError(f"switch indices must be non-negative integers, got {idx}")
        if len(set(idx)) != 4:
            raise DomainError(f"switch indices must be pairwise distinct, got {idx}")

    def as_tuple(self):
        return (self.i, self.j, self.k, self.l)


@dataclass(frozen=True)
class SignedPerturbation:
    """Sparse symmetric integer matrix, stored as sorted ``((x, y), value)`` pairs."""

    entries: tuple

    @classmethod
    def combine(cls, *terms):
        """Sum of ``(sign, perturbation)`` pairs."""
        acc = {}
        for sign, p in terms:
            for pos, v in p.entries:
                acc[pos] = acc.get(pos, 0) + sign * v
        return cls(tuple(sorted((pos, v) for pos, v in acc.items() if v != 0)))

    def as_dict(self):
        return dict(self.entries)

    def to_dense(self, n):
        out = np.zeros((n, n), dtype=np.int64)
        for (x, y), v in self.entries:
            out[x, y] = v
        return out

    def row_sums(self, n):
        out = np.zeros(n, dtype=np.int64)
        for (x, _), v in self.entries:
            out[x] += v
        return out

    def support(self):
        return {pos for pos, _ in self.entries}


def delta_matrix(i, j):
    """Symmetric single-edge matrix with ones at ``(i, j)`` and ``(j, i)``."""
    if i == j:
        raise DomainError("delta_matrix needs i != j")
    return SignedPerturbation(tuple(sorted((((i, j), 1), ((j, i), 1)))))


def xi(move):
    """The switching perturbation ``D_ij + D_kl - D_ik - D_jl``."""
    i, j, k, l = move.as_tuple()
    return SignedPerturbation.combine(
        (1, delta_matrix(i, j)),
        (1, delta_matrix(k, l)),
        (-1, delta_matrix(i, k)),
        (-1, delta_matrix(j, l)),
    )


def xi_dense(n, i, j, k, l):
    """Dense ``xi`` that tolerates coinciding indices.

    With coincidences the diagonal single-edge matrix ``D_ii`` carries a 2,
    as the symmetric reading of the definition gives; the enumeration
    verifier needs this when it scans all ``(k, l)``.
    """
    out = np.zeros((n, n), dtype=np.int64)
    for sign, (x, y) in ((1, (i, j)), (1, (k, l)), (-1, (i, k)), (-1, (j, l))):
        out[x, y] += sign
        out[y, x] += sign
    return out


def chi(g, move):
    """Switchability indicator ``A_ij (1 - A_ik) A_kl (1 - A_jl)``."""
    i, j, k, l = move.as_tuple()
    return g.a(i, j) * (1 - g.a(i, k)) * g.a(k, l) * (1 - g.a(j, l))


def apply_switch(g, move):
    """Return ``g + xi(move)``; requires edges ik, jl present and ij, kl absent."""
    i, j, k, l = move.as_tuple()
    if not (g.a(i, k) and g.a(j, l) and not g.a(i, j) and not g.a(k, l)):
        raise SwitchInfeasibleError(
            f"move {move.as_tuple()} is not switchable: need edges ({i},{k}), ({j},{l}) "
            f"present and ({i},{j}), ({k},{l}) absent"
        )
    nbrs = np.array(g._nbrs, copy=True)
    for v, old, new in ((i, k, j), (k, i, l), (j, l, i), (l, j, k)):
        row = nbrs[v]
        row[np.searchsorted(row, old)] = new
        row.sort()
    bits = np.array(g._bits, copy=True)
    for u, v, on in ((i, k, 0), (j, l, 0), (i, j, 1), (k, l, 1)):
        for a, b in ((u, v), (v, u)):
            if on:
                bits[a, b >> 3] |= np.uint8(1 << (b & 7))
            else:
                bits[a, b >> 3] &= np.uint8(~(1 << (b & 7)) & 0xFF)
    out = RegularGraph.__new__(RegularGraph)
    out.n_vertices = g.n_vertices
    out.degree = g.degree
    out._nbrs = _readonly(nbrs)
    out._bits = _readonly(bits)
    return out


def discrete_derivative(f: Callable[[np.ndarray], float], g, move):
    """``f(A + xi) - f(A)`` where ``f`` takes a dense integer adjacency matrix."""
    a = g.adjacency()
    b = a + xi(move).to_dense(g.n_vertices)
    if not np.all((b == 0) | (b == 1)):
        raise SwitchInfeasibleError(f"A + xi{move.as_tuple()} is not a 0/1 matrix")
    return f(b) - f(a)


def _check_power(g, r, widen):
    if int(r) != r or r < 1:
        raise DomainError(f"power must be a positive integer, got {r}")
    if r > 8 and not widen:
        raise DomainError("powers above 8 need widen=True")
    if not widen and g.degree ** r > _INT64_MAX:
        raise OverflowError(f"d^r = {g.degree}^{r} overflows int64; pass widen=True")


def power_row(g, r, i, widen=False):
    """Row ``i`` of the r-th adjacency power, computed by walking neighbour lists."""
    _check_power(g, r, widen)
    v = np.zeros(g.n_vertices, dtype=object if widen else np.int64)
    v[i] = 1
    nbrs = g.neighbor_table
    for _ in range(r):
        v = v[nbrs].sum(axis=1) if g.degree else np.zeros_like(v)
    return v


def power_entry(g, r, i, j, widen=False):
    """Number of r-step walks from ``i`` to ``j``."""
    return int(power_row(g, r, i, widen=widen)[j])


class RowDeviation(NamedTuple):
    deviation: float  # sum_j |(A^r)_ij - d^r / N|
    diagonal_excess: float  # (A^2r)_ii - d^2r / N
    scaled_excess: int  # N (A^2r)_ii - d^2r, exact


def power_row_deviation(g, r, i, widen=False):
    """Row deviation of ``A^r`` from its mean and the matching diagonal excess."""
    row = power_row(g, r, i, widen=widen)
    n, dr = g.n_vertices, g.degree ** r
    ints = [int(x) for x in row]
    numer = sum(abs(n * x - dr) for x in ints)
    diag = sum(x * x for x in ints)  # (A^2r)_ii = sum_j (A^r)_ij^2 by symmetry
    scaled = n * diag - dr * dr
    return RowDeviation(numer / n, scaled / n, scaled)


def complement(g):
    """The (N - 1 - d)-regular complement graph."""
    n = g.n_vertices
    a = g.adjacency(dtype=bool)
    c = ~a
    np.fill_diagonal(c, False)
    nbrs = np.nonzero(c)[1].reshape(n, n - 1 - g.degree)
    return RegularGraph(nbrs, validate=False)


# -- text format -------------------------------------------------------------

def format_graph(g):
    """Header ``N d`` then one line of sorted neighbours per vertex."""
    lines = [f"{g.n_vertices} {g.degree}"]
    lines.extend(" ".join(map(str, row)) for row in g.neighbor_table.tolist())
    return "\n".join(lines) + "\n"


def _parse_block(lines, pos):
    header = lines[pos].split()
    if len(header) != 2:
        raise DomainError(f"line {pos + 1}: expected header 'N d'")
    n, d = int(header[0]), int(header[1])
    if pos + n > len(lines) - 1:
        raise DomainError(f"truncated graph block at line {pos + 1}")
    rows = []
    for t in range(n):
        fields = lines[pos + 1 + t].split()
        if len(fields) != d:
            raise DomainError(f"line {pos + 2 + t}: expected {d} neighbours, got {len(fields)}")
        rows.append([int(x) for x in fields])
    return RegularGraph(np.asarray(rows, dtype=np.int32).reshape(n, d)), pos + 1 + n


def parse_graph(text):
    graphs = list(_iter_blocks(text))
    if len(graphs) != 1:
        raise DomainError(f"expected exactly one graph, found {len(graphs)}")
    return graphs[0]


def _iter_blocks(text):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    pos = 0
    while pos < len(lines):
        if not lines[pos].strip():
            pos += 1
            continue
        g, pos = _parse_block(lines, pos)
        yield g


def write_graphs(path, graphs: Iterable[RegularGraph]):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for g in graphs:
            fh.write(format_graph(g))


def read_graphs(path):
    with open(path, encoding="ascii") as fh:
        return list(_iter_blocks(fh.read()))

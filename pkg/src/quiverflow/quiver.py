"""Quiver combinatorics: vertices, edges, dimension vectors, stability weights.

Vertex ids are strings.  Edges are (tail, head) pairs addressed by integer
position, so matrix data and labels stay aligned through serialization.
Dimension vectors and stability parameters are plain dicts keyed by vertex id.
Weights may be ints, floats or `fractions.Fraction`; slope arithmetic is exact
whenever no float is involved.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

Weight = "int | float | Fraction"

_HANDSAW_LABEL = re.compile(r"^(B1|B2)_(\d+)$|^(a|b)_(\d+)\^(\d+)$")


@dataclass(frozen=True)
class Quiver:
    """Directed multigraph with an optional distinguished dimension-1 vertex.

    ``pairing`` records doubled-pair metadata as (edge, reversed edge) index
    pairs.  ``labels`` is positional edge metadata (handsaw roles use it).
    """

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    infinity: str | None = None
    labels: tuple[str | None, ...] | None = None
    pairing: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(str(v) for v in self.vertices))
        object.__setattr__(self, "edges", tuple((str(t), str(h)) for t, h in self.edges))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
        if self.pairing is not None:
            object.__setattr__(
                self, "pairing", tuple((int(a), int(b)) for a, b in self.pairing)
            )

    def tail(self, e: int) -> str:
        return self.edges[e][0]

    def head(self, e: int) -> str:
        return self.edges[e][1]

    @property
    def nedges(self) -> int:
        return len(self.edges)

    @property
    def loop_free(self) -> bool:
        return all(t != h for t, h in self.edges)

    @property
    def ordinary_vertices(self) -> tuple[str, ...]:
        """Vertices other than the distinguished one (the set I')."""
        return tuple(v for v in self.vertices if v != self.infinity)

    def edges_into(self, v: str) -> list[int]:
        return [e for e, (_, h) in enumerate(self.edges) if h == v]

    def edges_out(self, v: str) -> list[int]:
        return [e for e, (t, _) in enumerate(self.edges) if t == v]

    def label(self, e: int) -> str | None:
        return None if self.labels is None else self.labels[e]


@dataclass(frozen=True)
class QuiverReport:
    ok: bool
    loop_free: bool
    problems: tuple[str, ...]


def validate_quiver(q: Quiver) -> QuiverReport:
    """Check structural invariants and report whether the quiver is loop-free."""
    problems = []
    seen = set()
    for v in q.vertices:
        if v in seen:
            problems.append(f"duplicate vertex id {v!r}")
        seen.add(v)
    for e, (t, h) in enumerate(q.edges):
        if t not in seen:
            problems.append(f"edge {e} has dangling tail {t!r}")
        if h not in seen:
            problems.append(f"edge {e} has dangling head {h!r}")
    if q.infinity is not None and q.infinity not in seen:
        problems.append(f"unknown infinity id {q.infinity!r}")
    if q.labels is not None and len(q.labels) != q.nedges:
        problems.append("label list length does not match edge count")
    if q.pairing is not None:
        for a, b in q.pairing:
            if not (0 <= a < q.nedges and 0 <= b < q.nedges):
                problems.append(f"pairing entry ({a},{b}) out of range")
            elif q.edges[b] != (q.edges[a][1], q.edges[a][0]):
                problems.append(f"pairing entry ({a},{b}) does not reverse edge {a}")
    return QuiverReport(ok=not problems, loop_free=q.loop_free, problems=tuple(problems))


def check_quiver(q: Quiver) -> Quiver:
    rep = validate_quiver(q)
    if not rep.ok:
        raise ValueError("invalid quiver: " + "; ".join(rep.problems))
    return q


# ---------------------------------------------------------------------------
# dimension vectors


def check_dims(q: Quiver, dims: Mapping[str, int]) -> dict[str, int]:
    if set(dims) != set(q.vertices):
        raise ValueError("dimension vector keys must match the quiver vertices")
    out = {}
    for v, d in dims.items():
        d = int(d)
        if d < 0:
            raise ValueError(f"negative dimension at vertex {v!r}")
        out[v] = d
    return out


def dim_total(dims: Mapping[str, int]) -> int:
    return sum(int(d) for d in dims.values())


def dim_add(a: Mapping[str, int], b: Mapping[str, int]) -> dict[str, int]:
    return {v: int(a[v]) + int(b[v]) for v in a}


def dim_sub(a: Mapping[str, int], b: Mapping[str, int]) -> dict[str, int]:
    out = {v: int(a[v]) - int(b[v]) for v in a}
    if any(d < 0 for d in out.values()):
        raise ValueError("dimension vector difference has negative entries")
    return out


def unit_dims(q: Quiver, k: str) -> dict[str, int]:
    if k not in q.vertices:
        raise ValueError(f"unknown vertex {k!r}")
    return {v: (1 if v == k else 0) for v in q.vertices}


def dims_leq(a: Mapping[str, int], b: Mapping[str, int]) -> bool:
    return all(int(a[v]) <= int(b[v]) for v in a)


# ---------------------------------------------------------------------------
# stability parameters


def _exact(values: Iterable) -> bool:
    return not any(isinstance(w, float) for w in values)


def degree_rank_slope(alpha: Mapping, vp: Mapping[str, int]):
    """Degree, rank and slope of a dimension vector.

    Exact `Fraction` slope when all weights are int/Fraction, float otherwise.
    Raises on the zero dimension vector (slope undefined).
    """
    if set(alpha) != set(vp):
        raise ValueError("weight keys must match dimension-vector keys")
    rank = dim_total(vp)
    if rank == 0:
        raise ValueError("slope of the zero dimension vector is undefined")
    if _exact(alpha.values()):
        deg = sum(Fraction(alpha[v]) * vp[v] for v in vp)
        return deg, rank, deg / rank
    deg = float(sum(float(alpha[v]) * vp[v] for v in vp))
    return deg, rank, deg / rank


def is_admissible(alpha: Mapping, v: Mapping[str, int], tol: float = 1e-12) -> bool:
    """True iff the pairing alpha . v vanishes (exactly for rational weights)."""
    if set(alpha) != set(v):
        raise ValueError("weight keys must match dimension-vector keys")
    if _exact(alpha.values()):
        return sum(Fraction(alpha[u]) * v[u] for u in v) == 0
    return abs(sum(float(alpha[u]) * v[u] for u in v)) <= tol


def canonical_stability(q: Quiver, v: Mapping[str, int]) -> dict[str, int]:
    """Weight 1 on every ordinary vertex, minus the total ordinary dimension at
    the distinguished vertex.  Requires dims 1 there."""
    if q.infinity is None:
        raise ValueError("canonical stability needs a distinguished vertex")
    v = check_dims(q, v)
    if v[q.infinity] != 1:
        raise ValueError("canonical stability requires dimension 1 at infinity")
    total = sum(v[u] for u in q.ordinary_vertices)
    alpha = {u: 1 for u in q.ordinary_vertices}
    alpha[q.infinity] = -total
    return alpha


def induced_parameter(alpha: Mapping, vp: Mapping[str, int]) -> dict:
    """Shift alpha by the slope of ``vp`` so that ``vp`` gets degree zero."""
    _, _, mu = degree_rank_slope(alpha, vp)
    if _exact(alpha.values()) and isinstance(mu, Fraction):
        return {u: Fraction(alpha[u]) - mu for u in alpha}
    mu = float(mu)
    return {u: float(alpha[u]) - mu for u in alpha}


# ---------------------------------------------------------------------------
# constructions


def double_quiver(q: Quiver) -> Quiver:
    """Append a reversed edge for every edge, recording the pairing."""
    edges = list(q.edges) + [(h, t) for t, h in q.edges]
    n = q.nedges
    labels = None
    if q.labels is not None:
        labels = list(q.labels) + [None] * n
    pairing = tuple((e, n + e) for e in range(n))
    return Quiver(
        vertices=q.vertices,
        edges=tuple(edges),
        infinity=q.infinity,
        labels=None if labels is None else tuple(labels),
        pairing=pairing,
    )


def reverse_quiver(q: Quiver) -> Quiver:
    """Reverse every edge, keeping order, labels and pairing metadata."""
    return Quiver(
        vertices=q.vertices,
        edges=tuple((h, t) for t, h in q.edges),
        infinity=q.infinity,
        labels=q.labels,
        pairing=q.pairing,
    )


def crawley_boevey_frame(q: Quiver, w: Mapping[str, int], infinity: str = "inf") -> Quiver:
    """Adjoin a framing vertex with w[i] edges into each vertex i."""
    if q.infinity is not None:
        raise ValueError("quiver already has a distinguished vertex")
    if infinity in q.vertices:
        raise ValueError(f"framing vertex id {infinity!r} already in use")
    if set(w) - set(q.vertices):
        raise ValueError("framing weights mention unknown vertices")
    if any(int(c) < 0 for c in w.values()):
        raise ValueError("framing weights must be nonnegative")
    edges = list(q.edges)
    labels = list(q.labels) if q.labels is not None else [None] * q.nedges
    for v in q.vertices:
        for j in range(int(w.get(v, 0))):
            edges.append((infinity, v))
            labels.append(f"a_{v}^{j + 1}")
    return Quiver(
        vertices=q.vertices + (infinity,),
        edges=tuple(edges),
        infinity=infinity,
        labels=tuple(labels),
    )


def framed_dims(v: Mapping[str, int], infinity: str = "inf") -> dict[str, int]:
    """Extend a dimension vector over the framing vertex by 1."""
    out = {u: int(d) for u, d in v.items()}
    if infinity in out:
        raise ValueError("dimension vector already covers the framing vertex")
    out[infinity] = 1
    return out


# ---------------------------------------------------------------------------
# handsaw quivers


def handsaw_to_quiver(n: int, dims_v: tuple, dims_w: tuple, infinity: str = "inf"):
    """Build the framed chain quiver for a length-n handsaw.

    Vertices V_1..V_{n-1} plus the distinguished vertex; B1 edges along the
    chain, B2 loops, dims_w[k-1] edges inf->V_k and dims_w[k] edges V_k->inf.
    Returns the quiver and its dimension vector.
    """
    n = int(n)
    if n < 2:
        raise ValueError("handsaw needs n >= 2")
    dims_v = tuple(int(d) for d in dims_v)
    dims_w = tuple(int(d) for d in dims_w)
    if len(dims_v) != n - 1:
        raise ValueError("dims_v must have n-1 entries")
    if len(dims_w) != n:
        raise ValueError("dims_w must have n entries")
    if any(d < 0 for d in dims_v + dims_w):
        raise ValueError("handsaw dimensions must be nonnegative")
    vs = [f"V{k}" for k in range(1, n)]
    edges: list[tuple[str, str]] = []
    labels: list[str] = []
    for k in range(1, n - 1):
        edges.append((f"V{k}", f"V{k + 1}"))
        labels.append(f"B1_{k}")
    for k in range(1, n):
        edges.append((f"V{k}", f"V{k}"))
        labels.append(f"B2_{k}")
    for k in range(1, n):
        for j in range(dims_w[k - 1]):
            edges.append((infinity, f"V{k}"))
            labels.append(f"a_{k}^{j + 1}")
    for k in range(1, n):
        for j in range(dims_w[k]):
            edges.append((f"V{k}", infinity))
            labels.append(f"b_{k + 1}^{j + 1}")
    q = Quiver(
        vertices=tuple(vs) + (infinity,),
        edges=tuple(edges),
        infinity=infinity,
        labels=tuple(labels),
    )
    dims = {f"V{k}": dims_v[k - 1] for k in range(1, n)}
    dims[infinity] = 1
    return q, dims


def handsaw_roles(q: Quiver) -> list[tuple[str, int, int] | None]:
    """Parse edge labels into (role, k, j) triples; role in {B1, B2, a, b}.

    B-edges report j = 0.  Unlabeled or foreign labels map to None.
    """
    out: list[tuple[str, int, int] | None] = []
    for e in range(q.nedges):
        lab = q.label(e)
        m = _HANDSAW_LABEL.match(lab) if lab else None
        if not m:
            out.append(None)
        elif m.group(1):
            out.append((m.group(1), int(m.group(2)), 0))
        else:
            out.append((m.group(3), int(m.group(4)), int(m.group(5))))
    return out

"""Representation algebra: group action, moment maps, energy, gradient, Hessian.

Conventions
-----------
A representation assigns edge e the complex matrix ``mats[e]`` of shape
(dim head, dim tail).  Tangent vectors are bare lists of matrices with the
same shapes.  Lie-algebra and group elements are bare lists of per-vertex
square matrices ordered like ``quiver.vertices``; the compact flavour is
anti-Hermitian.  The real pairing on both edge and vertex data is
sum of Re tr(M N*), and the complex structure acts entrywise by i.

The real moment map is (1/2i) sum_a [A_a, A_a*] assembled per vertex: edge a
contributes (1/2i) A_a A_a* at its head and -(1/2i) A_a* A_a at its tail.
A stability parameter alpha enters as the central element (i alpha_j id_j).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .quiver import Quiver, check_dims, degree_rank_slope

Mats = "list[np.ndarray]"


@dataclass(eq=False)
class Representation:
    """Edge-indexed complex matrices over a quiver with fixed dimensions."""

    quiver: Quiver
    dims: dict[str, int]
    mats: list[np.ndarray]

    def __post_init__(self):
        self.dims = check_dims(self.quiver, self.dims)
        if len(self.mats) != self.quiver.nedges:
            raise ValueError("matrix count does not match edge count")
        fixed = []
        for e, m in enumerate(self.mats):
            m = np.asarray(m, dtype=complex)
            want = (self.dims[self.quiver.head(e)], self.dims[self.quiver.tail(e)])
            if m.shape != want:
                raise ValueError(f"edge {e} matrix has shape {m.shape}, expected {want}")
            if m.size and not np.all(np.isfinite(m)):
                raise ValueError(f"edge {e} matrix has non-finite entries")
            fixed.append(m)
        self.mats = fixed

    def copy(self) -> "Representation":
        return Representation(self.quiver, dict(self.dims), [m.copy() for m in self.mats])

    def norm(self) -> float:
        return float(np.sqrt(sum(np.sum(np.abs(m) ** 2) for m in self.mats)))

    def approx_eq(self, other: "Representation", tol: float = 1e-10) -> bool:
        if self.quiver.edges != other.quiver.edges or self.dims != other.dims:
            return False
        return rep_distance(self, other) <= tol * (1.0 + self.norm())

    @classmethod
    def zero(cls, quiver: Quiver, dims: Mapping[str, int]) -> "Representation":
        dims = check_dims(quiver, dims)
        mats = [
            np.zeros((dims[quiver.head(e)], dims[quiver.tail(e)]), dtype=complex)
            for e in range(quiver.nedges)
        ]
        return cls(quiver, dict(dims), mats)


def rep_distance(x: Representation, y: Representation) -> float:
    return float(np.sqrt(sum(np.sum(np.abs(a - b) ** 2) for a, b in zip(x.mats, y.mats))))


def random_rep(quiver: Quiver, dims: Mapping[str, int], rng: np.random.Generator,
               scale: float = 1.0) -> Representation:
    dims = check_dims(quiver, dims)
    mats = []
    for e in range(quiver.nedges):
        shape = (dims[quiver.head(e)], dims[quiver.tail(e)])
        mats.append(scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
                    / np.sqrt(2.0))
    return Representation(quiver, dict(dims), mats)


# ---------------------------------------------------------------------------
# shapes and real coordinates


def edge_shapes(quiver: Quiver, dims: Mapping[str, int]) -> list[tuple[int, int]]:
    return [(dims[quiver.head(e)], dims[quiver.tail(e)]) for e in range(quiver.nedges)]


def vertex_shapes(quiver: Quiver, dims: Mapping[str, int]) -> list[tuple[int, int]]:
    return [(dims[v], dims[v]) for v in quiver.vertices]


def zero_mats(shapes: Sequence[tuple[int, int]]) -> Mats:
    return [np.zeros(s, dtype=complex) for s in shapes]


def random_mats(shapes, rng: np.random.Generator, scale: float = 1.0) -> Mats:
    return [scale * (rng.standard_normal(s) + 1j * rng.standard_normal(s)) / np.sqrt(2.0)
            for s in shapes]


def ravel_real(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Flatten complex matrices into [re..., im...] blocks, one per matrix."""
    if not mats:
        return np.zeros(0)
    return np.concatenate([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats])


def unravel_real(vec: np.ndarray, shapes: Sequence[tuple[int, int]]) -> Mats:
    out = []
    pos = 0
    for s in shapes:
        n = s[0] * s[1]
        re = vec[pos:pos + n].reshape(s)
        im = vec[pos + n:pos + 2 * n].reshape(s)
        out.append(re + 1j * im)
        pos += 2 * n
    if pos != len(vec):
        raise ValueError("vector length does not match shapes")
    return out


def pairing(a: Sequence[np.ndarray], b: Sequence[np.ndarray]) -> float:
    """Real inner product sum Re tr(a b*)."""
    return float(sum(np.real(np.vdot(n, m)) for m, n in zip(a, b)))


def mats_norm(a: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(sum(np.sum(np.abs(m) ** 2) for m in a)))


def mats_add(a, b) -> Mats:
    return [m + n for m, n in zip(a, b)]


def mats_sub(a, b) -> Mats:
    return [m - n for m, n in zip(a, b)]


def mats_scale(c, a) -> Mats:
    return [c * m for m in a]


def mult_i(a) -> Mats:
    return [1j * m for m in a]


def anti_hermitian_part(a: Sequence[np.ndarray]) -> Mats:
    return [(m - m.conj().T) / 2.0 for m in a]


# ---------------------------------------------------------------------------
# group action and infinitesimal action


def _inverses(g: Sequence[np.ndarray]) -> Mats:
    out = []
    for i, m in enumerate(g):
        m = np.asarray(m, dtype=complex)
        if m.shape[0] != m.shape[1]:
            raise ValueError("group element blocks must be square")
        if m.size == 0:
            out.append(m.copy())
            continue
        s = np.linalg.svd(m, compute_uv=False)
        if s[-1] <= 1e-14 * max(1.0, s[0]):
            raise ValueError(f"singular block at position {i}")
        out.append(np.linalg.inv(m))
    return out


def group_act(g: Sequence[np.ndarray], x: Representation) -> Representation:
    """Change of basis: edge matrix becomes g_head . A . g_tail^{-1}."""
    q = x.quiver
    vidx = {v: i for i, v in enumerate(q.vertices)}
    ginv = _inverses(g)
    mats = [g[vidx[q.head(e)]] @ x.mats[e] @ ginv[vidx[q.tail(e)]]
            for e in range(q.nedges)]
    return Representation(q, dict(x.dims), mats)


def group_act_tangent(g: Sequence[np.ndarray], X: Mats, quiver: Quiver) -> Mats:
    vidx = {v: i for i, v in enumerate(quiver.vertices)}
    ginv = _inverses(g)
    return [g[vidx[quiver.head(e)]] @ X[e] @ ginv[vidx[quiver.tail(e)]]
            for e in range(quiver.nedges)]


def inf_action(x: Representation, u: Sequence[np.ndarray]) -> Mats:
    """rho_x(u): edge a gets u_head A_a - A_a u_tail."""
    q = x.quiver
    vidx = {v: i for i, v in enumerate(q.vertices)}
    return [u[vidx[q.head(e)]] @ x.mats[e] - x.mats[e] @ u[vidx[q.tail(e)]]
            for e in range(q.nedges)]


def inf_action_deriv(x: Representation, u: Sequence[np.ndarray], X: Mats) -> Mats:
    """Derivative of rho in the base point: same bracket with X in place of x."""
    q = x.quiver
    vidx = {v: i for i, v in enumerate(q.vertices)}
    return [u[vidx[q.head(e)]] @ X[e] - X[e] @ u[vidx[q.tail(e)]]
            for e in range(q.nedges)]


def inf_action_adjoint(x: Representation, X: Mats, flavor: str = "compact") -> Mats:
    """Adjoint of rho_x: vertex i gets sum_{h(a)=i} X_a A_a* - sum_{t(a)=i} A_a* X_a.

    The compact flavour projects onto anti-Hermitian matrices, matching the
    pairing against anti-Hermitian Lie-algebra elements.
    """
    if flavor not in ("compact", "full"):
        raise ValueError("flavor must be 'compact' or 'full'")
    q = x.quiver
    out = [np.zeros((x.dims[v], x.dims[v]), dtype=complex) for v in q.vertices]
    vidx = {v: i for i, v in enumerate(q.vertices)}
    for e in range(q.nedges):
        out[vidx[q.head(e)]] += X[e] @ x.mats[e].conj().T
        out[vidx[q.tail(e)]] -= x.mats[e].conj().T @ X[e]
    if flavor == "compact":
        out = anti_hermitian_part(out)
    return out


# ---------------------------------------------------------------------------
# moment maps


def moment_real(x: Representation) -> Mats:
    """Per-vertex assembly of (1/2i) sum_a [A_a, A_a*]; anti-Hermitian."""
    q = x.quiver
    out = [np.zeros((x.dims[v], x.dims[v]), dtype=complex) for v in q.vertices]
    vidx = {v: i for i, v in enumerate(q.vertices)}
    for e in range(q.nedges):
        m = x.mats[e]
        out[vidx[q.head(e)]] += m @ m.conj().T
        out[vidx[q.tail(e)]] -= m.conj().T @ m
    return [(1.0 / 2.0j) * u for u in out]


def d_moment_real(x: Representation, X: Mats) -> Mats:
    """Derivative of the real moment map at x in direction X."""
    q = x.quiver
    out = [np.zeros((x.dims[v], x.dims[v]), dtype=complex) for v in q.vertices]
    vidx = {v: i for i, v in enumerate(q.vertices)}
    for e in range(q.nedges):
        m, dm = x.mats[e], X[e]
        out[vidx[q.head(e)]] += dm @ m.conj().T + m @ dm.conj().T
        out[vidx[q.tail(e)]] -= dm.conj().T @ m + m.conj().T @ dm
    return [(1.0 / 2.0j) * u for u in out]


def _paired_edges(q: Quiver) -> tuple[tuple[int, int], ...]:
    if q.pairing is None:
        raise ValueError("unpaired edge: quiver carries no doubling metadata")
    return q.pairing


def moment_complex(x: Representation) -> Mats:
    """Per-vertex assembly of sum over pairs [A_a, B_abar]; needs pairing."""
    q = x.quiver
    pairs = _paired_edges(q)
    out = [np.zeros((x.dims[v], x.dims[v]), dtype=complex) for v in q.vertices]
    vidx = {v: i for i, v in enumerate(q.vertices)}
    for a, ab in pairs:
        A, B = x.mats[a], x.mats[ab]
        out[vidx[q.head(a)]] += A @ B
        out[vidx[q.tail(a)]] -= B @ A
    return out


def d_moment_complex(x: Representation, X: Mats) -> Mats:
    q = x.quiver
    pairs = _paired_edges(q)
    out = [np.zeros((x.dims[v], x.dims[v]), dtype=complex) for v in q.vertices]
    vidx = {v: i for i, v in enumerate(q.vertices)}
    for a, ab in pairs:
        A, B = x.mats[a], x.mats[ab]
        dA, dB = X[a], X[ab]
        out[vidx[q.head(a)]] += dA @ B + A @ dB
        out[vidx[q.tail(a)]] -= B @ dA + dB @ A
    return out


def holomorphic_symplectic_pairing(quiver: Quiver, X: Mats, Y: Mats) -> complex:
    """omega_C(X, Y) = sum over pairs tr(Y_a X_abar - Y_abar X_a)."""
    total = 0.0 + 0.0j
    for a, ab in _paired_edges(quiver):
        total += np.trace(Y[a] @ X[ab]) - np.trace(Y[ab] @ X[a])
    return complex(total)


def central_element(quiver: Quiver, alpha: Mapping, dims: Mapping[str, int]) -> Mats:
    """The element (i alpha_j id_j) of the compact Lie algebra."""
    if set(alpha) != set(dims):
        raise ValueError("weight keys must match dimension-vector keys")
    return [1j * float(alpha[v]) * np.eye(dims[v], dtype=complex) for v in quiver.vertices]


def moment_minus_alpha(x: Representation, alpha: Mapping) -> Mats:
    mu = moment_real(x)
    c = central_element(x.quiver, alpha, x.dims)
    return mats_sub(mu, c)


# ---------------------------------------------------------------------------
# energy, gradient, Hessian


def energy(x: Representation, alpha: Mapping) -> float:
    """Half the squared norm of mu - alpha."""
    d = moment_minus_alpha(x, alpha)
    return 0.5 * mats_norm(d) ** 2


def grad_energy(x: Representation, alpha: Mapping) -> Mats:
    """I rho_x(mu(x) - alpha)."""
    return mult_i(inf_action(x, moment_minus_alpha(x, alpha)))


def grad_norm(x: Representation, alpha: Mapping) -> float:
    return mats_norm(grad_energy(x, alpha))


def hessian_apply(x: Representation, alpha: Mapping, X: Mats) -> Mats:
    """I drho(mu - alpha)(X) - I rho rho* I X, the second variation of the energy."""
    d = moment_minus_alpha(x, alpha)
    first = mult_i(inf_action_deriv(x, d, X))
    u = inf_action_adjoint(x, mult_i(X), flavor="compact")
    second = mult_i(inf_action(x, u))
    return mats_sub(first, second)


def hessian_matrix(x: Representation, alpha: Mapping) -> np.ndarray:
    """The Hessian as a real symmetric matrix in [re..., im...] coordinates."""
    shapes = edge_shapes(x.quiver, x.dims)
    n = 2 * sum(s[0] * s[1] for s in shapes)
    H = np.zeros((n, n))
    basis = np.zeros(n)
    for col in range(n):
        basis[col] = 1.0
        H[:, col] = ravel_real(hessian_apply(x, alpha, unravel_real(basis, shapes)))
        basis[col] = 0.0
    return H


# ---------------------------------------------------------------------------
# block embeddings (leading-coordinate convention)


def embed_rep(x: Representation, big_dims: Mapping[str, int]) -> Representation:
    """Place x in the leading coordinates of a larger dimension vector."""
    big = check_dims(x.quiver, big_dims)
    if any(big[v] < x.dims[v] for v in big):
        raise ValueError("target dimensions must dominate the representation")
    out = Representation.zero(x.quiver, big)
    q = x.quiver
    for e in range(q.nedges):
        h, t = x.dims[q.head(e)], x.dims[q.tail(e)]
        out.mats[e][:h, :t] = x.mats[e]
    return out


def restrict_rep(x: Representation, small_dims: Mapping[str, int],
                 tol: float | None = None) -> Representation:
    """Keep the leading block; optionally insist the rest is negligible."""
    small = check_dims(x.quiver, small_dims)
    if any(small[v] > x.dims[v] for v in small):
        raise ValueError("target dimensions must be dominated by the representation")
    q = x.quiver
    mats = []
    leak = 0.0
    for e in range(q.nedges):
        h, t = small[q.head(e)], small[q.tail(e)]
        mats.append(x.mats[e][:h, :t].copy())
        leak += float(np.sum(np.abs(x.mats[e]) ** 2) - np.sum(np.abs(x.mats[e][:h, :t]) ** 2))
    if tol is not None and np.sqrt(max(leak, 0.0)) > tol * (1.0 + x.norm()):
        raise ValueError("restriction discards non-negligible entries")
    return Representation(q, small, mats)


def direct_sum(x: Representation, y: Representation) -> Representation:
    """Block-diagonal sum, x in the leading coordinates."""
    if x.quiver.edges != y.quiver.edges:
        raise ValueError("direct sum needs a common quiver")
    q = x.quiver
    dims = {v: x.dims[v] + y.dims[v] for v in q.vertices}
    out = Representation.zero(q, dims)
    for e in range(q.nedges):
        h1, t1 = x.dims[q.head(e)], x.dims[q.tail(e)]
        out.mats[e][:h1, :t1] = x.mats[e]
        out.mats[e][h1:, t1:] = y.mats[e]
    return out


def add_tangent(x: Representation, X: Mats) -> Representation:
    # a size-0 edge matrix would otherwise broadcast against size-1 silently
    for e, (m, d) in enumerate(zip(x.mats, X)):
        if np.shape(d) != m.shape:
            raise ValueError(f"tangent shape {np.shape(d)} != edge {e} shape {m.shape}")
    return Representation(x.quiver, dict(x.dims), mats_add(x.mats, X))


def slope_float(alpha: Mapping, vp: Mapping[str, int]) -> float:
    return float(degree_rank_slope(alpha, vp)[2])

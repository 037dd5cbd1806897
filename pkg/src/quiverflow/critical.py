"""Critical-point analysis: block classification, Hessian spectra, slices.

At a critical point the Hermitian element i(mu - alpha) is block scalar; its
per-vertex eigenspaces split the representation into sub-blocks whose
eigenvalue equals the slope of their dimension vector.  The Hessian acts on a
Hom^1 block mapping the slope-s block into the slope-t block with eigenvalue
t - s, so the negative directions point from larger into smaller slope.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .quiver import Quiver, canonical_stability
from .rep import (
    Representation,
    add_tangent,
    d_moment_complex,
    edge_shapes,
    grad_energy,
    hessian_matrix,
    inf_action,
    inf_action_adjoint,
    mats_add,
    mats_norm,
    mats_scale,
    moment_complex,
    moment_minus_alpha,
    mult_i,
    pairing,
    ravel_real,
    slope_float,
    unravel_real,
    group_act,
)


@dataclass(frozen=True)
class ClassifyTols:
    cluster_tol: float = 1e-6
    block_tol: float = 1e-8
    rank_tol: float = 1e-9
    grad_tol: float = 1e-8
    grad_factor: float = 10.0


@dataclass
class CriticalProfile:
    """Eigenvalue clusters of i(mu - alpha) with their block data.

    ``eigenvalues`` is increasing; ``blocks`` matches it; ``critical_type``
    lists the same blocks by decreasing slope.  ``projectors[v]`` stacks one
    orthonormal column basis per cluster for vertex v.
    """

    eigenvalues: list[float]
    blocks: list[dict[str, int]]
    projectors: list[dict[str, np.ndarray]]
    critical_type: list[dict[str, int]]
    offdiag_residual: float
    grad_norm: float
    neg_spectrum: list[tuple[float, int]] | None = None
    neg_slice_dim: int | None = None


def _cluster(values: np.ndarray, gap: float) -> list[np.ndarray]:
    """Single-linkage clustering of sorted reals with the given gap."""
    order = np.argsort(values)
    groups: list[list[int]] = []
    for idx in order:
        if groups and values[idx] - values[groups[-1][-1]] <= gap:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return [np.array(g, dtype=int) for g in groups]


def classify_critical(x: Representation, alpha, tols: ClassifyTols | None = None) -> CriticalProfile:
    """Split a numerically critical point into its eigenvalue blocks."""
    tols = tols or ClassifyTols()
    g = mats_norm(grad_energy(x, alpha))
    if g >= tols.grad_factor * tols.grad_tol:
        raise ValueError(f"not critical: gradient norm {g:.3e} exceeds "
                         f"{tols.grad_factor * tols.grad_tol:.3e}")
    q = x.quiver
    herm = []
    for u in moment_minus_alpha(x, alpha):
        m = 1j * u
        herm.append((m + m.conj().T) / 2.0)
    vals: list[float] = []
    owners: list[tuple[int, int]] = []  # (vertex index, column)
    vecs = []
    for vi, m in enumerate(herm):
        if m.shape[0] == 0:
            vecs.append(np.zeros((0, 0)))
            continue
        w, v = np.linalg.eigh(m)
        vecs.append(v)
        for col, lam in enumerate(w):
            vals.append(float(lam))
            owners.append((vi, col))
    flat = np.array(vals)
    groups = _cluster(flat, tols.cluster_tol) if len(flat) else []

    eigenvalues = []
    blocks = []
    projectors = []
    for grp in groups:
        lam = float(np.mean(flat[grp]))
        blk = {v: 0 for v in q.vertices}
        cols: dict[int, list[int]] = {}
        for idx in grp:
            vi, col = owners[idx]
            blk[q.vertices[vi]] += 1
            cols.setdefault(vi, []).append(col)
        proj = {}
        for vi, v in enumerate(q.vertices):
            cs = sorted(cols.get(vi, []))
            proj[v] = vecs[vi][:, cs] if x.dims[v] else np.zeros((0, 0))
        eigenvalues.append(lam)
        blocks.append(blk)
        projectors.append(proj)

    offdiag = 0.0
    for e in range(q.nedges):
        h, t = q.head(e), q.tail(e)
        for j in range(len(groups)):
            for k in range(len(groups)):
                if j == k:
                    continue
                piece = projectors[k][h].conj().T @ x.mats[e] @ projectors[j][t]
                offdiag += float(np.sum(np.abs(piece) ** 2))
    offdiag = float(np.sqrt(offdiag))
    if offdiag > tols.block_tol:
        raise ValueError(f"block structure violated: off-diagonal residual {offdiag:.3e}")

    for lam, blk in zip(eigenvalues, blocks):
        s = slope_float(alpha, blk)
        if abs(lam - s) >= tols.cluster_tol:
            raise ValueError(
                f"eigenvalue {lam:.6e} does not match block slope {s:.6e}"
            )

    order = sorted(range(len(blocks)),
                   key=lambda j: -slope_float(alpha, blocks[j]))
    return CriticalProfile(
        eigenvalues=eigenvalues,
        blocks=blocks,
        projectors=projectors,
        critical_type=[blocks[j] for j in order],
        offdiag_residual=offdiag,
        grad_norm=g,
    )


# ---------------------------------------------------------------------------
# Hessian spectrum


def hessian_spectrum(x: Representation, alpha, tols: ClassifyTols | None = None):
    """Eigenvalues of the energy Hessian with multiplicities and eigenvectors.

    Negative eigenvectors are verified to satisfy the critical-point kernel
    conditions (both compact adjoints vanish) and to live in the Hom^1 blocks
    predicted by the profile.
    """
    tols = tols or ClassifyTols()
    profile = classify_critical(x, alpha, tols)
    H = hessian_matrix(x, alpha)
    sym_defect = float(np.max(np.abs(H - H.T))) if H.size else 0.0
    w, V = np.linalg.eigh((H + H.T) / 2.0)
    shapes = edge_shapes(x.quiver, x.dims)
    groups = _cluster(w, tols.cluster_tol) if len(w) else []
    spectrum = []
    for grp in groups:
        lam = float(np.mean(w[grp]))
        tangents = [unravel_real(V[:, i], shapes) for i in grp]
        if lam < -tols.cluster_tol:
            _check_negative_vectors(x, alpha, profile, lam, tangents, tols)
        spectrum.append((lam, len(grp), tangents))
    profile.neg_spectrum = [(lam, mult) for lam, mult, _ in spectrum
                            if lam < -tols.cluster_tol]
    return spectrum, sym_defect, profile


def _check_negative_vectors(x, alpha, profile: CriticalProfile, lam, tangents, tols):
    q = x.quiver
    for X in tangents:
        nX = mats_norm(X)
        a1 = mats_norm(inf_action_adjoint(x, X, flavor="compact"))
        a2 = mats_norm(inf_action_adjoint(x, mult_i(X), flavor="compact"))
        if max(a1, a2) > 1e-8 * (1.0 + nX) * max(1.0, x.norm()):
            raise ValueError(
                f"negative eigenvector fails kernel conditions ({max(a1, a2):.3e})"
            )
        kept = [np.zeros_like(m) for m in X]
        lams = profile.eigenvalues
        for j in range(len(lams)):
            for k in range(len(lams)):
                if abs((lams[k] - lams[j]) - lam) >= tols.cluster_tol:
                    continue
                for e in range(q.nedges):
                    Qh = profile.projectors[k][q.head(e)]
                    Qt = profile.projectors[j][q.tail(e)]
                    kept[e] += Qh @ (Qh.conj().T @ X[e] @ Qt) @ Qt.conj().T
        res = mats_norm([a - b for a, b in zip(X, kept)])
        if res > 1e-8 * (1.0 + nX):
            raise ValueError(
                f"negative eigenvector leaks out of its predicted blocks ({res:.3e})"
            )


# ---------------------------------------------------------------------------
# negative slices


def negative_slice_basis(x: Representation, alpha, tols: ClassifyTols | None = None):
    """Orthonormal basis of the negative slice at a two-block critical point.

    The point must have the split form (x1, 0) with x1 the block containing
    the distinguished vertex and zero complement, and alpha must be the
    canonical parameter.  The slice is the Hom^1 space from the complement
    into the x1 block, cut by the full-flavour adjoint kernel and, on doubled
    quivers, by the complex moment-map derivative.
    """
    tols = tols or ClassifyTols()
    q = x.quiver
    if q.infinity is None:
        raise ValueError("negative slice needs a distinguished vertex")
    want = canonical_stability(q, x.dims)
    got = {v: alpha[v] for v in alpha}
    if any(float(got[v]) != float(want[v]) for v in want):
        raise ValueError("negative slice requires the canonical stability parameter")
    profile = classify_critical(x, alpha, tols)
    inf_block = [j for j, blk in enumerate(profile.blocks) if blk[q.infinity] == 1]
    if len(inf_block) != 1:
        raise ValueError("not a C0 critical point: no unique block at infinity")
    j1 = inf_block[0]
    if len(profile.blocks) == 1:
        profile.neg_slice_dim = 0
        return [], profile
    P1 = profile.projectors[j1]
    P2 = {}
    for vi, v in enumerate(q.vertices):
        others = [profile.projectors[j][v] for j in range(len(profile.blocks)) if j != j1]
        others = [p for p in others if p.shape[1] > 0]
        P2[v] = np.concatenate(others, axis=1) if others else np.zeros((x.dims[v], 0))

    # the complement representation must vanish
    leak = 0.0
    for e in range(q.nedges):
        h, t = q.head(e), q.tail(e)
        piece = P2[h].conj().T @ x.mats[e] @ P2[t]
        leak += float(np.sum(np.abs(piece) ** 2))
    if np.sqrt(leak) > tols.block_tol * (1.0 + x.norm()):
        raise ValueError("not a C0 critical point: complement block is nonzero")

    coeff_shapes = []
    for e in range(q.nedges):
        coeff_shapes.append((P1[q.head(e)].shape[1], P2[q.tail(e)].shape[1]))
    m = 2 * sum(s[0] * s[1] for s in coeff_shapes)
    if m == 0:
        profile.neg_slice_dim = 0
        return [], profile

    def to_tangent(cvec):
        C = unravel_real(cvec, coeff_shapes)
        return [P1[q.head(e)] @ C[e] @ P2[q.tail(e)].conj().T for e in range(q.nedges)]

    def constraints(delta):
        rows = [ravel_real(inf_action_adjoint(x, delta, flavor="full"))]
        if q.pairing is not None:
            rows.append(ravel_real(d_moment_complex(x, delta)))
        return np.concatenate(rows)

    probe = constraints(to_tangent(np.zeros(m)))
    A = np.zeros((len(probe), m))
    unit = np.zeros(m)
    for col in range(m):
        unit[col] = 1.0
        A[:, col] = constraints(to_tangent(unit))
        unit[col] = 0.0
    if A.size:
        _, s, Vt = np.linalg.svd(A)
        smax = s[0] if len(s) else 0.0
        null = [Vt[i] for i in range(Vt.shape[0])
                if i >= len(s) or s[i] <= max(tols.rank_tol * max(smax, 1.0), 1e-12)]
    else:
        null = [np.eye(m)[i] for i in range(m)]
    basis = [to_tangent(vec) for vec in null]
    for delta in basis:
        drift = mats_norm(moment_complex(add_tangent(x, delta))) if q.pairing else 0.0
        if drift > 1e-9 * (1.0 + x.norm()) ** 2:
            raise ValueError(f"slice vector leaves the constraint set ({drift:.3e})")
    profile.neg_slice_dim = len(basis)
    return basis, profile


# ---------------------------------------------------------------------------
# slice coordinates near a point


@dataclass
class SliceDecomposition:
    u: list[np.ndarray]
    delta: list[np.ndarray]
    residual: float
    converged: bool
    iterations: int


def _rho_matrix(x: Representation) -> np.ndarray:
    """The full infinitesimal action as a real matrix (vertex -> edge coords)."""
    from .rep import vertex_shapes

    vshapes = vertex_shapes(x.quiver, x.dims)
    n = 2 * sum(s[0] * s[1] for s in vshapes)
    cols = []
    unit = np.zeros(n)
    for col in range(n):
        unit[col] = 1.0
        cols.append(ravel_real(inf_action(x, unravel_real(unit, vshapes))))
        unit[col] = 0.0
    return np.array(cols).T if cols else np.zeros((0, 0))


def slice_decompose(x: Representation, y: Representation, max_iter: int = 50,
                    tol: float = 1e-9) -> SliceDecomposition:
    """Write y = exp(u) . (x + delta) with u orthogonal to ker rho and delta
    in ker rho*; damped Newton iteration on the slice coordinates."""
    from .rep import vertex_shapes

    if x.quiver.edges != y.quiver.edges or x.dims != y.dims:
        raise ValueError("slice decomposition needs matching quiver and dims")
    q = x.quiver
    vshapes = vertex_shapes(q, x.dims)
    eshapes = edge_shapes(q, x.dims)
    R = _rho_matrix(x)
    if R.size:
        U_svd, s, Vt = np.linalg.svd(R)
        smax = s[0] if len(s) else 0.0
        rank = int(np.sum(s > 1e-10 * max(smax, 1.0)))
        U_basis = Vt[:rank].T       # (ker rho)^perp, columns
        D_basis = U_svd[:, rank:]    # ker rho*, columns
    else:
        U_basis = np.zeros((0, 0))
        D_basis = np.zeros((0, 0))
    nu, nd = U_basis.shape[1], D_basis.shape[1]

    target = ravel_real(y.mats)

    def group_of(cu):
        u = unravel_real(U_basis @ cu, vshapes) if nu else unravel_real(
            np.zeros(2 * sum(s[0] * s[1] for s in vshapes)), vshapes)
        return [scipy.linalg.expm(m) if m.size else m.copy() for m in u]

    def F(z):
        cu, cd = z[:nu], z[nu:]
        g = group_of(cu)
        delta = unravel_real(D_basis @ cd, eshapes) if nd else [
            np.zeros(s, dtype=complex) for s in eshapes]
        moved = group_act(g, add_tangent(x, delta))
        return ravel_real(moved.mats) - target

    z = np.zeros(nu + nd)
    # initial guess: project y - x onto the slice directions
    diff = ravel_real(y.mats) - ravel_real(x.mats)
    if nd:
        z[nu:] = D_basis.T @ diff
    res = F(z)
    rnorm = float(np.linalg.norm(res))
    scale = 1.0 + float(np.linalg.norm(target))
    it = 0
    h = 1e-7
    while rnorm > tol * scale and it < max_iter:
        J = np.zeros((len(res), nu + nd))
        for col in range(nu + nd):
            zp = z.copy()
            zp[col] += h
            zm = z.copy()
            zm[col] -= h
            J[:, col] = (F(zp) - F(zm)) / (2.0 * h)
        step, *_ = np.linalg.lstsq(J, -res, rcond=None)
        lam = 1.0
        improved = False
        for _ in range(30):
            cand = z + lam * step
            rc = F(cand)
            rcn = float(np.linalg.norm(rc))
            if rcn < rnorm:
                z, res, rnorm = cand, rc, rcn
                improved = True
                break
            lam *= 0.5
        it += 1
        if not improved:
            break
    cu, cd = z[:nu], z[nu:]
    u = unravel_real(U_basis @ cu, vshapes) if nu else [
        np.zeros(s, dtype=complex) for s in vshapes]
    delta = unravel_real(D_basis @ cd, eshapes) if nd else [
        np.zeros(s, dtype=complex) for s in eshapes]
    return SliceDecomposition(u=u, delta=delta, residual=rnorm / scale,
                              converged=rnorm <= tol * scale, iterations=it)


# ---------------------------------------------------------------------------
# incoming-image strata


def stratum_codim(x: Representation, k: str, rank_tol: float = 1e-9) -> int:
    """Codimension at vertex k of the span of all incoming edge images."""
    q = x.quiver
    if k not in q.vertices:
        raise ValueError(f"unknown vertex {k!r}")
    if k == q.infinity:
        raise ValueError("stratum vertex must be ordinary")
    incoming = [x.mats[e] for e in q.edges_into(k)]
    dk = x.dims[k]
    cols = [m for m in incoming if m.shape[1] > 0]
    if not cols or dk == 0:
        return dk
    M = np.concatenate(cols, axis=1)
    s = np.linalg.svd(M, compute_uv=False)
    smax = s[0] if len(s) else 0.0
    rank = int(np.sum(s > rank_tol * max(smax, 1.0))) if smax > 0 else 0
    return dk - rank


def grassmann_project(x: Representation, k: str, r: int,
                      rank_tol: float = 1e-9) -> Representation:
    """Restrict to the incoming-image span at vertex k, rotated to leading
    coordinates; drops r dimensions there."""
    got = stratum_codim(x, k, rank_tol)
    if got != int(r):
        raise ValueError(f"codimension mismatch: stratum has {got}, expected {r}")
    q = x.quiver
    dk = x.dims[k]
    keep = dk - int(r)
    cols = [x.mats[e] for e in q.edges_into(k) if x.mats[e].shape[1] > 0]
    if cols and keep > 0:
        M = np.concatenate(cols, axis=1)
        U, s, _ = np.linalg.svd(M)
        Q1 = U[:, :keep]
    else:
        Q1 = np.zeros((dk, keep), dtype=complex)
    dims = dict(x.dims)
    dims[k] = keep
    mats = []
    for e in range(q.nedges):
        m = x.mats[e]
        if q.head(e) == k:
            m = Q1.conj().T @ m
        if q.tail(e) == k:
            m = m @ Q1
        mats.append(m)
    return Representation(q, dims, mats)

"""Overlapping decompositions, partition of unity, RAS and MRAS preconditioners.

Overlap growth follows vertex adjacency: one layer adds every triangle
sharing at least one vertex with the current set. The partition of unity
interpolates normalised piecewise-linear subdomain indicators at the dof
locations (BDM: the two edge Gauss nodes, multiplier: edge midpoints,
pressure: barycenters); with at least one overlap layer the indicator of
a subdomain vanishes at every dof it does not own, which makes
sum_i R_i^T D_i R_i = Id exact.

MRAS local matrices re-discretise the problem on the overlapped subdomain
with homogeneous TVNF or NVTF conditions on the interface (the subdomain
boundary away from Gamma); edges on Gamma keep the global treatment, and
away from the interface the local rows coincide with R_i A R_i^T. A local
problem whose entire boundary carries normal-velocity constraints keeps or
gains a mean-pressure row to pin the floating pressure.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fem_space import NVTF, TVNF
from .krylov import Factorization, FactorizationError
from .quadrature import BDM_NODES


@dataclass
class Decomposition:
    n_parts: int
    elems0: list          # non-overlapping triangle sets
    elems: list           # overlapped triangle sets
    l: int
    dofs: list = None     # sorted global dof indices per subdomain
    weights: list = None  # partition-of-unity diagonal per subdomain


def decompose(T, strategy):
    """Non-overlapping partition from a strategy spec.

    Accepts 'uniform:PXxPY', 'bisect:N', 'file:PATH', or a tuple
    ('uniform', px, py) / ('bisect', n) / ('file', path). Returns one part
    id per triangle.
    """
    if isinstance(strategy, str):
        kind, _, arg = strategy.partition(":")
        if kind == "uniform":
            px, _, py = arg.partition("x")
            strategy = ("uniform", int(px), int(py))
        elif kind == "bisect":
            strategy = ("bisect", int(arg))
        elif kind == "file":
            strategy = ("file", arg)
        else:
            raise ValueError(f"unknown partition strategy {strategy!r}")
    kind = strategy[0]
    if kind == "uniform":
        return partition_uniform(T, strategy[1], strategy[2])
    if kind == "bisect":
        return partition_bisect(T, strategy[1])
    if kind == "file":
        return partition_from_file(T, strategy[1])
    raise ValueError(f"unknown partition strategy {strategy!r}")


def partition_uniform(T, px, py):
    """Assign triangles of the unit square to a px-by-py cell grid by barycenter."""
    b = T.barycenters()
    ix = np.minimum((b[:, 0] * px).astype(int), px - 1)
    iy = np.minimum((b[:, 1] * py).astype(int), py - 1)
    return iy * px + ix


def partition_bisect(T, n_parts):
    """Recursive coordinate bisection of the dual graph into n_parts parts."""
    if n_parts < 1:
        raise ValueError("need at least one part")
    b = T.barycenters()
    parts = np.zeros(T.n_triangles, dtype=np.int64)

    def split(idx, n, offset):
        if n == 1:
            parts[idx] = offset
            return
        n1 = n // 2
        ext = b[idx].max(axis=0) - b[idx].min(axis=0)
        axis = int(np.argmax(ext))
        order = idx[np.argsort(b[idx, axis], kind="stable")]
        cut = int(round(len(idx) * n1 / n))
        split(order[:cut], n1, offset)
        split(order[cut:], n - n1, offset + n1)

    split(np.arange(T.n_triangles), n_parts, 0)
    return parts


def partition_from_file(T, path):
    """Read one part id per triangle (METIS .epart compatible)."""
    parts = np.loadtxt(path, dtype=np.int64, ndmin=1)
    if len(parts) != T.n_triangles:
        raise ValueError(f"partition file has {len(parts)} entries, "
                         f"mesh has {T.n_triangles} triangles")
    counts = np.bincount(parts, minlength=parts.max() + 1)
    if np.any(counts == 0):
        raise ValueError("partition file leaves a part empty")
    return parts


def _vertex_tri_incidence(T):
    flat = T.triangles.ravel()
    order = np.argsort(flat, kind="stable")
    tri_of = order // 3
    starts = np.searchsorted(flat[order], np.arange(T.n_vertices + 1))
    return tri_of, starts


def add_overlap(T, parts, l):
    """Grow each part by l rounds of vertex-adjacent triangles."""
    if l < 1:
        raise ValueError("overlap l must be at least 1 (partition-of-unity support)")
    n_parts = int(parts.max()) + 1
    tri_of, starts = _vertex_tri_incidence(T)
    elems0, elems = [], []
    for i in range(n_parts):
        own = np.flatnonzero(parts == i)
        cur = np.zeros(T.n_triangles, dtype=bool)
        cur[own] = True
        for _ in range(l):
            vmask = np.zeros(T.n_vertices, dtype=bool)
            vmask[T.triangles[cur].ravel()] = True
            vs = np.flatnonzero(vmask)
            for v in vs:
                cur[tri_of[starts[v]:starts[v + 1]]] = True
        elems0.append(own)
        elems.append(np.flatnonzero(cur))
    return Decomposition(n_parts=n_parts, elems0=elems0, elems=elems, l=l)


def subdomain_dofs(T, dm, elems):
    """All global dofs attached to a triangle set (plus the NVTF constraint row)."""
    E = dm.n_edges
    edges = np.unique(T.tri_edges[elems])
    parts = [2 * edges, 2 * edges + 1, 2 * E + edges, 3 * E + np.asarray(elems)]
    if dm.bc_kind == NVTF:
        parts.append(np.array([dm.mean_constraint_dof]))
    return np.sort(np.concatenate(parts))


def partition_of_unity(dec, T, dm):
    """Fill dec.dofs and dec.weights; the weights of each dof sum to 1."""
    n = dm.n_total
    E = dm.n_edges
    dec.dofs = [subdomain_dofs(T, dm, dec.elems[i]) for i in range(dec.n_parts)]

    lo, hi = T.edges[:, 0], T.edges[:, 1]
    raw = []
    denom = np.zeros(n)
    for i in range(dec.n_parts):
        flag = np.zeros(T.n_vertices)
        flag[T.triangles[dec.elems0[i]].ravel()] = 1.0
        vals = np.zeros(n)
        for m, s in enumerate(BDM_NODES):
            vals[2 * np.arange(E) + m] = (1 - s) * flag[lo] + s * flag[hi]
        vals[2 * E:3 * E] = 0.5 * (flag[lo] + flag[hi])
        vals[3 * E:3 * E + dm.n_tris] = flag[T.triangles].mean(axis=1)
        if dm.bc_kind == NVTF:
            vals[dm.mean_constraint_dof] = 1.0
        v_i = vals[dec.dofs[i]]
        raw.append(v_i)
        np.add.at(denom, dec.dofs[i], v_i)
    dec.weights = [raw[i] / denom[dec.dofs[i]] for i in range(dec.n_parts)]
    return dec


def build_decomposition(T, dm, parts, l):
    return partition_of_unity(add_overlap(T, parts, l), T, dm)


@dataclass
class SchwarzPreconditioner:
    kind: str
    n: int
    dofs: list
    weights: list
    factors: list = field(repr=False)
    augmented: list = field(default=None)

    def apply(self, v):
        out = np.zeros(self.n)
        for i, (dofs, D, F) in enumerate(zip(self.dofs, self.weights, self.factors)):
            r = v[dofs]
            if self.augmented and self.augmented[i]:
                z = F.solve(np.concatenate([r, [0.0]]))[:-1]
            else:
                z = F.solve(r)
            out[dofs] += D * z
        return out


def _submatrix(A, dofs):
    return A[dofs, :][:, dofs].tocsc()


def build_ras(A, dec):
    """Restricted additive Schwarz: factorise R_i A R_i^T per subdomain."""
    factors = []
    for i in range(dec.n_parts):
        try:
            factors.append(Factorization(_submatrix(A, dec.dofs[i])))
        except FactorizationError as err:
            raise FactorizationError(f"RAS subdomain {i}: {err}") from err
    return SchwarzPreconditioner(kind="ras", n=A.shape[0], dofs=dec.dofs,
                                 weights=dec.weights, factors=factors)


def interface_edges(T, elems):
    """Edges of the subdomain boundary that are not on Gamma."""
    in_part = np.zeros(T.n_triangles + 1, dtype=bool)
    in_part[elems] = True
    in_part[-1] = False  # slot for the -1 of boundary edges
    cnt = in_part[T.edge_tris[:, 0]].astype(int) + in_part[T.edge_tris[:, 1]]
    local_bnd = cnt == 1
    return np.flatnonzero(local_bnd & ~T.boundary_edge), \
        np.flatnonzero(local_bnd & T.boundary_edge)


def mras_local_matrix(sysm, T, dec, i, ic):
    """Local matrix B_i of the MRAS preconditioner; returns (matrix, floating).

    B_i is assembled from the subdomain's own elements, so interface edges get
    the single-element rows of a genuine local boundary: the natural flux
    condition (sigma_nn = 0 for TVNF, sigma_nt = 0 for NVTF) costs nothing and
    the conjugate velocity trace is eliminated to identity (TVNF: multiplier,
    NVTF: both BDM dofs). Edges on Gamma keep the global treatment; away from
    the interface edges the rows coincide with R_i A R_i^T. A floating local
    problem (every boundary edge normal-constrained, no global mean-pressure
    row) is augmented with a local mean-pressure row.
    """
    from .system import element_triplets

    dm = sysm.dofmap
    dofs = dec.dofs[i]
    m = len(dofs)
    elems = dec.elems[i]
    iface, gamma = interface_edges(T, elems)
    # the local pressure is pinned iff some boundary edge keeps free BDM dofs
    # (a sigma_nn-type natural condition); otherwise the problem floats
    floating = ((len(gamma) == 0 or dm.bc_kind == NVTF)
                and (len(iface) == 0 or ic == NVTF))

    rows, cols, vals = element_triplets(T, dm, sysm.nu, sysm.tau, sysm.eps,
                                        elems=elems)
    rows = np.searchsorted(dofs, rows)
    cols = np.searchsorted(dofs, cols)
    trip = [rows, cols, vals]
    if dm.bc_kind == NVTF and floating:
        # keep the restricted global mean-pressure row as the local pin
        r = np.searchsorted(dofs, dm.mean_constraint_dof)
        p = np.searchsorted(dofs, 3 * dm.n_edges + np.asarray(elems))
        trip[0] = np.concatenate([trip[0], np.full(len(elems), r), p])
        trip[1] = np.concatenate([trip[1], p, np.full(len(elems), r)])
        trip[2] = np.concatenate([trip[2], T.areas[elems], T.areas[elems]])
    S = sp.coo_matrix((trip[2], (trip[0], trip[1])), shape=(m, m)).tocsr()

    if ic == TVNF:
        kill = 2 * dm.n_edges + iface
    else:
        kill = np.concatenate([2 * iface, 2 * iface + 1])
    kill = np.concatenate([kill, np.intersect1d(dm.constrained, dofs)])
    if dm.bc_kind == NVTF and not floating:
        # the local pressure is already pinned by a natural flux condition;
        # the global constraint dof passes through as identity
        kill = np.concatenate([kill, [dm.mean_constraint_dof]])
    mask = np.ones(m)
    mask[np.searchsorted(dofs, kill)] = 0.0
    S = sp.diags(mask) @ S @ sp.diags(mask) + sp.diags(1.0 - mask)

    if dm.bc_kind == TVNF and floating:
        # no global mean-pressure row exists: border with a local one
        r = np.zeros(m)
        ploc = np.searchsorted(dofs, 3 * dm.n_edges + np.asarray(elems))
        r[ploc] = T.areas[elems]
        rr = sp.csr_matrix(r)
        S = sp.bmat([[S, rr.T], [rr, None]], format="csc")
        return S.tocsc(), True
    return S.tocsc(), False


def build_mras(sysm, T, dec, ic):
    """Modified RAS: the local matrices re-discretise the problem on each
    subdomain with TVNF or NVTF conditions on the interface (the subdomain
    boundary away from Gamma); see mras_local_matrix."""
    if ic not in (TVNF, NVTF):
        raise ValueError(f"unknown interface condition {ic!r}")
    factors, augmented = [], []
    for i in range(dec.n_parts):
        S, floating = mras_local_matrix(sysm, T, dec, i, ic)
        try:
            factors.append(Factorization(S))
        except FactorizationError as err:
            raise FactorizationError(f"MRAS-{ic} subdomain {i}: {err}") from err
        augmented.append(floating)
    return SchwarzPreconditioner(kind=f"mras-{ic}", n=sysm.A.shape[0], dofs=dec.dofs,
                                 weights=dec.weights, factors=factors,
                                 augmented=augmented)

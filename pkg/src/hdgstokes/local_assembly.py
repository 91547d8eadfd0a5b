"""Per-triangle kernels for the hybrid dG Stokes discretisation (k = 1).

The BDM1 basis is built directly in physical coordinates by inverting the
6x6 matrix of dof functionals (point values of v . n_E at the two Gauss
nodes of each edge, n_E the global edge normal) against vector monomials.
Monomials are centred at the barycenter and scaled by the diameter so the
functional matrix stays well conditioned under refinement.

All edge quantities use the global edge tangent t_E (lower->higher) and
the element's outward normal; with the multiplier stored along t_E the
edge integrands are invariant under the tangent-orientation choice, so no
per-element sign bookkeeping is needed for the multiplier coupling.
"""

import numpy as np

from .quadrature import BDM_NODES, edge_gauss, tri_rule


class GeometryError(Exception):
    pass


_EDGE_QUAD = edge_gauss(3)  # degree-5 on edges, exact for every discrete term
_TRI_DATA = tri_rule(5)     # degree-5 in elements, used for manufactured loads


class ElementKernel:
    """BDM1 basis and edge geometry of one triangle."""

    def __init__(self, T, k):
        self.tri = k
        tri = T.triangles[k]
        self.verts = T.vertices[tri]
        self.area = T.areas[k]
        self.h_K = T.h_K[k]
        self.center = self.verts.mean(axis=0)
        self.scale = self.h_K

        self.edge_ids = T.tri_edges[k]
        self.signs = T.tri_edge_sign[k].astype(float)
        elo = T.vertices[T.edges[self.edge_ids, 0]]
        ehi = T.vertices[T.edges[self.edge_ids, 1]]
        d = ehi - elo
        self.edge_len = np.linalg.norm(d, axis=1)
        self.t_E = d / self.edge_len[:, None]
        self.n_E = np.column_stack([-self.t_E[:, 1], self.t_E[:, 0]])
        self.edge_lo = elo

        # dof functional matrix: rows (edge, node), columns vector monomials
        F = np.empty((6, 6))
        for loc in range(3):
            for m, s in enumerate(BDM_NODES):
                p = elo[loc] + s * d[loc]
                X = (p - self.center) / self.scale
                mono = np.array([1.0, X[0], X[1]])
                F[2 * loc + m, 0:3] = self.n_E[loc, 0] * mono
                F[2 * loc + m, 3:6] = self.n_E[loc, 1] * mono
        try:
            self.coeffs = np.linalg.solve(F, np.eye(6))
        except np.linalg.LinAlgError:
            raise GeometryError(f"degenerate triangle {k}: singular dof functional matrix")

        s = self.scale
        self.grads = np.empty((6, 2, 2))
        self.grads[:, 0, 0] = self.coeffs[1] / s
        self.grads[:, 0, 1] = self.coeffs[2] / s
        self.grads[:, 1, 0] = self.coeffs[4] / s
        self.grads[:, 1, 1] = self.coeffs[5] / s
        self.divs = (self.coeffs[1] + self.coeffs[5]) / s

    def eval_basis(self, pts):
        """Values of the 6 basis fields at physical points; shape (npts, 6, 2)."""
        X = (np.atleast_2d(pts) - self.center) / self.scale
        mono = np.column_stack([np.ones(len(X)), X[:, 0], X[:, 1]])  # (npts, 3)
        out = np.empty((len(X), 6, 2))
        out[:, :, 0] = mono @ self.coeffs[0:3]
        out[:, :, 1] = mono @ self.coeffs[3:6]
        return out

    def edge_points(self, loc, params):
        """Physical points on local edge loc at parameters from the lower vertex."""
        d = self.edge_len[loc] * self.t_E[loc]
        return self.edge_lo[loc] + np.outer(params, d)

    def outward_normal(self, loc):
        return self.signs[loc] * self.n_E[loc]

    def tangential_traces(self, loc, params):
        """(v)_t - vtilde over the 9 local dofs at edge points; shape (npts, 9)."""
        vals = self.eval_basis(self.edge_points(loc, params))
        tr = np.zeros((len(params), 9))
        tr[:, :6] = vals @ self.t_E[loc]
        tr[:, 6 + loc] = -1.0
        return tr


def bdm1_basis(T, k):
    return ElementKernel(T, k)


def local_a(kernel, nu, tau, eps):
    """9x9 element matrix of the velocity bilinear form (6 BDM + 3 multiplier dofs)."""
    if tau <= 0:
        raise ValueError("stabilisation parameter tau must be positive")
    if eps not in (-1, 1):
        raise ValueError("symmetry switch eps must be -1 or +1")
    A = np.zeros((9, 9))
    # volume term: gradients are constant on K
    G = kernel.grads.reshape(6, 4)
    A[:6, :6] = nu * kernel.area * (G @ G.T)

    params, w = _EDGE_QUAD
    for loc in range(3):
        L = kernel.edge_len[loc]
        n_out = kernel.outward_normal(loc)
        t = kernel.t_E[loc]
        dnt = np.zeros(9)
        dnt[:6] = (kernel.grads @ n_out) @ t  # (grad v . n)_t, constant per edge
        traces = kernel.tangential_traces(loc, params)
        avg = w @ traces                      # edge average of (v)_t - vtilde
        A -= nu * L * np.outer(avg, dnt)      # test traces x trial normal derivative
        A += eps * nu * L * np.outer(dnt, avg)
        A += nu * (tau / kernel.h_K) * L * np.outer(avg, avg)
    return A


def local_b(kernel):
    """Pressure row: entry j = -int_K div(phi_j); multiplier entries are zero."""
    row = np.zeros(9)
    row[:6] = -kernel.divs * kernel.area
    return row


def local_load(kernel, f):
    """Body-force load int_K f . phi_j for the 6 BDM dofs (degree-5 rule)."""
    bary, w = _TRI_DATA
    pts = bary @ kernel.verts
    fv = np.asarray(f(pts[:, 0], pts[:, 1]))
    basis = kernel.eval_basis(pts)
    return kernel.area * np.einsum("q,qc,qjc->j", w, fv, basis)


def edge_load(T, edge, g, bc):
    """Boundary-datum load of one edge of Gamma.

    TVNF loads the edge's two BDM dofs through (v)_n, NVTF its multiplier
    dof through vtilde; returns the dof values in block-local order.
    """
    if not T.boundary_edge[edge]:
        raise ValueError(f"edge {edge} is not a boundary edge")
    k = T.edge_tris[edge, 0]
    loc = int(np.flatnonzero(T.tri_edges[k] == edge)[0])
    sign = float(T.tri_edge_sign[k, loc])
    lo = T.vertices[T.edges[edge, 0]]
    hi = T.vertices[T.edges[edge, 1]]
    d = hi - lo
    L = np.linalg.norm(d)
    t_E = d / L
    n_out = sign * np.array([-t_E[1], t_E[0]])

    params, w = _EDGE_QUAD
    pts = lo + np.outer(params, d)
    n_q = np.broadcast_to(n_out, (len(params), 2))
    t_q = np.broadcast_to(t_E, (len(params), 2))
    gv = np.asarray(g(pts[:, 0], pts[:, 1], n_q, t_q))
    if bc == "tvnf":
        # v . n_out at the dof nodes is sign * Lagrange basis on the 2 Gauss nodes
        x0, x1 = BDM_NODES
        ell = np.column_stack([(params - x1) / (x0 - x1), (params - x0) / (x1 - x0)])
        return sign * L * (w * gv) @ ell
    if bc == "nvtf":
        return L * (w @ gv)
    raise ValueError(f"unknown bc {bc!r}")

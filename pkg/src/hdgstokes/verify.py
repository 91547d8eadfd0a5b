"""Exact solutions, discrete error norms, and convergence orders.

The energy norm of a (velocity, multiplier) pair is

    nu * sum_K ( |w|_{H1(K)}^2 + h_K ||grad(w) n||_{dK}^2
                 + (tau/h_K) ||Phi0((w)_t - wtilde)||_{dK}^2 )

with Phi0 the per-edge average; the h-norm adds nu^{-1/2} ||p - p_h||.
The exact multiplier is the tangential trace of u along the global edge
tangent, so in the stabilisation term of the error the exact traces
cancel and only utilde_h - Phi0(u_h . t_E) remains.

All catalogue callbacks broadcast over numpy arrays; components sit on
the last axis.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fem_space import NVTF, TVNF
from .quadrature import edge_gauss, tri_rule
from .system import manufactured_data


@dataclass
class ExactSolution:
    name: str
    bc: str
    nu: float
    u: Callable
    grad_u: Callable
    p: Callable
    lap_u: Callable
    grad_p: Callable
    f: Callable = None
    g: Callable = None


def _curl_trig_factors():
    # G(t) = (1 - cos((1-t)^2)) sin(t^2); the stream function is 100 G(x) G(y)
    def G(t):
        return (1 - np.cos((1 - t) ** 2)) * np.sin(t ** 2)

    def dG(t):
        z, zp = (1 - t) ** 2, -2 * (1 - t)
        c, cp = 1 - np.cos(z), np.sin(z) * zp
        s, sp = np.sin(t ** 2), 2 * t * np.cos(t ** 2)
        return cp * s + c * sp

    def d2G(t):
        z, zp, zpp = (1 - t) ** 2, -2 * (1 - t), 2.0
        c = 1 - np.cos(z)
        cp = np.sin(z) * zp
        cpp = np.cos(z) * zp ** 2 + np.sin(z) * zpp
        w = t ** 2
        s, sp = np.sin(w), 2 * t * np.cos(w)
        spp = 2 * np.cos(w) - 4 * t ** 2 * np.sin(w)
        return cpp * s + 2 * cp * sp + c * spp

    def d3G(t):
        z, zp, zpp = (1 - t) ** 2, -2 * (1 - t), 2.0
        c = 1 - np.cos(z)
        cp = np.sin(z) * zp
        cpp = np.cos(z) * zp ** 2 + np.sin(z) * zpp
        cppp = -np.sin(z) * zp ** 3 + 3 * np.cos(z) * zp * zpp
        w = t ** 2
        s, sp = np.sin(w), 2 * t * np.cos(w)
        spp = 2 * np.cos(w) - 4 * t ** 2 * np.sin(w)
        sppp = -12 * t * np.sin(w) - 8 * t ** 3 * np.cos(w)
        return cppp * s + 3 * cpp * sp + 3 * cp * spp + c * sppp

    return G, dG, d2G, d3G


def _stream_case(name, bc, nu, A, G, dG, d2G, d3G, p, grad_p):
    """Divergence-free u = curl(A G(x) G(y)) plus a given pressure."""

    def u(x, y):
        return np.stack([A * G(x) * dG(y), -A * dG(x) * G(y)], axis=-1)

    def grad_u(x, y):
        gxx = A * dG(x) * dG(y)
        gxy = A * G(x) * d2G(y)
        gyx = -A * d2G(x) * G(y)
        return np.stack([np.stack([gxx, gxy], axis=-1),
                         np.stack([gyx, -gxx], axis=-1)], axis=-2)

    def lap_u(x, y):
        return np.stack([A * (d2G(x) * dG(y) + G(x) * d3G(y)),
                         -A * (d3G(x) * G(y) + dG(x) * d2G(y))], axis=-1)

    exact = ExactSolution(name=name, bc=bc, nu=nu, u=u, grad_u=grad_u,
                          p=p, lap_u=lap_u, grad_p=grad_p)
    exact.f, exact.g = manufactured_data(exact, nu, bc)
    return exact


def catalogue(name, nu=1.0):
    """Manufactured cases: curl_trig (TVNF), bubble (NVTF), poiseuille (TVNF)."""
    if name == "curl_trig":
        G, dG, d2G, d3G = _curl_trig_factors()

        def p(x, y):
            return np.tan(x * y)

        def grad_p(x, y):
            s = 1 + np.tan(x * y) ** 2
            return np.stack([s * y, s * x], axis=-1)

        return _stream_case("curl_trig", TVNF, nu, 100.0, G, dG, d2G, d3G, p, grad_p)

    if name == "bubble":
        def q(t):
            return t * t * (1 - t) ** 2

        def dq(t):
            return 2 * t - 6 * t ** 2 + 4 * t ** 3

        def d2q(t):
            return 2 - 12 * t + 12 * t ** 2

        def d3q(t):
            return -12 + 24 * t

        def p(x, y):
            return x - y

        def grad_p(x, y):
            one = np.ones_like(np.asarray(x, dtype=float))
            return np.stack([one, -one], axis=-1)

        return _stream_case("bubble", NVTF, nu, 1.0, q, dq, d2q, d3q, p, grad_p)

    if name == "poiseuille":
        def u(x, y):
            return np.stack([4 * y * (1 - y), np.zeros_like(np.asarray(y, dtype=float))],
                            axis=-1)

        def grad_u(x, y):
            z = np.zeros_like(np.asarray(x, dtype=float))
            return np.stack([np.stack([z, 4 - 8 * y], axis=-1),
                             np.stack([z, z], axis=-1)], axis=-2)

        def lap_u(x, y):
            z = np.zeros_like(np.asarray(x, dtype=float))
            return np.stack([z - 8, z], axis=-1)

        def p(x, y):
            return 4 - 8 * x

        def grad_p(x, y):
            z = np.zeros_like(np.asarray(x, dtype=float))
            return np.stack([z - 8, z], axis=-1)

        exact = ExactSolution(name="poiseuille", bc=TVNF, nu=nu, u=u, grad_u=grad_u,
                              p=p, lap_u=lap_u, grad_p=grad_p)
        exact.f, exact.g = manufactured_data(exact, nu, TVNF)
        return exact

    raise ValueError(f"unknown exact solution {name!r}")


# ---------------------------------------------------------------------------
# batched element data and field evaluation

def _batch(T):
    """Stacked BDM coefficient matrices and geometry for all elements."""
    from .quadrature import BDM_NODES

    nt = T.n_triangles
    verts = T.vertices[T.triangles]              # (nt, 3, 2)
    centers = verts.mean(axis=1)
    scales = T.h_K
    elo = T.vertices[T.edges[T.tri_edges, 0]]    # (nt, 3, 2)
    ehi = T.vertices[T.edges[T.tri_edges, 1]]
    d = ehi - elo
    elen = np.linalg.norm(d, axis=2)
    t_E = d / elen[..., None]
    n_E = np.stack([-t_E[..., 1], t_E[..., 0]], axis=-1)

    F = np.empty((nt, 6, 6))
    for m, s in enumerate(BDM_NODES):
        p = elo + s * d                          # (nt, 3, 2)
        X = (p - centers[:, None, :]) / scales[:, None, None]
        mono = np.stack([np.ones_like(X[..., 0]), X[..., 0], X[..., 1]], axis=-1)
        rows = 2 * np.arange(3) + m
        F[:, rows, 0:3] = n_E[..., 0:1] * mono
        F[:, rows, 3:6] = n_E[..., 1:2] * mono
    C = np.linalg.inv(F)
    return dict(verts=verts, centers=centers, scales=scales, elo=elo, d=d,
                elen=elen, t_E=t_E, n_E=n_E, C=C,
                n_out=T.tri_edge_sign[..., None] * n_E)


def _dof_values(T, dm, x):
    e = T.tri_edges
    vd = np.empty((T.n_triangles, 6))
    vd[:, 0::2] = x[2 * e]
    vd[:, 1::2] = x[2 * e + 1]
    mult = x[2 * dm.n_edges + e]
    pres = x[3 * dm.n_edges + np.arange(dm.n_tris)]
    return vd, mult, pres


def _mono_coeffs(B, vd):
    return np.einsum("tij,tj->ti", B["C"], vd)  # (nt, 6): [1,X,Y] per component


def _eval_field(B, mc, pts):
    X = (pts - B["centers"][:, None, :]) / B["scales"][:, None, None]
    mono = np.stack([np.ones_like(X[..., 0]), X[..., 0], X[..., 1]], axis=-1)
    return np.stack([np.einsum("tqm,tm->tq", mono, mc[:, 0:3]),
                     np.einsum("tqm,tm->tq", mono, mc[:, 3:6])], axis=-1)


def _field_grad(B, mc):
    s = B["scales"]
    return np.stack([np.stack([mc[:, 1], mc[:, 2]], axis=-1),
                     np.stack([mc[:, 4], mc[:, 5]], axis=-1)], axis=-2) / s[:, None, None]


def _field_div(B, mc):
    return (mc[:, 1] + mc[:, 5]) / B["scales"]


@dataclass
class ErrorReport:
    h: float
    err_energy: float
    err_h: float
    err_l2_u: float
    err_l2_p: float
    max_div: float
    norm_u: float


def error_norms(T, dm, x, exact, tau=6.0):
    """Energy / h / L2 errors of a solution vector against an exact solution."""
    nu = exact.nu
    B = _batch(T)
    vd, mult, pres = _dof_values(T, dm, x)
    mc = _mono_coeffs(B, vd)
    gh = _field_grad(B, mc)          # (nt, 2, 2)
    div = _field_div(B, mc)

    bary, wv = tri_rule(5)
    vol_pts = np.einsum("qb,tbc->tqc", bary, B["verts"])
    xq, yq = vol_pts[..., 0], vol_pts[..., 1]
    gu = np.asarray(exact.grad_u(xq, yq))        # (nt, q, 2, 2)
    gdiff = gu - gh[:, None, :, :]
    h1_sq = T.areas * np.einsum("q,tqij->t", wv, gdiff ** 2)

    uh = _eval_field(B, mc, vol_pts)
    udiff = np.asarray(exact.u(xq, yq)) - uh
    l2u_sq = (T.areas * np.einsum("q,tqc->t", wv, udiff ** 2)).sum()
    pdiff = np.asarray(exact.p(xq, yq)) - pres[:, None]
    l2p_sq = (T.areas * np.einsum("q,tq->t", wv, pdiff ** 2)).sum()
    unorm_sq = (T.areas * np.einsum("q,tqc->t", wv, uh ** 2)).sum()

    params, we = edge_gauss(4)
    edge_sq = np.zeros(T.n_triangles)
    stab_sq = np.zeros(T.n_triangles)
    for k in range(3):
        pts = B["elo"][:, k, None, :] + params[None, :, None] * B["d"][:, k, None, :]
        geu = np.asarray(exact.grad_u(pts[..., 0], pts[..., 1]))
        gd = geu - gh[:, None, :, :]
        dn = np.einsum("tqij,tj->tqi", gd, B["n_out"][:, k])
        edge_sq += B["elen"][:, k] * np.einsum("q,tqi->t", we, dn ** 2)
        uh_e = _eval_field(B, mc, pts)
        avg_t = np.einsum("q,tq->t", we, np.einsum("tqc,tc->tq", uh_e, B["t_E"][:, k]))
        stab_sq += B["elen"][:, k] * (mult[:, k] - avg_t) ** 2

    energy_sq = nu * (h1_sq + T.h_K * edge_sq + tau / T.h_K * stab_sq).sum()
    err_energy = np.sqrt(energy_sq)
    err_l2_p = np.sqrt(l2p_sq)
    return ErrorReport(h=float(T.h_K.max()),
                       err_energy=float(err_energy),
                       err_h=float(err_energy + err_l2_p / np.sqrt(nu)),
                       err_l2_u=float(np.sqrt(l2u_sq)),
                       err_l2_p=float(err_l2_p),
                       max_div=float(np.abs(div).max()),
                       norm_u=float(np.sqrt(unorm_sq)))


def energy_norm(T, dm, x, nu=1.0, tau=6.0, parts=False):
    """Discrete |||(v, vtilde)||| of a coefficient vector (pressure part ignored).

    With parts=True returns (h1, edge, stab) sums without the nu factor:
    |||.|||^2 = nu * (h1 + edge + stab).
    """
    B = _batch(T)
    vd, mult, _ = _dof_values(T, dm, x)
    mc = _mono_coeffs(B, vd)
    gh = _field_grad(B, mc)
    h1_sq = T.areas * np.einsum("tij,tij->t", gh, gh)

    params, we = edge_gauss(3)
    edge_sq = np.zeros(T.n_triangles)
    stab_sq = np.zeros(T.n_triangles)
    for k in range(3):
        dn = np.einsum("tij,tj->ti", gh, B["n_out"][:, k])
        edge_sq += B["elen"][:, k] * np.einsum("ti,ti->t", dn, dn)
        pts = B["elo"][:, k, None, :] + params[None, :, None] * B["d"][:, k, None, :]
        uh_e = _eval_field(B, mc, pts)
        avg_t = np.einsum("q,tq->t", we, np.einsum("tqc,tc->tq", uh_e, B["t_E"][:, k]))
        stab_sq += B["elen"][:, k] * (avg_t - mult[:, k]) ** 2

    h1, edge, stab = h1_sq.sum(), (T.h_K * edge_sq).sum(), (tau / T.h_K * stab_sq).sum()
    if parts:
        return h1, edge, stab
    return float(np.sqrt(nu * (h1 + edge + stab)))


def max_divergence(T, dm, x):
    B = _batch(T)
    vd, _, _ = _dof_values(T, dm, x)
    return float(np.abs(_field_div(B, _mono_coeffs(B, vd))).max())


def interpolate(T, dm, exact):
    """Dof vector of (Pi u, Phi0 u_t, Psi0 p); the NVTF constraint entry is 0."""
    from .quadrature import BDM_NODES

    x = np.zeros(dm.n_total)
    lo = T.vertices[T.edges[:, 0]]
    d = T.vertices[T.edges[:, 1]] - lo
    L = np.linalg.norm(d, axis=1)
    t_E = d / L[:, None]
    n_E = np.column_stack([-t_E[:, 1], t_E[:, 0]])
    for m, s in enumerate(BDM_NODES):
        pts = lo + s * d
        uv = np.asarray(exact.u(pts[:, 0], pts[:, 1]))
        x[2 * np.arange(dm.n_edges) + m] = np.einsum("ec,ec->e", uv, n_E)
    params, w = edge_gauss(3)
    acc = np.zeros(dm.n_edges)
    for s, wq in zip(params, w):
        pts = lo + s * d
        uv = np.asarray(exact.u(pts[:, 0], pts[:, 1]))
        acc += wq * np.einsum("ec,ec->e", uv, t_E)
    x[2 * dm.n_edges:3 * dm.n_edges] = acc
    bary, wv = tri_rule(5)
    pts = np.einsum("qb,tbc->tqc", bary, T.vertices[T.triangles])
    x[3 * dm.n_edges:3 * dm.n_edges + dm.n_tris] = \
        np.einsum("q,tq->t", wv, np.asarray(exact.p(pts[..., 0], pts[..., 1])))
    return x


def eoc(errors, hs):
    """Estimated orders between successive levels; nan where an error vanishes."""
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    out = np.full(len(errors), np.nan)
    for j in range(1, len(errors)):
        if errors[j - 1] > 0 and errors[j] > 0:
            out[j] = np.log(errors[j - 1] / errors[j]) / np.log(hs[j - 1] / hs[j])
    return out

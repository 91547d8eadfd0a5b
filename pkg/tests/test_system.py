import numpy as np
import pytest
import scipy.io

from hdgstokes import NVTF, TVNF, build_dof_map, generate, refine_uniform
from hdgstokes import system, verify
from hdgstokes.verify import ExactSolution


def linear_exact(bc, pressure):
    """u = (y, x), p = const: divergence-free, f = 0, in the discrete space."""

    def u(x, y):
        return np.stack([np.asarray(y, float), np.asarray(x, float)], axis=-1)

    def grad_u(x, y):
        z = np.zeros_like(np.asarray(x, float))
        o = z + 1
        return np.stack([np.stack([z, o], axis=-1),
                         np.stack([o, z], axis=-1)], axis=-2)

    def zero_vec(x, y):
        z = np.zeros_like(np.asarray(x, float))
        return np.stack([z, z], axis=-1)

    ex = ExactSolution(name="linear", bc=bc, nu=1.0, u=u, grad_u=grad_u,
                       p=lambda x, y: np.full_like(np.asarray(x, float), pressure),
                       lap_u=zero_vec, grad_p=zero_vec)
    ex.f, ex.g = system.manufactured_data(ex, 1.0, bc)
    return ex


def solve_case(exact, n, eps=-1, lifted=False):
    T = generate("unit_square", n)
    dm = build_dof_map(T, exact.bc)
    vals = system.essential_values(T, dm, exact.u) if lifted else None
    sysm = system.assemble(T, dm, nu=exact.nu, tau=6.0, eps=eps,
                           f=exact.f, g=exact.g, essential_values=vals)
    return T, dm, sysm, system.solve_direct(sysm)


def test_zero_data_gives_zero_solution():
    T = generate("unit_square", 1)
    dm = build_dof_map(T, TVNF)
    sysm = system.assemble(T, dm)
    x = system.solve_direct(sysm)
    assert np.abs(x).max() < 1e-14


@pytest.mark.parametrize("bc,pressure", [(TVNF, 1.0), (NVTF, 0.0)])
@pytest.mark.parametrize("eps", [-1, 1])
def test_polynomial_exactness(bc, pressure, eps):
    ex = linear_exact(bc, pressure)
    T, dm, sysm, x = solve_case(ex, 4, eps=eps, lifted=True)
    xI = verify.interpolate(T, dm, ex)
    scale = np.linalg.norm(xI)
    assert np.linalg.norm(x - xI) <= 1e-10 * scale
    rep = verify.error_norms(T, dm, x, ex)
    assert rep.err_energy <= 1e-10 * max(scale, 1.0)
    assert rep.err_l2_u <= 1e-10
    assert rep.err_l2_p <= 1e-10


def test_sigma_nn_formula_matches_finite_differences():
    # g = sigma_nn for u=(y,x), p=1 should be 2 nu n1 n2 - 1 (hand derivation)
    ex = linear_exact(TVNF, 1.0)
    rng = np.random.default_rng(4)
    for _ in range(10):
        x, y = rng.uniform(0, 1, 2)
        th = rng.uniform(0, 2 * np.pi)
        n = np.array([np.cos(th), np.sin(th)])
        t = np.array([-n[1], n[0]])
        h = 1e-6

        def sigma(xx, yy):
            gfd = np.zeros((2, 2))
            gfd[:, 0] = (ex.u(xx + h, yy) - ex.u(xx - h, yy)) / (2 * h)
            gfd[:, 1] = (ex.u(xx, yy + h) - ex.u(xx, yy - h)) / (2 * h)
            return gfd - ex.p(xx, yy) * np.eye(2)

        g_fd = (sigma(x, y) @ n) @ n
        assert abs(ex.g(x, y, n, t) - g_fd) < 1e-8
        assert abs(ex.g(x, y, n, t) - (2 * n[0] * n[1] - 1)) < 1e-12


def test_nvtf_pressure_zero_mean():
    ex = verify.catalogue("bubble")
    T, dm, sysm, x = solve_case(ex, 8)
    p = x[3 * dm.n_edges:3 * dm.n_edges + dm.n_tris]
    assert abs(np.dot(T.areas, p)) <= 1e-12 * max(np.linalg.norm(p), 1.0)


def test_global_symmetry_eps_minus_one():
    for bc, case in [(TVNF, "poiseuille"), (NVTF, "bubble")]:
        ex = verify.catalogue(case)
        T = generate("unit_square", 4)
        dm = build_dof_map(T, bc)
        sysm = system.assemble(T, dm, eps=-1, f=ex.f, g=ex.g)
        D = sysm.A - sysm.A.T
        assert np.abs(D.data).max() if D.nnz else 0.0 <= 1e-12 * np.abs(sysm.A.data).max()


def test_constrained_rows_are_identity():
    T = generate("unit_square", 3)
    for bc in (TVNF, NVTF):
        dm = build_dof_map(T, bc)
        sysm = system.assemble(T, dm)
        A = sysm.A.tocsr()
        for c in dm.constrained:
            row = A.getrow(c)
            assert row.nnz == 1 and row.indices[0] == c and row.data[0] == 1.0
            col = A.getcol(c)
            assert col.nnz == 1
        assert np.all(sysm.rhs[dm.constrained] == 0.0)


def test_pressure_pressure_block_zero():
    T = generate("unit_square", 3)
    dm = build_dof_map(T, TVNF)
    sysm = system.assemble(T, dm)
    P = sysm.A[3 * dm.n_edges:, 3 * dm.n_edges:]
    assert P.nnz == 0 or np.abs(P.data).max() == 0.0


def test_divergence_free_invariant():
    for case in ("bubble", "poiseuille", "curl_trig"):
        ex = verify.catalogue(case)
        T, dm, sysm, x = solve_case(ex, 8)
        vel = np.linalg.norm(x[:2 * dm.n_edges])
        assert verify.max_divergence(T, dm, x) <= 1e-10 * vel


def test_coercivity_sample():
    # eps=-1, tau=6: quadratic form positive on random constrained fields,
    # with a lower bound stable under one refinement
    alphas = []
    T = generate("unit_square", 4)
    for _ in range(2):
        dm = build_dof_map(T, TVNF)
        sysm = system.assemble(T, dm, eps=-1, tau=6.0)
        rng = np.random.default_rng(7)
        nv = 3 * dm.n_edges
        ratios = []
        for _ in range(1000):
            v = np.zeros(dm.n_total)
            v[:nv] = rng.standard_normal(nv)
            v[dm.constrained] = 0.0
            q = v @ (sysm.A @ v)
            assert q >= 0.0
            ratios.append(q / verify.energy_norm(T, dm, v, nu=1.0, tau=6.0) ** 2)
        alphas.append(min(ratios))
        T = refine_uniform(T)
    assert alphas[0] > 0 and alphas[1] > 0
    assert alphas[1] >= 0.5 * alphas[0]


def test_consistency_residual_rate():
    # A x_I - rhs -> 0 at rate >= h for the interpolant of a smooth solution
    ex = verify.catalogue("curl_trig")
    T = generate("unit_square", 4)
    norms, hs = [], []
    for _ in range(3):
        dm = build_dof_map(T, ex.bc)
        sysm = system.assemble(T, dm, f=ex.f, g=ex.g)
        xI = verify.interpolate(T, dm, ex)
        xI[dm.constrained] = 0.0  # u_t = 0 on the boundary for this case
        norms.append(np.linalg.norm(sysm.A @ xI - sysm.rhs))
        hs.append(T.h_K.max())
        T = refine_uniform(T)
    slopes = verify.eoc(norms, hs)
    assert slopes[-1] >= 0.9


def test_matrix_market_dump(tmp_path):
    T = generate("unit_square", 2)
    dm = build_dof_map(T, TVNF)
    sysm = system.assemble(T, dm)
    path = tmp_path / "A.mtx"
    system.dump_matrix(sysm, path)
    header = path.read_text().splitlines()[0]
    assert header == "%%MatrixMarket matrix coordinate real general"
    B = scipy.io.mmread(path).tocsr()
    assert np.abs((B - sysm.A).data).max() if (B - sysm.A).nnz else 0.0 < 1e-15

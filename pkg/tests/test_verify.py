import math
import random

import mpmath
import numpy as np
import pytest

from hypcert import geometry as geo
from hypcert import verify
from hypcert.interval import FloatKernel, MPKernel, contains_two_pi


# -- step I: pivot selection --------------------------------------------------


def test_select_submatrix_examples():
    rows, cols = verify.select_submatrix([[0, 0, 0], [0, 5, 0], [0, 0, 0]], 1)
    assert rows == [1] and cols == [1]
    rows, cols = verify.select_submatrix([[1, 2], [2, 4]], 1)
    assert rows == [1] and cols == [1]


def test_select_submatrix_zero_pivot():
    with pytest.raises(verify.RankDeficiency):
        verify.select_submatrix([[1, 2], [2, 4]], 2)
    with pytest.raises(verify.RankDeficiency):
        verify.select_submatrix([[1.0]], 2)


def test_select_submatrix_permutation_equivariance():
    rng = np.random.default_rng(42)
    for _ in range(50):
        M = rng.uniform(-5, 5, size=(8, 8))
        h = 5
        rows, cols = verify.select_submatrix(M, h)
        pr = rng.permutation(8)
        pc = rng.permutation(8)
        M2 = M[np.ix_(pr, pc)]
        rows2, cols2 = verify.select_submatrix(M2, h)
        # row r of M appears as row pr.index(r) of M2
        inv_r = np.argsort(pr)
        inv_c = np.argsort(pc)
        assert sorted(inv_r[r] for r in rows) == rows2
        assert sorted(inv_c[c] for c in cols) == cols2


def test_select_submatrix_transpose_swaps():
    rng = np.random.default_rng(43)
    for _ in range(50):
        M = rng.uniform(-5, 5, size=(7, 7))
        rows, cols = verify.select_submatrix(M, 4)
        rows_t, cols_t = verify.select_submatrix(M.T, 4)
        assert rows == cols_t and cols == rows_t


def test_make_partition_sizes(dodec27a):
    m, o = dodec27a.m, dodec27a.o
    h = m - 3 * o
    rng = np.random.default_rng(1)
    rows = sorted(rng.choice(m, size=h, replace=False).tolist())
    cols = sorted(rng.choice(m, size=h, replace=False).tolist())
    part = verify.make_partition(dodec27a, rows, cols)
    assert len(part.e_sim) == 3 * o
    assert len(part.e_fixed) == 3 * o
    assert sorted(part.e_sim + part.e_eq) == list(range(m))
    assert sorted(part.e_fixed + part.e_var) == list(range(m))


def test_pivot_partition_gives_invertible_subsystem(dodec27a):
    p0 = [-math.cosh(float(l)) for l in dodec27a.lengths]
    M = np.array(geo.jacobian(dodec27a, geo.EdgeParams(p0)))
    h = dodec27a.m - 3 * dodec27a.o
    rows, cols = verify.select_submatrix(M, h)
    sub = M[np.ix_(rows, cols)]
    assert np.linalg.cond(sub) < 1e8


# -- step II: Krawczyk and interval Newton -----------------------------------


def test_krawczyk_scalar_instance():
    k = FloatKernel()

    def f(xs):
        return [xs[0] * xs[0] - 2.0]

    def jac(xs):
        return [[xs[0] * 2.0]]

    X = [k.interval(1.41, 1.42)]
    K = verify.krawczyk_step(f, jac, [1.4142], X, [[0.35356]], k)
    assert K[0].strictly_inside(X[0])
    assert 1.41418 <= K[0].lo and K[0].hi <= 1.41425
    assert K[0].contains(math.sqrt(2.0))


def test_krawczyk_synthetic_system_contains_true_root():
    # f = (x^2 + y^2 - 4, x*y - 1); root near (1.93, 0.517)
    k = FloatKernel()

    def f(xs):
        x, y = xs
        return [x * x + y * y - 4.0, x * y - 1.0]

    def jac(xs):
        x, y = xs
        return [[x * 2.0, y * 2.0], [y, x]]

    mpmath.mp.prec = 120
    gx, gy = mpmath.mpf("1.9"), mpmath.mpf("0.5")
    for _ in range(80):
        fx = [gx * gx + gy * gy - 4, gx * gy - 1]
        J = mpmath.matrix([[2 * gx, 2 * gy], [gy, gx]])
        d = mpmath.lu_solve(J, mpmath.matrix(fx))
        gx, gy = gx - d[0], gy - d[1]
    x0 = [float(gx), float(gy)]
    C = np.linalg.inv(np.array([[2 * x0[0], 2 * x0[1]], [x0[1], x0[0]]]))
    enc = verify._certify_root(f, jac, x0, C.tolist(), k, 1e-15)
    assert enc is not None
    assert mpmath.mpf(enc[0].lo) <= gx <= mpmath.mpf(enc[0].hi)
    assert mpmath.mpf(enc[1].lo) <= gy <= mpmath.mpf(enc[1].hi)


def test_krawczyk_scalar_mp_kernel():
    k = MPKernel(100)

    def f(xs):
        return [xs[0] * xs[0] - 2.0]

    def jac(xs):
        return [[xs[0] * 2.0]]

    enc = verify._certify_root(f, jac, [1.41421356237], [[0.35355339]], k, 1e-11)
    assert enc is not None
    mpmath.mp.prec = 150
    assert mpmath.mpf(enc[0].lo_float()) <= mpmath.sqrt(2) <= mpmath.mpf(enc[0].hi_float())


def test_interval_newton_scalar():
    k = FloatKernel()

    def f(xs):
        return [xs[0] * xs[0] - 2.0]

    def jac(xs):
        return [[xs[0] * 2.0]]

    enc = verify._certify_root(
        f, jac, [1.41421356], [[0.35355339]], k, 1e-8, method="newton"
    )
    assert enc is not None
    assert enc[0].contains(math.sqrt(2.0))


# -- bootstrap ----------------------------------------------------------------


def test_bootstrap_fixture_residual(dodec27a):
    init = [-math.cosh(float(l)) for l in dodec27a.lengths]
    values, resid = verify.bootstrap_solve(dodec27a, init=init)
    assert resid < 1e-9


def test_bootstrap_exact_init_fixed_point(dodec27a):
    init = [-math.cosh(float(l)) for l in dodec27a.lengths]
    values, resid = verify.bootstrap_solve(dodec27a, init=init)
    for a, b in zip(values, init):
        assert abs(a - b) < 1e-12


def test_bootstrap_s3_fails(s3):
    with pytest.raises(verify.SolveFailure):
        verify.bootstrap_solve(s3, init=[-2.0] * 6, max_iters=60)


def test_refine_reduces_subsystem_residual(dodec27a):
    rng = random.Random(0)
    p0 = [
        -math.cosh(float(l) * (1 + 1e-5 * rng.uniform(-1, 1)))
        for l in dodec27a.lengths
    ]
    M = np.array(geo.jacobian(dodec27a, geo.EdgeParams(list(p0))))
    h = dodec27a.m - 3 * dodec27a.o
    rows, cols = verify.select_submatrix(M, h)
    part = verify.make_partition(dodec27a, rows, cols)
    before = np.max(np.abs(verify._residual_vec(dodec27a, p0)[part.e_eq]))
    refined = verify.newton_refine_subsystem(dodec27a, p0, part)
    after = np.max(np.abs(verify._residual_vec(dodec27a, refined)[part.e_eq]))
    assert after < before


# -- steps III/IV and the pipeline -------------------------------------------


def test_s3_step_four_fails(s3):
    k = FloatKernel()
    part = verify.Partition(
        e_sim=list(range(6)), e_eq=[], e_fixed=list(range(6)), e_var=[]
    )
    box = verify.CertifiedBox(
        nu=[k.point(-2.0) for _ in range(6)],
        theta=None,
        partition=part,
        precision=53,
    )
    with pytest.raises(verify.StepFailure) as err:
        verify.check_realization_and_angles(s3, box, kernel=k)
    assert err.value.step == 4


def test_widened_box_conservative(dodec27a, verified27a):
    # inflating the certified box a million-fold may only flip checks
    # from pass to fail, never crash or upgrade
    k = FloatKernel()
    box0 = verified27a.box
    wide = []
    for x in box0.nu:
        c = x.mid()
        w = max(x.width(), 1e-14) * 1e6
        wide.append(k.interval(c - w, c + w))
    box = verify.CertifiedBox(
        nu=wide, theta=None, partition=box0.partition, precision=53
    )
    try:
        verify.check_realization_and_angles(dodec27a, box, kernel=k)
    except verify.StepFailure as exc:
        assert exc.step in (3, 4)


def test_pipeline_verifies_fixture(verified27a):
    res = verified27a
    assert res.verified and res.failed_step == 0
    assert all(k in res.statuses for k in (1, 2, 3, 4, 5))
    box = res.box
    assert all(x.is_finite() for x in box.nu)
    assert max(x.width() for x in box.nu) < 1e-8
    assert all(contains_two_pi(th) for th in box.theta)
    loose_widths = [box.theta[e].width() for e in box.partition.e_sim]
    assert max(loose_widths) < 1e-6


def test_pipeline_point_intervals_on_fixed(verified27a):
    box = verified27a.box
    for e in box.partition.e_fixed:
        assert box.nu[e].width() == 0.0


def test_pipeline_perturbed_fails_step_two(dodec27a):
    pert = [float(l) + 0.5 for l in dodec27a.lengths]
    res = verify.run_pipeline(dodec27a, lengths=pert)
    assert not res.verified
    assert res.failed_step == 2
    assert res.box is None


def test_pipeline_small_perturbation_never_verifies(dodec27a):
    pert = [float(l) + 2e-4 for l in dodec27a.lengths]
    res = verify.run_pipeline(dodec27a, lengths=pert)
    assert not res.verified
    assert res.failed_step in (2, 4)


def test_pipeline_s3_fails(s3):
    res = verify.run_pipeline(s3, lengths=[1.0] * 6)
    assert not res.verified
    assert res.failed_step == 1
    assert res.box is None


def test_pipeline_interval_newton(dodec27a):
    res = verify.run_pipeline(dodec27a, method="newton")
    assert res.verified
    assert max(x.width() for x in res.box.nu) < 1e-8


def test_pipeline_refine_flag(dodec27a):
    res = verify.run_pipeline(dodec27a, refine=True)
    assert res.verified


def test_pipeline_mp_precision(dodec27a):
    res = verify.run_pipeline(dodec27a, precision=80)
    assert res.verified
    assert max(x.width() for x in res.box.nu) < 1e-16


def test_no_certificate_after_failure(dodec27a):
    pert = [float(l) + 0.3 for l in dodec27a.lengths]
    res = verify.run_pipeline(dodec27a, lengths=pert)
    assert not res.verified
    # a failed run never carries a completed box with loops
    assert res.box is None or res.box.loops is None

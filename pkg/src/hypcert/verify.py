"""The certification pipeline.

Five stages turn approximate edge lengths into a rigorous certificate:

I    pick a full-rank subsystem of the edge equations (full-pivot
     elimination on the float Jacobian, expecting corank three per
     vertex) and split the edges into loose/kept equations and
     fixed/variable parameters;
II   enclose a solution of the kept equations over the variable
     parameters with the Krawczyk operator (or the interval Newton
     operator) and epsilon inflation;
III  verify the realization conditions of every simplex over the box;
IV   enclose the angle sums of the loose edges and check they contain a
     full turn;
V    exclude gimbal lock, which upgrades the loose equations to exact
     ones (delegated to `gimbal`).

A conservative failure at any stage aborts the pipeline; no certificate
is ever produced from a failed stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import gimbal
from . import scalars as sc
from .interval import FloatKernel, contains_two_pi, kernel_for_precision
from .triangulation import vertex_link_hexagon_complex

__all__ = [
    "StepFailure",
    "Partition",
    "CertifiedBox",
    "PipelineResult",
    "bootstrap_solve",
    "select_submatrix",
    "make_partition",
    "krawczyk_step",
    "krawczyk_certify",
    "interval_newton_certify",
    "check_realization_and_angles",
    "run_pipeline",
    "STEP_NAMES",
]

STEP_NAMES = ("subsystem", "enclosure", "realization", "angle-sums", "gimbal")


class StepFailure(RuntimeError):
    def __init__(self, step, message):
        super().__init__(f"step {step} ({STEP_NAMES[step - 1]}): {message}")
        self.step = step
        self.message = message


@dataclass
class Partition:
    e_sim: list  # loose edges, |.| = 3o
    e_eq: list  # kept equations, |.| = m - 3o
    e_fixed: list  # frozen parameters, |.| = 3o
    e_var: list  # free parameters, |.| = m - 3o

    def check(self, m, o):
        assert sorted(self.e_sim + self.e_eq) == list(range(m))
        assert sorted(self.e_fixed + self.e_var) == list(range(m))
        assert len(self.e_sim) == 3 * o and len(self.e_fixed) == 3 * o


@dataclass
class CertifiedBox:
    nu: list  # interval per edge, canonical order (points on e_fixed)
    theta: list  # interval angle sum per edge
    partition: Partition
    statuses: dict = field(default_factory=dict)
    loops: list = None
    precision: int = 53


@dataclass
class PipelineResult:
    verified: bool
    failed_step: int  # 0 if verified
    statuses: dict
    box: CertifiedBox = None
    partition: Partition = None
    p0: list = None
    residual: float = None


# ---------------------------------------------------------------------------
# unverified bootstrap (stands in for an external geometrization solver)
# ---------------------------------------------------------------------------


class SolveFailure(RuntimeError):
    pass


def _residual_vec(tri, values):
    sums = geo.angle_sums(tri, geo.EdgeParams(values))
    return np.array([s - sc.TWO_PI_FLOAT for s in sums])


def bootstrap_solve(tri, init=None, max_iters=100, seed=0, tol=1e-9):
    """Damped Gauss-Newton on the full residual (Theta_e - 2pi)_e.

    The Jacobian has corank three per vertex at solutions, so steps use
    the pseudo-inverse.  Unverified by design: its output is only a
    candidate for certification.  Returns (values, residual_inf_norm).
    """
    m = tri.m
    if init is not None:
        values = [float(v) for v in init]
        if len(values) != m:
            raise SolveFailure(f"expected {m} initial parameters")
    else:
        rng = np.random.default_rng(seed)
        base = -math.cosh(1.0)
        values = [base * (1.0 + 0.01 * rng.uniform(-1, 1)) for _ in range(m)]

    def realized(vals):
        try:
            geo.EdgeParams(vals)
            for t in range(tri.n_tets):
                geo.simplex_data(tri, geo.EdgeParams(vals), t)
            return True
        except geo.RealizationError:
            return False

    if not realized(values):
        raise SolveFailure("initial parameters do not realize every simplex")
    r = _residual_vec(tri, values)
    best = float(np.max(np.abs(r)))
    for _ in range(max_iters):
        if best < tol:
            break
        J = np.array(geo.jacobian(tri, geo.EdgeParams(values)), dtype=float)
        step, *_ = np.linalg.lstsq(J, -r, rcond=1e-10)
        t = 1.0
        improved = False
        for _bt in range(30):
            cand = [v + t * s for v, s in zip(values, step)]
            if all(v < -1.0 for v in cand) and realized(cand):
                rc = _residual_vec(tri, cand)
                nc = float(np.max(np.abs(rc)))
                if nc < best:
                    values, r, best = cand, rc, nc
                    improved = True
                    break
            t *= 0.5
        if not improved:
            break
    if best >= tol:
        raise SolveFailure(f"no convergence: residual {best:.3e} >= {tol:.1e}")
    return values, best


def newton_refine_subsystem(tri, values, partition, iters=3):
    """Plain Newton on the kept equations over the variable parameters.

    Optional pre-certification polish; must strictly reduce the float
    residual of the subsystem or it returns the input unchanged.
    """
    vals = list(values)

    def sub_residual(v):
        r = _residual_vec(tri, v)
        return r[partition.e_eq]

    r = sub_residual(vals)
    best = float(np.max(np.abs(r))) if len(r) else 0.0
    for _ in range(iters):
        if not len(partition.e_eq):
            break
        J = np.array(geo.jacobian(tri, geo.EdgeParams(vals)), dtype=float)
        Jsub = J[np.ix_(partition.e_eq, partition.e_var)]
        try:
            step = np.linalg.solve(Jsub, -r)
        except np.linalg.LinAlgError:
            break
        cand = list(vals)
        for i, e in enumerate(partition.e_var):
            cand[e] += step[i]
        if not all(v < -1.0 for v in cand):
            break
        try:
            rc = sub_residual(cand)
        except geo.RealizationError:
            break
        nc = float(np.max(np.abs(rc)))
        if nc >= best:
            break
        vals, r, best = cand, rc, nc
    return vals


# ---------------------------------------------------------------------------
# step I: full-rank subsystem by full-pivot elimination
# ---------------------------------------------------------------------------


class RankDeficiency(RuntimeError):
    pass


def select_submatrix(M, h):
    """h rounds of full pivoting; returns the chosen (rows, cols).

    Each round takes the largest-magnitude entry outside the used rows
    and columns (ties: lowest row, then column), clears its column with
    row operations and its row with column operations, and records the
    indices.  The submatrix of the original matrix on the returned index
    sets is the certification target.
    """
    A = np.array(M, dtype=float, copy=True)
    n_rows, n_cols = A.shape
    if h > min(n_rows, n_cols):
        raise RankDeficiency(f"cannot select {h} pivots from {A.shape}")
    rows, cols = [], []
    row_mask = np.ones(n_rows, dtype=bool)
    col_mask = np.ones(n_cols, dtype=bool)
    for _ in range(h):
        B = np.abs(A)
        B[~row_mask, :] = -1.0
        B[:, ~col_mask] = -1.0
        r, c = np.unravel_index(np.argmax(B), B.shape)
        if A[r, c] == 0.0:
            raise RankDeficiency("zero pivot before filling the expected rank")
        piv = A[r, c]
        factors = A[:, c] / piv
        factors[r] = 0.0
        A -= np.outer(factors, A[r, :])
        A[:, c] = 0.0
        A[r, :] = 0.0
        A[r, c] = piv
        rows.append(int(r))
        cols.append(int(c))
        row_mask[r] = False
        col_mask[c] = False
    return sorted(rows), sorted(cols)


def make_partition(tri, rows, cols):
    m, o = tri.m, tri.o
    e_eq = sorted(rows)
    e_var = sorted(cols)
    e_sim = [e for e in range(m) if e not in set(e_eq)]
    e_fixed = [e for e in range(m) if e not in set(e_var)]
    part = Partition(e_sim=e_sim, e_eq=e_eq, e_fixed=e_fixed, e_var=e_var)
    part.check(m, o)
    return part


# ---------------------------------------------------------------------------
# step II: Krawczyk / interval Newton with epsilon inflation
# ---------------------------------------------------------------------------


def krawczyk_step(f_iv, jac_iv, x0, X, C, kernel):
    """One Krawczyk operator evaluation.

    K(x0, X) = x0 - C f(x0) + (I - C J(X)) (X - x0), everything except
    the float vectors x0 and C evaluated in interval arithmetic.
    """
    n = len(x0)
    x0_iv = [kernel.point(v) for v in x0]
    fx0 = f_iv(x0_iv)
    JX = jac_iv(X)
    K = []
    for i in range(n):
        acc = x0_iv[i]
        for j in range(n):
            acc = acc - kernel.point(C[i][j]) * fx0[j]
        for j in range(n):
            # (I - C J)_ij
            entry = None
            for k in range(n):
                term = kernel.point(C[i][k]) * JX[k][j]
                entry = term if entry is None else entry + term
            delta = (kernel.point(1.0) if i == j else kernel.point(0.0)) - entry
            acc = acc + delta * (X[j] - kernel.point(x0[j]))
        K.append(acc)
    return K


def _interval_gauss_solve(A, b, kernel):
    """Solve A x = b with interval Gaussian elimination, no pivot swaps.

    Fails (returns None) if any pivot interval straddles zero; intended
    for well-preconditioned systems where A encloses the identity.
    """
    n = len(b)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for k in range(n):
        piv = M[k][k]
        if not (sc.surely_gt(piv, 0.0) or sc.surely_lt(piv, 0.0)):
            return None
        for i in range(k + 1, n):
            factor = M[i][k] / piv
            for j in range(k, n + 1):
                M[i][j] = M[i][j] - factor * M[k][j]
    xs = [None] * n
    for i in range(n - 1, -1, -1):
        acc = M[i][n]
        for j in range(i + 1, n):
            acc = acc - M[i][j] * xs[j]
        xs[i] = acc / M[i][i]
    return xs


def interval_newton_step(f_iv, jac_iv, x0, X, C, kernel):
    """Interval Newton operator via a preconditioned interval solve."""
    n = len(x0)
    x0_iv = [kernel.point(v) for v in x0]
    fx0 = f_iv(x0_iv)
    JX = jac_iv(X)
    A = []
    rhs = []
    for i in range(n):
        row = []
        for j in range(n):
            entry = None
            for k in range(n):
                term = kernel.point(C[i][k]) * JX[k][j]
                entry = term if entry is None else entry + term
            row.append(entry)
        A.append(row)
        acc = None
        for k in range(n):
            term = kernel.point(C[i][k]) * fx0[k]
            acc = term if acc is None else acc + term
        rhs.append(acc)
    sol = _interval_gauss_solve(A, rhs, kernel)
    if sol is None:
        return None
    return [x0_iv[i] - sol[i] for i in range(n)]


def _certify_root(f_iv, jac_iv, x0, C, kernel, residual_scale, method="krawczyk",
                  max_rounds=20, refine_rounds=5):
    """Epsilon inflation around x0 until the operator maps the box into
    its own interior; then contract.  Returns the final enclosure list."""
    n = len(x0)
    step_fn = krawczyk_step if method == "krawczyk" else interval_newton_step
    half = max(1e-14, 10.0 * residual_scale)
    for _ in range(max_rounds):
        X = [kernel.interval(v - half, v + half) for v in x0]
        try:
            K = step_fn(f_iv, jac_iv, x0, X, C, kernel)
        except (geo.RealizationError, ArithmeticError, ValueError):
            K = None
        if K is not None and all(k.strictly_inside(x) for k, x in zip(K, X)):
            enclosure = [k.intersect(x) for k, x in zip(K, X)]
            for _r in range(refine_rounds):
                try:
                    K2 = step_fn(f_iv, jac_iv, x0, enclosure, C, kernel)
                except (geo.RealizationError, ArithmeticError, ValueError):
                    break
                if K2 is None:
                    break
                new = []
                shrunk = False
                for k2, prev in zip(K2, enclosure):
                    if not k2.intersects(prev):
                        break
                    cut = k2.intersect(prev)
                    if cut.width() < prev.width():
                        shrunk = True
                    new.append(cut)
                else:
                    enclosure = new
                    if not shrunk:
                        break
                    continue
                break
            return enclosure
        half *= 4.0
    return None


def _subsystem_functions(tri, partition, fixed_values, kernel):
    """Interval residual and Jacobian of the kept equations over the
    variable parameters, with the fixed parameters frozen at floats."""
    e_var = partition.e_var
    e_eq = partition.e_eq
    fixed_iv = {e: kernel.point(fixed_values[e]) for e in partition.e_fixed}
    two_pi = kernel.two_pi()

    def full_params(xs):
        nu = [None] * tri.m
        for e, x in zip(e_var, xs):
            nu[e] = x
        for e, v in fixed_iv.items():
            nu[e] = v
        return geo.EdgeParams(nu)

    def f_iv(xs):
        sums = geo.angle_sums(tri, full_params(xs))
        return [sums[e] - two_pi for e in e_eq]

    def jac_iv(xs):
        M = geo.jacobian(tri, full_params(xs))
        return [[M[r][c] for c in e_var] for r in e_eq]

    return f_iv, jac_iv, full_params


def krawczyk_certify(tri, p0, partition, kernel=None, method="krawczyk"):
    """Steps II of the pipeline: enclose a solution of the kept equations.

    p0: float edge parameters approximately solving the system.  Returns
    a CertifiedBox with point intervals on the fixed edges; raises
    StepFailure on no containment.
    """
    if kernel is None:
        kernel = FloatKernel()
    m, o = tri.m, tri.o
    q = m - 3 * o
    f_iv, jac_iv, full_params = _subsystem_functions(tri, partition, p0, kernel)
    x0 = [p0[e] for e in partition.e_var]

    if q > 0:
        try:
            Jf = np.array(geo.jacobian(tri, geo.EdgeParams(list(p0))), dtype=float)
        except geo.RealizationError as exc:
            raise StepFailure(2, f"approximate point not realized: {exc}")
        Jsub = Jf[np.ix_(partition.e_eq, partition.e_var)]
        try:
            C = np.linalg.inv(Jsub)
        except np.linalg.LinAlgError:
            raise StepFailure(2, "selected subsystem numerically singular")
        resid = float(
            np.max(np.abs(_residual_vec(tri, list(p0))[partition.e_eq]))
        )
        enclosure = _certify_root(
            f_iv, jac_iv, x0, C.tolist(), kernel, resid, method=method
        )
        if enclosure is None:
            raise StepFailure(
                2,
                "no interval containment: the candidate is not close enough "
                "to a solution of the kept equations",
            )
    else:
        enclosure = []

    nu = [None] * m
    for e, x in zip(partition.e_var, enclosure):
        nu[e] = x
    for e in partition.e_fixed:
        nu[e] = kernel.point(p0[e])
    return CertifiedBox(
        nu=nu,
        theta=None,
        partition=partition,
        statuses={2: "contained"},
        precision=kernel.precision,
    )


def interval_newton_certify(tri, p0, partition, kernel=None):
    return krawczyk_certify(tri, p0, partition, kernel=kernel, method="newton")


# ---------------------------------------------------------------------------
# steps III and IV
# ---------------------------------------------------------------------------


def check_realization_and_angles(tri, box, kernel=None):
    """Interval realization for every simplex plus loose angle sums.

    Fills box.theta and records step statuses; raises StepFailure when a
    simplex cannot be proven realized or a loose angle-sum enclosure does
    not contain a full turn.
    """
    if kernel is None:
        kernel = kernel_for_precision(box.precision)
    params = geo.EdgeParams(box.nu)
    data = []
    for t in range(tri.n_tets):
        g = geo.gram_matrix(tri, params, t)
        cof = geo.cofactors(g)
        ok, reason = geo.realization_check(g, cof)
        if not ok:
            raise StepFailure(3, f"tet {t}: {reason}")
        try:
            theta = {
                e: geo.dihedral_angle(g, cof, *geo.opposite_edge(*e))
                for e in ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
            }
        except geo.RealizationError as exc:
            raise StepFailure(3, str(exc))
        data.append(geo.GramData(t, g, cof, theta))
    box.statuses[3] = "all simplices realized"
    sums = geo.angle_sums(tri, params, data=data)
    box.theta = sums
    for e in box.partition.e_sim:
        if not contains_two_pi(sums[e]):
            raise StepFailure(
                4, f"angle sum of loose edge {e} does not contain a full turn"
            )
    box.statuses[4] = "loose angle sums contain full turns"
    box._gram_data = data
    return box


# ---------------------------------------------------------------------------
# the full pipeline
# ---------------------------------------------------------------------------


def run_pipeline(
    tri,
    lengths=None,
    precision=53,
    method="krawczyk",
    refine=False,
    seed=0,
    solver_max_iters=100,
):
    """Run steps I-V and collect a PipelineResult.

    With a lengths section the given values are certified as-is (after
    the optional subsystem Newton polish); without one, the unverified
    bootstrap solver must first find a candidate.
    """
    kernel = kernel_for_precision(precision)
    statuses = {}
    if lengths is None:
        lengths = tri.lengths
    try:
        if lengths is not None:
            p0 = [-math.cosh(float(l)) for l in lengths]
            resid = float(np.max(np.abs(_residual_vec(tri, p0))))
        else:
            p0, resid = bootstrap_solve(
                tri, max_iters=solver_max_iters, seed=seed
            )
    except (SolveFailure, geo.RealizationError) as exc:
        statuses["bootstrap"] = f"failed: {exc}"
        statuses[1] = "failed: no usable candidate parameters"
        return PipelineResult(False, 1, statuses)
    statuses["bootstrap"] = f"residual {resid:.3e}"

    # step I
    h = tri.m - 3 * tri.o
    if h < 0:
        statuses[1] = (
            f"failed: {tri.m} edges cannot carry {3 * tri.o} loose ones"
        )
        return PipelineResult(False, 1, statuses, p0=p0, residual=resid)
    try:
        params0 = geo.EdgeParams(list(p0))
        M = geo.jacobian(tri, params0)
        rows, cols = select_submatrix(M, h)
        partition = make_partition(tri, rows, cols)
    except (geo.RealizationError, RankDeficiency) as exc:
        statuses[1] = f"failed: {exc}"
        return PipelineResult(False, 1, statuses, p0=p0, residual=resid)
    statuses[1] = f"kept {h} equations of {tri.m}"

    if refine:
        p0 = newton_refine_subsystem(tri, p0, partition)

    # step II
    try:
        box = krawczyk_certify(tri, p0, partition, kernel=kernel, method=method)
    except StepFailure as exc:
        statuses[2] = f"failed: {exc.message}"
        return PipelineResult(False, 2, statuses, partition=partition, p0=p0,
                              residual=resid)
    statuses[2] = "solution of kept equations enclosed"

    # steps III and IV
    try:
        box = check_realization_and_angles(tri, box, kernel=kernel)
    except StepFailure as exc:
        statuses[exc.step] = f"failed: {exc.message}"
        return PipelineResult(False, exc.step, statuses, partition=partition,
                              box=box, p0=p0, residual=resid)
    statuses[3] = box.statuses[3]
    statuses[4] = box.statuses[4]

    # step V
    try:
        labels = gimbal.CocycleLabels(
            tri, box.nu, data=getattr(box, "_gram_data", None)
        )
        links = [vertex_link_hexagon_complex(tri, k) for k in range(tri.o)]
        theta_boxes = [box.theta[e] for e in partition.e_sim]
        verdict = gimbal.gimbal_lock_check(
            tri, labels, partition.e_sim, theta_boxes, links=links
        )
    except (geo.RealizationError, gimbal.GimbalLoopError) as exc:
        statuses[5] = f"failed: {exc}"
        return PipelineResult(False, 5, statuses, partition=partition, box=box,
                              p0=p0, residual=resid)
    if not verdict.avoided:
        statuses[5] = f"failed: {verdict.reason}"
        return PipelineResult(False, 5, statuses, partition=partition, box=box,
                              p0=p0, residual=resid)
    statuses[5] = verdict.reason
    box.statuses[5] = verdict.reason
    box.loops = verdict.loops
    return PipelineResult(True, 0, statuses, box=box, partition=partition,
                          p0=p0, residual=resid)

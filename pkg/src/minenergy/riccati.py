"""Residuals, canonical solutions, and the commuting-case solution set of
the steering Riccati equation.

The equation has the opposite linear-term sign of the regulator one:
in ambient coordinates 0 = A*R + RA + R BB* R, and in the reachability
metric the same identity for P with R = Q^{-1} P.  The inverse Gramian
and the metric identity are the canonical solutions, the identity being
maximal; when the state operator is selfadjoint and commutes with a
coercive BB*, the solution set is exactly the orthogonal projections
(in the reachability metric) commuting with the restricted operator.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .energy import AuxiliaryCost, value_auxiliary, value_finite
from .errors import (
    BadParameterError,
    NotCoercive,
    NotCommutingModel,
    NotSpectral,
    NotSymmetric,
    OutOfRange,
    RankDeficient,
    TooManySolutions,
    WrongForm,
)
from .gramian import gramian_finite, h_space
from .operators import is_symmetric, symmetrize

DEFAULT_SEED = 0x5EED

#: residual at or below this counts as an exact solution
SOLUTION_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class CandidateSolution:
    """Symmetric PSD candidate for the steering Riccati equation.

    X_form candidates act on the ambient space; H_form candidates act on
    the reachability space but are stored in ambient coordinates, so
    their metric-symmetry involves the Gramian and is checked by the
    operations that receive one.
    """

    form: str
    matrix: np.ndarray

    def __post_init__(self):
        if self.form not in ("X_form", "H_form"):
            raise WrongForm(f"unknown candidate form {self.form!r}")
        matrix = np.asarray(self.matrix, dtype=float)
        if self.form == "X_form" and not is_symmetric(matrix):
            raise NotSymmetric("ambient-form candidates must be symmetric")
        object.__setattr__(self, "matrix", matrix)


@dataclass(frozen=True)
class SolutionReport:
    residual_norm: float
    is_solution: bool
    maximality_gap: float | None = None
    comparison_margin: float | None = None


def _require_form(cand, form):
    if cand.form != form:
        raise WrongForm(f"expected a {form} candidate, got {cand.form}")


def _full_rank_h(p):
    h = h_space(p)
    if not h.full_rank:
        raise RankDeficient("reachability-metric operations need a full-rank "
                            "infinite-horizon Gramian")
    return h


def are_residual_X(p, R):
    """Scaled operator residual of the ambient-form equation
    A*R + RA + R BB* R = 0."""
    _require_form(R, "X_form")
    r = R.matrix
    res = p.A.T @ r + r @ p.A + r @ p.BBt @ r
    return float(np.linalg.norm(res, "fro") / (1.0 + np.linalg.norm(r, "fro")))


def are_residual_H(p, h, P):
    """Scaled max bilinear-form residual of the metric-form equation.

    Evaluated on canonical basis pairs via L = Q^{-1} P:
    -A*L - L*A - L*BB*L, entrywise max, scaled by 1 + |P|.
    """
    _require_form(P, "H_form")
    if not h.full_rank:
        raise RankDeficient("metric-form residual needs a full-rank Gramian")
    lam = h.q_pinv_matrix @ P.matrix
    res = -(p.A.T @ lam) - lam.T @ p.A - lam.T @ p.BBt @ lam
    return float(np.max(np.abs(res)) / (1.0 + np.linalg.norm(P.matrix, "fro")))


def verify_canonical_solutions(p):
    """Check the two canonical solutions: the inverse Gramian in ambient
    form and the metric identity.  Returns their reports as a pair."""
    h = _full_rank_h(p)
    r_canon = CandidateSolution("X_form", h.q_pinv_matrix)
    x_res = are_residual_X(p, r_canon)
    p_canon = CandidateSolution("H_form", np.eye(p.n))
    h_res = are_residual_H(p, h, p_canon)
    return (
        SolutionReport(residual_norm=x_res, is_solution=x_res <= SOLUTION_RESIDUAL_TOL),
        SolutionReport(residual_norm=h_res, is_solution=h_res <= SOLUTION_RESIDUAL_TOL),
    )


def _h_metric_matrix(h, T):
    """Congruence transform S^{-1} T S with S the Gramian square root,
    mapping a reachability-space operator to orthonormal coordinates."""
    return h.sqrt_pinv.inverse_on_range @ T @ h.sqrt_Q


def commuting_residual(p, P, hspace=None):
    """Metric-norm residual of A0 P + P A0 - 2 P A0 P for commuting
    coercive models (A0 is the state operator itself)."""
    if not (p.commuting and p.coercive):
        raise NotCommutingModel("commuting residual needs a selfadjoint state "
                                "operator commuting with a coercive BB*")
    _require_form(P, "H_form")
    h = hspace if hspace is not None else _full_rank_h(p)
    a0, pm = p.A, P.matrix
    res = a0 @ pm + pm @ a0 - 2.0 * (pm @ a0 @ pm)
    res_h = _h_metric_matrix(h, res)
    a_scale = np.linalg.norm(_h_metric_matrix(h, a0), 2)
    return float(np.linalg.norm(res_h, 2) / (1.0 + a_scale))


def projection_family_2d(a, sign):
    """Non-diagonal rank-one projection on a two-dimensional eigenspace:
    [[a, s*sqrt(a(1-a))], [s*sqrt(a(1-a)), 1-a]] with s = +-1."""
    if not 0.0 < a < 1.0:
        raise OutOfRange(f"family parameter must lie in (0, 1), got {a}")
    if sign not in (1, -1, 1.0, -1.0):
        raise OutOfRange("sign must be +1 or -1")
    off = float(sign) * np.sqrt(a * (1.0 - a))
    return np.array([[a, off], [off, 1.0 - a]])


def _eigenspace_blocks(lambdas, rel_tol=1e-12):
    """Consecutive index blocks of equal eigenvalues (input is sorted)."""
    blocks, start = [], 0
    for i in range(1, lambdas.size + 1):
        if i == lambdas.size or abs(lambdas[i] - lambdas[start]) > rel_tol * (
                1.0 + abs(lambdas[start])):
            blocks.append(range(start, i))
            start = i
    return blocks


def enumerate_commuting_solutions(p, max_count=4096, family_params=(0.25, 0.5, 0.75)):
    """All diagonal 0/1 solutions of a spectral model, plus sampled
    non-diagonal family members on two-dimensional eigenspaces.

    With distinct eigenvalues the diagonal candidates exhaust the solution
    set; a repeated pair contributes a one-parameter family of rotated
    projections, represented here at the given parameter samples.
    """
    if p.spectral is None:
        raise NotSpectral("enumeration needs a spectral-diagonal model")
    if not p.coercive:
        raise NotCoercive("enumeration needs a coercive BB*")
    n = p.n
    if 2 ** n > max_count:
        raise TooManySolutions(f"2^{n} diagonal candidates exceed max_count={max_count}")
    solutions = [
        CandidateSolution("H_form", np.diag(np.array(bits, dtype=float)))
        for bits in product((0.0, 1.0), repeat=n)
    ]
    scale = np.sqrt(p.spectral.b_diag / (-2.0 * p.spectral.lambdas))
    for block in _eigenspace_blocks(p.spectral.lambdas):
        if len(block) != 2:
            continue
        i, j = block[0], block[1]
        for a in family_params:
            for sign in (1.0, -1.0):
                fam = projection_family_2d(a, sign)
                # conjugate from metric-orthonormal to ambient coordinates
                s = np.diag([scale[i], scale[j]])
                blk = s @ fam @ np.linalg.inv(s)
                mat = np.zeros((n, n))
                mat[np.ix_([i, j], [i, j])] = blk
                solutions.append(CandidateSolution("H_form", mat))
    return solutions


def maximality_check(h, P):
    """Smallest eigenvalue of I - P in the reachability metric; it is
    nonnegative exactly when the candidate sits below the identity."""
    _require_form(P, "H_form")
    if not h.full_rank:
        raise RankDeficient("metric eigenproblem needs a full-rank Gramian")
    gap = _h_metric_matrix(h, np.eye(h.dim) - P.matrix)
    return float(np.linalg.eigvalsh(symmetrize(gap)).min())


def comparison_check(p, P, t, samples=50, seed=DEFAULT_SEED, hspace=None,
                     gramian=None):
    """Sampled certificate of the comparison chain
    half <P x, x>_H <= V^P(t, x) <= V(t, x) for a verified solution.

    Requires a coercive BB* (so the chain holds from horizon t on, with
    no controllability waiting time).  The returned report carries the
    worst sampled margin of the left inequality.
    """
    _require_form(P, "H_form")
    if not p.coercive:
        raise NotCoercive("comparison certificate needs a coercive BB*")
    h = hspace if hspace is not None else _full_rank_h(p)
    g = gramian if gramian is not None else gramian_finite(p, t)
    cost = AuxiliaryCost(P.matrix)
    form = cost.form_matrix(h)
    rng = np.random.default_rng(seed)
    margin = np.inf
    for _ in range(samples):
        x = rng.standard_normal(p.n)
        lhs = 0.5 * float(x @ form @ x)
        v_aux = value_auxiliary(p, cost, t, x, gramian=g, hspace=h).value
        v_fin = value_finite(p, t, x, gramian=g)
        margin = min(margin, v_aux - lhs, v_fin - v_aux)
    residual = are_residual_H(p, h, P)
    return SolutionReport(
        residual_norm=residual,
        is_solution=residual <= SOLUTION_RESIDUAL_TOL,
        maximality_gap=maximality_check(h, P),
        comparison_margin=float(margin),
    )


def differential_riccati_residual(p, t, step_h, x, y, hspace=None):
    """Central-difference check of the horizon derivative of the value
    form against its quadratic generator.

    The bilinear value form t -> <Q_t^{-1} x, y> is differenced at step
    ``step_h``; the generator -x' (A* G + G A + G BB* G) y with
    G = Q_t^{-1} is evaluated exactly.  Returns the absolute mismatch,
    which shrinks as the square of the step.
    """
    if step_h > t / 10.0:
        raise BadParameterError(
            "difference step must not exceed a tenth of the horizon")
    h = hspace if hspace is not None else _full_rank_h(p)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def form_at(s):
        g = gramian_finite(p, s)
        if g.rank < p.n:
            raise RankDeficient("horizon derivative needs a full-rank Gramian")
        return float(x @ g.pinv.apply(y))

    lhs = (form_at(t + step_h) - form_at(t - step_h)) / (2.0 * step_h)
    g = gramian_finite(p, t).pinv.inverse_on_range
    rhs = -float(x @ (p.A.T @ g + g @ p.A + g @ p.BBt @ g) @ y)
    return abs(lhs - rhs)

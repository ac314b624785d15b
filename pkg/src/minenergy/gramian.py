"""Controllability Gramians and the finite-energy reachability space.

The finite-horizon Gramian integrates e^{rA} B B* e^{rA*} over [0, t];
the infinite-horizon one solves the Lyapunov equation
A Q + Q A* + B B* = 0.  The reachability space carries the inner product
<x, y> = <S^+ x, S^+ y> with S the symmetric square root of the
infinite-horizon Gramian.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import HorizonNotPositive, NotInH, NotStable, RankDeficient
from .operators import (
    DEFAULT_REL_TOL,
    Propagator,
    PseudoInverse,
    expm,
    pseudo_inverse,
    symmetrize,
)
from .quadrature import legendre_panels

#: truncation floor used when converting infinite time integrals to finite ones
TAIL_EPS = 1e-12


@dataclass(frozen=True)
class Gramian:
    """Symmetric PSD controllability operator for one horizon."""

    horizon: float
    matrix: np.ndarray
    rank: int
    pinv: PseudoInverse


@dataclass(frozen=True)
class HSpace:
    """Square-root factorization of the infinite-horizon Gramian.

    sqrt_Q is the symmetric PSD square root, sqrt_pinv its pseudoinverse
    (built from the same eigendecomposition so rank decisions agree), and
    kernel_basis an orthonormal basis of the unreachable subspace.
    """

    sqrt_Q: np.ndarray
    sqrt_pinv: PseudoInverse
    kernel_basis: np.ndarray

    @property
    def dim(self):
        return self.sqrt_Q.shape[0]

    @property
    def rank(self):
        return self.sqrt_pinv.rank

    @property
    def full_rank(self):
        return self.rank == self.dim

    @property
    def q_matrix(self):
        return self.sqrt_Q @ self.sqrt_Q

    @property
    def q_pinv_matrix(self):
        s = self.sqrt_pinv.inverse_on_range
        return s @ s

    def contains(self, x, tol=1e-8):
        return self.sqrt_pinv.in_range(x, tol)

    def project(self, x):
        return self.sqrt_pinv.range_projector @ np.asarray(x, dtype=float)


@dataclass(frozen=True)
class A0Operator:
    """Restriction of the state operator to the reachability space,
    expressed in ambient coordinates.  Equals A itself at full rank."""

    matrix: np.ndarray


class NullControllabilityReport(NamedTuple):
    holds: bool
    T0: float


def _as_gramian(matrix, horizon, rel_tol=DEFAULT_REL_TOL):
    matrix = symmetrize(matrix)
    pinv = pseudo_inverse(matrix, rel_tol)
    return Gramian(horizon=float(horizon), matrix=matrix, rank=pinv.rank, pinv=pinv)


def _gramian_quadrature(p, t):
    width = min(1.0, 1.0 / p.decay_omega, 4.0 / max(p.spectral_radius, 1e-12))
    pts, wts = legendre_panels(0.0, t, width)
    prop = Propagator(p.A)
    X = prop.at(pts) @ p.B                  # (T, n, m)
    return np.einsum("t,tim,tjm->ij", wts, X, X)


def _gramian_matrix_ode(p, t):
    """Integrate Q' = A Q + Q A* + B B*, Q(0) = 0, with classical RK4."""
    a_norm = np.linalg.norm(p.A, 2)
    h_max = 1e-2 / max(a_norm, 1e-12)
    steps = max(1, int(np.ceil(t / h_max)))
    h = t / steps
    A, BBt = p.A, p.BBt
    Q = np.zeros_like(A)

    def f(q):
        return A @ q + q @ A.T + BBt

    for _ in range(steps):
        k1 = f(Q)
        k2 = f(Q + 0.5 * h * k1)
        k3 = f(Q + 0.5 * h * k2)
        k4 = f(Q + h * k3)
        Q = Q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return Q


def gramian_finite(p, t, method="quadrature"):
    """Controllability Gramian over the horizon t > 0.

    ``method`` selects composite Gauss-Legendre quadrature of the
    defining integral or an RK4 integration of the matrix differential
    equation; the two are independent routes that must agree.
    """
    if not t > 0.0:
        raise HorizonNotPositive(f"horizon must be positive, got {t}")
    if method == "quadrature":
        matrix = _gramian_quadrature(p, float(t))
    elif method == "matrix_ode":
        matrix = _gramian_matrix_ode(p, float(t))
    else:
        raise ValueError(f"unknown method {method!r}")
    return _as_gramian(matrix, t)


def gramian_infinite(p):
    """Unique PSD solution of A Q + Q A* = -B B* for a stable model."""
    if p.spectral_abscissa >= 0.0:
        raise NotStable("infinite-horizon Gramian needs a stable model")
    Q = sla.solve_continuous_lyapunov(p.A, -p.BBt)
    return _as_gramian(Q, np.inf)


def lyapunov_residual(p, g):
    """Relative residual of the Lyapunov equation at the given Gramian."""
    Q = g.matrix
    res = np.linalg.norm(p.A @ Q + Q @ p.A.T + p.BBt, "fro")
    scale = (np.linalg.norm(p.A, "fro") * np.linalg.norm(Q, "fro")
             + np.linalg.norm(p.BBt, "fro"))
    return res / max(scale, 1e-300)


def h_space(p, rel_tol=DEFAULT_REL_TOL):
    """Factor the infinite-horizon Gramian into its reachability space."""
    q = gramian_infinite(p).matrix
    w, v = np.linalg.eigh(q)
    w = np.clip(w, 0.0, None)
    wmax = w.max(initial=0.0)
    keep = w > rel_tol * wmax if wmax > 0.0 else np.zeros_like(w, bool)
    sqrt_w = np.sqrt(w)
    sqrt_q = symmetrize((v * sqrt_w) @ v.T)
    inv_sqrt = np.zeros_like(w)
    inv_sqrt[keep] = 1.0 / sqrt_w[keep]
    sqrt_pinv = PseudoInverse(
        source=sqrt_q,
        rank=int(keep.sum()),
        tolerance=float(rel_tol),
        inverse_on_range=symmetrize((v * inv_sqrt) @ v.T),
        range_projector=symmetrize((v * keep.astype(float)) @ v.T),
    )
    kernel_basis = v[:, ~keep]
    return HSpace(sqrt_Q=sqrt_q, sqrt_pinv=sqrt_pinv, kernel_basis=kernel_basis)


def h_basis(h):
    """Orthonormal ambient-coordinate basis of the reachability subspace."""
    w, v = np.linalg.eigh(h.sqrt_Q)
    keep = w > h.sqrt_pinv.tolerance * w.max(initial=0.0)
    return v[:, keep]


def h_inner(h, x, y, tol=1e-8):
    """Reachability-space inner product of two member vectors.

    Raises NotInH when either argument has a relative component larger
    than ``tol`` outside the space.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    for name, vec in (("x", x), ("y", y)):
        if not h.contains(vec, tol):
            raise NotInH(f"{name} is not in the reachability space")
    s = h.sqrt_pinv.inverse_on_range
    return float((s @ x) @ (s @ y))


def reachable_membership(g, x, tol=1e-8):
    """True iff x lies in the reachable set of the Gramian's horizon."""
    return g.pinv.in_range(x, tol)


def null_controllability_check(p, t, tol=1e-8):
    """Test whether every state reached freely by time t is controllable.

    In finite dimension the flow map is invertible, so the test reduces
    to full-rankness of the Gramian; the report carries the smallest grid
    time at which the Gramian rank stops increasing (0 for coercive
    input operators, whose Gramians have full rank for every positive
    horizon).
    """
    if not t > 0.0:
        raise HorizonNotPositive(f"horizon must be positive, got {t}")
    g = gramian_finite(p, t)
    flow = expm(p.A, t)
    defect = np.linalg.norm(flow - g.pinv.range_projector @ flow, 2)
    holds = defect <= tol * np.linalg.norm(flow, 2)
    if p.coercive:
        t0 = 0.0
    else:
        grid = t * np.arange(1, 9) / 8.0
        ranks = [gramian_finite(p, s).rank for s in grid]
        t0 = float(grid[-1])
        for i, r in enumerate(ranks):
            if r == ranks[-1]:
                t0 = float(grid[i])
                break
    return NullControllabilityReport(holds=bool(holds), T0=t0)


def a0_operator(p, h):
    """Ambient-coordinate matrix of the state operator restricted to the
    reachability space (the subspace is flow-invariant)."""
    if h.full_rank:
        return A0Operator(matrix=p.A.copy())
    return A0Operator(matrix=p.A @ h.sqrt_pinv.range_projector)


def a0_star_matrix(p, h):
    """Adjoint of the restricted state operator in the reachability
    metric, as an ambient matrix: Q A* Q^{-1}.  Needs full rank."""
    if not h.full_rank:
        raise RankDeficient("adjoint conjugation needs a full-rank Gramian")
    q = h.q_matrix
    return q @ p.A.T @ h.q_pinv_matrix


def semigroup_transpose_identity(p, h, s):
    """Residual of the adjoint-semigroup interchange identity.

    Returns the Frobenius norm of
    expm(Q A* Q^{-1}, s) Q - Q expm(A*, s), which vanishes
    identically at full rank.
    """
    a0s = a0_star_matrix(p, h)
    q = h.q_matrix
    lhs = expm(a0s, s) @ q
    rhs = q @ expm(p.A.T, s)
    return float(np.linalg.norm(lhs - rhs, "fro"))


def t_max(p, x_norm, t0=0.0, eps=TAIL_EPS):
    """Horizon beyond which the energy tail of any steering problem is
    below ``eps`` relative: max(t0, log(max(|x|, eps) * M / eps) / omega)."""
    x_norm = max(float(x_norm), eps)
    t = np.log(x_norm * p.bound_M / eps) / p.decay_omega
    return float(max(t0, t, 1.0))


def gramian_report(p, g):
    """Report dictionary for one Gramian: horizon, rank, Lyapunov residual
    of the infinite-horizon companion."""
    q_inf = gramian_infinite(p)
    return {
        "horizon": g.horizon if np.isfinite(g.horizon) else "+inf",
        "rank": g.rank,
        "lyapunov_residual": lyapunov_residual(p, q_inf),
    }

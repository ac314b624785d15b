"""Control-problem models and the dense linear-algebra kernels.

A model is the pair (A, B) of a stable state operator and a bounded
control operator on finite-dimensional real spaces, together with the
decay envelope ``norm(expm(A, t)) <= bound_M * exp(-decay_omega * t)``.
Spectral-diagonal models additionally remember their eigenvalue and
input-weight vectors, which the commuting-case machinery relies on.
"""

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    BadParameterError,
    NegativeWeight,
    NotCoercive,
    NotDiagonalizable,
    NotStable,
    NotSymmetric,
    ParseError,
)

#: relative singular-value cutoff shared by every rank decision
DEFAULT_REL_TOL = 1e-10

#: eigenvector condition numbers above this are treated as defective
_DIAGONALIZABLE_COND_MAX = 1e12


def symmetrize(m):
    """Average a matrix with its transpose."""
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def is_symmetric(m, tol=1e-10):
    m = np.asarray(m, dtype=float)
    return np.linalg.norm(m - m.T, "fro") <= tol * (1.0 + np.linalg.norm(m, "fro"))


@dataclass(frozen=True)
class SpectralModel:
    """Diagonal data of a commuting model: eigenvalues and input weights.

    ``lambdas`` is sorted descending; ties keep their input order so that
    repeated-eigenvalue blocks occupy consecutive coordinates.
    """

    lambdas: np.ndarray
    b_diag: np.ndarray

    @property
    def coercive(self):
        return float(np.min(self.b_diag)) > 0.0


@dataclass(frozen=True)
class ControlProblem:
    """State operator A, control operator B, and stability metadata."""

    A: np.ndarray
    B: np.ndarray
    n: int
    m: int
    spectral_abscissa: float
    bound_M: float
    decay_omega: float
    spectral_radius: float
    commuting: bool = False
    coercive: bool = False
    spectral: SpectralModel | None = field(default=None, compare=False)

    @property
    def BBt(self):
        return self.B @ self.B.T


@dataclass(frozen=True)
class PseudoInverse:
    """Rank-revealing pseudoinverse of a symmetric PSD matrix.

    ``inverse_on_range`` inverts on the retained singular subspace and
    annihilates the kernel; ``range_projector`` is the orthogonal projector
    onto the retained subspace.
    """

    source: np.ndarray
    rank: int
    tolerance: float
    inverse_on_range: np.ndarray
    range_projector: np.ndarray

    def apply(self, x):
        return self.inverse_on_range @ x

    def in_range(self, x, tol=1e-8):
        """True iff the component of x outside the range is <= tol * ||x||."""
        x = np.asarray(x, dtype=float)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return True
        return np.linalg.norm(x - self.range_projector @ x) <= tol * nx


def _stability_metadata(A):
    """Spectral abscissa, decay rate, envelope constant and radius of A."""
    eigvals, eigvecs = np.linalg.eig(A)
    abscissa = float(np.max(eigvals.real))
    if abscissa >= 0.0:
        raise NotStable(
            f"state operator has an eigenvalue with real part {abscissa:.3g} >= 0"
        )
    cond = np.linalg.cond(eigvecs)
    if not np.isfinite(cond) or cond > _DIAGONALIZABLE_COND_MAX:
        raise NotDiagonalizable(
            "eigenvector basis is numerically singular; decay envelope "
            "cannot be estimated for a defective operator"
        )
    bound_m = max(1.0, float(cond))
    radius = float(np.max(np.abs(eigvals)))
    return abscissa, -abscissa, bound_m, radius


def _commutation_flags(A, B):
    bbt = B @ B.T
    scale = np.linalg.norm(A, "fro") * np.linalg.norm(bbt, "fro")
    commuting = (
        is_symmetric(A, 1e-12)
        and np.linalg.norm(A @ bbt - bbt @ A, "fro") <= 1e-10 * (1.0 + scale)
    )
    eigs = np.linalg.eigvalsh(symmetrize(bbt))
    coercive = bool(eigs.min() > DEFAULT_REL_TOL * max(eigs.max(), 1.0))
    return commuting, coercive


def make_dense_model(A, B):
    """Build a control problem from dense state and control operators.

    Raises NotStable when some eigenvalue of A has nonnegative real part,
    NotDiagonalizable when A is numerically defective.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParseError(f"A must be square, got shape {A.shape}")
    if B.ndim == 1:
        B = B[:, None]
    if B.shape[0] != A.shape[0]:
        raise ParseError(
            f"B has {B.shape[0]} rows but the state dimension is {A.shape[0]}"
        )
    abscissa, omega, bound_m, radius = _stability_metadata(A)
    commuting, coercive = _commutation_flags(A, B)
    return ControlProblem(
        A=A, B=B, n=A.shape[0], m=B.shape[1],
        spectral_abscissa=abscissa, bound_M=bound_m, decay_omega=omega,
        spectral_radius=radius, commuting=commuting, coercive=coercive,
    )


def make_spectral_model(lambdas, b_diag):
    """Build a diagonal commuting model A = diag(lambdas), B = diag(sqrt(b)).

    Eigenvalues are sorted descending with input order preserved among
    ties, and the input weights are permuted accordingly.
    """
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    b_diag = np.atleast_1d(np.asarray(b_diag, dtype=float))
    if lambdas.shape != b_diag.shape or lambdas.ndim != 1:
        raise ParseError("lambdas and b_diag must be vectors of equal length")
    if np.any(b_diag < 0.0):
        raise NegativeWeight("b_diag entries must be nonnegative")
    if np.any(lambdas >= 0.0):
        raise NotStable("all eigenvalues must be strictly negative")
    order = np.argsort(-lambdas, kind="stable")
    lambdas = lambdas[order]
    b_diag = b_diag[order]
    A = np.diag(lambdas)
    B = np.diag(np.sqrt(b_diag))
    problem = make_dense_model(A, B)
    spectral = SpectralModel(lambdas=lambdas, b_diag=b_diag)
    return ControlProblem(
        A=problem.A, B=problem.B, n=problem.n, m=problem.m,
        spectral_abscissa=problem.spectral_abscissa, bound_M=1.0,
        decay_omega=problem.decay_omega, spectral_radius=problem.spectral_radius,
        commuting=True, coercive=spectral.coercive, spectral=spectral,
    )


def expm(A, t):
    """Matrix exponential e^{tA}.

    Symmetric input goes through an eigendecomposition, which keeps the
    result symmetric; anything else uses the scaling-and-squaring Pade
    method.  t may be negative.
    """
    A = np.asarray(A, dtype=float)
    t = float(t)
    if t == 0.0:
        return np.eye(A.shape[0])
    if is_symmetric(A, 1e-12):
        w, v = np.linalg.eigh(symmetrize(A))
        return (v * np.exp(t * w)) @ v.T
    return sla.expm(t * A)


class Propagator:
    """Batch evaluator of e^{tA} for many t on a fixed diagonalizable A.

    Factors A once; falls back to per-value Pade exponentials when the
    eigenvector basis is too ill-conditioned for spectral synthesis.
    """

    _COND_MAX = 1e6

    def __init__(self, A):
        A = np.asarray(A, dtype=float)
        self.A = A
        self.n = A.shape[0]
        if is_symmetric(A, 1e-12):
            w, v = np.linalg.eigh(symmetrize(A))
            self._w, self._v, self._vinv = w, v, v.T
            self._spectral = True
        else:
            w, v = np.linalg.eig(A)
            if np.linalg.cond(v) <= self._COND_MAX:
                self._w, self._v, self._vinv = w, v, np.linalg.inv(v)
                self._spectral = True
            else:
                self._spectral = False

    def at(self, ts):
        """Stack of propagators e^{t A} for each t in ts, shape (T, n, n)."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if self._spectral:
            phases = np.exp(np.outer(ts, self._w))
            out = np.einsum("ik,tk,kj->tij", self._v, phases, self._vinv)
            return np.ascontiguousarray(out.real)
        return np.stack([sla.expm(t * self.A) for t in ts])

    def apply(self, ts, x):
        """e^{t A} x for each t in ts; x a vector, result (T, n)."""
        x = np.asarray(x, dtype=float)
        if self._spectral:
            ts = np.atleast_1d(np.asarray(ts, dtype=float))
            coef = self._vinv @ x
            out = (np.exp(np.outer(ts, self._w)) * coef) @ self._v.T
            return np.ascontiguousarray(out.real)
        return np.stack([m @ x for m in self.at(ts)])


def pseudo_inverse(Msym, rel_tol=DEFAULT_REL_TOL):
    """Moore-Penrose pseudoinverse of a symmetric PSD matrix.

    Singular values below ``rel_tol`` times the largest are treated as
    zero.  Raises NotSymmetric for asymmetric input.
    """
    Msym = np.asarray(Msym, dtype=float)
    if not (0.0 < rel_tol < 1.0):
        raise BadParameterError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    if not is_symmetric(Msym):
        raise NotSymmetric("pseudo_inverse requires a symmetric matrix")
    w, v = np.linalg.eigh(symmetrize(Msym))
    sigma = np.abs(w)
    smax = sigma.max(initial=0.0)
    keep = sigma > rel_tol * smax if smax > 0.0 else np.zeros_like(sigma, bool)
    inv = np.zeros_like(sigma)
    inv[keep] = 1.0 / w[keep]
    return PseudoInverse(
        source=Msym,
        rank=int(keep.sum()),
        tolerance=float(rel_tol),
        inverse_on_range=symmetrize((v * inv) @ v.T),
        range_projector=symmetrize((v * keep.astype(float)) @ v.T),
    )


def apply_control_weight(p, C):
    """Absorb a coercive control-energy weight C into the control operator.

    The weighted energy integrand <Cu, u> is equivalent to the unweighted
    one for the model with B replaced by B C^{-1/2}.
    """
    C = np.asarray(C, dtype=float)
    if not is_symmetric(C):
        raise NotSymmetric("control weight must be symmetric")
    w, v = np.linalg.eigh(symmetrize(C))
    if w.min() <= DEFAULT_REL_TOL * max(w.max(), 0.0):
        raise NotCoercive("control weight must be positive definite")
    c_inv_sqrt = (v / np.sqrt(w)) @ v.T
    return make_dense_model(p.A, p.B @ c_inv_sqrt)


def model_from_dict(doc):
    """Build a ControlProblem from an ingestion document.

    Accepted layouts::

        {"type": "dense", "A": [[...]], "B": [[...]]}
        {"type": "spectral", "lambdas": [...], "b_diag": [...]}

    with an optional ``"weight_C": [[...]]`` applied afterwards.
    """
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")
    kind = doc.get("type")
    try:
        if kind == "dense":
            problem = make_dense_model(doc["A"], doc["B"])
        elif kind == "spectral":
            problem = make_spectral_model(doc["lambdas"], doc["b_diag"])
        else:
            raise ParseError(f"unknown model type {kind!r}")
    except KeyError as exc:
        raise ParseError(f"model document is missing field {exc}") from exc
    if "weight_C" in doc:
        problem = apply_control_weight(problem, np.asarray(doc["weight_C"], float))
    return problem


def load_model(path):
    """Read a model ingestion document from a JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read model file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(doc)

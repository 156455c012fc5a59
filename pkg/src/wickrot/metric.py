"""Pseudo-inner products on a Lie algebra and left-invariant curvature.

Curvature convention: R(x, y)z = nabla_x nabla_y z - nabla_y nabla_x z - nabla_[x,y] z,
ric(x, y) = tr(z -> R(z, y)x), and the Ricci operator solves g Ric = ric.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _linalg as la
from ._linalg import DEFAULT_TOL
from .algebra import DimensionError, LieAlgebra, _derivation_system


class DegenerateMetricError(ValueError):
    pass


class NotInvolutionError(ValueError):
    pass


class NotIsometryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Metric:
    """Symmetric nondegenerate bilinear form; ``p`` counts positive, ``q`` negative directions."""

    form: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        g = la.coerce(self.form)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionError(f"metric must be square, got shape {g.shape}")
        if la.is_exact(g):
            if not la.is_zero(g - g.T):
                raise ValueError("metric is not symmetric")
        else:
            if la.max_abs(g - g.T) > self.tol * max(1.0, la.max_abs(g)):
                raise ValueError("metric is not symmetric")
            g = 0.5 * (g + g.T)
        g.flags.writeable = False
        object.__setattr__(self, "form", g)
        object.__setattr__(self, "_sig", signature_of_form(g, self.tol))

    @property
    def dim(self) -> int:
        return self.form.shape[0]

    @property
    def exact(self) -> bool:
        return la.is_exact(self.form)

    @property
    def p(self) -> int:
        return self._sig[0]

    @property
    def q(self) -> int:
        return self._sig[1]

    @property
    def signature(self) -> tuple:
        return self._sig

    def __neg__(self) -> "Metric":
        return Metric(-self.form, self.tol)

    def inner(self, x, y):
        return np.asarray(x) @ self.form @ np.asarray(y)


def signature_of_form(g, tol: float = DEFAULT_TOL) -> tuple:
    ev = np.linalg.eigvalsh(la.as_float(g))
    scale = max(1.0, float(np.max(np.abs(ev)))) if ev.size else 1.0
    if np.any(np.abs(ev) <= tol * scale):
        raise DegenerateMetricError(f"metric is degenerate (eigenvalues {ev.tolist()})")
    return int(np.sum(ev > 0)), int(np.sum(ev < 0))


def signature(m, tol: float = DEFAULT_TOL) -> tuple:
    """Sylvester counts (p, q) of positive and negative eigenvalues."""
    form = m.form if isinstance(m, Metric) else m
    return signature_of_form(form, tol)


def _check_dims(L: LieAlgebra, m: Metric):
    if L.dim != m.dim:
        raise DimensionError(f"algebra has dim {L.dim} but metric has dim {m.dim}")


def _common(L: LieAlgebra, m: Metric):
    return la.promote(L.structure, m.form)


def bi_invariance_residual(L: LieAlgebra, m: Metric) -> float:
    """max over basis triples of |g([x,y],z) + g(y,[x,z])|."""
    _check_dims(L, m)
    c, g = _common(L, m)
    cg = np.einsum("ijm,mk->ijk", c, g)  # g([e_i, e_j], e_k)
    return la.max_abs(cg + cg.transpose(0, 2, 1))


def is_bi_invariant(L: LieAlgebra, m: Metric, tol: float = DEFAULT_TOL) -> bool:
    r = bi_invariance_residual(L, m)
    return r == 0 if (L.exact and m.exact) else r <= tol


def levi_civita(L: LieAlgebra, m: Metric) -> np.ndarray:
    """Connection array ``gamma[i, k, j]`` = component k of nabla_{e_i} e_j (Koszul formula)."""
    _check_dims(L, m)
    c, g = _common(L, m)
    cg = np.einsum("ijm,mk->ijk", c, g)
    two_k = cg - np.einsum("jki->ijk", cg) + np.einsum("kij->ijk", cg)
    koszul = two_k / 2 if la.is_exact(two_k) else 0.5 * two_k  # g(nabla_i e_j, e_k)
    n = L.dim
    rhs = koszul.transpose(2, 0, 1).reshape(n, n * n)
    sol = la.solve(g, rhs).reshape(n, n, n)  # sol[a, i, j]
    return sol.transpose(1, 0, 2).copy()


@dataclass(frozen=True, eq=False)
class CurvatureData:
    connection: np.ndarray  # [i, k, j]: component k of nabla_{e_i} e_j
    riemann: np.ndarray  # [i, j, a, k]: component a of R(e_i, e_j) e_k
    ricci_tensor: np.ndarray
    ricci_operator: np.ndarray
    scalar: object


def riemann_tensor(L: LieAlgebra, gamma) -> np.ndarray:
    c, gamma = la.promote(L.structure, gamma)
    comm = np.einsum("iab,jbc->ijac", gamma, gamma)
    return comm - comm.transpose(1, 0, 2, 3) - np.einsum("ijm,mac->ijac", c, gamma)


def curvature(L: LieAlgebra, m: Metric) -> CurvatureData:
    gamma = levi_civita(L, m)
    riem = riemann_tensor(L, gamma)
    ric = np.einsum("lbla->ab", riem)
    _, g = _common(L, m)
    g, ric = la.promote(g, ric)
    op = la.solve(g, ric)
    return CurvatureData(gamma, riem, ric, op, np.trace(op))


def torsion_residual(L: LieAlgebra, gamma) -> float:
    c, gamma = la.promote(L.structure, gamma)
    return la.max_abs(np.einsum("ikj->ijk", gamma) - np.einsum("jki->ijk", gamma) - c)


def compatibility_residual(m: Metric, gamma) -> float:
    g, gamma = la.promote(m.form, gamma)
    gg = np.einsum("ab,ibc->iac", g, gamma)  # g(., nabla_i .)
    return la.max_abs(gg + gg.transpose(0, 2, 1))


def riemann_symmetry_residuals(m: Metric, riem) -> dict:
    """Antisymmetry in (x, y), skewness of g(R(x,y)z, w) in (z, w), first Bianchi."""
    g, riem = la.promote(m.form, riem)
    lowered = np.einsum("wa,ijak->ijkw", g, riem)  # g(R(e_i,e_j)e_k, e_w)
    # [i, j, k, a]: R(i,j)k + R(j,k)i + R(k,i)j
    bianchi = (
        np.einsum("ijak->ijka", riem)
        + np.einsum("jkai->ijka", riem)
        + np.einsum("kiaj->ijka", riem)
    )
    return {
        "antisymmetry": la.max_abs(riem + riem.transpose(1, 0, 2, 3)),
        "metric_skew": la.max_abs(lowered + lowered.transpose(0, 1, 3, 2)),
        "bianchi": la.max_abs(bianchi),
    }


def isometry_algebra_basis(m: Metric, tol: float = DEFAULT_TOL) -> list:
    """Basis of o(p, q): maps X with g(Xx, y) + g(x, Xy) = 0."""
    n = m.dim
    return [k.reshape(n, n) for k in la.nullspace(_isometry_system(m.form), tol).T]


def _isometry_system(g):
    n = g.shape[0]
    e = la.eye(n, exact=la.is_exact(g))
    # coefficient of X[p, q] in (X^T g + g X)[a, b]
    sys = np.einsum("qa,pb->abpq", e, g) + np.einsum("ap,qb->abpq", g, e)
    return sys.reshape(n * n, n * n)


def isometric_derivations(L: LieAlgebra, m: Metric, tol: float = DEFAULT_TOL) -> list:
    """Basis of Der(L) intersected with o(p, q)."""
    _check_dims(L, m)
    c, g = _common(L, m)
    n = L.dim
    system = np.concatenate([_derivation_system(c), _isometry_system(g)], axis=0)
    return [k.reshape(n, n) for k in la.nullspace(system, tol).T]


@dataclass(frozen=True, eq=False)
class ThetaInner:
    form: np.ndarray
    positive: bool
    eigenvalues: tuple


def involution_residual(theta) -> float:
    theta = la.coerce(theta)
    return la.max_abs(theta @ theta - la.eye(theta.shape[0], exact=la.is_exact(theta)))


def isometry_residual(m: Metric, A) -> float:
    g, A = la.promote(m.form, la.coerce(A))
    return la.max_abs(A.T @ g @ A - g)


def theta_inner(m: Metric, theta, tol: float = DEFAULT_TOL) -> ThetaInner:
    """g_theta(x, y) = g(x, theta y) and whether it is positive definite."""
    theta = la.coerce(theta)
    if theta.shape != (m.dim, m.dim):
        raise DimensionError("theta does not match the metric dimension")
    exact = m.exact and la.is_exact(theta)
    r = involution_residual(theta)
    if (r != 0) if exact else r > tol:
        raise NotInvolutionError(f"theta^2 != 1 (residual {r:.3e})")
    r = isometry_residual(m, theta)
    if (r != 0) if exact else r > tol:
        raise NotIsometryError(f"theta does not preserve the metric (residual {r:.3e})")
    g, theta = la.promote(m.form, theta)
    form = g @ theta
    ev = np.linalg.eigvalsh(la.as_float(form))
    return ThetaInner(form, bool(np.all(ev > tol)), tuple(float(v) for v in ev))

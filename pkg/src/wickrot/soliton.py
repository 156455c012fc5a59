"""Algebraic solitons Ric = lambda I + D and theta-equivariance of the curvature tensors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _linalg as la
from .algebra import LieAlgebra, derivation_algebra, leibniz_residual, structural_classify
from .cartan import wick_rotate
from .metric import Metric, NotInvolutionError, NotIsometryError, curvature, involution_residual, isometry_residual

EINSTEIN = "einstein"
NILSOLITON = "nilsoliton"
SOLSOLITON = "solsoliton"
ALGEBRAIC_SOLITON = "algebraic_soliton"
NONE = "none"

SOLITON_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SolitonDecomposition:
    lam: object
    D: np.ndarray
    residual: float
    classification: str
    ricci_operator: np.ndarray

    @property
    def accepted(self) -> bool:
        return self.classification != NONE

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of D, real parts sorted ascending."""
        return np.sort(np.linalg.eigvals(la.as_float(self.D)).real)


def _fit(ric, ders, exact):
    """Solve vec(Ric) = lam vec(I) + sum c_i vec(D_i); returns (lam, D) or None."""
    n = ric.shape[0]
    eye = la.eye(n, exact=exact)
    cols = [eye.ravel()] + [d.ravel() for d in ders]
    a = np.stack(cols, axis=1)
    if exact:
        sol = la.lstsq_exact(a, ric.ravel())
        if sol is None:
            return None
    else:
        sol = np.linalg.lstsq(a, ric.ravel(), rcond=None)[0]
    D = (a[:, 1:] @ sol[1:]).reshape(n, n) if ders else la.zeros((n, n), exact=exact)
    return sol[0], D


def soliton_decompose(L: LieAlgebra, m: Metric, tol: float = SOLITON_TOL) -> SolitonDecomposition:
    """Best (lambda, D) with D a derivation; classification ``none`` when the residual is not small.

    Abelian algebras are flat and every map is a derivation, so the minimal-norm answer
    lambda = 0, D = 0 is returned.
    """
    ric = curvature(L, m).ricci_operator
    exact = la.is_exact(ric) and L.exact
    if not exact:
        ric = la.as_float(ric)
    report = structural_classify(L)
    n = L.dim
    if report.abelian:
        return SolitonDecomposition(la.zeros((), exact=exact)[()] if exact else 0.0,
                                    la.zeros((n, n), exact=exact), 0.0, EINSTEIN, ric)

    ders = derivation_algebra(L) if exact else [la.as_float(d) for d in derivation_algebra(L.astype_float())]
    fit = _fit(ric, ders, exact) if exact else None
    if fit is None:
        # rational system inconsistent (or float input): report the float least-squares optimum
        fit = _fit(la.as_float(ric), [la.as_float(d) for d in ders], False)
        exact = False
    lam, D = fit
    eye = la.eye(n, exact=exact)
    resid = la.max_abs(ric - lam * eye - D) if exact else la.max_abs(la.as_float(ric) - lam * np.eye(n) - D)
    if exact:
        ok = resid == 0
    else:
        ok = resid < tol and leibniz_residual(L.astype_float(), D) < tol
    if not ok:
        return SolitonDecomposition(lam, D, resid, NONE, ric)
    if la.is_zero(D, tol):
        cls = EINSTEIN
    elif report.nilpotent:
        cls = NILSOLITON
    elif report.solvable:
        cls = SOLSOLITON
    else:
        cls = ALGEBRAIC_SOLITON
    return SolitonDecomposition(lam, D, resid, cls, ric)


def check_theta_commutes(theta, D, tol: float = 1e-10) -> bool:
    theta, D = la.promote(la.coerce(theta), la.coerce(D))
    r = la.max_abs(theta @ D - D @ theta)
    return r == 0 if la.is_exact(r if isinstance(r, np.ndarray) else theta) else r < tol


@dataclass(frozen=True, eq=False)
class SolitonWickReport:
    source: SolitonDecomposition
    rotated: SolitonDecomposition
    transported_D: np.ndarray | None  # D carried to the rotated basis (None if not real)
    lambda_difference: float
    derivation_residual: float
    ok: bool


def _carry_derivation(D, basis, n_t, exact):
    """S^-1 B^-1 D B S with S = diag(1.., i..); the t-p blocks must vanish for a real result."""
    D, basis = la.promote(la.coerce(D), basis)
    db = la.solve(basis, D @ basis)
    n = db.shape[0]
    is_p = np.arange(n) >= n_t
    cross = is_p[:, None] ^ is_p[None, :]
    leak = la.max_abs(db[cross]) if cross.any() else 0.0
    if not ((leak == 0) if exact else leak < SOLITON_TOL):
        return None
    out = db.copy()
    out[cross] = 0 if la.is_exact(out) else 0.0
    return out


def soliton_wick_invariance(L: LieAlgebra, m: Metric, theta, tol: float = SOLITON_TOL) -> SolitonWickReport:
    """Decompose both sides of a Wick rotation and compare lambda and D."""
    w = wick_rotate(L, m, theta)
    src = soliton_decompose(L, m, tol)
    rot = soliton_decompose(w.algebra, w.metric, tol)
    exact = la.is_exact(src.D) and la.is_exact(rot.D) and la.is_exact(w.basis_map)
    carried = _carry_derivation(src.D, w.basis_map, w.n_t, exact)
    lam_diff = abs(float(src.lam) - float(rot.lam))
    if carried is None:
        d_res = float("inf")
    else:
        a, b = la.promote(carried, rot.D)
        d_res = la.max_abs(a - b)
    if exact and src.accepted and rot.accepted:
        ok = src.lam == rot.lam and d_res == 0
    else:
        ok = src.accepted and rot.accepted and lam_diff < tol and d_res < tol
    return SolitonWickReport(src, rot, carried, lam_diff, d_res, ok)


@dataclass(frozen=True, eq=False)
class EquivarianceReport:
    connection: float
    riemann: float
    ricci_tensor: float
    ricci_operator_commutator: float
    rpe: bool

    @property
    def max_residual(self) -> float:
        return max(self.connection, self.riemann, self.ricci_tensor, self.ricci_operator_commutator)

    def as_dict(self) -> dict:
        return {
            "connection": self.connection,
            "riemann": self.riemann,
            "ricci_tensor": self.ricci_tensor,
            "ricci_operator_commutator": self.ricci_operator_commutator,
            "rpe": self.rpe,
        }


def equivariance_report(L: LieAlgebra, m: Metric, theta, tol: float = 1e-9) -> EquivarianceReport:
    """Residuals of theta acting as an isometry on nabla, ric, Ric and R (tensorially):
    nabla_{theta x} theta y = theta nabla_x y, ric(theta x, theta y) = ric(x, y),
    theta Ric = Ric theta, R(theta x, theta y) theta z = theta R(x, y) z."""
    theta = la.coerce(theta)
    exact = L.exact and m.exact and la.is_exact(theta)
    r = involution_residual(theta)
    if (r != 0) if exact else r > tol:
        raise NotInvolutionError(f"theta^2 != 1 (residual {r:.3e})")
    r = isometry_residual(m, theta)
    if (r != 0) if exact else r > tol:
        raise NotIsometryError(f"theta does not preserve the metric (residual {r:.3e})")

    curv = curvature(L, m)
    gamma, riem, ric, op = curv.connection, curv.riemann, curv.ricci_tensor, curv.ricci_operator
    gamma, riem, ric, op, th = la.promote(gamma, riem, ric, op, theta)

    nab = np.einsum("ikj->ijk", gamma)  # nab[i, j, k]: component k of nabla_{e_i} e_j
    # contract one index at a time: a single four-operand einsum is slow on Fractions
    moved = np.einsum("bj,abk->ajk", th, nab)
    r_conn = la.max_abs(np.einsum("ai,ajk->ijk", th, moved) - np.einsum("km,ijm->ijk", th, nab))
    moved = np.einsum("dk,bcad->bcak", th, riem)
    moved = np.einsum("cj,bcak->bjak", th, moved)
    moved = np.einsum("bi,bjak->ijak", th, moved)
    r_riem = la.max_abs(moved - np.einsum("ae,ijek->ijak", th, riem))
    r_ric = la.max_abs(th.T @ ric @ th - ric)
    r_comm = la.max_abs(th @ op - op @ th)
    rpe = r_riem == 0 if exact else r_riem < tol
    return EquivarianceReport(r_conn, r_riem, r_ric, r_comm, bool(rpe))

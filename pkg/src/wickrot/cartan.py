"""Cartan involutions of a metric, the Wick twist t + i p, and conjugacy of involutions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import least_squares

from . import _linalg as la
from ._linalg import DEFAULT_TOL
from .algebra import LieAlgebra, act_on_bracket, automorphism_residual, change_basis, killing_form
from .metric import (
    DegenerateMetricError,
    Metric,
    involution_residual,
    isometric_derivations,
    isometry_residual,
    signature_of_form,
)


class NotCartanError(ValueError):
    pass


class WickPreconditionError(ValueError):
    pass


class NotSemisimpleError(ValueError):
    pass


def _small(r, exact, tol):
    return r == 0 if exact else r <= tol


@dataclass(frozen=True, eq=False)
class Involution:
    """A candidate Cartan involution with tri-state verification flags (None = unchecked)."""

    matrix: np.ndarray
    is_involution: bool | None = None
    is_metric_isometry: bool | None = None
    g_theta_positive: bool | None = None
    is_automorphism: bool | None = None
    g_theta_eigenvalues: tuple = ()
    residuals: dict = field(default_factory=dict)

    @property
    def is_metric_cartan(self) -> bool:
        return bool(self.is_involution and self.is_metric_isometry and self.g_theta_positive)

    @property
    def is_lie_cartan(self) -> bool:
        return self.is_metric_cartan and bool(self.is_automorphism)


def is_metric_cartan(m: Metric, theta, tol: float = DEFAULT_TOL) -> Involution:
    theta = la.coerce(theta)
    exact = m.exact and la.is_exact(theta)
    r_inv = involution_residual(theta)
    r_iso = isometry_residual(m, theta)
    inv_ok = _small(r_inv, exact, tol)
    iso_ok = _small(r_iso, exact, tol)
    positive, ev = None, ()
    if inv_ok and iso_ok:
        g, th = la.promote(m.form, theta)
        form = la.as_float(g @ th)
        w = np.linalg.eigvalsh(0.5 * (form + form.T))
        ev = tuple(float(v) for v in w)
        positive = bool(np.all(w > tol))
    return Involution(theta, inv_ok, iso_ok, positive, None, ev,
                      {"involution": r_inv, "isometry": r_iso})


def is_lie_cartan(L: LieAlgebra, m: Metric, theta, tol: float = DEFAULT_TOL) -> Involution:
    inv = is_metric_cartan(m, theta, tol)
    exact = L.exact and la.is_exact(inv.matrix)
    try:
        r_aut = automorphism_residual(L, inv.matrix, tol)
        aut = _small(r_aut, exact, tol)
    except ValueError:
        r_aut, aut = float("inf"), False
    return Involution(inv.matrix, inv.is_involution, inv.is_metric_isometry, inv.g_theta_positive,
                      aut, inv.g_theta_eigenvalues, {**inv.residuals, "automorphism": r_aut})


@dataclass(frozen=True, eq=False)
class CartanDecomposition:
    t_basis: np.ndarray  # columns span the +1 eigenspace
    p_basis: np.ndarray  # columns span the -1 eigenspace

    @property
    def basis(self) -> np.ndarray:
        return np.concatenate([self.t_basis, self.p_basis], axis=1)


def cartan_decomposition(theta, m: Metric | None = None, tol: float = DEFAULT_TOL) -> CartanDecomposition:
    """Eigenspace split of an involution, g-orthogonalized within each block when ``m`` is given."""
    theta = la.coerce(theta)
    n = theta.shape[0]
    exact = la.is_exact(theta)
    r = involution_residual(theta)
    if not _small(r, exact, tol):
        raise ValueError(f"theta is not an involution (residual {r:.3e})")
    e = la.eye(n, exact=exact)
    half = (lambda a: a / 2) if exact else (lambda a: 0.5 * a)
    t = la.column_basis(half(e + theta), tol)
    p = la.column_basis(half(e - theta), tol)
    if t.shape[1] + p.shape[1] != n:
        raise ValueError("eigenspaces of theta do not span the algebra")
    if m is not None:
        g = m.form
        if not (exact and m.exact):
            t, p, g = la.as_float(t), la.as_float(p), la.as_float(g)
        t = la.signed_orthogonalize(t, g, tol) if t.shape[1] else t
        p = la.signed_orthogonalize(p, g, tol) if p.shape[1] else p
    return CartanDecomposition(t, p)


def reference_involution(m: Metric) -> np.ndarray:
    """The metric Cartan involution sign(g) (exact for diagonal metrics)."""
    g = m.form
    if m.exact and la.is_zero(g - np.diag(np.diag(g))):
        out = la.zeros(g.shape)
        for i in range(m.dim):
            out[i, i] = 1 if g[i, i] > 0 else -1
        return la.exact_array(out)
    w, u = np.linalg.eigh(la.as_float(g))
    return (u * np.sign(w)) @ u.T


def adapted_frame(m: Metric, theta, tol: float = 1e-7):
    """Float basis P with P^T g P = diag(I_p, -I_q) and P^-1 theta P the same diagonal."""
    g = la.as_float(m.form)
    theta = la.as_float(theta)
    n = m.dim
    e = np.eye(n)
    t = la.column_basis(0.5 * (e + theta), tol)
    p = la.column_basis(0.5 * (e - theta), tol)
    blocks = []
    for basis, sign in ((t, 1.0), (p, -1.0)):
        if basis.shape[1] == 0:
            blocks.append(basis)
            continue
        gram = sign * basis.T @ g @ basis
        chol = np.linalg.cholesky(0.5 * (gram + gram.T))
        blocks.append(np.linalg.solve(chol, basis.T).T)
    return np.concatenate(blocks, axis=1), t.shape[1]


# ---------------------------------------------------------------------------
# Wick rotation


@dataclass(frozen=True, eq=False)
class WickRotation:
    algebra: LieAlgebra
    metric: Metric
    basis_map: np.ndarray  # columns: adapted t-vectors then p-vectors, in the source basis
    n_t: int

    @property
    def n_p(self) -> int:
        return self.basis_map.shape[1] - self.n_t

    @property
    def involution(self) -> np.ndarray:
        """The induced involution +1 on t, -1 on i p, in the rotated basis."""
        n = self.basis_map.shape[0]
        d = [1] * self.n_t + [-1] * self.n_p
        if self.algebra.exact:
            return la.exact_array(np.diag(d))
        return np.diag(np.array(d, dtype=float))


def _check_wick_involution(L, m, theta, tol):
    exact = L.exact and m.exact and la.is_exact(theta)
    r = involution_residual(theta)
    if not _small(r, exact, tol):
        raise WickPreconditionError(f"theta is not an involution (residual {r:.3e})")
    r = isometry_residual(m, theta)
    if not _small(r, exact, tol):
        raise WickPreconditionError(f"theta does not preserve the metric (residual {r:.3e})")
    r = automorphism_residual(L, theta, tol)
    if not _small(r, exact, tol):
        raise WickPreconditionError(f"theta is not a Lie algebra automorphism (residual {r:.3e})")


def wick_rotate(L: LieAlgebra, m: Metric, theta, tol: float = DEFAULT_TOL) -> WickRotation:
    """Real form t + i p for an isometric involutive automorphism theta.

    Works over the reals in the adapted basis (t_a, q_b = i p_b): [q, q'] = -[p, p'],
    g~(q, q') = -g(p, p'), everything else unchanged.
    """
    theta = la.coerce(theta)
    _check_wick_involution(L, m, theta, tol)
    dec = cartan_decomposition(theta, m, tol)
    basis = dec.basis
    n_t = dec.t_basis.shape[1]
    n = L.dim
    exact = L.exact and m.exact and la.is_exact(basis)
    src = L if exact else L.astype_float()
    g = m.form if exact else la.as_float(m.form)
    basis = basis if exact else la.as_float(basis)

    c = change_basis(src, basis).structure.copy()
    is_p = np.arange(n) >= n_t
    flip = is_p[:, None, None] & is_p[None, :, None] & ~is_p[None, None, :]
    odd = (is_p[:, None, None].astype(int) + is_p[None, :, None] - is_p[None, None, :]) % 2 == 1
    c = np.where(flip, -c, c)
    c[odd] = 0 if exact else 0.0
    if exact:
        c = la.exact_array(c)

    gb = basis.T @ g @ basis
    pp = is_p[:, None] & is_p[None, :]
    tp = is_p[:, None] ^ is_p[None, :]
    gt = np.where(pp, -gb, gb)
    gt[tp] = 0 if exact else 0.0
    if exact:
        gt = la.exact_array(gt)

    labels = [f"t{k + 1}" for k in range(n_t)] + [f"q{k + 1}" for k in range(n - n_t)]
    name = f"{L.name}~" if L.name else None
    return WickRotation(LieAlgebra(c, tuple(labels), name), Metric(gt, m.tol), basis, n_t)


def _composite_basis(first: WickRotation, second: WickRotation):
    """Real basis (in the original coordinates) of a twice-rotated algebra."""
    b1, b2 = first.basis_map, second.basis_map
    n = b1.shape[0]
    a = (np.arange(n) >= first.n_t).astype(int)
    b = (np.arange(n) >= second.n_t).astype(int)
    exact = la.is_exact(b1) and la.is_exact(b2)
    mid = b2.copy()
    for j in range(n):
        for k in range(n):
            power = a[j] + b[k]
            if power % 2:
                if not _small(la.max_abs(mid[j, k]), exact, DEFAULT_TOL):
                    raise ValueError("twice-rotated basis is not real")
                mid[j, k] = 0 if exact else 0.0
            elif power == 2:
                mid[j, k] = -mid[j, k]
    return b1 @ mid


def double_wick(L: LieAlgebra, m: Metric, theta, tol: float = DEFAULT_TOL):
    """Rotate twice (second time with the induced involution); return the result
    expressed back in the original basis."""
    first = wick_rotate(L, m, theta, tol)
    second = wick_rotate(first.algebra, first.metric, first.involution, tol)
    basis = _composite_basis(first, second)
    back = act_on_bracket(second.algebra, basis)
    binv = la.inv(basis)
    g2, binv = la.promote(second.metric.form, binv)
    return back, binv.T @ g2 @ binv


def involutivity_double_wick(L: LieAlgebra, m: Metric, theta, tol: float = DEFAULT_TOL) -> bool:
    back, g_back = double_wick(L, m, theta, tol)
    c0, c1 = la.promote(L.structure, back.structure)
    g0, g1 = la.promote(m.form, g_back)
    exact = la.is_exact(c1) and la.is_exact(g1)
    return _small(la.max_abs(c0 - c1), exact, tol) and _small(la.max_abs(g0 - g1), exact, tol)


# ---------------------------------------------------------------------------
# conjugacy


@dataclass(frozen=True, eq=False)
class Conjugator:
    """phi = exp(sum_i coords[i] * generators[i]) with phi theta1 phi^-1 = theta2."""

    phi: np.ndarray
    generators: list
    coords: np.ndarray
    conjugation_residual: float
    isometry_residual: float
    automorphism_residual: float | None = None
    method: str = "closed_form"


def _require_metric_cartan(m, theta, tol, label):
    inv = is_metric_cartan(m, theta, tol)
    if not inv.is_metric_cartan:
        raise NotCartanError(f"{label} is not a metric Cartan involution")
    return la.as_float(inv.matrix)


def _positive_log(m, theta1, theta2):
    """Generator y in the symmetric part of o(p, q) (w.r.t. theta1) with exp(2y) = theta2 theta1."""
    frame, n_t = adapted_frame(m, theta1)
    n = m.dim
    j = np.diag([1.0] * n_t + [-1.0] * (n - n_t))
    t2 = np.linalg.solve(frame, theta2 @ frame)
    q = t2 @ j
    w, v = np.linalg.eigh(0.5 * (q + q.T))
    if np.any(w <= 0):
        raise NotCartanError("theta2 theta1 is not positive; inputs are not Cartan for the same metric")
    y = (v * (0.5 * np.log(w))) @ v.T
    return frame @ y @ np.linalg.inv(frame)


def _conj_residual(phi, theta1, theta2):
    return float(np.max(np.abs(phi @ theta1 @ np.linalg.inv(phi) - theta2)))


def conjugate_metric_cartan(m: Metric, theta1, theta2, tol: float = DEFAULT_TOL) -> Conjugator:
    """phi = exp(y) in O(p, q)_0 with phi theta1 phi^-1 = theta2, y symmetric for g_theta1."""
    t1 = _require_metric_cartan(m, theta1, tol, "theta1")
    t2 = _require_metric_cartan(m, theta2, tol, "theta2")
    y = _positive_log(m, t1, t2)
    phi = expm(y)
    return Conjugator(phi, [y], np.array([1.0]), _conj_residual(phi, t1, t2),
                      isometry_residual(m, phi))


def conjugate_lie_cartan(L: LieAlgebra, m: Metric, theta1, theta2, budget=(16, 500),
                         seed: int = 0, tol: float = DEFAULT_TOL) -> Conjugator | None:
    """phi in Aut(L)_0 cap O(p, q)_0 conjugating theta1 to theta2, or None without a certificate.

    The candidate exp((1/2) log(theta2 theta1)), projected onto Der(L) cap o(p, q),
    is tried first; a multi-start least-squares search over exp-coordinates follows.
    """
    for label, th in (("theta1", theta1), ("theta2", theta2)):
        if not is_lie_cartan(L, m, th, tol).is_lie_cartan:
            raise NotCartanError(f"{label} is not a Lie-algebra Cartan involution")
    t1, t2 = la.as_float(la.coerce(theta1)), la.as_float(la.coerce(theta2))
    gens = [la.as_float(y) for y in isometric_derivations(L, m, tol)]
    n = L.dim
    if not gens:
        if _conj_residual(np.eye(n), t1, t2) <= tol:
            return Conjugator(np.eye(n), [], np.zeros(0), 0.0, 0.0, 0.0)
        return None
    basis = np.stack([y.ravel() for y in gens], axis=1)

    def build(coords):
        return expm((basis @ coords).reshape(n, n))

    def residual(coords):
        phi = build(coords)
        return (phi @ t1 - t2 @ phi).ravel()

    def certify(coords, method):
        phi = build(coords)
        return Conjugator(phi, gens, coords, _conj_residual(phi, t1, t2), isometry_residual(m, phi),
                          automorphism_residual(L.astype_float(), phi, tol), method)

    y = _positive_log(m, t1, t2)
    coords0 = np.linalg.lstsq(basis, y.ravel(), rcond=None)[0]
    best = certify(coords0, "closed_form")
    if best.conjugation_residual <= tol and best.automorphism_residual <= tol:
        return best

    starts, iterations = budget
    rng = np.random.default_rng(seed)
    for k in range(starts):
        x0 = coords0 if k == 0 else rng.normal(size=basis.shape[1])
        sol = least_squares(residual, x0, method="lm", max_nfev=iterations * (basis.shape[1] + 1),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        cand = certify(sol.x, "search")
        if cand.conjugation_residual < best.conjugation_residual:
            best = cand
    if best.conjugation_residual <= tol and best.automorphism_residual <= tol and best.isometry_residual <= tol:
        return best
    return None


def is_killing_cartan(L: LieAlgebra, theta, tol: float = DEFAULT_TOL) -> bool:
    """True iff theta is an involutive automorphism with -kappa(., theta .) positive definite."""
    kappa = killing_form(L)
    try:
        signature_of_form(kappa, tol)
    except DegenerateMetricError as exc:
        raise NotSemisimpleError("Killing form is degenerate; algebra is not semisimple") from exc
    return is_lie_cartan(L, Metric(-kappa), theta, tol).is_lie_cartan

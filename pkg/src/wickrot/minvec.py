"""Real GIT on the space of brackets: O(p, q) acting on antisymmetric maps g x g -> g.

Internally everything lives in a g_theta0-orthonormal frame P, where the metric is
J = diag(I_p, -I_q), theta0 = J, and the norm on brackets is the plain Euclidean
sum of squares over i < j. Maps passed in or returned by the public functions are
in the algebra's own basis.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import expm
from scipy.optimize import least_squares

from . import _linalg as la
from .algebra import LieAlgebra, change_basis
from .cartan import Involution, NotCartanError, adapted_frame, is_lie_cartan, is_metric_cartan, reference_involution
from .metric import Metric

MINIMAL_VECTOR_FOUND = "minimal_vector_found"
CARTAN_FOUND = "cartan_found"
NO_CERTIFICATE = "no_certificate"


# ---------------------------------------------------------------------------
# frame-level kernels


def _act(h, t, hinv=None):
    if hinv is None:
        hinv = np.linalg.inv(h)
    # (h.t)_ijk = hinv_ai hinv_bj t_abm h_km, contracted pairwise (path search costs more than the work)
    t = np.tensordot(hinv, t, axes=(0, 0))
    t = np.tensordot(hinv, t, axes=(0, 1)).transpose(1, 0, 2)
    return t @ h.T


def _infinitesimal(x, t):
    return (
        np.einsum("km,ijm->ijk", x, t)
        - np.einsum("ai,ajk->ijk", x, t)
        - np.einsum("aj,iak->ijk", x, t)
    )


def _norm2(t):
    return 0.5 * float(np.sum(t * t))


def _gl_moment(t):
    """G with <G, X>_F = <X.t, t> for every X in gl(n)."""
    return 0.5 * np.einsum("ija,ijb->ab", t, t) - np.einsum("ajk,bjk->ab", t, t)


def _moment(t, p):
    g = _gl_moment(t)
    out = np.zeros_like(g)
    out[:p, p:] = g[:p, p:]
    out[p:, :p] = g[p:, :p]
    return out


def _symmetric_generator(b, p, n):
    x = np.zeros((n, n))
    x[:p, p:] = b
    x[p:, :p] = b.T
    return x


@dataclass(frozen=True, eq=False)
class BracketVector:
    """A bracket as a vector of V with the theta0-norm.

    ``tensor`` holds the structure constants in the orthonormal frame whose columns
    are ``frame``; the first ``p`` frame vectors are g-positive.
    """

    tensor: np.ndarray
    frame: np.ndarray
    p: int

    @classmethod
    def from_algebra(cls, L: LieAlgebra, m: Metric, theta0=None) -> "BracketVector":
        if theta0 is None:
            theta0 = reference_involution(m)
        if not is_metric_cartan(m, theta0).is_metric_cartan:
            raise NotCartanError("reference involution is not a metric Cartan involution")
        frame, p = adapted_frame(m, theta0)
        t = change_basis(L.astype_float(), frame).structure
        return cls(np.array(t), frame, p)

    @property
    def n(self) -> int:
        return self.frame.shape[0]

    @property
    def q(self) -> int:
        return self.n - self.p

    @property
    def j(self) -> np.ndarray:
        return np.diag([1.0] * self.p + [-1.0] * self.q)

    @property
    def theta0(self) -> np.ndarray:
        return self.from_frame(self.j)

    def to_frame(self, x):
        return np.linalg.solve(self.frame, la.as_float(x) @ self.frame)

    def from_frame(self, x):
        return self.frame @ x @ np.linalg.inv(self.frame)

    def with_tensor(self, t) -> "BracketVector":
        return BracketVector(t, self.frame, self.p)

    def to_algebra(self, labels=(), name=None) -> LieAlgebra:
        """The bracket expressed back in the algebra's basis."""
        frame_alg = LieAlgebra(self.tensor, tuple(labels) if labels else (), name)
        return change_basis(frame_alg, np.linalg.inv(self.frame), labels)


def theta_norm(v: BracketVector) -> float:
    return float(np.sqrt(_norm2(v.tensor)))


def act(h, v: BracketVector) -> BracketVector:
    return v.with_tensor(_act(v.to_frame(h), v.tensor))


def infinitesimal_action(x, v: BracketVector) -> BracketVector:
    """(X.mu)(x, y) = X mu(x, y) - mu(Xx, y) - mu(x, Xy)."""
    return v.with_tensor(_infinitesimal(v.to_frame(x), v.tensor))


def inner(v: BracketVector, w: BracketVector) -> float:
    return 0.5 * float(np.sum(v.tensor * w.tensor))


def moment(v: BracketVector) -> np.ndarray:
    """The g_theta0-symmetric M in o(p, q) with <M, X> = <X.v, v> for symmetric X in o(p, q)."""
    return v.from_frame(_moment(v.tensor, v.p))


def moment_norm(v: BracketVector) -> float:
    return float(np.linalg.norm(_moment(v.tensor, v.p)))


def symmetric_isometry_basis(v: BracketVector) -> list:
    """Basis (algebra coordinates) of the g_theta0-symmetric part of o(p, q)."""
    out = []
    for a in range(v.p):
        for b in range(v.q):
            e = np.zeros((v.p, v.q))
            e[a, b] = 1.0
            out.append(v.from_frame(_symmetric_generator(e, v.p, v.n)))
    return out


def is_minimal(v: BracketVector, tol: float = 1e-9, probes: int = 100, seed: int = 0) -> bool:
    """First-order criterion ||m(v)|| < tol, then random probing of ||e^{tX} v|| >= ||v|| - tol."""
    n2 = _norm2(v.tensor)
    if n2 == 0.0:
        return True
    if moment_norm(v) >= tol * max(1.0, n2):
        return False
    rng = np.random.default_rng(seed)
    base = np.sqrt(n2)
    for _ in range(probes):
        x = _symmetric_generator(rng.normal(size=(v.p, v.q)), v.p, v.n)
        t = rng.uniform(-1.0, 1.0)
        if np.sqrt(_norm2(_act(expm(t * x), v.tensor))) < base - tol:
            return False
    return True


# ---------------------------------------------------------------------------
# norm-minimizing flow


@dataclass(frozen=True)
class FlowConfig:
    step: float = 0.1
    tol_moment: float = 1e-10
    max_iter: int = 10_000
    divergence_bound: float = 1e3
    min_step: float = 1e-14


@dataclass(frozen=True, eq=False)
class FlowResult:
    status: str
    transporter: np.ndarray  # h with final = h . start, in algebra coordinates
    final: BracketVector
    final_norm: float
    final_moment_norm: float  # ||m(v)|| / ||v||^2
    log: list = field(default_factory=list)  # (iteration, norm, moment_norm)
    theta: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def log_records(self) -> list:
        return [{"iteration": i, "norm": nv, "moment_norm": mv} for i, nv, mv in self.log]

    def write_log(self, path) -> None:
        with open(path, "w") as fh:
            for rec in self.log_records():
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


class FlowError(RuntimeError):
    pass


def _polar_radius(h):
    w = np.linalg.eigvalsh(h.T @ h)
    return float(0.5 * np.linalg.norm(np.log(w)))


def minimal_vector_flow(L: LieAlgebra, m: Metric, theta0=None, config: FlowConfig = FlowConfig(),
                        verify_tol: float = 1e-8) -> FlowResult:
    """Descend the orbit norm by v <- exp(-s m(v)/|v|^2) . v with step halving.

    The moment criterion is scale-free: ||m(v)|| / ||v||^2 < tol_moment.
    """
    v = BracketVector.from_algebra(L, m, theta0)
    t = v.tensor
    n = v.n
    h = np.eye(n)
    n2 = _norm2(t)
    log = []
    if n2 == 0.0:
        log.append((0, 0.0, 0.0))
        return FlowResult(MINIMAL_VECTOR_FOUND, np.eye(n), v, 0.0, 0.0, log, None,
                          {"reason": "abelian", "iterations": 0, "norm": 0.0, "moment_norm": 0.0,
                           "transporter_growth": 0.0})

    status, reason = NO_CERTIFICATE, "budget_exhausted"
    growth = 0.0
    for it in range(config.max_iter + 1):
        mom = _moment(t, v.p)
        rel = float(np.linalg.norm(mom)) / n2
        log.append((it, float(np.sqrt(n2)), rel))
        if not np.isfinite(rel) or not np.isfinite(n2):
            raise FlowError(f"non-finite values at iteration {it}: norm^2={n2}, moment={rel}")
        if rel < config.tol_moment:
            status, reason = MINIMAL_VECTOR_FOUND, "moment_below_tol"
            break
        if it == config.max_iter:
            break
        direction = -mom / n2
        s = config.step
        while True:
            g = expm(s * direction)
            cand = _act(g, t)
            c2 = _norm2(cand)
            if c2 < n2:
                break
            # near a critical point the decrease is below rounding; accept if the moment still drops
            if c2 <= n2 * (1.0 + 8 * np.finfo(float).eps) and np.linalg.norm(_moment(cand, v.p)) < rel * n2:
                break
            s *= 0.5
            if s < config.min_step:
                break
        if s < config.min_step:
            reason = "stalled"
            break
        t, n2, h = cand, c2, g @ h
        growth = _polar_radius(h)
        if growth > config.divergence_bound:
            reason = "transporter_diverged"
            break

    final = v.with_tensor(t)
    h_alg = v.from_frame(h)
    theta = None
    if status == MINIMAL_VECTOR_FOUND:
        cand_theta = np.linalg.solve(h_alg, v.theta0 @ h_alg)
        if is_lie_cartan(L, m, cand_theta, verify_tol * max(1.0, la.max_abs(L.structure))).is_lie_cartan:
            status, theta = CARTAN_FOUND, cand_theta
    diagnostics = {
        "reason": reason,
        "iterations": log[-1][0],
        "norm": log[-1][1],
        "moment_norm": log[-1][2],
        "transporter_growth": growth,
    }
    return FlowResult(status, h_alg, final, float(np.sqrt(n2)), log[-1][2], log, theta, diagnostics)


# ---------------------------------------------------------------------------
# Cartan-involution search


@dataclass(frozen=True, eq=False)
class CartanSearch:
    involution: Involution | None
    residual: float  # best relative ||theta.mu - mu|| / ||mu|| over all starts
    start_index: int | None
    start_residuals: tuple
    seed: int
    certificates: tuple = ()  # (start index, Involution) for every start that verified

    @property
    def certified(self) -> bool:
        return self.involution is not None

    @property
    def status(self) -> str:
        return CARTAN_FOUND if self.certified else NO_CERTIFICATE


def snap_rational(L: LieAlgebra, m: Metric, theta, max_denominator: int = 64, tol: float = 1e-9):
    """Exact involution close to ``theta`` that verifies exactly, for rational (L, m); else None."""
    if not (L.exact and m.exact):
        return None
    theta = la.as_float(theta)
    approx = np.empty(theta.shape, dtype=object)
    for idx, val in np.ndenumerate(theta):
        approx[idx] = Fraction(float(val)).limit_denominator(max_denominator)
    if la.max_abs(la.as_float(approx) - theta) > tol * max(1.0, la.max_abs(theta)):
        return None
    inv = is_lie_cartan(L, m, approx)
    return inv if inv.is_lie_cartan else None


DEFAULT_BUDGET = (32, 2000)
SEARCH_RADIUS = 8.0


def search_lie_cartan(L: LieAlgebra, m: Metric, budget=DEFAULT_BUDGET, seed: int = 0,
                      tol: float = 1e-8, theta0=None) -> CartanSearch:
    """Multi-start search over theta = e^x theta0 e^-x, x in the theta0-symmetric part of o(p, q),
    minimizing ||theta.mu - mu||. Only verified involutions are returned."""
    v = BracketVector.from_algebra(L, m, theta0)
    t0 = v.tensor
    n, p, q = v.n, v.p, v.q
    scale = np.sqrt(_norm2(t0))
    verify_tol = tol * max(1.0, la.max_abs(L.structure))

    def theta_frame(x):
        return expm(2.0 * _symmetric_generator(x.reshape(p, q), p, n)) @ v.j

    def verify(x):
        theta = v.from_frame(theta_frame(x))
        inv = is_lie_cartan(L, m, theta, verify_tol)
        if not inv.is_lie_cartan:
            return None
        return snap_rational(L, m, theta) or inv

    if scale == 0.0 or p * q == 0:
        inv = verify(np.zeros(p * q))
        res = 0.0 if inv is not None else float(np.sqrt(_norm2(_act(v.j, t0, v.j) - t0)) / max(scale, 1e-300))
        certs = ((0, inv),) if inv is not None else ()
        return CartanSearch(inv, res, 0 if inv else None, (res,), seed, certs)

    iu = np.triu_indices(n, 1)

    def residual(x):
        th = theta_frame(x)
        diff = _act(th, t0, th) - t0
        return diff[iu[0], iu[1], :].ravel() / scale

    starts, iterations = budget
    rng = np.random.default_rng(seed)
    results = []
    for k in range(starts):
        x0 = np.zeros(p * q) if k == 0 else rng.normal(size=p * q)
        x0 = np.clip(x0, -SEARCH_RADIUS, SEARCH_RADIUS)
        sol = least_squares(residual, x0, bounds=(-SEARCH_RADIUS, SEARCH_RADIUS), method="trf",
                            max_nfev=iterations, xtol=1e-12, ftol=1e-12, gtol=1e-12)
        res = float(np.linalg.norm(sol.fun))
        results.append((res, k, sol.x))

    start_residuals = tuple(r for r, _, _ in results)
    certs = []
    for res, k, x in sorted(results, key=lambda r: (r[0], r[1])):
        if res >= tol:
            break
        inv = verify(x)
        if inv is not None:
            certs.append((k, res, inv))
    if not certs:
        return CartanSearch(None, min(start_residuals), None, start_residuals, seed)
    k, res, inv = certs[0]
    return CartanSearch(inv, res, k, start_residuals, seed, tuple((c[0], c[2]) for c in certs))


def find_lie_cartan(L: LieAlgebra, m: Metric, budget=DEFAULT_BUDGET, seed: int = 0,
                    tol: float = 1e-8, theta0=None) -> Involution | None:
    """A verified Lie-algebra Cartan involution of (L, m), or None (no certificate, not a proof)."""
    return search_lie_cartan(L, m, budget, seed, tol, theta0).involution

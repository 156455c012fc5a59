"""Finite-dimensional real Lie algebras given by structure constants."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _linalg as la
from ._linalg import DEFAULT_TOL


class DimensionError(ValueError):
    pass


class SingularMapError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Structure constants ``structure[i, j, k]`` = coefficient of e_k in [e_i, e_j].

    The array is fully antisymmetric in (i, j). Entries are Fractions (object
    dtype) for exact algebras and floats otherwise.
    """

    structure: np.ndarray
    basis_labels: tuple = ()
    name: str | None = None

    def __post_init__(self):
        c = la.coerce(self.structure)
        object.__setattr__(self, "structure", c)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]):
            raise DimensionError(f"structure must have shape (n, n, n), got {c.shape}")
        if not la.is_zero(c + c.transpose(1, 0, 2), DEFAULT_TOL):
            raise ValueError("structure constants are not antisymmetric")
        c.flags.writeable = False
        if not self.basis_labels:
            object.__setattr__(self, "basis_labels", tuple(f"e{i + 1}" for i in range(c.shape[0])))
        elif len(self.basis_labels) != c.shape[0]:
            raise DimensionError("basis_labels length does not match dimension")
        else:
            object.__setattr__(self, "basis_labels", tuple(self.basis_labels))

    @classmethod
    def from_brackets(cls, dim, brackets, basis_labels=(), name=None, exact=True):
        """Build from ``{(i, j): {k: coeff}}`` with 0-based i < j."""
        c = la.zeros((dim, dim, dim), exact=exact)
        for (i, j), coeffs in brackets.items():
            if not (0 <= i < j < dim):
                raise DimensionError(f"bracket index pair ({i}, {j}) must satisfy 0 <= i < j < {dim}")
            for k, v in coeffs.items():
                v = la._to_fraction(v) if exact else float(v)
                c[i, j, k] = v
                c[j, i, k] = -v
        return cls(c, tuple(basis_labels), name)

    @property
    def dim(self) -> int:
        return self.structure.shape[0]

    @property
    def exact(self) -> bool:
        return la.is_exact(self.structure)

    def astype_float(self) -> "LieAlgebra":
        return LieAlgebra(la.as_float(self.structure), self.basis_labels, self.name)

    def brackets(self):
        """Nonzero upper-triangular brackets as ``{(i, j): {k: coeff}}``."""
        out = {}
        n = self.dim
        for i, j in combinations(range(n), 2):
            coeffs = {k: self.structure[i, j, k] for k in range(n) if self.structure[i, j, k] != 0}
            if coeffs:
                out[(i, j)] = coeffs
        return out


def _vec(L: LieAlgebra, x):
    x = la.coerce(x)
    if x.shape != (L.dim,):
        raise DimensionError(f"expected a vector of length {L.dim}, got shape {x.shape}")
    return x


def _mat(L: LieAlgebra, a):
    a = la.coerce(a)
    if a.shape != (L.dim, L.dim):
        raise DimensionError(f"expected a {L.dim}x{L.dim} matrix, got shape {a.shape}")
    return a


def _consistent(L: LieAlgebra, *arrays):
    """Structure constants and arrays in a common scalar type."""
    out = la.promote(L.structure, *arrays)
    return out[0], out[1:]


def bracket(L: LieAlgebra, x, y):
    c, (x, y) = _consistent(L, _vec(L, x), _vec(L, y))
    return np.einsum("i,j,ijk->k", x, y, c)


def ad(L: LieAlgebra, x):
    """Matrix of y -> [x, y]; column j is [x, e_j]."""
    c, (x,) = _consistent(L, _vec(L, x))
    return np.einsum("i,ijk->kj", x, c)


def jacobi_residual(L: LieAlgebra):
    c = L.structure
    return (
        np.einsum("ijm,mkl->ijkl", c, c)
        + np.einsum("jkm,mil->ijkl", c, c)
        + np.einsum("kim,mjl->ijkl", c, c)
    )


@dataclass(frozen=True)
class JacobiReport:
    max_residual: float
    ok: bool
    worst_triple: tuple | None = None


def check_jacobi(L: LieAlgebra, tol: float = DEFAULT_TOL) -> JacobiReport:
    """Jacobi identity over all i<j<k; exact zero is demanded for rational algebras."""
    res = jacobi_residual(L)
    worst, worst_val = None, 0.0
    for i, j, k in combinations(range(L.dim), 3):
        v = la.max_abs(res[i, j, k])
        if v > worst_val:
            worst, worst_val = (i, j, k), v
    ok = worst_val == 0 if L.exact else worst_val <= tol
    return JacobiReport(worst_val, ok, worst)


def killing_form(L: LieAlgebra):
    c = L.structure
    return np.einsum("ajk,bkj->ab", c, c)


def _derivation_system(c):
    n = c.shape[0]
    e = la.eye(n, exact=la.is_exact(c))
    # coefficient of D[p, q] in component k of D[e_i,e_j] - [De_i,e_j] - [e_i,De_j]
    m = (
        np.einsum("pk,ijq->ijkpq", e, c)
        - np.einsum("qi,pjk->ijkpq", e, c)
        - np.einsum("qj,ipk->ijkpq", e, c)
    )
    return m.reshape(n**3, n * n)


def leibniz_residual(L: LieAlgebra, D) -> float:
    c, (D,) = _consistent(L, _mat(L, D))
    lhs = np.einsum("ijm,km->ijk", c, D)
    rhs = np.einsum("ai,ajk->ijk", D, c) + np.einsum("aj,iak->ijk", D, c)
    return la.max_abs(lhs - rhs)


def derivation_algebra(L: LieAlgebra, tol: float = DEFAULT_TOL) -> list:
    """Basis of Der(L) as a list of n x n matrices."""
    n = L.dim
    kernel = la.nullspace(_derivation_system(L.structure), tol)
    return [kernel[:, k].reshape(n, n) for k in range(kernel.shape[1])]


def is_automorphism(L: LieAlgebra, A, tol: float = DEFAULT_TOL) -> bool:
    return automorphism_residual(L, A, tol) <= (0 if _all_exact(L, A) else tol)


def _all_exact(L, A):
    return L.exact and la.is_exact(np.asarray(A))


def automorphism_residual(L: LieAlgebra, A, tol: float = DEFAULT_TOL) -> float:
    """max |A[e_i,e_j] - [Ae_i, Ae_j]|; raises SingularMapError for singular A."""
    c, (A,) = _consistent(L, _mat(L, A))
    if not la.is_invertible(A, tol):
        raise SingularMapError("map is singular")
    lhs = np.einsum("ijm,km->ijk", c, A)
    rhs = np.einsum("ai,bj,abk->ijk", A, A, c)
    return la.max_abs(lhs - rhs)


def act_on_bracket(L: LieAlgebra, h, tol: float = DEFAULT_TOL) -> LieAlgebra:
    """The transported bracket (h.mu)(x, y) = h mu(h^-1 x, h^-1 y)."""
    c, (h,) = _consistent(L, _mat(L, h))
    if not la.is_invertible(h, tol):
        raise SingularMapError("map is singular")
    hinv = la.inv(h)
    new = np.einsum("ai,bj,abm,km->ijk", hinv, hinv, c, h)
    new = 0.5 * (new - new.transpose(1, 0, 2)) if not la.is_exact(new) else new
    return LieAlgebra(new, L.basis_labels, L.name)


def change_basis(L: LieAlgebra, basis, labels=()) -> LieAlgebra:
    """Structure constants with respect to the columns of ``basis``."""
    out = act_on_bracket(L, la.inv(np.asarray(basis)))
    return LieAlgebra(out.structure, tuple(labels), L.name)


# ---------------------------------------------------------------------------
# structure theory


def _span_brackets(c, A, B, tol):
    n = c.shape[0]
    if A.shape[1] == 0 or B.shape[1] == 0:
        return la.zeros((n, 0), exact=la.is_exact(c))
    vecs = np.einsum("ia,jb,ijk->kab", A, B, c).reshape(n, -1)
    return la.column_basis(vecs, tol)


def center(L: LieAlgebra, tol: float = DEFAULT_TOL):
    n = L.dim
    # x with sum_i x_i C[i, j, k] = 0 for all j, k
    system = L.structure.transpose(1, 2, 0).reshape(n * n, n)
    return la.nullspace(system, tol)


def derived_algebra(L: LieAlgebra, tol: float = DEFAULT_TOL):
    full = la.eye(L.dim, exact=L.exact)
    return _span_brackets(L.structure, full, full, tol)


def radical(L: LieAlgebra, tol: float = DEFAULT_TOL):
    """Killing-orthogonal complement of the derived algebra (characteristic zero)."""
    d = derived_algebra(L, tol)
    kappa = killing_form(L)
    if d.shape[1] == 0:
        return la.eye(L.dim, exact=L.exact)
    return la.nullspace((d.T @ kappa), tol)


@dataclass(frozen=True)
class StructureReport:
    abelian: bool
    nilpotent: bool
    solvable: bool
    semisimple: bool
    reductive: bool
    derived_series_dims: tuple
    lower_central_dims: tuple
    center_dim: int
    radical_dim: int
    nilpotency_class: int | None


def structural_classify(L: LieAlgebra, tol: float = DEFAULT_TOL) -> StructureReport:
    c = L.structure
    n = L.dim
    full = la.eye(n, exact=L.exact)

    derived = [n]
    cur = full
    while True:
        cur = _span_brackets(c, cur, cur, tol)
        derived.append(cur.shape[1])
        if cur.shape[1] == 0 or cur.shape[1] == derived[-2]:
            break

    lower = [n]
    cur = full
    while True:
        cur = _span_brackets(c, full, cur, tol)
        lower.append(cur.shape[1])
        if cur.shape[1] == 0 or cur.shape[1] == lower[-2]:
            break

    nilpotent = lower[-1] == 0
    solvable = derived[-1] == 0
    center_dim = center(L, tol).shape[1]
    radical_dim = radical(L, tol).shape[1]
    return StructureReport(
        abelian=derived[1] == 0,
        nilpotent=nilpotent,
        solvable=solvable,
        semisimple=n > 0 and radical_dim == 0,
        reductive=radical_dim == center_dim,
        derived_series_dims=tuple(derived),
        lower_central_dims=tuple(lower),
        center_dim=center_dim,
        radical_dim=radical_dim,
        nilpotency_class=len(lower) - 1 if nilpotent else None,
    )


def direct_sum(*algebras: LieAlgebra, name=None) -> LieAlgebra:
    exact = all(a.exact for a in algebras)
    n = sum(a.dim for a in algebras)
    c = la.zeros((n, n, n), exact=exact)
    labels = []
    off = 0
    for k, a in enumerate(algebras):
        d = a.dim
        c[off:off + d, off:off + d, off:off + d] = a.structure if exact else la.as_float(a.structure)
        labels += [f"{lab}_{k + 1}" for lab in a.basis_labels]
        off += d
    return LieAlgebra(c, tuple(labels), name)


def abelian(n: int, name=None) -> LieAlgebra:
    return LieAlgebra(la.zeros((n, n, n)), (), name or f"abelian{n}")


__all__ = [
    "LieAlgebra", "DimensionError", "SingularMapError", "JacobiReport", "StructureReport",
    "bracket", "ad", "check_jacobi", "jacobi_residual", "killing_form", "derivation_algebra",
    "leibniz_residual", "is_automorphism", "automorphism_residual", "act_on_bracket",
    "change_basis", "structural_classify", "center", "radical", "derived_algebra",
    "direct_sum", "abelian",
]

"""Small dense linear algebra kernel with an exact (Fraction) path and a float path.

Arrays with ``dtype=object`` hold :class:`fractions.Fraction` entries and are
treated as exact; everything else is binary64.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import numpy as np

DEFAULT_TOL = 1e-9


def is_exact(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def exact_array(data) -> np.ndarray:
    """Convert nested ints/Fractions/rational strings to an object array of Fractions."""
    arr = np.array(data, dtype=object)
    flat = [_to_fraction(v) for v in arr.ravel()]
    out = np.empty(arr.shape, dtype=object)
    out.ravel()[:] = flat
    return out


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (bool, np.bool_)):
        raise TypeError("boolean is not a scalar")
    if isinstance(v, (int, np.integer, Rational)):
        return Fraction(int(v)) if isinstance(v, (int, np.integer)) else Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (float, np.floating)) and float(v).is_integer():
        return Fraction(int(v))
    raise TypeError(f"not an exact scalar: {v!r}")


def as_float(a) -> np.ndarray:
    return np.asarray(a, dtype=float)


def promote(*arrays):
    """Return the arrays unchanged if all are exact, otherwise all as float."""
    if all(is_exact(a) for a in arrays):
        return arrays
    return tuple(as_float(a) for a in arrays)


def eye(n: int, exact: bool = True) -> np.ndarray:
    if exact:
        out = np.empty((n, n), dtype=object)
        out[...] = Fraction(0)
        for i in range(n):
            out[i, i] = Fraction(1)
        return out
    return np.eye(n)


def zeros(shape, exact: bool = True) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out[...] = Fraction(0)
        return out
    return np.zeros(shape)


def max_abs(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if is_exact(a):
        return float(max(abs(v) for v in a.ravel()))
    return float(np.max(np.abs(a)))


def is_zero(a, tol: float = DEFAULT_TOL) -> bool:
    if is_exact(a):
        return all(v == 0 for v in np.asarray(a).ravel())
    return max_abs(a) <= tol


# ---------------------------------------------------------------------------
# exact row reduction


def rref(a: np.ndarray):
    """Reduced row echelon form over the rationals. Returns (R, pivot_columns)."""
    m = [list(row) for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else a.shape[1]
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        out[i, :] = m[i]
    return out, pivots


def nullspace(a, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Basis of the right kernel of ``a`` as the columns of the returned matrix."""
    a = np.asarray(a)
    n = a.shape[1]
    if is_exact(a):
        if a.shape[0] == 0:
            return eye(n)
        r, pivots = rref(a)
        free = [c for c in range(n) if c not in pivots]
        basis = zeros((n, len(free)))
        for k, f in enumerate(free):
            basis[f, k] = Fraction(1)
            for row, pc in enumerate(pivots):
                basis[pc, k] = -r[row, f]
        return basis
    if a.shape[0] == 0:
        return np.eye(n)
    _, s, vh = np.linalg.svd(a)
    scale = max(1.0, s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol * scale))
    return vh[rank:].T.copy()


def rank(a, tol: float = DEFAULT_TOL) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    if is_exact(a):
        return len(rref(a)[1])
    s = np.linalg.svd(a, compute_uv=False)
    scale = max(1.0, s[0])
    return int(np.sum(s > tol * scale))


def column_basis(a, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Independent columns spanning the column space of ``a``."""
    a = np.asarray(a)
    n = a.shape[0]
    if a.size == 0 or a.shape[1] == 0:
        return zeros((n, 0), exact=is_exact(a) or a.size == 0)
    if is_exact(a):
        _, pivots = rref(a)
        return a[:, pivots].copy()
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    scale = max(1.0, s[0])
    k = int(np.sum(s > tol * scale))
    return u[:, :k].copy()


def solve(a, b):
    """Solve ``a x = b`` for square nonsingular ``a``; ``b`` may be a matrix."""
    if is_exact(a) and is_exact(b):
        n = a.shape[0]
        b2 = b.reshape(n, -1)
        aug = np.concatenate([a, b2], axis=1)
        r, pivots = rref(aug)
        if pivots[:n] != list(range(n)):
            raise np.linalg.LinAlgError("singular matrix")
        return r[:, n:].reshape(b.shape)
    return np.linalg.solve(as_float(a), as_float(b))


def inv(a):
    a = np.asarray(a)
    if is_exact(a):
        return solve(a, eye(a.shape[0]))
    return np.linalg.inv(a)


def is_invertible(a, tol: float = DEFAULT_TOL) -> bool:
    return rank(a, tol) == np.asarray(a).shape[0]


def lstsq_exact(a, b):
    """Exact solution of a consistent system ``a x = b``; None when inconsistent.

    Free variables are set to zero.
    """
    n = a.shape[1]
    aug = np.concatenate([a, b.reshape(-1, 1)], axis=1)
    r, pivots = rref(aug)
    if n in pivots:
        return None
    x = zeros(n)
    for row, pc in enumerate(pivots):
        x[pc] = r[row, n]
    return x


def signed_orthogonalize(vectors, g, tol: float = DEFAULT_TOL) -> np.ndarray:
    """g-orthogonal basis of span(vectors) for a form nondegenerate on that span.

    Gram-Schmidt against an indefinite form, without normalization so rational
    input stays rational. Null pivots are repaired by adding a partner vector.
    """
    exact = is_exact(vectors) and is_exact(g)
    if not exact:
        vectors, g = as_float(vectors), as_float(g)
    pool = [vectors[:, k].copy() for k in range(vectors.shape[1])]
    out = []

    def ip(x, y):
        return x @ g @ y

    def nonzero(v):
        return v != 0 if exact else abs(v) > tol

    while pool:
        idx = next((k for k, v in enumerate(pool) if nonzero(ip(v, v))), None)
        if idx is None:
            pair = next(
                ((a, b) for a in range(len(pool)) for b in range(a + 1, len(pool))
                 if nonzero(ip(pool[a], pool[b]))),
                None,
            )
            if pair is None:
                raise ValueError("form is degenerate on the subspace")
            a, b = pair
            pool[a] = pool[a] + pool[b]
            idx = a
        v = pool.pop(idx)
        vv = ip(v, v)
        out.append(v)
        pool = [w - (ip(v, w) / vv) * v for w in pool]
    if not out:
        return zeros((vectors.shape[0], 0), exact=exact)
    return np.stack(out, axis=1)


def coerce(a) -> np.ndarray:
    """Exact array for integer/rational input, float array otherwise."""
    if isinstance(a, np.ndarray):
        if a.dtype == object:
            return exact_array(a)
        if np.issubdtype(a.dtype, np.integer):
            return exact_array(a)
        return a.astype(float)
    try:
        return exact_array(a)
    except (TypeError, ValueError):
        return np.asarray(a, dtype=float)

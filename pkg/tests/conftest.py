import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy.linalg import expm

from wickrot import _linalg as la
from wickrot.algebra import LieAlgebra


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def exact(rows):
    return la.exact_array(rows)


def diag(*vals):
    return la.exact_array(np.diag(vals).astype(int))


def random_isometry(g, rng, scale=0.5):
    """exp(g^-1 A) with A antisymmetric: an element of the identity component of O(g)."""
    g = la.as_float(g)
    n = g.shape[0]
    a = rng.normal(scale=scale, size=(n, n))
    return expm(np.linalg.solve(g, a - a.T))


def random_invertible(n, rng, scale=0.5):
    while True:
        h = np.eye(n) + scale * rng.normal(size=(n, n))
        if abs(np.linalg.det(h)) > 0.2:
            return h


def matrix_algebra(mats, labels=(), name=None):
    """Structure constants of a matrix Lie algebra, read off from commutators by least squares.

    Independent of the bracket code in the package: used as an oracle.
    """
    basis = np.stack([np.asarray(m, dtype=complex).ravel() for m in mats], axis=1)
    n = len(mats)
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            coef, *_ = np.linalg.lstsq(basis, comm.ravel(), rcond=None)
            assert np.allclose(basis @ coef, comm.ravel())
            c[i, j] = coef.real
    return LieAlgebra(c, tuple(labels), name)


def finite_difference(f, t=1e-5):
    return (f(t) - f(-t)) / (2 * t)


def random_metric(p, q, rng):
    """Q^T D Q with Q orthogonal and |D| in [0.5, 2]: a well-conditioned form of signature (p, q)."""
    n = p + q
    qmat, _ = np.linalg.qr(rng.normal(size=(n, n)))
    d = rng.uniform(0.5, 2.0, size=n) * np.array([1.0] * p + [-1.0] * q)
    g = qmat.T @ np.diag(d) @ qmat
    return 0.5 * (g + g.T)


@pytest.fixture(scope="session")
def certified():
    """(name, L, m, Involution) for every catalog entry and sign where the search certifies."""
    from wickrot import catalog as cat
    from wickrot.minvec import find_lie_cartan

    out = []
    for name, L, m in cat.entries():
        for mm in (m, -m):
            inv = find_lie_cartan(L, mm, budget=(4, 500))
            if inv is not None:
                out.append((name, L, mm, inv))
    return out


# ---------------------------------------------------------------------------
# acceptance bookkeeping: one PASS/FAIL line per criterion in the terminal summary

_CRITERIA: dict = {}


@pytest.fixture
def criterion():
    @contextmanager
    def run(number, title):
        entry = _CRITERIA.setdefault(number, {"title": title, "ok": [], "seconds": 0.0})
        start = time.perf_counter()
        try:
            yield
        except BaseException:
            entry["ok"].append(False)
            raise
        else:
            entry["ok"].append(True)
        finally:
            entry["seconds"] = max(entry["seconds"], time.perf_counter() - start)

    return run


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        verdict = "PASS" if all(e["ok"]) else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:>2}: {verdict}  {e['title']}  (slowest part {e['seconds']:.2f}s)")

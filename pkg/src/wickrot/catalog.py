"""Built-in example algebras with exact metrics."""
from __future__ import annotations

import numpy as np

from . import _linalg as la
from .algebra import LieAlgebra, abelian, direct_sum, killing_form
from .metric import Metric


class CatalogError(KeyError):
    def __str__(self):
        return self.args[0]


def heisenberg() -> LieAlgebra:
    return LieAlgebra.from_brackets(3, {(0, 1): {2: 1}}, ("e1", "e2", "e3"), "heis3")


def _named(L, name):
    return LieAlgebra(L.structure, L.basis_labels, name)


def sl2r() -> LieAlgebra:
    return LieAlgebra.from_brackets(
        3, {(0, 1): {1: 2}, (0, 2): {2: -2}, (1, 2): {0: 1}}, ("H", "E", "F"), "sl2r")


def su2() -> LieAlgebra:
    return LieAlgebra.from_brackets(
        3, {(0, 1): {2: 2}, (1, 2): {0: 2}, (0, 2): {1: -2}}, ("u1", "u2", "u3"), "su2")


def o13() -> LieAlgebra:
    """Rotations J and boosts K: [Ji,Jj] = Jk, [Ji,Kj] = Kk, [Ki,Kj] = -Jk for cyclic (i,j,k)."""
    br = {}

    def put(a, b, k, v):
        if a < b:
            br.setdefault((a, b), {})[k] = v
        else:
            br.setdefault((b, a), {})[k] = -v

    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        put(i, j, k, 1)
        put(i, j + 3, k + 3, 1)
        put(j, i + 3, k + 3, -1)
        put(i + 3, j + 3, k, -1)
    return LieAlgebra.from_brackets(6, br, ("J1", "J2", "J3", "K1", "K2", "K3"), "o13")


def _block(*forms):
    n = sum(f.shape[0] for f in forms)
    out = la.zeros((n, n))
    off = 0
    for f in forms:
        d = f.shape[0]
        out[off:off + d, off:off + d] = f
        off += d
    return out


def _diag(*vals):
    return la.exact_array(np.diag(vals).astype(int))


def _heis3_lorentz():
    return _named(heisenberg(), "heis3_lorentz"), Metric(_diag(-1, -1, 1))


def _killing_entry(L, name):
    return _named(L, name), Metric(killing_form(L))


def _sl2r2(name, s1, s2):
    L = sl2r()
    kappa = killing_form(L)
    S = direct_sum(L, L, name=name)
    return S, Metric(_block(kappa * s1, kappa * s2))


def _sl2r_plus_r():
    L = sl2r()
    S = direct_sum(L, abelian(1), name="sl2r_plus_r")
    S = LieAlgebra(S.structure, ("H", "E", "F", "Z"), "sl2r_plus_r")
    return S, Metric(_block(-killing_form(L), _diag(1)))


_ENTRIES = {
    "heis3_lorentz": ("Heisenberg algebra [e1,e2]=e3 with metric diag(-1,-1,1)", _heis3_lorentz),
    "sl2r_killing": ("sl(2,R) in the basis (H,E,F) with its Killing form, signature (2,1)",
                     lambda: _killing_entry(sl2r(), "sl2r_killing")),
    "su2_killing": ("su(2) with [u1,u2]=2u3 (cyclic) and its Killing form -8I, signature (0,3)",
                    lambda: _killing_entry(su2(), "su2_killing")),
    "sl2r2_mixed": ("sl(2,R)+sl(2,R) with -kappa on the first and kappa on the second copy, signature (3,3)",
                    lambda: _sl2r2("sl2r2_mixed", -1, 1)),
    "sl2r2_minusk": ("sl(2,R)+sl(2,R) with -kappa on both copies, signature (2,4)",
                     lambda: _sl2r2("sl2r2_minusk", -1, -1)),
    "o13_killing": ("so(1,3) with rotations J and boosts K and its Killing form, signature (3,3)",
                    lambda: _killing_entry(o13(), "o13_killing")),
    "abelian3": ("abelian R^3 with metric diag(1,1,-1)", lambda: (abelian(3, "abelian3"), Metric(_diag(1, 1, -1)))),
    "sl2r_plus_r": ("sl(2,R)+R with -kappa on sl(2,R) and +1 on the centre, signature (2,2)", _sl2r_plus_r),
}


def names() -> list:
    return sorted(_ENTRIES)


def describe(name: str) -> str:
    _check(name)
    return _ENTRIES[name][0]


def _check(name):
    if name not in _ENTRIES:
        raise CatalogError(f"unknown catalog entry {name!r}; available: {', '.join(names())}")


def catalog(name: str):
    """(LieAlgebra, Metric) for a named example, exact rational data."""
    _check(name)
    return _ENTRIES[name][1]()


def entries():
    """Iterate (name, LieAlgebra, Metric) over the whole catalog."""
    for name in names():
        L, m = catalog(name)
        yield name, L, m

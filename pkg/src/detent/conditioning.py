"""Conditioned kernels and permitted pairs.

For a projection ``P`` and disjoint finite ``C`` (conditioned in) and ``D``
(conditioned out):

* ``P_{xC}``   projection onto ``range(P)`` intersected with ``[C]^perp``;
* ``P_{/C}``   ``P_{xC} + P_{[C]}``;
* ``P_{-D}``   ``I - (I - P)_{/D}``;
* ``P_{/C-D}`` ``(P_{/C})_{-D}``, whose DPP is ``B^P`` conditioned on
  ``B^P`` meeting ``C u D`` exactly in ``C``.

The array-level helpers ``include_update`` / ``exclude_update`` are the
Schur-complement forms of the same steps and are valid for any symmetric
contraction, not just projections.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import NotPermitted, PivotTooSmall, UsageError
from .kernels import PROJECTION, Kernel, validate_kernel

PIVOT_TOL = 1e-10
GRAM_TOL = 1e-10


@dataclass(frozen=True)
class ConditionPair:
    C: tuple[int, ...] = ()
    D: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "C", tuple(int(x) for x in self.C))
        object.__setattr__(self, "D", tuple(int(x) for x in self.D))
        if set(self.C) & set(self.D):
            raise UsageError("C and D must be disjoint")
        if len(set(self.C)) != len(self.C) or len(set(self.D)) != len(self.D):
            raise UsageError("C and D must not repeat elements")

    @classmethod
    def from_sample(cls, subset: np.ndarray, within: Iterable[int] | None = None) -> "ConditionPair":
        subset = np.asarray(subset, dtype=bool)
        idx = range(len(subset)) if within is None else sorted(within)
        return cls(tuple(i for i in idx if subset[i]), tuple(i for i in idx if not subset[i]))


@dataclass(frozen=True)
class PermittedReport:
    independent: bool
    dually_independent: bool
    permitted: bool
    min_gram_eigenvalue_C: float
    min_gram_eigenvalue_D: float


def _tidy(m):
    m = (m + m.T) / 2
    d = np.clip(np.diag(m), 0.0, 1.0)
    np.fill_diagonal(m, d)
    return m


def _check_indices(k: Kernel, idx):
    for i in idx:
        if not 0 <= i < k.size:
            raise UsageError(f"element {i} outside ground set of size {k.size}")


def downdate(m: np.ndarray, c: int) -> np.ndarray:
    """``M - (Mc)(Mc)^T / <Mc, c>`` on a plain array."""
    piv = m[c, c]
    if piv <= PIVOT_TOL:
        raise PivotTooSmall(f"pivot <Pc, c> = {piv:.3e} at element {c}")
    col = m[:, c].copy()
    return _tidy(m - np.outer(col, col) / piv)


def _eliminate_all(m, elems):
    for c in elems:
        m = downdate(m, c)
    return m


def _cond_in(m, C):
    """``P_{/C}`` on an array: eliminate C, then add the coordinate projection on C."""
    if not C:
        return m
    m = _eliminate_all(m, sorted(C))
    idx = np.asarray(sorted(C))
    m[idx, idx] += 1.0
    return _tidy(m)


def _cond_out(m, D):
    """``P_{-D} = I - (I - P)_{/D}``."""
    if not D:
        return m
    eye = np.eye(m.shape[0])
    return _tidy(eye - _cond_in(eye - m, D))


def _projection(k: Kernel):
    if k.kind != PROJECTION:
        raise UsageError("conditioning operations require a projection kernel")


def eliminate_one(k: Kernel, c: int) -> Kernel:
    """Rank-one downdate ``P_{x{c}}``; the rank drops by one."""
    _projection(k)
    _check_indices(k, [c])
    return validate_kernel(downdate(k.matrix.copy(), int(c)), k.ground, clip=False)


def condition_in(k: Kernel, C: Iterable[int]) -> Kernel:
    _projection(k)
    C = list(C)
    _check_indices(k, C)
    return validate_kernel(_cond_in(k.matrix.copy(), C), k.ground, clip=False)


def condition_out(k: Kernel, D: Iterable[int]) -> Kernel:
    _projection(k)
    D = list(D)
    _check_indices(k, D)
    return validate_kernel(_cond_out(k.matrix.copy(), D), k.ground, clip=False)


def _gram_min(m, idx):
    if not idx:
        return np.inf
    g = m[np.ix_(idx, idx)]
    return float(np.linalg.eigvalsh(g)[0])


def check_permitted(k: Kernel, cp: ConditionPair) -> PermittedReport:
    _check_indices(k, cp.C + cp.D)
    m = k.matrix
    lc = _gram_min(m, list(cp.C))
    ld = _gram_min(np.eye(k.size) - m, list(cp.D))
    ind, dual = lc > GRAM_TOL, ld > GRAM_TOL
    disjoint = not (set(cp.C) & set(cp.D))
    return PermittedReport(ind, dual, ind and dual and disjoint, lc, ld)


def _require_permitted(k, cp):
    rep = check_permitted(k, cp)
    if not rep.independent:
        raise NotPermitted(
            f"C is not independent (min Gram eigenvalue {rep.min_gram_eigenvalue_C:.3e})",
            rep.min_gram_eigenvalue_C,
        )
    if not rep.dually_independent:
        raise NotPermitted(
            f"D is not dually independent (min Gram eigenvalue {rep.min_gram_eigenvalue_D:.3e})",
            rep.min_gram_eigenvalue_D,
        )


def condition_pair(k: Kernel, cp: ConditionPair, order: str = "in-first") -> Kernel:
    """``P_{/C-D}`` (default) or, with ``order="out-first"``, ``P_{-D/C}``.

    Elements are eliminated in ascending index order.  For permitted finite
    pairs the two orders agree.
    """
    _projection(k)
    _require_permitted(k, cp)
    m = k.matrix.copy()
    if order == "in-first":
        m = _cond_out(_cond_in(m, cp.C), cp.D)
    elif order == "out-first":
        m = _cond_in(_cond_out(m, cp.D), cp.C)
    else:
        raise UsageError(f"unknown order {order!r}")
    return validate_kernel(m, k.ground, clip=False)


# Schur-complement steps on (possibly stacked) arrays; used by the samplers.


def include_update(m: np.ndarray, j: int) -> np.ndarray:
    """Condition on ``j`` in ``B``: ``M - M e_j e_j^T M / M_jj + e_j e_j^T``."""
    p = m[j, j]
    col = m[:, j].copy()
    out = m - np.outer(col, col) / p
    out[j, :] = 0.0
    out[:, j] = 0.0
    out[j, j] = 1.0
    return out


def exclude_update(m: np.ndarray, j: int) -> np.ndarray:
    """Condition on ``j`` not in ``B``: ``M + M e_j e_j^T M / (1 - M_jj)`` off ``j``."""
    p = m[j, j]
    col = m[:, j].copy()
    out = m + np.outer(col, col) / (1.0 - p)
    out[j, :] = 0.0
    out[:, j] = 0.0
    return out

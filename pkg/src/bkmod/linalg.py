"""Exact linear algebra over Z/p^m.

Everything the oracle needs reduces to Smith normal form over the local ring
Z/p^m, where every ideal is (p^k) and pivoting on an entry of minimal
p-adic valuation always works.  Matrices are numpy arrays, int64 when the
modulus is small enough that no intermediate product can overflow and
Python objects otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

_INT64_SAFE = 2 ** 62


def _dtype_for(mod: int, dim: int):
    return np.int64 if mod * mod * max(dim, 1) < _INT64_SAFE else object


def as_matrix(rows, ncols: int, mod: int, dtype=None) -> np.ndarray:
    dtype = dtype or _dtype_for(mod, ncols)
    if isinstance(rows, np.ndarray) and rows.size:
        A = rows.astype(dtype) if rows.dtype != dtype else rows.copy()
    else:
        rows = [list(r) for r in rows]
        A = np.zeros((len(rows), ncols), dtype=dtype)
        for i, r in enumerate(rows):
            for j, c in enumerate(r):
                A[i, j] = c
    if ncols == 0:
        return np.zeros((A.shape[0] if A.ndim == 2 else len(A), 0), dtype=dtype)
    return A.reshape(-1, ncols) % mod


def matmul_mod(A: np.ndarray, B: np.ndarray, mod: int) -> np.ndarray:
    k = A.shape[1] if A.ndim == 2 else 1
    dtype = _dtype_for(mod, k)
    if dtype is np.int64:
        return ((A % mod).astype(np.int64) @ (B % mod).astype(np.int64)) % mod
    return (A.astype(object) @ B.astype(object)) % mod


@dataclass
class Smith:
    """U @ A @ V == diag(p^exps) modulo p^m, with U and V invertible."""

    exps: list
    V: np.ndarray
    Vinv: np.ndarray
    U: Optional[np.ndarray] = None

    @property
    def rank(self) -> int:
        return len(self.exps)


def smith(A, p: int, m: int, ncols: int | None = None, left: bool = False) -> Smith:
    mod = p ** m
    if ncols is None:
        ncols = len(A[0]) if len(A) else 0
    dim = max(ncols, len(A))
    dtype = _dtype_for(mod, dim)
    A = as_matrix(A, ncols, mod, dtype)
    nr, nc = A.shape
    V = np.eye(nc, dtype=dtype)
    Vinv = np.eye(nc, dtype=dtype)
    U = np.eye(nr, dtype=dtype) if left else None
    pk = [p ** k for k in range(m + 1)]
    exps = []
    level = 0
    t = 0
    while t < min(nr, nc):
        sub = A[t:, t:]
        if not sub.any():
            break
        hit = None
        while level < m:
            mask = (sub % pk[level + 1]) != 0
            if mask.any():
                hit = np.argwhere(mask)[0]
                break
            level += 1
        if hit is None:
            break
        i, j = int(hit[0]) + t, int(hit[1]) + t
        if i != t:
            A[[t, i]] = A[[i, t]]
            if left:
                U[[t, i]] = U[[i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
            V[:, [t, j]] = V[:, [j, t]]
            Vinv[[t, j]] = Vinv[[j, t]]
        piv = int(A[t, t])
        w = piv // pk[level]
        winv = pow(w, -1, mod)
        if winv != 1:
            A[t] = (A[t] * winv) % mod
            if left:
                U[t] = (U[t] * winv) % mod
        # clear column t below the pivot
        col = A[t + 1:, t]
        nzr = np.nonzero(col)[0]
        if nzr.size:
            f = (col[nzr] // pk[level]) % mod
            rows = nzr + t + 1
            A[rows] = (A[rows] - np.outer(f, A[t])) % mod
            if left:
                U[rows] = (U[rows] - np.outer(f, U[t])) % mod
        # clear row t to the right; only A[t, j] changes since column t is now clean
        row = A[t, t + 1:]
        nzc = np.nonzero(row)[0]
        if nzc.size:
            f = (row[nzc] // pk[level]) % mod
            cols = nzc + t + 1
            V[:, cols] = (V[:, cols] - np.outer(V[:, t], f)) % mod
            Vinv[t] = (Vinv[t] + matmul_mod(f.reshape(1, -1), Vinv[cols], mod)[0]) % mod
            A[t, cols] = 0
        exps.append(level)
        t += 1
    return Smith(exps, V, Vinv, U)


def left_kernel(A, p: int, m: int, ncols: int) -> np.ndarray:
    """Generators (rows) of {y : y A = 0} over Z/p^m."""
    mod = p ** m
    A = as_matrix(A, ncols, mod)
    nr = A.shape[0]
    if nr == 0:
        return np.zeros((0, 0), dtype=A.dtype)
    S = smith(A, p, m, ncols, left=True)
    gens = []
    for i in range(nr):
        if i < S.rank:
            k = S.exps[i]
            if k == 0:
                continue
            gens.append((S.U[i] * p ** (m - k)) % mod)
        else:
            gens.append(S.U[i])
    if not gens:
        return np.zeros((0, nr), dtype=A.dtype)
    return np.array(gens, dtype=A.dtype).reshape(-1, nr)


@dataclass
class FinGroup:
    """The finite abelian p-group (Z/p^m)^dim / <relations>.

    After Smith reduction the group is a sum of cyclic groups Z/p^c for the
    entries of ``orders``; ``coords`` sends ambient vectors there and
    ``ambient`` lifts coordinates back.
    """

    p: int
    m: int
    dim: int
    relations: np.ndarray = field(repr=False)
    orders: list = field(init=False)
    _V: np.ndarray = field(init=False, repr=False)
    _Vinv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mod = self.p ** self.m
        R = as_matrix(self.relations, self.dim, mod) if len(self.relations) else np.zeros((0, self.dim), dtype=_dtype_for(mod, self.dim))
        self.relations = R
        S = smith(R, self.p, self.m, self.dim)
        cs = S.exps + [self.m] * (self.dim - S.rank)
        live = [i for i, c in enumerate(cs) if c > 0]
        self.orders = [cs[i] for i in live]
        self._V = S.V[:, live]
        self._Vinv = S.Vinv[live, :]

    @property
    def mod(self) -> int:
        return self.p ** self.m

    @property
    def ngens(self) -> int:
        return len(self.orders)

    @property
    def length(self) -> int:
        return sum(self.orders)

    @property
    def cardinality(self) -> int:
        return self.p ** self.length

    def _rows(self, Z) -> np.ndarray:
        Z = np.asarray(Z)
        if self.ngens == 0:
            return Z.reshape(Z.shape[0] if Z.ndim > 1 else 1, 0)
        return Z.reshape(-1, self.ngens)

    def _moduli(self) -> np.ndarray:
        return np.array([self.p ** c for c in self.orders], dtype=self._V.dtype)

    def reduce(self, Z: np.ndarray) -> np.ndarray:
        if not self.orders:
            return np.zeros((Z.shape[0], 0), dtype=Z.dtype)
        return Z % self._moduli()

    def coords(self, X) -> np.ndarray:
        X = as_matrix(X, self.dim, self.mod, self._V.dtype)
        if not self.orders:
            return np.zeros((X.shape[0], 0), dtype=X.dtype)
        return self.reduce(matmul_mod(X, self._V, self.mod))

    def ambient(self, Z) -> np.ndarray:
        Z = self._rows(Z)
        if not self.orders:
            return np.zeros((Z.shape[0], self.dim), dtype=self._V.dtype)
        return matmul_mod(Z, self._Vinv, self.mod)

    def hom_matrix(self, F: np.ndarray, target: "FinGroup") -> np.ndarray:
        """Coordinate matrix of the map induced by the ambient matrix F (x -> x F)."""
        if not self.orders or not target.orders:
            return np.zeros((self.ngens, target.ngens), dtype=object)
        A = matmul_mod(matmul_mod(self._Vinv, F % self.mod, self.mod), target._V, self.mod)
        return target.reduce(A)

    def is_zero(self, Z) -> np.ndarray:
        Z = self._rows(Z)
        return ~self.reduce(Z).any(axis=1)

    def subgroup_length(self, gens) -> int:
        """Length of the subgroup spanned by coordinate vectors ``gens``."""
        gens = self._rows(gens)
        if gens.shape[0] == 0 or not self.orders:
            return 0
        return self.length - self.quotient(gens).length

    def quotient(self, gens) -> "FinGroup":
        """G / <gens> presented on the cyclic coordinates of G."""
        gens = self._rows(gens)
        diag = np.zeros((self.ngens, self.ngens), dtype=object)
        for i, c in enumerate(self.orders):
            diag[i, i] = self.p ** c
        rel = np.concatenate([diag, gens.astype(object)]) if gens.shape[0] else diag
        return FinGroup(self.p, self.m, self.ngens, rel)

    def contains(self, gens, v) -> bool:
        gens = self._rows(gens)
        v = self._rows(v)[:1]
        if not self.reduce(v).any():
            return True
        both = np.concatenate([gens.astype(object), v.astype(object)])
        return self.subgroup_length(both) == self.subgroup_length(gens)

    def kernel(self, A: np.ndarray, target: "FinGroup") -> np.ndarray:
        """Generators (coordinate rows) of the kernel of z -> z A into ``target``."""
        if not self.orders:
            return np.zeros((0, 0), dtype=object)
        if not target.orders:
            return np.eye(self.ngens, dtype=object)
        mod = self.mod
        if target.m > self.m:
            raise ValueError("target modulus exceeds source modulus")
        scale = np.array([self.p ** (self.m - c) for c in target.orders], dtype=object)
        B = (np.asarray(A, dtype=object) * scale) % mod
        K = left_kernel(B, self.p, self.m, target.ngens)
        if K.shape[0] == 0:
            return np.zeros((0, self.ngens), dtype=object)
        K = self.reduce(K.astype(object))
        return K[K.any(axis=1)]

    def elements(self, budget: int) -> np.ndarray:
        """Every element as a coordinate row; refuses groups larger than ``budget``."""
        if self.cardinality > budget:
            from .errors import BudgetExceeded

            raise BudgetExceeded(f"{self.cardinality} elements exceed budget {budget}")
        if not self.orders:
            return np.zeros((1, 0), dtype=np.int64)
        ranges = [np.arange(self.p ** c, dtype=np.int64) for c in self.orders]
        grid = np.meshgrid(*ranges, indexing="ij")
        return np.stack([g.reshape(-1) for g in grid], axis=1)


def iter_elements(orders, p):
    """Plain-Python enumeration, used by tests as an independent check."""
    return product(*[range(p ** c) for c in orders])

"""Dense exact linear algebra over a prime field F_p.

Matrices are stored as numpy int64 arrays with entries reduced into [0, p).
All reductions use partial pivoting by the first nonzero entry in
left-to-right column order, so ranks, kernels and solutions are
deterministic and reproducible.  Values are immutable after construction;
every operation here is a pure function.

The supported prime range is bounded by int64 overflow: row operations
form products of two residues, so we require p**2 < 2**62.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_PRIME = 1 << 31  # p**2 stays well inside int64


class FieldError(ValueError):
    pass


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid far beyond the supported range."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise FieldError(f"modulus {p} is not prime")
    if p >= MAX_PRIME:
        raise FieldError(f"prime {p} exceeds supported bound {MAX_PRIME}")
    return p


def as_field_array(data, p: int) -> np.ndarray:
    a = np.asarray(data, dtype=np.int64) % p
    return a


@dataclass(frozen=True)
class PrimeFieldMatrix:
    """Immutable matrix of residues modulo a prime."""

    prime: int
    array: np.ndarray = field(repr=False)

    def __post_init__(self):
        check_prime(self.prime)
        a = np.asarray(self.array, dtype=np.int64)
        if a.ndim != 2:
            raise FieldError("matrix data must be two-dimensional")
        if a.size and (a.min() < 0 or a.max() >= self.prime):
            raise FieldError("entries must lie in [0, p)")
        a.setflags(write=False)
        object.__setattr__(self, "array", a)

    @classmethod
    def from_rows(cls, rows, p: int) -> "PrimeFieldMatrix":
        a = np.asarray(rows, dtype=np.int64).reshape(len(rows), -1) % p
        return cls(p, a)

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> "PrimeFieldMatrix":
        return cls(p, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, n: int, p: int) -> "PrimeFieldMatrix":
        return cls(p, np.eye(n, dtype=np.int64) % p)

    @property
    def rows(self) -> int:
        return self.array.shape[0]

    @property
    def cols(self) -> int:
        return self.array.shape[1]

    @property
    def entries(self):
        """Row-major sequence of residues."""
        return self.array.reshape(-1)

    def transpose(self) -> "PrimeFieldMatrix":
        return PrimeFieldMatrix(self.prime, self.array.T.copy())

    def matmul(self, other: "PrimeFieldMatrix") -> "PrimeFieldMatrix":
        if self.prime != other.prime:
            raise FieldError("prime mismatch")
        return PrimeFieldMatrix(self.prime, mul_mod(self.array, other.array, self.prime))


def mul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Matrix product over F_p with chunked accumulation to avoid overflow."""
    a = np.asarray(a, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    # max accumulation length before a reduction is needed
    step = max(1, (1 << 62) // (p * p))
    n = a.shape[1] if a.ndim == 2 else a.shape[0]
    if n <= step:
        return (a @ b) % p
    out = None
    for lo in range(0, n, step):
        part = a[..., lo:lo + step] @ b[lo:lo + step]
        out = part if out is None else out + part
        out %= p
    return out


def rref_mod(a: np.ndarray, p: int):
    """Reduced row echelon form over F_p.

    Returns (R, pivots); R is a fresh array, pivots the list of pivot
    column indices in increasing order.
    """
    r = np.array(a, dtype=np.int64) % p
    rows, cols = r.shape
    pivots = []
    pr = 0
    for c in range(cols):
        if pr >= rows:
            break
        nz = np.nonzero(r[pr:, c])[0]
        if nz.size == 0:
            continue
        piv = pr + nz[0]
        if piv != pr:
            r[[pr, piv]] = r[[piv, pr]]
        inv = pow(int(r[pr, c]), -1, p)
        prow = r[pr] * inv % p
        r[pr] = 0
        col = r[:, c].copy()
        nnz = int(np.count_nonzero(col))
        if 4 * nnz > rows:
            # dense column: one fused update beats masked copies
            r -= np.outer(col, prow)
            r %= p
            r[pr] = prow
        else:
            r[pr] = prow
            if nnz:
                mask = col != 0
                r[mask] = (r[mask] - np.outer(col[mask], prow)) % p
        pivots.append(c)
        pr += 1
    return r, pivots


def rank_mod(a: np.ndarray, p: int) -> int:
    if a.size == 0:
        return 0
    _, pivots = rref_mod(a, p)
    return len(pivots)


class Echelon:
    """Incremental row-echelon accumulator over F_p.

    add() reduces a row against the current pivots and absorbs it when it is
    independent; contains() tests membership in the row span.
    """

    def __init__(self, ncols: int, p: int):
        self.ncols = ncols
        self.p = p
        self.rows: list = []
        self.pivots: list = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def _reduce(self, row: np.ndarray) -> np.ndarray:
        row = row % self.p
        for r, pc in zip(self.rows, self.pivots):
            f = int(row[pc])
            if f:
                row = (row - f * r) % self.p
        return row

    def add(self, row: np.ndarray) -> bool:
        red = self._reduce(np.asarray(row, dtype=np.int64))
        nz = np.nonzero(red)[0]
        if nz.size == 0:
            return False
        pc = int(nz[0])
        red = red * pow(int(red[pc]), -1, self.p) % self.p
        # keep rows sorted by pivot and fully reduced against each other
        for i, r in enumerate(self.rows):
            f = int(r[pc])
            if f:
                self.rows[i] = (r - f * red) % self.p
        at = 0
        while at < len(self.pivots) and self.pivots[at] < pc:
            at += 1
        self.rows.insert(at, red)
        self.pivots.insert(at, pc)
        return True

    def contains(self, row: np.ndarray) -> bool:
        return not np.any(self._reduce(np.asarray(row, dtype=np.int64)))


def kernel_mod(a: np.ndarray, p: int) -> np.ndarray:
    """Basis of the right kernel of a over F_p, one row per basis vector.

    The basis is the standard one read off the RREF (each free column
    contributes a vector with a 1 in that coordinate), in increasing
    free-column order; this makes kernels canonical for a fixed input.
    """
    a = np.asarray(a, dtype=np.int64)
    rows, cols = a.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if rows == 0:
        return np.eye(cols, dtype=np.int64)
    r, pivots = rref_mod(a, p)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for i, fc in enumerate(free):
        basis[i, fc] = 1
        for row, pc in enumerate(pivots):
            basis[i, pc] = (-int(r[row, fc])) % p
    return basis


def solve_mod(a: np.ndarray, b: np.ndarray, p: int):
    """One solution x of a @ x = b over F_p, or None if inconsistent."""
    a = np.asarray(a, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    rows, cols = a.shape
    if b.shape != (rows,):
        raise FieldError("right-hand side length mismatch")
    aug = np.concatenate([a, b.reshape(-1, 1)], axis=1)
    r, pivots = rref_mod(aug, p)
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for row, pc in enumerate(pivots):
        x[pc] = r[row, cols]
    return x


def det_mod(a: np.ndarray, p: int) -> int:
    """Determinant over F_p by Gaussian elimination."""
    m = np.array(a, dtype=np.int64) % p
    n = m.shape[0]
    if m.shape != (n, n):
        raise FieldError("determinant needs a square matrix")
    det = 1
    for c in range(n):
        nz = np.nonzero(m[c:, c])[0]
        if nz.size == 0:
            return 0
        piv = c + nz[0]
        if piv != c:
            m[[c, piv]] = m[[piv, c]]
            det = -det
        det = det * int(m[c, c]) % p
        inv = pow(int(m[c, c]), -1, p)
        below = m[c + 1:, c].copy()
        mask = below != 0
        if mask.any():
            factors = (below[mask] * inv) % p
            m[c + 1:][mask] = (m[c + 1:][mask] - np.outer(factors, m[c])) % p
    return det % p


def row_space_mod(a: np.ndarray, p: int) -> np.ndarray:
    """Canonical (RREF, zero rows dropped) basis of the row space."""
    r, pivots = rref_mod(a, p)
    return r[: len(pivots)]


def same_subspace(a: np.ndarray, b: np.ndarray, p: int) -> bool:
    """Do the rows of a and b span the same subspace of F_p^n?"""
    ra = row_space_mod(a, p) if a.shape[0] else a
    rb = row_space_mod(b, p) if b.shape[0] else b
    return ra.shape == rb.shape and bool(np.array_equal(ra, rb))


def mat_rank(m: PrimeFieldMatrix) -> int:
    """Rank of m over F_p."""
    return rank_mod(m.array, m.prime)


def mat_kernel(m: PrimeFieldMatrix) -> list:
    """Basis of the right kernel of m, as a list of int64 vectors."""
    return list(kernel_mod(m.array, m.prime))


def mat_solve(m: PrimeFieldMatrix, b) -> "np.ndarray | None":
    """Solve m @ x = b exactly; None signals that b is not in the column span."""
    return solve_mod(m.array, as_field_array(b, m.prime), m.prime)

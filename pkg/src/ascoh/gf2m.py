"""Exact arithmetic in GF(2^m) and (semi)linear algebra over it.

Field elements are bit-packed into Python ints: the integer ``a`` encodes the
polynomial ``sum_{i} ((a >> i) & 1) * X^i`` modulo the field's irreducible
modulus.  A :class:`GF2m` instance owns the modulus and provides all
arithmetic; elements themselves are plain ints and freely shareable.

Vectors are tuples of ints, matrices are tuples of row tuples.  Subspaces are
kept in reduced echelon form, which is the canonical representative used for
equality testing.
"""

from __future__ import annotations

from functools import lru_cache

from .errors import AscohError, NoRoot

MAX_DEGREE = 32

# ---------------------------------------------------------------------------
# polynomial arithmetic over GF(2), operands bit-packed into ints
# ---------------------------------------------------------------------------


def _pmul(a: int, b: int) -> int:
    """Carry-less multiplication of GF(2) polynomials."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def _pmod(a: int, f: int) -> int:
    df = f.bit_length() - 1
    while a.bit_length() - 1 >= df and a:
        a ^= f << (a.bit_length() - 1 - df)
    return a


def _pmulmod(a: int, b: int, f: int) -> int:
    return _pmod(_pmul(a, b), f)


def _pgcd(a: int, b: int) -> int:
    while b:
        a, b = b, _pmod(a, b)
    return a


def _x_pow_2k_mod(f: int, k: int) -> int:
    """x^(2^k) mod f, by repeated squaring."""
    r = 2  # the polynomial x
    for _ in range(k):
        r = _pmulmod(r, r, f)
    return r


def _is_irreducible(f: int) -> bool:
    m = f.bit_length() - 1
    if m < 1:
        return False
    if m == 1:
        return True
    if not f & 1:  # divisible by x
        return False
    # x^(2^m) == x mod f
    if _x_pow_2k_mod(f, m) != 2:
        return False
    # gcd(x^(2^(m/p)) - x, f) == 1 for every prime p | m
    n, p, primes = m, 2, []
    while p * p <= n:
        if n % p == 0:
            primes.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        primes.append(n)
    for p in primes:
        if _pgcd(_x_pow_2k_mod(f, m // p) ^ 2, f) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def canonical_modulus(m: int) -> int:
    """The lexicographically smallest irreducible polynomial of degree m."""
    if not 1 <= m <= MAX_DEGREE:
        raise AscohError(f"extension degree must be in 1..{MAX_DEGREE}, got {m}")
    base = 1 << m
    for low in range(1, base, 2):  # constant term must be 1
        f = base | low
        if _is_irreducible(f):
            return f
    raise AscohError(f"no irreducible polynomial of degree {m}")  # pragma: no cover


_TABLE_LIMIT = 12  # build log/exp tables for m <= this


class GF2m:
    """The field GF(2^m) with a fixed irreducible modulus."""

    def __init__(self, m: int, modulus: int | None = None):
        if not 1 <= m <= MAX_DEGREE:
            raise AscohError(f"extension degree must be in 1..{MAX_DEGREE}, got {m}")
        if modulus is None:
            modulus = canonical_modulus(m)
        if modulus.bit_length() - 1 != m:
            raise AscohError("modulus degree does not match m")
        if not _is_irreducible(modulus):
            raise AscohError(f"modulus {modulus:#x} is not irreducible")
        self.m = m
        self.modulus = modulus
        self.order = 1 << m
        self.one = 1
        self.zero = 0
        self._log = None
        self._exp = None
        if m <= _TABLE_LIMIT:
            self._build_tables()
        self._as_solver = None

    # -- construction helpers ------------------------------------------------

    def _build_tables(self):
        n = self.order - 1
        # find a generator of the multiplicative group
        fac, k, p = [], n, 2
        while p * p <= k:
            if k % p == 0:
                fac.append(p)
                while k % p == 0:
                    k //= p
            p += 1
        if k > 1:
            fac.append(k)
        g = 2
        while True:
            if all(self._pow_raw(g, n // p) != 1 for p in fac):
                break
            g += 1
        exp = [1] * (2 * n)
        log = [0] * self.order
        acc = 1
        for i in range(n):
            exp[i] = acc
            log[acc] = i
            acc = _pmulmod(acc, g, self.modulus)
        for i in range(n, 2 * n):
            exp[i] = exp[i - n]
        self._exp = exp
        self._log = log

    def _pow_raw(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = _pmulmod(r, a, self.modulus)
            a = _pmulmod(a, a, self.modulus)
            e >>= 1
        return r

    # -- basic field operations ----------------------------------------------

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if not a or not b:
            return 0
        if self._log is not None:
            return self._exp[self._log[a] + self._log[b]]
        return _pmulmod(a, b, self.modulus)

    def inv(self, a: int) -> int:
        if not a:
            raise ZeroDivisionError("inverse of zero in GF(2^m)")
        if self._log is not None:
            return self._exp[(self.order - 1) - self._log[a]]
        return self._pow_raw(a, self.order - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self._pow_raw(self.inv(a), -e)
        return self._pow_raw(a, e)

    def frob(self, a: int) -> int:
        """Frobenius: x -> x^2."""
        return self.mul(a, a)

    def ifrob(self, a: int) -> int:
        """Inverse Frobenius: the unique square root, x^(2^(m-1))."""
        for _ in range(self.m - 1):
            a = self.mul(a, a)
        return a

    def frob_pow(self, a: int, t: int) -> int:
        """sigma^t for t in {-1, 0, +1} (and general t)."""
        t %= self.m
        for _ in range(t):
            a = self.mul(a, a)
        return a

    def trace(self, a: int) -> int:
        """Absolute trace to GF(2)."""
        t, x = 0, a
        for _ in range(self.m):
            t ^= x
            x = self.mul(x, x)
        return t

    def artin_schreier_roots(self, a: int) -> list[int]:
        """All c with c^2 + c = a (empty, or a pair {c, c+1})."""
        if self._as_solver is None:
            # build the GF(2)-linear system for c -> c^2 + c on the power basis
            cols = []
            for i in range(self.m):
                e = 1 << i
                cols.append(self.frob(e) ^ e)
            self._as_solver = cols
        cols = self._as_solver
        # GF(2) elimination on (value, preimage-tag) pairs, pivoting on the
        # top set bit of the value
        reduced = []
        for i in range(self.m):
            v, t = cols[i], 1 << i
            for rv, rt in reduced:
                if v and (v >> (rv.bit_length() - 1)) & 1:
                    v ^= rv
                    t ^= rt
            if v:
                reduced.append((v, t))
                reduced.sort(key=lambda r: -r[0].bit_length())
        v, t = a, 0
        for rv, rt in reduced:
            if v and (v >> (rv.bit_length() - 1)) & 1:
                v ^= rv
                t ^= rt
        if v:
            raise NoRoot(f"c^2+c={a:#x} has no root in GF(2^{self.m})")
        return [t, t ^ 1]

    def elements(self):
        return range(self.order)

    def random_element(self, rng) -> int:
        return rng.randrange(self.order)

    # -- formatting ------------------------------------------------------------

    def spec_string(self) -> str:
        return f"GF(2^{self.m})/{self.modulus:#x}"

    def fmt(self, a: int) -> str:
        return format(a, "x")

    def __repr__(self):
        return f"GF2m({self.m}, {self.modulus:#x})"

    def __eq__(self, other):
        return (
            isinstance(other, GF2m)
            and self.m == other.m
            and self.modulus == other.modulus
        )

    def __hash__(self):
        return hash((self.m, self.modulus))


# ---------------------------------------------------------------------------
# vectors and matrices (tuples of ints / tuples of tuples)
# ---------------------------------------------------------------------------


def vec_add(a, b):
    return tuple(x ^ y for x, y in zip(a, b))


def vec_scale(field: GF2m, c: int, a):
    return tuple(field.mul(c, x) for x in a)


def mat_vec(field: GF2m, rows, v):
    out = []
    for row in rows:
        acc = 0
        for c, x in zip(row, v):
            if c and x:
                acc ^= field.mul(c, x)
        out.append(acc)
    return tuple(out)


def mat_mul(field: GF2m, a, b):
    bt = list(zip(*b))
    return tuple(
        tuple(
            _dot(field, row, col)
            for col in bt
        )
        for row in a
    )


def _dot(field: GF2m, a, b):
    acc = 0
    for x, y in zip(a, b):
        if x and y:
            acc ^= field.mul(x, y)
    return acc


def transpose(rows):
    return tuple(zip(*rows))


def rref(field: GF2m, rows):
    """Reduced row echelon form; returns list of nonzero rows with pivot 1,
    eliminated above and below, ordered by pivot column."""
    work = [list(r) for r in rows]
    if not work:
        return []
    ncols = len(work[0])
    out = []
    pivots = []
    r = 0
    for col in range(ncols):
        piv = None
        for i in range(r, len(work)):
            if work[i][col]:
                piv = i
                break
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        inv = field.inv(work[r][col])
        work[r] = [field.mul(inv, x) for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][col]:
                c = work[i][col]
                work[i] = [x ^ field.mul(c, y) for x, y in zip(work[i], work[r])]
        pivots.append(col)
        r += 1
        if r == len(work):
            break
    return [tuple(row) for row in work[:r]]


def solve(field: GF2m, rows, rhs):
    """One solution x of rows . x = rhs, or None if inconsistent.

    ``rows`` is a matrix (list of row tuples), ``rhs`` a vector of the same
    length as ``rows``.
    """
    if not rows:
        return None if any(rhs) else ()
    ncols = len(rows[0])
    aug = [list(r) + [h] for r, h in zip(rows, rhs)]
    red = rref(field, aug)
    x = [0] * ncols
    for row in red:
        piv = next((j for j in range(ncols) if row[j]), None)
        if piv is None:
            if row[ncols]:
                return None
            continue
        x[piv] = row[ncols]
        # reduced form: other entries in this row may reference free vars (=0)
    return tuple(x)


class PresolvedSystem:
    """Gauss-Jordan presolve of A x = b for many right-hand sides.

    Stores an invertible T with T.A in reduced row echelon form; each solve
    is a single matrix-vector product plus a consistency check (free
    variables are set to zero)."""

    __slots__ = ("field", "nrows", "ncols", "rank", "pivots", "T")

    def __init__(self, field: GF2m, rows):
        self.field = field
        m = len(rows)
        self.nrows = m
        self.ncols = len(rows[0]) if rows else 0
        n = self.ncols
        aug = [
            list(r) + [1 if j == i else 0 for j in range(m)]
            for i, r in enumerate(rows)
        ]
        pivots = []
        r = 0
        for col in range(n):
            piv = next((i for i in range(r, m) if aug[i][col]), None)
            if piv is None:
                continue
            aug[r], aug[piv] = aug[piv], aug[r]
            inv = field.inv(aug[r][col])
            aug[r] = [field.mul(inv, x) for x in aug[r]]
            rowr = aug[r]
            for i in range(m):
                if i != r and aug[i][col]:
                    c = aug[i][col]
                    aug[i] = [x ^ field.mul(c, y) for x, y in zip(aug[i], rowr)]
            pivots.append(col)
            r += 1
            if r == m:
                break
        self.rank = r
        self.pivots = pivots
        self.T = [tuple(row[n:]) for row in aug]

    def solve(self, rhs):
        """One solution of A x = rhs, or None if inconsistent."""
        y = mat_vec(self.field, self.T, rhs)
        for i in range(self.rank, self.nrows):
            if y[i]:
                return None
        x = [0] * self.ncols
        for i, col in enumerate(self.pivots):
            x[col] = y[i]
        return tuple(x)


def kernel_basis(field: GF2m, rows, ncols):
    """Basis of the right kernel {x : rows . x = 0}."""
    red = rref(field, rows) if rows else []
    pivots = []
    for row in red:
        piv = next(j for j in range(ncols) if row[j])
        pivots.append(piv)
    pivset = set(pivots)
    free = [j for j in range(ncols) if j not in pivset]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for row, piv in zip(red, pivots):
            v[piv] = row[f]  # x_piv = -sum row[f]*x_f  (char 2: minus = plus)
        basis.append(tuple(v))
    return basis


class SemilinearMap:
    """x -> A . sigma^twist(x), with sigma the Frobenius applied entrywise.

    twist=+1 models F-like sigma-linearity (T(cv) = c^2 T(v)); twist=-1
    models V-like inverse-sigma-linearity (T(c^2 v) = c T(v)); twist=0 is an
    ordinary linear map.
    """

    __slots__ = ("field", "rows", "twist")

    def __init__(self, field: GF2m, rows, twist: int = 0):
        if twist not in (-1, 0, 1):
            raise AscohError("twist must be -1, 0, or +1")
        self.field = field
        self.rows = tuple(tuple(r) for r in rows)
        self.twist = twist

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    def apply(self, v):
        f = self.field
        if self.twist == 1:
            v = tuple(f.frob(x) for x in v)
        elif self.twist == -1:
            v = tuple(f.ifrob(x) for x in v)
        return mat_vec(f, self.rows, v)

    def compose(self, other: "SemilinearMap") -> "SemilinearMap":
        """self after other, as a single semilinear map (twists must not
        cancel information: resulting twist = sum, must be in {-1,0,1})."""
        t = self.twist + other.twist
        if t not in (-1, 0, 1):
            raise AscohError("composite twist outside {-1,0,1}")
        f = self.field
        # self(other(x)) = A sigma^s (B sigma^t x) = A sigma^s(B) sigma^(s+t) x
        b = tuple(
            tuple(f.frob_pow(x, self.twist) for x in row) for row in other.rows
        )
        return SemilinearMap(f, mat_mul(f, self.rows, b), t)


class SubspaceBasis:
    """A subspace of GF(2^m)^n in reduced echelon form."""

    __slots__ = ("field", "ambient", "rows")

    def __init__(self, field: GF2m, ambient: int, vectors=()):
        self.field = field
        self.ambient = ambient
        for v in vectors:
            if len(v) != ambient:
                raise AscohError("vector length does not match ambient dimension")
        self.rows = tuple(rref(field, list(vectors)))

    @property
    def dim(self):
        return len(self.rows)

    def contains(self, v) -> bool:
        w = list(v)
        for row in self.rows:
            piv = next(j for j in range(self.ambient) if row[j])
            if w[piv]:
                c = w[piv]
                w = [x ^ self.field.mul(c, y) for x, y in zip(w, row)]
        return not any(w)

    def coords_of(self, v):
        """Coordinates of v over self.rows, or None if not a member."""
        w = list(v)
        coords = []
        for row in self.rows:
            piv = next(j for j in range(self.ambient) if row[j])
            c = w[piv]
            coords.append(c)
            if c:
                w = [x ^ self.field.mul(c, y) for x, y in zip(w, row)]
        if any(w):
            return None
        return tuple(coords)

    def sum_(self, other: "SubspaceBasis") -> "SubspaceBasis":
        self._check(other)
        return SubspaceBasis(self.field, self.ambient, self.rows + other.rows)

    def intersect(self, other: "SubspaceBasis") -> "SubspaceBasis":
        self._check(other)
        if not self.rows or not other.rows:
            return SubspaceBasis(self.field, self.ambient)
        stacked = list(self.rows) + list(other.rows)
        # kernel of the transpose: coefficient vectors with
        # sum c_i row_i = 0; the A-part of each gives an intersection vector
        cols = transpose(stacked)
        ker = kernel_basis(self.field, cols, len(stacked))
        na = len(self.rows)
        vecs = []
        for k in ker:
            v = (0,) * self.ambient
            for c, row in zip(k[:na], self.rows):
                if c:
                    v = vec_add(v, vec_scale(self.field, c, row))
            vecs.append(v)
        return SubspaceBasis(self.field, self.ambient, vecs)

    def is_subspace_of(self, other: "SubspaceBasis") -> bool:
        return all(other.contains(r) for r in self.rows)

    def _check(self, other):
        if self.ambient != other.ambient or self.field != other.field:
            raise AscohError("ambient dimension or field mismatch")

    def __eq__(self, other):
        return (
            isinstance(other, SubspaceBasis)
            and self.ambient == other.ambient
            and self.field == other.field
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.ambient, self.rows))

    def __repr__(self):
        return f"SubspaceBasis(dim={self.dim}, ambient={self.ambient})"


def full_space(field: GF2m, n: int) -> SubspaceBasis:
    eye = [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    return SubspaceBasis(field, n, eye)


def zero_space(field: GF2m, n: int) -> SubspaceBasis:
    return SubspaceBasis(field, n)


def image_of_map(t: SemilinearMap) -> SubspaceBasis:
    """Column span of the matrix (twisting coordinates never changes the
    span, since sigma is bijective)."""
    cols = list(zip(*t.rows)) if t.rows else []
    return SubspaceBasis(t.field, t.nrows, cols)


def kernel_of_map(t: SemilinearMap) -> SubspaceBasis:
    """Kernel of x -> A sigma^twist(x): apply sigma^(-twist) entrywise to a
    basis of ker(A)."""
    ker = kernel_basis(t.field, t.rows, t.ncols)
    f = t.field
    vecs = [tuple(f.frob_pow(x, -t.twist) for x in v) for v in ker]
    return SubspaceBasis(f, t.ncols, vecs)


def map_image_of_subspace(t: SemilinearMap, w: SubspaceBasis) -> SubspaceBasis:
    return SubspaceBasis(t.field, t.nrows, [t.apply(v) for v in w.rows])


def map_preimage_of_subspace(t: SemilinearMap, w: SubspaceBasis) -> SubspaceBasis:
    """{x : T(x) in W}."""
    f = t.field
    # T(x) in W  <=>  C . A sigma^t(x) = 0 where C = constraint matrix of W
    cons = _constraint_matrix(f, w)
    if not cons:
        return full_space(f, t.ncols)
    comp = mat_mul(f, cons, t.rows)
    ker = kernel_basis(f, comp, t.ncols)
    vecs = [tuple(f.frob_pow(x, -t.twist) for x in v) for v in ker]
    return SubspaceBasis(f, t.ncols, vecs)


def _constraint_matrix(field: GF2m, w: SubspaceBasis):
    """Rows c with c . v = 0 for all v in W (as linear functionals)."""
    ker = kernel_basis(field, list(w.rows), w.ambient)
    return ker


def symplectic_complement(w: SubspaceBasis, gram) -> SubspaceBasis:
    """W^perp = {v : u G v = 0 for all u in W} for an alternating
    nondegenerate Gram matrix G."""
    f = w.field
    n = w.ambient
    _check_gram(f, gram, n)
    if not w.rows:
        return full_space(f, n)
    cons = [mat_vec(f, gram, u) for u in w.rows]
    ker = kernel_basis(f, cons, n)
    return SubspaceBasis(f, n, ker)


def _check_gram(field: GF2m, gram, n):
    if len(gram) != n or any(len(r) != n for r in gram):
        raise AscohError("Gram matrix dimension mismatch")
    for i in range(n):
        if gram[i][i]:
            raise AscohError("Gram matrix is not alternating")
        for j in range(i + 1, n):
            if gram[i][j] != gram[j][i]:
                raise AscohError("Gram matrix is not symmetric")
    if len(rref(field, list(gram))) != n:
        raise AscohError("Gram matrix is degenerate")


def pairing(field: GF2m, gram, u, v) -> int:
    return _dot(field, u, mat_vec(field, gram, v))

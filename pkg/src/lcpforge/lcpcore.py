"""Block decompositions, similarity checks, and equivariant metrics.

The objects here certify the two defining properties of a locally
conformally product structure: the ambient lattice automorphisms split
into an orthogonal sum of one- and two-dimensional blocks on which every
generator acts by a similarity (ratio times orthogonal), and the ratio on
the designated flat block is not identically one.  On top of a certified
decomposition the module assembles translation-equivariant metrics whose
conformal behaviour under the group is checked numerically on seeded
sample points.

All numeric work runs at the requested precision plus guard bits; every
accept/reject decision is taken against the tolerance 2**(-bits/2) and
structure checks are re-verified at doubled precision before a verdict
crosses a borderline.
"""

from __future__ import annotations

import random
from typing import List, Optional, Sequence, Tuple

from mpmath import iv, mp

from ._backend import QQ
from .errors import (
    CheckFailureError,
    InputError,
    NeedsEscalation,
    PrecisionError,
    StructureError,
)
from .intlinalg import IntMatrix, char_poly, commute, is_gl_z
from .numberfield import FieldElem, is_unit
from .polynomials import poly_gcd
from .embeddings import (
    GUARD_BITS,
    _at_prec,
    certified_poly_roots,
    default_precision,
    multiplicative_rank,
    tolerance,
    validate_precision,
)

_SPLITTER_TRIALS = 40
_SPLITTER_SEED = 0x5EED
_CROSS_BISECT_STEPS = 20
_CROSS_GRID = 10


# ----------------------------------------------------------------------
# small interval linear algebra helpers
#
# Matrices are tuples of row tuples.  Entries entering iv.mpf are exact
# mpf values produced at working precision, so the conversions below do
# not widen anything.


def _iv_matrix(rows):
    return [[iv.mpf(x) for x in row] for row in rows]


def _iv_identity(n):
    return [[iv.mpf(1 if i == j else 0) for j in range(n)] for i in range(n)]


def _iv_matmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [
        [sum((a[i][l] * b[l][j] for l in range(k)), iv.mpf(0)) for j in range(m)]
        for i in range(n)
    ]


def _iv_inverse(rows):
    """Interval Gauss-Jordan inverse; pivots must exclude zero."""
    n = len(rows)
    a = [list(r) for r in rows]
    inv = _iv_identity(n)
    for col in range(n):
        pivot_row = max(
            range(col, n), key=lambda r: abs(mp.mpf(a[r][col].mid))
        )
        piv = a[pivot_row][col]
        if mp.mpf(abs(piv).a) <= 0:
            raise NeedsEscalation("interval pivot touches zero during inversion")
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
            inv[col], inv[pivot_row] = inv[pivot_row], inv[col]
        piv = a[col][col]
        for j in range(n):
            a[col][j] = a[col][j] / piv
            inv[col][j] = inv[col][j] / piv
        for r in range(n):
            if r == col:
                continue
            factor = a[r][col]
            for j in range(n):
                a[r][j] = a[r][j] - factor * a[col][j]
                inv[r][j] = inv[r][j] - factor * inv[col][j]
    return inv


def _iv_det_excludes_zero(rows) -> bool:
    n = len(rows)
    a = [list(r) for r in rows]
    for col in range(n):
        pivot_row = max(range(col, n), key=lambda r: abs(mp.mpf(a[r][col].mid)))
        piv = a[pivot_row][col]
        if mp.mpf(abs(piv).a) <= 0:
            return False
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
        for r in range(col + 1, n):
            factor = a[r][col] / a[col][col]
            for j in range(col, n):
                a[r][j] = a[r][j] - factor * a[col][j]
    return True


def _mid(x):
    return (mp.mpf(x.a) + mp.mpf(x.b)) / 2


def _mpf_from_rational(q):
    q = QQ(q)
    return mp.mpf(int(q.numerator)) / mp.mpf(int(q.denominator))


def _to_mpf(x):
    """Convert a scalar (mpf, int, float, or exact rational) to mpf."""
    if hasattr(x, "numerator") and not isinstance(x, int):
        return _mpf_from_rational(x)
    return mp.mpf(x)


def _freeze(rows):
    return tuple(tuple(row) for row in rows)


# ----------------------------------------------------------------------
# block decompositions


class BlockDecomposition:
    """Certified splitting of Z^p into one- and two-dimensional blocks.

    The basis columns are numeric eigenvectors of a splitter matrix with
    squarefree characteristic polynomial; blocks come from real
    eigenvalues in descending order followed by complex-conjugate pairs.
    Invertibility of the basis is certified by an interval determinant.
    """

    __slots__ = ("p", "delta", "blocks", "basis", "precision_bits", "workbits")

    def __init__(self, p, delta, blocks, basis, precision_bits, workbits):
        self.p = p
        self.delta = delta
        self.blocks = tuple((int(a), int(b)) for a, b in blocks)
        self.basis = _freeze(basis)
        self.precision_bits = precision_bits
        self.workbits = workbits

    def block_indices(self, k: int) -> range:
        start, size = self.blocks[k]
        return range(start, start + size)

    def __repr__(self):
        return "BlockDecomposition(p=%d, delta=%d, blocks=%r, bits=%d)" % (
            self.p,
            self.delta,
            self.blocks,
            self.precision_bits,
        )


def _real_kernel_vector(rows, workbits):
    """One kernel vector of a numerically singular real matrix.

    Full-pivot elimination with an early stop once the remaining entries
    drop far below the working scale; expects nullity one, which holds for
    a simple eigenvalue.
    """
    n = len(rows)
    a = [[mp.mpf(x) for x in row] for row in rows]
    stop = mp.mpf(2) ** (-(3 * workbits) // 4)
    scale = max((abs(x) for row in a for x in row), default=mp.mpf(0))
    if scale == 0:
        raise NeedsEscalation("kernel computation hit a zero matrix")
    cutoff = scale * stop
    row_perm = list(range(n))
    col_perm = list(range(n))
    rank = 0
    for step in range(n):
        best = None
        best_val = cutoff
        for i in range(step, n):
            for j in range(step, n):
                v = abs(a[row_perm[i]][col_perm[j]])
                if v > best_val:
                    best_val = v
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        row_perm[step], row_perm[bi] = row_perm[bi], row_perm[step]
        col_perm[step], col_perm[bj] = col_perm[bj], col_perm[step]
        pr = row_perm[step]
        for i in range(step + 1, n):
            ri = row_perm[i]
            factor = a[ri][col_perm[step]] / a[pr][col_perm[step]]
            for j in range(step, n):
                a[ri][col_perm[j]] -= factor * a[pr][col_perm[j]]
        rank += 1
    if rank != n - 1:
        raise NeedsEscalation(
            "numeric kernel has unexpected dimension %d" % (n - rank)
        )
    # back-substitute with the free coordinate set to one
    x = [mp.mpf(0)] * n
    x[col_perm[n - 1]] = mp.mpf(1)
    for step in range(rank - 1, -1, -1):
        pr = row_perm[step]
        acc = mp.mpf(0)
        for j in range(step + 1, n):
            acc += a[pr][col_perm[j]] * x[col_perm[j]]
        x[col_perm[step]] = -acc / a[pr][col_perm[step]]
    top = max(range(n), key=lambda i: abs(x[i]))
    lead = x[top]
    return [v / lead for v in x]


def _complex_kernel_vector(rows, workbits):
    n = len(rows)
    a = [[mp.mpc(x) for x in row] for row in rows]
    stop = mp.mpf(2) ** (-(3 * workbits) // 4)
    scale = max((abs(x) for row in a for x in row), default=mp.mpf(0))
    if scale == 0:
        raise NeedsEscalation("kernel computation hit a zero matrix")
    cutoff = scale * stop
    row_perm = list(range(n))
    col_perm = list(range(n))
    rank = 0
    for step in range(n):
        best = None
        best_val = cutoff
        for i in range(step, n):
            for j in range(step, n):
                v = abs(a[row_perm[i]][col_perm[j]])
                if v > best_val:
                    best_val = v
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        row_perm[step], row_perm[bi] = row_perm[bi], row_perm[step]
        col_perm[step], col_perm[bj] = col_perm[bj], col_perm[step]
        pr = row_perm[step]
        for i in range(step + 1, n):
            ri = row_perm[i]
            factor = a[ri][col_perm[step]] / a[pr][col_perm[step]]
            for j in range(step, n):
                a[ri][col_perm[j]] -= factor * a[pr][col_perm[j]]
        rank += 1
    if rank != n - 1:
        raise NeedsEscalation(
            "numeric kernel has unexpected dimension %d" % (n - rank)
        )
    x = [mp.mpc(0)] * n
    x[col_perm[n - 1]] = mp.mpc(1)
    for step in range(rank - 1, -1, -1):
        pr = row_perm[step]
        acc = mp.mpc(0)
        for j in range(step + 1, n):
            acc += a[pr][col_perm[j]] * x[col_perm[j]]
        x[col_perm[step]] = -acc / a[pr][col_perm[step]]
    top = max(range(n), key=lambda i: abs(x[i]))
    lead = x[top]
    return [v / lead for v in x]


def _matrix_min_poly_squarefree(a: IntMatrix) -> bool:
    chi = char_poly(a)
    return poly_gcd(chi, chi.derivative()).degree == 0


def _pick_splitter(gens: Sequence[IntMatrix]) -> IntMatrix:
    """A commuting-family member with squarefree characteristic polynomial.

    Distinct eigenvalues on one member force every commuting member to
    preserve its eigenlines, so a single such splitter diagonalizes the
    whole family.  Falls back to seeded integer combinations.
    """
    for g in gens:
        if _matrix_min_poly_squarefree(g):
            return g
    rng = random.Random(_SPLITTER_SEED)
    for _ in range(_SPLITTER_TRIALS):
        coeffs = [rng.randrange(-3, 4) for _ in gens]
        if not any(coeffs):
            continue
        combo = None
        for c, g in zip(coeffs, gens):
            term = g * c
            combo = term if combo is None else combo + term
        if _matrix_min_poly_squarefree(combo):
            return combo
    raise StructureError(
        "no generator or seeded combination has distinct eigenvalues; the "
        "family does not certify a one/two-dimensional block decomposition"
    )


def find_block_decomposition(
    gens: Sequence[IntMatrix], precision: Optional[int] = None
) -> BlockDecomposition:
    """Common eigenblock structure of a commuting family of lattice maps.

    Real eigenvalues of the splitter give one-dimensional blocks in
    descending eigenvalue order; complex pairs give two-dimensional blocks
    ordered by real then imaginary part of the upper representative.
    """
    if precision is None:
        precision = default_precision()
    precision = validate_precision(precision)
    gens = list(gens)
    if not gens:
        raise InputError("need at least one generator")
    p = gens[0].n
    if any(g.n != p for g in gens):
        raise InputError("generators must share one ambient dimension")
    if p < 2:
        raise StructureError("ambient dimension must be at least 2")
    for i, g in enumerate(gens):
        if not is_gl_z(g):
            raise InputError("generator %d is not in GL(%d, Z)" % (i, p))
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if not commute(gens[i], gens[j]):
                raise InputError("generators %d and %d do not commute" % (i, j))
    splitter = _pick_splitter(gens)
    chi = char_poly(splitter)

    attempt = precision
    last_error = None
    for _ in range(2):
        try:
            return _decompose_at(splitter, chi, p, precision, attempt)
        except NeedsEscalation as exc:
            last_error = exc
            attempt *= 2
    raise PrecisionError(
        "block decomposition failed up to %d bits: %s" % (attempt, last_error)
    )


def _decompose_at(splitter, chi, p, precision, attempt) -> BlockDecomposition:
    real_roots, complex_disks, workbits = certified_poly_roots(chi, attempt)
    with _at_prec(workbits):
        columns: List[List] = []
        blocks: List[Tuple[int, int]] = []
        # descending real eigenvalues, then complex pairs
        for lo, hi in reversed(real_roots):
            lam = _mpf_from_rational((QQ(lo) + QQ(hi)) / 2)
            rows = [
                [mp.mpf(int(splitter[i, j])) - (lam if i == j else 0) for j in range(p)]
                for i in range(p)
            ]
            vec = _real_kernel_vector(rows, workbits)
            blocks.append((len(columns), 1))
            columns.append(vec)
        for center, _radius in complex_disks:
            rows = [
                [mp.mpc(int(splitter[i, j])) - (center if i == j else 0) for j in range(p)]
                for i in range(p)
            ]
            vec = _complex_kernel_vector(rows, workbits)
            blocks.append((len(columns), 2))
            columns.append([z.real for z in vec])
            columns.append([z.imag for z in vec])
        delta = len(blocks)
        if delta < 2:
            raise StructureError(
                "decomposition has %d block(s); a locally conformally product "
                "structure needs at least two" % delta
            )
        basis = [[columns[j][i] for j in range(p)] for i in range(p)]
        if not _iv_det_excludes_zero(_iv_matrix(basis)):
            raise NeedsEscalation("eigenbasis not certified invertible")
    return BlockDecomposition(p, delta, blocks, basis, precision, workbits)


def restricted_blocks(decomp: BlockDecomposition, a: IntMatrix):
    """Interval form of basis^-1 * a * basis, as one full matrix."""
    if a.n != decomp.p:
        raise InputError("matrix dimension does not match the decomposition")
    with _at_prec(decomp.workbits):
        b = _iv_matrix(decomp.basis)
        binv = _iv_inverse(b)
        am = [[iv.mpf(int(a[i, j])) for j in range(a.n)] for i in range(a.n)]
        return _iv_matmul(binv, _iv_matmul(am, b))


def conjugated_numeric(decomp: BlockDecomposition, a: IntMatrix):
    """Midpoint form of basis^-1 * a * basis (the block-coordinate action)."""
    if a == IntMatrix.identity(a.n):
        with _at_prec(decomp.workbits):
            return _freeze(
                [[mp.mpf(1 if i == j else 0) for j in range(a.n)] for i in range(a.n)]
            )
    c = restricted_blocks(decomp, a)
    with _at_prec(decomp.workbits):
        return _freeze([[_mid(x) for x in row] for row in c])


# ----------------------------------------------------------------------
# similarity ratios (J1) and the non-isometric flat block (J2)


class UnitWitness:
    """Exact algebraic certificate for one similarity ratio.

    The ratio equals |embedding(element)|**(1/exponent); exponents above
    one record square-root ratios whose honest witness is the squared
    quantity.
    """

    __slots__ = ("element", "embedding_index", "exponent")

    def __init__(self, element: FieldElem, embedding_index: int, exponent: int = 1):
        if exponent < 1:
            raise InputError("witness exponent must be a positive integer")
        self.element = element
        self.embedding_index = int(embedding_index)
        self.exponent = int(exponent)


class RatioMatrix:
    """Similarity ratios of each generator on each block.

    Entries are positive reals certified by the J1 check; rows are indexed
    by generators, columns by blocks.  Witnesses, when present, tie each
    entry to an exact unit in a number field.
    """

    __slots__ = (
        "entries",
        "decomposition",
        "generators",
        "witnesses",
        "precision_bits",
    )

    def __init__(self, entries, decomposition, generators, witnesses=None,
                 precision_bits=None):
        self.entries = _freeze(entries)
        self.decomposition = decomposition
        self.generators = tuple(generators)
        self.witnesses = witnesses
        self.precision_bits = (
            decomposition.precision_bits if precision_bits is None else precision_bits
        )

    @property
    def n_gens(self):
        return len(self.entries)

    @property
    def delta(self):
        return self.decomposition.delta

    def entry(self, gen_index: int, block_index: int):
        return self.entries[gen_index][block_index]

    def with_witnesses(self, witnesses) -> "RatioMatrix":
        witnesses = tuple(tuple(row) for row in witnesses)
        if len(witnesses) != self.n_gens or any(
            len(row) != self.delta for row in witnesses
        ):
            raise InputError("witness table must match the ratio matrix shape")
        return RatioMatrix(
            self.entries,
            self.decomposition,
            self.generators,
            witnesses,
            self.precision_bits,
        )


def _block_ratio(c, idx, tol, gen_index, block_index):
    """Certified similarity ratio of one diagonal block of an interval matrix."""
    if len(idx) == 1:
        i = idx[0]
        enc = abs(c[i][i])
        if mp.mpf(enc.a) <= 0:
            raise CheckFailureError(
                "generator %d block %d: ratio not certified positive"
                % (gen_index, block_index)
            )
        return _mid(enc)
    i, j = idx
    m = [[c[i][i], c[i][j]], [c[j][i], c[j][j]]]
    g00 = m[0][0] * m[0][0] + m[1][0] * m[1][0]
    g11 = m[0][1] * m[0][1] + m[1][1] * m[1][1]
    g01 = m[0][0] * m[0][1] + m[1][0] * m[1][1]
    if mp.mpf(abs(g01).b) > tol:
        raise CheckFailureError(
            "generator %d block %d: action is not conformal (skew residual)"
            % (gen_index, block_index)
        )
    if mp.mpf(abs(g00 - g11).b) > tol:
        raise CheckFailureError(
            "generator %d block %d: action is not a similarity (unequal "
            "column norms)" % (gen_index, block_index)
        )
    lo = min(mp.mpf(g00.a), mp.mpf(g11.a))
    hi = max(mp.mpf(g00.b), mp.mpf(g11.b))
    if lo <= 0:
        raise CheckFailureError(
            "generator %d block %d: ratio not certified positive"
            % (gen_index, block_index)
        )
    hull = iv.mpf([lo, hi])
    return _mid(iv.sqrt(hull))


def _ratios_of_matrix(decomp, a, tol, gen_index):
    """Per-block ratios of one generator; fails on off-block leakage."""
    c = restricted_blocks(decomp, a)
    with _at_prec(decomp.workbits):
        block_of = {}
        for k in range(decomp.delta):
            for i in decomp.block_indices(k):
                block_of[i] = k
        for i in range(decomp.p):
            for j in range(decomp.p):
                if block_of[i] != block_of[j] and mp.mpf(abs(c[i][j]).b) > tol:
                    raise CheckFailureError(
                        "generator %d: off-block entry (%d, %d) exceeds "
                        "tolerance; blocks are not invariant" % (gen_index, i, j)
                    )
        return [
            _block_ratio(c, list(decomp.block_indices(k)), tol, gen_index, k)
            for k in range(decomp.delta)
        ]


def check_J1(decomp: BlockDecomposition, gens: Sequence[IntMatrix]) -> RatioMatrix:
    """Certify that every generator acts by a similarity on every block.

    Returns the matrix of similarity ratios.  Row multiplicativity is spot
    checked on pairwise products of generators; any violation means the
    decomposition was not actually invariant and is reported as a check
    failure.
    """
    gens = list(gens)
    tol = tolerance(decomp.precision_bits)
    entries = [_ratios_of_matrix(decomp, g, tol, i) for i, g in enumerate(gens)]
    # multiplicativity spot check on a few products
    pairs = [(i, j) for i in range(len(gens)) for j in range(len(gens)) if i < j]
    for i, j in pairs[:3]:
        prod_ratios = _ratios_of_matrix(decomp, gens[i] * gens[j], tol, i)
        with _at_prec(decomp.workbits):
            for k in range(decomp.delta):
                expected = entries[i][k] * entries[j][k]
                if abs(prod_ratios[k] - expected) > 4 * tol:
                    raise CheckFailureError(
                        "ratio rows are not multiplicative on the product of "
                        "generators %d and %d at block %d" % (i, j, k)
                    )
    return RatioMatrix(entries, decomp, gens)


def check_J2(ratios: RatioMatrix, flat_block: int) -> bool:
    """Decide whether some generator fails to be an isometry on the flat block.

    The decision is re-verified with the whole decomposition recomputed at
    doubled precision; a disagreement between the two runs raises
    PrecisionError instead of guessing.
    """
    if not 0 <= flat_block < ratios.delta:
        raise InputError("flat block index out of range")
    decision = _j2_decision(ratios, flat_block)
    doubled = find_block_decomposition(
        ratios.generators, min(2 * ratios.precision_bits, 4096)
    )
    ratios2 = check_J1(doubled, ratios.generators)
    decision2 = _j2_decision(ratios2, flat_block)
    if decision != decision2:
        raise PrecisionError(
            "flat-block isometry decision flipped under precision doubling; "
            "a ratio sits on the tolerance boundary"
        )
    return decision


def _j2_decision(ratios: RatioMatrix, flat_block: int) -> bool:
    tol = tolerance(ratios.precision_bits)
    with _at_prec(ratios.decomposition.workbits):
        return any(
            abs(row[flat_block] - 1) > tol for row in ratios.entries
        )


# ----------------------------------------------------------------------
# similarity generators


class SimilarityGenerator:
    """One group generator: lattice map, affine part, and base translation.

    The linear part acts on the fiber lattice, the translation is an exact
    rational vector in fiber coordinates, and the base translation is the
    numeric shift in base log-coordinates.  The ratio row caches the
    per-block similarity ratios certified by J1.
    """

    __slots__ = ("label", "linear", "translation", "base_translation", "ratio_row")

    def __init__(self, label, linear: IntMatrix, translation, base_translation,
                 ratio_row):
        if not is_gl_z(linear):
            raise InputError("linear part must be in GL(p, Z)")
        self.label = str(label)
        self.linear = linear
        self.translation = tuple(QQ(t) for t in translation)
        if len(self.translation) != linear.n:
            raise InputError("translation length must match the linear part")
        self.base_translation = tuple(base_translation)
        self.ratio_row = tuple(ratio_row)
        if any(not r > 0 for r in self.ratio_row):
            raise InputError("ratio row entries must be positive")

    def __repr__(self):
        return "SimilarityGenerator(%r, p=%d, n=%d)" % (
            self.label,
            self.linear.n,
            len(self.base_translation),
        )


def lcp_rank(ratios: RatioMatrix, flat_block: int,
             bits: Optional[int] = None) -> int:
    """Rank of the group generated by the flat-block similarity ratios.

    Computed as the multiplicative rank of the exact unit witnesses behind
    the flat-block column; witnesses are required.
    """
    if ratios.witnesses is None:
        raise InputError("lcp_rank needs unit witnesses on the ratio matrix")
    if not 0 <= flat_block < ratios.delta:
        raise InputError("flat block index out of range")
    if bits is None:
        bits = ratios.precision_bits
    units = []
    field = None
    for row in ratios.witnesses:
        w = row[flat_block]
        if w is None:
            raise InputError("missing flat-block witness for a generator")
        units.append(w.element)
        field = w.element.field
    return multiplicative_rank(field, units, bits)


def verify_unit_ratio(lam: FieldElem) -> bool:
    """True iff the ratio witness is an algebraic unit (exact check)."""
    return is_unit(lam)


# ----------------------------------------------------------------------
# equivariant affine functionals and metric assembly


class AffineFunctional:
    """An affine map c . x + d on base log-coordinates."""

    __slots__ = ("coeffs", "constant")

    def __init__(self, coeffs, constant=0):
        self.coeffs = tuple(coeffs)
        self.constant = constant

    def __call__(self, x):
        acc = _to_mpf(self.constant)
        for c, xi in zip(self.coeffs, x):
            acc += _to_mpf(c) * _to_mpf(xi)
        return acc

    def shift(self, v):
        """Increment of the functional along a translation vector."""
        acc = mp.mpf(0)
        for c, vi in zip(self.coeffs, v):
            acc += _to_mpf(c) * _to_mpf(vi)
        return acc


def solve_equivariant_functional(translations, targets,
                                 precision: Optional[int] = None) -> AffineFunctional:
    """Affine functional f with f(x + v_j) - f(x) = r_j for all j.

    Solves c . v_j = r_j by Gaussian elimination at working precision and
    verifies every residual against the tolerance; the constant term is
    free and set to zero.
    """
    if precision is None:
        precision = default_precision()
    precision = validate_precision(precision)
    translations = [list(v) for v in translations]
    targets = list(targets)
    if len(translations) != len(targets):
        raise InputError("need one target per translation")
    if not translations:
        raise InputError("need at least one translation")
    n = len(translations[0])
    if any(len(v) != n for v in translations):
        raise InputError("translations must share one dimension")
    workbits = precision + GUARD_BITS
    tol = tolerance(precision)
    with _at_prec(workbits):
        a = [[_to_mpf(x) for x in v] + [_to_mpf(r)] for v, r in zip(translations, targets)]
        rows = len(a)
        pivot_cols = []
        r = 0
        for col in range(n):
            piv = max(range(r, rows), key=lambda i: abs(a[i][col]), default=None)
            if piv is None or abs(a[piv][col]) <= tol:
                continue
            a[r], a[piv] = a[piv], a[r]
            lead = a[r][col]
            a[r] = [x / lead for x in a[r]]
            for i in range(rows):
                if i != r:
                    f = a[i][col]
                    if f:
                        a[i] = [x - f * y for x, y in zip(a[i], a[r])]
            pivot_cols.append(col)
            r += 1
        for i in range(r, rows):
            if abs(a[i][n]) > tol:
                raise StructureError(
                    "translation system is inconsistent: no affine functional "
                    "matches the requested increments"
                )
        if r < n and r < rows:
            # leftover zero rows are fine; missing pivots mean the
            # translations do not span, which is only an error when the
            # system is inconsistent (checked above)
            pass
        coeffs = [mp.mpf(0)] * n
        for row_idx, col in enumerate(pivot_cols):
            coeffs[col] = a[row_idx][n]
        func = AffineFunctional(coeffs)
        for v, target in zip(translations, targets):
            if abs(func.shift(v) - _to_mpf(target)) > tol:
                raise StructureError(
                    "translation system is singular: residual exceeds tolerance"
                )
    return func


class CrossTerm:
    """Off-diagonal coupling between two non-flat blocks."""

    __slots__ = ("k", "k2", "table", "functional", "epsilon")

    def __init__(self, k, k2, table, functional, epsilon):
        self.k = int(k)
        self.k2 = int(k2)
        self.table = _freeze(table)
        self.functional = functional
        self.epsilon = epsilon


class Extension:
    """A conformally-scaled extra factor glued onto the metric."""

    __slots__ = ("functional", "gram")

    def __init__(self, functional, gram):
        self.functional = functional
        self.gram = _freeze(gram)


class MetricSpec:
    """Assembled translation-equivariant metric in block coordinates.

    The flat block carries the identity form; every other block k carries
    exp(2 f_k) times the identity, the base carries exp(2 f_0) times the
    flat metric, and optional cross terms couple pairs of non-flat blocks.
    """

    __slots__ = (
        "decomposition",
        "ratios",
        "flat_block",
        "functionals",
        "base_conformal",
        "translations",
        "cross_terms",
        "extensions",
        "n",
        "precision_bits",
    )

    def __init__(self, decomposition, ratios, flat_block, functionals,
                 base_conformal, translations, cross_terms=(), extensions=(),
                 precision_bits=None):
        self.decomposition = decomposition
        self.ratios = ratios
        self.flat_block = int(flat_block)
        self.functionals = tuple(functionals)
        self.base_conformal = base_conformal
        self.translations = tuple(tuple(v) for v in translations)
        self.cross_terms = tuple(cross_terms)
        self.extensions = tuple(extensions)
        self.n = len(self.translations[0]) if self.translations else 0
        self.precision_bits = (
            decomposition.precision_bits if precision_bits is None else precision_bits
        )

    @property
    def total_dim(self):
        extra = sum(len(e.gram) for e in self.extensions)
        return self.decomposition.p + self.n + extra

    def replace(self, **kwargs) -> "MetricSpec":
        fields = {
            "decomposition": self.decomposition,
            "ratios": self.ratios,
            "flat_block": self.flat_block,
            "functionals": self.functionals,
            "base_conformal": self.base_conformal,
            "translations": self.translations,
            "cross_terms": self.cross_terms,
            "extensions": self.extensions,
            "precision_bits": self.precision_bits,
        }
        fields.update(kwargs)
        return MetricSpec(**fields)


def build_metric_spec(decomp: BlockDecomposition, ratios: RatioMatrix,
                      flat_block: int, translations) -> MetricSpec:
    """Solve for the warping functionals and assemble the metric data.

    Block k receives the functional with increments ln(L1/Lk) along each
    generator's base translation, and the base conformal factor receives
    increments ln(L1); L1 is the flat-block ratio.
    """
    if not 0 <= flat_block < decomp.delta:
        raise InputError("flat block index out of range")
    translations = [list(v) for v in translations]
    if len(translations) != ratios.n_gens:
        raise InputError("need one base translation per generator")
    precision = decomp.precision_bits
    workbits = decomp.workbits
    with _at_prec(workbits):
        lam1 = [row[flat_block] for row in ratios.entries]
        functionals = []
        for k in range(decomp.delta):
            if k == flat_block:
                functionals.append(AffineFunctional([0] * len(translations[0])))
                continue
            targets = [
                mp.log(lam1[j] / ratios.entries[j][k])
                for j in range(ratios.n_gens)
            ]
            functionals.append(
                solve_equivariant_functional(translations, targets, precision)
            )
        base_targets = [mp.log(lam1[j]) for j in range(ratios.n_gens)]
        base_conformal = solve_equivariant_functional(
            translations, base_targets, precision
        )
    return MetricSpec(
        decomp,
        ratios,
        flat_block,
        functionals,
        base_conformal,
        translations,
    )


def _sylvester_positive_definite(rows, tol) -> bool:
    """Leading-principal-minor test on a symmetric numeric matrix."""
    n = len(rows)
    a = [[mp.mpf(x) for x in row] for row in rows]
    for k in range(n):
        # in-place LDL-style elimination keeps this O(n^3) overall
        piv = a[k][k]
        if not piv > tol:
            return False
        for i in range(k + 1, n):
            f = a[i][k] / piv
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    return True


def _cross_covariance_check(spec: MetricSpec, k, k2, table, tol):
    """Generators must scale the coupling table by the two block ratios."""
    decomp = spec.decomposition
    idx1 = list(decomp.block_indices(k))
    idx2 = list(decomp.block_indices(k2))
    for gi, g in enumerate(spec.ratios.generators):
        c = restricted_blocks(decomp, g)
        with _at_prec(decomp.workbits):
            lk = spec.ratios.entries[gi][k]
            lk2 = spec.ratios.entries[gi][k2]
            for a in range(len(idx1)):
                for b in range(len(idx2)):
                    acc = iv.mpf(0)
                    for i in range(len(idx1)):
                        for j in range(len(idx2)):
                            acc += (
                                c[idx1[i]][idx1[a]]
                                * iv.mpf(table[i][j])
                                * c[idx2[j]][idx2[b]]
                            )
                    want = lk * lk2 * mp.mpf(table[a][b])
                    if mp.mpf(abs(acc - iv.mpf(want)).b) > 8 * tol:
                        raise CheckFailureError(
                            "cross-term table between blocks %d and %d is not "
                            "covariant under generator %d" % (k, k2, gi)
                        )


def _grid_points(spec: MetricSpec):
    """Deterministic fundamental-domain grid, 10 cells per translation."""
    g = len(spec.translations)
    n = spec.n
    if g == 0 or n == 0:
        return [tuple([mp.mpf(0)] * n)]
    pts = []
    for flat in range(_CROSS_GRID ** g):
        rem = flat
        x = [mp.mpf(0)] * n
        for j in range(g):
            cell = rem % _CROSS_GRID
            rem //= _CROSS_GRID
            t = mp.mpf(2 * cell + 1) / (2 * _CROSS_GRID)
            for i in range(n):
                x[i] += t * _to_mpf(spec.translations[j][i])
        pts.append(tuple(x))
    return pts


def add_cross_terms(spec: MetricSpec, pairs, tables=None) -> MetricSpec:
    """Couple pairs of non-flat blocks with equivariant off-diagonal terms.

    Each pair (k, k') receives a coupling table (all-ones by default),
    the functional with increments ln(L1/sqrt(Lk Lk')), and one common
    scale found by bisection so the sampled metric stays positive
    definite.
    """
    pairs = [tuple(pair) for pair in pairs]
    if not pairs:
        return spec
    decomp = spec.decomposition
    tol = tolerance(spec.precision_bits)
    for k, k2 in pairs:
        if k == k2:
            raise InputError("cross terms need two distinct blocks")
        if not (0 <= k < decomp.delta and 0 <= k2 < decomp.delta):
            raise InputError("cross-term block index out of range")
        if spec.flat_block in (k, k2):
            raise InputError("cross terms may not touch the flat block")
    if tables is None:
        tables = []
        for k, k2 in pairs:
            rows = len(decomp.block_indices(k))
            cols = len(decomp.block_indices(k2))
            tables.append([[1] * cols for _ in range(rows)])
    if len(tables) != len(pairs):
        raise InputError("need one coupling table per pair")
    new_terms = []
    with _at_prec(decomp.workbits):
        for (k, k2), table in zip(pairs, tables):
            rows = len(decomp.block_indices(k))
            cols = len(decomp.block_indices(k2))
            if len(table) != rows or any(len(r) != cols for r in table):
                raise InputError("coupling table shape must match the blocks")
            _cross_covariance_check(spec, k, k2, table, tol)
            lam1 = [row[spec.flat_block] for row in spec.ratios.entries]
            targets = [
                mp.log(lam1[j])
                - mp.log(spec.ratios.entries[j][k] * spec.ratios.entries[j][k2]) / 2
                for j in range(spec.ratios.n_gens)
            ]
            functional = solve_equivariant_functional(
                spec.translations, targets, spec.precision_bits
            )
            new_terms.append(CrossTerm(k, k2, table, functional, mp.mpf(1)))

        candidate = spec.replace(cross_terms=spec.cross_terms + tuple(new_terms))
        grid = _grid_points(spec)

        def scaled_ok(eps):
            for term in new_terms:
                term.epsilon = eps
            for x in grid:
                point = [mp.mpf(0)] * decomp.p + list(x)
                gram = evaluate_metric(candidate, point)
                if not _sylvester_positive_definite(gram, tol):
                    return False
            return True

        one = mp.mpf(1)
        if scaled_ok(one):
            epsilon = one
        else:
            lo, hi = mp.mpf(0), one
            for _ in range(_CROSS_BISECT_STEPS):
                midpoint = (lo + hi) / 2
                if scaled_ok(midpoint):
                    lo = midpoint
                else:
                    hi = midpoint
            if lo <= 0:
                raise CheckFailureError(
                    "no positive cross-term scale keeps the sampled metric "
                    "positive definite"
                )
            epsilon = lo / 2
        for term in new_terms:
            term.epsilon = epsilon
    return spec.replace(cross_terms=spec.cross_terms + tuple(new_terms))


def evaluate_metric(spec: MetricSpec, point) -> Tuple[Tuple, ...]:
    """Gram matrix of the metric at one point, in block coordinates.

    The point is fiber coordinates followed by base log-coordinates (and
    extension coordinates, which the metric does not read).  Off-block
    entries are exact zeros unless a cross term couples the blocks.
    """
    decomp = spec.decomposition
    p, n = decomp.p, spec.n
    if len(point) < p + n:
        raise InputError("point has %d coordinates, need %d" % (len(point), p + n))
    total = spec.total_dim
    with _at_prec(decomp.workbits):
        x = [_to_mpf(t) for t in point[p:p + n]]
        gram = [[mp.mpf(0) for _ in range(total)] for _ in range(total)]
        for k in range(decomp.delta):
            if k == spec.flat_block:
                scale = mp.mpf(1)
            else:
                scale = mp.exp(2 * spec.functionals[k](x))
            for i in decomp.block_indices(k):
                gram[i][i] = scale
        base_scale = mp.exp(2 * spec.base_conformal(x))
        for i in range(n):
            gram[p + i][p + i] = base_scale
        for term in spec.cross_terms:
            scale = term.epsilon * mp.exp(2 * term.functional(x))
            idx1 = list(decomp.block_indices(term.k))
            idx2 = list(decomp.block_indices(term.k2))
            for a, i in enumerate(idx1):
                for b, j in enumerate(idx2):
                    value = scale * mp.mpf(term.table[a][b])
                    gram[i][j] += value
                    gram[j][i] += value
        offset = p + n
        for ext in spec.extensions:
            scale = mp.exp(2 * ext.functional(x))
            m = len(ext.gram)
            for i in range(m):
                for j in range(m):
                    gram[offset + i][offset + j] = scale * mp.mpf(ext.gram[i][j])
            offset += m
        return _freeze(gram)


def extend(spec: MetricSpec, functional: AffineFunctional, gram) -> MetricSpec:
    """Glue a conformally-scaled constant factor onto the metric.

    The scaling functional must have the same increments as the base
    conformal factor along every stored translation, otherwise the glued
    metric would break equivariance.
    """
    gram = [list(row) for row in gram]
    m = len(gram)
    if m == 0:
        return spec
    if any(len(row) != m for row in gram):
        raise InputError("extension gram matrix must be square")
    tol = tolerance(spec.precision_bits)
    with _at_prec(spec.decomposition.workbits):
        for i in range(m):
            for j in range(i + 1, m):
                if abs(mp.mpf(gram[i][j]) - mp.mpf(gram[j][i])) > tol:
                    raise InputError("extension gram matrix must be symmetric")
        if not _sylvester_positive_definite(gram, tol):
            raise InputError("extension gram matrix must be positive definite")
        for v in spec.translations:
            want = spec.base_conformal.shift(v)
            got = functional.shift(v)
            if abs(want - got) > tol:
                raise CheckFailureError(
                    "extension functional does not match the base conformal "
                    "increments; the glued metric would not be equivariant"
                )
    ext = Extension(functional, gram)
    return spec.replace(extensions=spec.extensions + (ext,))


# ----------------------------------------------------------------------
# equivariance verification


class EquivarianceReport:
    """Outcome of the pullback identity check for one generator."""

    __slots__ = (
        "generator_label",
        "samples",
        "seed",
        "max_residual",
        "precision_bits",
        "verdict",
    )

    def __init__(self, generator_label, samples, seed, max_residual,
                 precision_bits, verdict):
        self.generator_label = str(generator_label)
        self.samples = int(samples)
        self.seed = int(seed)
        self.max_residual = max_residual
        self.precision_bits = int(precision_bits)
        self.verdict = bool(verdict)

    def __repr__(self):
        return "EquivarianceReport(%r, residual=%s, verdict=%s)" % (
            self.generator_label,
            mp.nstr(self.max_residual, 8) if self.max_residual else "0",
            "pass" if self.verdict else "fail",
        )


def _sample_points(spec: MetricSpec, samples: int, seed: int, workbits: int):
    """Seeded dyadic points in the span of the stored base translations."""
    rng = random.Random(seed)
    n = spec.n
    pts = []
    with _at_prec(workbits):
        for _ in range(samples):
            x = [mp.mpf(0)] * n
            for v in spec.translations:
                t = mp.mpf(rng.getrandbits(48)) / mp.mpf(2 ** 48)
                for i in range(n):
                    x[i] += t * _to_mpf(v[i])
            pts.append(tuple(x))
    return pts


def verify_equivariance(spec: MetricSpec, gen: SimilarityGenerator,
                        samples: int = 100, precision: Optional[int] = None,
                        seed: int = 0) -> EquivarianceReport:
    """Check gamma*h = L1^2 h at seeded sample points.

    The pullback uses the exact affine Jacobian of the action: the linear
    part in block coordinates on the fiber, identity on base and extension
    coordinates.  Reports the maximum relative residual and the verdict
    against the precision tolerance.
    """
    if precision is None:
        precision = spec.precision_bits
    precision = validate_precision(precision)
    decomp = spec.decomposition
    p, n = decomp.p, spec.n
    workbits = max(decomp.workbits, precision + GUARD_BITS)
    tol = tolerance(precision)
    c = conjugated_numeric(decomp, gen.linear)
    total = spec.total_dim
    flat_idx = spec.flat_block
    pts = _sample_points(spec, samples, seed, workbits)
    with _at_prec(workbits):
        lam1 = mp.mpf(gen.ratio_row[flat_idx])
        lam1_sq = lam1 * lam1
        v = [_to_mpf(t) for t in gen.base_translation]
        max_residual = mp.mpf(0)
        for x in pts:
            here = [mp.mpf(0)] * p + list(x)
            there = [mp.mpf(0)] * p + [xi + vi for xi, vi in zip(x, v)]
            h_here = evaluate_metric(spec, here)
            h_there = evaluate_metric(spec, there)
            # J^T H(gamma P) J with J = C on the fiber, identity elsewhere
            pulled = [[mp.mpf(0)] * total for _ in range(total)]
            for i in range(total):
                for j in range(total):
                    acc = mp.mpf(0)
                    for a in range(total):
                        ja = c[a][i] if (a < p and i < p) else mp.mpf(1 if a == i else 0)
                        if not ja:
                            continue
                        inner = mp.mpf(0)
                        for b in range(total):
                            jb = (
                                c[b][j]
                                if (b < p and j < p)
                                else mp.mpf(1 if b == j else 0)
                            )
                            if jb:
                                inner += h_there[a][b] * jb
                        acc += ja * inner
                    pulled[i][j] = acc
            scale = max(
                (abs(lam1_sq * h_here[i][j]) for i in range(total) for j in range(total)),
                default=mp.mpf(0),
            )
            if scale == 0:
                scale = mp.mpf(1)
            for i in range(total):
                for j in range(total):
                    diff = abs(pulled[i][j] - lam1_sq * h_here[i][j])
                    rel = diff / scale
                    if rel > max_residual:
                        max_residual = rel
        verdict = max_residual < tol
    return EquivarianceReport(
        gen.label, samples, seed, max_residual, precision, verdict
    )

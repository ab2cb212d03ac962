"""Certified archimedean embeddings of a number field.

Real embeddings are exact dyadic enclosures produced by Sturm isolation and
bisection/Newton refinement; complex embeddings are Weierstrass disks
certified in interval arithmetic around numeric root approximations.  All
downstream quantities (absolute values, logs, rank decisions) are computed
as enclosures, so a reported digit is a proven digit up to the stated
tolerance.

Precision protocol: a request at B bits works internally at B + 32 guard
bits and decisions use the tolerance 2**(-B/2).  Quantities that fail to
certify raise NeedsEscalation; rank computations re-verify every decision
at doubled precision and escalate once more before giving up with
PrecisionError.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from mpmath import iv, mp

from ._backend import QQ
from .errors import InputError, NeedsEscalation, PrecisionError
from .numberfield import FieldElem, NumberField, require_unit
from .polynomials import (
    IntPoly,
    count_real_roots,
    isolate_real_roots,
    poly_gcd,
    refine_root,
)

DEFAULT_PRECISION = 128
MIN_PRECISION = 64
MAX_PRECISION = 4096
GUARD_BITS = 32

_ENV_VAR = "LCPFORGE_PRECISION"


def default_precision() -> int:
    raw = os.environ.get(_ENV_VAR)
    if raw is None:
        return DEFAULT_PRECISION
    try:
        bits = int(raw)
    except ValueError:
        raise InputError("%s must be an integer, got %r" % (_ENV_VAR, raw)) from None
    return validate_precision(bits)


def validate_precision(bits: int) -> int:
    if not isinstance(bits, int) or not (MIN_PRECISION <= bits <= MAX_PRECISION):
        raise InputError(
            "precision must be an integer in [%d, %d], got %r"
            % (MIN_PRECISION, MAX_PRECISION, bits)
        )
    return bits


@contextmanager
def _at_prec(workbits: int):
    old_mp, old_iv = mp.prec, iv.prec
    mp.prec = workbits
    iv.prec = workbits
    try:
        yield
    finally:
        mp.prec = old_mp
        iv.prec = old_iv


def tolerance(bits: int):
    return mp.mpf(2) ** (-(bits // 2))


# ----------------------------------------------------------------------
# interval helpers; complex enclosures are (real interval, imag interval)


def _iv_from_rational(q):
    return iv.mpf(int(q.numerator)) / iv.mpf(int(q.denominator))


def _iv_from_dyadic_pair(lo, hi):
    a = _iv_from_rational(QQ(lo))
    b = _iv_from_rational(QQ(hi))
    return iv.mpf([a.a, b.b])


def _box(re_part, im_part):
    return (re_part, im_part)


def _box_from_disk(center, radius):
    spread = iv.mpf([-radius, radius])
    return (iv.mpf(center.real) + spread, iv.mpf(center.imag) + spread)


def _box_add(x, y):
    return (x[0] + y[0], x[1] + y[1])


def _box_mul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _box_abs(x):
    return iv.sqrt(x[0] ** 2 + x[1] ** 2)


def _box_horner(coeffs: Sequence, z):
    """Evaluate a polynomial with rational coefficients on a complex box."""
    zero = iv.mpf(0)
    acc = _box(zero, zero)
    for c in reversed(coeffs):
        acc = _box_mul(acc, z)
        acc = _box_add(acc, _box(_iv_from_rational(QQ(c)), zero))
    return acc


def _iv_horner(coeffs: Sequence, x):
    acc = iv.mpf(0)
    for c in reversed(coeffs):
        acc = acc * x + _iv_from_rational(QQ(c))
    return acc


# ----------------------------------------------------------------------
# embedding sets


class EmbeddingSet:
    """All archimedean embeddings of a field at a fixed precision.

    Embeddings are indexed 0..s+t-1: first the real ones in ascending root
    order, then one representative per conjugate pair of complex ones,
    ordered by (real part, imaginary part) of the upper-half root.
    """

    __slots__ = ("field", "bits", "workbits", "real_roots", "complex_disks")

    def __init__(self, field, bits, workbits, real_roots, complex_disks):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "workbits", workbits)
        object.__setattr__(self, "real_roots", tuple(real_roots))
        object.__setattr__(self, "complex_disks", tuple(complex_disks))

    def __setattr__(self, name, value):
        raise AttributeError("EmbeddingSet is immutable")

    @property
    def count(self) -> int:
        return len(self.real_roots) + len(self.complex_disks)

    def is_real(self, index: int) -> bool:
        self._check_index(index)
        return index < len(self.real_roots)

    def _check_index(self, index: int) -> None:
        if not 0 <= index < self.count:
            raise InputError(
                "embedding index %d out of range [0, %d)" % (index, self.count)
            )

    def root_enclosure(self, index: int):
        """Interval (real) or box (complex) containing the image of the
        field generator."""
        self._check_index(index)
        with _at_prec(self.workbits):
            if index < len(self.real_roots):
                lo, hi = self.real_roots[index]
                return _iv_from_dyadic_pair(lo, hi)
            center, radius = self.complex_disks[index - len(self.real_roots)]
            return _box_from_disk(center, radius)

    def embed_enclosure(self, elem: FieldElem, index: int):
        if elem.field != self.field:
            raise InputError("element lives in a different field")
        self._check_index(index)
        with _at_prec(self.workbits):
            if index < len(self.real_roots):
                lo, hi = self.real_roots[index]
                return _iv_horner(elem.coords, _iv_from_dyadic_pair(lo, hi))
            center, radius = self.complex_disks[index - len(self.real_roots)]
            return _box_horner(elem.coords, _box_from_disk(center, radius))

    def embed(self, elem: FieldElem, index: int):
        """Midpoint numeric value of the embedding (mpf or mpc)."""
        enc = self.embed_enclosure(elem, index)
        with _at_prec(self.workbits):
            if self.is_real(index):
                return mp.mpf(enc.mid)
            return mp.mpc(mp.mpf(enc[0].mid), mp.mpf(enc[1].mid))

    def embed_all(self, elem: FieldElem) -> Tuple:
        """Values at every archimedean place, real first then upper-half."""
        return tuple(self.embed(elem, index) for index in range(self.count))

    def abs_enclosure(self, elem: FieldElem, index: int):
        enc = self.embed_enclosure(elem, index)
        with _at_prec(self.workbits):
            if self.is_real(index):
                return abs(enc)
            return _box_abs(enc)

    def log_abs_enclosure(self, elem: FieldElem, index: int):
        a = self.abs_enclosure(elem, index)
        with _at_prec(self.workbits):
            if mp.mpf(a.a) <= 0:
                raise NeedsEscalation(
                    "absolute value enclosure touches zero at embedding %d" % index,
                    precision_bits=2 * self.bits,
                )
            return iv.log(a)


def embeddings(field: NumberField, bits: Optional[int] = None) -> EmbeddingSet:
    """Certified embedding data for a field at the requested precision.

    Internal escalations may exceed the user-facing precision cap, so only
    the lower bound is enforced here; entry points validate the full range.
    """
    if bits is None:
        bits = default_precision()
    if bits < MIN_PRECISION:
        raise InputError("precision must be at least %d bits" % MIN_PRECISION)
    return _embeddings_cached(field, bits)


@lru_cache(maxsize=64)
def _embeddings_cached(field: NumberField, bits: int) -> EmbeddingSet:
    real_roots, complex_disks, workbits = certified_poly_roots(field.minpoly, bits)
    return EmbeddingSet(field, bits, workbits, real_roots, complex_disks)


def certified_poly_roots(poly: IntPoly, bits: int):
    """Certified roots of a squarefree integer polynomial.

    Returns (real root enclosures as ascending dyadic pairs, upper-half
    complex Weierstrass disks, working precision).  Escalates the working
    precision up to two times before giving up.
    """
    if poly.degree < 1:
        raise InputError("root isolation needs a nonconstant polynomial")
    if poly_gcd(poly, poly.derivative()).degree > 0:
        raise InputError("root isolation needs a squarefree polynomial")
    s = count_real_roots(poly)
    t = (poly.degree - s) // 2
    attempt_bits = bits
    last_error = None
    for _ in range(3):
        workbits = attempt_bits + GUARD_BITS
        try:
            with _at_prec(workbits):
                real_roots = _refined_real_roots(poly, workbits)
                complex_disks = _certified_complex_disks(poly, s, t, workbits) if t else []
            return real_roots, complex_disks, workbits
        except NeedsEscalation as exc:
            last_error = exc
            attempt_bits *= 2
    raise PrecisionError(
        "root certification failed up to %d bits: %s" % (attempt_bits, last_error)
    )


def _refined_real_roots(poly, workbits):
    out = []
    for a, b in isolate_real_roots(poly):
        lo, hi = refine_root(poly, a, b, bits=workbits)
        out.append((lo, hi))
    return out


def _certified_complex_disks(p, s, t, workbits):
    """Upper-half-plane Weierstrass disks for the non-real roots."""
    d = p.degree
    coeffs_desc = [mp.mpf(int(c)) for c in reversed(p.coeffs)]
    try:
        approx = mp.polyroots(coeffs_desc, maxsteps=120, extraprec=workbits)
    except Exception as exc:  # noqa: BLE001  polyroots convergence failure
        raise NeedsEscalation("root finding did not converge: %s" % exc) from None
    # Weierstrass-style radius around each approximation
    disks = []
    for k, z in enumerate(approx):
        zbox = _box(iv.mpf(z.real), iv.mpf(z.imag))
        num = _box_abs(_box_horner(p.coeffs, zbox))
        den = iv.mpf(1)
        for j, w in enumerate(approx):
            if j == k:
                continue
            diff = _box(iv.mpf(z.real) - iv.mpf(w.real), iv.mpf(z.imag) - iv.mpf(w.imag))
            den = den * _box_abs(diff)
        if mp.mpf(den.a) <= 0:
            raise NeedsEscalation("root approximations collide")
        radius = mp.mpf((iv.mpf(d) * num / den).b)
        disks.append((mp.mpc(z), radius))
    # split into real-line disks and strictly complex ones
    complex_disks = []
    n_real = 0
    for center, radius in disks:
        if abs(center.imag) > radius:
            if center.imag > 0:
                complex_disks.append((center, radius))
        else:
            n_real += 1
    if n_real != s or len(complex_disks) != t:
        raise NeedsEscalation(
            "embedding counts did not certify (%d real, %d complex vs signature %r)"
            % (n_real, len(complex_disks), (s, t))
        )
    # pairwise disjointness of all disks certifies one root per disk
    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            ci, ri = disks[i]
            cj, rj = disks[j]
            sep = _box_abs(
                _box(
                    iv.mpf(ci.real) - iv.mpf(cj.real),
                    iv.mpf(ci.imag) - iv.mpf(cj.imag),
                )
            )
            if mp.mpf(sep.a) <= mp.mpf((iv.mpf(ri) + iv.mpf(rj)).b):
                raise NeedsEscalation("Weierstrass disks overlap")
    complex_disks.sort(key=lambda cr: (cr[0].real, cr[0].imag))
    return complex_disks


def all_roots_numeric(field: NumberField, bits: int):
    """All d roots as midpoint complex numbers plus the conjugation pairing.

    Real roots map to themselves under the pairing; each complex root is
    adjacent to its conjugate.  Used for heuristic reconstruction only;
    callers must verify results exactly.
    """
    emb = embeddings(field, min(bits, MAX_PRECISION))
    roots: List = []
    pairing: Dict[int, int] = {}
    with _at_prec(emb.workbits):
        for lo, hi in emb.real_roots:
            enc = _iv_from_dyadic_pair(lo, hi)
            idx = len(roots)
            roots.append(mp.mpc(mp.mpf(enc.mid)))
            pairing[idx] = idx
        for center, _radius in emb.complex_disks:
            idx = len(roots)
            roots.append(center)
            roots.append(mp.mpc(center.real, -center.imag))
            pairing[idx] = idx + 1
            pairing[idx + 1] = idx
    return roots, pairing


# ----------------------------------------------------------------------
# logarithmic embedding and multiplicative rank


def log_vector(emb: EmbeddingSet, elem: FieldElem) -> Tuple:
    """Logarithmic embedding (ln|s_1|, ..., ln|s_s|, 2 ln|s_{s+1}|, ...).

    Complex places carry weight 2 so that the entries of a unit sum to
    zero.  Midpoints of certified enclosures; raises NeedsEscalation when
    an enclosure is too wide to support decisions at the set's tolerance.
    """
    require_unit(elem, "logarithmic embedding")
    s = emb.field.signature[0]
    out = []
    with _at_prec(emb.workbits):
        width_cap = tolerance(emb.bits) / 256
        for index in range(emb.count):
            enc = emb.log_abs_enclosure(elem, index)
            if mp.mpf(enc.delta) > width_cap:
                raise NeedsEscalation(
                    "log enclosure too wide at embedding %d" % index,
                    precision_bits=2 * emb.bits,
                )
            value = mp.mpf(enc.mid)
            out.append(value if index < s else 2 * value)
    return tuple(out)


def _numeric_rank(rows: List[Sequence], tol) -> int:
    """Rank of a small real matrix by full-pivot elimination."""
    m = [[mp.mpf(x) for x in row] for row in rows]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    rank = 0
    row_used = [False] * nrows
    col_used = [False] * ncols
    for _ in range(min(nrows, ncols)):
        best, bi, bj = tol, None, None
        for i in range(nrows):
            if row_used[i]:
                continue
            for j in range(ncols):
                if col_used[j]:
                    continue
                if abs(m[i][j]) > best:
                    best, bi, bj = abs(m[i][j]), i, j
        if bi is None:
            break
        rank += 1
        row_used[bi] = True
        col_used[bj] = True
        pivot = m[bi][bj]
        for i in range(nrows):
            if row_used[i] or m[i][bj] == 0:
                continue
            f = m[i][bj] / pivot
            for j in range(ncols):
                m[i][j] -= f * m[bi][j]
    return rank


def _rank_at(
    field: NumberField,
    units: Sequence[FieldElem],
    bits: int,
    coords: Optional[Sequence[int]] = None,
) -> int:
    emb = embeddings(field, bits)
    rows = [log_vector(emb, u) for u in units]
    if coords is not None:
        rows = [[row[i] for i in coords] for row in rows]
    with _at_prec(emb.workbits):
        return _numeric_rank(rows, tolerance(bits))


def multiplicative_rank(
    field: NumberField, units: Sequence[FieldElem], bits: Optional[int] = None
) -> int:
    """Rank of the subgroup generated by the given units.

    Decided numerically on the logarithmic embedding at the requested
    precision, then re-verified at doubled precision; one further
    escalation is attempted before PrecisionError.  Unit-ness itself is
    checked exactly first.
    """
    if bits is None:
        bits = default_precision()
    validate_precision(bits)
    return _stable_rank(field, units, bits, None)


def projected_log_rank(
    field: NumberField,
    units: Sequence[FieldElem],
    coords: Sequence[int],
    bits: Optional[int] = None,
) -> int:
    """Rank of the logarithmic embeddings restricted to selected places.

    Same escalation discipline as multiplicative_rank; coords index into
    the log vector (real places first, then complex ones).
    """
    if bits is None:
        bits = default_precision()
    validate_precision(bits)
    coords = tuple(coords)
    s, t = field.signature
    for i in coords:
        if not 0 <= i < s + t:
            raise InputError("log coordinate %d out of range [0, %d)" % (i, s + t))
    if not coords:
        return 0
    return _stable_rank(field, units, bits, coords)


def _stable_rank(field, units, bits, coords):
    for u in units:
        require_unit(u, "rank input")
    if not units:
        return 0
    results = []
    for level in (bits, 2 * bits, 4 * bits):
        if level > MAX_PRECISION * 4:
            break
        try:
            results.append(_rank_at(field, units, level, coords))
        except NeedsEscalation:
            results.append(None)
        if (
            len(results) >= 2
            and results[-1] is not None
            and results[-1] == results[-2]
        ):
            return results[-1]
    raise PrecisionError(
        "multiplicative rank did not stabilize under escalation "
        "(levels %s gave %s)" % ([bits, 2 * bits, 4 * bits], results)
    )


def verify_ratio_witness(
    emb: EmbeddingSet,
    elem: FieldElem,
    index: int,
    ratio,
    exponent: int = 1,
    tol=None,
) -> bool:
    """Check that ratio**exponent equals |embedding(elem)|.

    The element must be an exact algebraic unit; the numeric comparison is
    certified against the enclosure widened by the tolerance.  An exponent
    above 1 records that the claimed ratio is only a root of the witnessed
    modulus (for instance when the honest ratio witness would need a square
    root that the field does not contain).
    """
    require_unit(elem, "ratio witness")
    if exponent < 1:
        raise InputError("witness exponent must be a positive integer")
    with _at_prec(emb.workbits):
        if tol is None:
            tol = tolerance(emb.bits)
        enc = emb.abs_enclosure(elem, index)
        powered = mp.mpf(ratio) ** exponent
        lo = mp.mpf(enc.a) - tol
        hi = mp.mpf(enc.b) + tol
        return lo <= powered <= hi

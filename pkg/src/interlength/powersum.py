"""Exact integers too large to hold as machine bignums.

Certificate α values grow as iterated exponentials, yet the only operations
the cut-elimination pipeline needs are ``+``, ``-``, ``*``, comparison and
``x -> 2^(x-1)``.  A :class:`PowerSum` stores ``sum c_i 2^(e_i)`` with odd
coefficients and exponents that are themselves ordinary ints, which covers
values like ``2^(2^(2^17))`` exactly.

Values whose bit length stays under :data:`INT_BITS` are always plain ints;
every operation here demotes its result when possible, so callers can mix
ints and PowerSums freely through :func:`add`, :func:`mul` and friends.
"""

from __future__ import annotations

import functools
import re

INT_BITS = 4096

# Residues modulo this prime give every value an exact fingerprint: equal
# values always share it, so a mismatch proves inequality without the
# subtraction that comparison otherwise needs.
FINGERPRINT_MODULUS = 2**61 - 1

def _odd(c: int, e: int) -> tuple[int, int]:
    shift = (c & -c).bit_length() - 1
    if shift == 0:
        return c, e
    return c >> shift, (e + shift if isinstance(e, int) else add(e, shift))


def _far_apart(eh, el, width: int) -> bool:
    """Whether ``eh - el > width``, cheaply when the exponents are huge."""
    if isinstance(eh, int) and isinstance(el, int):
        return eh - el > width
    if isinstance(el, int) or _abs_log(eh) > _abs_log(el):
        return True  # a PowerSum exponent dwarfs any small gap
    return compare(sub(eh, el), width) > 0


_by_exponent = functools.cmp_to_key(lambda t, u: compare(t[1], u[1]))


def _normalize(terms) -> tuple[tuple[int, int], ...]:
    """Merge terms until every gap exceeds the lower coefficient's width plus 2.

    In that shape the leading term alone fixes the sign and the binary
    magnitude, which is all comparison needs.
    """
    terms = list(terms)
    if all(isinstance(e, int) for _, e in terms):
        return _normalize_flat(terms)
    while True:
        acc: dict[int, int] = {}
        for c, e in terms:
            if c:
                c, e = _odd(c, e)
                acc[e] = acc.get(e, 0) + c
        work = sorted(((c, e) for e, c in acc.items() if c), key=_by_exponent, reverse=True)
        out: list[tuple[int, int]] = []
        merged = False
        for c, e in work:
            if out and not _far_apart(out[-1][1], e, abs(c).bit_length() + 2):
                ch, eh = out.pop()
                out.append(((ch << sub(eh, e)) + c, e))
                merged = True
            else:
                out.append((c, e))
        if not merged and all(c & 1 for c, _ in out):
            return tuple(out)
        terms = out


def _normalize_flat(terms) -> tuple[tuple[int, int], ...]:
    # same algorithm as _normalize, specialised to int exponents
    while True:
        acc: dict[int, int] = {}
        for c, e in terms:
            if c:
                low = c & -c
                if low != 1:
                    shift = low.bit_length() - 1
                    c >>= shift
                    e += shift
                acc[e] = acc.get(e, 0) + c
        out: list[list[int]] = []
        merged = False
        for e in sorted(acc, reverse=True):
            c = acc[e]
            if not c:
                continue
            if out and out[-1][1] - e <= abs(c).bit_length() + 2:
                top = out[-1]
                top[0] = (top[0] << (top[1] - e)) + c
                top[1] = e
                merged = True
            else:
                out.append([c, e])
        out = [t for t in out if t[0]]
        if not merged and all(c & 1 for c, _ in out):
            return tuple((c, e) for c, e in out)
        terms = out


@functools.total_ordering
class PowerSum:
    __slots__ = ("terms", "_log", "_fp")

    def __init__(self, terms):
        self.terms = terms  # normalized, highest exponent first; use make()
        self._log = None
        self._fp = None

    # -- construction -------------------------------------------------------

    @staticmethod
    def make(terms) -> int | PowerSum:
        terms = _normalize(terms)
        if not terms:
            return 0
        c, e = terms[0]
        if isinstance(e, int) and e + abs(c).bit_length() <= INT_BITS:
            return sum(c << e for c, e in terms)
        return PowerSum(terms)

    @staticmethod
    def lift(x: int | PowerSum) -> tuple[tuple[int, int], ...]:
        if isinstance(x, PowerSum):
            return x.terms
        return ((x, 0),) if x else ()

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        return PowerSum.make(self.terms + PowerSum.lift(other))

    __radd__ = __add__

    def __neg__(self):
        # negating every coefficient keeps the normal form intact
        return PowerSum(tuple((-c, e) for c, e in self.terms))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        return PowerSum.make(
            [(c1 * c2, add(e1, e2)) for c1, e1 in self.terms for c2, e2 in PowerSum.lift(other)])

    __rmul__ = __mul__

    # -- order ------------------------------------------------------------------

    def sign(self) -> int:
        return (self.terms[0][0] > 0) - (self.terms[0][0] < 0)

    def __eq__(self, other):
        if isinstance(other, PowerSum) and other.terms == self.terms:
            return True
        if isinstance(other, (int, PowerSum)) and not isinstance(other, bool):
            if self.fingerprint() != residue(other, FINGERPRINT_MODULUS):
                return False
            return compare(self, other) == 0
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, (int, PowerSum)) and not isinstance(other, bool):
            return compare(self, other) < 0
        return NotImplemented

    def __hash__(self):
        # a PowerSum never equals an int (ints are demoted)
        return hash(("PowerSum", self.fingerprint()))

    def fingerprint(self) -> int:
        """The value modulo :data:`FINGERPRINT_MODULUS`."""
        if self._fp is None:
            self._fp = residue(self, FINGERPRINT_MODULUS)
        return self._fp

    def log2_floor(self):
        """Floor of log2 of the absolute value (an int or, for towers, a PowerSum)."""
        if self._log is None:
            self._log = self._compute_log()
        return self._log

    def _compute_log(self):
        c, e = self.terms[0]
        top = abs(c).bit_length() - 1
        if abs(c) == 1 and len(self.terms) > 1 and (self.terms[1][0] > 0) != (c > 0):
            top -= 1  # 2^e minus something positive
        return add(e, top)

    def __repr__(self):
        return f"PowerSum({' + '.join(f'{c}*2^{e}' for c, e in self.terms)})"

    def __str__(self):
        return describe(self)


@functools.lru_cache(maxsize=None)
def _totient(m: int) -> int:
    from sympy import totient
    return int(totient(m))


def _pow2_mod(e, m: int) -> int:
    """``2^e mod m`` where ``e`` may itself be a PowerSum."""
    if isinstance(e, int) and e.bit_length() <= 2 * m.bit_length():
        return pow(2, e, m)
    # e is far larger than m, so 2^e vanishes modulo the power-of-two part of
    # m, and modulo the odd part q Euler's theorem shrinks e to e mod phi(q)
    k = (m & -m).bit_length() - 1
    q = m >> k
    if q == 1:
        return 0
    r = pow(2, residue(e, _totient(q)), q)
    if k == 0:
        return r
    # the unique y below m with y = 0 mod 2^k and y = r mod q
    return (r * pow(2, -k, q) % q) << k


def residue(x, m: int) -> int:
    """``x mod m`` for an int or a PowerSum, computed exactly."""
    if isinstance(x, int):
        return x % m
    if m == 1:
        return 0
    if m == FINGERPRINT_MODULUS and x._fp is not None:
        return x._fp
    return sum(c * _pow2_mod(e, m) for c, e in x.terms) % m


def log2_split(x) -> tuple[int, bool]:
    """``(floor(log2 x), x is a power of two)`` for positive ``x``."""
    if isinstance(x, int):
        if x < 1:
            raise ValueError("log2 of a non-positive number")
        return x.bit_length() - 1, x & (x - 1) == 0
    if x.sign() <= 0:
        raise ValueError("log2 of a non-positive number")
    return x.log2_floor(), len(x.terms) == 1 and x.terms[0][0] == 1


def _abs_log(x):
    if isinstance(x, int):
        return abs(x).bit_length() - 1
    return x.log2_floor()


def compare(x, y) -> int:
    """Sign of ``x - y``; decides by binary magnitude first and subtracts only on ties."""
    if isinstance(x, int) and isinstance(y, int):
        return (x > y) - (x < y)
    sx, sy = sign(x), sign(y)
    if sx != sy:
        return (sx > sy) - (sx < sy)
    if sx == 0:
        return 0
    c = compare(_abs_log(x), _abs_log(y))
    if c != 0:
        return c * sx
    return sign(sub(x, y))


def sign(x: int | PowerSum) -> int:
    if isinstance(x, PowerSum):
        return x.sign()
    return (x > 0) - (x < 0)


def add(x, y):
    if isinstance(x, int) and isinstance(y, int) and max(x.bit_length(), y.bit_length()) < INT_BITS:
        return x + y
    tx, ty = PowerSum.lift(x), PowerSum.lift(y)
    # leading terms that cancel exactly need no normalization at all
    i = 0
    while i < len(tx) and i < len(ty) and tx[i][0] == -ty[i][0] and tx[i][1] == ty[i][1]:
        i += 1
    if i:
        tx, ty = tx[i:], ty[i:]
    if isinstance(y, int) and len(ty) == 1 and tx:
        quick = _add_small(tx, ty[0][0])
        if quick is not None:
            return quick
    return PowerSum.make(tx + ty)


def _add_small(terms, k: int):
    """``terms + k`` by touching only the lowest term, or None if that is not enough."""
    if k.bit_length() > 256 or not isinstance(terms[0][1], PowerSum):
        return None
    c, e = terms[-1]
    rest = list(terms[:-1])
    if isinstance(e, int) and e <= 512:
        low = (c << e) + k
    else:
        rest.append((c, e))
        low = k
    if low:
        lc, le = _odd(low, 0)
        if rest and isinstance(rest[-1][1], int) and rest[-1][1] - le <= abs(lc).bit_length() + 2:
            return None
        rest.append((lc, le))
    if not rest or not isinstance(rest[0][1], PowerSum):
        return None
    return PowerSum(tuple(rest))


def sub(x, y):
    return add(x, neg(y))


def neg(x):
    return -x


def mul(x, y):
    if isinstance(x, int) and isinstance(y, int):
        if x.bit_length() + y.bit_length() <= INT_BITS:
            return x * y
    return PowerSum.make(
        [(c1 * c2, add(e1, e2)) for c1, e1 in PowerSum.lift(x) for c2, e2 in PowerSum.lift(y)])


def pow2(e) -> int | PowerSum:
    """``2^e`` for a natural ``e``, itself an int or a PowerSum."""
    if sign(e) < 0:
        raise ValueError("negative exponent")
    return PowerSum.make([(1, e)])


def exp_step(alpha):
    """The cut-elimination growth ``0 -> 0`` and ``a -> 2^(a-1)`` for ``a >= 1``."""
    if sign(alpha) == 0:
        return 0
    return pow2(sub(alpha, 1))


def describe(x) -> str:
    """Short human rendering; exact digits only for modest ints."""
    if isinstance(x, int):
        if x.bit_length() <= 256:
            return str(x)
        return f"<{x.bit_length()}-bit integer>"
    if len(x.terms) == 1 and x.terms[0][0] == 1:
        e = x.terms[0][1]
        return f"2^{describe(e)}"
    return f"<about 2^{describe(x.log2_floor())}>"


def to_text(x) -> str:
    """Exact, reparseable rendering: a decimal, or terms ``c*2^(e)`` with ``e`` nested."""
    if isinstance(x, int):
        return str(x)
    return "+".join(f"{c}*2^({to_text(e)})" for c, e in x.terms).replace("+-", "-")


_TEXT = re.compile(r"\s*([+-]?\d+)(\*2\^\()?")


def from_text(s: str):
    value, pos = _parse_sum(s, 0)
    if s[pos:].strip():
        raise ValueError(f"trailing text in number: {s[pos:]!r}")
    return value


def _parse_sum(s: str, pos: int):
    terms = []
    while True:
        m = _TEXT.match(s, pos)
        if not m:
            raise ValueError(f"malformed number at {pos}: {s!r}")
        c, pos = int(m.group(1)), m.end()
        if m.group(2):
            e, pos = _parse_sum(s, pos)
            if s[pos:pos + 1] != ")":
                raise ValueError(f"missing ')' at {pos}: {s!r}")
            pos += 1
        else:
            e = 0
        terms.append((c, e))
        if pos >= len(s) or s[pos] not in "+-":
            break
        if s[pos] == "+":
            pos += 1
    return PowerSum.make(terms), pos


def compare_with_tower(x, tower) -> int:
    """Sign of ``x - 2_h^t`` without expanding either side."""
    from .tower import Tower

    if isinstance(x, int):
        return -tower.compare(x)
    if tower.height == 0:
        return sign(sub(x, tower.top))
    log, exact = log2_split(x)
    below = -compare_with_tower(log, Tower(tower.height - 1, tower.top))  # sign of T' - log
    if exact:
        return -below  # 2^log against 2^T'
    # 2^log < x < 2^(log+1)
    return 1 if below <= 0 else -1

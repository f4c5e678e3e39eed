"""Iterated exponentials ``2_h^t`` with exact comparison.

``2_0^t = t`` and ``2_{h+1}^t = 2^(2_h^t)``.  Values are only expanded to
Python integers below a bit cap; ordering never needs expansion because
comparing a tower against a plain integer reduces to comparing a shorter
tower against that integer's floor log2.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

DEFAULT_BIT_CAP = 4096


class TowerTooLarge(ArithmeticError):
    """Exact expansion was requested above the configured bit cap."""


def _cmp(a: int, b: int) -> int:
    return (a > b) - (a < b)


def _cmp_tower_int(height: int, top: int, m: int) -> int:
    # sign of 2_height^top - m, for top >= 0
    while height > 0:
        if m < 1:
            return 1  # 2^x >= 1 > m
        log = m.bit_length() - 1
        # 2^X against m with X = 2_{height-1}^top and 2^log <= m < 2^(log+1)
        c = _cmp_tower_int(height - 1, top, log)
        if c != 0:
            return c
        return 0 if m == 1 << log else -1
    return _cmp(top, m)


@functools.total_ordering
@dataclass(frozen=True)
class Tower:
    height: int
    top: int

    def __post_init__(self):
        if self.height < 0:
            raise ValueError(f"tower height must be >= 0, got {self.height}")
        if self.top < 0:
            raise ValueError(f"tower top must be >= 0, got {self.top}")

    # -- ordering -------------------------------------------------------

    def compare(self, other: Tower | int) -> int:
        """Return -1, 0 or 1 as ``self`` is below, equal to or above ``other``."""
        if isinstance(other, int):
            return _cmp_tower_int(self.height, self.top, other)
        if not isinstance(other, Tower):
            return NotImplemented
        # 2_k^. is strictly increasing, so strip the common height first
        k = min(self.height, other.height)
        h1, h2 = self.height - k, other.height - k
        if h2 == 0:
            return _cmp_tower_int(h1, self.top, other.top)
        return -_cmp_tower_int(h2, other.top, self.top)

    def __eq__(self, other):
        if isinstance(other, (Tower, int)) and not isinstance(other, bool):
            return self.compare(other) == 0
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, (Tower, int)) and not isinstance(other, bool):
            return self.compare(other) < 0
        return NotImplemented

    def __hash__(self):
        return hash(self.canonical())

    def canonical(self) -> tuple[int, int]:
        """Fold ``2_h^{2^k}`` into ``2_{h+1}^k`` as far as possible; equal values fold alike."""
        h, t = self.height, self.top
        if h >= 1 and t == 0:
            h, t = h - 1, 1
        while t >= 2 and t & (t - 1) == 0:
            h, t = h + 1, t.bit_length() - 1
        return h, t

    # -- evaluation -----------------------------------------------------

    def normalized(self, bit_cap: int = DEFAULT_BIT_CAP) -> Tower:
        """Unfold ``2_{h}^t -> 2_{h-1}^{2^t}`` while the new top stays under the cap."""
        h, t = self.height, self.top
        while h > 0 and t < bit_cap:
            h, t = h - 1, 1 << t
        return Tower(h, t)

    def fits(self, bit_cap: int = DEFAULT_BIT_CAP) -> bool:
        n = self.normalized(bit_cap)
        return n.height == 0

    def value(self, bit_cap: int = DEFAULT_BIT_CAP) -> int:
        n = self.normalized(bit_cap)
        if n.height:
            raise TowerTooLarge(f"{self} exceeds {bit_cap} bits")
        return n.top

    def log2_floor(self) -> int | Tower:
        """Floor of log2 of the value; a smaller tower when height >= 1."""
        if self.height == 0:
            if self.top == 0:
                raise ValueError("log2 of 0")
            return self.top.bit_length() - 1
        if self.height == 1:
            return self.top
        return Tower(self.height - 1, self.top)

    def __str__(self):
        return f"2_{self.height}^{self.top}"

    def describe(self, bit_cap: int = DEFAULT_BIT_CAP) -> str:
        if self.fits(bit_cap):
            v = self.value(bit_cap)
            if v.bit_length() <= 64 or self.height == 0:
                return f"{self} = {v}"
            return f"{self} ({v.bit_length()} bits)"
        return str(self)


def compare(x: Tower | int, y: Tower | int) -> int:
    """Total order on towers and naturals, consistent with their numeric values."""
    if isinstance(x, int):
        x = Tower(0, x)
    return x.compare(y)

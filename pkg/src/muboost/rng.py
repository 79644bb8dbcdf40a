"""Deterministic pseudo-randomness for dataset splits and encoding permutations.

Every shuffle in this package flows through the small linear generator below,
so a split or permutation is an exact function of ``(seed, n)`` that any
implementation, in any language, can reproduce. The recipe:

* State: one 64-bit unsigned integer, initialised to ``seed mod 2**64``.
* Step: ``state = (state * 6364136223846793005 + 1442695040888963407) mod 2**64``
  (Knuth's MMIX multiplier and increment).
* Draw below ``m``: step once, return ``state mod m``. The modulo bias is
  accepted; the goal is reproducibility, not statistical quality.
* Shuffle of ``n`` indices: start from ``[0, 1, ..., n-1]`` and run a
  descending Fisher-Yates pass; for ``i = n-1`` down to ``1``, swap position
  ``i`` with position ``draw_below(i + 1)``.

Sub-seeds for independent consumers of one base seed (for example the two
categorical encoders of an ensemble member) come from ``derive_seed``, a
splitmix64 finalizer over ``seed + (salt + 1) * 0x9E3779B97F4A7C15``.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407
_GOLDEN = 0x9E3779B97F4A7C15


class Lcg64:
    """The documented 64-bit linear congruential generator."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state * _LCG_MULT + _LCG_INC) & _MASK64
        return self.state

    def draw_below(self, m: int) -> int:
        """Draw an integer in [0, m). m must be positive."""
        return self.next_u64() % m


def shuffled_indices(n: int, seed: int) -> list[int]:
    """Fisher-Yates shuffle of [0, n) per the documented recipe."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = Lcg64(seed)
    indices = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.draw_below(i + 1)
        indices[i], indices[j] = indices[j], indices[i]
    return indices


def derive_seed(seed: int, salt: int) -> int:
    """Stable sub-seed for the salt'th consumer of a base seed."""
    z = (seed + (salt + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64

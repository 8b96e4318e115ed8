"""Free-monoid words, q-arithmetic and the geometry of the left-extension tree.

Words over the two-letter alphabet ``{a, b}`` are plain Python strings; the
empty string is the root ``e``.  Two words are adjacent in the tree iff one is
obtained from the other by adding one letter on the left, so the ball of
radius R around the root is the binary left-extension tree truncated at
depth R.
"""

from __future__ import annotations

from itertools import product

ALPHABET = ("a", "b")
EMPTY = ""

#: Hard cap on ball radii (2^21 - 1 words is already ~2M vertices).
BALL_RADIUS_CAP = 20

_BAR = {"a": "b", "b": "a"}


class RadiusCapError(ValueError):
    """A requested ball or branch radius exceeds the memory-safety cap."""


def check_word(w: str) -> str:
    if not isinstance(w, str) or any(c not in _BAR for c in w):
        raise ValueError(f"not a word over {{a,b}}: {w!r}")
    return w


def parse_word(text: str) -> str:
    """Parse the serialized form: letters over {a,b}, with 'e' for the empty word."""
    if text == "e":
        return EMPTY
    return check_word(text)


def format_word(w: str) -> str:
    return w if w else "e"


def involution(w: str) -> str:
    """The anti-automorphism of the monoid: reverse the word and swap a <-> b."""
    return "".join(_BAR[c] for c in reversed(w))


def validate_q(q: float) -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"deformation parameter must lie in (0, 1), got {q}")
    return q


def qnumber(n: int, q: float) -> float:
    """The quantum integer [n]_q = (q^n - q^-n) / (q - q^-1), for n >= 1.

    Evaluated as q^(1-n) (1 - q^2n) / (1 - q^2) to keep all factors in (0, 1]
    before the single large power.
    """
    if n < 1:
        raise ValueError(f"qnumber requires n >= 1, got {n}")
    validate_q(q)
    return q ** (1 - n) * (1.0 - q ** (2 * n)) / (1.0 - q * q)


def qfactorial(n: int, q: float) -> float:
    out = 1.0
    for i in range(1, n + 1):
        out *= qnumber(i, q)
    return out


def qbinom(n: int, k: int, q: float) -> float:
    """Gaussian binomial coefficient, via the product formula
    q^(-k(n-k)) * prod_{i<k} (1 - q^(2(n-i))) / (1 - q^(2(k-i))).
    """
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"qbinom requires 0 <= k <= n, got ({n}, {k})")
    validate_q(q)
    out = float(q) ** (-k * (n - k))
    for i in range(k):
        out *= (1.0 - q ** (2 * (n - i))) / (1.0 - q ** (2 * (k - i)))
    return out


def indecomposable_factors(w: str) -> list[str]:
    """Split w into maximal alternating blocks (cut wherever two equal letters meet)."""
    factors: list[str] = []
    start = 0
    for i in range(1, len(w)):
        if w[i] == w[i - 1]:
            factors.append(w[start:i])
            start = i
    if w:
        factors.append(w[start:])
    return factors


def qdim(w: str, q: float) -> float:
    """Quantum dimension: product of [len(f)+1]_q over the indecomposable factors."""
    out = 1.0
    for f in indecomposable_factors(w):
        out *= qnumber(len(f) + 1, q)
    return out


def classical_dim(w: str) -> int:
    """The q -> 1 limit of qdim: product of (len(f)+1) over indecomposable factors."""
    out = 1
    for f in indecomposable_factors(w):
        out *= len(f) + 1
    return out


def common_suffix_length(s: str, t: str) -> int:
    k = 0
    while k < len(s) and k < len(t) and s[len(s) - 1 - k] == t[len(t) - 1 - k]:
        k += 1
    return k


def tree_distance(s: str, t: str) -> int:
    return len(s) + len(t) - 2 * common_suffix_length(s, t)


def geodesic(s: str, t: str) -> list[str]:
    """Vertices of the geodesic from s to t: strip s on the left down to the
    common suffix, then extend on the left up to t."""
    k = common_suffix_length(s, t)
    path = [s[i:] for i in range(len(s) - k + 1)]
    path.extend(t[i:] for i in range(len(t) - k - 1, -1, -1))
    return path


def neighbors(w: str) -> list[str]:
    """Tree neighbors: the two left-extensions, plus the left-contraction if w != e."""
    out = [c + w for c in ALPHABET]
    if w:
        out.append(w[1:])
    return out


def ball(radius: int) -> list[str]:
    """All words of length <= radius, in length-lexicographic order (a < b)."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius > BALL_RADIUS_CAP:
        raise RadiusCapError(
            f"ball radius {radius} exceeds the cap {BALL_RADIUS_CAP} "
            f"({2 ** (BALL_RADIUS_CAP + 1) - 1} vertices)"
        )
    out = [EMPTY]
    for length in range(1, radius + 1):
        out.extend("".join(p) for p in product(ALPHABET, repeat=length))
    return out


def branch(x: str, radius: int) -> list[str]:
    """The branch of words ending in x, truncated to the ball of the given radius:
    all ux with len(u) <= radius - len(x), in length-lexicographic order of u."""
    check_word(x)
    if radius > BALL_RADIUS_CAP:
        raise RadiusCapError(f"radius {radius} exceeds the cap {BALL_RADIUS_CAP}")
    return [u + x for u in ball(radius - len(x))] if radius >= len(x) else []

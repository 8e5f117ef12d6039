"""Symbolic engine for the colored operads behind homotopy transfer.

Everything here is exact symbolic algebra on words of unary operations over
two colors B and W.  A generator is one operation; a word is a composable
chain (z1 z2 means z1 o z2: the rightmost factor is applied first); an
element is a finite Z-linear combination of words of one ambient operad.

Ambients (families of generators a word may use):

    riso        f's and g's, all indices
    rfake       f's and g's, indices 0 and 1 only
    dif         the single degree -1 generator xb
    dif_riso    riso plus xb
    dif_rfake   rfake plus xb
    riso_tilde  everything: f, g, their barred copies fb, gb, and xb, yb

Degrees: f_n, g_n and their barred copies have degree n; xb and yb have
degree -1.  The filtration weight (fweight) of a generator is 1 for barred
copies and for xb, yb and 0 otherwise; a word's fweight is the sum over
its factors, and both differentials only ever raise it.

The differential acts on generators by fixed tables and extends to words
as a derivation with Koszul signs: passing d across z costs (-1)^deg(z).
Barred generators differentiate into the unbarred rule plus every mixed
barred variant, matching the rule "bar at least one factor" (the
superscript sum below excludes the all-unbarred term, which belongs to the
unbarred differential).

Truncation: the kernel elements and the retraction are infinite series in
the completed operad; here they are computed per filtration band.  Only
``max_fweight`` truncates them (band-by-band results are exact because no
operation lowers fweight); the other caps bound word enumeration in the
boundary search and the identity suite.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from functools import lru_cache

from .exactlin import IntMatrix, solve_integer


_FAMILIES = ("f", "g", "fb", "gb", "xb", "yb")
_FAMILY_RANK = {"f": 0, "g": 1, "fb": 2, "gb": 3, "xb": 4, "yb": 5}

_AMBIENT_FAMILIES: dict[str, frozenset[str]] = {
    "riso": frozenset({"f", "g"}),
    "rfake": frozenset({"f", "g"}),
    "dif": frozenset({"xb"}),
    "dif_riso": frozenset({"f", "g", "xb"}),
    "dif_rfake": frozenset({"f", "g", "xb"}),
    "riso_tilde": frozenset(_FAMILIES),
}
_AMBIENT_INDEX_CAP: dict[str, int | None] = {
    "riso": None,
    "rfake": 1,
    "dif": None,
    "dif_riso": None,
    "dif_rfake": 1,
    "riso_tilde": None,
}


@dataclass(frozen=True, slots=True)
class Generator:
    """One unary operation: family plus index (index 0 for xb and yb)."""

    family: str
    index: int

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}")
        if self.index < 0:
            raise ValueError("generator index must be nonnegative")
        if self.family in ("xb", "yb") and self.index != 0:
            raise ValueError(f"{self.family} carries no index")

    @property
    def degree(self) -> int:
        if self.family in ("xb", "yb"):
            return -1
        return self.index

    @property
    def fweight(self) -> int:
        return 0 if self.family in ("f", "g") else 1

    @property
    def src(self) -> str:
        if self.family == "xb":
            return "B"
        if self.family == "yb":
            return "W"
        return "B" if self.family in ("f", "fb") else "W"

    @property
    def dst(self) -> str:
        if self.family == "xb":
            return "B"
        if self.family == "yb":
            return "W"
        even = self.index % 2 == 0
        if self.family in ("f", "fb"):
            return "W" if even else "B"
        return "B" if even else "W"

    @property
    def token(self) -> str:
        if self.family in ("xb", "yb"):
            return self.family
        return f"{self.family}{self.index}"


@lru_cache(maxsize=None)
def gen(family: str, index: int = 0) -> Generator:
    return Generator(family, index)


XBAR = gen("xb")
YBAR = gen("yb")


@dataclass(frozen=True, slots=True)
class Word:
    """A composable chain of generators, or an identity of one color."""

    factors: tuple[Generator, ...]
    id_color: str | None = None

    def __post_init__(self) -> None:
        if self.factors and self.id_color is not None:
            raise ValueError("a word is either factors or an identity, not both")
        if not self.factors:
            if self.id_color not in ("B", "W"):
                raise ValueError("empty word needs an identity color B or W")
            return
        for i in range(len(self.factors) - 1):
            if self.factors[i].src != self.factors[i + 1].dst:
                raise ValueError(
                    f"word not composable at position {i}: "
                    f"{self.factors[i].token} after {self.factors[i + 1].token}"
                )

    @property
    def is_identity(self) -> bool:
        return not self.factors

    @property
    def src(self) -> str:
        return self.factors[-1].src if self.factors else self.id_color  # type: ignore[return-value]

    @property
    def dst(self) -> str:
        return self.factors[0].dst if self.factors else self.id_color  # type: ignore[return-value]

    @property
    def degree(self) -> int:
        return sum(z.degree for z in self.factors)

    @property
    def fweight(self) -> int:
        return sum(z.fweight for z in self.factors)

    def sort_key(self):
        return (
            self.fweight,
            1 if self.is_identity else 0,
            tuple((z.index, _FAMILY_RANK[z.family]) for z in self.factors),
            self.id_color or "",
        )

    def render(self) -> str:
        if self.is_identity:
            return f"1{self.id_color}"
        return " ".join(z.token for z in self.factors)


def word(*factors: Generator) -> Word:
    return Word(tuple(factors))


def id_word(color: str) -> Word:
    return Word((), color)


def word_mul(a: Word, b: Word) -> Word | None:
    """a o b, or None when the colors do not match (path-algebra zero)."""
    if a.is_identity:
        return b if b.dst == a.id_color else None
    if b.is_identity:
        return a if a.src == b.id_color else None
    if a.src != b.dst:
        return None
    return Word(a.factors + b.factors)


@dataclass(frozen=True, slots=True)
class OperadElement:
    """Finite Z-linear combination of words of one ambient, canonical form."""

    ambient: str
    terms: tuple[tuple[Word, int], ...]

    def __add__(self, other: "OperadElement") -> "OperadElement":
        _same_ambient(self, other)
        acc = dict(self.terms)
        for w, c in other.terms:
            acc[w] = acc.get(w, 0) + c
        return element(self.ambient, acc)

    def __sub__(self, other: "OperadElement") -> "OperadElement":
        return self + (-other)

    def __neg__(self) -> "OperadElement":
        return OperadElement(self.ambient, tuple((w, -c) for w, c in self.terms))

    def scale(self, k: int) -> "OperadElement":
        if k == 0:
            return OperadElement(self.ambient, ())
        return OperadElement(self.ambient, tuple((w, k * c) for w, c in self.terms))

    def __mul__(self, other: "OperadElement") -> "OperadElement":
        return multiply(self, other)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, w: Word) -> int:
        for ww, c in self.terms:
            if ww == w:
                return c
        return 0


def _same_ambient(a: OperadElement, b: OperadElement) -> None:
    if a.ambient != b.ambient:
        raise ValueError(f"ambient mismatch: {a.ambient} vs {b.ambient}")


def _check_word_ambient(ambient: str, w: Word) -> None:
    fams = _AMBIENT_FAMILIES[ambient]
    cap = _AMBIENT_INDEX_CAP[ambient]
    for z in w.factors:
        if z.family not in fams:
            raise ValueError(f"generator {z.token} not available in ambient {ambient}")
        if cap is not None and z.family in ("f", "g", "fb", "gb") and z.index > cap:
            raise ValueError(f"generator {z.token} exceeds index cap of ambient {ambient}")


def element(ambient: str, terms) -> OperadElement:
    """Canonical element from a {word: coefficient} mapping or pair iterable."""
    if ambient not in _AMBIENT_FAMILIES:
        raise ValueError(f"unknown ambient {ambient!r}")
    acc: dict[Word, int] = {}
    items = terms.items() if isinstance(terms, dict) else terms
    for w, c in items:
        if type(c) is not int:
            raise TypeError(f"coefficient {c!r} is not an int")
        if c:
            acc[w] = acc.get(w, 0) + c
    kept = [(w, c) for w, c in acc.items() if c]
    for w, _ in kept:
        _check_word_ambient(ambient, w)
    kept.sort(key=lambda wc: wc[0].sort_key())
    return OperadElement(ambient, tuple(kept))


def zero(ambient: str) -> OperadElement:
    return element(ambient, {})


def single(ambient: str, w: Word, c: int = 1) -> OperadElement:
    return element(ambient, {w: c})


def multiply(a: OperadElement, b: OperadElement, max_fweight: int | None = None) -> OperadElement:
    """Bilinear composition product; non-composable word pairs contribute 0.

    With ``max_fweight`` set, product words above that band are dropped;
    since fweight is additive this commutes with band truncation.
    """
    _same_ambient(a, b)
    acc: dict[Word, int] = {}
    for wa, ca in a.terms:
        for wb, cb in b.terms:
            w = word_mul(wa, wb)
            if w is None:
                continue
            if max_fweight is not None and w.fweight > max_fweight:
                continue
            acc[w] = acc.get(w, 0) + ca * cb
    return element(a.ambient, acc)


def truncate_fweight(e: OperadElement, max_fweight: int) -> OperadElement:
    return element(e.ambient, {w: c for w, c in e.terms if w.fweight <= max_fweight})


def hom_colors(e: OperadElement) -> tuple[str, str]:
    """The common (src, dst) of every term; mixed colors are an error."""
    if e.is_zero():
        raise ValueError("zero element has no hom-set")
    pairs = {(w.src, w.dst) for w, _ in e.terms}
    if len(pairs) != 1:
        raise ValueError(f"element is not color-homogeneous: {sorted(pairs)}")
    return pairs.pop()


def degree_of(e: OperadElement) -> int:
    degs = {w.degree for w, _ in e.terms}
    if len(degs) != 1:
        raise ValueError("element is not degree-homogeneous")
    return degs.pop()


def degree_component(e: OperadElement, n: int) -> OperadElement:
    return element(e.ambient, {w: c for w, c in e.terms if w.degree == n})


@dataclass(frozen=True, slots=True)
class TruncationCaps:
    """Finite window onto the completed operads.

    ``max_fweight`` truncates series (kernels, retraction values);
    ``max_index``, ``max_length`` and ``max_degree`` bound word enumeration
    (boundary search, identity-suite sweeps).  Internal computations may
    use generators above ``max_index`` when an identity forces them.
    """

    max_index: int = 4
    max_length: int = 5
    max_fweight: int = 3
    max_degree: int = 8

    def __post_init__(self) -> None:
        for name in ("max_index", "max_length", "max_fweight", "max_degree"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


def parse_caps(text: str) -> TruncationCaps:
    """Parse "index,length,fweight,degree", e.g. "4,5,3,8"."""
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError("caps must be four comma-separated integers: index,length,fweight,degree")
    idx, length, fw, deg = (int(p.strip()) for p in parts)
    return TruncationCaps(idx, length, fw, deg)


def default_caps() -> TruncationCaps:
    """Shipped defaults, overridable via the PERTLAB_CAPS environment variable."""
    text = os.environ.get("PERTLAB_CAPS")
    if text:
        return parse_caps(text)
    return TruncationCaps()


# ---------------------------------------------------------------------------
# Differentials


def _mixed_pairs():
    # all ways to bar at least one of the two factors
    return ((0, 1), (1, 0), (1, 1))


def _fam(base: str, barred: int) -> str:
    return base + "b" if barred else base


@lru_cache(maxsize=None)
def _generator_diff(z: Generator) -> tuple[tuple[Word, int], ...]:
    """The differential of one generator, as (word, coefficient) pairs."""
    fam, n = z.family, z.index
    out: list[tuple[Word, int]] = []
    if fam == "xb":
        return ((word(XBAR, XBAR), -1),)
    if fam == "yb":
        return ((word(YBAR, YBAR), -1),)
    if fam == "f":
        if n == 0:
            return ()
        if n == 1:
            return ((word(gen("g", 0), gen("f", 0)), 1), (id_word("B"), -1))
        if n % 2 == 0:
            m = n // 2
            for i in range(m):
                out.append((word(gen("f", 2 * i), gen("f", 2 * (m - i) - 1)), 1))
                out.append((word(gen("g", 2 * (m - i) - 1), gen("f", 2 * i)), -1))
        else:
            m = (n - 1) // 2
            for j in range(m + 1):
                out.append((word(gen("g", 2 * j), gen("f", 2 * (m - j))), 1))
            for j in range(m):
                out.append((word(gen("f", 2 * j + 1), gen("f", 2 * (m - j) - 1)), -1))
        return tuple(out)
    if fam == "g":
        if n == 0:
            return ()
        if n == 1:
            return ((word(gen("f", 0), gen("g", 0)), 1), (id_word("W"), -1))
        if n % 2 == 0:
            m = n // 2
            for i in range(m):
                out.append((word(gen("g", 2 * i), gen("g", 2 * (m - i) - 1)), 1))
                out.append((word(gen("f", 2 * (m - i) - 1), gen("g", 2 * i)), -1))
        else:
            m = (n - 1) // 2
            for j in range(m + 1):
                out.append((word(gen("f", 2 * j), gen("g", 2 * (m - j))), 1))
            for j in range(m):
                out.append((word(gen("g", 2 * j + 1), gen("g", 2 * (m - j) - 1)), -1))
        return tuple(out)
    if fam == "fb":
        if n % 2 == 0:
            m = n // 2
            out = [
                (word(gen("f", n), XBAR), 1),
                (word(YBAR, gen("f", n)), -1),
                (word(gen("fb", n), XBAR), 1),
                (word(YBAR, gen("fb", n)), -1),
            ]
            for t, r in _mixed_pairs():
                for i in range(m):
                    out.append((word(gen(_fam("f", t), 2 * i), gen(_fam("f", r), 2 * (m - i) - 1)), 1))
                    out.append((word(gen(_fam("g", t), 2 * (m - i) - 1), gen(_fam("f", r), 2 * i)), -1))
        else:
            m = (n - 1) // 2
            out = [
                (word(gen("f", n), XBAR), -1),
                (word(XBAR, gen("f", n)), -1),
                (word(gen("fb", n), XBAR), -1),
                (word(XBAR, gen("fb", n)), -1),
            ]
            for t, r in _mixed_pairs():
                for j in range(m + 1):
                    out.append((word(gen(_fam("g", t), 2 * j), gen(_fam("f", r), 2 * (m - j))), 1))
                for j in range(m):
                    out.append((word(gen(_fam("f", t), 2 * j + 1), gen(_fam("f", r), 2 * (m - j) - 1)), -1))
        return tuple(out)
    # fam == "gb"
    if n % 2 == 0:
        m = n // 2
        out = [
            (word(gen("g", n), YBAR), 1),
            (word(XBAR, gen("g", n)), -1),
            (word(gen("gb", n), YBAR), 1),
            (word(XBAR, gen("gb", n)), -1),
        ]
        for t, r in _mixed_pairs():
            for i in range(m):
                out.append((word(gen(_fam("g", t), 2 * i), gen(_fam("g", r), 2 * (m - i) - 1)), 1))
                out.append((word(gen(_fam("f", t), 2 * (m - i) - 1), gen(_fam("g", r), 2 * i)), -1))
    else:
        m = (n - 1) // 2
        out = [
            (word(gen("g", n), YBAR), -1),
            (word(YBAR, gen("g", n)), -1),
            (word(gen("gb", n), YBAR), -1),
            (word(YBAR, gen("gb", n)), -1),
        ]
        for t, r in _mixed_pairs():
            for j in range(m + 1):
                out.append((word(gen(_fam("f", t), 2 * j), gen(_fam("g", r), 2 * (m - j))), 1))
            for j in range(m):
                out.append((word(gen(_fam("g", t), 2 * j + 1), gen(_fam("g", r), 2 * (m - j) - 1)), -1))
    return tuple(out)


def _identity_free(table):
    def stripped(z: Generator):
        return tuple((w, c) for w, c in table(z) if not w.is_identity)
    return stripped


def _length_drop_table(z: Generator):
    if z.family == "f" and z.index == 1:
        return ((id_word("B"), -1),)
    if z.family == "g" and z.index == 1:
        return ((id_word("W"), -1),)
    return ()


def diff(e: OperadElement, *, _table=None) -> OperadElement:
    """Derivation extension of the generator differential tables.

    The Koszul sign for replacing the i-th factor is (-1) to the total
    degree of the factors to its left.
    """
    table = _table or _generator_diff
    acc: dict[Word, int] = {}
    for w, c in e.terms:
        if w.is_identity:
            continue
        factors = w.factors
        prefix_degree = 0
        for i, z in enumerate(factors):
            sign = -1 if prefix_degree % 2 else 1
            for wz, cz in table(z):
                new_factors = factors[:i] + wz.factors + factors[i + 1:]
                if new_factors:
                    nw = Word(new_factors)
                else:
                    nw = id_word(wz.id_color)  # type: ignore[arg-type]
                acc[nw] = acc.get(nw, 0) + sign * c * cz
            prefix_degree += z.degree
    return element(e.ambient, acc)


def split_homogeneity(e: OperadElement) -> tuple[OperadElement, OperadElement]:
    """The differential split by word-length effect: (shortening, lengthening).

    Only the identity terms of d(f1) and d(g1) shorten words; everything
    else lengthens.  The two parts sum to diff(e).
    """
    if e.ambient != "riso":
        raise ValueError("homogeneity split is defined on the plain ambient only")
    minus = diff(e, _table=_length_drop_table)
    plus = diff(e, _table=_identity_free(_generator_diff))
    return minus, plus


def theta(e: OperadElement) -> OperadElement:
    """Contracting homotopy: rewrite the two leading factors, no sign.

    Words of length < 2 map to 0.  The leading-pair table:
    f0 f_odd -> f_next, g0 g_odd -> g_next, f0 g_even -> g_next,
    g0 f_even -> f_next; any other leading pair kills the word.
    """
    if e.ambient != "riso":
        raise ValueError("the contracting homotopy is defined on the plain ambient only")
    acc: dict[Word, int] = {}
    for w, c in e.terms:
        if w.is_identity or len(w.factors) < 2:
            continue
        z1, z2 = w.factors[0], w.factors[1]
        if z1.index != 0 or z1.family not in ("f", "g"):
            continue
        rep: Generator | None = None
        if z1.family == "f" and z2.family == "f" and z2.index % 2 == 1:
            rep = gen("f", z2.index + 1)
        elif z1.family == "g" and z2.family == "g" and z2.index % 2 == 1:
            rep = gen("g", z2.index + 1)
        elif z1.family == "f" and z2.family == "g" and z2.index % 2 == 0:
            rep = gen("g", z2.index + 1)
        elif z1.family == "g" and z2.family == "f" and z2.index % 2 == 0:
            rep = gen("f", z2.index + 1)
        if rep is None:
            continue
        nw = Word((rep,) + w.factors[2:])
        acc[nw] = acc.get(nw, 0) + c
    return element("riso", acc)


# ---------------------------------------------------------------------------
# Kernels, inclusion, retraction


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _kernel_terms(r: int, max_fweight: int) -> tuple[Word, ...]:
    s = (r + 1) // 2
    words: list[Word] = []
    for t in range(0, max_fweight):
        for comp in _compositions(s, t):
            factors = [XBAR]
            for m in comp:
                factors.append(gen("f", 2 * m + 1))
                factors.append(XBAR)
            words.append(Word(tuple(factors)))
    return tuple(words)


def kernel_Z(r: int, caps: TruncationCaps) -> OperadElement:
    """The degree-r kernel series, truncated to the fweight band.

    Terms are alternating chains xb f_odd xb ... xb whose f-indices sum to
    the right degree; a term with t interior factors has fweight t + 1.
    The generator indices are dictated by r (up to r + 2), never capped:
    capping them would break the kernel's defining identity.
    """
    if r < -1 or r % 2 == 0:
        raise ValueError("kernel degree must be an odd integer >= -1")
    return element("dif_riso", {w: 1 for w in _kernel_terms(r, caps.max_fweight)})


def iota(e: OperadElement) -> OperadElement:
    """Inclusion of the unbarred ambient into the barred one."""
    if e.ambient != "dif_riso":
        raise ValueError("inclusion is defined on the dif_riso ambient")
    return element("riso_tilde", dict(e.terms))


@lru_cache(maxsize=None)
def retraction_terms(z: Generator) -> tuple[tuple[Generator, int, Generator], ...]:
    """Symbolic retraction value of one barred generator.

    Each triple (left, r, right) stands for left * kernel(r) * right; the
    value of the retraction is the sum over the listed triples.  Base
    generators and xb are fixed by the retraction and not listed here.
    """
    fam, n = z.family, z.index
    triples: list[tuple[Generator, int, Generator]] = []
    if fam == "yb":
        triples = [(gen("f", 0), -1, gen("g", 0))]
    elif fam == "fb":
        if n % 2 == 0:
            m = n // 2
            for a, b, c in _compositions(m, 3):
                triples.append((gen("f", 2 * a), 2 * b - 1, gen("f", 2 * c + 1)))
        else:
            m = (n - 1) // 2
            for a, b, c in _compositions(m, 3):
                triples.append((gen("f", 2 * a + 1), 2 * b - 1, gen("f", 2 * c + 1)))
    elif fam == "gb":
        if n % 2 == 0:
            m = n // 2
            for a, b, c in _compositions(m, 3):
                triples.append((gen("f", 2 * a + 1), 2 * b - 1, gen("g", 2 * c)))
        else:
            m = (n - 1) // 2
            for a, b, c in _compositions(m + 1, 3):
                triples.append((gen("f", 2 * a), 2 * b - 1, gen("g", 2 * c)))
    else:
        raise ValueError(f"retraction of {z.token} is the generator itself; no kernel terms")
    triples.sort(key=lambda t: (t[1], t[0].index, t[2].index))
    return tuple(triples)


def _retraction_of_generator(z: Generator, caps: TruncationCaps) -> OperadElement:
    if z.family in ("f", "g", "xb"):
        return single("dif_riso", word(z))
    acc = zero("dif_riso")
    for left, r, right in retraction_terms(z):
        part = multiply(single("dif_riso", word(left)), kernel_Z(r, caps), caps.max_fweight)
        part = multiply(part, single("dif_riso", word(right)), caps.max_fweight)
        acc = acc + part
    return acc


def retraction_r(e: OperadElement, caps: TruncationCaps) -> OperadElement:
    """The retraction onto the unbarred ambient, band-exact to max_fweight.

    Multiplicative on words; fixes f's, g's and xb; sends each barred
    generator to its kernel-series value (see ``retraction_terms``).
    """
    if e.ambient != "riso_tilde":
        raise ValueError("the retraction is defined on the riso_tilde ambient")
    out = zero("dif_riso")
    for w, c in e.terms:
        if w.is_identity:
            img = single("dif_riso", w)
        else:
            img = _retraction_of_generator(w.factors[0], caps)
            for z in w.factors[1:]:
                img = multiply(img, _retraction_of_generator(z, caps), caps.max_fweight)
        out = out + img.scale(c)
    return out


# ---------------------------------------------------------------------------
# Evaluation into the isomorphism quotient


@dataclass(frozen=True, slots=True)
class AlphaValue:
    """Normal form in the quotient where fg and gf are identities.

    Each hom-set there is free of rank one; ``basis`` names its basis
    element (1B, 1W, f, or g) and ``coefficient`` the integer multiple.
    """

    coefficient: int
    basis: str | None

    def __str__(self) -> str:
        if self.coefficient == 0:
            return "0"
        if self.coefficient == 1:
            return self.basis or "0"
        return f"{self.coefficient} {self.basis}"


_ALPHA_BASIS = {("B", "B"): "1B", ("W", "W"): "1W", ("B", "W"): "f", ("W", "B"): "g"}


def alpha_iso_eval(e: OperadElement) -> AlphaValue:
    """Image in the isomorphism quotient: index >= 1 factors die, index-0
    words collapse to the basis element of their hom-set."""
    if e.ambient not in ("riso", "rfake"):
        raise ValueError("alpha evaluation is defined on the plain ambients")
    if e.is_zero():
        return AlphaValue(0, None)
    src, dst = hom_colors(e)
    total = 0
    for w, c in e.terms:
        if all(z.index == 0 for z in w.factors):
            total += c
    return AlphaValue(total, _ALPHA_BASIS[(src, dst)])


# ---------------------------------------------------------------------------
# Bounded boundary search


def _ambient_generators(ambient: str, max_index: int) -> list[Generator]:
    fams = _AMBIENT_FAMILIES[ambient]
    cap = _AMBIENT_INDEX_CAP[ambient]
    top = max_index if cap is None else min(max_index, cap)
    out: list[Generator] = []
    for fam in ("f", "g", "fb", "gb"):
        if fam in fams:
            out.extend(gen(fam, n) for n in range(top + 1))
    if "xb" in fams:
        out.append(XBAR)
    if "yb" in fams:
        out.append(YBAR)
    return out


def enumerate_words(
    ambient: str, src: str, dst: str, caps: TruncationCaps,
    degree: int | None = None, include_identity: bool = True,
) -> list[Word]:
    """All composable words of the ambient within caps, rightmost-first
    construction; optionally filtered to one degree."""
    gens = _ambient_generators(ambient, caps.max_index)
    found: list[Word] = []
    if include_identity and src == dst and (degree is None or degree == 0):
        found.append(id_word(src))

    def grow(rev: list[Generator], fweight: int) -> None:
        head_dst = rev[-1].dst
        if head_dst == dst:
            w = Word(tuple(reversed(rev)))
            if (degree is None or w.degree == degree) and abs(w.degree) <= caps.max_degree:
                found.append(w)
        if len(rev) == caps.max_length:
            return
        for z in gens:
            if z.src == head_dst and fweight + z.fweight <= caps.max_fweight:
                rev.append(z)
                grow(rev, fweight + z.fweight)
                rev.pop()

    for z in gens:
        if z.src == src and z.fweight <= caps.max_fweight:
            grow([z], z.fweight)
    found.sort(key=lambda w: w.sort_key())
    return found


def bounded_boundary_search(
    c: OperadElement, caps: TruncationCaps, *, modulo_fweight: int | None = None,
) -> OperadElement | None:
    """Preimage y with d(y) = c within the caps window, or None.

    None is a bounded certificate ("no preimage among words within caps"),
    not a proof of non-existence.  With ``modulo_fweight`` set, both the
    cycle condition and the equation are taken in the quotient that
    discards words of higher fweight.
    """

    def cut(e: OperadElement) -> OperadElement:
        return e if modulo_fweight is None else truncate_fweight(e, modulo_fweight)

    c = cut(c)
    if c.is_zero():
        return zero(c.ambient)
    if not cut(diff(c)).is_zero():
        raise ValueError("target is not a cycle (its differential does not vanish)")
    src, dst = hom_colors(c)
    target_degree = degree_of(c) + 1
    candidates = enumerate_words(c.ambient, src, dst, caps, degree=target_degree)
    images = [cut(diff(single(c.ambient, w))) for w in candidates]
    row_words: list[Word] = sorted(
        {w for img in images for w, _ in img.terms} | {w for w, _ in c.terms},
        key=lambda w: w.sort_key(),
    )
    pos = {w: i for i, w in enumerate(row_words)}
    flat = [0] * (len(row_words) * len(candidates))
    for j, img in enumerate(images):
        for w, coeff in img.terms:
            flat[pos[w] * len(candidates) + j] = coeff
    a = IntMatrix(len(row_words), len(candidates), tuple(flat))
    b = tuple(c.coefficient(w) for w in row_words)
    x = solve_integer(a, b)
    if x is None:
        return None
    return element(c.ambient, {w: coeff for w, coeff in zip(candidates, x)})


# ---------------------------------------------------------------------------
# Rendering and parsing


def render_element(e: OperadElement) -> str:
    if e.is_zero():
        return "0"
    parts: list[str] = []
    for i, (w, c) in enumerate(e.terms):
        mag = abs(c)
        body = w.render() if mag == 1 else f"{mag} {w.render()}"
        if i == 0:
            parts.append(body if c > 0 else f"- {body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)


_TOKEN_RE = re.compile(r"^(fb|gb|f|g)([0-9]+)$")


def _parse_token(tok: str) -> Generator | Word:
    if tok == "xb":
        return XBAR
    if tok == "yb":
        return YBAR
    if tok in ("1B", "1W"):
        return id_word(tok[1])
    m = _TOKEN_RE.match(tok)
    if not m:
        raise ValueError(f"unrecognized token {tok!r}")
    return gen(m.group(1), int(m.group(2)))


def parse_element(text: str, ambient: str) -> OperadElement:
    """Inverse of render_element; whitespace-separated tokens with + and -."""
    text = text.strip()
    if text == "0" or not text:
        return zero(ambient)
    tokens = text.split()
    acc: dict[Word, int] = {}
    i = 0
    sign = 1
    first = True
    while i < len(tokens):
        if tokens[i] in ("+", "-"):
            sign = 1 if tokens[i] == "+" else -1
            i += 1
        elif not first:
            raise ValueError(f"expected + or - before term at token {i}")
        coeff = 1
        if tokens[i].isdigit():
            coeff = int(tokens[i])
            i += 1
        factors: list[Generator] = []
        identity: Word | None = None
        while i < len(tokens) and tokens[i] not in ("+", "-"):
            got = _parse_token(tokens[i])
            if isinstance(got, Word):
                identity = got
            else:
                factors.append(got)
            i += 1
        if identity is not None:
            if factors:
                raise ValueError("identity token inside a factor word")
            w = identity
        elif factors:
            w = Word(tuple(factors))
        else:
            raise ValueError("empty term")
        acc[w] = acc.get(w, 0) + sign * coeff
        sign = 1
        first = False
    return element(ambient, acc)


def render_retraction_line(z: Generator) -> str:
    """Kernel-symbol form of a barred generator's retraction value."""
    triples = retraction_terms(z)
    body = " + ".join(f"{l.token} Z{r} {rt.token}" for l, r, rt in triples)
    return f"r({z.token}) = {body}"


def generator_element(z: Generator) -> OperadElement:
    ambient = "riso" if z.family in ("f", "g") else "riso_tilde"
    return single(ambient, word(z))


def render_generator_diff(z: Generator) -> str:
    return f"d {z.token} = " + render_element(diff(generator_element(z)))


# ---------------------------------------------------------------------------
# Identity suite


@dataclass(frozen=True, slots=True)
class IdentityCheck:
    name: str
    passed: bool
    detail: str


def _gf_component(degree: int) -> OperadElement:
    acc: dict[Word, int] = {}
    for a in range(0, degree + 1, 2):
        acc[word(gen("g", a), gen("f", degree - a))] = 1
    return element("riso", acc)


def _hh_component(degree: int) -> OperadElement:
    acc: dict[Word, int] = {}
    for a in range(1, degree, 2):
        acc[word(gen("f", a), gen("f", degree - a))] = 1
    return element("riso", acc)


def _fg_component(degree: int) -> OperadElement:
    acc: dict[Word, int] = {}
    for a in range(0, degree + 1, 2):
        acc[word(gen("f", a), gen("g", degree - a))] = 1
    return element("riso", acc)


def _ll_component(degree: int) -> OperadElement:
    acc: dict[Word, int] = {}
    for a in range(1, degree, 2):
        acc[word(gen("g", a), gen("g", degree - a))] = 1
    return element("riso", acc)


def _to_dif_riso(e: OperadElement) -> OperadElement:
    return element("dif_riso", dict(e.terms))


def verify_identity_suite(caps: TruncationCaps, *, _table=None) -> list[IdentityCheck]:
    """Symbolic verification of every closed identity the package relies on.

    Each check is exact on its stated window; see the individual blocks.
    The report lists one entry per identity family with the first failing
    case in ``detail``.
    """
    table = _table or _generator_diff
    d = lambda e: diff(e, _table=table)  # noqa: E731
    w_band = caps.max_fweight
    checks: list[IdentityCheck] = []

    def add(name: str, failures: list[str]) -> None:
        checks.append(IdentityCheck(name, not failures, failures[0] if failures else "ok"))

    # (a) d d = 0, plain generators
    fails: list[str] = []
    for fam in ("f", "g"):
        for n in range(caps.max_index + 1):
            e = single("riso", word(gen(fam, n)))
            if not d(d(e)).is_zero():
                fails.append(f"d d {gen(fam, n).token} != 0")
    add("square_zero_plain", fails)

    # (a') d d = 0, extended generators (exact: the tables are finite)
    fails = []
    for fam in ("f", "g", "fb", "gb"):
        for n in range(caps.max_index + 1):
            e = single("riso_tilde", word(gen(fam, n)))
            if not d(d(e)).is_zero():
                fails.append(f"d d {gen(fam, n).token} != 0")
    for z in (XBAR, YBAR):
        e = single("riso_tilde", word(z))
        if not d(d(e)).is_zero():
            fails.append(f"d d {z.token} != 0")
    add("square_zero_extended", fails)

    # (b) contracting homotopy on positive-degree plain words; enumerated one
    # shorter than the length cap because the homotopy passes through words
    # one longer
    fails = []
    theta_caps = TruncationCaps(
        caps.max_index, max(1, caps.max_length - 1), caps.max_fweight, caps.max_degree
    )
    for src in ("B", "W"):
        for dst in ("B", "W"):
            for w in enumerate_words("riso", src, dst, theta_caps, include_identity=False):
                if w.degree <= 0:
                    continue
                e = single("riso", w)
                _, dplus_e = split_homogeneity(e)
                _, dplus_te = split_homogeneity(theta(e))
                if theta(dplus_e) + dplus_te != e:
                    fails.append(f"homotopy identity fails on {w.render()}")
    add("contracting_homotopy", fails)

    # (c) retraction is a chain map, per fweight band
    fails = []
    tilde_gens = [gen(fam, n) for fam in ("f", "g", "fb", "gb") for n in range(caps.max_index + 1)]
    tilde_gens += [XBAR, YBAR]
    for z in tilde_gens:
        e = single("riso_tilde", word(z))
        lhs = truncate_fweight(diff(retraction_r(e, caps)), w_band)
        rhs = truncate_fweight(retraction_r(d(e), caps), w_band)
        if lhs != rhs:
            fails.append(f"r d != d r on {z.token}")
    add("retraction_chain_map", fails)

    # (c') retraction splits the inclusion
    fails = []
    for src in ("B", "W"):
        for dst in ("B", "W"):
            for w in enumerate_words("dif_riso", src, dst, caps):
                e = single("dif_riso", w)
                if retraction_r(iota(e), caps) != e:
                    fails.append(f"r(iota({w.render()})) != {w.render()}")
                    break
    add("retraction_splits_inclusion", fails)

    # (d) compact differential of the odd squares
    fails = []
    for k in range(0, (caps.max_index + 1) // 2 + 1):
        deg = 2 * k
        if d(_hh_component(deg)) != d(_gf_component(deg)):
            fails.append(f"d(hh) != d(gf) in degree {deg}")
        if d(_ll_component(deg)) != d(_fg_component(deg)):
            fails.append(f"d(ll) != d(fg) in degree {deg}")
    add("compact_square", fails)

    # (e) kernel differential, per degree and band
    fails = []
    for r in (-1, 1, 3):
        lhs = truncate_fweight(d(kernel_Z(r, caps)), w_band)
        rhs = zero("dif_riso")
        for r1 in range(-1, r + 1, 2):
            for r2 in range(-1, r - 1 - r1 + 1, 2):
                mid_deg = r - 1 - r1 - r2
                if mid_deg < 0:
                    continue
                mid = _to_dif_riso(_gf_component(mid_deg) - _hh_component(mid_deg))
                part = multiply(kernel_Z(r1, caps), mid, w_band)
                part = multiply(part, kernel_Z(r2, caps), w_band)
                rhs = rhs + part
        if lhs != -truncate_fweight(rhs, w_band):
            fails.append(f"kernel differential identity fails at degree {r}")
    add("kernel_differential", fails)

    # (e') kernel absorption: xb + kernel . f_odd . xb = kernel, per degree
    fails = []
    xb_elt = single("dif_riso", word(XBAR))
    for r in (-1, 1, 3):
        lhs = zero("dif_riso")
        if r == -1:
            lhs = lhs + xb_elt
        a = 0
        while r - 2 * a >= -1:
            part = multiply(kernel_Z(r - 2 * a, caps), single("dif_riso", word(gen("f", 2 * a + 1))), w_band)
            part = multiply(part, xb_elt, w_band)
            lhs = lhs + part
            a += 1
        if truncate_fweight(lhs, w_band) != truncate_fweight(kernel_Z(r, caps), w_band):
            fails.append(f"kernel absorption identity fails at degree {r}")
    add("kernel_absorption", fails)

    # (f) chain-level transfer witnesses, even and odd
    fails = []
    f0 = single("riso", word(gen("f", 0)))
    g0 = single("riso", word(gen("g", 0)))
    for m in range(1, caps.max_index // 2 + 1):
        lhs = multiply(g0, d(single("riso", word(gen("f", 2 * m))))) + multiply(
            d(single("riso", word(gen("g", 2 * m)))), f0
        )
        witness: dict[Word, int] = {}
        for j in range(m):
            witness[word(gen("f", 2 * j + 1), gen("f", 2 * (m - j) - 1))] = (
                witness.get(word(gen("f", 2 * j + 1), gen("f", 2 * (m - j) - 1)), 0) + 1
            )
        for j in range(1, m):
            witness[word(gen("g", 2 * j), gen("f", 2 * (m - j)))] = (
                witness.get(word(gen("g", 2 * j), gen("f", 2 * (m - j))), 0) - 1
            )
        if lhs != d(element("riso", witness)):
            fails.append(f"even transfer witness fails at index {2 * m}")
    add("chain_level_transfer_even", fails)

    fails = []
    for m in range(1, (caps.max_index - 1) // 2 + 1):
        lhs = multiply(f0, d(single("riso", word(gen("f", 2 * m + 1))))) - multiply(
            d(single("riso", word(gen("g", 2 * m + 1)))), f0
        )
        witness = {}
        for i in range(1, m + 1):
            w1 = word(gen("g", 2 * (m - i) + 1), gen("f", 2 * i))
            w2 = word(gen("f", 2 * i), gen("f", 2 * (m - i) + 1))
            witness[w1] = witness.get(w1, 0) + 1
            witness[w2] = witness.get(w2, 0) - 1
        if lhs != d(element("riso", witness)):
            fails.append(f"odd transfer witness fails at index {2 * m + 1}")
    add("chain_level_transfer_odd", fails)

    return checks


def all_passed(report: list[IdentityCheck]) -> bool:
    return all(c.passed for c in report)

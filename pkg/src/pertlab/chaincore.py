"""Filtered chain complexes of finitely generated free Z-modules.

Grading is homological: the differential has degree -1, homotopies have
degree +1.  Each basis element carries a filtration weight w >= 0; the
submodule spanned by basis elements of weight >= p is the p-th filtration
stage, and a complex stores the finite length ``max_weight`` past which the
filtration is zero.  A graded map f has ``filtration_shift(f) = q`` when it
moves every stage p into stage p + q; the shift of a composite is at least
the sum of the shifts, and a map of shift >= 1 composed with itself more
than ``max_weight`` times vanishes, which is what makes all the series in
this package finite sums.

Sign convention, fixed once for the whole package: the differential on the
complex of graded maps f: M -> N of degree k is

    D(f) = d_N o f - (-1)^k f o d_M.

Consequences used everywhere downstream (and asserted by the test suite):
a degree-0 chain map satisfies D(f) = 0; a degree-1 homotopy h between
chain maps p and q satisfies D(h) = p - q written as d h + h d = p - q;
D o D = 0.  No other sign convention appears anywhere else; modules above
this one speak only in terms of D.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactlin import IntMatrix


@dataclass(frozen=True, slots=True)
class ChainComplex:
    """A bounded complex with per-basis filtration weights.

    ``ranks[t]`` is the rank in degree ``degree_lo + t``; ``weights[t]`` the
    weights of that degree's basis; ``diffs[t]`` the matrix of the
    differential out of degree ``degree_lo + t + 1`` (shape
    ranks[t] x ranks[t+1]).  Degrees outside the window have rank zero.
    """

    degree_lo: int
    degree_hi: int
    ranks: tuple[int, ...]
    weights: tuple[tuple[int, ...], ...]
    diffs: tuple[IntMatrix, ...]
    max_weight: int

    def __post_init__(self) -> None:
        width = self.degree_hi - self.degree_lo + 1
        if width < 1:
            raise ValueError("empty degree window")
        if len(self.ranks) != width or len(self.weights) != width:
            raise ValueError("ranks/weights do not span the degree window")
        if len(self.diffs) != width - 1:
            raise ValueError("need one differential block per adjacent degree pair")
        if self.max_weight < 0:
            raise ValueError("max_weight must be nonnegative")
        for t, r in enumerate(self.ranks):
            if r < 0:
                raise ValueError("negative rank")
            if len(self.weights[t]) != r:
                raise ValueError(f"weight list at degree {self.degree_lo + t} has wrong length")
        for t, m in enumerate(self.diffs):
            if (m.rows, m.cols) != (self.ranks[t], self.ranks[t + 1]):
                raise ValueError(f"differential block {t} has shape {m.rows}x{m.cols}")

    def degrees(self) -> range:
        return range(self.degree_lo, self.degree_hi + 1)

    def rank_at(self, n: int) -> int:
        if self.degree_lo <= n <= self.degree_hi:
            return self.ranks[n - self.degree_lo]
        return 0

    def weight_at(self, n: int, i: int) -> int:
        return self.weights[n - self.degree_lo][i]

    def d_block(self, n: int) -> IntMatrix:
        """Matrix of d out of degree n (shape rank(n-1) x rank(n))."""
        t = n - self.degree_lo
        if 1 <= t <= len(self.diffs):
            return self.diffs[t - 1]
        return IntMatrix.zeros(self.rank_at(n - 1), self.rank_at(n))

    def differential_map(self) -> "GradedMap":
        return GradedMap.from_blocks(self, self, -1, {n: self.d_block(n) for n in self.degrees()})

    def total_rank(self) -> int:
        return sum(self.ranks)


def complex_with_differential(c: ChainComplex, d: GradedMap) -> ChainComplex:
    """Same underlying graded filtered module, new differential."""
    if d.degree != -1 or d.source != c or d.target != c:
        raise ValueError("replacement differential must be a degree -1 self-map of the complex")
    diffs = tuple(d.block_at(n) for n in range(c.degree_lo + 1, c.degree_hi + 1))
    return ChainComplex(c.degree_lo, c.degree_hi, c.ranks, c.weights, diffs, c.max_weight)


def validate_complex(c: ChainComplex) -> list[str]:
    """Every violated invariant, with the first offending entry of each."""
    problems: list[str] = []
    for t, row in enumerate(c.weights):
        n = c.degree_lo + t
        for i, w in enumerate(row):
            if not (0 <= w <= c.max_weight):
                problems.append(f"weight out of range at degree {n}, index {i}: {w}")
    for n in range(c.degree_lo + 1, c.degree_hi + 1):
        m = c.d_block(n)
        for i in range(m.rows):
            for j in range(m.cols):
                if m.entry(i, j) and c.weight_at(n - 1, i) < c.weight_at(n, j):
                    problems.append(
                        f"filtration leak in d at degree {n}, entry ({i}, {j}): "
                        f"weight {c.weight_at(n, j)} -> {c.weight_at(n - 1, i)}"
                    )
                    break
            else:
                continue
            break
    for n in range(c.degree_lo + 2, c.degree_hi + 1):
        sq = c.d_block(n - 1) @ c.d_block(n)
        if not sq.is_zero():
            where = next(
                (i, j) for i in range(sq.rows) for j in range(sq.cols) if sq.entry(i, j)
            )
            problems.append(f"d^2 != 0 out of degree {n}, first entry {where}")
    return problems


@dataclass(frozen=True, slots=True)
class GradedMap:
    """A degree-homogeneous map between complexes, stored blockwise.

    ``blocks`` holds (source degree n, matrix) pairs, matrix shape
    target.rank(n + degree) x source.rank(n); all-zero and degenerate
    blocks are dropped, so structural equality is semantic equality.
    """

    source: ChainComplex
    target: ChainComplex
    degree: int
    blocks: tuple[tuple[int, IntMatrix], ...]

    @classmethod
    def from_blocks(
        cls,
        source: ChainComplex,
        target: ChainComplex,
        degree: int,
        blocks: dict[int, IntMatrix],
    ) -> "GradedMap":
        kept: list[tuple[int, IntMatrix]] = []
        for n in sorted(blocks):
            m = blocks[n]
            want = (target.rank_at(n + degree), source.rank_at(n))
            if (m.rows, m.cols) != want:
                raise ValueError(
                    f"block at degree {n} has shape {m.rows}x{m.cols}, expected {want[0]}x{want[1]}"
                )
            if m.rows and m.cols and not m.is_zero():
                kept.append((n, m))
        return cls(source, target, degree, tuple(kept))

    @classmethod
    def zero(cls, source: ChainComplex, target: ChainComplex, degree: int) -> "GradedMap":
        return cls(source, target, degree, ())

    @classmethod
    def identity(cls, c: ChainComplex) -> "GradedMap":
        return cls.from_blocks(c, c, 0, {n: IntMatrix.identity(c.rank_at(n)) for n in c.degrees()})

    def block_at(self, n: int) -> IntMatrix:
        for m, mat in self.blocks:
            if m == n:
                return mat
        return IntMatrix.zeros(self.target.rank_at(n + self.degree), self.source.rank_at(n))

    def is_zero(self) -> bool:
        return not self.blocks

    def __add__(self, other: "GradedMap") -> "GradedMap":
        _same_hom(self, other)
        degrees = {n for n, _ in self.blocks} | {n for n, _ in other.blocks}
        return GradedMap.from_blocks(
            self.source, self.target, self.degree,
            {n: self.block_at(n) + other.block_at(n) for n in degrees},
        )

    def __sub__(self, other: "GradedMap") -> "GradedMap":
        return self + (-other)

    def __neg__(self) -> "GradedMap":
        return GradedMap(self.source, self.target, self.degree, tuple((n, -m) for n, m in self.blocks))

    def scale(self, k: int) -> "GradedMap":
        if k == 0:
            return GradedMap.zero(self.source, self.target, self.degree)
        return GradedMap(self.source, self.target, self.degree, tuple((n, m.scale(k)) for n, m in self.blocks))


def _same_hom(f: GradedMap, g: GradedMap) -> None:
    if f.degree != g.degree or f.source != g.source or f.target != g.target:
        raise ValueError("maps live in different hom groups")


def compose(f: GradedMap, g: GradedMap) -> GradedMap:
    """f o g, defined when g lands where f starts."""
    if f.source != g.target:
        raise ValueError("composition mismatch: source of the left map differs from target of the right")
    blocks: dict[int, IntMatrix] = {}
    for n, gmat in g.blocks:
        fmat = f.block_at(n + g.degree)
        if fmat.rows and fmat.cols:
            blocks[n] = fmat @ gmat
    return GradedMap.from_blocks(g.source, f.target, f.degree + g.degree, blocks)


def filtration_shift(f: GradedMap) -> int:
    """Largest q with f(stage p) inside stage p+q for all p.

    The zero map reports one more than the filtration length, the neutral
    element for min.
    """
    best: int | None = None
    for n, mat in f.blocks:
        for i in range(mat.rows):
            for j in range(mat.cols):
                if mat.entry(i, j):
                    s = f.target.weight_at(n + f.degree, i) - f.source.weight_at(n, j)
                    if best is None or s < best:
                        best = s
    if best is None:
        return max(f.source.max_weight, f.target.max_weight) + 1
    return best


def is_perturbation(f: GradedMap, g: GradedMap) -> bool:
    """True when f - g strictly raises the filtration."""
    _same_hom(f, g)
    return filtration_shift(f - g) >= 1


def hom_differential(f: GradedMap) -> GradedMap:
    """D(f) = d o f - (-1)^deg(f) f o d; the package-wide convention."""
    left = compose(f.target.differential_map(), f)
    right = compose(f, f.source.differential_map())
    return left - right if f.degree % 2 == 0 else left + right


def is_chain_map(f: GradedMap) -> bool:
    return hom_differential(f).is_zero()


def hom_basis(m: ChainComplex, n: ChainComplex, k: int) -> tuple[tuple[int, int, int], ...]:
    """Basis of the degree-k maps m -> n: elementary matrices, enumerated
    lexicographically in (source degree, source index, target index)."""
    out: list[tuple[int, int, int]] = []
    for deg in m.degrees():
        r_src = m.rank_at(deg)
        r_tgt = n.rank_at(deg + k)
        for i in range(r_src):
            for j in range(r_tgt):
                out.append((deg, i, j))
    return tuple(out)


def map_to_vec(f: GradedMap, basis: tuple[tuple[int, int, int], ...]) -> tuple[int, ...]:
    return tuple(f.block_at(deg).entry(j, i) for deg, i, j in basis)


def vec_to_map(
    m: ChainComplex, n: ChainComplex, k: int,
    basis: tuple[tuple[int, int, int], ...], vec: tuple[int, ...],
) -> GradedMap:
    if len(vec) != len(basis):
        raise ValueError("vector length does not match basis size")
    blocks: dict[int, list[list[int]]] = {}
    for (deg, i, j), v in zip(basis, vec):
        if v:
            mat = blocks.setdefault(
                deg, [[0] * m.rank_at(deg) for _ in range(n.rank_at(deg + k))]
            )
            mat[j][i] = v
    return GradedMap.from_blocks(
        m, n, k, {deg: IntMatrix.from_rows(rows) for deg, rows in blocks.items()}
    )


@dataclass(frozen=True, slots=True)
class HomComplexSlice:
    """One degree of the hom complex between two fixed complexes.

    ``differential_matrix`` sends coordinates in ``basis`` (degree k) to
    coordinates in the degree k-1 basis of the same enumeration scheme.
    """

    source: ChainComplex
    target: ChainComplex
    hom_degree: int
    basis: tuple[tuple[int, int, int], ...]
    differential_matrix: IntMatrix


def hom_complex(m: ChainComplex, n: ChainComplex, k: int) -> HomComplexSlice:
    basis = hom_basis(m, n, k)
    lower = hom_basis(m, n, k - 1)
    cols: list[tuple[int, ...]] = []
    for deg, i, j in basis:
        e = _elementary(m, n, k, deg, i, j)
        cols.append(map_to_vec(hom_differential(e), lower))
    flat = tuple(cols[c][r] for r in range(len(lower)) for c in range(len(basis)))
    return HomComplexSlice(m, n, k, basis, IntMatrix(len(lower), len(basis), flat))


def _elementary(m: ChainComplex, n: ChainComplex, k: int, deg: int, i: int, j: int) -> GradedMap:
    rows = n.rank_at(deg + k)
    cols_ = m.rank_at(deg)
    flat = [0] * (rows * cols_)
    flat[j * cols_ + i] = 1
    return GradedMap.from_blocks(m, n, k, {deg: IntMatrix(rows, cols_, tuple(flat))})


def left_compose_matrix(
    u: GradedMap, m: ChainComplex, k: int,
    basis_in: tuple[tuple[int, int, int], ...],
    basis_out: tuple[tuple[int, int, int], ...],
) -> IntMatrix:
    """Matrix of f |-> u o f from Hom_k(m, source(u)) to Hom_{k+deg u}(m, target(u))."""
    pos = {b: r for r, b in enumerate(basis_out)}
    rows, cols = len(basis_out), len(basis_in)
    flat = [0] * (rows * cols)
    for c, (deg, i, j) in enumerate(basis_in):
        ub = u.block_at(deg + k)
        for j2 in range(ub.rows):
            v = ub.entry(j2, j)
            if v:
                flat[pos[(deg, i, j2)] * cols + c] = v
    return IntMatrix(rows, cols, tuple(flat))


def right_compose_matrix(
    u: GradedMap, n: ChainComplex, k: int,
    basis_in: tuple[tuple[int, int, int], ...],
    basis_out: tuple[tuple[int, int, int], ...],
) -> IntMatrix:
    """Matrix of f |-> f o u from Hom_k(target(u), n) to Hom_{k+deg u}(source(u), n)."""
    pos = {b: r for r, b in enumerate(basis_out)}
    rows, cols = len(basis_out), len(basis_in)
    flat = [0] * (rows * cols)
    du = u.degree
    for c, (deg, i, j) in enumerate(basis_in):
        ub = u.block_at(deg - du)
        for i2 in range(ub.cols):
            v = ub.entry(i, i2)
            if v:
                flat[pos[(deg - du, i2, j)] * cols + c] = v
    return IntMatrix(rows, cols, tuple(flat))

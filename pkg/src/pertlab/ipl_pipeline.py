"""Perturbation of homotopy-equivalence towers through the symbolic retraction.

The bridge between the two halves of the package: a tower of transfer data
(``SheData``) plus a filtration-raising perturbation of the big complex
defines an action of the operad with the extra degree -1 generator, and
pushing the barred generators through the retraction and then through the
action produces the perturbed tower.  Truncation is exact here: a word of
fweight k evaluates to a composite of filtration shift >= k, and every
map of shift above the filtration length is zero, so the finite band
max_fweight = filtration length computes the full series.  The module
still evaluates one band past the length and insists it vanishes, since
a cheap certificate beats an argument.

The transfer specialization at tower index 0 (``solve_pp``) repairs the
input homotopies first when their obstruction classes force it, extends
by one index, perturbs, and projects back down.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .chaincore import (
    ChainComplex,
    GradedMap,
    complex_with_differential,
    compose,
    filtration_shift,
    hom_differential,
)
from .operad_sym import (
    OperadElement,
    TruncationCaps,
    Generator,
    YBAR,
    diff,
    gen,
    retraction_r,
    single,
    truncate_fweight,
    word,
)
from .sdr_bpl import InternalConsistencyError, Perturbation, validate_perturbation
from .she_obstruction import (
    HeData,
    ObstructionError,
    SheData,
    extend_to_she,
    modify_homotopy_h,
    modify_homotopy_l,
    obstruction_cycles,
    trivial_extension,
    validate_he,
    validate_she,
)


@dataclass(frozen=True)
class OperadAction:
    """An assignment of graded maps to generators, checked to be an action.

    Color B is realized by ``M``, color W by ``N``; each assigned generator
    must get a map between the right complexes of the generator's degree,
    and the assignment must intertwine the symbolic differential with the
    hom differential: evaluate(d z) = D(assign[z]) for every assigned z.
    That one equation is simultaneously the chain-map conditions, the
    tower identities and, for the degree -1 generator, the requirement
    that the perturbed differential squares to zero.
    """

    M: ChainComplex
    N: ChainComplex
    assign: dict[Generator, GradedMap]
    domain: str = "dif_riso"

    def __post_init__(self) -> None:
        for z, f in self.assign.items():
            src = self.M if z.src == "B" else self.N
            tgt = self.M if z.dst == "B" else self.N
            if f.source != src or f.target != tgt:
                raise ValueError(f"assignment of {z.token} runs between the wrong complexes")
            if f.degree != z.degree:
                raise ValueError(f"assignment of {z.token} has degree {f.degree}, expected {z.degree}")
        for z, f in self.assign.items():
            dz = diff(single(self.domain, word(z)))
            want = hom_differential(f)
            got = evaluate(dz, self) if not dz.is_zero() else None
            if got is None:
                if not want.is_zero():
                    raise ValueError(f"assignment of {z.token} is not compatible: D of it should vanish")
            elif got != want:
                raise ValueError(f"assignment of {z.token} does not intertwine the differentials")

    def complex_of(self, color: str) -> ChainComplex:
        return self.M if color == "B" else self.N


def evaluate(e: OperadElement, act: OperadAction) -> GradedMap:
    """Z-linear evaluation: a word becomes the composite of its factor
    images (rightmost applied first), an identity word the identity map.

    The element must be color- and degree-homogeneous so the result lives
    in one hom group; unassigned generators are an error.
    """
    if e.is_zero():
        raise ValueError("cannot evaluate the zero element: its hom group is ambiguous")
    first = True
    total: GradedMap | None = None
    for w, c in e.terms:
        if w.is_identity:
            img = GradedMap.identity(act.complex_of(w.id_color))  # type: ignore[arg-type]
        else:
            img = None
            for z in reversed(w.factors):
                if z not in act.assign:
                    raise ValueError(f"generator {z.token} is not assigned in this action")
                img = act.assign[z] if img is None else compose(act.assign[z], img)
        part = img.scale(c)
        total = part if first else total + part
        first = False
    assert total is not None
    return total


def _evaluate_or_none(e: OperadElement, act: OperadAction) -> GradedMap | None:
    return None if e.is_zero() else evaluate(e, act)


def action_from_she(she: SheData, p: Perturbation) -> OperadAction:
    """The action realizing a tower and a perturbation of its big side."""
    problems = validate_she(she) + validate_perturbation(p)
    if p.base != she.M:
        problems.append("perturbation lives on a different complex than the tower")
    if problems:
        raise ValueError("; ".join(problems))
    assign: dict[Generator, GradedMap] = {gen("xb"): p.delta}
    for i, f in enumerate(she.F_even):
        assign[gen("f", 2 * i)] = f
    for j, h in enumerate(she.H_odd):
        assign[gen("f", 2 * j + 1)] = h
    for i, g in enumerate(she.G_even):
        assign[gen("g", 2 * i)] = g
    for j, l in enumerate(she.L_odd):
        assign[gen("g", 2 * j + 1)] = l
    return OperadAction(she.M, she.N, assign)


@dataclass(frozen=True)
class PerturbedShe:
    """Result of pushing a perturbation through a tower.

    ``she`` lives over the perturbed complexes and has index cap one less
    than the input's; ``d_n_tilde`` is the perturbed differential of the
    small side; ``provenance`` records the truncation window used."""

    d_n_tilde: GradedMap
    she: SheData
    provenance: TruncationCaps


def _band_evaluate(
    e: OperadElement, act: OperadAction, band: int, label: str
) -> GradedMap | None:
    """Evaluate the series band by band: the part within the filtration
    length is the value, the first band beyond it must evaluate to zero."""
    lo = truncate_fweight(e, band)
    hi = e - lo
    value = _evaluate_or_none(lo, act)
    leak = _evaluate_or_none(hi, act)
    if leak is not None and not leak.is_zero():
        raise InternalConsistencyError(
            f"truncation leak: the band past the filtration length contributes to {label}"
        )
    return value


def ipl_perturb(she: SheData, p: Perturbation, caps: TruncationCaps | None = None) -> PerturbedShe:
    """Perturb a tower of index cap m >= 1 into one of cap m - 1.

    The top input index is consumed: the output's highest odd component
    uses the input's even and odd components one index higher, which is
    why the cap drops by one and why cap-0 input is rejected.
    """
    if she.index_cap < 1:
        raise ValueError(
            "a tower of index cap 0 cannot absorb a perturbation; extend it to cap 1 first"
        )
    act = action_from_she(she, p)
    band = she.M.max_weight
    if caps is None:
        caps = TruncationCaps(
            max_index=2 * she.index_cap + 1,
            max_length=2 * (band + 1) + 3,
            max_fweight=band + 1,
            max_degree=2 * she.index_cap + 2,
        )
    if caps.max_fweight <= band:
        raise ValueError("caps insufficient: the fweight window must clear the filtration length")

    def series(z: Generator, label: str) -> GradedMap | None:
        return _band_evaluate(retraction_r(single("riso_tilde", word(z)), caps), act, band, label)

    d_n_corr = series(YBAR, "the perturbed differential")
    d_n = she.N.differential_map()
    d_n_tilde = d_n + d_n_corr if d_n_corr is not None else d_n
    m_tilde = complex_with_differential(she.M, she.M.differential_map() + p.delta)
    n_tilde = complex_with_differential(she.N, d_n_tilde)

    def rebase(f: GradedMap) -> GradedMap:
        src = m_tilde if f.source == she.M else n_tilde
        tgt = m_tilde if f.target == she.M else n_tilde
        return GradedMap.from_blocks(src, tgt, f.degree, {n: f.block_at(n) for n, _ in f.blocks})

    cap_out = she.index_cap - 1
    f_even: list[GradedMap] = []
    g_even: list[GradedMap] = []
    h_odd: list[GradedMap] = []
    l_odd: list[GradedMap] = []
    for i in range(cap_out + 1):
        corr = series(gen("fb", 2 * i), f"F correction {2 * i}")
        f_even.append(rebase(she.F_even[i] + corr if corr else she.F_even[i]))
        corr = series(gen("gb", 2 * i), f"G correction {2 * i}")
        g_even.append(rebase(she.G_even[i] + corr if corr else she.G_even[i]))
        corr = series(gen("fb", 2 * i + 1), f"H correction {2 * i + 1}")
        h_odd.append(rebase(she.H_odd[i] + corr if corr else she.H_odd[i]))
        corr = series(gen("gb", 2 * i + 1), f"L correction {2 * i + 1}")
        l_odd.append(rebase(she.L_odd[i] + corr if corr else she.L_odd[i]))
    out = SheData(
        m_tilde, n_tilde, cap_out,
        tuple(f_even), tuple(g_even), tuple(h_odd), tuple(l_odd),
    )
    problems = validate_she(out)
    if problems:
        raise InternalConsistencyError(
            "perturbed tower fails its identities: " + "; ".join(problems)
        )
    return PerturbedShe(rebase(d_n_tilde), out, caps)


@dataclass(frozen=True)
class PpSolution:
    """Perturbed homotopy-equivalence quadruple plus its provenance.

    ``reference`` is the unperturbed quadruple actually perturbed (after
    any homotopy repair), so each component differs from its reference
    counterpart by a filtration-raising map; ``shifts`` reports those
    filtration shifts by component name."""

    d_n_tilde: GradedMap
    f_tilde: GradedMap
    g_tilde: GradedMap
    h_tilde: GradedMap
    l_tilde: GradedMap
    m_perturbed: ChainComplex
    n_perturbed: ChainComplex
    reference: HeData
    shifts: dict[str, int] = field(default_factory=dict)


_STRATEGIES = ("modify_h", "modify_l", "as_is")


def solve_pp(he: HeData, p: Perturbation, strategy: str = "modify_h") -> PpSolution:
    """Transfer a perturbation across a homotopy equivalence.

    The homotopies are repaired first under the modify strategies (always,
    so the output perturbs the repaired quadruple); under ``as_is`` the
    obstruction classes must already vanish, otherwise the one-step tower
    extension is impossible and the error says so.
    """
    if strategy not in _STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose one of {_STRATEGIES}")
    problems = validate_he(he)
    if problems:
        raise ValueError("; ".join(problems))
    if strategy == "modify_h":
        he2 = modify_homotopy_h(he)
    elif strategy == "modify_l":
        he2 = modify_homotopy_l(he)
    else:
        pair = obstruction_cycles(he)
        if not (pair.class_m_vanishes and pair.class_n_vanishes):
            raise ObstructionError(
                "extension obstructed: the obstruction classes do not vanish; "
                "use a homotopy-repair strategy"
            )
        he2 = he
    she = trivial_extension(he2, 1)
    if she is None:
        she = extend_to_she(he2, 1)
    perturbed = ipl_perturb(she, p)
    out = perturbed.she
    quad = HeData(
        out.M, out.N, out.F_even[0], out.G_even[0], out.H_odd[0], out.L_odd[0]
    )
    bad = validate_he(quad)
    if bad:
        raise InternalConsistencyError(
            "perturbed quadruple fails its identities: " + "; ".join(bad)
        )
    shifts = {
        "F": filtration_shift(_forget(quad.F) - _forget(he2.F)),
        "G": filtration_shift(_forget(quad.G) - _forget(he2.G)),
        "H": filtration_shift(_forget(quad.H) - _forget(he2.H)),
        "L": filtration_shift(_forget(quad.L) - _forget(he2.L)),
    }
    return PpSolution(
        d_n_tilde=perturbed.d_n_tilde,
        f_tilde=quad.F,
        g_tilde=quad.G,
        h_tilde=quad.H,
        l_tilde=quad.L,
        m_perturbed=out.M,
        n_perturbed=out.N,
        reference=he2,
        shifts=shifts,
    )


def _forget(f: GradedMap) -> GradedMap:
    """The same blocks over the unperturbed-differential complexes, so maps
    over perturbed and unperturbed complexes become comparable."""
    src = complex_with_differential(
        f.source, GradedMap.zero(f.source, f.source, -1)
    )
    tgt = complex_with_differential(
        f.target, GradedMap.zero(f.target, f.target, -1)
    )
    return GradedMap.from_blocks(src, tgt, f.degree, {n: f.block_at(n) for n, _ in f.blocks})

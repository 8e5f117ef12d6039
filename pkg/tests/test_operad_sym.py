import pathlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pertlab.operad_sym import (
    TruncationCaps,
    _generator_diff,
    alpha_iso_eval,
    all_passed,
    bounded_boundary_search,
    default_caps,
    diff,
    element,
    enumerate_words,
    gen,
    id_word,
    iota,
    kernel_Z,
    multiply,
    parse_caps,
    parse_element,
    render_element,
    render_generator_diff,
    render_retraction_line,
    retraction_r,
    retraction_terms,
    single,
    split_homogeneity,
    theta,
    verify_identity_suite,
    word,
    word_mul,
)

GOLDENS = pathlib.Path(__file__).parent / "goldens"


def small_elements(ambient="riso_tilde", max_terms=3):
    caps = TruncationCaps(max_index=2, max_length=3, max_fweight=2, max_degree=5)
    pool = []
    for src in ("B", "W"):
        for dst in ("B", "W"):
            pool.extend(enumerate_words(ambient, src, dst, caps))
    # one hom-set at a time: elements must be color-homogeneous
    by_homset = {}
    for w in pool:
        by_homset.setdefault((w.src, w.dst, w.degree), []).append(w)
    homsets = [ws for ws in by_homset.values() if ws]
    return st.sampled_from(homsets).flatmap(
        lambda ws: st.lists(
            st.tuples(st.sampled_from(ws), st.integers(-4, 4)),
            min_size=1, max_size=max_terms,
        )
    ).map(lambda pairs: element(ambient, dict(pairs)))


# --- generators and words ---------------------------------------------------


def test_generator_grading():
    assert gen("f").degree == 0 and gen("f", 3).degree == 3
    assert gen("xb").degree == -1 and gen("yb").degree == -1
    assert gen("fb", 2).degree == 2 and gen("gb").degree == 0
    assert gen("f", 4).fweight == 0
    assert gen("xb").fweight == 1 and gen("fb", 3).fweight == 1


def test_generator_colors():
    # even f goes between the colors, odd f stays on the black side
    assert (gen("f").src, gen("f").dst) == ("B", "W")
    assert (gen("f", 1).src, gen("f", 1).dst) == ("B", "B")
    assert (gen("g").src, gen("g").dst) == ("W", "B")
    assert (gen("g", 1).src, gen("g", 1).dst) == ("W", "W")
    assert (gen("fb", 2).src, gen("fb", 2).dst) == ("B", "W")
    assert (gen("xb").src, gen("xb").dst) == ("B", "B")


def test_generator_rejections():
    with pytest.raises(ValueError, match="unknown generator family"):
        gen("q")
    with pytest.raises(ValueError, match="carries no index"):
        gen("xb", 1)


def test_word_composability():
    w = word(gen("f"), gen("f", 1))
    assert (w.src, w.dst, w.degree) == ("B", "W", 1)
    with pytest.raises(ValueError, match="not composable at position 0"):
        word(gen("f"), gen("f"))


def test_word_mul_is_path_algebra():
    a = word(gen("f"))
    b = word(gen("f", 1))
    assert word_mul(a, b).render() == "f0 f1"
    assert word_mul(b, a) is None
    assert word_mul(a, id_word("B")) == a
    assert word_mul(id_word("W"), a) == a


def test_element_canonicalization():
    e = element("riso", {word(gen("f")): 2, word(gen("f")): 1})
    assert e.terms == ((word(gen("f")), 1),)
    z = element("riso", {word(gen("f")): 0})
    assert z.is_zero()


def test_rfake_index_cap():
    element("rfake", {word(gen("f", 1)): 1})
    with pytest.raises(ValueError, match="exceeds index cap"):
        element("rfake", {word(gen("f", 2)): 1})
    with pytest.raises(ValueError, match="not available in ambient"):
        element("riso", {word(gen("xb")): 1})


def test_multiply_truncates_fweight():
    x = single("dif_riso", word(gen("xb")))
    assert multiply(x, x, max_fweight=2).terms[0][0].render() == "xb xb"
    assert multiply(x, x, max_fweight=1).is_zero()


# --- differential -----------------------------------------------------------


def test_low_differentials_frozen():
    assert render_generator_diff(gen("f", 1)) == "d f1 = g0 f0 - 1B"
    assert render_generator_diff(gen("g", 1)) == "d g1 = f0 g0 - 1W"
    assert render_generator_diff(gen("f", 2)) == "d f2 = f0 f1 - g1 f0"
    assert render_element(diff(single("riso", word(gen("f"))))) == "0"


def test_differential_tables_match_goldens():
    plain = [render_generator_diff(gen(fam, i)) for i in (2, 3, 4) for fam in ("f", "g")]
    assert "\n".join(plain) + "\n" == (GOLDENS / "diff_riso.txt").read_text()
    zs = [gen("xb"), gen("yb")] + [gen(fam, i) for i in (0, 1, 2) for fam in ("fb", "gb")]
    extended = [render_generator_diff(z) for z in zs]
    assert "\n".join(extended) + "\n" == (GOLDENS / "diff_riso_tilde.txt").read_text()


@settings(max_examples=150, deadline=None)
@given(small_elements())
def test_diff_squares_to_zero(e):
    assert diff(diff(e)).is_zero()


@settings(max_examples=60, deadline=None)
@given(small_elements("riso"), small_elements("riso"))
def test_diff_is_a_derivation(a, b):
    ab = multiply(a, b)
    if ab is None or ab.is_zero():
        return
    # Koszul rule: d(ab) = (da)b + (-1)^|a| a(db)
    sign = -1 if a.terms[0][0].degree % 2 else 1
    rhs = multiply(diff(a), b) + multiply(a, diff(b)).scale(sign)
    assert diff(ab) == rhs


def test_powers_of_the_dot_generator():
    # odd powers are cycles of the next even power, even powers are cycles
    for k in range(1, 7):
        w = single("dif", word(*([gen("xb")] * k)))
        d = diff(w)
        if k % 2:
            assert d == single("dif", word(*([gen("xb")] * (k + 1)))).scale(-1)
        else:
            assert d.is_zero()


def test_split_homogeneity_frozen():
    minus, plus = split_homogeneity(single("riso", word(gen("f", 1), gen("f", 1))))
    # the identity parts of the two d(f1) factors cancel against each other
    assert minus.is_zero()
    assert render_element(plus) == "g0 f0 f1 - f1 g0 f0"


@settings(max_examples=80, deadline=None)
@given(small_elements("riso"))
def test_split_homogeneity_recombines(e):
    minus, plus = split_homogeneity(e)
    assert minus + plus == diff(e)


# --- contracting homotopy and quotients --------------------------------------


def test_theta_frozen_values():
    assert render_element(theta(parse_element("f0 f1", "riso"))) == "f2"
    assert render_element(theta(parse_element("g0 f2 f1", "riso"))) == "f3 f1"
    assert theta(parse_element("f1 f1", "riso")).is_zero()
    assert theta(parse_element("f0", "riso")).is_zero()


def test_theta_homotopy_identity_spot():
    e = parse_element("f0 f1", "riso")
    assert theta(diff(e)) + diff(theta(e)) == e


def test_alpha_frozen_values():
    a = alpha_iso_eval(parse_element("3 f0 g0 f0 - f0", "riso"))
    assert (a.coefficient, a.basis) == (2, "f")
    assert str(a) == "2 f"
    k = alpha_iso_eval(parse_element("f0 f1", "riso"))
    assert k.coefficient == 0
    assert str(alpha_iso_eval(parse_element("g0 f0", "riso"))) == "1B"


# --- kernel elements and the retraction --------------------------------------


def test_kernel_leading_terms():
    caps1 = TruncationCaps(max_index=6, max_length=9, max_fweight=1, max_degree=12)
    caps2 = TruncationCaps(max_index=6, max_length=9, max_fweight=2, max_degree=12)
    assert render_element(kernel_Z(-1, caps1)) == "xb"
    assert render_element(kernel_Z(-1, caps2)) == "xb + xb f1 xb"
    assert render_element(kernel_Z(1, caps2)) == "xb f3 xb"
    assert render_element(kernel_Z(3, caps2)) == "xb f5 xb"
    with pytest.raises(ValueError, match="odd integer >= -1"):
        kernel_Z(2, caps2)


def test_kernel_and_retraction_goldens():
    caps = TruncationCaps(max_index=4, max_length=5, max_fweight=4, max_degree=8)
    lines = [f"Z{r} = " + render_element(kernel_Z(r, caps)) for r in (-1, 1, 3)]
    assert "\n".join(lines) + "\n" == (GOLDENS / "kernels.txt").read_text()
    zs = [gen("yb")] + [gen(fam, i) for i in range(4) for fam in ("fb", "gb")]
    lines = [render_retraction_line(z) for z in zs]
    assert "\n".join(lines) + "\n" == (GOLDENS / "retraction.txt").read_text()


def test_retraction_splits_the_inclusion():
    caps = default_caps()
    for text in ("xb", "xb f1 xb", "f0 xb g0", "xb xb"):
        e = parse_element(text, "dif_riso")
        assert retraction_r(iota(e), caps) == e


def test_retraction_terms_reject_plain_generators():
    with pytest.raises(ValueError, match="no kernel terms"):
        retraction_terms(gen("f", 2))


# --- rendering and parsing ---------------------------------------------------


def test_render_parse_frozen():
    e = parse_element("- f0 + 3 f0 g0 f0", "riso")
    assert render_element(e) == "- f0 + 3 f0 g0 f0"
    assert parse_element("0", "riso").is_zero()
    with pytest.raises(ValueError, match="unrecognized token"):
        parse_element("f0 qq", "riso")


@settings(max_examples=150, deadline=None)
@given(small_elements())
def test_render_parse_round_trip(e):
    assert parse_element(render_element(e), "riso_tilde") == e


# --- word enumeration and boundary search ------------------------------------


def test_enumerate_words_frozen():
    caps = TruncationCaps(2, 3, 0, 6)
    ws = enumerate_words("riso", "B", "W", caps, degree=2)
    assert [w.render() for w in ws] == [
        "f0 g0 f2", "f0 f1 f1", "f0 g2 f0", "g1 f0 f1", "g1 g1 f0", "f2", "f2 g0 f0",
    ]
    ws = enumerate_words("riso", "B", "B", caps, degree=0)
    assert [w.render() for w in ws] == ["g0 f0", "1B"]
    ws = enumerate_words("riso", "B", "B", caps, degree=0, include_identity=False)
    assert [w.render() for w in ws] == ["g0 f0"]


@settings(max_examples=40, deadline=None)
@given(small_elements("riso", max_terms=2))
def test_boundary_search_finds_planted_boundaries(e):
    c = diff(e)
    if c.is_zero():
        return
    caps = TruncationCaps(max_index=3, max_length=4, max_fweight=0, max_degree=6)
    found = bounded_boundary_search(c, caps)
    assert found is not None
    assert diff(found) == c


def test_boundary_search_requires_a_cycle():
    e = parse_element("f1", "riso")
    with pytest.raises(ValueError, match="target is not a cycle"):
        bounded_boundary_search(e, TruncationCaps(2, 3, 0, 6))


def test_boundary_search_negative_certificate():
    # a cycle that is a boundary in the full ambient but not under the
    # index cap: its usual preimage needs the next generator up
    c = parse_element("f0 f1 - g1 f0", "rfake")
    assert diff(c).is_zero()
    assert bounded_boundary_search(c, TruncationCaps(1, 4, 0, 8)) is None


# --- caps and the identity suite ---------------------------------------------


def test_caps_parsing():
    assert parse_caps("4,5,3,8") == TruncationCaps(4, 5, 3, 8)
    assert parse_caps(" 2, 3 ,1,6") == TruncationCaps(2, 3, 1, 6)
    with pytest.raises(ValueError, match="four comma-separated integers"):
        parse_caps("4,5,3")
    with pytest.raises(ValueError, match="must be nonnegative"):
        TruncationCaps(-1, 5, 3, 8)


def test_default_caps_env_override(monkeypatch):
    monkeypatch.delenv("PERTLAB_CAPS", raising=False)
    assert default_caps() == TruncationCaps(4, 5, 3, 8)
    monkeypatch.setenv("PERTLAB_CAPS", "2,3,1,6")
    assert default_caps() == TruncationCaps(2, 3, 1, 6)


def test_identity_suite_passes_at_small_caps():
    report = verify_identity_suite(TruncationCaps(2, 4, 2, 6))
    assert all_passed(report)
    assert [c.name for c in report] == [
        "square_zero_plain",
        "square_zero_extended",
        "contracting_homotopy",
        "retraction_chain_map",
        "retraction_splits_inclusion",
        "compact_square",
        "kernel_differential",
        "kernel_absorption",
        "chain_level_transfer_even",
        "chain_level_transfer_odd",
    ]


def test_identity_suite_catches_a_planted_sign_error():
    def corrupt(z):
        base = _generator_diff(z)
        if z.family == "f" and z.index == 2:
            return tuple((w, -c) for w, c in base)
        return base

    report = verify_identity_suite(TruncationCaps(3, 3, 0, 6), _table=corrupt)
    assert not all_passed(report)
    failed = {c.name for c in report if not c.passed}
    assert "square_zero_plain" in failed

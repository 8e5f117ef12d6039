import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pertlab.chaincore import GradedMap, compose
from pertlab.fixtures import (
    he_fixture,
    layered_she_fixture,
    obstructed_he_fixture,
    sdr_fixture,
    weight_raising_perturbation,
)
from pertlab.ipl_pipeline import (
    OperadAction,
    action_from_she,
    evaluate,
    ipl_perturb,
    solve_pp,
)
from pertlab.operad_sym import gen, parse_element, single, word
from pertlab.sdr_bpl import Perturbation, bpl_transfer
from pertlab.she_obstruction import (
    ObstructionError,
    extend_to_she,
    he_from_sdr,
    modify_homotopy_h,
    she_from_he,
    trivial_extension,
    validate_she,
)


def layered_action():
    he, p = layered_she_fixture()
    tower = extend_to_she(he, 2)
    return tower, p, action_from_she(tower, p)


def test_action_evaluates_assigned_generators():
    tower, p, act = layered_action()
    assert evaluate(single("dif_riso", word(gen("f"))), act) == tower.F_even[0]
    assert evaluate(single("dif_riso", word(gen("xb"))), act) == p.delta
    # identity word acts as the identity map of its color
    assert evaluate(parse_element("1B", "dif_riso"), act) == GradedMap.identity(tower.M)


def test_action_evaluates_composites_linearly():
    tower, p, act = layered_action()
    got = evaluate(parse_element("f1 xb f1 - 2 f1", "dif_riso"), act)
    h, d = tower.H_odd[0], p.delta
    assert got == compose(h, compose(d, h)) - h.scale(2)


def test_action_rejects_the_zero_element():
    _, _, act = layered_action()
    with pytest.raises(ValueError, match="cannot evaluate the zero element"):
        evaluate(parse_element("0", "dif_riso"), act)


def test_action_rejects_unassigned_generators():
    _, _, act = layered_action()
    with pytest.raises(ValueError, match="generator f6 is not assigned"):
        evaluate(single("dif_riso", word(gen("f", 6))), act)


def test_action_checks_intertwining():
    he = he_fixture(6)
    p = weight_raising_perturbation(1, he.M)
    tower = extend_to_she(he, 1)
    act = action_from_she(tower, p)
    # seed 6 has a nonzero obstruction cycle, so D(F_even[1]) != 0 and the
    # zero map cannot satisfy f2's identity
    corrupted = dict(act.assign)
    corrupted[gen("f", 2)] = GradedMap.zero(he.M, he.N, 2)
    with pytest.raises(ValueError, match="assignment of f2 does not intertwine"):
        OperadAction(act.M, act.N, corrupted)


def test_ipl_rejects_cap_zero_towers():
    he, p = layered_she_fixture()
    with pytest.raises(ValueError, match="cannot absorb a perturbation"):
        ipl_perturb(she_from_he(he), p)


def test_ipl_zero_delta_changes_nothing():
    he, _ = layered_she_fixture()
    tower = extend_to_she(he, 2)
    p = Perturbation(tower.M, GradedMap.zero(tower.M, tower.M, -1))
    out = ipl_perturb(tower, p)
    assert out.she.index_cap == 1
    assert out.d_n_tilde == out.she.N.differential_map()
    for i in (0, 1):
        assert out.she.F_even[i].blocks == tower.F_even[i].blocks
        assert out.she.H_odd[i].blocks == tower.H_odd[i].blocks


def test_ipl_layered_produces_nonzero_corrections():
    he, p = layered_she_fixture()
    tower = extend_to_she(he, 2)
    out = ipl_perturb(tower, p)
    assert validate_she(out.she) == []
    # the homotopy must genuinely change, not just get rebased
    assert out.she.H_odd[0].blocks != tower.H_odd[0].blocks
    assert out.d_n_tilde.blocks != tower.N.differential_map().blocks
    assert out.provenance.max_fweight == tower.M.max_weight + 1


def test_ipl_agrees_with_direct_transfer_on_retracts():
    for seed in range(10):
        s, p = sdr_fixture(seed)
        tower = trivial_extension(he_from_sdr(s), 1)
        assert tower is not None
        out = ipl_perturb(tower, p)
        direct = bpl_transfer(s, p)
        assert out.d_n_tilde == direct.N.differential_map()
        assert out.she.F_even[0] == direct.F
        assert out.she.G_even[0] == direct.G
        assert out.she.H_odd[0] == direct.H
        # a retract's small-side defect homotopy stays zero
        assert out.she.L_odd[0].is_zero()


def test_solve_pp_repairs_then_transfers():
    he, p = layered_she_fixture()
    for strategy in ("modify_h", "modify_l"):
        sol = solve_pp(he, p, strategy)
        assert sol.m_perturbed.d_block(1) == p.base.d_block(1) + p.delta.block_at(1)
        assert all(v >= 1 for v in sol.shifts.values())


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["modify_h", "modify_l"]))
def test_solve_pp_property_over_fixtures(seed, strategy):
    he = he_fixture(seed)
    p = weight_raising_perturbation(seed + 1, he.M)
    sol = solve_pp(he, p, strategy)
    assert set(sol.shifts) == {"F", "G", "H", "L"}
    assert all(v >= 1 for v in sol.shifts.values())
    assert sol.n_perturbed.max_weight == he.N.max_weight


def test_solve_pp_as_is_requires_vanishing_classes():
    he = obstructed_he_fixture()
    p = Perturbation(he.M, GradedMap.zero(he.M, he.M, -1))
    with pytest.raises(ObstructionError, match="use a homotopy-repair strategy"):
        solve_pp(he, p, "as_is")
    # after repair the same data goes through
    sol = solve_pp(he, p, "modify_h")
    assert sol.h_tilde.blocks == he.L.blocks


def test_solve_pp_rejects_unknown_strategy():
    he, p = layered_she_fixture()
    with pytest.raises(ValueError, match="unknown strategy"):
        solve_pp(he, p, "improvise")


def test_solve_pp_reference_is_the_repaired_quadruple():
    he = he_fixture(12)
    p = weight_raising_perturbation(3, he.M)
    sol = solve_pp(he, p, "modify_h")
    assert sol.reference == modify_homotopy_h(he)

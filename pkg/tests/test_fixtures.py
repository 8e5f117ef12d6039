import pytest

from pertlab.chaincore import GradedMap, compose, filtration_shift, validate_complex
from pertlab.cli_io import serialize_bundle
from pertlab.fixtures import (
    build_complex,
    cone_retract_sdr,
    fixture_generate,
    he_fixture,
    interval_complex,
    layered_she_fixture,
    obstructed_he_fixture,
    recalibration_he_fixture,
    sdr_fixture,
    weight_raising_perturbation,
    zero_complex,
)
from pertlab.sdr_bpl import check_side_conditions, validate_perturbation, validate_sdr
from pertlab.she_obstruction import obstruction_cycles, validate_he


def test_same_seed_same_fixture():
    for seed in (0, 1, 17, 4096):
        assert sdr_fixture(seed) == sdr_fixture(seed)
        assert he_fixture(seed) == he_fixture(seed)
    assert sdr_fixture(0) != sdr_fixture(1)


def test_cone_retract_sdr_is_a_deformation_retract():
    for seed in range(6):
        s = cone_retract_sdr(seed)
        assert validate_sdr(s) == []
        assert check_side_conditions(s).all
        # F G = 1 on the small side holds on the nose, not just up to homotopy
        assert compose(s.F, s.G) == GradedMap.identity(s.N)


def test_sdr_fixture_perturbation_is_admissible():
    for seed in range(8):
        s, p = sdr_fixture(seed)
        assert p.base == s.M
        assert validate_perturbation(p) == []
        assert filtration_shift(p.delta) >= 1


def test_weight_raising_perturbation_respects_filtration():
    s, _ = sdr_fixture(3)
    for seed in range(5):
        p = weight_raising_perturbation(seed, s.M)
        assert validate_perturbation(p) == []


def test_he_fixture_population_has_visible_obstruction_cycles():
    # the interesting seeds carry a nonzero obstruction cycle whose class
    # still vanishes; a population where every cycle is zero would make the
    # witness checks vacuous
    nonzero = 0
    for seed in range(10):
        he = he_fixture(seed)
        assert validate_he(he) == []
        pair = obstruction_cycles(he)
        assert pair.class_m_vanishes and pair.class_n_vanishes
        if not pair.cycle_m.is_zero():
            nonzero += 1
    assert nonzero >= 1


def test_obstructed_fixture_shape():
    he = obstructed_he_fixture()
    assert all(m.is_zero() for m in he.M.diffs)
    assert he.H.is_zero()
    assert not he.L.is_zero()
    pair = obstruction_cycles(he)
    assert not (pair.class_m_vanishes or pair.class_n_vanishes)


def test_recalibration_fixture_has_nonsquare_zero_homotopy():
    he = recalibration_he_fixture()
    assert not compose(he.H, he.H).is_zero()


def test_layered_fixture_threads_the_homotopy():
    he, p = layered_she_fixture()
    assert p.base == he.M
    assert not compose(he.H, compose(p.delta, he.H)).is_zero()


def test_fixture_generate_zero_ranks():
    docs = fixture_generate(0, ranks=(0, 0))
    assert docs["sdr"].M.total_rank() == 0
    assert validate_sdr(docs["sdr"]) == []
    assert validate_perturbation(docs["perturbation"]) == []
    assert validate_he(docs["he"]) == []
    serialize_bundle(docs)


def test_fixture_generate_deltas_compose_with_their_documents():
    docs = fixture_generate(2)
    assert docs["perturbation"].base == docs["sdr"].M
    assert docs["he_perturbation"].base == docs["he"].M
    assert validate_perturbation(docs["he_perturbation"]) == []


def test_fixture_generate_respects_filtration_cap():
    docs = fixture_generate(5, ranks=(2, 2), filtration=3)
    assert docs["sdr"].M.max_weight == 3
    assert validate_sdr(docs["sdr"]) == []


def test_small_complex_builders():
    z = zero_complex(2)
    assert z.total_rank() == 0 and z.max_weight == 2
    i = interval_complex()
    assert validate_complex(i) == []
    assert i.total_rank() == 2 and i.d_block(1).to_rows() == [[1]]


def test_build_complex_infers_top_degree():
    c = build_complex(0, (1, 2), ((0,), (0, 1)), {1: [[1, 0]]}, 1)
    assert (c.degree_lo, c.degree_hi) == (0, 1)
    assert validate_complex(c) == []
    with pytest.raises(ValueError):
        build_complex(0, (1,), ((0,), (0,)), {}, 0)

import itertools

import pytest

from src.catalog import SMALL_CATALOG, named_group
from src.errors import BudgetExceededError, FactorizationError
from src.groups import GroupHom, normalizer
from src.morphisms import all_homomorphisms, is_isomorphic
from src.normal_map import all_normal_structures, conjugation_normal_map, validate_normal_map
from src.normalizer import (
    count_universal_morphisms_in,
    detect_normal_structure,
    induced_normalizer_morphism,
    injective_normalizer,
    normalizer_diagnostics,
    universal_morphism_in,
)
from tests.helpers import fixture_hom, inclusion, to_trivial

SMALL = ("Z1", "Z2", "Z3", "Z4", "V4", "S3")


def test_normalizer_of_map_to_trivial_group():
    nr = injective_normalizer(to_trivial(named_group("Z3")))
    assert nr.N.order == 2
    assert nr.p_phi.image().order == 1


def test_normalizer_of_subgroup_inclusion(s4):
    phi = inclusion(s4, "(1 2)")
    nr = injective_normalizer(phi)
    assert nr.N.order == 4
    usual, _ = normalizer(s4, phi.image()).as_group()
    assert is_isomorphic(nr.N, usual)[0]


def test_normalizer_of_surjection():
    phi = next(h for h in all_homomorphisms(named_group("Z4"), named_group("Z2")) if h.is_surjective)
    assert injective_normalizer(phi).N.order == 4


def test_complete_group_is_its_own_normalizer(s3):
    nr = injective_normalizer(to_trivial(s3))
    assert nr.N.order == 6
    assert nr.phi_tilde.n.is_isomorphism


def test_pairs_are_sorted_with_identity_first(s4):
    nr = injective_normalizer(inclusion(s4, "(1 2 3 4)"))
    assert tuple(nr.pairs[0]) == (0, 0)
    keys = [(g, tau) for tau, g in nr.pairs.tolist()]
    assert keys == sorted(keys)
    for i, (tau, g) in enumerate(nr.pairs.tolist()):
        assert nr.pair_index(tau, g) == i


def test_automorphism_budget(s4):
    with pytest.raises(BudgetExceededError):
        injective_normalizer(GroupHom.identity(s4), budget=10)


# ---------------------------------------------------------
# Propriété universelle
# ---------------------------------------------------------

def test_universal_morphism_of_normalizer_is_identity(s3):
    nr = injective_normalizer(inclusion(s3, "(1 2)"))
    assert universal_morphism_in(nr, nr.phi_tilde, nr.p_phi) == GroupHom.identity(nr.N)
    assert count_universal_morphisms_in(nr, nr.phi_tilde, nr.p_phi) == 1


def test_universal_morphism_from_conjugation(s3):
    phi = fixture_hom("a3_s3.grp")
    nr = injective_normalizer(phi)
    n = conjugation_normal_map(phi)
    f = GroupHom.identity(phi.target)
    f_tilde = universal_morphism_in(nr, n, f)
    assert f_tilde.is_isomorphism
    assert count_universal_morphisms_in(nr, n, f) == 1
    with pytest.raises(FactorizationError):
        universal_morphism_in(nr, n, GroupHom.trivial(phi.target, phi.target))


def test_induced_normalizer_morphism(s4):
    phi = inclusion(s4, "(1 2)")
    nr = injective_normalizer(phi)
    m = induced_normalizer_morphism(nr, GroupHom.identity(s4))
    assert m.is_isomorphism


@pytest.mark.parametrize("base, target_order", [("Z2", 4), ("Z1", 2)])
def test_induced_normalizer_morphism_onto_quotient(s3, base, target_order):
    phi = inclusion(s3, "(1 2 3)")
    nr = injective_normalizer(phi)
    Q = named_group(base)
    sign = [int(s3.elements[g].is_odd) % Q.order for g in s3.generators]
    psi = GroupHom.from_generators(s3, Q, list(s3.generators), sign)
    target = injective_normalizer(phi.then(psi))
    m = induced_normalizer_morphism(nr, psi, target)
    assert nr.N.order == 6
    assert target.N.order == target_order
    assert nr.phi_tilde.n.then(m) == target.phi_tilde.n
    assert m.then(target.p_phi) == nr.p_phi.then(psi)


# ---------------------------------------------------------
# Détection des structures normales
# ---------------------------------------------------------

def test_section_found_for_normal_subgroup():
    result = detect_normal_structure(fixture_hom("a3_s3.grp"))
    assert result.found
    assert validate_normal_map(result.induced_action).ok
    assert result.section.then(injective_normalizer(fixture_hom("a3_s3.grp")).p_phi).is_isomorphism


def test_no_section_for_non_normal_subgroup(s3):
    assert not detect_normal_structure(inclusion(s3, "(1 2)")).found


def test_section_budget(s3):
    with pytest.raises(BudgetExceededError):
        detect_normal_structure(to_trivial(s3), budget=2)


def test_detection_matches_exhaustive_oracle():
    checked = 0
    for source, target in itertools.product(SMALL, repeat=2):
        for phi in all_homomorphisms(named_group(source), named_group(target)):
            found = detect_normal_structure(phi).found
            assert found == bool(all_normal_structures(phi)), (source, target, phi.image_of.tolist())
            checked += 1
    assert checked > 80


# ---------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------

@pytest.mark.parametrize("source, target", [
    ("Z3", "Z1"), ("S3", "Z1"), ("S3", "Z2"), ("Z4", "Z2"), ("Q8", "V4"), ("Z2", "S3"), ("D8", "Z2"),
])
def test_diagnostics_hold(source, target):
    for phi in all_homomorphisms(named_group(source), named_group(target)):
        assert normalizer_diagnostics(injective_normalizer(phi)).ok


def test_diagnostics_on_subgroup_inclusions(s4):
    for cycles in ["(1 2)", "(1 2 3 4)", "(1 2)(3 4)", "(1 2 3)"]:
        nr = injective_normalizer(inclusion(s4, cycles))
        assert normalizer_diagnostics(nr).ok


@pytest.mark.slow
def test_detection_matches_oracle_up_to_order_eight():
    checked = 0
    for source, target in itertools.product(SMALL_CATALOG, repeat=2):
        for phi in all_homomorphisms(named_group(source), named_group(target)):
            assert detect_normal_structure(phi).found == bool(all_normal_structures(phi)), (source, target)
            checked += 1
    assert checked > 300

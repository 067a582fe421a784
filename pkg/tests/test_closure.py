import itertools

import pytest

from src.catalog import named_group
from src.closure import (
    ABELIAN,
    GENERIC,
    NORMAL_INCLUSION,
    SURJECTIVE,
    ClosureResult,
    check_closure_result,
    closure_normal_inclusion,
    closure_presentation,
    closure_structure_checks,
    count_universal_morphisms,
    free_normal_closure,
    induced_closure_morphism,
    relative_schur_multiplier,
    universal_morphism,
)
from src.cli import closure_results
from src.errors import EnumerationOverflowError, FactorizationError, PreconditionError
from src.groups import GroupHom, abelian_invariants
from src.morphisms import all_homomorphisms
from src.normal_map import conjugation_normal_map, validate_normal_morphism
from tests.helpers import fixture_hom, inclusion, to_trivial

ABELIAN_UP_TO_16 = tuple(f"Z{n}" for n in range(1, 17)) + ("V4", "Z2^3", "Z3^2", "Z2^4")
DIRECT_SUM_LIMIT = 1024
GENERIC_LIMIT = 64
HOM_SAMPLE = 1024


def assert_equivalent(a: ClosureResult, b: ClosureResult):
    """Les morphismes universels dans les deux sens sont inverses l'un de l'autre"""
    there = universal_morphism(a, b.c_phi, b.phi_hat)
    back = universal_morphism(b, a.c_phi, a.phi_hat)
    assert there.then(back) == GroupHom.identity(a.cl)
    assert back.then(there) == GroupHom.identity(b.cl)


def first_surjection(source: str, target: str) -> GroupHom:
    return next(h for h in all_homomorphisms(named_group(source), named_group(target)) if h.is_surjective)


# ---------------------------------------------------------
# Présentation
# ---------------------------------------------------------

def test_closure_presentation_shape(s3):
    phi = inclusion(s3, "(1 2 3)")
    P = closure_presentation(phi)
    k = len(phi.source.generators)
    assert P.n_generators == k * s3.order
    assert P.generator_names[0] == "s0_0"


def test_closure_presentation_rejects_non_generating_set(s3):
    phi = GroupHom.identity(s3)
    with pytest.raises(PreconditionError):
        closure_presentation(phi, gen_set=[s3.generators[0]])


# ---------------------------------------------------------
# Constructions
# ---------------------------------------------------------

def test_surjective_fast_path():
    sign = fixture_hom("s3.grp", "sign")
    cr = free_normal_closure(sign)
    assert cr.strategy == SURJECTIVE
    assert cr.order == 2
    assert cr.phi_hat.n.is_isomorphism


def test_closure_to_trivial_group_is_abelianization(s3, d8):
    assert free_normal_closure(to_trivial(s3)).order == 2
    assert free_normal_closure(to_trivial(d8)).order == 4


def test_central_quotient_closure():
    phi = fixture_hom("q8.grp")
    cr = free_normal_closure(phi)
    assert cr.order == 8
    assert cr.kernel.order == 2
    assert relative_schur_multiplier(phi).abelian_invariants == [2]


@pytest.mark.parametrize("source, target", [
    ("S3", "Z2"), ("Q8", "V4"), ("D8", "V4"), ("D8", "Z2"), ("Z4", "Z2"), ("Z6", "Z3"),
    ("S4", "S3"), ("S3", "Z1"), ("A4", "Z3"), ("Z8", "Z4"),
])
def test_surjective_path_matches_generic(source, target):
    phi = first_surjection(source, target)
    fast = free_normal_closure(phi, SURJECTIVE)
    generic = free_normal_closure(phi, GENERIC)
    assert fast.order == generic.order
    assert_equivalent(fast, generic)


def abelian_pairs():
    """Couples de groupes abéliens du catalogue; les plus gros sont marqués lents"""
    for source, target in itertools.product(ABELIAN_UP_TO_16, repeat=2):
        quick = named_group(source).order * named_group(target).order <= 12
        yield pytest.param(source, target, id=f"{source}-{target}", marks=() if quick else pytest.mark.slow)


@pytest.mark.parametrize("source, target", list(abelian_pairs()))
def test_abelian_path_matches_generic(source, target):
    Gamma, G = named_group(source), named_group(target)
    homs = all_homomorphisms(Gamma, G)
    if len(homs) > HOM_SAMPLE:
        homs = homs[:: len(homs) // HOM_SAMPLE]
    compared = set()
    for phi in homs:
        index = G.order // phi.image().order
        if Gamma.order ** index > DIRECT_SUM_LIMIT:
            continue
        fast = free_normal_closure(phi, ABELIAN)
        assert fast.order == Gamma.order ** index
        assert abelian_invariants(fast.cl) == sorted(abelian_invariants(Gamma) * index)
        # une comparaison générique par (indice, noyau)
        key = (index, phi.kernel().order)
        if fast.order <= GENERIC_LIMIT and key not in compared:
            compared.add(key)
            assert_equivalent(fast, free_normal_closure(phi, GENERIC))


def test_abelian_closure_of_fixture():
    phi = fixture_hom("z2_z4.grp", "double")
    cr = free_normal_closure(phi)
    assert cr.strategy == ABELIAN
    assert cr.order == 4
    assert abelian_invariants(cr.cl) == [2, 2]
    # n(v) est le produit des images des coordonnées
    assert cr.kernel.order == 2


def test_generic_closure_of_normal_subgroup():
    phi = fixture_hom("a3_s3.grp")
    cr = free_normal_closure(phi)
    assert cr.strategy == GENERIC
    assert cr.order == 9
    assert cr.kernel.order == 3
    assert closure_structure_checks(cr).ok


def test_felsch_and_hlt_agree(s3):
    phi = inclusion(s3, "(1 2)")
    felsch = free_normal_closure(phi, GENERIC, coset_strategy="felsch")
    hlt = free_normal_closure(phi, GENERIC, coset_strategy="hlt")
    assert felsch.order == hlt.order
    assert_equivalent(felsch, hlt)


def test_strategy_preconditions(s3):
    phi = inclusion(s3, "(1 2)")
    with pytest.raises(PreconditionError):
        free_normal_closure(phi, SURJECTIVE)
    with pytest.raises(PreconditionError):
        free_normal_closure(phi, ABELIAN)
    with pytest.raises(PreconditionError):
        free_normal_closure(phi, "magic")


def test_enumeration_overflow():
    with pytest.raises(EnumerationOverflowError):
        free_normal_closure(fixture_hom("a3_s3.grp"), GENERIC, max_cosets=3)


# ---------------------------------------------------------
# Propriété universelle
# ---------------------------------------------------------

def test_universal_morphism_of_closure_is_identity(s3):
    cr = free_normal_closure(inclusion(s3, "(1 2)"))
    assert universal_morphism(cr, cr.c_phi, cr.phi_hat) == GroupHom.identity(cr.cl)
    assert count_universal_morphisms(cr, cr.c_phi, cr.phi_hat) == 1


def test_universal_morphism_into_conjugation():
    phi = fixture_hom("a3_s3.grp")
    cr = free_normal_closure(phi)
    identity = conjugation_normal_map(GroupHom.identity(phi.target))
    psi_hat = universal_morphism(cr, phi, identity)
    assert psi_hat == cr.phi_hat.n
    assert count_universal_morphisms(cr, phi, identity) == 1


def test_universal_morphism_requires_factorization():
    phi = fixture_hom("a3_s3.grp")
    cr = free_normal_closure(phi)
    identity = conjugation_normal_map(GroupHom.identity(phi.target))
    with pytest.raises(FactorizationError):
        universal_morphism(cr, GroupHom.trivial(phi.source, phi.target), identity)


def test_induced_morphism_of_identity():
    phi = fixture_hom("a3_s3.grp")
    m = induced_closure_morphism(GroupHom.identity(phi.source), phi)
    assert m.mu.is_isomorphism
    assert m.eta == GroupHom.identity(phi.target)


def test_induced_morphism_from_subgroup():
    Z2, Z4 = named_group("Z2"), named_group("Z4")
    f = GroupHom.from_generators(Z2, Z4, list(Z2.generators), [Z4.power(Z4.generators[0], 2)])
    phi = GroupHom.identity(Z4)
    source, target = free_normal_closure(f.then(phi)), free_normal_closure(phi)
    m = induced_closure_morphism(f, phi, source, target)
    assert (source.order, target.order) == (4, 4)
    assert validate_normal_morphism(m, source.phi_hat, target.phi_hat).ok
    assert m.mu.image().order == 2
    assert m.eta == GroupHom.identity(Z4)


@pytest.mark.parametrize("base, source_order", [("Z1", 3), ("Z2", 9)])
def test_induced_morphism_through_trivial_group(base, source_order):
    Z1, G = named_group("Z1"), named_group(base)
    f = GroupHom.trivial(named_group("Z3"), Z1)
    phi = GroupHom.trivial(Z1, G)
    source, target = free_normal_closure(f.then(phi)), free_normal_closure(phi)
    m = induced_closure_morphism(f, phi, source, target)
    assert (source.order, target.order) == (source_order, 1)
    assert validate_normal_morphism(m, source.phi_hat, target.phi_hat).ok
    assert m.mu.image().order == 1


# ---------------------------------------------------------
# Multiplicateur de Schur relatif et inclusions distinguées
# ---------------------------------------------------------

def test_schur_requires_normally_generating_image():
    with pytest.raises(PreconditionError):
        relative_schur_multiplier(fixture_hom("a3_s3.grp"))


def test_schur_of_transposition_in_s3(s3):
    schur = relative_schur_multiplier(inclusion(s3, "(1 2)"))
    assert schur.kernel_group.is_abelian


def test_normal_inclusion_decomposition():
    result = closure_normal_inclusion(fixture_hom("z2_z4.grp", "diagonal"))
    assert result.cr.strategy == NORMAL_INCLUSION
    assert result.cr.order == 4
    assert result.complement.order == 2
    assert not result.is_trivial_closure


def test_normal_inclusion_of_trivial_group(s3):
    phi = GroupHom.trivial(named_group("Z1"), s3)
    result = closure_normal_inclusion(phi)
    assert result.is_trivial_closure
    assert result.cr.order == 1


@pytest.mark.slow
def test_normal_inclusion_of_perfect_group():
    # Felsch définit environ 300 classes sur S5: plus de trois minutes
    S5 = named_group("S5")
    result = closure_normal_inclusion(inclusion(S5, "(1 2 3 4 5)", "(1 2 3)"))
    assert result.is_trivial_closure
    assert result.cr.order == 60
    assert result.cr.kernel.order == 1


def test_normal_inclusion_requires_normal_image(s3):
    with pytest.raises(PreconditionError):
        closure_normal_inclusion(inclusion(s3, "(1 2)"))


def test_checks_pass_on_fixtures():
    for name, hom in [("s3.grp", "sign"), ("s3.grp", "trivial"), ("q8.grp", None), ("z2_z4.grp", "double"),
                      ("z2_z4.grp", "diagonal"), ("a3_s3.grp", None)]:
        cr = free_normal_closure(fixture_hom(name, hom))
        assert check_closure_result(cr).ok
        assert closure_structure_checks(cr).ok


@pytest.mark.slow
def test_a5_closure():
    results = closure_results(free_normal_closure(fixture_hom("a5.grp")))
    assert results["cl_order"] == 360
    assert results["kernel"] == [2, 3]
    assert results["kernel_name"] == "Z6"
    assert results["center_order"] == 6
    assert results["abelianization"] == [3]
    assert results["derived_order"] == 120
    assert results["derived_perfect"]
    assert results["derived_center_order"] == 2

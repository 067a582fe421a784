import numpy as np
import pytest

from src.catalog import SMALL_CATALOG, named_group
from src.errors import (
    BudgetExceededError,
    FactorizationError,
    InvariantSubgroupError,
    PreconditionError,
)
from src.groups import GroupHom, center
from src.morphisms import all_homomorphisms, is_isomorphic
from src.normal_map import (
    NormalMap,
    NormalMorphism,
    all_normal_structures,
    canonical_structure_surjective_central,
    conjugation_normal_map,
    extend_by_abelian,
    identity_morphism,
    normal_map_properties,
    pullback,
    restrict_to_invariant,
    validate_normal_map,
    validate_normal_morphism,
)
from tests.helpers import element, inclusion

CATALOG_UP_TO_12 = SMALL_CATALOG + ("Z9", "Z3^2", "Z10", "Z12", "D12", "A4", "Z2^3")


def test_conjugation_of_normal_subgroup(s3):
    nm = conjugation_normal_map(inclusion(s3, "(1 2 3)"))
    assert validate_normal_map(nm).ok
    assert normal_map_properties(nm).ok


def test_conjugation_requires_normal_image(s3):
    with pytest.raises(PreconditionError):
        conjugation_normal_map(inclusion(s3, "(1 2)"))


def test_identity_is_normal(s3):
    nm = conjugation_normal_map(GroupHom.identity(s3))
    assert validate_normal_map(nm)
    assert validate_normal_morphism(identity_morphism(nm), nm, nm).ok


def test_trivial_action_on_non_central_kernel_is_rejected(s3):
    n = GroupHom.trivial(s3, named_group("Z1"))
    verdict = validate_normal_map(NormalMap(n, np.arange(s3.order)[None, :]))
    assert "NM2" in verdict.kinds()


def test_action_shape_is_checked(s3):
    with pytest.raises(PreconditionError):
        NormalMap(GroupHom.identity(s3), np.zeros((2, 6), dtype=np.int64))


def test_non_automorphism_action_is_reported():
    Z2, Z3 = named_group("Z2"), named_group("Z3")
    # Z3 -> Z2 trivial; x -> 0 n'est pas bijectif
    action = np.array([[0, 1, 2], [0, 0, 0]])
    verdict = validate_normal_map(NormalMap(GroupHom.trivial(Z3, Z2), action))
    assert verdict.kinds()[0] == "action-not-bijective"


def test_canonical_structure_on_central_quotient(q8, v4):
    n = GroupHom.from_generators(q8, v4, list(q8.generators), list(v4.generators))
    nm = canonical_structure_surjective_central(n)
    assert normal_map_properties(nm).ok
    assert n.kernel() == center(q8)
    assert len(all_normal_structures(n)) == 1


@pytest.mark.parametrize("source", [
    pytest.param(name, marks=pytest.mark.slow) if name == "Z2^3" else name for name in CATALOG_UP_TO_12
])
def test_canonical_structure_is_the_only_one(source):
    M = named_group(source)
    Z = center(M)
    checked = 0
    for name in CATALOG_UP_TO_12:
        G = named_group(name)
        if M.order % G.order:
            continue
        for n in all_homomorphisms(M, G):
            if not n.is_surjective or not Z.mask[n.kernel().members].all():
                continue
            structures = all_normal_structures(n)
            assert len(structures) == 1, (source, name)
            assert np.array_equal(structures[0].action, canonical_structure_surjective_central(n).action)
            checked += 1
    assert checked >= 1


def test_canonical_structure_requires_central_kernel(s3):
    sign = GroupHom.from_generators(s3, named_group("Z2"), list(s3.generators), [0, 1])
    with pytest.raises(PreconditionError):
        canonical_structure_surjective_central(sign)


def test_restriction_and_invariance(s4):
    nm = conjugation_normal_map(GroupHom.identity(s4))
    V = s4.subgroup([element(s4, "(1 2)(3 4)"), element(s4, "(1 3)(2 4)")])
    restricted = restrict_to_invariant(nm, V)
    assert restricted.M.order == 4
    assert validate_normal_map(restricted)
    with pytest.raises(InvariantSubgroupError):
        restrict_to_invariant(nm, s4.subgroup([element(s4, "(1 2)")]))


def test_extend_by_abelian(s3):
    nm = conjugation_normal_map(inclusion(s3, "(1 2 3)"))
    extended = extend_by_abelian(nm, named_group("Z2"))
    assert extended.M.order == 6
    assert extended.n.kernel().order == 2
    assert validate_normal_map(extended).ok
    with pytest.raises(PreconditionError):
        extend_by_abelian(nm, s3)


def test_morphism_square_is_checked(s3):
    nm = conjugation_normal_map(GroupHom.identity(s3))
    bad = NormalMorphism(GroupHom.trivial(s3, s3), GroupHom.identity(s3))
    assert "square" in validate_normal_morphism(bad, nm, nm).kinds()


def test_non_equivariant_bijection_is_reported(v4):
    """V4 -> Z2 trivial, Z2 échangeant les deux générateurs; mu fixe a et envoie b sur ab"""
    a, b = v4.generators
    swap = np.arange(v4.order)
    swap[[a, b]] = [b, a]
    nm = NormalMap(GroupHom.trivial(v4, named_group("Z2")), np.stack([np.arange(v4.order), swap]))
    assert validate_normal_map(nm).ok
    mu = GroupHom.from_generators(v4, v4, [a, b], [a, v4.op(a, b)])
    verdict = validate_normal_morphism(NormalMorphism(mu, GroupHom.identity(nm.G)), nm, nm)
    assert verdict.kinds() == ["equivariance"]
    assert verdict.violations[0].witness["g"] == 1
    assert verdict.violations[0].witness["a"] != 0


def test_pullback_along_inclusion(s3):
    """Produit fibré de id(S3) le long de A3 -> S3: on retrouve A3 agissant par conjugaison"""
    nm = conjugation_normal_map(GroupHom.identity(s3))
    eta = inclusion(s3, "(1 2 3)")
    result = pullback(nm, eta)
    assert result.nm.M.order == 3
    assert validate_normal_morphism(result.pi2, result.nm, nm).ok


def test_pullback_induced_map(s3):
    nm = conjugation_normal_map(GroupHom.identity(s3))
    eta = GroupHom.identity(s3)
    result = pullback(nm, eta, phi=eta, psi_prime=eta)
    assert result.psi.is_isomorphism
    sign = GroupHom.from_generators(s3, named_group("Z2"), list(s3.generators), [0, 1])
    with pytest.raises(PreconditionError):
        pullback(nm, sign)


def test_pullback_rejects_non_commuting_square(s3):
    nm = conjugation_normal_map(GroupHom.identity(s3))
    eta = GroupHom.identity(s3)
    with pytest.raises(FactorizationError):
        pullback(nm, eta, phi=eta, psi_prime=GroupHom.trivial(s3, s3))


def test_pullback_of_central_quotient():
    Z4, Z2 = named_group("Z4"), named_group("Z2")
    n_prime = canonical_structure_surjective_central(
        next(h for h in all_homomorphisms(Z4, Z2) if h.is_surjective)
    )
    result = pullback(n_prime, GroupHom.identity(Z2))
    assert result.nm.M.order == 4
    assert is_isomorphic(result.nm.M, Z4)[0]
    assert validate_normal_morphism(result.pi2, result.nm, n_prime).ok


def test_pullback_over_trivial_group_is_kernel(q8, v4):
    n_prime = canonical_structure_surjective_central(
        GroupHom.from_generators(q8, v4, list(q8.generators), list(v4.generators))
    )
    result = pullback(n_prime, GroupHom.trivial(named_group("Z1"), v4))
    assert result.nm.M.order == 2
    assert result.pi2.mu.image() == n_prime.n.kernel()
    assert validate_normal_morphism(result.pi2, result.nm, n_prime).ok


@pytest.mark.parametrize("source, target, expected", [
    ("Z2", "Z1", 1),
    ("S3", "Z1", 0),
    ("Z3", "S3", None),
])
def test_all_normal_structures(source, target, expected):
    homs = all_homomorphisms(named_group(source), named_group(target))
    counts = [len(all_normal_structures(h)) for h in homs]
    if expected is not None:
        assert counts == [expected]
    else:
        # Z3 -> S3: seule l'inclusion de A3 et le trivial ont une structure
        assert sorted(counts) == [1, 1, 2]


def test_oracle_budget(s4):
    with pytest.raises(BudgetExceededError):
        all_normal_structures(GroupHom.identity(s4))

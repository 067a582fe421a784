import numpy as np
import pytest

from src.catalog import SMALL_CATALOG, named_group
from src.errors import BudgetExceededError
from src.groups import GroupHom, direct_product
from src.morphisms import all_homomorphisms, automorphism_group, is_isomorphic, search_homomorphisms


@pytest.mark.parametrize("name, aut_order", [
    ("Z1", 1), ("Z2", 1), ("Z3", 2), ("Z4", 2), ("V4", 6), ("Z8", 4), ("S3", 6), ("D8", 8), ("Q8", 24),
])
def test_automorphism_group_orders(name, aut_order):
    aut = automorphism_group(named_group(name))
    assert aut.group.order == aut_order
    assert np.array_equal(aut.tables[0], np.arange(aut.base.order))


def test_automorphism_tables_compose_as_group(s3):
    aut = automorphism_group(s3)
    A = aut.group
    for i in range(A.order):
        for j in range(A.order):
            composed = aut.tables[j][aut.tables[i]]
            assert aut.index_of(composed) == A.op(i, j)
    for i in range(A.order):
        assert aut.as_hom(i) == GroupHom(s3, s3, aut.tables[i])


def test_automorphism_budget(s4):
    with pytest.raises(BudgetExceededError):
        automorphism_group(s4, budget=10)


@pytest.mark.parametrize("source, target, count", [
    ("Z2", "S3", 4), ("Z3", "S3", 3), ("S3", "Z2", 2), ("Z4", "Z2", 2), ("V4", "Z2", 4), ("Z2", "Z1", 1),
])
def test_homomorphism_counts(source, target, count):
    assert len(all_homomorphisms(named_group(source), named_group(target))) == count


def test_search_respects_accept(s3):
    Z2 = named_group("Z2")
    nontrivial = list(search_homomorphisms(Z2, s3, accept=lambda partial: partial[1] != 0))
    assert len(nontrivial) == 3


def test_isomorphism():
    Z6 = named_group("Z6")
    P = direct_product([named_group("Z2"), named_group("Z3")])
    found, iso = is_isomorphic(Z6, P)
    assert found
    assert iso.is_isomorphism
    assert not is_isomorphic(named_group("Z4"), named_group("V4"))[0]
    assert not is_isomorphic(named_group("D8"), named_group("Q8"))[0]


def test_small_catalog_self_isomorphic():
    for name in SMALL_CATALOG:
        G = named_group(name)
        assert is_isomorphic(G, G)[0]

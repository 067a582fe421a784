"""
Constructions communes aux tests
"""

from typing import Optional

from src.catalog import named_group
from src.config import Config
from src.groups import FiniteGroup, GroupHom, parse_cycles
from src.spec_format import load_spec

FIXTURES = Config().fixtures_dir


def to_trivial(G: FiniteGroup) -> GroupHom:
    return GroupHom.trivial(G, named_group("Z1"))


def element(G: FiniteGroup, cycles: str) -> int:
    """Indice de la permutation écrite en cycles dans un groupe du catalogue"""
    return G.index_of(parse_cycles(cycles, G.elements[0].size))


def inclusion(G: FiniteGroup, *cycles: str) -> GroupHom:
    """Inclusion du sous-groupe engendré, vu comme groupe abstrait"""
    _, incl = G.subgroup([element(G, c) for c in cycles]).as_group()
    return incl


def fixture_hom(name: str, hom: Optional[str] = None) -> GroupHom:
    return load_spec(FIXTURES / name).hom(hom)

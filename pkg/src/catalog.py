"""
Catalogue de groupes nommés (réalisations par permutations)
"""

import re
from functools import lru_cache

from src.errors import PreconditionError
from src.groups import FiniteGroup, direct_product, group_from_permutations


def _cycle(points) -> str:
    return "(" + " ".join(str(p) for p in points) + ")"


def cyclic(n: int) -> FiniteGroup:
    gen = _cycle(range(1, n + 1)) if n > 1 else "()"
    return group_from_permutations(max(n, 1), [gen], label=f"Z{n}")


def symmetric(n: int) -> FiniteGroup:
    if n == 1:
        return group_from_permutations(1, [], label="S1")
    gens = [_cycle(range(1, n + 1)), "(1 2)"] if n > 2 else ["(1 2)"]
    return group_from_permutations(n, gens, label=f"S{n}")


def alternating(n: int) -> FiniteGroup:
    if n < 3:
        return group_from_permutations(max(n, 1), [], label=f"A{n}")
    if n == 3:
        gens = ["(1 2 3)"]
    elif n % 2:
        gens = [_cycle(range(1, n + 1)), "(1 2 3)"]
    else:
        gens = [_cycle(range(2, n + 1)), "(1 2 3)"]
    return group_from_permutations(n, gens, label=f"A{n}")


def dihedral(order: int) -> FiniteGroup:
    """Groupe diédral d'ordre `order` (D8 = symétries du carré)"""
    if order % 2 or order < 4:
        raise PreconditionError(f"ordre diédral invalide: {order}")
    n = order // 2
    if n == 2:
        return klein_four(label="D4")
    rotation = _cycle(range(1, n + 1))
    reflection = "".join(_cycle((i, n + 2 - i)) for i in range(2, n // 2 + 2) if i < n + 2 - i)
    return group_from_permutations(n, [rotation, reflection or "()"], label=f"D{order}")


def quaternion() -> FiniteGroup:
    return group_from_permutations(
        8, ["(1 2 3 4)(5 6 7 8)", "(1 5 3 7)(2 8 4 6)"], label="Q8"
    )


def klein_four(label: str = "V4") -> FiniteGroup:
    return group_from_permutations(4, ["(1 2)(3 4)", "(1 3)(2 4)"], label=label)


def elementary_abelian(p: int, rank: int) -> FiniteGroup:
    return direct_product([cyclic(p)] * rank, label=f"Z{p}^{rank}")


_PATTERNS = [
    (re.compile(r"^Z(\d+)\^(\d+)$"), lambda m: elementary_abelian(int(m[1]), int(m[2]))),
    (re.compile(r"^Z(\d+)$"), lambda m: cyclic(int(m[1]))),
    (re.compile(r"^C(\d+)$"), lambda m: cyclic(int(m[1]))),
    (re.compile(r"^S(\d+)$"), lambda m: symmetric(int(m[1]))),
    (re.compile(r"^A(\d+)$"), lambda m: alternating(int(m[1]))),
    (re.compile(r"^D(\d+)$"), lambda m: dihedral(int(m[1]))),
    (re.compile(r"^Q8$"), lambda m: quaternion()),
    (re.compile(r"^V4$"), lambda m: klein_four()),
]


@lru_cache(maxsize=None)
def named_group(name: str) -> FiniteGroup:
    """Groupe du catalogue par son nom (Z6, C3, Z2^3, S4, A5, D8, Q8, V4)"""
    for pattern, build in _PATTERNS:
        match = pattern.match(name)
        if match:
            return build(match)
    raise PreconditionError(f"groupe inconnu du catalogue: {name}")


# Petits groupes utilisés par les balayages exhaustifs des tests
SMALL_CATALOG = ("Z1", "Z2", "Z3", "Z4", "V4", "Z5", "Z6", "S3", "Z7", "Z8", "D8", "Q8")

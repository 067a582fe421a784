"""
Recherche d'homomorphismes par retour arrière: automorphismes, isomorphismes
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np
from loguru import logger

from src.config import setting
from src.errors import BudgetExceededError, PreconditionError
from src.groups import FiniteGroup, GroupHom, center, derived_subgroup


def _extend(
    source: FiniteGroup,
    target: FiniteGroup,
    gens: Sequence[int],
    images: Sequence[int],
) -> Optional[list[int]]:
    """Prolonge gens -> images au sous-groupe engendré; None si incohérent"""
    src, tgt = source.table, target.table
    img = [-1] * source.order
    img[0] = 0
    queue = deque([0])
    pairs = list(zip(gens, images))
    while queue:
        x = queue.popleft()
        fx = img[x]
        for s, t in pairs:
            y = src[x][s]
            v = tgt[fx][t]
            if img[y] < 0:
                img[y] = v
                queue.append(y)
            elif img[y] != v:
                return None
    return img


def search_homomorphisms(
    source: FiniteGroup,
    target: FiniteGroup,
    gens: Optional[Sequence[int]] = None,
    candidates: Optional[Sequence[Sequence[int]]] = None,
    injective: bool = False,
    accept: Optional[Callable[[list[int]], bool]] = None,
) -> Iterator[np.ndarray]:
    """
    Énumère les homomorphismes source -> target

    Args:
        gens: générateurs de la source (défaut: ceux du groupe)
        candidates: images admissibles de chaque générateur
            (défaut: éléments dont l'ordre divise celui du générateur)
        injective: élaguer dès que l'application partielle n'est pas injective
        accept: filtre appelé sur chaque application partielle (-1 = non défini)

    Returns:
        Itérateur de tables d'images complètes
    """
    gens = list(source.generators if gens is None else gens)
    if candidates is None:
        s_orders = source.element_orders
        t_orders = target.element_orders
        candidates = [np.flatnonzero(s_orders[s] % t_orders == 0).tolist() for s in gens]

    if not gens:
        if source.order != 1:
            raise PreconditionError(f"aucun générateur pour {source.label} d'ordre {source.order}")
        yield np.zeros(1, dtype=np.int64)
        return

    def descend(k: int, images: list[int]) -> Iterator[np.ndarray]:
        for t in candidates[k]:
            chosen = images + [int(t)]
            ext = _extend(source, target, gens[: k + 1], chosen)
            if ext is None:
                continue
            if injective:
                defined = [v for v in ext if v >= 0]
                if len(set(defined)) != len(defined):
                    continue
            if accept is not None and not accept(ext):
                continue
            if k + 1 == len(gens):
                if min(ext) < 0:
                    raise PreconditionError(f"les générateurs n'engendrent pas {source.label}")
                yield np.array(ext, dtype=np.int64)
            else:
                yield from descend(k + 1, chosen)

    yield from descend(0, [])


def all_homomorphisms(source: FiniteGroup, target: FiniteGroup) -> list[GroupHom]:
    return [GroupHom(source, target, img, check=False) for img in search_homomorphisms(source, target)]


@dataclass(frozen=True)
class AutomorphismGroup:
    """Aut(G) réalisé concrètement: tables[i] est la permutation de G de l'élément i"""

    base: FiniteGroup
    group: FiniteGroup
    tables: np.ndarray

    def index_of(self, table: Sequence[int]) -> int:
        key = np.asarray(table, dtype=np.int64).tobytes()
        return self._index[key]

    @property
    def _index(self) -> dict[bytes, int]:
        cache = self.__dict__.get("_index_cache")
        if cache is None:
            cache = {row.tobytes(): i for i, row in enumerate(self.tables)}
            object.__setattr__(self, "_index_cache", cache)
        return cache

    def as_hom(self, i: int) -> GroupHom:
        return GroupHom(self.base, self.base, self.tables[i], check=False)


def group_from_permutation_tables(tables: np.ndarray, label: str) -> tuple[FiniteGroup, dict[bytes, int]]:
    """
    Groupe de permutations donné par ses tables, produit "a puis b"

    Les tables doivent être triées, le neutre en tête, et former un groupe.
    """
    tables = np.ascontiguousarray(tables, dtype=np.int64)
    index = {row.tobytes(): i for i, row in enumerate(tables)}
    k = tables.shape[0]
    mul = np.empty((k, k), dtype=np.int64)
    for i in range(k):
        composed = tables[:, tables[i]]        # ligne j: tables[j][tables[i][x]]
        mul[i] = [index[row.tobytes()] for row in composed]
    return FiniteGroup(mul, label, check=False), index


def automorphism_group(G: FiniteGroup, budget: Optional[int] = None) -> AutomorphismGroup:
    """Aut(G) par retour arrière sur les images d'un ensemble générateur"""
    budget = setting(budget, "automorphism_budget")
    if G.order > budget:
        raise BudgetExceededError(f"|{G.label}| = {G.order} > budget d'automorphismes {budget}")
    orders = G.element_orders
    gens = list(G.generators)
    candidates = [np.flatnonzero(orders == orders[s]).tolist() for s in gens]
    found = sorted(
        (tuple(t.tolist()) for t in search_homomorphisms(G, G, gens, candidates, injective=True))
    )
    tables = np.array(found, dtype=np.int64).reshape(len(found), G.order)
    group, _ = group_from_permutation_tables(tables, f"Aut({G.label})")
    logger.debug(f"Aut({G.label}) d'ordre {group.order}")
    tables.flags.writeable = False
    return AutomorphismGroup(G, group, tables)


def _derived_orders(G: FiniteGroup) -> list[int]:
    orders = [G.order]
    current = G
    while True:
        D = derived_subgroup(current)
        if D.order == current.order:
            return orders
        orders.append(D.order)
        current, _ = D.as_group()


def _screen(G: FiniteGroup) -> tuple:
    return (G.order, G.order_profile(), center(G).order, tuple(_derived_orders(G)))


def is_isomorphic(
    G: FiniteGroup, H: FiniteGroup, budget: Optional[int] = None
) -> tuple[bool, Optional[GroupHom]]:
    """Test d'isomorphisme: filtrage par invariants, puis retour arrière"""
    budget = setting(budget, "isomorphism_budget")
    if max(G.order, H.order) > budget:
        raise BudgetExceededError(f"ordres {G.order}, {H.order} > budget d'isomorphisme {budget}")
    if _screen(G) != _screen(H):
        return False, None
    g_orders, h_orders = G.element_orders, H.element_orders
    gens = list(G.generators)
    candidates = [np.flatnonzero(h_orders == g_orders[s]).tolist() for s in gens]
    for img in search_homomorphisms(G, H, gens, candidates, injective=True):
        return True, GroupHom(G, H, img, check=False)
    return False, None

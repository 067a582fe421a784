"""
Groupes finis concrets: tables de Cayley, sous-groupes, homomorphismes, séries, quotients

Conventions: l'élément 0 est toujours le neutre, les applications agissent à
droite (x.then(y) signifie "x puis y") et a^b = b^-1 a b.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from math import prod
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from loguru import logger
from sympy import factorint, multiplicity
from sympy.combinatorics import Permutation

from src.config import setting
from src.errors import (
    BudgetExceededError,
    GroupAxiomError,
    MalformedPermutationError,
    NotAHomomorphismError,
    NotASubgroupError,
    NotNormalError,
    PreconditionError,
)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=np.int64)
    array.flags.writeable = False
    return array


class FiniteGroup:
    """Groupe fini donné par sa table de multiplication complète"""

    def __init__(
        self,
        mul: Any,
        label: str = "G",
        generators: Optional[Iterable[int]] = None,
        elements: Optional[Sequence[Any]] = None,
        check: bool = True,
    ):
        mul = np.asarray(mul, dtype=np.int64)
        if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or mul.shape[0] == 0:
            raise GroupAxiomError(f"{label}: table carrée non vide attendue, forme {mul.shape}")
        n = mul.shape[0]
        if mul.min() < 0 or mul.max() >= n:
            raise GroupAxiomError(f"{label}: indices hors de [0, {n})")

        self.mul = _frozen(mul)
        self.label = label
        self.elements = list(elements) if elements is not None else None
        self._generators = tuple(int(g) for g in generators) if generators is not None else None

        rows, cols = np.nonzero(self.mul == 0)
        inverse = np.full(n, -1, dtype=np.int64)
        inverse[rows] = cols
        self.inverse = _frozen(inverse)

        if check:
            self.check_axioms()

    # ------------------------------------------------------------------
    # Accès de base
    # ------------------------------------------------------------------

    @property
    def order(self) -> int:
        return int(self.mul.shape[0])

    @property
    def identity(self) -> int:
        return 0

    @cached_property
    def table(self) -> list[list[int]]:
        """Table en listes Python, pour les boucles élément par élément"""
        return self.mul.tolist()

    def op(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def conj(self, a: int, g: int) -> int:
        """a^g = g^-1 a g"""
        return self.table[self.inv(g)][self.table[a][g]]

    def commutator(self, a: int, b: int) -> int:
        """[a, b] = a^-1 b^-1 a b"""
        t = self.table
        return t[t[self.inv(a)][self.inv(b)]][t[a][b]]

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        result = 0
        for _ in range(k):
            result = self.table[result][a]
        return result

    def __repr__(self) -> str:
        return f"FiniteGroup({self.label}, order={self.order})"

    def format_element(self, x: int) -> str:
        if self.elements is None:
            return str(x)
        w = self.elements[x]
        if isinstance(w, Permutation):
            return format_cycles(w)
        if isinstance(w, tuple) and all(isinstance(c, Permutation) for c in w):
            return "|".join(format_cycles(c) for c in w)
        return str(w)

    @cached_property
    def element_index(self) -> dict[Any, int]:
        """Témoin -> indice (permutations indexées par leur forme tableau)"""
        if self.elements is None:
            return {}
        return {_witness_key(w): i for i, w in enumerate(self.elements)}

    def index_of(self, witness: Any) -> int:
        key = _witness_key(witness)
        if key not in self.element_index:
            raise PreconditionError(f"{self.label}: élément inconnu {witness}")
        return self.element_index[key]

    # ------------------------------------------------------------------
    # Axiomes
    # ------------------------------------------------------------------

    def check_axioms(self, full_check_order: Optional[int] = None, random_triples: Optional[int] = None):
        """Vérifie neutre, inverses, associativité (exhaustive en petite taille)"""
        n = self.order
        full_check_order = setting(full_check_order, "full_check_order")
        random_triples = setting(random_triples, "random_triples")
        ar = np.arange(n)

        if not (np.array_equal(self.mul[0], ar) and np.array_equal(self.mul[:, 0], ar)):
            raise GroupAxiomError(f"{self.label}: l'élément 0 n'est pas neutre")
        missing = np.flatnonzero(self.inverse < 0)
        if missing.size:
            raise GroupAxiomError(f"{self.label}: élément sans inverse", {"x": int(missing[0])})
        if not np.array_equal(self.mul[self.inverse, ar], np.zeros(n, dtype=np.int64)):
            bad = int(np.flatnonzero(self.mul[self.inverse, ar] != 0)[0])
            raise GroupAxiomError(f"{self.label}: inverse à gauche incorrect", {"x": bad})

        if n <= full_check_order:
            for a in range(n):
                left = self.mul[self.mul[a]]          # (ab)c, indexé par (b, c)
                right = self.mul[a][self.mul]         # a(bc)
                if not np.array_equal(left, right):
                    b, c = np.argwhere(left != right)[0]
                    raise GroupAxiomError(
                        f"{self.label}: table non associative", {"a": a, "b": int(b), "c": int(c)}
                    )
        else:
            rng = np.random.default_rng(setting(None, "random_seed"))
            a, b, c = rng.integers(0, n, size=(3, random_triples))
            left = self.mul[self.mul[a, b], c]
            right = self.mul[a, self.mul[b, c]]
            bad = np.flatnonzero(left != right)
            if bad.size:
                i = int(bad[0])
                raise GroupAxiomError(
                    f"{self.label}: table non associative",
                    {"a": int(a[i]), "b": int(b[i]), "c": int(c[i])},
                )

        if self._generators is not None:
            if any(g < 0 or g >= n for g in self._generators):
                raise GroupAxiomError(f"{self.label}: générateur hors table")
            if generate(self, self._generators).size != n:
                raise GroupAxiomError(f"{self.label}: les générateurs n'engendrent pas le groupe")

    # ------------------------------------------------------------------
    # Données dérivées (mises en cache, le groupe est immuable)
    # ------------------------------------------------------------------

    @property
    def generators(self) -> tuple[int, ...]:
        if self._generators is None:
            self._generators = tuple(small_generating_set(self, range(self.order)))
        return self._generators

    @cached_property
    def conjugation(self) -> np.ndarray:
        """C[g, a] = a^g"""
        return _frozen(self.mul[self.inverse[:, None], self.mul.T])

    @cached_property
    def commutators(self) -> np.ndarray:
        """K[x, y] = [x, y]"""
        inv = self.inverse
        return _frozen(self.mul[self.mul[inv[:, None], inv[None, :]], self.mul])

    @cached_property
    def element_orders(self) -> np.ndarray:
        n = self.order
        ar = np.arange(n)
        orders = np.zeros(n, dtype=np.int64)
        current = ar.copy()
        k = 1
        while (orders == 0).any():
            orders[(current == 0) & (orders == 0)] = k
            current = self.mul[current, ar]
            k += 1
        return _frozen(orders)

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def order_profile(self) -> tuple[tuple[int, int], ...]:
        values, counts = np.unique(self.element_orders, return_counts=True)
        return tuple(zip(values.tolist(), counts.tolist()))

    def whole(self) -> "Subgroup":
        return Subgroup(self, np.arange(self.order), check=False)

    def trivial(self) -> "Subgroup":
        return Subgroup(self, np.zeros(1, dtype=np.int64), check=False)

    def subgroup(self, gens: Iterable[int]) -> "Subgroup":
        """Sous-groupe engendré"""
        return Subgroup(self, generate(self, gens), check=False)


def same_group(G: FiniteGroup, H: FiniteGroup) -> bool:
    return G is H or (G.order == H.order and np.array_equal(G.mul, H.mul))


def _witness_key(w: Any) -> Any:
    if isinstance(w, Permutation):
        return tuple(w.array_form)
    if isinstance(w, tuple):
        return tuple(_witness_key(x) for x in w)
    return w


# ----------------------------------------------------------------------
# Sous-groupes
# ----------------------------------------------------------------------


def generate(G: FiniteGroup, gens: Iterable[int]) -> np.ndarray:
    """Éléments (triés) du sous-groupe engendré par gens"""
    gens_arr = np.array(sorted({int(g) for g in gens}), dtype=np.int64)
    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    frontier = np.zeros(1, dtype=np.int64)
    while frontier.size and gens_arr.size:
        reached = G.mul[np.ix_(frontier, gens_arr)].ravel()
        reached = np.unique(reached[~mask[reached]])
        mask[reached] = True
        frontier = reached
    return np.flatnonzero(mask)


def small_generating_set(G: FiniteGroup, candidates: Iterable[int]) -> list[int]:
    """Ensemble générateur glouton: élément d'ordre maximal hors du sous-groupe courant"""
    pool = sorted({int(c) for c in candidates if int(c) != 0}, key=lambda x: (-int(G.element_orders[x]), x))
    target = generate(G, pool).size
    gens: list[int] = []
    mask = np.zeros(G.order, dtype=bool)
    mask[0] = True
    size = 1
    for x in pool:
        if size == target:
            break
        if not mask[x]:
            gens.append(x)
            members = generate(G, gens)
            mask[members] = True
            size = members.size
    return gens


class Subgroup:
    """Sous-groupe d'un FiniteGroup, donné par ses éléments triés"""

    def __init__(self, parent: FiniteGroup, members: Iterable[int], check: bool = True):
        self.parent = parent
        if not isinstance(members, np.ndarray):
            members = np.fromiter((int(x) for x in members), dtype=np.int64)
        self.members = _frozen(np.unique(members.astype(np.int64)))
        if check:
            self._check_closed()

    def _check_closed(self):
        G, m = self.parent, self.members
        if m.size == 0 or m[0] != 0:
            raise NotASubgroupError("le neutre n'appartient pas à l'ensemble")
        mask = self.mask
        products = G.mul[np.ix_(m, m)]
        bad = np.argwhere(~mask[products])
        if bad.size:
            i, j = bad[0]
            raise NotASubgroupError(
                "ensemble non fermé pour le produit", {"a": int(m[i]), "b": int(m[j])}
            )
        bad_inv = np.flatnonzero(~mask[G.inverse[m]])
        if bad_inv.size:
            raise NotASubgroupError("ensemble non fermé pour l'inverse", {"a": int(m[bad_inv[0]])})

    @cached_property
    def mask(self) -> np.ndarray:
        mask = np.zeros(self.parent.order, dtype=bool)
        mask[self.members] = True
        return mask

    @property
    def order(self) -> int:
        return int(self.members.size)

    def __contains__(self, x: int) -> bool:
        return bool(self.mask[x])

    def __len__(self) -> int:
        return self.order

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.parent is other.parent and np.array_equal(self.members, other.members)

    def __hash__(self) -> int:
        return hash((id(self.parent), self.members.tobytes()))

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order} of {self.parent.label})"

    def issubset(self, other: "Subgroup") -> bool:
        return bool(other.mask[self.members].all())

    def intersection(self, other: "Subgroup") -> "Subgroup":
        return Subgroup(self.parent, self.members[other.mask[self.members]], check=False)

    def is_trivial(self) -> bool:
        return self.order == 1

    def is_whole(self) -> bool:
        return self.order == self.parent.order

    def generators(self) -> list[int]:
        return small_generating_set(self.parent, self.members)

    def normality_witness(self) -> Optional[tuple[int, int]]:
        """Premier couple (g, a) avec a^g hors du sous-groupe, ou None"""
        images = self.parent.conjugation[:, self.members]
        bad = np.argwhere(~self.mask[images])
        if bad.size == 0:
            return None
        g, i = bad[0]
        return int(g), int(self.members[i])

    def is_normal(self) -> bool:
        return self.normality_witness() is None

    def as_group(self, label: Optional[str] = None) -> tuple[FiniteGroup, "GroupHom"]:
        """Le sous-groupe comme groupe abstrait, avec son inclusion"""
        G, m = self.parent, self.members
        position = np.full(G.order, -1, dtype=np.int64)
        position[m] = np.arange(m.size)
        sub_mul = position[G.mul[np.ix_(m, m)]]
        elements = [G.elements[x] for x in m] if G.elements is not None else None
        H = FiniteGroup(sub_mul, label or f"<{G.label}>", elements=elements, check=False)
        return H, GroupHom(H, G, m, check=False)


# ----------------------------------------------------------------------
# Homomorphismes
# ----------------------------------------------------------------------


class GroupHom:
    """Homomorphisme total source -> target, donné par sa table d'images"""

    def __init__(self, source: FiniteGroup, target: FiniteGroup, image_of: Any, check: bool = True):
        image = np.asarray(image_of, dtype=np.int64)
        if image.shape != (source.order,):
            raise PreconditionError(
                f"table d'images de taille {image.shape} pour une source d'ordre {source.order}"
            )
        if image.size and (image.min() < 0 or image.max() >= target.order):
            raise PreconditionError("image hors du groupe but")
        self.source = source
        self.target = target
        self.image_of = _frozen(image)
        if check:
            self._check()

    def _check(self):
        img = self.image_of
        if img[0] != 0:
            raise NotAHomomorphismError("le neutre n'est pas envoyé sur le neutre", {"x": 0})
        lhs = img[self.source.mul]
        rhs = self.target.mul[img[:, None], img[None, :]]
        bad = np.argwhere(lhs != rhs)
        if bad.size:
            x, y = bad[0]
            raise NotAHomomorphismError(
                "f(xy) != f(x)f(y)",
                {"x": self.source.format_element(int(x)), "y": self.source.format_element(int(y))},
            )

    @classmethod
    def from_generators(
        cls,
        source: FiniteGroup,
        target: FiniteGroup,
        gens: Sequence[int],
        images: Sequence[int],
    ) -> "GroupHom":
        """
        Étend une application définie sur des générateurs

        Le parcours du graphe de Cayley vérifie la cohérence sur chaque arête;
        une incohérence lève NotAHomomorphismError avec le couple témoin.
        """
        if len(gens) != len(images):
            raise PreconditionError("autant d'images que de générateurs attendus")
        src, tgt = source.table, target.table
        pairs = [(int(s), int(t)) for s, t in zip(gens, images)]
        img = [-1] * source.order
        img[0] = 0
        queue = deque([0])
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
                    raise NotAHomomorphismError(
                        "les images des générateurs ne définissent pas un homomorphisme",
                        {"x": source.format_element(x), "generator": source.format_element(s)},
                    )
        if min(img) < 0:
            raise PreconditionError(f"les générateurs n'engendrent pas {source.label}")
        return cls(source, target, img, check=False)

    @classmethod
    def identity(cls, G: FiniteGroup) -> "GroupHom":
        return cls(G, G, np.arange(G.order), check=False)

    @classmethod
    def trivial(cls, source: FiniteGroup, target: FiniteGroup) -> "GroupHom":
        return cls(source, target, np.zeros(source.order, dtype=np.int64), check=False)

    def __call__(self, x: int) -> int:
        return int(self.image_of[x])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupHom):
            return NotImplemented
        return (
            same_group(self.source, other.source)
            and same_group(self.target, other.target)
            and np.array_equal(self.image_of, other.image_of)
        )

    def __hash__(self) -> int:
        return hash(self.image_of.tobytes())

    def __repr__(self) -> str:
        return f"GroupHom({self.source.label} -> {self.target.label})"

    def then(self, other: "GroupHom") -> "GroupHom":
        """Composition: self puis other"""
        if not same_group(self.target, other.source):
            raise PreconditionError(
                f"composition impossible: {self.target.label} != {other.source.label}"
            )
        return GroupHom(self.source, other.target, other.image_of[self.image_of], check=False)

    def kernel(self) -> Subgroup:
        return Subgroup(self.source, np.flatnonzero(self.image_of == 0), check=False)

    def image(self) -> Subgroup:
        return Subgroup(self.target, np.unique(self.image_of), check=False)

    def apply(self, S: Subgroup) -> Subgroup:
        return Subgroup(self.target, np.unique(self.image_of[S.members]), check=False)

    def preimage(self, S: Subgroup) -> Subgroup:
        return Subgroup(self.source, np.flatnonzero(S.mask[self.image_of]), check=False)

    @property
    def is_injective(self) -> bool:
        return np.unique(self.image_of).size == self.source.order

    @property
    def is_surjective(self) -> bool:
        return np.unique(self.image_of).size == self.target.order

    @property
    def is_isomorphism(self) -> bool:
        return self.is_injective and self.is_surjective

    def inverse(self) -> "GroupHom":
        if not self.is_isomorphism:
            raise PreconditionError("inverse d'un homomorphisme non bijectif")
        inv = np.empty(self.source.order, dtype=np.int64)
        inv[self.image_of] = np.arange(self.source.order)
        return GroupHom(self.target, self.source, inv, check=False)


# ----------------------------------------------------------------------
# Requêtes sur les sous-groupes et séries
# ----------------------------------------------------------------------


def _as_subgroup(G: FiniteGroup, S: Any) -> Subgroup:
    if isinstance(S, Subgroup):
        if S.parent is not G and not same_group(S.parent, G):
            raise PreconditionError("sous-groupe d'un autre groupe")
        return S
    return Subgroup(G, S)


def normal_closure(G: FiniteGroup, S: Any) -> Subgroup:
    """<S^G>"""
    S = _as_subgroup(G, S)
    conjugates = np.unique(G.conjugation[:, S.members])
    return Subgroup(G, generate(G, conjugates), check=False)


def center(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, np.flatnonzero((G.mul == G.mul.T).all(axis=1)), check=False)


def centralizer(G: FiniteGroup, S: Any) -> Subgroup:
    S = _as_subgroup(G, S)
    m = S.members
    mask = (G.mul[:, m] == G.mul[m, :].T).all(axis=1)
    return Subgroup(G, np.flatnonzero(mask), check=False)


def normalizer(G: FiniteGroup, S: Any) -> Subgroup:
    S = _as_subgroup(G, S)
    mask = S.mask[G.conjugation[:, S.members]].all(axis=1)
    return Subgroup(G, np.flatnonzero(mask), check=False)


def commutator_subgroup(G: FiniteGroup, A: Subgroup, B: Subgroup) -> Subgroup:
    """[A, B], engendré par les commutateurs [a, b]"""
    values = np.unique(G.commutators[np.ix_(A.members, B.members)])
    return Subgroup(G, generate(G, values), check=False)


def derived_subgroup(G: FiniteGroup) -> Subgroup:
    whole = G.whole()
    return commutator_subgroup(G, whole, whole)


@dataclass(frozen=True)
class SubgroupQueries:
    normal_closure: Subgroup
    center_of_G: Subgroup
    centralizer: Subgroup
    normalizer: Subgroup


def subgroup_queries(G: FiniteGroup, S: Any) -> SubgroupQueries:
    """Clôture normale, centre, centralisateur et normalisateur usuels"""
    S = _as_subgroup(G, S)
    return SubgroupQueries(
        normal_closure=normal_closure(G, S),
        center_of_G=center(G),
        centralizer=centralizer(G, S),
        normalizer=normalizer(G, S),
    )


DESCENDING = "descending-central"
UPPER = "upper-central"


@dataclass(frozen=True)
class SeriesTrace:
    kind: str
    terms: tuple[Subgroup, ...]
    stabilized_at: int

    @property
    def orders(self) -> list[int]:
        return [t.order for t in self.terms]

    @property
    def last(self) -> Subgroup:
        return self.terms[-1]


def central_series(G: FiniteGroup, kind: str = DESCENDING) -> SeriesTrace:
    """Série centrale descendante ou ascendante, jusqu'à stabilisation"""
    if kind == DESCENDING:
        whole = G.whole()
        terms = [whole]
        while True:
            nxt = commutator_subgroup(G, terms[-1], whole)
            terms.append(nxt)
            if nxt == terms[-2]:
                break
    elif kind == UPPER:
        terms = [G.trivial()]
        while True:
            Z = terms[-1]
            mask = Z.mask[G.commutators].all(axis=1)
            nxt = Subgroup(G, np.flatnonzero(mask), check=False)
            terms.append(nxt)
            if nxt == terms[-2]:
                break
    else:
        raise PreconditionError(f"type de série inconnu: {kind}")
    return SeriesTrace(kind=kind, terms=tuple(terms), stabilized_at=len(terms) - 2)


def hypercenter(G: FiniteGroup) -> Subgroup:
    return central_series(G, UPPER).last


def is_nilpotent(G: FiniteGroup) -> bool:
    return central_series(G, DESCENDING).last.is_trivial()


@dataclass(frozen=True)
class NilpotentClosureCheck:
    holds: bool
    nilpotent: bool
    normally_generates: bool
    equal: bool

    def __bool__(self) -> bool:
        return self.holds


def nilpotent_closure_check(N: FiniteGroup, T: Any) -> NilpotentClosureCheck:
    """Teste l'implication (N nilpotent et <T^N> = N) => T = N sur une instance"""
    T = _as_subgroup(N, T)
    nilpotent = is_nilpotent(N)
    generates = normal_closure(N, T).is_whole()
    equal = T.is_whole()
    if not nilpotent:
        logger.debug(f"{N.label} n'est pas nilpotent: implication non applicable")
    holds = (not (nilpotent and generates)) or equal
    return NilpotentClosureCheck(holds, nilpotent, generates, equal)


# ----------------------------------------------------------------------
# Quotients et produits
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class QuotientResult:
    group: FiniteGroup
    projection: GroupHom


def quotient(G: FiniteGroup, N: Any, label: Optional[str] = None) -> QuotientResult:
    """Groupe des classes G/N et surjection canonique"""
    N = _as_subgroup(G, N)
    witness = N.normality_witness()
    if witness is not None:
        g, a = witness
        raise NotNormalError(
            "sous-groupe non distingué",
            {"g": G.format_element(g), "a": G.format_element(a)},
        )
    labels = np.full(G.order, -1, dtype=np.int64)
    reps: list[int] = []
    for x in range(G.order):
        if labels[x] < 0:
            labels[G.mul[N.members, x]] = len(reps)
            reps.append(x)
    r = np.array(reps, dtype=np.int64)
    qmul = labels[G.mul[np.ix_(r, r)]]
    gens = sorted({int(labels[g]) for g in G.generators} - {0})
    Q = FiniteGroup(
        qmul,
        label or f"{G.label}/N{N.order}",
        generators=gens,
        elements=[G.elements[x] for x in reps] if G.elements is not None else None,
        check=False,
    )
    return QuotientResult(Q, GroupHom(G, Q, labels, check=False))


def abelianization(G: FiniteGroup) -> QuotientResult:
    return quotient(G, derived_subgroup(G), label=f"{G.label}_ab")


def direct_product(groups: Sequence[FiniteGroup], label: Optional[str] = None) -> FiniteGroup:
    """Produit direct; l'indice de (x_1, ..., x_k) suit l'ordre lexicographique"""
    label = label or " x ".join(G.label for G in groups) or "1"
    if not groups:
        return FiniteGroup(np.zeros((1, 1), dtype=np.int64), label, generators=(), elements=[()], check=False)
    sizes = tuple(G.order for G in groups)
    total = prod(sizes)
    budget_value = setting(None, "group_order_budget")
    if total > budget_value:
        raise BudgetExceededError(f"produit d'ordre {total} > budget {budget_value}")
    digits = np.stack(np.unravel_index(np.arange(total), sizes), axis=1)
    components = [
        G.mul[digits[:, k][:, None], digits[:, k][None, :]] for k, G in enumerate(groups)
    ]
    mul = np.ravel_multi_index(tuple(components), sizes)
    gens: list[int] = []
    for k, G in enumerate(groups):
        for s in G.generators:
            coords = [0] * len(groups)
            coords[k] = s
            gens.append(int(np.ravel_multi_index(tuple(coords), sizes)))
    elements = [
        tuple(
            (G.elements[d] if G.elements is not None else int(d)) for G, d in zip(groups, row)
        )
        for row in digits
    ]
    return FiniteGroup(mul, label, generators=gens, elements=elements, check=False)


def product_index(groups: Sequence[FiniteGroup], coords: Sequence[int]) -> int:
    return int(np.ravel_multi_index(tuple(int(c) for c in coords), tuple(G.order for G in groups)))


def cayley_from_right_actions(actions: np.ndarray) -> np.ndarray:
    """
    Table de Cayley à partir de l'action régulière droite des générateurs

    actions[j, x] est l'indice de x·s_j; l'élément 0 est le neutre.
    """
    n = actions.shape[1]
    table = actions.tolist()
    parent = [-1] * n
    via = [-1] * n
    seen = [False] * n
    seen[0] = True
    order = [0]
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for j, row in enumerate(table):
            y = row[x]
            if not seen[y]:
                seen[y] = True
                parent[y], via[y] = x, j
                order.append(y)
                queue.append(y)
    if len(order) != n:
        raise GroupAxiomError("action non transitive: les générateurs n'engendrent pas")
    mul = np.empty((n, n), dtype=np.int64)
    mul[:, 0] = np.arange(n)
    for y in order[1:]:
        mul[:, y] = actions[via[y]][mul[:, parent[y]]]
    return mul


# ----------------------------------------------------------------------
# Permutations
# ----------------------------------------------------------------------

_CYCLE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: int) -> Permutation:
    """'(1 2 3)(4 5)' -> Permutation (points 1..degree), '()' pour le neutre"""
    stripped = text.strip()
    if not stripped or _CYCLE.sub("", stripped).strip():
        raise MalformedPermutationError(f"notation en cycles invalide: {text!r}")
    cycles: list[list[int]] = []
    used: set[int] = set()
    for body in _CYCLE.findall(stripped):
        tokens = body.replace(",", " ").split()
        if not tokens:
            continue
        try:
            points = [int(t) for t in tokens]
        except ValueError as e:
            raise MalformedPermutationError(f"point non entier dans {text!r}") from e
        for p in points:
            if p < 1 or p > degree:
                raise MalformedPermutationError(f"point {p} hors de 1..{degree}", {"cycle": body})
            if p in used:
                raise MalformedPermutationError(f"point {p} répété", {"cycle": body})
            used.add(p)
        if len(points) > 1:
            cycles.append([p - 1 for p in points])
    return Permutation(cycles, size=degree)


def format_cycles(p: Permutation) -> str:
    cycles = p.cyclic_form
    if not cycles:
        return "()"
    return "".join("(" + " ".join(str(x + 1) for x in c) + ")" for c in cycles)


def group_from_permutations(
    degree: int,
    gens: Sequence[Any],
    label: str = "G",
    order_budget: Optional[int] = None,
) -> FiniteGroup:
    """Groupe engendré par des permutations de {1..degree}, témoins conservés"""
    if degree < 1:
        raise MalformedPermutationError(f"degré invalide: {degree}")
    order_budget = setting(order_budget, "group_order_budget")
    perms: list[tuple[int, ...]] = []
    for g in gens:
        if isinstance(g, str):
            g = parse_cycles(g, degree)
        if isinstance(g, Permutation):
            if g.size > degree:
                raise MalformedPermutationError(f"permutation de taille {g.size} > degré {degree}")
            arr = list(g.array_form) + list(range(g.size, degree))
        else:
            arr = [int(v) for v in g]
        if sorted(arr) != list(range(degree)):
            raise MalformedPermutationError(f"pas une permutation de degré {degree}: {g}")
        perms.append(tuple(arr))

    identity = tuple(range(degree))
    index = {identity: 0}
    elements = [identity]
    actions: list[list[int]] = [[] for _ in perms]
    x = 0
    while x < len(elements):
        current = elements[x]
        for j, p in enumerate(perms):
            # à droite: d'abord current, puis p
            y = tuple(p[i] for i in current)
            k = index.get(y)
            if k is None:
                k = len(elements)
                if k >= order_budget:
                    raise BudgetExceededError(
                        f"{label}: ordre > budget {order_budget}", {"degree": degree}
                    )
                index[y] = k
                elements.append(y)
            actions[j].append(k)
        x += 1

    n = len(elements)
    logger.debug(f"{label}: {n} éléments engendrés sur {degree} points")
    if perms:
        mul = cayley_from_right_actions(np.array(actions, dtype=np.int64).reshape(len(perms), n))
    else:
        mul = np.zeros((1, 1), dtype=np.int64)
    gen_indices = [index[p] for p in perms]
    return FiniteGroup(
        mul,
        label,
        generators=gen_indices,
        elements=[Permutation(list(e)) for e in elements],
        check=n <= setting(None, "full_check_order"),
    )


# ----------------------------------------------------------------------
# Groupes abéliens
# ----------------------------------------------------------------------


def abelian_invariants(G: FiniteGroup) -> list[int]:
    """Décomposition primaire (ordres des facteurs cycliques, triés)"""
    if not G.is_abelian:
        raise PreconditionError(f"{G.label} n'est pas abélien")
    orders = G.element_orders
    invariants: list[int] = []
    for p, v in sorted(factorint(G.order).items()):
        counts = [1]
        k = 1
        while counts[-1] < p ** v:
            counts.append(int(np.count_nonzero((p ** k) % orders == 0)))
            k += 1
        # r[k] = nombre de facteurs d'ordre >= p^k
        ranks = [0] + [int(multiplicity(p, counts[i] // counts[i - 1])) for i in range(1, len(counts))] + [0]
        for k in range(1, len(ranks) - 1):
            invariants.extend([p ** k] * (ranks[k] - ranks[k + 1]))
    return sorted(invariants)


def invariant_factors(primary: Sequence[int]) -> list[int]:
    by_prime: dict[int, list[int]] = {}
    for q in primary:
        p = min(factorint(q))
        by_prime.setdefault(p, []).append(q)
    depth = max((len(v) for v in by_prime.values()), default=0)
    factors = [1] * depth
    for powers in by_prime.values():
        for i, q in enumerate(sorted(powers, reverse=True)):
            factors[i] *= q
    return sorted(factors)


def abelian_display_name(primary: Sequence[int]) -> str:
    factors = invariant_factors(primary)
    if not factors:
        return "1"
    return " x ".join(f"Z{d}" for d in factors)

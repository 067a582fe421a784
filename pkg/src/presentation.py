"""
Présentations finies et énumération des classes (Todd-Coxeter)

Un mot est une suite d'indices signés: k > 0 désigne le générateur k-1,
-k son inverse. Dans la table des classes, la colonne 2i porte le
générateur i et la colonne 2i+1 son inverse.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from loguru import logger

from src.config import setting
from src.errors import EnumerationOverflowError, InvariantViolationError, PreconditionError
from src.groups import FiniteGroup, cayley_from_right_actions

Word = tuple[int, ...]

HLT = "hlt"
FELSCH = "felsch"


def free_reduce(word: Iterable[int]) -> Word:
    stack: list[int] = []
    for letter in word:
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def cyclic_reduce(word: Iterable[int]) -> Word:
    w = free_reduce(word)
    start, end = 0, len(w)
    while end - start > 1 and w[start] == -w[end - 1]:
        start += 1
        end -= 1
    return w[start:end]


def invert_word(word: Sequence[int]) -> Word:
    return tuple(-letter for letter in reversed(word))


def _column(letter: int) -> int:
    return 2 * (letter - 1) if letter > 0 else 2 * (-letter - 1) + 1


@dataclass(frozen=True)
class Presentation:
    """Présentation <x_1..x_n | relateurs>, relateurs librement réduits"""

    n_generators: int
    relators: tuple[Word, ...]
    label: str = "P"
    generator_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.n_generators < 0:
            raise PreconditionError("nombre de générateurs négatif")
        reduced = []
        for r in self.relators:
            for letter in r:
                if letter == 0 or abs(letter) > self.n_generators:
                    raise PreconditionError(
                        f"{self.label}: lettre {letter} hors de 1..{self.n_generators}",
                        {"relator": list(r)},
                    )
            reduced.append(free_reduce(r))
        object.__setattr__(self, "relators", tuple(reduced))
        if self.generator_names and len(self.generator_names) != self.n_generators:
            raise PreconditionError(f"{self.label}: noms de générateurs incohérents")

    def name(self, i: int) -> str:
        return self.generator_names[i] if self.generator_names else f"x{i + 1}"


@dataclass(frozen=True)
class CosetTable:
    """Table complète: entries[c, 2i] = c·x_i, entries[c, 2i+1] = c·x_i^-1"""

    n_cosets: int
    n_generators: int
    entries: np.ndarray

    def image(self, coset: int, word: Sequence[int]) -> int:
        for letter in word:
            coset = int(self.entries[coset, _column(letter)])
        return coset

    def closes(self, coset: int, word: Sequence[int]) -> bool:
        return self.image(coset, word) == coset


class CosetEnumerator:
    """État d'une énumération: table, union-find des coïncidences, pile de déductions"""

    def __init__(self, presentation: Presentation, subgroup_words: Sequence[Sequence[int]], max_cosets: int):
        if max_cosets < 1:
            raise PreconditionError("max_cosets doit être >= 1")
        self.presentation = presentation
        self.n_cols = 2 * presentation.n_generators
        self.relators = [[_column(l) for l in r] for r in presentation.relators if r]
        self.subgroup = [[_column(l) for l in free_reduce(w)] for w in subgroup_words if free_reduce(w)]
        self.max_cosets = max_cosets
        self.table: list[list[int]] = [[-1] * self.n_cols]
        self.parent: list[int] = [0]
        self.live = 1
        self.deductions: list[tuple[int, int]] = []
        self.record = False
        self.conjugates: list[list[list[int]]] = []

    # -- union-find ------------------------------------------------------

    def rep(self, k: int) -> int:
        parent = self.parent
        root = k
        while parent[root] != root:
            root = parent[root]
        while parent[k] != root:
            parent[k], k = root, parent[k]
        return root

    def merge(self, k: int, l: int, queue: list[int]):
        a, b = self.rep(k), self.rep(l)
        if a != b:
            mu, nu = min(a, b), max(a, b)
            self.parent[nu] = mu
            self.live -= 1
            queue.append(nu)

    def is_live(self, k: int) -> bool:
        return self.parent[k] == k

    # -- primitives --------------------------------------------------------

    def define(self, alpha: int, x: int):
        if self.live >= self.max_cosets:
            raise EnumerationOverflowError(self.live + 1, self.max_cosets)
        beta = len(self.table)
        self.table.append([-1] * self.n_cols)
        self.parent.append(beta)
        self.live += 1
        self.table[alpha][x] = beta
        self.table[beta][x ^ 1] = alpha
        if self.record:
            self.deductions.append((alpha, x))

    def coincidence(self, alpha: int, beta: int):
        table = self.table
        queue: list[int] = []
        self.merge(alpha, beta, queue)
        i = 0
        while i < len(queue):
            gamma = queue[i]
            i += 1
            row = table[gamma]
            for x in range(self.n_cols):
                delta = row[x]
                if delta < 0:
                    continue
                if table[delta][x ^ 1] == gamma:
                    table[delta][x ^ 1] = -1
                mu, nu = self.rep(gamma), self.rep(delta)
                if table[mu][x] >= 0:
                    self.merge(nu, table[mu][x], queue)
                elif table[nu][x ^ 1] >= 0:
                    self.merge(mu, table[nu][x ^ 1], queue)
                else:
                    table[mu][x] = nu
                    table[nu][x ^ 1] = mu
                    if self.record:
                        self.deductions.append((mu, x))

    def scan_and_fill(self, alpha: int, w: list[int]):
        table = self.table
        f, i, b, j = alpha, 0, alpha, len(w) - 1
        while True:
            while i <= j and table[f][w[i]] >= 0:
                f = table[f][w[i]]
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                return
            while j >= i and table[b][w[j] ^ 1] >= 0:
                b = table[b][w[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                table[f][w[i]] = b
                table[b][w[i] ^ 1] = f
                if self.record:
                    self.deductions.append((f, w[i]))
                return
            self.define(f, w[i])

    def scan(self, alpha: int, w: list[int]):
        table = self.table
        f, i, b, j = alpha, 0, alpha, len(w) - 1
        while i <= j and table[f][w[i]] >= 0:
            f = table[f][w[i]]
            i += 1
        if i > j:
            if f != b:
                self.coincidence(f, b)
            return
        while j >= i and table[b][w[j] ^ 1] >= 0:
            b = table[b][w[j] ^ 1]
            j -= 1
        if j < i:
            self.coincidence(f, b)
        elif i == j:
            table[f][w[i]] = b
            table[b][w[i] ^ 1] = f
            if self.record:
                self.deductions.append((f, w[i]))

    # -- stratégies --------------------------------------------------------

    def run_hlt(self):
        for w in self.subgroup:
            self.scan_and_fill(0, w)
        alpha = 0
        while alpha < len(self.table):
            if self.is_live(alpha):
                for w in self.relators:
                    if not self.is_live(alpha):
                        break
                    self.scan_and_fill(alpha, w)
                if self.is_live(alpha):
                    row = self.table[alpha]
                    for x in range(self.n_cols):
                        if row[x] < 0:
                            self.define(alpha, x)
            alpha += 1

    def _build_conjugates(self):
        buckets: list[set[tuple[int, ...]]] = [set() for _ in range(self.n_cols)]
        for r in self.presentation.relators:
            c = cyclic_reduce(r)
            if not c:
                continue
            for word in (c, invert_word(c)):
                for k in range(len(word)):
                    rotated = word[k:] + word[:k]
                    buckets[_column(rotated[0])].add(tuple(_column(l) for l in rotated))
        self.conjugates = [[list(w) for w in sorted(b)] for b in buckets]

    def process_deductions(self):
        while self.deductions:
            alpha, x = self.deductions.pop()
            if not self.is_live(alpha):
                continue
            for w in self.conjugates[x]:
                self.scan(alpha, w)
                if not self.is_live(alpha):
                    break
            if not self.is_live(alpha):
                continue
            beta = self.table[alpha][x]
            if beta >= 0 and self.is_live(beta):
                for w in self.conjugates[x ^ 1]:
                    self.scan(beta, w)
                    if not self.is_live(beta):
                        break

    def run_felsch(self):
        self.record = True
        self._build_conjugates()
        for w in self.subgroup:
            self.scan_and_fill(0, w)
            self.process_deductions()
        alpha = 0
        while alpha < len(self.table):
            x = 0
            while self.is_live(alpha) and x < self.n_cols:
                if self.table[alpha][x] < 0:
                    self.define(alpha, x)
                    self.process_deductions()
                x += 1
            alpha += 1
        # une passe de balayage ferme les derniers relateurs
        for alpha in range(len(self.table)):
            for w in self.relators:
                if not self.is_live(alpha):
                    break
                self.scan(alpha, w)
            self.process_deductions()

    # -- résultat ----------------------------------------------------------

    def compact(self) -> CosetTable:
        live = [a for a in range(len(self.table)) if self.is_live(a)]
        renumber = {a: i for i, a in enumerate(live)}
        entries = np.empty((len(live), self.n_cols), dtype=np.int64)
        for i, a in enumerate(live):
            row = self.table[a]
            for x in range(self.n_cols):
                if row[x] < 0:
                    raise InvariantViolationError(
                        "table incomplète après énumération", {"coset": a, "column": x}
                    )
                entries[i, x] = renumber[self.rep(row[x])]
        entries.flags.writeable = False
        return CosetTable(len(live), self.presentation.n_generators, entries)


def coset_enumerate(
    P: Presentation,
    subgroup_words: Sequence[Sequence[int]] = (),
    max_cosets: Optional[int] = None,
    strategy: Optional[str] = None,
) -> CosetTable:
    """
    Énumère les classes du sous-groupe engendré par subgroup_words

    Args:
        P: présentation
        subgroup_words: mots engendrant le sous-groupe (vide: sous-groupe trivial)
        max_cosets: borne sur les classes vivantes (défaut: configuration)
        strategy: "hlt" ou "felsch" (défaut: configuration)

    Returns:
        Table complète, compactée, la ligne 0 étant le sous-groupe
    """
    if not P.relators and P.n_generators > 0 and max_cosets is None:
        raise PreconditionError(f"{P.label}: groupe libre, borne explicite max_cosets requise")
    max_cosets = setting(max_cosets, "max_cosets")
    strategy = setting(strategy, "coset_strategy")
    enumerator = CosetEnumerator(P, subgroup_words, max_cosets)
    if strategy == HLT:
        enumerator.run_hlt()
    elif strategy == FELSCH:
        enumerator.run_felsch()
    else:
        raise PreconditionError(f"stratégie d'énumération inconnue: {strategy}")
    table = enumerator.compact()
    logger.debug(
        f"{P.label}: {table.n_cosets} classes ({len(enumerator.table)} définies, stratégie {strategy})"
    )
    return table


@dataclass(frozen=True)
class RealizedGroup:
    group: FiniteGroup
    generator_images: tuple[int, ...]


def realize(
    P: Presentation,
    max_cosets: Optional[int] = None,
    strategy: Optional[str] = None,
    label: Optional[str] = None,
) -> RealizedGroup:
    """Groupe fini défini par P, via la représentation régulière sur les classes du trivial"""
    table = coset_enumerate(P, (), max_cosets, strategy)
    n = table.n_cosets
    if P.n_generators == 0:
        mul = np.zeros((1, 1), dtype=np.int64)
    else:
        mul = cayley_from_right_actions(np.ascontiguousarray(table.entries[:, 0::2].T))
    images = tuple(int(table.entries[0, 2 * i]) for i in range(P.n_generators))
    group = FiniteGroup(
        mul,
        label or P.label,
        generators=sorted(set(images) - {0}),
        check=n <= setting(None, "full_check_order"),
    )
    return RealizedGroup(group, images)


def word_value(G: FiniteGroup, generator_images: Sequence[int], w: Sequence[int]) -> int:
    """Évalue w de gauche à droite"""
    x = 0
    t = G.table
    for letter in w:
        g = generator_images[abs(letter) - 1]
        if letter < 0:
            g = G.inv(g)
        x = t[x][g]
    return x


def presentation_of(G: FiniteGroup, gens: Sequence[int], label: Optional[str] = None) -> Presentation:
    """Présentation par le graphe de Cayley: un relateur par arête hors de l'arbre couvrant"""
    gens = [int(s) for s in gens]
    t = G.table
    words: list[Optional[Word]] = [None] * G.order
    words[0] = ()
    tree: set[tuple[int, int]] = set()
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for i, s in enumerate(gens):
            y = t[x][s]
            if words[y] is None:
                words[y] = words[x] + (i + 1,)
                tree.add((x, i))
                queue.append(y)
    if any(w is None for w in words):
        raise PreconditionError(f"les générateurs n'engendrent pas {G.label}")

    relators: list[Word] = []
    seen: set[Word] = set()
    for x in range(G.order):
        for i, s in enumerate(gens):
            if (x, i) in tree:
                continue
            r = free_reduce(words[x] + (i + 1,) + invert_word(words[t[x][s]]))
            if r and r not in seen:
                seen.add(r)
                relators.append(r)
    return Presentation(len(gens), tuple(relators), label or f"pres({G.label})")

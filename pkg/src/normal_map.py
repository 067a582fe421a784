"""
Applications normales: validation, structures canoniques, morphismes, produits fibrés

Une application normale est un homomorphisme n: M -> G muni d'une action
à droite de G sur M (a -> a^g) telle que
  NM1: n(a^g) = n(a)^g
  NM2: a^{n(b)} = a^b (conjugaison dans M)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from loguru import logger

from src.config import setting
from src.errors import (
    BudgetExceededError,
    FactorizationError,
    InvariantSubgroupError,
    InvariantViolationError,
    PreconditionError,
)
from src.groups import (
    FiniteGroup,
    GroupHom,
    Subgroup,
    center,
    direct_product,
    same_group,
)
from src.morphisms import automorphism_group, search_homomorphisms


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Verdict:
    """Résultat d'une validation: vide = valide"""

    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def kinds(self) -> list[str]:
        return [v.kind for v in self.violations]

    def __add__(self, other: "Verdict") -> "Verdict":
        return Verdict(self.violations + other.violations)


class NormalMap:
    """n: M -> G avec l'action de G sur M en table dense (action[g, a] = a^g)"""

    def __init__(self, n: GroupHom, action: Any):
        action = np.asarray(action, dtype=np.int64)
        if action.shape != (n.target.order, n.source.order):
            raise PreconditionError(
                f"table d'action de forme {action.shape}, attendu {(n.target.order, n.source.order)}"
            )
        action = np.ascontiguousarray(action)
        action.flags.writeable = False
        self.n = n
        self.action = action

    @property
    def M(self) -> FiniteGroup:
        return self.n.source

    @property
    def G(self) -> FiniteGroup:
        return self.n.target

    def act(self, a: int, g: int) -> int:
        return int(self.action[g, a])

    def automorphism(self, g: int) -> GroupHom:
        return GroupHom(self.M, self.M, self.action[g], check=False)

    def __repr__(self) -> str:
        return f"NormalMap({self.M.label} -> {self.G.label})"


@dataclass(frozen=True)
class NormalMorphism:
    """Carré (mu: M1 -> M2, eta: G1 -> G2)"""

    mu: GroupHom
    eta: GroupHom


def _first(mask: np.ndarray) -> Optional[tuple[int, ...]]:
    bad = np.argwhere(mask)
    if bad.size == 0:
        return None
    return tuple(int(v) for v in bad[0])


def validate_normal_map(candidate: NormalMap) -> Verdict:
    """Vérifie exhaustivement que l'action est un homomorphisme G -> Aut(M), puis NM1 et NM2"""
    M, G, A = candidate.M, candidate.G, candidate.action
    n_img = candidate.n.image_of
    violations: list[Violation] = []

    for g in range(G.order):
        row = A[g]
        if np.unique(row).size != M.order:
            violations.append(Violation("action-not-bijective", {"g": g}))
            break
        hit = _first(row[M.mul] != M.mul[row[:, None], row[None, :]])
        if hit is not None:
            a, b = hit
            violations.append(Violation("action-not-automorphism", {"g": g, "a": a, "b": b}))
            break

    if not np.array_equal(A[0], np.arange(M.order)):
        a = int(np.flatnonzero(A[0] != np.arange(M.order))[0])
        violations.append(Violation("action-identity", {"g": 0, "a": a}))

    for g in range(G.order):
        # a^{gh} = (a^g)^h, indexé par (h, a)
        hit = _first(A[G.mul[g]] != A[:, A[g]])
        if hit is not None:
            h, a = hit
            violations.append(Violation("action-not-homomorphism", {"g": g, "h": h, "a": a}))
            break

    hit = _first(n_img[A] != G.conjugation[:, n_img])
    if hit is not None:
        g, a = hit
        violations.append(Violation("NM1", {"a": a, "g": g}))

    hit = _first(A[n_img] != M.conjugation)
    if hit is not None:
        b, a = hit
        violations.append(Violation("NM2", {"a": a, "b": b}))

    return Verdict(tuple(violations))


def normal_map_properties(nm: NormalMap) -> Verdict:
    """ker(n) central et G-invariant, n(M) distingué dans G"""
    violations: list[Violation] = []
    K = nm.n.kernel()
    Z = center(nm.M)
    outside = K.members[~Z.mask[K.members]]
    if outside.size:
        violations.append(Violation("kernel-not-central", {"a": int(outside[0])}))
    hit = _first(~K.mask[nm.action[:, K.members]])
    if hit is not None:
        g, i = hit
        violations.append(Violation("kernel-not-invariant", {"g": g, "a": int(K.members[i])}))
    witness = nm.n.image().normality_witness()
    if witness is not None:
        violations.append(Violation("image-not-normal", {"g": witness[0], "x": witness[1]}))
    return Verdict(tuple(violations))


def _validated(nm: NormalMap, what: str) -> NormalMap:
    verdict = validate_normal_map(nm)
    if not verdict.ok:
        first = verdict.violations[0]
        raise InvariantViolationError(f"{what}: structure normale invalide ({first.kind})", first.witness)
    return nm


def conjugation_normal_map(n: GroupHom) -> NormalMap:
    """Inclusion injective d'image distinguée, action par conjugaison"""
    if not n.is_injective:
        raise PreconditionError("injection attendue")
    image = n.image()
    witness = image.normality_witness()
    if witness is not None:
        raise PreconditionError("image non distinguée", {"g": witness[0], "x": witness[1]})
    back = np.full(n.target.order, -1, dtype=np.int64)
    back[n.image_of] = np.arange(n.source.order)
    action = back[n.target.conjugation[:, n.image_of]]
    return _validated(NormalMap(n, action), "conjugaison")


def canonical_structure_surjective_central(n: GroupHom) -> NormalMap:
    """L'unique structure normale d'une surjection à noyau central: a^g = a^b, n(b) = g"""
    if not n.is_surjective:
        raise PreconditionError(f"{n.source.label} -> {n.target.label} n'est pas surjectif")
    K = n.kernel()
    Z = center(n.source)
    outside = K.members[~Z.mask[K.members]]
    if outside.size:
        raise PreconditionError(
            "noyau non central", {"a": n.source.format_element(int(outside[0]))}
        )
    order = n.source.order
    preimage = np.full(n.target.order, -1, dtype=np.int64)
    preimage[n.image_of[::-1]] = np.arange(order)[::-1]
    action = n.source.conjugation[preimage]
    return _validated(NormalMap(n, action), "structure canonique")


def restrict_to_invariant(nm: NormalMap, N: Subgroup) -> NormalMap:
    """Restriction à un sous-groupe G-invariant de M"""
    if not same_group(N.parent, nm.M):
        raise PreconditionError("sous-groupe d'un autre groupe")
    hit = _first(~N.mask[nm.action[:, N.members]])
    if hit is not None:
        g, i = hit
        raise InvariantSubgroupError(
            "sous-groupe non stable sous l'action",
            {"g": nm.G.format_element(g), "a": nm.M.format_element(int(N.members[i]))},
        )
    H, inclusion = N.as_group()
    position = np.full(nm.M.order, -1, dtype=np.int64)
    position[N.members] = np.arange(N.order)
    action = position[nm.action[:, N.members]]
    return _validated(NormalMap(inclusion.then(nm.n), action), "restriction")


def extend_by_abelian(nm: NormalMap, V: FiniteGroup) -> NormalMap:
    """n: M x V -> G, (a, v) -> n(a), action (a, v)^g = (a^g, v)"""
    if not V.is_abelian:
        raise PreconditionError(f"{V.label} n'est pas abélien")
    P = direct_product([nm.M, V], label=f"{nm.M.label} x {V.label}")
    idx = np.arange(P.order)
    a, v = idx // V.order, idx % V.order
    n = GroupHom(P, nm.G, nm.n.image_of[a], check=False)
    action = nm.action[:, a] * V.order + v[None, :]
    return _validated(NormalMap(n, action), "extension abélienne")


def validate_normal_morphism(m: NormalMorphism, src: NormalMap, dst: NormalMap) -> Verdict:
    """Carré commutatif et équivariance mu(a^g) = mu(a)^{eta(g)}"""
    if not (
        same_group(m.mu.source, src.M)
        and same_group(m.mu.target, dst.M)
        and same_group(m.eta.source, src.G)
        and same_group(m.eta.target, dst.G)
    ):
        return Verdict((Violation("shape", {}),))
    violations: list[Violation] = []
    lhs = dst.n.image_of[m.mu.image_of]
    rhs = m.eta.image_of[src.n.image_of]
    bad = np.flatnonzero(lhs != rhs)
    if bad.size:
        violations.append(Violation("square", {"a": int(bad[0])}))
    hit = _first(m.mu.image_of[src.action] != dst.action[m.eta.image_of][:, m.mu.image_of])
    if hit is not None:
        g, a = hit
        violations.append(Violation("equivariance", {"a": a, "g": g}))
    return Verdict(tuple(violations))


def identity_morphism(nm: NormalMap) -> NormalMorphism:
    return NormalMorphism(GroupHom.identity(nm.M), GroupHom.identity(nm.G))


@dataclass(frozen=True)
class PullbackResult:
    nm: NormalMap
    pi2: NormalMorphism
    psi: Optional[GroupHom] = None


def pullback(
    n_prime: NormalMap,
    eta: GroupHom,
    phi: Optional[GroupHom] = None,
    psi_prime: Optional[GroupHom] = None,
) -> PullbackResult:
    """
    Produit fibré M = {(m', h) : n'(m') = eta(h)} au-dessus de G

    Args:
        n_prime: application normale M' -> G'
        eta: homomorphisme G -> G'
        phi, psi_prime: carré compatible optionnel (phi: Gamma -> G,
            psi_prime: Gamma -> M' avec psi_prime puis n' = phi puis eta)

    Returns:
        L'application normale M -> G, la projection pi2 et, si le carré est
        fourni, l'homomorphisme induit Gamma -> M
    """
    Mp, G = n_prime.M, eta.source
    if not same_group(eta.target, n_prime.G):
        raise PreconditionError("eta doit arriver dans la base de n'")
    n_img, eta_img = n_prime.n.image_of, eta.image_of

    # couples triés par (h, m')
    hs, ms = np.nonzero(eta_img[:, None] == n_img[None, :])
    size = hs.size
    position = np.full(G.order * Mp.order, -1, dtype=np.int64)
    position[hs * Mp.order + ms] = np.arange(size)

    prod_m = Mp.mul[ms[:, None], ms[None, :]]
    prod_h = G.mul[hs[:, None], hs[None, :]]
    mul = position[prod_h * Mp.order + prod_m]
    elements = [(int(m), int(h)) for h, m in zip(hs, ms)]
    P = FiniteGroup(mul, f"{Mp.label} x_{n_prime.G.label} {G.label}", elements=elements, check=False)

    new_m = n_prime.action[eta_img][:, ms]
    new_h = G.conjugation[:, hs]
    action = position[new_h * Mp.order + new_m]
    nm = _validated(NormalMap(GroupHom(P, G, hs, check=False), action), "produit fibré")
    pi2 = NormalMorphism(GroupHom(P, Mp, ms, check=False), eta)

    psi = None
    if phi is not None and psi_prime is not None:
        if not np.array_equal(n_img[psi_prime.image_of], eta_img[phi.image_of]):
            raise FactorizationError("le carré psi' puis n' = phi puis eta ne commute pas")
        psi = GroupHom(phi.source, P, position[phi.image_of * Mp.order + psi_prime.image_of])
        if not (psi.then(nm.n) == phi and psi.then(pi2.mu) == psi_prime):
            raise InvariantViolationError("diagramme du produit fibré non commutatif")
    logger.debug(f"produit fibré d'ordre {size}")
    return PullbackResult(nm, pi2, psi)


def all_normal_structures(n: GroupHom, limit: Optional[int] = None) -> list[NormalMap]:
    """
    Oracle exhaustif: toutes les actions G -> Aut(M) satisfaisant NM1 et NM2

    Les images des générateurs de G sont préfiltrées par NM1, condition
    nécessaire vérifiée générateur par générateur.
    """
    limit = setting(limit, "oracle_limit")
    M, G = n.source, n.target
    if M.order > limit:
        raise BudgetExceededError(f"oracle limité à |M| <= {limit}")
    aut = automorphism_group(M, budget=M.order)
    n_img = n.image_of
    gens = list(G.generators)
    candidates = []
    for t in gens:
        target_row = G.conjugation[t][n_img]
        ok = np.flatnonzero((n_img[aut.tables] == target_row[None, :]).all(axis=1))
        candidates.append(ok.tolist())
    found: list[NormalMap] = []
    for ell in search_homomorphisms(G, aut.group, gens, candidates):
        nm = NormalMap(n, aut.tables[ell])
        if validate_normal_map(nm).ok:
            found.append(nm)
    return found

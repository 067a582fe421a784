"""
Normalisateur injectif N(phi): couples compatibles (tau, g) de Aut(Gamma) x G

(tau, g) est compatible lorsque phi(gamma)^g = phi(tau(gamma)) pour tout gamma.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger

from src.config import setting
from src.errors import (
    BudgetExceededError,
    FactorizationError,
    InvariantViolationError,
    NotAHomomorphismError,
)
from src.groups import (
    FiniteGroup,
    GroupHom,
    center,
    centralizer,
    normalizer,
    same_group,
)
from src.morphisms import AutomorphismGroup, automorphism_group, search_homomorphisms
from src.normal_map import NormalMap, Verdict, Violation, validate_normal_map


@dataclass(frozen=True)
class NormalizerResult:
    phi: GroupHom
    N: FiniteGroup
    pairs: np.ndarray           # pairs[i] = (indice de tau dans aut_gamma, g)
    phi_tilde: NormalMap        # Gamma -> N, N agit par gamma^(tau, g) = tau(gamma)
    p_phi: GroupHom             # N -> G
    aut_gamma: AutomorphismGroup
    position: np.ndarray        # position[g * |Aut| + tau] = indice du couple, -1 sinon

    def pair_index(self, tau: int, g: int) -> int:
        return int(self.position[g * self.aut_gamma.tables.shape[0] + tau])

    @property
    def action(self) -> np.ndarray:
        return self.phi_tilde.action


@dataclass(frozen=True)
class SectionResult:
    found: bool
    section: Optional[GroupHom] = None
    induced_action: Optional[NormalMap] = None


def injective_normalizer(phi: GroupHom, budget: Optional[int] = None) -> NormalizerResult:
    """
    Construit N(phi), phi_tilde: gamma -> (c_gamma, phi(gamma)) et p_phi: (tau, g) -> g

    Les couples sont triés par (g, tau), le neutre (id, 1) en tête.
    """
    budget = setting(budget, "automorphism_budget")
    Gamma, G = phi.source, phi.target
    if Gamma.order > budget:
        raise BudgetExceededError(f"|{Gamma.label}| = {Gamma.order} > budget d'automorphismes {budget}")
    aut = automorphism_group(Gamma, budget)
    tables = aut.tables
    n_aut = tables.shape[0]
    phi_img = phi.image_of
    gens = list(Gamma.generators)
    NG = normalizer(G, phi.image())

    found: list[tuple[int, int]] = []
    for g in NG.members:
        wanted = G.conjugation[g, phi_img]
        on_gens = (phi_img[tables[:, gens]] == wanted[gens][None, :]).all(axis=1)
        for tau in np.flatnonzero(on_gens):
            if not np.array_equal(phi_img[tables[tau]], wanted):
                raise InvariantViolationError(
                    "compatibilité vraie sur les générateurs mais pas sur Gamma", {"tau": int(tau), "g": int(g)}
                )
            found.append((int(g), int(tau)))
    pairs = np.array([(tau, g) for g, tau in sorted(found)], dtype=np.int64).reshape(len(found), 2)
    T, Gs = pairs[:, 0], pairs[:, 1]

    position = np.full(G.order * n_aut, -1, dtype=np.int64)
    position[Gs * n_aut + T] = np.arange(len(pairs))
    mul = position[G.mul[Gs[:, None], Gs[None, :]] * n_aut + aut.group.mul[T[:, None], T[None, :]]]
    if (mul < 0).any():
        i, j = np.argwhere(mul < 0)[0]
        raise InvariantViolationError("produit de couples compatibles non compatible", {"i": int(i), "j": int(j)})
    elements = [(int(t), G.format_element(int(g))) for t, g in pairs]
    N = FiniteGroup(
        mul,
        f"N({Gamma.label}->{G.label})",
        elements=elements,
        check=len(pairs) <= setting(None, "full_check_order"),
    )

    inner = np.array([aut.index_of(Gamma.conjugation[x]) for x in range(Gamma.order)], dtype=np.int64)
    tilde_img = position[phi_img * n_aut + inner]
    if (tilde_img < 0).any():
        raise InvariantViolationError("(c_gamma, phi(gamma)) non compatible")
    phi_tilde = NormalMap(GroupHom(Gamma, N, tilde_img, check=False), tables[T])
    p_phi = GroupHom(N, G, Gs, check=False)
    result = NormalizerResult(phi, N, pairs, phi_tilde, p_phi, aut, position)

    if not phi_tilde.n.then(p_phi) == phi:
        raise InvariantViolationError("phi_tilde puis p_phi ne redonne pas phi")
    verdict = validate_normal_map(phi_tilde)
    if not verdict.ok:
        raise InvariantViolationError(f"phi_tilde invalide: {verdict.kinds()[0]}", verdict.violations[0].witness)
    logger.info(f"N({Gamma.label} -> {G.label}) d'ordre {N.order}, |Aut| = {n_aut}")
    return result


def universal_morphism_in(nr: NormalizerResult, n: NormalMap, f: GroupHom) -> GroupHom:
    """f_tilde: H -> N(phi), h -> (action de h sur Gamma, f(h))"""
    Gamma = nr.phi.source
    if not same_group(n.M, Gamma) or not same_group(f.source, n.G) or not same_group(f.target, nr.phi.target):
        raise FactorizationError("factorisation de forme incompatible")
    if not n.n.then(f) == nr.phi:
        raise FactorizationError("n puis f ne redonne pas phi")
    H = n.G
    image = np.empty(H.order, dtype=np.int64)
    for h in range(H.order):
        try:
            tau = nr.aut_gamma.index_of(n.action[h])
        except KeyError as e:
            raise FactorizationError("l'action n'est pas un automorphisme", {"h": h}) from e
        k = nr.pair_index(tau, f(h))
        if k < 0:
            raise FactorizationError("couple (action, f(h)) non compatible", {"h": h})
        image[h] = k
    try:
        f_tilde = GroupHom(H, nr.N, image)
    except NotAHomomorphismError as e:
        raise FactorizationError("l'action ne définit pas un homomorphisme", e.witness) from e
    if not n.n.then(f_tilde) == nr.phi_tilde.n or not f_tilde.then(nr.p_phi) == f:
        raise InvariantViolationError("f_tilde ne commute pas avec les deux facteurs")
    if not np.array_equal(nr.action[image], n.action):
        raise InvariantViolationError("f_tilde ne respecte pas les actions")
    return f_tilde


def count_universal_morphisms_in(
    nr: NormalizerResult, n: NormalMap, f: GroupHom, limit: Optional[int] = None
) -> int:
    """Dénombre les homomorphismes H -> N(phi) commutant avec les deux facteurs et les actions"""
    limit = setting(limit, "uniqueness_limit")
    H = n.G
    if H.order * nr.N.order > limit:
        raise BudgetExceededError(f"|H| * |N| = {H.order * nr.N.order} > {limit}")
    gens = list(H.generators)
    Gs = nr.pairs[:, 1]
    candidates = [np.flatnonzero(Gs == f(h)).tolist() for h in gens]
    count = 0
    for img in search_homomorphisms(H, nr.N, gens, candidates):
        if not np.array_equal(nr.p_phi.image_of[img], f.image_of):
            continue
        if not np.array_equal(img[n.n.image_of], nr.phi_tilde.n.image_of):
            continue
        if np.array_equal(nr.action[img], n.action):
            count += 1
    return count


def detect_normal_structure(
    phi: GroupHom, nr: Optional[NormalizerResult] = None, budget: Optional[int] = None
) -> SectionResult:
    """Cherche une section s de p_phi avec phi puis s = phi_tilde; s induit alors une structure normale sur phi"""
    budget = setting(budget, "section_budget")
    if nr is None:
        nr = injective_normalizer(phi)
    if nr.N.order > budget:
        raise BudgetExceededError(f"|N(phi)| = {nr.N.order} > budget de sections {budget}")
    G = phi.target
    Gs = nr.pairs[:, 1]
    tilde = nr.phi_tilde.n.image_of
    phi_img = phi.image_of
    gens = list(G.generators)
    candidates = [np.flatnonzero(Gs == t).tolist() for t in gens]

    def accept(partial: list[int]) -> bool:
        ext = np.asarray(partial, dtype=np.int64)
        defined = ext >= 0
        if not (Gs[ext[defined]] == np.flatnonzero(defined)).all():
            return False
        through = ext[phi_img]
        ok = through >= 0
        return bool((through[ok] == tilde[ok]).all())

    for img in search_homomorphisms(G, nr.N, gens, candidates, accept=accept):
        section = GroupHom(G, nr.N, img, check=False)
        induced = NormalMap(phi, nr.action[img])
        verdict = validate_normal_map(induced)
        if not verdict.ok:
            raise InvariantViolationError(
                f"structure induite par la section invalide: {verdict.kinds()[0]}", verdict.violations[0].witness
            )
        logger.debug(f"section trouvée pour {phi.source.label} -> {G.label}")
        return SectionResult(True, section, induced)
    return SectionResult(False)


def _centralizes_modulo(Gamma: FiniteGroup, tables: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """tau(gamma) gamma^-1 dans le sous-groupe de masque mask, pour tout gamma"""
    quotients = Gamma.mul[tables, Gamma.inverse[None, :]]
    return mask[quotients].all(axis=1)


def normalizer_diagnostics(nr: NormalizerResult) -> Verdict:
    """Relations entre noyaux, centres et centralisateurs de N(phi)"""
    phi, N = nr.phi, nr.N
    Gamma, G = phi.source, phi.target
    tables = nr.aut_gamma.tables[nr.pairs[:, 0]]
    Gs = nr.pairs[:, 1]
    K = phi.kernel()
    Z = center(Gamma)
    tilde = nr.phi_tilde.n
    violations: list[Violation] = []

    if not nr.p_phi.image().issubset(normalizer(G, phi.image())):
        violations.append(Violation("projection-in-normalizer", {}))

    stable = K.mask[tables[:, K.members]].all(axis=1)
    if not stable.all():
        violations.append(Violation("kernel-stable", {"pair": int(np.flatnonzero(~stable)[0])}))

    image_of_gamma = tilde.image()
    C = centralizer(N, image_of_gamma)
    C_phi = centralizer(G, phi.image())
    expected = np.flatnonzero(_centralizes_modulo(Gamma, tables, Z.mask) & C_phi.mask[Gs])
    if not np.array_equal(C.members, expected):
        violations.append(Violation("centralizer", {"found": C.order, "expected": int(expected.size)}))

    kp = nr.p_phi.kernel()
    all_tables = nr.aut_gamma.tables
    stated = np.flatnonzero(_centralizes_modulo(Gamma, all_tables, K.mask))
    in_kernel = np.sort(nr.pairs[kp.members, 0])
    if not np.array_equal(in_kernel, stated):
        violations.append(Violation("kernel-of-projection", {"found": kp.order, "expected": int(stated.size)}))
    if not tilde.apply(K).issubset(kp):
        violations.append(Violation("kernel-image", {}))

    kt = tilde.kernel()
    if not np.array_equal(kt.members, Z.intersection(K).members):
        violations.append(Violation("kernel-of-tilde", {"found": kt.order}))

    next_kernel = center(N).intersection(kp)
    if kt.is_trivial() and not next_kernel.is_trivial():
        violations.append(Violation("next-stage-injective", {"order": next_kernel.order}))

    K_group, _ = K.as_group()
    if center(K_group).is_trivial():
        inside = centralizer(N, tilde.apply(K)).intersection(kp)
        if not inside.is_trivial():
            violations.append(Violation("centerless-kernel-centralizer", {"order": inside.order}))
        kp_group, _ = kp.as_group()
        if not center(kp_group).is_trivial():
            violations.append(Violation("centerless-kernel-center", {"order": center(kp_group).order}))
    return Verdict(tuple(violations))


def induced_normalizer_morphism(
    nr: NormalizerResult, psi: GroupHom, target: Optional[NormalizerResult] = None
) -> GroupHom:
    """N(phi) -> N(phi puis psi), propriété universelle appliquée à Gamma -> N(phi) -> G'"""
    if target is None:
        target = injective_normalizer(nr.phi.then(psi))
    morphism = universal_morphism_in(target, nr.phi_tilde, nr.p_phi.then(psi))
    if not nr.phi_tilde.n.then(morphism) == target.phi_tilde.n:
        raise InvariantViolationError("le morphisme induit ne commute pas avec phi_tilde")
    return morphism

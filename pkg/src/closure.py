"""
Clôture normale libre d'un homomorphisme phi: Gamma -> G

Trois constructions: la présentation générique (énumération des classes),
et deux raccourcis, le cas surjectif (Gamma/[Gamma, K]) et le cas abélien
(somme directe de copies de Gamma indexées par G/phi(Gamma)).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from sympy import primefactors

from src.config import setting
from src.errors import (
    BudgetExceededError,
    FactorizationError,
    InvariantViolationError,
    NotAHomomorphismError,
    PreconditionError,
)
from src.groups import (
    FiniteGroup,
    GroupHom,
    Subgroup,
    abelian_invariants,
    abelianization,
    center,
    commutator_subgroup,
    derived_subgroup,
    direct_product,
    generate,
    normal_closure,
    quotient,
    same_group,
)
from src.morphisms import search_homomorphisms
from src.normal_map import (
    NormalMap,
    NormalMorphism,
    Verdict,
    Violation,
    canonical_structure_surjective_central,
    validate_normal_map,
    validate_normal_morphism,
)
from src.presentation import Presentation, presentation_of, realize, word_value

AUTO = "auto"
GENERIC = "generic-tc"
SURJECTIVE = "surjective"
ABELIAN = "abelian"
NORMAL_INCLUSION = "normal-inclusion"
STRATEGIES = (AUTO, GENERIC, SURJECTIVE, ABELIAN, NORMAL_INCLUSION)


@dataclass(frozen=True)
class ClosureResult:
    phi: GroupHom
    cl: FiniteGroup
    c_phi: GroupHom
    phi_hat: NormalMap
    gamma_hat: tuple[Subgroup, ...]
    kernel: Subgroup
    strategy: str

    @property
    def order(self) -> int:
        return self.cl.order


@dataclass(frozen=True)
class SchurResult:
    kernel_group: FiniteGroup
    witness: Subgroup
    abelian_invariants: list[int]


@dataclass(frozen=True)
class NormalInclusionResult:
    cr: ClosureResult
    retract: GroupHom
    complement: Subgroup
    is_trivial_closure: bool


# ----------------------------------------------------------------------
# Présentation
# ----------------------------------------------------------------------


def _closure_generators(phi: GroupHom, gen_set: Optional[Sequence[int]], full: bool) -> list[int]:
    Gamma = phi.source
    if full:
        return list(range(1, Gamma.order))
    gens = [int(s) for s in (Gamma.generators if gen_set is None else gen_set)]
    if generate(Gamma, gens).size != Gamma.order:
        raise PreconditionError(f"l'ensemble {gens} n'engendre pas {Gamma.label}")
    return gens


def closure_presentation(
    phi: GroupHom, gen_set: Optional[Sequence[int]] = None, full: bool = False
) -> Presentation:
    """
    Présentation de la clôture normale libre

    Un générateur s_g par couple (s, g), d'indice g * |S| + s. Les relateurs
    d'une présentation de Gamma sont recopiés pour chaque indice g, puis
    viennent les relateurs de conjugaison t_h^-1 s_g t_h = s_{g phi(t)^h}.
    """
    Gamma, G = phi.source, phi.target
    gens = _closure_generators(phi, gen_set, full)
    k = len(gens)
    base = presentation_of(Gamma, gens)
    C = G.conjugation
    phi_t = [phi(t) for t in gens]

    def letter(si: int, g: int) -> int:
        return g * k + si + 1

    relators: list[tuple[int, ...]] = []
    for g in range(G.order):
        for r in base.relators:
            relators.append(tuple((1 if l > 0 else -1) * letter(abs(l) - 1, g) for l in r))
    for h in range(G.order):
        for ti in range(k):
            shift = int(C[h, phi_t[ti]])
            T = letter(ti, h)
            for g in range(G.order):
                target = G.op(g, shift)
                for si in range(k):
                    relators.append((-T, letter(si, g), T, -letter(si, target)))
    names = tuple(f"s{si}_{g}" for g in range(G.order) for si in range(k))
    return Presentation(k * G.order, tuple(relators), f"cl({phi.source.label}->{G.label})", names)


# ----------------------------------------------------------------------
# Constructions
# ----------------------------------------------------------------------


def _action_from_shifts(
    cl: FiniteGroup, G: FiniteGroup, letters: np.ndarray, shifted
) -> np.ndarray:
    """
    Action de G sur cl à partir des générateurs de G

    letters[g, si] est l'élément de cl du générateur s_g; shifted(t) donne
    les images des lettres sous l'automorphisme de translation par t.
    """
    flat = letters.ravel()
    action = np.full((G.order, cl.order), -1, dtype=np.int64)
    action[0] = np.arange(cl.order)
    seen = np.zeros(G.order, dtype=bool)
    seen[0] = True
    rows: dict[int, np.ndarray] = {}
    for t in G.generators:
        try:
            hom = GroupHom.from_generators(cl, cl, flat, shifted(t).ravel())
        except NotAHomomorphismError as e:
            raise InvariantViolationError(
                "la translation des indices ne définit pas un automorphisme", {"h": t}
            ) from e
        rows[t] = hom.image_of
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for t, row in rows.items():
            y = G.op(x, t)
            if not seen[y]:
                seen[y] = True
                action[y] = row[action[x]]
                queue.append(y)
    return action


def _generic(phi: GroupHom, max_cosets: Optional[int], coset_strategy: Optional[str]) -> ClosureResult:
    Gamma, G = phi.source, phi.target
    gens = _closure_generators(phi, None, False)
    k = len(gens)
    P = closure_presentation(phi, gens)
    coset_strategy = setting(coset_strategy, "closure_coset_strategy")
    realized = realize(P, max_cosets, coset_strategy, label=f"cl({Gamma.label}->{G.label})")
    cl = realized.group
    letters = np.array(realized.generator_images, dtype=np.int64).reshape(G.order, k)

    try:
        c_phi = GroupHom.from_generators(Gamma, cl, gens, letters[0].tolist())
        hat_images = [[int(G.conjugation[g, phi(s)]) for s in gens] for g in range(G.order)]
        n = GroupHom.from_generators(cl, G, letters.ravel().tolist(), np.ravel(hat_images).tolist())
    except NotAHomomorphismError as e:
        raise InvariantViolationError("présentation de la clôture incohérente", e.witness) from e

    def shifted(t: int) -> np.ndarray:
        return letters[G.mul[:, t]]

    action = _action_from_shifts(cl, G, letters, shifted)
    gamma_hat = tuple(cl.subgroup(letters[g]) for g in range(G.order))
    return ClosureResult(phi, cl, c_phi, NormalMap(n, action), gamma_hat, n.kernel(), GENERIC)


def _surjective(phi: GroupHom) -> ClosureResult:
    """Gamma/[Gamma, K] avec K = ker phi, structure canonique"""
    Gamma, G = phi.source, phi.target
    K = phi.kernel()
    N = commutator_subgroup(Gamma, Gamma.whole(), K)
    q = quotient(Gamma, N, label=f"cl({Gamma.label}->{G.label})")
    cl = q.group
    image = np.zeros(cl.order, dtype=np.int64)
    image[q.projection.image_of] = phi.image_of
    nm = canonical_structure_surjective_central(GroupHom(cl, G, image, check=False))
    gamma_hat = tuple([cl.whole()] * G.order)
    return ClosureResult(phi, cl, q.projection, nm, gamma_hat, nm.n.kernel(), SURJECTIVE)


def _abelian(phi: GroupHom) -> ClosureResult:
    """Somme directe des copies Gamma_x, x parcourant G/phi(Gamma), la classe de base en tête"""
    Gamma, G = phi.source, phi.target
    H = phi.image()
    coset_of = np.full(G.order, -1, dtype=np.int64)
    reps: list[int] = []
    for x in range(G.order):
        if coset_of[x] < 0:
            coset_of[G.mul[H.members, x]] = len(reps)
            reps.append(x)
    m = len(reps)
    cl = direct_product([Gamma] * m, label=f"{Gamma.label}^{m}" if m > 1 else Gamma.label)
    sizes = (Gamma.order,) * m
    digits = np.stack(np.unravel_index(np.arange(cl.order), sizes), axis=1)
    weights = np.array([Gamma.order ** (m - 1 - x) for x in range(m)], dtype=np.int64)

    c_phi = GroupHom(Gamma, cl, np.arange(Gamma.order) * weights[0], check=False)

    values = phi.image_of[digits]
    n_img = values[:, 0].copy()
    for x in range(1, m):
        n_img = G.mul[n_img, values[:, x]]
    n = GroupHom(cl, G, n_img, check=False)

    action = np.empty((G.order, cl.order), dtype=np.int64)
    for g in range(G.order):
        target = coset_of[G.mul[reps, g]]
        moved = np.empty_like(digits)
        moved[:, target] = digits
        action[g] = moved @ weights

    gamma_hat = tuple(
        Subgroup(cl, np.arange(Gamma.order) * weights[coset_of[g]], check=False) for g in range(G.order)
    )
    return ClosureResult(phi, cl, c_phi, NormalMap(n, action), gamma_hat, n.kernel(), ABELIAN)


def check_closure_result(cr: ClosureResult) -> Verdict:
    """Les propriétés de définition d'une clôture calculée"""
    phi, cl, nm = cr.phi, cr.cl, cr.phi_hat
    G = phi.target
    violations = list(validate_normal_map(nm).violations)
    if not cr.c_phi.then(nm.n) == phi:
        bad = int(np.flatnonzero(nm.n.image_of[cr.c_phi.image_of] != phi.image_of)[0])
        violations.append(Violation("factorization", {"gamma": bad}))
    spread = np.unique(nm.action[:, cr.c_phi.image_of])
    if generate(cl, spread).size != cl.order:
        violations.append(Violation("generation", {"order": int(generate(cl, spread).size)}))
    if not np.array_equal(nm.n.image().members, normal_closure(G, phi.image()).members):
        violations.append(Violation("image", {"order": nm.n.image().order}))
    Z = center(cl)
    outside = cr.kernel.members[~Z.mask[cr.kernel.members]]
    if outside.size:
        violations.append(Violation("kernel-not-central", {"a": int(outside[0])}))
    return Verdict(tuple(violations))


def _select(phi: GroupHom, strategy: str) -> str:
    if strategy != AUTO:
        return strategy
    if phi.is_surjective:
        return SURJECTIVE
    if phi.source.is_abelian and phi.target.is_abelian:
        return ABELIAN
    return GENERIC


def free_normal_closure(
    phi: GroupHom,
    strategy: str = AUTO,
    max_cosets: Optional[int] = None,
    coset_strategy: Optional[str] = None,
) -> ClosureResult:
    """
    Clôture normale libre Gamma -> cl -> G de phi

    Args:
        phi: homomorphisme Gamma -> G
        strategy: auto, generic-tc, surjective, abelian ou normal-inclusion
        max_cosets: borne de l'énumération (chemin générique)
        coset_strategy: hlt ou felsch pour le chemin générique

    Returns:
        ClosureResult vérifié; toute propriété violée lève InvariantViolationError
    """
    if strategy not in STRATEGIES:
        raise PreconditionError(f"stratégie inconnue: {strategy}")
    chosen = _select(phi, strategy)
    if chosen == SURJECTIVE:
        if not phi.is_surjective:
            raise PreconditionError("raccourci surjectif: phi n'est pas surjectif")
        cr = _surjective(phi)
    elif chosen == ABELIAN:
        if not (phi.source.is_abelian and phi.target.is_abelian):
            raise PreconditionError("raccourci abélien: Gamma et G doivent être abéliens")
        cr = _abelian(phi)
    elif chosen == NORMAL_INCLUSION:
        return closure_normal_inclusion(phi, max_cosets, coset_strategy).cr
    else:
        cr = _generic(phi, max_cosets, coset_strategy)

    verdict = check_closure_result(cr)
    if not verdict.ok:
        first = verdict.violations[0]
        raise InvariantViolationError(f"clôture ({chosen}) invalide: {first.kind}", first.witness)
    logger.info(
        f"clôture de {phi.source.label} -> {phi.target.label}: ordre {cr.order}, "
        f"noyau {cr.kernel.order} ({chosen})"
    )
    return cr


# ----------------------------------------------------------------------
# Propriété universelle
# ----------------------------------------------------------------------


def universal_morphism(cr: ClosureResult, psi: GroupHom, n: NormalMap) -> GroupHom:
    """psi_hat: cl -> M, gamma_g -> psi(gamma)^g, pour une factorisation psi puis n de phi"""
    if not (same_group(psi.source, cr.phi.source) and same_group(psi.target, n.M)):
        raise FactorizationError("factorisation de forme incompatible")
    if not same_group(n.G, cr.phi.target) or not psi.then(n.n) == cr.phi:
        raise FactorizationError("psi puis n ne redonne pas phi")
    G = cr.phi.target
    gens = list(cr.phi.source.generators)
    images: dict[int, int] = {}
    for g in range(G.order):
        for s in gens:
            x = int(cr.phi_hat.action[g, cr.c_phi(s)])
            y = int(n.action[g, psi(s)])
            if images.setdefault(x, y) != y:
                raise InvariantViolationError("psi_hat mal défini", {"element": x, "g": g})
    try:
        psi_hat = GroupHom.from_generators(cr.cl, n.M, list(images), list(images.values()))
    except NotAHomomorphismError as e:
        raise InvariantViolationError("psi_hat mal défini", e.witness) from e
    if not cr.c_phi.then(psi_hat) == psi or not psi_hat.then(n.n) == cr.phi_hat.n:
        raise InvariantViolationError("psi_hat ne commute pas avec les deux facteurs")
    verdict = validate_normal_morphism(NormalMorphism(psi_hat, GroupHom.identity(G)), cr.phi_hat, n)
    if not verdict.ok:
        raise InvariantViolationError("psi_hat non équivariant", verdict.violations[0].witness)
    return psi_hat


def count_universal_morphisms(
    cr: ClosureResult, psi: GroupHom, n: NormalMap, limit: Optional[int] = None
) -> int:
    """Dénombre les morphismes normaux cl -> M au-dessus de G commutant avec les deux facteurs"""
    limit = setting(limit, "uniqueness_limit")
    if cr.cl.order * n.M.order > limit:
        raise BudgetExceededError(f"|cl| * |M| = {cr.cl.order * n.M.order} > {limit}")
    cl, M = cr.cl, n.M
    gens = list(cl.generators)
    n_img = n.n.image_of
    candidates = [np.flatnonzero(n_img == cr.phi_hat.n(x)).tolist() for x in gens]
    count = 0
    identity = GroupHom.identity(cr.phi.target)
    for img in search_homomorphisms(cl, M, gens, candidates):
        mu = GroupHom(cl, M, img, check=False)
        if not cr.c_phi.then(mu) == psi:
            continue
        if validate_normal_morphism(NormalMorphism(mu, identity), cr.phi_hat, n).ok:
            count += 1
    return count


def relative_schur_multiplier(
    phi: GroupHom, strategy: str = AUTO, max_cosets: Optional[int] = None
) -> SchurResult:
    """Noyau de phi_hat lorsque la clôture normale de phi(Gamma) est G"""
    if not normal_closure(phi.target, phi.image()).is_whole():
        raise PreconditionError(
            f"la clôture normale de l'image est propre dans {phi.target.label}",
            {"order": normal_closure(phi.target, phi.image()).order},
        )
    return schur_from_closure(free_normal_closure(phi, strategy, max_cosets))


def schur_from_closure(cr: ClosureResult) -> SchurResult:
    kernel_group, _ = cr.kernel.as_group(f"ker({cr.phi.source.label}->{cr.phi.target.label})")
    return SchurResult(kernel_group, cr.kernel, abelian_invariants(kernel_group))


def closure_normal_inclusion(
    phi: GroupHom, max_cosets: Optional[int] = None, coset_strategy: Optional[str] = None
) -> NormalInclusionResult:
    """Décomposition cl = c_phi(Gamma) x ker(phi_hat) pour une inclusion distinguée"""
    if not phi.is_injective:
        raise PreconditionError("phi doit être injectif")
    witness = phi.image().normality_witness()
    if witness is not None:
        raise PreconditionError("image non distinguée", {"g": witness[0], "x": witness[1]})
    generic = _generic(phi, max_cosets, coset_strategy)
    cr = ClosureResult(
        generic.phi, generic.cl, generic.c_phi, generic.phi_hat, generic.gamma_hat, generic.kernel,
        NORMAL_INCLUSION,
    )
    verdict = check_closure_result(cr)
    if not verdict.ok:
        raise InvariantViolationError(f"clôture invalide: {verdict.kinds()[0]}")

    cl = cr.cl
    back = np.full(phi.target.order, -1, dtype=np.int64)
    back[phi.image_of] = np.arange(phi.source.order)
    retract = GroupHom(cl, cl, cr.c_phi.image_of[back[cr.phi_hat.n.image_of]])
    image = cr.c_phi.image()
    K = cr.kernel
    if (
        image.intersection(K).order != 1
        or image.order * K.order != cl.order
        or not retract.kernel() == K
        or not retract.image() == image
    ):
        raise InvariantViolationError("cl n'est pas le produit direct c_phi(Gamma) x ker")

    trivial = image.is_whole()
    invariant = bool(image.mask[cr.phi_hat.action[:, image.members]].all())
    if trivial != invariant:
        raise InvariantViolationError("cl = c_phi(Gamma) devrait équivaloir à son invariance")
    if derived_subgroup(phi.source).is_whole() and not trivial:
        raise InvariantViolationError("clôture non triviale pour un groupe parfait")
    return NormalInclusionResult(cr, retract, K, trivial)


def induced_closure_morphism(
    f: GroupHom,
    phi: GroupHom,
    source: Optional[ClosureResult] = None,
    target: Optional[ClosureResult] = None,
) -> NormalMorphism:
    """Morphisme (Gamma')^{f puis phi} -> Gamma^phi, gamma'_g -> (f gamma')_g"""
    if source is None:
        source = free_normal_closure(f.then(phi))
    if target is None:
        target = free_normal_closure(phi)
    mu = universal_morphism(source, f.then(target.c_phi), target.phi_hat)
    morphism = NormalMorphism(mu, GroupHom.identity(phi.target))
    verdict = validate_normal_morphism(morphism, source.phi_hat, target.phi_hat)
    if not verdict.ok:
        raise InvariantViolationError("morphisme induit invalide", verdict.violations[0].witness)
    return morphism


# ----------------------------------------------------------------------
# Vérifications de structure
# ----------------------------------------------------------------------


def closure_structure_checks(cr: ClosureResult) -> Verdict:
    """Relations entre les sous-groupes Gamma_g, factorisation ordonnée, abélianisés, premiers"""
    phi, cl, nm = cr.phi, cr.cl, cr.phi_hat
    Gamma, G = phi.source, phi.target
    violations = list(check_closure_result(cr).violations)
    gens = list(Gamma.generators)
    hats = [sub.mask for sub in cr.gamma_hat]

    for g in range(G.order):
        members = cr.gamma_hat[g].members
        for d in gens:
            left = G.op(int(phi(d)), g)
            if not np.array_equal(members, cr.gamma_hat[left].members):
                violations.append(Violation("translation", {"g": g, "delta": d}))
                break
            for h in range(G.order):
                d_hat = int(nm.action[h, cr.c_phi(d)])
                moved = cl.conjugation[d_hat, members]
                target = G.op(g, int(G.conjugation[h, phi(d)]))
                if moved.size != cr.gamma_hat[target].order or not hats[target][moved].all():
                    violations.append(Violation("conjugation", {"g": g, "h": h, "delta": d}))
                    break

    product = np.zeros(1, dtype=np.int64)
    for sub in cr.gamma_hat:
        product = np.unique(cl.mul[np.ix_(product, sub.members)])
    if product.size != cl.order:
        violations.append(Violation("ordered-product", {"reached": int(product.size)}))
    if cl.order > Gamma.order ** G.order:
        violations.append(Violation("order-bound", {"order": cl.order}))

    ab = abelianization(cl)
    if not cr.c_phi.then(ab.projection).kernel() == derived_subgroup(Gamma):
        violations.append(Violation("abelianization-not-injective", {}))

    allowed = set(primefactors(Gamma.order)) | set(primefactors(normal_closure(G, phi.image()).order))
    extra = set(primefactors(cl.order)) - allowed
    if extra:
        violations.append(Violation("prime-census", {"primes": sorted(extra)}))

    base = presentation_of(Gamma, gens)
    for g in range(G.order):
        images = [int(nm.action[g, cr.c_phi(s)]) for s in gens]
        if any(word_value(cl, images, r) != 0 for r in base.relators):
            violations.append(Violation("relator", {"g": g}))
            break

    if phi.is_injective and phi.image().is_normal():
        image = cr.c_phi.image()
        invariant = bool(image.mask[nm.action[:, image.members]].all())
        if invariant != image.is_whole():
            violations.append(Violation("normal-inclusion", {"invariant": invariant}))
    return Verdict(tuple(violations))

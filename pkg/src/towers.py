"""
Tours itérées: tour des clôtures normales, tour des normalisateurs injectifs

Étape k (à partir de 1): pour les clôtures Gamma_{k+1} = cl(phi_k) avec
phi_{k+1} = c_{phi_k}; pour les normalisateurs Gamma^k = N(phi_{k-1}) avec
phi_k = p_{phi_{k-1}}. La tour est stabilisée à l'étape k lorsque
l'application de liaison de cette étape est bijective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import sympy
from loguru import logger
from sympy import primefactors

from src.closure import AUTO, ClosureResult, free_normal_closure
from src.config import setting
from src.errors import BudgetExceededError, PreconditionError
from src.groups import (
    FiniteGroup,
    GroupHom,
    Subgroup,
    abelianization,
    derived_subgroup,
    hypercenter,
    normal_closure,
    normalizer,
)
from src.morphisms import automorphism_group
from src.normal_map import NormalMap, Verdict, Violation, validate_normal_map
from src.normalizer import NormalizerResult, injective_normalizer, normalizer_diagnostics

CLOSURES = "closures"
NORMALIZERS = "normalizers"


@dataclass(frozen=True)
class KosBound:
    """f(t) = t^k avec k = (log_p t + 1) / 2, p le plus petit premier divisant t"""

    t: int
    p: int
    k: float
    f_of_t: float
    ceiling: int
    expression: sympy.Expr


@dataclass(frozen=True)
class BoundCheck:
    bound_value: int
    max_stage_order: int
    satisfied: bool


@dataclass(frozen=True)
class TowerStage:
    group: FiniteGroup
    connecting: GroupHom            # clôtures: vers l'étape précédente; normalisateurs: depuis elle
    from_gamma: GroupHom
    normal_map: NormalMap
    verdict: Verdict = field(default_factory=Verdict)
    hypercenter_index: Optional[int] = None


@dataclass(frozen=True)
class TowerTrace:
    kind: str
    phi: GroupHom
    stages: tuple[TowerStage, ...]
    stabilized_at: Optional[int]
    steps_run: int
    bound_check: Optional[BoundCheck] = None
    error: Optional[str] = None

    @property
    def orders(self) -> list[int]:
        return [s.group.order for s in self.stages]

    @property
    def ok(self) -> bool:
        return all(s.verdict.ok for s in self.stages) and (
            self.bound_check is None or self.bound_check.satisfied
        )


def kos_bound(t: int) -> KosBound:
    """Évaluation exacte de f(t), arrondie au plafond pour les comparaisons"""
    if t < 2:
        raise PreconditionError(f"f(t) défini pour t >= 2, reçu {t}")
    p = min(primefactors(t))
    k = (sympy.log(t, p) + 1) / 2
    f = sympy.Pow(t, k)
    return KosBound(t, int(p), float(k), float(f), int(sympy.ceiling(f)), f)


def _f_ceiling(t: int) -> int:
    return 1 if t == 1 else kos_bound(t).ceiling


def _closure_stage_checks(cr: ClosureResult, surjective_case: bool, G_order: int) -> tuple[Verdict, Optional[int]]:
    violations: list[Violation] = []
    index = None
    if surjective_case:
        n = cr.phi_hat.n
        if not n.is_surjective:
            violations.append(Violation("connecting-not-surjective", {"order": n.image().order}))
        if not normal_closure(cr.cl, cr.c_phi.image()).is_whole():
            violations.append(Violation("stage-not-normally-generated", {}))
        index = cr.cl.order // hypercenter(cr.cl).order
        if G_order % index:
            violations.append(Violation("hypercenter-index", {"index": index}))
    return Verdict(tuple(violations)), index


def closures_tower(
    phi: GroupHom,
    max_steps: Optional[int] = None,
    max_cosets: Optional[int] = None,
    strategy: str = AUTO,
) -> TowerTrace:
    """
    Itère la clôture normale libre jusqu'à stabilisation ou max_steps

    Un débordement d'énumération ou de budget rend la trace partielle,
    le champ error portant le message.
    """
    max_steps = setting(max_steps, "closures_max_steps")
    Gamma, G = phi.source, phi.target
    surjective_case = normal_closure(G, phi.image()).is_whole()
    stages: list[TowerStage] = []
    stabilized_at = None
    error = None
    current = phi
    for k in range(1, max_steps + 1):
        try:
            cr = free_normal_closure(current, strategy, max_cosets)
        except BudgetExceededError as e:
            logger.warning(f"tour des clôtures interrompue à l'étape {k}: {e}")
            error = str(e)
            break
        verdict, index = _closure_stage_checks(cr, surjective_case, G.order)
        stages.append(TowerStage(cr.cl, cr.phi_hat.n, cr.c_phi, cr.phi_hat, verdict, index))
        logger.info(f"clôtures, étape {k}: ordre {cr.cl.order}")
        if cr.phi_hat.n.is_isomorphism:
            stabilized_at = k
            break
        current = cr.c_phi

    bound_check = None
    if surjective_case and stages:
        bound = Gamma.order * _f_ceiling(G.order)
        largest = max(s.group.order for s in stages)
        bound_check = BoundCheck(bound, largest, largest <= bound)
    return TowerTrace(CLOSURES, phi, tuple(stages), stabilized_at, len(stages), bound_check, error)


def normalizers_tower(phi: GroupHom, max_steps: Optional[int] = None, budget: Optional[int] = None) -> TowerTrace:
    """Itère le normalisateur injectif; chaque étape porte ses diagnostics"""
    max_steps = setting(max_steps, "normalizers_max_steps")
    stages: list[TowerStage] = []
    stabilized_at = None
    error = None
    current = phi
    from_gamma = GroupHom.identity(phi.source)
    for k in range(1, max_steps + 1):
        try:
            nr = injective_normalizer(current, budget)
        except BudgetExceededError as e:
            logger.warning(f"tour des normalisateurs interrompue à l'étape {k}: {e}")
            error = str(e)
            break
        from_gamma = from_gamma.then(nr.phi_tilde.n)
        verdict = normalizer_diagnostics(nr)
        stages.append(TowerStage(nr.N, nr.phi_tilde.n, from_gamma, nr.phi_tilde, verdict))
        logger.info(f"normalisateurs, étape {k}: ordre {nr.N.order}")
        if nr.phi_tilde.n.is_isomorphism:
            stabilized_at = k
            break
        current = nr.p_phi
    return TowerTrace(NORMALIZERS, phi, tuple(stages), stabilized_at, len(stages), None, error)


def stage_normalizer(trace: TowerTrace, k: int) -> NormalizerResult:
    """Recalcule le normalisateur de l'étape k (1-indexée) à partir de la trace"""
    if trace.kind != NORMALIZERS or not 1 <= k <= len(trace.stages):
        raise PreconditionError(f"étape {k} absente de la trace")
    current = trace.phi
    for _ in range(k - 1):
        current = injective_normalizer(current).p_phi
    return injective_normalizer(current)


def tower_abelianization_probe(trace: TowerTrace) -> Verdict:
    """Gamma_ab -> (Gamma_i)_ab induit par phi_i est injectif à chaque étape"""
    if trace.kind != CLOSURES:
        raise PreconditionError("sonde définie pour la tour des clôtures")
    Gamma = trace.phi.source
    D = derived_subgroup(Gamma)
    violations: list[Violation] = []
    for k, stage in enumerate(trace.stages, start=1):
        ab = abelianization(stage.group)
        if not stage.from_gamma.then(ab.projection).kernel() == D:
            violations.append(Violation("abelianization-not-injective", {"stage": k}))
    return Verdict(tuple(violations))


def stabilization_is_fixed_point(trace: TowerTrace, max_cosets: Optional[int] = None) -> bool:
    """Une étape de plus depuis l'étape stabilisée redonne un groupe du même ordre, de nouveau stable"""
    if trace.stabilized_at is None:
        raise PreconditionError("trace non stabilisée")
    last = trace.stages[trace.stabilized_at - 1]
    if trace.kind == CLOSURES:
        cr = free_normal_closure(last.from_gamma, max_cosets=max_cosets)
        return cr.cl.order == last.group.order and cr.phi_hat.n.is_isomorphism
    nr = injective_normalizer(stage_normalizer(trace, trace.stabilized_at).p_phi)
    return nr.N.order == last.group.order and nr.phi_tilde.n.is_isomorphism


def iterated_automorphism_orders(G: FiniteGroup, steps: int, budget: Optional[int] = None) -> list[int]:
    """Ordres de Aut(G), Aut(Aut(G)), ..."""
    orders: list[int] = []
    current = G
    for _ in range(steps):
        current = automorphism_group(current, budget).group
        orders.append(current.order)
    return orders


def iterated_normalizer_orders(G: FiniteGroup, H: Subgroup, steps: int) -> list[int]:
    """Ordres de N_G(H), N_G(N_G(H)), ..."""
    orders: list[int] = []
    current = H
    for _ in range(steps):
        current = normalizer(G, current)
        orders.append(current.order)
    return orders


def check_tower(trace: TowerTrace) -> Verdict:
    """Validité de chaque application de liaison et commutation des triangles"""
    violations: list[Violation] = []
    previous = trace.phi
    for k, stage in enumerate(trace.stages, start=1):
        if not validate_normal_map(stage.normal_map).ok:
            violations.append(Violation("connecting-map", {"stage": k}))
        if trace.kind == CLOSURES:
            if not stage.from_gamma.then(stage.connecting) == previous:
                violations.append(Violation("triangle", {"stage": k}))
            previous = stage.from_gamma
        violations.extend(stage.verdict.violations)
    if trace.bound_check is not None and not trace.bound_check.satisfied:
        violations.append(Violation("order-bound", {"bound": trace.bound_check.bound_value}))
    return Verdict(tuple(violations))


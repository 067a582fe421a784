"""
Suite d'invariants sur un homomorphisme: clôture, structures normales, normalisateur, tours
"""

from typing import Callable, Optional

from loguru import logger

from src.closure import (
    AUTO,
    GENERIC,
    ClosureResult,
    closure_normal_inclusion,
    closure_structure_checks,
    count_universal_morphisms,
    free_normal_closure,
    schur_from_closure,
    universal_morphism,
)
from src.config import setting
from src.errors import BudgetExceededError, InvariantViolationError, ToolkitError
from src.groups import GroupHom, center, normal_closure
from src.normal_map import Verdict, Violation, all_normal_structures
from src.normalizer import (
    count_universal_morphisms_in,
    detect_normal_structure,
    injective_normalizer,
    normalizer_diagnostics,
    universal_morphism_in,
)
from src.report import CheckRecord
from src.towers import check_tower, closures_tower, normalizers_tower, tower_abelianization_probe


class InvariantSuite:
    """Exécute chaque vérification; un budget dépassé marque la vérification comme ignorée"""

    def __init__(self, phi: GroupHom, strategy: str = AUTO, max_cosets: Optional[int] = None, towers: bool = True):
        self.phi = phi
        self.strategy = strategy
        self.max_cosets = max_cosets
        self.towers = towers
        self.records: list[CheckRecord] = []

    def _run(self, name: str, check: Callable[[], Verdict]):
        try:
            verdict = check()
        except BudgetExceededError as e:
            logger.warning(f"{name}: ignoré ({e})")
            self.records.append(CheckRecord(name=name, passed=True, skipped=True, detail={"reason": str(e)}))
            return
        except InvariantViolationError as e:
            self.records.append(CheckRecord(name=name, passed=False, detail={"error": str(e)}))
            return
        self.records.append(CheckRecord.from_verdict(name, verdict))

    def run(self) -> list[CheckRecord]:
        phi = self.phi
        label = f"{phi.source.label}->{phi.target.label}"
        normally_generated = normal_closure(phi.target, phi.image()).is_whole()
        try:
            cr = free_normal_closure(phi, self.strategy, self.max_cosets)
        except BudgetExceededError as e:
            self.records.append(CheckRecord(name="closure", passed=True, skipped=True, detail={"reason": str(e)}))
            cr = None
        except InvariantViolationError as e:
            self.records.append(CheckRecord(name="closure", passed=False, detail={"error": str(e)}))
            cr = None

        if cr is not None:
            self.records.append(CheckRecord(name="closure", passed=True, detail={"order": cr.order}))
            self._run("closure-structure", lambda: closure_structure_checks(cr))
            self._run("closure-universal-identity", lambda: self._closure_identity(cr))
            self._run("closure-uniqueness", lambda: self._closure_uniqueness(cr))
            if cr.strategy != GENERIC:
                self._run("closure-fast-path-agreement", lambda: self._fast_path_agreement(cr))
            if normally_generated:
                self._run("schur-kernel", lambda: self._schur(cr))
            if phi.is_injective and phi.image().is_normal():
                self._run("normal-inclusion", lambda: self._normal_inclusion())

        self._run("normalizer", self._normalizer)
        self._run("normal-structure-oracle", self._detection_oracle)
        if self.towers and cr is not None and cr.order <= setting(None, "verify_tower_order"):
            # hors du cas normalement engendré, les ordres de la tour croissent sans borne
            if normally_generated:
                self._run("closures-tower", self._closures_tower)
            # la terminaison de la tour des normalisateurs suppose Z(ker phi) = 1
            if center(phi.kernel().as_group()[0]).order == 1:
                self._run("normalizers-tower", lambda: check_tower(normalizers_tower(phi)))
        logger.info(f"{label}: {len(self.records)} vérifications")
        return self.records

    # -- clôture -----------------------------------------------------------

    @staticmethod
    def _closure_identity(cr: ClosureResult) -> Verdict:
        psi_hat = universal_morphism(cr, cr.c_phi, cr.phi_hat)
        if psi_hat == GroupHom.identity(cr.cl):
            return Verdict()
        return Verdict((Violation("not-identity", {}),))

    @staticmethod
    def _closure_uniqueness(cr: ClosureResult) -> Verdict:
        count = count_universal_morphisms(cr, cr.c_phi, cr.phi_hat)
        return Verdict() if count == 1 else Verdict((Violation("count", {"count": count}),))

    def _fast_path_agreement(self, cr: ClosureResult) -> Verdict:
        limit = setting(None, "oracle_limit")
        if max(self.phi.source.order, self.phi.target.order) > limit:
            raise BudgetExceededError(f"comparaison au chemin générique limitée aux ordres <= {limit}")
        generic = free_normal_closure(self.phi, GENERIC, self.max_cosets)
        there = universal_morphism(cr, generic.c_phi, generic.phi_hat)
        back = universal_morphism(generic, cr.c_phi, cr.phi_hat)
        if there.then(back) == GroupHom.identity(cr.cl) and back.then(there) == GroupHom.identity(generic.cl):
            return Verdict()
        return Verdict((Violation("fast-path-mismatch", {"fast": cr.order, "generic": generic.order}),))

    @staticmethod
    def _schur(cr: ClosureResult) -> Verdict:
        schur = schur_from_closure(cr)
        if not schur.kernel_group.is_abelian:
            return Verdict((Violation("kernel-not-abelian", {}),))
        return Verdict()

    def _normal_inclusion(self) -> Verdict:
        closure_normal_inclusion(self.phi, self.max_cosets)
        return Verdict()

    # -- normalisateur -----------------------------------------------------

    def _normalizer(self) -> Verdict:
        nr = injective_normalizer(self.phi)
        verdict = normalizer_diagnostics(nr)
        f_tilde = universal_morphism_in(nr, nr.phi_tilde, nr.p_phi)
        if not f_tilde == GroupHom.identity(nr.N):
            verdict = verdict + Verdict((Violation("universal-not-identity", {}),))
        if nr.N.order ** 2 <= setting(None, "uniqueness_limit"):
            count = count_universal_morphisms_in(nr, nr.phi_tilde, nr.p_phi)
            if count != 1:
                verdict = verdict + Verdict((Violation("universal-count", {"count": count}),))
        return verdict

    def _detection_oracle(self) -> Verdict:
        found = detect_normal_structure(self.phi).found
        expected = bool(all_normal_structures(self.phi))
        if found != expected:
            return Verdict((Violation("detection-mismatch", {"section": found, "oracle": expected}),))
        return Verdict()

    # -- tours ---------------------------------------------------------------

    def _closures_tower(self) -> Verdict:
        trace = closures_tower(self.phi, max_cosets=self.max_cosets)
        return check_tower(trace) + tower_abelianization_probe(trace)


def run_invariant_suite(
    phi: GroupHom, strategy: str = AUTO, max_cosets: Optional[int] = None, towers: bool = True
) -> list[CheckRecord]:
    """Toutes les vérifications d'invariants sur phi, sous forme de CheckRecord"""
    try:
        return InvariantSuite(phi, strategy, max_cosets, towers).run()
    except ToolkitError as e:
        return [CheckRecord(name="suite", passed=False, detail={"error": str(e)})]

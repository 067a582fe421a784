"""
Hiérarchie des erreurs typées de la boîte à outils
"""

from typing import Any, Optional


class ToolkitError(Exception):
    """Erreur de base; porte un témoin optionnel et un code de sortie CLI"""

    exit_code = 1

    def __init__(self, message: str, witness: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.witness = dict(witness or {})

    def __str__(self) -> str:
        if not self.witness:
            return self.message
        details = ", ".join(f"{k}={v}" for k, v in self.witness.items())
        return f"{self.message} ({details})"


class InputError(ToolkitError):
    """Entrée utilisateur invalide"""

    exit_code = 3


class ConfigError(InputError):
    """Clé ou valeur de configuration invalide"""


class SpecSyntaxError(InputError):
    """Erreur de syntaxe dans un document de groupes"""

    def __init__(self, message: str, line: int, witness: Optional[dict[str, Any]] = None):
        super().__init__(f"ligne {line}: {message}", witness)
        self.line = line


class MalformedPermutationError(InputError):
    """Cycle mal formé ou point hors de {1..degree}"""


class NotAHomomorphismError(InputError):
    """Les images proposées ne définissent pas un homomorphisme"""


class PreconditionError(InputError):
    """Précondition d'une opération non satisfaite"""


class NotASubgroupError(PreconditionError):
    """Ensemble non fermé pour le produit ou l'inverse"""


class NotNormalError(PreconditionError):
    """Sous-groupe non distingué"""


class InvariantSubgroupError(PreconditionError):
    """Sous-groupe non stable sous l'action"""


class FactorizationError(PreconditionError):
    """La factorisation fournie ne commute pas"""


class BudgetExceededError(ToolkitError):
    """Un budget de taille configuré est dépassé"""

    exit_code = 2


class EnumerationOverflowError(BudgetExceededError):
    """L'énumération des classes a dépassé max_cosets"""

    def __init__(self, live_cosets: int, max_cosets: int):
        super().__init__(
            f"énumération interrompue: {live_cosets} classes vivantes > max_cosets={max_cosets}",
            {"live_cosets": live_cosets, "max_cosets": max_cosets},
        )
        self.live_cosets = live_cosets
        self.max_cosets = max_cosets


class InvariantViolationError(ToolkitError):
    """Un invariant interne est violé (ne doit jamais arriver)"""

    exit_code = 1


class GroupAxiomError(InputError):
    """Table de multiplication qui ne définit pas un groupe"""

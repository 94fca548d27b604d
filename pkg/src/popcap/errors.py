"""
Hiérarchie d'exceptions de popcap

Chaque exception porte le statut CLI qui lui correspond (voir ``main.STATUS_EXIT_CODES``).
"""

from typing import Optional


class PopcapError(Exception):
    """Erreur de base de la bibliothèque"""

    status = "error"


class ParseError(PopcapError, ValueError):
    """Document mal formé (JSON invalide ou champ manquant)"""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class ValidationError(PopcapError, ValueError):
    """Invariant d'instance ou de couplage violé"""

    def __init__(self, message: str, entity: Optional[str] = None):
        self.entity = entity
        super().__init__(f"{message}: {entity}" if entity is not None else message)


class ContractViolation(PopcapError, ValueError):
    """Précondition d'une opération non respectée"""


class UnsupportedRegime(PopcapError):
    """Régime de capacités non couvert par l'algorithme demandé"""

    status = "unsupported"


class InfeasibleError(PopcapError):
    """Contraintes impossibles à satisfaire"""

    status = "infeasible"

    def __init__(self, message: str, node: Optional[str] = None):
        self.node = node
        super().__init__(message if node is None else f"{message}: {node}")


class TooLargeError(PopcapError):
    """Garde de taille dépassée (énumération ou recherche exhaustive)"""

    status = "too-large"


class InternalInconsistency(PopcapError, RuntimeError):
    """Un résultat n'a pas passé sa propre vérification"""

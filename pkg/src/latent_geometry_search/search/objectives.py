import logging
from abc import ABC, abstractmethod
from typing import Iterable, List

from ..geometry.product_manifold import Signature
from ..utils.errors import ValidationError
from .models import ObjectiveTable

logger = logging.getLogger(__name__)


class ObjectiveProvider(ABC):
    """
    The interface for every source of node values.

    A provider maps a canonical signature to the value the search minimizes
    (a validation loss, a reconstruction error, a synthetic MSE, ...).
    """

    @abstractmethod
    def evaluate(self, signature: Signature) -> float:
        """
        Returns the objective value of one search-space node.
        """
        pass

    def missing(self, signatures: Iterable[Signature]) -> List[str]:
        """Signatures the provider cannot evaluate. Empty unless overridden."""
        return []

    def __call__(self, signature: Signature) -> float:
        return self.evaluate(signature)


class TableObjective(ObjectiveProvider):
    """
    File-backed objective: node values precomputed elsewhere (synthetic benchmark,
    trained autoencoders, latent graph inference runs) and stored as an ObjectiveTable.
    """

    def __init__(self, table: ObjectiveTable):
        self.table = table
        logger.info(f"TableObjective initialized with {len(table.values)} node values")

    @classmethod
    def from_file(cls, path: str) -> "TableObjective":
        return cls(ObjectiveTable.load(path))

    def evaluate(self, signature: Signature) -> float:
        key = str(signature)
        try:
            return self.table.values[key]
        except KeyError:
            raise ValidationError(f"Objective table has no value for signature {key}") from None

    def missing(self, signatures: Iterable[Signature]) -> List[str]:
        return [str(sig) for sig in signatures if str(sig) not in self.table.values]

    def optimum(self) -> float:
        return min(self.table.values.values())

"""Stock sets: the inventory of purchasable molecules."""

from __future__ import annotations

import logging

from .chem.mol import Molecule
from .chem.parse import SmilesError, parse_smiles

logger = logging.getLogger(__name__)

# stock sizes of the reference multi-step benchmarks, kept as metadata
REFERENCE_STOCK_SIZES = {"n1": 13432, "n5": 13326}


class StockSet:
    """Set of purchasable molecules, keyed by canonical SMILES."""

    def __init__(self, canonical_smiles=()):
        self._entries = frozenset(canonical_smiles)

    @classmethod
    def from_smiles(cls, smiles_iterable) -> "StockSet":
        return cls(parse_smiles(s).canonical() for s in smiles_iterable)

    def __contains__(self, item) -> bool:
        if isinstance(item, Molecule):
            return item.canonical() in self._entries
        return item in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(sorted(self._entries))


class FileUnreadableError(OSError):
    pass


def load_stock(path) -> StockSet:
    """Read one SMILES per line, canonicalized and deduplicated.

    Unparseable lines are skipped with a warning naming the line number.
    """
    try:
        fh = open(path)
    except OSError as e:
        raise FileUnreadableError(f"cannot read stock file {path}: {e}") from e
    entries = set()
    with fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                entries.add(parse_smiles(line).canonical())
            except SmilesError as e:
                logger.warning("stock %s:%d skipped: %s", path, ln, e)
    if not entries:
        logger.warning("stock file %s is empty", path)
    logger.info("loaded %d stock molecules from %s", len(entries), path)
    return StockSet(entries)

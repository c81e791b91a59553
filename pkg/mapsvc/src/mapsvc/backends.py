"""Mapping engines behind the service.

Preference order at request time: curated lookup table, then the published
transformer model (when the optional rxnmapper dependency is installed),
then a deterministic positional matcher that pairs product atoms with the
first free reactant atom of the same element. Every engine returns
(mapped_string, confidence).
"""

from __future__ import annotations

import csv
import threading
from pathlib import Path
from typing import Optional, Protocol

from .chem import parse_molecule, render_with_maps, split_reaction

DATA_DIR = Path(__file__).parent / "data"


class Backend(Protocol):
    name: str

    def map_reaction(self, reaction: str) -> Optional[tuple[str, float]]: ...


class LookupBackend:
    """Curated atom mappings keyed by the exact unmapped string."""

    name = "lookup"

    def __init__(self, path: Optional[Path] = None):
        self.table: dict[str, str] = {}
        path = path or (DATA_DIR / "curated.csv")
        if path and Path(path).exists():
            with Path(path).open(newline="", encoding="utf-8") as handle:
                for row in csv.DictReader(handle):
                    if row.get("unmapped") and row.get("mapped"):
                        self.table[row["unmapped"].strip()] = row["mapped"].strip()

    def map_reaction(self, reaction: str) -> Optional[tuple[str, float]]:
        hit = self.table.get(reaction)
        return (hit, 1.0) if hit else None


class RxnMapperBackend:
    """Wraps the published transformer model; optional dependency."""

    name = "rxnmapper"

    def __init__(self, model_dir: Optional[str] = None):
        from rxnmapper import RXNMapper  # deferred; heavyweight import

        self._model = RXNMapper(config={"model_path": model_dir}) if model_dir else RXNMapper()
        self._lock = threading.Lock()

    def map_reaction(self, reaction: str) -> Optional[tuple[str, float]]:
        with self._lock:
            result = self._model.get_attention_guided_atom_maps([reaction])[0]
        return result["mapped_rxn"], float(result["confidence"])


def _positional_map(reaction: str) -> str:
    reactants, reagents, products = split_reaction(reaction)
    parsed_reactants = [parse_molecule(c) for c in reactants]
    parsed_products = [parse_molecule(c) for c in products]

    # Pool reactant heavy atoms per element, in reading order.
    free: dict[str, list[tuple[int, int]]] = {}
    for mi, mol in enumerate(parsed_reactants):
        for ai, atom in enumerate(mol.atoms):
            if atom.element != "H":
                free.setdefault(atom.element, []).append((mi, ai))

    next_map = 1
    reactant_maps: dict[int, dict[int, int]] = {}
    product_maps: dict[int, dict[int, int]] = {}
    for pi, mol in enumerate(parsed_products):
        for ai, atom in enumerate(mol.atoms):
            if atom.element == "H":
                continue
            pool = free.get(atom.element)
            if not pool:
                continue  # unbalanced reaction; atom stays unmapped
            mi, ri = pool.pop(0)
            reactant_maps.setdefault(mi, {})[ri] = next_map
            product_maps.setdefault(pi, {})[ai] = next_map
            next_map += 1

    mapped_reactants = [
        render_with_maps(mol, reactant_maps.get(mi, {}))
        for mi, mol in enumerate(parsed_reactants)
    ]
    mapped_products = [
        render_with_maps(mol, product_maps.get(pi, {}))
        for pi, mol in enumerate(parsed_products)
    ]
    return f"{'.'.join(mapped_reactants)}>{'.'.join(reagents)}>{'.'.join(mapped_products)}"


class PositionalBackend:
    """First-fit element matcher; valid but chemistry-blind, low confidence."""

    name = "positional"

    def map_reaction(self, reaction: str) -> Optional[tuple[str, float]]:
        return _positional_map(reaction), 0.2


class ChainBackend:
    """Try engines in order; first answer wins."""

    def __init__(self, engines: list[Backend]):
        self.engines = engines
        self.name = "+".join(e.name for e in engines)

    def map_reaction(self, reaction: str) -> Optional[tuple[str, float]]:
        for engine in self.engines:
            hit = engine.map_reaction(reaction)
            if hit is not None:
                return hit
        return None


def build_default_backend(model_dir: Optional[str] = None) -> ChainBackend:
    """Lookup first, transformer model when available, positional fallback."""
    engines: list[Backend] = [LookupBackend()]
    try:
        engines.append(RxnMapperBackend(model_dir))
    except ImportError:
        pass
    engines.append(PositionalBackend())
    return ChainBackend(engines)

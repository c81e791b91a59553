"""Reaction SMILES parsing and atom-map correspondence extraction."""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic
from .smiles import Molecule, SmilesError, parse_molecule, same_molecule_ignoring_maps


@dataclass(frozen=True)
class Reaction:
    reactants: tuple[Molecule, ...]
    reagents: tuple[Molecule, ...]
    products: tuple[Molecule, ...]
    mapped: bool
    text: str
    diagnostics: tuple[Diagnostic, ...] = ()


@dataclass(frozen=True)
class AtomLink:
    """One product atom traced to its reactant origin.

    For hydrogens carried implicitly (or as a bracket H count), the indices
    point at the carrier heavy atoms on both sides.
    """

    product_index: int
    product_atom_index: int
    reactant_index: int
    reactant_atom_index: int


def _split_components(side: str) -> list[str]:
    return [part for part in side.split(".") if part]


def parse_reaction(text: str) -> Reaction:
    """Parse '[reactants] > [reagents] > [products]' into molecule lists."""
    raw = text.strip()
    parts = raw.split(">")
    if len(parts) != 3:
        raise SmilesError(
            f"reaction SMILES needs exactly two '>' separators, found {len(parts) - 1}"
        )

    def parse_side(side: str, name: str, index_base: int) -> tuple[Molecule, ...]:
        mols = []
        for k, comp in enumerate(_split_components(side)):
            try:
                mols.append(parse_molecule(comp))
            except SmilesError as exc:
                raise SmilesError(
                    f"{name} component {k}: {exc}", getattr(exc, "offset", 0)
                ) from exc
        return tuple(mols)

    reactants = parse_side(parts[0], "reactant", 0)
    reagents = parse_side(parts[1], "reagent", 0)
    products = parse_side(parts[2], "product", 0)
    if not reactants or not products:
        raise SmilesError("reaction must have at least one reactant and one product")

    mapped = any(m.mapped for m in reactants + reagents + products)
    diagnostics = _map_diagnostics(reactants, products) if mapped else ()
    return Reaction(
        reactants=reactants,
        reagents=reagents,
        products=products,
        mapped=mapped,
        text=raw,
        diagnostics=tuple(diagnostics),
    )


def _map_diagnostics(reactants, products) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for name, side in (("reactant", reactants), ("product", products)):
        seen: dict[int, int] = {}
        for mol in side:
            for atom in mol.atoms:
                if atom.map_number is None:
                    continue
                seen[atom.map_number] = seen.get(atom.map_number, 0) + 1
        dupes = sorted(m for m, n in seen.items() if n > 1)
        if dupes:
            out.append(
                Diagnostic(
                    "warning",
                    "duplicate-map",
                    f"map numbers repeated on the {name} side: {dupes}",
                )
            )
    reactant_maps = {
        a.map_number for m in reactants for a in m.atoms if a.map_number is not None
    }
    orphans = sorted(
        {
            a.map_number
            for m in products
            for a in m.atoms
            if a.map_number is not None and a.map_number not in reactant_maps
        }
    )
    if orphans:
        out.append(
            Diagnostic(
                "warning",
                "orphan-map",
                f"product map numbers missing on the reactant side: {orphans}",
            )
        )
    unmapped = sum(
        1
        for m in products
        for a in m.atoms
        if a.map_number is None and a.element != "H"
    )
    if unmapped:
        out.append(
            Diagnostic(
                "warning",
                "unmapped-product-atoms",
                f"{unmapped} heavy product atoms carry no map number",
            )
        )
    return out


def atom_correspondence(
    reaction: Reaction, element: str
) -> tuple[list[AtomLink], list[tuple[int, int]]]:
    """Trace every product atom of `element` to its reactant origin.

    Returns (links, unattributed). Hydrogens attached implicitly follow
    their carrier atom's map; each contributes one entry so that
    len(links) + len(unattributed) equals the product-side element count.
    """
    if not reaction.mapped:
        raise ValueError("atom correspondence requires a mapped reaction")

    # (element, map) -> first matching reactant atom
    by_map: dict[tuple[str, int], tuple[int, int]] = {}
    # map -> reactant atom of any element (carrier lookup for hydrogens)
    any_map: dict[int, tuple[int, int]] = {}
    for ri, mol in enumerate(reaction.reactants):
        for ai, atom in enumerate(mol.atoms):
            if atom.map_number is None:
                continue
            by_map.setdefault((atom.element, atom.map_number), (ri, ai))
            any_map.setdefault(atom.map_number, (ri, ai))

    links: list[AtomLink] = []
    unattributed: list[tuple[int, int]] = []

    for pi, mol in enumerate(reaction.products):
        for ai, atom in enumerate(mol.atoms):
            if atom.element == element:
                partner = (
                    by_map.get((element, atom.map_number))
                    if atom.map_number is not None
                    else None
                )
                if partner is None:
                    unattributed.append((pi, ai))
                else:
                    links.append(AtomLink(pi, ai, partner[0], partner[1]))
            if element == "H":
                h = atom.explicit_h + atom.implicit_h
                if h == 0:
                    continue
                carrier = (
                    any_map.get(atom.map_number)
                    if atom.map_number is not None
                    else None
                )
                for _ in range(h):
                    if carrier is None:
                        unattributed.append((pi, ai))
                    else:
                        links.append(AtomLink(pi, ai, carrier[0], carrier[1]))

    return links, unattributed


def strip_reaction_maps(text: str) -> str:
    from .smiles import strip_atom_maps

    return strip_atom_maps(text)


def same_reaction_ignoring_maps(a: str, b: str) -> bool:
    """Component-wise equality of two reaction SMILES modulo maps and H explicitation."""
    ra, rb = parse_reaction(a), parse_reaction(b)
    for side_a, side_b in (
        (ra.reactants, rb.reactants),
        (ra.reagents, rb.reagents),
        (ra.products, rb.products),
    ):
        if len(side_a) != len(side_b):
            return False
        for ma, mb in zip(side_a, side_b):
            if not same_molecule_ignoring_maps(ma, mb):
                return False
    return True

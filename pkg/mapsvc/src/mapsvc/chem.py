"""Minimal SMILES handling for the mapping service.

The service only needs to tokenize reaction strings, count tokens against
the model budget, and rewrite atom tokens with map numbers (which requires
knowing the implicit hydrogen count when a bare organic-subset atom gets
bracketed). Kept deliberately self-contained so the service deploys without
the analysis package.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

VALENCES = {
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

ORGANIC_ALIPHATIC = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
ORGANIC_AROMATIC = ("b", "c", "n", "o", "p", "s")

BOND_ORDERS = {"-": 1.0, "=": 2.0, "#": 3.0, "$": 4.0, ":": 1.5, "/": 1.0, "\\": 1.0}

BRACKET_RE = re.compile(
    r"^\[(?P<isotope>\d+)?"
    r"(?P<symbol>se|as|b|c|n|o|p|s|[A-Z][a-z]?)"
    r"(?P<chiral>@@|@)?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>\+{1,2}|-{1,2}|\+\d+|-\d+)?"
    r"(?::(?P<map>\d+))?"
    r"\]$"
)


class ReactionSyntaxError(ValueError):
    pass


@dataclass
class AtomToken:
    text: str
    element: str
    aromatic: bool
    bracket: bool
    map_number: int | None
    bond_sum: float = 0.0

    def implicit_h(self) -> int:
        if self.bracket:
            return 0
        needed = math.ceil(self.bond_sum - 1e-9)
        for valence in VALENCES.get(self.element, ()):
            if valence >= needed:
                return valence - needed
        return 0


def tokenize(text: str) -> list[tuple[str, str]]:
    """(kind, text) pairs; kinds: atom, bond, open, close, ring, dot."""
    out: list[tuple[str, str]] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            j = text.find("]", i)
            if j < 0:
                raise ReactionSyntaxError(f"unterminated bracket at offset {i}")
            out.append(("atom", text[i : j + 1]))
            i = j + 1
        elif text[i : i + 2] in ("Cl", "Br"):
            out.append(("atom", text[i : i + 2]))
            i += 2
        elif ch in "BCNOPSFI" or ch in "bcnops":
            out.append(("atom", ch))
            i += 1
        elif ch in "-=#$:/\\":
            out.append(("bond", ch))
            i += 1
        elif ch == "(":
            out.append(("open", ch))
            i += 1
        elif ch == ")":
            out.append(("close", ch))
            i += 1
        elif ch == ".":
            out.append(("dot", ch))
            i += 1
        elif ch.isdigit():
            out.append(("ring", ch))
            i += 1
        elif ch == "%":
            if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                raise ReactionSyntaxError(f"bad ring marker at offset {i}")
            out.append(("ring", text[i : i + 3]))
            i += 3
        else:
            raise ReactionSyntaxError(f"unexpected character {ch!r} at offset {i}")
    return out


def parse_atom(token: str) -> AtomToken:
    if not token.startswith("["):
        aromatic = token in ORGANIC_AROMATIC
        if not (aromatic or token in ORGANIC_ALIPHATIC):
            raise ReactionSyntaxError(f"unknown atom {token!r}")
        return AtomToken(token, token.capitalize() if aromatic else token, aromatic, False, None)
    match = BRACKET_RE.match(token)
    if match is None:
        raise ReactionSyntaxError(f"malformed bracket atom {token!r}")
    symbol = match.group("symbol")
    map_s = match.group("map")
    map_number = int(map_s) if map_s else None
    if map_s is not None and map_number <= 0:
        raise ReactionSyntaxError(f"atom map must be positive in {token!r}")
    return AtomToken(token, symbol.capitalize(), symbol[0].islower(), True, map_number)


@dataclass
class ParsedMolecule:
    tokens: list[tuple[str, str]]
    atoms: list[AtomToken]
    atom_positions: list[int]  # index into tokens for each atom


def parse_molecule(text: str) -> ParsedMolecule:
    tokens = tokenize(text)
    atoms: list[AtomToken] = []
    positions: list[int] = []
    prev: int | None = None
    pending: str | None = None
    stack: list[int | None] = []
    rings: dict[str, tuple[int, str | None]] = {}

    def order(a: int, b: int, char: str | None) -> float:
        if char is None:
            return 1.5 if atoms[a].aromatic and atoms[b].aromatic else 1.0
        return BOND_ORDERS[char]

    for pos, (kind, text_) in enumerate(tokens):
        if kind == "atom":
            atom = parse_atom(text_)
            idx = len(atoms)
            atoms.append(atom)
            positions.append(pos)
            if prev is not None:
                o = order(prev, idx, pending)
                atoms[prev].bond_sum += o
                atom.bond_sum += o
            pending = None
            prev = idx
        elif kind == "bond":
            pending = text_
        elif kind == "open":
            stack.append(prev)
        elif kind == "close":
            if not stack:
                raise ReactionSyntaxError("unmatched ')'")
            prev = stack.pop()
        elif kind == "ring":
            if prev is None:
                raise ReactionSyntaxError("ring marker before any atom")
            if text_ in rings:
                other, opened = rings.pop(text_)
                o = order(other, prev, pending if pending is not None else opened)
                atoms[other].bond_sum += o
                atoms[prev].bond_sum += o
            else:
                rings[text_] = (prev, pending)
            pending = None
        elif kind == "dot":
            prev = None
    if rings:
        raise ReactionSyntaxError(f"dangling ring bond {sorted(rings)}")
    if stack:
        raise ReactionSyntaxError("unmatched '('")
    return ParsedMolecule(tokens=tokens, atoms=atoms, atom_positions=positions)


def render_with_maps(mol: ParsedMolecule, maps: dict[int, int]) -> str:
    """Re-emit the molecule with map numbers on the selected atom indices."""
    out = [text for _kind, text in mol.tokens]
    for atom_index, map_number in maps.items():
        atom = mol.atoms[atom_index]
        pos = mol.atom_positions[atom_index]
        if atom.bracket:
            out[pos] = atom.text[:-1] + f":{map_number}]"
        else:
            h = atom.implicit_h()
            h_part = "" if h == 0 else ("H" if h == 1 else f"H{h}")
            symbol = atom.element.lower() if atom.aromatic else atom.element
            out[pos] = f"[{symbol}{h_part}:{map_number}]"
    return "".join(out)


def split_reaction(text: str) -> tuple[list[str], list[str], list[str]]:
    parts = text.split(">")
    if len(parts) != 3:
        raise ReactionSyntaxError(
            f"reaction SMILES needs exactly two '>' separators, found {len(parts) - 1}"
        )
    return tuple([c for c in side.split(".") if c] for side in parts)  # type: ignore[return-value]


def count_tokens(reaction: str) -> int:
    total = 2
    for side in reaction.split(">"):
        for component in side.split("."):
            if component:
                total += len(tokenize(component))
    return total


def strip_maps(text: str) -> str:
    return re.sub(r":\d+\]", "]", text)

"""SMILES parsing for substances and atom-mapped reactions.

Covers the organic subset with implicit-hydrogen filling, bracket atoms
(isotope, chirality, H count, charge, atom map), branches, ring bonds and
dot-separated fragments. Atom order is preserved verbatim; no
canonicalization or aromaticity perception beyond lowercase notation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from .periodic import (
    ATOMIC_WEIGHTS,
    BRACKET_AROMATIC,
    DEFAULT_VALENCES,
    ORGANIC_ALIPHATIC,
    ORGANIC_AROMATIC,
    atomic_weight,
)

# All recognised element symbols (superset of the weights table).
KNOWN_ELEMENTS = frozenset(
    """H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni
    Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe
    Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg
    Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg
    Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og""".split()
)

_BOND_ORDERS = {"-": 1.0, "=": 2.0, "#": 3.0, "$": 4.0, ":": 1.5, "/": 1.0, "\\": 1.0}

_BRACKET_RE = re.compile(
    r"^\[(?P<isotope>\d+)?"
    r"(?P<symbol>se|as|b|c|n|o|p|s|[A-Z][a-z]?)"
    r"(?P<chiral>@@|@(?:TH[12]|AL[12]|SP[123]|TB\d{1,2}|OH\d{1,2})?)?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>\+{1,2}|-{1,2}|\+\d+|-\d+)?"
    r"(?::(?P<map>\d+))?"
    r"\]$"
)


class SmilesError(ValueError):
    """Syntax error in a SMILES string; carries the byte offset."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnsupportedFeatureError(SmilesError):
    """Syntactically valid construct this parser deliberately rejects."""


class UnknownElementError(KeyError):
    """Element without an entry in the embedded atomic-weight table."""


@dataclass(frozen=True)
class Atom:
    element: str
    charge: int = 0
    isotope: Optional[int] = None
    aromatic: bool = False
    explicit_h: int = 0
    implicit_h: int = 0
    map_number: Optional[int] = None
    chirality: str = ""
    bracket: bool = False
    token: str = ""
    bond_sum: float = 0.0  # sum of bond orders written around this atom

    @property
    def hydrogens(self) -> int:
        return self.explicit_h + self.implicit_h


@dataclass(frozen=True)
class Molecule:
    atoms: tuple[Atom, ...]
    smiles_text: str
    element_counts: dict[str, int]
    # Raw lexical stream; atom entries are indices into `atoms`, everything
    # else is the literal structural token.
    _tokens: tuple[object, ...] = field(default=(), repr=False)

    def serialize(self) -> str:
        parts = []
        for tok in self._tokens:
            parts.append(self.atoms[tok].token if isinstance(tok, int) else tok)
        return "".join(parts)

    def count(self, element: str) -> int:
        return self.element_counts.get(element, 0)

    @property
    def mapped(self) -> bool:
        return any(a.map_number is not None for a in self.atoms)


def _tokenize(text: str):
    """Yield (kind, value, offset) triples; kinds: atom, bond, open, close, ring, dot."""
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            j = text.find("]", i)
            if j < 0:
                raise SmilesError("unterminated bracket atom", i)
            yield "atom", text[i : j + 1], i
            i = j + 1
        elif ch == "*":
            raise UnsupportedFeatureError("wildcard atoms are not supported", i)
        elif text[i : i + 2] in ("Cl", "Br"):
            yield "atom", text[i : i + 2], i
            i += 2
        elif ch in "BCNOPSFI" or ch in "bcnops":
            yield "atom", ch, i
            i += 1
        elif ch in "-=#$:/\\":
            yield "bond", ch, i
            i += 1
        elif ch == "(":
            yield "open", ch, i
            i += 1
        elif ch == ")":
            yield "close", ch, i
            i += 1
        elif ch == ".":
            yield "dot", ch, i
            i += 1
        elif ch.isdigit():
            yield "ring", ch, i
            i += 1
        elif ch == "%":
            if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                raise SmilesError("'%' must be followed by two ring-bond digits", i)
            yield "ring", text[i : i + 3], i
            i += 3
        elif ch.isspace():
            raise SmilesError("whitespace inside SMILES", i)
        else:
            raise SmilesError(f"unexpected character {ch!r}", i)


def _parse_bracket(token: str, offset: int) -> Atom:
    m = _BRACKET_RE.match(token)
    if m is None:
        raise SmilesError(f"malformed bracket atom {token!r}", offset)
    symbol = m.group("symbol")
    aromatic = symbol[0].islower()
    element = symbol.capitalize() if aromatic else symbol
    if element not in KNOWN_ELEMENTS:
        raise SmilesError(f"unknown element {element!r}", offset)
    if aromatic and symbol not in BRACKET_AROMATIC:
        raise SmilesError(f"{symbol!r} cannot be aromatic", offset)
    hcount = m.group("hcount")
    if hcount is None:
        explicit_h = 0
    elif hcount == "H":
        explicit_h = 1
    else:
        explicit_h = int(hcount[1:])
    charge_s = m.group("charge")
    if charge_s is None:
        charge = 0
    elif charge_s in ("+", "++", "-", "--"):
        charge = charge_s.count("+") - charge_s.count("-")
    else:
        charge = int(charge_s)
    map_s = m.group("map")
    map_number = None
    if map_s is not None:
        map_number = int(map_s)
        if map_number <= 0:
            raise SmilesError("atom map numbers must be positive", offset)
    isotope = int(m.group("isotope")) if m.group("isotope") else None
    return Atom(
        element=element,
        charge=charge,
        isotope=isotope,
        aromatic=aromatic,
        explicit_h=explicit_h,
        implicit_h=0,
        map_number=map_number,
        chirality=m.group("chiral") or "",
        bracket=True,
        token=token,
    )


def _implicit_hydrogens(atom: Atom, bond_sum: float) -> int:
    if atom.bracket:
        return 0
    valences = DEFAULT_VALENCES[atom.element]
    needed = math.ceil(bond_sum - 1e-9)
    for v in valences:
        if v >= needed:
            return v - needed
    return 0


def parse_molecule(text: str) -> Molecule:
    """Parse a substance SMILES into a Molecule with filled element counts."""
    text = text.strip()
    if not text:
        raise SmilesError("empty SMILES string", 0)

    atoms: list[Atom] = []
    tokens: list[object] = []
    bond_sums: list[float] = []
    prev: Optional[int] = None
    pending_bond: Optional[str] = None
    branch_stack: list[Optional[int]] = []
    open_rings: dict[str, tuple[int, Optional[str], int]] = {}

    def bond_order(a: int, b: int, char: Optional[str]) -> float:
        if char is None:
            both_aromatic = atoms[a].aromatic and atoms[b].aromatic
            return 1.5 if both_aromatic else 1.0
        return _BOND_ORDERS[char]

    for kind, value, offset in _tokenize(text):
        if kind == "atom":
            if value.startswith("["):
                atom = _parse_bracket(value, offset)
            else:
                aromatic = value in ORGANIC_AROMATIC
                element = value.capitalize() if aromatic else value
                if not (value in ORGANIC_ALIPHATIC or aromatic):
                    raise SmilesError(f"unknown organic-subset atom {value!r}", offset)
                atom = Atom(element=element, aromatic=aromatic, token=value)
            idx = len(atoms)
            atoms.append(atom)
            tokens.append(idx)
            bond_sums.append(0.0)
            if prev is not None:
                order = bond_order(prev, idx, pending_bond)
                bond_sums[prev] += order
                bond_sums[idx] += order
            pending_bond = None
            prev = idx
        elif kind == "bond":
            if pending_bond is not None:
                raise SmilesError("two consecutive bond symbols", offset)
            if prev is None:
                raise SmilesError("bond symbol before any atom", offset)
            pending_bond = value
            tokens.append(value)
        elif kind == "open":
            if prev is None:
                raise SmilesError("branch start before any atom", offset)
            branch_stack.append(prev)
            tokens.append(value)
        elif kind == "close":
            if not branch_stack:
                raise SmilesError("unmatched ')'", offset)
            prev = branch_stack.pop()
            tokens.append(value)
        elif kind == "ring":
            if prev is None:
                raise SmilesError("ring-bond digit before any atom", offset)
            key = value
            if key in open_rings:
                other, opened_bond, _ = open_rings.pop(key)
                if other == prev:
                    raise SmilesError(f"ring bond {key} closes on its own atom", offset)
                char = pending_bond if pending_bond is not None else opened_bond
                if pending_bond and opened_bond and pending_bond != opened_bond:
                    raise SmilesError(f"conflicting bond orders on ring bond {key}", offset)
                order = bond_order(other, prev, char)
                bond_sums[other] += order
                bond_sums[prev] += order
            else:
                open_rings[key] = (prev, pending_bond, offset)
            pending_bond = None
            tokens.append(value)
        elif kind == "dot":
            if prev is None and not atoms:
                raise SmilesError("leading '.'", offset)
            if pending_bond is not None:
                raise SmilesError("bond symbol before '.'", offset)
            prev = None
            tokens.append(value)

    if branch_stack:
        raise SmilesError("unmatched '('", len(text) - 1)
    if open_rings:
        key, (_, _, offset) = next(iter(open_rings.items()))
        raise SmilesError(f"dangling ring bond {key}", offset)
    if pending_bond is not None:
        raise SmilesError("trailing bond symbol", len(text) - 1)

    atoms = [_finish_atom(a, bond_sums[i]) for i, a in enumerate(atoms)]

    counts: dict[str, int] = {}
    for a in atoms:
        counts[a.element] = counts.get(a.element, 0) + 1
        h = a.explicit_h + a.implicit_h
        if h:
            counts["H"] = counts.get("H", 0) + h

    return Molecule(
        atoms=tuple(atoms),
        smiles_text=text,
        element_counts=counts,
        _tokens=tuple(tokens),
    )


def _finish_atom(atom: Atom, bond_sum: float) -> Atom:
    from dataclasses import replace

    return replace(
        atom,
        implicit_h=_implicit_hydrogens(atom, bond_sum),
        bond_sum=bond_sum,
    )


def molar_mass(mol: Molecule) -> float:
    """Molecular weight in g/mol including implicit and explicit hydrogens."""
    total = 0.0
    for element, count in mol.element_counts.items():
        if element not in ATOMIC_WEIGHTS:
            raise UnknownElementError(element)
        total += atomic_weight(element) * count
    return total


_MAP_SUFFIX_RE = re.compile(r":\d+\]")


def strip_atom_maps(text: str) -> str:
    """Remove ':N' atom-map suffixes from every bracket atom in a SMILES string."""
    return _MAP_SUFFIX_RE.sub("]", text)


def _bracket_needed(atom: Atom) -> bool:
    if atom.charge or atom.isotope is not None or atom.chirality or atom.map_number:
        return True
    symbol = atom.element.lower() if atom.aromatic else atom.element
    if atom.aromatic and symbol not in ORGANIC_AROMATIC:
        return True
    if not atom.aromatic and atom.element not in ORGANIC_ALIPHATIC:
        return True
    # A bare atom would pick up the valence-rule hydrogen count; the bracket
    # is redundant only when it states exactly that count.
    expected = _implicit_hydrogens(
        Atom(element=atom.element, aromatic=atom.aromatic), atom.bond_sum
    )
    return atom.explicit_h + atom.implicit_h != expected


def render_atom(atom: Atom, keep_map: bool = True) -> str:
    """Regenerate an atom token from its fields, dropping redundant brackets."""
    working = atom
    if not keep_map and atom.map_number is not None:
        from dataclasses import replace

        working = replace(atom, map_number=None)
    symbol = working.element.lower() if working.aromatic else working.element
    if not _bracket_needed(working):
        return symbol
    h = working.explicit_h + working.implicit_h
    h_part = "" if h == 0 else ("H" if h == 1 else f"H{h}")
    if working.charge == 0:
        charge_part = ""
    elif working.charge in (1, -1):
        charge_part = "+" if working.charge == 1 else "-"
    else:
        charge_part = f"{working.charge:+d}"
    isotope_part = "" if working.isotope is None else str(working.isotope)
    map_part = "" if working.map_number is None else f":{working.map_number}"
    return f"[{isotope_part}{symbol}{working.chirality}{h_part}{charge_part}{map_part}]"


def unmapped_form(mol: Molecule) -> str:
    """Serialize in input atom order with maps removed and redundant brackets
    unwrapped, so provider output lines up with bill-of-substances strings."""
    parts = []
    for tok in mol._tokens:
        if isinstance(tok, int):
            parts.append(render_atom(mol.atoms[tok], keep_map=False))
        else:
            parts.append(tok)
    return "".join(parts)


def heavy_atom_signature(mol: Molecule) -> tuple:
    """Element/charge sequence of non-hydrogen atoms, used for map-insensitive comparison."""
    return tuple((a.element, a.charge) for a in mol.atoms if a.element != "H")


def same_molecule_ignoring_maps(a: Molecule, b: Molecule) -> bool:
    """True when two molecules differ at most in atom maps and H explicitation."""
    return (
        heavy_atom_signature(a) == heavy_atom_signature(b)
        and a.element_counts == b.element_counts
    )

"""SMILES subset parser producing heavy-atom molecular graphs.

Supported: organic-subset atoms, bracket atoms (isotope, chirality,
hydrogen count and atom class are skipped; charge is kept), bond symbols
``- = # :`` plus the directional ``/ \\`` (read as single), branches, ring
closures ``0-9`` and ``%nn``.  Disconnected input (``.``) is rejected.
Implicit and bracket hydrogen counts are never turned into atoms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class SmilesError(ValueError):
    def __init__(self, message: str, smiles: str, position: int):
        self.smiles = smiles
        self.position = position
        super().__init__(f"{message} at position {position} in {smiles!r}")


class BondOrder(str, enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"


@dataclass
class Atom:
    symbol: str
    aromatic: bool = False
    degree: int = 0
    charge: int = 0


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    order: BondOrder


@dataclass
class Molecule:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)


_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
}
_ORGANIC = {"B", "C", "N", "O", "P", "S", "F", "I", "Cl", "Br"}
_AROMATIC_ORGANIC = {"b", "c", "n", "o", "p", "s"}
_AROMATIC_BRACKET = {"b", "c", "n", "o", "p", "s", "se", "as", "te"}

ELEMENTS = frozenset(
    """H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co
    Ni Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te
    I Xe Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir
    Pt Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No
    Lr Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og""".split()
)


class _Parser:
    def __init__(self, smiles: str):
        self.s = smiles
        self.pos = 0
        self.mol = Molecule()
        self.bond_index: dict[tuple[int, int], int] = {}

    def error(self, msg: str, pos: int | None = None) -> SmilesError:
        return SmilesError(msg, self.s, self.pos if pos is None else pos)

    def parse(self) -> Molecule:
        s = self.s
        prev: int | None = None
        pending_bond: tuple[BondOrder, int] | None = None
        branch_stack: list[tuple[int, int]] = []
        rings: dict[int, tuple[int, BondOrder | None, int]] = {}

        while self.pos < len(s):
            ch = s[self.pos]
            start = self.pos
            if ch == "(":
                if prev is None:
                    raise self.error("branch opened before any atom")
                if pending_bond is not None:
                    raise self.error("bond symbol before branch")
                branch_stack.append((prev, start))
                self.pos += 1
            elif ch == ")":
                if not branch_stack:
                    raise self.error("unbalanced ')'")
                if pending_bond is not None:
                    raise self.error("bond symbol not followed by an atom", pending_bond[1])
                prev, _ = branch_stack.pop()
                self.pos += 1
            elif ch in _BOND_SYMBOLS:
                if pending_bond is not None:
                    raise self.error("two consecutive bond symbols")
                if prev is None:
                    raise self.error("bond symbol before any atom")
                pending_bond = (_BOND_SYMBOLS[ch], start)
                self.pos += 1
            elif ch == ".":
                raise self.error("multi-fragment SMILES ('.') not supported")
            elif ch.isdigit() or ch == "%":
                if prev is None:
                    raise self.error("ring closure before any atom")
                num = self._ring_number()
                order = pending_bond[0] if pending_bond else None
                pending_bond = None
                if num in rings:
                    other, open_order, _ = rings.pop(num)
                    if order and open_order and order != open_order:
                        raise self.error(f"conflicting bond orders for ring closure {num}", start)
                    self._add_bond(other, prev, order or open_order, start)
                else:
                    rings[num] = (prev, order, start)
            else:
                atom_idx = self._atom()
                if prev is not None:
                    order = pending_bond[0] if pending_bond else None
                    self._add_bond(prev, atom_idx, order, start)
                pending_bond = None
                prev = atom_idx

        if pending_bond is not None:
            raise self.error("dangling bond symbol at end of input", pending_bond[1])
        if branch_stack:
            raise self.error("unbalanced '('", branch_stack[-1][1])
        if rings:
            num, (_, _, where) = next(iter(rings.items()))
            raise self.error(f"unmatched ring closure {num}", where)
        if not self.mol.atoms:
            raise self.error("no atoms", 0)
        for b in self.mol.bonds:
            self.mol.atoms[b.i].degree += 1
            self.mol.atoms[b.j].degree += 1
        return self.mol

    def _ring_number(self) -> int:
        s = self.s
        if s[self.pos] == "%":
            digits = s[self.pos + 1 : self.pos + 3]
            if len(digits) != 2 or not digits.isdigit():
                raise self.error("'%' must be followed by two digits")
            self.pos += 3
            return int(digits)
        self.pos += 1
        return int(s[self.pos - 1])

    def _add_bond(self, i: int, j: int, order: BondOrder | None, pos: int) -> None:
        if i == j:
            raise self.error("atom bonded to itself", pos)
        a, b = (i, j) if i < j else (j, i)
        if (a, b) in self.bond_index:
            raise self.error(f"duplicate bond between atoms {a} and {b}", pos)
        if order is None:
            atoms = self.mol.atoms
            both_aromatic = atoms[a].aromatic and atoms[b].aromatic
            order = BondOrder.AROMATIC if both_aromatic else BondOrder.SINGLE
        self.bond_index[(a, b)] = len(self.mol.bonds)
        self.mol.bonds.append(Bond(a, b, order))

    def _atom(self) -> int:
        s = self.s
        ch = s[self.pos]
        if ch == "[":
            atom = self._bracket_atom()
        elif s.startswith(("Cl", "Br"), self.pos):
            atom = Atom(s[self.pos : self.pos + 2])
            self.pos += 2
        elif ch in _ORGANIC:
            atom = Atom(ch)
            self.pos += 1
        elif ch in _AROMATIC_ORGANIC:
            atom = Atom(ch.upper(), aromatic=True)
            self.pos += 1
        else:
            raise self.error(f"unknown symbol {ch!r}")
        self.mol.atoms.append(atom)
        return len(self.mol.atoms) - 1

    def _bracket_atom(self) -> Atom:
        s = self.s
        open_pos = self.pos
        close = s.find("]", open_pos)
        if close < 0:
            raise self.error("unterminated bracket atom")
        body = s[open_pos + 1 : close]
        k = 0
        while k < len(body) and body[k].isdigit():  # isotope
            k += 1

        symbol, aromatic = None, False
        two, one = body[k : k + 2], body[k : k + 1]
        if two in ELEMENTS:
            symbol = two
        elif two in _AROMATIC_BRACKET:
            symbol, aromatic = two.capitalize(), True
        elif one in ELEMENTS:
            symbol = one
        elif one in _AROMATIC_BRACKET:
            symbol, aromatic = one.upper(), True
        if symbol is None:
            raise self.error(f"unknown element in bracket atom [{body}]", open_pos + 1 + k)
        k += len(symbol)

        while k < len(body) and body[k] == "@":  # chirality
            k += 1
        if body[k : k + 2] in ("TH", "AL", "SP", "TB", "OH"):
            k += 2
            while k < len(body) and body[k].isdigit():
                k += 1
        if k < len(body) and body[k] == "H":
            k += 1
            while k < len(body) and body[k].isdigit():
                k += 1

        charge = 0
        if k < len(body) and body[k] in "+-":
            sign = 1 if body[k] == "+" else -1
            k += 1
            if k < len(body) and body[k].isdigit():
                j = k
                while k < len(body) and body[k].isdigit():
                    k += 1
                charge = sign * int(body[j:k])
            else:
                charge = sign
                while k < len(body) and body[k] == body[k - 1]:
                    charge += sign
                    k += 1
        if k < len(body) and body[k] == ":":  # atom class
            k += 1
            while k < len(body) and body[k].isdigit():
                k += 1
        if k != len(body):
            raise self.error(f"unexpected {body[k]!r} in bracket atom", open_pos + 1 + k)
        self.pos = close + 1
        return Atom(symbol, aromatic=aromatic, charge=charge)


def parse_smiles(smiles: str) -> Molecule:
    """Parse ``smiles`` into a :class:`Molecule`; raises :class:`SmilesError`."""
    if not smiles:
        raise SmilesError("empty SMILES", smiles, 0)
    return _Parser(smiles).parse()

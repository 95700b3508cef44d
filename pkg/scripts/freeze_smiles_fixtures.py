"""Regenerate tests/fixtures/smiles_fixtures.json from RDKit.

RDKit is used once as an independent reference; it is not a runtime or
test dependency.  Molecules are read unsanitised so bond orders stay as
written (no kekulisation or aromaticity perception).
"""

import json
from pathlib import Path

from rdkit import Chem

SMILES = [
    "CCO",
    "C1CC1",
    "c1ccccc1",
    "CC(=O)O",
    "C1=CC=CC=C1",
    "CC#N",
    "c1ccncc1",
    "c1cc[nH]c1",
    "c1ccsc1",
    "c1ccc2ccccc2c1",
    "CC(=O)Oc1ccccc1C(=O)O",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
    "C[N+](=O)[O-]",
    "[NH4+]",
    "F/C=C/F",
    "C[C@H](N)C(=O)O",
    "C%10CCCCC%10",
    "ClC(Cl)(Cl)Br",
    "OB(O)c1ccccc1",
    "O=P(O)(O)OCC1CC2CCC1C2I",
]

ORDER = {"SINGLE": "single", "DOUBLE": "double", "TRIPLE": "triple", "AROMATIC": "aromatic"}


def main():
    out = []
    for s in SMILES:
        mol = Chem.MolFromSmiles(s, sanitize=False)
        bonds = sorted(
            [min(b.GetBeginAtomIdx(), b.GetEndAtomIdx()), max(b.GetBeginAtomIdx(), b.GetEndAtomIdx()),
             ORDER[str(b.GetBondType())]]
            for b in mol.GetBonds()
        )
        out.append({
            "smiles": s,
            "atom_count": mol.GetNumAtoms(),
            "bond_count": mol.GetNumBonds(),
            "atoms": [a.GetSymbol() for a in mol.GetAtoms()],
            "bonds": bonds,
        })
    path = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "smiles_fixtures.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print(f"wrote {len(out)} fixtures to {path}")


if __name__ == "__main__":
    main()

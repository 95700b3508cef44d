from __future__ import annotations

import numpy as np

from ..graph.containers import MolGraph
from .smiles import BondOrder, Molecule, parse_smiles

ATOM_VOCAB = ("B", "C", "N", "O", "F", "P", "S", "Cl", "Br", "I")
BOND_VOCAB = (BondOrder.SINGLE, BondOrder.DOUBLE, BondOrder.TRIPLE, BondOrder.AROMATIC)

# one-hot over ATOM_VOCAB + "other", then the node degree
NODE_CHANNELS = len(ATOM_VOCAB) + 2
EDGE_CHANNELS = len(BOND_VOCAB)

_ATOM_SLOT = {sym: k for k, sym in enumerate(ATOM_VOCAB)}
_OTHER_SLOT = len(ATOM_VOCAB)
_BOND_SLOT = {order: k for k, order in enumerate(BOND_VOCAB)}


def featurize(mol: Molecule, dtype=np.float64) -> MolGraph:
    n, m = mol.num_atoms, mol.num_bonds
    nodes = np.zeros((n, NODE_CHANNELS), dtype=dtype)
    for i, atom in enumerate(mol.atoms):
        nodes[i, _ATOM_SLOT.get(atom.symbol, _OTHER_SLOT)] = 1.0
        nodes[i, -1] = atom.degree
    edges = np.zeros((m, 2), dtype=np.int64)
    edge_feats = np.zeros((m, EDGE_CHANNELS), dtype=dtype)
    for k, bond in enumerate(mol.bonds):
        edges[k] = (min(bond.i, bond.j), max(bond.i, bond.j))
        edge_feats[k, _BOND_SLOT[bond.order]] = 1.0
    return MolGraph(nodes, edges, edge_feats)


def smiles_to_graph(smiles: str, dtype=np.float64) -> MolGraph:
    return featurize(parse_smiles(smiles), dtype=dtype)

from .dataset import DatasetError, DatasetRecord, LoadResult, load_csv
from .featurize import ATOM_VOCAB, BOND_VOCAB, EDGE_CHANNELS, NODE_CHANNELS, featurize, smiles_to_graph
from .smiles import Atom, Bond, BondOrder, Molecule, SmilesError, parse_smiles

__all__ = [
    "ATOM_VOCAB",
    "Atom",
    "BOND_VOCAB",
    "Bond",
    "BondOrder",
    "DatasetError",
    "DatasetRecord",
    "EDGE_CHANNELS",
    "LoadResult",
    "Molecule",
    "NODE_CHANNELS",
    "SmilesError",
    "featurize",
    "load_csv",
    "parse_smiles",
    "smiles_to_graph",
]

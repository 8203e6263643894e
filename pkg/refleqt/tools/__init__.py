"""File readers and writers for the workbench"""
from .bundle_reader import BundleFile, LoadedBundle, read_bundle
from .proof_files import read_formula, read_proof, write_formula, write_proof, write_proofs
from .theory_reader import TheoryLoader, dump_theory, load_theory, load_translation

__all__ = [
    'BundleFile',
    'LoadedBundle',
    'TheoryLoader',
    'dump_theory',
    'load_theory',
    'load_translation',
    'read_bundle',
    'read_formula',
    'read_proof',
    'write_formula',
    'write_proof',
    'write_proofs',
]

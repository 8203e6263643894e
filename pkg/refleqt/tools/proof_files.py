"""
Proof and Formula Files
=======================
Reads and writes S-expression formula and proof files.
"""

import logging
from pathlib import Path
from typing import Iterable, List, Union

from ..calculus import Proof, parse_proof, print_proof
from ..syntax import Formula, Signature, parse_formula, print_formula

logger = logging.getLogger("refleqt.tools.proof_files")

PathLike = Union[str, Path]


def _read_text(file_path: PathLike) -> str:
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"file not found at: {path}")
    return path.read_text(encoding="utf-8")


def read_formula(file_path: PathLike, sig: Signature) -> Formula:
    """Parse the single formula stored in ``file_path``."""
    return parse_formula(_read_text(file_path), sig)


def read_proof(file_path: PathLike, sig: Signature) -> Proof:
    """Parse the proof stored in ``file_path``; positions in errors are relative to the file."""
    proof = parse_proof(_read_text(file_path), sig)
    logger.debug(f"Read proof with {proof.node_count} steps from {file_path}")
    return proof


def write_formula(file_path: PathLike, f: Formula) -> None:
    Path(file_path).write_text(print_formula(f) + "\n", encoding="utf-8")


def write_proof(file_path: PathLike, p: Proof) -> None:
    Path(file_path).write_text(print_proof(p) + "\n", encoding="utf-8")


def write_proofs(directory: PathLike, proofs: Iterable[Proof], stem: str = "proof") -> List[Path]:
    """Write each proof to ``<directory>/<stem>-NNN.prf`` and return the paths."""
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, p in enumerate(proofs):
        path = out_dir / f"{stem}-{i:03d}.prf"
        write_proof(path, p)
        written.append(path)
    logger.info(f"Wrote {len(written)} proofs to {out_dir}")
    return written

"""
Witness Bundle Reader
=====================
Validates JSON witness bundles and resolves the files they point to.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError

from ..calculus import Proof, TheoryPresentation
from ..errors import BundleError, RefleqtError
from ..interpretations import REQUIRED_ROLES, WitnessBundle
from ..syntax import Formula, Signature, Var, parse_formula, parse_variable
from .proof_files import read_proof
from .theory_reader import TheoryLoader

logger = logging.getLogger("refleqt.tools.bundle_reader")

BundleKind = Literal["identity", "isomorphism", "retract", "bi-interpretation", "adequacy"]


class WitnessSpec(BaseModel):
    """A binary formula relating the two sides of an isomorphism."""

    vars: List[str] = Field(min_length=2, max_length=2, description="The formula's two free variables")
    formula: str = Field(description="S-expression over the host signature")


class BundleFile(BaseModel):
    kind: BundleKind
    translations: Dict[str, str] = Field(description="Role to translation file path")
    witnesses: Dict[str, WitnessSpec] = Field(default_factory=dict)
    discharges: Dict[str, str] = Field(default_factory=dict, description="Obligation label to proof file path")
    hosts: Dict[str, str] = Field(default_factory=dict, description="Obligation host role to theory file path")


@dataclass(frozen=True)
class LoadedBundle:
    bundle: WitnessBundle
    hosts: Dict[str, TheoryPresentation]

    def host(self, default: Optional[TheoryPresentation] = None):
        """The host argument for ``check_bundle``: the mapping, or ``default`` when no hosts are listed."""
        if self.hosts:
            return self.hosts
        if default is None:
            raise BundleError("bundle lists no host theories and none was given")
        return default


def _host_signature(hosts: Dict[str, TheoryPresentation], fallback: Signature) -> Signature:
    sig: Optional[Signature] = None
    for theory in hosts.values():
        sig = theory.coding_signature if sig is None else sig.union(theory.coding_signature)
    return sig or fallback


def read_bundle(file_path: str, loader: Optional[TheoryLoader] = None) -> LoadedBundle:
    """
    Reads a witness bundle and everything it references.

    Args:
        file_path: Path to the JSON bundle; referenced paths are relative to it
        loader: Shared theory loader

    Returns:
        The bundle with its discharge proofs parsed, plus the host theories by role

    Raises:
        BundleError: If the JSON does not match the bundle schema or a referenced file is unusable
    """
    path = Path(file_path)
    if not path.exists():
        raise BundleError(f"bundle file not found at: {path}")
    try:
        spec = BundleFile.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, ValidationError) as exc:
        raise BundleError(f"{path}: {exc}") from exc
    roles, _ = REQUIRED_ROLES[spec.kind]
    loader = loader or TheoryLoader()
    base = path.parent
    try:
        translations = {role: loader.translation(str(base / rel)) for role, rel in spec.translations.items()}
        hosts = {role: loader.theory(str(base / rel)) for role, rel in spec.hosts.items()}
    except RefleqtError as exc:
        raise BundleError(f"{path}: {exc}") from exc
    fallback = translations[roles[0]].target if roles[0] in translations else Signature("empty")
    sig = _host_signature(hosts, fallback)
    witnesses: Dict[str, Tuple[Tuple[Var, Var], Formula]] = {}
    for role, w in spec.witnesses.items():
        a, b = (parse_variable(v) for v in w.vars)
        try:
            witnesses[role] = ((a, b), parse_formula(w.formula, sig))
        except RefleqtError as exc:
            raise BundleError(f"{path}: witness {role}: {exc}") from exc
    discharges: Dict[str, Proof] = {}
    for label, rel in spec.discharges.items():
        try:
            discharges[label] = read_proof(base / rel, sig)
        except (RefleqtError, OSError) as exc:
            raise BundleError(f"{path}: discharge {label}: {exc}") from exc
    bundle = WitnessBundle(spec.kind, translations, witnesses, discharges)
    logger.debug(f"Read {spec.kind} bundle from {path}: {len(discharges)} discharges, roles {sorted(translations)}")
    return LoadedBundle(bundle=bundle, hosts=hosts)

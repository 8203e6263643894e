"""
Theory and Translation Reader
=============================
Loads theory presentations (``.thy``) and translations (``.tr``) from YAML files.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import yaml

from ..calculus import (
    POLICY_CLOSURE,
    POLICY_NONE,
    AxiomFamily,
    IncludedTheory,
    NumeralInstanceFamily,
    SchemaDescriptor,
    TheoryPresentation,
)
from ..codec import NAME_CHARACTERS
from ..errors import RefleqtError, TheoryFileError
from ..generators import ReflectionFamily, SmallReflectionFamily
from ..interpretations import Translation
from ..syntax import Formula, Signature, Var, parse_formula, parse_variable, print_formula

logger = logging.getLogger("refleqt.tools.theory_reader")

PROFILES = ("empty", "arithmetic")
FAMILY_KINDS = ("numeral-instances", "uniform-reflection", "small-reflection")


def _read_yaml(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise TheoryFileError(f"file not found at: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise TheoryFileError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise TheoryFileError(f"{path}: expected a mapping at the top level")
    return data


def _check_name(name: Any, path: Path) -> str:
    if not isinstance(name, str) or not name:
        raise TheoryFileError(f"{path}: missing 'name'")
    bad = sorted({ch for ch in name if ch not in NAME_CHARACTERS})
    if bad:
        raise TheoryFileError(f"{path}: name {name!r} contains characters that cannot be coded: {''.join(bad)}")
    return name


def read_signature(block: Optional[Mapping[str, Any]], default_name: str) -> Signature:
    """Build a signature from a ``signature`` block.

    Args:
        block: Mapping with ``profile``, ``coding``, ``truth``, ``commitment``,
            ``relations`` and ``functions`` (symbol to arity) and ``constants``
        default_name: Name used when the block has none

    Returns:
        The signature the block describes
    """
    block = dict(block or {})
    profile = block.get("profile", "empty")
    if profile not in PROFILES:
        raise TheoryFileError(f"unknown signature profile {profile!r}; expected one of {', '.join(PROFILES)}")
    coding = bool(block.get("coding", False))
    if coding and profile != "arithmetic":
        raise TheoryFileError("the coding vocabulary needs the arithmetic profile")
    return Signature(
        name=str(block.get("name", default_name)),
        relations=tuple((str(k), int(v)) for k, v in (block.get("relations") or {}).items()),
        functions=tuple((str(k), int(v)) for k, v in (block.get("functions") or {}).items()),
        constants=tuple(str(c) for c in block.get("constants") or ()),
        has_arithmetic=profile == "arithmetic",
        has_coding=coding,
        has_truth=bool(block.get("truth", False)),
        has_commitment=bool(block.get("commitment", False)),
    )


def _formula(text: Any, sig: Signature, where: str, **extra) -> Formula:
    if not isinstance(text, str):
        raise TheoryFileError(f"{where}: expected a formula string")
    try:
        return parse_formula(text, sig, **extra)
    except RefleqtError as exc:
        raise TheoryFileError(f"{where}: {exc}") from exc


def _schema(entry: Mapping[str, Any], sig: Signature, where: str) -> SchemaDescriptor:
    placeholder = str(entry.get("placeholder", "P"))
    arity = int(entry.get("arity", 1))
    policy = entry.get("policy", POLICY_CLOSURE)
    if policy not in (POLICY_CLOSURE, POLICY_NONE):
        raise TheoryFileError(f"{where}: unknown schema policy {policy!r}")
    quote = entry.get("quote")
    template = _formula(entry.get("template"), sig, where, extra_relations={placeholder: arity},
                        extra_constants=[quote] if quote else ())
    return SchemaDescriptor(str(entry.get("name", "schema")), template, placeholder, arity, policy, quote)


class TheoryLoader:
    """Reads theory files, sharing each included file's presentation between includers."""

    def __init__(self) -> None:
        self._theories: Dict[Path, TheoryPresentation] = {}
        self._translations: Dict[Path, Translation] = {}
        self._loading: List[Path] = []

    def theory(self, file_path: str) -> TheoryPresentation:
        path = Path(file_path).resolve()
        if path in self._theories:
            return self._theories[path]
        if path in self._loading:
            raise TheoryFileError(f"{path}: circular include")
        self._loading.append(path)
        try:
            theory = self._read_theory(path)
        finally:
            self._loading.pop()
        self._theories[path] = theory
        logger.debug(f"Loaded theory {theory.name} from {path}")
        return theory

    def _read_theory(self, path: Path) -> TheoryPresentation:
        data = _read_yaml(path)
        name = _check_name(data.get("name"), path)
        included = [self.theory(str(path.parent / inc)) for inc in data.get("include") or ()]
        sig: Optional[Signature] = None
        for inc in included:
            sig = inc.signature if sig is None else sig.union(inc.signature)
        if data.get("signature") or sig is None:
            own = read_signature(data.get("signature"), name)
            sig = own if sig is None else sig.union(own)
        axioms = tuple(_formula(text, sig, f"{path}: axiom {i + 1}") for i, text in enumerate(data.get("axioms") or ()))
        schemata = tuple(_schema(entry, sig, f"{path}: schema {i + 1}")
                         for i, entry in enumerate(data.get("schemata") or ()))
        families: List[AxiomFamily] = [IncludedTheory(inc) for inc in included]
        for i, entry in enumerate(data.get("families") or ()):
            families.append(self._family(entry, sig, path, f"{path}: family {i + 1}"))
        referenced = [self.theory(str(path.parent / ref)) for ref in data.get("references") or ()]
        interpretation = None
        if data.get("interpretation"):
            interpretation = self.translation(str(path.parent / data["interpretation"]))
        return TheoryPresentation(
            name=name,
            signature=sig,
            axioms=axioms,
            schemata=schemata,
            families=tuple(families),
            interpretation=interpretation,
            references=tuple(included) + tuple(referenced),
            description=str(data.get("description", "")),
        )

    def _family(self, entry: Mapping[str, Any], sig: Signature, path: Path, where: str) -> AxiomFamily:
        kind = entry.get("kind")
        if kind == "numeral-instances":
            template = _formula(entry.get("template"), sig, where)
            try:
                return NumeralInstanceFamily(template, int(entry.get("modulus", 1)), int(entry.get("residue", 0)))
            except RefleqtError as exc:
                raise TheoryFileError(f"{where}: {exc}") from exc
        if kind in ("uniform-reflection", "small-reflection"):
            if "over" not in entry:
                raise TheoryFileError(f"{where}: {kind} needs 'over'")
            over = self.theory(str(path.parent / entry["over"]))
            if kind == "uniform-reflection":
                return ReflectionFamily(over)
            translation = None
            if entry.get("translation"):
                translation = self.translation(str(path.parent / entry["translation"]))
            phi_sig = over.signature if translation is None else translation.source
            phi = _formula(entry.get("formula"), phi_sig, where)
            try:
                return SmallReflectionFamily(over, phi, translation)
            except RefleqtError as exc:
                raise TheoryFileError(f"{where}: {exc}") from exc
        raise TheoryFileError(f"{where}: unknown family kind {kind!r}; expected one of {', '.join(FAMILY_KINDS)}")

    def translation(self, file_path: str) -> Translation:
        path = Path(file_path).resolve()
        if path not in self._translations:
            self._translations[path] = self._read_translation(path)
            logger.debug(f"Loaded translation {self._translations[path].name} from {path}")
        return self._translations[path]

    def _side(self, block: Any, path: Path, role: str) -> Signature:
        if isinstance(block, str):
            return self.theory(str(path.parent / block)).signature
        return read_signature(block, role)

    def _read_translation(self, path: Path) -> Translation:
        data = _read_yaml(path)
        name = _check_name(data.get("name"), path)
        source = self._side(data.get("source"), path, "source")
        target = self._side(data.get("target"), path, "target")
        domain: Optional[Tuple[Var, Formula]] = None
        if data.get("domain"):
            block = data["domain"]
            domain = (parse_variable(str(block.get("var", "x"))),
                      _formula(block.get("formula"), target, f"{path}: domain"))
        relation_map: Dict[str, Tuple[Tuple[Var, ...], Formula]] = {}
        for symbol, block in (data.get("relations") or {}).items():
            params = tuple(parse_variable(str(v)) for v in block.get("vars") or ())
            relation_map[str(symbol)] = (params, _formula(block.get("formula"), target, f"{path}: relation {symbol}"))
        try:
            return Translation(name, source, target, domain, relation_map, bool(data.get("preserve_functions", False)))
        except RefleqtError as exc:
            raise TheoryFileError(f"{path}: {exc}") from exc


def load_theory(file_path: str, loader: Optional[TheoryLoader] = None) -> TheoryPresentation:
    """
    Reads a theory presentation from a YAML theory file.

    Args:
        file_path: Path to the ``.thy`` file; ``include`` entries are relative to it
        loader: Shared loader, so theories and translations read together agree on includes

    Returns:
        The theory presentation

    Raises:
        TheoryFileError: If the file is missing, not YAML, or describes an ill-formed theory
    """
    return (loader or TheoryLoader()).theory(file_path)


def load_translation(file_path: str, loader: Optional[TheoryLoader] = None) -> Translation:
    """Reads a translation; ``source``/``target`` are signature blocks or theory file paths."""
    return (loader or TheoryLoader()).translation(file_path)


def signature_block(sig: Signature) -> Dict[str, Any]:
    block: Dict[str, Any] = {"name": sig.name, "profile": "arithmetic" if sig.has_arithmetic else "empty"}
    for key, flag in (("coding", sig.has_coding), ("truth", sig.has_truth), ("commitment", sig.has_commitment)):
        if flag:
            block[key] = True
    if sig.relations:
        block["relations"] = dict(sig.relations)
    if sig.functions:
        block["functions"] = dict(sig.functions)
    if sig.constants:
        block["constants"] = list(sig.constants)
    return block


def dump_theory(theory: TheoryPresentation, file_path: str, references: Sequence[str] = ()) -> None:
    """Write the finite part of ``theory`` as a theory file.

    Schemata and families are not written. ``references`` lists theory files
    (relative to ``file_path``) whose ``Proof:``/``Ax:`` relations the axioms mention.
    """
    data: Dict[str, Any] = {"name": theory.name}
    if theory.description:
        data["description"] = theory.description
    data["signature"] = signature_block(theory.signature)
    if references:
        data["references"] = list(references)
    data["axioms"] = [print_formula(a) for a in theory.axioms]
    with open(file_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f, sort_keys=False, allow_unicode=True, width=1000)
    logger.info(f"Wrote {len(theory.axioms)} axioms of {theory.name} to {file_path}")

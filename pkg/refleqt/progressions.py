"""
Progressions
============
Ordinal notations below epsilon-zero in Cantor normal form, iterated
uniform-reflection towers over a base presentation, and the implicit-commitment
engine: an audited ledger of admissions into I and of commitments J(σ) derived
by the invariance (INV) and reflection (REF) rules.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from . import config
from .builder import thy
from .calculus import (
    Proof,
    TheoryPresentation,
    AxiomFamily,
    all_numeral_instances,
    check_proof,
    finite_axioms,
    iter_families,
    single_free_variable,
)
from .codec import cantor_pair, cantor_unpair
from .errors import ICRuleError, ParseError, RefleqtError, ScriptError
from .generators import (
    RFN,
    ReflectionFamily,
    SmallReflectionFamily,
    gen_reflection_instance,
    gen_small_reflection_theory,
    reflected_formula,
    rfn_n,
    small_reflection_bridge,
)
from .interpretations import Translation
from .reductions import (
    BoundReport,
    ReductionWitness,
    certify_bound,
    small_reflection_corpus,
    small_reflection_witness,
)
from .syntax import (
    PROOF_PREFIX,
    Atom,
    Exists,
    Forall,
    Formula,
    Implies,
    alpha_equal,
    alpha_key,
    parse_formula,
    print_formula,
)
from .tools.theory_reader import load_translation

logger = logging.getLogger("refleqt.progressions")


# ==========================================
# Ordinal notations
# ==========================================


class Ordering(str, Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


@dataclass(frozen=True)
class OrdinalNotation:
    """ω^e1·c1 + ... + ω^ek·ck with e1 > ... > ek and every ci >= 1; zero has no terms."""

    terms: Tuple[Tuple["OrdinalNotation", int], ...] = ()

    def __post_init__(self) -> None:
        for i, (exponent, coefficient) in enumerate(self.terms):
            if coefficient < 1:
                raise ValueError("Cantor normal form coefficients are positive")
            if i and compare_notations(self.terms[i - 1][0], exponent) is not Ordering.GREATER:
                raise ValueError("Cantor normal form exponents must strictly decrease")

    @classmethod
    def finite(cls, n: int) -> "OrdinalNotation":
        if n < 0:
            raise ValueError("ordinal notations are non-negative")
        return cls(((ZERO, n),)) if n else ZERO

    @classmethod
    def omega_power(cls, exponent: "OrdinalNotation", coefficient: int = 1) -> "OrdinalNotation":
        return cls(((exponent, coefficient),))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0].is_zero

    @property
    def is_limit(self) -> bool:
        return bool(self.terms) and not self.terms[-1][0].is_zero

    def successor(self) -> "OrdinalNotation":
        if self.is_successor:
            return OrdinalNotation(self.terms[:-1] + ((ZERO, self.terms[-1][1] + 1),))
        return OrdinalNotation(self.terms + ((ZERO, 1),))

    def predecessor(self) -> "OrdinalNotation":
        if not self.is_successor:
            raise ValueError(f"{self} has no predecessor")
        count = self.terms[-1][1]
        rest = self.terms[:-1]
        return OrdinalNotation(rest + (((ZERO, count - 1),) if count > 1 else ()))

    def code(self) -> int:
        """0 for zero, else 1 + pair(code e1, pair(c1 - 1, code rest))."""
        if not self.terms:
            return 0
        (exponent, coefficient), rest = self.terms[0], OrdinalNotation(self.terms[1:])
        return 1 + cantor_pair(exponent.code(), cantor_pair(coefficient - 1, rest.code()))

    @classmethod
    def from_code(cls, c: int) -> Optional["OrdinalNotation"]:
        """Inverse of ``code``; None when ``c`` codes a sum that is not in normal form."""
        if c == 0:
            return ZERO
        e, tail = cantor_unpair(c - 1)
        k, r = cantor_unpair(tail)
        exponent, rest = cls.from_code(e), cls.from_code(r)
        if exponent is None or rest is None:
            return None
        if rest.terms and compare_notations(exponent, rest.terms[0][0]) is not Ordering.GREATER:
            return None
        return cls(((exponent, k + 1),) + rest.terms)

    def _render(self, sep: str, brackets: str = "()") -> str:
        if not self.terms:
            return "0"
        parts = []
        for exponent, coefficient in self.terms:
            if exponent.is_zero:
                parts.append(str(coefficient))
                continue
            shown = exponent._render(sep, brackets)
            if not _is_finite(exponent):
                shown = f"{brackets[0]}{shown}{brackets[1]}"
            parts.append(f"w^{shown}*{coefficient}")
        return sep.join(parts)

    def __str__(self) -> str:
        return self._render(" + ")

    def compact(self) -> str:
        """The text form without spaces and with angle brackets, usable inside a relation symbol."""
        return self._render("+", "<>")

    def __lt__(self, other: "OrdinalNotation") -> bool:
        return compare_notations(self, other) is Ordering.LESS

    def __le__(self, other: "OrdinalNotation") -> bool:
        return compare_notations(self, other) is not Ordering.GREATER


ZERO = OrdinalNotation()
ONE = OrdinalNotation(((ZERO, 1),))
OMEGA = OrdinalNotation(((ONE, 1),))


def _is_finite(a: OrdinalNotation) -> bool:
    return all(e.is_zero for e, _ in a.terms)


def compare_notations(a: OrdinalNotation, b: OrdinalNotation) -> Ordering:
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        by_exponent = compare_notations(ea, eb)
        if by_exponent is not Ordering.EQUAL:
            return by_exponent
        if ca != cb:
            return Ordering.LESS if ca < cb else Ordering.GREATER
    if len(a.terms) == len(b.terms):
        return Ordering.EQUAL
    return Ordering.LESS if len(a.terms) < len(b.terms) else Ordering.GREATER


_NOTATION_TOKEN = re.compile(r"\s*(\d+|w|\^|\*|\+|\(|\)|<|>)")


def parse_notation(text: str) -> OrdinalNotation:
    """Read the text form, e.g. ``w^2*1 + w^1*2 + 3`` or ``w^(w^1*1)*1``; ``w`` alone is ω."""
    tokens: List[Tuple[str, int]] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _NOTATION_TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r} in ordinal notation", pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    reader = _NotationReader(text, tokens)
    out = reader.sum()
    if reader.i != len(tokens):
        raise ParseError("trailing input in ordinal notation", tokens[reader.i][1])
    return out


class _NotationReader:
    def __init__(self, text: str, tokens: List[Tuple[str, int]]):
        self.text = text
        self.tokens = tokens
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, expected: Optional[str] = None) -> str:
        if self.i >= len(self.tokens):
            raise ParseError("unexpected end of ordinal notation", len(self.text))
        tok, pos = self.tokens[self.i]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}", pos)
        self.i += 1
        return tok

    def number(self) -> int:
        tok = self.take()
        if not tok.isdigit():
            raise ParseError(f"expected a number, found {tok!r}", self.tokens[self.i - 1][1])
        return int(tok)

    def sum(self) -> OrdinalNotation:
        terms = [self.term()]
        while self.peek() == "+":
            self.take("+")
            terms.append(self.term())
        merged: List[Tuple[OrdinalNotation, int]] = []
        for exponent, coefficient in terms:
            if coefficient == 0:
                continue
            merged.append((exponent, coefficient))
        try:
            return OrdinalNotation(tuple(merged))
        except ValueError as exc:
            raise ParseError(str(exc), 0) from exc

    def term(self) -> Tuple[OrdinalNotation, int]:
        if self.peek() == "w":
            self.take("w")
            exponent = ONE
            if self.peek() == "^":
                self.take("^")
                opener = self.peek()
                if opener in ("(", "<"):
                    self.take(opener)
                    exponent = self.sum()
                    self.take(")" if opener == "(" else ">")
                else:
                    exponent = OrdinalNotation.finite(self.number())
            coefficient = 1
            if self.peek() == "*":
                self.take("*")
                coefficient = self.number()
            return exponent, coefficient
        return ZERO, self.number()


def enumerate_notations(max_code: int) -> List[OrdinalNotation]:
    """Every notation whose code is at most ``max_code``, in code order."""
    out = []
    for c in range(max_code + 1):
        a = OrdinalNotation.from_code(c)
        if a is not None:
            out.append(a)
    return out


# ==========================================
# Reflection towers
# ==========================================

TOWER_PREFIX = "RFN["


class RfnTower:
    """RFN^α(τ) for all α, built lazily and shared between levels."""

    def __init__(self, base: TheoryPresentation):
        self.base = base
        self._levels: Dict[OrdinalNotation, TheoryPresentation] = {ZERO: base}

    def name(self, alpha: OrdinalNotation) -> str:
        return self.base.name if alpha.is_zero else f"{TOWER_PREFIX}{alpha.compact()}]{self.base.name}"

    def level_of(self, theory_name: str) -> Optional[OrdinalNotation]:
        if theory_name == self.base.name:
            return ZERO
        suffix = f"]{self.base.name}"
        if not (theory_name.startswith(TOWER_PREFIX) and theory_name.endswith(suffix)):
            return None
        try:
            return parse_notation(theory_name[len(TOWER_PREFIX):-len(suffix)])
        except ParseError:
            return None

    def level(self, alpha: OrdinalNotation) -> TheoryPresentation:
        found = self._levels.get(alpha)
        if found is not None:
            return found
        if alpha.is_successor:
            below = self.level(alpha.predecessor())
            family: AxiomFamily = ReflectionFamily(below)
            description = f"{self.base.name} + RFN({below.name})"
        else:
            family = TowerFamily(self, alpha)
            description = f"union of the levels below {alpha}"
        out = self.base.extend(self.name(alpha), families=[family], description=description)
        self._levels[alpha] = out
        return out


class TowerFamily(AxiomFamily):
    """RFN instances over any level strictly below a limit."""

    tag = "tower-limit"

    def __init__(self, tower: RfnTower, limit: OrdinalNotation):
        self.tower = tower
        self.limit = limit

    def tagged_level(self, s: Formula) -> Optional[OrdinalNotation]:
        if not isinstance(s, Forall) or not isinstance(s.body, Implies):
            return None
        hypothesis = s.body.left
        if not isinstance(hypothesis, Exists) or not isinstance(hypothesis.body, Atom):
            return None
        rel = hypothesis.body.rel
        if not rel.startswith(PROOF_PREFIX):
            return None
        return self.tower.level_of(rel[len(PROOF_PREFIX):])

    def recognizes(self, s: Formula) -> bool:
        beta = self.tagged_level(s)
        if beta is None or not beta < self.limit:
            return False
        return ReflectionFamily(self.tower.level(beta)).recognizes(s)

    def resolve(self, name: str) -> Optional[TheoryPresentation]:
        beta = self.tower.level_of(name)
        if beta is None or not beta < self.limit:
            return None
        return self.tower.level(beta)

    def describe(self) -> str:
        return f"RFN over levels below {self.limit}"


@dataclass(frozen=True, eq=False)
class TowerPresentation:
    base: TheoryPresentation
    level: OrdinalNotation
    presentation: TheoryPresentation

    def recognize(self, s: Formula) -> bool:
        return self.presentation.recognize(s)


def rfn_tower_presentation(base: TheoryPresentation, alpha: OrdinalNotation,
                           tower: Optional[RfnTower] = None) -> TowerPresentation:
    tower = tower or RfnTower(base)
    return TowerPresentation(base, alpha, tower.level(alpha))


# ==========================================
# Implicit commitments
# ==========================================


@dataclass(frozen=True, eq=False)
class LogEntry:
    rule: str
    theory: str
    sentence: Optional[Formula] = None
    detail: str = ""
    args: Tuple[object, ...] = ()

    def __str__(self) -> str:
        shown = f" {print_formula(self.sentence)}" if self.sentence is not None else ""
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{self.rule}] {self.theory}{shown}{extra}"


@dataclass(frozen=True, eq=False)
class ICState:
    """One point of an IC derivation. Transitions return new states."""

    base: TheoryPresentation
    stage: OrdinalNotation
    admitters: Mapping[str, TheoryPresentation]
    i_facts: Tuple[Formula, ...] = ()
    j_facts: Tuple[Tuple[str, Formula], ...] = ()
    theories: Mapping[str, TheoryPresentation] = field(default_factory=dict)
    witnesses: Tuple[ReductionWitness, ...] = ()
    reports: Tuple[BoundReport, ...] = ()
    log: Tuple[LogEntry, ...] = ()

    @property
    def i_theory(self) -> TheoryPresentation:
        return self.base

    def commitments(self, theory: Union[str, TheoryPresentation]) -> List[Formula]:
        name = theory if isinstance(theory, str) else theory.name
        return [s for owner, s in self.j_facts if owner == name]

    def committed(self, theory: Union[str, TheoryPresentation], s: Formula) -> bool:
        key = alpha_key(s)
        return any(alpha_key(c) == key for c in self.commitments(theory))

    def admitted(self, s: Formula) -> bool:
        key = alpha_key(s)
        return any(alpha_key(c) == key for c in self.i_facts)

    def witness(self, name: str) -> Optional[ReductionWitness]:
        for w in self.witnesses:
            if w.name == name or w.source.name == name:
                return w
        return None

    def theory(self, name: str) -> TheoryPresentation:
        if name in self.theories:
            return self.theories[name]
        found = self.base.resolve(name)
        if found is None:
            raise ICRuleError(f"unknown theory {name}")
        return found


def _registered(st: ICState, *theories: TheoryPresentation) -> Dict[str, TheoryPresentation]:
    out = dict(st.theories)
    for t in theories:
        out[t.name] = t
    return out


def _with_commitment(st: ICState, theory: str, s: Formula) -> Tuple[Tuple[str, Formula], ...]:
    if st.committed(theory, s):
        return st.j_facts
    return st.j_facts + ((theory, s),)


ADMIT_ON_BASE = "base"


def ic_base(theory: TheoryPresentation) -> ICState:
    """Stage 0: any sentence with a checking τ-proof may be admitted into I."""
    return ICState(theory, ZERO, {ADMIT_ON_BASE: theory}, theories={theory.name: theory})


def ic_limit(theory: TheoryPresentation, limit: OrdinalNotation,
             provider: Union[Mapping[OrdinalNotation, TheoryPresentation],
                             Callable[[OrdinalNotation], TheoryPresentation]],
             below: Sequence[OrdinalNotation] = ()) -> ICState:
    """Stage λ: sentences with a checking τ_{β+1}-proof for some β ≺ λ may be admitted.

    ``provider`` maps β to τ_{β+1}; with a callable, ``below`` lists the βs to offer.
    """
    if not limit.is_limit:
        raise ICRuleError(f"{limit} is not a limit notation")
    if callable(provider) and not isinstance(provider, Mapping):
        offered = {beta: provider(beta) for beta in below}
    else:
        offered = dict(provider)
    admitters: Dict[str, TheoryPresentation] = {}
    for beta, stage_theory in offered.items():
        if not beta < limit:
            raise ICRuleError(f"stage {beta} is not below the limit {limit}")
        admitters[str(beta)] = stage_theory
    theories = {theory.name: theory}
    theories.update({t.name: t for t in admitters.values()})
    return ICState(theory, limit, admitters, theories=theories)


def ic_admit(st: ICState, s: Formula, proof: Proof, via: Optional[OrdinalNotation] = None) -> ICState:
    """Admit ``s`` into I on the strength of ``proof`` (also committing I's theory to it)."""
    key = ADMIT_ON_BASE if via is None else str(via)
    if via is not None and not via < st.stage:
        raise ICRuleError(f"stage {via} is not below {st.stage}")
    admitter = st.admitters.get(key)
    if admitter is None:
        raise ICRuleError(f"no admitting theory for {key} at stage {st.stage}")
    if not alpha_equal(proof.conclusion, s):
        raise ICRuleError("the admitting proof concludes a different sentence")
    verdict = check_proof(proof, admitter)
    if not verdict.accepted:
        raise ICRuleError(f"admitting proof rejected by {admitter.name}: {verdict.describe()}")
    if st.admitted(s):
        return st
    logger.debug(f"[ADMIT] {print_formula(s)} via {admitter.name}")
    entry = LogEntry("ADMIT", admitter.name, s, args=(s, proof, via))
    return replace(
        st,
        i_facts=st.i_facts + (s,),
        j_facts=_with_commitment(st, st.i_theory.name, s),
        log=st.log + (entry,),
    )


def ic_register_witness(st: ICState, w: ReductionWitness, corpus: Sequence[Proof]) -> ICState:
    """Certify ``w`` on ``corpus`` and make it available to (INV)."""
    report = certify_bound(w, corpus)
    if not report.within_bound:
        raise ICRuleError(f"witness {w.name} failed certification: {report.verdict}")
    entry = LogEntry("CERTIFY", w.target.name, None, w.name, args=(w, report))
    return _register(st, w, report, entry)


def _register(st: ICState, w: ReductionWitness, report: BoundReport, entry: LogEntry) -> ICState:
    if any(existing is w for existing in st.witnesses):
        return st
    return replace(
        st,
        witnesses=st.witnesses + (w,),
        reports=st.reports + (report,),
        theories=_registered(st, w.source, w.target),
        log=st.log + (entry,),
    )


def ic_apply_ref(st: ICState, sigma: TheoryPresentation, phi: Formula) -> ICState:
    """(REF): from all numeral instances of φ being σ-axioms, commit σ to ∀xφ.

    For a small-reflection presentation over τ and its formula φ, the premise
    is the paired template; σ is then committed to its closure and, through
    the checked bridge proof, to the uniform reflection instance for φ.
    """
    added: List[Formula] = []
    if all_numeral_instances(sigma, phi):
        added.append(Forall(single_free_variable(phi), phi))
        detail = "numeral instances"
    else:
        family = _small_reflection_family(sigma, phi)
        if family is None:
            raise ICRuleError(f"(REF) premise fails: not every numeral instance is an axiom of {sigma.name}")
        if not all_numeral_instances(sigma, family.template):
            raise ICRuleError(f"(REF) premise fails for the paired template of {sigma.name}")
        bridge = small_reflection_bridge(family)
        verdict = check_proof(bridge, sigma)
        if not verdict.accepted:
            raise ICRuleError(f"bridge to reflection rejected by {sigma.name}: {verdict.describe()}")
        added += [family.closure, bridge.conclusion.right]
        detail = f"small reflection over {family.theory.name}"
    j_facts = st.j_facts
    current = st
    for s in added:
        j_facts = _with_commitment(current, sigma.name, s)
        current = replace(current, j_facts=j_facts)
    for s in added:
        logger.info(f"[REF] J({sigma.name}) += {print_formula(s)}")
    entry = LogEntry("REF", sigma.name, added[-1], detail, args=(sigma, phi))
    return replace(current, theories=_registered(st, sigma), log=st.log + (entry,))


def _small_reflection_family(sigma: TheoryPresentation, phi: Formula) -> Optional[SmallReflectionFamily]:
    for family in iter_families(sigma):
        if isinstance(family, SmallReflectionFamily) and alpha_equal(family.phi, phi):
            return family
    return None


def ic_apply_inv(st: ICState, w: ReductionWitness) -> ICState:
    """(INV): copy J(σ) into J(σ′) along a registered witness σ ≤ σ′."""
    if not any(existing is w for existing in st.witnesses):
        raise ICRuleError(f"witness {w.name} is not registered")
    current = st
    moved = 0
    for s in st.commitments(w.source.name):
        if not current.committed(w.target.name, s):
            current = replace(current, j_facts=current.j_facts + ((w.target.name, s),))
            moved += 1
    logger.info(f"[INV] {w.source.name} <= {w.target.name}: {moved} commitments transferred")
    entry = LogEntry("INV", w.target.name, None, w.name, args=(w,))
    return replace(current, log=current.log + (entry,))


def replay(st: ICState) -> ICState:
    """Rebuild a state from its seed and log; the result carries the same facts."""
    out = ICState(st.base, st.stage, st.admitters, theories={st.base.name: st.base, **{
        t.name: t for t in st.admitters.values()}})
    for entry in st.log:
        if entry.rule == "ADMIT":
            s, proof, via = entry.args
            out = ic_admit(out, s, proof, via)
        elif entry.rule == "CERTIFY":
            w, report = entry.args
            out = _register(out, w, report, entry)
        elif entry.rule == "REF":
            sigma, phi = entry.args
            out = ic_apply_ref(out, sigma, phi)
        elif entry.rule == "INV":
            (w,) = entry.args
            out = ic_apply_inv(out, w)
        else:
            raise ICRuleError(f"unknown log rule {entry.rule}")
    return out


def pipeline(st: ICState, phi: Formula, translation: Optional[Translation] = None,
             corpus_size: int = 10, seed: int = 0, name: Optional[str] = None) -> ICState:
    """Small reflection for φ over the I-theory, then (REF) on it, then (INV) back to the I-theory."""
    theory = st.i_theory
    sigma = gen_small_reflection_theory(theory, phi, translation, name=name)
    w = small_reflection_witness(sigma, theory)
    st = ic_register_witness(st, w, small_reflection_corpus(sigma, corpus_size, seed))
    st = ic_apply_ref(st, sigma, phi)
    return ic_apply_inv(st, w)


def reflection_target(theory: TheoryPresentation, phi: Formula,
                      translation: Optional[Translation] = None) -> Formula:
    """The uniform reflection instance the pipeline commits the I-theory to."""
    kind = RFN if translation is None else rfn_n(translation)
    return gen_reflection_instance(kind, theory, phi)


# ==========================================
# Scripts
# ==========================================

SCRIPT_COMMANDS = ("seed", "admit", "smallref", "ref", "inv", "reflect", "reflect-n", "transfer")


@dataclass
class ScriptContext:
    translations: Dict[str, Translation] = field(default_factory=dict)
    base_dir: Optional[Path] = None
    corpus_size: int = 10
    seed: int = field(default_factory=config.default_seed)

    def translation(self, ref: str) -> Translation:
        if ref in self.translations:
            return self.translations[ref]
        path = Path(ref)
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        loaded = load_translation(str(path))
        self.translations[ref] = loaded
        return loaded


def _script_lines(script: Union[str, Iterable[str]]) -> List[Tuple[int, str]]:
    lines = script.splitlines() if isinstance(script, str) else list(script)
    out = []
    for number, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            out.append((number, text))
    return out


def run_script(st: ICState, script: Union[str, Iterable[str]], context: Optional[ScriptContext] = None) -> ICState:
    """Execute a line-oriented IC script; failures carry the line number."""
    context = context or ScriptContext()
    for number, text in _script_lines(script):
        command, _, rest = text.partition(" ")
        rest = rest.strip()
        try:
            st = _run_command(st, command, rest, context)
        except ScriptError:
            raise
        except RefleqtError as exc:
            raise ScriptError(f"{command}: {exc}", number) from exc
        except (OSError, ValueError) as exc:
            raise ScriptError(f"{command}: {exc}", number) from exc
    return st


def _run_command(st: ICState, command: str, rest: str, context: ScriptContext) -> ICState:
    theory = st.i_theory
    if command == "seed":
        for axiom in finite_axioms(theory):
            st = ic_admit(st, axiom, thy(axiom))
        return st
    if command == "admit":
        s = parse_formula(rest, theory.coding_signature)
        return ic_admit(st, s, thy(s))
    if command == "smallref":
        name, _, text = rest.partition(" ")
        phi = parse_formula(text, theory.signature)
        sigma = gen_small_reflection_theory(theory, phi, name=name)
        w = small_reflection_witness(sigma, theory)
        st = replace(st, theories=_registered(st, sigma))
        return ic_register_witness(st, w, small_reflection_corpus(sigma, context.corpus_size, context.seed))
    if command == "ref":
        name, _, text = rest.partition(" ")
        sigma = st.theory(name)
        return ic_apply_ref(st, sigma, parse_formula(text, sigma.signature))
    if command == "inv":
        w = st.witness(rest)
        if w is None:
            raise ICRuleError(f"no registered witness named {rest}")
        return ic_apply_inv(st, w)
    if command == "transfer":
        for w in st.witnesses:
            st = ic_apply_inv(st, w)
        return st
    if command == "reflect":
        phi = parse_formula(rest, theory.signature)
        return pipeline(st, phi, corpus_size=context.corpus_size, seed=context.seed)
    if command == "reflect-n":
        ref, _, text = rest.partition(" ")
        translation = context.translation(ref)
        phi = parse_formula(text, translation.source)
        return pipeline(st, phi, translation, corpus_size=context.corpus_size, seed=context.seed)
    raise ICRuleError(f"unknown script command {command!r}; expected one of {', '.join(SCRIPT_COMMANDS)}")


def is_reflection_over(s: Formula, theory: TheoryPresentation) -> bool:
    """Whether ``s`` is a uniform reflection instance over ``theory``."""
    phi = reflected_formula(s, theory)
    return phi is not None and alpha_equal(gen_reflection_instance(RFN, theory, phi), s)


def commitments_at_stage(theory: TheoryPresentation, alpha: OrdinalNotation,
                         script: Union[str, Iterable[str]], context: Optional[ScriptContext] = None,
                         provider: Optional[Mapping[OrdinalNotation, TheoryPresentation]] = None,
                         ) -> TheoryPresentation:
    """The finite presentation of sentences committed at the I-theory after ``script``."""
    if alpha.is_limit:
        st = ic_limit(theory, alpha, provider or {})
    else:
        st = replace(ic_base(theory), stage=alpha)
    st = run_script(st, script, context)
    axioms = st.commitments(theory.name)
    out = TheoryPresentation(
        name=f"{theory.name}@{alpha.successor().compact()}",
        signature=theory.signature,
        axioms=tuple(axioms),
        references=(theory,),
        description=f"commitments of {theory.name} at stage {alpha}",
    )
    reflections = sum(1 for a in axioms if is_reflection_over(a, theory))
    logger.info(f"Stage {alpha}: {len(axioms)} commitments at {theory.name}, {reflections} of them uniform reflection")
    return out

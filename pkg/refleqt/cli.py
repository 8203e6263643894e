"""
Command line interface
======================
``refleqt <codec|parse|check|gen|interp|reduce|prog> ...``

Exit status 0 on success or an accepted verdict, 1 on a rejected verdict or a
violated bound, 2 on malformed input.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import yaml

from . import __version__, config
from .calculus import Proof, TheoryPresentation, check_proof, discharge, encode_proof, print_proof
from .codec import (
    cantor_pair,
    cantor_unpair,
    concat_codes,
    decode_formula,
    decode_string,
    dyadic_numeral,
    encode_formula,
    encode_string,
    numeral_code_bits,
    subst_codes,
    unary_numeral_code_bits,
)
from .errors import ParseError, RefleqtError, ScriptError
from .generators import (
    CON,
    RFN,
    RFN_LOCAL,
    ReflectionKind,
    ReflectionTag,
    gen_ct,
    gen_reflection_instance,
    gen_sc,
    gen_small_reflection_theory,
    gen_utb,
    rfn_n,
    small_reflection_bridge,
)
from .interpretations import (
    check_bundle,
    discharge_by_equality,
    discharge_trivially,
    translate_proof,
    witness_obligations,
)
from .progressions import (
    RfnTower,
    ScriptContext,
    commitments_at_stage,
    compare_notations,
    parse_notation,
)
from .reductions import (
    CUBIC_BOUND,
    Polynomial,
    certify_bound,
    eliminate_truth,
    reduce_small_reflection_proof,
    small_reflection_corpus,
    small_reflection_witness,
    truth_corpus,
    truth_elimination_witness,
)
from .syntax import Formula, parse_formula, print_formula, print_term
from .tools import TheoryLoader, dump_theory, read_bundle, read_formula, read_proof, write_proof

logger = logging.getLogger("refleqt.cli")

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_MALFORMED = 2


class _Session:
    """Shared file loading for one invocation."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.loader = TheoryLoader()

    def theory(self) -> TheoryPresentation:
        return self.loader.theory(self.args.theory or config.STANDARD_THEORY_FILE)

    def translation(self):
        if not self.args.translation:
            raise ParseError("--translation is required here")
        return self.loader.translation(self.args.translation)

    def formula(self, sig, text: Optional[str] = None) -> Formula:
        text = text if text is not None else self.args.formula
        if text is None:
            raise ParseError("--formula is required here")
        return parse_formula(text, sig)

    def emit(self, text: str) -> None:
        """Write to ``-o`` when given, else to stdout."""
        if getattr(self.args, "output", None):
            Path(self.args.output).write_text(text + "\n", encoding="utf-8")
            logger.info(f"Wrote {self.args.output}")
        else:
            print(text)

    def emit_proof(self, p: Proof) -> None:
        if getattr(self.args, "output", None):
            write_proof(self.args.output, p)
            logger.info(f"Wrote proof with {p.node_count} steps to {self.args.output}")
        else:
            print(print_proof(p))


# ==========================================
# codec
# ==========================================


def cmd_codec(s: _Session) -> int:
    a = s.args
    op, values = a.op, a.values

    def need(n: int) -> List[str]:
        if len(values) != n:
            raise ParseError(f"codec {op} takes {n} argument(s), got {len(values)}")
        return values

    def nat(text: str) -> int:
        try:
            return int(text)
        except ValueError:
            raise ParseError(f"expected a natural number, got {text!r}")

    if op == "encode":
        print(encode_string(need(1)[0]))
    elif op == "decode":
        print(decode_string(nat(need(1)[0])))
    elif op == "concat":
        c1, c2 = need(2)
        print(concat_codes(nat(c1), nat(c2)))
    elif op == "subst":
        subject, t, pattern = need(3)
        print(subst_codes(nat(subject), nat(t), nat(pattern)))
    elif op == "numeral":
        n = nat(need(1)[0])
        print(print_term(dyadic_numeral(n)))
        print(f"code bits: {numeral_code_bits(n)} (unary: {unary_numeral_code_bits(n)})")
    elif op == "pair":
        x, y = need(2)
        print(cantor_pair(nat(x), nat(y)))
    elif op == "unpair":
        x, y = cantor_unpair(nat(need(1)[0]))
        print(f"{x} {y}")
    elif op == "formula":
        sig = s.theory().coding_signature
        print(encode_formula(s.formula(sig, need(1)[0])))
    elif op == "unformula":
        print(print_formula(decode_formula(nat(need(1)[0]), s.theory().coding_signature)))
    return EXIT_OK


# ==========================================
# parse / check
# ==========================================


def cmd_parse(s: _Session) -> int:
    sig = s.theory().coding_signature
    if s.args.file:
        f = read_formula(s.args.file, sig)
    else:
        f = s.formula(sig)
    print(print_formula(f))
    print(f"code: {encode_formula(f)}")
    return EXIT_OK


def cmd_check(s: _Session) -> int:
    theory = s.theory()
    proof = read_proof(s.args.proof, theory.coding_signature)
    verdict = check_proof(proof, theory)
    if verdict.accepted:
        print(f"accepted: {print_formula(proof.conclusion)}")
        print(f"steps: {proof.node_count}, size: {encode_proof(proof).bit_length()} bits")
        return EXIT_OK
    print(verdict.describe())
    return EXIT_REJECTED


# ==========================================
# gen
# ==========================================


def cmd_gen(s: _Session) -> int:
    kind, theory = s.args.kind, s.theory()
    if kind == "con":
        s.emit(print_formula(gen_reflection_instance(
            CON if s.args.bound is None else ReflectionKind(ReflectionTag.CON_RESTRICTED, bound=s.args.bound),
            theory)))
    elif kind == "rfn":
        s.emit(print_formula(gen_reflection_instance(RFN_LOCAL, theory, s.formula(theory.signature))))
    elif kind == "ufn":
        s.emit(print_formula(gen_reflection_instance(RFN, theory, s.formula(theory.signature))))
    elif kind == "ufn-n":
        translation = s.translation()
        s.emit(print_formula(gen_reflection_instance(rfn_n(translation), theory, s.formula(translation.source))))
    elif kind == "smallref":
        translation = s.translation() if s.args.translation else None
        phi = s.formula(theory.signature if translation is None else translation.source)
        sigma = gen_small_reflection_theory(theory, phi, translation)
        bridge = small_reflection_bridge(sigma.families[-1])
        print(sigma.describe())
        print(f"closure: {print_formula(bridge.conclusion.left)}")
        print(f"reflects to: {print_formula(bridge.conclusion.right)}")
        if s.args.output:
            write_proof(s.args.output, bridge)
            logger.info(f"Wrote bridge proof to {s.args.output}")
    else:
        builders: Dict[str, Callable[[TheoryPresentation], TheoryPresentation]] = {
            "utb": gen_utb, "sc": gen_sc, "ct": gen_ct,
        }
        generated = builders[kind](theory)
        s.emit(generated.describe())
    return EXIT_OK


# ==========================================
# interp
# ==========================================


def cmd_interp(s: _Session) -> int:
    a = s.args
    if a.bundle:
        loaded = read_bundle(a.bundle, s.loader)
        host = loaded.host(s.theory() if a.theory else None)
        labels = [o.label for o in witness_obligations(loaded.bundle)]
        print(f"{loaded.bundle.kind} bundle: {len(labels)} obligations")
        verdict = check_bundle(loaded.bundle, host)
        if verdict.accepted:
            print("accepted")
            return EXIT_OK
        print(verdict.describe())
        return EXIT_REJECTED
    if not a.proof:
        raise ParseError("interp needs a proof file or --bundle")
    translation = s.translation()
    host = s.theory()
    proof = read_proof(a.proof, translation.source.union(host.coding_signature))
    skeleton, pending = translate_proof(translation, proof, host)
    discharges: List[Proof] = []
    open_obligations = []
    for f in pending:
        done = discharge_trivially(f) or discharge_by_equality(f)
        if done is None:
            open_obligations.append(f)
        else:
            discharges.append(done)
    if open_obligations:
        for f in open_obligations:
            print(f"open obligation: {print_formula(f)}")
        return EXIT_REJECTED
    assembled = discharge(skeleton, discharges)
    verdict = check_proof(assembled, host)
    if not verdict.accepted:
        print(verdict.describe())
        return EXIT_REJECTED
    s.emit_proof(assembled)
    return EXIT_OK


# ==========================================
# reduce
# ==========================================


def _bound(text: Optional[str]) -> Polynomial:
    if not text:
        return CUBIC_BOUND
    try:
        return Polynomial(tuple(int(c) for c in text.split(",")))
    except ValueError:
        raise ParseError(f"--bound takes comma-separated coefficients, constant first; got {text!r}")


def cmd_reduce(s: _Session) -> int:
    a = s.args
    theory = s.theory()
    if a.mode == "certify":
        if a.family == "smallref":
            source = gen_small_reflection_theory(theory, s.formula(theory.signature))
            witness = small_reflection_witness(source, theory, _bound(a.bound))
            corpus = small_reflection_corpus(source, a.size or 50, a.seed)
        else:
            source = gen_sc(theory)
            witness = truth_elimination_witness(source, theory, _bound(a.bound))
            corpus = truth_corpus(theory, a.size or 20, a.seed)
        report = certify_bound(witness, corpus)
        s.emit(report.table())
        return EXIT_OK if report.within_bound else EXIT_REJECTED
    if not a.proof:
        raise ParseError(f"reduce {a.mode} needs a proof file")
    if a.mode == "smallref":
        source = gen_small_reflection_theory(theory, s.formula(theory.signature))
    else:
        source = gen_sc(theory)
    proof = read_proof(a.proof, source.coding_signature)
    verdict = check_proof(proof, source)
    if not verdict.accepted:
        print(f"input {verdict.describe()} in {source.name}")
        return EXIT_REJECTED
    if a.mode == "smallref":
        out = reduce_small_reflection_proof(proof, theory, source)
    else:
        out = eliminate_truth(proof, theory)
    s.emit_proof(out)
    return EXIT_OK


# ==========================================
# prog
# ==========================================


def cmd_prog(s: _Session) -> int:
    a = s.args
    if a.op == "cmp":
        if len(a.values) != 2:
            raise ParseError("prog cmp takes two notations")
        print(compare_notations(parse_notation(a.values[0]), parse_notation(a.values[1])).value)
        return EXIT_OK
    theory = s.theory()
    if a.op == "tower":
        level = parse_notation(a.level or "0")
        presentation = RfnTower(theory).level(level)
        print(presentation.describe())
        if a.formula is not None:
            sentence = s.formula(presentation.coding_signature)
            recognized = presentation.recognize(sentence)
            print("recognized" if recognized else "not recognized")
            return EXIT_OK if recognized else EXIT_REJECTED
        return EXIT_OK
    if len(a.values) != 1:
        raise ParseError("prog run-script takes one script file")
    script = Path(a.values[0])
    if not script.exists():
        raise FileNotFoundError(f"script not found at: {script}")
    context = ScriptContext(base_dir=script.parent, seed=a.seed)
    if a.translation:
        context.translations[Path(a.translation).name] = s.translation()
    if a.size:
        context.corpus_size = a.size
    try:
        out = commitments_at_stage(theory, parse_notation(a.level or "0"), script.read_text(encoding="utf-8"),
                                   context)
    except ScriptError as exc:
        raise ScriptError(f"{script}: {exc}") from exc
    for axiom in out.axioms:
        print(print_formula(axiom))
    if a.output:
        references = [str(Path(a.theory or config.STANDARD_THEORY_FILE).resolve())]
        dump_theory(out, a.output, references)
    return EXIT_OK


# ==========================================
# Entry point
# ==========================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="refleqt", description="Proof-theory workbench for reflection and truth.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--theory", help=f"theory file (default: {Path(config.STANDARD_THEORY_FILE).name})")
        p.add_argument("--translation", help="translation file")
        p.add_argument("--formula", help="formula as an S-expression")
        p.add_argument("-o", "--output", help="write the main artifact here")
        p.add_argument("--seed", type=int, default=config.default_seed(), help="seed for generated corpora")

    p = sub.add_parser("codec", help="string codes, numerals and pairing")
    p.add_argument("op", choices=["encode", "decode", "concat", "subst", "numeral", "pair", "unpair",
                                  "formula", "unformula"])
    p.add_argument("values", nargs="*")
    common(p)
    p.set_defaults(handler=cmd_codec)

    p = sub.add_parser("parse", help="parse and print a formula with its code")
    p.add_argument("file", nargs="?")
    common(p)
    p.set_defaults(handler=cmd_parse)

    p = sub.add_parser("check", help="check a proof file against a theory")
    p.add_argument("proof")
    common(p)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("gen", help="generate consistency, reflection and truth-theory material")
    p.add_argument("kind", choices=["con", "rfn", "ufn", "ufn-n", "smallref", "utb", "sc", "ct"])
    p.add_argument("--bound", type=int, help="proof-code bound for restricted consistency")
    common(p)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("interp", help="translate a proof or check a witness bundle")
    p.add_argument("proof", nargs="?")
    p.add_argument("--bundle", help="JSON witness bundle")
    common(p)
    p.set_defaults(handler=cmd_interp)

    p = sub.add_parser("reduce", help="run or certify a proof reduction")
    p.add_argument("mode", choices=["smallref", "truth-elim", "certify"])
    p.add_argument("proof", nargs="?")
    p.add_argument("--family", choices=["smallref", "truth-elim"], default="smallref",
                   help="reduction to certify")
    p.add_argument("--bound", help="claimed bound as coefficients, constant first (default 0,0,0,1)")
    p.add_argument("--size", type=int, help="corpus size for certification")
    common(p)
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("prog", help="ordinal notations, reflection towers and commitment scripts")
    p.add_argument("op", choices=["cmp", "tower", "run-script"])
    p.add_argument("values", nargs="*")
    p.add_argument("--level", help="ordinal notation, e.g. 'w^1*2 + 3'")
    p.add_argument("--size", type=int, help="corpus size for witness certification")
    common(p)
    p.set_defaults(handler=cmd_prog)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else config.log_level(),
        format=config.LOG_FORMAT,
        stream=sys.stderr,
    )
    try:
        return args.handler(_Session(args))
    except (RefleqtError, OSError, yaml.YAMLError, json.JSONDecodeError, ValueError) as exc:
        logger.debug("Invocation failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())

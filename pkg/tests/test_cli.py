import pytest

from refleqt import config
from refleqt.builder import identity_derivation, thy
from refleqt.cli import EXIT_MALFORMED, EXIT_OK, EXIT_REJECTED, main
from refleqt.codec import cantor_pair, encode_string
from refleqt.generators import RFN, gen_reflection_instance
from refleqt.syntax import print_formula
from refleqt.tools import load_theory, write_proof

NAT_THEORY = str(config.ASSETS_DIR / "nat_domain.thy")
NAT_TRANSLATION = str(config.ASSETS_DIR / "nat_domain.tr")


def test_codec_commands(capsys):
    assert main(["codec", "encode", "ab"]) == EXIT_OK
    code = int(capsys.readouterr().out.strip())
    assert code == encode_string("ab")

    assert main(["codec", "decode", str(code)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "ab"

    assert main(["codec", "pair", "3", "4"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == str(cantor_pair(3, 4))

    assert main(["codec", "unpair", str(cantor_pair(3, 4))]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "3 4"

    assert main(["codec", "numeral", "6"]) == EXIT_OK
    assert "code bits" in capsys.readouterr().out


def test_codec_argument_errors(capsys):
    assert main(["codec", "pair", "3", "x"]) == EXIT_MALFORMED
    assert main(["codec", "encode", "a", "b"]) == EXIT_MALFORMED
    assert "error:" in capsys.readouterr().err


def test_parse_command(capsys):
    assert main(["parse", "--formula", "(all x (= (+ x 0) x))"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("(all x")
    assert "code:" in out
    assert main(["parse", "--formula", "(= x"]) == EXIT_MALFORMED
    assert main(["parse"]) == EXIT_MALFORMED


def test_check_command(tmp_path, capsys, parse):
    good = tmp_path / "good.prf"
    write_proof(good, identity_derivation(parse("(= x 0)")))
    assert main(["check", str(good)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("accepted")

    bad = tmp_path / "bad.prf"
    write_proof(bad, thy(parse("(= 0 1)")))
    assert main(["check", str(bad)]) == EXIT_REJECTED
    assert "rejected at root" in capsys.readouterr().out

    assert main(["check", str(tmp_path / "missing.prf")]) == EXIT_MALFORMED


def test_gen_commands(tmp_path, capsys):
    assert main(["gen", "con"]) == EXIT_OK
    assert "Proof:S12" in capsys.readouterr().out

    assert main(["gen", "con", "--bound", "7"]) == EXIT_OK
    assert "bex" in capsys.readouterr().out

    out_file = tmp_path / "rfn.fml"
    assert main(["gen", "ufn", "--formula", "(= (+ v 0) v)", "-o", str(out_file)]) == EXIT_OK
    assert out_file.read_text().startswith("(all")

    assert main(["gen", "utb"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("UTB[S12]")

    assert main(["gen", "smallref", "--formula", "(= (+ v 0) v)"]) == EXIT_OK
    assert "reflects to:" in capsys.readouterr().out

    assert main(["gen", "rfn", "--formula", "(= x 0)"]) == EXIT_MALFORMED
    assert main(["gen", "ufn"]) == EXIT_MALFORMED
    assert main(["gen", "ufn-n", "--formula", "(= v v)"]) == EXIT_MALFORMED


def test_unknown_subcommand_is_an_argparse_error():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_interp_translates_a_proof(tmp_path, capsys, parse):
    proof = tmp_path / "id.prf"
    write_proof(proof, identity_derivation(parse("(= (+ x 0) x)")))
    args = ["interp", str(proof), "--translation", NAT_TRANSLATION, "--theory", NAT_THEORY]
    assert main(args) == EXIT_OK
    assert capsys.readouterr().out.strip()


def test_interp_bundle_without_host(tmp_path):
    bundle = tmp_path / "bundle.json"
    bundle.write_text('{"kind": "identity", "translations": {"tau": "%s", "sigma": "%s"}}'
                      % (NAT_TRANSLATION, NAT_TRANSLATION))
    assert main(["interp", "--bundle", str(bundle)]) == EXIT_MALFORMED


def test_reduce_certify(capsys):
    args = ["reduce", "certify", "--formula", "(= (+ v 0) v)", "--size", "3"]
    assert main(args) == EXIT_OK
    assert "verdict: within-bound" in capsys.readouterr().out

    assert main(args + ["--bound", "0,1"]) == EXIT_REJECTED
    assert "verdict: violated" in capsys.readouterr().out

    assert main(args + ["--bound", "one,two"]) == EXIT_MALFORMED


def test_reduce_rejects_unchecked_input(tmp_path, capsys, parse):
    bad = tmp_path / "bad.prf"
    write_proof(bad, thy(parse("(= 0 1)")))
    assert main(["reduce", "truth-elim", str(bad)]) == EXIT_REJECTED
    assert "SC[S12]" in capsys.readouterr().out
    assert main(["reduce", "truth-elim"]) == EXIT_MALFORMED


def test_prog_commands(capsys, s12, parse):
    assert main(["prog", "cmp", "w", "3"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "greater"
    assert main(["prog", "cmp", "1 + w", "3"]) == EXIT_MALFORMED

    rfn = print_formula(gen_reflection_instance(RFN, s12, parse("(<= v (S v))")))
    assert main(["prog", "tower", "--level", "1", "--formula", rfn]) == EXIT_OK
    assert capsys.readouterr().out.strip().endswith("recognized")
    assert main(["prog", "tower", "--level", "1", "--formula", "(= 0 1)"]) == EXIT_REJECTED
    assert "not recognized" in capsys.readouterr().out


@pytest.mark.slow
def test_prog_run_script(tmp_path, capsys, s12):
    out = tmp_path / "stage1.thy"
    script = str(config.ASSETS_DIR / "reflect_stage0.ics")
    assert main(["prog", "run-script", script, "--size", "3", "-o", str(out)]) == EXIT_OK
    printed = capsys.readouterr().out.strip().splitlines()
    dumped = load_theory(str(out))
    assert dumped.name == "S12@1"
    assert len(dumped.axioms) == len(printed)
    assert len(dumped.axioms) > len(s12.axioms)


def test_prog_script_errors(tmp_path):
    script = tmp_path / "broken.ics"
    script.write_text("seed\nadmit (= 0 1)\n")
    assert main(["prog", "run-script", str(script)]) == EXIT_MALFORMED
    assert main(["prog", "run-script", str(tmp_path / "none.ics")]) == EXIT_MALFORMED

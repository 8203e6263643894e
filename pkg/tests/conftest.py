"""Shared fixtures: the shipped base theory, its Nat extension and small signatures."""

import pytest

from refleqt import config
from refleqt.calculus import TheoryPresentation
from refleqt.syntax import Signature, arithmetic_signature, parse_formula
from refleqt.tools import TheoryLoader

NAT_THEORY_FILE = str(config.ASSETS_DIR / "nat_domain.thy")
NAT_TRANSLATION_FILE = str(config.ASSETS_DIR / "nat_domain.tr")


@pytest.fixture(scope="session")
def loader():
    return TheoryLoader()


@pytest.fixture(scope="session")
def s12(loader) -> TheoryPresentation:
    return loader.theory(config.STANDARD_THEORY_FILE)


@pytest.fixture(scope="session")
def nat_theory(loader) -> TheoryPresentation:
    return loader.theory(NAT_THEORY_FILE)


@pytest.fixture(scope="session")
def nat_translation(loader):
    return loader.translation(NAT_TRANSLATION_FILE)


@pytest.fixture
def arith() -> Signature:
    return arithmetic_signature("arith", coding=True)


@pytest.fixture
def graph_sig() -> Signature:
    return Signature(name="graph", relations=(("E", 2), ("P", 1)), constants=("c",))


@pytest.fixture
def parse(arith):
    """Parse over the arithmetic signature with coding."""

    def _parse(text: str, sig: Signature = None):
        return parse_formula(text, sig or arith)

    return _parse

import pytest

from natvar.babi import parse_babi
from natvar.smd import parse_smd
from natvar.synthetic import make_babi_bytes, make_smd_bytes


@pytest.fixture(scope="session")
def smd_bytes() -> bytes:
    return make_smd_bytes()


@pytest.fixture(scope="session")
def babi_bytes() -> bytes:
    return make_babi_bytes()


@pytest.fixture(scope="session")
def smd_corpus(smd_bytes):
    return parse_smd(smd_bytes)


@pytest.fixture(scope="session")
def babi_corpus(babi_bytes):
    return parse_babi(babi_bytes)


@pytest.fixture(scope="session")
def small_smd_corpus():
    return parse_smd(make_smd_bytes(n_dialogs=30))


@pytest.fixture(scope="session")
def small_babi_corpus():
    return parse_babi(make_babi_bytes(n_dialogs=40))

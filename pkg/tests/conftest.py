from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

from gcmerge.parser import parse_choreography, parse_global_type
from gcmerge.semantics import BuiltinEnv

sys.path.insert(0, str(Path(__file__).parent))

CORPUS = Path(__file__).resolve().parents[1] / "src" / "gcmerge" / "corpus"
ACCEPTANCE = pytest.StashKey[list]()


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


def env_with_check(values: list[bool]) -> BuiltinEnv:
    doc = json.loads(corpus_text("chor1.env.json"))
    doc["functions"]["check"]["values"] = values
    return BuiltinEnv.from_json(doc)


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def chor1():
    return parse_choreography(corpus_text("chor1.gc"), "chor1.gc")


@pytest.fixture(scope="session")
def chor2():
    return parse_choreography(corpus_text("chor2.gc"), "chor2.gc")


@pytest.fixture(scope="session")
def env1() -> BuiltinEnv:
    return BuiltinEnv.from_json(json.loads(corpus_text("chor1.env.json")))


@pytest.fixture(scope="session")
def protocols():
    out = parse_global_type(corpus_text("ab.gt"))
    out.update(parse_global_type(corpus_text("gc.gt")))
    out.update(parse_global_type(corpus_text("merged.gt")))
    out.update(parse_global_type(corpus_text("bad.gt")))
    return out


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

from __future__ import annotations

import pytest

from acpf.config_space import Condition, ConfigurationSpace, ParameterSpec
from acpf.fixtures import s2_space


def scond_space() -> ConfigurationSpace:
    return ConfigurationSpace((
        ParameterSpec("use_heur", "boolean", (False, True), False),
        ParameterSpec("w", "real", (0.0, 10.0), 1.0, Condition("use_heur", (True,))),
    ))


def mixed_space() -> ConfigurationSpace:
    """Every parameter kind plus a two-level condition chain."""
    return ConfigurationSpace((
        ParameterSpec("algo", "categorical", ("ls", "ga", "sa"), "ls"),
        ParameterSpec("pop", "integer", (2, 40), 10, Condition("algo", ("ga",))),
        ParameterSpec("elite", "boolean", (False, True), False, Condition("algo", ("ga",))),
        ParameterSpec("keep", "real", (0.0, 0.5), 0.1, Condition("elite", (True,))),
        ParameterSpec("temp", "real", (0.1, 5.0), 1.0, Condition("algo", ("sa",))),
        ParameterSpec("const", "real", (2.0, 2.0), 2.0),
    ))


@pytest.fixture
def s2() -> ConfigurationSpace:
    return s2_space()


@pytest.fixture
def scond() -> ConfigurationSpace:
    return scond_space()


@pytest.fixture
def mixed() -> ConfigurationSpace:
    return mixed_space()


# (criterion number, PASS/FAIL, title, seconds, detail), filled by test_acceptance
ACCEPTANCE: list[tuple[int, str, str, float, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, verdict, title, secs, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{verdict}] criterion {n:2d}: {title} ({secs:.2f}s) {detail}")

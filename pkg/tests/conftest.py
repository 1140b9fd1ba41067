import numpy as np
import pytest

from coaction_tower.algebra import build_algebra
from coaction_tower.coaction import (
    from_group_action,
    permutation_action,
    translation_coaction,
    trivial_coaction,
    unitary_action,
)
from coaction_tower.hopf import from_group_function_algebra, group_table, symmetric_group_permutations

ACCEPTANCE_LINES: list[str] = []


def make_examples() -> dict:
    z2, s3 = group_table("Z2"), group_table("S3")
    c2 = build_algebra([1, 1], [0.5, 0.5])
    c3 = build_algebra([1, 1, 1], [1 / 3] * 3)
    m2 = build_algebra([2], [0.5, 0.5])
    return {
        "trivial": trivial_coaction(c2, from_group_function_algebra(z2)),
        "flip": from_group_action(c2, z2, [permutation_action(c2, [0, 1]), permutation_action(c2, [1, 0])]),
        "s3": from_group_action(c3, s3, [permutation_action(c3, p) for p in symmetric_group_permutations(3)]),
        "translation": translation_coaction(from_group_function_algebra(z2)),
        "inner_m2": from_group_action(m2, z2, [unitary_action(m2, np.eye(2)),
                                               unitary_action(m2, np.diag([1.0, -1.0]))]),
    }


@pytest.fixture(scope="session")
def examples() -> dict:
    return make_examples()


@pytest.fixture(scope="session")
def flip(examples):
    return examples["flip"]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import random

import pytest
from hypothesis import strategies as st

from rcm.model import build_scenario, tiny

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def tiny_scenario():
    return tiny()


@pytest.fixture
def weighted_tiny():
    # w(t) = t + 1
    return tiny().with_weights([t + 1.0 for t in range(6)])


def random_scenario(rng: random.Random, max_robots=5, max_trajs=4, max_targets=12, integer_weights=True, alpha=None):
    n_robots = rng.randint(1, max_robots)
    n_targets = rng.randint(0, max_targets)
    if integer_weights:
        weights = [float(rng.randint(0, 5)) for _ in range(n_targets)]
    else:
        weights = [rng.uniform(0.0, 3.0) for _ in range(n_targets)]
    covers = []
    for _ in range(n_robots):
        covers.append(
            [
                rng.sample(range(n_targets), rng.randint(0, n_targets)) if n_targets else []
                for _ in range(rng.randint(1, max_trajs))
            ]
        )
    if alpha is None:
        alpha = rng.randint(0, n_robots)
    return build_scenario(weights, covers, min(alpha, n_robots))


@st.composite
def scenarios(draw, max_robots=5, max_trajs=4, max_targets=12, unit=False):
    n_targets = draw(st.integers(0, max_targets))
    n_robots = draw(st.integers(1, max_robots))
    if unit:
        weights = [1.0] * n_targets
    else:
        weights = draw(st.lists(st.integers(0, 6).map(float), min_size=n_targets, max_size=n_targets))
    target_ids = st.integers(0, n_targets - 1) if n_targets else st.nothing()
    covers = draw(
        st.lists(
            st.lists(st.lists(target_ids, max_size=n_targets, unique=True), min_size=1, max_size=max_trajs),
            min_size=n_robots,
            max_size=n_robots,
        )
    )
    alpha = draw(st.integers(0, n_robots))
    return build_scenario(weights, covers, alpha)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import itertools

import numpy as np
import pytest

from pbitsim.model import EnergyModel

_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        _acceptance_results.append((name, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_results:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, outcome in _acceptance_results:
            terminalreporter.write_line(f"{outcome:>6}  {name}")


def random_model(
    rng: np.random.Generator,
    num_vars: int,
    n_terms: int,
    max_order: int,
    coeff_scale: float = 2.0,
    integer: bool = False,
) -> EnergyModel:
    """Random sparse multilinear model used across the oracle tests."""
    terms = []
    for _ in range(n_terms):
        order = int(rng.integers(1, max_order + 1))
        vs = tuple(sorted(rng.choice(num_vars, size=min(order, num_vars), replace=False).tolist()))
        coeff = float(rng.integers(-5, 6)) if integer else float(rng.normal(0, coeff_scale))
        terms.append((coeff, vs))
    return EnergyModel(num_vars, terms)


def enumerate_states(n):
    return itertools.product((0, 1), repeat=n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

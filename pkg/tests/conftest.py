import pytest
from hypothesis import settings

from hkperc.families import (explicit, folded, grid, hamming, hypercube, middle_layer, odd,
                             product, torus)

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def small_families():
    """One representative of every kind, all of order <= 2**12."""
    return [
        hypercube(1), hypercube(3), hypercube(6),
        folded(3), folded(6), folded(8),
        middle_layer(2), middle_layer(3), middle_layer(4),
        odd(3), odd(4),
        torus(4, 4), torus(3, 3, 3), grid(3, 4), hamming(3, 3),
        product("star:3", "path:3"), product("edge", "cycle:5", "complete:4"),
        explicit([(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]),
    ]


SMALL = small_families()


@pytest.fixture(params=SMALL, ids=repr)
def small_graph(request):
    return request.param


# one line per acceptance criterion, filled in by test_acceptance.report()
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import pytest

from lambda_asp.corpus import data_path, load_initial_dictionary, load_pairs
from lambda_asp.learner import train


@pytest.fixture(scope="session")
def table3_pairs():
    return load_pairs(data_path("table3.pairs"))


@pytest.fixture(scope="session")
def table4():
    return load_initial_dictionary(data_path("table4.dict"))


@pytest.fixture(scope="session")
def trained(table3_pairs, table4):
    """The Table 3 corpus trained from the Table 4 dictionary, T=10, seed 0."""
    return train(table3_pairs, table4.lexicon(), iterations=10, seed=0, nouns=table4.words["noun"])


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(mod._line(n, ok, detail))

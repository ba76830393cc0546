import pytest

from gerbekit import io

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def corpus():
    """The bundled corpus, loaded once (spaces cache their matrices and groups)."""
    return io.load([], include_corpus=True)


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(_ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines):
        terminalreporter.write_line(line)

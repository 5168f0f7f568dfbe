import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def random_gram(rng, n):
    """Random positive definite Gram matrix ``B B^T``."""
    b = rng.standard_normal((n, n))
    g = b @ b.T
    return 0.5 * (g + g.T)


def brute_force_vectors(gram, radius2, bound):
    """Every sign-canonical nonzero integer vector in the box with norm <= radius2."""
    import itertools

    n = gram.shape[0]
    out = {}
    for v in itertools.product(range(-bound, bound + 1), repeat=n):
        v = np.array(v)
        nz = np.flatnonzero(v)
        if nz.size == 0 or v[nz[0]] < 0:
            continue
        q = float(v @ gram @ v)
        if q <= radius2 * (1 + 1e-10):
            out[tuple(v)] = q
    return out


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":").rstrip("abcd") or 0)):
            terminalreporter.write_line(line)

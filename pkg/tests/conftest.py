import numpy as np
import pytest

from discordlab.correlations import diagonal_discord, discord
from discordlab.experiment import SynthParams, analyze_trace, synthesize_trace
from discordlab.states import DensityMatrix


def random_hermitian(rng, d, scale=1.0):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (g + g.conj().T) / 2


def random_unitary(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_state(rng, dims=(2, 2), rank=None):
    return DensityMatrix(random_density(rng, dims[0] * dims[1], rank), dims)


def zero_discord_state(rng, dims=(2, 2)):
    """sum_k p_k rho_A^k (x) |k><k| in a random basis of B."""
    da, db = dims
    p = rng.dirichlet(np.ones(db))
    u = random_unitary(rng, db)
    m = np.zeros((da * db, da * db), dtype=complex)
    for k in range(db):
        e = u[:, k]
        m += p[k] * np.kron(random_density(rng, da), np.outer(e, e.conj()))
    return DensityMatrix(m, dims)


@pytest.fixture(scope="session")
def random_discord_pairs():
    """(D_diag, D_opt) in both directions for 1000 random two-qubit states."""
    rng = np.random.default_rng(2024)
    out = []
    for i in range(1000):
        rho = random_state(rng, rank=1 + i % 4)
        direction = "b2a" if i % 2 == 0 else "a2b"
        out.append((diagonal_discord(rho, direction).discord, discord(rho, direction).discord))
    return np.array(out)


@pytest.fixture(scope="session")
def zero_discord_values():
    rng = np.random.default_rng(77)
    out = []
    for _ in range(100):
        rho = zero_discord_state(rng)
        out.append((diagonal_discord(rho, "b2a").discord, discord(rho, "b2a").discord))
    return np.array(out)


@pytest.fixture(scope="session")
def noisy_closure():
    """Recovered (t_c, tau, rate_nats) over 100 noise seeds at 1% of the peak rise."""
    rows = []
    for seed in range(100):
        p = SynthParams(noise_sigma=0.002, seed=seed)
        t_c, fit, report = analyze_trace(synthesize_trace(p))
        rows.append((t_c, fit.tau, report.rate_nats))
    return np.array(rows)


@pytest.fixture(scope="session")
def noiseless_closure():
    return analyze_trace(synthesize_trace(SynthParams()))


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion and assert every check."""

    def record(number, title, checks):
        failed = [name for name, ok in checks.items() if not ok]
        status = "FAIL" if failed else "PASS"
        line = f"{status} criterion {number}: {title}"
        if failed:
            line += " (failed: " + ", ".join(failed) + ")"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert not failed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

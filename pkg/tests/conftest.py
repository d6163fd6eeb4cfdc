import warnings

import numpy as np
import pytest

from modaldmd import DmdOptions, Truncation, decompose, pair_conjugates
from modaldmd.membrane import GridDomain, WaveConfig, simulate
from modaldmd.oracle import match_modes

MAX_FREQ = 5.0


def linear_trajectory(a, x0, n):
    """Snapshots x0, A x0, ..., A^(n-1) x0 as columns."""
    cols = [x0]
    for _ in range(n - 1):
        cols.append(a @ cols[-1])
    return np.column_stack(cols)


def random_diagonalizable(rng, n, radius=1.0):
    """Real n x n matrix with known eigenvalues (conjugate pairs + reals) inside ``radius``."""
    n_pairs = n // 2 - 1 if n >= 4 else 0
    mags = rng.uniform(0.5, radius, size=n)
    angles = rng.uniform(0.2, 2.5, size=n_pairs)
    blocks = []
    eigs = []
    for k in range(n_pairs):
        r, th = mags[k], angles[k]
        blocks.append(r * np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]]))
        eigs += [r * np.exp(1j * th), r * np.exp(-1j * th)]
    for k in range(n - 2 * n_pairs):
        lam = mags[n_pairs + k] * (1 if k % 2 == 0 else -1)
        blocks.append(np.array([[lam]]))
        eigs.append(lam)
    from scipy.linalg import block_diag

    core = block_diag(*blocks)
    basis = rng.standard_normal((n, n))
    a = basis @ core @ np.linalg.inv(basis)
    return a, np.array(eigs, dtype=complex)


class MembraneRun:
    def __init__(self, gamma, m_stack=10, truncation=None):
        self.domain = GridDomain.square(41)
        self.cfg = WaveConfig(gamma=gamma)
        self.snapshots = simulate(self.domain, self.cfg)
        opts = DmdOptions(m_stack=m_stack, truncation=truncation or Truncation.sv_threshold(1e-10))
        self.result = decompose(self.snapshots, opts)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            self.groups = pair_conjugates(self.result)
        self.oscillatory = [g for g in self.groups if g.oscillatory]
        self.report = match_modes(self.result, self.groups, 1.0, MAX_FREQ, self.domain)

    def row_for_group(self, gi):
        return next(r for r in self.report.rows if r.group == gi)


_runs = {}


def membrane_run(gamma):
    if gamma not in _runs:
        _runs[gamma] = MembraneRun(gamma)
    return _runs[gamma]


@pytest.fixture(scope="session")
def membrane0():
    return membrane_run(0.0)


@pytest.fixture(scope="session")
def membrane01():
    return membrane_run(0.1)


@pytest.fixture(scope="session")
def membrane1():
    return membrane_run(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria report: one line per criterion, printed after the run
CRITERIA = {
    1: "linear-oracle equivalence",
    2: "undamped membrane frequencies",
    3: "damped membrane frequencies and growth",
    4: "background mode",
    5: "degenerate subspace recovery",
    6: "reconstruction",
    7: "simulator validation",
    8: "property suites",
}
_criteria_results = {}


class CriterionRecorder:
    def record(self, number, ok, detail):
        prev = _criteria_results.get(number)
        ok = bool(ok) and (prev is None or prev[0])
        detail = detail if prev is None else f"{prev[1]}; {detail}"
        _criteria_results[number] = (ok, detail)
        return ok


@pytest.fixture(scope="session")
def criteria():
    return CriterionRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _criteria_results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title in CRITERIA.items():
        if number in _criteria_results:
            ok, detail = _criteria_results[number]
            status = "PASS" if ok else "FAIL"
        else:
            status, detail = "FAIL", "not evaluated"
        terminalreporter.write_line(f"criterion {number} [{status}] {title}: {detail}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep

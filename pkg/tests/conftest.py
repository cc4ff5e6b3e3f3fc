import numpy as np
import pytest

from bootmst.bootstrap import run_bootstrap
from bootmst.correlation import pearson, to_distance
from bootmst.data import ReturnsPanel, SynthSpec, synthesize_panel
from bootmst.filtering import mst, pmfg

REFERENCE = SynthSpec(n_elements=50, n_sectors=5, T=250, market_loading=0.3, sector_loading=0.5, seed=7)
REFERENCE_B = 200


class Reference:
    def __init__(self, spec=REFERENCE, B=REFERENCE_B):
        self.spec = spec
        self.B = B
        self.panel, self.sectors = synthesize_panel(spec)
        self.corr = pearson(self.panel)
        self.mst = mst(to_distance(self.corr))
        self.pmfg = pmfg(self.corr)
        self.row = run_bootstrap(self.panel, "row", B, spec.seed)
        self.pair = run_bootstrap(self.panel, "pair", B, spec.seed)
        self.tallies = {"row": self.row, "pair": self.pair}


@pytest.fixture(scope="session")
def reference():
    return Reference()


@pytest.fixture
def noise_panel():
    rng = np.random.default_rng(2024)
    return ReturnsPanel(tuple(f"a{i}" for i in range(6)), rng.standard_normal((6, 40)))


def random_distance(rng, n):
    A = rng.random((n, n))
    D = np.triu(A, 1)
    return D + D.T


def random_correlation(rng, n, T=None):
    T = T or 3 * n
    X = rng.standard_normal((n, T)) + rng.standard_normal(T)
    return pearson(X)


# -- acceptance reporting ----------------------------------------------------

_criteria = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = dict(report.user_properties).get("criterion")
    if marker is None:
        return
    prev = _criteria.get(marker, "PASS")
    _criteria[marker] = "FAIL" if report.failed or prev == "FAIL" else "PASS"


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_criteria):
        terminalreporter.write_line(f"criterion {k:>2}: {_criteria[k]}")

import math

import numpy as np
import pytest

from bootmst.correlation import pearson_array
from bootmst.data import (
    ReturnsPanel,
    SectorMap,
    SynthSpec,
    load_panel,
    load_sectors,
    log_returns,
    returns_from_prices,
    synthesize_panel,
    write_panel,
    write_sectors,
)
from bootmst.exceptions import PanelError


def write(tmp_path, text, name="panel.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_wide_csv(tmp_path):
    path = write(tmp_path, "date,A,B\n1,0.1,0.2\n2,0.3,-0.1\n3,0.0,0.5\n4,-0.2,0.1\n5,0.4,0.0\n")
    panel = load_panel(path)
    assert (panel.n, panel.T) == (2, 5)
    assert panel.elements == ("A", "B")
    assert panel.time_labels == ("1", "2", "3", "4", "5")
    np.testing.assert_array_equal(panel.observations[0], [0.1, 0.3, 0.0, -0.2, 0.4])


def test_nan_cell_rejected(tmp_path):
    path = write(tmp_path, "date,A,B\n1,0.1,0.2\n2,nan,-0.1\n3,0.0,0.5\n")
    with pytest.raises(PanelError, match=r"non-finite value at \(1, 0\)"):
        load_panel(path)


def test_constant_column_rejected(tmp_path):
    path = write(tmp_path, "date,A,B\n1,0.1,0.2\n2,0.1,-0.1\n3,0.1,0.5\n")
    with pytest.raises(PanelError, match="zero variance element 'A'"):
        load_panel(path)


@pytest.mark.parametrize(
    "text, message",
    [
        ("date,A,A\n1,1,2\n2,2,1\n3,0,4\n", "duplicate"),
        ("date,A,B\n1,1,x\n2,2,1\n3,0,4\n", "row 0"),
        ("date,A,B\n1,1\n", "fields"),
        ("date,A,B\n1,1,2\n2,2,1\n", "at least 3"),
    ],
)
def test_malformed_panels(tmp_path, text, message):
    with pytest.raises(PanelError, match=message):
        load_panel(write(tmp_path, text))


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        load_panel(write(tmp_path, "date,A,B\n"), fmt="long")


def test_round_trip_is_bit_exact(tmp_path):
    panel, _ = synthesize_panel(SynthSpec(n_elements=4, n_sectors=2, T=20, seed=3))
    first = tmp_path / "a.csv"
    write_panel(panel, first)
    second = tmp_path / "b.csv"
    write_panel(load_panel(first), second)
    assert first.read_bytes() == second.read_bytes()
    np.testing.assert_array_equal(load_panel(second).observations, panel.observations)


def test_panel_is_immutable():
    panel = ReturnsPanel(("a", "b"), [[1.0, 2.0, 3.0], [3.0, 1.0, 2.0]])
    with pytest.raises(ValueError):
        panel.observations[0, 0] = 5.0


def test_sector_csv(tmp_path):
    path = write(tmp_path, "element,sector,subsector\nA,Tech,Soft\nB,Tech,Hard\nC,Energy,Oil\n", "s.csv")
    sectors = load_sectors(path)
    assert sectors.labels(["C", "A"]) == ["Energy", "Tech"]
    assert sectors.labels(["B"], "subsector") == ["Hard"]
    out = tmp_path / "s2.csv"
    write_sectors(sectors, out)
    assert out.read_text() == path.read_text()


def test_sector_map_nesting_enforced():
    with pytest.raises(PanelError, match="subsector"):
        SectorMap({"A": ("Tech", "X"), "B": ("Energy", "X")})


def test_sector_map_missing_element():
    with pytest.raises(PanelError, match="missing"):
        SectorMap({"A": ("s", "t")}).labels(["A", "B"])


def test_sector_header_required(tmp_path):
    with pytest.raises(PanelError, match="header"):
        load_sectors(write(tmp_path, "A,Tech,Soft\n", "s.csv"))


# -- prices ------------------------------------------------------------------


def test_log_returns_identity_and_e():
    assert log_returns([100.0], [100.0])[0] == 0.0
    assert log_returns([100.0], [100.0 * math.e])[0] == pytest.approx(1.0, abs=1e-15)


def test_log_returns_direct():
    np.testing.assert_allclose(log_returns([100, 100], [110, 90]), [math.log(1.1), math.log(0.9)], rtol=1e-15)


@pytest.mark.parametrize("open_, close", [([100, -1], [1, 1]), ([100, 0], [1, 1]), ([1, 2], [1])])
def test_log_returns_rejects(open_, close):
    with pytest.raises(PanelError):
        log_returns(open_, close)


def test_returns_from_price_files(tmp_path):
    o = write(tmp_path, "d,A,B\n1,10,20\n2,11,21\n3,12,19\n", "o.csv")
    c = write(tmp_path, "d,A,B\n1,11,19\n2,10,22\n3,12.5,20\n", "c.csv")
    panel = returns_from_prices(o, c)
    assert panel.elements == ("A", "B")
    assert panel.observations[0, 0] == pytest.approx(math.log(1.1))
    bad = write(tmp_path, "d,A,C\n1,11,19\n2,10,22\n3,12.5,20\n", "bad.csv")
    with pytest.raises(PanelError, match="labels"):
        returns_from_prices(o, bad)


# -- synthetic model -------------------------------------------------------------


def test_synth_spec_loading_invariant():
    SynthSpec(market_loading=0.6, sector_loading=0.6)  # 0.72 < 1 is admissible
    with pytest.raises(ValueError, match="must be < 1"):
        SynthSpec(market_loading=0.8, sector_loading=0.7)
    with pytest.raises(ValueError, match="must be < 1"):
        SynthSpec(market_loading=0.6, sector_loading=0.8)


def test_synth_is_pure():
    spec = SynthSpec(n_elements=8, n_sectors=3, T=30, seed=5)
    a, sa = synthesize_panel(spec)
    b, sb = synthesize_panel(spec)
    np.testing.assert_array_equal(a.observations, b.observations)
    assert sa == sb


def test_synth_round_robin_sectors():
    panel, sectors = synthesize_panel(SynthSpec(n_elements=7, n_sectors=3, T=10, seed=1))
    assert sectors.labels(panel.elements) == ["S0", "S1", "S2", "S0", "S1", "S2", "S0"]
    assert sectors.labels(panel.elements, "subsector") == sectors.labels(panel.elements)


def test_synth_independent_noise():
    panel, _ = synthesize_panel(SynthSpec(n_elements=6, n_sectors=2, T=100, market_loading=0, sector_loading=0, seed=42))
    C = pearson_array(panel.observations)
    off = C[np.triu_indices(6, 1)]
    # 15 pairs, each with sd ~ 0.1
    assert abs(off.mean()) < 0.1


def test_synth_factor_covariance_monte_carlo():
    spec = SynthSpec(n_elements=4, n_sectors=2, T=100_000, market_loading=0, sector_loading=0.8, seed=11)
    panel, _ = synthesize_panel(spec)
    C = pearson_array(panel.observations)
    # elements 0,2 share sector S0; 1,3 share S1
    assert C[0, 2] == pytest.approx(0.64, abs=0.01)
    assert C[1, 3] == pytest.approx(0.64, abs=0.01)
    assert C[0, 1] == pytest.approx(0.0, abs=0.01)


def test_within_sector_exceeds_cross_sector():
    for seed in range(20):
        panel, sectors = synthesize_panel(
            SynthSpec(n_elements=6, n_sectors=2, T=10_000, market_loading=0, sector_loading=0.3, seed=seed)
        )
        C = pearson_array(panel.observations)
        lab = np.array(sectors.labels(panel.elements))
        same = lab[:, None] == lab[None, :]
        iu = np.triu_indices(6, 1)
        assert C[iu][same[iu]].mean() > C[iu][~same[iu]].mean()

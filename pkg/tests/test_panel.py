import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import make_panel, write_text
from universal_efc.errors import (AxisCollisionError, ConfigError, ConflictError, DomainError,
                                  EmptyIntersectionError, ParseError, StructureError)
from universal_efc.panel import (ExportPanel, SmoothingConfig, exp_smooth, load_panel,
                                 mask_random, merge_universal, write_panel)

LONG = """country,activity,year,value
AAA,X,2000,1.5
AAA,X,2001,2.0
BBB,X,2000,3.25
BBB,X,2001,0.0
"""


# --- load_panel ---------------------------------------------------------------

def test_load_full_long(tmp_path):
    p = load_panel(write_text(tmp_path / "p.csv", LONG))
    assert p.shape == (2, 1, 2)
    assert p.n_missing == 0
    assert p.countries == ("AAA", "BBB")
    assert p.values[1, 0, 1] == 0.0


def test_deleted_row_becomes_missing(tmp_path):
    text = "\n".join(l for l in LONG.splitlines() if l != "BBB,X,2000,3.25") + "\n"
    p = load_panel(write_text(tmp_path / "p.csv", text))
    assert p.shape == (2, 1, 2)
    assert p.n_missing == 1
    assert np.isnan(p.values[1, 0, 0])


def test_negative_value_names_line(tmp_path):
    path = write_text(tmp_path / "p.csv", LONG.replace("2.0", "-3.0"))
    with pytest.raises(DomainError) as err:
        load_panel(path)
    assert err.value.line == 3
    assert ":3" in str(err.value)


@pytest.mark.parametrize("body,exc", [
    ("AAA,X,2000\n", ParseError),
    ("AAA,X,20x0,1\n", ParseError),
    ("AAA,X,2000,abc\n", ParseError),
    ("AAA,X,2000,1\nAAA,X,2000,2\n", ConflictError),
    ("AAA,X,2000,inf\n", DomainError),
])
def test_malformed_rows(tmp_path, body, exc):
    path = write_text(tmp_path / "p.csv", "country,activity,year,value\n" + body)
    with pytest.raises(exc):
        load_panel(path)


def test_duplicate_identical_row_is_accepted(tmp_path):
    path = write_text(tmp_path / "p.csv", LONG + "AAA,X,2000,1.5\n")
    assert load_panel(path).n_missing == 0


def test_bad_header(tmp_path):
    with pytest.raises(ParseError):
        load_panel(write_text(tmp_path / "p.csv", "a,b,c,d\n"))


def test_year_gap_is_filled_with_missing(tmp_path):
    path = write_text(tmp_path / "p.csv",
                      "country,activity,year,value\nA,X,2000,1\nA,X,2003,2\n")
    p = load_panel(path)
    assert p.years == (2000, 2001, 2002, 2003)
    assert p.n_missing == 2


def test_matrix_format(tmp_path):
    path = write_text(tmp_path / "m.csv", "country|year,X,Y\nAAA|2000,1,\nAAA|2001,2,3\n")
    p = load_panel(path, "matrix")
    assert p.shape == (1, 2, 2)
    assert p.n_missing == 1
    single = write_text(tmp_path / "s.csv", "country,X,Y\nAAA,1,2\nBBB,3,4\n")
    q = load_panel(single, "matrix", year=2010)
    assert q.years == (2010,)
    assert q.values[1, 1, 0] == 4.0


def test_matrix_write_roundtrip(tmp_path):
    p = make_panel(np.arange(12.0).reshape(2, 3, 2))
    write_panel(p, tmp_path / "m.csv", "matrix")
    assert load_panel(tmp_path / "m.csv", "matrix").equals(p)


def test_writer_line_endings(tmp_path):
    p = make_panel(np.ones((1, 1, 2)))
    write_panel(p, tmp_path / "o.csv")
    raw = (tmp_path / "o.csv").read_bytes()
    assert raw.endswith(b"\n") and b"\r" not in raw


decimals = st.decimals(min_value=0, max_value=10**9, places=6, allow_nan=False,
                       allow_infinity=False).map(lambda d: format(d.normalize(), "f"))


@given(st.lists(st.one_of(st.none(), decimals), min_size=6, max_size=6))
def test_long_roundtrip_is_exact(tmp_path_factory, cells):
    tmp = tmp_path_factory.mktemp("rt")
    rows = ["country,activity,year,value"]
    for k, text in enumerate(cells):
        if text is not None:
            rows.append(f"C{k % 2},A{k // 2 % 3},2000,{text}")
    if len(rows) == 1:
        return
    path = write_text(tmp / "in.csv", "\n".join(rows) + "\n")
    first = load_panel(path)
    write_panel(first, tmp / "out.csv")
    second = load_panel(tmp / "out.csv")
    assert first.equals(second)
    for k, text in enumerate(cells):
        if text is not None:
            i = first.countries.index(f"C{k % 2}")
            j = first.activities.index(f"A{k // 2 % 3}")
            assert first.values[i, j, 0] == float(text)


# --- ExportPanel invariants ------------------------------------------------------

def test_panel_rejects_invalid_axes():
    with pytest.raises(StructureError):
        ExportPanel(["A", "A"], ["X"], [2000], np.ones((2, 1, 1)))
    with pytest.raises(StructureError):
        ExportPanel(["A"], ["X"], [2000, 2002], np.ones((1, 1, 2)))
    with pytest.raises(StructureError):
        ExportPanel(["A"], ["X"], [2000], np.ones((1, 1, 2)))
    with pytest.raises(DomainError):
        ExportPanel(["A"], ["X"], [2000], -np.ones((1, 1, 1)))


def test_panel_is_immutable():
    p = make_panel(np.ones((1, 1, 1)))
    with pytest.raises(ValueError):
        p.values[0, 0, 0] = 2.0


# --- merge_universal -------------------------------------------------------------

def test_merge_intersects_countries():
    goods = make_panel(np.ones((3, 2, 1)), countries=["A", "B", "C"], activities=["01", "02"])
    serv = make_panel(2 * np.ones((2, 2, 1)), countries=["C", "A"], activities=["S1", "S2"])
    m = merge_universal(goods, serv)
    assert m.shape == (2, 4, 1)
    assert m.countries == ("A", "C")
    assert m.activities == ("01", "02", "S1", "S2")
    assert (m.values[:, :2] == 1).all() and (m.values[:, 2:] == 2).all()


def test_merge_intersects_years():
    goods = make_panel(np.ones((1, 1, 23)), activities=["01"], years=list(range(1996, 2019)))
    serv = make_panel(np.ones((1, 1, 29)), activities=["S"], years=list(range(1990, 2019)))
    assert merge_universal(goods, serv).years == tuple(range(1996, 2019))


def test_merge_collision_and_empty():
    a = make_panel(np.ones((1, 1, 1)), activities=["77"])
    with pytest.raises(AxisCollisionError):
        merge_universal(a, a)
    b = make_panel(np.ones((1, 1, 1)), countries=["ZZZ"], activities=["S"])
    with pytest.raises(EmptyIntersectionError):
        merge_universal(a, b)
    c = make_panel(np.ones((1, 1, 1)), activities=["S"], years=[1990])
    with pytest.raises(EmptyIntersectionError):
        merge_universal(a, c)


# --- smoothing -------------------------------------------------------------------

def test_alpha_value():
    assert SmoothingConfig(3).alpha == pytest.approx(0.206299, abs=5e-7)
    with pytest.raises(ConfigError):
        SmoothingConfig(0)
    with pytest.raises(ConfigError):
        SmoothingConfig(-1)


def test_constant_series_fixed_point():
    assert exp_smooth(np.array([5.0, 5, 5, 5]), 3).tolist() == [5.0, 5, 5, 5]


def test_impulse_half_life():
    out = exp_smooth(np.array([1.0, 0, 0, 0]), 3)
    assert out[3] == pytest.approx(0.5, rel=0, abs=4 * np.finfo(float).eps)
    alpha = 1 - 2 ** (-1 / 3)
    assert out[3] == pytest.approx((1 - alpha) ** 3, rel=1e-15)


def test_smoothing_skips_missing():
    out = exp_smooth(np.array([np.nan, 2.0, np.nan, 4.0]), 1)
    assert np.isnan(out[0]) and np.isnan(out[2])
    assert out[1] == 2.0
    assert out[3] == 3.0   # alpha = 0.5, state carried over the gap


def test_smoothing_panel_type():
    p = make_panel(np.ones((2, 2, 3)))
    assert isinstance(exp_smooth(p, SmoothingConfig(3)), ExportPanel)


series = hnp.arrays(float, st.integers(1, 12),
                    elements=st.one_of(st.floats(0, 1e6), st.just(np.nan)))


@given(series, st.floats(0.1, 20))
def test_smoothing_is_convex(x, half_life):
    out = exp_smooth(x, half_life)
    present = ~np.isnan(x)
    assert (np.isnan(out) == ~present).all()
    if present.any():
        lo, hi = np.nanmin(x), np.nanmax(x)
        assert np.all(out[present] >= lo - 1e-9 * max(1, hi))
        assert np.all(out[present] <= hi + 1e-9 * max(1, hi))


@given(series, st.floats(0.1, 20), st.floats(1e-3, 1e3))
def test_smoothing_commutes_with_scaling(x, half_life, k):
    np.testing.assert_allclose(exp_smooth(k * x, half_life), k * exp_smooth(x, half_life),
                               rtol=1e-12, atol=1e-300)


# --- masking ---------------------------------------------------------------------

def test_mask_counts():
    values = np.ones((2, 5, 2))
    values[:, :, 1] = np.nan
    p = make_panel(values)
    masked, mask = mask_random(p, 0.5, seed=1)
    assert mask.count == 5
    assert masked.n_present == 5
    assert not (mask.cells & p.missing).any()


def test_mask_determinism_and_seed_dependence():
    p = make_panel(np.arange(1000.0).reshape(10, 10, 10))
    a = mask_random(p, 0.1, seed=3)[1].cells
    b = mask_random(p, 0.1, seed=3)[1].cells
    c = mask_random(p, 0.1, seed=4)[1].cells
    assert (a == b).all()
    assert (a != c).any()


@pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
def test_mask_fraction_domain(fraction):
    with pytest.raises(ConfigError):
        mask_random(make_panel(np.ones((1, 1, 2))), fraction, 0)


@given(st.integers(1, 300), st.floats(0.01, 0.99), st.integers(0, 2**32 - 1))
def test_mask_leaves_expected_present(n, fraction, seed):
    p = make_panel(np.ones((1, 1, n)))
    masked, mask = mask_random(p, fraction, seed)
    expected = int(np.floor(fraction * n + 0.5))
    assert mask.count == expected
    assert masked.n_present == n - expected

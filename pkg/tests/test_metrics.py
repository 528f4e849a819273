import pytest
from hypothesis import given
from hypothesis import strategies as st

from risvsim.errors import EmptyInput, TimestampMismatch
from risvsim.metrics import ecdf, gain_area, nlos_fraction, outage_fraction, summarize
from risvsim.sim import PathLossSample, SampleLog


def log_of(losses, conds=None, tick=1.0, link="l"):
    conds = conds or ["LOS"] * len(losses)
    return SampleLog([PathLossSample(i * tick, link, c, "direct_los", pl, 100.0)
                      for i, (pl, c) in enumerate(zip(losses, conds))])


class TestEcdf:
    def test_example(self):
        f = ecdf([1, 2, 2, 4])
        assert f(2) == 0.75
        assert f(0.5) == 0.0
        assert f(4) == 1.0
        assert f(3.9) == 0.75

    def test_all_equal(self):
        f = ecdf([5, 5, 5])
        assert f.values == (5,)
        assert f.fractions == (1.0,)

    def test_empty(self):
        with pytest.raises(EmptyInput):
            ecdf([])

    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50), st.floats(-1e3, 1e3))
    def test_matches_counting(self, vals, q):
        f = ecdf(vals)
        assert f(q) == pytest.approx(sum(v <= q for v in vals) / len(vals))
        assert list(f.fractions) == sorted(f.fractions)
        assert f.fractions[-1] == 1.0


class TestOutage:
    def test_example(self):
        assert outage_fraction(log_of([100, 150, 140]), 142) == pytest.approx(1 / 3)

    def test_boundary_is_not_outage(self):
        assert outage_fraction(log_of([142.0, 142.0]), 142.0) == 0.0

    def test_empty(self):
        with pytest.raises(EmptyInput):
            outage_fraction(SampleLog())


class TestNlosFraction:
    def test_all_los(self):
        assert nlos_fraction(log_of([1, 2, 3])) == 0.0

    def test_all_nlos(self):
        assert nlos_fraction(log_of([1, 2], ["NLOS", "NLOS"])) == 1.0

    def test_half(self):
        assert nlos_fraction(log_of([1, 2, 3, 4], ["LOS", "NLOS", "NLOS", "LOS"])) == 0.5


class TestGainArea:
    def test_identical_logs(self):
        a = log_of([120, 130, 140])
        assert gain_area(a, a) == 0.0

    def test_constant_ten_db_over_five_seconds(self):
        base = log_of([130.0] * 6)
        enh = log_of([120.0] * 6)
        assert gain_area(base, enh) == pytest.approx(50.0)

    def test_worse_ticks_are_clamped(self):
        base = log_of([130, 130, 130])
        enh = log_of([120, 140, 130])
        assert gain_area(base, enh) == pytest.approx(10.0)

    def test_tick_width(self):
        base = log_of([130.0] * 11, tick=0.5)
        enh = log_of([127.0] * 11, tick=0.5)
        assert gain_area(base, enh) == pytest.approx(15.0)

    def test_mismatched_timestamps(self):
        with pytest.raises(TimestampMismatch):
            gain_area(log_of([1, 2, 3]), log_of([1, 2, 3], tick=0.5))

    def test_mismatched_length(self):
        with pytest.raises(TimestampMismatch):
            gain_area(log_of([1, 2, 3]), log_of([1, 2]))

    @given(st.lists(st.tuples(st.floats(60, 200), st.floats(60, 200)), min_size=1, max_size=40))
    def test_non_negative_and_bounded(self, pairs):
        base = log_of([a for a, _ in pairs])
        enh = log_of([b for _, b in pairs])
        g = gain_area(base, enh)
        assert g >= 0.0
        assert g <= sum(max(0.0, a - b) for a, b in pairs[:-1]) + 1e-9


def test_summarize():
    log = SampleLog(log_of([100, 150], ["LOS", "NLOS"]).samples + log_of([90, 95], link="m").samples)
    rows = {r.link_id: r for r in summarize(log)}
    assert rows["l"].samples == 2
    assert rows["l"].outage_fraction == 0.5
    assert rows["l"].nlos_fraction == 0.5
    assert rows["m"].mean_db == 92.5

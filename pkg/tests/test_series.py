import numpy as np
import pytest
from hypothesis import given, strategies as st

from epiforecast import (
    InsufficientDataError,
    MonthDate,
    MonthlySeries,
    TimeScale,
    ValidationError,
    build_poly_terms,
    build_seasonal_dummies,
    lag_values,
)
from epiforecast.series import DesignMatrix, TimeIndex


class TestMonthDate:
    def test_parse_round_trip(self):
        md = MonthDate.parse("2021-07")
        assert md == MonthDate(2021, 7)
        assert str(md) == "2021-07"

    @pytest.mark.parametrize("bad", ["2021-13", "2021-00", "202107", "07-2021", "x"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValidationError):
            MonthDate.parse(bad)

    def test_plus_crosses_years(self):
        assert MonthDate(2020, 11).plus(3) == MonthDate(2021, 2)
        assert MonthDate(2020, 1).plus(-1) == MonthDate(2019, 12)
        assert MonthDate(2020, 6).plus(0) == MonthDate(2020, 6)

    @given(
        year=st.integers(1900, 2100),
        month=st.integers(1, 12),
        a=st.integers(-500, 500),
        b=st.integers(-500, 500),
    )
    def test_plus_composes(self, year, month, a, b):
        md = MonthDate(year, month)
        assert md.plus(a).plus(b) == md.plus(a + b)
        assert md.plus(a).months_since(md) == a

    def test_ordering(self):
        assert MonthDate(2020, 12) < MonthDate(2021, 1)
        assert MonthDate(2021, 1) < MonthDate(2021, 2)

    def test_month_name(self):
        assert MonthDate(2020, 1).name == "jan"
        assert MonthDate(2020, 12).name == "dec"


class TestMonthlySeries:
    def test_basic_accessors(self):
        s = MonthlySeries(MonthDate(2020, 11), [1.0, 2.0, 3.0])
        assert len(s) == 3
        assert s.end == MonthDate(2021, 1)
        assert s.month_at(2) == MonthDate(2021, 1)
        assert [str(m) for m in s.months()] == ["2020-11", "2020-12", "2021-01"]
        assert list(s.month_numbers()) == [11, 12, 1]

    def test_month_at_bounds(self):
        s = MonthlySeries(MonthDate(2020, 1), [1.0, 2.0])
        with pytest.raises(ValidationError):
            s.month_at(2)
        with pytest.raises(ValidationError):
            s.month_at(-1)

    def test_rejects_bad_values(self):
        with pytest.raises(ValidationError):
            MonthlySeries(MonthDate(2020, 1), [])
        with pytest.raises(ValidationError):
            MonthlySeries(MonthDate(2020, 1), [1.0, -2.0])
        with pytest.raises(ValidationError):
            MonthlySeries(MonthDate(2020, 1), [1.0, float("nan")])
        # zero is allowed; only negatives are not
        MonthlySeries(MonthDate(2020, 1), [0.0, 1.0])

    def test_values_read_only(self):
        s = MonthlySeries(MonthDate(2020, 1), [1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 9.0

    def test_prefix(self):
        s = MonthlySeries(MonthDate(2020, 1), [1.0, 2.0, 3.0, 4.0])
        p = s.prefix(2)
        assert len(p) == 2
        assert p.start == s.start
        assert list(p.values) == [1.0, 2.0]
        with pytest.raises(ValidationError):
            s.prefix(0)
        with pytest.raises(ValidationError):
            s.prefix(5)

    def test_equality(self):
        a = MonthlySeries(MonthDate(2020, 1), [1.0, 2.0], region="x")
        b = MonthlySeries(MonthDate(2020, 1), [1.0, 2.0], region="x")
        c = MonthlySeries(MonthDate(2020, 2), [1.0, 2.0], region="x")
        assert a == b
        assert a != c


class TestTimeScale:
    def test_fit_centers_and_scales(self):
        scale = TimeScale.fit(5)
        raw = np.arange(1, 6, dtype=float)
        z = scale.transform(raw)
        assert abs(z.mean()) < 1e-12
        assert abs(z.std() - 1.0) < 1e-12

    def test_single_point_degenerate(self):
        scale = TimeScale.fit(1)
        assert scale.transform(np.array([1.0]))[0] == 0.0

    def test_identity(self):
        ident = TimeScale.identity()
        raw = np.array([3.0, 9.0])
        assert np.array_equal(ident.transform(raw), raw)


class TestDesignBuilders:
    def test_seasonal_dummies_shape_and_names(self, series48):
        design = build_seasonal_dummies(series48)
        assert design.n_cols == 12
        assert design.names == (
            "jan", "feb", "mar", "apr", "may", "jun",
            "jul", "aug", "sep", "oct", "nov", "dec",
        )
        # exactly one indicator per row
        assert np.array_equal(design.matrix.sum(axis=1), np.ones(48))

    def test_seasonal_dummies_mark_months(self):
        s = MonthlySeries(MonthDate(2020, 3), np.ones(4))
        design = build_seasonal_dummies(s)
        assert list(design.column("mar")) == [1, 0, 0, 0]
        assert list(design.column("jun")) == [0, 0, 0, 1]

    def test_poly_terms(self, series48):
        design = build_poly_terms(series48, degree=2)
        assert design.names == ("t", "t2")
        t = design.column("t")
        assert np.allclose(design.column("t2"), t * t)

    def test_poly_rejects_bad_degree(self, series48):
        with pytest.raises(ValidationError):
            build_poly_terms(series48, degree=0)

    def test_design_matrix_validation(self):
        with pytest.raises(ValidationError):
            DesignMatrix(np.ones((3, 2)), ("a",))
        with pytest.raises(ValidationError):
            DesignMatrix(np.ones((3, 2)), ("a", "a"))

    def test_hstack_and_take_rows(self):
        a = DesignMatrix(np.ones((3, 1)), ("a",))
        b = DesignMatrix(np.zeros((3, 1)), ("b",))
        combined = a.hstack(b)
        assert combined.names == ("a", "b")
        tail = combined.take_rows(1)
        assert tail.n_rows == 2

    def test_time_index_for_series(self, series48):
        idx = TimeIndex.for_series(series48)
        assert idx.raw[0] == 1.0
        assert idx.raw[-1] == 48.0
        assert abs(idx.scaled.mean()) < 1e-12


class TestLagValues:
    def test_lag_alignment(self):
        s = MonthlySeries(MonthDate(2020, 1), np.arange(1.0, 16.0))
        lagged = lag_values(s, 12)
        assert lagged.first_defined == 12
        assert np.all(np.isnan(lagged.values[:12]))
        assert np.array_equal(lagged.values[12:], np.array([1.0, 2.0, 3.0]))
        assert not lagged.defined[11]
        assert lagged.defined[12]

    def test_lag_errors(self):
        s = MonthlySeries(MonthDate(2020, 1), np.ones(10))
        with pytest.raises(ValidationError):
            lag_values(s, 0)
        with pytest.raises(InsufficientDataError):
            lag_values(s, 10)

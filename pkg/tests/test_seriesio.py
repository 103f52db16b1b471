import numpy as np
import pytest

from qlvsim.errors import DomainError
from qlvsim.protocols import Series
from qlvsim.seriesio import (format_value, read_series, serialize_series,
                             write_series)


def sample_series():
    t = np.linspace(0.0, 1.0, 5)
    return Series(times=t, columns={"stress": np.sin(t) / 3.0,
                                    "strain": t ** 2})


class TestWrite:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "s.csv"
        series = sample_series()
        write_series(path, series)
        back = read_series(path)
        assert np.array_equal(back.times, series.times)
        assert np.array_equal(back.columns["stress"],
                              series.columns["stress"])
        assert np.array_equal(back.columns["strain"],
                              series.columns["strain"])

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        series = sample_series()
        write_series(a, series)
        write_series(b, series)
        assert a.read_bytes() == b.read_bytes()

    def test_lf_newlines(self, tmp_path):
        path = tmp_path / "s.csv"
        write_series(path, sample_series())
        raw = path.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")

    def test_precision_truncation(self):
        series = Series(times=np.array([0.0]),
                        columns={"x": np.array([1.0 / 3.0])})
        text = serialize_series(series, precision=6)
        assert "0.333333" in text and "0.3333333" not in text

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            format_value(float("nan"))

    def test_negative_zero_normalized(self):
        assert format_value(-0.0) == "0"


class TestRead:
    def write(self, tmp_path, text):
        path = tmp_path / "in.csv"
        path.write_text(text)
        return path

    def test_three_rows(self, tmp_path):
        path = self.write(tmp_path, "time,x\n0,1\n1,2\n2,3\n")
        series = read_series(path)
        assert series.times.size == 3
        assert np.array_equal(series.columns["x"], [1.0, 2.0, 3.0])

    def test_duplicate_timestamp_line_number(self, tmp_path):
        path = self.write(tmp_path, "time,x\n0,1\n1,2\n1,3\n")
        with pytest.raises(DomainError, match="line 4"):
            read_series(path)

    def test_empty_file(self, tmp_path):
        path = self.write(tmp_path, "")
        with pytest.raises(DomainError, match="empty"):
            read_series(path)

    def test_no_data_rows(self, tmp_path):
        path = self.write(tmp_path, "time,x\n")
        with pytest.raises(DomainError, match="no data rows"):
            read_series(path)

    def test_non_numeric_cell(self, tmp_path):
        path = self.write(tmp_path, "time,x\n0,1\n1,oops\n")
        with pytest.raises(DomainError, match="line 3"):
            read_series(path)

    def test_missing_time_header(self, tmp_path):
        path = self.write(tmp_path, "t,x\n0,1\n")
        with pytest.raises(DomainError, match="line 1"):
            read_series(path)

    def test_ragged_row(self, tmp_path):
        path = self.write(tmp_path, "time,x\n0,1\n1\n")
        with pytest.raises(DomainError, match="line 3"):
            read_series(path)

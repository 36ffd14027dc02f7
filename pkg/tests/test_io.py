import io

import numpy as np
import pytest

from byhe import (
    FormatError,
    SynthSpec,
    Wave,
    estimate_hr_wave,
    oracle_label_matrix,
    read_matrix,
    read_wave,
    resample,
    synth_bvp,
    write_matrix,
    write_pgm,
    write_wave,
)


def test_read_wave_single_column_with_override():
    w = read_wave(io.StringIO("0.0\n1.0\n0.0\n-1.0"), fs_override=4.0)
    assert w.fs == 4.0
    np.testing.assert_array_equal(w.samples, [0.0, 1.0, 0.0, -1.0])


def test_read_wave_two_column_infers_fs():
    w = read_wave(io.StringIO("0.0,0.5\n0.1,0.6"))
    assert w.fs == pytest.approx(10.0)
    np.testing.assert_allclose(w.samples, [0.5, 0.6])


def test_read_wave_header_fs():
    w = read_wave(io.StringIO("# fs=25\n1\n2\n3"))
    assert w.fs == 25.0


def test_read_wave_override_beats_header():
    w = read_wave(io.StringIO("# fs=25\n1\n2"), fs_override=30.0)
    assert w.fs == 30.0


def test_read_wave_non_numeric_names_line():
    with pytest.raises(FormatError, match="line 3"):
        read_wave(io.StringIO("1.0\n2.0\nabc\n4.0"), fs_override=1.0)


def test_read_wave_empty_input():
    with pytest.raises(FormatError, match="empty"):
        read_wave(io.StringIO(""), fs_override=1.0)


def test_read_wave_missing_fs():
    with pytest.raises(FormatError, match="fs"):
        read_wave(io.StringIO("1\n2\n3"))


def test_read_wave_rejects_non_uniform_grid():
    with pytest.raises(FormatError, match="non-uniform"):
        read_wave(io.StringIO("0.0,1\n0.1,2\n0.35,3"))


def test_read_wave_rejects_decreasing_time():
    with pytest.raises(FormatError, match="increasing"):
        read_wave(io.StringIO("0.0,1\n-0.1,2\n0.2,3"))


def test_wave_round_trip_300_random_samples():
    rng = np.random.default_rng(7)
    w = Wave(rng.standard_normal(300), fs=30.0)
    buf = io.StringIO()
    write_wave(w, buf)
    back = read_wave(io.StringIO(buf.getvalue()))
    assert back.fs == pytest.approx(w.fs, rel=1e-12)
    assert np.max(np.abs(back.samples - w.samples)) < 1e-9


def test_wave_files_on_disk(tmp_path):
    w = Wave(np.linspace(-1, 1, 50), fs=12.5)
    path = tmp_path / "wave.txt"
    write_wave(w, path)
    back = read_wave(path)
    np.testing.assert_allclose(back.samples, w.samples, atol=1e-12)
    assert back.fs == 12.5


def test_empty_wave_rejected_at_construction():
    with pytest.raises(ValueError):
        Wave(np.array([]), fs=30.0)


def test_read_matrix_identity():
    m = read_matrix(io.StringIO("1,0\n0,1"))
    np.testing.assert_array_equal(m, np.eye(2))


def test_read_matrix_ragged():
    with pytest.raises(FormatError, match="ragged"):
        read_matrix(io.StringIO("1,2\n3"))


def test_read_matrix_non_finite():
    with pytest.raises(FormatError, match="non-finite"):
        read_matrix(io.StringIO("1,2\nnan,4"))


def test_read_matrix_square_check():
    with pytest.raises(FormatError, match="square"):
        read_matrix(io.StringIO("1,2,3\n4,5,6"), require_square=True)


def test_matrix_round_trip_oracle_exact():
    m = oracle_label_matrix(72.0, 30.0, 64)
    buf = io.StringIO()
    write_matrix(m, buf)
    back = read_matrix(io.StringIO(buf.getvalue()), require_square=True)
    np.testing.assert_array_equal(back, m)


def test_write_pgm_format():
    buf = io.StringIO()
    write_pgm(np.array([[-1.0, 0.0], [0.5, 1.0]]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "P2"
    assert lines[1] == "2 2"
    assert lines[2] == "255"
    assert lines[3].split() == ["0", "128"]
    assert lines[4].split() == ["191", "255"]


def test_resample_identity_factor():
    w = Wave(np.arange(10.0), fs=5.0)
    out = resample(w, 1.0)
    np.testing.assert_array_equal(out.samples, w.samples)
    assert out.samples is not w.samples


def test_resample_factor_out_of_range():
    w = Wave(np.arange(10.0), fs=5.0)
    with pytest.raises(ValueError):
        resample(w, 8.0)
    with pytest.raises(ValueError):
        resample(w, 0.1)


def _fft_peak_hz(w: Wave) -> float:
    spec = np.abs(np.fft.rfft(w.samples - np.mean(w.samples)))
    return float(np.fft.rfftfreq(len(w), 1.0 / w.fs)[np.argmax(spec)])


def test_resample_preserves_dominant_frequency():
    t = np.arange(300) / 30.0
    w = Wave(np.cos(2 * np.pi * 1.2 * t), fs=30.0)
    up = resample(w, 2.0)
    assert up.fs == 60.0
    assert abs(_fft_peak_hz(up) - 1.2) < 0.05
    assert abs(up.duration - w.duration) <= 1.0 / w.fs


def test_resample_round_trip_bounds():
    rng = np.random.default_rng(3)
    w = Wave(rng.standard_normal(100), fs=20.0)
    back = resample(resample(w, 2.0), 0.5)
    assert abs(len(back) - len(w)) <= 1


def test_resample_augmentation_halves_reported_bpm():
    # Doubling the grid but keeping the old fs metadata stretches every beat
    # to twice its duration, so the estimator should read half the rate.
    w = synth_bvp(SynthSpec(bpm=96.0, duration=20.0, fs=30.0, seed=1))
    slowed = Wave(resample(w, 2.0).samples, fs=w.fs)
    orig = estimate_hr_wave(w)
    aug = estimate_hr_wave(slowed)
    assert abs(orig - 96.0) < 2.0
    assert abs(aug - 48.0) < 2.0

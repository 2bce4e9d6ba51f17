import numpy as np
import pytest

from irs_precoding.codebook import design_codebook
from irs_precoding.signals import channels_from_arrays, sample_channels, substream
from irs_precoding.simulation import estimate_ser, estimate_ser_curve


@pytest.fixture
def miso(qpsk):
    ch = sample_channels(16, 2, 1, stream=substream(0, "channel", 0))
    return ch, design_codebook(ch, "inf", qpsk, seed=0, restarts=1)


def test_noise_free_limit_has_no_errors(qpsk, miso):
    ch, book = miso
    assert np.all(book.margins < 0)
    est = estimate_ser(book, ch, qpsk, 80.0, 50, np.random.default_rng(0))
    assert est.errors == 0
    assert est.mean == 0.0
    assert est.trials == 50 * 16 * 2


def test_constant_codebook_serves_one_symbol(qpsk):
    h = channels_from_arrays(np.array([[1.0, 1.0, 1.0, 1.0]]))
    book = np.ones((4, 4), dtype=complex)
    quiet = estimate_ser(book, h, qpsk, 60.0, 200, np.random.default_rng(1))
    assert quiet.mean == pytest.approx(0.75, abs=1e-12)
    noisy = estimate_ser(book, h, qpsk, -40.0, 2000, np.random.default_rng(2))
    assert abs(noisy.mean - 0.75) < 3 * noisy.stderr + 1e-3


def test_fixed_seed_reproduces(qpsk, miso):
    ch, book = miso
    a = estimate_ser(book, ch, qpsk, 0.0, 40, substream(3, "noise", 1))
    b = estimate_ser(book, ch, qpsk, 0.0, 40, substream(3, "noise", 1))
    assert a.mean == b.mean
    assert np.array_equal(a.per_user, b.per_user)


def test_single_antenna_combiner_is_identity(qpsk, miso):
    ch, book = miso
    a = estimate_ser_curve(book, ch, qpsk, [-4.0, 2.0], 30, np.random.default_rng(9))
    b = estimate_ser_curve(book, ch, qpsk, [-4.0, 2.0], 30, np.random.default_rng(9),
                           combiners=np.ones((2, 1)))
    assert [e.errors for e in a] == [e.errors for e in b]


def test_independent_streams_agree(qpsk, miso):
    ch, book = miso
    a = estimate_ser(book, ch, qpsk, -2.0, 300, substream(0, "noise", 1))
    b = estimate_ser(book, ch, qpsk, -2.0, 300, substream(0, "noise", 2))
    assert abs(a.mean - b.mean) <= 3 * np.hypot(a.stderr, b.stderr)


def test_ser_decreases_with_snr(qpsk, miso):
    ch, book = miso
    curve = estimate_ser_curve(book, ch, qpsk, [-8.0, -4.0, 0.0, 4.0, 8.0], 100,
                               np.random.default_rng(4))
    means = [e.mean for e in curve]
    assert all(b <= a for a, b in zip(means, means[1:]))


def test_per_user_power_scaling(qpsk, miso):
    ch, book = miso
    a = estimate_ser(book, ch, qpsk, 3.0, 30, np.random.default_rng(5), power_scale=2.0)
    b = estimate_ser(book, ch, qpsk, 3.0 + 10 * np.log10(2.0), 30, np.random.default_rng(5))
    assert a.errors == b.errors


def test_draws_must_be_positive(qpsk, miso):
    ch, book = miso
    with pytest.raises(ValueError):
        estimate_ser(book, ch, qpsk, 0.0, 0, np.random.default_rng(0))

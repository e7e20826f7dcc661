import numpy as np
import pytest

from src.channel import NoiseConfig, generate_trace, snr_to_sigma2
from src.core import RngStream
from src.errors import InvalidArgumentError


@pytest.mark.parametrize(
    "snr_db, nt, expected",
    [(0.0, 2, 2.0), (10.0, 2, 0.2), (3.0, 1, 0.5011872336272722)],
)
def test_snr_to_sigma2(snr_db, nt, expected):
    assert snr_to_sigma2(snr_db, nt) == pytest.approx(expected, rel=1e-12)
    assert NoiseConfig.from_snr_db(snr_db, nt).sigma2 == pytest.approx(expected, rel=1e-12)


def test_time_invariant_trace_repeats_first_matrix(rng):
    trace = generate_trace(rng, 2, 8, 50, 1.0)
    assert trace.matrices.shape == (50, 8, 2)
    assert (trace.nr, trace.nt, trace.slots) == (8, 2, 50)
    assert all(np.array_equal(h, trace.matrices[0]) for h in trace.matrices)


def test_zeta_zero_is_uncorrelated(rng):
    h = generate_trace(rng, 1, 1, 10_000, 0.0).matrices[:, 0, 0]
    corr = np.abs(np.vdot(h[:-1], h[1:])) / np.sqrt(np.vdot(h[:-1], h[:-1]).real * np.vdot(h[1:], h[1:]).real)
    assert corr < 0.05


def test_gauss_markov_is_stationary():
    h = generate_trace(RngStream(11), 8, 8, 10_000, 0.98).matrices
    variance = np.mean(np.abs(h) ** 2)
    assert 0.95 <= variance <= 1.05


def test_frobenius_energy_is_stationary():
    energies = [
        np.mean(np.sum(np.abs(generate_trace(RngStream(s), 2, 4, 200, 0.9).matrices) ** 2, axis=(1, 2)))
        for s in range(30)
    ]
    assert np.mean(energies) == pytest.approx(8.0, rel=0.1)


def test_hold_slots_freezes_pilots(rng):
    trace = generate_trace(rng, 2, 4, 20, 0.5, hold_slots=4)
    pilots, data = trace.split(4)
    assert all(np.array_equal(h, pilots[0]) for h in pilots)
    assert not np.array_equal(data[0], pilots[0])


@pytest.mark.parametrize("zeta", [-0.1, 1.5])
def test_invalid_zeta(rng, zeta):
    with pytest.raises(InvalidArgumentError):
        generate_trace(rng, 1, 1, 4, zeta)


def test_trace_is_pure_function_of_stream():
    a = generate_trace(RngStream(2, 3), 2, 4, 10, 0.98).matrices
    b = generate_trace(RngStream(2, 3), 2, 4, 10, 0.98).matrices
    np.testing.assert_array_equal(a, b)

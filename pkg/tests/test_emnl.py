import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import softmax

from src.channel import generate_trace, snr_to_sigma2
from src.constellation import make_qam4
from src.core import RngStream, sample_complex_gaussian
from src.emnl import (
    EmnlSettings,
    GaussianModelParams,
    NoisyDataset,
    coarse_detect,
    e_step,
    gauss_loglik,
    initial_params,
    log_likelihood,
    log_likelihoods,
    m_step,
    md_detect,
    run_emnl,
    theta_step,
)
from src.errors import InvalidArgumentError
from src.estimation import PilotBlock, ls_estimate, make_pilots
from src.impairments import apply_scenario


def additive_frame(seed, snr_db=4.0, nt=2, nr=8, t=500, t_p=4):
    rng = RngStream(seed)
    book = make_qam4(nt)
    sigma2 = snr_to_sigma2(snr_db, nt)
    h = generate_trace(rng.spawn("h"), nt, nr, 1, 1.0).matrices[0]
    x_p = make_pilots(book, nt, t_p)
    h_hat = ls_estimate(PilotBlock(x_p, apply_scenario(rng.spawn("p"), "additive", x_p.T, h, sigma2).T))
    truth = rng.spawn("k").integers(0, book.k, size=t)
    y = apply_scenario(rng.spawn("y"), "additive", book.vectors[truth], h, sigma2)
    return NoisyDataset(coarse_detect(y, h_hat, book), y), h_hat, sigma2, book, truth


def test_coarse_detect_matches_exhaustive_search(rng, book2, channel_2x8):
    y = sample_complex_gaussian(rng, (40, 8), 2.0)
    labels = coarse_detect(y, channel_2x8, book2)
    for n in range(40):
        distances = [np.linalg.norm(y[n] - channel_2x8 @ x) ** 2 for x in book2.vectors]
        assert labels[n] == int(np.argmin(distances))
        assert coarse_detect(y[n], channel_2x8, book2) == labels[n]


def test_coarse_detect_nearest_neighbour():
    book = make_qam4(1)
    assert coarse_detect(book.vectors[2], np.eye(1), book) == 2
    assert coarse_detect(book.vectors[1] + 0.05, np.eye(1), book) == 1


def test_gauss_loglik_examples(rng):
    assert gauss_loglik(np.zeros(1), np.zeros(1), 1 / np.pi, 1) == pytest.approx(0.0, abs=1e-15)
    mu = np.array([1 + 1j, 0.5])
    assert gauss_loglik(mu, mu, 2.0, 2) - gauss_loglik(mu, mu, 4.0, 2) == pytest.approx(2 * np.log(2))
    y = sample_complex_gaussian(rng, 3, 1.0)
    mu = sample_complex_gaussian(rng, 3, 1.0)
    density = np.prod(np.exp(-np.abs(y - mu) ** 2 / 0.7) / (np.pi * 0.7))
    assert np.exp(gauss_loglik(y, mu, 0.7, 3)) == pytest.approx(density, rel=1e-12)
    with pytest.raises(InvalidArgumentError):
        gauss_loglik(y, mu, 0.0, 3)


def test_unlabelled_e_step_is_normalized_likelihood(rng, book2, channel_2x8):
    params = initial_params(channel_2x8, 0.5, book2)
    y = sample_complex_gaussian(rng, (30, 8), 1.0)
    dataset = NoisyDataset(coarse_detect(y, channel_2x8, book2), y)
    expected = softmax(log_likelihoods(y, params.mu, params.nu), axis=1)
    np.testing.assert_allclose(e_step(params, dataset, eps=0.0, use_labels=False), expected, atol=1e-12)
    # An uninformative transition matrix gives the same posterior.
    uniform = GaussianModelParams(params.mu, params.nu, np.full((16, 16), 1 / 16))
    np.testing.assert_allclose(e_step(uniform, dataset, eps=0.0), expected, atol=1e-12)


def test_e_step_follows_transition_column():
    params = GaussianModelParams(np.zeros((2, 1)), np.ones(2), np.array([[0.9, 0.5], [0.1, 0.5]]))
    dataset = NoisyDataset(np.array([0]), np.zeros((1, 1), dtype=np.complex128))
    np.testing.assert_allclose(e_step(params, dataset, eps=0.0), [[0.9, 0.1]])


def test_e_step_floor_keeps_rows_normalized(rng, book2, channel_2x8):
    params = initial_params(channel_2x8, 0.01, book2)
    y = sample_complex_gaussian(rng, (20, 8), 1.0)
    alpha = e_step(params, NoisyDataset(coarse_detect(y, channel_2x8, book2), y), eps=1e-8)
    np.testing.assert_allclose(alpha.sum(axis=1), 1.0, atol=1e-9)
    assert alpha.min() >= 1e-8 / (1 + 16e-8)


def test_m_step_hand_example():
    dataset = NoisyDataset(np.array([0, 0]), np.array([[0.0], [2.0]], dtype=np.complex128))
    mu, nu = m_step(np.array([[1.0, 0.0], [1.0, 0.0]]), dataset)
    assert mu[0, 0] == pytest.approx(1.0)
    assert nu[0] == pytest.approx(1.0)


def test_m_step_uniform_alpha_gives_global_mean(rng):
    y = sample_complex_gaussian(rng, (50, 3), 1.0)
    mu, nu = m_step(np.full((50, 4), 0.25), NoisyDataset(np.zeros(50, dtype=int), y))
    np.testing.assert_allclose(mu, np.broadcast_to(y.mean(axis=0), (4, 3)), atol=1e-12)
    assert np.all(nu > 0)


def test_m_step_low_mass_class_keeps_previous(rng):
    y = sample_complex_gaussian(rng, (10, 2), 1.0)
    previous = GaussianModelParams(np.full((2, 2), 7.0 + 0j), np.array([3.0, 5.0]), np.eye(2))
    alpha = np.column_stack([np.ones(10), np.zeros(10)])
    mu, nu = m_step(alpha, NoisyDataset(np.zeros(10, dtype=int), y), previous=previous)
    np.testing.assert_allclose(mu[0], y.mean(axis=0))
    np.testing.assert_array_equal(mu[1], previous.mu[1])
    assert nu[1] == 5.0


def test_theta_step_examples():
    k = 3
    dataset = NoisyDataset(np.array([1, 1]), np.zeros((2, 1), dtype=np.complex128))
    theta = theta_step(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]), dataset)
    np.testing.assert_allclose(theta[:, 1], [0.5, 0.5, 0.0])
    np.testing.assert_array_equal(theta[:, 0], np.eye(k)[:, 0])
    agreeing = NoisyDataset(np.array([0, 1, 2]), np.zeros((3, 1), dtype=np.complex128))
    np.testing.assert_array_equal(theta_step(np.eye(3), agreeing), np.eye(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=40))
def test_em_step_invariants(seed, t):
    rng = RngStream(seed)
    book = make_qam4(1)
    y = sample_complex_gaussian(rng, (t, 2), 1.0)
    h = sample_complex_gaussian(rng.spawn("h"), (2, 1), 1.0)
    dataset = NoisyDataset(coarse_detect(y, h, book), y)
    params = initial_params(h, 0.3, book)
    alpha = e_step(params, dataset, use_labels=False)
    np.testing.assert_allclose(alpha.sum(axis=1), 1.0, atol=1e-9)
    theta = theta_step(alpha, dataset)
    assert np.all((theta >= 0) & (theta <= 1))
    np.testing.assert_allclose(theta.sum(axis=0), 1.0, atol=1e-9)
    _, nu = m_step(alpha, dataset, previous=params)
    assert np.all(nu > 0)


def test_log_likelihood_is_monotone_over_iterations():
    for seed in range(20):
        dataset, h_hat, sigma2, book, _ = additive_frame(seed)
        history = []
        run_emnl(dataset, h_hat, sigma2, book, iterations=20, history=history)
        assert len(history) == 21
        for before, after in zip(history, history[1:]):
            assert after >= before - 1e-9 * abs(before)


def test_history_matches_final_params():
    dataset, h_hat, sigma2, book, _ = additive_frame(3)
    history = []
    params = run_emnl(dataset, h_hat, sigma2, book, iterations=5, history=history)
    assert history[-1] == pytest.approx(log_likelihood(params, dataset), rel=1e-12)


def test_zero_iterations_reproduce_coarse_detection():
    dataset, h_hat, sigma2, book, _ = additive_frame(4)
    params = run_emnl(dataset, h_hat, sigma2, book, iterations=0)
    np.testing.assert_allclose(params.mu, book.vectors @ h_hat.T)
    np.testing.assert_array_equal(md_detect(dataset.signals, params, book), dataset.labels)


def test_noise_free_fixed_point(book2, channel_2x8):
    truth = np.arange(16).repeat(5)
    y = book2.vectors[truth] @ channel_2x8.T
    dataset = NoisyDataset(truth.copy(), y)
    params = run_emnl(dataset, channel_2x8, 0.1, book2, iterations=5)
    np.testing.assert_allclose(params.mu, book2.vectors @ channel_2x8.T, atol=1e-5)
    np.testing.assert_array_equal(md_detect(y, params, book2), truth)


def test_model_driven_beats_coarse_on_additive_frames():
    coarse_errors = md_errors = 0
    for seed in range(10):
        dataset, h_hat, sigma2, book, truth = additive_frame(seed, snr_db=8.0)
        params = run_emnl(dataset, h_hat, sigma2, book)
        coarse_errors += np.count_nonzero(dataset.labels != truth)
        md_errors += np.count_nonzero(md_detect(dataset.signals, params, book) != truth)
    assert md_errors <= coarse_errors


def test_md_detect_examples(rng, book2):
    mu = sample_complex_gaussian(rng, (16, 4), 1.0)
    params = GaussianModelParams(mu, np.ones(16), np.eye(16))
    assert md_detect(mu[5], params, book2) == 5
    y = sample_complex_gaussian(rng, (30, 4), 3.0)
    brute = [int(np.argmax([gauss_loglik(v, mu[k], 1.0, 4) for k in range(16)])) for v in y]
    np.testing.assert_array_equal(md_detect(y, params, book2), brute)

    book1 = make_qam4(1)
    same_mean = GaussianModelParams(np.zeros((4, 1)), np.array([1.0, 2.0, 4.0, 3.0]), np.eye(4))
    assert md_detect(np.array([10.0 + 0j]), same_mean, book1) == 2


def test_run_emnl_rejects_bad_input(book2, channel_2x8):
    empty = NoisyDataset(np.zeros(0, dtype=int), np.zeros((0, 8), dtype=np.complex128))
    with pytest.raises(InvalidArgumentError):
        run_emnl(empty, channel_2x8, 0.1, book2)
    wrong = NoisyDataset(np.array([16]), np.zeros((1, 8), dtype=np.complex128))
    with pytest.raises(InvalidArgumentError):
        run_emnl(wrong, channel_2x8, 0.1, book2)


@pytest.mark.parametrize("kwargs", [{"iterations": -1}, {"eps": 1.0}, {"eps": -0.1}, {"nu_floor": 0.0}])
def test_settings_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        EmnlSettings(**kwargs)


def test_theta_identity_fallback_is_logged(caplog):
    dataset = NoisyDataset(np.array([1, 1]), np.zeros((2, 1), dtype=np.complex128))
    with caplog.at_level(logging.WARNING, logger="mimo_hwi"):
        theta_step(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]), dataset)
    assert "[0, 2] never observed" in caplog.text
    caplog.clear()
    agreeing = NoisyDataset(np.array([0, 1, 2]), np.zeros((3, 1), dtype=np.complex128))
    with caplog.at_level(logging.WARNING, logger="mimo_hwi"):
        theta_step(np.eye(3), agreeing)
    assert not caplog.records

"""Solver tests: root finder behaviour, statuses, estimator invariants."""

import math

import numpy as np
import pytest

from textemp import (
    LogitSequence,
    SolverConfig,
    SolverStatus,
    TokenSequence,
    estimate_temperature,
    find_root,
    log_likelihood,
)

import oracle

TWO_STEP = (LogitSequence([[3.0, 0.0], [1.0, 0.0]], 2), TokenSequence([0, 1], 2))
TWO_STEP_BETA = 0.45409213128004755  # frozen from the 200-iteration bisection oracle


def test_find_root_linear():
    r = find_root(lambda x: x - 1.0, 0.5, 2.0)
    assert r.converged
    assert r.root == pytest.approx(1.0, rel=1e-9)


def test_find_root_sqrt2():
    r = find_root(lambda x: x * x - 2.0, 1.0, 2.0)
    assert r.root == pytest.approx(math.sqrt(2.0), abs=1e-6)


def test_find_root_on_residual_instance():
    ls, ts = TWO_STEP
    from textemp.estimation import prepare

    prep = prepare(ls, ts)
    r = find_root(prep.residual, 1e-2, 1e4)
    assert abs(r.root - 1 / 2.2) <= 0.002
    assert r.root == pytest.approx(TWO_STEP_BETA, rel=1e-9)


def test_find_root_requires_sign_change():
    with pytest.raises(ValueError):
        find_root(lambda x: x * x + 1.0, -1.0, 1.0)


def test_find_root_exhaustion_flag():
    # sqrt(2) is irrational, so no step ever hits the root exactly
    r = find_root(lambda x: x * x - 2.0, 1.0, 2.0, tol_rel=1e-300, max_iter=5)
    assert not r.converged
    assert r.iterations == 5
    assert 1.0 <= r.root <= 2.0


def test_find_root_endpoint_root():
    r = find_root(lambda x: x, 0.0, 1.0)
    assert r.converged and r.root == 0.0 and r.iterations == 0


def test_estimate_hand_checkable_instance():
    ls, ts = TWO_STEP
    est = estimate_temperature(ls, ts)
    assert est.status == SolverStatus.CONVERGED
    assert abs(est.t_hat - 2.20) <= 0.01
    assert est.t_hat == pytest.approx(1 / TWO_STEP_BETA, rel=1e-9)
    assert est.t_hat == 1.0 / est.beta_hat
    assert abs(est.residual_at_root) < 1e-8
    cfg = SolverConfig()
    assert cfg.beta_lo < est.beta_hat < cfg.beta_hi


def test_estimate_saturates_low_when_argmax_observed():
    # the observed token is the argmax, so E[u] < u_obs for every finite beta
    est = estimate_temperature(LogitSequence([[5.0, 0.0]], 2), TokenSequence([0], 2))
    assert est.status == SolverStatus.SATURATED_LOW_T
    assert est.beta_hat == 1e4
    assert est.t_hat == 1e-4


def test_estimate_saturates_high_when_antimax_observed():
    est = estimate_temperature(LogitSequence([[5.0, 0.0]], 2), TokenSequence([1], 2))
    assert est.status == SolverStatus.SATURATED_HIGH_T
    assert est.beta_hat == 1e-2
    assert est.t_hat == 100.0


def test_estimate_degenerate_rows():
    ls = LogitSequence([[1.0, 1.0], [0.0, 0.0]], 2)
    est = estimate_temperature(ls, TokenSequence([0, 1], 2))
    assert est.status == SolverStatus.DEGENERATE
    assert est.t_hat == 1.0
    assert est.iterations == 0
    assert est.residual_at_root == 0.0


def test_estimate_validates_inputs():
    ls, ts = TWO_STEP
    with pytest.raises(ValueError):
        estimate_temperature(ls, TokenSequence([0], 2))
    with pytest.raises(ValueError):
        SolverConfig(beta_lo=1.0, beta_hi=0.5)
    with pytest.raises(ValueError):
        SolverConfig(tol_beta_rel=0.0)
    with pytest.raises(ValueError):
        estimate_temperature(
            LogitSequence(np.empty((0, 2)), 2), TokenSequence([], 2)
        )


def _converged_instances(n, vocab=24, max_steps=40, seed=10):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        t_true = float(10 ** rng.uniform(math.log10(0.3), math.log10(2.5)))
        steps, tokens = oracle.random_instance(
            rng, vocab=vocab, n_steps=int(rng.integers(5, max_steps)), sample_temperature=t_true
        )
        ls, ts = LogitSequence(steps, vocab), TokenSequence(tokens, vocab)
        est = estimate_temperature(ls, ts)
        if est.status == SolverStatus.CONVERGED:
            out.append((ls, ts, est))
    return out


def test_mle_is_local_maximum():
    for ls, ts, est in _converged_instances(30):
        center = log_likelihood(ls, ts, est.t_hat)
        assert center >= log_likelihood(ls, ts, est.t_hat * (1 + 1e-3))
        assert center >= log_likelihood(ls, ts, est.t_hat * (1 - 1e-3))


def test_root_independent_of_init_and_stepping():
    from textemp.estimation import prepare

    for ls, ts, est in _converged_instances(15, seed=11):
        prep = prepare(ls, ts)
        for x0 in (None, 0.1, 5e3):
            acc = find_root(prep.residual, 1e-2, 1e4, x0=x0, accelerate=True)
            bis = find_root(prep.residual, 1e-2, 1e4, x0=x0, accelerate=False)
            assert acc.root == pytest.approx(est.beta_hat, rel=1e-8)
            assert bis.root == pytest.approx(est.beta_hat, rel=1e-8)


def test_scale_equivariance():
    for ls, ts, est in _converged_instances(10, seed=12):
        for k in (0.5, 2.0, 10.0):
            scaled = estimate_temperature(LogitSequence(ls.steps * k, ls.vocab), ts)
            assert scaled.status == SolverStatus.CONVERGED
            assert scaled.t_hat == pytest.approx(k * est.t_hat, rel=1e-6)


def test_shift_invariance_of_estimate():
    rng = np.random.default_rng(13)
    for ls, ts, est in _converged_instances(10, seed=14):
        shifts = rng.normal(0, 20, size=(len(ts), 1))
        shifted = estimate_temperature(LogitSequence(ls.steps + shifts, ls.vocab), ts)
        assert shifted.t_hat == pytest.approx(est.t_hat, rel=1e-9)


def test_matches_pure_bisection_oracle():
    rng = np.random.default_rng(15)
    for i in range(40):
        vocab = int(rng.integers(2, 64))
        n_steps = int(rng.integers(1, 50))
        t_sample = float(10 ** rng.uniform(-1, 0.6)) if i % 2 else None
        steps, tokens = oracle.random_instance(
            rng, vocab=vocab, n_steps=n_steps, sample_temperature=t_sample
        )
        est = estimate_temperature(LogitSequence(steps, vocab), TokenSequence(tokens, vocab))
        beta_ref, status_ref = oracle.bisect_beta(steps, tokens)
        assert est.status.value == status_ref
        assert est.beta_hat == pytest.approx(beta_ref, rel=1e-6)

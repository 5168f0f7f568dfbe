import math

import numpy as np
import pytest

from ifstbc.channel import (
    RankFailure,
    ReceivedVector,
    db_to_linear,
    effective_channel,
    is_full_column_rank,
    noise_scale,
    received_matrix,
    sample_channel,
    transmit,
)
from ifstbc.numerics import real_expand
from ifstbc.stbc import Constellation, LinearDesign, make_alamouti, make_vblast, normalization_factor, vec_rows

C2 = Constellation(2)
C4 = Constellation(4)


def test_db_to_linear():
    assert db_to_linear(0) == 1
    assert db_to_linear(30) == pytest.approx(1000)


def test_noise_scale():
    assert noise_scale(2.0, 2) == 1.0
    assert noise_scale(math.inf, 2) == 0.0
    with pytest.raises(ValueError):
        noise_scale(0.0, 1)


def test_vblast1_heff_is_scaled_hprime():
    ch = sample_channel(1, 1, make_vblast(1), C2, seed=3)
    np.testing.assert_allclose(ch.heff, normalization_factor(make_vblast(1), C2) * ch.hprime)
    np.testing.assert_array_equal(ch.hprime, real_expand(ch.h))


def test_sample_channel_deterministic():
    a = sample_channel(2, 2, make_alamouti(), C2, seed=9)
    b = sample_channel(2, 2, make_alamouti(), C2, seed=9)
    np.testing.assert_array_equal(a.heff, b.heff)
    assert (a.nr, a.nt, a.T) == (2, 2, 2)


def test_sample_channel_moment():
    h = np.array([sample_channel(1, 1, make_vblast(1), C2, seed=i).h[0, 0] for i in range(10_000)])
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.03)


def test_sample_channel_rank_failure():
    # vblast(2) over a single receive antenna: 4 unknowns, 2 real observations
    with pytest.raises(RankFailure):
        sample_channel(1, 2, make_vblast(2), C2, seed=0)


def test_sample_channel_argument_checks():
    with pytest.raises(ValueError):
        sample_channel(0, 2, make_alamouti(), C2)
    with pytest.raises(ValueError):
        sample_channel(1, 3, make_alamouti(), C2)


def test_is_full_column_rank():
    assert is_full_column_rank(np.eye(3))
    assert not is_full_column_rank(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert not is_full_column_rank(np.ones((1, 2)))


def test_effective_channel_batched(rng):
    d = make_alamouti()
    h = rng.standard_normal((5, 2, 2)) + 1j * rng.standard_normal((5, 2, 2))
    stacked = effective_channel(h, d, C4)
    for i in range(5):
        np.testing.assert_allclose(stacked[i], effective_channel(h[i], d, C4))


@pytest.mark.parametrize("design, nr", [(make_alamouti(), 1), (make_alamouti(), 2), (make_vblast(2), 2), (make_vblast(3), 3)])
def test_complex_and_real_models_agree(rng, design, nr):
    """The noiseless real observation is the row-stacked H X(s)."""
    for m in (2, 4):
        c = Constellation(m)
        for seed in range(10):
            ch = sample_channel(nr, design.nt, design, c, seed=seed)
            s = rng.integers(0, m, design.n_real)
            gamma = normalization_factor(design, c)
            x = gamma * design.codeword(s - c.offset)
            rx = transmit(ch, s, c, math.inf)
            np.testing.assert_allclose(rx.y, vec_rows(ch.h @ x), atol=1e-10)


def test_transmit_noiseless():
    ch = sample_channel(2, 2, make_alamouti(), C4, seed=1)
    s = np.array([0, 1, 2, 3])
    rx = transmit(ch, s, C4, math.inf)
    assert rx.noise_scale == 0
    np.testing.assert_array_equal(rx.y, ch.heff @ (s - 1.5))


def test_transmit_noise_variance():
    ch = sample_channel(1, 1, make_vblast(1), C2, seed=2)
    s = np.array([0, 1])
    clean = ch.heff @ (s - C2.offset)
    # P = nt gives noise variance 1/2 per real component
    resid = np.array([transmit(ch, s, C2, 1.0, seed=k).y - clean for k in range(50_000)])
    assert np.var(resid) == pytest.approx(0.5, rel=0.02)


def test_transmit_checks_symbols():
    ch = sample_channel(1, 1, make_vblast(1), C2, seed=2)
    with pytest.raises(ValueError):
        transmit(ch, [0, 2], C2, 10.0)


def test_received_matrix_unscales(rng):
    d = make_alamouti()
    ch = sample_channel(2, 2, d, C2, seed=5)
    s = np.array([1, 0, 1, 1])
    P = 100.0
    rx = transmit(ch, s, C2, P, seed=6)
    y = received_matrix(rx, 2, 2)
    x = normalization_factor(d, C2) * d.codeword(s - C2.offset)
    noise = y - math.sqrt(P / 2) * ch.h @ x
    # what remains is unit-scale noise
    assert np.max(np.abs(noise)) < 6
    with pytest.raises(ValueError):
        received_matrix(ReceivedVector(np.zeros(8), math.inf, 0.0), 2, 2)

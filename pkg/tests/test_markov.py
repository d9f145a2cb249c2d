import numpy as np
import pytest

from topoformer.errors import ParameterError
from topoformer.expressiveness import (
    distinguish_by_cycles,
    rrwp,
    rrwp_convergence_report,
    stationary,
)
from topoformer.graphs import Graph, generate_csl

C3 = Graph(3, ((0, 1), (1, 2), (0, 2)))
C4 = Graph(4, ((0, 1), (1, 2), (2, 3), (0, 3)))
P3 = Graph(3, ((0, 1), (1, 2)))


def test_rrwp_k1_identity():
    enc = rrwp(C3, 1)
    assert enc.tensor.shape == (3, 3, 1)
    assert np.array_equal(enc.tensor[:, :, 0], np.eye(3))


def test_rrwp_p3_hand_computed():
    enc = rrwp(P3, 2)
    expected = np.array([[0, 1, 0], [0.5, 0, 0.5], [0, 1, 0]])
    assert np.allclose(enc.tensor[:, :, 1], expected)


def test_rrwp_slices_row_stochastic():
    enc = rrwp(generate_csl(17, 3), 12)
    sums = enc.tensor.sum(axis=1)
    assert np.allclose(sums, 1.0, atol=1e-9)


def test_rrwp_power_consistency():
    enc = rrwp(generate_csl(13, 2), 8)
    m = enc.tensor[:, :, 1]
    for l in range(7):
        assert np.allclose(enc.tensor[:, :, l] @ m, enc.tensor[:, :, l + 1], atol=1e-12)


def test_rrwp_rejects_isolated_nodes():
    with pytest.raises(ParameterError):
        rrwp(Graph(3, ((0, 1),)), 2)
    with pytest.raises(ParameterError):
        rrwp(C3, 0)


def test_stationary_regular_uniform():
    for g, n in ((C3, 3), (generate_csl(41, 5), 41)):
        pi = stationary(g).pi
        assert np.abs(pi - 1.0 / n).max() < 1e-12


def test_stationary_path():
    assert np.allclose(stationary(P3).pi, [0.25, 0.5, 0.25])


def test_convergence_c3_rate_half():
    report = rrwp_convergence_report(C3, 30)
    assert report.deviations[-1] < 1e-8
    assert abs(report.fitted_rate - 0.5) < 1e-6
    # strictly decaying envelope
    assert report.fitted_rate < 1.0


def test_convergence_csl_decays_geometrically():
    report = rrwp_convergence_report(generate_csl(41, 2), 50)
    assert report.fitted_rate < 1.0
    assert report.deviations[-1] < report.deviations[0]
    # the envelope dominates the measurements by construction
    for l, d in enumerate(report.deviations):
        assert d <= report.envelope_constant * report.fitted_rate**l * (1 + 1e-9)


def test_convergence_rejects_bipartite():
    with pytest.raises(ParameterError):
        rrwp_convergence_report(C4, 10)


def test_convergence_rejects_disconnected():
    two = Graph(6, ((0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)))
    with pytest.raises(ParameterError):
        rrwp_convergence_report(two, 10)


def test_stationary_same_but_cycles_differ_across_csl_classes():
    """Equal-size CSL classes share the stationary distribution even though
    their cycle structure separates them."""
    g, h = generate_csl(41, 2), generate_csl(41, 3)
    assert np.array_equal(stationary(g).pi, stationary(h).pi)
    assert distinguish_by_cycles(g, h, max_len=8).distinguished

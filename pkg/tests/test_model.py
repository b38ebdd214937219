"""Single-queue primitives: laws, costs, validation, drift certificate."""

import math

import numpy as np
import pytest

from psindex import (Pmf, ServerParams, SystemConfig, departure_pmf,
                     lyapunov_certificate, lyapunov_margin, next_state_pmf,
                     stage_cost, transition_row, validate_config)

from conftest import enum_next_state, pmf_to_dict


# ---------------------------------------------------------------- #
# departure law                                                    #
# ---------------------------------------------------------------- #


def test_departure_pmf_two_jobs_frozen():
    # Binomial(2, 0.25): each of two jobs finishes w.p. q/x = 0.25.
    got = pmf_to_dict(departure_pmf(2, 0.5))
    assert got == pytest.approx({0: 0.5625, 1: 0.375, 2: 0.0625}, abs=1e-15)


def test_departure_pmf_empty_server_is_point_mass():
    got = pmf_to_dict(departure_pmf(0, 0.7))
    assert got == {0: 1.0}


@pytest.mark.parametrize("q", [0.05, 0.3, 0.5, 0.55, 0.95])
def test_departure_mean_is_q_for_any_backlog(q):
    """E[D] = x * (q/x) = q regardless of how jobs share the server."""
    for x in range(1, 201):
        assert abs(departure_pmf(x, q).mean() - q) <= 1e-12


def test_departure_pmf_rejects_bad_arguments():
    with pytest.raises(ValueError):
        departure_pmf(-1, 0.5)
    with pytest.raises(ValueError):
        departure_pmf(3, 0.0)
    with pytest.raises(ValueError):
        departure_pmf(3, 1.0)


# ---------------------------------------------------------------- #
# one-slot transition law                                          #
# ---------------------------------------------------------------- #


def test_next_state_pmf_active_frozen():
    got = pmf_to_dict(next_state_pmf(1, 0.5, 0.4, True, buffer=10))
    assert got == pytest.approx({0: 0.3, 1: 0.5, 2: 0.2}, abs=1e-15)


def test_next_state_pmf_empty_active_frozen():
    got = pmf_to_dict(next_state_pmf(0, 0.5, 0.4, True, buffer=10))
    assert got == pytest.approx({0: 0.6, 1: 0.4}, abs=1e-15)


def test_next_state_pmf_passive_admits_nothing():
    got = pmf_to_dict(next_state_pmf(0, 0.5, 0.4, False, buffer=10))
    assert got == {0: 1.0}
    dep = pmf_to_dict(departure_pmf(3, 0.5))
    passive = pmf_to_dict(next_state_pmf(3, 0.5, 0.4, False, buffer=10))
    assert passive == pytest.approx({3 - d: w for d, w in dep.items()})


@pytest.mark.parametrize("active", [True, False])
@pytest.mark.parametrize("x,q,p,buffer", [
    (0, 0.5, 0.4, 3), (1, 0.5, 0.4, 3), (3, 0.5, 0.4, 3),
    (5, 0.55, 0.4, 5), (7, 0.95, 0.1, 12), (12, 0.2, 0.15, 12),
])
def test_next_state_pmf_matches_enumeration(x, q, p, buffer, active):
    got = pmf_to_dict(next_state_pmf(x, q, p, active, buffer))
    want = enum_next_state(x, q, p, active, buffer)
    assert set(got) == set(want)
    for s in want:
        assert got[s] == pytest.approx(want[s], abs=1e-14)


def test_next_state_pmf_clamps_at_buffer():
    got = pmf_to_dict(next_state_pmf(4, 0.5, 0.4, True, buffer=4))
    assert max(got) == 4
    # The clamped arrival folds into staying at the buffer.
    stay = sum(w for d, w in pmf_to_dict(departure_pmf(4, 0.5)).items()
               if d == 0)
    assert got[4] == pytest.approx(stay * 0.6 + stay * 0.4
                                   + pmf_to_dict(departure_pmf(4, 0.5))[1]
                                   * 0.4, abs=1e-14)


def test_active_law_is_passive_convolved_with_arrival():
    buffer = 40
    for x in range(0, 31):
        passive = next_state_pmf(x, 0.55, 0.4, False, buffer).dense(buffer + 1)
        active = next_state_pmf(x, 0.55, 0.4, True, buffer).dense(buffer + 1)
        conv = 0.6 * passive + 0.4 * np.roll(passive, 1)
        conv[0] = 0.6 * passive[0]
        assert np.allclose(active, conv, atol=1e-14)


def test_next_state_pmf_rejects_state_outside_buffer():
    with pytest.raises(ValueError):
        next_state_pmf(5, 0.5, 0.4, True, buffer=4)
    with pytest.raises(ValueError):
        next_state_pmf(1, 0.5, 0.4, True, buffer=0)


def test_transition_row_is_dense_and_stochastic():
    row = transition_row(3, 0.5, 0.4, True, 10)
    assert row.shape == (11,)
    assert row.sum() == pytest.approx(1.0, abs=1e-12)
    sparse = pmf_to_dict(next_state_pmf(3, 0.5, 0.4, True, 10))
    for s, w in sparse.items():
        assert row[s] == pytest.approx(w, abs=1e-15)


# ---------------------------------------------------------------- #
# stage cost                                                       #
# ---------------------------------------------------------------- #


def test_stage_cost_frozen_values():
    assert stage_cost(3, False, 2.0, 30.0) == 92.0
    assert stage_cost(1, False, -5.0, 1.0) == -4.0
    assert stage_cost(3, True, 2.0, 30.0) == 90.0
    assert stage_cost(0, True, 7.0, 5.0) == 0.0


# ---------------------------------------------------------------- #
# Pmf container                                                    #
# ---------------------------------------------------------------- #


def test_pmf_validates_support_and_mass():
    with pytest.raises(ValueError):
        Pmf([1, 0], [0.5, 0.5])
    with pytest.raises(ValueError):
        Pmf([0, 0], [0.5, 0.5])
    with pytest.raises(ValueError):
        Pmf([0, 1], [-0.1, 1.1])
    with pytest.raises(ValueError):
        Pmf([0, 1], [0.5, 0.4])
    with pytest.raises(ValueError):
        Pmf([], [])


def test_pmf_renormalises_float_roundoff_only():
    eps = 1e-13
    pm = Pmf([0, 1], [0.5, 0.5 + eps])
    assert pm.probs.sum() == pytest.approx(1.0, abs=1e-16)
    assert pm.mean() == pytest.approx(0.5, abs=1e-12)


def test_pmf_dense_and_dict():
    pm = Pmf([1, 3], [0.25, 0.75])
    assert pm.as_dict() == {1: 0.25, 3: 0.75}
    assert np.array_equal(pm.dense(5), [0.0, 0.25, 0.0, 0.75, 0.0])
    with pytest.raises(ValueError):
        pm.dense(3)


def test_pmf_arrays_are_read_only():
    pm = Pmf([0, 1], [0.5, 0.5])
    with pytest.raises(ValueError):
        pm.probs[0] = 1.0


# ---------------------------------------------------------------- #
# configuration validation                                         #
# ---------------------------------------------------------------- #


def _cfg(**kw):
    base = dict(arrival_p=0.4,
                servers=(ServerParams(q=0.55, cost_c=30.0),
                         ServerParams(q=0.5, cost_c=29.0)),
                buffer=100)
    base.update(kw)
    return SystemConfig(**base)


def test_validate_config_accepts_reference_setup():
    assert validate_config(_cfg()).ok


def test_validate_config_flags_each_violation():
    report = validate_config(_cfg(arrival_p=1.5,
                                  servers=(ServerParams(q=0.0, cost_c=-1.0),),
                                  buffer=0))
    text = "\n".join(report.violations)
    assert not report.ok
    assert "arrival_p outside (0,1)" in text
    assert "servers[0].q=0 outside (0,1)" in text
    assert "servers[0].cost_c=-1 not > 0" in text
    assert "buffer=0 not >= 1" in text


def test_validate_config_strict_mode_extras():
    lax = _cfg(servers=(ServerParams(q=0.5, cost_c=2.0),
                        ServerParams(q=0.5, cost_c=1.0)))
    assert validate_config(lax).ok
    strict = _cfg(servers=(ServerParams(q=0.5, cost_c=2.0),
                           ServerParams(q=0.5, cost_c=1.0)),
                  strict_stability_mode=True)
    text = "\n".join(validate_config(strict).violations)
    assert "q values not strictly decreasing" in text
    assert "q_min=0.5 <= 2p=0.8" in text


# ---------------------------------------------------------------- #
# drift certificate                                                #
# ---------------------------------------------------------------- #


def test_lyapunov_margin_frozen_values():
    assert lyapunov_margin(0.1, 0.45, 0.5) == pytest.approx(0.0236584,
                                                            abs=1e-6)
    # At a = 1.0 the arrival side dominates and the margin goes negative.
    assert 0.1 * (math.e - 1.0) == pytest.approx(0.171828, abs=1e-6)
    assert 0.5 * 0.45 * (1.0 - math.exp(-1.0)) == pytest.approx(0.142227,
                                                                abs=1e-6)
    assert lyapunov_margin(0.1, 0.45, 1.0) < 0.0


def test_lyapunov_certificate_maximises_the_margin():
    cert = lyapunov_certificate(0.1, 0.45)
    assert cert is not None
    assert cert.b > 0.0
    assert cert.b == pytest.approx(lyapunov_margin(0.1, 0.45, cert.a),
                                   abs=1e-15)
    for a in np.linspace(0.01, 5.0, 200):
        assert lyapunov_margin(0.1, 0.45, float(a)) <= cert.b + 1e-9


def test_lyapunov_certificate_requires_q_min_above_2p():
    assert lyapunov_certificate(0.4, 0.55) is None
    assert lyapunov_certificate(0.25, 0.5) is None
    with pytest.raises(ValueError):
        lyapunov_certificate(0.0, 0.5)

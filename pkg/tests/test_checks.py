"""Property-suite wrappers: each certifier passes on a reference setup."""

import pytest

from psindex import ServerParams, SystemConfig
from psindex import checks

CFG = SystemConfig(arrival_p=0.4,
                   servers=(ServerParams(q=0.55, cost_c=30.0),
                            ServerParams(q=0.50, cost_c=29.0)),
                   buffer=10)


def test_departure_law_check():
    res = checks.check_departure_law()
    assert res.passed
    assert res.detail


def test_active_law_convolution_check():
    assert checks.check_active_law_is_convolution().passed


def test_passive_shift_monotone_check():
    assert checks.check_passive_shift_monotone().passed


def test_departure_counts_are_not_stochastically_ordered():
    """Sanity guard for the corrected property: the raw departure
    counts share the mean q across x, so neither CDF direction can
    hold pointwise and the ordering only exists for x - D."""
    import numpy as np
    from psindex import departure_pmf
    cdf1 = np.cumsum(departure_pmf(1, 0.5).dense(3))
    cdf2 = np.cumsum(departure_pmf(2, 0.5).dense(3))
    assert cdf2[0] > cdf1[0]
    assert cdf2[1] < cdf1[1]


def test_stationary_mass_monotone_check():
    res = checks.check_stationary_mass_monotone(k_max=15)
    assert res.passed


def test_chain_dominance_check():
    assert checks.check_chain_dominance(k_max=15).passed


def test_threshold_cost_curve_check():
    res = checks.check_threshold_cost_curve(CFG, k_max=40)
    assert res.passed


def test_value_solver_consistency_check():
    assert checks.check_value_solver_consistency(CFG).passed


def test_single_queue_structure_check():
    res = checks.check_single_queue_structure(CFG, n=60, lam_step=2.0)
    assert res.passed


def test_index_agreement_check():
    res = checks.check_index_agreement(CFG, x_max=6)
    assert res.passed


def test_run_property_suite_names_are_unique():
    small = SystemConfig(arrival_p=0.4,
                         servers=(ServerParams(q=0.55, cost_c=30.0),),
                         buffer=5)
    results = checks.run_property_suite(small)
    names = [r.name for r in results]
    assert len(names) == len(set(names))
    failed = [r.name for r in results if not r.passed]
    assert failed == []

"""Acceptance criteria 1-12, each at its stated tolerance and time limit.

Every check prints one PASS/FAIL line; the lines are repeated in the
terminal summary.
"""
import pytest

from nlbench import acceptance

RESULTS = []


def check(result):
    RESULTS.append(result.line())
    print(result.line())
    assert result.passed, result.detail


def test_criterion_01_discriminant():
    check(acceptance.discriminant_criterion())


def test_criterion_02_signature():
    check(acceptance.signature_criterion())


def test_criterion_03_norm_dictionary():
    check(acceptance.norm_dictionary_criterion(seed=0))


def test_criterion_04_siegel_identities():
    check(acceptance.siegel_criterion(seed=0))


def test_criterion_05_theta():
    check(acceptance.theta_criterion())


def test_criterion_06_siegel_weil():
    check(acceptance.sw_identity_criterion())


def test_criterion_07_intertwining():
    check(acceptance.intertwining_criterion())


def test_criterion_08_whittaker():
    check(acceptance.whittaker_criterion())


def test_criterion_09_zeta():
    check(acceptance.zeta_criterion())


def test_criterion_10_star_range():
    check(acceptance.star_criterion())


def test_criterion_11_orbit_evidence():
    check(acceptance.orbit_criterion())


def test_criterion_12_probe_support():
    check(acceptance.support_criterion())

"""Empirical calibration of the two big-O constants on the finite corpus."""

from corpus import SIGMA, calibrated_c_net, calibrated_constant_c, net_first_draw_rate, oracle_success_rate


def test_default_oracle_constant_suffices_and_calibrates_lower(record_property):
    assert oracle_success_rate(1.0) >= 1 - SIGMA
    c = calibrated_constant_c()
    record_property("constant_c", c)
    print(f"calibrated constant_c = {c:g}")
    assert c is not None and c <= 1.0
    assert oracle_success_rate(c) >= 1 - SIGMA
    assert oracle_success_rate(c / 2) < 1 - SIGMA


def test_net_constant_calibration(record_property):
    assert net_first_draw_rate(4.0) >= 1 - SIGMA
    c = calibrated_c_net()
    record_property("c_net", c)
    print(f"calibrated c_net = {c:g}")
    assert c is not None and c <= 4.0
    assert net_first_draw_rate(c / 2) < 1 - SIGMA

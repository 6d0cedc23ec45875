import json
import math
from fractions import Fraction

import numpy as np
import pytest

from diqkd_bounds.peres import (
    A_SQUARED,
    LAMBDAS,
    _rate_blockwise,
    alice_rate,
    alice_vectors,
    bob_rate,
    build_vb_measurements,
    build_vb_state,
    evidence_report,
    one_way_rate,
    ppt_check,
)
from diqkd_bounds.qip import Ket, Operator, Povm, partial_trace

# values of the full pipeline, cross-checked against the blockwise path
ALICE_RATE = -0.0890776861039
BOB_RATES = (-0.323160404188, -0.00519495805991)


@pytest.fixture(scope="module")
def state():
    return build_vb_state()


@pytest.fixture(scope="module")
def report():
    return evidence_report()


class TestState:
    def test_lambdas_sum_exactly(self):
        assert sum(LAMBDAS) == 1
        assert all(isinstance(lam, Fraction) for lam in LAMBDAS)

    def test_psi2_norm_in_rationals(self):
        assert 2 * A_SQUARED / 144 + Fraction(1, 3600) + Fraction(9, 100) == 1

    def test_orthonormal(self, state):
        gram = np.array([[np.vdot(u.vec, v.vec) for v in state.psis] for u in state.psis])
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-12)

    def test_density_and_rank(self, state):
        assert state.rho.is_density()
        w = np.linalg.eigvalsh(state.rho.mat)
        assert int((w > 1e-12).sum()) == 4
        np.testing.assert_allclose(np.sort(w)[-4:], sorted(float(x) for x in LAMBDAS),
                                   atol=1e-12)

    def test_purification(self, state):
        psi = state.purification()
        assert psi.dims == (3, 3, 4)
        back = partial_trace(psi.density(), [0, 1])
        np.testing.assert_allclose(back.mat, state.rho.mat, atol=1e-14)


class TestPPT:
    def test_vb_state(self, state):
        assert ppt_check(state.rho) >= -1e-10
        assert ppt_check(state.rho, 0) >= -1e-10

    def test_bell_state(self):
        phi = Ket(np.array([1, 0, 0, 1]) / math.sqrt(2), [2, 2]).density()
        assert ppt_check(phi) == pytest.approx(-0.5, abs=1e-12)

    def test_maximally_mixed(self):
        assert ppt_check(Operator(np.eye(9) / 9, [3, 3])) == pytest.approx(1 / 9)


class TestMeasurements:
    @pytest.mark.parametrize("q", [Fraction(0), Fraction(1, 5), Fraction(1, 2)])
    def test_completeness(self, q):
        m = build_vb_measurements(q)
        assert [p.n_outcomes for p in m.alice] == [2, 2, 2]
        assert [p.n_outcomes for p in m.bob] == [3, 2]
        for povm in m.alice + m.bob:
            np.testing.assert_allclose(sum(povm.elements), np.eye(3), atol=1e-12)
            for e in povm.elements:
                assert np.linalg.eigvalsh(e)[0] >= -1e-12

    def test_alice_vectors_normalized(self):
        for v in alice_vectors():
            assert np.linalg.norm(v) == pytest.approx(1.0)

    def test_q_range(self):
        with pytest.raises(ValueError):
            alice_vectors(Fraction(3, 5))

    def test_bob_second_outcome_probability(self, state):
        m = build_vb_measurements()
        rho_b = partial_trace(state.rho, [1]).mat
        p0 = np.trace(np.kron(np.eye(3), m.bob[1][0]) @ state.rho.mat).real
        assert p0 == pytest.approx(rho_b[2, 2].real, abs=1e-14)


class TestRates:
    def test_alice(self, report):
        np.testing.assert_allclose(report.alice_rates, [ALICE_RATE] * 3, atol=1e-10)
        assert report.max_alice <= 1e-9

    def test_bob(self, report):
        np.testing.assert_allclose(report.bob_rates, BOB_RATES, atol=1e-10)
        assert report.max_bob <= 1e-9

    def test_paths_agree(self, report):
        assert report.path_discrepancy <= 1e-10

    def test_single_rate_functions(self, report):
        assert alice_rate(1) == pytest.approx(report.alice_rates[1], abs=1e-14)
        assert bob_rate(0) == pytest.approx(report.bob_rates[0], abs=1e-14)

    def test_one_way_rate_matches(self, state):
        m = build_vb_measurements()
        # purify() picks its own Eve basis; the rate is basis independent
        assert one_way_rate(state.rho, m.alice[0], 0) == pytest.approx(ALICE_RATE, abs=1e-10)
        assert one_way_rate(state.rho, m.bob[1], 1) == pytest.approx(BOB_RATES[1], abs=1e-10)

    def test_distillable_sanity(self):
        psi = Ket(sum(np.kron(np.eye(3)[i], np.eye(3)[i]) for i in range(3)) / math.sqrt(3),
                  [3, 3])
        rate = one_way_rate(psi.density(), Povm.computational(3), 0)
        assert rate == pytest.approx(math.log2(3), abs=1e-10)
        blockwise = _rate_blockwise(Ket(psi.vec, [3, 3, 1]),
                                    Povm.computational(3), 0)
        assert blockwise == pytest.approx(math.log2(3), abs=1e-10)

    def test_bipartite_required(self):
        with pytest.raises(ValueError):
            one_way_rate(Operator(np.eye(8) / 8, [2, 2, 2]), Povm.computational(2), 0)

    def test_other_q_still_reports(self):
        r = evidence_report(Fraction(3, 10))
        assert r.q == "3/10"
        np.testing.assert_allclose(r.alice_rates, [-0.157901009641] * 3, atol=1e-10)


class TestReport:
    def test_no_key(self, report, state):
        assert report.no_key()
        assert report.ppt_min_eig == ppt_check(state.rho)

    def test_maxima(self, report):
        assert report.max_alice == max(report.alice_rates)
        assert report.max_bob == max(report.bob_rates)

    def test_deterministic(self, report):
        again = evidence_report()
        assert again.to_json() == report.to_json()
        assert again.to_csv() == report.to_csv()
        assert again.to_text() == report.to_text()

    def test_formats_agree(self, report):
        d = json.loads(report.to_json())
        assert d["max_bob"] == report.max_bob
        csv_rows = report.to_csv().splitlines()
        assert csv_rows[0] == "quantity,input,value,check"
        assert f"bob_rate,1,{report.bob_rates[1]:.12g}" in report.to_csv()
        assert f"{report.bob_rates[1]:.12g}" in report.to_text()

// SPDX-License-Identifier: Apache-2.0
//
// csfb - compressive-sensing differential channel feedback simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "csfb/feedback.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace csfb;

namespace {

ChannelParams fig_params() {
    return ChannelParams::make(200, 0.1, 0.05, 10.0, 1e-3, 1.0);
}

// Sparser, slower channel that SP recovers exactly at modest M.
ChannelParams easy_params() {
    return ChannelParams::make(100, 0.05, 0.02, 10.0, 1e-3, 1.0);
}

std::vector<ChannelState> states(const ChannelParams& p, std::uint64_t seed, std::size_t slots) {
    RngStream rng(seed, 1);
    std::vector<ChannelState> out{init_state(p, rng)};
    for (std::size_t t = 1; t < slots; ++t)
        out.push_back(step(out.back(), p, RngStream(seed, 100 + t)));
    return out;
}

std::vector<ComplexVector> cirs(const ChannelParams& p, std::uint64_t seed, std::size_t slots) {
    std::vector<ComplexVector> out;
    for (const auto& s : states(p, seed, slots))
        out.push_back(cir(s));
    return out;
}

double nmse_of(const ComplexVector& h, const ComplexVector& h_hat) {
    return (h_hat - h).squaredNorm() / h.squaredNorm();
}

FeedbackConfig differential_config(double eta_init, double eta_diff, std::size_t p) {
    FeedbackConfig c;
    c.scheme = Scheme::differential;
    c.eta_init = eta_init;
    c.eta_diff = eta_diff;
    c.period_p = p;
    return c;
}

RngStream noise(std::size_t slot) {
    return RngStream(555, slot);
}

} // namespace

TEST_SUITE("feedback") {

TEST_CASE("differential") {
    RngStream rng(1, 1);
    const ComplexVector h = sample_complex_gaussian(rng, 6, 1.0);
    CHECK(differential(h, h) == ComplexVector::Zero(6));
    CHECK(differential(h, ComplexVector::Zero(6)) == h);
    CHECK_THROWS_AS(differential(h, ComplexVector::Zero(5)), DimensionError);
}

TEST_CASE("differential decomposes into drift and turnover") {
    const ChannelParams p = fig_params();
    const auto seq = states(p, 7, 50);
    for (std::size_t t = 1; t < seq.size(); ++t) {
        const ChannelState& prev = seq[t - 1];
        const ChannelState& curr = seq[t];
        const ComplexVector dh = differential(cir(curr), cir(prev));
        for (Eigen::Index l = 0; l < dh.size(); ++l) {
            const auto i = static_cast<std::size_t>(l);
            const double pc = curr.support[i];
            const double pp = prev.support[i];
            const cdouble expect = pc * (curr.amplitude[l] - prev.amplitude[l]) + (pc - pp) * prev.amplitude[l];
            REQUIRE(std::abs(dh[l] - expect) <= 1e-12);
        }
    }
}

TEST_CASE("is_init_slot") {
    CHECK(is_init_slot(1, 3));
    CHECK(!is_init_slot(2, 3));
    CHECK(!is_init_slot(3, 3));
    CHECK(is_init_slot(4, 3));
    CHECK(is_init_slot(7, 3));
    for (std::size_t t = 1; t < 10; ++t)
        CHECK(is_init_slot(t, 1));
    CHECK_THROWS(is_init_slot(0, 3));
    CHECK_THROWS(is_init_slot(1, 0));
}

TEST_CASE("average ratio and config validation") {
    CHECK(differential_config(0.45, 0.15, 3).average_ratio() == doctest::Approx(0.25));
    CHECK(differential_config(0.65, 0.35, 3).average_ratio() == doctest::Approx(0.45));
    CHECK(differential_config(0.45, 0.15, 1).average_ratio() == 0.45);
    FeedbackConfig direct;
    direct.scheme = Scheme::direct;
    direct.eta_init = 0.45;
    direct.eta_diff = 0.9;
    direct.period_p = 5;
    CHECK(direct.effective_period() == 1);
    CHECK(direct.average_ratio() == 0.45);

    CHECK_THROWS_AS(differential_config(1.0, 0.15, 3).validate(), ConfigError);
    CHECK_THROWS_AS(differential_config(0.45, 0.0, 3).validate(), ConfigError);
    CHECK_THROWS_AS(differential_config(0.45, 0.15, 0).validate(), ConfigError);
    FeedbackConfig bad_snr = differential_config(0.45, 0.15, 3);
    bad_snr.snr_db = std::nan("");
    CHECK_THROWS_AS(bad_snr.validate(), ConfigError);
}

TEST_CASE("resources pick one matrix per ratio") {
    const ChannelParams p = fig_params();
    const FeedbackConfig c = differential_config(0.45, 0.15, 3);
    const FeedbackResources r = FeedbackResources::make(c, p, 9);
    CHECK(r.init_matrix.m == 90);
    REQUIRE(r.diff_matrix.has_value());
    CHECK(r.diff_matrix->m == 30);
    CHECK(&r.matrix_for(true) == &r.init_matrix);
    CHECK(&r.matrix_for(false) == &*r.diff_matrix);
    CHECK(r.init_signal_energy == expected_cir_energy(p));
    CHECK(r.diff_signal_energy == expected_differential_energy(p));

    FeedbackConfig direct = c;
    direct.scheme = Scheme::direct;
    const FeedbackResources d = FeedbackResources::make(direct, p, 9);
    CHECK(!d.diff_matrix.has_value());
    CHECK(d.init_matrix.matrix == r.init_matrix.matrix);

    const ChannelParams frozen = ChannelParams::make(200, 0.1, 0.0, 0.0, 1e-3, 1.0);
    FeedbackConfig noisy = c;
    noisy.snr_db = 10.0;
    CHECK_THROWS_AS(FeedbackResources::make(noisy, frozen, 9), ConfigError);
    CHECK_NOTHROW(FeedbackResources::make(c, frozen, 9));
}

TEST_CASE("user_encode shapes and flags") {
    const ChannelParams p = fig_params();
    const FeedbackConfig c = differential_config(0.45, 0.15, 3);
    const FeedbackResources r = FeedbackResources::make(c, p, 3);
    const auto h = cirs(p, 3, 2);

    UserState u = UserState::fresh(200);
    RngStream n1 = noise(1);
    const EncodedSlot first = user_encode(h[0], u, c, r, 4, n1);
    CHECK(first.measurement.y.size() == 90);
    CHECK(first.measurement.is_init_slot);
    CHECK(first.measurement.slot_index == 1);
    CHECK(first.measurement.antenna_index == 4);
    CHECK(first.target == h[0]);

    u.slot_index = 2;
    u.reference = h[0];
    RngStream n2 = noise(2);
    const EncodedSlot same = user_encode(h[0], u, c, r, 4, n2);
    CHECK(same.measurement.y.size() == 30);
    CHECK(!same.measurement.is_init_slot);
    CHECK(same.measurement.y == ComplexVector::Zero(30));

    FeedbackConfig direct = c;
    direct.scheme = Scheme::direct;
    for (std::size_t t = 1; t <= 4; ++t) {
        u.slot_index = t;
        RngStream nt = noise(t);
        const EncodedSlot e = user_encode(h[1], u, direct, r, 0, nt);
        CHECK(e.measurement.y.size() == 90);
        CHECK(e.measurement.is_init_slot);
    }
}

TEST_CASE("user_encode noise follows the slot type energy") {
    const ChannelParams p = fig_params();
    FeedbackConfig c = differential_config(0.45, 0.15, 3);
    c.snr_db = 10.0;
    const FeedbackResources r = FeedbackResources::make(c, p, 3);
    const auto h = cirs(p, 3, 2);
    UserState u = UserState::fresh(200);
    RngStream n1 = noise(1);
    const EncodedSlot init = user_encode(h[0], u, c, r, 0, n1);
    CHECK(init.sigma_n * init.sigma_n == doctest::Approx(expected_cir_energy(p) / 90.0 / 10.0));
    u.slot_index = 2;
    u.reference = h[0];
    RngStream n2 = noise(2);
    const EncodedSlot diff = user_encode(h[1], u, c, r, 0, n2);
    CHECK(diff.sigma_n * diff.sigma_n == doctest::Approx(expected_differential_energy(p) / 30.0 / 10.0));
}

TEST_CASE("bs_decode noiseless init slot recovers the CIR") {
    const ChannelParams p = fig_params();
    const FeedbackConfig c = differential_config(0.45, 0.15, 3);
    const FeedbackResources r = FeedbackResources::make(c, p, 11);
    const auto h = cirs(p, 11, 1);
    const ComplexVector sparse = h[0];
    UserState u = UserState::fresh(200);
    RngStream n = noise(1);
    const EncodedSlot e = user_encode(sparse, u, c, r, 0, n);
    const SchemeState bs = SchemeState::fresh(200);
    const SparsityBudget k = resolve_budget(c, r, true, &e.target, nullptr);
    REQUIRE(4 * k.k <= 90);
    const DecodedSlot d = bs_decode(e.measurement, bs, c, r, k);
    CHECK(nmse_of(sparse, d.h_hat) <= 1e-12);
    CHECK(d.next.slot_index == 2);
    CHECK(d.next.h_hat_prev == d.h_hat);
}

TEST_CASE("bs_decode keeps the reconstruction on a zero differential") {
    const ChannelParams p = fig_params();
    const FeedbackConfig c = differential_config(0.45, 0.15, 3);
    const FeedbackResources r = FeedbackResources::make(c, p, 12);
    SchemeState bs = SchemeState::fresh(200);
    RngStream rng(12, 12);
    bs.h_hat_prev = sample_complex_gaussian(rng, 200, 1.0);
    bs.slot_index = 2;
    Measurement m;
    m.y = ComplexVector::Zero(30);
    m.slot_index = 2;
    m.is_init_slot = false;
    const DecodedSlot d = bs_decode(m, bs, c, r, SparsityBudget{3});
    CHECK(d.h_hat == bs.h_hat_prev);
}

TEST_CASE("bs_decode rejects schedule mismatches and tags solver errors") {
    const ChannelParams p = fig_params();
    const FeedbackConfig c = differential_config(0.45, 0.15, 3);
    const FeedbackResources r = FeedbackResources::make(c, p, 13);
    const SchemeState bs = SchemeState::fresh(200);
    Measurement m;
    m.y = ComplexVector::Zero(90);
    m.slot_index = 2;
    CHECK_THROWS_AS(bs_decode(m, bs, c, r, SparsityBudget{3}), FeedbackError);
    m.slot_index = 1;
    m.is_init_slot = false;
    CHECK_THROWS_AS(bs_decode(m, bs, c, r, SparsityBudget{3}), FeedbackError);

    m.is_init_slot = true;
    m.antenna_index = 5;
    m.y = ComplexVector::Ones(90);
    try {
        (void)bs_decode(m, bs, c, r, SparsityBudget{46});
        FAIL("expected FeedbackError");
    } catch (const FeedbackError& e) {
        const std::string what = e.what();
        CHECK(what.find("slot 1") != std::string::npos);
        CHECK(what.find("antenna 5") != std::string::npos);
    }
}

TEST_CASE("three noiseless slots without error growth") {
    const ChannelParams p = easy_params();
    const FeedbackConfig c = differential_config(0.45, 0.3, 3);
    const FeedbackResources r = FeedbackResources::make(c, p, 14);
    const auto h = cirs(p, 14, 3);
    FeedbackLink link(c, r, 0, p.taps);
    for (std::size_t t = 1; t <= 3; ++t) {
        const SlotOutcome o = link.process(h[t - 1], noise(t));
        CAPTURE(t);
        CHECK(nmse_of(h[t - 1], o.h_hat) < 1e-4);
        CHECK(nmse_of(h[t - 1], o.h_hat) < 1e-12);
    }
}

TEST_CASE("true-previous reference differences true CIRs") {
    const ChannelParams p = fig_params();
    FeedbackConfig c = differential_config(0.45, 0.15, 3);
    c.snr_db = 5.0;
    const FeedbackResources r = FeedbackResources::make(c, p, 15);
    const auto h = cirs(p, 15, 3);
    FeedbackLink link(c, r, 0, p.taps);
    (void)link.process(h[0], noise(1));
    CHECK(link.user_state().reference == h[0]);
    UserState u = link.user_state();
    RngStream n2 = noise(2);
    CHECK(user_encode(h[1], u, c, r, 0, n2).target == h[1] - h[0]);
}

TEST_CASE("reconstruction tracking mirrors the BS bit for bit") {
    const ChannelParams p = fig_params();
    FeedbackConfig c = differential_config(0.45, 0.15, 3);
    c.reference_mode = ReferenceMode::reconstruction_tracking;
    c.snr_db = 10.0;
    const FeedbackResources r = FeedbackResources::make(c, p, 16);
    const auto h = cirs(p, 16, 12);
    FeedbackLink link(c, r, 2, p.taps);
    for (std::size_t t = 1; t <= h.size(); ++t) {
        (void)link.process(h[t - 1], noise(t));
        REQUIRE(link.user_state().reference == link.bs_state().h_hat_prev);
        REQUIRE(link.user_state().mirror.slot_index == link.bs_state().slot_index);
    }
}

TEST_CASE("both reference modes coincide without noise") {
    const ChannelParams p = easy_params();
    FeedbackConfig a = differential_config(0.45, 0.3, 3);
    FeedbackConfig b = a;
    b.reference_mode = ReferenceMode::reconstruction_tracking;
    const FeedbackResources r = FeedbackResources::make(a, p, 17);
    const auto h = cirs(p, 17, 9);
    FeedbackLink la(a, r, 0, p.taps);
    FeedbackLink lb(b, r, 0, p.taps);
    for (std::size_t t = 1; t <= h.size(); ++t) {
        const SlotOutcome oa = la.process(h[t - 1], noise(t));
        const SlotOutcome ob = lb.process(h[t - 1], noise(t));
        CHECK((oa.h_hat - ob.h_hat).norm() <= 1e-6 * h[t - 1].norm());
    }
}

TEST_CASE("tracking reconstruction telescopes over recovered differentials") {
    const ChannelParams p = fig_params();
    FeedbackConfig c = differential_config(0.45, 0.15, 5);
    c.reference_mode = ReferenceMode::reconstruction_tracking;
    c.snr_db = 15.0;
    const FeedbackResources r = FeedbackResources::make(c, p, 18);
    const auto h = cirs(p, 18, 12);

    UserState user = UserState::fresh(p.taps);
    SchemeState bs = SchemeState::fresh(p.taps);
    ComplexVector running;
    for (std::size_t t = 1; t <= h.size(); ++t) {
        RngStream n = noise(t);
        const EncodedSlot e = user_encode(h[t - 1], user, c, r, 0, n);
        const bool init = e.measurement.is_init_slot;
        const SparsityBudget k = resolve_budget(c, r, init, &e.target, &e.measurement.y);
        DecodedSlot d = bs_decode(e.measurement, bs, c, r, k);
        user = user_reference_update(user, h[t - 1], e.measurement, c, r, k);
        running = init ? d.recovery.x_hat : ComplexVector(running + d.recovery.x_hat);
        CAPTURE(t);
        CHECK((d.h_hat - running).norm() <= 1e-10 * std::max(1.0, running.norm()));
        bs = std::move(d.next);
    }
}

TEST_CASE("init slots are independent of history") {
    const ChannelParams p = fig_params();
    FeedbackConfig c = differential_config(0.45, 0.15, 3);
    c.snr_db = 10.0;
    const FeedbackResources r = FeedbackResources::make(c, p, 19);
    const auto h = cirs(p, 19, 7);
    FeedbackLink link(c, r, 1, p.taps);
    std::vector<SlotOutcome> outs;
    for (std::size_t t = 1; t <= h.size(); ++t)
        outs.push_back(link.process(h[t - 1], noise(t)));

    FeedbackConfig direct = c;
    direct.scheme = Scheme::direct;
    const FeedbackResources rd = FeedbackResources::make(direct, p, 19);
    for (std::size_t t : {std::size_t{4}, std::size_t{7}}) {
        FeedbackLink fresh(direct, rd, 1, p.taps);
        const SlotOutcome o = fresh.process(h[t - 1], noise(t));
        CAPTURE(t);
        CHECK(outs[t - 1].init_slot);
        CHECK(o.h_hat == outs[t - 1].h_hat);
    }
}

TEST_CASE("fed-back scalars match the average ratio") {
    const ChannelParams p = fig_params();
    for (auto [ei, ed, period] : {std::tuple{0.45, 0.15, std::size_t{3}}, std::tuple{0.65, 0.35, std::size_t{3}},
                                  std::tuple{0.5, 0.1, std::size_t{5}}}) {
        const FeedbackConfig c = differential_config(ei, ed, period);
        const FeedbackResources r = FeedbackResources::make(c, p, 20);
        const std::size_t horizon = 4 * period;
        const auto h = cirs(p, 20, horizon);
        FeedbackLink link(c, r, 0, p.taps);
        std::size_t scalars = 0;
        for (std::size_t t = 1; t <= horizon; ++t)
            scalars += link.process(h[t - 1], noise(t)).measurements;
        const double measured = static_cast<double>(scalars) / static_cast<double>(horizon * p.taps);
        CHECK(measured == doctest::Approx(c.average_ratio()).epsilon(1e-12));
    }
}

TEST_CASE("differential scheme with P=1 is bit-identical to direct") {
    const ChannelParams p = fig_params();
    for (double snr : {kNoiselessSnrDb, 20.0, 5.0}) {
        FeedbackConfig diff = differential_config(0.45, 0.15, 1);
        diff.snr_db = snr;
        FeedbackConfig direct = diff;
        direct.scheme = Scheme::direct;
        const FeedbackResources rd = FeedbackResources::make(diff, p, 21);
        const FeedbackResources rr = FeedbackResources::make(direct, p, 21);
        const auto h = cirs(p, 21, 8);
        FeedbackLink a(diff, rd, 3, p.taps);
        FeedbackLink b(direct, rr, 3, p.taps);
        for (std::size_t t = 1; t <= h.size(); ++t) {
            const SlotOutcome oa = a.process(h[t - 1], noise(t));
            const SlotOutcome ob = b.process(h[t - 1], noise(t));
            REQUIRE(oa.h_hat == ob.h_hat);
            REQUIRE(oa.measurements == ob.measurements);
        }
    }
}

TEST_CASE("energy budgets profile a pilot recovery of the measurement") {
    const ChannelParams p = fig_params();
    FeedbackConfig c = differential_config(0.45, 0.15, 3);
    c.budget_init = BudgetRule{BudgetMode::energy, 20, 0.99};
    c.budget_diff = BudgetRule{BudgetMode::energy, 3, 0.99};
    const FeedbackResources r = FeedbackResources::make(c, p, 22);
    CHECK(resolve_budget(c, r, true, nullptr, nullptr).k == 20);
    CHECK(resolve_budget(c, r, false, nullptr, nullptr).k == 3);

    // noiseless 4-sparse differential: the pilot fit concentrates all energy
    // on the true support
    ComplexVector dh = ComplexVector::Zero(200);
    dh[3] = cdouble(1.0, 0.5);
    dh[50] = cdouble(-0.8, 0.0);
    dh[120] = cdouble(0.0, 1.2);
    dh[199] = cdouble(0.7, -0.7);
    const ComplexVector y = compress(*r.diff_matrix, dh);
    CHECK(resolve_budget(c, r, false, nullptr, &y).k == 4);
    const ComplexVector zero = ComplexVector::Zero(30);
    CHECK(resolve_budget(c, r, false, nullptr, &zero).k == 3);

    FeedbackConfig oracle = c;
    oracle.budget_diff = BudgetRule{};
    CHECK_THROWS_AS(resolve_budget(oracle, r, false, nullptr, &y), ConfigError);
    const ComplexVector dense = ComplexVector::Ones(p.taps);
    CHECK(resolve_budget(oracle, r, false, &dense, nullptr).k == 15);
    CHECK(resolve_budget(oracle, r, false, &dh, nullptr).k == 4);
}

TEST_CASE("scheme and reference mode names") {
    CHECK(scheme_from_string(to_string(Scheme::direct)) == Scheme::direct);
    CHECK(scheme_from_string(to_string(Scheme::differential)) == Scheme::differential);
    CHECK(reference_mode_from_string("true-previous") == ReferenceMode::true_previous);
    CHECK(reference_mode_from_string("reconstruction-tracking") == ReferenceMode::reconstruction_tracking);
    CHECK_THROWS_AS(scheme_from_string("Direct"), ConfigError);
    CHECK_THROWS_AS(reference_mode_from_string("tracking"), ConfigError);
}

} // TEST_SUITE

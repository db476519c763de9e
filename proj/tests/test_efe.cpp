#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "epigain/efe.hpp"
#include "epigain/error.hpp"
#include "epigain/json_io.hpp"

using namespace epigain;
using doctest::Approx;

namespace {

DiscretePolicyModel two_state() {
    DiscretePolicyModel m;
    m.states = {"a", "b"};
    m.observations = {"x", "y"};
    m.likelihood = {{0.9, 0.1}, {0.2, 0.8}};
    m.preference = {0.5, 0.5};
    m.policies = {{"lean-a", {0.7, 0.3}}, {"even", {0.5, 0.5}}};
    return m;
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
    std::gamma_distribution<double> draw(0.7, 1.0);
    std::vector<double> v(n);
    double total = 0.0;
    for (double& x : v) total += (x = draw(rng) + 1e-6);
    for (double& x : v) x /= total;
    // Renormalize so the sum is 1 to within a couple of ulps.
    double fix = 0.0;
    for (std::size_t i = 1; i < n; ++i) fix += v[i];
    v[0] = 1.0 - fix;
    return v;
}

double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log(x);
    return h;
}

void expect_validation_message(const DiscretePolicyModel& m, const std::string& fragment) {
    try {
        m.validate();
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
    }
}

}  // namespace

TEST_CASE("two-state expected free energy") {
    const DiscretePolicyModel m = two_state();
    // Hand form: risk plus the q-weighted likelihood entropy.
    const double risk_hand = 0.7 * std::log(1.4) + 0.3 * std::log(0.6);
    const double ambiguity = 0.7 * entropy({0.9, 0.1}) + 0.3 * entropy({0.2, 0.8});
    CHECK(efe_direct(m, 0) == Approx(0.459961686940521978).epsilon(1e-14));
    CHECK(efe_direct(m, 0) == Approx(risk_hand + ambiguity).epsilon(1e-14));
    CHECK(risk(m, m.policies[0].predicted_states) == Approx(risk_hand).epsilon(1e-14));
    const EfeBreakdown b = efe_decompose(m, 0);
    CHECK(b.risk == Approx(risk_hand).epsilon(1e-14));
    // Predicted free energy weights each observation by its marginal q(o)
    // but averages -ln p(o|s) under the predicted q(s), not the posterior.
    const double q_x = 0.7 * 0.9 + 0.3 * 0.2, q_y = 1.0 - q_x;
    const double p_f_hand = -q_x * (0.7 * std::log(0.9) + 0.3 * std::log(0.2)) -
                            q_y * (0.7 * std::log(0.1) + 0.3 * std::log(0.8));
    CHECK(b.p_f == Approx(p_f_hand).epsilon(1e-14));
    CHECK(std::fabs(b.reconstructed() - b.g) <= 1e-14);
}

TEST_CASE("risk vanishes when predictions match preferences") {
    const DiscretePolicyModel m = two_state();
    CHECK(risk(m, m.policies[1].predicted_states) == 0.0);
    const EfeBreakdown b = efe_decompose(m, 1);
    // With zero risk, G = p_f - (p_kld + p_bs).
    CHECK(b.g == Approx(b.p_f - (b.p_kld + b.p_bs)).epsilon(1e-14));
}

TEST_CASE("a state with no predicted mass does not contribute") {
    DiscretePolicyModel m = two_state();
    const double g2 = efe_direct(m, 0);
    m.states.push_back("c");
    m.likelihood.push_back({0.5, 0.5});
    m.preference = {0.4, 0.4, 0.2};
    DiscretePolicyModel ref = two_state();
    ref.preference = {0.5, 0.5};
    const std::vector<double> q3{0.7, 0.3, 0.0};
    // Only the risk term depends on the preference; adjust for the new C.
    const double shift = -(0.7 * std::log(0.4 / 0.5) + 0.3 * std::log(0.4 / 0.5));
    CHECK(efe_direct(m, q3) == Approx(g2 + shift).epsilon(1e-14));
    const EfeBreakdown b = efe_decompose(m, q3);
    CHECK(b.p_kld == Approx(efe_decompose(ref, 0).p_kld).epsilon(1e-13));
    CHECK(b.p_bs == Approx(efe_decompose(ref, 0).p_bs).epsilon(1e-13));
}

TEST_CASE("decomposition identity on random models") {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<std::size_t> dim(2, 7);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        DiscretePolicyModel m;
        const std::size_t ns = dim(rng), no = dim(rng);
        for (std::size_t s = 0; s < ns; ++s) m.states.push_back("s" + std::to_string(s));
        for (std::size_t o = 0; o < no; ++o) m.observations.push_back("o" + std::to_string(o));
        for (std::size_t s = 0; s < ns; ++s) m.likelihood.push_back(random_simplex(rng, no));
        m.preference = random_simplex(rng, ns);
        m.policies.push_back({"p", random_simplex(rng, ns)});
        REQUIRE_NOTHROW(m.validate());
        const EfeBreakdown b = efe_decompose(m, 0);
        CHECK(b.p_kld >= 0.0);
        CHECK(b.p_bs >= 0.0);
        CHECK(b.risk >= 0.0);
        worst = std::max(worst, std::fabs(b.reconstructed() - b.g) / std::max(1.0, std::fabs(b.g)));
    }
    CHECK(worst <= kEfeIdentityTol);
}

TEST_CASE("policy prior is a softmax of -gamma G") {
    const std::vector<double> g{1.0, 2.0};
    const std::vector<double> p = policy_prior(g, 1.0);
    CHECK(p[0] == Approx(0.7310585786300049).epsilon(1e-14));
    CHECK(p[1] == Approx(0.2689414213699951).epsilon(1e-14));

    const std::vector<double> flat = policy_prior(std::vector<double>{3.0, -1.0, 7.5}, 0.0);
    for (double x : flat) CHECK(x == Approx(1.0 / 3.0).epsilon(1e-15));

    const std::vector<double> sharp = policy_prior(std::vector<double>{0.3, 0.1, 0.2}, 1e4);
    CHECK(sharp[1] == Approx(1.0).epsilon(1e-12));
    CHECK(sharp[0] < 1e-300);

    // Adding a constant to every G leaves the prior unchanged.
    const std::vector<double> base = policy_prior(std::vector<double>{0.4, 1.1, 0.9}, 3.0);
    const std::vector<double> moved = policy_prior(std::vector<double>{1000.4, 1001.1, 1000.9}, 3.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(base[i] - moved[i]) <= 1e-12);

    CHECK_THROWS_AS(policy_prior(std::vector<double>{}, 1.0), ValidationError);
    CHECK_THROWS_AS(policy_prior(g, -1.0), ValidationError);
}

TEST_CASE("bundled example model") {
    const DiscretePolicyModel m = load_policy_model(EPIGAIN_SOURCE_DIR "/data/example_policy_model.json");
    CHECK(m.policies.size() == 4);
    CHECK(m.gamma == 4.0);
    std::vector<EfeBreakdown> all;
    for (std::size_t k = 0; k < m.policies.size(); ++k) all.push_back(efe_decompose(m, k));
    const std::vector<double> prior = policy_prior(all, m.gamma);
    double total = 0.0;
    for (double x : prior) total += x;
    CHECK(total == Approx(1.0).epsilon(1e-15));
    // The mirror-image policies score the same.
    CHECK(all[1].g == Approx(all[2].g).epsilon(1e-14));
    // Staying put in the unpreferred state is the worst option.
    for (std::size_t k = 1; k < all.size(); ++k) CHECK(all[0].g > all[k].g);
}

TEST_CASE("validation names the offending piece") {
    DiscretePolicyModel m = two_state();
    m.states.push_back("c");
    m.preference = {0.4, 0.4, 0.2};
    for (auto& p : m.policies) p.predicted_states.push_back(0.0);
    expect_validation_message(m, "row 2 missing");

    m = two_state();
    m.likelihood[1] = {0.5, 0.6};
    expect_validation_message(m, "likelihood row 1 is not normalized");

    m = two_state();
    m.likelihood[0] = {1.1, -0.1};
    expect_validation_message(m, "likelihood row 0 entry 1");

    m = two_state();
    m.preference = {1.0};
    expect_validation_message(m, "preference has 1 entries");

    m = two_state();
    m.policies[1].predicted_states = {0.2, 0.2};
    expect_validation_message(m, "'even'");

    m = two_state();
    m.gamma = -1.0;
    expect_validation_message(m, "gamma");

    m = two_state();
    m.policies.clear();
    expect_validation_message(m, "no policies");
}

TEST_CASE("log of zero under positive mass is a domain error") {
    DiscretePolicyModel m = two_state();
    m.preference = {1.0, 0.0};
    try {
        efe_direct(m, 0);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("state 1 'b'") != std::string::npos);
    }
    CHECK_THROWS_AS(risk(m, m.policies[0].predicted_states), DomainError);
    // Zero preference on a state with no predicted mass is harmless.
    CHECK_NOTHROW(efe_direct(m, std::vector<double>{1.0, 0.0}));

    m = two_state();
    m.likelihood = {{1.0, 0.0}, {0.2, 0.8}};
    // q(o=y) > 0 through state b, but p(y|a) = 0: the free-energy term is undefined.
    try {
        efe_decompose(m, 0);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("observation 1 'y'") != std::string::npos);
    }
}

#include "epigain/efe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "epigain/error.hpp"

namespace epigain {

namespace {

void check_distribution(std::span<const double> p, std::size_t size, const std::string& what) {
    if (p.size() != size) {
        std::ostringstream msg;
        msg << what << " has " << p.size() << " entries, expected " << size;
        throw ValidationError(msg.str());
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0) || !std::isfinite(p[i])) {
            std::ostringstream msg;
            msg << what << " entry " << i << " is not a probability";
            throw ValidationError(msg.str());
        }
        sum += p[i];
    }
    if (std::fabs(sum - 1.0) > kDistributionTol) {
        std::ostringstream msg;
        msg.precision(17);
        msg << what << " is not normalized (sums to " << sum << ")";
        throw ValidationError(msg.str());
    }
}

[[noreturn]] void zero_log(const DiscretePolicyModel& m, std::size_t s, std::size_t o, const char* term) {
    std::ostringstream msg;
    msg << "efe: ln 0 under nonzero mass in " << term << " at (state " << s;
    if (s < m.states.size()) msg << " '" << m.states[s] << "'";
    msg << ", observation " << o;
    if (o < m.observations.size()) msg << " '" << m.observations[o] << "'";
    msg << ")";
    throw DomainError(msg.str());
}

}  // namespace

void DiscretePolicyModel::validate() const {
    const std::size_t ns = states.size();
    const std::size_t no = observations.size();
    if (ns == 0) throw ValidationError("model has no states");
    if (no == 0) throw ValidationError("model has no observations");
    if (likelihood.size() != ns) {
        std::ostringstream msg;
        msg << "likelihood has " << likelihood.size() << " rows, expected " << ns;
        if (likelihood.size() < ns) msg << " (row " << likelihood.size() << " missing)";
        throw ValidationError(msg.str());
    }
    for (std::size_t s = 0; s < ns; ++s) check_distribution(likelihood[s], no, "likelihood row " + std::to_string(s));
    check_distribution(preference, ns, "preference");
    if (policies.empty()) throw ValidationError("model has no policies");
    for (std::size_t k = 0; k < policies.size(); ++k)
        check_distribution(policies[k].predicted_states, ns,
                           "policy " + std::to_string(k) + " ('" + policies[k].name + "') predicted states");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be nonnegative");
}

double efe_direct(const DiscretePolicyModel& model, std::span<const double> q) {
    check_distribution(q, model.states.size(), "predicted states");
    double g = 0.0;
    for (std::size_t s = 0; s < q.size(); ++s) {
        for (std::size_t o = 0; o < model.observations.size(); ++o) {
            const double lik = model.likelihood[s][o];
            const double mass = q[s] * lik;
            if (mass == 0.0) continue;
            if (model.preference[s] == 0.0) zero_log(model, s, o, "ln p(s|C)");
            g += mass * (std::log(q[s]) - std::log(model.preference[s]) - std::log(lik));
        }
    }
    return g;
}

double efe_direct(const DiscretePolicyModel& model, std::size_t policy) {
    return efe_direct(model, model.policies.at(policy).predicted_states);
}

double risk(const DiscretePolicyModel& model, std::span<const double> q) {
    check_distribution(q, model.states.size(), "predicted states");
    double r = 0.0;
    for (std::size_t s = 0; s < q.size(); ++s) {
        if (q[s] == 0.0) continue;
        if (model.preference[s] == 0.0) zero_log(model, s, 0, "risk");
        r += q[s] * (std::log(q[s]) - std::log(model.preference[s]));
    }
    return r;
}

EfeBreakdown efe_decompose(const DiscretePolicyModel& model, std::span<const double> q) {
    const std::size_t ns = model.states.size();
    const std::size_t no = model.observations.size();
    check_distribution(q, ns, "predicted states");

    // q(o) = sum_s q(s) p(o|s)
    std::vector<double> q_o(no, 0.0);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t o = 0; o < no; ++o) q_o[o] += q[s] * model.likelihood[s][o];

    EfeBreakdown b;
    b.risk = risk(model, q);
    for (std::size_t o = 0; o < no; ++o) {
        if (q_o[o] == 0.0) continue;
        double free_energy = 0.0;  // <ln q(s) - ln q(s, o)>_{q(s)} = -<ln p(o|s)>_{q(s)}
        double kl_prior_post = 0.0;
        double kl_post_prior = 0.0;
        for (std::size_t s = 0; s < ns; ++s) {
            if (q[s] == 0.0) continue;
            const double lik = model.likelihood[s][o];
            if (lik == 0.0) zero_log(model, s, o, "predicted free energy");
            free_energy -= q[s] * std::log(lik);
            const double post = q[s] * lik / q_o[o];  // q(s|o)
            // ln(q(s) / q(s|o)) = ln q(o) - ln p(o|s)
            const double log_ratio = std::log(q_o[o]) - std::log(lik);
            kl_prior_post += q[s] * log_ratio;
            kl_post_prior -= post * log_ratio;
        }
        b.p_f += q_o[o] * free_energy;
        b.p_kld += q_o[o] * kl_prior_post;
        b.p_bs += q_o[o] * kl_post_prior;
    }
    b.g = efe_direct(model, q);

    const double gap = std::fabs(b.reconstructed() - b.g);
    if (gap > kEfeIdentityTol * std::max(1.0, std::fabs(b.g))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "efe: decomposition does not reconstruct G (gap " << gap << ")";
        throw DomainError(msg.str());
    }
    return b;
}

EfeBreakdown efe_decompose(const DiscretePolicyModel& model, std::size_t policy) {
    return efe_decompose(model, model.policies.at(policy).predicted_states);
}

std::vector<double> policy_prior(std::span<const double> g_values, double gamma) {
    if (g_values.empty()) throw ValidationError("policy_prior: at least one policy is required");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("policy_prior: gamma must be nonnegative");
    std::vector<double> energy(g_values.size());
    for (std::size_t i = 0; i < energy.size(); ++i) energy[i] = -gamma * g_values[i];
    const double top = *std::max_element(energy.begin(), energy.end());
    double total = 0.0;
    for (double& e : energy) {
        e = std::exp(e - top);
        total += e;
    }
    for (double& e : energy) e /= total;
    return energy;
}

std::vector<double> policy_prior(std::span<const EfeBreakdown> breakdowns, double gamma) {
    std::vector<double> g(breakdowns.size());
    std::transform(breakdowns.begin(), breakdowns.end(), g.begin(), [](const EfeBreakdown& b) { return b.g; });
    return policy_prior(g, gamma);
}

}  // namespace epigain

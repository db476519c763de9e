#pragma once

// Expected free energy of discrete policies and its decomposition
//
//   G = risk + predicted free energy - (predicted KLD + predicted BS)
//
// with the preference distribution p(s|C) used as the state prior. Field
// names follow the mathematical form: p_kld = E_q(o)[KL(q(s) || q(s|o))],
// p_bs = E_q(o)[KL(q(s|o) || q(s))].

#include <span>
#include <string>
#include <vector>

namespace epigain {

struct Policy {
    std::string name;
    std::vector<double> predicted_states;  ///< q(s|pi)
};

struct DiscretePolicyModel {
    std::vector<std::string> states;
    std::vector<std::string> observations;
    std::vector<std::vector<double>> likelihood;  ///< likelihood[s][o] = p(o|s)
    std::vector<double> preference;               ///< p(s|C)
    std::vector<Policy> policies;
    double gamma = 1.0;

    /// Throws ValidationError naming the offending row, vector or policy.
    void validate() const;
};

struct EfeBreakdown {
    double g = 0.0;
    double risk = 0.0;
    double p_f = 0.0;
    double p_kld = 0.0;
    double p_bs = 0.0;

    double reconstructed() const noexcept { return risk + p_f - (p_kld + p_bs); }
};

inline constexpr double kEfeIdentityTol = 1e-10;
inline constexpr double kDistributionTol = 1e-12;

/// Direct double sum of q(s)p(o|s) [ln q(s) - ln p(s|C) - ln p(o|s)].
double efe_direct(const DiscretePolicyModel& model, std::span<const double> q);
double efe_direct(const DiscretePolicyModel& model, std::size_t policy);

/// KL[q || p(s|C)].
double risk(const DiscretePolicyModel& model, std::span<const double> q);

/// Term-by-term decomposition. Throws DomainError if the terms fail to
/// reconstruct efe_direct within kEfeIdentityTol.
EfeBreakdown efe_decompose(const DiscretePolicyModel& model, std::span<const double> q);
EfeBreakdown efe_decompose(const DiscretePolicyModel& model, std::size_t policy);

/// Softmax of -gamma * G with max subtraction.
std::vector<double> policy_prior(std::span<const double> g_values, double gamma);
std::vector<double> policy_prior(std::span<const EfeBreakdown> breakdowns, double gamma);

}  // namespace epigain

#pragma once

// Inquiry-cycle simulation: the diversive phase pushes the prediction error
// toward the BS optimum (more surprise), the specific phase pulls it back
// toward the KLD optimum (less surprise). The alternation makes surprise
// fluctuate across the band [S_KLD, S_BS], which contains S_IG.

#include <iosfwd>
#include <string_view>
#include <vector>

#include "epigain/optimize.hpp"
#include "epigain/quadrature.hpp"

namespace epigain {

enum class Phase { diversive, specific };
enum class Emotion { boredom, pleasure, optimal_band, interest, confusion };

std::string_view to_string(Phase phase);
std::string_view to_string(Emotion emotion);

struct StepMode {
    enum class Kind { jump, relax };
    Kind kind = Kind::jump;
    double rate = 1.0;  ///< relax only, in (0, 1]

    static StepMode jump() { return {Kind::jump, 1.0}; }
    static StepMode relax(double rate) { return {Kind::relax, rate}; }
};

/// Fractions of S_KLD and S_BS that bound boredom and confusion.
struct LabelThresholds {
    double boredom_frac = 0.5;
    double confusion_frac = 1.5;
};

struct InquiryConfig {
    ModelParams params;
    double initial_delta = 0.0;
    int cycles = 3;
    StepMode step_mode;
    LabelThresholds thresholds;
    /// Relax mode switches phase once |delta - target| <= arrival_tol.
    double arrival_tol = 1e-6;
    /// Safety cap on relax steps per phase.
    int max_steps_per_phase = 100000;
    QuadratureConfig quadrature;
    OptimizeOptions optimize;

    void validate() const;
};

struct InquiryStep {
    int index = 0;
    Phase phase = Phase::diversive;
    double delta = 0.0;
    double surprise = 0.0;
    double kld = 0.0;
    double bs = 0.0;
    double ig = 0.0;
    Emotion emotion = Emotion::optimal_band;
};

struct InquiryTrace {
    InquiryConfig config;
    std::vector<InquiryStep> steps;
    OptimaRecord optima;
};

Emotion label_emotion(double surprise, const OptimaRecord& optima, const LabelThresholds& thresholds = {});

/// Runs find_optima, then simulates. Throws ConvergenceError if any optimum
/// failed to converge.
InquiryTrace simulate(const InquiryConfig& config);

/// Simulates against precomputed optima for config.params.
InquiryTrace simulate(const InquiryConfig& config, const OptimaRecord& optima);

inline constexpr std::string_view kTraceCsvHeader = "step,phase,delta,surprise,kld,bs,ig,emotion";

std::size_t export_trace_csv(const InquiryTrace& trace, std::ostream& out);

}  // namespace epigain

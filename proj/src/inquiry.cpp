#include "epigain/inquiry.hpp"

#include <cmath>
#include <ostream>

#include "epigain/error.hpp"
#include "epigain/numerics.hpp"
#include "epigain/sweep.hpp"

namespace epigain {

std::string_view to_string(Phase phase) {
    return phase == Phase::diversive ? "diversive" : "specific";
}

std::string_view to_string(Emotion emotion) {
    switch (emotion) {
        case Emotion::boredom: return "boredom";
        case Emotion::pleasure: return "pleasure";
        case Emotion::optimal_band: return "optimal-band";
        case Emotion::interest: return "interest";
        case Emotion::confusion: return "confusion";
    }
    return "unknown";
}

void InquiryConfig::validate() const {
    params.validate();
    quadrature.validate();
    if (!(initial_delta >= 0.0) || !std::isfinite(initial_delta))
        throw ValidationError("inquiry: initial_delta must be a nonnegative finite number");
    if (cycles < 1) throw ValidationError("inquiry: cycles must be >= 1");
    if (step_mode.kind == StepMode::Kind::relax && !(step_mode.rate > 0.0 && step_mode.rate <= 1.0))
        throw ValidationError("inquiry: relax rate must lie in (0, 1]");
    if (!(thresholds.boredom_frac > 0.0 && thresholds.boredom_frac < 1.0))
        throw ValidationError("inquiry: boredom_frac must lie in (0, 1)");
    if (!(thresholds.confusion_frac > 1.0)) throw ValidationError("inquiry: confusion_frac must exceed 1");
    if (!(arrival_tol > 0.0)) throw ValidationError("inquiry: arrival_tol must be positive");
    if (max_steps_per_phase < 1) throw ValidationError("inquiry: max_steps_per_phase must be >= 1");
}

Emotion label_emotion(double surprise, const OptimaRecord& optima, const LabelThresholds& t) {
    if (surprise < t.boredom_frac * optima.s_kld) return Emotion::boredom;
    if (surprise < optima.s_kld) return Emotion::pleasure;
    if (surprise <= optima.s_bs) return Emotion::optimal_band;
    if (surprise <= t.confusion_frac * optima.s_bs) return Emotion::interest;
    return Emotion::confusion;
}

InquiryTrace simulate(const InquiryConfig& config) {
    config.validate();
    return simulate(config, find_optima(config.params, config.quadrature, config.optimize));
}

InquiryTrace simulate(const InquiryConfig& config, const OptimaRecord& optima) {
    config.validate();
    if (!optima.converged())
        throw ConvergenceError("inquiry: optima did not converge; refusing to simulate");

    InquiryTrace trace;
    trace.config = config;
    trace.optima = optima;

    const double lo = optima.delta_kld;
    const double hi = optima.delta_bs;

    auto record = [&](Phase phase, double delta) {
        const NoisyGains g = noisy_gains(config.params, delta, config.quadrature);
        InquiryStep step;
        step.index = static_cast<int>(trace.steps.size());
        step.phase = phase;
        step.delta = delta;
        step.surprise = surprise(config.params, delta);
        step.kld = g.kld;
        step.bs = g.bs;
        step.ig = g.kld + g.bs;
        step.emotion = label_emotion(step.surprise, optima, config.thresholds);
        trace.steps.push_back(step);
    };

    double delta = config.initial_delta;
    Phase phase = delta > hi ? Phase::specific : Phase::diversive;
    record(phase, delta);

    const bool jump = config.step_mode.kind == StepMode::Kind::jump;
    const double rate = jump ? 1.0 : config.step_mode.rate;
    for (int half = 0; half < 2 * config.cycles; ++half) {
        const double target = phase == Phase::diversive ? hi : lo;
        int taken = 0;
        do {
            // Convex-combination form so that rate == 1 lands exactly on target.
            delta = (1.0 - rate) * delta + rate * target;
            record(phase, delta);
            ++taken;
        } while (std::fabs(delta - target) > config.arrival_tol && taken < config.max_steps_per_phase);
        phase = phase == Phase::diversive ? Phase::specific : Phase::diversive;
    }
    return trace;
}

std::size_t export_trace_csv(const InquiryTrace& trace, std::ostream& out) {
    out << kTraceCsvHeader << '\n';
    for (const InquiryStep& s : trace.steps) {
        out << s.index << ',' << to_string(s.phase) << ',' << format_real(s.delta) << ','
            << format_real(s.surprise) << ',' << format_real(s.kld) << ',' << format_real(s.bs) << ','
            << format_real(s.ig) << ',' << to_string(s.emotion) << '\n';
    }
    return trace.steps.size();
}

}  // namespace epigain

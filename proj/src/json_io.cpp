#include "epigain/json_io.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "epigain/error.hpp"

namespace epigain {

namespace {

template <typename T>
T get_field(const Json& doc, const char* key, const char* context) {
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string(context) + ": field '" + key + "' " +
                              (doc.contains(key) ? "has the wrong type" : "is missing"));
    }
}

void reject_unknown_keys(const Json& doc, const std::set<std::string>& allowed, const char* context) {
    for (const auto& item : doc.items()) {
        if (!allowed.count(item.key()))
            throw ValidationError(std::string(context) + ": unknown field '" + item.key() + "'");
    }
}

std::vector<double> probability_vector(const Json& doc, const std::string& what) {
    if (!doc.is_array()) throw ValidationError(what + " must be an array of numbers");
    std::vector<double> v;
    v.reserve(doc.size());
    for (const Json& x : doc) {
        if (!x.is_number()) throw ValidationError(what + " must contain only numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

std::vector<std::string> label_array(const Json& doc, const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_array())
        throw ValidationError(std::string("policy model: '") + key + "' must be an array of labels");
    std::vector<std::string> labels;
    for (const Json& x : doc.at(key)) {
        if (!x.is_string()) throw ValidationError(std::string("policy model: '") + key + "' labels must be strings");
        labels.push_back(x.get<std::string>());
    }
    return labels;
}

}  // namespace

Json json_real(double value) {
    if (!std::isfinite(value)) return nullptr;
    return value;
}

Json to_json(const ModelParams& p) {
    return Json{{"eta", p.eta},         {"s_p", p.s_p},
                {"s_l", p.s_l},         {"n", p.n},
                {"obs_mean", p.obs_mean}, {"obs_var", p.obs_var},
                {"epsilon", p.epsilon}};
}

ModelParams params_from_json(const Json& doc, ModelParams base) {
    if (!doc.is_object()) throw ValidationError("model parameters must be a JSON object");
    reject_unknown_keys(doc, {"eta", "s_p", "s_l", "n", "obs_mean", "obs_var", "epsilon"}, "model parameters");
    const char* ctx = "model parameters";
    if (doc.contains("eta")) base.eta = get_field<double>(doc, "eta", ctx);
    if (doc.contains("s_p")) base.s_p = get_field<double>(doc, "s_p", ctx);
    if (doc.contains("s_l")) base.s_l = get_field<double>(doc, "s_l", ctx);
    if (doc.contains("n")) base.n = get_field<int>(doc, "n", ctx);
    if (doc.contains("obs_mean")) base.obs_mean = get_field<double>(doc, "obs_mean", ctx);
    if (doc.contains("obs_var")) base.obs_var = get_field<double>(doc, "obs_var", ctx);
    if (doc.contains("epsilon")) base.epsilon = get_field<double>(doc, "epsilon", ctx);
    base.validate();
    return base;
}

Json to_json(const QuadratureConfig& cfg) {
    return Json{{"abs_tol", cfg.abs_tol},
                {"rel_tol", cfg.rel_tol},
                {"max_subdivisions", cfg.max_subdivisions},
                {"truncation_sigmas", cfg.truncation_sigmas}};
}

Json to_json(const OptimaRecord& r) {
    return Json{{"s_l", r.params.s_l},
                {"s_p", r.params.s_p},
                {"epsilon", r.params.epsilon},
                {"n", r.params.n},
                {"max_kld", json_real(r.max_kld)},
                {"max_bs", json_real(r.max_bs)},
                {"max_ig", json_real(r.max_ig)},
                {"delta_kld", json_real(r.delta_kld)},
                {"delta_bs", json_real(r.delta_bs)},
                {"delta_ig", json_real(r.delta_ig)},
                {"s_kld", json_real(r.s_kld)},
                {"s_bs", json_real(r.s_bs)},
                {"s_ig", json_real(r.s_ig)},
                {"d_delta", json_real(r.d_delta)},
                {"d_s", json_real(r.d_s)},
                {"search_bound", json_real(r.search_bound)},
                {"converged_kld", r.converged_kld},
                {"converged_bs", r.converged_bs},
                {"converged_ig", r.converged_ig},
                {"converged", r.converged()}};
}

Json to_json(const GainPoint& g) {
    return Json{{"delta", g.delta},         {"evidence", json_real(g.evidence)},
                {"surprise", json_real(g.surprise)}, {"kld", json_real(g.kld)},
                {"bs", json_real(g.bs)},    {"ig", json_real(g.ig)},
                {"u", json_real(g.u)},      {"w_post", json_real(g.w_post)},
                {"w_pri", json_real(g.w_pri)}};
}

Json to_json(const AxisRange& range) {
    return Json{{"min", range.min}, {"max", range.max}, {"step", range.step}};
}

Json to_json(const SweepSpec& spec) {
    return Json{{"s_l", to_json(spec.s_l)},
                {"s_p", to_json(spec.s_p)},
                {"epsilon", spec.epsilon},
                {"n", spec.n},
                {"tol", spec.tol},
                {"quadrature", to_json(spec.quadrature)}};
}

Json to_json(const SweepGrid& grid) {
    Json cells = Json::array();
    for (const OptimaRecord& r : grid.records) cells.push_back(to_json(r));
    return Json{{"metadata",
                 {{"tool_version", grid.metadata.tool_version},
                  {"timestamp", grid.metadata.timestamp},
                  {"total_cells", grid.metadata.total_cells},
                  {"failed_cells", grid.metadata.failed_cells}}},
                {"spec", to_json(grid.spec)},
                {"s_l_values", grid.s_l_values},
                {"s_p_values", grid.s_p_values},
                {"cells", std::move(cells)}};
}

void export_json(const SweepGrid& grid, std::ostream& out) {
    out << to_json(grid).dump(2) << '\n';
}

void export_json(const SweepGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    export_json(grid, out);
    if (!out) throw Error("failed writing " + path.string());
}

Json to_json(const InquiryTrace& trace) {
    Json steps = Json::array();
    for (const InquiryStep& s : trace.steps) {
        steps.push_back(Json{{"step", s.index},
                             {"phase", std::string(to_string(s.phase))},
                             {"delta", s.delta},
                             {"surprise", json_real(s.surprise)},
                             {"kld", json_real(s.kld)},
                             {"bs", json_real(s.bs)},
                             {"ig", json_real(s.ig)},
                             {"emotion", std::string(to_string(s.emotion))}});
    }
    return Json{{"params", to_json(trace.config.params)}, {"optima", to_json(trace.optima)}, {"steps", steps}};
}

Json to_json(const EfeBreakdown& b) {
    return Json{{"g", b.g}, {"risk", b.risk}, {"p_f", b.p_f}, {"p_kld", b.p_kld}, {"p_bs", b.p_bs}};
}

DiscretePolicyModel policy_model_from_json(const Json& doc) {
    if (!doc.is_object()) throw ValidationError("policy model must be a JSON object");
    reject_unknown_keys(doc, {"states", "observations", "likelihood", "preference", "policies", "gamma"},
                        "policy model");

    DiscretePolicyModel m;
    m.states = label_array(doc, "states");
    m.observations = label_array(doc, "observations");

    if (!doc.contains("likelihood") || !doc.at("likelihood").is_array())
        throw ValidationError("policy model: 'likelihood' must be an array of rows, one per state");
    const Json& rows = doc.at("likelihood");
    for (std::size_t s = 0; s < rows.size(); ++s)
        m.likelihood.push_back(probability_vector(rows[s], "likelihood row " + std::to_string(s)));

    if (!doc.contains("preference")) throw ValidationError("policy model: field 'preference' is missing");
    m.preference = probability_vector(doc.at("preference"), "preference");

    if (!doc.contains("policies") || !doc.at("policies").is_array())
        throw ValidationError("policy model: 'policies' must be an array");
    const Json& policies = doc.at("policies");
    for (std::size_t k = 0; k < policies.size(); ++k) {
        const Json& p = policies[k];
        const std::string ctx = "policy " + std::to_string(k);
        if (!p.is_object()) throw ValidationError(ctx + " must be an object with 'name' and 'q'");
        reject_unknown_keys(p, {"name", "q"}, ctx.c_str());
        Policy policy;
        policy.name = p.contains("name") ? get_field<std::string>(p, "name", ctx.c_str()) : ctx;
        if (!p.contains("q")) throw ValidationError(ctx + ": field 'q' is missing");
        policy.predicted_states = probability_vector(p.at("q"), ctx + " q");
        m.policies.push_back(std::move(policy));
    }

    if (doc.contains("gamma")) m.gamma = get_field<double>(doc, "gamma", "policy model");
    m.validate();
    return m;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

DiscretePolicyModel load_policy_model(const std::filesystem::path& path) {
    return policy_model_from_json(read_json_file(path));
}

}  // namespace epigain

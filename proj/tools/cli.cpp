#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "epigain/efe.hpp"
#include "epigain/error.hpp"
#include "epigain/inquiry.hpp"
#include "epigain/json_io.hpp"
#include "epigain/model.hpp"
#include "epigain/numerics.hpp"
#include "epigain/optimize.hpp"
#include "epigain/svg.hpp"
#include "epigain/sweep.hpp"

namespace epigain::cli {

namespace {

namespace fs = std::filesystem;

const std::set<std::string> kSubcommands{"eval", "optimize", "sweep", "simulate", "efe"};

bool to_stdout(const std::string& path) { return path.empty() || path == "-"; }

// Runs `write` against the destination; "-" or empty means the out stream.
void write_to(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
    if (to_stdout(path)) {
        write(out);
        out.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot open '" + path + "' for writing");
    write(file);
    file.flush();
    if (!file) throw Error("failed writing '" + path + "'");
}

std::string sibling_path(const std::string& path, const std::string& extension) {
    fs::path p(path);
    p.replace_extension(extension);
    return p.string();
}

void add_model_options(CLI::App* sub, ModelParams& p) {
    sub->add_option("--sp", p.s_p, "Prior variance s_p")->capture_default_str();
    sub->add_option("--sl", p.s_l, "Likelihood variance s_l")->capture_default_str();
    sub->add_option("--eps", p.epsilon, "Uniform likelihood level epsilon")->capture_default_str();
    sub->add_option("--n", p.n, "Number of observations")->capture_default_str();
    sub->add_option("--obs-var", p.obs_var, "Variance of the observed data (n > 1)")->capture_default_str();
}

void add_quadrature_options(CLI::App* sub, QuadratureConfig& q) {
    sub->add_option("--abs-tol", q.abs_tol, "Quadrature absolute tolerance")->capture_default_str();
    sub->add_option("--rel-tol", q.rel_tol, "Quadrature relative tolerance")->capture_default_str();
    sub->add_option("--max-subdiv", q.max_subdivisions, "Quadrature subdivision cap")->capture_default_str();
    sub->add_option("--truncation", q.truncation_sigmas, "Integration half-width in prior+likelihood sd")
        ->capture_default_str();
}

CLI::Option* add_format_option(CLI::App* sub, std::string& format, std::vector<std::string> allowed) {
    return sub->add_option("--format", format, "Output format")
        ->check(CLI::IsMember(std::move(allowed)))
        ->capture_default_str();
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    ModelParams params;
    QuadratureConfig quadrature;
    double delta_max = 20.0;
    int steps = 400;
    std::string out = "-";
    std::string format = "csv";
};

constexpr std::string_view kEvalCsvHeader = "delta,evidence,surprise,f,kld,bs,ig,u,w_post,w_pri";

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    a.params.validate();
    a.quadrature.validate();
    if (!(a.delta_max > 0.0) || !std::isfinite(a.delta_max)) throw ValidationError("--delta-max must be positive");
    if (a.steps < 1) throw ValidationError("--steps must be >= 1");
    if (a.format == "svg" && to_stdout(a.out)) throw ValidationError("--format svg needs a file given with --out");

    std::vector<GainPoint> points;
    std::vector<double> f_values;
    points.reserve(static_cast<std::size_t>(a.steps) + 1);
    for (int i = 0; i <= a.steps; ++i) {
        const double delta = a.delta_max * i / a.steps;
        points.push_back(gain_point(a.params, delta, a.quadrature));
        f_values.push_back(free_energy(a.params, delta));
    }

    auto write_csv = [&](std::ostream& os) {
        os << kEvalCsvHeader << '\n';
        for (std::size_t i = 0; i < points.size(); ++i) {
            const GainPoint& g = points[i];
            os << format_real(g.delta) << ',' << format_real(g.evidence) << ',' << format_real(g.surprise) << ','
               << format_real(f_values[i]) << ',' << format_real(g.kld) << ',' << format_real(g.bs) << ','
               << format_real(g.ig) << ',' << format_real(g.u) << ',' << format_real(g.w_post) << ','
               << format_real(g.w_pri) << '\n';
        }
    };

    if (a.format == "csv") {
        write_to(a.out, out, write_csv);
    } else if (a.format == "json") {
        Json rows = Json::array();
        for (std::size_t i = 0; i < points.size(); ++i) {
            Json row = to_json(points[i]);
            row["f"] = json_real(f_values[i]);
            rows.push_back(std::move(row));
        }
        const Json doc{{"params", to_json(a.params)}, {"points", std::move(rows)}};
        write_to(a.out, out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
    } else {
        svg::Series kld{"KLD", {}, {}, "#1f77b4"}, bs{"BS", {}, {}, "#d62728"}, ig{"IG", {}, {}, "#2ca02c"};
        svg::Series kld_s = kld, bs_s = bs, ig_s = ig;
        for (const GainPoint& g : points) {
            kld.x.push_back(g.delta), kld.y.push_back(g.kld);
            bs.x.push_back(g.delta), bs.y.push_back(g.bs);
            ig.x.push_back(g.delta), ig.y.push_back(g.ig);
            kld_s.x.push_back(g.surprise), kld_s.y.push_back(g.kld);
            bs_s.x.push_back(g.surprise), bs_s.y.push_back(g.bs);
            ig_s.x.push_back(g.surprise), ig_s.y.push_back(g.ig);
        }
        std::ostringstream title;
        title << "s_p = " << a.params.s_p << ", s_l = " << a.params.s_l << ", eps = " << a.params.epsilon;
        svg::LinePlot by_delta{"Information gain vs prediction error (" + title.str() + ")", "prediction error",
                               "information gain", {kld, bs, ig}};
        svg::LinePlot by_surprise{"Information gain vs surprise", "surprise", "information gain",
                                  {kld_s, bs_s, ig_s}};
        const std::string doc = svg::render_stack({by_delta, by_surprise});
        write_to(a.out, out, [&](std::ostream& os) { os << doc; });
        const std::string csv_path = sibling_path(a.out, ".csv");
        write_to(csv_path, out, write_csv);
        err << "wrote " << a.out << " and " << csv_path << '\n';
    }
    return kExitOk;
}

// ------------------------------------------------------------ optimize

struct OptimizeArgs {
    ModelParams params;
    QuadratureConfig quadrature;
    OptimizeOptions options;
    bool strict = false;
    std::string out = "-";
    std::string format = "json";
};

int cmd_optimize(const OptimizeArgs& a, std::ostream& out, std::ostream& err) {
    a.params.validate();
    a.quadrature.validate();
    if (a.options.search_bound < 0.0) throw ValidationError("--delta-max must be positive (or 0 for automatic)");
    if (!(a.options.tol > 0.0)) throw ValidationError("--tol must be positive");

    const OptimaRecord r = find_optima(a.params, a.quadrature, a.options);
    write_to(a.out, out, [&](std::ostream& os) {
        if (a.format == "json") {
            os << to_json(r).dump(2) << '\n';
        } else {
            os << kSweepCsvHeader << '\n';
            write_csv_row(r, os);
        }
    });
    if (!r.converged()) {
        err << "warning: not every objective converged (kld " << r.converged_kld << ", bs " << r.converged_bs
            << ", ig " << r.converged_ig << ")\n";
        if (a.strict) return kExitNumerical;
    }
    return kExitOk;
}

// --------------------------------------------------------------- sweep

struct SweepArgs {
    SweepSpec spec;
    std::string s_l = "1:50:5";
    std::string s_p = "1:50:5";
    int jobs = 0;
    std::string out = "-";
    std::string format = "csv";
    std::string heatmap;
    std::string heatmap_out;
    bool progress = false;
};

int cmd_sweep(SweepArgs a, std::ostream& out, std::ostream& err) {
    a.spec.s_l = parse_range(a.s_l);
    a.spec.s_p = parse_range(a.s_p);
    if (a.jobs < 0) throw ValidationError("--jobs must be >= 0");
    a.spec.worker_count_hint = a.jobs;
    a.spec.validate();
    if (!a.heatmap.empty()) {
        const auto& names = record_field_names();
        if (std::find(names.begin(), names.end(), a.heatmap) == names.end())
            throw ValidationError("--heatmap: unknown field '" + a.heatmap + "'");
        if (a.heatmap_out.empty()) {
            if (to_stdout(a.out)) throw ValidationError("--heatmap needs --heatmap-out when writing to stdout");
            a.heatmap_out = sibling_path(a.out, "." + a.heatmap + ".svg");
        }
    }

    ProgressSink sink;
    if (a.progress) {
        sink = [&err](std::size_t done, std::size_t total) {
            if (done == total || done % 10 == 0) err << "\r" << done << "/" << total << (done == total ? "\n" : "");
        };
    }
    const SweepGrid grid = run_sweep(a.spec, sink);

    write_to(a.out, out, [&](std::ostream& os) {
        if (a.format == "csv")
            export_csv(grid, os);
        else
            export_json(grid, os);
    });
    if (!a.heatmap.empty()) {
        const std::string doc = svg::render(svg::sweep_heatmap(grid, a.heatmap));
        write_to(a.heatmap_out, out, [&](std::ostream& os) { os << doc; });
    }
    if (grid.metadata.failed_cells > 0)
        err << "warning: " << grid.metadata.failed_cells << " of " << grid.metadata.total_cells
            << " cells did not converge\n";
    return kExitOk;
}

// ------------------------------------------------------------ simulate

struct SimulateArgs {
    InquiryConfig config;
    std::string mode = "jump";
    double rate = 0.5;
    std::string out = "-";
    std::string format = "csv";
};

int cmd_simulate(SimulateArgs a, std::ostream& out, std::ostream& err) {
    a.config.step_mode = a.mode == "jump" ? StepMode::jump() : StepMode::relax(a.rate);
    a.config.validate();
    if (a.format == "svg" && to_stdout(a.out)) throw ValidationError("--format svg needs a file given with --out");

    const InquiryTrace trace = simulate(a.config);
    auto write_csv = [&](std::ostream& os) { export_trace_csv(trace, os); };
    if (a.format == "csv") {
        write_to(a.out, out, write_csv);
    } else if (a.format == "json") {
        write_to(a.out, out, [&](std::ostream& os) { os << to_json(trace).dump(2) << '\n'; });
    } else {
        const std::string doc = svg::render_trace(trace);
        write_to(a.out, out, [&](std::ostream& os) { os << doc; });
        const std::string csv_path = sibling_path(a.out, ".csv");
        write_to(csv_path, out, write_csv);
        err << "wrote " << a.out << " and " << csv_path << '\n';
    }
    return kExitOk;
}

// ----------------------------------------------------------------- efe

struct EfeArgs {
    std::string model;
    double gamma = -1.0;  // negative: use the model's value
    bool check = false;
    std::string out = "-";
    std::string format = "json";
};

int cmd_efe(const EfeArgs& a, std::ostream& out, std::ostream& err) {
    DiscretePolicyModel model = load_policy_model(a.model);
    if (a.gamma >= 0.0) model.gamma = a.gamma;
    model.validate();

    std::vector<EfeBreakdown> rows;
    double max_gap = 0.0;
    for (std::size_t k = 0; k < model.policies.size(); ++k) {
        rows.push_back(efe_decompose(model, k));
        max_gap = std::max(max_gap, std::fabs(rows.back().reconstructed() - efe_direct(model, k)));
    }
    const std::vector<double> prior = policy_prior(rows, model.gamma);

    write_to(a.out, out, [&](std::ostream& os) {
        if (a.format == "json") {
            Json policies = Json::array();
            for (std::size_t k = 0; k < rows.size(); ++k) {
                Json p{{"name", model.policies[k].name}};
                p.update(to_json(rows[k]));
                p["prior"] = prior[k];
                policies.push_back(std::move(p));
            }
            Json doc{{"gamma", model.gamma}, {"policies", std::move(policies)}};
            if (a.check) doc["identity_max_gap"] = max_gap;
            os << doc.dump(2) << '\n';
        } else {
            os << "policy,g,risk,p_f,p_kld,p_bs,prior\n";
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const EfeBreakdown& b = rows[k];
                os << model.policies[k].name << ',' << format_real(b.g) << ',' << format_real(b.risk) << ','
                   << format_real(b.p_f) << ',' << format_real(b.p_kld) << ',' << format_real(b.p_bs) << ','
                   << format_real(prior[k]) << '\n';
            }
        }
    });

    if (a.check) {
        const bool ok = max_gap <= kEfeIdentityTol;
        err << "identity check " << (ok ? "passed" : "FAILED") << ": max |risk + p_f - p_kld - p_bs - G| = "
            << format_real(max_gap) << '\n';
        if (!ok) return kExitNumerical;
    }
    return kExitOk;
}

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Information gains, optimal surprise and expected free energy under a Gaussian model", "epigain"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", EPIGAIN_VERSION);
    app.require_subcommand(1);
    // Consumed by expand_config before parsing; declared so it shows in --help.
    std::string config_unused;
    app.add_option("--config", config_unused, "JSON file with option values; explicit flags override it");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Tabulate evidence, surprise and gains over a uniform delta grid");
    add_model_options(eval_cmd, eval.params);
    add_quadrature_options(eval_cmd, eval.quadrature);
    eval_cmd->add_option("--delta-max", eval.delta_max, "Largest prediction error")->capture_default_str();
    eval_cmd->add_option("--steps", eval.steps, "Number of grid intervals")->capture_default_str();
    eval_cmd->add_option("--out", eval.out, "Output path, - for stdout")->capture_default_str();
    add_format_option(eval_cmd, eval.format, {"csv", "json", "svg"});

    OptimizeArgs opt;
    auto* opt_cmd = app.add_subcommand("optimize", "Optimal prediction errors and surprises for one parameter set");
    add_model_options(opt_cmd, opt.params);
    add_quadrature_options(opt_cmd, opt.quadrature);
    opt_cmd->add_option("--delta-max", opt.options.search_bound, "Search bound, 0 for automatic")
        ->capture_default_str();
    opt_cmd->add_option("--tol", opt.options.tol, "Optimizer tolerance in delta")->capture_default_str();
    opt_cmd->add_option("--max-widenings", opt.options.max_widenings, "Bound doublings allowed")
        ->capture_default_str();
    opt_cmd->add_flag("--strict", opt.strict, "Exit 3 if any objective fails to converge");
    opt_cmd->add_option("--out", opt.out, "Output path, - for stdout")->capture_default_str();
    add_format_option(opt_cmd, opt.format, {"json", "csv"});

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Optima over a rectangular (s_l, s_p) grid");
    sweep_cmd->add_option("--sl", sweep.s_l, "s_l axis as min:max:step")->capture_default_str();
    sweep_cmd->add_option("--sp", sweep.s_p, "s_p axis as min:max:step")->capture_default_str();
    sweep_cmd->add_option("--eps", sweep.spec.epsilon, "Uniform likelihood level epsilon")->capture_default_str();
    sweep_cmd->add_option("--n", sweep.spec.n, "Number of observations")->capture_default_str();
    sweep_cmd->add_option("--tol", sweep.spec.tol, "Optimizer tolerance in delta")->capture_default_str();
    add_quadrature_options(sweep_cmd, sweep.spec.quadrature);
    sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads, 0 for all cores")
        ->envname("EPIGAIN_JOBS")
        ->capture_default_str();
    sweep_cmd->add_option("--out", sweep.out, "Output path, - for stdout")->capture_default_str();
    add_format_option(sweep_cmd, sweep.format, {"csv", "json"});
    sweep_cmd->add_option("--heatmap", sweep.heatmap, "Also render this record field as an SVG heatmap");
    sweep_cmd->add_option("--heatmap-out", sweep.heatmap_out, "Heatmap path (default: next to --out)");
    sweep_cmd->add_flag("--progress", sweep.progress, "Report progress on stderr");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Alternate diversive and specific phases of the inquiry cycle");
    add_model_options(sim_cmd, sim.config.params);
    add_quadrature_options(sim_cmd, sim.config.quadrature);
    sim_cmd->add_option("--delta0", sim.config.initial_delta, "Initial prediction error")->capture_default_str();
    sim_cmd->add_option("--cycles", sim.config.cycles, "Number of full cycles")->capture_default_str();
    sim_cmd->add_option("--mode", sim.mode, "Step dynamics")
        ->check(CLI::IsMember({"jump", "relax"}))
        ->capture_default_str();
    sim_cmd->add_option("--rate", sim.rate, "Relaxation rate in (0, 1]")->capture_default_str();
    sim_cmd->add_option("--arrival-tol", sim.config.arrival_tol, "Phase switch tolerance in relax mode")
        ->capture_default_str();
    sim_cmd->add_option("--boredom-frac", sim.config.thresholds.boredom_frac, "Boredom threshold as a fraction of S_KLD")
        ->capture_default_str();
    sim_cmd->add_option("--confusion-frac", sim.config.thresholds.confusion_frac,
                        "Confusion threshold as a multiple of S_BS")
        ->capture_default_str();
    sim_cmd->add_option("--delta-max", sim.config.optimize.search_bound, "Optimizer search bound, 0 for automatic")
        ->capture_default_str();
    sim_cmd->add_option("--out", sim.out, "Output path, - for stdout")->capture_default_str();
    add_format_option(sim_cmd, sim.format, {"csv", "json", "svg"});

    EfeArgs efe;
    auto* efe_cmd = app.add_subcommand("efe", "Expected free energy decomposition of a discrete policy model");
    efe_cmd->add_option("--model", efe.model, "Policy model JSON file")->required();
    efe_cmd->add_option("--gamma", efe.gamma, "Policy precision, overrides the model file");
    efe_cmd->add_flag("--check", efe.check, "Verify the decomposition identity, exit 3 on violation");
    efe_cmd->add_option("--out", efe.out, "Output path, - for stdout")->capture_default_str();
    add_format_option(efe_cmd, efe.format, {"json", "csv"});

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const std::string& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    if (efe_cmd->parsed() && efe.gamma < 0.0 && efe_cmd->count("--gamma") > 0)
        throw ValidationError("--gamma must be nonnegative");

    if (eval_cmd->parsed()) return cmd_eval(eval, out, err);
    if (opt_cmd->parsed()) return cmd_optimize(opt, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, out, err);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out, err);
    return cmd_efe(efe, out, err);
}

std::string config_token(const std::string& key, const Json& value) {
    std::string flag = "--" + key;
    if (value.is_string()) return flag + "=" + value.get<std::string>();
    if (value.is_number()) return flag + "=" + value.dump();
    throw ValidationError("config: value of '" + key + "' must be a string, number or boolean");
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i > 0 && args[i] == "--config") {
            if (i + 1 >= args.size()) throw ValidationError("--config needs a file argument");
            config_path = args[++i];
        } else if (i > 0 && args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (config_path.empty()) return rest;

    const Json doc = read_json_file(config_path);
    if (!doc.is_object()) throw ValidationError("config: top level must be a JSON object");
    const auto sub_it = std::find_if(rest.begin() + (rest.empty() ? 0 : 1), rest.end(),
                                     [](const std::string& a) { return kSubcommands.count(a) > 0; });
    if (sub_it == rest.end()) throw ValidationError("config: a subcommand is required");

    // Flat keys apply to whichever subcommand runs; a section named after the
    // subcommand overrides them.
    Json settings = Json::object();
    for (const auto& item : doc.items())
        if (!kSubcommands.count(item.key())) settings[item.key()] = item.value();
    if (doc.contains(*sub_it)) {
        if (!doc.at(*sub_it).is_object()) throw ValidationError("config: section '" + *sub_it + "' must be an object");
        for (const auto& item : doc.at(*sub_it).items()) settings[item.key()] = item.value();
    }

    std::vector<std::string> injected;
    for (const auto& item : settings.items()) {
        std::string key = item.key();
        key.erase(0, key.find_first_not_of('-'));
        const Json& value = item.value();
        if (value.is_null()) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) injected.push_back("--" + key);
            continue;
        }
        injected.push_back(config_token(key, value));
    }
    std::vector<std::string> expanded(rest.begin(), sub_it + 1);
    expanded.insert(expanded.end(), injected.begin(), injected.end());
    expanded.insert(expanded.end(), sub_it + 1, rest.end());
    return expanded;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run_parsed(expand_config(args), out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DomainError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const QuadratureError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ConvergenceError& e) {
        err << "convergence error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const OptimizerError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return run_cli(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace epigain::cli

#include "epigain/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "epigain/error.hpp"

namespace epigain {

std::size_t AxisRange::count() const {
    // Small slack so that e.g. 1:50:0.1 includes 50 despite rounding.
    return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

std::vector<double> AxisRange::values() const {
    std::vector<double> out(count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = min + static_cast<double>(i) * step;
    return out;
}

void AxisRange::validate(std::string_view axis) const {
    const std::string name(axis);
    if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(step))
        throw ValidationError(name + ": range values must be finite");
    if (!(min > 0.0)) throw ValidationError(name + ": range minimum must be positive");
    if (!(step > 0.0)) throw ValidationError(name + ": range step must be positive");
    if (max < min) throw ValidationError(name + ": range maximum is below minimum");
}

AxisRange parse_range(std::string_view text) {
    std::vector<double> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t colon = text.find(':', start);
        const std::string piece(text.substr(start, colon == std::string_view::npos ? text.npos : colon - start));
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(piece, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (piece.empty() || used != piece.size())
            throw ValidationError("malformed range '" + std::string(text) + "', expected min:max:step");
        parts.push_back(value);
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (parts.size() == 1) return {parts[0], parts[0], 1.0};
    if (parts.size() != 3)
        throw ValidationError("malformed range '" + std::string(text) + "', expected min:max:step");
    return {parts[0], parts[1], parts[2]};
}

void SweepSpec::validate() const {
    s_l.validate("s_l");
    s_p.validate("s_p");
    if (!(epsilon >= 0.0)) throw ValidationError("sweep: epsilon must be nonnegative");
    if (n < 1) throw ValidationError("sweep: n must be >= 1");
    if (!(tol > 0.0)) throw ValidationError("sweep: tol must be positive");
    quadrature.validate();
}

ModelParams cell_params(const SweepSpec& spec, double s_l, double s_p) {
    ModelParams p;
    p.s_l = s_l;
    p.s_p = s_p;
    p.n = spec.n;
    p.epsilon = spec.epsilon;
    return p;
}

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

OptimaRecord failed_record(const ModelParams& params) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    OptimaRecord r;
    r.params = params;
    r.delta_kld = r.delta_bs = r.delta_ig = nan;
    r.s_kld = r.s_bs = r.s_ig = nan;
    r.max_kld = r.max_bs = r.max_ig = nan;
    r.d_delta = r.d_s = nan;
    return r;
}

}  // namespace

SweepGrid run_sweep(const SweepSpec& spec, const ProgressSink& progress) {
    spec.validate();
    SweepGrid grid;
    grid.spec = spec;
    grid.s_l_values = spec.s_l.values();
    grid.s_p_values = spec.s_p.values();
    const std::size_t total = grid.s_l_values.size() * grid.s_p_values.size();
    grid.records.resize(total);

    OptimizeOptions options;
    options.tol = spec.tol;

    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex progress_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= total) return;
            const double s_l = grid.s_l_values[idx / grid.s_p_values.size()];
            const double s_p = grid.s_p_values[idx % grid.s_p_values.size()];
            const ModelParams params = cell_params(spec, s_l, s_p);
            try {
                grid.records[idx] = find_optima(params, spec.quadrature, options);
            } catch (const Error&) {
                grid.records[idx] = failed_record(params);
            }
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(++done, total);
            }
        }
    };

    std::size_t workers = spec.worker_count_hint > 0 ? static_cast<std::size_t>(spec.worker_count_hint)
                                                     : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(total, 1));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }

    grid.metadata.tool_version = EPIGAIN_VERSION;
    grid.metadata.timestamp = utc_timestamp();
    grid.metadata.total_cells = total;
    for (const OptimaRecord& r : grid.records)
        if (!r.converged()) ++grid.metadata.failed_cells;
    return grid;
}

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

const std::vector<std::string>& record_field_names() {
    static const std::vector<std::string> names{"max_kld", "max_bs",  "max_ig", "delta_kld", "delta_bs",
                                                "delta_ig", "s_kld",  "s_bs",   "s_ig",      "d_delta",
                                                "d_s"};
    return names;
}

double record_field(const OptimaRecord& r, std::string_view name) {
    if (name == "max_kld") return r.max_kld;
    if (name == "max_bs") return r.max_bs;
    if (name == "max_ig") return r.max_ig;
    if (name == "delta_kld") return r.delta_kld;
    if (name == "delta_bs") return r.delta_bs;
    if (name == "delta_ig") return r.delta_ig;
    if (name == "s_kld") return r.s_kld;
    if (name == "s_bs") return r.s_bs;
    if (name == "s_ig") return r.s_ig;
    if (name == "d_delta") return r.d_delta;
    if (name == "d_s") return r.d_s;
    throw ValidationError("unknown record field '" + std::string(name) + "'");
}

void write_csv_row(const OptimaRecord& r, std::ostream& out) {
    out << format_real(r.params.s_l) << ',' << format_real(r.params.s_p);
    for (const std::string& name : record_field_names()) out << ',' << format_real(record_field(r, name));
    out << ',' << (r.converged() ? 1 : 0) << '\n';
}

std::size_t export_csv(const SweepGrid& grid, std::ostream& out) {
    out << kSweepCsvHeader << '\n';
    std::size_t rows = 0;
    for (std::size_t i = 0; i < grid.s_l_values.size(); ++i) {
        for (std::size_t j = 0; j < grid.s_p_values.size(); ++j) {
            write_csv_row(grid.at(i, j), out);
            ++rows;
        }
    }
    if (!out) throw Error("failed to write sweep CSV");
    return rows;
}

std::size_t export_csv(const SweepGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return export_csv(grid, out);
}

std::vector<SweepCsvRow> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kSweepCsvHeader) throw ValidationError("sweep CSV: unexpected header");
    std::vector<SweepCsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        if (v.size() != 14) throw ValidationError("sweep CSV: expected 14 columns in '" + line + "'");
        rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11], v[12],
                        v[13] != 0.0});
    }
    return rows;
}

}  // namespace epigain

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "epigain/optimize.hpp"
#include "epigain/quadrature.hpp"

namespace epigain {

/// Inclusive arithmetic progression min, min + step, ..., <= max.
struct AxisRange {
    double min = 1.0;
    double max = 1.0;
    double step = 1.0;

    std::size_t count() const;
    std::vector<double> values() const;
    void validate(std::string_view axis) const;

    bool operator==(const AxisRange&) const = default;
};

/// Parses "min:max:step" or a single value "v" (a one-point axis).
AxisRange parse_range(std::string_view text);

struct SweepSpec {
    AxisRange s_l{1.0, 50.0, 5.0};
    AxisRange s_p{1.0, 50.0, 5.0};
    double epsilon = 1e-3;
    int n = 1;
    QuadratureConfig quadrature;
    double tol = 1e-5;
    /// 0 picks the available hardware concurrency.
    int worker_count_hint = 0;

    void validate() const;
    std::size_t cell_count() const { return s_l.count() * s_p.count(); }
};

struct SweepMetadata {
    std::string tool_version;
    std::string timestamp;
    std::size_t total_cells = 0;
    std::size_t failed_cells = 0;
};

/// Row-major by s_l, then s_p.
struct SweepGrid {
    SweepSpec spec;
    std::vector<double> s_l_values;
    std::vector<double> s_p_values;
    std::vector<OptimaRecord> records;
    SweepMetadata metadata;

    const OptimaRecord& at(std::size_t i_l, std::size_t i_p) const {
        return records[i_l * s_p_values.size() + i_p];
    }
};

/// Called with (cells finished, total cells); invocations are serialized.
using ProgressSink = std::function<void(std::size_t, std::size_t)>;

/// Evaluates find_optima on every cell. Cells run independently across
/// worker threads; the result order never depends on completion order.
SweepGrid run_sweep(const SweepSpec& spec, const ProgressSink& progress = {});

/// Parameters used for the cell at (s_l, s_p).
ModelParams cell_params(const SweepSpec& spec, double s_l, double s_p);

inline constexpr std::string_view kSweepCsvHeader =
    "s_l,s_p,max_kld,max_bs,max_ig,delta_kld,delta_bs,delta_ig,s_kld,s_bs,s_ig,d_delta,d_s,converged";

/// One CSV data row (no header) for a record, keyed by its own s_l and s_p.
void write_csv_row(const OptimaRecord& record, std::ostream& out);

/// Writes the header and one row per cell; returns the number of data rows.
std::size_t export_csv(const SweepGrid& grid, std::ostream& out);
std::size_t export_csv(const SweepGrid& grid, const std::filesystem::path& path);

struct SweepCsvRow {
    double s_l = 0.0;
    double s_p = 0.0;
    double max_kld = 0.0;
    double max_bs = 0.0;
    double max_ig = 0.0;
    double delta_kld = 0.0;
    double delta_bs = 0.0;
    double delta_ig = 0.0;
    double s_kld = 0.0;
    double s_bs = 0.0;
    double s_ig = 0.0;
    double d_delta = 0.0;
    double d_s = 0.0;
    bool converged = false;
};

std::vector<SweepCsvRow> read_sweep_csv(std::istream& in);

/// 9 significant digits, the rendering used by every CSV export.
std::string format_real(double value);

/// Names accepted by record_field (the numeric CSV columns after s_l, s_p).
const std::vector<std::string>& record_field_names();
double record_field(const OptimaRecord& record, std::string_view name);

}  // namespace epigain

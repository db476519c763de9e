#pragma once

// JSON encoding of parameters, optima, sweep grids and discrete policy models.

#include <filesystem>
#include <iosfwd>
#include <span>

#include "json.hpp"

#include "epigain/efe.hpp"
#include "epigain/inquiry.hpp"
#include "epigain/model.hpp"
#include "epigain/numerics.hpp"
#include "epigain/optimize.hpp"
#include "epigain/quadrature.hpp"
#include "epigain/sweep.hpp"

namespace epigain {

using Json = nlohmann::ordered_json;

Json to_json(const ModelParams& params);
/// Missing keys keep the values already in `base`. Unknown keys are rejected.
ModelParams params_from_json(const Json& doc, ModelParams base = {});

Json to_json(const QuadratureConfig& cfg);
Json to_json(const OptimaRecord& record);
Json to_json(const GainPoint& point);
Json to_json(const AxisRange& range);
Json to_json(const SweepSpec& spec);

/// One object per cell in row-major order, wrapped with the sweep settings.
Json to_json(const SweepGrid& grid);
void export_json(const SweepGrid& grid, std::ostream& out);
void export_json(const SweepGrid& grid, const std::filesystem::path& path);

Json to_json(const InquiryTrace& trace);

Json to_json(const EfeBreakdown& breakdown);

/// Parses and validates a policy model document. Schema violations throw
/// ValidationError with a message naming the offending field or row.
DiscretePolicyModel policy_model_from_json(const Json& doc);
DiscretePolicyModel load_policy_model(const std::filesystem::path& path);

/// Reads a JSON file, throwing ValidationError on I/O or parse failure.
Json read_json_file(const std::filesystem::path& path);

/// Non-finite reals become null so the document stays valid JSON.
Json json_real(double value);

}  // namespace epigain

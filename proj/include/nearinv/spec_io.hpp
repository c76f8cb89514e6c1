#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "nearinv/factorization.hpp"

namespace nearinv {

/// One space specification: the ambient, the contractively contained M
/// with its metric, an optional defect space, and the inner function.
/// Complex numbers are serialized as [re, im] pairs; a series is an array
/// over degrees of coefficient rows, each row holding n pairs.
struct LoadedSpec {
    ContractiveSpace space;
    std::optional<DefectSpace> defect;
    InnerFunction inner;
};

LoadedSpec parse_spec(const nlohmann::json& j);
LoadedSpec load_spec(const std::filesystem::path& file);
nlohmann::ordered_json serialize_spec(const LoadedSpec& spec);

bool specs_equal(const LoadedSpec& a, const LoadedSpec& b);

nlohmann::ordered_json series_to_json(const TruncatedSeries& s);
TruncatedSeries series_from_json(const nlohmann::json& j, int components, int degree,
                                 const std::string& path);

/// Machine-readable run report, schema version 1. Every numeric claim is
/// recomputable from the inputs: tolerances and the coefficient window
/// ride along.
nlohmann::ordered_json check_report_json(const LoadedSpec& spec,
                                         const NearInvarianceCertificate& cert,
                                         const NormHypothesisResult& ratio, double tol);
nlohmann::ordered_json factorize_report_json(const LoadedSpec& spec,
                                             const SpaceFactorization& fact);

} // namespace nearinv

#pragma once

// JSON forms of tau, rank reports and normality verdicts.

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "pnormal/normality.hpp"

namespace pnormal {

using ojson = nlohmann::ordered_json;

/// {"g": int, "re": [[...]], "im": [[...]]}, row-major full matrices.
ojson tau_to_json(const RiemannMatrix& tau);
/// Revalidates symmetry and positivity. Throws InvalidInput.
RiemannMatrix tau_from_json(const nlohmann::json& j);
/// Parse errors are reported with their line and column.
RiemannMatrix load_tau_file(const std::filesystem::path& path);

/// {"rank", "expected", "margin": float or "inf", "stable", "sv_head", "sv_tail"}.
/// sv_head holds the leading singular values, sv_tail those on either side of the rank cut.
ojson rank_report_json(const RankReport& r);

/// The report written by `check`.
ojson verdict_json(const NormalityVerdict& v, const Tolerances& tol, std::uint64_t seed);

/// Compact form shared by the report's margin fields.
ojson margin_json(double margin);

}  // namespace pnormal

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracasym/coeffexpr.hpp"
#include "fracasym/hypotheses.hpp"
#include "fracasym/meshfun.hpp"
#include "fracasym/solver.hpp"
#include "fracasym/verify.hpp"

namespace fracasym {

using nlohmann::json;

/// Finite values as numbers; inf, -inf and nan as the strings "inf", "-inf", "nan".
json number(double v);
/// Inverse of number(); throws ParseError on anything else.
double read_number(const json& j, const char* what);

/// "%.17g".
std::string format_full(double v);

/// {"expr": text} or {"samples": [[t, v], ...]}, with optional
/// "envelope": {"A": .., "p": .., "valid_from": ..}.
Coefficient coefficient_from_json(const json& j);
/// {"source": .., "envelope": ..} for reports.
json coefficient_summary(const Coefficient& c);
/// Inverse of coefficient_from_json for unscaled coefficients.
json coefficient_to_json(const Coefficient& c);
Coefficient load_coefficient(const std::filesystem::path& path);

/// Comma-separated, header row, LF line endings, values in "%.17g".
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};
void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Throws ParseError on ragged rows, non-numeric cells or a missing header.
CsvTable read_csv(const std::filesystem::path& path);

/// Recovers (t_max, n, grading) from node positions; ParseError when the
/// nodes are not a graded grid to 1e-9 relative.
GridPtr infer_grid(std::span<const double> t);

/// Column "t" plus one value column. Row 0 of a singular function holds its
/// head coefficient, so the caller supplies the exponent when reading.
CsvTable grid_function_table(const GridFunction& f, const std::string& name = "value");
GridFunction read_grid_function(const std::filesystem::path& path,
                                std::optional<double> singular_exponent = std::nullopt,
                                const std::string& column = "");

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

json to_json(const TailModel& m);
json to_json(const Thm1Report& r);
json to_json(const Thm2Report& r);
json to_json(const Thm3Report& r);
json to_json(const Lemma1Profile& p);
json to_json(const Lemma2Report& r);
json to_json(const FDivergence& d);
json to_json(const SolveResult& r);
json to_json(const ResidualReport& r);
json to_json(const AsymptoticReport& r);
json to_json(const BoundaryLimits& b);
json to_json(const Prop1Certificate& c);

}  // namespace fracasym

#pragma once

#include "l2elogit/mm_solver.hpp"
#include "l2elogit/path.hpp"
#include "l2elogit/sim.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace l2e {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum class NaPolicy { Error, DropRow };

NaPolicy na_policy_from_string(const std::string& name);

struct TabularInput {
  std::string path;
  /// ' ' splits on runs of blanks and tabs instead of a single character.
  char delimiter = ',';
  bool header = true;
  /// Label column by header name; takes precedence over label_index.
  std::string label_name;
  /// Zero-based label column; when neither is set, the last column is used.
  std::optional<std::size_t> label_index;
  NaPolicy na_policy = NaPolicy::Error;
  /// Label value mapped to 1 when labels are strings; the other value maps to 0.
  std::optional<std::string> positive;
  bool standardize = false;
};

struct LoadedData {
  Dataset data;
  std::vector<std::string> feature_names;
  std::string label_name;
  std::size_t dropped_rows = 0;
};

/// RFC 4180 records (quoted fields, doubled quotes, embedded newlines).
std::vector<std::vector<std::string>> parse_delimited(std::istream& in, char delimiter);

LoadedData load_dataset(const TabularInput& input);
LoadedData load_dataset(std::istream& in, const TabularInput& input);

/// "%.17g" for finite values; nan/inf spelled out.
std::string format_double(double v);

/// JSON text with every floating-point number printed to 17 significant
/// digits. Non-finite numbers become null.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const Coefficients& c);
Coefficients coefficients_from_json(const Json& j);

Json to_json(const FitDiagnostics& d);
FitDiagnostics diagnostics_from_json(const Json& j);

/// The optional dataset adds the original-scale intercept and coefficients.
Json to_json(const FitResult& fit, const Dataset* data = nullptr);
FitResult fit_from_json(const Json& j);

Json to_json(const CVResult& cv, const Dataset* data = nullptr);
CVResult cv_from_json(const Json& j);

Json to_json(const ReplicateReport& report);

/// Long table: lambda, coef_index (0 is the intercept), value, objective.
void write_path_tsv(std::ostream& out, const RegularizationPath& path);

/// Per-estimator coefficient summaries and selection counts.
void write_report_tsv(std::ostream& out, const ReplicateReport& report);

/// lambda, l1_norm_of_beta, coef_index, value (intercept omitted).
void emit_plot_data(std::ostream& out, const RegularizationPath& path);

/// lambda, criterion, mad_low, mad_high.
void emit_plot_data(std::ostream& out, const CVResult& cv);

}  // namespace l2e

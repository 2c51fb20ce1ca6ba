#include "l2elogit/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace l2e {

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t'; }

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (is_blank(s[b]) || s[b] == '\r')) ++b;
  while (e > b && (is_blank(s[e - 1]) || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

bool is_na(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan" ||
         cell == "?" || cell == "null";
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string describe_column(std::size_t col, const std::vector<std::string>& header) {
  std::string s = "column " + std::to_string(col + 1);
  if (col < header.size() && !header[col].empty()) s += " ('" + header[col] + "')";
  return s;
}

}  // namespace

NaPolicy na_policy_from_string(const std::string& name) {
  if (name == "error") return NaPolicy::Error;
  if (name == "drop_row" || name == "drop") return NaPolicy::DropRow;
  throw ConfigError("unknown NA policy '" + name + "' (expected error or drop_row)");
}

std::vector<std::vector<std::string>> parse_delimited(std::istream& in, char delimiter) {
  const bool whitespace = delimiter == ' ';
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;  // whitespace mode: a field is pending
  bool was_quoted = false;

  auto end_field = [&] {
    record.push_back(was_quoted ? field : trim(field));
    field.clear();
    field_started = false;
    was_quoted = false;
  };
  auto end_record = [&] {
    if (!whitespace || field_started) end_field();
    bool blank = record.empty() || (record.size() == 1 && record[0].empty());
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      in_quotes = true;
      was_quoted = true;
      field_started = true;
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      // CRLF handled by the following '\n'
    } else if (whitespace && is_blank(c)) {
      if (field_started) end_field();
    } else if (!whitespace && c == delimiter) {
      end_field();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field at end of input");
  if (!field.empty() || !record.empty() || field_started) end_record();
  return records;
}

LoadedData load_dataset(const TabularInput& input) {
  std::ifstream in(input.path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + input.path + "'");
  return load_dataset(in, input);
}

LoadedData load_dataset(std::istream& in, const TabularInput& input) {
  auto records = parse_delimited(in, input.delimiter);
  if (records.empty()) throw DataError("input is empty");

  std::vector<std::string> header;
  std::size_t first = 0;
  if (input.header) {
    header = records[0];
    first = 1;
  }
  if (records.size() <= first) throw DataError("input has a header but no data rows");

  const std::size_t width = input.header ? header.size() : records[first].size();
  if (width < 2) throw DataError("need at least one covariate column and a label column");
  for (std::size_t r = first; r < records.size(); ++r) {
    if (records[r].size() != width)
      throw DataError(fmt::format("row {} has {} fields, expected {}", r - first + 1,
                                  records[r].size(), width));
  }

  std::size_t label_col = width - 1;
  if (!input.label_name.empty()) {
    if (!input.header) {
      // Without a header a numeric name is read as a 1-based index.
      auto idx = parse_number(input.label_name);
      if (!idx || *idx < 1 || *idx > static_cast<double>(width) || *idx != std::floor(*idx))
        throw ConfigError("label '" + input.label_name + "' needs a header row");
      label_col = static_cast<std::size_t>(*idx) - 1;
    } else {
      auto it = std::find(header.begin(), header.end(), input.label_name);
      if (it == header.end()) throw ConfigError("no column named '" + input.label_name + "'");
      label_col = static_cast<std::size_t>(it - header.begin());
    }
  } else if (input.label_index) {
    if (*input.label_index >= width)
      throw ConfigError(fmt::format("label column {} out of range ({} columns)",
                                    *input.label_index, width));
    label_col = *input.label_index;
  }

  LoadedData out;
  for (std::size_t j = 0; j < width; ++j) {
    if (j == label_col) continue;
    out.feature_names.push_back(input.header ? header[j] : fmt::format("x{}", j + 1));
  }
  out.label_name = input.header ? header[label_col] : "y";

  const std::size_t p = width - 1;
  std::vector<double> values;
  std::vector<std::string> labels;
  std::vector<std::size_t> source_row;
  for (std::size_t r = first; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t row = r - first + 1;
    bool drop = false;
    std::vector<double> parsed;
    parsed.reserve(p);
    for (std::size_t j = 0; j < width && !drop; ++j) {
      const std::string& cell = rec[j];
      if (is_na(cell)) {
        if (input.na_policy == NaPolicy::DropRow) {
          drop = true;
          break;
        }
        throw DataError(fmt::format("missing value at row {}, {}", row,
                                    describe_column(j, header)));
      }
      if (j == label_col) continue;
      auto v = parse_number(cell);
      if (!v)
        throw DataError(fmt::format("non-numeric value '{}' at row {}, {}", cell, row,
                                    describe_column(j, header)));
      parsed.push_back(*v);
    }
    if (drop) {
      ++out.dropped_rows;
      continue;
    }
    values.insert(values.end(), parsed.begin(), parsed.end());
    labels.push_back(rec[label_col]);
    source_row.push_back(row);
  }
  if (labels.empty()) throw DataError("no rows left after dropping missing values");

  const Index n = static_cast<Index>(labels.size());
  Vector y(n);
  if (input.positive) {
    std::optional<std::string> negative;
    for (Index i = 0; i < n; ++i) {
      const std::string& s = labels[static_cast<std::size_t>(i)];
      if (s == *input.positive) {
        y[i] = 1.0;
        continue;
      }
      if (negative && *negative != s)
        throw DataError(fmt::format("label '{}' at row {} is a third class (seen '{}' and '{}')",
                                    s, source_row[static_cast<std::size_t>(i)], *input.positive,
                                    *negative));
      negative = s;
      y[i] = 0.0;
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      const std::string& s = labels[static_cast<std::size_t>(i)];
      auto v = parse_number(s);
      if (!v || (*v != 0.0 && *v != 1.0))
        throw DataError(fmt::format(
            "label '{}' at row {} is not 0 or 1 (pass a positive value for string labels)", s,
            source_row[static_cast<std::size_t>(i)]));
      y[i] = *v;
    }
  }

  Matrix raw(n, static_cast<Index>(p));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < static_cast<Index>(p); ++j)
      raw(i, j) = values[static_cast<std::size_t>(i) * p + static_cast<std::size_t>(j)];
  out.data = Dataset::from_raw(raw, y, input.standardize);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

namespace {

bool is_scalar(const Json& j) { return !j.is_object() && !j.is_array(); }

void write_json(std::string& out, const Json& j, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write_json(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out.push_back('}');
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool flat = std::all_of(j.begin(), j.end(), is_scalar);
      out.push_back('[');
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += flat && indent >= 0 ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        write_json(out, v, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out.push_back(']');
      return;
    }
    case Json::value_t::number_float: {
      double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

double num(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json vec_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Vector vec_from_json(const Json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = num(j[i]);
  return v;
}

std::vector<double> stdvec_from_json(const Json& j) {
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) v.push_back(num(x));
  return v;
}

Json mat_json(const Matrix& m) {
  Json data = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix mat_from_json(const Json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const Json& data = j.at("data");
  if (data.size() != static_cast<std::size_t>(rows * cols))
    throw DataError("matrix payload has the wrong number of entries");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) m(i, k) = num(data[static_cast<std::size_t>(i * cols + k)]);
  return m;
}

void require_schema(const Json& j) {
  if (!j.contains("schema") || j["schema"].get<int>() != kSchemaVersion)
    throw DataError("unsupported or missing schema version");
}

Json counts_json(const std::vector<SelectionCounts>& counts) {
  Json a = Json::array();
  for (const auto& c : counts) a.push_back(Json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}});
  return a;
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  write_json(out, j, indent, 0);
  if (indent >= 0) out.push_back('\n');
  return out;
}

Json to_json(const Coefficients& c) { return Json{{"beta0", c.beta0}, {"beta", vec_json(c.beta)}}; }

Coefficients coefficients_from_json(const Json& j) {
  return {num(j.at("beta0")), vec_from_json(j.at("beta"))};
}

Json to_json(const FitDiagnostics& d) {
  return Json{{"iterations", d.iterations},
              {"converged", d.converged},
              {"kkt_max_violation", d.kkt_max_violation},
              {"objective", d.objective_trace.empty() ? 0.0 : d.objective_trace.back()},
              {"objective_trace", vec_json(d.objective_trace)}};
}

FitDiagnostics diagnostics_from_json(const Json& j) {
  FitDiagnostics d;
  d.iterations = j.at("iterations").get<int>();
  d.converged = j.at("converged").get<bool>();
  d.kkt_max_violation = num(j.at("kkt_max_violation"));
  d.objective_trace = stdvec_from_json(j.at("objective_trace"));
  return d;
}

Json to_json(const FitResult& fit, const Dataset* data) {
  Json j{{"schema", kSchemaVersion},
         {"type", "fit"},
         {"loss", to_string(fit.loss_kind)},
         {"lambda", fit.penalty.lambda},
         {"alpha", fit.penalty.alpha},
         {"beta0", fit.coefficients.beta0},
         {"beta", vec_json(fit.coefficients.beta)}};
  if (data) {
    Coefficients orig = data->to_original_scale(fit.coefficients);
    j["beta0_original"] = orig.beta0;
    j["beta_original"] = vec_json(orig.beta);
  }
  j["diagnostics"] = to_json(fit.diagnostics);
  return j;
}

FitResult fit_from_json(const Json& j) {
  require_schema(j);
  FitResult fit;
  fit.loss_kind = loss_kind_from_string(j.at("loss").get<std::string>());
  fit.penalty = PenaltySpec(num(j.at("lambda")), num(j.at("alpha")));
  fit.coefficients = {num(j.at("beta0")), vec_from_json(j.at("beta"))};
  fit.diagnostics = diagnostics_from_json(j.at("diagnostics"));
  return fit;
}

Json to_json(const CVResult& cv, const Dataset* data) {
  Json discrepancies = Json::array();
  for (const auto& m : cv.discrepancies) discrepancies.push_back(mat_json(m));
  Json support = Json::array();
  for (Index s : cv.support) support.push_back(s);

  Json j{{"schema", kSchemaVersion},
         {"type", "cv"},
         {"loss", to_string(cv.loss_kind)},
         {"alpha", cv.alpha},
         {"folds", cv.folds},
         {"seed", cv.seed},
         {"assignment_attempts", cv.assignment_attempts},
         {"rule", to_string(cv.rule)},
         {"lambda_star", cv.lambda_star},
         {"lambda_refit", cv.lambda_refit},
         {"index_min", cv.index_min},
         {"index_one_mad", cv.index_one_mad},
         {"nonconverged", cv.nonconverged},
         {"lambda", vec_json(cv.lambdas)},
         {"criterion", vec_json(cv.criterion)},
         {"mad", vec_json(cv.mad)},
         {"support", std::move(support)},
         {"penalized", to_json(cv.penalized)},
         {"penalized_min", to_json(cv.penalized_min)},
         {"penalized_one_mad", to_json(cv.penalized_one_mad)},
         {"refit", to_json(cv.refit)}};
  if (data) {
    j["refit_original"] = to_json(data->to_original_scale(cv.refit));
    j["penalized_original"] = to_json(data->to_original_scale(cv.penalized));
  }
  j["fold_of"] = cv.fold_of;
  j["fold_medians"] = mat_json(cv.fold_medians);
  j["discrepancies"] = std::move(discrepancies);
  return j;
}

CVResult cv_from_json(const Json& j) {
  require_schema(j);
  CVResult cv;
  cv.loss_kind = loss_kind_from_string(j.at("loss").get<std::string>());
  cv.alpha = num(j.at("alpha"));
  cv.folds = j.at("folds").get<std::size_t>();
  cv.seed = j.at("seed").get<std::uint64_t>();
  cv.assignment_attempts = j.at("assignment_attempts").get<int>();
  cv.rule = selection_rule_from_string(j.at("rule").get<std::string>());
  cv.lambda_star = num(j.at("lambda_star"));
  cv.lambda_refit = num(j.at("lambda_refit"));
  cv.index_min = j.at("index_min").get<std::size_t>();
  cv.index_one_mad = j.at("index_one_mad").get<std::size_t>();
  cv.nonconverged = j.at("nonconverged").get<int>();
  cv.lambdas = stdvec_from_json(j.at("lambda"));
  cv.criterion = stdvec_from_json(j.at("criterion"));
  cv.mad = stdvec_from_json(j.at("mad"));
  for (const auto& s : j.at("support")) cv.support.push_back(s.get<Index>());
  cv.penalized = coefficients_from_json(j.at("penalized"));
  cv.penalized_min = coefficients_from_json(j.at("penalized_min"));
  cv.penalized_one_mad = coefficients_from_json(j.at("penalized_one_mad"));
  cv.refit = coefficients_from_json(j.at("refit"));
  cv.fold_of = j.at("fold_of").get<std::vector<int>>();
  cv.fold_medians = mat_from_json(j.at("fold_medians"));
  for (const auto& m : j.at("discrepancies")) cv.discrepancies.push_back(mat_from_json(m));
  return cv;
}

Json to_json(const ReplicateReport& report) {
  const auto& spec = report.spec;
  Json jspec{{"scenario", to_string(spec.kind)}, {"seed", spec.seed}, {"custom", spec.custom()}};
  if (spec.kind == ScenarioKind::LowDimShift) jspec["shift"] = spec.shift;
  if (spec.kind == ScenarioKind::LowDimCount) jspec["outliers"] = spec.outliers;

  Json estimators = Json::array();
  for (const auto& e : report.estimators) {
    Json fits = Json::array();
    for (const auto& c : e.fits) fits.push_back(to_json(c));
    const auto& s = e.summary;
    Json je{{"loss", to_string(e.kind)},
            {"nonconverged", e.nonconverged},
            {"summary",
             Json{{"mean", vec_json(s.mean)},
                  {"std", vec_json(s.std)},
                  {"mse", vec_json(s.mse)},
                  {"norm_mean", s.norm_mean},
                  {"norm_std", s.norm_std},
                  {"norms", vec_json(s.norms)}}}};
    if (!e.selection.empty()) {
      je["selection"] = counts_json(e.selection);
      je["selection_min"] = counts_json(e.selection_min);
      je["selection_one_mad"] = counts_json(e.selection_one_mad);
      je["lambda_min"] = vec_json(e.lambda_min);
      je["lambda_one_mad"] = vec_json(e.lambda_one_mad);
    }
    std::vector<bool> conv = e.converged;
    je["converged"] = conv;
    je["fits"] = std::move(fits);
    estimators.push_back(std::move(je));
  }
  return Json{{"schema", kSchemaVersion},
              {"type", "report"},
              {"spec", std::move(jspec)},
              {"replicates", report.replicates},
              {"truth", to_json(report.truth)},
              {"estimators", std::move(estimators)}};
}

// ---------------------------------------------------------------------------
// TSV

void write_path_tsv(std::ostream& out, const RegularizationPath& path) {
  out << "lambda\tcoef_index\tvalue\tobjective\n";
  for (const auto& rec : path.records) {
    const std::string lam = format_double(rec.lambda);
    const std::string obj = format_double(rec.objective());
    out << lam << "\t0\t" << format_double(rec.coefficients.beta0) << '\t' << obj << '\n';
    for (Index j = 0; j < rec.coefficients.beta.size(); ++j)
      out << lam << '\t' << (j + 1) << '\t' << format_double(rec.coefficients.beta[j]) << '\t'
          << obj << '\n';
  }
}

void write_report_tsv(std::ostream& out, const ReplicateReport& report) {
  out << "estimator\tquantity\tindex\tvalue\n";
  auto row = [&](const std::string& est, const char* q, std::size_t idx, const std::string& v) {
    out << est << '\t' << q << '\t' << idx << '\t' << v << '\n';
  };
  for (const auto& e : report.estimators) {
    const std::string est = to_string(e.kind);
    const auto& s = e.summary;
    for (std::size_t k = 0; k < s.mean.size(); ++k) {
      row(est, "mean", k, format_double(s.mean[k]));
      row(est, "std", k, format_double(s.std[k]));
      row(est, "mse", k, format_double(s.mse[k]));
    }
    row(est, "norm_mean", 0, format_double(s.norm_mean));
    row(est, "norm_std", 0, format_double(s.norm_std));
    row(est, "nonconverged", 0, std::to_string(e.nonconverged));
    for (std::size_t r = 0; r < e.selection.size(); ++r) {
      row(est, "tp", r, std::to_string(e.selection[r].tp));
      row(est, "fp", r, std::to_string(e.selection[r].fp));
    }
  }
}

void emit_plot_data(std::ostream& out, const RegularizationPath& path) {
  out << "lambda\tl1_norm_of_beta\tcoef_index\tvalue\n";
  for (const auto& rec : path.records) {
    const std::string lam = format_double(rec.lambda);
    const std::string l1 = format_double(rec.coefficients.beta.lpNorm<1>());
    for (Index j = 0; j < rec.coefficients.beta.size(); ++j)
      out << lam << '\t' << l1 << '\t' << (j + 1) << '\t'
          << format_double(rec.coefficients.beta[j]) << '\n';
  }
}

void emit_plot_data(std::ostream& out, const CVResult& cv) {
  out << "lambda\tcriterion\tmad_low\tmad_high\n";
  for (std::size_t k = 0; k < cv.lambdas.size(); ++k)
    out << format_double(cv.lambdas[k]) << '\t' << format_double(cv.criterion[k]) << '\t'
        << format_double(cv.criterion[k] - cv.mad[k]) << '\t'
        << format_double(cv.criterion[k] + cv.mad[k]) << '\n';
}

}  // namespace l2e

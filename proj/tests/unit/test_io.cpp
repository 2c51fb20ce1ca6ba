#include "l2elogit/io.hpp"

#include "support.hpp"

#include <limits>
#include <random>
#include <sstream>

using namespace l2e;

namespace {

LoadedData load(const std::string& text, TabularInput in = {}) {
  std::istringstream s(text);
  return load_dataset(s, in);
}

std::string error_of(const std::string& text, TabularInput in = {}) {
  try {
    load(text, in);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::vector<std::vector<std::string>> read_table(const std::string& tsv) {
  std::istringstream s(tsv);
  return parse_delimited(s, '\t');
}

}  // namespace

TEST_CASE("RFC 4180 records") {
  std::istringstream s("a,\"b,c\",\"say \"\"hi\"\"\"\r\n1,\"two\nlines\",3\r\n\r\n4,5,6");
  auto rec = parse_delimited(s, ',');
  REQUIRE(rec.size() == 3);
  CHECK(rec[0] == std::vector<std::string>{"a", "b,c", "say \"hi\""});
  CHECK(rec[1] == std::vector<std::string>{"1", "two\nlines", "3"});
  CHECK(rec[2] == std::vector<std::string>{"4", "5", "6"});

  std::istringstream bad("a,\"open\n");
  CHECK_THROWS_AS(parse_delimited(bad, ','), DataError);

  std::istringstream ws("  1.5   2\t3 AB\n4 5 6 NO\n");
  auto w = parse_delimited(ws, ' ');
  CHECK(w[0] == std::vector<std::string>{"1.5", "2", "3", "AB"});
  CHECK(w[1].size() == 4);
}

TEST_CASE("loading a small CSV centers the columns") {
  LoadedData d = load("x1,x2,y\n1,10,0\n2,20,1\n6,60,1\n");
  CHECK(d.data.n() == 3);
  CHECK(d.data.p() == 2);
  CHECK(d.feature_names == std::vector<std::string>{"x1", "x2"});
  CHECK(d.label_name == "y");
  CHECK(d.data.x().colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(d.data.column_means()[1] == doctest::Approx(30.0));
  CHECK(d.data.y()[0] == 0.0);

  TabularInput by_name;
  by_name.label_name = "x1";
  LoadedData named = load("x1,x2,y\n1,10,0\n0,20,1\n", by_name);
  CHECK(named.label_name == "x1");
  CHECK(named.feature_names == std::vector<std::string>{"x2", "y"});
  by_name.label_name = "nope";
  CHECK_THROWS_AS(load("x1,x2,y\n1,10,0\n", by_name), ConfigError);

  TabularInput first;
  first.label_index = 0;
  LoadedData f = load("y,a\n1,3\n0,4\n", first);
  CHECK(f.feature_names == std::vector<std::string>{"a"});
  CHECK(f.data.y()[0] == 1.0);

  TabularInput nohead;
  nohead.header = false;
  LoadedData h = load("3,1\n4,0\n", nohead);
  CHECK(h.feature_names == std::vector<std::string>{"x1"});
  CHECK(h.data.n() == 2);
}

TEST_CASE("data errors name the offending cell") {
  CHECK(error_of("a,y\n1,0\n2,2\n").find("row 2") != std::string::npos);
  std::string nn = error_of("a,b,y\n1,2,0\n3,abc,1\n");
  CHECK(nn.find("'abc'") != std::string::npos);
  CHECK(nn.find("row 2") != std::string::npos);
  CHECK(nn.find("'b'") != std::string::npos);
  CHECK(error_of("").find("empty") != std::string::npos);
  CHECK(error_of("a,y\n").find("no data rows") != std::string::npos);
  CHECK(error_of("a,y\n1,0\n2\n").find("fields") != std::string::npos);
  CHECK(error_of("a,y\n1,0\nNA,1\n").find("missing") != std::string::npos);
  CHECK(error_of("a,y\n1,yes\n2,no\n").find("positive") != std::string::npos);
}

TEST_CASE("string labels and missing values") {
  TabularInput in;
  in.positive = "AB";
  LoadedData d = load("a,class\n1,AB\n2,NO\n3,AB\n", in);
  CHECK(d.data.y() == (Vector(3) << 1.0, 0.0, 1.0).finished());
  CHECK(error_of("a,class\n1,AB\n2,NO\n3,XX\n", in).find("third class") != std::string::npos);

  TabularInput drop;
  drop.na_policy = NaPolicy::DropRow;
  LoadedData m = load("a,b,y\n1,2,0\n,3,1\n4,NA,1\n5,6,1\n7,?,0\n8,9,0\n", drop);
  CHECK(m.data.n() == 3);
  CHECK(m.dropped_rows == 3);
  CHECK(m.data.raw_x()(1, 0) == doctest::Approx(5.0));
  CHECK(na_policy_from_string("drop_row") == NaPolicy::DropRow);
  CHECK_THROWS_AS(na_policy_from_string("impute"), ConfigError);
}

TEST_CASE("numbers print with 17 significant digits and round-trip") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    double v = u(rng) * std::pow(10.0, (k % 40) - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  Json j = {{"a", 0.1}, {"b", {1.0 / 3.0, 2.0}}, {"c", std::nan("")}};
  std::string text = dump_json(j);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  CHECK(text.find("null") != std::string::npos);
  CHECK(text.back() == '\n');
  Json back = Json::parse(text);
  CHECK(back["b"][0].get<double>() == 1.0 / 3.0);
}

TEST_CASE("fit and CV documents round-trip losslessly") {
  std::mt19937_64 rng(2);
  Dataset d = test::random_dataset(rng, 60, 4);
  FitResult fit = fit_l2e(d, PenaltySpec(0.01, 0.6), Coefficients(0.0, Vector::Ones(4)));
  Json j = to_json(fit, &d);
  CHECK(j["schema"] == 1);
  CHECK(j["type"] == "fit");
  CHECK(j.contains("beta0_original"));
  FitResult back = fit_from_json(Json::parse(dump_json(j)));
  CHECK(test::max_abs_diff(back.coefficients, fit.coefficients) == 0.0);
  CHECK(back.diagnostics.objective_trace == fit.diagnostics.objective_trace);
  CHECK(back.diagnostics.iterations == fit.diagnostics.iterations);
  CHECK(back.diagnostics.converged == fit.diagnostics.converged);
  CHECK(back.diagnostics.kkt_max_violation == fit.diagnostics.kkt_max_violation);
  CHECK(back.penalty.lambda == fit.penalty.lambda);
  CHECK(back.penalty.alpha == fit.penalty.alpha);
  CHECK(back.loss_kind == fit.loss_kind);

  Json old = j;
  old["schema"] = 2;
  CHECK_THROWS_AS(fit_from_json(old), DataError);

  LambdaGrid grid = lambda_grid(lambda_max(d, 1.0), 0.1, 6);
  CvOptions cv;
  cv.folds = 3;
  CVResult res = robust_cv(d, 1.0, grid, cv);
  Json cj = to_json(res, &d);
  CHECK(cj["schema"] == 1);
  CVResult cb = cv_from_json(Json::parse(dump_json(cj)));
  CHECK(cb.lambdas == res.lambdas);
  CHECK(cb.criterion == res.criterion);
  CHECK(cb.mad == res.mad);
  CHECK(cb.fold_of == res.fold_of);
  CHECK(cb.fold_medians == res.fold_medians);
  REQUIRE(cb.discrepancies.size() == res.discrepancies.size());
  for (std::size_t f = 0; f < res.discrepancies.size(); ++f)
    CHECK(cb.discrepancies[f] == res.discrepancies[f]);
  CHECK(cb.lambda_star == res.lambda_star);
  CHECK(cb.lambda_refit == res.lambda_refit);
  CHECK(cb.index_min == res.index_min);
  CHECK(cb.index_one_mad == res.index_one_mad);
  CHECK(cb.support == res.support);
  CHECK(test::max_abs_diff(cb.refit, res.refit) == 0.0);
  CHECK(test::max_abs_diff(cb.penalized, res.penalized) == 0.0);
  CHECK(cb.seed == res.seed);
  CHECK(cb.nonconverged == res.nonconverged);
  CHECK(dump_json(to_json(cb, &d)) == dump_json(cj));
}

TEST_CASE("path and plot tables") {
  std::mt19937_64 rng(3);
  Dataset d = test::random_dataset(rng, 50, 3);
  LambdaGrid grid = lambda_grid(lambda_max(d, 1.0), 0.05, 5);
  RegularizationPath path = fit_path(d, 1.0, grid, LossKind::MLE);

  std::ostringstream tsv;
  write_path_tsv(tsv, path);
  auto rows = read_table(tsv.str());
  CHECK(rows[0] == std::vector<std::string>{"lambda", "coef_index", "value", "objective"});
  CHECK(rows.size() == 1 + 5 * 4);

  std::ostringstream plot;
  emit_plot_data(plot, path);
  auto pr = read_table(plot.str());
  CHECK(pr[0] == std::vector<std::string>{"lambda", "l1_norm_of_beta", "coef_index", "value"});
  REQUIRE(pr.size() == 1 + 5 * 3);
  for (std::size_t b = 0; b < 5; ++b) {
    double l1 = 0.0;
    for (std::size_t j = 0; j < 3; ++j) l1 += std::abs(std::stod(pr[1 + b * 3 + j][3]));
    CHECK(std::abs(std::stod(pr[1 + b * 3][1]) - l1) < 1e-12);
  }

  RegularizationPath single = path;
  single.records.resize(1);
  std::ostringstream one;
  emit_plot_data(one, single);
  CHECK(read_table(one.str()).size() == 1 + 3);

  CVResult cv;
  cv.lambdas = {1.0, 0.5};
  cv.criterion = {0.2, 0.1};
  cv.mad = {0.05, 0.02};
  std::ostringstream cvp;
  emit_plot_data(cvp, cv);
  auto cr = read_table(cvp.str());
  CHECK(cr[0] == std::vector<std::string>{"lambda", "criterion", "mad_low", "mad_high"});
  CHECK(std::stod(cr[1][2]) == doctest::Approx(0.15));
  CHECK(std::stod(cr[2][3]) == doctest::Approx(0.12));
}

TEST_CASE("experiment reports") {
  ScenarioSpec spec;
  spec.shift = 6.0;
  ExperimentOptions opts;
  opts.replicates = 3;
  ReplicateReport r = run_experiment(spec, opts);
  Json j = to_json(r);
  CHECK(j["schema"] == 1);
  CHECK(j["type"] == "report");
  CHECK(j["estimators"].size() == 2);
  std::ostringstream tsv;
  write_report_tsv(tsv, r);
  auto rows = read_table(tsv.str());
  CHECK(rows[0] == std::vector<std::string>{"estimator", "quantity", "index", "value"});
  bool seen = false;
  for (const auto& row : rows)
    if (row[0] == "mle" && row[1] == "mean" && row[2] == "4")
      seen = std::stod(row[3]) == r.estimator(LossKind::MLE).summary.mean[4];
  CHECK(seen);
}

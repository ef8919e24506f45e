#include "hiernet/cli.hpp"

#include "hiernet/bench.hpp"
#include "hiernet/csv.hpp"
#include "hiernet/dof.hpp"
#include "hiernet/features.hpp"
#include "hiernet/model.hpp"
#include "hiernet/model_io.hpp"
#include "hiernet/parallel.hpp"
#include "hiernet/scenario.hpp"
#include "hiernet/selection.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace hiernet {

namespace {

using nlohmann::json;

struct DataArgs {
  std::string data;
  std::string response;
  std::vector<std::string> exclude;
  std::string sd = "population";
};

struct SolverArgs {
  std::string method = "strong";
  std::string loss = "gaussian";
  std::vector<double> lambdas;
  Index nlambda = 20;
  double lambda_min_ratio = 0.05;
  double tol = 1e-7;
  Index max_iters = 5000;
};

struct Loaded {
  std::vector<std::string> predictors;
  Matrix x_raw;
  Vector y_raw;
};

Loaded load_data(const DataArgs& a, const std::vector<std::string>& extra_excluded = {}) {
  const CsvTable t = read_csv(a.data);
  std::vector<std::string> excluded = a.exclude;
  excluded.push_back(a.response);
  for (const auto& e : extra_excluded)
    if (!e.empty()) excluded.push_back(e);
  Loaded l;
  l.predictors = columns_except(t, excluded);
  if (l.predictors.empty()) throw InputError("no predictor columns left in '" + a.data + "'");
  l.x_raw = numeric_columns(t, l.predictors);
  l.y_raw = numeric_columns(t, {a.response}).col(0);
  return l;
}

void check_binary(const Vector& y) {
  for (Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) {
      throw InputError("row " + std::to_string(i + 1) +
                       ": logistic responses must be exactly 0 or 1");
    }
  }
}

void add_data_options(CLI::App* app, DataArgs& a, bool need_response = true) {
  app->add_option("--data", a.data, "Training CSV with a header row")->required();
  auto* r = app->add_option("--response", a.response, "Response column");
  if (need_response) r->required();
  app->add_option("--exclude", a.exclude, "Columns to leave out of the design");
  app->add_option("--sd", a.sd, "Standard deviation divisor")
      ->check(CLI::IsMember({"population", "sample"}));
}

void add_solver_options(CLI::App* app, SolverArgs& s) {
  app->add_option("--method", s.method)->check(CLI::IsMember({"strong", "weak", "apl", "mel"}));
  app->add_option("--loss", s.loss)->check(CLI::IsMember({"gaussian", "logistic"}));
  app->add_option("--lambda", s.lambdas, "Explicit lambda values (descending)");
  app->add_option("--nlambda", s.nlambda)->check(CLI::PositiveNumber);
  app->add_option("--lambda-min-ratio", s.lambda_min_ratio)->check(CLI::Range(1e-8, 1.0));
  app->add_option("--tol", s.tol, "Relative convergence tolerance")->check(CLI::PositiveNumber);
  app->add_option("--max-iters", s.max_iters)->check(CLI::PositiveNumber);
}

void add_scenario_options(CLI::App* app, ScenarioConfig& c, std::string& name) {
  app->add_option("--scenario", name, "I, II, III or IV");
  app->add_option("--n", c.n);
  app->add_option("--p", c.p);
  app->add_option("--n-main", c.n_main);
  app->add_option("--n-inter", c.n_inter);
  app->add_option("--snr-main", c.snr_main);
  app->add_option("--snr-inter", c.snr_inter);
  app->add_option("--sigma", c.sigma);
}

SolveOptions solve_options(const SolverArgs& s) {
  SolveOptions o;
  o.rel_tol = s.tol;
  o.max_iters = s.max_iters;
  o.record_trace = false;
  return o;
}

std::vector<double> resolve_lambdas(const SolverArgs& s, Method m, const Dataset& d,
                                    const InteractionBasis& b, LossKind loss) {
  if (!s.lambdas.empty()) {
    check_descending(s.lambdas);
    return s.lambdas;
  }
  return method_lambda_grid(m, d, b, s.nlambda, s.lambda_min_ratio, loss);
}

/// Output file or the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw InputError("cannot write '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

void write_json(const json& j, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << j.dump(2) << '\n';
}

std::string fmt(double v) { return format_double(v); }

Index model_df(const FitState& s) {
  if (s.method == Method::strong || s.method == Method::weak) return df_bound(extract_active_sets(s));
  return sparsity_metrics(s).parameter_sparsity;
}

void write_path_tsv(std::ostream& os, const PathResult& path) {
  os << "lambda\tobjective\tdf\tparameter_sparsity\tpractical_sparsity\titerations\tconverged\n";
  for (const auto& pt : path.points) {
    os << fmt(pt.fit.lambda) << '\t' << fmt(pt.objective) << '\t' << model_df(pt.fit) << '\t'
       << pt.parameter_sparsity << '\t' << pt.practical_sparsity << '\t' << pt.fit.iterations
       << '\t' << (pt.fit.converged ? "true" : "false") << '\n';
  }
}

void warn_nonconverged(const PathResult& path, std::ostream& err) {
  for (const auto& pt : path.points)
    if (!pt.fit.converged) err << "warning: fit at lambda=" << fmt(pt.fit.lambda) << " did not converge\n";
}

ScenarioConfig scenario_config(ScenarioConfig c, const std::string& name, std::uint64_t seed) {
  if (!name.empty()) c.scenario = scenario_from_string(name);
  c.seed = seed;
  return c;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical lasso for pairwise interactions"};
  app.require_subcommand(1);
  Index threads = 1;
  app.add_option("--threads", threads, "Worker threads for parallel sections")
      ->check(CLI::PositiveNumber);

  DataArgs data;
  SolverArgs solver;
  std::string out_path, model_path, models_path, json_path, truth_path, foldid, rule = "min";
  std::string scenario_name, pattern = "symmetry";
  std::uint64_t seed = 1;
  Index folds = 10, reps = 20, max_steps = 50;
  ScenarioConfig sc;
  std::vector<std::string> methods;
  bool from_scenario = false;

  auto* fit = app.add_subcommand("fit", "Fit one model and save it as JSON");
  add_data_options(fit, data);
  add_solver_options(fit, solver);
  fit->add_option("--model", model_path, "Model JSON to write")->required();
  fit->add_option("--summary", out_path, "Per-lambda TSV (default stdout)");

  auto* path = app.add_subcommand("path", "Fit a warm-started lambda path");
  add_data_options(path, data);
  add_solver_options(path, solver);
  path->add_option("--out", out_path, "Per-lambda TSV (default stdout)");
  path->add_option("--models", models_path, "JSON array with every path model");

  auto* cv = app.add_subcommand("cv", "K-fold cross-validation over a lambda grid");
  add_data_options(cv, data);
  add_solver_options(cv, solver);
  cv->add_option("--folds", folds)->check(CLI::Range(2, 1000000));
  cv->add_option("--seed", seed);
  cv->add_option("--foldid", foldid, "Column holding 0-based fold ids");
  cv->add_option("--rule", rule)->check(CLI::IsMember({"min", "1se"}));
  cv->add_option("--out", out_path, "CV table TSV (default stdout)");
  cv->add_option("--model", model_path, "Model refit on all rows at the selected lambda");

  auto* pred = app.add_subcommand("predict", "Score rows with a saved model");
  pred->add_option("--model", model_path)->required();
  pred->add_option("--data", data.data)->required();
  pred->add_option("--out", out_path, "Predictions TSV (default stdout)");

  auto* df = app.add_subcommand("df", "Degrees of freedom: estimate, bound and Monte Carlo");
  df->add_option("--data", data.data, "CSV holding the design and the mean column");
  df->add_option("--mean", data.response, "Column holding the true mean");
  df->add_option("--exclude", data.exclude);
  add_scenario_options(df, sc, scenario_name);
  df->add_option("--lambda", solver.lambdas);
  df->add_option("--nlambda", solver.nlambda)->check(CLI::PositiveNumber);
  df->add_option("--lambda-min-ratio", solver.lambda_min_ratio)->check(CLI::Range(1e-8, 1.0));
  df->add_option("--reps", reps)->check(CLI::Range(100, 100000000));
  df->add_option("--seed", seed);
  df->add_option("--pattern", pattern)->check(CLI::IsMember({"symmetry", "printed"}));
  df->add_option("--out", out_path);

  auto* sim = app.add_subcommand("simulate", "Draw a scenario dataset");
  add_scenario_options(sim, sc, scenario_name);
  sim->add_option("--seed", seed);
  sim->add_option("--out", out_path, "Dataset CSV")->required();
  sim->add_option("--truth", truth_path, "Truth JSON")->required();

  auto* bench = app.add_subcommand("bench", "Six-method simulation benchmark");
  add_scenario_options(bench, sc, scenario_name);
  bench->add_option("--reps", reps)->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed);
  bench->add_option("--methods", methods, "Subset of HL APL MEL HF APF MEF")->delimiter(',');
  bench->add_option("--nlambda", solver.nlambda)->check(CLI::PositiveNumber);
  bench->add_option("--lambda-min-ratio", solver.lambda_min_ratio)->check(CLI::Range(1e-8, 1.0));
  bench->add_option("--max-steps", max_steps)->check(CLI::NonNegativeNumber);
  bench->add_option("--out", out_path, "Summary TSV (default stdout)");
  bench->add_option("--json", json_path, "Summary and per-replicate JSON");

  auto* wheel = app.add_subcommand("wheel", "Sparsity graph of a saved model");
  wheel->add_option("--model", model_path)->required();
  wheel->add_option("--out", out_path, "Graph JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    set_max_threads(threads);

    if (fit->parsed() || path->parsed() || cv->parsed()) {
      const Method method = method_from_string(solver.method);
      const LossKind loss = loss_kind_from_string(solver.loss);
      const Loaded l = load_data(data, {foldid});
      if (loss == LossKind::logistic) check_binary(l.y_raw);
      const SolveOptions opts = solve_options(solver);

      if (cv->parsed()) {
        const Dataset d = standardize(l.x_raw, l.y_raw, sd_convention_from_string(data.sd));
        const InteractionBasis b = build_interactions(d);
        const auto lambdas = resolve_lambdas(solver, method, d, b, loss);
        CvOptions co;
        co.loss = loss;
        co.sd = d.sd_convention;
        co.solve = opts;
        std::vector<Index> ids;
        if (!foldid.empty()) {
          const Vector f = numeric_columns(read_csv(data.data), {foldid}).col(0);
          for (Index i = 0; i < f.size(); ++i) {
            if (f(i) != std::floor(f(i)) || f(i) < 0) {
              throw InputError("row " + std::to_string(i + 1) + ", column '" + foldid +
                               "': fold id must be a nonnegative integer");
            }
            ids.push_back(static_cast<Index>(f(i)));
          }
        } else {
          ids = make_folds(d.n(), folds, seed);
        }
        const CvResult res = kfold_cv(l.x_raw, l.y_raw, method, lambdas, ids, co);
        {
          Sink s(out_path, out);
          *s << "lambda\tcv_mean\tcv_se\n";
          for (std::size_t i = 0; i < lambdas.size(); ++i) {
            *s << fmt(lambdas[i]) << '\t' << fmt(res.mean(static_cast<Index>(i))) << '\t'
               << fmt(res.se(static_cast<Index>(i))) << '\n';
          }
        }
        const double chosen = rule == "min" ? res.lambda_min : res.lambda_1se;
        err << "lambda_min=" << fmt(res.lambda_min) << " lambda_1se=" << fmt(res.lambda_1se) << '\n';
        if (res.nonconverged > 0) err << "warning: " << res.nonconverged << " fold fits did not converge\n";
        if (!model_path.empty()) {
          const FitState s = fit_one(method, d, b, chosen, loss, opts);
          if (!s.converged) err << "warning: final fit did not converge\n";
          save_model(make_saved_model(s, d, b, l.predictors, data.response), model_path);
        }
        return 0;
      }

      const Dataset d = standardize(l.x_raw, l.y_raw, sd_convention_from_string(data.sd));
      const InteractionBasis b = build_interactions(d);
      const auto lambdas = resolve_lambdas(solver, method, d, b, loss);
      const PathResult pr = fit_path(method, d, b, lambdas, loss, opts);
      warn_nonconverged(pr, err);
      {
        Sink s(out_path, out);
        write_path_tsv(*s, pr);
      }
      if (fit->parsed()) {
        save_model(make_saved_model(pr.points.back().fit, d, b, l.predictors, data.response),
                   model_path);
      } else if (!models_path.empty()) {
        json arr = json::array();
        for (const auto& pt : pr.points)
          arr.push_back(model_to_json(make_saved_model(pt.fit, d, b, l.predictors, data.response)));
        write_json(arr, models_path);
      }
      return 0;
    }

    if (pred->parsed()) {
      const SavedModel m = load_model(model_path);
      const Matrix x = numeric_columns(read_csv(data.data), m.predictors);
      const Vector yhat = predict_saved(m, x);
      Sink s(out_path, out);
      *s << "prediction\n";
      for (Index i = 0; i < yhat.size(); ++i) *s << fmt(yhat(i)) << '\n';
      return 0;
    }

    if (df->parsed()) {
      from_scenario = data.data.empty();
      Matrix x_raw;
      Vector mu;
      double sigma = sc.sigma;
      if (from_scenario) {
        const SimulatedData s = simulate_scenario(scenario_config(sc, scenario_name, seed));
        x_raw = s.x_raw;
        mu = s.mu;
      } else {
        if (data.response.empty()) throw InputError("df with --data needs --mean");
        const Loaded l = load_data(data);
        x_raw = l.x_raw;
        mu = l.y_raw;
      }
      std::vector<double> lambdas = solver.lambdas;
      if (lambdas.empty()) {
        const Dataset d = standardize(x_raw, mu);
        lambdas = lambda_grid(lambda_max(d, build_interactions(d)), solver.nlambda,
                              solver.lambda_min_ratio);
      }
      const PairRowPattern pat =
          pattern == "printed" ? PairRowPattern::as_printed : PairRowPattern::symmetry;
      const DfStudy st = df_monte_carlo(mu, sigma, x_raw, lambdas, reps, seed, pat);
      Sink s(out_path, out);
      *s << "lambda\tdf_estimate\tdf_estimate_se\tdf_bound\tdf_mc\tdf_mc_se\n";
      for (std::size_t i = 0; i < st.lambdas.size(); ++i) {
        *s << fmt(st.lambdas[i]) << '\t' << fmt(st.df_estimate_mean[i]) << '\t'
           << fmt(st.df_estimate_se[i]) << '\t' << fmt(st.df_bound_mean[i]) << '\t'
           << fmt(st.df_mc[i]) << '\t' << fmt(st.df_mc_se[i]) << '\n';
      }
      err << "bound_violations=" << st.bound_violations << " nonconverged=" << st.nonconverged << '\n';
      return 0;
    }

    if (sim->parsed()) {
      const ScenarioConfig c = scenario_config(sc, scenario_name, seed);
      const SimulatedData s = simulate_scenario(c);
      std::vector<std::string> header;
      for (Index j = 0; j < c.p; ++j) header.push_back("x" + std::to_string(j + 1));
      header.push_back("y");
      Matrix all(c.n, c.p + 1);
      all << s.x_raw, s.y;
      {
        Sink f(out_path, out);
        write_csv(*f, header, all);
      }
      json inter = json::array();
      for (Index j = 0; j < c.p; ++j)
        for (Index k = j + 1; k < c.p; ++k)
          if (s.true_theta(j, k) != 0.0) inter.push_back({{"j", j}, {"k", k}, {"value", s.true_theta(j, k)}});
      json truth = {{"scenario", to_string(c.scenario)},
                    {"n", c.n},
                    {"p", c.p},
                    {"sigma", c.sigma},
                    {"seed", c.seed},
                    {"snr_main", c.snr_main},
                    {"snr_inter", c.snr_inter},
                    {"beta", std::vector<double>(s.true_beta.data(), s.true_beta.data() + c.p)},
                    {"interactions", inter},
                    {"mu", std::vector<double>(s.mu.data(), s.mu.data() + c.n)}};
      write_json(truth, truth_path);
      return 0;
    }

    if (bench->parsed()) {
      BenchConfig cfg;
      cfg.scenario = scenario_config(sc, scenario_name, seed);
      cfg.reps = reps;
      cfg.seed = seed;
      cfg.lambda_min_ratio = bench->count("--lambda-min-ratio") ? solver.lambda_min_ratio : 0.02;
      cfg.nlambda = bench->count("--nlambda") ? solver.nlambda : 30;
      cfg.stepwise_max_steps = max_steps;
      if (!methods.empty()) {
        cfg.methods.clear();
        for (const auto& m : methods) cfg.methods.push_back(bench_method_from_string(m));
      }
      const BenchResult r = run_benchmark(cfg);
      {
        Sink s(out_path, out);
        *s << "method\tpe_mean\tpe_se\tsensitivity_mean\tsensitivity_se\tspecificity_mean\t"
              "specificity_se\tparameter_sparsity_mean\tpractical_sparsity_mean\n";
        for (const auto& m : r.summaries) {
          *s << to_string(m.method) << '\t' << fmt(m.pe_mean) << '\t' << fmt(m.pe_se) << '\t'
             << fmt(m.sensitivity_mean) << '\t' << fmt(m.sensitivity_se) << '\t'
             << fmt(m.specificity_mean) << '\t' << fmt(m.specificity_se) << '\t'
             << fmt(m.parameter_sparsity_mean) << '\t' << fmt(m.practical_sparsity_mean) << '\n';
        }
      }
      if (!json_path.empty()) {
        json j;
        j["scenario"] = to_string(cfg.scenario.scenario);
        j["reps"] = cfg.reps;
        j["seed"] = cfg.seed;
        json summ = json::array();
        for (const auto& m : r.summaries) {
          summ.push_back({{"method", to_string(m.method)},
                          {"pe_mean", m.pe_mean},
                          {"pe_se", m.pe_se},
                          {"sensitivity_mean", m.sensitivity_mean},
                          {"sensitivity_se", m.sensitivity_se},
                          {"specificity_mean", m.specificity_mean},
                          {"specificity_se", m.specificity_se},
                          {"parameter_sparsity_mean", m.parameter_sparsity_mean},
                          {"practical_sparsity_mean", m.practical_sparsity_mean}});
        }
        j["summaries"] = summ;
        json reps_j = json::array();
        for (const auto& rep : r.outcomes) {
          json row = json::array();
          for (std::size_t m = 0; m < rep.size(); ++m) {
            row.push_back({{"method", to_string(cfg.methods[m])},
                           {"prediction_error", rep[m].prediction_error},
                           {"sensitivity", rep[m].sensitivity},
                           {"specificity", rep[m].specificity},
                           {"parameter_sparsity", rep[m].parameter_sparsity},
                           {"practical_sparsity", rep[m].practical_sparsity}});
          }
          reps_j.push_back(row);
        }
        j["replicates"] = reps_j;
        write_json(j, json_path);
      }
      return 0;
    }

    if (wheel->parsed()) {
      const json g = wheel_json(load_model(model_path));
      Sink s(out_path, out);
      *s << g.dump(2) << '\n';
      return 0;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 3;
}

int run_cli(int argc, char** argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace hiernet

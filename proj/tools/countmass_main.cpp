// Single-binary front end. Subcommands cover simulation, estimation on token
// files or sampled trajectories, Monte Carlo risk evaluation, grid sweeps,
// and empirical coverage of the deviation bounds. Every stochastic command is
// reproducible from its flags: identical invocations write identical bytes.
//
// Exit codes: 0 success, 2 usage error, 3 bad input data.

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "countmass/concentration.hpp"
#include "countmass/estimators.hpp"
#include "countmass/evaluation.hpp"
#include "countmass/model_io.hpp"
#include "countmass/processes.hpp"
#include "countmass/seqcore.hpp"

namespace {

using namespace countmass;

std::uint64_t parse_u64_flag(const std::string& text, const char* flag) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || text[0] == '-' || errno != 0 || end != text.c_str() + text.size())
    throw std::invalid_argument(std::string(flag) + " must be a nonnegative integer or \"auto\"");
  return v;
}

// "auto" defers to the model's mixing oracle; token input has none, so the
// caller must pick a window explicitly.
std::uint64_t resolve_tau(const std::string& flag, const ProcessModel* model, std::uint64_t n) {
  if (flag == "auto") {
    if (model == nullptr)
      throw std::invalid_argument("--tau auto needs --model; pass an explicit --tau for token input");
    return default_window(*model, n);
  }
  return parse_u64_flag(flag, "--tau");
}

std::uint64_t resolve_zeta_bar(const std::string& flag, std::uint64_t n) {
  if (flag == "auto") return default_transition_point(n);
  return parse_u64_flag(flag, "--zeta-bar");
}

EstimatorKind estimator_kind(const std::string& name) {
  if (name == "wingit") return EstimatorKind::wingit;
  if (name == "plugin") return EstimatorKind::plugin;
  return EstimatorKind::hybrid;
}

struct Options {
  std::string model_path;
  std::string tokens_path;
  std::string out_path;
  std::uint64_t n = 0;
  std::vector<std::uint64_t> n_grid;
  std::string tau = "auto";
  std::string zeta_bar = "auto";
  std::uint64_t reps = 100;
  std::uint64_t seed = 0;
  std::string format;
  std::string estimator = "hybrid";
  std::string bound = "2a";
  double delta = 0.05;
  double eps = 0.0;
  double v2 = 0.0;
  std::uint32_t target = 0;
};

std::string run_simulate(const Options& opt) {
  const ProcessModel model = load_model_file(opt.model_path);
  const TokenSequence seq = sample_trajectory(model, opt.n, opt.seed);
  std::string doc;
  for (std::uint32_t id : seq.symbols) {
    doc += seq.id_to_token[id];
    doc += '\n';
  }
  return doc;
}

std::string run_estimate(const Options& opt, bool have_model) {
  std::optional<ProcessModel> model;
  if (have_model) model = load_model_file(opt.model_path);

  TokenSequence seq;
  if (!opt.tokens_path.empty())
    seq = ingest_tokens(read_token_lines(opt.tokens_path));
  else
    seq = sample_trajectory(*model, opt.n, opt.seed);

  const std::uint64_t n = seq.size();
  const std::uint64_t tau = resolve_tau(opt.tau, model ? &*model : nullptr, n);
  const std::uint64_t zeta_bar = resolve_zeta_bar(opt.zeta_bar, n);
  const HybridResult result = hybrid_estimate(seq, {tau, zeta_bar});
  return estimate_json(result, n, tau, zeta_bar);
}

std::string run_evaluate(const Options& opt) {
  const ProcessModel model = load_model_file(opt.model_path);
  RiskSpec spec;
  spec.estimator = estimator_kind(opt.estimator);
  spec.n = opt.n;
  spec.tau = resolve_tau(opt.tau, &model, opt.n);
  spec.zeta_bar = resolve_zeta_bar(opt.zeta_bar, opt.n);
  spec.reps = opt.reps;
  spec.seed = opt.seed;
  const RiskReport report = tv_risk_monte_carlo(model, spec);
  if (opt.format == "csv") return risk_csv_header() + risk_csv_row(report);
  return risk_json(report);
}

std::string run_sweep(const Options& opt) {
  if (opt.n_grid.empty()) throw std::invalid_argument("--n-grid must be nonempty");
  for (std::size_t i = 1; i < opt.n_grid.size(); ++i)
    if (opt.n_grid[i] <= opt.n_grid[i - 1])
      throw std::invalid_argument("--n-grid must be strictly ascending");

  const ProcessModel model = load_model_file(opt.model_path);
  struct Cell {
    RiskSpec spec;
    std::future<RiskReport> pending;
  };
  std::vector<Cell> cells;
  cells.reserve(opt.n_grid.size());
  for (std::uint64_t n : opt.n_grid) {
    RiskSpec spec;
    spec.estimator = estimator_kind(opt.estimator);
    spec.n = n;
    spec.tau = resolve_tau(opt.tau, &model, n);
    spec.zeta_bar = resolve_zeta_bar(opt.zeta_bar, n);
    spec.reps = opt.reps;
    spec.seed = opt.seed;
    cells.push_back({spec, {}});
  }
  // cells run concurrently; rows are emitted in grid order regardless
  for (Cell& cell : cells)
    cell.pending = std::async(std::launch::async,
                              [&model, spec = cell.spec] { return tv_risk_monte_carlo(model, spec); });

  std::vector<RiskReport> reports;
  reports.reserve(cells.size());
  for (Cell& cell : cells) reports.push_back(cell.pending.get());

  if (opt.format == "json") {
    std::string doc = "[";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      std::string row = risk_json(reports[i]);
      row.pop_back();  // rows join on one line
      if (i != 0) doc += ',';
      doc += row;
    }
    doc += "]\n";
    return doc;
  }
  std::string doc = risk_csv_header();
  for (const RiskReport& report : reports) doc += risk_csv_row(report);
  return doc;
}

std::string run_bounds(const Options& opt, bool have_v2) {
  const ProcessModel model = load_model_file(opt.model_path);
  CoverageSpec spec;
  spec.bound = opt.bound == "2b" ? CoverageBound::self_normalized : CoverageBound::bernstein;
  spec.n = opt.n;
  spec.tau = resolve_tau(opt.tau, &model, opt.n);
  spec.delta = opt.delta;
  spec.eps = opt.eps;
  spec.reps = opt.reps;
  spec.seed = opt.seed;
  spec.target_symbol = opt.target;
  if (have_v2) spec.v2 = opt.v2;
  const CoverageReport report = empirical_coverage(model, spec);
  return coverage_json(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Count-probability estimation over dependent token streams"};
  app.require_subcommand(1);

  Options opt;
  std::function<std::string()> runner;

  auto add_model = [&](CLI::App* cmd, bool required) {
    auto* o = cmd->add_option("--model", opt.model_path, "model spec (JSON file)");
    if (required) o->required();
    return o;
  };
  auto add_seed = [&](CLI::App* cmd, bool required) {
    auto* o = cmd->add_option("--seed", opt.seed, "replication stream seed");
    if (required) o->required();
    return o;
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", opt.out_path, "output path (stdout when absent)");
  };
  auto add_windows = [&](CLI::App* cmd) {
    cmd->add_option("--tau", opt.tau, "window radius, or \"auto\" for the mixing oracle");
    cmd->add_option("--zeta-bar", opt.zeta_bar, "transition count, or \"auto\"");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "sample a trajectory, one token per line");
  add_model(simulate, true);
  simulate->add_option("--n", opt.n, "sequence length")->required();
  add_seed(simulate, true);
  add_out(simulate);

  CLI::App* estimate = app.add_subcommand("estimate", "hybrid count-mass estimate as JSON");
  auto* est_model = add_model(estimate, false);
  auto* est_tokens =
      estimate->add_option("--tokens", opt.tokens_path, "token file, one token per line");
  auto* est_n = estimate->add_option("--n", opt.n, "sequence length when sampling");
  auto* est_seed = add_seed(estimate, false);
  est_tokens->excludes(est_model);
  est_tokens->excludes(est_n);
  est_tokens->excludes(est_seed);
  add_windows(estimate);
  add_out(estimate);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Monte Carlo TV risk against a model");
  add_model(evaluate, true);
  evaluate->add_option("--n", opt.n, "sequence length")->required();
  evaluate->add_option("--reps", opt.reps, "replications");
  add_seed(evaluate, true);
  add_windows(evaluate);
  evaluate->add_option("--estimator", opt.estimator, "hybrid|wingit|plugin")
      ->check(CLI::IsMember({"hybrid", "wingit", "plugin"}));
  opt.format = "json";
  evaluate->add_option("--format", opt.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  add_out(evaluate);

  CLI::App* sweep = app.add_subcommand("sweep", "risk over an ascending n grid");
  add_model(sweep, true);
  sweep->add_option("--n-grid", opt.n_grid, "comma-separated lengths, ascending")
      ->required()
      ->delimiter(',');
  sweep->add_option("--reps", opt.reps, "replications per cell");
  add_seed(sweep, true);
  add_windows(sweep);
  sweep->add_option("--estimator", opt.estimator, "hybrid|wingit|plugin")
      ->check(CLI::IsMember({"hybrid", "wingit", "plugin"}));
  sweep->add_option("--format", opt.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  add_out(sweep);

  CLI::App* bounds = app.add_subcommand("bounds", "empirical coverage of a deviation bound");
  add_model(bounds, true);
  bounds->add_option("--n", opt.n, "sequence length")->required();
  bounds->add_option("--reps", opt.reps, "replications");
  add_seed(bounds, true);
  bounds->add_option("--tau", opt.tau, "block length, or \"auto\"");
  bounds->add_option("--bound", opt.bound, "2a|2b")->check(CLI::IsMember({"2a", "2b"}));
  bounds->add_option("--delta", opt.delta, "failure budget");
  bounds->add_option("--eps", opt.eps, "mixing slack");
  bounds->add_option("--target", opt.target, "symbol whose mass is tracked");
  auto* v2_opt = bounds->add_option("--v2", opt.v2, "block variance override");
  add_out(bounds);

  simulate->callback([&] { runner = [&] { return run_simulate(opt); }; });
  estimate->callback([&] {
    const bool have_model = est_model->count() > 0;
    const bool have_tokens = est_tokens->count() > 0;
    if (!have_model && !have_tokens)
      throw CLI::ValidationError("estimate", "either --tokens or --model is required");
    if (have_model && est_n->count() == 0)
      throw CLI::ValidationError("estimate", "--model input requires --n");
    if (have_model && est_seed->count() == 0)
      throw CLI::ValidationError("estimate", "--model input requires --seed");
    runner = [&, have_model] { return run_estimate(opt, have_model); };
  });
  evaluate->callback([&] { runner = [&] { return run_evaluate(opt); }; });
  sweep->callback([&] {
    if (opt.format.empty() || sweep->get_option("--format")->count() == 0) opt.format = "csv";
    runner = [&] { return run_sweep(opt); };
  });
  bounds->callback([&] {
    const bool have_v2 = v2_opt->count() > 0;
    runner = [&, have_v2] { return run_bounds(opt, have_v2); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::string doc = runner();
    if (opt.out_path.empty())
      std::fputs(doc.c_str(), stdout);
    else
      write_text_file(opt.out_path, doc);
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

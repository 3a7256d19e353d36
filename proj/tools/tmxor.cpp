// tmxor: command-line front end for the chain verifier and the Monte Carlo lab.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 verification or
// assertion failure.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tmxor/acceptance.hpp"
#include "tmxor/dtmc.hpp"
#include "tmxor/io.hpp"
#include "tmxor/lab.hpp"
#include "tmxor/presets.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFailed = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TMXOR_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("TMXOR_SEED is not an unsigned integer: ") + env);
  }
  return 1;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open output file " + path);
  out << text;
}

struct DtmcArgs {
  double s = 10.0;
  int T = 1;
  bool single_clause = false;
  std::string dataset = "xor-full";
  std::optional<double> u1;
  std::optional<double> u2;
  double tol = tmxor::dtmc::kSquaringTolerance;
  double absorb_tol = tmxor::dtmc::kAbsorbingTolerance;
  int max_iters = tmxor::dtmc::kMaxSquarings;
  std::string format = "json";
  std::string out;
  std::string matrix_out;
  std::string expect = "absorbing";
  std::optional<std::uint64_t> seed;
};

int cmd_dtmc(const DtmcArgs& a) {
  using namespace tmxor;
  const std::uint64_t seed = resolve_seed(a.seed);
  if (!(a.s >= 1.0)) throw UsageError("--s must be >= 1");
  if (a.T < 1) throw UsageError("--T must be >= 1");
  if (!a.single_clause && (a.u1 || a.u2)) throw UsageError("--u1/--u2 only apply with --single-clause");

  const Dataset data = dataset_by_name(a.dataset);
  dtmc::TransitionMatrix P;
  json config = {{"s", a.s}, {"dataset", data.name}, {"tol", a.tol}, {"absorb_tol", a.absorb_tol},
                 {"max_iters", a.max_iters}};
  if (a.single_clause) {
    const double g1 = a.u1.value_or(0.5);
    const double g2 = a.u2.value_or(0.5);
    if (!(g1 > 0.0 && g1 <= 1.0 && g2 > 0.0 && g2 <= 1.0)) throw UsageError("--u1/--u2 must lie in (0, 1]");
    P = dtmc::build_single_clause_matrix(data, g1, g2, a.s);
    config["clauses"] = 1;
    config["feedback_mode"] = {{"kind", "fixed"}, {"u1", g1}, {"u2", g2}};
  } else {
    P = dtmc::build_chain(2, data, uniform_weights(data.rows.size()), a.s, a.T);
    config["clauses"] = 2;
    config["T"] = a.T;
    config["feedback_mode"] = {{"kind", "t-driven"}};
  }
  config["input_dist"] = uniform_weights(data.rows.size());

  if (!a.matrix_out.empty()) {
    if (a.format == "csv") {
      std::ostringstream os;
      dtmc::write_csv(os, P);
      emit(a.matrix_out, os.str());
    } else {
      emit(a.matrix_out, dtmc::to_json(P).dump() + "\n");
    }
  }

  json out;
  bool passed = false;
  try {
    const auto report = dtmc::verify_chain(P, a.tol, a.max_iters, a.absorb_tol);
    out = dtmc::to_json(report);
    const auto& abs = report.states.absorbing;
    if (a.expect == "recurrent") {
      passed = abs.empty();
    } else if (a.single_clause) {
      passed = report.states.verdict() && !abs.empty();
    } else {
      passed = report.states.verdict() && abs == std::vector<int>{106, 151};
    }
  } catch (const dtmc::NonConvergenceError& e) {
    out = {{"error", e.what()}, {"last_change", e.last_change()}, {"iterations", e.iterations()}};
    passed = false;
  }
  out["config"] = config;
  out["seed"] = seed;
  out["expect"] = a.expect;
  out["passed"] = passed;
  emit(a.out, out.dump(2) + "\n");
  return passed ? kOk : kFailed;
}

struct TrainArgs {
  int m = 2;
  int T = 1;
  double s = 10.0;
  int N = 1;
  int Th = 1;
  std::optional<std::uint64_t> seed;
  std::size_t steps = 100000;
  std::size_t runs = 200;
  std::string dataset = "xor-full";
  bool dataset_given = false;
  std::optional<double> u1;
  std::optional<double> u2;
  std::string format = "json";
  std::string out;
  std::string assertion;
  std::size_t stride = 0;
  std::size_t dwell = 1000;
  unsigned threads = 0;
};

int cmd_train(const TrainArgs& a) {
  using namespace tmxor;
  const std::uint64_t seed = resolve_seed(a.seed);
  if (a.T > a.m) throw UsageError("--T must not exceed --m");

  lab::ExperimentSpec spec;
  spec.config.m = a.m;
  spec.config.T = a.T;
  spec.config.s = a.s;
  spec.config.N = a.N;
  spec.config.Th = a.Th;
  if (a.u1 || a.u2) spec.config.fixed_gates = GateConstants{a.u1.value_or(0.5), a.u2.value_or(0.5)};
  spec.dataset = dataset_by_name(a.dataset);
  spec.runs = a.runs;
  spec.steps = a.steps;
  spec.snapshot_stride = a.stride;
  spec.dwell = a.dwell;
  spec.threads = a.threads;
  if (a.format == "csv" && spec.snapshot_stride == 0) spec.snapshot_stride = 1000;

  if (!a.assertion.empty()) presets::prepare(a.assertion, spec, a.dataset_given);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto report = lab::run_experiment(spec, seed);
  std::optional<presets::Outcome> outcome;
  if (!a.assertion.empty()) outcome = presets::evaluate(a.assertion, report);

  if (a.format == "csv") {
    std::ostringstream os;
    lab::write_trajectories_csv(os, report);
    emit(a.out, os.str());
  } else {
    json j = lab::to_json(report);
    j["seed"] = seed;
    if (outcome) {
      j["assertion"] = {{"preset", outcome->preset},
                        {"metric", outcome->metric},
                        {"value", outcome->value},
                        {"threshold", outcome->threshold},
                        {"passed", outcome->passed}};
    }
    emit(a.out, j.dump(2) + "\n");
  }
  if (outcome) {
    std::cerr << (outcome->passed ? "PASS " : "FAIL ") << outcome->preset << ": " << outcome->metric << " = "
              << outcome->value << " (threshold " << outcome->threshold << ")\n";
    return outcome->passed ? kOk : kFailed;
  }
  return kOk;
}

int cmd_verify_all(const std::vector<std::string>& only) {
  using namespace tmxor::acceptance;
  for (const auto& g : only) {
    if (std::find(groups().begin(), groups().end(), g) == groups().end()) {
      throw UsageError("unknown group '" + g + "' for --only");
    }
  }
  const auto results = run_all(Thresholds{}, only);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << format_line(r) << '\n';
    if (!r.passed) ++failed;
  }
  std::cout << (failed == 0 ? "all " : "") << results.size() - static_cast<std::size_t>(failed) << "/"
            << results.size() << " criteria passed\n";
  return failed == 0 ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tsetlin Machine XOR convergence laboratory"};
  app.require_subcommand(1);

  DtmcArgs dtmc;
  auto* dtmc_cmd = app.add_subcommand("dtmc", "Build the exact chain and check its absorbing states");
  dtmc_cmd->add_option("--s", dtmc.s, "Granularity s (>= 1)");
  dtmc_cmd->add_option("--T", dtmc.T, "Target threshold T (two-clause chain)");
  dtmc_cmd->add_flag("--single-clause", dtmc.single_clause, "16-state chain of one clause with constant gates");
  dtmc_cmd->add_option("--dataset", dtmc.dataset, "xor-full | subpattern-a | subpattern-b");
  dtmc_cmd->add_option("--u1", dtmc.u1, "Constant Type I gate (single clause)");
  dtmc_cmd->add_option("--u2", dtmc.u2, "Constant Type II gate (single clause)");
  dtmc_cmd->add_option("--tol", dtmc.tol, "Convergence tolerance between successive squarings");
  dtmc_cmd->add_option("--absorb-tol", dtmc.absorb_tol, "Tolerance for absorbing states and limit properties");
  dtmc_cmd->add_option("--max-iters", dtmc.max_iters, "Maximum number of squarings");
  dtmc_cmd->add_option("--format", dtmc.format, "Matrix dump format")->check(CLI::IsMember({"json", "csv"}));
  dtmc_cmd->add_option("--out", dtmc.out, "Report path (default stdout)");
  dtmc_cmd->add_option("--matrix-out", dtmc.matrix_out, "Write the transition matrix here");
  dtmc_cmd->add_option("--expect", dtmc.expect, "absorbing | recurrent")
      ->check(CLI::IsMember({"absorbing", "recurrent"}));
  dtmc_cmd->add_option("--seed", dtmc.seed, "Recorded in the report (chains are exact)");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Run seeded training experiments");
  train_cmd->add_option("--m", train.m, "Number of clauses");
  train_cmd->add_option("--T", train.T, "Target threshold T");
  train_cmd->add_option("--s", train.s, "Granularity s (>= 1)");
  train_cmd->add_option("--N", train.N, "TA half-depth N");
  train_cmd->add_option("--Th", train.Th, "Classification threshold");
  train_cmd->add_option("--seed", train.seed, "Master seed (falls back to TMXOR_SEED)");
  train_cmd->add_option("--steps", train.steps, "Training steps per run");
  train_cmd->add_option("--runs", train.runs, "Independent runs");
  auto* ds = train_cmd->add_option("--dataset", train.dataset, "xor-full | subpattern-a | subpattern-b");
  train_cmd->add_option("--u1", train.u1, "Constant Type I gate (disables T)");
  train_cmd->add_option("--u2", train.u2, "Constant Type II gate (disables T)");
  train_cmd->add_option("--format", train.format, "json report or csv trajectories")
      ->check(CLI::IsMember({"json", "csv"}));
  train_cmd->add_option("--out", train.out, "Output path (default stdout)");
  train_cmd->add_option("--assert", train.assertion, "Assertion preset")->check(CLI::IsMember(tmxor::presets::names()));
  train_cmd->add_option("--stride", train.stride, "Trajectory sampling stride (0: none)");
  train_cmd->add_option("--dwell", train.dwell, "Steps coverage must hold to count as absorbed");
  train_cmd->add_option("--threads", train.threads, "Worker threads (0: hardware concurrency)");

  std::vector<std::string> only;
  auto* verify_cmd = app.add_subcommand("verify-all", "Run the acceptance criteria");
  verify_cmd->add_option("--only", only, "Restrict to groups: feedback, dtmc, oracle, mc, determinism")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*dtmc_cmd) return cmd_dtmc(dtmc);
    if (*train_cmd) {
      train.dataset_given = ds->count() > 0;
      return cmd_train(train);
    }
    if (*verify_cmd) return cmd_verify_all(only);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

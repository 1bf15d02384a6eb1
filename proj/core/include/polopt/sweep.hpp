#pragma once

// Multi-trial experiment sweeps over condition × regime × K.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "polopt/materials.hpp"
#include "polopt/polarimeter.hpp"
#include "polopt/training.hpp"

namespace polopt {

struct SweepSpec {
  std::vector<Condition> conditions{Condition::LP, Condition::QWP, Condition::LP_QWP};
  std::vector<Regime> regimes{Regime::Random, Regime::Uniform, Regime::Optimized};
  std::vector<int> k_values{1, 2, 3, 4};
  int trials = 10;
  std::uint64_t base_seed = 1;
  TrainConfig train;
  std::filesystem::path out_dir;  ///< empty: nothing is written
  bool plot = false;
  int threads = 1;
};

struct TrialRecord {
  Condition condition = Condition::LP;
  Regime regime = Regime::Random;
  int k = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double test_accuracy = 0.0;
  int rank = 0;
  double condition_number = 0.0;
  double final_loss = 0.0;
  MeasurementPlan plan;
};

struct SummaryRecord {
  Condition condition = Condition::LP;
  Regime regime = Regime::Random;
  int k = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  ///< unbiased (n-1)
  int n_trials = 0;
};

struct SweepResult {
  std::vector<TrialRecord> trials;     ///< (condition, regime, K, trial) order
  std::vector<SummaryRecord> summary;  ///< (condition, regime, K) order
  std::vector<std::string> skipped;
};

/// Why a (condition, regime, K) cell cannot run, or empty if it can.
std::string skip_reason(Condition condition, Regime regime, int k);

/// Trial t uses seed base_seed + t. Every regime runs all trials: even with
/// a fixed Uniform plan, classifier initialization and augmentation depend on
/// the seed. Skipped cells are logged to `log` (if given) and listed in the
/// result. Rows are gathered by index, so the output does not depend on the
/// number of worker threads.
SweepResult run_sweep(const SweepSpec& spec, const Dataset& dataset, std::ostream* log = nullptr);

/// Header: condition,regime,K,trial,seed,test_accuracy,rank,condition_number
std::string results_csv(const SweepResult& result);
/// Header: condition,regime,K,mean_accuracy,std_accuracy,n_trials
std::string summary_csv(const SweepResult& result);
/// One JSON object per trial: {"condition","regime","K","trial","seed","plan"}.
std::string plans_jsonl(const SweepResult& result);

struct PlanRecord {
  Condition condition = Condition::LP;
  Regime regime = Regime::Random;
  int k = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  MeasurementPlan plan;
};

/// Parses plans_jsonl output. Throws FormatError.
std::vector<PlanRecord> plans_from_jsonl(std::string_view text);

/// Writes results.csv, summary.csv, plans.jsonl and, with spec.plot, one
/// accuracy_<condition>.svg per condition into spec.out_dir.
void write_sweep_outputs(const SweepSpec& spec, const SweepResult& result);

}  // namespace polopt

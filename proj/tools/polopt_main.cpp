// polopt: dataset generation, experiment sweeps, Mueller estimation demos and
// angle analysis.
//
// Exit codes: 0 success, 2 usage or parse error, 3 runtime failure.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polopt/analysis.hpp"
#include "polopt/dataset_io.hpp"
#include "polopt/materials.hpp"
#include "polopt/plan_io.hpp"
#include "polopt/polarimeter.hpp"
#include "polopt/svg.hpp"
#include "polopt/sweep.hpp"
#include "polopt/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polopt;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + path.string());
}

/// Loads a --config file. Unknown keys are rejected so typos do not pass silently.
json load_config(const std::string& path, const std::vector<std::string>& known) {
  if (path.empty()) return json::object();
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config " + path + ": expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw UsageError("config " + path + ": unknown key '" + key + "'");
  return j;
}

template <class T>
void override_from(const json& cfg, const char* key, T& target) {
  if (auto it = cfg.find(key); it != cfg.end()) {
    try {
      target = it->get<T>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("config key '") + key + "': " + e.what());
    }
  }
}

template <class T, class F>
std::vector<T> parse_list(const std::vector<std::string>& names, F parse) {
  std::vector<T> out;
  for (const auto& n : names) {
    try {
      out.push_back(parse(n));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string config;
  std::uint64_t seed = 1;
  int materials_per_category = 17;
  int samples_per_material = 10;
  double train_fraction = 0.7;
  double sigma = kDefaultPerturbation;
  std::string out;
};

void add_generate(CLI::App& app, GenerateArgs& a) {
  auto* cmd = app.add_subcommand("generate", "Generate the synthetic material dataset");
  cmd->add_option("--config", a.config, "JSON file whose keys override the flags");
  cmd->add_option("--seed", a.seed, "Dataset seed")->capture_default_str();
  cmd->add_option("--materials-per-category", a.materials_per_category)->capture_default_str();
  cmd->add_option("--samples-per-material", a.samples_per_material)->capture_default_str();
  cmd->add_option("--train-fraction", a.train_fraction, "Share of materials in the train split")
      ->capture_default_str();
  cmd->add_option("--sigma", a.sigma, "Relative per-sample perturbation")->capture_default_str();
  cmd->add_option("--out", a.out, "Output directory");
}

int run_generate(GenerateArgs a) {
  const json cfg = load_config(a.config, {"seed", "materials_per_category", "samples_per_material",
                                          "train_fraction", "sigma", "out"});
  override_from(cfg, "seed", a.seed);
  override_from(cfg, "materials_per_category", a.materials_per_category);
  override_from(cfg, "samples_per_material", a.samples_per_material);
  override_from(cfg, "train_fraction", a.train_fraction);
  override_from(cfg, "sigma", a.sigma);
  override_from(cfg, "out", a.out);
  if (a.out.empty()) throw UsageError("generate: --out is required");
  if (a.materials_per_category < 1 || a.samples_per_material < 1)
    throw UsageError("generate: counts must be positive");
  if (!(a.train_fraction > 0.0 && a.train_fraction <= 1.0))
    throw UsageError("generate: --train-fraction must lie in (0, 1]");

  DatasetSpec spec;
  spec.seed = a.seed;
  spec.materials_per_category = a.materials_per_category;
  spec.samples_per_material = a.samples_per_material;
  spec.train_fraction = a.train_fraction;
  spec.relative_sigma = a.sigma;
  const Dataset dataset = generate_dataset(spec);
  save_dataset(a.out, dataset);
  std::cout << "wrote " << dataset.samples.size() << " samples (" << dataset.train_ids.size() << " train / "
            << dataset.test_ids.size() << " test materials) to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string dataset;
  std::uint64_t data_seed = 1;
  std::vector<std::string> conditions{"LP", "QWP", "LP+QWP"};
  std::vector<std::string> regimes{"Random", "Uniform", "Optimized"};
  std::vector<int> k_values{1, 2, 3, 4};
  int trials = 10;
  std::uint64_t base_seed = 1;
  TrainConfig train;
  bool no_augment = false;
  int threads = 1;
  bool plot = false;
  bool quiet = false;
  std::string out;
};

void add_sweep(CLI::App& app, SweepArgs& a) {
  auto* cmd = app.add_subcommand("sweep", "Train and evaluate over condition x regime x K");
  cmd->add_option("--config", a.config, "JSON file whose keys override the flags");
  cmd->add_option("--dataset", a.dataset, "Dataset directory or JSONL file (default: synthesize one)");
  cmd->add_option("--data-seed", a.data_seed, "Seed of the synthesized dataset")->capture_default_str();
  cmd->add_option("--conditions", a.conditions, "LP, QWP, LP+QWP")->delimiter(',')->capture_default_str();
  cmd->add_option("--regimes", a.regimes, "Random, Uniform, Optimized")->delimiter(',')->capture_default_str();
  cmd->add_option("--k", a.k_values, "Capture counts")->delimiter(',')->capture_default_str();
  cmd->add_option("--trials", a.trials)->capture_default_str();
  cmd->add_option("--seed", a.base_seed, "Base seed; trial t uses seed+t")->capture_default_str();
  cmd->add_option("--steps", a.train.steps)->capture_default_str();
  cmd->add_option("--batch-size", a.train.batch_size)->capture_default_str();
  cmd->add_option("--lr-angles", a.train.lr_angles)->capture_default_str();
  cmd->add_option("--lr-classifier", a.train.lr_classifier)->capture_default_str();
  cmd->add_flag("--no-augment", a.no_augment, "Disable intensity and rotation augmentation");
  cmd->add_option("--threads", a.threads, "Worker threads")->capture_default_str();
  cmd->add_flag("--plot", a.plot, "Also write accuracy SVG plots");
  cmd->add_flag("--quiet", a.quiet, "Only print the summary");
  cmd->add_option("--out", a.out, "Output directory");
}

int run_sweep_cmd(SweepArgs a) {
  const json cfg = load_config(a.config, {"dataset", "data_seed", "conditions", "regimes", "k_values", "trials",
                                          "base_seed", "steps", "batch_size", "lr_angles", "lr_classifier",
                                          "beta1", "beta2", "eps", "augment", "threads", "plot", "out"});
  override_from(cfg, "dataset", a.dataset);
  override_from(cfg, "data_seed", a.data_seed);
  override_from(cfg, "conditions", a.conditions);
  override_from(cfg, "regimes", a.regimes);
  override_from(cfg, "k_values", a.k_values);
  override_from(cfg, "trials", a.trials);
  override_from(cfg, "base_seed", a.base_seed);
  override_from(cfg, "steps", a.train.steps);
  override_from(cfg, "batch_size", a.train.batch_size);
  override_from(cfg, "lr_angles", a.train.lr_angles);
  override_from(cfg, "lr_classifier", a.train.lr_classifier);
  override_from(cfg, "beta1", a.train.beta1);
  override_from(cfg, "beta2", a.train.beta2);
  override_from(cfg, "eps", a.train.eps);
  a.train.augment = !a.no_augment;
  override_from(cfg, "augment", a.train.augment);
  override_from(cfg, "threads", a.threads);
  override_from(cfg, "plot", a.plot);
  override_from(cfg, "out", a.out);
  if (a.out.empty()) throw UsageError("sweep: --out is required");
  if (a.trials < 1) throw UsageError("sweep: --trials must be >= 1");
  if (a.train.steps < 0 || a.train.batch_size < 1) throw UsageError("sweep: invalid step or batch settings");

  SweepSpec spec;
  spec.conditions = parse_list<Condition>(a.conditions, condition_from_string);
  spec.regimes = parse_list<Regime>(a.regimes, regime_from_string);
  spec.k_values = a.k_values;
  spec.trials = a.trials;
  spec.base_seed = a.base_seed;
  spec.train = a.train;
  spec.out_dir = a.out;
  spec.plot = a.plot;
  spec.threads = a.threads;

  Dataset dataset;
  if (a.dataset.empty()) {
    DatasetSpec ds;
    ds.seed = a.data_seed;
    dataset = generate_dataset(ds);
  } else {
    dataset = load_dataset(a.dataset, a.data_seed);
  }
  if (dataset.train_ids.empty() || dataset.test_ids.empty())
    throw std::runtime_error("sweep: dataset needs nonempty train and test splits");

  const SweepResult result = run_sweep(spec, dataset, a.quiet ? nullptr : &std::cerr);
  write_sweep_outputs(spec, result);
  std::cout << summary_csv(result);
  return 0;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string config;
  std::string plan;
  std::string uniform;
  int k = 0;
  std::string dataset;
  int index = -1;
  std::uint64_t random_seed = 1;
};

void add_estimate(CLI::App& app, EstimateArgs& a) {
  auto* cmd = app.add_subcommand("estimate", "Simulate a plan and recover the Mueller matrix by least squares");
  cmd->add_option("--config", a.config, "JSON file whose keys override the flags");
  cmd->add_option("--plan", a.plan, "Plan JSON file");
  cmd->add_option("--uniform", a.uniform, "Use the uniform plan of a condition (LP or QWP)");
  cmd->add_option("--k", a.k, "Capture count for --uniform");
  cmd->add_option("--dataset", a.dataset, "Dataset directory or JSONL file");
  cmd->add_option("--index", a.index, "Sample index into the dataset");
  cmd->add_option("--random-seed", a.random_seed, "Seed of a random material when no dataset is given")
      ->capture_default_str();
}

void print_matrix(std::ostream& os, const char* title, const MuellerMatrix& m) {
  os << title << "\n";
  for (int i = 0; i < 4; ++i) {
    os << " ";
    for (int j = 0; j < 4; ++j) os << " " << std::setw(12) << std::fixed << std::setprecision(8) << m.m[i][j];
    os << "\n";
  }
  os.unsetf(std::ios::floatfield);
}

int run_estimate(EstimateArgs a) {
  const json cfg = load_config(a.config, {"plan", "uniform", "k", "dataset", "index", "random_seed"});
  override_from(cfg, "plan", a.plan);
  override_from(cfg, "uniform", a.uniform);
  override_from(cfg, "k", a.k);
  override_from(cfg, "dataset", a.dataset);
  override_from(cfg, "index", a.index);
  override_from(cfg, "random_seed", a.random_seed);
  if (a.plan.empty() == a.uniform.empty()) throw UsageError("estimate: give exactly one of --plan or --uniform");

  std::optional<MeasurementPlan> plan;
  if (!a.plan.empty()) {
    plan = load_plan(a.plan);
  } else {
    try {
      plan = uniform_plan(condition_from_string(a.uniform), a.k);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("estimate: ") + e.what());
    }
  }

  MuellerMatrix truth;
  std::string source;
  if (!a.dataset.empty()) {
    const Dataset dataset = load_dataset(a.dataset);
    if (a.index < 0 || a.index >= static_cast<int>(dataset.samples.size()))
      throw UsageError("estimate: --index out of range (dataset has " + std::to_string(dataset.samples.size()) +
                       " samples)");
    truth = dataset.samples[a.index].mueller;
    source = "dataset sample " + std::to_string(a.index) + " (" +
             std::string(to_string(dataset.samples[a.index].category)) + ")";
  } else {
    Rng rng = make_stream(a.random_seed, {0x657374ULL});
    const auto category = category_from_index(static_cast<int>(rng() % kNumCategories));
    truth = rotate_mueller(synthesize_material(category, rng).mueller, Angle(draw_rotation(rng)));
    source = "random " + std::string(to_string(category)) + " material (seed " + std::to_string(a.random_seed) + ")";
  }

  const std::vector<double> f = measure(truth, *plan);
  const MuellerEstimate est = estimate_mueller(*plan, f);
  const PlanDiagnostics diag = plan_diagnostics(*plan);
  const auto observable = observable_entries(build_design_matrix(*plan));

  std::cout << "plan: " << to_string(plan->condition()) << ", K=" << plan->size() << "\n";
  std::cout << "source: " << source << "\n";
  print_matrix(std::cout, "true M:", truth);
  print_matrix(std::cout, "recovered M:", est.mueller);
  std::cout << "frobenius_error: " << std::scientific << std::setprecision(3)
            << truth.frobenius_distance(est.mueller) << "\n";
  std::cout << "residual: " << est.residual << "\n";
  std::cout.unsetf(std::ios::floatfield);
  std::cout << std::setprecision(6) << "rank: " << diag.rank << " / 16\n";
  std::cout << "condition_number: " << diag.condition_number << "\n";

  if (diag.rank == 16) {
    std::cout << "recovery: full\n";
  } else {
    bool block3 = true;
    double block_error = 0.0;
    for (int i = 0; i < 16; ++i) {
      const bool inside = i / 4 < 3 && i % 4 < 3;
      if (observable[i] != inside) block3 = false;
      if (observable[i]) block_error = std::max(block_error, std::abs(truth.m[i / 4][i % 4] - est.mueller.m[i / 4][i % 4]));
    }
    if (block3)
      std::cout << "recovery: block-only (upper-left 3x3 block; row and column 3 unobservable)\n";
    else
      std::cout << "recovery: partial (rank-deficient design)\n";
    std::cout << "observable entries:\n";
    for (int i = 0; i < 4; ++i) {
      std::cout << " ";
      for (int j = 0; j < 4; ++j) std::cout << " " << (observable[i * 4 + j] ? 1 : 0);
      std::cout << "\n";
    }
    std::cout << "max_error_on_observable: " << std::scientific << std::setprecision(3) << block_error << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string config;
  std::string plans;
  std::string condition = "LP";
  std::string regime = "Optimized";
  int k = 0;
  std::string out;
  bool plot = false;
};

void add_analyze(CLI::App& app, AnalyzeArgs& a) {
  auto* cmd = app.add_subcommand("analyze-angles", "Align and summarize optimized angles from plans.jsonl");
  cmd->add_option("--config", a.config, "JSON file whose keys override the flags");
  cmd->add_option("--plans", a.plans, "plans.jsonl written by sweep");
  cmd->add_option("--condition", a.condition, "LP or QWP")->capture_default_str();
  cmd->add_option("--regime", a.regime, "Regime filter")->capture_default_str();
  cmd->add_option("--k", a.k, "Capture count filter (default: every K present)");
  cmd->add_option("--out", a.out, "Output directory (default: print to stdout)");
  cmd->add_flag("--plot", a.plot, "Also write an SVG scatter per K");
}

int run_analyze(AnalyzeArgs a) {
  const json cfg = load_config(a.config, {"plans", "condition", "regime", "k", "out", "plot"});
  override_from(cfg, "plans", a.plans);
  override_from(cfg, "condition", a.condition);
  override_from(cfg, "regime", a.regime);
  override_from(cfg, "k", a.k);
  override_from(cfg, "out", a.out);
  override_from(cfg, "plot", a.plot);
  if (a.plans.empty()) throw UsageError("analyze-angles: --plans is required");

  Condition condition;
  Regime regime;
  try {
    condition = condition_from_string(a.condition);
    regime = regime_from_string(a.regime);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("analyze-angles: ") + e.what());
  }
  if (condition == Condition::LP_QWP) throw UsageError("analyze-angles: supports LP and QWP plans");

  std::map<int, std::vector<MeasurementPlan>> by_k;
  for (auto& rec : plans_from_jsonl(read_file(a.plans)))
    if (rec.condition == condition && rec.regime == regime && (a.k == 0 || rec.k == a.k))
      by_k[rec.k].push_back(std::move(rec.plan));

  if (!a.out.empty()) fs::create_directories(a.out);
  std::string name(to_string(condition));
  if (by_k.empty()) {
    std::cerr << "analyze-angles: no matching plans\n";
    const std::string header = angles_csv(AngleAnalysis{condition, {}, {}});
    if (a.out.empty())
      std::cout << header;
    else
      write_file(fs::path(a.out) / ("angles_" + name + ".csv"), header);
    return 0;
  }
  for (const auto& [k, plans] : by_k) {
    const AngleAnalysis analysis = condition == Condition::LP ? align_lp_angles(plans) : qwp_angle_scatter(plans);
    const std::string stem = name + "_K" + std::to_string(k);
    if (a.out.empty()) {
      std::cout << angles_csv(analysis) << "\n" << angle_summary_csv(analysis);
    } else {
      write_file(fs::path(a.out) / ("angles_" + stem + ".csv"), angles_csv(analysis));
      write_file(fs::path(a.out) / ("angle_summary_" + stem + ".csv"), angle_summary_csv(analysis));
      if (a.plot) write_file(fs::path(a.out) / ("angles_" + stem + ".svg"), angle_scatter_svg(analysis));
      std::cout << "K=" << k << ": " << plans.size() << " plans -> " << (fs::path(a.out) / ("angles_" + stem + ".csv")).string()
                << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarimetric measurement design and material classification"};
  app.require_subcommand(1);
  GenerateArgs generate;
  SweepArgs sweep;
  EstimateArgs estimate;
  AnalyzeArgs analyze;
  add_generate(app, generate);
  add_sweep(app, sweep);
  add_estimate(app, estimate);
  add_analyze(app, analyze);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("generate")) return run_generate(generate);
    if (app.got_subcommand("sweep")) return run_sweep_cmd(sweep);
    if (app.got_subcommand("estimate")) return run_estimate(estimate);
    if (app.got_subcommand("analyze-angles")) return run_analyze(analyze);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

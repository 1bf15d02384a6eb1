#include "polopt/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "csv_format.hpp"
#include "json_support.hpp"
#include "polopt/analysis.hpp"
#include "polopt/svg.hpp"

namespace polopt {

namespace fs = std::filesystem;

std::string skip_reason(Condition condition, Regime regime, int k) {
  if (k < 1) return "K must be >= 1";
  if (regime == Regime::Uniform && condition == Condition::LP_QWP)
    return "no uniform scheme exists for LP+QWP";
  if (regime == Regime::Uniform && condition == Condition::LP && k > 16)
    return "LP uniform grid has only 16 configurations";
  return {};
}

SweepResult run_sweep(const SweepSpec& spec, const Dataset& dataset, std::ostream* log) {
  struct Job {
    Condition condition;
    Regime regime;
    int k;
    int trial;
  };
  std::vector<Job> jobs;
  SweepResult result;
  for (Condition c : spec.conditions)
    for (Regime r : spec.regimes)
      for (int k : spec.k_values) {
        if (const std::string why = skip_reason(c, r, k); !why.empty()) {
          std::ostringstream line;
          line << "skip " << to_string(c) << "/" << to_string(r) << " K=" << k << ": " << why;
          result.skipped.push_back(line.str());
          if (log) *log << line.str() << "\n";
          continue;
        }
        for (int t = 0; t < spec.trials; ++t) jobs.push_back({c, r, k, t});
      }

  const std::vector<MaterialSample> test = [&] {
    std::vector<MaterialSample> out;
    for (int i : dataset.indices(Split::test)) out.push_back(dataset.samples[i]);
    return out;
  }();

  std::vector<std::optional<TrialRecord>> slots(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      try {
        const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(job.trial);
        const TrainResult trained = train(dataset, job.condition, job.regime, job.k, seed, spec.train);
        const EvalResult eval = evaluate(trained.classifier, trained.plan, test);
        const PlanDiagnostics diag = plan_diagnostics(trained.plan);
        slots[i] = TrialRecord{job.condition, job.regime, job.k, job.trial, seed, eval.accuracy, diag.rank,
                               diag.condition_number,
                               trained.history.empty() ? 0.0 : trained.history.back().loss, trained.plan};
        if (log) {
          std::lock_guard lock(log_mutex);
          *log << to_string(job.condition) << "/" << to_string(job.regime) << " K=" << job.k
               << " trial=" << job.trial << " acc=" << eval.accuracy << " rank=" << diag.rank << "\n";
        }
      } catch (...) {
        std::lock_guard lock(log_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs.size());
        return;
      }
    }
  };

  const int threads = std::max(1, spec.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& s : slots) result.trials.push_back(std::move(*s));

  for (std::size_t i = 0; i < result.trials.size();) {
    const TrialRecord& first = result.trials[i];
    std::vector<double> acc;
    std::size_t j = i;
    while (j < result.trials.size() && result.trials[j].condition == first.condition &&
           result.trials[j].regime == first.regime && result.trials[j].k == first.k)
      acc.push_back(result.trials[j++].test_accuracy);
    const MeanStd ms = mean_std(acc);
    result.summary.push_back({first.condition, first.regime, first.k, ms.mean, ms.std, static_cast<int>(acc.size())});
    i = j;
  }
  return result;
}

std::string results_csv(const SweepResult& result) {
  std::string out = "condition,regime,K,trial,seed,test_accuracy,rank,condition_number\n";
  for (const auto& t : result.trials) {
    out += std::string(to_string(t.condition)) + "," + std::string(to_string(t.regime)) + "," +
           std::to_string(t.k) + "," + std::to_string(t.trial) + "," + std::to_string(t.seed) + "," +
           csv::num(t.test_accuracy) + "," + std::to_string(t.rank) + "," + csv::num(t.condition_number) + "\n";
  }
  return out;
}

std::string summary_csv(const SweepResult& result) {
  std::string out = "condition,regime,K,mean_accuracy,std_accuracy,n_trials\n";
  for (const auto& s : result.summary) {
    out += std::string(to_string(s.condition)) + "," + std::string(to_string(s.regime)) + "," +
           std::to_string(s.k) + "," + csv::num(s.mean_accuracy) + "," + csv::num(s.std_accuracy) + "," +
           std::to_string(s.n_trials) + "\n";
  }
  return out;
}

std::string plans_jsonl(const SweepResult& result) {
  std::string out;
  for (const auto& t : result.trials) {
    const nlohmann::json j = {{"condition", std::string(to_string(t.condition))},
                              {"regime", std::string(to_string(t.regime))},
                              {"K", t.k},
                              {"trial", t.trial},
                              {"seed", t.seed},
                              {"plan", detail::plan_to_json_value(t.plan)}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<PlanRecord> plans_from_jsonl(std::string_view text) {
  std::vector<PlanRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "plans line " + std::to_string(line_no);
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      MeasurementPlan plan = detail::plan_from_json_value(detail::require(j, "plan", where.c_str()));
      PlanRecord rec{plan.condition(), Regime::Optimized, plan.size(), 0, 0, plan};
      if (auto it = j.find("regime"); it != j.end()) rec.regime = regime_from_string(it->get<std::string>());
      rec.trial = j.value("trial", 0);
      rec.seed = j.value("seed", std::uint64_t{0});
      out.push_back(std::move(rec));
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  return out;
}

void write_sweep_outputs(const SweepSpec& spec, const SweepResult& result) {
  if (spec.out_dir.empty()) return;
  fs::create_directories(spec.out_dir);
  detail::write_text_file(spec.out_dir / "results.csv", results_csv(result));
  detail::write_text_file(spec.out_dir / "summary.csv", summary_csv(result));
  detail::write_text_file(spec.out_dir / "plans.jsonl", plans_jsonl(result));
  if (spec.plot) {
    for (Condition c : spec.conditions) {
      std::string name(to_string(c));
      for (char& ch : name)
        if (ch == '+') ch = '_';
      detail::write_text_file(spec.out_dir / ("accuracy_" + name + ".svg"), accuracy_plot_svg(result, c));
    }
  }
}

}  // namespace polopt

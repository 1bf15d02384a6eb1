#include "polopt/training.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json_support.hpp"
#include "polopt/adam.hpp"

namespace polopt {

namespace {

constexpr std::uint64_t kAngleInitStream = 0x414e474c45ULL;
constexpr std::uint64_t kClassifierInitStream = 0x434c4153ULL;
constexpr std::uint64_t kBatchStream = 0x4241544348ULL;

std::vector<ad::Var> register_angles(ad::Tape& tape, const AnglePack& pack) {
  std::vector<ad::Var> vars;
  vars.reserve(pack.params.size());
  for (double v : pack.params) vars.push_back(tape.variable(v));
  return vars;
}

}  // namespace

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Random: return "Random";
    case Regime::Uniform: return "Uniform";
    case Regime::Optimized: return "Optimized";
  }
  return "?";
}

Regime regime_from_string(std::string_view name) {
  if (name == "Random") return Regime::Random;
  if (name == "Uniform") return Regime::Uniform;
  if (name == "Optimized") return Regime::Optimized;
  throw std::invalid_argument("unknown regime '" + std::string(name) + "'");
}

AnglePack AnglePack::from_plan(const MeasurementPlan& plan) {
  AnglePack pack;
  pack.condition = plan.condition();
  pack.source_intensity = plan.source_intensity();
  for (const auto& c : plan.captures()) {
    switch (plan.condition()) {
      case Condition::LP:
        pack.params.insert(pack.params.end(), {c.theta_lg.radians(), c.theta_la.radians()});
        break;
      case Condition::QWP:
        pack.params.insert(pack.params.end(), {c.theta_qg.radians(), c.theta_qa.radians()});
        break;
      case Condition::LP_QWP:
        pack.params.insert(pack.params.end(), {c.theta_lg.radians(), c.theta_qg.radians(),
                                               c.theta_qa.radians(), c.theta_la.radians()});
        break;
    }
  }
  return pack;
}

AnglePack AnglePack::random(Condition condition, int captures, Rng& rng, double source_intensity) {
  if (captures < 1) throw std::invalid_argument("plan needs at least one capture");
  AnglePack pack;
  pack.condition = condition;
  pack.source_intensity = source_intensity;
  pack.params.resize(static_cast<std::size_t>(captures) * free_angles_per_capture(condition));
  for (double& v : pack.params) v = uniform(rng, 0.0, std::numbers::pi);
  return pack;
}

MeasurementPlan AnglePack::to_plan() const {
  const int n = free_angles_per_capture(condition);
  std::vector<CaptureConfig> captures;
  for (int k = 0; k < this->captures(); ++k) {
    const auto a = expand_capture<double>(condition, std::span<const double>(params).subspan(k * n, n));
    captures.push_back({Angle(a[0]), Angle(a[1]), Angle(a[2]), Angle(a[3])});
  }
  return MeasurementPlan(condition, std::move(captures), source_intensity);
}

std::vector<ad::Var> forward_measure(const MuellerMatrix& m, std::span<const ad::Var> angles,
                                     Condition condition, double source_intensity) {
  const int n = free_angles_per_capture(condition);
  if (angles.empty() || angles.size() % n != 0)
    throw std::invalid_argument("angle count does not match the condition");
  std::vector<ad::Var> out;
  for (std::size_t k = 0; k < angles.size() / n; ++k) {
    const auto a = expand_capture<ad::Var>(condition, angles.subspan(k * n, n));
    const auto p = generator_output_t<ad::Var>(condition, a[0], a[1], source_intensity);
    const auto row = analyzer_row_t<ad::Var>(condition, a[2], a[3]);
    out.push_back(bilinear_intensity_t(row, m, p));
  }
  return out;
}

OpticsTensors optics_tensors(ad::Tape& tape, std::span<const ad::Var> angles, Condition condition,
                             double source_intensity) {
  const int n = free_angles_per_capture(condition);
  if (angles.empty() || angles.size() % n != 0)
    throw std::invalid_argument("angle count does not match the condition");
  const int captures = static_cast<int>(angles.size()) / n;
  std::vector<ad::Var> analyzer;
  std::vector<ad::Var> generator;
  for (int k = 0; k < captures; ++k) {
    const auto a = expand_capture<ad::Var>(condition, angles.subspan(k * n, n));
    const auto p = generator_output_t<ad::Var>(condition, a[0], a[1], source_intensity);
    const auto row = analyzer_row_t<ad::Var>(condition, a[2], a[3]);
    analyzer.insert(analyzer.end(), row.begin(), row.end());
    generator.insert(generator.end(), p.begin(), p.end());
  }
  return {ad::stack(tape, analyzer, captures, 4), ad::stack(tape, generator, captures, 4)};
}

ad::Tensor measure_batch(ad::Tape& tape, const OpticsTensors& optics, std::span<const MuellerMatrix> batch) {
  const int captures = optics.analyzer.rows;
  const int size = static_cast<int>(batch.size());
  const auto a = tape.value(optics.analyzer);
  const auto p = tape.value(optics.generator);
  std::vector<double> values(static_cast<std::size_t>(size) * captures);
  for (int b = 0; b < size; ++b) {
    const MuellerMatrix& m = batch[b];
    for (int k = 0; k < captures; ++k) {
      double acc = 0.0;
      for (int i = 0; i < 4; ++i) {
        double row = 0.0;
        for (int j = 0; j < 4; ++j) row += m(i, j) * p[4 * k + j];
        acc += a[4 * k + i] * row;
      }
      values[static_cast<std::size_t>(b) * captures + k] = acc;
    }
  }
  return tape.record_tensor(
      size, captures, std::move(values),
      [optics, mats = std::vector<MuellerMatrix>(batch.begin(), batch.end())](ad::Tape& t, const ad::Tensor& self) {
        const auto g = t.grad(self);
        const auto a = t.value(optics.analyzer);
        const auto p = t.value(optics.generator);
        auto ga = t.grad(optics.analyzer);
        auto gp = t.grad(optics.generator);
        const int captures = self.cols;
        for (int b = 0; b < self.rows; ++b) {
          const MuellerMatrix& m = mats[b];
          for (int k = 0; k < captures; ++k) {
            const double gk = g[static_cast<std::size_t>(b) * captures + k];
            if (gk == 0.0) continue;
            for (int i = 0; i < 4; ++i) {
              double mp = 0.0;
              double am = 0.0;
              for (int j = 0; j < 4; ++j) {
                mp += m(i, j) * p[4 * k + j];
                am += a[4 * k + j] * m(j, i);
              }
              ga[4 * k + i] += gk * mp;
              gp[4 * k + i] += gk * am;
            }
          }
        }
      });
}

std::array<double, kNumCategories> class_weights(std::span<const int> labels) {
  std::array<int, kNumCategories> counts{};
  for (int y : labels) ++counts.at(y);
  int present = 0;
  for (int c : counts) present += c > 0 ? 1 : 0;
  std::array<double, kNumCategories> w{};
  for (int c = 0; c < kNumCategories; ++c)
    if (counts[c] > 0)
      w[c] = static_cast<double>(labels.size()) / (static_cast<double>(present) * counts[c]);
  return w;
}

Minibatch make_minibatch(const Dataset& dataset, std::span<const int> pool, Rng& rng, const BatchOptions& options) {
  if (pool.empty()) throw std::invalid_argument("minibatch pool is empty");
  Minibatch batch;
  batch.mueller.reserve(options.size);
  batch.labels.reserve(options.size);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int i = 0; i < options.size; ++i) {
    const MaterialSample& s = dataset.samples.at(pool[pick(rng)]);
    MuellerMatrix m = s.mueller;
    if (options.augment) {
      m = augment_intensity(m, rng);
      m = augment_rotation(m, rng);
    }
    batch.mueller.push_back(m);
    batch.labels.push_back(index_of(s.category));
  }
  batch.class_weights = class_weights(batch.labels);
  return batch;
}

MeasurementPlan uniform_plan(Condition condition, int captures) {
  if (captures < 1) throw std::invalid_argument("plan needs at least one capture");
  std::vector<CaptureConfig> out;
  switch (condition) {
    case Condition::LP: {
      if (captures > 16) throw std::invalid_argument("LP uniform grid has only 16 configurations");
      for (int k = 0; k < captures; ++k) {
        const Angle g = Angle::from_degrees(45.0 * (k / 4));
        const Angle a = Angle::from_degrees(45.0 * (k % 4));
        out.push_back({g, Angle(0.0), Angle(0.0), a});
      }
      break;
    }
    case Condition::QWP: {
      for (int k = 0; k < captures; ++k) {
        const double g = k * std::numbers::pi / captures;
        out.push_back({Angle(0.0), Angle(g), Angle(wrap_half_turn(5.0 * g)), Angle(0.0)});
      }
      break;
    }
    case Condition::LP_QWP:
      throw std::invalid_argument("no uniform scheme exists for LP+QWP");
  }
  return MeasurementPlan(condition, std::move(out));
}

ad::Tensor batch_loss(ad::Tape& tape, std::span<const ad::Var> angles, Condition condition,
                      double source_intensity, const ClassifierTensors& classifier, const Minibatch& batch) {
  const OpticsTensors optics = optics_tensors(tape, angles, condition, source_intensity);
  const ad::Tensor x = measure_batch(tape, optics, batch.mueller);
  const ad::Tensor logits = mlp_forward(tape, classifier, x);
  return ad::weighted_cross_entropy(tape, logits, batch.labels, batch.class_weights);
}

double batch_loss_value(const AnglePack& angles, const ClassifierParams& classifier, const Minibatch& batch) {
  ad::Tape tape;
  const auto vars = register_angles(tape, angles);
  const auto layers = register_classifier(tape, classifier);
  const ad::Tensor loss = batch_loss(tape, vars, angles.condition, angles.source_intensity, layers, batch);
  return tape.value(loss)[0];
}

MeasurementPlan initial_plan(Condition condition, Regime regime, int captures, std::uint64_t seed) {
  if (regime == Regime::Uniform) return uniform_plan(condition, captures);
  Rng rng = make_stream(seed, {kAngleInitStream});
  return AnglePack::random(condition, captures, rng).to_plan();
}

TrainResult train(const Dataset& dataset, Condition condition, Regime regime, int captures, std::uint64_t seed,
                  const TrainConfig& config) {
  return train_from(dataset, initial_plan(condition, regime, captures, seed), regime, seed, config);
}

TrainResult train_from(const Dataset& dataset, const MeasurementPlan& initial, Regime regime, std::uint64_t seed,
                       const TrainConfig& config) {
  const std::vector<int> pool = dataset.indices(Split::train);
  if (pool.empty()) throw std::invalid_argument("training split is empty");

  AnglePack angles = AnglePack::from_plan(initial);
  Rng init_rng = make_stream(seed, {kClassifierInitStream});
  ClassifierParams classifier = init_classifier(initial.size(), kNumCategories, init_rng);

  const bool optimize_angles = regime == Regime::Optimized;
  Adam classifier_opt(classifier.weights.size(),
                      {config.lr_classifier, config.beta1, config.beta2, config.eps});
  Adam angle_opt(angles.params.size(), {config.lr_angles, config.beta1, config.beta2, config.eps});

  Rng batch_rng = make_stream(seed, {kBatchStream});
  const BatchOptions batch_options{config.batch_size, config.augment};

  TrainResult result{initial, classifier, {}};
  result.history.reserve(static_cast<std::size_t>(std::max(config.steps, 0)));
  ad::Tape tape;
  std::vector<double> angle_grads(angles.params.size());

  for (int step = 0; step < config.steps; ++step) {
    const Minibatch batch = make_minibatch(dataset, pool, batch_rng, batch_options);
    tape.clear();
    const auto vars = register_angles(tape, angles);
    const auto layers = register_classifier(tape, classifier);
    const OpticsTensors optics = optics_tensors(tape, vars, angles.condition, angles.source_intensity);
    const ad::Tensor x = measure_batch(tape, optics, batch.mueller);
    const ad::Tensor logits = mlp_forward(tape, layers, x);
    const ad::Tensor loss = ad::weighted_cross_entropy(tape, logits, batch.labels, batch.class_weights);
    tape.backward(loss);

    const auto z = tape.value(logits);
    int correct = 0;
    for (int b = 0; b < logits.rows; ++b)
      if (argmax(z.subspan(static_cast<std::size_t>(b) * logits.cols, logits.cols)) == batch.labels[b]) ++correct;
    result.history.push_back({step, tape.value(loss)[0], static_cast<double>(correct) / logits.rows});

    const std::vector<double> grads = gather_gradients(tape, layers, classifier);
    classifier_opt.step(classifier.weights, grads);
    if (optimize_angles) {
      for (std::size_t i = 0; i < vars.size(); ++i) angle_grads[i] = tape.adjoint(vars[i]);
      angle_opt.step(angles.params, angle_grads);
    }
  }

  result.classifier = std::move(classifier);
  if (optimize_angles) result.plan = angles.to_plan();
  return result;
}

EvalResult evaluate(const ClassifierParams& classifier, const MeasurementPlan& plan,
                    std::span<const MaterialSample> samples, const EvalOptions& options) {
  if (samples.empty()) throw std::invalid_argument("cannot evaluate on an empty split");
  if (classifier.input_width() != plan.size())
    throw std::invalid_argument("classifier input width " + std::to_string(classifier.input_width()) +
                                " does not match plan size " + std::to_string(plan.size()));
  EvalResult out;
  int correct = 0;
  auto score = [&](const MuellerMatrix& m, int label) {
    const std::vector<double> f = measure(m, plan);
    const int pred = argmax(mlp_forward(classifier, f));
    ++out.confusion[label][pred];
    ++out.total;
    if (pred == label) ++correct;
  };
  for (const auto& s : samples) {
    const int label = index_of(s.category);
    if (options.rotation_sweep <= 0) {
      score(s.mueller, label);
    } else {
      for (int j = 0; j < options.rotation_sweep; ++j)
        score(rotate_mueller(s.mueller, Angle(j * std::numbers::pi / options.rotation_sweep)), label);
    }
  }
  out.accuracy = static_cast<double>(correct) / out.total;
  return out;
}

EvalResult evaluate(const ClassifierParams& classifier, const MeasurementPlan& plan, const Dataset& dataset,
                    Split split, const EvalOptions& options) {
  std::vector<MaterialSample> subset;
  for (int i : dataset.indices(split)) subset.push_back(dataset.samples[i]);
  return evaluate(classifier, plan, subset, options);
}

std::string checkpoint_to_json(const TrainResult& result) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : result.history) history.push_back({{"step", h.step}, {"loss", h.loss}});
  const nlohmann::json j = {
      {"plan", detail::plan_to_json_value(result.plan)},
      {"classifier", {{"widths", result.classifier.widths}, {"weights", result.classifier.weights}}},
      {"history", std::move(history)}};
  return j.dump();
}

TrainResult checkpoint_from_json(std::string_view text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    const auto& cls = detail::require(j, "classifier", "checkpoint");
    ClassifierParams classifier;
    classifier.widths = detail::require(cls, "widths", "checkpoint classifier").get<std::vector<int>>();
    classifier.weights = detail::require(cls, "weights", "checkpoint classifier").get<std::vector<double>>();
    if (classifier.widths.size() < 2 || classifier.weights.size() != parameter_count(classifier.widths))
      throw FormatError("checkpoint: classifier weights do not match widths");
    TrainResult out{detail::plan_from_json_value(detail::require(j, "plan", "checkpoint")), classifier, {}};
    if (auto it = j.find("history"); it != j.end())
      for (const auto& h : *it) out.history.push_back({h.at("step").get<int>(), h.at("loss").get<double>(), 0.0});
    return out;
  } catch (const FormatError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const TrainResult& result) {
  detail::write_text_file(path, checkpoint_to_json(result) + "\n");
}

TrainResult load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(detail::read_text_file(path));
}

}  // namespace polopt

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "polopt/training.hpp"

using namespace polopt;
constexpr double kPi = std::numbers::pi;

namespace {

const Dataset& small_dataset() {
  static const Dataset d = generate_dataset({4, 3, 21});
  return d;
}

Minibatch fixed_batch(std::mt19937_64& rng, int size) {
  Minibatch b;
  std::uniform_int_distribution<int> label(0, kNumCategories - 1);
  for (int i = 0; i < size; ++i) {
    b.mueller.push_back(oracle::from_eigen(oracle::physical_mueller(rng)));
    b.labels.push_back(label(rng));
  }
  b.class_weights = class_weights(b.labels);
  return b;
}

/// Loss and its gradient w.r.t. angles and classifier weights.
struct LossGrad {
  double loss;
  std::vector<double> angles;
  std::vector<double> weights;
};

LossGrad loss_and_grad(const AnglePack& pack, const ClassifierParams& clf, const Minibatch& batch) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (double v : pack.params) vars.push_back(tape.variable(v));
  const auto layers = register_classifier(tape, clf);
  const ad::Tensor loss = batch_loss(tape, vars, pack.condition, pack.source_intensity, layers, batch);
  tape.backward(loss);
  LossGrad out{tape.value(loss)[0], {}, gather_gradients(tape, layers, clf)};
  for (const auto& v : vars) out.angles.push_back(tape.adjoint(v));
  return out;
}

}  // namespace

TEST(Regime, Names) {
  for (Regime r : {Regime::Random, Regime::Uniform, Regime::Optimized})
    EXPECT_EQ(regime_from_string(to_string(r)), r);
  EXPECT_THROW(regime_from_string("Grid"), std::invalid_argument);
}

TEST(AnglePack, RoundTripThroughPlan) {
  std::mt19937_64 rng(1);
  for (Condition tag : {Condition::LP, Condition::QWP, Condition::LP_QWP}) {
    const MeasurementPlan plan = oracle::random_plan(tag, 3, rng);
    const AnglePack pack = AnglePack::from_plan(plan);
    EXPECT_EQ(pack.params.size(), 3u * free_angles_per_capture(tag));
    EXPECT_EQ(pack.captures(), 3);
    EXPECT_EQ(pack.to_plan(), plan);
  }
  Rng r(2);
  const AnglePack random = AnglePack::random(Condition::LP_QWP, 5, r);
  for (double v : random.params) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, kPi);
  }
  EXPECT_THROW(AnglePack::random(Condition::LP, 0, r), std::invalid_argument);
}

TEST(ForwardMeasure, MatchesPlainIntensity) {
  std::mt19937_64 rng(3);
  for (Condition tag : {Condition::LP, Condition::QWP, Condition::LP_QWP})
    for (int i = 0; i < 30; ++i) {
      const MeasurementPlan plan = oracle::random_plan(tag, 4, rng);
      const AnglePack pack = AnglePack::from_plan(plan);
      const MuellerMatrix m = oracle::from_eigen(oracle::random_matrix(rng));
      ad::Tape tape;
      std::vector<ad::Var> vars;
      for (double v : pack.params) vars.push_back(tape.variable(v));
      const auto f = forward_measure(m, vars, tag);
      const auto ref = measure(m, plan);
      for (int k = 0; k < 4; ++k) EXPECT_NEAR(f[k].value(), ref[k], 1e-12);
    }
}

TEST(ForwardMeasure, SpotValuesAndDerivatives) {
  ad::Tape tape;
  std::vector<ad::Var> vars{tape.variable(0.0), tape.variable(kPi / 8)};
  const auto f = forward_measure(MuellerMatrix::identity(), vars, Condition::LP);
  tape.backward(f[0]);
  // f = cos²(θ_La − θ_Lg)/2 → ∂f/∂θ_La = −sin(2θ_La)/2
  const auto value = [](double la) {
    return intensity(MuellerMatrix::identity(), {Angle(0.0), Angle(0.0), Angle(0.0), Angle(la)}, Condition::LP);
  };
  const double fd = (value(kPi / 8 + 1e-6) - value(kPi / 8 - 1e-6)) / 2e-6;
  EXPECT_LT(oracle::rel_error(tape.adjoint(vars[1]), fd), 1e-5);
  EXPECT_NEAR(tape.adjoint(vars[1]), -std::sin(kPi / 4) / 2, 1e-15);

  ad::Tape t0;
  std::vector<ad::Var> zero{t0.variable(0.0), t0.variable(0.0)};
  EXPECT_NEAR(forward_measure(MuellerMatrix::identity(), zero, Condition::LP)[0].value(), 0.5, 1e-15);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    ad::Tape t;
    std::vector<ad::Var> v{t.variable(oracle::angle(rng)), t.variable(oracle::angle(rng))};
    t.backward(forward_measure(MuellerMatrix::diagonal(1, 0, 0, 0), v, Condition::LP)[0]);
    EXPECT_EQ(t.adjoint(v[0]), 0.0);
    EXPECT_EQ(t.adjoint(v[1]), 0.0);
  }
}

TEST(MeasureBatch, MatchesPlainIntensity) {
  std::mt19937_64 rng(5);
  const MeasurementPlan plan = oracle::random_plan(Condition::LP_QWP, 3, rng);
  const AnglePack pack = AnglePack::from_plan(plan);
  const Minibatch batch = fixed_batch(rng, 6);
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (double v : pack.params) vars.push_back(tape.variable(v));
  const ad::Tensor x = measure_batch(tape, optics_tensors(tape, vars, plan.condition(), 1.0), batch.mueller);
  for (int b = 0; b < 6; ++b) {
    const auto ref = measure(batch.mueller[b], plan);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(tape.value(x)[b * 3 + k], ref[k], 1e-12);
  }
}

// End-to-end: angles → intensities → MLP → weighted cross-entropy.
TEST(Gradients, EndToEndMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  const Condition tags[] = {Condition::LP, Condition::QWP, Condition::LP_QWP};
  for (int trial = 0; trial < 50; ++trial) {
    const Condition tag = tags[trial % 3];
    const int k = 1 + trial % 4;
    AnglePack pack = AnglePack::from_plan(oracle::random_plan(tag, k, rng));
    Rng init(trial);
    ClassifierParams clf = init_classifier(k, kNumCategories, init);
    const Minibatch batch = fixed_batch(rng, 8);
    const LossGrad lg = loss_and_grad(pack, clf, batch);

    const double h = 1e-6;
    for (std::size_t i = 0; i < pack.params.size(); ++i) {
      const double saved = pack.params[i];
      pack.params[i] = saved + h;
      const double up = batch_loss_value(pack, clf, batch);
      pack.params[i] = saved - h;
      const double down = batch_loss_value(pack, clf, batch);
      pack.params[i] = saved;
      const double fd = (up - down) / (2 * h);
      if (std::abs(lg.angles[i]) < 1e-4)
        EXPECT_LT(std::abs(lg.angles[i] - fd), 1e-8) << "trial " << trial << " angle " << i;
      else
        EXPECT_LT(oracle::rel_error(lg.angles[i], fd), 1e-4) << "trial " << trial << " angle " << i;
    }
    for (std::size_t i = trial % 13; i < clf.weights.size(); i += 13) {
      const double saved = clf.weights[i];
      clf.weights[i] = saved + h;
      const double up = batch_loss_value(pack, clf, batch);
      clf.weights[i] = saved - h;
      const double down = batch_loss_value(pack, clf, batch);
      clf.weights[i] = saved;
      const double fd = (up - down) / (2 * h);
      if (std::abs(lg.weights[i]) < 1e-4)
        EXPECT_LT(std::abs(lg.weights[i] - fd), 1e-8) << "trial " << trial << " weight " << i;
      else
        EXPECT_LT(oracle::rel_error(lg.weights[i], fd), 1e-4) << "trial " << trial << " weight " << i;
    }
  }
}

TEST(Loss, HalfTurnShiftLeavesLossUnchanged) {
  std::mt19937_64 rng(7);
  for (Condition tag : {Condition::LP, Condition::QWP, Condition::LP_QWP}) {
    const AnglePack pack = AnglePack::from_plan(oracle::random_plan(tag, 3, rng));
    Rng init(1);
    const ClassifierParams clf = init_classifier(3, kNumCategories, init);
    const Minibatch batch = fixed_batch(rng, 16);
    const double base = batch_loss_value(pack, clf, batch);
    for (std::size_t i = 0; i < pack.params.size(); ++i) {
      AnglePack shifted = pack;
      shifted.params[i] += kPi;
      EXPECT_NEAR(batch_loss_value(shifted, clf, batch), base, 1e-12);
    }
  }
}

TEST(Loss, NeutralAugmentationEqualsUnaugmented) {
  const Dataset& d = small_dataset();
  const auto pool = d.indices(Split::train);
  Rng rng(8);
  Minibatch plain = make_minibatch(d, pool, rng, {32, false});
  Minibatch neutral = plain;
  for (auto& m : neutral.mueller) m = rotate_mueller(1.0 * m, Angle(0.0));
  Rng init(2);
  const ClassifierParams clf = init_classifier(2, kNumCategories, init);
  std::mt19937_64 g(9);
  const AnglePack pack = AnglePack::from_plan(oracle::random_plan(Condition::QWP, 2, g));
  EXPECT_EQ(batch_loss_value(pack, clf, plain), batch_loss_value(pack, clf, neutral));
}

TEST(Loss, BalancedWeightsMatchUnweighted) {
  std::mt19937_64 rng(10);
  Minibatch batch = fixed_batch(rng, 10);
  batch.labels = {0, 1, 2, 3, 4, 4, 3, 2, 1, 0};
  batch.class_weights = class_weights(batch.labels);
  for (double w : batch.class_weights) EXPECT_EQ(w, 1.0);
  Rng init(3);
  const ClassifierParams clf = init_classifier(2, kNumCategories, init);
  const AnglePack pack = AnglePack::from_plan(oracle::random_plan(Condition::LP, 2, rng));
  double unweighted = 0.0;
  const std::vector<double> ones(5, 1.0);
  for (int b = 0; b < 10; ++b)
    unweighted += weighted_cross_entropy(mlp_forward(clf, measure(batch.mueller[b], pack.to_plan())), batch.labels[b], ones);
  EXPECT_NEAR(batch_loss_value(pack, clf, batch), unweighted / 10, 1e-14);
}

TEST(ClassWeights, Formula) {
  const std::vector<int> single(128, 2);
  const auto w1 = class_weights(single);
  EXPECT_EQ(w1, (std::array<double, 5>{0, 0, 1.0, 0, 0}));
  const std::vector<int> skewed{0, 0, 0, 1};
  const auto w2 = class_weights(skewed);
  EXPECT_DOUBLE_EQ(w2[0], 4.0 / (2 * 3));
  EXPECT_DOUBLE_EQ(w2[1], 4.0 / (2 * 1));
  EXPECT_EQ(w2[2], 0.0);
  std::vector<int> balanced;
  for (int i = 0; i < 128; ++i) balanced.push_back(i % 4);
  for (int c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(class_weights(balanced)[c], 1.0);
}

TEST(Minibatch, DrawsAugmentsAndIsDeterministic) {
  const Dataset& d = small_dataset();
  const auto pool = d.indices(Split::train);
  Rng a(11), b(11);
  const Minibatch x = make_minibatch(d, pool, a);
  const Minibatch y = make_minibatch(d, pool, b);
  EXPECT_EQ(x.mueller.size(), 128u);
  EXPECT_EQ(x.labels, y.labels);
  for (std::size_t i = 0; i < x.mueller.size(); ++i) EXPECT_EQ(x.mueller[i].m, y.mueller[i].m);
  EXPECT_EQ(x.class_weights, class_weights(x.labels));

  // Replaying the draws reproduces every augmented matrix.
  Rng replay(11);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (std::size_t i = 0; i < x.mueller.size(); ++i) {
    const MaterialSample& s = d.samples[pool[pick(replay)]];
    const double c = draw_intensity_scale(replay);
    const double rho = draw_rotation(replay);
    EXPECT_EQ(x.mueller[i].m, rotate_mueller(c * s.mueller, Angle(rho)).m);
    EXPECT_EQ(x.labels[i], index_of(s.category));
  }

  Dataset one_class = d;
  std::erase_if(one_class.samples, [](const MaterialSample& s) { return s.category != MaterialCategory::metal; });
  const auto metal_pool = one_class.indices(Split::train);
  Rng c(12);
  EXPECT_EQ(make_minibatch(one_class, metal_pool, c).class_weights, (std::array<double, 5>{0, 1.0, 0, 0, 0}));
  EXPECT_THROW(make_minibatch(d, std::vector<int>{}, c), std::invalid_argument);
}

TEST(UniformPlan, LpGrid) {
  const MeasurementPlan p = uniform_plan(Condition::LP, 16);
  ASSERT_EQ(p.size(), 16);
  for (int k = 0; k < 16; ++k) {
    EXPECT_NEAR(p.captures()[k].theta_lg.degrees(), 45.0 * (k / 4), 1e-12);
    EXPECT_NEAR(p.captures()[k].theta_la.degrees(), 45.0 * (k % 4), 1e-12);
  }
  EXPECT_EQ(plan_diagnostics(p).rank, 9);
  EXPECT_THROW(uniform_plan(Condition::LP, 17), std::invalid_argument);
  EXPECT_THROW(uniform_plan(Condition::LP, 0), std::invalid_argument);
  EXPECT_THROW(uniform_plan(Condition::LP_QWP, 4), std::invalid_argument);
}

TEST(UniformPlan, AzzamFiveToOne) {
  const MeasurementPlan p = uniform_plan(Condition::QWP, 4);
  const double expected[] = {0, 45, 90, 135};
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(p.captures()[k].theta_qg.degrees(), expected[k], 1e-12);
    EXPECT_NEAR(p.captures()[k].theta_qa.degrees(), expected[k], 1e-12);
  }
  for (int k = 1; k <= 24; ++k) EXPECT_EQ(uniform_plan(Condition::QWP, k), oracle::azzam_plan(k)) << k;
}

TEST(Train, FrozenRegimesKeepInitialAngles) {
  TrainConfig cfg;
  cfg.steps = 30;
  cfg.batch_size = 16;
  const Dataset& d = small_dataset();
  const TrainResult random = train(d, Condition::LP_QWP, Regime::Random, 3, 5, cfg);
  EXPECT_EQ(random.plan, initial_plan(Condition::LP_QWP, Regime::Random, 3, 5));
  const TrainResult uniform = train(d, Condition::QWP, Regime::Uniform, 3, 5, cfg);
  EXPECT_EQ(uniform.plan, uniform_plan(Condition::QWP, 3));
  const TrainResult optimized = train(d, Condition::LP_QWP, Regime::Optimized, 3, 5, cfg);
  EXPECT_NE(optimized.plan, random.plan);
  EXPECT_EQ(optimized.history.size(), 30u);
}

TEST(Train, ZeroStepsReturnsInitialization) {
  TrainConfig cfg;
  cfg.steps = 0;
  const TrainResult r = train(small_dataset(), Condition::QWP, Regime::Optimized, 2, 9, cfg);
  EXPECT_EQ(r.plan, initial_plan(Condition::QWP, Regime::Optimized, 2, 9));
  EXPECT_TRUE(r.history.empty());
}

TEST(Train, DeterministicGivenSeed) {
  TrainConfig cfg;
  cfg.steps = 40;
  cfg.batch_size = 32;
  const TrainResult a = train(small_dataset(), Condition::LP, Regime::Optimized, 2, 3, cfg);
  const TrainResult b = train(small_dataset(), Condition::LP, Regime::Optimized, 2, 3, cfg);
  EXPECT_EQ(a.history.back().loss, b.history.back().loss);
  EXPECT_EQ(a.classifier.weights, b.classifier.weights);
  EXPECT_EQ(a.plan, b.plan);
  const TrainResult c = train(small_dataset(), Condition::LP, Regime::Optimized, 2, 4, cfg);
  EXPECT_NE(a.history.back().loss, c.history.back().loss);
}

TEST(Train, InitialAnglesAreUniformOverHalfTurn) {
  const MeasurementPlan p = initial_plan(Condition::LP_QWP, Regime::Optimized, 50, 1);
  double sum = 0.0;
  for (const auto& c : p.captures()) sum += c.theta_lg.radians() + c.theta_qg.radians() + c.theta_qa.radians() + c.theta_la.radians();
  EXPECT_NEAR(sum / 200, kPi / 2, 0.25);
  EXPECT_EQ(initial_plan(Condition::QWP, Regime::Random, 3, 7), initial_plan(Condition::QWP, Regime::Optimized, 3, 7));
}

TEST(Train, OptimizedQwpBeatsChanceOnDefaultDataset) {
  const Dataset d = generate_dataset({});
  const TrainResult r = train(d, Condition::QWP, Regime::Optimized, 2, 1);
  EXPECT_GE(evaluate(r.classifier, r.plan, d, Split::test).accuracy, 0.40);
}

TEST(Evaluate, ConstantClassifier) {
  ClassifierParams clf = make_classifier(2, kNumCategories);
  clf.weights[clf.bias_offset(clf.num_layers() - 1)] = 1.0;  // logit 0 always wins
  const Dataset d = generate_dataset({2, 2, 1});
  std::vector<MaterialSample> all = d.samples;
  const EvalResult r = evaluate(clf, uniform_plan(Condition::LP, 2), all);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.2);
  EXPECT_EQ(r.total, 20);
  for (int t = 0; t < kNumCategories; ++t)
    for (int p = 0; p < kNumCategories; ++p) EXPECT_EQ(r.confusion[t][p], p == 0 ? 4 : 0);
  EvalOptions sweep;
  sweep.rotation_sweep = 6;
  EXPECT_EQ(evaluate(clf, uniform_plan(Condition::LP, 2), all, sweep).total, 120);
}

TEST(Evaluate, PerfectOracleLabels) {
  ClassifierParams clf = make_classifier(1, kNumCategories);
  clf.weights[clf.bias_offset(clf.num_layers() - 1) + 3] = 1.0;
  std::vector<MaterialSample> samples;
  Rng rng(1);
  for (int i = 0; i < 7; ++i) samples.push_back(synthesize_material(MaterialCategory::fabric, rng));
  EXPECT_DOUBLE_EQ(evaluate(clf, uniform_plan(Condition::QWP, 1), samples).accuracy, 1.0);
}

TEST(Evaluate, Errors) {
  const ClassifierParams clf = make_classifier(2, kNumCategories);
  EXPECT_THROW(evaluate(clf, uniform_plan(Condition::LP, 2), std::vector<MaterialSample>{}), std::invalid_argument);
  const Dataset d = generate_dataset({1, 1, 1});
  EXPECT_THROW(evaluate(clf, uniform_plan(Condition::LP, 2), d, Split::test), std::invalid_argument);
  EXPECT_THROW(evaluate(clf, uniform_plan(Condition::LP, 3), d, Split::train), std::invalid_argument);
}

TEST(Checkpoint, RoundTrip) {
  TrainConfig cfg;
  cfg.steps = 5;
  cfg.batch_size = 8;
  const TrainResult r = train(small_dataset(), Condition::LP_QWP, Regime::Optimized, 2, 1, cfg);
  const TrainResult back = checkpoint_from_json(checkpoint_to_json(r));
  EXPECT_EQ(back.classifier.widths, r.classifier.widths);
  EXPECT_EQ(back.classifier.weights, r.classifier.weights);
  ASSERT_EQ(back.history.size(), r.history.size());
  EXPECT_EQ(back.history.back().loss, r.history.back().loss);
  for (int k = 0; k < 2; ++k)
    EXPECT_NEAR(back.plan.captures()[k].theta_qa.degrees(), r.plan.captures()[k].theta_qa.degrees(), 1e-9);

  const auto path = std::filesystem::temp_directory_path() / "polopt_checkpoint.json";
  save_checkpoint(path, r);
  EXPECT_EQ(load_checkpoint(path).classifier.weights, r.classifier.weights);
  std::filesystem::remove(path);
  EXPECT_THROW(checkpoint_from_json("{}"), FormatError);
  EXPECT_THROW(checkpoint_from_json("not json"), FormatError);
}

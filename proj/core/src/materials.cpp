#include "polopt/materials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace polopt {

namespace {

constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {"wood", "metal", "resin",
                                                                        "fabric", "stone"};

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Stream tags for make_stream.
constexpr std::uint64_t kMaterialStream = 0x4d41544552ULL;
constexpr std::uint64_t kSampleStream = 0x53414d504cULL;
constexpr std::uint64_t kSplitStream = 0x53504c4954ULL;

double draw(Rng& rng, Range r) { return r.lo == r.hi ? r.lo : uniform(rng, r.lo, r.hi); }

double wrap_full_turn(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

}  // namespace

std::string_view to_string(MaterialCategory c) { return kCategoryNames.at(index_of(c)); }

MaterialCategory category_from_string(std::string_view name) {
  for (int i = 0; i < kNumCategories; ++i)
    if (kCategoryNames[i] == name) return static_cast<MaterialCategory>(i);
  throw std::invalid_argument("unknown material category '" + std::string(name) + "'");
}

MaterialCategory category_from_index(int index) {
  if (index < 0 || index >= kNumCategories)
    throw std::invalid_argument("category index out of range: " + std::to_string(index));
  return static_cast<MaterialCategory>(index);
}

bool FresnelParams::valid() const {
  return r_p >= 0.0 && r_p <= r_s && r_s <= 1.0 && delta >= 0.0 && delta < kTwoPi;
}

MuellerMatrix fresnel_mueller(const FresnelParams& p) {
  if (!p.valid())
    throw std::invalid_argument("Fresnel parameters need 0 <= r_p <= r_s <= 1 and delta in [0, 2pi)");
  const double a = 0.5 * (p.r_s + p.r_p);
  const double b = 0.5 * (p.r_s - p.r_p);
  const double g = std::sqrt(p.r_s * p.r_p);
  const double gc = g * std::cos(p.delta);
  const double gs = g * std::sin(p.delta);
  MuellerMatrix m;
  m.m = {{{a, b, 0.0, 0.0}, {b, a, 0.0, 0.0}, {0.0, 0.0, gc, gs}, {0.0, 0.0, -gs, gc}}};
  return m;
}

MuellerMatrix MaterialParams::mueller() const {
  return specular_weight * rotate_mueller(fresnel_mueller(fresnel), Angle(axis_angle)) +
         MuellerMatrix::diagonal(diffuse_weight, 0.0, 0.0, 0.0);
}

const CategoryTable& default_category_table() {
  // α, β, r_s, r_p/r_s, δ center, δ half-width
  static const CategoryTable table = {{
      // wood: weak gloss over a depolarizing body, dielectric phase
      {{0.15, 0.22}, {0.45, 0.60}, {0.40, 0.60}, {0.70, 0.90}, 0.30, 0.20},
      // metal: strong specular, nearly equal r_s and r_p, phase near π
      {{0.60, 0.90}, {0.05, 0.10}, {0.80, 0.98}, {0.85, 1.00}, std::numbers::pi, 0.35},
      // resin: moderate gloss, clear diattenuation, phase near 0
      {{0.40, 0.65}, {0.10, 0.25}, {0.50, 0.80}, {0.25, 0.50}, 0.10, 0.10},
      // fabric: almost fully diffuse
      {{0.02, 0.08}, {0.75, 0.95}, {0.30, 0.60}, {0.60, 0.90}, 0.50, 0.50},
      // stone: mid gloss, retardance past a quarter wave
      {{0.25, 0.45}, {0.05, 0.20}, {0.40, 0.70}, {0.60, 0.95}, 2.1, 0.15},
  }};
  return table;
}

MaterialParams draw_material_params(MaterialCategory category, Rng& rng, const CategoryTable& table) {
  const CategoryDistribution& d = table.at(index_of(category));
  MaterialParams p;
  p.category = category;
  p.specular_weight = draw(rng, d.specular_weight);
  p.diffuse_weight = std::min(draw(rng, d.diffuse_weight), 1.0 - p.specular_weight);
  p.fresnel.r_s = draw(rng, d.r_s);
  p.fresnel.r_p = p.fresnel.r_s * std::min(1.0, draw(rng, d.r_p_ratio));
  p.fresnel.delta = wrap_full_turn(d.delta_center + draw(rng, {-d.delta_halfwidth, d.delta_halfwidth}));
  p.axis_angle = uniform(rng, 0.0, std::numbers::pi);
  return p;
}

const std::vector<StokesVector>& probe_states() {
  static const std::vector<StokesVector> states = [] {
    std::vector<StokesVector> out;
    out.push_back(StokesVector::unpolarized(1.0));
    for (int x = -1; x <= 1; ++x)
      for (int y = -1; y <= 1; ++y)
        for (int z = -1; z <= 1; ++z) {
          if (x == 0 && y == 0 && z == 0) continue;
          const double n = std::sqrt(double(x * x + y * y + z * z));
          out.push_back({{1.0, x / n, y / n, z / n}});
        }
    return out;
  }();
  return states;
}

bool is_physical_material(const MuellerMatrix& m, double tol) {
  if (!m.is_passive(tol)) return false;
  for (const auto& s : probe_states())
    if (!apply(m, s).is_physical(tol)) return false;
  return true;
}

MuellerMatrix perturb_mueller(const MuellerMatrix& m, Rng& rng, double relative_sigma, int max_attempts) {
  if (relative_sigma <= 0.0) return m;
  std::normal_distribution<double> noise(0.0, relative_sigma * m(0, 0));
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    MuellerMatrix out = m;
    for (auto& row : out.m)
      for (double& v : row) v += noise(rng);
    if (is_physical_material(out)) return out;
  }
  throw std::runtime_error("perturbation failed the physicality check " + std::to_string(max_attempts) +
                           " times; category distribution is misconfigured");
}

MaterialSample synthesize_material(MaterialCategory category, Rng& rng, double relative_sigma,
                                   const CategoryTable& table) {
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const MaterialParams params = draw_material_params(category, rng, table);
    try {
      return {perturb_mueller(params.mueller(), rng, relative_sigma, 1), category, 0};
    } catch (const std::runtime_error&) {
    }
  }
  throw std::runtime_error("could not synthesize a physical '" + std::string(to_string(category)) +
                           "' sample in 100 draws; category distribution is misconfigured");
}

std::vector<int> Dataset::indices(Split split) const {
  const std::vector<int>& ids = split == Split::train ? train_ids : test_ids;
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(samples.size()); ++i)
    if (std::binary_search(ids.begin(), ids.end(), samples[i].material_id)) out.push_back(i);
  return out;
}

void assign_split(Dataset& dataset, std::uint64_t seed, double train_fraction) {
  std::array<std::vector<int>, kNumCategories> per_category;
  for (const auto& s : dataset.samples) {
    auto& ids = per_category[index_of(s.category)];
    if (std::find(ids.begin(), ids.end(), s.material_id) == ids.end()) ids.push_back(s.material_id);
  }
  dataset.train_ids.clear();
  dataset.test_ids.clear();
  for (int c = 0; c < kNumCategories; ++c) {
    auto& ids = per_category[c];
    if (ids.empty()) continue;
    std::sort(ids.begin(), ids.end());
    Rng rng = make_stream(seed, {kSplitStream, static_cast<std::uint64_t>(c)});
    // Fisher-Yates with our own index draws; std::shuffle's use of the engine
    // is implementation-defined.
    for (std::size_t i = ids.size(); i > 1; --i) {
      const std::size_t j = rng() % i;
      std::swap(ids[i - 1], ids[j]);
    }
    const auto n = static_cast<int>(ids.size());
    const int n_train = n == 1 ? 1 : std::clamp(static_cast<int>(std::lround(train_fraction * n)), 1, n);
    dataset.train_ids.insert(dataset.train_ids.end(), ids.begin(), ids.begin() + n_train);
    dataset.test_ids.insert(dataset.test_ids.end(), ids.begin() + n_train, ids.end());
  }
  std::sort(dataset.train_ids.begin(), dataset.train_ids.end());
  std::sort(dataset.test_ids.begin(), dataset.test_ids.end());
}

Dataset generate_dataset(const DatasetSpec& spec) {
  if (spec.materials_per_category < 1 || spec.samples_per_material < 1)
    throw std::invalid_argument("materials_per_category and samples_per_material must be >= 1");
  Dataset out;
  out.spec = spec;
  out.samples.reserve(static_cast<std::size_t>(kNumCategories) * spec.materials_per_category *
                      spec.samples_per_material);
  for (int c = 0; c < kNumCategories; ++c) {
    const MaterialCategory category = category_from_index(c);
    for (int j = 0; j < spec.materials_per_category; ++j) {
      const int id = c * spec.materials_per_category + j;
      // Parameter draws that cannot carry the perturbation are redrawn from
      // the same material stream.
      Rng material_rng = make_stream(spec.seed, {kMaterialStream, static_cast<std::uint64_t>(id)});
      std::vector<MuellerMatrix> draws;
      for (int attempt = 0;; ++attempt) {
        const MuellerMatrix base = draw_material_params(category, material_rng).mueller();
        draws.clear();
        try {
          for (int s = 0; s < spec.samples_per_material; ++s) {
            Rng sample_rng = make_stream(
                spec.seed, {kSampleStream, static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(s),
                            static_cast<std::uint64_t>(attempt)});
            draws.push_back(perturb_mueller(base, sample_rng, spec.relative_sigma));
          }
          break;
        } catch (const std::runtime_error&) {
          if (attempt + 1 >= 100) throw;
        }
      }
      for (const auto& m : draws) out.samples.push_back({m, category, id});
    }
  }
  assign_split(out, spec.seed, spec.train_fraction);
  return out;
}

double draw_intensity_scale(Rng& rng) { return uniform(rng, 0.01, 10.0); }

double draw_rotation(Rng& rng) { return uniform(rng, 0.0, std::numbers::pi); }

MuellerMatrix augment_intensity(const MuellerMatrix& m, Rng& rng) { return draw_intensity_scale(rng) * m; }

MuellerMatrix augment_rotation(const MuellerMatrix& m, Rng& rng) {
  return rotate_mueller(m, Angle(draw_rotation(rng)));
}

}  // namespace polopt

#pragma once

// Synthetic polarimetric material dataset.
//
// Each material is a mix of a rotated Fresnel diattenuating retarder
// (specular part) and an ideal depolarizer (diffuse part):
//
//   M = α · C(-ψ) F(r_s, r_p, δ) C(ψ) + β · diag(1, 0, 0, 0)
//
// Samples of one material share (α, β, r_s, r_p, δ, ψ) and differ only by a
// small entry-wise Gaussian perturbation. The per-category parameter ranges
// below are tunable configuration, not measured statistics.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "polopt/mueller.hpp"
#include "polopt/random.hpp"

namespace polopt {

enum class MaterialCategory { wood = 0, metal = 1, resin = 2, fabric = 3, stone = 4 };

inline constexpr int kNumCategories = 5;

std::string_view to_string(MaterialCategory c);
/// Throws std::invalid_argument for an unknown name.
MaterialCategory category_from_string(std::string_view name);
MaterialCategory category_from_index(int index);
inline int index_of(MaterialCategory c) { return static_cast<int>(c); }

/// Three-parameter Fresnel reflection. Valid when 0 <= r_p <= r_s <= 1 and
/// δ ∈ [0, 2π).
struct FresnelParams {
  double r_s = 1.0;
  double r_p = 1.0;
  double delta = 0.0;

  bool valid() const;
};

/// Diattenuating retarder Mueller matrix. Throws std::invalid_argument when
/// the parameters are invalid.
MuellerMatrix fresnel_mueller(const FresnelParams& p);

struct MaterialParams {
  MaterialCategory category = MaterialCategory::wood;
  double specular_weight = 0.0;  ///< α
  double diffuse_weight = 0.0;   ///< β, α + β <= 1
  FresnelParams fresnel;
  double axis_angle = 0.0;  ///< ψ, radians

  /// Unperturbed Mueller matrix of the material.
  MuellerMatrix mueller() const;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct CategoryDistribution {
  Range specular_weight;
  Range diffuse_weight;  ///< clamped to 1 - α after drawing
  Range r_s;
  Range r_p_ratio;       ///< r_p = r_s · ratio
  double delta_center = 0.0;
  double delta_halfwidth = 0.0;  ///< δ ~ U(center ± halfwidth), wrapped to [0, 2π)
};

using CategoryTable = std::array<CategoryDistribution, kNumCategories>;

const CategoryTable& default_category_table();

/// Relative standard deviation of the per-sample entry-wise perturbation.
inline constexpr double kDefaultPerturbation = 0.01;

MaterialParams draw_material_params(MaterialCategory category, Rng& rng,
                                    const CategoryTable& table = default_category_table());

/// M plus N(0, (σ·m00)²) on every entry, redrawn until passive and physical
/// on all probe states. Throws std::runtime_error after `max_attempts`.
MuellerMatrix perturb_mueller(const MuellerMatrix& m, Rng& rng, double relative_sigma,
                              int max_attempts = 100);

/// Passive and maps every probe state (26 fully polarized + unpolarized) to a
/// physical Stokes vector.
bool is_physical_material(const MuellerMatrix& m, double tol = 1e-9);

/// The 27 probe states used by is_physical_material.
const std::vector<StokesVector>& probe_states();

struct MaterialSample {
  MuellerMatrix mueller;
  MaterialCategory category = MaterialCategory::wood;
  int material_id = 0;
};

/// Draws material parameters and one perturbed sample. Parameters whose
/// perturbed samples keep failing the physicality check are redrawn; after
/// 100 failed draws std::runtime_error reports a misconfigured category.
MaterialSample synthesize_material(MaterialCategory category, Rng& rng,
                                   double relative_sigma = kDefaultPerturbation,
                                   const CategoryTable& table = default_category_table());

struct DatasetSpec {
  int materials_per_category = 17;
  int samples_per_material = 10;
  std::uint64_t seed = 1;
  double train_fraction = 0.7;
  double relative_sigma = kDefaultPerturbation;
};

enum class Split { train, test };

struct Dataset {
  std::vector<MaterialSample> samples;
  std::vector<int> train_ids;  ///< material ids, ascending
  std::vector<int> test_ids;
  std::optional<DatasetSpec> spec;  ///< set when generated synthetically

  /// Indices into `samples` whose material belongs to the split.
  std::vector<int> indices(Split split) const;
};

/// Deterministic given spec.seed. Material ids are category-major:
/// id = category · materials_per_category + j. Throws std::invalid_argument
/// for non-positive counts.
Dataset generate_dataset(const DatasetSpec& spec);

/// Stratified material-level split; every category with n materials puts
/// max(1, round(fraction·n)) of them in train (all of them when n == 1).
void assign_split(Dataset& dataset, std::uint64_t seed, double train_fraction);

// Training-time augmentations.

double draw_intensity_scale(Rng& rng);  ///< U(0.01, 10)
double draw_rotation(Rng& rng);         ///< U(0, π)

MuellerMatrix augment_intensity(const MuellerMatrix& m, Rng& rng);
MuellerMatrix augment_rotation(const MuellerMatrix& m, Rng& rng);

}  // namespace polopt

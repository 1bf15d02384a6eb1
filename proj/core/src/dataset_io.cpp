#include "polopt/dataset_io.hpp"

#include <algorithm>
#include <sstream>

#include "json_support.hpp"

namespace polopt {

namespace fs = std::filesystem;
using nlohmann::json;

std::string dataset_to_jsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& s : dataset.samples) {
    const auto values = s.mueller.row_major();
    json rec = {{"material_id", s.material_id},
                {"category", std::string(to_string(s.category))},
                {"mueller", json(std::vector<double>(values.begin(), values.end()))}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::string manifest_to_json(const Dataset& dataset) {
  json j = json::object();
  if (dataset.spec) {
    j["seed"] = dataset.spec->seed;
    j["materials_per_category"] = dataset.spec->materials_per_category;
    j["samples_per_material"] = dataset.spec->samples_per_material;
  }
  j["split"] = {{"train", dataset.train_ids}, {"test", dataset.test_ids}};
  return j.dump(2) + "\n";
}

void save_dataset(const fs::path& dir, const Dataset& dataset) {
  fs::create_directories(dir);
  detail::write_text_file(dir / kDatasetFile, dataset_to_jsonl(dataset));
  detail::write_text_file(dir / kManifestFile, manifest_to_json(dataset));
}

Dataset dataset_from_jsonl(std::string_view text) {
  Dataset out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "dataset line " + std::to_string(line_no);
    try {
      const json rec = json::parse(line);
      MaterialSample s;
      s.material_id = detail::require(rec, "material_id", where.c_str()).get<int>();
      s.category = category_from_string(detail::require(rec, "category", where.c_str()).get<std::string>());
      const auto values = detail::require(rec, "mueller", where.c_str()).get<std::vector<double>>();
      if (values.size() != 16) throw FormatError(where + ": 'mueller' needs 16 entries");
      std::array<double, 16> arr{};
      std::copy(values.begin(), values.end(), arr.begin());
      s.mueller = MuellerMatrix::from_row_major(arr);
      out.samples.push_back(s);
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  return out;
}

Dataset load_dataset(const fs::path& path, std::uint64_t fallback_seed) {
  const bool is_dir = fs::is_directory(path);
  const fs::path data_file = is_dir ? path / kDatasetFile : path;
  const fs::path manifest = (is_dir ? path : path.parent_path()) / kManifestFile;

  Dataset out = dataset_from_jsonl(detail::read_text_file(data_file));
  if (!fs::exists(manifest)) {
    assign_split(out, fallback_seed, 0.7);
    return out;
  }
  try {
    const json j = json::parse(detail::read_text_file(manifest));
    const auto& split = detail::require(j, "split", "manifest");
    out.train_ids = detail::require(split, "train", "manifest split").get<std::vector<int>>();
    out.test_ids = detail::require(split, "test", "manifest split").get<std::vector<int>>();
    std::sort(out.train_ids.begin(), out.train_ids.end());
    std::sort(out.test_ids.begin(), out.test_ids.end());
    if (j.contains("seed")) {
      DatasetSpec spec;
      spec.seed = j.at("seed").get<std::uint64_t>();
      spec.materials_per_category = j.value("materials_per_category", 0);
      spec.samples_per_material = j.value("samples_per_material", 0);
      out.spec = spec;
    }
  } catch (const FormatError&) {
    throw;
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  for (int id : out.train_ids)
    if (std::binary_search(out.test_ids.begin(), out.test_ids.end(), id))
      throw FormatError("manifest: material " + std::to_string(id) + " is in both train and test");
  return out;
}

}  // namespace polopt

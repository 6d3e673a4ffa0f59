#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmo/classifier.hpp"
#include "mmo/errors.hpp"
#include "mmo/metrics.hpp"
#include "mmo/problems.hpp"
#include "mmo/random.hpp"

namespace mmo {

// ---------------------------------------------------------------------------
// Tabular data

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (used != s.size() || std::isnan(v) || std::isinf(v)) return std::nullopt;
  return v;
}

}  // namespace detail

/// CSV with a header row. The label column defaults to the last one; labels
/// are re-encoded 0..C-1 in order of first appearance.
inline TabularDataset load_tabular_csv(const std::filesystem::path& path, std::optional<std::size_t> label_column = {}) {
  std::ifstream in(path);
  if (!in) throw LoadError(LoadError::Kind::missing_file, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw LoadError(LoadError::Kind::empty, path.string() + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::size_t width = detail::split_csv_line(line).size();
  if (width < 2) throw LoadError(LoadError::Kind::ragged_row, path.string() + ": need at least one feature and a label");
  const std::size_t label_col = label_column.value_or(width - 1);
  if (label_col >= width) throw LoadError(LoadError::Kind::ragged_row, path.string() + ": label column out of range");

  std::vector<double> samples;
  std::vector<std::size_t> labels;
  std::map<std::string, std::size_t> codes;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != width) {
      throw LoadError(LoadError::Kind::ragged_row, path.string() + ": row " + std::to_string(line_no) + " has " +
                                                       std::to_string(cells.size()) + " columns, expected " +
                                                       std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col) continue;
      const auto v = detail::parse_number(cells[c]);
      if (!v) {
        throw LoadError(LoadError::Kind::non_numeric, path.string() + ": row " + std::to_string(line_no) +
                                                          " column " + std::to_string(c + 1) + " is not numeric ('" +
                                                          cells[c] + "')");
      }
      samples.push_back(*v);
    }
    const auto [it, inserted] = codes.emplace(cells[label_col], codes.size());
    labels.push_back(it->second);
    ++rows;
  }
  if (rows < 2) throw LoadError(LoadError::Kind::empty, path.string() + ": need at least 2 data rows");
  if (codes.size() < 2) throw LoadError(LoadError::Kind::single_class, path.string() + ": only one class present");
  return TabularDataset(rows, width - 1, std::move(samples), std::move(labels), codes.size());
}

struct SplitResult {
  TabularDataset train;
  TabularDataset test;
  double test_fraction = 0.30;
  std::uint64_t seed = 0;
};

/// Seeded shuffle; the first round(fraction * n) shuffled rows form the test set.
inline SplitResult train_test_split(const TabularDataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test fraction must lie in (0, 1)");
  if (ds.rows < 4) throw ConfigError("train/test split needs at least 4 samples");
  std::vector<std::size_t> order(ds.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RandomStream rng(seed);
  rng.shuffle(order);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(ds.rows)));
  std::vector<std::size_t> test_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  return {ds.subset(train_idx), ds.subset(test_idx), test_fraction, seed};
}

// ---------------------------------------------------------------------------
// Location data

struct LocationDatasetSpec {
  std::string name;
  std::array<std::size_t, 4> counts{};  // primary, middle, shopping, subway
  double radius = kDefaultRadius;
  std::uint64_t seed = 0;
};

/// Facility counts of the four studied districts, keyed by dataset id and
/// district name.
struct DistrictPreset {
  std::string_view id;
  std::string_view district;
  std::array<std::size_t, 4> counts;
};

inline constexpr std::array<DistrictPreset, 4> kDistrictPresets = {{
    {"LS-D1", "tianhe", {40, 23, 27, 17}},
    {"LS-D2", "haizhu", {50, 30, 14, 12}},
    {"LS-D3", "yuexiu", {98, 61, 34, 22}},
    {"LS-D4", "panyu", {7, 1, 4, 4}},
}};

inline std::optional<DistrictPreset> find_district_preset(std::string_view key) {
  std::string lower(key);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const auto& p : kDistrictPresets) {
    std::string id(p.id);
    for (auto& c : id) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == id || lower == p.district) return p;
  }
  return std::nullopt;
}

/// Uniform facility placement in the disk by rejection sampling in its square.
inline LocationInstance generate_location_dataset(const LocationDatasetSpec& spec) {
  if (!(spec.radius > 0.0)) throw ConfigError("radius must be positive");
  for (std::size_t c : spec.counts) {
    if (c == 0) throw ConfigError("every facility type needs at least one point");
  }
  LocationInstance inst;
  inst.name = spec.name;
  inst.radius = spec.radius;
  RandomStream rng(spec.seed);
  for (FacilityType t : kFacilityTypes) {
    auto& pts = inst.of(t);
    const std::size_t want = spec.counts[static_cast<std::size_t>(t)];
    while (pts.size() < want) {
      const Point2 p{rng.uniform(-spec.radius, spec.radius), rng.uniform(-spec.radius, spec.radius)};
      if (std::hypot(p.x, p.y) <= spec.radius) pts.push_back(p);
    }
  }
  return inst;
}

inline constexpr double kEarthRadiusMeters = 6371008.8;

/// Local equirectangular projection about (lat0, lon0), in meters east / north.
inline Point2 project_equirectangular(double lat, double lon, double lat0, double lon0) {
  constexpr double deg = 3.14159265358979323846 / 180.0;
  return {kEarthRadiusMeters * (lon - lon0) * deg * std::cos(lat0 * deg), kEarthRadiusMeters * (lat - lat0) * deg};
}

namespace detail {

inline double number_field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) throw SchemaError(where + ": missing numeric field '" + key + "'");
  return j.at(key).get<double>();
}

}  // namespace detail

/// Parses the location JSON document. Geographic coordinates are projected to
/// planar meters about the center, which then becomes the origin.
inline LocationInstance location_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("location document must be a JSON object");
  LocationInstance inst;
  inst.name = doc.value("name", std::string{});
  inst.radius = doc.contains("radius_m") ? detail::number_field(doc, "radius_m", "location") : kDefaultRadius;
  if (!doc.contains("center") || !doc.at("center").is_object()) throw SchemaError("location: missing 'center'");
  const auto& c = doc.at("center");
  const bool geographic = c.contains("lat") || c.contains("lon");
  double lat0 = 0.0, lon0 = 0.0;
  if (geographic) {
    lat0 = detail::number_field(c, "lat", "center");
    lon0 = detail::number_field(c, "lon", "center");
    inst.center = {0.0, 0.0};
  } else {
    inst.center = {detail::number_field(c, "x", "center"), detail::number_field(c, "y", "center")};
  }
  if (!doc.contains("facilities") || !doc.at("facilities").is_array()) {
    throw SchemaError("location: missing 'facilities' array");
  }
  const auto& fac = doc.at("facilities");
  for (std::size_t i = 0; i < fac.size(); ++i) {
    const auto& f = fac[i];
    const std::string where = "facilities[" + std::to_string(i) + "]";
    if (!f.is_object() || !f.contains("type") || !f.at("type").is_string()) {
      throw SchemaError(where + ": missing 'type'");
    }
    const auto type_name = f.at("type").get<std::string>();
    FacilityType type{};
    if (!parse_facility_type(type_name, type)) {
      throw SchemaError(where + ": unknown facility type '" + type_name + "'");
    }
    Point2 p;
    if (f.contains("lat") || f.contains("lon")) {
      if (!geographic) throw SchemaError(where + ": geographic coordinates need a geographic center");
      p = project_equirectangular(detail::number_field(f, "lat", where), detail::number_field(f, "lon", where), lat0,
                                  lon0);
    } else {
      p = {detail::number_field(f, "x", where), detail::number_field(f, "y", where)};
    }
    if (distance(p, inst.center) > inst.radius * (1.0 + 1e-12)) {
      throw SchemaError(where + " (" + type_name + ") lies outside the radius");
    }
    inst.of(type).push_back(p);
  }
  inst.validate();
  return inst;
}

inline nlohmann::json location_to_json(const LocationInstance& inst) {
  nlohmann::json doc;
  doc["name"] = inst.name;
  doc["center"] = {{"x", inst.center.x}, {"y", inst.center.y}};
  doc["radius_m"] = inst.radius;
  auto fac = nlohmann::json::array();
  for (FacilityType t : kFacilityTypes) {
    for (const auto& p : inst.of(t)) fac.push_back({{"type", std::string(to_string(t))}, {"x", p.x}, {"y", p.y}});
  }
  doc["facilities"] = std::move(fac);
  return doc;
}

namespace detail {

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(LoadError::Kind::missing_file, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

/// Writes to a sibling temporary and renames it into place.
inline void write_text_atomically(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

inline LocationInstance load_location_json(const std::filesystem::path& path) {
  auto inst = location_from_json(detail::read_json_file(path));
  if (inst.name.empty()) inst.name = path.stem().string();
  return inst;
}

inline void save_location_json(const LocationInstance& inst, const std::filesystem::path& path) {
  detail::write_text_atomically(path, location_to_json(inst).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Reference sets

inline nlohmann::json reference_to_json(const ReferenceSet& ref) {
  return {{"dataset", ref.dataset}, {"grid_n", ref.grid_n}, {"s_dec", ref.s_dec}, {"s_obj", ref.s_obj}};
}

inline ReferenceSet reference_from_json(const nlohmann::json& doc) {
  ReferenceSet ref;
  try {
    ref.dataset = doc.value("dataset", std::string{});
    ref.grid_n = doc.value("grid_n", std::size_t{0});
    ref.s_dec = doc.at("s_dec").get<std::vector<std::vector<double>>>();
    ref.s_obj = doc.at("s_obj").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("reference set: ") + e.what());
  }
  if (ref.s_dec.empty() || ref.s_obj.empty()) throw SchemaError("reference set is empty");
  if (ref.s_dec.size() != ref.s_obj.size()) throw SchemaError("reference set: s_dec and s_obj differ in length");
  ref.fit_normalizers();
  return ref;
}

inline void save_reference_json(const ReferenceSet& ref, const std::filesystem::path& path) {
  detail::write_text_atomically(path, reference_to_json(ref).dump() + "\n");
}

inline ReferenceSet load_reference_json(const std::filesystem::path& path) {
  return reference_from_json(detail::read_json_file(path));
}

}  // namespace mmo

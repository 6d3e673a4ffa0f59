#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include <unistd.h>

#include "mmo/data.hpp"

using namespace mmo;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("mmo_data_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name, std::ios::binary) << text;
    return path_ / name;
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

LoadError::Kind load_error_kind(const fs::path& p) {
  try {
    load_tabular_csv(p);
  } catch (const LoadError& e) {
    return e.kind();
  }
  FAIL("expected a load error");
  return LoadError::Kind::empty;
}

std::string glass_like_csv() {
  std::string s = "RI,Na,Mg,Al,Si,K,Ca,Ba,Fe,Type\n";
  RandomStream rng(214);
  const int types[] = {1, 2, 3, 5, 6, 7, 4};
  for (int i = 0; i < 214; ++i) {
    for (int j = 0; j < 9; ++j) s += std::to_string(rng.uniform(0, 10)) + ",";
    s += std::to_string(types[i % 7]) + "\n";
  }
  return s;
}

}  // namespace

TEST_CASE("tabular CSV loading") {
  TempDir dir;
  SECTION("shape of a 214 x 9 file with 7 classes") {
    const auto ds = load_tabular_csv(dir.write("glass.csv", glass_like_csv()));
    CHECK(ds.rows == 214);
    CHECK(ds.cols == 9);
    CHECK(ds.class_count == 7);
  }
  SECTION("minimal file") {
    const auto ds = load_tabular_csv(dir.write("min.csv", "x,y\n1.5,a\n2,b\n"));
    CHECK(ds.rows == 2);
    CHECK(ds.cols == 1);
    CHECK(ds.class_count == 2);
    CHECK(ds.samples == std::vector<double>{1.5, 2.0});
  }
  SECTION("string labels by first appearance") {
    const auto ds = load_tabular_csv(dir.write("pets.csv", "w,label\n1,cat\n2,dog\n3,cat\n"));
    CHECK(ds.labels == std::vector<std::size_t>{0, 1, 0});
  }
  SECTION("label column override, BOM, CRLF and quotes") {
    const auto ds = load_tabular_csv(dir.write("q.csv", "\xEF\xBB\xBFlabel,a,b\r\n\"x\",1,\"2\"\r\ny,3,4\r\n"), 0);
    CHECK(ds.cols == 2);
    CHECK(ds.samples == std::vector<double>{1, 2, 3, 4});
    CHECK(ds.labels == std::vector<std::size_t>{0, 1});
  }
  SECTION("distinct errors") {
    CHECK(load_error_kind(dir.path() / "absent.csv") == LoadError::Kind::missing_file);
    CHECK(load_error_kind(dir.write("ragged.csv", "a,b,c\n1,2,x\n1,2\n")) == LoadError::Kind::ragged_row);
    CHECK(load_error_kind(dir.write("nan.csv", "a,b\n1,x\nfoo,y\n")) == LoadError::Kind::non_numeric);
    CHECK(load_error_kind(dir.write("one.csv", "a,b\n1,x\n2,x\n")) == LoadError::Kind::single_class);
    CHECK(load_error_kind(dir.write("empty.csv", "")) == LoadError::Kind::empty);
  }
  SECTION("errors name the offending row") {
    try {
      load_tabular_csv(dir.write("bad.csv", "a,b\n1,x\n2,y\nthree,z\n"));
      FAIL("expected a load error");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("row 4") != std::string::npos);
    }
  }
}

TEST_CASE("train/test split") {
  auto make = [](std::size_t n) {
    std::vector<double> x(n);
    std::vector<std::size_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(i);
      y[i] = i % 2;
    }
    return TabularDataset(n, 1, x, y, 2);
  };
  CHECK(train_test_split(make(10), 0.3, 1).test.rows == 3);
  const auto s = train_test_split(make(214), 0.3, 9);
  CHECK(s.test.rows == 64);
  CHECK(s.train.rows == 150);
  std::multiset<double> seen(s.train.samples.begin(), s.train.samples.end());
  seen.insert(s.test.samples.begin(), s.test.samples.end());
  CHECK(seen.size() == 214);
  CHECK(std::set<double>(seen.begin(), seen.end()).size() == 214);
  const auto again = train_test_split(make(214), 0.3, 9);
  CHECK(again.test == s.test);
  CHECK(again.train == s.train);
  CHECK_FALSE(train_test_split(make(214), 0.3, 10).test == s.test);
  CHECK_THROWS_AS(train_test_split(make(10), 0.0, 1), ConfigError);
  CHECK_THROWS_AS(train_test_split(make(10), 1.0, 1), ConfigError);
}

TEST_CASE("location dataset generation") {
  for (const auto& preset : kDistrictPresets) {
    const auto inst = generate_location_dataset({std::string(preset.id), preset.counts, 3000, 3});
    for (std::size_t t = 0; t < 4; ++t) CHECK(inst.facilities[t].size() == preset.counts[t]);
    for (const auto& pts : inst.facilities) {
      for (const auto& p : pts) CHECK(std::hypot(p.x, p.y) <= 3000.0);
    }
    CHECK(inst == generate_location_dataset({std::string(preset.id), preset.counts, 3000, 3}));
  }
  CHECK(find_district_preset("LS-D1")->counts == std::array<std::size_t, 4>{40, 23, 27, 17});
  CHECK(find_district_preset("panyu")->counts == std::array<std::size_t, 4>{7, 1, 4, 4});
  CHECK_FALSE(find_district_preset("nowhere"));
  CHECK_THROWS_AS(generate_location_dataset({"x", {1, 0, 1, 1}, 3000, 1}), ConfigError);
}

TEST_CASE("location JSON") {
  TempDir dir;
  SECTION("round trip") {
    const auto inst = generate_location_dataset({"LS-D2", {50, 30, 14, 12}, 3000, 17});
    save_location_json(inst, dir.path() / "d2.json");
    CHECK(load_location_json(dir.path() / "d2.json") == inst);
  }
  SECTION("unknown facility type names the entry") {
    const auto p = dir.write("park.json", R"({"name":"p","center":{"x":0,"y":0},"radius_m":3000,"facilities":[
      {"type":"primary_school","x":0,"y":0},{"type":"park","x":1,"y":1}]})");
    try {
      load_location_json(p);
      FAIL("expected a schema error");
    } catch (const SchemaError& e) {
      const std::string what = e.what();
      CHECK(what.find("facilities[1]") != std::string::npos);
      CHECK(what.find("park") != std::string::npos);
    }
  }
  SECTION("missing type and out-of-radius points") {
    const auto missing = dir.write("m.json", R"({"center":{"x":0,"y":0},"facilities":[
      {"type":"primary_school","x":0,"y":0},{"type":"middle_school","x":0,"y":0},
      {"type":"shopping_center","x":0,"y":0}]})");
    CHECK_THROWS_AS(load_location_json(missing), SchemaError);
    const auto far = dir.write("f.json", R"({"center":{"x":0,"y":0},"facilities":[
      {"type":"primary_school","x":0,"y":0},{"type":"middle_school","x":0,"y":0},
      {"type":"shopping_center","x":0,"y":0},{"type":"subway_station","x":2500,"y":2500}]})");
    CHECK_THROWS_AS(load_location_json(far), SchemaError);
  }
  SECTION("geographic coordinates are projected about the center") {
    const auto p = dir.write("geo.json", R"({"name":"geo","center":{"lat":23.0,"lon":113.0},"radius_m":3000,"facilities":[
      {"type":"primary_school","lat":23.01,"lon":113.0},
      {"type":"middle_school","lat":23.0,"lon":113.01},
      {"type":"shopping_center","lat":23.0,"lon":113.0},
      {"type":"subway_station","lat":22.995,"lon":112.99}]})");
    const auto inst = load_location_json(p);
    CHECK(inst.center.x == 0.0);
    CHECK(inst.center.y == 0.0);
    // 0.01 degree of latitude is 1111.9508 m; of longitude at 23 N, 1023.5561 m
    CHECK(inst.of(FacilityType::primary_school)[0].y == Approx(1111.9508023).epsilon(1e-9));
    CHECK(inst.of(FacilityType::primary_school)[0].x == Approx(0.0).margin(1e-9));
    CHECK(inst.of(FacilityType::middle_school)[0].x == Approx(1023.5561104).epsilon(1e-9));
    CHECK(inst.of(FacilityType::subway_station)[0].x == Approx(-1023.5561104).epsilon(1e-9));
  }
}

TEST_CASE("reference set JSON round trip") {
  TempDir dir;
  const auto inst = generate_location_dataset({"r", {7, 1, 4, 4}, 3000, 2});
  auto ref = build_location_reference(inst, 40);
  save_reference_json(ref, dir.path() / "ref.json");
  const auto back = load_reference_json(dir.path() / "ref.json");
  CHECK(back == ref);
  CHECK_THROWS_AS(reference_from_json(nlohmann::json{{"s_dec", {{0.0, 0.0}}}}), SchemaError);
}

// Drives the command line in-process through run_cli, with real files in a
// scratch directory.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "a2x/cli.hpp"
#include "a2x/dataio.hpp"
#include "a2x/grouping.hpp"
#include "a2x/poison.hpp"
#include "support/oracles.hpp"
#include "support/published_mappings.hpp"

using namespace a2x;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;

  std::map<std::string, std::string> kv() const {
    std::map<std::string, std::string> m;
    std::istringstream in(out);
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) m[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return m;
  }
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "a2x");
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Scratch {
 public:
  Scratch() {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("a2x-cli-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  std::string operator/(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

std::vector<std::uint8_t> bytes_of(const std::string& path) { return read_file_bytes(path); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

TensorDataset small_images(std::uint64_t n, std::uint32_t k, std::uint16_t side) {
  TensorDataset ds;
  ds.n = n;
  ds.channels = 3;
  ds.height = ds.width = side;
  ds.num_classes = k;
  std::mt19937_64 gen(n);
  for (std::uint64_t i = 0; i < n; ++i) ds.labels.push_back(static_cast<ClassId>(i % k));
  ds.pixels.resize(n * ds.sample_size());
  for (auto& p : ds.pixels) p = static_cast<std::uint8_t>(gen());
  return ds;
}

}  // namespace

TEST_CASE("synth then plan recovers the planted groups") {
  Scratch tmp;
  const auto emb = tmp / "e.a2xe";
  auto s = cli({"--seed", "4", "synth", "--out", emb});
  REQUIRE(s.code == 0);
  CHECK(s.kv().at("rows") == "500");
  CHECK(fs::exists(emb + ".planted.json"));

  // Same seed, same bytes.
  const auto first = bytes_of(emb);
  REQUIRE(cli({"--seed", "4", "synth", "--out", emb}).code == 0);
  CHECK(bytes_of(emb) == first);

  const auto map = tmp / "m.json";
  auto p = cli({"--seed", "4", "plan", emb, "--x", "3", "--out", map});
  REQUIRE(p.code == 0);
  CHECK(bytes_of(emb) == first);  // input untouched

  const auto planted = nlohmann::json::parse(std::ifstream(emb + ".planted.json"));
  const auto want = planted.at("groups").get<std::vector<std::vector<ClassId>>>();
  const auto m = load_mapping(map);
  CHECK(oracle::as_partition(m.groups) == oracle::as_partition(want));
  CHECK(p.kv().at("x") == "3");
  CHECK(p.kv().count("silhouette_mean") == 1);

  // Deterministic output file.
  const auto again = tmp / "m2.json";
  REQUIRE(cli({"--seed", "4", "plan", emb, "--x", "3", "--out", again}).code == 0);
  CHECK(bytes_of(map) == bytes_of(again));

  CHECK(cli({"plan", emb, "--x", "11", "--out", map}).code == 2);
  CHECK(cli({"plan", emb, "--x", "0", "--out", map}).code == 2);
  CHECK(cli({"plan", tmp / "missing.a2xe", "--x", "3", "--out", map}).code == 4);
  CHECK(cli({"--norm", "l7", "plan", emb, "--x", "3", "--out", map}).code == 2);
}

TEST_CASE("plan at x = K uses singleton groups") {
  Scratch tmp;
  const auto emb = tmp / "e.a2xe";
  REQUIRE(cli({"synth", "--k", "6", "--x-planted", "2", "--dim", "4", "--out", emb}).code == 0);
  const auto map = tmp / "m.json";
  REQUIRE(cli({"plan", emb, "--x", "6", "--out", map}).code == 0);
  const auto m = load_mapping(map);
  for (std::uint32_t c = 0; c < 6; ++c) CHECK(m.groups[c] == std::vector<ClassId>{c});
}

TEST_CASE("corrupt inputs map to validation exit codes") {
  Scratch tmp;
  const auto emb = tmp / "e.a2xe";
  REQUIRE(cli({"synth", "--out", emb}).code == 0);
  auto bytes = bytes_of(emb);
  bytes.resize(bytes.size() - 3);
  write_file_bytes(tmp / "short.a2xe", bytes);
  bytes[0] = 'Z';
  write_file_bytes(tmp / "magic.a2xe", bytes);
  const auto map = tmp / "m.json";
  CHECK(cli({"plan", tmp / "short.a2xe", "--x", "2", "--out", map}).code == 2);
  CHECK(cli({"plan", tmp / "magic.a2xe", "--x", "2", "--out", map}).code == 2);
  CHECK(cli({"plan", emb, "--x", "2", "--out", tmp / "no/such/dir/m.json"}).code == 4);
}

TEST_CASE("baseline mappings") {
  Scratch tmp;
  const auto cyc = tmp / "c.json";
  auto r = cli({"baseline", "--mode", "cyclic", "--k", "10", "--out", cyc});
  REQUIRE(r.code == 0);
  CHECK(load_mapping(cyc).table[9] == 0);
  CHECK(r.kv().at("table") == "1,2,3,4,5,6,7,8,9,0");

  const auto a = tmp / "a.json", b = tmp / "b.json";
  REQUIRE(cli({"--seed", "17", "baseline", "--mode", "random", "--k", "100", "--x", "50",
               "--out", a}).code == 0);
  REQUIRE(cli({"--seed", "17", "baseline", "--mode", "random", "--k", "100", "--x", "50",
               "--out", b}).code == 0);
  CHECK(bytes_of(a) == bytes_of(b));
  CHECK(load_mapping(a).x == 50);

  CHECK(cli({"baseline", "--mode", "random", "--k", "10", "--x", "0", "--out", a}).code == 2);
  CHECK(cli({"baseline", "--mode", "random", "--k", "10", "--out", a}).code == 2);
  CHECK(cli({"baseline", "--mode", "spiral", "--k", "10", "--out", a}).code == 2);
  CHECK(cli({"baseline", "--mode", "cyclic", "--k", "1", "--out", a}).code == 2);
}

TEST_CASE("eval reports") {
  Scratch tmp;
  const auto emb = tmp / "e.a2xe";
  REQUIRE(cli({"synth", "--seed", "1", "--out", emb}).code == 0);

  const auto pub = tmp / "x2.json";
  save_mapping(Mapping::from_table(testing::published_tables().at(2)), pub);
  auto r = cli({"eval", pub, emb, "--csv", tmp / "score.csv"});
  REQUIRE(r.code == 0);
  CHECK(r.kv().at("self_target_count") == "0");
  CHECK(r.kv().count("warning") == 0);
  CHECK(fs::exists(tmp / "score.csv"));

  const auto one = tmp / "one.json";
  save_mapping(Mapping::from_groups(10, {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}, {3}), one);
  r = cli({"eval", one, emb});
  REQUIRE(r.code == 0);
  CHECK(r.kv().count("silhouette_mean") == 0);
  CHECK(r.kv().at("self_target_count") == "1");
  CHECK(r.kv().count("warning") == 1);

  const auto small = tmp / "k5.json";
  REQUIRE(cli({"baseline", "--mode", "cyclic", "--k", "5", "--out", small}).code == 0);
  CHECK(cli({"eval", small, emb}).code == 2);

  write_text(tmp / "bad.json", R"({"num_classes":10})");
  CHECK(cli({"eval", tmp / "bad.json", emb}).code == 2);
}

TEST_CASE("optimized mapping beats every swept mapping at x = K") {
  Scratch tmp;
  const auto emb = tmp / "e.a2xe";
  REQUIRE(cli({"--seed", "2", "synth", "--out", emb}).code == 0);
  auto p = cli({"plan", emb, "--x", "10", "--out", tmp / "m.json"});
  REQUIRE(p.code == 0);
  auto s = cli({"--seed", "9", "sweep", emb, "--x", "10", "--n", "200", "--out", tmp / "s.csv"});
  REQUIRE(s.code == 0);
  CHECK(s.kv().at("rows") == "200");
  CHECK(std::stod(p.kv().at("objective")) >= std::stod(s.kv().at("max_objective")));
}

TEST_CASE("sweep CSV") {
  Scratch tmp;
  const auto emb = tmp / "e.a2xe";
  REQUIRE(cli({"synth", "--out", emb}).code == 0);
  const auto csv = tmp / "s.csv";
  auto r = cli({"--seed", "3", "sweep", emb, "--k", "10", "--x", "2", "--out", csv});
  REQUIRE(r.code == 0);
  CHECK(r.kv().count("pearson_objective_silhouette") == 1);
  std::ifstream in(csv);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 201);

  CHECK(cli({"sweep", emb, "--k", "9", "--x", "2", "--out", csv}).code == 2);
  CHECK(cli({"sweep", emb, "--x", "2", "--n", "0", "--out", csv}).code == 2);
}

TEST_CASE("trigger and poison commands") {
  Scratch tmp;
  const auto data = tmp / "d.a2xd";
  save_dataset(small_images(50000, 10, 2), data);
  const auto before = bytes_of(data);

  const auto trig = tmp / "t.json";
  write_text(trig, R"({"variant":"replace_square","side":1})");
  const auto map = tmp / "m.json";
  REQUIRE(cli({"baseline", "--mode", "cyclic", "--k", "10", "--out", map}).code == 0);

  auto r = cli({"--seed", "5", "poison", data, "--mapping", map, "--trigger", trig, "--rate",
                "0.05", "--out", tmp / "p.a2xd", "--manifest-out", tmp / "man.json"});
  REQUIRE(r.code == 0);
  CHECK(r.kv().at("count") == "2500");
  std::ifstream mf(tmp / "man.json");
  const std::string mtext((std::istreambuf_iterator<char>(mf)), {});
  const auto manifest = manifest_from_json(mtext);
  CHECK(manifest.count() == 2500);
  CHECK(manifest.seed == 5);
  CHECK(manifest.rate == 0.05);
  CHECK(bytes_of(data) == before);

  CHECK(cli({"poison", data, "--mapping", map, "--trigger", trig, "--rate", "1.5", "--out",
             tmp / "p.a2xd", "--manifest-out", tmp / "man.json"})
            .code == 2);

  const auto t1 = tmp / "t1.a2xd", t2 = tmp / "t2.a2xd";
  REQUIRE(cli({"trigger", data, "--trigger", trig, "--out", t1}).code == 0);
  REQUIRE(cli({"trigger", t1, "--trigger", trig, "--out", t2}).code == 0);
  CHECK(bytes_of(t1) == bytes_of(t2));
  CHECK(load_dataset(t1).labels == load_dataset(data).labels);

  write_text(tmp / "bad.json", R"({"variant":"spiral"})");
  CHECK(cli({"trigger", data, "--trigger", tmp / "bad.json", "--out", t1}).code == 2);
}

TEST_CASE("verify command") {
  auto r = cli({"--seed", "1", "verify", "--trials", "500", "--max-k", "8"});
  CHECK(r.code == 0);
  CHECK(r.kv().at("mismatches") == "0");
  CHECK(r.kv().at("trials") == "500");

  r = cli({"verify", "--max-k", "9"});
  CHECK(r.code == 3);
  CHECK(r.err.find("--allow-large") != std::string::npos);

  CHECK(cli({"verify", "--trials", "3", "--max-k", "9", "--allow-large"}).code == 0);
  CHECK(cli({"verify", "--trials", "0"}).code == 2);
}

TEST_CASE("global flags and parse errors") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"launch"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"verify", "--trials", "many"}).code == 2);

  auto quiet = cli({"--quiet", "verify", "--trials", "5"});
  CHECK(quiet.code == 0);
  CHECK(quiet.out.empty());
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hyshadow/cli.hpp"

using namespace hyshadow;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hyshadow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string tmp(const std::string& name) {
  static const fs::path dir = [] {
    fs::path d = fs::path(testing::TempDir()) / "hyshadow_cli";
    fs::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Cheap orbit shared by most tests.
const std::string& orbit_file() {
  static const std::string path = [] {
    const std::string p = tmp("po.json");
    const auto r = cli({"build", "--system", "sphere", "--eps", "0.45", "--delta", "0.1", "--out", p});
    EXPECT_EQ(r.code, 0) << r.err;
    return p;
  }();
  return path;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Cli, UnknownSubcommandIsAnInputError) {
  const auto r = cli({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, UnknownFlagIsAnInputError) {
  const auto r = cli({"critpoints", "--colour", "red"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Cli, MissingSubcommandIsAnInputError) { EXPECT_EQ(cli({}).code, 2); }

TEST(Cli, MissingFileIsAnInputError) {
  EXPECT_EQ(cli({"validate", tmp("nonexistent.json")}).code, 2);
}

TEST(Cli, MalformedJsonIsAnInputError) {
  const std::string p = tmp("broken.json");
  write_text_file(p, "{\"system\": \"sphere\", ");
  EXPECT_EQ(cli({"validate", p}).code, 2);
  write_text_file(p, "{\"system\": \"sphere\"}");
  EXPECT_EQ(cli({"validate", p}).code, 2);
}

TEST(Cli, InvalidOverridesAreRejectedUpFront) {
  EXPECT_EQ(cli({"build", "--a1", "0.7", "--b1", "0.5", "--eps", "0.3"}).code, 2);
  EXPECT_EQ(cli({"build", "--delta", "-0.1", "--eps", "0.3"}).code, 2);
  EXPECT_EQ(cli({"build", "--N", "0", "--eps", "0.3"}).code, 2);
  EXPECT_EQ(cli({"critpoints", "--system", "klein"}).code, 2);
}

TEST(Cli, CriticalPoints) {
  for (const auto& [name, n, sum] : {std::tuple{"sphere", 2u, 2}, std::tuple{"torus", 4u, 0}}) {
    const auto r = cli({"critpoints", "--system", name});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["critical_points"].size(), n);
    EXPECT_EQ(j["alternating_sum"].get<int>(), sum);
  }
}

TEST(Cli, PairHasEndpointsAndSamples) {
  const auto r = cli({"pair"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["p"]["index"].get<int>(), 2);
  EXPECT_EQ(j["q"]["index"].get<int>(), 0);
  EXPECT_NEAR(j["separation"].get<double>(), 2.0, 1e-6);
  EXPECT_EQ(j["gamma1"]["t"].size(), j["gamma1"]["x"].size());
  EXPECT_GT(j["gamma2"]["t"].size(), 100u);
}

TEST(Cli, BuildThenValidate) {
  const auto r = cli({"validate", orbit_file()});
  EXPECT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Cli, RoundTripReproducesValidation) {
  const PseudoOrbit po = pseudo_orbit_from_json(read_json_file(orbit_file()));
  // Serialising the parsed orbit gives the same bytes back.
  EXPECT_EQ(pseudo_orbit_to_json(po).dump() + "\n", slurp(orbit_file()));
  const auto direct = validation_to_json(validate_pseudo_orbit(MorseSystem::sphere_height(), po));
  EXPECT_EQ(json::parse(cli({"validate", orbit_file()}).out), direct);
}

TEST(Cli, CorruptedOrbitFailsValidation) {
  json j = read_json_file(orbit_file());
  auto& pts = j["X"][41]["points"];
  pts.erase(pts.begin() + static_cast<long>(pts.size() / 2), pts.end());
  const std::string p = tmp("corrupt.json");
  write_text_file(p, j.dump());
  const auto r = cli({"validate", p});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(json::parse(r.out)["pass"].get<bool>());
}

TEST(Cli, OffManifoldPointIsAnInputError) {
  json j = read_json_file(orbit_file());
  j["X"][3]["points"][0] = json::array({1.0, 1.0, 1.0});
  const std::string p = tmp("offsphere.json");
  write_text_file(p, j.dump());
  EXPECT_EQ(cli({"validate", p}).code, 2);
}

TEST(Cli, RefuteX0Itself) {
  const auto r = cli({"refute", orbit_file(), "--family", "x0_itself", "--verify"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["candidates"].size(), 1u);
  EXPECT_EQ(j["candidates"][0]["verdict"], "DirectViolation");
  EXPECT_TRUE(j["candidates"][0]["details"]["direct"]["brute_force_verified"].get<bool>());
  EXPECT_EQ(j["summary"]["total"].get<int>(), 1);
  EXPECT_EQ(j["summary"]["inconclusive"].get<int>(), 0);
}

TEST(Cli, RefuteRejectsUnknownFamily) {
  EXPECT_EQ(cli({"refute", orbit_file(), "--family", "everything"}).code, 2);
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  const auto one = cli({"--threads", "1", "refute", orbit_file(), "--family", "arc_through_p", "--count", "2"});
  const auto four = cli({"refute", orbit_file(), "--family", "arc_through_p", "--count", "2", "--threads", "4"});
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(one.out, four.out);
  set_thread_count(0);
}

TEST(Cli, SeedChangesCandidates) {
  const auto a = cli({"refute", orbit_file(), "--family", "arc_through_p", "--count", "1", "--seed", "1"});
  const auto b = cli({"refute", orbit_file(), "--family", "arc_through_p", "--count", "1", "--seed", "2"});
  ASSERT_EQ(a.code, 0);
  EXPECT_NE(json::parse(a.out)["candidates"][0]["params"], json::parse(b.out)["candidates"][0]["params"]);
}

TEST(Cli, TorusEpsilonSearchIsADomainFailure) {
  const auto r = cli({"epsilon", "--system", "torus", "--samples", "1000", "--bisection-steps", "2"});
  EXPECT_EQ(r.code, 1);
  // After the a1 lowerings the gap is too small, so the last failure is
  // disjointness rather than no-jump.
  EXPECT_NE(r.err.find("search-failed"), std::string::npos) << r.err;
}

TEST(Cli, ShadowBase) {
  const auto r = cli({"shadow-base", "--count", "3", "--length", "20"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["summary"]["found"].get<int>(), 3);
  EXPECT_EQ(j["results"].size(), 3u);
}

TEST(Cli, ShadowBaseRejectsNonPseudoOrbit) {
  const std::string p = tmp("jumpy.json");
  write_text_file(p, R"({"points": [[0.6, 0.0, 0.8], [0.0, 0.6, -0.8]]})");
  EXPECT_EQ(cli({"shadow-base", p}).code, 2);
}

TEST(Plot, FiveSnapshotsAndDeterministicBytes) {
  const std::string a = tmp("a.svg");
  const std::string b = tmp("b.svg");
  ASSERT_EQ(cli({"plot", orbit_file(), "--out", a}).code, 0);
  ASSERT_EQ(cli({"plot", orbit_file(), "--out", b}).code, 0);
  const std::string svg = slurp(a);
  EXPECT_EQ(svg, slurp(b));
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
  for (const char* id : {"X_-40", "X_-20", "X_0", "X_20", "X_40"})
    EXPECT_EQ(count(svg, std::string("id=\"") + id + "\""), 1u) << id;
  EXPECT_EQ(count(svg, "id=\"X_"), 5u);
  EXPECT_EQ(svg.find("class=\"witness\""), std::string::npos);
}

TEST(Plot, WitnessSegmentFromReport) {
  const std::string rep = tmp("rep.json");
  ASSERT_EQ(cli({"refute", orbit_file(), "--family", "single_trajectory", "--include-candidates", "--out", rep}).code,
            0);
  const json j = read_json_file(rep);
  const auto r = cli({"plot", orbit_file(), "--report", rep});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count(r.out, "<line class=\"witness\""), j["candidates"].size());
  EXPECT_NE(r.out.find("id=\"candidates\""), std::string::npos);

  // The witness endpoints land where the camera puts the witness points.
  const Manifold m = Manifold::sphere();
  const auto w = j["candidates"][0]["details"]["direct"]["witness"];
  const auto pr = find_trajectory_pair(MorseSystem::sphere_height());
  const detail::Camera cam(m, point_at_time(MorseSystem::sphere_height(), pr.gamma1, 0.0));
  const auto sa = cam.project(point_from_json(m, w[0]));
  const auto sb = cam.project(point_from_json(m, w[1]));
  const std::string line = "<line class=\"witness\" x1=\"" + detail::num(sa.x) + "\" y1=\"" + detail::num(sa.y) +
                           "\" x2=\"" + detail::num(sb.x) + "\" y2=\"" + detail::num(sb.y) + "\"/>";
  EXPECT_NE(r.out.find(line), std::string::npos);

  // A report on its own renders too, without snapshots.
  const auto alone = cli({"plot", rep});
  ASSERT_EQ(alone.code, 0) << alone.err;
  EXPECT_NE(alone.out.find("class=\"witness\""), std::string::npos);
  EXPECT_EQ(alone.out.find("id=\"X_"), std::string::npos);
}

TEST(Plot, TorusDrawsTheSquare) {
  const std::string p = tmp("torus_po.json");
  const auto b = cli({"build", "--system", "torus", "--eps", "0.1", "--delta", "0.05", "--N", "10", "--out", p});
  ASSERT_EQ(b.code, 0) << b.err;
  const auto r = cli({"plot", p});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("<rect class=\"frame\""), std::string::npos);
}

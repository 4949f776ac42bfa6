#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "hiertask/skills.hpp"
#include "hiertask/vectorizer.hpp"
#include "test_util.hpp"

using namespace hiertask;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("Move to the door!") ==
        std::vector<std::string>{"move", "to", "the", "door"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("Pick_up box-2") ==
        std::vector<std::string>{"pick", "up", "box", "2"});
  CHECK(tokenize("   ") == std::vector<std::string>{});
  CHECK(tokenize("a1b2") == std::vector<std::string>{"a1b2"});
}

TEST_CASE("fnv1a64 matches the documented constants") {
  // offset basis hashes the empty string
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  // one-byte sanity value: (basis ^ 'a') * prime
  CHECK(fnv1a64("a") == 12638187200555641996ULL);
}

TEST_CASE("embed of all-empty input is the zero vector") {
  const auto v = embed("", {}, "");
  CHECK(v.is_zero());
  CHECK(v.entries.empty());
  CHECK(v.l2_norm() == 0.0);
}

TEST_CASE("embed is deterministic") {
  const std::vector<std::string> kws{"grasp", "grab"};
  const auto a = embed("pick up the red box", kws, "fetch task");
  const auto b = embed("pick up the red box", kws, "fetch task");
  CHECK(a == b);
}

TEST_CASE("repeated token accumulates term frequency before normalizing") {
  const auto v = embed("pick pick", {}, "");
  REQUIRE(v.entries.size() == 1);
  CHECK(v.entries.begin()->second == doctest::Approx(1.0).epsilon(1e-12));
  // pinned from the reference script
  CHECK(v.entries.begin()->first == 1470);
}

TEST_CASE("non-empty embeddings are unit length") {
  const char* samples[] = {"move to", "pick up the red box",
                           "survey area and report", "x", "1 2 3"};
  for (const auto* s : samples) {
    const auto v = embed(s, {}, "");
    CHECK(std::fabs(v.l2_norm() - 1.0) < 1e-9);
  }
  const std::vector<std::string> kws{"alpha", "beta"};
  const auto v = embed("gamma", kws, "delta epsilon");
  CHECK(std::fabs(v.l2_norm() - 1.0) < 1e-9);
}

TEST_CASE("all weights positive and indices inside the dimension") {
  const std::vector<std::string> kws{"grasp"};
  const auto v = embed("pick up", kws, "context words");
  for (const auto& [d, w] : v.entries) {
    CHECK(d < v.dim);
    CHECK(w > 0.0);
    CHECK(std::isfinite(w));
  }
}

TEST_CASE("field salting separates description from keyword tokens") {
  const auto d = embed("grasp", {}, "");
  const std::vector<std::string> kws{"grasp"};
  const auto k = embed("", kws, "");
  const auto c = embed("", {}, "grasp");
  REQUIRE(d.entries.size() == 1);
  REQUIRE(k.entries.size() == 1);
  REQUIRE(c.entries.size() == 1);
  std::set<std::uint32_t> dims{d.entries.begin()->first,
                               k.entries.begin()->first,
                               c.entries.begin()->first};
  CHECK(dims.size() == 3);
}

TEST_CASE("bundled registry corpus stays within the collision budget") {
  const auto registry =
      SkillRegistry::load(testutil::share_dir() / "skills/registry.json");
  std::set<std::string> salted;
  const auto doc = registry.to_json();
  for (const auto& s : doc) {
    for (const auto& t : tokenize(s.at("description").get<std::string>())) {
      salted.insert("d:" + t);
    }
    for (const auto& kw : s.at("keywords")) {
      for (const auto& t : tokenize(kw.get<std::string>())) {
        salted.insert("k:" + t);
      }
    }
  }
  REQUIRE(salted.size() <= 64);
  std::set<std::uint64_t> dims;
  for (const auto& t : salted) dims.insert(fnv1a64(t) % kFeatureDim);
  const auto collisions = salted.size() - dims.size();
  CHECK(collisions <= 2);
  CHECK(collisions == 0);  // pinned for the bundled fixture
}

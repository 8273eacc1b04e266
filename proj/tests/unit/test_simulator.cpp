#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "fixtures.hpp"
#include "mmd/clustering.hpp"
#include "mmd/error.hpp"
#include "mmd/fsa.hpp"
#include "mmd/responders.hpp"
#include "mmd/simulator.hpp"

using namespace mmd;

namespace {

const fixtures::World& world() {
  static const fixtures::World w = fixtures::make_world(300, 17);
  return w;
}

/// Two tight blobs in the plane: ids A0..A4 around (0,0), B0..B4 around (10,0).
ImageSpace two_blobs() {
  std::vector<std::string> ids;
  Matrix pts(10, 2);
  const double offsets[5][2] = {{0, 0}, {0.5, 0.2}, {-0.4, 0.3}, {0.2, -0.6}, {-0.3, -0.2}};
  for (int b = 0; b < 2; ++b) {
    for (int i = 0; i < 5; ++i) {
      ids.push_back(std::string(b == 0 ? "A" : "B") + std::to_string(i));
      pts(b * 5 + i, 0) = offsets[i][0] + 10.0 * b;
      pts(b * 5 + i, 1) = offsets[i][1];
    }
  }
  return ImageSpace(ids, pts);
}

/// O(n^3) textbook average linkage: merge heights in order.
std::vector<double> naive_average_linkage(const Matrix& pts) {
  const std::size_t n = pts.rows();
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0;
    for (std::size_t c = 0; c < pts.cols(); ++c) s += (pts(a, c) - pts(b, c)) * (pts(a, c) - pts(b, c));
    return std::sqrt(s);
  };
  std::vector<double> heights;
  while (clusters.size() > 1) {
    double best = INFINITY;
    std::size_t bi = 0, bj = 1;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double s = 0;
        for (auto a : clusters[i]) for (auto b : clusters[j]) s += dist(a, b);
        s /= static_cast<double>(clusters[i].size() * clusters[j].size());
        if (s < best) best = s, bi = i, bj = j;
      }
    }
    heights.push_back(best);
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return heights;
}

}  // namespace

TEST_CASE("automaton configuration") {
  const auto c = FsaConfig::defaults();
  CHECK_NOTHROW(c.validate());
  CHECK(c.p_context_switch == 0.1);
  CHECK(c.p_end == 0.25);
  CHECK(c.max_rounds == 12);
  CHECK(c.transitions.at(FsaNode::Attribute).at(FsaNode::ImageClick) == doctest::Approx(0.6));

  const auto back = FsaConfig::from_json(c.to_json());
  CHECK(back.transitions == c.transitions);
  CHECK(back.multiplier_hi == 5.0);

  auto bad = c;
  bad.transitions[FsaNode::Gender][FsaNode::Attribute] = 0.9;
  CHECK_THROWS_AS(bad.validate(), Error);
  SeededRng rng(1);
  try {
    step_fsa(FsaNode::Gender, {}, bad, rng);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }

  fixtures::TempDir dir("fsa");
  {
    std::ofstream out(dir / "fsa.json");
    out << R"({"p_end": 0.5, "cluster_multiplier_range": [3, 4]})";
  }
  const auto loaded = load_fsa_config((dir / "fsa.json").string());
  CHECK(loaded.p_end == 0.5);
  CHECK(loaded.multiplier_lo == 3.0);
  CHECK(loaded.transitions == c.transitions);
}

TEST_CASE("automaton steps") {
  SeededRng rng(3);
  auto forced = FsaConfig::defaults();
  forced.transitions[FsaNode::Start] = {{FsaNode::Category, 1.0}};
  for (int i = 0; i < 50; ++i) CHECK(step_fsa(FsaNode::Start, {}, forced, rng) == FsaNode::Category);

  auto ending = FsaConfig::defaults();
  ending.p_end = 1.0;
  for (int i = 0; i < 50; ++i) {
    CHECK(step_fsa(FsaNode::Attribute, {}, ending, rng) == FsaNode::End);
    CHECK(step_fsa(FsaNode::ImageClick, {}, ending, rng) == FsaNode::End);
  }
  CHECK_THROWS_AS(step_fsa(FsaNode::End, {}, ending, rng), Error);

  SUBCASE("empirical frequencies from start") {
    const auto c = FsaConfig::defaults();
    std::map<FsaNode, int> hits;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) ++hits[step_fsa(FsaNode::Start, {}, c, rng)];
    for (const auto& [to, p] : c.transitions.at(FsaNode::Start)) {
      CHECK(std::abs(hits[to] / double(n) - p) < 0.02);
    }
  }

  SUBCASE("attribute jumps without a category are redirected") {
    const auto c = FsaConfig::defaults();
    DialogContext gender_only;
    gender_only.gender = "men";
    std::map<FsaNode, int> hits;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) ++hits[step_fsa(FsaNode::Gender, gender_only, c, rng)];
    CHECK(hits[FsaNode::Attribute] == 0);
    // 0.4 attribute mass split 1:2 between category (0.2) and image-click (0.4).
    CHECK(std::abs(hits[FsaNode::Category] / double(n) - (0.2 + 0.4 / 3)) < 0.02);
    CHECK(std::abs(hits[FsaNode::ImageClick] / double(n) - (0.4 + 0.8 / 3)) < 0.02);

    DialogContext with_category = gender_only;
    with_category.category = "shoes";
    int attribute = 0;
    for (int i = 0; i < 10'000; ++i) attribute += step_fsa(FsaNode::Gender, with_category, c, rng) == FsaNode::Attribute;
    CHECK(std::abs(attribute / 10'000.0 - 0.4) < 0.02);
  }
}

TEST_CASE("text query generation") {
  const auto& vocab = world().vocab;
  auto c = FsaConfig::defaults();
  SeededRng rng(5);

  SUBCASE("gender node") {
    for (int i = 0; i < 200; ++i) {
      DialogContext ctx;
      const auto q = gen_text_query(FsaNode::Gender, ctx, vocab, c, rng, 0);
      REQUIRE(q.tokens.size() == 1);
      CHECK((q.tokens[0] == "men" || q.tokens[0] == "women"));
      CHECK(ctx.gender == q.tokens[0]);
    }
  }

  SUBCASE("attribute node never emits inapplicable attributes") {
    c.p_context_switch = 0.0;
    for (int i = 0; i < 3000; ++i) {
      DialogContext ctx;
      ctx.set_category("shoes", vocab);
      const auto q = gen_text_query(FsaNode::Attribute, ctx, vocab, c, rng, 1);
      REQUIRE(q.tokens.size() == 1);
      const auto a = vocab.attribute_of(q.tokens[0]);
      REQUIRE(a.has_value());
      CHECK(*a != "sleeves");
      CHECK(vocab.is_applicable("shoes", *a));
    }
  }

  SUBCASE("seeded repeat") {
    DialogContext a, b;
    a.gender = b.gender = "women";
    SeededRng r1(99), r2(99);
    CHECK(gen_text_query(FsaNode::GenderCategory, a, vocab, c, r1, 2) ==
          gen_text_query(FsaNode::GenderCategory, b, vocab, c, r2, 2));
    CHECK(a == b);
  }

  SUBCASE("context switch resets gender and category") {
    c.p_context_switch = 1.0;
    DialogContext ctx;
    ctx.gender = "men";
    ctx.set_category("shirts", vocab);
    ctx.constraints["sleeves"] = "half sleeves";
    const auto q = gen_text_query(FsaNode::Attribute, ctx, vocab, c, rng, 3);
    CHECK(q.context_switch);
    REQUIRE(q.tokens.size() == 2);
    CHECK(ctx.gender == q.tokens[0]);
    CHECK(ctx.category == q.tokens[1]);
    CHECK(*ctx.category != "shirts");
    CHECK(ctx.constraints.empty());
  }

  CHECK_THROWS_AS(
      [&] {
        DialogContext ctx;
        gen_text_query(FsaNode::ImageClick, ctx, vocab, c, rng, 0);
      }(),
      Error);
}

TEST_CASE("typed queries update the context") {
  const auto& vocab = world().vocab;
  DialogContext ctx;
  apply_text_query(ctx, {"women", "shirts", "half sleeves", "red"}, vocab);
  CHECK(ctx.gender == "women");
  CHECK(ctx.category == "shirts");
  CHECK(ctx.constraints.at("sleeves") == "half sleeves");
  CHECK(ctx.constraints.at("color") == "red");

  apply_text_query(ctx, {"shoes"}, vocab);
  CHECK(ctx.category == "shoes");
  CHECK_FALSE(ctx.constraints.contains("sleeves"));
  CHECK(ctx.constraints.at("color") == "red");

  try {
    apply_text_query(ctx, {"red", "moonboots", "glitter"}, vocab);
    FAIL("expected unknown-token error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownToken);
    CHECK(std::string(e.what()).find("moonboots") != std::string::npos);
    CHECK(std::string(e.what()).find("glitter") != std::string::npos);
  }
  CHECK(DialogContext::from_json(ctx.to_json()) == ctx);
}

TEST_CASE("average-linkage clustering") {
  SUBCASE("matches a textbook implementation") {
    SeededRng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix pts = fixtures::random_matrix(5 + rng.index(20), 3, rng);
      const auto d = average_linkage(pts);
      const auto oracle = naive_average_linkage(pts);
      std::vector<double> heights;
      for (const auto& m : d.merges()) heights.push_back(m.height);
      std::sort(heights.begin(), heights.end());
      REQUIRE(heights.size() == oracle.size());
      for (std::size_t i = 0; i < heights.size(); ++i) CHECK(heights[i] == doctest::Approx(oracle[i]));
      CHECK(d.merges().back().size == pts.rows());
    }
  }

  SUBCASE("cuts") {
    const auto space = two_blobs();
    const auto& d = space.dendrogram();
    const auto one = d.cut(1e9);
    CHECK(std::all_of(one.begin(), one.end(), [](auto l) { return l == 0; }));
    const auto none = d.cut(1e-9);
    for (std::size_t i = 0; i < none.size(); ++i) CHECK(none[i] == i);
    const auto two = d.cut(5.0);
    for (std::size_t i = 0; i < 10; ++i) CHECK(two[i] == (i < 5 ? 0u : 5u));
    CHECK(d.cluster_of(7, 5.0) == std::vector<std::size_t>{5, 6, 7, 8, 9});
  }
}

TEST_CASE("nearest neighbours") {
  SUBCASE("duplicate ranks first and the query is excluded") {
    Matrix pts(4, 2);
    pts(0, 0) = 1, pts(1, 0) = 1, pts(2, 0) = 3, pts(3, 0) = -4;
    const ImageSpace space({"P1", "P2", "P3", "P4"}, pts);
    const auto r = knn(space, "P1", 3);
    CHECK(r.ids == std::vector<std::string>{"P2", "P3", "P4"});
    CHECK(r.distances[0] == 0.0);
    CHECK_FALSE(r.truncated);
    const auto t = knn(space, "P1", 10);
    CHECK(t.truncated);
    CHECK(t.ids.size() == 3);
    CHECK_THROWS_AS(knn(space, "P9", 1), Error);
  }

  SUBCASE("toy catalog against an exhaustive scan") {
    Matrix pts(3, 2);
    pts(0, 0) = 0, pts(0, 1) = 0;
    pts(1, 0) = 2, pts(1, 1) = 1;
    pts(2, 0) = -1, pts(2, 1) = 1.5;
    const ImageSpace space({"P1", "P2", "P3"}, pts);
    for (std::size_t q = 0; q < 3; ++q) {
      std::size_t best = q;
      double bd = INFINITY;
      for (std::size_t j = 0; j < 3; ++j) {
        if (j != q && space.distance(q, j) < bd) bd = space.distance(q, j), best = j;
      }
      CHECK(knn(space, space.ids()[q], 1).ids == std::vector<std::string>{space.ids()[best]});
    }
  }

  SUBCASE("never returns the query over the desk catalog") {
    const auto& w = world();
    for (std::size_t i = 0; i < 20; ++i) {
      const auto& id = w.catalog[i * 7].id;
      const auto r = knn(*w.images, id, 6);
      CHECK(std::find(r.ids.begin(), r.ids.end(), id) == r.ids.end());
      CHECK(std::is_sorted(r.distances.begin(), r.distances.end()));
    }
  }
}

TEST_CASE("cluster exploration") {
  const auto space = two_blobs();
  const std::vector<std::string> knn_ids = knn(space, "B0", 2).ids;

  CHECK(explore_cluster(space, "B0", knn_ids, 1e6).size() == 10 - 1 - knn_ids.size());
  CHECK(explore_cluster(space, "B0", knn_ids, 1e-9).empty());

  // Threshold between the blob diameter and the blob separation.
  const auto members = explore_cluster(space, "B0", knn_ids, 4.0);
  std::vector<std::string> expected;
  for (const auto* id : {"B1", "B2", "B3", "B4"}) {
    if (std::find(knn_ids.begin(), knn_ids.end(), id) == knn_ids.end()) expected.push_back(id);
  }
  CHECK(members == expected);
  CHECK_THROWS_AS(explore_cluster(space, "B0", {}, 2.0), Error);
}

TEST_CASE("click responses") {
  const auto& w = world();
  const auto c = FsaConfig::defaults();
  const std::vector<std::string> previous{w.catalog[0].id, w.catalog[1].id};
  const DialogContext ctx;

  SUBCASE("late rounds are pure nearest neighbours") {
    SeededRng rng(1);
    for (std::size_t r : {5, 6, 11}) {
      const auto resp = respond_click(*w.images, *w.index, previous[0], r, previous, {}, ctx, c, rng);
      CHECK(resp.n1 == 6);
      CHECK(resp.explored == 0);
      CHECK(resp.ids == knn(*w.images, previous[0], 6).ids);
    }
  }

  SUBCASE("round 1 support is exactly {2..6}") {
    SeededRng rng(2);
    std::set<std::size_t> support;
    for (int i = 0; i < 10'000; ++i) {
      support.insert(respond_click(*w.images, *w.index, previous[0], 1, previous, {}, ctx, c, rng).n1);
    }
    CHECK(support == std::set<std::size_t>{2, 3, 4, 5, 6});
  }

  SUBCASE("mean n1 does not decrease with the round") {
    SeededRng rng(3);
    double last = 0.0;
    for (std::size_t r = 1; r <= 7; ++r) {
      double sum = 0.0;
      for (int i = 0; i < 2000; ++i) {
        sum += respond_click(*w.images, *w.index, previous[1], r, previous, {}, ctx, c, rng).n1;
      }
      CHECK(sum / 2000 >= last - 1e-9);
      last = sum / 2000;
    }
  }

  SUBCASE("structure of a mixed response") {
    SeededRng rng(4);
    for (int i = 0; i < 200; ++i) {
      const auto resp = respond_click(*w.images, *w.index, previous[0], 1, previous, {}, ctx, c, rng);
      REQUIRE(resp.ids.size() == 6);
      std::set<std::string> distinct(resp.ids.begin(), resp.ids.end());
      CHECK(distinct.size() == 6);
      CHECK_FALSE(distinct.contains(previous[0]));
      const std::vector<std::string> head(resp.ids.begin(), resp.ids.begin() + resp.n1);
      CHECK(head == knn(*w.images, previous[0], resp.n1).ids);
      CHECK(resp.multiplier >= 2.0);
      CHECK(resp.multiplier <= 5.0);
      if (resp.explored > 0) {
        const auto pool = explore_cluster(*w.images, previous[0], head, resp.multiplier);
        for (std::size_t k = resp.n1; k < resp.n1 + resp.explored; ++k) {
          CHECK(std::find(pool.begin(), pool.end(), resp.ids[k]) != pool.end());
        }
      }
    }
  }

  SUBCASE("protocol error for an undisplayed product") {
    SeededRng rng(5);
    try {
      respond_click(*w.images, *w.index, w.catalog[50].id, 1, previous, {}, ctx, c, rng);
      FAIL("expected protocol error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Protocol);
    }
  }

  SUBCASE("already shown products are avoided when possible") {
    SeededRng rng(6);
    const auto first = knn(*w.images, previous[0], 6).ids;
    const std::set<std::string> shown(first.begin(), first.end());
    const auto resp = respond_click(*w.images, *w.index, previous[0], 8, previous, shown, ctx, c, rng);
    for (const auto& id : resp.ids) CHECK_FALSE(shown.contains(id));
  }
}

TEST_CASE("text responses") {
  const auto& w = world();
  DialogContext ctx;
  ctx.gender = "men";
  ctx.set_category("sandals", w.vocab);
  const auto ids = respond_text(ctx, *w.index, 6);
  REQUIRE(ids.size() == 6);
  std::size_t men_sandals = 0;
  for (const auto& p : w.catalog.products()) men_sandals += p.gender == "men" && p.category == "sandals";
  for (std::size_t i = 0; i < std::min<std::size_t>(6, men_sandals); ++i) {
    const auto& p = w.catalog.at(ids[i]);
    CHECK(p.gender == "men");
    CHECK(p.category == "sandals");
  }
  CHECK(respond_text(ctx, *w.index, 6) == ids);

  SUBCASE("shortfall is padded without duplicates") {
    const Catalog small({Product{"P1", "men", "shoes", {{"color", "red"}}},
                         Product{"P2", "women", "shirts", {{"color", "blue"}}},
                         Product{"P3", "women", "shoes", {{"color", "blue"}}},
                         Product{"P4", "men", "jeans", {{"color", "black"}}},
                         Product{"P5", "women", "tops", {{"color", "black"}}},
                         Product{"P6", "women", "tops", {{"color", "white"}}},
                         Product{"P7", "men", "tops", {{"color", "white"}}}});
    const AttributeIndex index(small);
    DialogContext red;
    red.constraints["color"] = "red";
    const auto padded = respond_text(red, index, 6);
    CHECK(padded.size() == 6);
    CHECK(padded[0] == "P1");
    CHECK(std::set<std::string>(padded.begin(), padded.end()).size() == 6);
  }

  CHECK_THROWS_AS(respond_text(DialogContext{}, *w.index, 6), Error);
}

TEST_CASE("dialog sessions") {
  const auto& w = world();
  const auto c = FsaConfig::defaults();
  const auto store = w.store();

  SUBCASE("invariants over seeded sessions") {
    const auto sessions = generate_dataset(store, c, 300, SeededRng(4, streams::kSimulator));
    REQUIRE(sessions.size() == 300);
    std::size_t switches = 0;
    for (const auto& s : sessions) {
      CHECK_NOTHROW(validate_session(s, c));
      CHECK(s.rounds.front().query.kind == QueryKind::Text);
      CHECK(s.rounds.size() <= c.max_rounds);
      for (std::size_t r = 0; r < s.rounds.size(); ++r) {
        const auto& round = s.rounds[r];
        CHECK(round.displayed.size() == 6);
        if (round.query.kind == QueryKind::ImageClick) {
          const auto& prev = s.rounds[r - 1].displayed;
          CHECK(std::find(prev.begin(), prev.end(), round.query.clicked_id) != prev.end());
          CHECK(*round.n1 >= n1_min(r, c));
        }
        if (round.query.context_switch) {
          ++switches;
          CHECK(round.context.gender == round.query.tokens[0]);
          CHECK(round.context.category == round.query.tokens[1]);
          CHECK(round.context.constraints.empty());
        }
      }
    }
    CHECK(switches > 0);
    CHECK(sessions_to_jsonl(sessions) ==
          sessions_to_jsonl(generate_dataset(store, c, 300, SeededRng(4, streams::kSimulator))));
  }

  SUBCASE("p_end = 1 gives minimal sessions") {
    auto quick = c;
    quick.p_end = 1.0;
    quick.transitions[FsaNode::Gender] = {{FsaNode::Attribute, 0.5}, {FsaNode::ImageClick, 0.5}};
    quick.transitions[FsaNode::Category] = quick.transitions[FsaNode::Gender];
    quick.transitions[FsaNode::GenderCategory] = quick.transitions[FsaNode::Gender];
    for (const auto& s : generate_dataset(store, quick, 100, SeededRng(5))) {
      CHECK(s.rounds.size() == 2);
    }
  }

  SUBCASE("max_rounds caps every session") {
    auto endless = c;
    endless.p_end = 0.0;
    endless.max_rounds = 4;
    for (const auto& s : generate_dataset(store, endless, 50, SeededRng(6))) {
      CHECK(s.rounds.size() == 4);
    }
  }

  SUBCASE("JSONL round trip") {
    fixtures::TempDir dir("sessions");
    const auto sessions = generate_dataset(store, c, 40, SeededRng(7));
    save_sessions(sessions, dir / "s.jsonl");
    CHECK(load_sessions(dir / "s.jsonl") == sessions);
    const auto j = nlohmann::json::parse(sessions_to_jsonl(sessions).substr(0, sessions_to_jsonl(sessions).find('\n')));
    CHECK(j.contains("session_id"));
    CHECK(j["rounds"][0].contains("n1"));
    CHECK(j["rounds"][0]["n1"].is_null());
  }

  SUBCASE("5000 sessions at desk scale") {
    const auto sessions = generate_dataset(store, c, 5000, SeededRng(8));
    CHECK(sessions.size() == 5000);
    double rounds = 0;
    for (const auto& s : sessions) {
      validate_session(s, c);
      rounds += s.rounds.size();
    }
    const double mean = rounds / 5000;
    CHECK(mean >= 3.0);
    CHECK(mean <= 6.5);
  }
}

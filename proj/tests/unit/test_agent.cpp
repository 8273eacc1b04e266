#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "mmd/agent.hpp"
#include "mmd/error.hpp"
#include "mmd/gradient_check.hpp"
#include "mmd/joint_space.hpp"
#include "mmd/numerics.hpp"
#include "mmd/training_set.hpp"

using namespace mmd;

namespace {

AgentParams random_agent(std::size_t k, std::size_t ng, SeededRng& rng, double scale = 0.5) {
  AgentParams p = AgentParams::zeros(k, ng);
  Vector flat = p.flatten();
  for (double& v : flat) v = scale * rng.normal();
  p.assign(flat);
  return p;
}

Vector positive_vector(std::size_t k, SeededRng& rng) {
  Vector v(k);
  for (double& x : v) x = sigmoid(rng.normal());
  return v;
}

TrainingSample random_sample(std::size_t k, std::size_t window, std::size_t truth, SeededRng& rng) {
  TrainingSample s;
  for (std::size_t i = 0; i < window; ++i) s.window.push_back(positive_vector(k, rng));
  for (std::size_t i = 0; i < truth; ++i) s.truth.push_back(positive_vector(k, rng));
  return s;
}

void check_agent_error(const auto& fn, ErrorKind kind) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

}  // namespace

TEST_CASE("context mean") {
  const std::vector<Vector> w{{1, 2}, {3, 4}, {5, 0}};
  CHECK(context_mean(w, 3) == Vector{3, 2});
  CHECK(context_mean(std::span(w).subspan(2), 3) == Vector{5, 0});
  check_agent_error([&] { context_mean(w, 2); }, ErrorKind::InvalidInput);
  check_agent_error([&] { context_mean(std::span<const Vector>{}, 2); }, ErrorKind::InvalidInput);
}

TEST_CASE("mixture head") {
  const auto zero = AgentParams::zeros(4, 3);
  const auto head = gmm_head(zero, Vector(4, 0.7));
  for (const auto& mu : head.means) CHECK(mu == Vector(4, 0.5));
  for (double p : head.weights) CHECK(p == doctest::Approx(1.0 / 3.0));

  SeededRng rng(11);
  const auto p = random_agent(5, 4, rng);
  const Vector ctx = positive_vector(5, rng);
  const auto h = gmm_head(p, ctx);
  double total = 0;
  for (double v : h.weights) {
    total += v;
    CHECK(v > 0.0);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t d = 0; d < 5; ++d) {
      double pre = p.mean_biases[i][d];
      for (std::size_t c = 0; c < 5; ++c) pre += p.mean_weights[i](d, c) * ctx[c];
      CHECK(h.means[i][d] == doctest::Approx(1.0 / (1.0 + std::exp(-pre))).epsilon(1e-12));
    }
  }
  check_agent_error([&] { gmm_head(p, Vector(4, 0.0)); }, ErrorKind::Shape);
}

TEST_CASE("gumbel softmax") {
  const Vector pi{0.2, 0.5, 0.3};
  const Vector g{0.1, -0.4, 1.3};
  const auto w = gumbel_softmax(pi, g, 1.0);
  double total = 0;
  for (double v : w) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  // Direct formula.
  double denom = 0;
  for (std::size_t i = 0; i < 3; ++i) denom += std::exp(std::log(pi[i]) + g[i]);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(w[i] == doctest::Approx(std::exp(std::log(pi[i]) + g[i]) / denom).epsilon(1e-12));
  }

  const auto cold = gumbel_softmax(pi, g, 1e-3);
  CHECK(cold[2] == doctest::Approx(1.0));
  const auto floored = gumbel_softmax(Vector{0.0, 1.0}, Vector{0.0, 0.0}, 1.0);
  CHECK(floored[0] == doctest::Approx(1e-12 / (1.0 + 1e-12)).epsilon(1e-6));
  check_agent_error([&] { gumbel_softmax(pi, g, 0.0); }, ErrorKind::Config);
  check_agent_error([&] { gumbel_softmax(pi, Vector{1.0}, 1.0); }, ErrorKind::Shape);

  SUBCASE("sampling frequencies follow pi at tau -> 0") {
    SeededRng rng(12);
    std::vector<int> counts(3, 0);
    const int n = 100000;
    for (int t = 0; t < n; ++t) {
      const Vector noise{gumbel_noise(rng), gumbel_noise(rng), gumbel_noise(rng)};
      const auto hard = gumbel_softmax(pi, noise, 1e-4);
      ++counts[std::max_element(hard.begin(), hard.end()) - hard.begin()];
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(counts[i] / double(n) - pi[i]) < 0.01);
  }
}

TEST_CASE("reparameterised mixture sample") {
  const std::vector<Vector> means{{1, 0}, {0, 1}};
  const std::vector<Matrix> zero_l{Matrix(2, 2), Matrix(2, 2)};
  CHECK(sample_reparam(means, zero_l, Vector{0.25, 0.75}, Vector{3, 4}) == Vector{0.25, 0.75});

  const std::vector<Matrix> ls{Matrix(2, 2, {1, 0, 2, 1}), Matrix::identity(2, 0.5)};
  const auto y = sample_reparam(means, ls, Vector{0.5, 0.5}, Vector{1, -1});
  // 0.5 * ([1,0] + [1, 1]) + 0.5 * ([0,1] + [0.5,-0.5])
  CHECK(y[0] == doctest::Approx(1.25));
  CHECK(y[1] == doctest::Approx(0.75));
  check_agent_error([&] { sample_reparam(means, ls, Vector{1.0}, Vector{1, 1}); }, ErrorKind::Shape);
  check_agent_error([&] { sample_reparam(means, ls, Vector{0.5, 0.5}, Vector{1}); }, ErrorKind::Shape);

  SUBCASE("one component reproduces the mean and covariance L L^T") {
    const std::vector<Vector> mu{{0.3, -0.2, 0.8}};
    const std::vector<Matrix> l{Matrix(3, 3, {0.5, 0, 0, 0.2, 0.4, 0, -0.1, 0.3, 0.6})};
    SeededRng rng(13);
    const int n = 200000;
    Vector mean(3, 0.0);
    Matrix second(3, 3);
    for (int t = 0; t < n; ++t) {
      const Vector eps{rng.normal(), rng.normal(), rng.normal()};
      const auto s = sample_reparam(mu, l, Vector{1.0}, eps);
      for (std::size_t a = 0; a < 3; ++a) {
        mean[a] += s[a] / n;
        for (std::size_t b = 0; b < 3; ++b) second(a, b) += (s[a] - mu[0][a]) * (s[b] - mu[0][b]) / n;
      }
    }
    for (std::size_t a = 0; a < 3; ++a) {
      CHECK(std::abs(mean[a] - mu[0][a]) < 0.01);
      for (std::size_t b = 0; b < 3; ++b) {
        double cov = 0;
        for (std::size_t c = 0; c < 3; ++c) cov += l[0](a, c) * l[0](b, c);
        CHECK(std::abs(second(a, b) - cov) < 0.01);
      }
    }
  }
}

TEST_CASE("cosine loss") {
  const std::vector<Vector> s{{1, 0}};
  const std::vector<Vector> t{{2, 0}, {0, 3}};
  CHECK(cosine_loss(s, t) == doctest::Approx(-0.5));
  CHECK(cosine_loss(t, t) == doctest::Approx(-0.5));
  const std::vector<Vector> same{{1, 1}, {2, 2}};
  CHECK(cosine_loss(same, same) == doctest::Approx(-1.0));
  check_agent_error([&] { cosine_loss(std::vector<Vector>{{0, 0}}, t); }, ErrorKind::DegenerateInput);
  check_agent_error([&] { cosine_loss(s, std::vector<Vector>{}); }, ErrorKind::InvalidInput);
}

TEST_CASE("forward pass") {
  SeededRng rng(14);
  AgentHyper hyper;
  hyper.gaussians = 3;
  hyper.display = 4;
  const auto p = random_agent(5, 3, rng);
  const auto sample = random_sample(5, 2, 4, rng);

  SeededRng a = rng.split(1), b = rng.split(1);
  const auto noise = draw_noise(4, 3, 5, a);
  CHECK(noise.gumbel.size() == 4);
  CHECK(noise.epsilon.size() == 4);
  CHECK(noise.gumbel[0].size() == 3);
  CHECK(noise.epsilon[0].size() == 5);
  const auto f1 = forward_round(p, hyper, sample.window, noise);
  const auto f2 = forward_round(p, hyper, sample.window, b);
  CHECK(f1.samples == f2.samples);
  CHECK(a.position() == b.position());
  CHECK(f1.samples.size() == 4);
  CHECK(f1.context == context_mean(sample.window, hyper.window));
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(f1.mixture[j] == gumbel_softmax(f1.head.weights, noise.gumbel[j], hyper.temperature));
    CHECK(f1.samples[j] == sample_reparam(f1.head.means, p.scale_factors, f1.mixture[j], noise.epsilon[j]));
  }

  const auto lg = round_loss_and_gradient(p, hyper, sample, noise);
  CHECK(lg.loss == doctest::Approx(cosine_loss(f1.samples, sample.truth)).epsilon(1e-12));
}

TEST_CASE("loss gradient matches finite differences") {
  SeededRng rng(15);
  for (int instance = 0; instance < 20; ++instance) {
    AgentHyper hyper;
    const std::size_t k = 2 + rng.index(5);
    hyper.gaussians = 1 + rng.index(4);
    hyper.display = 1 + rng.index(4);
    hyper.window = 1 + rng.index(3);
    hyper.temperature = rng.uniform(0.5, 2.0);
    const auto p = random_agent(k, hyper.gaussians, rng);
    const auto sample = random_sample(k, 1 + rng.index(hyper.window), 1 + rng.index(6), rng);
    SeededRng noise_rng = rng.split(instance);
    const auto noise = draw_noise(hyper.display, hyper.gaussians, k, noise_rng);

    const auto analytic = round_loss_and_gradient(p, hyper, sample, noise);
    const auto numeric = finite_difference_gradient(
        [&](std::span<const double> flat) {
          auto q = p;
          q.assign(flat);
          return cosine_loss(forward_round(q, hyper, sample.window, noise).samples, sample.truth);
        },
        p.flatten(), 1e-6);
    const double err = relative_error(analytic.gradient.flatten(), numeric);
    CHECK_MESSAGE(err < 1e-4, "instance " << instance << " rel err " << err);
  }
}

TEST_CASE("parameters and persistence") {
  SeededRng rng(16);
  const auto p = AgentParams::initialize(4, 3, rng);
  CHECK(p.k() == 4);
  CHECK(p.gaussians() == 3);
  CHECK(p.flatten().size() == 3 * (16 + 4 + 16) + 12 + 3);
  for (const auto& l : p.scale_factors) CHECK(l == Matrix::identity(4, 0.1));
  for (double b : p.gate_bias) CHECK(b == 0.0);

  auto q = AgentParams::zeros(4, 3);
  q.assign(p.flatten());
  CHECK(q == p);
  check_agent_error([&] { q.assign(Vector(5)); }, ErrorKind::Shape);
  check_agent_error([] { AgentParams::zeros(4, 0); }, ErrorKind::Config);

  AgentHyper hyper;
  hyper.gaussians = 3;
  hyper.temperature = 0.7;
  hyper.seed = 99;
  CHECK(AgentHyper::from_json(hyper.to_json()).to_json() == hyper.to_json());
  AgentHyper bad = hyper;
  bad.temperature = 0.0;
  check_agent_error([&] { bad.validate(); }, ErrorKind::Config);

  fixtures::TempDir dir("agent");
  save_agent(p, hyper, dir / "a.bin");
  const auto [lp, lh] = load_agent(dir / "a.bin");
  CHECK(lp == p);
  CHECK(lh.to_json() == hyper.to_json());
  {
    std::ofstream out(dir / "t.bin", std::ios::binary);
    out << "MMDAGNT1";
  }
  CHECK_THROWS_AS(load_agent(dir / "t.bin"), Error);
  CHECK_THROWS_AS(load_agent(dir / "missing.bin"), Error);
}

TEST_CASE("training") {
  SeededRng rng(17);
  const std::size_t k = 4;
  // Truth is a fixed function of the context, so the loss can be reduced.
  std::vector<TrainingSample> data;
  for (int i = 0; i < 60; ++i) {
    auto s = random_sample(k, 1 + rng.index(3), 0, rng);
    const auto ctx = context_mean(s.window, 3);
    Vector t(k);
    for (std::size_t d = 0; d < k; ++d) t[d] = sigmoid(4.0 * (ctx[(d + 1) % k] - 0.5));
    s.truth = {t, t, t};
    data.push_back(std::move(s));
  }
  AgentHyper hyper;
  hyper.epochs = 0;
  hyper.seed = 5;
  hyper.display = 3;

  const auto none = train_agent(data, k, hyper);
  SeededRng init_rng(5, streams::kAgent);
  CHECK(none.params == AgentParams::initialize(k, hyper.gaussians, init_rng));
  REQUIRE(none.loss_history.size() == 1);
  CHECK(none.loss_history[0] ==
        doctest::Approx(dataset_loss(none.params, hyper, data, SeededRng(5, streams::kEvaluation))));

  hyper.epochs = 8;
  hyper.learning_rate = 0.5;
  const auto a = train_agent(data, k, hyper);
  const auto b = train_agent(data, k, hyper);
  CHECK(a.params == b.params);
  CHECK(a.loss_history == b.loss_history);
  CHECK(a.loss_history.back() < a.loss_history.front());

  const SeededRng eval(3, streams::kEvaluation);
  CHECK(evaluate(a.params, hyper, data, eval) == doctest::Approx(-dataset_loss(a.params, hyper, data, eval)));
  CHECK(evaluate(a.params, hyper, data, eval) <= 1.0);
  check_agent_error([&] { evaluate(a.params, hyper, std::span<const TrainingSample>{}, eval); },
                    ErrorKind::InvalidInput);
  check_agent_error([&] { train_agent(std::span<const TrainingSample>{}, k, hyper); },
                    ErrorKind::InvalidInput);

  SUBCASE("divergence is reported") {
    AgentHyper wild = hyper;
    wild.learning_rate = 1e300;
    wild.epochs = 2;
    try {
      train_agent(data, k, wild);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Training);
    }
  }
}

TEST_CASE("decoding samples to products") {
  const Matrix catalog(4, 2, {1, 0, 0, 1, 1, 1, 1, 0.1});
  const std::vector<Vector> samples{{1, 0}, {1, 0}, {0, 2}};
  const auto rows = decode_samples(samples, catalog);
  CHECK(rows == std::vector<std::size_t>{0, 3, 1});
  check_agent_error([&] { decode_samples(std::vector<Vector>(5, Vector{1, 0}), catalog); },
                    ErrorKind::Config);
}

TEST_CASE("training set construction") {
  int training = 0;
  for (std::size_t i = 1; i <= 10000; ++i) training += is_training_session(session_id(i));
  CHECK(std::abs(training / 10000.0 - 0.7) < 0.02);
  CHECK(is_training_session("S000123") == is_training_session("S000123"));

  auto w = fixtures::make_world(150, 31);
  const auto store = w.store();
  const auto sessions =
      generate_dataset(store, FsaConfig::defaults(), 40, SeededRng(31, streams::kSimulator));
  SeededRng rng(31, streams::kCorrNet);
  const JointSpace joint(w.vocab, w.encoded, CorrNetParams::initialize(8, rng));
  AgentHyper hyper;
  const auto ds = build_training_set(sessions, joint, hyper);

  std::size_t train_rounds = 0, test_rounds = 0;
  for (const auto& s : sessions) (is_training_session(s.id) ? train_rounds : test_rounds) += s.rounds.size();
  CHECK(ds.train.size() == train_rounds);
  CHECK(ds.test.size() == test_rounds);

  // First session in the training split, checked round by round.
  const DialogSession* first = nullptr;
  for (const auto& s : sessions) {
    if (is_training_session(s.id)) {
      first = &s;
      break;
    }
  }
  REQUIRE(first != nullptr);
  for (std::size_t r = 0; r < first->rounds.size(); ++r) {
    const auto& sample = ds.train[r];
    CHECK(sample.window.size() == std::min<std::size_t>(hyper.window, r + 1));
    CHECK(sample.window.back() == project_query(first->rounds[r].query, joint));
    REQUIRE(sample.truth.size() == first->rounds[r].displayed.size());
    for (std::size_t j = 0; j < sample.truth.size(); ++j) {
      CHECK(sample.truth[j] == joint.image_projection(first->rounds[r].displayed[j]));
    }
  }

  auto broken = sessions;
  broken[0].rounds[0].displayed[0] = "P999999";
  check_agent_error([&] { build_training_set(broken, joint, hyper); }, ErrorKind::Data);
}

#include "mmd/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "mmd/binary_io.hpp"
#include "mmd/error.hpp"
#include "mmd/kernels.hpp"
#include "mmd/numerics.hpp"

namespace mmd {

namespace {

constexpr std::string_view kAgentMagic = "MMDAGNT1";
constexpr double kInitialScale = 0.1;

template <typename F>
void for_each_block(AgentParams& p, F&& f) {
  for (std::size_t i = 0; i < p.gaussians(); ++i) {
    f(p.mean_weights[i].values());
    f(std::span<double>(p.mean_biases[i]));
    f(p.scale_factors[i].values());
  }
  f(p.gate_weights.values());
  f(std::span<double>(p.gate_bias));
}

template <typename F>
void for_each_block(const AgentParams& p, F&& f) {
  for (std::size_t i = 0; i < p.gaussians(); ++i) {
    f(p.mean_weights[i].values());
    f(std::span<const double>(p.mean_biases[i]));
    f(p.scale_factors[i].values());
  }
  f(p.gate_weights.values());
  f(std::span<const double>(p.gate_bias));
}

}  // namespace

// ---------------------------------------------------------------------------
// AgentParams

AgentParams AgentParams::zeros(std::size_t k, std::size_t gaussians) {
  if (gaussians == 0) fail(ErrorKind::Config, "agent: N_g must be >= 1");
  AgentParams p;
  p.mean_weights.assign(gaussians, Matrix(k, k));
  p.mean_biases.assign(gaussians, Vector(k, 0.0));
  p.scale_factors.assign(gaussians, Matrix(k, k));
  p.gate_weights = Matrix(gaussians, k);
  p.gate_bias.assign(gaussians, 0.0);
  return p;
}

AgentParams AgentParams::initialize(std::size_t k, std::size_t gaussians, SeededRng& rng) {
  AgentParams p = zeros(k, gaussians);
  const double mean_limit = std::sqrt(6.0 / static_cast<double>(k + k));
  for (std::size_t i = 0; i < gaussians; ++i) {
    for (double& v : p.mean_weights[i].values()) v = rng.uniform(-mean_limit, mean_limit);
    p.scale_factors[i] = Matrix::identity(k, kInitialScale);
  }
  const double gate_limit = std::sqrt(6.0 / static_cast<double>(k + gaussians));
  for (double& v : p.gate_weights.values()) v = rng.uniform(-gate_limit, gate_limit);
  return p;
}

Vector AgentParams::flatten() const {
  Vector out;
  for_each_block(*this, [&](std::span<const double> s) { out.insert(out.end(), s.begin(), s.end()); });
  return out;
}

void AgentParams::assign(std::span<const double> flat) {
  std::size_t at = 0;
  for_each_block(*this, [&](std::span<double> s) {
    if (at + s.size() > flat.size()) fail(ErrorKind::Shape, "AgentParams::assign: too short");
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), s.size(), s.begin());
    at += s.size();
  });
  if (at != flat.size()) fail(ErrorKind::Shape, "AgentParams::assign: too long");
}

void AgentParams::axpy(double scale, const AgentParams& other) {
  Vector src = other.flatten();
  std::size_t at = 0;
  for_each_block(*this, [&](std::span<double> s) {
    for (double& v : s) v += scale * src[at++];
  });
}

void AgentParams::check_shapes() const {
  const std::size_t n = gaussians();
  const std::size_t kk = k();
  bool ok = n > 0 && mean_biases.size() == n && scale_factors.size() == n &&
            gate_weights.rows() == n && gate_bias.size() == n;
  for (std::size_t i = 0; ok && i < n; ++i) {
    ok = mean_weights[i].rows() == kk && mean_weights[i].cols() == kk &&
         mean_biases[i].size() == kk && scale_factors[i].rows() == kk &&
         scale_factors[i].cols() == kk;
  }
  if (!ok) fail(ErrorKind::Shape, "AgentParams: inconsistent block shapes");
}

// ---------------------------------------------------------------------------
// AgentHyper

void AgentHyper::validate() const {
  if (gaussians < 1) fail(ErrorKind::Config, "agent: N_g must be >= 1");
  if (!(temperature > 0.0)) fail(ErrorKind::Config, "agent: tau must be > 0");
  if (!(learning_rate > 0.0)) fail(ErrorKind::Config, "agent: eta must be > 0");
  if (window < 1) fail(ErrorKind::Config, "agent: N_ws must be >= 1");
  if (display < 1) fail(ErrorKind::Config, "agent: N_d must be >= 1");
  if (batch_size < 1) fail(ErrorKind::Config, "agent: N_b must be >= 1");
}

nlohmann::json AgentHyper::to_json() const {
  return {{"gaussians", gaussians}, {"temperature", temperature}, {"learning_rate", learning_rate},
          {"window", window},       {"display", display},         {"batch_size", batch_size},
          {"epochs", epochs},       {"seed", seed}};
}

AgentHyper AgentHyper::from_json(const nlohmann::json& j) {
  AgentHyper h;
  h.gaussians = j.value("gaussians", h.gaussians);
  h.temperature = j.value("temperature", h.temperature);
  h.learning_rate = j.value("learning_rate", h.learning_rate);
  h.window = j.value("window", h.window);
  h.display = j.value("display", h.display);
  h.batch_size = j.value("batch_size", h.batch_size);
  h.epochs = j.value("epochs", h.epochs);
  h.seed = j.value("seed", h.seed);
  h.validate();
  return h;
}

// ---------------------------------------------------------------------------
// Forward pieces

Vector context_mean(std::span<const Vector> window, std::size_t window_size) {
  if (window.empty()) fail(ErrorKind::InvalidInput, "context_mean: empty window");
  if (window.size() > window_size) {
    fail(ErrorKind::InvalidInput, "context_mean: window longer than N_ws");
  }
  return mean_of(window);
}

GmmHead gmm_head(const AgentParams& params, std::span<const double> context) {
  const std::size_t k = params.k();
  if (context.size() != k) fail(ErrorKind::Shape, "gmm_head: context length != k");
  GmmHead head;
  head.means.resize(params.gaussians());
  for (std::size_t i = 0; i < params.gaussians(); ++i) {
    Vector pre(k);
    kernels::gemv(params.mean_weights[i], context, pre);
    for (std::size_t d = 0; d < k; ++d) pre[d] += params.mean_biases[i][d];
    head.means[i] = sigmoid(pre);
  }
  Vector logits(params.gaussians());
  kernels::gemv(params.gate_weights, context, logits);
  for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += params.gate_bias[i];
  head.weights = softmax(logits);
  return head;
}

Vector gumbel_softmax(std::span<const double> pi, std::span<const double> gumbel, double tau) {
  if (!(tau > 0.0)) fail(ErrorKind::Config, "gumbel_softmax: tau must be > 0");
  if (pi.size() != gumbel.size()) fail(ErrorKind::Shape, "gumbel_softmax: length mismatch");
  Vector scores(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    scores[i] = (std::log(std::max(pi[i], kProbabilityFloor)) + gumbel[i]) / tau;
  }
  return softmax(scores);
}

Vector sample_reparam(std::span<const Vector> means, std::span<const Matrix> factors,
                      std::span<const double> w, std::span<const double> eps) {
  if (means.size() != factors.size() || means.size() != w.size() || means.empty()) {
    fail(ErrorKind::Shape, "sample_reparam: component counts differ");
  }
  const std::size_t k = means.front().size();
  if (eps.size() != k) fail(ErrorKind::Shape, "sample_reparam: eps length != k");
  Vector out(k, 0.0);
  Vector spread(k);
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (means[i].size() != k || factors[i].rows() != k || factors[i].cols() != k) {
      fail(ErrorKind::Shape, "sample_reparam: component shape mismatch");
    }
    kernels::gemv(factors[i], eps, spread);
    for (std::size_t d = 0; d < k; ++d) out[d] += w[i] * (means[i][d] + spread[d]);
  }
  return out;
}

double cosine_loss(std::span<const Vector> samples, std::span<const Vector> truth) {
  if (samples.empty() || truth.empty()) fail(ErrorKind::InvalidInput, "cosine_loss: empty set");
  double total = 0.0;
  for (const auto& yhat : samples) {
    for (const auto& y : truth) total += cosine_similarity(y, yhat);
  }
  return -total / static_cast<double>(samples.size() * truth.size());
}

RoundNoise draw_noise(std::size_t display, std::size_t gaussians, std::size_t k, SeededRng& rng) {
  RoundNoise n;
  n.gumbel.assign(display, Vector(gaussians));
  n.epsilon.assign(display, Vector(k));
  for (std::size_t j = 0; j < display; ++j) {
    for (double& g : n.gumbel[j]) g = gumbel_noise(rng);
    for (double& e : n.epsilon[j]) e = rng.normal();
  }
  return n;
}

RoundForward forward_round(const AgentParams& params, const AgentHyper& hyper,
                           std::span<const Vector> window, const RoundNoise& noise) {
  if (noise.gumbel.size() != noise.epsilon.size() || noise.gumbel.empty()) {
    fail(ErrorKind::Shape, "forward_round: noise must hold one (g, eps) pair per sample");
  }
  RoundForward f;
  f.context = context_mean(window, hyper.window);
  f.head = gmm_head(params, f.context);
  for (std::size_t j = 0; j < noise.gumbel.size(); ++j) {
    f.mixture.push_back(gumbel_softmax(f.head.weights, noise.gumbel[j], hyper.temperature));
    f.samples.push_back(
        sample_reparam(f.head.means, params.scale_factors, f.mixture.back(), noise.epsilon[j]));
  }
  return f;
}

RoundForward forward_round(const AgentParams& params, const AgentHyper& hyper,
                           std::span<const Vector> window, SeededRng& rng) {
  const RoundNoise noise = draw_noise(hyper.display, params.gaussians(), params.k(), rng);
  return forward_round(params, hyper, window, noise);
}

// ---------------------------------------------------------------------------
// Gradient

AgentLossAndGradient round_loss_and_gradient(const AgentParams& params, const AgentHyper& hyper,
                                             const TrainingSample& sample, const RoundNoise& noise) {
  const RoundForward f = forward_round(params, hyper, sample.window, noise);
  const std::size_t k = params.k();
  const std::size_t ng = params.gaussians();
  const std::size_t nd = f.samples.size();
  const double scale = 1.0 / static_cast<double>(nd * sample.truth.size());

  AgentLossAndGradient out{cosine_loss(f.samples, sample.truth), AgentParams::zeros(k, ng)};
  AgentParams& g = out.gradient;
  std::vector<Vector> d_means(ng, Vector(k, 0.0));
  Vector d_logits(ng, 0.0);
  Vector d_sample(k), spread(k);

  for (std::size_t j = 0; j < nd; ++j) {
    const Vector& yhat = f.samples[j];
    const double yhat_norm = norm(yhat);
    if (yhat_norm == 0.0) fail(ErrorKind::DegenerateInput, "cosine_loss: zero sample");
    std::fill(d_sample.begin(), d_sample.end(), 0.0);
    for (const auto& y : sample.truth) {
      const double y_norm = norm(y);
      if (y_norm == 0.0) fail(ErrorKind::DegenerateInput, "cosine_loss: zero truth vector");
      const double c = dot(y, yhat) / (y_norm * yhat_norm);
      for (std::size_t d = 0; d < k; ++d) {
        d_sample[d] -= scale * (y[d] / (y_norm * yhat_norm) - c * yhat[d] / (yhat_norm * yhat_norm));
      }
    }
    // Through the mixture: yhat = sum_i w_i u_i, u_i = mu_i + L_i eps.
    const Vector& w = f.mixture[j];
    const Vector& eps = noise.epsilon[j];
    Vector d_w(ng);
    for (std::size_t i = 0; i < ng; ++i) {
      kernels::gemv(params.scale_factors[i], eps, spread);
      double acc = 0.0;
      for (std::size_t d = 0; d < k; ++d) {
        acc += d_sample[d] * (f.head.means[i][d] + spread[d]);
        d_means[i][d] += w[i] * d_sample[d];
      }
      d_w[i] = acc;
      kernels::rank1_update(g.scale_factors[i], w[i], d_sample, eps);
    }
    // Through the tempered softmax and the log of the floored pi.
    const double w_dot = dot(w, d_w);
    Vector d_log_pi(ng);
    double d_log_pi_sum = 0.0;
    for (std::size_t i = 0; i < ng; ++i) {
      const double d_score = w[i] * (d_w[i] - w_dot);
      d_log_pi[i] = f.head.weights[i] > kProbabilityFloor ? d_score / hyper.temperature : 0.0;
      d_log_pi_sum += d_log_pi[i];
    }
    for (std::size_t i = 0; i < ng; ++i) {
      d_logits[i] += d_log_pi[i] - f.head.weights[i] * d_log_pi_sum;
    }
  }

  for (std::size_t i = 0; i < ng; ++i) {
    Vector d_pre(k);
    for (std::size_t d = 0; d < k; ++d) {
      const double mu = f.head.means[i][d];
      d_pre[d] = d_means[i][d] * mu * (1.0 - mu);
      g.mean_biases[i][d] += d_pre[d];
    }
    kernels::rank1_update(g.mean_weights[i], 1.0, d_pre, f.context);
  }
  kernels::rank1_update(g.gate_weights, 1.0, d_logits, f.context);
  for (std::size_t i = 0; i < ng; ++i) g.gate_bias[i] += d_logits[i];
  return out;
}

// ---------------------------------------------------------------------------
// Training and evaluation

double dataset_loss(const AgentParams& params, const AgentHyper& hyper,
                    std::span<const TrainingSample> samples, const SeededRng& noise_rng) {
  return -evaluate(params, hyper, samples, noise_rng);
}

double evaluate(const AgentParams& params, const AgentHyper& hyper,
                std::span<const TrainingSample> test, const SeededRng& rng) {
  if (test.empty()) fail(ErrorKind::InvalidInput, "evaluate: empty sample set");
  std::vector<double> per_round(test.size());
  const auto n = static_cast<std::int64_t>(test.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t s = 0; s < n; ++s) {
    SeededRng local = rng.split(static_cast<std::uint64_t>(s));
    const auto& sample = test[static_cast<std::size_t>(s)];
    const auto f = forward_round(params, hyper, sample.window, local);
    per_round[static_cast<std::size_t>(s)] = -cosine_loss(f.samples, sample.truth);
  }
  return std::accumulate(per_round.begin(), per_round.end(), 0.0) / static_cast<double>(test.size());
}

AgentTrainResult train_agent(std::span<const TrainingSample> train, std::size_t k,
                             const AgentHyper& hyper) {
  hyper.validate();
  if (train.empty()) fail(ErrorKind::InvalidInput, "train_agent: empty training set");
  SeededRng rng(hyper.seed, streams::kAgent);
  const SeededRng eval_rng(hyper.seed, streams::kEvaluation);
  AgentTrainResult result{AgentParams::initialize(k, hyper.gaussians, rng), {}};
  result.loss_history.push_back(dataset_loss(result.params, hyper, train, eval_rng));

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      std::vector<RoundNoise> noise;
      noise.reserve(end - start);
      for (std::size_t s = start; s < end; ++s) {
        noise.push_back(draw_noise(hyper.display, hyper.gaussians, k, rng));
      }
      std::vector<AgentLossAndGradient> parts(end - start);
      const auto count = static_cast<std::int64_t>(end - start);
#pragma omp parallel for schedule(static)
      for (std::int64_t s = 0; s < count; ++s) {
        const auto idx = static_cast<std::size_t>(s);
        parts[idx] = round_loss_and_gradient(result.params, hyper, train[order[start + idx]], noise[idx]);
      }
      const double step = -hyper.learning_rate / static_cast<double>(end - start);
      for (const auto& p : parts) {
        if (!std::isfinite(p.loss)) {
          fail(ErrorKind::Training, "agent training diverged in epoch " + std::to_string(epoch));
        }
      }
      AgentParams total = AgentParams::zeros(k, hyper.gaussians);
      for (const auto& p : parts) total.axpy(1.0, p.gradient);
      result.params.axpy(step, total);
    }
    const double loss = dataset_loss(result.params, hyper, train, eval_rng);
    if (!std::isfinite(loss)) {
      fail(ErrorKind::Training, "agent training diverged in epoch " + std::to_string(epoch));
    }
    result.loss_history.push_back(loss);
  }
  return result;
}

std::vector<std::size_t> decode_samples(std::span<const Vector> samples, const Matrix& catalog) {
  if (catalog.rows() < samples.size()) {
    fail(ErrorKind::Config, "decode_samples: catalog smaller than the number of samples");
  }
  std::vector<bool> used(catalog.rows(), false);
  std::vector<std::size_t> out;
  out.reserve(samples.size());
  for (const auto& yhat : samples) {
    std::size_t best = catalog.rows();
    double best_cos = -2.0;
    for (std::size_t r = 0; r < catalog.rows(); ++r) {
      if (used[r]) continue;
      const double c = cosine_similarity(yhat, catalog.row(r));
      if (c > best_cos) {
        best_cos = c;
        best = r;
      }
    }
    used[best] = true;
    out.push_back(best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

void save_agent(const AgentParams& params, const AgentHyper& hyper, const std::filesystem::path& path) {
  params.check_shapes();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  binary::write_magic(out, kAgentMagic);
  binary::write_u64(out, hyper.gaussians);
  binary::write_u64(out, hyper.window);
  binary::write_u64(out, hyper.display);
  binary::write_u64(out, hyper.batch_size);
  binary::write_u64(out, hyper.epochs);
  binary::write_u64(out, hyper.seed);
  binary::write_f64(out, hyper.temperature);
  binary::write_f64(out, hyper.learning_rate);
  binary::write_u64(out, params.k());
  for (std::size_t i = 0; i < params.gaussians(); ++i) {
    binary::write_matrix(out, params.mean_weights[i]);
    binary::write_matrix(out, Matrix(params.k(), 1, params.mean_biases[i]));
    binary::write_matrix(out, params.scale_factors[i]);
  }
  binary::write_matrix(out, params.gate_weights);
  binary::write_matrix(out, Matrix(params.gaussians(), 1, params.gate_bias));
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

std::pair<AgentParams, AgentHyper> load_agent(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  binary::expect_magic(in, kAgentMagic);
  AgentHyper h;
  h.gaussians = binary::read_u64(in, "N_g");
  h.window = binary::read_u64(in, "N_ws");
  h.display = binary::read_u64(in, "N_d");
  h.batch_size = binary::read_u64(in, "N_b");
  h.epochs = binary::read_u64(in, "epochs");
  h.seed = binary::read_u64(in, "seed");
  h.temperature = binary::read_f64(in, "tau");
  h.learning_rate = binary::read_f64(in, "eta");
  h.validate();
  const std::uint64_t k = binary::read_u64(in, "k");
  if (h.gaussians > 4096 || k > 1u << 16) fail(ErrorKind::Parse, path.string() + ": implausible shape");
  AgentParams p;
  for (std::size_t i = 0; i < h.gaussians; ++i) {
    p.mean_weights.push_back(binary::read_matrix(in, "W_mu"));
    const Matrix b = binary::read_matrix(in, "b_mu");
    p.mean_biases.emplace_back(b.values().begin(), b.values().end());
    p.scale_factors.push_back(binary::read_matrix(in, "L"));
  }
  p.gate_weights = binary::read_matrix(in, "W_g");
  const Matrix bg = binary::read_matrix(in, "b_g");
  p.gate_bias.assign(bg.values().begin(), bg.values().end());
  p.check_shapes();
  if (p.k() != k) fail(ErrorKind::Parse, path.string() + ": k mismatch");
  return {std::move(p), h};
}

}  // namespace mmd

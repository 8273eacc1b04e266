#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "mmd/matrix.hpp"
#include "mmd/rng.hpp"

namespace mmd {

/// Learned parameters of the mixture head.
struct AgentParams {
  std::vector<Matrix> mean_weights;   // N_g of k x k
  std::vector<Vector> mean_biases;    // N_g of k
  std::vector<Matrix> scale_factors;  // N_g of k x k; covariance_i = L_i L_i^T
  Matrix gate_weights;                // N_g x k
  Vector gate_bias;                   // N_g

  std::size_t gaussians() const { return mean_weights.size(); }
  std::size_t k() const { return gate_weights.cols(); }

  static AgentParams zeros(std::size_t k, std::size_t gaussians);
  /// Scaled-uniform mean and gate weights, zero biases, L_i = 0.1 I.
  static AgentParams initialize(std::size_t k, std::size_t gaussians, SeededRng& rng);

  /// Flattened order: for each i (W_mu_i, b_mu_i, L_i), then W_g, b_g.
  Vector flatten() const;
  void assign(std::span<const double> flat);
  void axpy(double scale, const AgentParams& other);
  void check_shapes() const;

  friend bool operator==(const AgentParams&, const AgentParams&) = default;
};

struct AgentHyper {
  std::size_t gaussians = 3;    // N_g
  double temperature = 1.0;     // tau
  double learning_rate = 0.1;   // eta
  std::size_t window = 3;       // N_ws
  std::size_t display = 6;      // N_d
  std::size_t batch_size = 16;  // N_b
  std::size_t epochs = 30;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static AgentHyper from_json(const nlohmann::json& j);
};

/// One dialog round seen by the agent: recent query projections (newest
/// last) and the projections of the products that were displayed.
struct TrainingSample {
  std::vector<Vector> window;
  std::vector<Vector> truth;
};

/// Mean of the available window entries (1 <= size <= window_size).
Vector context_mean(std::span<const Vector> window, std::size_t window_size);

struct GmmHead {
  std::vector<Vector> means;  // mu_i = sigmoid(W_mu_i H + b_mu_i)
  Vector weights;             // pi = softmax(W_g H + b_g)
};

GmmHead gmm_head(const AgentParams& params, std::span<const double> context);

/// w_i = softmax((log max(pi_i, 1e-12) + g_i) / tau). Throws Config for tau <= 0.
Vector gumbel_softmax(std::span<const double> pi, std::span<const double> gumbel, double tau);

/// y = sum_i w_i (mu_i + L_i eps).
Vector sample_reparam(std::span<const Vector> means, std::span<const Matrix> factors,
                      std::span<const double> w, std::span<const double> eps);

/// -(1/N_d^2) sum_j sum_i cos(y_i, yhat_j). Throws DegenerateInput on zero vectors.
double cosine_loss(std::span<const Vector> samples, std::span<const Vector> truth);

/// Noise for one round: one (g, eps) pair per displayed sample.
struct RoundNoise {
  std::vector<Vector> gumbel;   // N_d of N_g
  std::vector<Vector> epsilon;  // N_d of k
};

RoundNoise draw_noise(std::size_t display, std::size_t gaussians, std::size_t k, SeededRng& rng);

struct RoundForward {
  Vector context;
  GmmHead head;
  std::vector<Vector> mixture;     // w per sample
  std::vector<Vector> samples;     // yhat per sample
};

RoundForward forward_round(const AgentParams& params, const AgentHyper& hyper,
                           std::span<const Vector> window, const RoundNoise& noise);
RoundForward forward_round(const AgentParams& params, const AgentHyper& hyper,
                           std::span<const Vector> window, SeededRng& rng);

struct AgentLossAndGradient {
  double loss;
  AgentParams gradient;
};

/// cosine_loss of forward_round at frozen noise, with its analytic gradient.
AgentLossAndGradient round_loss_and_gradient(const AgentParams& params, const AgentHyper& hyper,
                                             const TrainingSample& sample, const RoundNoise& noise);

struct AgentTrainResult {
  AgentParams params;
  /// Training-set loss before training and after each epoch, evaluated with
  /// the same per-sample noise every time.
  std::vector<double> loss_history;
};

/// Mini-batch gradient descent on the batch-mean cosine loss.
AgentTrainResult train_agent(std::span<const TrainingSample> train, std::size_t k,
                             const AgentHyper& hyper);

/// Training-set loss at evaluation noise drawn from (seed, stream).
double dataset_loss(const AgentParams& params, const AgentHyper& hyper,
                    std::span<const TrainingSample> samples, const SeededRng& noise_rng);

/// Mean over rounds of (1/N_d^2) sum_ij cos(y_i, yhat_j).
double evaluate(const AgentParams& params, const AgentHyper& hyper,
                std::span<const TrainingSample> test, const SeededRng& rng);

/// Greedy cosine nearest neighbour per sample, each product used once.
/// Returns row indices into `catalog`. Throws Config if it has fewer rows than samples.
std::vector<std::size_t> decode_samples(std::span<const Vector> samples, const Matrix& catalog);

/// Binary model file: "MMDAGNT1", a hyper block (N_g, N_ws, N_d, N_b,
/// epochs, seed as u64; tau, eta as f64), k as u64, then for each Gaussian
/// W_mu_i, b_mu_i, L_i followed by W_g, b_g, each as u64 rows, u64 cols and
/// little-endian f64 data.
void save_agent(const AgentParams& params, const AgentHyper& hyper, const std::filesystem::path& path);
std::pair<AgentParams, AgentHyper> load_agent(const std::filesystem::path& path);

}  // namespace mmd

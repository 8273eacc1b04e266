#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmd/encoders.hpp"
#include "mmd/matrix.hpp"
#include "mmd/rng.hpp"

namespace mmd {

/// Weights of the two-view correlational autoencoder.
struct CorrNetParams {
  Matrix encoder_image;  // k x image_dim   (W)
  Matrix encoder_text;   // k x text_dim    (V)
  Vector hidden_bias;    // k               (b)
  Matrix decoder_image;  // image_dim x k   (W')
  Matrix decoder_text;   // text_dim x k    (V')
  Vector output_bias;    // image_dim + text_dim (b')

  std::size_t k() const { return hidden_bias.size(); }
  std::size_t image_dim() const { return encoder_image.cols(); }
  std::size_t text_dim() const { return encoder_text.cols(); }

  /// Zero-filled parameters of the given shape.
  static CorrNetParams zeros(std::size_t k, std::size_t image_dim = kImageDim,
                             std::size_t text_dim = kTextDim);
  /// Uniform on +-sqrt(6 / (fan_in + fan_out)) per matrix, zero biases.
  static CorrNetParams initialize(std::size_t k, SeededRng& rng, std::size_t image_dim = kImageDim,
                                  std::size_t text_dim = kTextDim);

  /// Flattened view order: W, V, b, W', V', b'.
  std::size_t parameter_count() const;
  Vector flatten() const;
  void assign(std::span<const double> flat);
  /// this += scale * other
  void axpy(double scale, const CorrNetParams& other);
  /// Throws Shape on inconsistent block shapes.
  void check_shapes() const;

  friend bool operator==(const CorrNetParams&, const CorrNetParams&) = default;
};

/// H = sigmoid(W x + V y + b), with an absent view contributing zero.
/// Throws InvalidInput if both views are absent, Shape on wrong dimensions.
Vector project(const CorrNetParams& params, std::optional<std::span<const double>> image,
               std::optional<std::span<const double>> text);

struct Reconstruction {
  Vector image;
  Vector text;
};

/// sigmoid([W' h, V' h] + b') split into the two views.
Reconstruction reconstruct(const CorrNetParams& params, std::span<const double> hidden);

/**
 * Batch correlation between the two views' hidden codes, rows = samples:
 * sum over samples and coordinates of centred cross-products divided by
 * sqrt(total centred energy of X * total centred energy of Y), denominator
 * floored at 1e-8. Throws InvalidInput for fewer than two rows.
 */
double corr_term(const Matrix& hx, const Matrix& hy);

/// d corr / d HX and d corr / d HY.
std::pair<Matrix, Matrix> corr_term_gradient(const Matrix& hx, const Matrix& hy);

/// Standardised two-view training data, one row per product.
struct TwoViewData {
  Matrix image;
  Matrix text;
  std::size_t size() const { return image.rows(); }
};

/**
 * Batch objective: mean over the batch of the three reconstruction errors
 * (from H(Z), H(X), H(Y)) minus lambda * corr(H(X), H(Y)). Each
 * reconstruction error is the mean squared error over the concatenated
 * target. Throws InvalidInput for batches smaller than two.
 */
double corrnet_loss(const CorrNetParams& params, const TwoViewData& data,
                    std::span<const std::size_t> batch, double lambda);

struct LossAndGradient {
  double loss;
  CorrNetParams gradient;
};

LossAndGradient corrnet_loss_and_gradient(const CorrNetParams& params, const TwoViewData& data,
                                          std::span<const std::size_t> batch, double lambda);

struct CorrNetTrainConfig {
  std::size_t k = 32;
  double lambda = 2.0;
  double learning_rate = 0.5;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static CorrNetTrainConfig from_json(const nlohmann::json& j);
};

struct CorrNetTrainResult {
  CorrNetParams params;
  /// Full training-set objective before training and after every epoch.
  std::vector<double> loss_history;
};

/// Plain mini-batch gradient descent. Throws Training naming the epoch on divergence.
CorrNetTrainResult train_corrnet(const TwoViewData& data, const CorrNetTrainConfig& config);

/// Projections of every row through one view (the other treated as zero).
Matrix project_images(const CorrNetParams& params, const Matrix& images);
Matrix project_texts(const CorrNetParams& params, const Matrix& texts);

/// Row indices of `candidates` ranked by cosine similarity to `query` (desc), ties by index.
std::vector<std::size_t> rank_by_cosine(std::span<const double> query, const Matrix& candidates);

/// Binary model file: "MMDCORR1", k as u64, then W, V, b, W', V', b' each
/// as u64 rows, u64 cols and little-endian f64 data.
void save_corrnet(const CorrNetParams& params, const std::filesystem::path& path);
CorrNetParams load_corrnet(const std::filesystem::path& path);

}  // namespace mmd

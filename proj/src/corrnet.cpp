#include "mmd/corrnet.hpp"

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

constexpr double kCorrFloor = 1e-8;
constexpr std::string_view kCorrNetMagic = "MMDCORR1";

void fill_uniform(Matrix& m, double limit, SeededRng& rng) {
  for (double& v : m.values()) v = rng.uniform(-limit, limit);
}

double glorot(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void sigmoid_inplace(std::span<double> v) {
  for (double& x : v) x = sigmoid(x);
}

std::span<double> as_span(Vector& v) { return {v.data(), v.size()}; }

}  // namespace

// ---------------------------------------------------------------------------
// CorrNetParams

CorrNetParams CorrNetParams::zeros(std::size_t k, std::size_t image_dim, std::size_t text_dim) {
  return {Matrix(k, image_dim), Matrix(k, text_dim), Vector(k, 0.0),
          Matrix(image_dim, k), Matrix(text_dim, k), Vector(image_dim + text_dim, 0.0)};
}

CorrNetParams CorrNetParams::initialize(std::size_t k, SeededRng& rng, std::size_t image_dim,
                                        std::size_t text_dim) {
  if (k == 0) fail(ErrorKind::Config, "CorrNet: k must be >= 1");
  CorrNetParams p = zeros(k, image_dim, text_dim);
  fill_uniform(p.encoder_image, glorot(image_dim, k), rng);
  fill_uniform(p.encoder_text, glorot(text_dim, k), rng);
  fill_uniform(p.decoder_image, glorot(k, image_dim), rng);
  fill_uniform(p.decoder_text, glorot(k, text_dim), rng);
  return p;
}

std::size_t CorrNetParams::parameter_count() const {
  return encoder_image.size() + encoder_text.size() + hidden_bias.size() + decoder_image.size() +
         decoder_text.size() + output_bias.size();
}

Vector CorrNetParams::flatten() const {
  Vector out;
  out.reserve(parameter_count());
  auto append = [&](std::span<const double> s) { out.insert(out.end(), s.begin(), s.end()); };
  append(encoder_image.values());
  append(encoder_text.values());
  append(hidden_bias);
  append(decoder_image.values());
  append(decoder_text.values());
  append(output_bias);
  return out;
}

void CorrNetParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) fail(ErrorKind::Shape, "CorrNetParams::assign: wrong length");
  std::size_t at = 0;
  auto take = [&](std::span<double> dst) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(at),
              flat.begin() + static_cast<std::ptrdiff_t>(at + dst.size()), dst.begin());
    at += dst.size();
  };
  take(encoder_image.values());
  take(encoder_text.values());
  take(as_span(hidden_bias));
  take(decoder_image.values());
  take(decoder_text.values());
  take(as_span(output_bias));
}

void CorrNetParams::axpy(double scale, const CorrNetParams& other) {
  auto add = [scale](std::span<double> dst, std::span<const double> src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  };
  add(encoder_image.values(), other.encoder_image.values());
  add(encoder_text.values(), other.encoder_text.values());
  add(as_span(hidden_bias), other.hidden_bias);
  add(decoder_image.values(), other.decoder_image.values());
  add(decoder_text.values(), other.decoder_text.values());
  add(as_span(output_bias), other.output_bias);
}

void CorrNetParams::check_shapes() const {
  const std::size_t kk = k();
  const bool ok = kk > 0 && encoder_image.rows() == kk && encoder_text.rows() == kk &&
                  decoder_image.rows() == image_dim() && decoder_image.cols() == kk &&
                  decoder_text.rows() == text_dim() && decoder_text.cols() == kk &&
                  output_bias.size() == image_dim() + text_dim();
  if (!ok) fail(ErrorKind::Shape, "CorrNetParams: inconsistent block shapes");
}

// ---------------------------------------------------------------------------
// Forward pieces

Vector project(const CorrNetParams& params, std::optional<std::span<const double>> image,
               std::optional<std::span<const double>> text) {
  if (!image && !text) fail(ErrorKind::InvalidInput, "project: no view given");
  const std::size_t k = params.k();
  Vector pre(params.hidden_bias);
  Vector tmp(k);
  if (image) {
    if (image->size() != params.image_dim()) fail(ErrorKind::Shape, "project: image dimension mismatch");
    kernels::gemv(params.encoder_image, *image, tmp);
    for (std::size_t i = 0; i < k; ++i) pre[i] += tmp[i];
  }
  if (text) {
    if (text->size() != params.text_dim()) fail(ErrorKind::Shape, "project: text dimension mismatch");
    kernels::gemv(params.encoder_text, *text, tmp);
    for (std::size_t i = 0; i < k; ++i) pre[i] += tmp[i];
  }
  return sigmoid(pre);
}

Reconstruction reconstruct(const CorrNetParams& params, std::span<const double> hidden) {
  if (hidden.size() != params.k()) fail(ErrorKind::Shape, "reconstruct: hidden size mismatch");
  require_finite(hidden, "reconstruct");
  Reconstruction r{Vector(params.image_dim()), Vector(params.text_dim())};
  kernels::gemv(params.decoder_image, hidden, r.image);
  kernels::gemv(params.decoder_text, hidden, r.text);
  for (std::size_t i = 0; i < r.image.size(); ++i) r.image[i] = sigmoid(r.image[i] + params.output_bias[i]);
  const std::size_t off = params.image_dim();
  for (std::size_t i = 0; i < r.text.size(); ++i) r.text[i] = sigmoid(r.text[i] + params.output_bias[off + i]);
  return r;
}

// ---------------------------------------------------------------------------
// Correlation

namespace {

struct CorrParts {
  Matrix cx, cy;  // centred codes
  double cross = 0.0, energy_x = 0.0, energy_y = 0.0, denom = 0.0;
  bool floored = false;
};

CorrParts corr_parts(const Matrix& hx, const Matrix& hy) {
  if (hx.rows() != hy.rows() || hx.cols() != hy.cols()) {
    fail(ErrorKind::Shape, "corr_term: batch shapes differ");
  }
  if (hx.rows() < 2) fail(ErrorKind::InvalidInput, "corr_term: need at least two samples");
  const std::size_t n = hx.rows();
  const std::size_t k = hx.cols();
  CorrParts p{hx, hy};
  for (std::size_t c = 0; c < k; ++c) {
    double mx = 0.0, my = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      mx += hx(r, c);
      my += hy(r, c);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      p.cx(r, c) -= mx;
      p.cy(r, c) -= my;
    }
  }
  for (std::size_t i = 0; i < p.cx.size(); ++i) {
    const double x = p.cx.data()[i];
    const double y = p.cy.data()[i];
    p.cross += x * y;
    p.energy_x += x * x;
    p.energy_y += y * y;
  }
  p.denom = std::sqrt(p.energy_x * p.energy_y);
  if (p.denom < kCorrFloor) {
    p.denom = kCorrFloor;
    p.floored = true;
  }
  return p;
}

}  // namespace

double corr_term(const Matrix& hx, const Matrix& hy) {
  const auto p = corr_parts(hx, hy);
  return p.cross / p.denom;
}

std::pair<Matrix, Matrix> corr_term_gradient(const Matrix& hx, const Matrix& hy) {
  const auto p = corr_parts(hx, hy);
  const double corr = p.cross / p.denom;
  Matrix gx(hx.rows(), hx.cols());
  Matrix gy(hy.rows(), hy.cols());
  // Centring is a projection whose adjoint leaves centred vectors unchanged,
  // so the derivative w.r.t. the raw codes equals that w.r.t. the centred ones.
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double x = p.cx.data()[i];
    const double y = p.cy.data()[i];
    double dx = y / p.denom;
    double dy = x / p.denom;
    if (!p.floored) {
      dx -= corr * x / p.energy_x;
      dy -= corr * y / p.energy_y;
    }
    gx.data()[i] = dx;
    gy.data()[i] = dy;
  }
  return {std::move(gx), std::move(gy)};
}

// ---------------------------------------------------------------------------
// Objective

namespace {

struct SampleForward {
  Vector x_pre;           // W x
  Vector y_pre;           // V y
  Vector h[3];            // Z, X, Y paths
  Vector out_image[3];
  Vector out_text[3];
};

enum Path { kJoint = 0, kImageOnly = 1, kTextOnly = 2 };

SampleForward forward_sample(const CorrNetParams& p, std::span<const double> x,
                             std::span<const double> y) {
  const std::size_t k = p.k();
  SampleForward f;
  f.x_pre.assign(k, 0.0);
  f.y_pre.assign(k, 0.0);
  kernels::gemv(p.encoder_image, x, f.x_pre);
  kernels::gemv(p.encoder_text, y, f.y_pre);
  for (int path = 0; path < 3; ++path) {
    Vector pre(p.hidden_bias);
    for (std::size_t i = 0; i < k; ++i) {
      if (path != kTextOnly) pre[i] += f.x_pre[i];
      if (path != kImageOnly) pre[i] += f.y_pre[i];
    }
    sigmoid_inplace(pre);
    f.h[path] = std::move(pre);
    f.out_image[path].assign(p.image_dim(), 0.0);
    f.out_text[path].assign(p.text_dim(), 0.0);
    kernels::gemv(p.decoder_image, f.h[path], f.out_image[path]);
    kernels::gemv(p.decoder_text, f.h[path], f.out_text[path]);
    const std::size_t off = p.image_dim();
    for (std::size_t i = 0; i < off; ++i) {
      f.out_image[path][i] = sigmoid(f.out_image[path][i] + p.output_bias[i]);
    }
    for (std::size_t i = 0; i < p.text_dim(); ++i) {
      f.out_text[path][i] = sigmoid(f.out_text[path][i] + p.output_bias[off + i]);
    }
  }
  return f;
}

double squared_error(std::span<const double> out, std::span<const double> target) {
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out[i] - target[i];
    acc += d * d;
  }
  return acc;
}

void check_batch(const CorrNetParams& params, const TwoViewData& data,
                 std::span<const std::size_t> batch) {
  if (batch.size() < 2) fail(ErrorKind::InvalidInput, "corrnet_loss: batch must hold >= 2 samples");
  if (data.image.cols() != params.image_dim() || data.text.cols() != params.text_dim() ||
      data.image.rows() != data.text.rows()) {
    fail(ErrorKind::Shape, "corrnet_loss: data shape does not match parameters");
  }
  for (std::size_t r : batch) {
    if (r >= data.size()) fail(ErrorKind::InvalidInput, "corrnet_loss: row out of range");
  }
}

}  // namespace

LossAndGradient corrnet_loss_and_gradient(const CorrNetParams& params, const TwoViewData& data,
                                          std::span<const std::size_t> batch, double lambda) {
  check_batch(params, data, batch);
  const std::size_t b = batch.size();
  const std::size_t k = params.k();
  const std::size_t dim_i = params.image_dim();
  const std::size_t dim_t = params.text_dim();
  const double recon_scale = 1.0 / (static_cast<double>(b) * static_cast<double>(dim_i + dim_t));

  std::vector<SampleForward> fwd;
  fwd.reserve(b);
  Matrix hx(b, k), hy(b, k);
  double recon = 0.0;
  for (std::size_t s = 0; s < b; ++s) {
    const auto x = data.image.row(batch[s]);
    const auto y = data.text.row(batch[s]);
    fwd.push_back(forward_sample(params, x, y));
    const auto& f = fwd.back();
    for (int path = 0; path < 3; ++path) {
      recon += squared_error(f.out_image[path], x) + squared_error(f.out_text[path], y);
    }
    std::copy(f.h[kImageOnly].begin(), f.h[kImageOnly].end(), hx.row(s).begin());
    std::copy(f.h[kTextOnly].begin(), f.h[kTextOnly].end(), hy.row(s).begin());
  }
  const double corr = corr_term(hx, hy);
  const auto [dcorr_x, dcorr_y] = corr_term_gradient(hx, hy);

  LossAndGradient out{recon * recon_scale - lambda * corr, CorrNetParams::zeros(k, dim_i, dim_t)};
  CorrNetParams& g = out.gradient;
  Vector d_out_image(dim_i), d_out_text(dim_t), dh(k), d_pre[3];
  for (auto& v : d_pre) v.assign(k, 0.0);

  for (std::size_t s = 0; s < b; ++s) {
    const auto x = data.image.row(batch[s]);
    const auto y = data.text.row(batch[s]);
    const auto& f = fwd[s];
    for (int path = 0; path < 3; ++path) {
      for (std::size_t i = 0; i < dim_i; ++i) {
        const double o = f.out_image[path][i];
        d_out_image[i] = 2.0 * recon_scale * (o - x[i]) * o * (1.0 - o);
        g.output_bias[i] += d_out_image[i];
      }
      for (std::size_t i = 0; i < dim_t; ++i) {
        const double o = f.out_text[path][i];
        d_out_text[i] = 2.0 * recon_scale * (o - y[i]) * o * (1.0 - o);
        g.output_bias[dim_i + i] += d_out_text[i];
      }
      kernels::rank1_update(g.decoder_image, 1.0, d_out_image, f.h[path]);
      kernels::rank1_update(g.decoder_text, 1.0, d_out_text, f.h[path]);
      std::fill(dh.begin(), dh.end(), 0.0);
      kernels::gemv_t_add(params.decoder_image, d_out_image, dh);
      kernels::gemv_t_add(params.decoder_text, d_out_text, dh);
      if (path == kImageOnly) {
        for (std::size_t i = 0; i < k; ++i) dh[i] -= lambda * dcorr_x(s, i);
      } else if (path == kTextOnly) {
        for (std::size_t i = 0; i < k; ++i) dh[i] -= lambda * dcorr_y(s, i);
      }
      for (std::size_t i = 0; i < k; ++i) {
        const double h = f.h[path][i];
        d_pre[path][i] = dh[i] * h * (1.0 - h);
      }
    }
    Vector d_image_pre(k), d_text_pre(k);
    for (std::size_t i = 0; i < k; ++i) {
      d_image_pre[i] = d_pre[kJoint][i] + d_pre[kImageOnly][i];
      d_text_pre[i] = d_pre[kJoint][i] + d_pre[kTextOnly][i];
      g.hidden_bias[i] += d_pre[kJoint][i] + d_pre[kImageOnly][i] + d_pre[kTextOnly][i];
    }
    kernels::rank1_update(g.encoder_image, 1.0, d_image_pre, x);
    kernels::rank1_update(g.encoder_text, 1.0, d_text_pre, y);
  }
  return out;
}

double corrnet_loss(const CorrNetParams& params, const TwoViewData& data,
                    std::span<const std::size_t> batch, double lambda) {
  check_batch(params, data, batch);
  const std::size_t b = batch.size();
  const std::size_t k = params.k();
  Matrix hx(b, k), hy(b, k);
  double recon = 0.0;
  for (std::size_t s = 0; s < b; ++s) {
    const auto x = data.image.row(batch[s]);
    const auto y = data.text.row(batch[s]);
    const auto f = forward_sample(params, x, y);
    for (int path = 0; path < 3; ++path) {
      recon += squared_error(f.out_image[path], x) + squared_error(f.out_text[path], y);
    }
    std::copy(f.h[kImageOnly].begin(), f.h[kImageOnly].end(), hx.row(s).begin());
    std::copy(f.h[kTextOnly].begin(), f.h[kTextOnly].end(), hy.row(s).begin());
  }
  const double scale =
      1.0 / (static_cast<double>(b) * static_cast<double>(params.image_dim() + params.text_dim()));
  return recon * scale - lambda * corr_term(hx, hy);
}

// ---------------------------------------------------------------------------
// Training

void CorrNetTrainConfig::validate() const {
  if (k == 0) fail(ErrorKind::Config, "CorrNet: k must be >= 1");
  if (!(lambda >= 0.0)) fail(ErrorKind::Config, "CorrNet: lambda must be >= 0");
  if (!(learning_rate > 0.0)) fail(ErrorKind::Config, "CorrNet: learning rate must be > 0");
  if (batch_size < 2) fail(ErrorKind::Config, "CorrNet: batch size must be >= 2");
}

nlohmann::json CorrNetTrainConfig::to_json() const {
  return {{"k", k},           {"lambda", lambda},         {"learning_rate", learning_rate},
          {"epochs", epochs}, {"batch_size", batch_size}, {"seed", seed}};
}

CorrNetTrainConfig CorrNetTrainConfig::from_json(const nlohmann::json& j) {
  CorrNetTrainConfig c;
  c.k = j.value("k", c.k);
  c.lambda = j.value("lambda", c.lambda);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

CorrNetTrainResult train_corrnet(const TwoViewData& data, const CorrNetTrainConfig& config) {
  config.validate();
  if (data.size() < 2) fail(ErrorKind::InvalidInput, "train_corrnet: need at least two products");
  SeededRng rng(config.seed, streams::kCorrNet);
  CorrNetTrainResult result{
      CorrNetParams::initialize(config.k, rng, data.image.cols(), data.text.cols()), {}};

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  result.loss_history.push_back(corrnet_loss(result.params, data, order, config.lambda));

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t start = 0; start < order.size();) {
      std::size_t end = std::min(order.size(), start + config.batch_size);
      // A trailing single sample has no correlation; fold it into this batch.
      if (order.size() - end == 1) end = order.size();
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      auto lg = corrnet_loss_and_gradient(result.params, data, batch, config.lambda);
      if (!std::isfinite(lg.loss)) {
        fail(ErrorKind::Training, "CorrNet training diverged in epoch " + std::to_string(epoch));
      }
      result.params.axpy(-config.learning_rate, lg.gradient);
      start = end;
    }
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const double loss = corrnet_loss(result.params, data, all, config.lambda);
    if (!std::isfinite(loss)) {
      fail(ErrorKind::Training, "CorrNet training diverged in epoch " + std::to_string(epoch));
    }
    result.loss_history.push_back(loss);
  }
  return result;
}

// ---------------------------------------------------------------------------

Matrix project_images(const CorrNetParams& params, const Matrix& images) {
  Matrix out(images.rows(), params.k());
  for (std::size_t r = 0; r < images.rows(); ++r) {
    const Vector h = project(params, images.row(r), std::nullopt);
    std::copy(h.begin(), h.end(), out.row(r).begin());
  }
  return out;
}

Matrix project_texts(const CorrNetParams& params, const Matrix& texts) {
  Matrix out(texts.rows(), params.k());
  for (std::size_t r = 0; r < texts.rows(); ++r) {
    const Vector h = project(params, std::nullopt, texts.row(r));
    std::copy(h.begin(), h.end(), out.row(r).begin());
  }
  return out;
}

std::vector<std::size_t> rank_by_cosine(std::span<const double> query, const Matrix& candidates) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(candidates.rows());
  for (std::size_t r = 0; r < candidates.rows(); ++r) {
    scored.emplace_back(cosine_similarity(query, candidates.row(r)), r);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::size_t> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.second);
  return out;
}

void save_corrnet(const CorrNetParams& params, const std::filesystem::path& path) {
  params.check_shapes();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  binary::write_magic(out, kCorrNetMagic);
  binary::write_u64(out, params.k());
  binary::write_matrix(out, params.encoder_image);
  binary::write_matrix(out, params.encoder_text);
  binary::write_matrix(out, Matrix(params.k(), 1, params.hidden_bias));
  binary::write_matrix(out, params.decoder_image);
  binary::write_matrix(out, params.decoder_text);
  binary::write_matrix(out, Matrix(params.output_bias.size(), 1, params.output_bias));
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

CorrNetParams load_corrnet(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  binary::expect_magic(in, kCorrNetMagic);
  const std::uint64_t k = binary::read_u64(in, "k");
  CorrNetParams p;
  p.encoder_image = binary::read_matrix(in, "W");
  p.encoder_text = binary::read_matrix(in, "V");
  const Matrix b = binary::read_matrix(in, "b");
  p.hidden_bias.assign(b.values().begin(), b.values().end());
  p.decoder_image = binary::read_matrix(in, "W'");
  p.decoder_text = binary::read_matrix(in, "V'");
  const Matrix b2 = binary::read_matrix(in, "b'");
  p.output_bias.assign(b2.values().begin(), b2.values().end());
  if (p.k() != k) fail(ErrorKind::Parse, path.string() + ": k does not match bias length");
  p.check_shapes();
  return p;
}

}  // namespace mmd

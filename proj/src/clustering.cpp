#include "mmd/clustering.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "mmd/error.hpp"
#include "mmd/kernels.hpp"

namespace mmd {

namespace {

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
  std::vector<std::size_t> parent;
};

}  // namespace

Dendrogram::Dendrogram(std::size_t leaves, std::vector<Merge> merges)
    : leaves_(leaves), merges_(std::move(merges)) {
  representative_.resize(merges_.size());
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    const std::size_t left = merges_[i].left;
    if (left >= leaves_ + i) fail(ErrorKind::InvalidInput, "Dendrogram: merge refers forward");
    representative_[i] = left < leaves_ ? left : representative_[left - leaves_];
  }
}

std::vector<std::size_t> Dendrogram::cut(double threshold) const {
  UnionFind uf(leaves_);
  auto leaf_of = [this](std::size_t id) { return id < leaves_ ? id : representative_[id - leaves_]; };
  for (const Merge& m : merges_) {
    if (m.height <= threshold) uf.unite(leaf_of(m.left), leaf_of(m.right));
  }
  std::vector<std::size_t> labels(leaves_);
  for (std::size_t i = 0; i < leaves_; ++i) labels[i] = uf.find(i);
  return labels;
}

std::vector<std::size_t> Dendrogram::cluster_of(std::size_t leaf, double threshold) const {
  if (leaf >= leaves_) fail(ErrorKind::InvalidInput, "Dendrogram: leaf out of range");
  const auto labels = cut(threshold);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < leaves_; ++i) {
    if (labels[i] == labels[leaf]) members.push_back(i);
  }
  return members;
}

Dendrogram average_linkage_from_distances(std::size_t n, std::vector<double> d) {
  if (d.size() != kernels::condensed_size(n)) {
    fail(ErrorKind::Shape, "average_linkage: condensed matrix has wrong length");
  }
  std::vector<Merge> merges;
  if (n < 2) return Dendrogram(n, std::move(merges));
  merges.reserve(n - 1);

  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> label(n);
  std::iota(label.begin(), label.end(), 0);
  std::vector<std::size_t> chain;
  chain.reserve(n);
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return d[kernels::condensed_index(n, i, j)];
  };

  std::size_t remaining = n;
  while (remaining > 1) {
    if (chain.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        if (active[i]) {
          chain.push_back(i);
          break;
        }
      }
    }
    for (;;) {
      const std::size_t a = chain.back();
      std::size_t best = n;
      double best_d = std::numeric_limits<double>::infinity();
      // Prefer the previous chain element on ties so the chain terminates.
      if (chain.size() >= 2) {
        best = chain[chain.size() - 2];
        best_d = at(a, best);
      }
      for (std::size_t k = 0; k < n; ++k) {
        if (!active[k] || k == a) continue;
        const double dk = at(a, k);
        if (dk < best_d) {
          best_d = dk;
          best = k;
        }
      }
      if (chain.size() >= 2 && best == chain[chain.size() - 2]) {
        chain.pop_back();
        chain.pop_back();
        // Merge a into best; best keeps the slot.
        const std::size_t b = best;
        const double sa = static_cast<double>(size[a]);
        const double sb = static_cast<double>(size[b]);
        for (std::size_t k = 0; k < n; ++k) {
          if (!active[k] || k == a || k == b) continue;
          at(b, k) = (sa * at(a, k) + sb * at(b, k)) / (sa + sb);
        }
        const std::size_t lo = std::min(label[a], label[b]);
        const std::size_t hi = std::max(label[a], label[b]);
        merges.push_back({lo, hi, best_d, size[a] + size[b]});
        active[a] = false;
        size[b] += size[a];
        label[b] = n + merges.size() - 1;
        --remaining;
        break;
      }
      chain.push_back(best);
    }
  }
  return Dendrogram(n, std::move(merges));
}

Dendrogram average_linkage(const Matrix& points) {
  const std::size_t n = points.rows();
  std::vector<double> condensed(kernels::condensed_size(n));
  kernels::pairwise_squared_distances(points, condensed);
  for (double& v : condensed) v = std::sqrt(v);
  return average_linkage_from_distances(n, std::move(condensed));
}

}  // namespace mmd

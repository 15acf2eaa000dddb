#include "mfhb/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "mfhb/parallel.hpp"

namespace mfhb {

namespace {

// Minimal kd-tree over fixed-dimension points for exact k-NN distances.
class KdTree {
 public:
  KdTree(const std::vector<std::vector<double>>& pts, int dim) : pts_(pts), dim_(dim) {
    index_.resize(pts.size());
    std::iota(index_.begin(), index_.end(), 0);
    nodes_.reserve(2 * pts.size());
    root_ = build(0, static_cast<int>(pts.size()), 0);
  }

  // squared distance to the k-th nearest neighbor, excluding the query itself
  double knn_sq_dist(int query, int k) const {
    // bounded max-heap of the k best squared distances
    std::vector<double> heap;
    heap.reserve(k);
    search(root_, query, k, heap);
    return heap.front();
  }

 private:
  struct Node {
    int axis = -1;
    double split = 0.0;
    int point = -1;   // leaf payload start in index_
    int count = 0;    // leaf payload size
    int left = -1, right = -1;
  };

  static constexpr int kLeafSize = 16;

  int build(int lo, int hi, int depth) {
    Node node;
    if (hi - lo <= kLeafSize) {
      node.point = lo;
      node.count = hi - lo;
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size()) - 1;
    }
    const int axis = depth % dim_;
    const int mid = (lo + hi) / 2;
    std::nth_element(index_.begin() + lo, index_.begin() + mid, index_.begin() + hi,
                     [&](int a, int b) { return pts_[a][axis] < pts_[b][axis]; });
    node.axis = axis;
    node.split = pts_[index_[mid]][axis];
    nodes_.push_back(node);
    const int self = static_cast<int>(nodes_.size()) - 1;
    const int left = build(lo, mid, depth + 1);
    const int right = build(mid, hi, depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  void heap_push(std::vector<double>& heap, int k, double d) const {
    if (static_cast<int>(heap.size()) < k) {
      heap.push_back(d);
      std::push_heap(heap.begin(), heap.end());
    } else if (d < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = d;
      std::push_heap(heap.begin(), heap.end());
    }
  }

  void search(int node_id, int query, int k, std::vector<double>& heap) const {
    const Node& node = nodes_[node_id];
    const auto& q = pts_[query];
    if (node.point >= 0) {
      for (int t = 0; t < node.count; ++t) {
        const int idx = index_[node.point + t];
        if (idx == query) continue;
        double d = 0.0;
        const auto& p = pts_[idx];
        for (int a = 0; a < dim_; ++a) {
          const double diff = q[a] - p[a];
          d += diff * diff;
        }
        heap_push(heap, k, d);
      }
      return;
    }
    const double delta = q[node.axis] - node.split;
    const int near = delta < 0 ? node.left : node.right;
    const int far = delta < 0 ? node.right : node.left;
    search(near, query, k, heap);
    if (static_cast<int>(heap.size()) < k || delta * delta < heap.front())
      search(far, query, k, heap);
  }

  const std::vector<std::vector<double>>& pts_;
  int dim_;
  std::vector<int> index_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

double digamma(int n) {
  // psi(n) = -gamma + H_{n-1}; asymptotic expansion past 16
  double acc = 0.0;
  double x = n;
  while (x < 16.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return acc + std::log(x) - 0.5 * inv - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
}

double unit_ball_log_volume(int d) {
  // log V_d = (d/2) log(pi) - lgamma(d/2 + 1)
  return 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d + 1.0);
}

}  // namespace

double knn_entropy(const std::vector<std::vector<double>>& samples, int k_neighbors) {
  const int n = static_cast<int>(samples.size());
  if (k_neighbors < 1) throw std::invalid_argument("knn_entropy: k_neighbors must be >= 1");
  if (n < k_neighbors + 1)
    throw std::invalid_argument("knn_entropy: needs at least k_neighbors + 1 samples");
  const int d = static_cast<int>(samples.front().size());
  for (const auto& s : samples)
    if (static_cast<int>(s.size()) != d) throw std::invalid_argument("knn_entropy: ragged input");

  KdTree tree(samples, d);
  std::vector<double> log_eps(n);
  parallel_for(0, n, [&](std::int64_t i) {
    const double sq = tree.knn_sq_dist(static_cast<int>(i), k_neighbors);
    log_eps[i] = std::log(std::max(std::sqrt(sq), 1e-12));
  });
  // sorted before summing so the estimate is exactly permutation invariant
  std::sort(log_eps.begin(), log_eps.end());
  double sum_log = 0.0;
  for (double v : log_eps) sum_log += v;

  return digamma(n) - digamma(k_neighbors) + unit_ball_log_volume(d) +
         d * sum_log / static_cast<double>(n);
}

double particle_free_energy_terms(const Ensemble& ens, double f_value, double beta) {
  std::vector<std::vector<double>> joint(ens.size());
  for (int i = 0; i < ens.size(); ++i) {
    auto flat = ens.particles[i].theta.flatten();
    flat.insert(flat.end(), ens.particles[i].r.begin(), ens.particles[i].r.end());
    joint[i] = std::move(flat);
  }
  const double entropy = knn_entropy(joint);
  return f_value + mean_kinetic(ens) - entropy / beta;
}

double particle_free_energy(const Ensemble& ens, const Dataset& data, ActivationSpec act,
                            const RegularizerSpec& reg, double beta) {
  return particle_free_energy_terms(ens, loss(ens, data, act, reg), beta);
}

VelocityGaps velocity_stationarity(const Ensemble& ens, double beta) {
  const int n = ens.size();
  const int d = ens.dim;
  std::vector<double> mean(d, 0.0);
  for (const auto& p : ens.particles)
    for (int k = 0; k < d; ++k) mean[k] += p.r[k];
  for (double& v : mean) v /= n;

  VelocityGaps gaps;
  double norm_sq = 0.0;
  for (double v : mean) norm_sq += v * v;
  gaps.mean_gap = std::sqrt(norm_sq);

  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      double cov = 0.0;
      for (const auto& p : ens.particles) cov += (p.r[a] - mean[a]) * (p.r[b] - mean[b]);
      cov /= n;
      const double target = a == b ? 1.0 / beta : 0.0;
      gaps.cov_gap = std::max(gaps.cov_gap, std::abs(cov - target));
    }
  }
  return gaps;
}

IndependenceResult theta_r_independence(const Ensemble& ens) {
  const int n = ens.size();
  const int d = ens.dim;
  // column-major matrices of flattened theta and r coordinates
  std::vector<std::vector<double>> th(d, std::vector<double>(n));
  std::vector<std::vector<double>> vr(d, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    const auto flat = ens.particles[i].theta.flatten();
    for (int k = 0; k < d; ++k) {
      th[k][i] = flat[k];
      vr[k][i] = ens.particles[i].r[k];
    }
  }
  auto center = [n](std::vector<double>& col) {
    double mu = 0.0;
    for (double v : col) mu += v;
    mu /= n;
    double var = 0.0;
    for (double& v : col) {
      v -= mu;
      var += v * v;
    }
    return var;
  };
  std::vector<double> th_var(d), r_var(d);
  for (int k = 0; k < d; ++k) {
    th_var[k] = center(th[k]);
    r_var[k] = center(vr[k]);
  }
  IndependenceResult res;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      if (th_var[a] <= 0.0 || r_var[b] <= 0.0) {
        res.degenerate = true;
        continue;
      }
      double cov = 0.0;
      for (int i = 0; i < n; ++i) cov += th[a][i] * vr[b][i];
      res.max_abs_correlation =
          std::max(res.max_abs_correlation, std::abs(cov) / std::sqrt(th_var[a] * r_var[b]));
    }
  }
  return res;
}

ConsistencyTable consistency_sweep(const RunConfig& base_cfg, const Dataset& data,
                                   std::span<const int> n_values,
                                   std::span<const std::uint64_t> seeds) {
  if (n_values.empty() || seeds.empty())
    throw std::invalid_argument("consistency_sweep: empty n_values or seeds");
  ConsistencyTable table;
  for (int n : n_values) {
    RunConfig cfg = base_cfg;
    cfg.n = n;
    ConsistencyRow row;
    row.n = n;
    for (std::uint64_t seed : seeds) {
      cfg.seed = seed;
      const auto result = run_trajectory(cfg, data);
      if (row.mean_curve.empty()) row.mean_curve.assign(result.records.size(), 0.0);
      for (std::size_t k = 0; k < result.records.size(); ++k)
        row.mean_curve[k] += result.records[k].risk;
    }
    for (double& v : row.mean_curve) v /= static_cast<double>(seeds.size());
    table.rows.push_back(std::move(row));
  }
  for (std::size_t k = 0; k + 1 < table.rows.size(); ++k) {
    double sup = 0.0;
    const auto& a = table.rows[k].mean_curve;
    const auto& b = table.rows[k + 1].mean_curve;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
      sup = std::max(sup, std::abs(a[i] - b[i]));
    table.pairwise_sup.push_back(sup);
  }
  return table;
}

}  // namespace mfhb

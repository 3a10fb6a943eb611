#include "lalign/selection.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <string>

#include "lalign/error.hpp"
#include "lalign/rng.hpp"

namespace lalign {

DistanceMatrix::DistanceMatrix(Matrix entries) : d_(std::move(entries)) {
  if (d_.rows() != d_.cols()) throw Error(ErrorCode::DimMismatch, "distance matrix must be square");
  if (!d_.allFinite()) throw Error(ErrorCode::NonFinite, "distance matrix has NaN/Inf entries");
  for (Eigen::Index i = 0; i < d_.rows(); ++i) {
    if (d_(i, i) != 0.0) throw Error(ErrorCode::InvalidConfig, "distance matrix diagonal must be zero");
    for (Eigen::Index j = i + 1; j < d_.cols(); ++j) {
      if (d_(i, j) != d_(j, i) || d_(i, j) < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "distance matrix must be symmetric and nonnegative");
      }
    }
  }
}

namespace {

void require_same_dims(std::span<const SpdMatrix> covs) {
  if (covs.empty()) throw Error(ErrorCode::EmptyInput, "pairwise_distances: empty list");
  for (const auto& c : covs)
    if (c.dim() != covs.front().dim()) throw Error(ErrorCode::DimMismatch, "pairwise_distances: mixed dimensions");
}

}  // namespace

DistanceMatrix pairwise_distances_serial(std::span<const SpdMatrix> covs) {
  require_same_dims(covs);
  const auto n = static_cast<Eigen::Index>(covs.size());
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Matrix w = spd_inv_sqrt(covs[static_cast<std::size_t>(i)]).matrix();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = riemannian_distance_whitened(w, covs[static_cast<std::size_t>(j)]);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return DistanceMatrix(std::move(d));
}

DistanceMatrix pairwise_distances(std::span<const SpdMatrix> covs) {
  require_same_dims(covs);
  const auto n = static_cast<Eigen::Index>(covs.size());
  Matrix d = Matrix::Zero(n, n);
  // whiten each row anchor once; each row i then owns entries (i, j > i)
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      const Matrix w = spd_inv_sqrt(covs[static_cast<std::size_t>(i)]).matrix();
      for (Eigen::Index j = i + 1; j < n; ++j) {
        d(i, j) = riemannian_distance_whitened(w, covs[static_cast<std::size_t>(j)]);
      }
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d(j, i) = d(i, j);
  return DistanceMatrix(std::move(d));
}

double medoid_cost(const DistanceMatrix& d, std::span<const std::size_t> medoids) {
  double cost = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (auto m : medoids) best = std::min(best, d(i, m));
    cost += best;
  }
  return cost;
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Nearest and second-nearest medoid distances for every point.
struct Nearest {
  std::vector<std::size_t> first;  // index into medoid list
  std::vector<double> d1;
  std::vector<double> d2;
};

Nearest nearest_medoids(const DistanceMatrix& d, const std::vector<std::size_t>& medoids) {
  const std::size_t n = d.size();
  Nearest nn{std::vector<std::size_t>(n, kNone), std::vector<double>(n, std::numeric_limits<double>::infinity()),
             std::vector<double>(n, std::numeric_limits<double>::infinity())};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < medoids.size(); ++m) {
      const double v = d(i, medoids[m]);
      if (v < nn.d1[i]) {
        nn.d2[i] = nn.d1[i];
        nn.d1[i] = v;
        nn.first[i] = m;
      } else if (v < nn.d2[i]) {
        nn.d2[i] = v;
      }
    }
  }
  return nn;
}

std::vector<std::size_t> build(const DistanceMatrix& d, std::size_t k) {
  const std::size_t n = d.size();
  std::vector<std::size_t> medoids;
  std::vector<bool> is_medoid(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = kNone;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      if (is_medoid[c]) continue;
      double cost = 0.0;
      for (std::size_t i = 0; i < n; ++i) cost += std::min(nearest[i], d(i, c));
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
    medoids.push_back(best);
    is_medoid[best] = true;
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], d(i, best));
  }
  return medoids;
}

// Best-improvement SWAP over a sorted medoid list.
void swap_phase(const DistanceMatrix& d, std::vector<std::size_t>& medoids, std::vector<double>& trace) {
  const std::size_t n = d.size();
  std::sort(medoids.begin(), medoids.end());
  double cost = medoid_cost(d, medoids);
  trace.push_back(cost);
  const double eps = 1e-12;
  for (;;) {
    const auto nn = nearest_medoids(d, medoids);
    std::vector<bool> is_medoid(n, false);
    for (auto m : medoids) is_medoid[m] = true;

    double best_delta = 0.0;
    std::size_t best_m = kNone;
    std::size_t best_h = kNone;
    for (std::size_t m = 0; m < medoids.size(); ++m) {
      for (std::size_t h = 0; h < n; ++h) {
        if (is_medoid[h]) continue;
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double dih = d(i, h);
          if (nn.first[i] == m) {
            delta += std::min(dih, nn.d2[i]) - nn.d1[i];
          } else if (dih < nn.d1[i]) {
            delta += dih - nn.d1[i];
          }
        }
        if (delta < best_delta) {
          best_delta = delta;
          best_m = m;
          best_h = h;
        }
      }
    }
    if (best_m == kNone || best_delta >= -eps * std::max(1.0, cost)) break;
    medoids[best_m] = best_h;
    std::sort(medoids.begin(), medoids.end());
    const double next = medoid_cost(d, medoids);
    if (!(next < cost)) break;  // guards against rounding-induced cycling
    cost = next;
    trace.push_back(cost);
  }
}

KMedoidsResult finish(const DistanceMatrix& d, std::vector<std::size_t> medoids, std::vector<double> trace) {
  KMedoidsResult r;
  std::sort(medoids.begin(), medoids.end());
  const auto nn = nearest_medoids(d, medoids);
  r.assignment = nn.first;
  r.cost = medoid_cost(d, medoids);
  r.medoids = std::move(medoids);
  r.cost_trace = std::move(trace);
  return r;
}

}  // namespace

KMedoidsResult k_medoids(const DistanceMatrix& d, std::size_t k, const KMedoidsOptions& options) {
  const std::size_t n = d.size();
  if (k < 1 || k > n) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  }
  std::vector<double> trace;
  auto medoids = build(d, k);
  swap_phase(d, medoids, trace);
  auto best = finish(d, std::move(medoids), std::move(trace));

  for (int r = 0; r < options.restarts; ++r) {
    CounterRng rng(CounterRng::derive(options.seed, {0x6b6d6564ULL, static_cast<std::uint64_t>(r)}));
    // partial Fisher-Yates for a uniform random k-subset
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.below(n - i)]);
    std::vector<std::size_t> start(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<double> t;
    swap_phase(d, start, t);
    auto candidate = finish(d, std::move(start), std::move(t));
    if (candidate.cost < best.cost) best = std::move(candidate);
  }
  return best;
}

}  // namespace lalign

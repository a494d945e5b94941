#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "periodbounds/constants.hpp"
#include "periodbounds/errors.hpp"
#include "periodbounds/lp.hpp"
#include "periodbounds/parallel.hpp"

namespace periodbounds {

/// Closed curve y(t) = a0 + sum_k a_k cos(k t) + b_k sin(k t) in R^n with period 2 pi.
///
/// Coefficients are stored as an n x (2K + 1) matrix with columns
/// [a0 | a_1 .. a_K | b_1 .. b_K].
template <typename Scalar = double>
class FourierCurve {
public:
  using Coefficients = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Samples = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit FourierCurve(Coefficients coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.rows() < 1 || coeffs_.cols() < 3 || coeffs_.cols() % 2 == 0) {
      throw DomainError("curve coefficients must be n x (2K + 1) with K >= 1");
    }
    if (!coeffs_.allFinite()) throw DomainError("curve coefficients must be finite");
    if (!(coeffs_.rightCols(coeffs_.cols() - 1).cwiseAbs().maxCoeff() > 0)) {
      throw DomainError("degenerate curve: all non-constant coefficients vanish");
    }
  }

  /// (cos t, sin t) scaled by radius, embedded in the first two of n coordinates.
  static FourierCurve circle(Scalar radius = 1, Eigen::Index n = 2, int K = 1) {
    Coefficients c = Coefficients::Zero(n, 2 * K + 1);
    c(0, 1) = radius;
    c(1, 1 + K) = radius;
    return FourierCurve(std::move(c));
  }

  const Coefficients &coefficients() const { return coeffs_; }
  Eigen::Index dimension() const { return coeffs_.rows(); }
  int harmonics() const { return static_cast<int>((coeffs_.cols() - 1) / 2); }
  static constexpr Scalar period() { return 2 * std::numbers::pi_v<Scalar>; }

  /// d-th time derivative at t (d = 0, 1, 2), exact trigonometric sum.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate(Scalar t, int d = 0) const {
    const int K = harmonics();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y =
        d == 0 ? Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(coeffs_.col(0))
               : Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(dimension());
    for (int k = 1; k <= K; ++k) {
      const Scalar c = std::cos(k * t), s = std::sin(k * t);
      const Scalar kk = Scalar(k);
      switch (d) {
      case 0: y += c * coeffs_.col(k) + s * coeffs_.col(K + k); break;
      case 1: y += kk * (-s * coeffs_.col(k) + c * coeffs_.col(K + k)); break;
      default: y += -kk * kk * (c * coeffs_.col(k) + s * coeffs_.col(K + k)); break;
      }
    }
    return y;
  }

  struct Sampled {
    Samples y, dy, ddy; ///< N x n each
  };

  /// Position, velocity and acceleration at t_j = 2 pi j / N.
  Sampled sample(Eigen::Index N) const {
    const int K = harmonics();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cosine(N, K), sine(N, K);
    for (Eigen::Index j = 0; j < N; ++j) {
      const Scalar t = period() * Scalar(j) / Scalar(N);
      for (int k = 1; k <= K; ++k) {
        cosine(j, k - 1) = std::cos(k * t);
        sine(j, k - 1) = std::sin(k * t);
      }
    }
    const auto a = coeffs_.middleCols(1, K).transpose();
    const auto b = coeffs_.rightCols(K).transpose();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> k1(K), k2(K);
    for (int k = 1; k <= K; ++k) {
      k1(k - 1) = Scalar(k);
      k2(k - 1) = Scalar(k * k);
    }
    Sampled out;
    out.y = cosine * a + sine * b;
    out.y.rowwise() += coeffs_.col(0).transpose();
    out.dy = -sine * (k1.asDiagonal() * a) + cosine * (k1.asDiagonal() * b);
    out.ddy = -(cosine * (k2.asDiagonal() * a) + sine * (k2.asDiagonal() * b));
    return out;
  }

  /// Curve reparameterized by t -> t + tau.
  FourierCurve shifted(Scalar tau) const {
    const int K = harmonics();
    Coefficients c = coeffs_;
    for (int k = 1; k <= K; ++k) {
      const Scalar ck = std::cos(k * tau), sk = std::sin(k * tau);
      c.col(k) = ck * coeffs_.col(k) + sk * coeffs_.col(K + k);
      c.col(K + k) = ck * coeffs_.col(K + k) - sk * coeffs_.col(k);
    }
    return FourierCurve(std::move(c));
  }

private:
  Coefficients coeffs_;
};

inline constexpr Eigen::Index kDefaultObjectiveGrid = 512;

/// Curve-restricted Lipschitz constant sup ||y'(t) - y'(s)||_p / ||y(t) - y(s)||_p on a grid.
///
/// Every pair i < j at circular distance >= 2 is compared; adjacent pairs are
/// replaced by the diagonal limit ||y''(t_i)||_p / ||y'(t_i)||_p. Returns
/// +infinity for a self-intersection with distinct velocities or a stationary point.
template <typename Scalar>
Scalar restricted_lipschitz(const FourierCurve<Scalar> &curve, const PExponent<Scalar> &p,
                            Eigen::Index grid_N = kDefaultObjectiveGrid) {
  if (grid_N < 128) throw DomainError("restricted Lipschitz grid needs N >= 128");
  const auto s = curve.sample(grid_N);
  const Scalar q = p.value();
  const Eigen::Index N = grid_N;
  const Eigen::Index n = curve.dimension();
  const Scalar inf = std::numeric_limits<Scalar>::infinity();

  // Work with p-th powers; tiny = (1e-12)^p.
  const Scalar tiny = std::pow(Scalar(1e-12), q);
  Scalar best = 0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Scalar speed = lp_power(s.dy.row(i), q);
    const Scalar accel = lp_power(s.ddy.row(i), q);
    if (!(speed > 0)) return inf;
    best = std::max(best, accel / speed);
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    // j runs over i + 2 .. i + N - 2 (mod N); pairs with j > i only.
    const Eigen::Index last = (i == 0) ? N - 2 : N - 1;
    for (Eigen::Index j = i + 2; j <= last; ++j) {
      Scalar num = 0, den = 0;
      for (Eigen::Index c = 0; c < n; ++c) {
        num += abs_pow(s.dy(i, c) - s.dy(j, c), q);
        den += abs_pow(s.y(i, c) - s.y(j, c), q);
      }
      if (den < tiny) {
        if (num > tiny) return inf;
        continue;
      }
      if (num > best * den) best = num / den;
    }
  }
  return std::pow(best, Scalar(1) / q);
}

/// 2 pi x restricted Lipschitz constant: the T L product of the curve as an orbit.
///
/// With the period pinned at 2 pi, a speed change rescales L inversely, so the
/// value depends only on the traced shape and its parameterization.
template <typename Scalar>
Scalar objective(const FourierCurve<Scalar> &curve, const PExponent<Scalar> &p,
                 Eigen::Index grid_N = kDefaultObjectiveGrid) {
  return FourierCurve<Scalar>::period() * restricted_lipschitz(curve, p, grid_N);
}

/// Centers the curve, scales max_j ||y(t_j)||_p to 1 and rotates time so the maximum sits at t = 0.
///
/// The maximum is taken over the objective grid, so the rotation is a whole
/// number of grid steps and the objective is unchanged up to rounding.
template <typename Scalar>
FourierCurve<Scalar> normalize_curve(const FourierCurve<Scalar> &curve, const PExponent<Scalar> &p,
                                     Eigen::Index grid_N = kDefaultObjectiveGrid) {
  typename FourierCurve<Scalar>::Coefficients c = curve.coefficients();
  c.col(0).setZero();
  const FourierCurve<Scalar> centered(c);
  const auto s = centered.sample(grid_N);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r(grid_N);
  for (Eigen::Index j = 0; j < grid_N; ++j) r(j) = lp_norm(s.y.row(j), p.value());
  const Scalar radius = r.maxCoeff();
  // First grid point within rounding of the maximum, so ties (circles) keep t = 0.
  Eigen::Index arg = 0;
  while (r(arg) < radius * (1 - Scalar(1e-12))) ++arg;
  c /= radius;
  return FourierCurve<Scalar>(c).shifted(FourierCurve<Scalar>::period() * Scalar(arg) / Scalar(grid_N));
}

template <typename Scalar = double>
struct TraceEntry {
  long iteration;
  long evaluations;
  Scalar best_so_far;
};

template <typename Scalar = double>
struct SearchOptions {
  int parents = 8;          ///< elite set size (mu)
  int offspring = 32;       ///< candidates per generation (lambda)
  Scalar sigma_start = Scalar(0.3);
  Scalar sigma_end = Scalar(1e-5);
  Eigen::Index search_grid = 128;   ///< grid used while ranking candidates
  Eigen::Index report_grid = 2048;  ///< grid used for the final elite re-evaluation
};

template <typename Scalar = double>
struct SearchResult {
  FourierCurve<Scalar> best_curve;
  Scalar best_TL;
  Scalar lower_bound;
  Scalar certificate_gap;
  std::vector<TraceEntry<Scalar>> trace;
  long evaluations;
};

/// Known floor on T L: 2 pi at p = 2, else max(6, C_p^{-1}).
template <typename Scalar>
Scalar tl_lower_bound(const PExponent<Scalar> &p) {
  if (p.value() == Scalar(2)) return 2 * std::numbers::pi_v<Scalar>;
  return std::max(Scalar(6), compute_cp(p).c_p_inverse);
}

/// Elitist (mu + lambda) evolution strategy over Fourier curves minimizing objective().
///
/// Offspring perturb a uniformly drawn elite by Gaussian noise whose scale
/// decays geometrically from sigma_start to sigma_end over the budget; each
/// candidate is rescaled to unit coefficient norm (the objective is scale
/// invariant). Candidates are ranked on search_grid and the final elites are
/// re-evaluated on report_grid. All random draws happen on the calling thread,
/// so results depend only on (p, n, K, budget, seed, options).
template <typename Scalar>
SearchResult<Scalar> search(const PExponent<Scalar> &p, Eigen::Index n, int K, long budget, std::uint64_t seed,
                            const SearchOptions<Scalar> &options = {}) {
  if (n < 2) throw DomainError("curve search needs dimension n >= 2");
  if (K < 1) throw DomainError("curve search needs K >= 1 harmonics");
  if (budget < 1000) throw DomainError("curve search needs a budget of at least 1e3 evaluations");
  if (options.parents < 1 || options.offspring < 1) throw DomainError("population sizes must be positive");

  using Curve = FourierCurve<Scalar>;
  using Coefficients = typename Curve::Coefficients;
  struct Candidate {
    Coefficients coeffs;
    Scalar value;
    long id; ///< creation order, breaks ties deterministically
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> normal(0, 1);
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  const unsigned workers = worker_count();

  auto unit = [](Coefficients c) {
    c.col(0).setZero();
    const Scalar norm = c.norm();
    if (norm > 0) c /= norm;
    return c;
  };
  auto evaluate_all = [&](std::vector<Candidate> &batch) {
    parallel_for(
        batch.size(),
        [&](std::size_t i) {
          try {
            batch[i].value = objective(Curve(batch[i].coeffs), p, options.search_grid);
          } catch (const DomainError &) {
            batch[i].value = inf;
          }
          if (!std::isfinite(double(batch[i].value))) batch[i].value = inf;
        },
        workers);
  };
  auto ranked = [](const Candidate &a, const Candidate &b) {
    return a.value < b.value || (a.value == b.value && a.id < b.id);
  };

  long next_id = 0;
  long evaluations = 0;
  std::vector<Candidate> elites;
  {
    std::vector<Candidate> initial;
    const int count = std::max(options.parents, options.offspring);
    for (int i = 0; i < count; ++i) {
      Coefficients c(n, 2 * K + 1);
      for (Eigen::Index r = 0; r < n; ++r) {
        for (int col = 0; col < 2 * K + 1; ++col) {
          const int k = col == 0 ? 1 : (col <= K ? col : col - K);
          c(r, col) = normal(rng) / Scalar(k);
        }
      }
      initial.push_back({unit(c), inf, next_id++});
    }
    evaluate_all(initial);
    evaluations += long(initial.size());
    std::sort(initial.begin(), initial.end(), ranked);
    initial.resize(std::min<std::size_t>(initial.size(), std::size_t(options.parents)));
    elites = std::move(initial);
  }

  std::vector<TraceEntry<Scalar>> trace;
  trace.push_back({0, evaluations, elites.front().value});
  long generation = 0;
  while (evaluations < budget) {
    ++generation;
    const Scalar progress = Scalar(evaluations) / Scalar(budget);
    const Scalar sigma = options.sigma_start * std::pow(options.sigma_end / options.sigma_start, progress);
    const long batch_size = std::min<long>(options.offspring, budget - evaluations);
    std::vector<Candidate> batch;
    batch.reserve(std::size_t(batch_size));
    for (long i = 0; i < batch_size; ++i) {
      const auto parent = std::uniform_int_distribution<std::size_t>(0, elites.size() - 1)(rng);
      Coefficients c = elites[parent].coeffs;
      for (Eigen::Index r = 0; r < c.rows(); ++r) {
        for (Eigen::Index col = 1; col < c.cols(); ++col) c(r, col) += sigma * normal(rng);
      }
      batch.push_back({unit(c), inf, next_id++});
    }
    evaluate_all(batch);
    evaluations += batch_size;
    for (auto &cand : batch) elites.push_back(std::move(cand));
    std::sort(elites.begin(), elites.end(), ranked);
    elites.resize(std::min<std::size_t>(elites.size(), std::size_t(options.parents)));
    trace.push_back({generation, evaluations, elites.front().value});
  }

  if (!std::isfinite(double(elites.front().value))) {
    throw ConvergenceError("curve search: every candidate was degenerate (self-intersecting or stationary)");
  }

  // Re-rank the surviving elites on the fine grid; it only adds sample pairs.
  std::vector<Candidate> finals;
  for (const auto &e : elites) {
    if (std::isfinite(double(e.value))) finals.push_back(e);
  }
  parallel_for(
      finals.size(),
      [&](std::size_t i) { finals[i].value = objective(Curve(finals[i].coeffs), p, options.report_grid); },
      workers);
  std::sort(finals.begin(), finals.end(), ranked);
  const auto &winner = finals.front();
  const Scalar floor_value = tl_lower_bound(p);
  return {normalize_curve(Curve(winner.coeffs), p), winner.value, floor_value, winner.value - floor_value,
          std::move(trace), evaluations};
}

} // namespace periodbounds

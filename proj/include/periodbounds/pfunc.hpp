#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "periodbounds/constants.hpp"
#include "periodbounds/errors.hpp"
#include "periodbounds/lp.hpp"

namespace periodbounds {

/// Uniform samples of a T-periodic function with values in R^n.
///
/// Row k holds the value at t = k T / N; the endpoint t = T is not stored and
/// all index arithmetic wraps modulo N.
template <typename Scalar = double>
class PeriodicGridFunction {
public:
  using Samples = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  PeriodicGridFunction(Samples samples, Scalar period) : samples_(std::move(samples)), period_(period) {
    if (samples_.rows() < 8) throw DomainError("grid function needs N >= 8 samples");
    if (samples_.cols() < 1) throw DomainError("grid function needs at least one component");
    if (!(period_ > 0) || !std::isfinite(double(period_))) throw DomainError("period must be positive and finite");
    if (!samples_.allFinite()) throw DomainError("grid function samples must be finite");
  }

  /// Samples f(t) at the N grid times; f returns an n-vector.
  template <typename F>
  static PeriodicGridFunction sample(F &&f, Eigen::Index N, Eigen::Index n, Scalar period) {
    if (N < 8) throw DomainError("grid function needs N >= 8 samples");
    Samples s(N, n);
    for (Eigen::Index k = 0; k < N; ++k) s.row(k) = f(period * Scalar(k) / Scalar(N)).transpose();
    return PeriodicGridFunction(std::move(s), period);
  }

  const Samples &samples() const { return samples_; }
  Scalar period() const { return period_; }
  Eigen::Index size() const { return samples_.rows(); }
  Eigen::Index dimension() const { return samples_.cols(); }
  Scalar time_step() const { return period_ / Scalar(size()); }
  Scalar time(Eigen::Index k) const { return period_ * Scalar(k) / Scalar(size()); }

private:
  Samples samples_;
  Scalar period_;
};

/// The declared discretization tolerance 10/N^2 shared by all holds flags.
template <typename Scalar>
Scalar report_tolerance(Eigen::Index N) {
  return Scalar(10) / (Scalar(N) * Scalar(N));
}

/// Periodic second-order central difference (u_{k+1} - u_{k-1}) / (2 dt).
template <typename Scalar>
PeriodicGridFunction<Scalar> central_difference(const PeriodicGridFunction<Scalar> &u) {
  const auto &s = u.samples();
  const Eigen::Index N = u.size();
  typename PeriodicGridFunction<Scalar>::Samples d(N, u.dimension());
  const Scalar inv = Scalar(1) / (2 * u.time_step());
  for (Eigen::Index k = 0; k < N; ++k) d.row(k) = (s.row((k + 1) % N) - s.row((k + N - 1) % N)) * inv;
  return {std::move(d), u.period()};
}

/// Cyclic rotation: row k of the result is row (k + shift) mod N of u.
template <typename Scalar>
PeriodicGridFunction<Scalar> rotate(const PeriodicGridFunction<Scalar> &u, Eigen::Index shift) {
  const Eigen::Index N = u.size();
  const Eigen::Index m = ((shift % N) + N) % N;
  typename PeriodicGridFunction<Scalar>::Samples r(N, u.dimension());
  for (Eigen::Index k = 0; k < N; ++k) r.row(k) = u.samples().row((k + m) % N);
  return {std::move(r), u.period()};
}

/// Trapezoid rule for int_0^T ||u(t)||_p^p dt with the spatial l^p norm.
template <typename Scalar>
Scalar time_lp_power(const PeriodicGridFunction<Scalar> &u, Scalar p) {
  return lp_power(u.samples(), p) * u.time_step();
}

template <typename Scalar>
PeriodicGridFunction<Scalar> project_mean_zero(const PeriodicGridFunction<Scalar> &u) {
  typename PeriodicGridFunction<Scalar>::Samples s = u.samples();
  s.rowwise() -= s.colwise().mean();
  return {std::move(s), u.period()};
}

/// (int ||u||_p^p)^(1/p) / (int ||Du||_p^p)^(1/p) on the mean-zero projection of u.
template <typename Scalar>
Scalar rayleigh_quotient(const PeriodicGridFunction<Scalar> &u, const PExponent<Scalar> &p) {
  const auto v = project_mean_zero(u);
  const Scalar num = time_lp_power(v, p.value());
  if (!(num > 0)) throw DomainError("rayleigh quotient undefined: u is zero after mean removal");
  const Scalar den = time_lp_power(central_difference(v), p.value());
  if (!(den > 0)) throw DomainError("rayleigh quotient undefined: discrete derivative vanishes");
  return std::pow(num / den, Scalar(1) / p.value());
}

template <typename Scalar = double>
struct WirtingerReport {
  Scalar lhs;       ///< int ||u||^p dt
  Scalar rhs;       ///< C_p^p T^p int ||u'||^p dt
  Scalar slack;     ///< rhs - lhs
  Scalar tolerance; ///< admissible negative slack, rhs ((1 + 10/N^2)^p - 1)
  bool holds;
};

/// Evaluates both sides of the L^p Wirtinger inequality for a mean-zero u.
///
/// The 10/N^2 discretization tolerance is applied to the quotient
/// (lhs/rhs)^(1/p) <= 1 + 10/N^2, so the flag is invariant under u -> lambda u
/// and under rescaling of T.
template <typename Scalar>
WirtingerReport<Scalar> wirtinger_check(const PeriodicGridFunction<Scalar> &u, const PExponent<Scalar> &p) {
  const Scalar q = p.value();
  const Scalar cp = compute_cp(p).c_p;
  const Scalar lhs = time_lp_power(u, q);
  const Scalar rhs = std::pow(cp * u.period(), q) * time_lp_power(central_difference(u), q);
  const Scalar tol = rhs * (std::pow(1 + report_tolerance<Scalar>(u.size()), q) - 1);
  const Scalar slack = rhs - lhs;
  return {lhs, rhs, slack, tol, slack >= -tol};
}

template <typename Scalar = double>
struct Lemma2Report {
  Scalar Q;
  Scalar bound;                 ///< T / 6
  Scalar position_integral;     ///< int int ||y(t) - y(s)||_p ds dt
  Scalar derivative_integral;   ///< int int ||y'(t) - y'(s)||_p ds dt
  Scalar gap;                   ///< bound - Q, reported only
  bool holds;
};

namespace detail {

// Sum over unordered pairs j < k of ||x_j - x_k||_p, weighted by 2 dt^2.
template <typename Scalar>
Scalar pairwise_distance_integral(const PeriodicGridFunction<Scalar> &x, Scalar p) {
  const auto &s = x.samples();
  const Eigen::Index N = x.size();
  const Eigen::Index n = x.dimension();
  Scalar total = 0;
  for (Eigen::Index j = 0; j < N; ++j) {
    Scalar row = 0;
    for (Eigen::Index k = j + 1; k < N; ++k) {
      Scalar acc = 0;
      for (Eigen::Index i = 0; i < n; ++i) acc += abs_pow(s(j, i) - s(k, i), p);
      row += p == Scalar(2) ? std::sqrt(acc) : std::pow(acc, Scalar(1) / p);
    }
    total += row;
  }
  const Scalar dt = x.time_step();
  return 2 * total * dt * dt;
}

} // namespace detail

/// Ratio of the double integrals of ||y(t)-y(s)|| and ||y'(t)-y'(s)||, checked against T/6.
template <typename Scalar>
Lemma2Report<Scalar> lemma2_ratio(const PeriodicGridFunction<Scalar> &y, const PExponent<Scalar> &p) {
  const Scalar den = detail::pairwise_distance_integral(central_difference(y), p.value());
  if (!(den > 0)) throw DomainError("lemma2 ratio undefined: y is constant at grid resolution");
  const Scalar num = detail::pairwise_distance_integral(y, p.value());
  const Scalar Q = num / den;
  const Scalar bound = y.period() / 6;
  return {Q, bound, num, den, bound - Q, Q <= bound + report_tolerance<Scalar>(y.size())};
}

template <typename Scalar = double>
struct ShiftReport {
  Eigen::Index shift_steps;
  Scalar mean_residual; ///< max_i |mean_k v_k,i| before any projection
  bool mean_zero;       ///< mean_residual <= 1e-14 (scaled by max |x|)
  WirtingerReport<Scalar> wirtinger;
};

/// Wirtinger check of v(t) = x(t + h) - x(t); h must be a multiple of T/N.
template <typename Scalar>
ShiftReport<Scalar> shift_difference_check(const PeriodicGridFunction<Scalar> &x, Scalar h,
                                           const PExponent<Scalar> &p) {
  const Scalar steps = h / x.time_step();
  const Scalar rounded = std::round(steps);
  if (std::abs(steps - rounded) > Scalar(1e-9) * std::max(Scalar(1), std::abs(steps))) {
    throw DomainError("shift h = " + std::to_string(double(h)) + " is not a multiple of the grid spacing");
  }
  const auto m = static_cast<Eigen::Index>(rounded);
  typename PeriodicGridFunction<Scalar>::Samples v = rotate(x, m).samples() - x.samples();
  const Scalar residual = v.colwise().mean().cwiseAbs().maxCoeff();
  const Scalar scale = std::max(Scalar(1), x.samples().cwiseAbs().maxCoeff());
  PeriodicGridFunction<Scalar> diff(std::move(v), x.period());
  return {m, residual, residual <= Scalar(1e-14) * scale, wirtinger_check(diff, p)};
}

/// Random mean-zero trigonometric polynomial with harmonics 1..K, amplitudes ~ 1/k.
template <typename Scalar, typename Rng>
PeriodicGridFunction<Scalar> random_band_limited(Eigen::Index N, Eigen::Index n, Scalar period, int K, Rng &rng) {
  std::normal_distribution<Scalar> normal(0, 1);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a(K, n), b(K, n);
  for (int k = 0; k < K; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      a(k, i) = normal(rng) / Scalar(k + 1);
      b(k, i) = normal(rng) / Scalar(k + 1);
    }
  }
  const Scalar omega = 2 * std::numbers::pi_v<Scalar> / period;
  typename PeriodicGridFunction<Scalar>::Samples s = PeriodicGridFunction<Scalar>::Samples::Zero(N, n);
  for (Eigen::Index j = 0; j < N; ++j) {
    const Scalar t = period * Scalar(j) / Scalar(N);
    for (int k = 0; k < K; ++k) {
      const Scalar c = std::cos(omega * Scalar(k + 1) * t);
      const Scalar sn = std::sin(omega * Scalar(k + 1) * t);
      s.row(j) += c * a.row(k) + sn * b.row(k);
    }
  }
  return {std::move(s), period};
}

/// Largest |correlation| of the first component with sin(2 pi t / T + phase) over all phases.
template <typename Scalar>
Scalar sinusoid_correlation(const PeriodicGridFunction<Scalar> &u) {
  const auto v = project_mean_zero(u);
  const Eigen::Index N = v.size();
  const Scalar omega = 2 * std::numbers::pi_v<Scalar> / v.period();
  Scalar a = 0, b = 0;
  for (Eigen::Index k = 0; k < N; ++k) {
    a += v.samples()(k, 0) * std::cos(omega * v.time(k));
    b += v.samples()(k, 0) * std::sin(omega * v.time(k));
  }
  // cos and sin of the first harmonic are orthogonal with squared norm N/2 on the grid.
  const Scalar projected = std::sqrt((a * a + b * b) * 2 / Scalar(N));
  return projected / v.samples().col(0).norm();
}

enum class SearchStatus { converged, converged_low_confidence };

inline const char *to_string(SearchStatus s) {
  return s == SearchStatus::converged ? "converged" : "converged_low_confidence";
}

template <typename Scalar = double>
struct ExtremalOptions {
  Scalar period = 1;
  int restarts = 3;
  int bandwidth = 0;                  ///< highest harmonic searched; 0 means N/8
  Scalar initial_step = Scalar(0.1);
  Scalar min_step = Scalar(1e-12);
  Scalar improvement_floor = Scalar(1e-13); ///< relative gain below which a step counts as converged
};

template <typename Scalar = double>
struct ExtremalResult {
  PeriodicGridFunction<Scalar> u;
  Scalar q;
  SearchStatus status;
  int iterations;           ///< over all restarts
  int best_restart;
  std::vector<Scalar> trace; ///< best quotient after each iteration of the winning restart
};

namespace detail {

template <typename Scalar>
struct ExtremalProblem {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  ExtremalProblem(Eigen::Index N, int K, Scalar period, Scalar p) : N(N), K(K), T(period), p(p), basis(N, 2 * K) {
    const Scalar omega = 2 * std::numbers::pi_v<Scalar> / T;
    for (Eigen::Index j = 0; j < N; ++j) {
      const Scalar t = T * Scalar(j) / Scalar(N);
      for (int k = 1; k <= K; ++k) {
        basis(j, k - 1) = std::cos(omega * k * t);
        basis(j, K + k - 1) = std::sin(omega * k * t);
      }
    }
    dt = T / Scalar(N);
  }

  Vector samples(const Vector &c) const { return basis * c; }

  Scalar log_quotient(const Vector &c) const {
    const Vector u = samples(c);
    const Vector w = derivative(u);
    return (std::log(lp_power(u, p)) - std::log(lp_power(w, p))) / p;
  }

  Vector derivative(const Vector &u) const {
    Vector w(N);
    for (Eigen::Index k = 0; k < N; ++k) w(k) = (u((k + 1) % N) - u((k + N - 1) % N)) / (2 * dt);
    return w;
  }

  // H^1-preconditioned gradient of log q in coefficient space.
  Vector ascent_direction(const Vector &c) const {
    const Vector u = samples(c);
    const Vector w = derivative(u);
    auto phi = [this](Scalar x) { return std::copysign(std::pow(std::abs(x), p - 1), x); };
    const Scalar A = lp_power(u, p);
    const Scalar B = lp_power(w, p);
    Vector grad(N);
    for (Eigen::Index k = 0; k < N; ++k) {
      const Scalar dA = phi(u(k));
      const Scalar dB = (phi(w((k + N - 1) % N)) - phi(w((k + 1) % N))) / (2 * dt);
      grad(k) = dA / A - dB / B;
    }
    Vector g = basis.transpose() * grad;
    for (int k = 1; k <= K; ++k) {
      g(k - 1) /= Scalar(k * k);
      g(K + k - 1) /= Scalar(k * k);
    }
    return g;
  }

  Eigen::Index N;
  int K;
  Scalar T;
  Scalar p;
  Matrix basis;
  Scalar dt;
};

} // namespace detail

/// Maximizes the discrete Rayleigh quotient over mean-zero scalar grid functions.
///
/// The search runs in the span of harmonics 1..bandwidth (default N/8), where
/// the central difference resolves every mode; projected, H^1-preconditioned
/// gradient ascent on log q with backtracking halving from initial_step and
/// renormalization after every step. Restarts use seeds derived from `seed`;
/// the best restart wins. Deterministic in (p, N, budget, seed, options).
template <typename Scalar>
ExtremalResult<Scalar> extremal_search(const PExponent<Scalar> &p, Eigen::Index N, int budget, std::uint64_t seed,
                                       const ExtremalOptions<Scalar> &options = {}) {
  if (N < 64) throw DomainError("extremal search needs N >= 64");
  if (budget < 1) throw DomainError("extremal search needs a positive iteration budget");
  if (options.restarts < 1) throw DomainError("extremal search needs at least one restart");
  const int K = options.bandwidth > 0 ? options.bandwidth : static_cast<int>(N / 8);
  if (2 * K >= N) throw DomainError("extremal search bandwidth must stay below N/2");

  using Problem = detail::ExtremalProblem<Scalar>;
  using Vector = typename Problem::Vector;
  const Problem problem(N, K, options.period, p.value());

  Vector best_c;
  Scalar best_log_q = -std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> best_trace;
  int best_restart = 0;
  int total_iterations = 0;
  bool all_converged = true;

  for (int r = 0; r < options.restarts; ++r) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * std::uint64_t(r + 1));
    std::normal_distribution<Scalar> normal(0, 1);
    Vector c(2 * K);
    for (int k = 1; k <= K; ++k) {
      c(k - 1) = normal(rng) / Scalar(k * k);
      c(K + k - 1) = normal(rng) / Scalar(k * k);
    }
    c.normalize();
    Scalar log_q = problem.log_quotient(c);
    std::vector<Scalar> trace;
    bool converged = false;
    int it = 0;
    for (; it < budget && !converged; ++it) {
      const Vector d = problem.ascent_direction(c);
      const Scalar dnorm = d.norm();
      if (!(dnorm > 0)) {
        converged = true;
        break;
      }
      Scalar step = options.initial_step;
      bool improved = false;
      while (step >= options.min_step) {
        Vector trial = c + (step / dnorm) * d;
        trial.normalize();
        const Scalar trial_log_q = problem.log_quotient(trial);
        if (trial_log_q > log_q) {
          converged = trial_log_q - log_q < options.improvement_floor;
          c = trial;
          log_q = trial_log_q;
          improved = true;
          break;
        }
        step /= 2;
      }
      if (!improved) converged = true;
      trace.push_back(std::exp(log_q));
    }
    total_iterations += it;
    all_converged = all_converged && converged;
    if (log_q > best_log_q) {
      best_log_q = log_q;
      best_c = c;
      best_trace = std::move(trace);
      best_restart = r;
    }
  }

  typename PeriodicGridFunction<Scalar>::Samples s = problem.samples(best_c);
  // Unit time-L^p mean, so reports computed on u* are O(1).
  const Scalar scale = std::pow(lp_power(s, p.value()) / Scalar(N), Scalar(1) / p.value());
  s /= scale;
  PeriodicGridFunction<Scalar> u(std::move(s), options.period);
  return {std::move(u), std::exp(best_log_q),
          all_converged ? SearchStatus::converged : SearchStatus::converged_low_confidence, total_iterations,
          best_restart, std::move(best_trace)};
}

} // namespace periodbounds

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <map>
#include <optional>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "periodbounds/constants.hpp"
#include "periodbounds/errors.hpp"
#include "periodbounds/lp.hpp"
#include "periodbounds/parallel.hpp"

namespace periodbounds {

template <typename Scalar = double>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar = double>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Finite atom space (M, mu): L^p(M, mu) becomes a weighted l^p space.
template <typename Scalar = double>
struct FiniteMeasureSpace {
  Vector<Scalar> weights;
  std::vector<std::string> labels;
  std::vector<Eigen::Index> A;
  std::vector<Eigen::Index> B;

  FiniteMeasureSpace(Vector<Scalar> w, std::vector<Eigen::Index> a, std::vector<Eigen::Index> b,
                     std::vector<std::string> names = {})
      : weights(std::move(w)), labels(std::move(names)), A(std::move(a)), B(std::move(b)) {
    if (weights.size() == 0) throw DomainError("measure space needs at least one atom");
    if (!(weights.array() > 0).all() || !weights.allFinite()) throw DomainError("atom weights must be positive");
    if (labels.empty()) {
      for (Eigen::Index i = 0; i < weights.size(); ++i) labels.push_back("atom" + std::to_string(i));
    }
    if (Eigen::Index(labels.size()) != weights.size()) throw DomainError("one label per atom required");
    auto check = [this](const std::vector<Eigen::Index> &set) {
      for (auto i : set) {
        if (i < 0 || i >= weights.size()) throw DomainError("subset index out of range");
      }
    };
    check(A);
    check(B);
    for (auto i : A) {
      if (std::find(B.begin(), B.end(), i) != B.end()) throw DomainError("subsets A and B must be disjoint");
    }
  }

  Scalar measure(const std::vector<Eigen::Index> &set) const {
    Scalar m = 0;
    for (auto i : set) m += weights(i);
    return m;
  }
  Eigen::Index atoms() const { return weights.size(); }
};

enum class FieldKind { planar_rotation, linear, remark1_averaging };

inline const char *to_string(FieldKind k) {
  switch (k) {
  case FieldKind::planar_rotation: return "planar_rotation";
  case FieldKind::linear: return "linear";
  case FieldKind::remark1_averaging: return "remark1_averaging";
  }
  return "unknown";
}

/// A built-in vector field f(x) = M x together with the norm it is measured in.
///
/// Every built-in is linear; the norm is the weighted l^p norm with unit
/// weights except for remark1_averaging, which uses the atom masses.
template <typename Scalar = double>
struct FieldSpec {
  FieldKind kind;
  Matrix<Scalar> matrix;
  Vector<Scalar> weights;
  PExponent<Scalar> p;
  std::optional<Scalar> nominal_L;
  std::optional<FiniteMeasureSpace<Scalar>> space; ///< set for remark1_averaging

  Eigen::Index dimension() const { return matrix.rows(); }
  Vector<Scalar> operator()(const Vector<Scalar> &x) const { return matrix * x; }
  Scalar norm(const Vector<Scalar> &x) const { return weighted_lp_norm(x, weights, p.value()); }
};

template <typename Scalar>
FieldSpec<Scalar> planar_rotation(Scalar L, const PExponent<Scalar> &p) {
  if (!(L > 0) || !std::isfinite(double(L))) throw DomainError("rotation rate L must be positive and finite");
  Matrix<Scalar> m(2, 2);
  m << 0, L, -L, 0;
  return {FieldKind::planar_rotation, m, Vector<Scalar>::Ones(2), p, L, std::nullopt};
}

template <typename Scalar>
FieldSpec<Scalar> linear_field(Matrix<Scalar> m, const PExponent<Scalar> &p) {
  if (m.rows() == 0 || m.rows() != m.cols()) throw DomainError("linear field needs a non-empty square matrix");
  if (!m.allFinite()) throw DomainError("linear field matrix must be finite");
  std::optional<Scalar> nominal;
  if (p.value() == Scalar(2)) nominal = Eigen::JacobiSVD<Matrix<Scalar>>(m).singularValues()(0);
  const auto n = m.rows();
  return {FieldKind::linear, std::move(m), Vector<Scalar>::Ones(n), p, nominal, std::nullopt};
}

/// f(z)_i = -mu(A)^{-1} int_A z dmu on B, +mu(B)^{-1} int_B z dmu on A, 0 elsewhere.
template <typename Scalar>
FieldSpec<Scalar> remark1_averaging(const FiniteMeasureSpace<Scalar> &space, const PExponent<Scalar> &p) {
  if (space.A.empty() || space.B.empty()) throw DomainError("remark1 field needs non-empty A and B");
  const Scalar mu_a = space.measure(space.A);
  const Scalar mu_b = space.measure(space.B);
  const auto n = space.atoms();
  Matrix<Scalar> m = Matrix<Scalar>::Zero(n, n);
  for (auto i : space.B) {
    for (auto j : space.A) m(i, j) = -space.weights(j) / mu_a;
  }
  for (auto i : space.A) {
    for (auto j : space.B) m(i, j) = space.weights(j) / mu_b;
  }
  std::optional<Scalar> nominal;
  if (mu_a == mu_b) nominal = Scalar(1);
  return {FieldKind::remark1_averaging, std::move(m), space.weights, p, nominal, space};
}

namespace detail {

inline std::vector<std::string> split(const std::string &text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

template <typename Scalar>
Scalar parse_number(const std::string &text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw DomainError("bad number '" + text + "'");
    return Scalar(v);
  } catch (const std::logic_error &) {
    throw DomainError("bad number '" + text + "'");
  }
}

template <typename Scalar>
std::vector<Scalar> parse_list(const std::string &text) {
  std::vector<Scalar> out;
  for (const auto &item : split(text, ',')) out.push_back(parse_number<Scalar>(item));
  return out;
}

inline const std::string &require(const std::map<std::string, std::string> &params, const std::string &key) {
  const auto it = params.find(key);
  if (it == params.end()) throw DomainError("missing field parameter '" + key + "'");
  return it->second;
}

} // namespace detail

/// Builds a field from its kind name and string parameters:
///   rotation:  L=<rate>
///   linear:    matrix=<r00>,<r01>;<r10>,<r11>   (rows separated by ';')
///   remark1:   weights=<mu_0>,...  A=<i>,...  B=<j>,...  [labels=<name>,...]
template <typename Scalar>
FieldSpec<Scalar> builtin_field(const std::string &kind, const std::map<std::string, std::string> &params,
                                const PExponent<Scalar> &p) {
  if (kind == "rotation" || kind == "planar_rotation") {
    return planar_rotation(detail::parse_number<Scalar>(detail::require(params, "L")), p);
  }
  if (kind == "linear") {
    const auto rows = detail::split(detail::require(params, "matrix"), ';');
    Matrix<Scalar> m(Eigen::Index(rows.size()), Eigen::Index(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto values = detail::parse_list<Scalar>(rows[r]);
      if (values.size() != rows.size()) throw DomainError("linear field matrix must be square");
      for (std::size_t c = 0; c < values.size(); ++c) m(Eigen::Index(r), Eigen::Index(c)) = values[c];
    }
    return linear_field(std::move(m), p);
  }
  if (kind == "remark1" || kind == "remark1_averaging") {
    const auto w = detail::parse_list<Scalar>(detail::require(params, "weights"));
    auto indices = [&](const std::string &key) {
      std::vector<Eigen::Index> out;
      for (auto v : detail::parse_list<double>(detail::require(params, key))) {
        if (v != std::floor(v)) throw DomainError("subset " + key + " needs integer atom indices");
        out.push_back(Eigen::Index(v));
      }
      return out;
    };
    std::vector<std::string> labels;
    if (auto it = params.find("labels"); it != params.end()) labels = detail::split(it->second, ',');
    FiniteMeasureSpace<Scalar> space(Eigen::Map<const Vector<Scalar>>(w.data(), Eigen::Index(w.size())),
                                     indices("A"), indices("B"), labels);
    return remark1_averaging(space, p);
  }
  throw DomainError("unknown field kind '" + kind + "' (rotation, linear, remark1)");
}

/// Default starting point: (1, 0, ...) for rotation and linear fields, -chi_A for remark1
/// (the t = 0 state of z(t) = -cos(t) chi_A + sin(t) chi_B).
template <typename Scalar>
Vector<Scalar> default_initial_state(const FieldSpec<Scalar> &f) {
  Vector<Scalar> x = Vector<Scalar>::Zero(f.dimension());
  if (f.space) {
    for (auto i : f.space->A) x(i) = -1;
  } else {
    x(0) = 1;
  }
  return x;
}

/// Classical fourth-order Runge-Kutta step.
template <typename Scalar>
Vector<Scalar> rk4_step(const FieldSpec<Scalar> &f, const Vector<Scalar> &x, Scalar h) {
  const Vector<Scalar> k1 = f(x);
  const Vector<Scalar> k2 = f(x + (h / 2) * k1);
  const Vector<Scalar> k3 = f(x + (h / 2) * k2);
  const Vector<Scalar> k4 = f(x + h * k3);
  return x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Fixed-step RK4 trajectory; row k is the state at t = k dt (steps + 1 rows).
template <typename Scalar>
Matrix<Scalar> integrate(const FieldSpec<Scalar> &f, const Vector<Scalar> &x0, Scalar dt, long steps) {
  if (!(dt > 0)) throw DomainError("integration step dt must be positive");
  if (steps < 1) throw DomainError("integration needs at least one step");
  if (x0.size() != f.dimension()) throw DomainError("initial state has the wrong dimension");
  Matrix<Scalar> traj(steps + 1, f.dimension());
  Vector<Scalar> x = x0;
  traj.row(0) = x.transpose();
  for (long k = 1; k <= steps; ++k) {
    x = rk4_step(f, x, dt);
    if (!x.allFinite()) throw ConvergenceError("integration produced a non-finite state at step " + std::to_string(k));
    traj.row(k) = x.transpose();
  }
  return traj;
}

/// State at time t reached with steps of at most dt.
template <typename Scalar>
Vector<Scalar> flow(const FieldSpec<Scalar> &f, const Vector<Scalar> &x0, Scalar t, Scalar dt) {
  const long steps = std::max(1L, static_cast<long>(std::ceil(t / dt)));
  const Scalar h = t / Scalar(steps);
  Vector<Scalar> x = x0;
  for (long k = 0; k < steps; ++k) x = rk4_step(f, x, h);
  return x;
}

class NoPeriodFound : public ConvergenceError {
public:
  NoPeriodFound() : ConvergenceError("no_period_found") {}
};

template <typename Scalar = double>
struct PeriodOptions {
  Scalar tol = Scalar(1e-6);      ///< closure tolerance on ||x(T) - x0||
  Scalar T_max = 0;               ///< 0: 8 * (2 pi / L), L nominal or the spectral norm
  Scalar dt = 0;                  ///< 0: T_guess / 1e4
  Scalar refine_tol = Scalar(1e-12);
  int max_divisor = 16;
};

template <typename Scalar = double>
struct PeriodResult {
  Scalar T;
  Scalar closure;   ///< ||x(T) - x0|| in the field norm
  Scalar dt;
  int divisor;      ///< k > 1 when a first candidate was replaced by T/k
};

namespace detail {

template <typename Scalar>
Scalar guess_period(const FieldSpec<Scalar> &f) {
  Scalar L = f.nominal_L.value_or(Scalar(0));
  if (!(L > 0)) L = Eigen::JacobiSVD<Matrix<Scalar>>(f.matrix).singularValues()(0);
  if (!(L > 0)) throw NoPeriodFound();
  return 2 * std::numbers::pi_v<Scalar> / L;
}

} // namespace detail

/// Smallest T in (0, T_max] with ||x(T) - x0|| <= tol.
///
/// Scans the RK4 trajectory for local minima of the closure distance, refines
/// each by bisection on d/dt |x(t) - x0|^2 / 2 (to refine_tol) and accepts the
/// first whose refined closure meets tol. Divisors T/k are then tested so a
/// k-fold multiple is never reported.
template <typename Scalar>
PeriodResult<Scalar> detect_period(const FieldSpec<Scalar> &f, const Vector<Scalar> &x0,
                                   const PeriodOptions<Scalar> &options = {}) {
  if (x0.size() != f.dimension()) throw DomainError("initial state has the wrong dimension");
  if (!(f.norm(f(x0)) > 0)) throw DomainError("x0 is an equilibrium: the orbit is constant");
  const bool need_guess = !(options.dt > 0) || !(options.T_max > 0);
  const Scalar T_guess = need_guess ? detail::guess_period(f) : options.T_max;
  const Scalar dt = options.dt > 0 ? options.dt : T_guess / Scalar(1e4);
  const Scalar T_max = options.T_max > 0 ? options.T_max : 8 * T_guess;
  const long steps = static_cast<long>(std::ceil(T_max / dt));

  auto closure = [&](const Vector<Scalar> &x) { return f.norm(x - x0); };
  // Derivative of |x(t) - x0|_2^2 / 2 along the flow.
  auto slope = [&](const Vector<Scalar> &x) { return (x - x0).dot(f(x)); };

  Vector<Scalar> prev = x0;
  Vector<Scalar> cur = rk4_step(f, x0, dt);
  Scalar d_prev = 0;
  Scalar d_cur = closure(cur);
  std::optional<Scalar> found;
  Scalar found_closure = 0;

  for (long k = 2; k <= steps && !found; ++k) {
    Vector<Scalar> next = rk4_step(f, cur, dt);
    if (!next.allFinite()) throw ConvergenceError("integration produced a non-finite state at step " + std::to_string(k));
    const Scalar d_next = closure(next);
    if (k >= 3 && d_cur <= d_prev && d_cur <= d_next) {
      // Local minimum at step k-1; bracket [t_{k-2}, t_k] starting from prev.
      const Scalar t0 = Scalar(k - 2) * dt;
      Scalar lo = 0, hi = 2 * dt;
      auto state = [&](Scalar tau) { return tau == 0 ? prev : Vector<Scalar>(rk4_step(f, prev, tau)); };
      if (slope(state(lo)) <= 0 && slope(state(hi)) >= 0) {
        while (hi - lo > options.refine_tol) {
          const Scalar mid = lo + (hi - lo) / 2;
          if (slope(state(mid)) < 0) lo = mid;
          else hi = mid;
        }
      } else {
        lo = hi = dt;
      }
      const Scalar tau = lo + (hi - lo) / 2;
      const Scalar c = closure(state(tau));
      if (c <= options.tol) {
        found = t0 + tau;
        found_closure = c;
      }
    }
    prev = cur;
    cur = next;
    d_prev = d_cur;
    d_cur = d_next;
  }
  if (!found) throw NoPeriodFound();

  Scalar T = *found;
  int divisor = 1;
  for (int k = options.max_divisor; k >= 2; --k) {
    if (T / Scalar(k) <= 2 * dt) continue;
    const Scalar c = closure(flow(f, x0, T / Scalar(k), dt));
    if (c <= options.tol) {
      T /= Scalar(k);
      divisor *= k;
      found_closure = c;
      break;
    }
  }
  return {T, found_closure, dt, divisor};
}

/// Pair cloud for the sampled Lipschitz estimate.
template <typename Scalar = double>
struct LipschitzSampling {
  Matrix<Scalar> centers; ///< rows are base points (e.g. orbit samples)
  Scalar radius = 1;      ///< tube radius around the centers
  long pairs = 20000;
};

namespace detail {

inline constexpr long kPairBlock = 1024;

// Ratio for pair `index`; pairs of block b come from an RNG seeded with (seed, b)
// so any prefix of pairs is the same regardless of worker count.
template <typename Scalar>
void sample_block(const FieldSpec<Scalar> &f, const LipschitzSampling<Scalar> &cloud, std::uint64_t seed, long block,
                  long end, Scalar &best, long &valid) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(block)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<Scalar> normal(0, 1);
  std::uniform_real_distribution<Scalar> unit(0, 1);
  const Eigen::Index n = f.dimension();
  const Eigen::Index m = cloud.centers.rows();
  auto gaussian = [&] {
    Vector<Scalar> g(n);
    for (Eigen::Index i = 0; i < n; ++i) g(i) = normal(rng);
    return g;
  };
  auto center = [&] {
    return Vector<Scalar>(cloud.centers.row(std::min<Eigen::Index>(m - 1, Eigen::Index(unit(rng) * Scalar(m)))).transpose());
  };
  for (long index = block * kPairBlock; index < end; ++index) {
    Vector<Scalar> x, y;
    if (index < n) {
      // Coordinate directions first: they attain the norm of diagonal and atom-swap maps.
      x = cloud.centers.row(0).transpose();
      y = x;
      y(index) += cloud.radius > 0 ? cloud.radius : Scalar(1);
    } else if (index % 2 == 0) {
      x = center() + (cloud.radius * Scalar(0.1)) * gaussian();
      y = center() + (cloud.radius * Scalar(0.1)) * gaussian();
    } else {
      x = center() + cloud.radius * gaussian();
      y = x + (cloud.radius * unit(rng)) * gaussian();
    }
    const Scalar dx = f.norm(x - y);
    if (!(dx > 0)) continue;
    ++valid;
    best = std::max(best, f.norm(f(x) - f(y)) / dx);
  }
}

} // namespace detail

/// Sampled sup of ||f(x) - f(y)|| / ||x - y|| over the cloud: a lower bound on the true L.
template <typename Scalar>
Scalar estimate_lipschitz(const FieldSpec<Scalar> &f, const LipschitzSampling<Scalar> &cloud, std::uint64_t seed) {
  if (cloud.centers.rows() == 0 || cloud.centers.cols() != f.dimension()) {
    throw DomainError("sampling cloud needs centers of the field dimension");
  }
  if (cloud.pairs < 10000) throw DomainError("sampling cloud needs at least 1e4 pairs");
  if (!(cloud.radius >= 0)) throw DomainError("sampling radius must be non-negative");
  if (cloud.radius == 0 && (cloud.centers.rowwise() - cloud.centers.row(0)).cwiseAbs().maxCoeff() == 0) {
    throw DomainError("degenerate sampling cloud: all points coincide");
  }
  const long blocks = (cloud.pairs + detail::kPairBlock - 1) / detail::kPairBlock;
  std::vector<Scalar> best(static_cast<std::size_t>(blocks), Scalar(0));
  std::vector<long> valid(static_cast<std::size_t>(blocks), 0);
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const long end = std::min(cloud.pairs, long(b + 1) * detail::kPairBlock);
    detail::sample_block(f, cloud, seed, long(b), end, best[b], valid[b]);
  });
  long total_valid = 0;
  for (auto v : valid) total_valid += v;
  if (total_valid == 0) throw DomainError("degenerate sampling cloud: all pairs coincide");
  return *std::max_element(best.begin(), best.end());
}

/// Bounds on the operator norm of a linear field in its own norm.
template <typename Scalar = double>
struct OperatorNormBounds {
  Scalar upper;                 ///< Riesz-Thorin: ||M||_1^(1/p) ||M||_inf^(1 - 1/p)
  std::optional<Scalar> exact;  ///< largest singular value when p = 2
};

template <typename Scalar>
OperatorNormBounds<Scalar> operator_norm_bounds(const FieldSpec<Scalar> &f) {
  const Scalar p = f.p.value();
  // Weighted l^p norm of x is the plain l^p norm of D x, D = diag(w^(1/p)).
  const Vector<Scalar> d = f.weights.array().pow(Scalar(1) / p);
  const Matrix<Scalar> m = d.asDiagonal() * f.matrix * d.cwiseInverse().asDiagonal();
  const Scalar norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  const Scalar norm_inf = m.cwiseAbs().rowwise().sum().maxCoeff();
  OperatorNormBounds<Scalar> out{std::pow(norm1, Scalar(1) / p) * std::pow(norm_inf, Scalar(1) - Scalar(1) / p), {}};
  if (p == Scalar(2)) out.exact = Eigen::JacobiSVD<Matrix<Scalar>>(m).singularValues()(0);
  return out;
}

template <typename Scalar = double>
struct BoundCheck {
  std::string name;
  Scalar value;
  bool satisfied;
};

template <typename Scalar = double>
struct CertifyOptions {
  Scalar tol_cert = Scalar(1e-3);
  PeriodOptions<Scalar> period{};
  long pairs = 20000;
  std::uint64_t seed = 0;
  Eigen::Index orbit_centers = 256;
};

template <typename Scalar = double>
struct OrbitCertificate {
  Scalar period_T;
  Scalar lipschitz_hat;
  Scalar TL;
  std::vector<BoundCheck<Scalar>> bounds;
  Scalar tol_cert;
  Scalar closure;
  Scalar dt;
  Scalar richardson_delta; ///< |T(dt) - T(dt/2)|
  OperatorNormBounds<Scalar> operator_norm;
};

/// Period, sampled Lipschitz constant and the TL lower-bound comparisons for one orbit.
template <typename Scalar>
OrbitCertificate<Scalar> certify_orbit(const FieldSpec<Scalar> &f, const Vector<Scalar> &x0,
                                       const CertifyOptions<Scalar> &options = {}) {
  const auto period = detect_period(f, x0, options.period);
  PeriodOptions<Scalar> half = options.period;
  half.dt = period.dt / 2;
  half.T_max = options.period.T_max > 0 ? options.period.T_max : 8 * detail::guess_period(f);
  const auto refined = detect_period(f, x0, half);

  // Orbit tube: evenly spaced states over one period.
  const Eigen::Index m = std::max<Eigen::Index>(2, options.orbit_centers);
  Matrix<Scalar> centers(m, f.dimension());
  Vector<Scalar> x = x0;
  const Scalar h = period.T / Scalar(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    centers.row(i) = x.transpose();
    x = flow(f, x, h, period.dt);
  }
  Scalar scale = 0;
  for (Eigen::Index i = 0; i < m; ++i) scale = std::max(scale, f.norm(centers.row(i).transpose()));
  LipschitzSampling<Scalar> cloud{centers, scale > 0 ? Scalar(0.1) * scale : Scalar(1), options.pairs};
  const Scalar L = estimate_lipschitz(f, cloud, options.seed);
  const Scalar TL = period.T * L;

  std::vector<BoundCheck<Scalar>> bounds;
  auto add = [&](std::string name, Scalar value) {
    bounds.push_back({std::move(name), value, TL >= value - options.tol_cert});
  };
  add("banach_6", Scalar(6));
  if (f.p.value() == Scalar(2)) add("hilbert_2pi", 2 * std::numbers::pi_v<Scalar>);
  add("wirtinger_cp_inverse", compute_cp(f.p).c_p_inverse);
  return {period.T, L, TL, std::move(bounds), options.tol_cert, period.closure, period.dt,
          std::abs(period.T - refined.T), operator_norm_bounds(f)};
}

} // namespace periodbounds

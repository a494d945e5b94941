#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "periodbounds/errors.hpp"
#include "periodbounds/quadrature.hpp"

namespace periodbounds {

/// A Lebesgue exponent p in (1, inf) paired with its Hölder conjugate.
template <typename Scalar = double>
class PExponent {
public:
  explicit PExponent(Scalar p) : p_(p) {
    if (!std::isfinite(double(p)) || !(p > Scalar(1))) {
      throw DomainError("exponent p must be finite and > 1, got " + std::to_string(double(p)));
    }
    inv_conjugate_ = (p - Scalar(1)) / p;
    conjugate_ = p / (p - Scalar(1));
  }

  Scalar value() const { return p_; }
  Scalar conjugate() const { return conjugate_; }
  /// 1/p' = (p-1)/p, computed without going through p'.
  Scalar inverse_conjugate() const { return inv_conjugate_; }
  PExponent conjugate_exponent() const { return PExponent(conjugate_); }

private:
  Scalar p_;
  Scalar conjugate_;
  Scalar inv_conjugate_;
};

enum class ConstantMethod { closed_form, quadrature };

inline const char *to_string(ConstantMethod m) {
  return m == ConstantMethod::closed_form ? "closed_form" : "quadrature";
}

/// Sharp constant of the periodic L^p Wirtinger inequality on a unit period.
template <typename Scalar = double>
struct WirtingerConstant {
  PExponent<Scalar> p;
  Scalar c_p;
  Scalar c_p_inverse;
  ConstantMethod method;
};

namespace detail {

template <typename Scalar>
void reject_degenerate(const PExponent<Scalar> &p) {
  if (p.value() - Scalar(1) < Scalar(1e-9)) {
    throw DomainError("exponent p within 1e-9 of 1: the Wirtinger constant degenerates");
  }
}

// p / (4 (p-1)^(1/p)): the prefactor shared by both evaluation routes.
template <typename Scalar>
Scalar cp_prefactor(const PExponent<Scalar> &p) {
  const Scalar q = p.value();
  return q / (Scalar(4) * std::exp(std::log(q - Scalar(1)) / q));
}

} // namespace detail

/// C_p through the Gamma reflection form of the beta integral:
/// B(1/p', 1/p) = pi / sin(pi/p), so C_p = p sin(pi/p) / (4 pi (p-1)^(1/p)).
template <typename Scalar>
WirtingerConstant<Scalar> compute_cp(const PExponent<Scalar> &p) {
  detail::reject_degenerate(p);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  // sin(pi/p) == sin(pi/p'); use the smaller argument for accuracy near p = 1.
  const Scalar s = std::sin(pi * std::min(Scalar(1) / p.value(), p.inverse_conjugate()));
  const Scalar beta = pi / s;
  const Scalar c = detail::cp_prefactor(p) / beta;
  return {p, c, beta / detail::cp_prefactor(p), ConstantMethod::closed_form};
}

template <typename Scalar>
WirtingerConstant<Scalar> compute_cp(Scalar p) {
  return compute_cp(PExponent<Scalar>(p));
}

/// Beta integral int_0^1 t^(-1/p) (1-t)^(1/p - 1) dt evaluated numerically.
///
/// Split at t = 1/2. On the left t = s^(p') removes the t^(-1/p) singularity,
/// on the right 1 - t = s^p removes the (1-t)^(1/p-1) one; both transformed
/// integrands are bounded and smooth on their closed intervals.
template <typename Scalar>
QuadratureResult<Scalar> beta_integral(const PExponent<Scalar> &p, Scalar abs_tol) {
  const Scalar q = p.value();
  const Scalar qc = p.conjugate();
  const Scalar inv_q = Scalar(1) / q;
  const Scalar half = Scalar(0.5);

  auto left = [&](Scalar s) { return qc * std::pow(Scalar(1) - std::pow(s, qc), inv_q - Scalar(1)); };
  auto right = [&](Scalar s) { return q * std::pow(Scalar(1) - std::pow(s, q), -inv_q); };

  const auto l = integrate_adaptive(left, Scalar(0), std::pow(half, p.inverse_conjugate()), abs_tol / 2);
  const auto r = integrate_adaptive(right, Scalar(0), std::pow(half, inv_q), abs_tol / 2);
  return {l.value + r.value, l.error_estimate + r.error_estimate, l.intervals + r.intervals};
}

/// C_p by direct quadrature of its defining integral; independent of compute_cp.
template <typename Scalar>
WirtingerConstant<Scalar> cp_quadrature(const PExponent<Scalar> &p, Scalar tol) {
  if (!(tol > 0) || tol > Scalar(1e-4)) {
    throw DomainError("quadrature tolerance must lie in (0, 1e-4]");
  }
  detail::reject_degenerate(p);
  const Scalar pref = detail::cp_prefactor(p);
  // |dC| = C^2 / pref * |dB|, and C <= 1/(2 pi): a beta tolerance of
  // tol * pref * (2 pi)^2 keeps the error in C_p below tol.
  const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  const Scalar beta_tol = Scalar(0.1) * tol * pref * two_pi * two_pi;
  const auto beta = beta_integral(p, beta_tol);
  return {p, pref / beta.value, beta.value / pref, ConstantMethod::quadrature};
}

template <typename Scalar>
Scalar cp_inverse(Scalar p) {
  return compute_cp(PExponent<Scalar>(p)).c_p_inverse;
}

/// The p-interval on which C_p^{-1} exceeds a threshold.
template <typename Scalar = double>
struct SupercriticalRange {
  Scalar p_low;
  Scalar p_high;
  Scalar threshold;
};

namespace detail {

template <typename Scalar, typename F>
Scalar bisect_root(F &&g, Scalar lo, Scalar hi, Scalar tol) {
  Scalar g_lo = g(lo);
  while (hi - lo > tol) {
    const Scalar mid = lo + (hi - lo) / 2;
    const Scalar g_mid = g(mid);
    if ((g_mid > 0) == (g_lo > 0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2;
}

} // namespace detail

/// Roots of C_p^{-1}(p) = threshold on either side of the maximum at p = 2.
///
/// Brackets are seeded by a 0.01 scan outward from p = 2 (geometric growth on
/// the right once p > 4, where the crossing can sit at very large p) and then
/// refined by bisection to 1e-10.
template <typename Scalar = double>
SupercriticalRange<Scalar> supercritical_range(Scalar threshold) {
  const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  if (!(threshold < two_pi)) {
    throw DomainError("threshold >= 2*pi: C_p^{-1} never exceeds it (maximum 2*pi at p = 2)");
  }
  if (!(threshold > Scalar(4))) {
    throw DomainError("threshold <= 4: the supercritical set is unbounded (C_p^{-1} -> 4 at both ends)");
  }
  auto g = [threshold](Scalar p) { return cp_inverse(p) - threshold; };
  const Scalar step(0.01);
  const Scalar bisect_tol(1e-10);

  Scalar inner = 2;
  Scalar outer = 2 - step;
  const Scalar p_floor = 1 + Scalar(2e-9);
  while (outer > p_floor && g(outer) > 0) {
    inner = outer;
    outer -= step;
  }
  if (outer <= p_floor) {
    outer = p_floor;
    if (g(outer) > 0) throw DomainError("lower crossing lies within 1e-9 of p = 1");
  }
  const Scalar p_low = detail::bisect_root(g, outer, inner, bisect_tol);

  inner = 2;
  outer = 2 + step;
  while (g(outer) > 0) {
    inner = outer;
    outer = outer < Scalar(4) ? outer + step : outer * 2;
    if (!std::isfinite(double(outer))) throw DomainError("upper crossing not bracketed");
  }
  // Relative tolerance when the crossing sits at large p.
  const Scalar p_high = detail::bisect_root(g, inner, outer, bisect_tol * std::max(Scalar(1), inner));
  return {p_low, p_high, threshold};
}

template <typename Scalar = double>
struct SymmetryReport {
  Scalar c_p;
  Scalar c_p_conjugate;
  Scalar abs_diff;
};

template <typename Scalar>
SymmetryReport<Scalar> conjugate_symmetry_check(const PExponent<Scalar> &p) {
  const Scalar a = compute_cp(p).c_p;
  const Scalar b = compute_cp(p.conjugate_exponent()).c_p;
  return {a, b, std::abs(a - b)};
}

/// Lower bound on TL in a space whose norm is (1 +- eps)-equivalent to a Hilbert norm.
template <typename Scalar = double>
Scalar remark2_bound(Scalar eps) {
  if (!(eps >= 0) || !(eps < 1)) {
    throw DomainError("eps must lie in [0, 1); the bound degenerates at eps >= 1");
  }
  return 2 * std::numbers::pi_v<Scalar> * (1 - eps) / ((1 + eps) * (1 + eps));
}

template <typename Scalar = double>
struct FigureRow {
  Scalar p;
  Scalar c_p_inverse;
};

/// Tabulates C_p^{-1} on p_min, p_min + step, ... (row count floor((p_max-p_min)/step) + 1).
template <typename Scalar = double>
std::vector<FigureRow<Scalar>> figure_data(Scalar p_min, Scalar p_max, Scalar step) {
  if (!(p_min > 1)) throw DomainError("figure grid must start above p = 1");
  if (!(p_max > p_min)) throw DomainError("figure grid needs p_max > p_min");
  if (!(step > 0)) throw DomainError("figure step must be positive");
  // The tiny guard keeps e.g. (4.0 - 1.05) / 0.01 = 294.99999... at 295 intervals.
  const auto intervals = static_cast<long>(std::floor((p_max - p_min) / step + Scalar(1e-9)));
  std::vector<FigureRow<Scalar>> rows;
  rows.reserve(static_cast<std::size_t>(intervals + 1));
  for (long i = 0; i <= intervals; ++i) {
    const Scalar p = p_min + Scalar(i) * step;
    rows.push_back({p, cp_inverse(p)});
  }
  return rows;
}

} // namespace periodbounds

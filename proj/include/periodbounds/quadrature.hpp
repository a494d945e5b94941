#pragma once

#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "periodbounds/errors.hpp"

namespace periodbounds {

template <typename Scalar>
struct QuadratureResult {
  Scalar value;
  Scalar error_estimate;
  int intervals;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes on [-1, 1] (positive half, centre last).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename Scalar>
struct Panel {
  Scalar a, b, value, error;
  bool operator<(const Panel &other) const { return error < other.error; }
};

template <typename Scalar, typename F>
Panel<Scalar> gauss_kronrod_panel(F &&f, Scalar a, Scalar b) {
  const Scalar centre = (a + b) / 2;
  const Scalar half = (b - a) / 2;
  const Scalar fc = f(centre);
  Scalar kronrod = fc * Scalar(kKronrodWeights[7]);
  Scalar gauss = fc * Scalar(kGaussWeights[3]);
  for (int i = 0; i < 7; ++i) {
    const Scalar dx = half * Scalar(kKronrodNodes[i]);
    const Scalar sum = f(centre - dx) + f(centre + dx);
    kronrod += Scalar(kKronrodWeights[i]) * sum;
    if (i % 2 == 1) gauss += Scalar(kGaussWeights[i / 2]) * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (7, 15) quadrature of a bounded integrand.
///
/// Bisects the panel with the largest error estimate until the summed estimate
/// is below abs_tol; throws ConvergenceError when max_panels is exhausted.
template <typename Scalar, typename F>
QuadratureResult<Scalar> integrate_adaptive(F &&f, Scalar a, Scalar b, Scalar abs_tol,
                                            int max_panels = 2000) {
  std::priority_queue<detail::Panel<Scalar>> panels;
  panels.push(detail::gauss_kronrod_panel(f, a, b));
  Scalar value = panels.top().value;
  Scalar error = panels.top().error;
  int count = 1;
  while (error > abs_tol) {
    if (count >= max_panels) {
      throw ConvergenceError("adaptive quadrature exceeded " + std::to_string(max_panels) +
                             " panels (error estimate " + std::to_string(double(error)) + ")");
    }
    const auto worst = panels.top();
    panels.pop();
    const Scalar mid = (worst.a + worst.b) / 2;
    const auto left = detail::gauss_kronrod_panel(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_panel(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++count;
  }
  // Re-sum to shed the drift of the incremental updates.
  value = 0;
  error = 0;
  while (!panels.empty()) {
    value += panels.top().value;
    error += panels.top().error;
    panels.pop();
  }
  return {value, error, count};
}

} // namespace periodbounds

// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "periodbounds/cli.hpp"
#include "periodbounds/constants.hpp"
#include "periodbounds/optimizer.hpp"
#include "periodbounds/orbits.hpp"
#include "periodbounds/pfunc.hpp"

using namespace periodbounds;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

int failures = 0;

void report(int id, bool ok, const std::string &what, const std::string &detail, double seconds) {
  std::printf("%s criterion %2d: %s [%s] (%.1f s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string tmp(const std::string &name) { return std::string(PERIODBOUNDS_TEST_TMP) + "/acceptance_" + name; }

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::vector<std::string> &args, std::string *out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (code != 0) std::printf("  cli error: %s", e.str().c_str());
  if (out) *out = o.str();
  return code;
}

template <typename F>
void timed(int id, const std::string &what, F &&body) {
  const auto start = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    ok = body(detail);
  } catch (const std::exception &e) {
    detail = std::string("exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(id, ok, what, detail, s);
}

struct RunFiles {
  std::string json_a, json_b, extra_a, extra_b;
};

// Artifacts of criteria 6 and 10, produced twice for criterion 12.
std::vector<RunFiles> rerun_pairs;

} // namespace

int main() {
  timed(1, "Hilbert constant C_2^{-1} = 2 pi to 1e-10", [](std::string &d) {
    const double err = std::abs(compute_cp(2.0).c_p_inverse - kTwoPi);
    d = fmt("|error| = %.3g", err);
    return err <= 1e-10;
  });

  timed(2, "supercritical range above 6", [](std::string &d) {
    double worst = 1e300;
    for (int i = 0; i <= 384; ++i) worst = std::min(worst, cp_inverse(1.43 + 0.005 * i));
    const auto r = supercritical_range(6.0);
    d = fmt("min on grid %.6f, p_low %.9f, p_high %.9f", worst, r.p_low, r.p_high);
    return worst > 6 && r.p_low > 1.41 && r.p_low < 1.43 && r.p_high > 3.35 && r.p_high < 3.40;
  });

  timed(3, "closed form vs quadrature on 50 log-spaced p in [1.01, 50]", [](std::string &d) {
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
      const double p = std::exp(std::log(1.01) + (std::log(50.0) - std::log(1.01)) * i / 49.0);
      const PExponent<double> e(p);
      worst = std::max(worst, std::abs(compute_cp(e).c_p - cp_quadrature(e, 1e-10).c_p));
    }
    d = fmt("max |diff| = %.3g", worst);
    return worst <= 1e-8;
  });

  timed(4, "conjugate symmetry on 100 random p", [](std::string &d) {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> log_p(std::log(1.01), std::log(100.0));
    double worst = 0;
    for (int i = 0; i < 100; ++i) worst = std::max(worst, conjugate_symmetry_check(PExponent<double>(std::exp(log_p(rng)))).abs_diff);
    d = fmt("max |C_p - C_p'| = %.3g", worst);
    return worst <= 1e-12;
  });

  timed(5, "figure table unimodal, max 2 pi at p = 2, crosses 6 at the roots", [](std::string &d) {
    std::string csv;
    if (run_cli({"figure", "--pmin", "1.05", "--pmax", "4.0", "--step", "0.01", "--out", tmp("figure.csv")}) != 0) return false;
    std::ifstream in(tmp("figure.csv"));
    std::string line;
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'p') continue;
      double p, v;
      if (std::sscanf(line.c_str(), "%lf,%lf", &p, &v) == 2) rows.emplace_back(p, v);
    }
    std::size_t peak = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].second > rows[peak].second) peak = i;
    bool unimodal = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const bool rising = rows[i].second > rows[i - 1].second;
      if ((i <= peak) != rising) unimodal = false;
    }
    const auto r = supercritical_range(6.0);
    int crossings = 0;
    bool at_roots = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if ((rows[i - 1].second > 6) == (rows[i].second > 6)) continue;
      ++crossings;
      const bool brackets = (rows[i - 1].first <= r.p_low && r.p_low <= rows[i].first) ||
                            (rows[i - 1].first <= r.p_high && r.p_high <= rows[i].first);
      at_roots = at_roots && brackets;
    }
    d = fmt("%g rows, peak at p = %.2f value %.11f, %g crossings of 6", double(rows.size()), rows[peak].first,
            rows[peak].second, double(crossings));
    return rows.size() == 296 && unimodal && std::abs(rows[peak].first - 2) < 1e-9 &&
           std::abs(rows[peak].second - kTwoPi) < 1e-10 && crossings == 2 && at_roots;
  });

  timed(6, "discrete extremal within 1% of C_p at N = 512; p = 2 sinusoid |corr| >= 0.999", [](std::string &d) {
    bool ok = true;
    std::string parts;
    for (const char *p : {"1.5", "2", "3"}) {
      RunFiles f{tmp(std::string("w") + p + "_a.json"), tmp(std::string("w") + p + "_b.json"),
                 tmp(std::string("w") + p + "_a.csv"), tmp(std::string("w") + p + "_b.csv")};
      for (int pass = 0; pass < 2; ++pass) {
        const auto &out = pass == 0 ? f.json_a : f.json_b;
        const auto &curve = pass == 0 ? f.extra_a : f.extra_b;
        if (run_cli({"wirtinger", "--p", p, "--N", "512", "--budget", "2000", "--seed", "7", "--out", out, "--curve-out", curve}) != 0)
          return false;
      }
      rerun_pairs.push_back(f);
      const auto doc = json::parse(slurp(f.json_a));
      const double ratio = doc["ratio_to_c_p"].get<double>();
      const double corr = doc["sinusoid_correlation"].get<double>();
      ok = ok && std::abs(ratio - 1) <= 0.01;
      if (std::string(p) == "2") ok = ok && std::abs(corr) >= 0.999;
      parts += std::string("p=") + p + fmt(" q*/C_p-1=%.2e corr=%.6f; ", ratio - 1, corr);
    }
    d = parts;
    return ok;
  });

  timed(7, "Wirtinger inequality on 100 random band-limited functions x p in {1.5, 2, 3}", [](std::string &d) {
    std::mt19937_64 rng(77);
    int held = 0, total = 0;
    double worst = -1e300;
    for (int i = 0; i < 100; ++i) {
      const auto u = random_band_limited<double>(512, 1 + i % 3, 1.0 + 0.25 * (i % 8), 1 + i % 16, rng);
      for (double p : {1.5, 2.0, 3.0}) {
        const auto w = wirtinger_check(u, PExponent<double>(p));
        ++total;
        held += w.holds;
        worst = std::max(worst, -w.slack / w.rhs);
      }
    }
    d = fmt("%g/%g hold, worst relative deficit %.3g", held, total, worst);
    return held == total;
  });

  timed(8, "double-integral ratio Q <= T/6 on random curves in R^3 and the unit circle", [](std::string &d) {
    std::mt19937_64 rng(88);
    int held = 0, total = 0;
    double worst_gap = 1e300;
    for (int i = 0; i < 100; ++i) {
      const auto y = random_band_limited<double>(256, 3, 0.5 + 0.05 * i, 1 + i % 8, rng);
      for (double p : {1.5, 2.0, 3.0}) {
        const auto r = lemma2_ratio(y, PExponent<double>(p));
        ++total;
        held += r.holds;
        worst_gap = std::min(worst_gap, r.gap / r.bound);
      }
    }
    const auto circle = PeriodicGridFunction<double>::sample(
        [](double t) { return Eigen::Vector2d(std::cos(t), std::sin(t)); }, 1024, 2, kTwoPi);
    const auto c = lemma2_ratio(circle, PExponent<double>(2.0));
    const double target = 16 * std::numbers::pi;
    d = fmt("%g/%g hold (min relative gap %.3f); circle Q = %.9f", held, total, worst_gap, c.Q) +
        fmt(", integrals %.6f / %.6f", c.position_integral, c.derivative_integral);
    return held == total && std::abs(c.Q - 1) <= 1e-3 && std::abs(c.position_integral - target) <= 1e-2 &&
           std::abs(c.derivative_integral - target) <= 1e-2;
  });

  timed(9, "orbit certificates: rotation and two-atom field", [](std::string &d) {
    const auto rot = certify_orbit(planar_rotation(1.0, PExponent<double>(2.0)), Eigen::VectorXd(Eigen::Vector2d(1, 0)));
    bool ok = std::abs(rot.period_T - kTwoPi) <= 1e-6 && std::abs(rot.lipschitz_hat - 1) <= 1e-12 &&
              std::abs(rot.TL - kTwoPi) <= 1e-4;
    for (const auto &b : rot.bounds) ok = ok && b.satisfied;
    ok = ok && rot.bounds.size() == 3 && rot.bounds[1].name == "hilbert_2pi" && std::abs(rot.TL - rot.bounds[1].value) <= 1e-4;
    d = fmt("rotation T-2pi=%.2e L-1=%.2e TL-2pi=%.2e;", rot.period_T - kTwoPi, rot.lipschitz_hat - 1, rot.TL - kTwoPi);
    for (double p : {1.5, 2.0, 3.0}) {
      Eigen::VectorXd w(2);
      w << 1, 1;
      const auto f = remark1_averaging(FiniteMeasureSpace<double>(w, {0}, {1}), PExponent<double>(p));
      const auto c = certify_orbit(f, default_initial_state(f));
      ok = ok && std::abs(c.TL - kTwoPi) <= 1e-4 && c.TL >= compute_cp(p).c_p_inverse;
      for (const auto &b : c.bounds) ok = ok && b.satisfied;
      d += fmt(" atoms p=%.1f TL-2pi=%.2e", p, c.TL - kTwoPi);
    }
    return ok;
  });

  timed(10, "optimizer brackets: p = 2 in [2pi-1e-3, 2pi+0.05], p in {1.5, 3} in [C_p^{-1}-1e-3, 2pi+0.05]",
        [](std::string &d) {
          bool ok = true;
          for (const char *p : {"2", "1.5", "3"}) {
            RunFiles f{tmp(std::string("o") + p + "_a.json"), tmp(std::string("o") + p + "_b.json"),
                       tmp(std::string("o") + p + "_a.csv"), tmp(std::string("o") + p + "_b.csv")};
            for (int pass = 0; pass < 2; ++pass) {
              const auto &out = pass == 0 ? f.json_a : f.json_b;
              const auto &trace = pass == 0 ? f.extra_a : f.extra_b;
              if (run_cli({"optimize", "--p", p, "--n", "2", "--K", "3", "--budget", "20000", "--seed", "1", "--out", out,
                       "--trace-out", trace}) != 0)
                return false;
            }
            rerun_pairs.push_back(f);
            const auto doc = json::parse(slurp(f.json_a));
            const double tl = doc["best_TL"].get<double>();
            const double pv = std::stod(p);
            const double floor = pv == 2 ? kTwoPi : compute_cp(pv).c_p_inverse;
            const double sound = pv == 2 ? kTwoPi : std::max(6.0, compute_cp(pv).c_p_inverse);
            ok = ok && tl >= floor - 1e-3 && tl <= kTwoPi + 0.05 && tl >= sound - 1e-3;
            d += std::string("p=") + p + fmt(" best_TL=%.6f (2pi%+.2e); ", tl, tl - kTwoPi);
          }
          return ok;
        });

  timed(11, "equivalent-norm bound: 2 pi at eps = 0, decreasing on [0, 0.9]", [](std::string &d) {
    bool decreasing = true;
    for (int i = 1; i <= 90; ++i) decreasing = decreasing && remark2_bound(0.01 * i) < remark2_bound(0.01 * (i - 1));
    d = fmt("bound(0) - 2pi = %.3g, bound(0.9) = %.6f", remark2_bound(0.0) - kTwoPi, remark2_bound(0.9));
    return remark2_bound(0.0) == kTwoPi && decreasing;
  });

  timed(12, "determinism: criteria 6 and 10 reruns are byte-identical", [](std::string &d) {
    int same = 0;
    for (const auto &f : rerun_pairs) {
      const auto a = slurp(f.json_a), b = slurp(f.json_b);
      const auto c = slurp(f.extra_a), e = slurp(f.extra_b);
      same += !a.empty() && a == b && !c.empty() && c == e;
    }
    d = fmt("%g/%g artifact pairs identical", same, double(rerun_pairs.size()));
    return rerun_pairs.size() == 6 && same == 6;
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}

#include "periodbounds/cli.hpp"

#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "periodbounds/io.hpp"

namespace periodbounds::cli {

namespace {

using nlohmann::json;

std::map<std::string, std::string> parse_params(const std::vector<std::string> &items) {
  std::map<std::string, std::string> out;
  for (const auto &item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw DomainError("field parameter '" + item + "' is not key=value");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

Vector<double> parse_point(const std::string &text, Eigen::Index dimension) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      values.push_back(std::stod(cell));
    } catch (const std::exception &) {
      throw DomainError("bad coordinate '" + cell + "' in --x0");
    }
  }
  if (Eigen::Index(values.size()) != dimension) {
    throw DomainError("--x0 needs " + std::to_string(dimension) + " coordinates");
  }
  return Eigen::Map<Vector<double>>(values.data(), dimension);
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

// Writes the artifact to --out when given (echoing `summary`), else prints it.
void emit(std::ostream &out, const std::string &path, const std::string &artifact, const std::string &summary) {
  if (path.empty()) {
    out << artifact;
  } else {
    io::write_text_file(path, artifact);
    out << summary;
  }
}

struct Options {
  std::string out_path;
  double p = 2;
  double tol = 1e-10;
  double pmin = 1.05, pmax = 4.0, step = 0.01;
  double threshold = 6;
  long N = 512;
  int budget = 2000;
  long opt_budget = 20000;
  std::uint64_t seed = 1;
  std::string curve_file;
  std::string field = "rotation";
  std::vector<std::string> params;
  std::string x0;
  double dt = 1e-3;
  long steps = 6284;
  long pairs = 20000;
  long n = 2;
  int K = 3;
  double eps = 0;
  std::string trace_out;
  std::string curve_out;
};

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Sharp Wirtinger constants, T*L lower-bound checks and minimal-TL orbit search"};
  app.set_config("--config", "", "optional config file (same keys as flags; flags win)");
  app.set_version_flag("--version", io::kToolVersion);
  app.require_subcommand(1);
  Options o;
  std::function<void()> action;

  auto add_out = [&](CLI::App *sub) { sub->add_option("--out", o.out_path, "artifact path (default: stdout)"); };
  auto positive_p = [&](CLI::App *sub, bool required) {
    auto *opt = sub->add_option("--p", o.p, "Lebesgue exponent p in (1, inf)");
    if (required) opt->required();
  };

  auto *constants = app.add_subcommand("constants", "sharp Wirtinger constant C_p and cross-checks");
  positive_p(constants, true);
  constants->add_option("--tol", o.tol, "quadrature tolerance (0, 1e-4]");
  add_out(constants);
  constants->callback([&] {
    action = [&] {
      const PExponent<double> p(o.p);
      const auto closed = compute_cp(p);
      const auto quad = cp_quadrature(p, o.tol);
      const auto sym = conjugate_symmetry_check(p);
      json j = {{"meta", io::metadata("constants", {{"p", o.p}, {"tol", o.tol}})},
                {"p", o.p},
                {"conjugate", p.conjugate()},
                {"c_p", closed.c_p},
                {"c_p_inverse", closed.c_p_inverse},
                {"method", to_string(closed.method)},
                {"quadrature_c_p", quad.c_p},
                {"quadrature_abs_diff", std::abs(quad.c_p - closed.c_p)},
                {"c_p_conjugate", sym.c_p_conjugate},
                {"conjugate_abs_diff", sym.abs_diff}};
      std::ostringstream s;
      s << "p = " << io::format_decimal(o.p) << "\n"
        << "conjugate = " << io::format_decimal(p.conjugate()) << "\n"
        << "c_p = " << io::format_decimal(closed.c_p) << "\n"
        << "c_p_inverse = " << io::format_decimal(closed.c_p_inverse) << "\n"
        << "quadrature_abs_diff = " << std::abs(quad.c_p - closed.c_p) << "\n"
        << "conjugate_abs_diff = " << sym.abs_diff << "\n";
      out << s.str();
      if (!o.out_path.empty()) io::write_text_file(o.out_path, dump(j));
    };
  });

  auto *figure = app.add_subcommand("figure", "table of C_p^{-1} against p");
  figure->add_option("--pmin", o.pmin, "first p (> 1)");
  figure->add_option("--pmax", o.pmax, "last p");
  figure->add_option("--step", o.step, "grid step");
  add_out(figure);
  figure->callback([&] {
    action = [&] {
      const auto rows = figure_data(o.pmin, o.pmax, o.step);
      std::ostringstream csv;
      io::write_figure_csv(csv, rows,
                           {std::string(io::kToolName) + " " + io::kToolVersion + " figure",
                            "pmin=" + io::format_decimal(o.pmin) + " pmax=" + io::format_decimal(o.pmax) +
                                " step=" + io::format_decimal(o.step) + " (table starts above the p = 1 endpoint)"});
      emit(out, o.out_path, csv.str(), std::to_string(rows.size()) + " rows written to " + o.out_path + "\n");
    };
  });

  auto *range = app.add_subcommand("range", "p-interval where C_p^{-1} exceeds a threshold");
  range->add_option("--threshold", o.threshold, "threshold in (4, 2 pi)");
  add_out(range);
  range->callback([&] {
    action = [&] {
      const auto r = supercritical_range(o.threshold);
      const bool contains = r.p_low <= 1.43 && r.p_high >= 3.35;
      out << "threshold = " << io::format_decimal(o.threshold) << "\n"
          << "p_low = " << io::format_decimal(r.p_low) << "\n"
          << "p_high = " << io::format_decimal(r.p_high) << "\n"
          << "interval = [" << io::format_decimal(r.p_low) << ", " << io::format_decimal(r.p_high) << "]\n";
      if (o.threshold == 6) out << "contains [1.43, 3.35] = " << (contains ? "true" : "false") << "\n";
      if (!o.out_path.empty()) {
        io::write_text_file(o.out_path, dump({{"meta", io::metadata("range", {{"threshold", o.threshold}})},
                                              {"p_low", r.p_low},
                                              {"p_high", r.p_high},
                                              {"threshold", r.threshold},
                                              {"bisection_tol", 1e-10}}));
      }
    };
  });

  auto *wirtinger = app.add_subcommand("wirtinger", "discrete extremal search and Wirtinger check");
  positive_p(wirtinger, true);
  wirtinger->add_option("--N", o.N, "grid size (>= 64)");
  wirtinger->add_option("--budget", o.budget, "ascent iterations per restart");
  wirtinger->add_option("--seed", o.seed, "random seed");
  wirtinger->add_option("--curve-out", o.curve_out, "write the extremal grid function as CSV");
  add_out(wirtinger);
  wirtinger->callback([&] {
    action = [&] {
      const PExponent<double> p(o.p);
      const auto r = extremal_search(p, o.N, o.budget, o.seed);
      const auto c = compute_cp(p);
      const auto report = wirtinger_check(r.u, p);
      json j = {{"meta", io::metadata("wirtinger", {{"p", o.p}, {"N", o.N}, {"budget", o.budget}, {"seed", o.seed}})},
                {"p", o.p},
                {"N", o.N},
                {"q_star", r.q},
                {"c_p", c.c_p},
                {"ratio_to_c_p", r.q / c.c_p},
                {"status", to_string(r.status)},
                {"iterations", r.iterations},
                {"sinusoid_correlation", sinusoid_correlation(r.u)},
                {"wirtinger", io::wirtinger_to_json(report)},
                {"tolerances", {{"tol_report", report_tolerance<double>(o.N)}}}};
      if (!o.curve_out.empty()) {
        std::ostringstream csv;
        io::write_grid_csv(csv, r.u);
        io::write_text_file(o.curve_out, csv.str());
      }
      emit(out, o.out_path, dump(j), "q_star = " + io::format_decimal(r.q) + "\n");
    };
  });

  auto *lemma2 = app.add_subcommand("lemma2", "double-integral ratio Q against T/6 for a curve CSV");
  lemma2->add_option("--curve-file", o.curve_file, "grid function CSV")->required();
  positive_p(lemma2, true);
  add_out(lemma2);
  lemma2->callback([&] {
    action = [&] {
      const auto y = io::read_grid_csv_file(o.curve_file);
      const auto r = lemma2_ratio(y, PExponent<double>(o.p));
      json j = {{"meta", io::metadata("lemma2", {{"curve_file", o.curve_file}, {"p", o.p}})},
                {"Q", r.Q},
                {"bound", r.bound},
                {"gap", r.gap},
                {"holds", r.holds},
                {"position_integral", r.position_integral},
                {"derivative_integral", r.derivative_integral},
                {"tolerances", {{"tol_report", report_tolerance<double>(y.size())}}}};
      emit(out, o.out_path, dump(j), "Q = " + io::format_decimal(r.Q) + "\n");
    };
  });

  auto add_field = [&](CLI::App *sub) {
    sub->add_option("--field", o.field, "rotation | linear | remark1");
    sub->add_option("--params", o.params, "field parameters key=value (repeatable)");
    sub->add_option("--x0", o.x0, "initial state, comma separated");
  };

  auto *simulate = app.add_subcommand("simulate", "RK4 trajectory as a grid-function CSV");
  add_field(simulate);
  simulate->add_option("--p", o.p, "norm exponent of the field");
  simulate->add_option("--dt", o.dt, "step size");
  simulate->add_option("--steps", o.steps, "number of steps");
  add_out(simulate);
  simulate->callback([&] {
    action = [&] {
      const auto f = builtin_field(o.field, parse_params(o.params), PExponent<double>(o.p));
      const auto x0 = o.x0.empty() ? default_initial_state(f) : parse_point(o.x0, f.dimension());
      const auto traj = integrate(f, x0, o.dt, o.steps);
      std::ostringstream csv;
      io::write_grid_csv(csv, io::trajectory_as_grid(traj, o.dt));
      emit(out, o.out_path, csv.str(), std::to_string(o.steps) + " states written to " + o.out_path + "\n");
    };
  });

  auto *certify = app.add_subcommand("certify", "period, sampled Lipschitz constant and TL bound checks");
  add_field(certify);
  positive_p(certify, true);
  certify->add_option("--pairs", o.pairs, "Lipschitz sample pairs (>= 1e4)");
  certify->add_option("--seed", o.seed, "random seed");
  add_out(certify);
  certify->callback([&] {
    action = [&] {
      const auto f = builtin_field(o.field, parse_params(o.params), PExponent<double>(o.p));
      const auto x0 = o.x0.empty() ? default_initial_state(f) : parse_point(o.x0, f.dimension());
      CertifyOptions<double> options;
      options.pairs = o.pairs;
      options.seed = o.seed;
      const auto c = certify_orbit(f, x0, options);
      json j = io::certificate_to_json(f, c);
      j["x0"] = std::vector<double>(x0.data(), x0.data() + x0.size());
      j["meta"] = io::metadata("certify", {{"field", o.field}, {"params", o.params}, {"p", o.p}, {"x0", o.x0},
                                           {"pairs", o.pairs}, {"seed", o.seed}});
      bool all = true;
      for (const auto &b : c.bounds) all = all && b.satisfied;
      emit(out, o.out_path, dump(j),
           "TL = " + io::format_decimal(c.TL) + (all ? " (all bounds satisfied)\n" : " (BOUND VIOLATED)\n"));
    };
  });

  auto *optimize = app.add_subcommand("optimize", "stochastic search for minimal restricted TL over Fourier curves");
  positive_p(optimize, true);
  optimize->add_option("--n", o.n, "space dimension (>= 2)");
  optimize->add_option("--K", o.K, "harmonics (>= 1)");
  optimize->add_option("--budget", o.opt_budget, "objective evaluations (>= 1e3)");
  optimize->add_option("--seed", o.seed, "random seed");
  optimize->add_option("--trace-out", o.trace_out, "write the (iteration, best_so_far) trace as CSV");
  add_out(optimize);
  optimize->callback([&] {
    action = [&] {
      const auto r = search(PExponent<double>(o.p), o.n, o.K, o.opt_budget, o.seed);
      json j = io::search_result_to_json(r, o.p, o.n, o.K, o.opt_budget, o.seed);
      j["meta"] = io::metadata("optimize", {{"p", o.p}, {"n", o.n}, {"K", o.K}, {"budget", o.opt_budget},
                                            {"seed", o.seed}, {"search_grid", 128}, {"report_grid", 2048}});
      if (!o.trace_out.empty()) {
        std::ostringstream csv;
        io::write_trace_csv(csv, r.trace);
        io::write_text_file(o.trace_out, csv.str());
      }
      emit(out, o.out_path, dump(j), "best_TL = " + io::format_decimal(r.best_TL) + "\n");
    };
  });

  auto *remark2 = app.add_subcommand("remark2", "TL bound for norms (1 +- eps)-equivalent to a Hilbert norm");
  remark2->add_option("--eps", o.eps, "equivalence constant in [0, 1)")->required();
  add_out(remark2);
  remark2->callback([&] {
    action = [&] {
      const double bound = remark2_bound(o.eps);
      out << "eps = " << io::format_decimal(o.eps) << "\n"
          << "bound = " << io::format_decimal(bound) << "\n";
      if (!o.out_path.empty()) {
        io::write_text_file(o.out_path,
                            dump({{"meta", io::metadata("remark2", {{"eps", o.eps}})}, {"eps", o.eps}, {"bound", bound}}));
      }
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion &) {
    out << io::kToolVersion << "\n";
    return kSuccess;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const DomainError &e) {
    err << "domain error: " << e.what() << "\n";
    return kDomainError;
  }

  try {
    if (action) action();
    return kSuccess;
  } catch (const DomainError &e) {
    err << "domain error: " << e.what() << "\n";
    return kDomainError;
  } catch (const IoError &e) {
    err << "io error: " << e.what() << "\n";
    return kIoError;
  } catch (const ConvergenceError &e) {
    err << "non-convergence: " << e.what() << "\n";
    return kNonConvergence;
  }
}

} // namespace periodbounds::cli

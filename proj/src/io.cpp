#include "periodbounds/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace periodbounds::io {

namespace {

std::string format_round_trip(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

} // namespace

std::string format_decimal(double value, int significant) {
  if (!std::isfinite(value)) return value > 0 ? "inf" : (value < 0 ? "-inf" : "nan");
  if (value == 0) {
    return significant > 1 ? "0." + std::string(std::size_t(significant - 1), '0') : "0";
  }
  const int magnitude = static_cast<int>(std::floor(std::log10(std::abs(value))));
  int decimals = std::max(0, significant - 1 - magnitude);
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  // Rounding may carry into a new leading digit (9.99.. -> 10.0..); drop the extra place.
  const auto digits = std::count_if(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  const auto leading_zeros = [&] {
    long z = 0;
    for (char c : s) {
      if (c == '-' || c == '.') continue;
      if (c != '0') break;
      ++z;
    }
    return z;
  }();
  if (digits - leading_zeros > significant && decimals > 0) {
    std::snprintf(buf, sizeof buf, "%.*f", decimals - 1, value);
    s = buf;
  }
  return s;
}

void write_figure_csv(std::ostream &out, const std::vector<FigureRow<double>> &rows,
                      const std::vector<std::string> &comments) {
  for (const auto &c : comments) out << "# " << c << '\n';
  out << "p,c_p_inverse\n";
  for (const auto &r : rows) out << format_decimal(r.p) << ',' << format_decimal(r.c_p_inverse) << '\n';
}

void write_grid_csv(std::ostream &out, const PeriodicGridFunction<double> &u) {
  out << "# T=" << format_round_trip(u.period()) << " N=" << u.size() << " n=" << u.dimension() << '\n';
  out << 't';
  for (Eigen::Index i = 0; i < u.dimension(); ++i) out << ",x" << i;
  out << '\n';
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    out << format_round_trip(u.time(k));
    for (Eigen::Index i = 0; i < u.dimension(); ++i) out << ',' << format_round_trip(u.samples()(k, i));
    out << '\n';
  }
}

PeriodicGridFunction<double> read_grid_csv(std::istream &in) {
  std::string line;
  double T = 0;
  long N = -1, n = -1;
  bool have_meta = false, have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# T=", 0) == 0) {
        if (std::sscanf(line.c_str(), "# T=%lf N=%ld n=%ld", &T, &N, &n) != 3) {
          throw IoError("malformed grid metadata line: " + line);
        }
        have_meta = true;
      }
      continue;
    }
    if (!have_header) {
      if (line[0] != 't') throw IoError("grid CSV header must start with 't'");
      have_header = true;
      continue;
    }
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception &) {
        throw IoError("bad number in grid CSV: '" + cell + "'");
      }
    }
    rows.push_back(std::move(values));
  }
  if (!have_meta) throw IoError("grid CSV lacks the '# T=<T> N=<N> n=<n>' metadata line");
  if (long(rows.size()) != N) throw IoError("grid CSV row count does not match N");
  Matrix<double> samples(N, n);
  for (long k = 0; k < N; ++k) {
    if (long(rows[std::size_t(k)].size()) != n + 1) throw IoError("grid CSV row has the wrong column count");
    for (long i = 0; i < n; ++i) samples(k, i) = rows[std::size_t(k)][std::size_t(i + 1)];
  }
  return {std::move(samples), T};
}

PeriodicGridFunction<double> read_grid_csv_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_grid_csv(in);
}

PeriodicGridFunction<double> trajectory_as_grid(const Matrix<double> &trajectory, double dt) {
  const Eigen::Index steps = trajectory.rows() - 1;
  return {trajectory.topRows(steps), dt * double(steps)};
}

nlohmann::json field_to_json(const FieldSpec<double> &f) {
  nlohmann::json j;
  j["kind"] = to_string(f.kind);
  j["dimension"] = f.dimension();
  std::vector<std::vector<double>> m;
  for (Eigen::Index r = 0; r < f.matrix.rows(); ++r) {
    m.emplace_back();
    for (Eigen::Index c = 0; c < f.matrix.cols(); ++c) m.back().push_back(f.matrix(r, c));
  }
  j["matrix"] = m;
  if (f.space) {
    j["weights"] = std::vector<double>(f.space->weights.data(), f.space->weights.data() + f.space->weights.size());
    j["labels"] = f.space->labels;
    j["A"] = f.space->A;
    j["B"] = f.space->B;
  }
  j["nominal_L"] = f.nominal_L ? nlohmann::json(*f.nominal_L) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json certificate_to_json(const FieldSpec<double> &f, const OrbitCertificate<double> &c) {
  nlohmann::json j;
  j["field"] = field_to_json(f);
  j["p"] = f.p.value();
  j["T"] = c.period_T;
  j["L_hat"] = c.lipschitz_hat;
  j["L_hat_kind"] = "sampled lower bound";
  j["TL"] = c.TL;
  nlohmann::json bounds = nlohmann::json::array();
  for (const auto &b : c.bounds) {
    bounds.push_back({{"name", b.name}, {"value", b.value}, {"satisfied", b.satisfied}, {"slack", c.TL - b.value}});
  }
  j["bounds"] = bounds;
  j["tolerances"] = {{"tol_cert", c.tol_cert},
                     {"closure", c.closure},
                     {"dt", c.dt},
                     {"richardson_period_delta", c.richardson_delta}};
  j["operator_norm"] = {{"upper", c.operator_norm.upper},
                        {"exact", c.operator_norm.exact ? nlohmann::json(*c.operator_norm.exact)
                                                        : nlohmann::json(nullptr)}};
  return j;
}

nlohmann::json search_result_to_json(const SearchResult<double> &r, double p, long n, int K, long budget,
                                     std::uint64_t seed) {
  const auto &c = r.best_curve.coefficients();
  std::vector<std::vector<double>> coeffs;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    coeffs.emplace_back();
    for (Eigen::Index k = 0; k < c.cols(); ++k) coeffs.back().push_back(c(i, k));
  }
  return {{"p", p},
          {"n", n},
          {"K", K},
          {"budget", budget},
          {"seed", seed},
          {"best_TL", r.best_TL},
          {"lower_bound", r.lower_bound},
          {"certificate_gap", r.certificate_gap},
          {"evaluations", r.evaluations},
          {"objective", "restricted"},
          {"coeffs_layout", "rows = dimensions; columns = [a0, a1..aK (cos), b1..bK (sin)]"},
          {"coeffs", coeffs}};
}

void write_trace_csv(std::ostream &out, const std::vector<TraceEntry<double>> &trace) {
  out << "iteration,best_so_far\n";
  for (const auto &e : trace) out << e.iteration << ',' << format_round_trip(e.best_so_far) << '\n';
}

nlohmann::json wirtinger_to_json(const WirtingerReport<double> &r) {
  return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"slack", r.slack}, {"tolerance", r.tolerance}, {"holds", r.holds}};
}

nlohmann::json metadata(const std::string &command, const nlohmann::json &config) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"command", command}, {"config", config}};
}

void write_text_file(const std::string &path, const std::string &contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw IoError("failed writing '" + path + "'");
}

} // namespace periodbounds::io

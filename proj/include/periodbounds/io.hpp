#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "periodbounds/constants.hpp"
#include "periodbounds/orbits.hpp"
#include "periodbounds/optimizer.hpp"
#include "periodbounds/pfunc.hpp"

namespace periodbounds::io {

inline constexpr const char *kToolName = "periodbounds";
#ifdef PERIODBOUNDS_VERSION
inline constexpr const char *kToolVersion = PERIODBOUNDS_VERSION;
#else
inline constexpr const char *kToolVersion = "unknown";
#endif

/// Decimal (never exponent) notation with `significant` significant digits.
std::string format_decimal(double value, int significant = 12);

/// `p,c_p_inverse` table; comment lines carry the generating configuration.
void write_figure_csv(std::ostream &out, const std::vector<FigureRow<double>> &rows,
                      const std::vector<std::string> &comments = {});

/// Grid function CSV: `# T=<T> N=<N> n=<n>`, header `t,x0,..`, one row per sample.
void write_grid_csv(std::ostream &out, const PeriodicGridFunction<double> &u);
PeriodicGridFunction<double> read_grid_csv(std::istream &in);
PeriodicGridFunction<double> read_grid_csv_file(const std::string &path);

/// The first `steps` states of a trajectory as a grid function of period steps * dt.
PeriodicGridFunction<double> trajectory_as_grid(const Matrix<double> &trajectory, double dt);

nlohmann::json field_to_json(const FieldSpec<double> &f);
nlohmann::json certificate_to_json(const FieldSpec<double> &f, const OrbitCertificate<double> &c);
nlohmann::json search_result_to_json(const SearchResult<double> &r, double p, long n, int K, long budget,
                                     std::uint64_t seed);
void write_trace_csv(std::ostream &out, const std::vector<TraceEntry<double>> &trace);
nlohmann::json wirtinger_to_json(const WirtingerReport<double> &r);

/// Metadata block shared by all JSON artifacts.
nlohmann::json metadata(const std::string &command, const nlohmann::json &config);

void write_text_file(const std::string &path, const std::string &contents);

} // namespace periodbounds::io

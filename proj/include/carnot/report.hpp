#ifndef CARNOT_REPORT_HPP
#define CARNOT_REPORT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>

#include "carnot/spec_format.hpp"
#include "carnot/structure_constants.hpp"
#include "carnot/tolerances.hpp"

namespace carnot {

/// Locale-independent float formatting at 17 significant digits.
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string hex16(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string join_coords(const Eigen::VectorXd& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += g17(v[i]);
  }
  return out;
}

/// Common header: every report pins the spec, the seed, the budget, and the
/// tolerance constants, so identical configurations reproduce byte-identically.
inline void write_report_header(std::ostream& out, const std::string& command,
                                const std::string& spec_label, const StructureConstants& sc,
                                std::uint64_t seed, long budget) {
  out << "# command: " << command << "\n";
  out << "# spec: " << spec_label << "\n";
  out << "# spec-hash: " << hex16(spec_hash(sc)) << "\n";
  out << "# seed: " << seed << "\n";
  out << "# budget: " << budget << "\n";
  out << "# tolerances: rank=" << g17(tol::kRank) << " quadrature=" << g17(tol::kQuadrature)
      << " shooting=" << g17(tol::kShooting) << " speed=" << g17(tol::kSpeed)
      << " metivier-witness=" << g17(tol::kMetivierWitness)
      << " metivier-clear=" << g17(tol::kMetivierClear) << " minimizing=" << g17(tol::kMinimizing)
      << "\n";
}

}  // namespace carnot

#endif

#ifndef CARNOT_DEFORMATION_HPP
#define CARNOT_DEFORMATION_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "carnot/builtins.hpp"
#include "carnot/distance.hpp"
#include "carnot/errors.hpp"
#include "carnot/filtration.hpp"
#include "carnot/jmap.hpp"
#include "carnot/rng.hpp"
#include "carnot/structure_constants.hpp"

namespace carnot {

/// A one-parameter family of groups sharing one stratification, indexed by
/// k = 1, 2, ... together with a limit member (entrywise limit of the
/// structure constants).
struct GroupFamily {
  std::string name;
  std::function<StructureConstants(long)> member;
  std::function<StructureConstants()> limit;
};

/// The deformation family on m = 4, d2 = 3 whose limit is the star-graph
/// group: three brackets against X_0 of size one, three cyclic brackets of
/// size 1/k.
inline GroupFamily gk_family() {
  GroupFamily fam;
  fam.name = "gk";
  fam.member = [](long k) { return gk_member(k); };
  fam.limit = []() { return gk_member(std::nullopt); };
  return fam;
}

inline const std::vector<long>& default_k_list() {
  static const std::vector<long> ks = {1, 2, 4, 8, 16, 32, 64};
  return ks;
}

struct ConvergenceCell {
  long k = 0;
  int pair_id = 0;
  double d_k = 0.0;
  double d_inf = 0.0;
  double gap = 0.0;
  bool solver_ok = false;
};

struct ConvergenceReport {
  std::vector<long> k_list;
  std::vector<std::pair<GroupPoint, GroupPoint>> pairs;
  std::vector<ConvergenceCell> cells;           // row-major: k outer, pair inner
  std::vector<double> max_gap_per_k;            // aligned with k_list
  bool all_solved = false;
};

/// Distances d_k(p, q) against the limit distance for each pair and each k,
/// by the two-solver estimate.
inline ConvergenceReport convergence_report(
    const GroupFamily& family, const std::vector<std::pair<GroupPoint, GroupPoint>>& pairs,
    const std::vector<long>& k_list, const DistanceOptions& options = DistanceOptions{}) {
  if (k_list.empty()) throw DomainError("convergence_report: k list must be non-empty");
  for (std::size_t i = 1; i < k_list.size(); ++i)
    if (k_list[i] <= k_list[i - 1])
      throw DomainError("convergence_report: k list must be strictly increasing");

  ConvergenceReport rep;
  rep.k_list = k_list;
  rep.pairs = pairs;
  rep.all_solved = true;

  const StructureConstants sc_inf = family.limit();
  std::vector<double> d_inf(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const DistanceEstimate est =
        distance(sc_inf, pairs[i].first, pairs[i].second, DistanceMethod::Both, options);
    d_inf[i] = est.value();
  }

  for (long k : k_list) {
    const StructureConstants sc_k = family.member(k);
    double max_gap = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      ConvergenceCell cell;
      cell.k = k;
      cell.pair_id = static_cast<int>(i);
      cell.d_inf = d_inf[i];
      try {
        const DistanceEstimate est =
            distance(sc_k, pairs[i].first, pairs[i].second, DistanceMethod::Both, options);
        cell.d_k = est.value();
        cell.gap = std::abs(cell.d_k - cell.d_inf);
        cell.solver_ok = !est.inconclusive;
      } catch (const NumericalError&) {
        cell.solver_ok = false;
        rep.all_solved = false;
      }
      if (cell.solver_ok && cell.gap > max_gap) max_gap = cell.gap;
      if (!cell.solver_ok) rep.all_solved = false;
      rep.cells.push_back(cell);
    }
    rep.max_gap_per_k.push_back(max_gap);
  }
  return rep;
}

struct SemicontinuityRow {
  std::string label;          // "k=2" or "inf"
  MetivierVerdict verdict;
  N0SearchResult n0;
};

struct SemicontinuityReport {
  std::vector<SemicontinuityRow> rows;  // finite members then the limit
  bool pattern_ok = false;              // (Metivier, 13) finite / (NotMetivier, 17) limit
  long finite_n0 = 0;                   // common finite value (13)
  long limit_n0 = 0;                    // limit value (17)
  std::string text;                     // rendered report
};

/// Runs the Metivier test and the N_0 search across the family and the limit
/// member, checks the lower-semicontinuity failure pattern, and renders the
/// contradiction chain.
inline SemicontinuityReport semicontinuity_experiment(
    const GroupFamily& family, long budget, std::uint64_t seed,
    const std::vector<long>& k_list = default_k_list()) {
  SemicontinuityReport rep;
  const int metivier_budget = 32;

  for (long k : k_list) {
    const StructureConstants sc = family.member(k);
    SemicontinuityRow row;
    row.label = "k=" + std::to_string(k);
    row.verdict = metivier_check(sc, metivier_budget, seed);
    row.n0 = n0_search(sc, budget, seed);
    rep.rows.push_back(std::move(row));
  }
  {
    const StructureConstants sc = family.limit();
    SemicontinuityRow row;
    row.label = "inf";
    row.verdict = metivier_check(sc, metivier_budget, seed);
    row.n0 = n0_search(sc, budget, seed);
    rep.rows.push_back(std::move(row));
  }

  bool ok = true;
  std::optional<long> finite_value;
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    if (row.verdict.status != MetivierStatus::Metivier || !row.n0.found) ok = false;
    if (!finite_value) finite_value = row.n0.best_value;
    if (row.n0.best_value != *finite_value) ok = false;
  }
  const auto& limit_row = rep.rows.back();
  if (limit_row.verdict.status != MetivierStatus::NotMetivier || !limit_row.n0.found) ok = false;
  rep.finite_n0 = finite_value.value_or(0);
  rep.limit_n0 = limit_row.n0.best_value;
  if (!(rep.limit_n0 > rep.finite_n0)) ok = false;
  rep.pattern_ok = ok;

  std::ostringstream out;
  out << "semicontinuity experiment: family '" << family.name << "'\n";
  for (const auto& row : rep.rows) {
    out << "  " << row.label << ": " << to_string(row.verdict.status)
        << ", N_0 search max = " << (row.n0.found ? std::to_string(row.n0.best_value) : "none")
        << "\n";
  }
  if (rep.pattern_ok) {
    out << "pattern: (Metivier, " << rep.finite_n0 << ") for finite k; (NotMetivier, "
        << rep.limit_n0 << ") at the limit.\n";
    out << "If the curvature exponent agreed with N_0 on every ideal group, distance\n";
    out << "convergence of the family would force\n";
    out << "  " << rep.limit_n0 << " = N_0(limit) <= N_CE(limit) <= liminf_k N_CE(G_k)"
        << " = liminf_k N_0(G_k) = " << rep.finite_n0 << ",\n";
    out << "a contradiction. Hence N_0 is not lower semicontinuous under structure-\n";
    out << "constant convergence, and some finite-k member has N_CE > N_0.\n";
  } else {
    out << "pattern check FAILED: expected Metivier with one common finite N_0 value for\n";
    out << "every finite k and NotMetivier with a strictly larger N_0 at the limit.\n";
  }
  rep.text = out.str();
  return rep;
}

}  // namespace carnot

#endif

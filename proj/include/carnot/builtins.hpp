#ifndef CARNOT_BUILTINS_HPP
#define CARNOT_BUILTINS_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/spec_format.hpp"
#include "carnot/structure_constants.hpp"

namespace carnot {

/// First Heisenberg group: m = 2, d2 = 1, [X_1, X_2] = Y_1.
inline StructureConstants heisenberg() {
  return StructureConstants(2, 1, {BracketEntry{0, 1, 0, 1.0}});
}

/// Member of the deformation family on m = 4, d2 = 3. Finite k uses 1/k in
/// the three cyclic brackets of {X_1, X_2, X_3}; k = nullopt is the limit
/// member (1/inf = 0), the group induced by the star graph K_{1,3}.
inline StructureConstants gk_member(std::optional<long> k) {
  double inv_k = 0.0;
  if (k.has_value()) {
    if (*k < 1) throw DomainError("gk family index must satisfy k >= 1");
    inv_k = 1.0 / static_cast<double>(*k);
  }
  std::vector<BracketEntry> e = {
      BracketEntry{0, 1, 0, 1.0},     // [X_0, X_1] = Y_1
      BracketEntry{0, 2, 1, 1.0},     // [X_0, X_2] = Y_2
      BracketEntry{0, 3, 2, 1.0},     // [X_0, X_3] = Y_3
      BracketEntry{1, 2, 2, inv_k},   // [X_1, X_2] = (1/k) Y_3
      BracketEntry{1, 3, 1, -inv_k},  // [X_1, X_3] = -(1/k) Y_2
      BracketEntry{2, 3, 0, inv_k},   // [X_2, X_3] = (1/k) Y_1
  };
  return StructureConstants(4, 3, e);
}

/// Free step-two group on 3 generators: m = 3, d2 = 3.
inline StructureConstants free_step_two_3() {
  return StructureConstants(
      3, 3, {BracketEntry{0, 1, 0, 1.0}, BracketEntry{0, 2, 1, 1.0}, BracketEntry{1, 2, 2, 1.0}});
}

/// Resolves "heisenberg", "gk:<k>", "gk:inf", or a file path.
inline StructureConstants resolve_spec_source(const std::string& source) {
  if (source == "heisenberg") return heisenberg();
  if (source.rfind("gk:", 0) == 0) {
    const std::string tail = source.substr(3);
    if (tail == "inf") return gk_member(std::nullopt);
    try {
      std::size_t used = 0;
      const long k = std::stol(tail, &used);
      if (used != tail.size()) throw std::invalid_argument(tail);
      return gk_member(k);
    } catch (const DomainError&) {
      throw;
    } catch (const std::exception&) {
      throw DomainError("bad builtin name '" + source + "': expected gk:<int> or gk:inf");
    }
  }
  return load_group_spec(source);
}

}  // namespace carnot

#endif

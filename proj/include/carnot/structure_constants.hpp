#ifndef CARNOT_STRUCTURE_CONSTANTS_HPP
#define CARNOT_STRUCTURE_CONSTANTS_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/tolerances.hpp"

namespace carnot {

/// One declared bracket coefficient [X_i, X_j] += value * Y_l, with 0-based
/// indices and i < j. The mirrored entry (j, i) is implied.
struct BracketEntry {
  int i = 0;
  int j = 0;
  int l = 0;
  double value = 0.0;
};

/// A point xi + u of the group in exponential coordinates: xi is the
/// first-layer part (length m), u the second-layer part (length d2).
struct GroupPoint {
  Eigen::VectorXd xi;
  Eigen::VectorXd u;

  GroupPoint() = default;
  GroupPoint(Eigen::VectorXd xi_, Eigen::VectorXd u_) : xi(std::move(xi_)), u(std::move(u_)) {}

  int m() const { return static_cast<int>(xi.size()); }
  int d2() const { return static_cast<int>(u.size()); }

  /// Flattened coordinates (xi, u) as one vector of length m + d2.
  Eigen::VectorXd coords() const {
    Eigen::VectorXd c(xi.size() + u.size());
    c << xi, u;
    return c;
  }

  static GroupPoint zero(int m, int d2) {
    return GroupPoint(Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(d2));
  }

  static GroupPoint from_coords(int m, int d2, const Eigen::VectorXd& c) {
    if (c.size() != m + d2)
      throw StructuralError("point coordinates: expected " + std::to_string(m + d2) +
                            " entries, got " + std::to_string(c.size()));
    return GroupPoint(c.head(m), c.tail(d2));
  }
};

struct ValidationReport {
  bool dims_ok = false;
  bool antisymmetry_ok = false;
  bool bracket_generating_ok = false;
  int pair_rank = 0;           // numerical rank of the d2 x (m(m-1)/2) pair matrix
  double sv_largest = 0.0;     // largest singular value of the pair matrix
  double sv_smallest_kept = 0.0;
  std::string message;

  bool ok() const { return dims_ok && antisymmetry_ok && bracket_generating_ok; }
};

/// The tensor c^l_{ij} defining [X_i, X_j] = sum_l c^l_{ij} Y_l on a step-two
/// stratified algebra, in fixed orthonormal bases of both layers. Immutable
/// after construction; antisymmetry is enforced by accepting only i < j
/// entries and mirroring them.
class StructureConstants {
public:
  StructureConstants(int m, int d2, const std::vector<BracketEntry>& entries)
      : m_(m), d2_(d2), entries_(entries) {
    if (m < 0 || d2 < 0) throw StructuralError("negative layer dimension");
    c_.assign(static_cast<std::size_t>(d2), Eigen::MatrixXd::Zero(m, m));
    std::vector<std::vector<bool>> seen(static_cast<std::size_t>(d2));
    for (auto& s : seen) s.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), false);
    for (const auto& e : entries) {
      if (e.l < 0 || e.l >= d2) throw StructuralError("bracket entry: layer index out of range");
      if (e.i < 0 || e.j < 0 || e.i >= m || e.j >= m)
        throw StructuralError("bracket entry: generator index out of range");
      if (e.i >= e.j) throw StructuralError("bracket entry: i < j required");
      auto& marks = seen[static_cast<std::size_t>(e.l)];
      const std::size_t key = static_cast<std::size_t>(e.i) * static_cast<std::size_t>(m) +
                              static_cast<std::size_t>(e.j);
      if (marks[key]) throw StructuralError("bracket entry: duplicate (i, j, l)");
      marks[key] = true;
      c_[static_cast<std::size_t>(e.l)](e.i, e.j) = e.value;
      c_[static_cast<std::size_t>(e.l)](e.j, e.i) = -e.value;
    }
  }

  int m() const { return m_; }
  int d2() const { return d2_; }
  int n() const { return m_ + d2_; }
  int homogeneous_dim() const { return m_ + 2 * d2_; }

  /// c^l_{ij} with 0-based indices.
  double c(int i, int j, int l) const { return c_[static_cast<std::size_t>(l)](i, j); }

  /// The antisymmetric matrix C_l with (C_l)_{ij} = c^l_{ij}.
  const Eigen::MatrixXd& layer_matrix(int l) const { return c_[static_cast<std::size_t>(l)]; }

  /// Declared entries, as given at construction (i < j each).
  const std::vector<BracketEntry>& entries() const { return entries_; }

  /// Second-layer coordinates of [v, w] for first-layer vectors v, w.
  Eigen::VectorXd bracket_xi(const Eigen::VectorXd& v, const Eigen::VectorXd& w) const {
    require_xi(v);
    require_xi(w);
    Eigen::VectorXd out(d2_);
    for (int l = 0; l < d2_; ++l) out[l] = v.dot(c_[static_cast<std::size_t>(l)] * w);
    return out;
  }

  void require_xi(const Eigen::VectorXd& v) const {
    if (v.size() != m_) throw StructuralError("first-layer vector has wrong length");
  }
  void require_u(const Eigen::VectorXd& v) const {
    if (v.size() != d2_) throw StructuralError("second-layer vector has wrong length");
  }
  void require_point(const GroupPoint& p) const {
    require_xi(p.xi);
    require_u(p.u);
  }

private:
  int m_;
  int d2_;
  std::vector<BracketEntry> entries_;
  std::vector<Eigen::MatrixXd> c_;  // one antisymmetric m x m matrix per Y_l
};

/// Checks the step-two Carnot axioms: antisymmetry of the stored tensor and
/// the bracket-generating condition rank(pair matrix) == d2.
inline ValidationReport validate_spec(const StructureConstants& sc) {
  ValidationReport rep;
  rep.dims_ok = sc.m() >= 2 && sc.d2() >= 1;
  if (!rep.dims_ok) {
    rep.message = "layer dimensions must satisfy m >= 2, d2 >= 1";
    return rep;
  }

  rep.antisymmetry_ok = true;
  for (int l = 0; l < sc.d2() && rep.antisymmetry_ok; ++l) {
    const Eigen::MatrixXd& C = sc.layer_matrix(l);
    if ((C + C.transpose()).cwiseAbs().maxCoeff() != 0.0) rep.antisymmetry_ok = false;
  }
  if (!rep.antisymmetry_ok) {
    rep.message = "structure constants are not antisymmetric";
    return rep;
  }

  const int pairs = sc.m() * (sc.m() - 1) / 2;
  Eigen::MatrixXd P(sc.d2(), pairs);
  int col = 0;
  for (int i = 0; i < sc.m(); ++i)
    for (int j = i + 1; j < sc.m(); ++j, ++col)
      for (int l = 0; l < sc.d2(); ++l) P(l, col) = sc.c(i, j, l);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
  const Eigen::VectorXd sv = svd.singularValues();
  rep.sv_largest = sv.size() > 0 ? sv[0] : 0.0;
  const double thresh = tol::kRank * rep.sv_largest;
  for (int k = 0; k < sv.size(); ++k) {
    if (sv[k] > thresh && sv[k] > 0.0) {
      ++rep.pair_rank;
      rep.sv_smallest_kept = sv[k];
    }
  }
  rep.bracket_generating_ok = rep.pair_rank == sc.d2();
  if (!rep.bracket_generating_ok)
    rep.message = "not a step-two Carnot group of the declared dimensions: [g1,g1] has rank " +
                  std::to_string(rep.pair_rank) + " < " + std::to_string(sc.d2());
  return rep;
}

/// [a, b]: only the first-layer parts contribute; the result lies in g2.
inline GroupPoint bracket(const StructureConstants& sc, const GroupPoint& a, const GroupPoint& b) {
  sc.require_point(a);
  sc.require_point(b);
  return GroupPoint(Eigen::VectorXd::Zero(sc.m()), sc.bracket_xi(a.xi, b.xi));
}

/// a * b = a + b + [a, b] / 2. Exact for step-two nilpotency.
inline GroupPoint group_mul(const StructureConstants& sc, const GroupPoint& a, const GroupPoint& b) {
  sc.require_point(a);
  sc.require_point(b);
  return GroupPoint(a.xi + b.xi, a.u + b.u + 0.5 * sc.bracket_xi(a.xi, b.xi));
}

inline GroupPoint group_inv(const GroupPoint& a) { return GroupPoint(-a.xi, -a.u); }

/// delta_lambda(xi, u) = (lambda xi, lambda^2 u).
inline GroupPoint dilation(const StructureConstants& sc, double lambda, const GroupPoint& p) {
  sc.require_point(p);
  if (!(lambda > 0.0)) throw DomainError("dilation factor must be positive");
  return GroupPoint(lambda * p.xi, lambda * lambda * p.u);
}

struct Dims {
  int n = 0;  // topological dimension
  int Q = 0;  // homogeneous dimension
};

inline Dims dims(const StructureConstants& sc) { return Dims{sc.n(), sc.homogeneous_dim()}; }

}  // namespace carnot

#endif

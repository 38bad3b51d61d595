#pragma once

// Chain geometry, sublattice bookkeeping, the chiral operator and step switch
// functions on a finite open chain.
//
// Basis ordering is fixed and cell-major: under CellC2 the basis vector
// |x, s> sits at index 2x + s with s = 0 (A), 1 (B). Under AlternatingSites
// each site carries one state, index x, and sublattice A iff x is even.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fci/errors.hpp"

namespace fci {

enum class Convention {
  CellC2,            ///< two internal states (A, B) per cell
  AlternatingSites,  ///< one state per site, sublattice fixed by parity
};

enum class Sublattice { A = 0, B = 1 };

inline std::string to_string(Convention c) {
  return c == Convention::CellC2 ? "cell" : "alternating";
}

class ChainGeometry {
 public:
  ChainGeometry(int length, Convention convention)
      : length_(length), convention_(convention) {
    if (length < 2) {
      throw InvalidGeometry("chain length must be >= 2, got " + std::to_string(length));
    }
  }

  /// Number of cells (CellC2) or sites (AlternatingSites).
  int length() const noexcept { return length_; }
  Convention convention() const noexcept { return convention_; }

  int dofs_per_site() const noexcept { return convention_ == Convention::CellC2 ? 2 : 1; }
  int total_dim() const noexcept { return length_ * dofs_per_site(); }

  /// Number of (t1, t2) pairs a coupling profile must carry for this chain.
  int profile_cells() const noexcept {
    return convention_ == Convention::CellC2 ? length_ : (length_ + 1) / 2;
  }

  int site_of(int dof) const noexcept { return dof / dofs_per_site(); }

  // Both conventions put A on even basis indices.
  Sublattice sublattice(int dof) const noexcept { return dof % 2 == 0 ? Sublattice::A : Sublattice::B; }

  /// Index of |x, s>. Under AlternatingSites the sublattice must match the parity of x.
  int dof(int x, Sublattice s) const {
    if (x < 0 || x >= length_) throw InvalidGeometry("site " + std::to_string(x) + " out of range");
    if (convention_ == Convention::CellC2) return 2 * x + static_cast<int>(s);
    if ((x % 2 == 0) != (s == Sublattice::A)) {
      throw InvalidGeometry("site " + std::to_string(x) + " does not carry the requested sublattice");
    }
    return x;
  }

  bool operator==(const ChainGeometry&) const = default;

 private:
  int length_;
  Convention convention_;
};

inline ChainGeometry make_geometry(int length, Convention convention) {
  return ChainGeometry(length, convention);
}

/// Diagonal +1 on A, -1 on B.
class ChiralOperator {
 public:
  explicit ChiralOperator(const ChainGeometry& geom) : signs_(geom.total_dim()) {
    for (int i = 0; i < geom.total_dim(); ++i) {
      signs_[i] = geom.sublattice(i) == Sublattice::A ? 1.0 : -1.0;
    }
  }

  const Eigen::VectorXd& signs() const noexcept { return signs_; }
  int dim() const noexcept { return static_cast<int>(signs_.size()); }
  double trace() const { return signs_.sum(); }

  Eigen::MatrixXcd matrix() const { return signs_.cast<std::complex<double>>().asDiagonal(); }

 private:
  Eigen::VectorXd signs_;
};

/// Sharp step: theta(x) = 1 for x < transition, 0 otherwise.
class SwitchFunction {
 public:
  SwitchFunction(const ChainGeometry& geom, int transition)
      : geom_(geom), transition_(transition), values_(geom.length(), 0.0) {
    for (int x = 0; x < transition && x < geom.length(); ++x) values_[x] = 1.0;
  }

  int transition() const noexcept { return transition_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator()(int x) const { return values_.at(x); }
  const ChainGeometry& geometry() const noexcept { return geom_; }

  /// theta(X) on the full Hilbert space (one entry per basis vector).
  Eigen::VectorXd diagonal() const {
    Eigen::VectorXd d(geom_.total_dim());
    for (int i = 0; i < geom_.total_dim(); ++i) d[i] = values_[geom_.site_of(i)];
    return d;
  }

  bool operator==(const SwitchFunction& o) const {
    return geom_ == o.geom_ && transition_ == o.transition_ && values_ == o.values_;
  }

 private:
  ChainGeometry geom_;
  int transition_;
  std::vector<double> values_;
};

/// Step switch with jump at `ell`; std::nullopt selects the middle, floor(L/2).
inline SwitchFunction switch_function(const ChainGeometry& geom, std::optional<int> ell = std::nullopt) {
  const int l = ell.value_or(geom.length() / 2);
  if (l <= 0 || l >= geom.length()) {
    throw InvalidSwitch("switch transition " + std::to_string(l) + " outside (0, " +
                        std::to_string(geom.length()) + ")");
  }
  return SwitchFunction(geom, l);
}

/// theta identically one (transition L) or zero (transition 0); no jump inside the chain.
inline SwitchFunction constant_switch(const ChainGeometry& geom, bool one) {
  return SwitchFunction(geom, one ? geom.length() : 0);
}

/// n_{A,theta} - n_{B,theta} = Tr(C theta(X)).
inline int chiral_polarization(const ChainGeometry& geom, const SwitchFunction& theta) {
  if (!(theta.geometry() == geom)) throw DimensionMismatch("switch function built on another geometry");
  if (geom.convention() == Convention::CellC2) return 0;
  int count = 0;
  for (int x = 0; x < geom.length(); ++x) {
    if (theta(x) != 0.0) count += geom.sublattice(x) == Sublattice::A ? 1 : -1;
  }
  return count;
}

/// Distance of site x to the nearest chain end.
inline int edge_distance(const ChainGeometry& geom, int x) {
  return std::min(x, geom.length() - 1 - x);
}

}  // namespace fci

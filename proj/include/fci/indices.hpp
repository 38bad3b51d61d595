#pragma once

// Finite-size bulk and edge indices of a chiral chain,
//
//   I_bulk = 1/2 Tr(C S [theta(X), S]),   I_edge = Tr(C theta(X) (1 - S^2)),
//
// with S = tanh(H / delta). They satisfy I_edge = I_bulk + Tr(C theta(X))
// exactly for every delta; Tr(C theta(X)) vanishes under CellC2 and equals
// the sublattice imbalance n_A - n_B under AlternatingSites.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fci/errors.hpp"
#include "fci/hamiltonian.hpp"
#include "fci/lattice.hpp"
#include "fci/spectral.hpp"

namespace fci {

/// Eigendecomposition plus S and 1 - S^2 at one delta, shared by all index evaluations.
struct FilteredOperators {
  SpectralData spectrum;
  Matrix sign;        // S
  Matrix gap_filter;  // 1 - S^2
  double delta;
};

inline FilteredOperators filter(const ChiralHamiltonian& h, double delta) {
  const FilterParams params(delta);
  SpectralData spec = eigh(h.matrix());
  Matrix s = flattened_sign(spec, params);
  Matrix g = fci::gap_filter(spec, params);
  return {std::move(spec), std::move(s), std::move(g), delta};
}

namespace detail {

inline void check_switch(const ChiralHamiltonian& h, const SwitchFunction& theta) {
  if (!(theta.geometry() == h.geometry())) throw DimensionMismatch("switch function built on another geometry");
}

inline double real_part_checked(cplx v, const char* what) {
  if (std::abs(v.imag()) >= 1e-12) {
    throw SolverFailure(std::string(what) + ": imaginary part " + std::to_string(v.imag()) + " exceeds 1e-12");
  }
  return v.real();
}

/// Diagonal of C theta(X) (1 - S^2).
inline Eigen::VectorXcd edge_diagonal(const ChiralHamiltonian& h, const FilteredOperators& f,
                                      const SwitchFunction& theta) {
  const Vector ct = h.chiral().signs().cwiseProduct(theta.diagonal());
  return ct.cast<cplx>().cwiseProduct(f.gap_filter.diagonal());
}

/// Diagonal of C S [theta(X), S].
inline Eigen::VectorXcd bulk_diagonal(const ChiralHamiltonian& h, const FilteredOperators& f,
                                      const SwitchFunction& theta) {
  const Vector th = theta.diagonal();
  const Vector& c = h.chiral().signs();
  const Matrix& s = f.sign;
  const int n = h.dim();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (int i = 0; i < n; ++i) {
    cplx acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double jump = th[j] - th[i];
      if (jump != 0.0) acc += s(i, j) * jump * s(j, i);
    }
    out[i] = c[i] * acc;
  }
  return out;
}

}  // namespace detail

inline double edge_index(const ChiralHamiltonian& h, const FilteredOperators& f, const SwitchFunction& theta) {
  detail::check_switch(h, theta);
  return detail::real_part_checked(detail::edge_diagonal(h, f, theta).sum(), "edge_index");
}

inline double edge_index(const ChiralHamiltonian& h, double delta, const SwitchFunction& theta) {
  return edge_index(h, filter(h, delta), theta);
}

inline double bulk_index(const ChiralHamiltonian& h, const FilteredOperators& f, const SwitchFunction& theta) {
  detail::check_switch(h, theta);
  return detail::real_part_checked(0.5 * detail::bulk_diagonal(h, f, theta).sum(), "bulk_index");
}

inline double bulk_index(const ChiralHamiltonian& h, double delta, const SwitchFunction& theta) {
  return bulk_index(h, filter(h, delta), theta);
}

enum class DeltaMode { Theorem, Empirical, Manual };

/// How delta is chosen: sqrt(128 Delta d K_d / L) (Theorem), 1 / sqrt(2L)
/// (Empirical) or a fixed value (Manual).
struct DeltaPolicy {
  DeltaMode mode = DeltaMode::Empirical;
  double value = 0.0;  // Manual
  double gap = 0.0;    // Theorem: half gap Delta
  double d = 1.0;      // Theorem
  double k_d = 0.0;    // Theorem
  int length = 0;      // Theorem, Empirical

  static DeltaPolicy manual(double delta) { return {DeltaMode::Manual, delta, 0.0, 1.0, 0.0, 0}; }
  static DeltaPolicy empirical(int length) { return {DeltaMode::Empirical, 0.0, 0.0, 1.0, 0.0, length}; }
  static DeltaPolicy theorem(double gap, double d, double k_d, int length) {
    return {DeltaMode::Theorem, 0.0, gap, d, k_d, length};
  }
};

inline double resolve_delta(const DeltaPolicy& p) {
  switch (p.mode) {
    case DeltaMode::Manual:
      if (!(p.value > 0.0) || !std::isfinite(p.value)) {
        throw InvalidDelta("manual delta must be positive, got " + std::to_string(p.value));
      }
      return p.value;
    case DeltaMode::Empirical:
      if (p.length <= 0) throw InvalidDelta("empirical delta needs a positive chain length");
      return 1.0 / std::sqrt(2.0 * p.length);
    case DeltaMode::Theorem:
      if (!(p.gap > 0.0) || !(p.d > 0.0) || !(p.k_d > 0.0) || p.length <= 0) {
        throw InvalidDelta("theorem delta needs positive Delta, d, K_d and L");
      }
      return std::sqrt(128.0 * p.gap * p.d * p.k_d / p.length);
  }
  throw InvalidDelta("unknown delta mode");
}

struct IndexReport {
  double i_bulk = 0.0;
  double i_edge = 0.0;
  int imbalance = 0;                   // n_{A,theta} - n_{B,theta}
  double correspondence_residual = 0;  // |I_edge - I_bulk - imbalance|
  long nearest_integer = 0;
  double quantization_error = 0.0;  // |I_edge - nearest_integer|
  double delta = 0.0;
  int ell = 0;
  bool classified = true;  // false when I_edge sits on a half-integer
};

inline IndexReport make_report(double i_bulk, double i_edge, int imbalance, double delta, int ell) {
  IndexReport r;
  r.i_bulk = i_bulk;
  r.i_edge = i_edge;
  r.imbalance = imbalance;
  r.correspondence_residual = std::abs(i_edge - i_bulk - imbalance);
  r.nearest_integer = std::lround(i_edge);
  r.quantization_error = std::abs(i_edge - static_cast<double>(r.nearest_integer));
  r.delta = delta;
  r.ell = ell;
  if (r.quantization_error >= 0.5 - 1e-12) {
    r.quantization_error = 0.5;
    r.classified = false;
  }
  return r;
}

/// Both indices, the sublattice imbalance and the quantization diagnostics.
/// `ell` = std::nullopt puts the switch in the middle.
inline IndexReport index_report(const ChiralHamiltonian& h, const DeltaPolicy& policy,
                                std::optional<int> ell = std::nullopt) {
  const double delta = resolve_delta(policy);
  const SwitchFunction theta = switch_function(h.geometry(), ell);
  const FilteredOperators f = filter(h, delta);
  return make_report(bulk_index(h, f, theta), edge_index(h, f, theta),
                     chiral_polarization(h.geometry(), theta), delta, theta.transition());
}

enum class DensityKind { Bulk, Edge };

inline std::string to_string(DensityKind k) { return k == DensityKind::Bulk ? "bulk" : "edge"; }

/// Per-site contributions to an index: diagonal of C S [theta, S] (times 1/2)
/// or of C theta (1 - S^2), summed over the internal states of each site.
inline std::vector<double> index_density(const ChiralHamiltonian& h, const FilteredOperators& f,
                                         const SwitchFunction& theta, DensityKind kind) {
  detail::check_switch(h, theta);
  const Eigen::VectorXcd diag = kind == DensityKind::Edge ? detail::edge_diagonal(h, f, theta)
                                                          : (0.5 * detail::bulk_diagonal(h, f, theta)).eval();
  const auto& geom = h.geometry();
  std::vector<double> out(geom.length(), 0.0);
  for (int i = 0; i < h.dim(); ++i) out[geom.site_of(i)] += diag[i].real();
  return out;
}

inline std::vector<double> index_density(const ChiralHamiltonian& h, double delta, const SwitchFunction& theta,
                                         DensityKind kind) {
  return index_density(h, filter(h, delta), theta, kind);
}

/// Edge index of the chain cut to its first `window` cells (open boundary at
/// the cut, switch at window / 2). CellC2 geometry.
inline double windowed_edge_index(const CouplingProfile& profile, double delta, int window) {
  if (window < 4) throw InvalidGeometry("window must be >= 4 cells");
  if (window > profile.cells()) throw InvalidGeometry("window larger than the profile");
  const ChainGeometry geom(window, Convention::CellC2);
  const ChiralHamiltonian h = build_ssh(geom, profile.truncated(window));
  return edge_index(h, delta, switch_function(geom, window / 2));
}

}  // namespace fci

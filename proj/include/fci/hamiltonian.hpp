#pragma once

// Chiral tight-binding Hamiltonians: coupling profiles (clean, disordered,
// with a Gaussian defect), the open-chain SSH construction, periodic closures
// used to estimate the bulk gap, and the short-range constants d, K_d, N_d.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fci/errors.hpp"
#include "fci/lattice.hpp"
#include "fci/spectral.hpp"

namespace fci {

/// Chiral hopping between cells x and x + range. `ab[x]` couples (x, A) to
/// (x + range, B); `ba[x]` couples (x, B) to (x + range, A). CellC2 only.
struct ExtraHopping {
  int range = 2;
  std::vector<cplx> ab;
  std::vector<cplx> ba;
};

/// Chiral boundary term coupling (a, A) to (b, B); positions in geometry
/// units (cells under CellC2, sites under AlternatingSites).
struct BoundaryTerm {
  int a = 0;
  int b = 0;
  cplx value = 0.0;
};

/// Per-cell couplings. t1[x] is the intra-cell hopping A(x)-B(x); t2[x] the
/// inter-cell hopping B(x)-A(x+1). The last t2 entry is only used by the
/// periodic closure.
struct CouplingProfile {
  std::vector<double> t1;
  std::vector<double> t2;
  std::vector<ExtraHopping> extra;
  std::vector<BoundaryTerm> boundary;

  int cells() const noexcept { return static_cast<int>(t1.size()); }

  /// Coupling range in cells.
  int range() const noexcept {
    int r = 1;
    for (const auto& e : extra) r = std::max(r, e.range);
    return r;
  }

  static CouplingProfile homogeneous(int cells, double t1, double t2) {
    return {std::vector<double>(cells, t1), std::vector<double>(cells, t2), {}, {}};
  }

  /// First `cells` cells; boundary terms outside the kept range are dropped.
  CouplingProfile truncated(int cells) const {
    if (cells > this->cells()) throw InvalidProfile("cannot truncate to a longer profile");
    CouplingProfile out;
    out.t1.assign(t1.begin(), t1.begin() + cells);
    out.t2.assign(t2.begin(), t2.begin() + cells);
    for (const auto& e : extra) {
      ExtraHopping k{e.range, {}, {}};
      const auto n = static_cast<std::size_t>(std::max(0, cells - e.range));
      k.ab.assign(e.ab.begin(), e.ab.begin() + std::min(n, e.ab.size()));
      k.ba.assign(e.ba.begin(), e.ba.begin() + std::min(n, e.ba.size()));
      out.extra.push_back(std::move(k));
    }
    for (const auto& b : boundary) {
      if (b.a < cells && b.b < cells) out.boundary.push_back(b);
    }
    return out;
  }
};

namespace detail {

inline void require_finite(const std::vector<double>& v, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw InvalidProfile(std::string(name) + "[" + std::to_string(i) + "] is not finite");
    }
  }
}

inline void validate_profile(const CouplingProfile& p) {
  if (p.t1.size() != p.t2.size()) throw InvalidProfile("t1 and t2 lengths differ");
  require_finite(p.t1, "t1");
  require_finite(p.t2, "t2");
  for (const auto& e : p.extra) {
    if (e.range < 1) throw InvalidProfile("extra hopping range must be >= 1");
    for (const auto& v : e.ab) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InvalidProfile("extra hopping not finite");
    }
    for (const auto& v : e.ba) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InvalidProfile("extra hopping not finite");
    }
  }
  for (const auto& b : p.boundary) {
    if (!std::isfinite(b.value.real()) || !std::isfinite(b.value.imag())) {
      throw InvalidProfile("boundary potential not finite");
    }
  }
}

inline void add_hopping(Matrix& h, int i, int j, cplx v) {
  h(i, j) += v;
  h(j, i) += std::conj(v);
}

/// Largest singular value of the k x k block starting at (r, c), k in {1, 2}.
inline double block_norm(const Matrix& m, int r, int c, int k) {
  if (k == 1) return std::abs(m(r, c));
  const Eigen::Matrix2cd b = m.block<2, 2>(r, c);
  const double fro2 = b.squaredNorm();
  const double det = std::abs(b.determinant());
  const double disc = std::max(0.0, fro2 * fro2 - 4.0 * det * det);
  return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
}

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Which coupling a disorder draw perturbs.
enum class BondKind : std::uint64_t { Intra = 1, Inter = 2 };

/// Counter-based uniform draw in [-1, 1) keyed by (seed, kind, x): the value
/// for a given cell never depends on the chain length.
inline double disorder_draw(std::uint64_t seed, BondKind kind, std::uint64_t x) {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(kind));
  h = detail::splitmix64(h ^ x);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

inline CouplingProfile apply_disorder(CouplingProfile profile, std::uint64_t seed, double amplitude) {
  if (!(amplitude >= 0.0)) throw InvalidProfile("disorder amplitude must be >= 0");
  if (amplitude == 0.0) return profile;
  for (std::size_t x = 0; x < profile.t1.size(); ++x) {
    profile.t1[x] += amplitude * disorder_draw(seed, BondKind::Intra, x);
  }
  for (std::size_t x = 0; x < profile.t2.size(); ++x) {
    profile.t2[x] += amplitude * disorder_draw(seed, BondKind::Inter, x);
  }
  return profile;
}

/// Adds height * exp(-((x - c) * 4 / (L * width))^2) to t1(x) with c = center_frac * L.
/// center_frac = 0, width = 1 gives exp(-(4x/L)^2).
inline CouplingProfile apply_defect(CouplingProfile profile, double height, double center_frac,
                                    double width) {
  if (!(width > 0.0)) throw InvalidProfile("defect width must be positive");
  if (height == 0.0) return profile;
  const double n = static_cast<double>(profile.cells());
  const double center = center_frac * n;
  for (std::size_t x = 0; x < profile.t1.size(); ++x) {
    const double arg = (static_cast<double>(x) - center) * 4.0 / (n * width);
    profile.t1[x] += height * std::exp(-arg * arg);
  }
  return profile;
}

/// Hermitian matrix with certified chiral and banded structure.
class ChiralHamiltonian {
 public:
  /// Validates Hermiticity, chirality and the declared range (all relative 1e-12).
  ChiralHamiltonian(const ChainGeometry& geom, Matrix h, int range)
      : geom_(geom), h_(std::move(h)), range_(range), chiral_(geom) {
    if (h_.rows() != geom.total_dim() || h_.cols() != geom.total_dim()) {
      throw DimensionMismatch("Hamiltonian dimension " + std::to_string(h_.rows()) + " != " +
                              std::to_string(geom.total_dim()));
    }
    if (range < 0) throw InvalidProfile("range must be >= 0");
    const double tol = 1e-12 * std::max(1.0, max_abs(h_));
    if (hermiticity_residual(h_) > tol) throw NotHermitian("Hamiltonian is not Hermitian");
    const auto& c = chiral_.signs();
    for (int i = 0; i < h_.rows(); ++i) {
      for (int j = 0; j < h_.cols(); ++j) {
        const double v = std::abs(h_(i, j));
        if (v == 0.0) continue;
        if (c[i] == c[j] && v > tol) throw NotChiral("Hamiltonian couples equal sublattices");
        if (std::abs(geom.site_of(i) - geom.site_of(j)) > range && v > tol) {
          throw InvalidProfile("Hamiltonian exceeds its declared range " + std::to_string(range));
        }
      }
    }
  }

  const ChainGeometry& geometry() const noexcept { return geom_; }
  const Matrix& matrix() const noexcept { return h_; }
  int range() const noexcept { return range_; }
  const ChiralOperator& chiral() const noexcept { return chiral_; }
  int dim() const noexcept { return geom_.total_dim(); }

 private:
  ChainGeometry geom_;
  Matrix h_;
  int range_;
  ChiralOperator chiral_;
};

namespace detail {

inline void check_boundary_support(const ChainGeometry& geom, const CouplingProfile& p) {
  int width = 0;
  for (const auto& b : p.boundary) {
    width = std::max({width, edge_distance(geom, b.a) + 1, edge_distance(geom, b.b) + 1});
  }
  if (!p.boundary.empty() && 4 * width >= geom.length()) {
    throw InvalidProfile("boundary potential support width " + std::to_string(width) +
                         " must be < L/4");
  }
}

}  // namespace detail

/// Open-chain SSH Hamiltonian (plus extra chiral hoppings and boundary terms).
inline ChiralHamiltonian build_ssh(const ChainGeometry& geom, const CouplingProfile& profile) {
  detail::validate_profile(profile);
  if (profile.cells() != geom.profile_cells()) {
    throw InvalidProfile("profile has " + std::to_string(profile.cells()) + " cells, geometry needs " +
                         std::to_string(geom.profile_cells()));
  }
  detail::check_boundary_support(geom, profile);
  const int n = geom.total_dim();
  Matrix h = Matrix::Zero(n, n);
  const int length = geom.length();

  if (geom.convention() == Convention::CellC2) {
    for (int x = 0; x < length; ++x) {
      detail::add_hopping(h, 2 * x, 2 * x + 1, profile.t1[x]);
      if (x + 1 < length) detail::add_hopping(h, 2 * x + 1, 2 * (x + 1), profile.t2[x]);
    }
    for (const auto& e : profile.extra) {
      for (int x = 0; x + e.range < length; ++x) {
        if (static_cast<std::size_t>(x) < e.ab.size()) detail::add_hopping(h, 2 * x, 2 * (x + e.range) + 1, e.ab[x]);
        if (static_cast<std::size_t>(x) < e.ba.size()) detail::add_hopping(h, 2 * x + 1, 2 * (x + e.range), e.ba[x]);
      }
    }
  } else {
    if (!profile.extra.empty()) throw InvalidProfile("extra hoppings require the CellC2 convention");
    for (int b = 0; b + 1 < length; ++b) {
      const double t = b % 2 == 0 ? profile.t1[b / 2] : profile.t2[b / 2];
      detail::add_hopping(h, b, b + 1, t);
    }
  }
  for (const auto& term : profile.boundary) {
    detail::add_hopping(h, geom.dof(term.a, Sublattice::A), geom.dof(term.b, Sublattice::B), term.value);
  }
  int range = profile.range();
  for (const auto& term : profile.boundary) range = std::max(range, std::abs(term.a - term.b));
  return ChiralHamiltonian(geom, std::move(h), range);
}

/// Ring of `ring_cells` cells in the CellC2 basis. Cell x takes its couplings
/// from profile cell x mod profile.cells(); the bond t2(ring_cells - 1) closes
/// the ring. Boundary terms are not part of the bulk and are dropped.
inline Matrix periodic_closure(const CouplingProfile& profile, int ring_cells) {
  detail::validate_profile(profile);
  if (profile.cells() < 1) throw InvalidProfile("empty profile");
  if (ring_cells < 2 * profile.range() || ring_cells < 2) {
    throw InvalidProfile("ring of " + std::to_string(ring_cells) + " cells too small for range " +
                         std::to_string(profile.range()));
  }
  const int n = 2 * ring_cells;
  const int m = profile.cells();
  Matrix h = Matrix::Zero(n, n);
  for (int x = 0; x < ring_cells; ++x) {
    const int src = x % m;
    const int next = (x + 1) % ring_cells;
    detail::add_hopping(h, 2 * x, 2 * x + 1, profile.t1[src]);
    detail::add_hopping(h, 2 * x + 1, 2 * next, profile.t2[src]);
    for (const auto& e : profile.extra) {
      const int to = (x + e.range) % ring_cells;
      if (static_cast<std::size_t>(src) < e.ab.size()) detail::add_hopping(h, 2 * x, 2 * to + 1, e.ab[src]);
      if (static_cast<std::size_t>(src) < e.ba.size()) detail::add_hopping(h, 2 * x + 1, 2 * to, e.ba[src]);
    }
  }
  return h;
}

/// Smallest |eigenvalue| of the periodic closure: an estimate of the half gap Delta.
inline double bulk_gap(const CouplingProfile& profile, int ring_cells) {
  return eigh(periodic_closure(profile, ring_cells)).eigenvalues.cwiseAbs().minCoeff();
}

/// max_x sum_{x'} ||H_{x,x'}|| e^{|x - x'| / d} with exact block operator norms.
inline double short_range_constant(const Matrix& h, const ChainGeometry& geom, double d) {
  if (!(d > 0.0)) throw InvalidProfile("decay length d must be positive");
  if (h.rows() != geom.total_dim()) throw DimensionMismatch("matrix does not match geometry");
  const int k = geom.dofs_per_site();
  double best = 0.0;
  for (int x = 0; x < geom.length(); ++x) {
    double row = 0.0;
    for (int y = 0; y < geom.length(); ++y) {
      const double nrm = detail::block_norm(h, k * x, k * y, k);
      if (nrm != 0.0) row += nrm * std::exp(std::abs(x - y) / d);
    }
    best = std::max(best, row);
  }
  return best;
}

inline double short_range_constant(const ChiralHamiltonian& h, double d) {
  return short_range_constant(h.matrix(), h.geometry(), d);
}

/// max |(HC + CH)_ij|.
inline double verify_chiral(const Matrix& h, const ChiralOperator& c) {
  if (h.rows() != c.dim() || h.cols() != c.dim()) throw DimensionMismatch("verify_chiral: dimension mismatch");
  double worst = 0.0;
  const auto& s = c.signs();
  for (int j = 0; j < h.cols(); ++j) {
    for (int i = 0; i < h.rows(); ++i) worst = std::max(worst, std::abs(h(i, j)) * std::abs(s[i] + s[j]));
  }
  return worst;
}

/// sup_x sum_{y in chain} e^{-|x - y| / (2d)}.
inline double decay_sum_constant(int length, double d) {
  double best = 0.0;
  for (int x = 0; x < length; ++x) {
    double s = 0.0;
    for (int y = 0; y < length; ++y) s += std::exp(-std::abs(x - y) / (2.0 * d));
    best = std::max(best, s);
  }
  return best;
}

struct BulkConstants {
  double d;
  double k_d;
  double delta_gap;  // half gap Delta
  double n_d;
};

/// Constants for an open-chain Hamiltonian built from `profile`; the gap is
/// estimated on a ring of `ring_cells` cells (default 4L).
inline BulkConstants bulk_constants(const CouplingProfile& profile, const ChiralHamiltonian& h, double d,
                                    int ring_cells = 0) {
  if (ring_cells <= 0) ring_cells = 4 * profile.cells();
  return {d, short_range_constant(h, d), bulk_gap(profile, ring_cells),
          decay_sum_constant(h.geometry().length(), d)};
}

}  // namespace fci

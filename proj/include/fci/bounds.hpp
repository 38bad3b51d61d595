#pragma once

// Numerical certificates for the locality estimates behind the finite-size
// indices: off-diagonal decay profiles, the Lieb-Robinson propagator bound,
// edge localization of 1 - S^2, open-vs-bulk restriction discrepancy and the
// trace norms of {A, S} and [1 - S^2, theta].
//
// O(.) statements are certified as "the ratio to the stated envelope is below
// a polynomial threshold", default 10 L^2.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fci/errors.hpp"
#include "fci/hamiltonian.hpp"
#include "fci/indices.hpp"
#include "fci/lattice.hpp"
#include "fci/spectral.hpp"

namespace fci {

/// Entries below this are treated as numerically zero when fitting decay rates.
inline constexpr double kDecayNoiseFloor = 1e-14;

struct DecayProfile {
  std::vector<double> max_norm;  // m(r), r = 0 .. L-1
  double rate = std::numeric_limits<double>::quiet_NaN();  // slope of log m(r); NaN if < 2 points
  int fit_lo = 0;
  int fit_hi = 0;  // inclusive
  int fit_points = 0;
};

/// Least-squares slope of log m(r) over r in [lo, hi], skipping m(r) <= noise floor.
inline void fit_decay_rate(DecayProfile& p, int lo, int hi) {
  const int last = static_cast<int>(p.max_norm.size()) - 1;
  lo = std::clamp(lo, 0, last);
  hi = std::clamp(hi, lo, last);
  p.fit_lo = lo;
  p.fit_hi = hi;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int r = lo; r <= hi; ++r) {
    const double m = p.max_norm[r];
    if (m <= kDecayNoiseFloor) continue;
    const double y = std::log(m);
    sx += r;
    sy += y;
    sxx += static_cast<double>(r) * r;
    sxy += r * y;
    ++n;
  }
  p.fit_points = n;
  if (n < 2) {
    p.rate = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  const double denom = n * sxx - sx * sx;
  p.rate = denom == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (n * sxy - sx * sy) / denom;
}

/// m(r) = max_{|x - x'| = r} ||M_{x,x'}|| over rows x in [row_lo, row_hi).
inline DecayProfile decay_profile(const Matrix& m, const ChainGeometry& geom,
                                  std::optional<std::pair<int, int>> fit_window = std::nullopt,
                                  std::optional<std::pair<int, int>> rows = std::nullopt) {
  if (m.rows() != geom.total_dim() || m.cols() != geom.total_dim()) {
    throw DimensionMismatch("decay_profile: matrix does not match geometry");
  }
  const int length = geom.length();
  const int k = geom.dofs_per_site();
  const auto [row_lo, row_hi] = rows.value_or(std::pair{0, length});
  DecayProfile p;
  p.max_norm.assign(length, 0.0);
  for (int x = std::max(0, row_lo); x < std::min(length, row_hi); ++x) {
    for (int y = 0; y < length; ++y) {
      const int r = std::abs(x - y);
      p.max_norm[r] = std::max(p.max_norm[r], detail::block_norm(m, k * x, k * y, k));
    }
  }
  const auto [lo, hi] = fit_window.value_or(std::pair{0, length - 1});
  fit_decay_rate(p, lo, hi);
  return p;
}

struct BoundCertificate {
  std::string name;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double margin = 0.0;      // min(rhs + tolerance - lhs), or threshold - gamma_star
  double gamma_star = 0.0;  // largest lhs / envelope, when the bound is an O(.) statement
  double tolerance = 0.0;   // round-off allowance added to rhs
  bool pass = false;        // margin >= 0
};

/// Round-off allowance for entries of a unitary computed from an n x n eigendecomposition.
inline double roundoff_floor(int n) { return 32.0 * n * std::numeric_limits<double>::epsilon(); }

/// ||(e^{itH})_{x,y}|| <= 2|t| K_d e^{|t| K_d - |x - y| / d} for every block pair with |x - y| >= d.
inline BoundCertificate lieb_robinson_check(const ChiralHamiltonian& h, double t, double d, double k_d) {
  if (!(d > 0.0)) throw InvalidProfile("lieb_robinson_check: d must be positive");
  const Matrix u = propagator(eigh(h.matrix()), t);
  const auto& geom = h.geometry();
  const int k = geom.dofs_per_site();
  BoundCertificate cert;
  cert.name = "lieb_robinson";
  cert.tolerance = roundoff_floor(h.dim());
  cert.margin = std::numeric_limits<double>::infinity();
  const double at = std::abs(t);
  for (int x = 0; x < geom.length(); ++x) {
    for (int y = 0; y < geom.length(); ++y) {
      const double dist = std::abs(x - y);
      if (dist < d) continue;
      const double lhs = detail::block_norm(u, k * x, k * y, k);
      const double rhs = 2.0 * at * k_d * std::exp(at * k_d - dist / d);
      cert.lhs.push_back(lhs);
      cert.rhs.push_back(rhs);
      cert.margin = std::min(cert.margin, rhs + cert.tolerance - lhs);
    }
  }
  if (cert.lhs.empty()) cert.margin = 0.0;
  cert.pass = cert.margin >= 0.0;
  return cert;
}

/// Default polynomial envelope threshold, 10 L^2.
inline double default_threshold(int length) { return 10.0 * length * length; }

/// gamma* = max_{x,y} ||(1 - S^2)_{x,y}|| / (e^{-max(d_x, d_y) / (2d')} + e^{-2 Delta / delta}).
inline BoundCertificate edge_filter_decay_check(const ChiralHamiltonian& h, double delta, double gap,
                                                double d_prime, std::optional<double> threshold = std::nullopt) {
  const Matrix g = gap_filter(eigh(h.matrix()), FilterParams(delta));
  const auto& geom = h.geometry();
  const int k = geom.dofs_per_site();
  const double bulk_term = std::exp(-2.0 * gap / delta);
  BoundCertificate cert;
  cert.name = "edge_filter_decay";
  for (int x = 0; x < geom.length(); ++x) {
    for (int y = 0; y < geom.length(); ++y) {
      const double lhs = detail::block_norm(g, k * x, k * y, k);
      const int far = std::max(edge_distance(geom, x), edge_distance(geom, y));
      const double env = std::exp(-far / (2.0 * d_prime)) + bulk_term;
      cert.lhs.push_back(lhs);
      cert.rhs.push_back(env);
      cert.gamma_star = std::max(cert.gamma_star, lhs / env);
    }
  }
  cert.margin = threshold.value_or(default_threshold(geom.length())) - cert.gamma_star;
  cert.pass = cert.margin >= 0.0;
  return cert;
}

/// Certificate for a single value against an envelope: gamma* = value / envelope.
inline BoundCertificate envelope_certificate(std::string name, double value, double envelope, double threshold) {
  BoundCertificate cert;
  cert.name = std::move(name);
  cert.lhs = {value};
  cert.rhs = {envelope};
  cert.gamma_star = value / envelope;
  cert.margin = threshold - cert.gamma_star;
  cert.pass = cert.margin >= 0.0;
  return cert;
}

enum class FilterKind { GapFilter, FlattenedSign };

/// Profile of `length + 2 pad` cells whose cell x takes the couplings of cell
/// (x - pad) mod length of `profile`; emulates the bulk around the open chain.
inline CouplingProfile cyclic_padding(const CouplingProfile& profile, int length, int pad) {
  const CouplingProfile base = profile.truncated(length);
  const int total = length + 2 * pad;
  CouplingProfile out;
  out.t1.resize(total);
  out.t2.resize(total);
  auto src = [&](int x) { return (((x - pad) % length) + length) % length; };
  for (int x = 0; x < total; ++x) {
    out.t1[x] = base.t1[src(x)];
    out.t2[x] = base.t2[src(x)];
  }
  for (const auto& e : base.extra) {
    ExtraHopping k{e.range, {}, {}};
    for (int x = 0; x + e.range < total; ++x) {
      const auto s = static_cast<std::size_t>(src(x));
      k.ab.push_back(s < e.ab.size() ? e.ab[s] : cplx{});
      k.ba.push_back(s < e.ba.size() ? e.ba[s] : cplx{});
    }
    out.extra.push_back(std::move(k));
  }
  return out;
}

/// ||chi_Omega (f(H) - iota* f(H_pad) iota)||, operator norm, with H the open
/// chain of `length` cells and H_pad the same chain padded by `pad` cells on
/// each side. Omega = cells [omega.first, omega.second).
inline double restriction_discrepancy(const CouplingProfile& profile, int length, int pad,
                                      std::pair<int, int> omega, FilterKind kind, double delta) {
  if (pad < length) throw InvalidGeometry("restriction_discrepancy: pad must be >= L");
  if (omega.first < 0 || omega.second > length || omega.first >= omega.second) {
    throw InvalidGeometry("restriction_discrepancy: Omega must be a non-empty cell range inside the chain");
  }
  const FilterParams params(delta);
  auto apply = [&](const ChiralHamiltonian& h) {
    const SpectralData spec = eigh(h.matrix());
    return kind == FilterKind::GapFilter ? gap_filter(spec, params) : flattened_sign(spec, params);
  };
  const ChainGeometry open(length, Convention::CellC2);
  const ChainGeometry padded(length + 2 * pad, Convention::CellC2);
  const Matrix f_open = apply(build_ssh(open, profile.truncated(length)));
  const Matrix f_pad = apply(build_ssh(padded, cyclic_padding(profile, length, pad)));

  Matrix diff = f_open - f_pad.block(2 * pad, 2 * pad, 2 * length, 2 * length);
  for (int i = 0; i < diff.rows(); ++i) {
    const int x = i / 2;
    if (x < omega.first || x >= omega.second) diff.row(i).setZero();
  }
  return Eigen::BDCSVD<Matrix>(diff).singularValues()(0);
}

struct TraceNorms {
  double anticommutator = 0.0;         // ||{A, S}||_1
  double commutator = 0.0;             // ||[1 - S^2, theta]||_1
  double anticommutator_entrywise = 0.0;  // sum |{A, S}_{ij}|, an upper bound on the trace norm
  double commutator_entrywise = 0.0;
  double anticommutator_abs_trace = 0.0;  // |Tr {A, S}|
};

inline double trace_norm(const Matrix& m) { return Eigen::BDCSVD<Matrix>(m).singularValues().sum(); }

/// Trace norms of {A, S} with A = 1/2 C {theta(X), 1 - S^2}, and of [1 - S^2, theta(X)].
inline TraceNorms anticommutator_trace_norms(const ChiralHamiltonian& h, const FilteredOperators& f,
                                             const SwitchFunction& theta) {
  if (!(theta.geometry() == h.geometry())) throw DimensionMismatch("switch function built on another geometry");
  const Eigen::VectorXcd th_diag = theta.diagonal().cast<cplx>();
  const Eigen::VectorXcd c_diag = h.chiral().signs().cast<cplx>();
  const auto th = th_diag.asDiagonal();
  const auto c = c_diag.asDiagonal();
  const Matrix& g = f.gap_filter;
  const Matrix& s = f.sign;
  const Matrix a = 0.5 * (c * (th * g + g * th));
  const Matrix anti = a * s + s * a;
  const Matrix comm = g * th - th * g;
  TraceNorms out;
  out.anticommutator = trace_norm(anti);
  out.commutator = trace_norm(comm);
  out.anticommutator_entrywise = anti.cwiseAbs().sum();
  out.commutator_entrywise = comm.cwiseAbs().sum();
  out.anticommutator_abs_trace = std::abs(anti.trace());
  return out;
}

inline TraceNorms anticommutator_trace_norms(const ChiralHamiltonian& h, double delta, const SwitchFunction& theta) {
  return anticommutator_trace_norms(h, filter(h, delta), theta);
}

}  // namespace fci

#pragma once

#include <cstdint>
#include <random>

#include "fci/hamiltonian.hpp"
#include "fci/indices.hpp"
#include "fci/lattice.hpp"

namespace fci_test {

using namespace fci;

inline ChiralHamiltonian clean_ssh(int length, double t1, double t2) {
  return build_ssh(ChainGeometry(length, Convention::CellC2), CouplingProfile::homogeneous(length, t1, t2));
}

// t1 = 1/2 + disorder + defect, t2 = 1 + disorder, amplitude 0.1.
inline CouplingProfile defect_chain(int length, std::uint64_t seed) {
  auto p = apply_disorder(CouplingProfile::homogeneous(length, 0.5, 1.0), seed, 0.1);
  return apply_defect(std::move(p), 0.2, 0.5, 1.0);
}

inline ChiralHamiltonian defect_chain_h(int length, std::uint64_t seed) {
  return build_ssh(ChainGeometry(length, Convention::CellC2), defect_chain(length, seed));
}

// Random chiral Hamiltonian with complex A-B couplings of range `range`.
inline ChiralHamiltonian random_chiral(std::mt19937_64& rng, int length, int range, Convention conv) {
  const ChainGeometry geom(length, conv);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = geom.total_dim();
  const ChiralOperator c(geom);
  Matrix h = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (c.signs()[i] == c.signs()[j]) continue;
      if (std::abs(geom.site_of(i) - geom.site_of(j)) > range) continue;
      const cplx v(g(rng), g(rng));
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  }
  return ChiralHamiltonian(geom, std::move(h), range);
}

inline Matrix random_hermitian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  return 0.5 * (a + a.adjoint());
}

}  // namespace fci_test

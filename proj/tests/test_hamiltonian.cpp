#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "fci/hamiltonian.hpp"
#include "support.hpp"

using namespace fci;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("build_ssh on two cells") {
  const auto h = fci_test::clean_ssh(2, 0.5, 1.0).matrix();
  REQUIRE(h.rows() == 4);
  CHECK(h(0, 1) == cplx(0.5));
  CHECK(h(1, 2) == cplx(1.0));
  CHECK(h(2, 3) == cplx(0.5));
  CHECK(h(1, 0) == cplx(0.5));
  CHECK(h(2, 1) == cplx(1.0));
  CHECK(h(0, 3) == cplx(0.0));
  for (int i = 0; i < 4; ++i) {
    for (int j = i % 2; j < 4; j += 2) CHECK(h(i, j) == cplx(0.0));
  }
}

TEST_CASE("dimerized chain has an exact zero mode on (0, A)") {
  const auto spec = eigh(fci_test::clean_ssh(10, 0.0, 1.0).matrix());
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(20);
  psi[0] = 1.0;
  CHECK((fci_test::clean_ssh(10, 0.0, 1.0).matrix() * psi).norm() == 0.0);
  CHECK(spec.eigenvalues.cwiseAbs().minCoeff() == 0.0);
}

TEST_CASE("alternating-site chain") {
  const ChainGeometry g(5, Convention::AlternatingSites);
  CouplingProfile p{{0.5, 0.6, 0.7}, {1.0, 1.1, 1.2}, {}, {}};
  const auto h = build_ssh(g, p).matrix();
  CHECK(h(0, 1) == cplx(0.5));
  CHECK(h(1, 2) == cplx(1.0));
  CHECK(h(2, 3) == cplx(0.6));
  CHECK(h(3, 4) == cplx(1.1));
  p.extra.push_back({2, {0.1}, {0.1}});
  CHECK_THROWS_AS(build_ssh(g, p), InvalidProfile);
}

TEST_CASE("extra hoppings and boundary terms stay chiral") {
  const ChainGeometry g(12, Convention::CellC2);
  auto p = CouplingProfile::homogeneous(12, 0.5, 1.0);
  p.extra.push_back({2, std::vector<cplx>(10, cplx(0.1, 0.05)), std::vector<cplx>(10, 0.2)});
  p.boundary.push_back({0, 1, 0.05});
  const auto h = build_ssh(g, p);
  CHECK(h.range() == 2);
  CHECK(verify_chiral(h.matrix(), h.chiral()) == 0.0);
  CHECK(h.matrix()(0, 2 * 2 + 1) == cplx(0.1, 0.05));
  CHECK(h.matrix()(0, 3) == cplx(0.05));

  auto wide = CouplingProfile::homogeneous(12, 0.5, 1.0);
  wide.boundary.push_back({3, 3, 0.05});  // support width 4, not < 12/4
  CHECK_THROWS_AS(build_ssh(g, wide), InvalidProfile);

  auto nan = CouplingProfile::homogeneous(12, 0.5, 1.0);
  nan.t1[3] = NAN;
  CHECK_THROWS_AS(build_ssh(g, nan), InvalidProfile);
  CHECK_THROWS_AS(build_ssh(g, CouplingProfile::homogeneous(11, 0.5, 1.0)), InvalidProfile);
}

TEST_CASE("ChiralHamiltonian validation") {
  const ChainGeometry g(3, Convention::CellC2);
  Matrix h = fci_test::clean_ssh(3, 0.5, 1.0).matrix();
  CHECK_NOTHROW(ChiralHamiltonian(g, h, 1));
  CHECK_THROWS_AS(ChiralHamiltonian(g, h, 0), InvalidProfile);
  CHECK_THROWS_AS(ChiralHamiltonian(ChainGeometry(4, Convention::CellC2), h, 1), DimensionMismatch);
  Matrix aa = h;
  aa(0, 2) = aa(2, 0) = 0.3;
  CHECK_THROWS_AS(ChiralHamiltonian(g, aa, 1), NotChiral);
  Matrix nh = h;
  nh(0, 1) = 0.7;
  CHECK_THROWS_AS(ChiralHamiltonian(g, nh, 1), NotHermitian);
}

TEST_CASE("verify_chiral residuals") {
  const auto h = fci_test::clean_ssh(6, 0.5, 1.0);
  CHECK(verify_chiral(h.matrix(), h.chiral()) == 0.0);
  const Matrix shifted = h.matrix() + 0.1 * Matrix::Identity(12, 12);
  CHECK_THAT(verify_chiral(shifted, h.chiral()), WithinAbs(0.2, 1e-15));
  Matrix aa = h.matrix();
  aa(0, 2) = aa(2, 0) = 0.3;
  CHECK(verify_chiral(aa, h.chiral()) >= 0.6 - 1e-15);
}

TEST_CASE("disorder draws") {
  const auto base = CouplingProfile::homogeneous(200, 0.5, 1.0);
  const auto same = apply_disorder(base, 1, 0.0);
  CHECK(same.t1 == base.t1);
  CHECK(same.t2 == base.t2);

  const auto a = apply_disorder(base, 1, 0.1);
  const auto b = apply_disorder(base, 1, 0.1);
  CHECK(a.t1 == b.t1);
  CHECK(a.t2 == b.t2);
  for (int x = 0; x < 200; ++x) {
    CHECK(std::abs(a.t1[x] - 0.5) <= 0.1);
    CHECK(std::abs(a.t2[x] - 1.0) <= 0.1);
  }
  CHECK(apply_disorder(base, 2, 0.1).t1 != a.t1);
  // a shorter chain sees the same couplings on its cells
  const auto short_chain = apply_disorder(CouplingProfile::homogeneous(50, 0.5, 1.0), 1, 0.1);
  for (int x = 0; x < 50; ++x) CHECK(short_chain.t1[x] == a.t1[x]);
  CHECK_THROWS_AS(apply_disorder(base, 1, -0.1), InvalidProfile);
}

TEST_CASE("defect profile") {
  const auto base = CouplingProfile::homogeneous(30, 0.5, 1.0);
  CHECK(apply_defect(base, 0.0, 0.5, 1.0).t1 == base.t1);
  const auto d = apply_defect(base, 0.2, 0.5, 1.0);
  CHECK_THAT(d.t1[15], WithinAbs(0.7, 1e-15));
  for (int k = 1; k < 15; ++k) CHECK_THAT(d.t1[15 - k], WithinAbs(d.t1[15 + k], 1e-15));
  CHECK_THAT(d.t1[5] - 0.5, WithinRel(0.2 * std::exp(-std::pow(4.0 * 10 / 30, 2)), 1e-12));
  CHECK(d.t2 == base.t2);
  // center at the left end: 0.2 exp(-(4x/L)^2)
  const auto left = apply_defect(base, 0.2, 0.0, 1.0);
  CHECK_THAT(left.t1[0], WithinAbs(0.7, 1e-15));
  CHECK_THROWS_AS(apply_defect(base, 0.2, 0.5, 0.0), InvalidProfile);
}

TEST_CASE("periodic closure and bulk gap") {
  const auto p = CouplingProfile::homogeneous(10, 0.5, 1.0);
  const auto ring = periodic_closure(p, 40);
  const auto ev = eigh(ring).eigenvalues;
  for (int k = 0; k < ev.size(); ++k) CHECK_THAT(ev[k] + ev[ev.size() - 1 - k], WithinAbs(0.0, 1e-12));
  CHECK_THAT(bulk_gap(p, 200), WithinAbs(0.5, 0.01));
  CHECK_THAT(bulk_gap(CouplingProfile::homogeneous(10, 1.0, 0.5), 200), WithinAbs(0.5, 0.01));
  CHECK(bulk_gap(CouplingProfile::homogeneous(10, 1.0, 1.0), 200) < 0.05);
  CHECK_THROWS_AS(periodic_closure(p, 1), InvalidProfile);
}

TEST_CASE("gap estimate converges as the ring grows") {
  // odd rings miss k = pi, so the error is positive
  const auto p = CouplingProfile::homogeneous(4, 0.5, 1.0);
  double prev = bulk_gap(p, 15) - 0.5;
  CHECK(prev > 0.0);
  for (int ring : {31, 61, 121, 241}) {
    const double err = bulk_gap(p, ring) - 0.5;
    CHECK(err >= 0.0);
    CHECK(err / prev < 1.0);
    prev = err;
  }
  CHECK(prev < 1e-4);
  CHECK_THAT(bulk_gap(p, 30), WithinAbs(0.5, 1e-14));
}

TEST_CASE("short-range constant") {
  const auto h = fci_test::clean_ssh(20, 0.5, 1.0);
  CHECK_THAT(short_range_constant(h, 1.0), WithinAbs(0.5 + 2.0 * std::numbers::e, 1e-12));
  CHECK_THAT(short_range_constant(h, 1.0), WithinAbs(5.9366, 1e-4));
  const ChainGeometry g(5, Convention::CellC2);
  CHECK(short_range_constant(Matrix::Zero(10, 10), g, 1.0) == 0.0);
  CHECK_THAT(short_range_constant(h, 1e6), WithinAbs(2.5, 1e-5));
  CHECK_THROWS_AS(short_range_constant(h, 0.0), InvalidProfile);
  // alternating sites: neighbours t1 and t2 at distance 1
  const auto alt = build_ssh(ChainGeometry(6, Convention::AlternatingSites),
                             CouplingProfile::homogeneous(3, 0.5, 1.0));
  CHECK_THAT(short_range_constant(alt, 1.0), WithinAbs(1.5 * std::numbers::e, 1e-12));
}

TEST_CASE("bulk constants") {
  const auto p = CouplingProfile::homogeneous(30, 0.5, 1.0);
  const auto h = build_ssh(ChainGeometry(30, Convention::CellC2), p);
  const auto c = bulk_constants(p, h, 1.0);
  CHECK(c.d == 1.0);
  CHECK_THAT(c.delta_gap, WithinAbs(0.5, 1e-3));
  CHECK(c.n_d >= 1.0);
  CHECK(std::isfinite(c.n_d));
  const double q = std::exp(-0.5);
  CHECK_THAT(decay_sum_constant(1000, 1.0), WithinAbs((1 + q) / (1 - q), 1e-10));
}

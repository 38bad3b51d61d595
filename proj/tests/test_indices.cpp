#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "fci/indices.hpp"
#include "support.hpp"

using namespace fci;
using Catch::Matchers::WithinAbs;

TEST_CASE("dimerized limits") {
  const auto topo = fci_test::clean_ssh(20, 0.0, 1.0);
  const ChainGeometry g(20, Convention::CellC2);
  CHECK_THAT(edge_index(topo, 0.05, switch_function(g, 10)), WithinAbs(1.0, 1e-10));
  const auto triv = fci_test::clean_ssh(20, 1.0, 0.0);
  CHECK(std::abs(edge_index(triv, 0.05, switch_function(g, 10))) <= 4.0 * 40 * std::exp(-2.0 / 0.05));
}

TEST_CASE("bulk index equals edge index under CellC2") {
  const auto h = fci_test::clean_ssh(16, 0.6, 1.0);
  for (double delta : {0.01, 0.1, 1.0}) {
    for (int ell : {1, 5, 8, 15}) {
      const auto th = switch_function(h.geometry(), ell);
      const auto f = filter(h, delta);
      CHECK_THAT(bulk_index(h, f, th), WithinAbs(edge_index(h, f, th), 1e-10));
    }
  }
}

TEST_CASE("constant switch gives zero bulk index") {
  const auto h = fci_test::clean_ssh(10, 0.5, 1.0);
  CHECK(bulk_index(h, 0.1, constant_switch(h.geometry(), true)) == 0.0);
  CHECK(bulk_index(h, 0.1, constant_switch(h.geometry(), false)) == 0.0);
  // edge index with theta = 1 is Tr(C (1 - S^2)), zero by chiral symmetry
  CHECK_THAT(edge_index(h, 0.1, constant_switch(h.geometry(), true)), WithinAbs(0.0, 1e-12));
}

TEST_CASE("clean phases at L = 60") {
  const auto topo = index_report(fci_test::clean_ssh(60, 0.5, 1.0), DeltaPolicy::empirical(60));
  CHECK(topo.nearest_integer == 1);
  CHECK(topo.quantization_error < 0.01);
  CHECK_THAT(topo.i_bulk, WithinAbs(1.0, 0.01));
  CHECK(topo.imbalance == 0);
  CHECK(topo.correspondence_residual < 1e-10);
  CHECK(topo.ell == 30);

  const auto triv = index_report(fci_test::clean_ssh(60, 1.0, 0.5), DeltaPolicy::empirical(60));
  CHECK(triv.nearest_integer == 0);
  CHECK(triv.quantization_error < 0.01);
}

TEST_CASE("alternating sites carry the sublattice imbalance") {
  const ChainGeometry g(21, Convention::AlternatingSites);
  const auto h = build_ssh(g, CouplingProfile::homogeneous(11, 0.5, 1.0));
  for (int ell : {3, 7, 11}) {
    const auto r = index_report(h, DeltaPolicy::manual(0.1), ell);
    CHECK(r.imbalance == 1);
    CHECK(r.correspondence_residual < 1e-10);
    CHECK_THAT(r.i_edge - r.i_bulk, WithinAbs(1.0, 1e-10));
  }
  const auto even = index_report(h, DeltaPolicy::manual(0.1), 10);
  CHECK(even.imbalance == 0);
  CHECK(even.correspondence_residual < 1e-10);
}

TEST_CASE("resolve_delta") {
  CHECK(resolve_delta(DeltaPolicy::empirical(32)) == 0.125);
  CHECK_THAT(resolve_delta(DeltaPolicy::theorem(0.5, 1.0, 5.9366, 10000)), WithinAbs(0.1949, 1e-4));
  CHECK(resolve_delta(DeltaPolicy::manual(0.3)) == 0.3);
  CHECK_THROWS_AS(resolve_delta(DeltaPolicy::manual(0.0)), InvalidDelta);
  CHECK_THROWS_AS(resolve_delta(DeltaPolicy::manual(-1.0)), InvalidDelta);
  CHECK_THROWS_AS(resolve_delta(DeltaPolicy::empirical(0)), InvalidDelta);
  CHECK_THROWS_AS(resolve_delta(DeltaPolicy::theorem(0.0, 1.0, 1.0, 10)), InvalidDelta);
}

TEST_CASE("report classification") {
  const auto r = make_report(0.5, 0.5, 0, 0.1, 3);
  CHECK_FALSE(r.classified);
  CHECK(r.quantization_error == 0.5);
  const auto s = make_report(0.98, 0.98, 0, 0.1, 3);
  CHECK(s.classified);
  CHECK(s.nearest_integer == 1);
  CHECK_THAT(s.quantization_error, WithinAbs(0.02, 1e-15));
  CHECK(make_report(-0.97, -0.97, 0, 0.1, 3).nearest_integer == -1);
}

TEST_CASE("densities sum to the indices and localize") {
  const auto h = fci_test::clean_ssh(60, 0.5, 1.0);
  const auto th = switch_function(h.geometry());
  const auto f = filter(h, 0.1);
  const auto edge = index_density(h, f, th, DensityKind::Edge);
  const auto bulk = index_density(h, f, th, DensityKind::Bulk);
  CHECK_THAT(std::accumulate(edge.begin(), edge.end(), 0.0), WithinAbs(edge_index(h, f, th), 1e-12));
  CHECK_THAT(std::accumulate(bulk.begin(), bulk.end(), 0.0), WithinAbs(bulk_index(h, f, th), 1e-12));

  double edge_total = 0, edge_near = 0, bulk_total = 0, bulk_near = 0;
  for (int x = 0; x < 60; ++x) {
    edge_total += std::abs(edge[x]);
    bulk_total += std::abs(bulk[x]);
    if (x < 10) edge_near += std::abs(edge[x]);
    if (std::abs(x - 30) <= 10) bulk_near += std::abs(bulk[x]);
  }
  CHECK(edge_near >= 0.99 * edge_total);
  CHECK(bulk_near >= 0.99 * bulk_total);
  CHECK(to_string(DensityKind::Bulk) == "bulk");
  CHECK(to_string(DensityKind::Edge) == "edge");
}

TEST_CASE("defect chain at L = 30 is close to one") {
  const auto h = fci_test::defect_chain_h(30, 1);
  const double v = edge_index(h, 1.0 / 20, switch_function(h.geometry()));
  CHECK_THAT(v, WithinAbs(1.0, 0.05));
  // frozen from the H^2-block oracle (seed 1)
  CHECK_THAT(v, WithinAbs(0.99999894299049197, 1e-9));
}

TEST_CASE("windowed edge index") {
  const auto p = CouplingProfile::homogeneous(120, 0.5, 1.0);
  const auto h = build_ssh(ChainGeometry(120, Convention::CellC2), p);
  const double full = edge_index(h, 0.1, switch_function(h.geometry(), 60));
  CHECK(windowed_edge_index(p, 0.1, 120) == full);
  const double e60 = std::abs(windowed_edge_index(p, 0.1, 60) - full);
  const double e30 = std::abs(windowed_edge_index(p, 0.1, 30) - full);
  CHECK(e60 < 1e-6);
  CHECK(e60 < e30);
  CHECK_THROWS_AS(windowed_edge_index(p, 0.1, 3), InvalidGeometry);
  CHECK_THROWS_AS(windowed_edge_index(p, 0.1, 121), InvalidGeometry);
}

TEST_CASE("index errors") {
  const auto h = fci_test::clean_ssh(10, 0.5, 1.0);
  const auto other = switch_function(ChainGeometry(12, Convention::CellC2), 3);
  CHECK_THROWS_AS(edge_index(h, 0.1, other), DimensionMismatch);
  CHECK_THROWS_AS(bulk_index(h, 0.1, other), DimensionMismatch);
  CHECK_THROWS_AS(index_report(h, DeltaPolicy::manual(0.1), 10), InvalidSwitch);
  CHECK_THROWS_AS(edge_index(h, 0.0, switch_function(h.geometry())), InvalidDelta);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "seqprob/qcore.hpp"
#include "seqprob/quadrature.hpp"

using namespace seqprob;
using namespace seqprob::qcore;

namespace {

Grid small_grid() { return Grid(128, -10.0, 10.0); }

}  // namespace

TEST_CASE("grid invariants") {
  CHECK_THROWS(Grid(4, 0.0, 1.0));
  CHECK_THROWS(Grid(16, 1.0, 1.0));
  const Grid g(128, -10.0, 10.0);
  CHECK(g.dx() == doctest::Approx(20.0 / 128).epsilon(1e-14));
  CHECK(g.point(0) == doctest::Approx(-10.0));
}

TEST_CASE("sample set algebra") {
  const auto u = SampleSet::interval(0.0, 1.0);
  const auto v = SampleSet::interval(2.0, 3.0);
  const auto w = u.set_union(v);
  CHECK(w.intervals().size() == 2);
  CHECK(u.disjoint_from(v));
  CHECK(w.complement().contains(1.5));
  CHECK(!w.complement().contains(0.5));
  CHECK(w.complement().complement().total_length() == doctest::Approx(2.0));
  CHECK(SampleSet::full_line().is_full_line());
  CHECK(SampleSet::half_line_right(0.0)
            .set_intersection(SampleSet::half_line_left(0.0))
            .is_empty());
  // snapping
  double shift = 0.0;
  const auto s = SampleSet::interval(0.101, 0.399).snapped(0.1, 0.0, &shift);
  CHECK(s.intervals()[0].a == doctest::Approx(0.1));
  CHECK(s.intervals()[0].b == doctest::Approx(0.4));
  CHECK(shift <= 0.05);
  // union merges overlaps instead of throwing
  const auto m = SampleSet::interval(0.0, 1.0).set_union(SampleSet::interval(0.5, 2.0));
  CHECK(m.intervals().size() == 1);
  CHECK(m.total_length() == doctest::Approx(2.0));
}

TEST_CASE("free hamiltonian spectrum matches the discrete dispersion") {
  const Grid g = small_grid();
  const auto h = free_hamiltonian(g, 1.0);
  CHECK(h.flags().hermitian);
  // independent route: eigensolver vs k^2/2m
  std::vector<double> expected;
  for (int i = 0; i < g.n(); ++i) {
    const double k = g.wavenumber(i);
    expected.push_back(k * k / 2.0);
  }
  std::sort(expected.begin(), expected.end());
  const auto& es = h.eigensystem();
  CHECK(es.values.minCoeff() > -1e-10);   // kinetic energy >= 0
  CHECK(std::abs(es.values[0]) < 1e-10);  // zero-momentum mode
  for (int i = 0; i < g.n(); ++i)
    CHECK(std::abs(es.values[i] - expected[i]) < 1e-9 * (1.0 + expected[i]));
  CHECK_THROWS(free_hamiltonian(g, -1.0));
}

TEST_CASE("evolution is unitary and reversible") {
  const Grid g = small_grid();
  const auto h = free_hamiltonian(g, 1.0);
  const auto psi = WaveFunction::gaussian_packet(g, 0.5, 1.0, 0.7);
  const auto same = evolve(psi, h, 0.0);
  CHECK((same.amplitudes() - psi.amplitudes()).norm() == 0.0);
  const auto fwd = evolve(psi, h, 1.3);
  CHECK(fwd.norm() == doctest::Approx(1.0).epsilon(1e-9));
  const auto back = evolve(fwd, h, -1.3);
  CHECK((back.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("free gaussian spread matches the closed form") {
  const Grid g(256, -20.0, 20.0);
  const double m = 1.0, sigma0 = 1.0, t = 2.0;
  const auto h = free_hamiltonian(g, m);
  const auto psi = WaveFunction::gaussian_packet(g, 0.0, sigma0);
  const auto evolved = evolve(psi, h, t);
  double var = 0.0;
  for (int i = 0; i < g.n(); ++i)
    var += g.point(i) * g.point(i) * std::norm(evolved.amplitudes()[i]) * g.dx();
  const double expected = sigma0 * sigma0 + t * t / (4.0 * m * m * sigma0 * sigma0);
  CHECK(std::sqrt(var) == doctest::Approx(std::sqrt(expected)).epsilon(1e-6));
}

TEST_CASE("dense evolution path agrees with the FFT path") {
  const Grid g(64, -8.0, 8.0);
  const auto h = free_hamiltonian(g, 1.0);
  LinearOperator dense(g, h.matrix(), false);
  dense.mutable_flags().hermitian = true;  // free_spectrum unset: dense path
  const auto psi = WaveFunction::gaussian_packet(g, 0.3, 0.8);
  const auto a = evolve(psi, h, 0.9);
  const auto b = evolve(psi, dense, 0.9);
  CHECK((a.amplitudes() - b.amplitudes()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("evolve rejects non-hermitian generators") {
  const Grid g(64, -8.0, 8.0);
  Mat skew = Mat::Zero(64, 64);
  skew(0, 1) = 1.0;
  LinearOperator bad(g, skew, false);
  const auto psi = WaveFunction::gaussian_packet(g, 0.0, 1.0);
  CHECK_THROWS(evolve(psi, bad, 1.0));
}

TEST_CASE("luders reduction") {
  const Grid g = small_grid();
  const auto psi = WaveFunction::gaussian_packet(g, 0.0, 1.0);
  const auto rho = DensityOperator::pure(psi);
  SUBCASE("identity effect returns the state unchanged") {
    const auto r = luders_reduce(rho, LinearOperator::identity(g));
    CHECK(r.probability == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((r.state->kernel() - rho.kernel()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("projector onto the support of a pure state is transparent") {
    const auto p = LinearOperator::projector(g, SampleSet::interval(-9.0, 9.0));
    const auto r = luders_reduce(rho, p);
    CHECK(r.probability == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("half-line projector on a symmetric packet gives 1/2") {
    const auto p = LinearOperator::projector(g, SampleSet::half_line_right(0.0));
    const auto r = luders_reduce(rho, p);
    // independent quadrature of |psi|^2 over the same half-line cells
    double direct = 0.0;
    for (int i = 0; i < g.n(); ++i)
      if (g.point(i) >= 0.0) direct += std::norm(psi.amplitudes()[i]) * g.dx();
    CHECK(r.probability == doctest::Approx(direct).epsilon(1e-12));
    CHECK(std::abs(r.probability - 0.5) < 0.04);  // grid tolerance
  }
  SUBCASE("zero-probability outcome signals incompatibility") {
    const auto p = LinearOperator::projector(g, SampleSet::interval(9.0, 9.5));
    const auto r = luders_reduce(rho, p);
    CHECK(r.probability < 1e-14);
    CHECK(!r.state.has_value());
  }
  SUBCASE("completeness over an exhaustive exclusive projector family") {
    double total = 0.0;
    for (double lo = -10.0; lo < 10.0 - 1e-9; lo += 2.5) {
      const auto p = LinearOperator::projector(g, SampleSet::interval(lo, lo + 2.5));
      total += luders_reduce(rho, p).probability;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("sqrt form for a genuine unsharp effect") {
    Eigen::VectorXd prof(g.n());
    for (int i = 0; i < g.n(); ++i)
      prof[i] = std::exp(-0.5 * g.point(i) * g.point(i));
    const auto eff = LinearOperator::diagonal(g, prof);
    const auto r = luders_reduce(rho, eff);
    CHECK(r.probability > 0.0);
    CHECK(r.state->trace() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("smeared characteristic functions") {
  const SmearedIndicator ind(SampleSet::interval(0.0, 1.0), 0.01);
  SUBCASE("deep inside / boundary / outside") {
    CHECK(smeared_chi(ind, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(smeared_chi(ind, 0.0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(smeared_chi(ind, 1.0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(smeared_chi(ind, -0.5) < 1e-6);
  }
  SUBCASE("L1 distance scales like c*delta with c of order unity") {
    const double l1 = smearing_l1_distance(ind);
    const double c = l1 / ind.delta;
    CHECK(c > 1.0);
    CHECK(c < 2.0);
    // each of the two edges contributes 2 delta E|N| = 2 delta/sqrt(2 pi)
    CHECK(c == doctest::Approx(4.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-5));
  }
  SUBCASE("monotone under set extension") {
    const SmearedIndicator big(
        SampleSet::interval(0.0, 1.0).set_union(SampleSet::interval(2.0, 3.0)), 0.01);
    for (double x = -1.0; x < 4.0; x += 0.037)
      CHECK(smeared_chi(big, x) >= smeared_chi(ind, x) - 1e-15);
  }
  SUBCASE("additive over disjoint sets") {
    const SmearedIndicator left(SampleSet::interval(0.0, 1.0), 0.05);
    const SmearedIndicator right(SampleSet::interval(1.0, 2.0), 0.05);
    const SmearedIndicator both(SampleSet::interval(0.0, 2.0), 0.05);
    for (double x = -1.0; x < 3.0; x += 0.041)
      CHECK(smeared_chi(both, x) ==
            doctest::Approx(smeared_chi(left, x) + smeared_chi(right, x))
                .epsilon(1e-12));
  }
}

TEST_CASE("smearing relative error") {
  const Grid g(512, -30.0, 30.0);
  const auto rho = DensityOperator::pure(WaveFunction::gaussian_packet(g, 0.0, 8.0));
  SUBCASE("error vanishes as delta -> 0") {
    double prev = 1e9;
    for (double d : {0.4, 0.2, 0.1, 0.05}) {
      const auto e =
          smearing_relative_error({SampleSet::interval(-2.0, 2.0), d}, rho);
      CHECK(e.weighted_l1 < prev);
      prev = e.weighted_l1;
    }
  }
  SUBCASE("broad state, set of length 100 delta: error/p(U) < c' * 0.01") {
    // quadrature oracle gives c' = 2.39 for this configuration (order unity)
    const double delta = 0.04;
    const auto e =
        smearing_relative_error({SampleSet::interval(-2.0, 2.0), delta}, rho, 2.5);
    CHECK(e.weighted_l1 / e.probability < 2.5 * 0.01);
    CHECK(e.weighted_l1 < e.bound);
    CHECK(e.weighted_l1 / e.probability == doctest::Approx(0.023891).epsilon(0.01));
  }
  SUBCASE("no mass near the boundary => negligible error") {
    const auto narrow =
        DensityOperator::pure(WaveFunction::gaussian_packet(g, 0.0, 0.5));
    const auto e =
        smearing_relative_error({SampleSet::interval(-15.0, 15.0), 0.2}, narrow);
    CHECK(e.weighted_l1 < 1e-8);
  }
  CHECK_THROWS(smearing_relative_error({SampleSet::empty(), 0.1}, rho));
}

TEST_CASE("json snapshots round-trip") {
  const Grid g(64, -5.0, 5.0);
  const auto psi = WaveFunction::gaussian_packet(g, 0.7, 0.9, -1.2);
  const auto j = wavefunction_to_json(psi);
  const auto back = wavefunction_from_json(j);
  CHECK(back.grid().same_as(g));
  CHECK((back.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("density operator invariants are enforced") {
  const Grid g(64, -5.0, 5.0);
  Mat bad = Mat::Identity(64, 64);  // trace*dx != 1
  CHECK_THROWS(DensityOperator(g, bad));
  const auto psi = WaveFunction::gaussian_packet(g, 0.0, 1.0);
  const auto rho = DensityOperator::pure(psi);
  CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("edge guard flags packets leaking into the boundary") {
  const Grid g(128, -10.0, 10.0);
  CHECK(WaveFunction::gaussian_packet(g, 0.0, 1.0).edge_mass() < 1e-6);
  CHECK(WaveFunction::gaussian_packet(g, 9.0, 2.0).edge_mass() > 1e-6);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "seqprob/qcore.hpp"
#include "seqprob/seqmeas.hpp"

using namespace seqprob;
using namespace seqprob::qcore;
using namespace seqprob::seqmeas;

namespace {

LinearOperator position_potential(const Grid& g) {
  Eigen::VectorXd v(g.n());
  for (int i = 0; i < g.n(); ++i) v[i] = 0.3 * g.point(i);
  return LinearOperator::diagonal(g, v);  // commutes with position projectors
}

const SampleSet kRight = SampleSet::half_line_right(0.0);
const SampleSet kLeft = SampleSet::half_line_left(0.0);

}  // namespace

TEST_CASE("history specs enforce ordering and nonempty slots") {
  CHECK_THROWS(HistorySpec({{1.0, kRight}, {0.5, kRight}}));
  CHECK_THROWS(HistorySpec({{0.0, SampleSet::empty()}}));
  const HistorySpec h({{0.0, kRight}, {1.0, kLeft}});
  CHECK(h.without_slot(0).size() == 1);
  CHECK(h.with_slot(1, kRight).entries()[1].set.contains(1.0));
}

TEST_CASE("class operators") {
  const Grid g(128, -10.0, 10.0);
  const auto ham = free_hamiltonian(g, 1.0);
  SUBCASE("single full-line entry is the identity") {
    const auto c = class_operator(HistorySpec({{0.0, SampleSet::full_line()}}), ham,
                                  SharpGridKind{0.15625});
    CHECK((c.matrix() - Mat::Identity(g.n(), g.n())).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("commuting hamiltonian: product of projectors") {
    const auto hc = position_potential(g);
    const auto c = class_operator(HistorySpec({{0.0, kRight}, {1.0, kLeft}}), hc,
                                  SharpGridKind{0.15625});
    const Mat expect = LinearOperator::projector(g, kLeft).matrix() *
                       LinearOperator::projector(g, kRight).matrix();
    CHECK((c.matrix() - expect).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("free particle: C^dag C is far from idempotent") {
    const auto c = class_operator(HistorySpec({{0.0, kRight}, {1.0, kRight}}), ham,
                                  SharpGridKind{0.15625});
    const Mat m = c.matrix().adjoint() * c.matrix();
    LinearOperator defect(g, m * m - m, false);
    CHECK(defect.operator_norm() > 0.01);
  }
}

TEST_CASE("history probabilities") {
  const Grid g(128, -12.8, 12.8);
  const auto ham = free_hamiltonian(g, 1.0);
  const auto psi = WaveFunction::gaussian_packet(g, 0.0, 1.0);
  const auto rho = DensityOperator::pure(psi);
  const PovmKind kind = SharpGridKind{0.2};
  SUBCASE("full-line history is certain") {
    CHECK(history_probability(rho, HistorySpec({{0.7, SampleSet::full_line()}}), ham,
                              kind) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("single-time history reduces to the Born rule") {
    const auto h = HistorySpec({{0.9, kRight}});
    const double p = history_probability(rho, h, ham, kind);
    const auto proj =
        qcore::heisenberg(LinearOperator::projector(g, kRight), ham, 0.9);
    CHECK(p == doctest::Approx(expectation(rho, proj)).epsilon(1e-10));
  }
  SUBCASE("pure-state pipeline agrees with the dense-matrix trace") {
    const auto h = HistorySpec({{0.0, kRight}, {1.0, kLeft}});
    const double a = history_probability(rho, h, ham, kind);
    const double b = history_probability(psi, h, ham, kind);
    CHECK(a == doctest::Approx(b).epsilon(1e-11));
    CHECK(a >= 0.0);
    CHECK(a <= 1.0 + 1e-9);
  }
}

TEST_CASE("decoherence functional") {
  const Grid g(128, -12.8, 12.8);
  const auto ham = free_hamiltonian(g, 1.0);
  const auto psi = WaveFunction::gaussian_packet(g, 0.4, 1.0, 0.3);
  const auto rho = DensityOperator::pure(psi);
  const PovmKind kind = SharpGridKind{0.2};
  const HistorySpec a({{0.0, kRight}, {1.0, kRight}});
  const HistorySpec b({{0.0, kLeft}, {1.0, kRight}});
  SUBCASE("diagonal equals the history probability") {
    const auto d = decoherence_functional(rho, a, a, ham, kind);
    CHECK(std::abs(d.value.imag()) < 1e-12);
    CHECK(d.value.real() ==
          doctest::Approx(history_probability(rho, a, ham, kind)).epsilon(1e-12));
  }
  SUBCASE("hermitian symmetry") {
    const auto dab = decoherence_functional(rho, a, b, ham, kind);
    const auto dba = decoherence_functional(rho, b, a, ham, kind);
    CHECK(std::abs(dab.value - std::conj(dba.value)) < 1e-12);
  }
  SUBCASE("commuting case has no off-diagonal real part") {
    const auto hc = position_potential(g);
    const auto d = decoherence_functional(rho, a, b, hc, kind);
    CHECK(std::abs(d.value.real()) < 1e-10);
  }
  SUBCASE("pure-state route matches the dense route") {
    const auto d1 = decoherence_functional(rho, a, b, ham, kind);
    const auto d2 = decoherence_functional(psi, a, b, ham, kind);
    CHECK(std::abs(d1.value - d2.value) < 1e-12);
  }
  SUBCASE("mismatched time grids are rejected") {
    CHECK_THROWS(decoherence_functional(
        rho, a, HistorySpec({{0.0, kLeft}, {1.5, kRight}}), ham, kind));
  }
}

TEST_CASE("additivity defect is the off-diagonal decoherence") {
  const Grid g(128, -12.8, 12.8);
  const auto ham = free_hamiltonian(g, 1.0);
  const auto rho =
      DensityOperator::pure(WaveFunction::gaussian_packet(g, 0.4, 1.0, 0.5));
  const PovmKind kind = SharpGridKind{0.2};
  const HistorySpec a({{0.0, SampleSet::interval(0.0, 1.2)}, {1.0, kRight}});
  const HistorySpec b({{0.0, SampleSet::interval(-1.2, 0.0)}, {1.0, kRight}});
  const auto ad = additivity_defect(rho, a, b, ham, kind);
  CHECK(ad.defect == doctest::Approx(ad.two_re_d).epsilon(1e-12));
  SUBCASE("commuting case is additive") {
    const auto hc = position_potential(g);
    const auto adc = additivity_defect(rho, a, b, hc, kind);
    CHECK(std::abs(adc.defect) < 1e-10);
  }
  SUBCASE("complement slot reproduces d(alpha, not-alpha) in that slot") {
    const HistorySpec alpha({{0.0, kRight}, {1.0, kRight}});
    const HistorySpec nalpha({{0.0, kLeft}, {1.0, kRight}});
    const auto d = decoherence_functional(rho, alpha, nalpha, ham, kind);
    const auto adf = additivity_defect(rho, alpha, nalpha, ham, kind);
    CHECK(adf.defect == doctest::Approx(2.0 * d.value.real()).epsilon(1e-11));
  }
  SUBCASE("gaussian kind is rejected (not slot-linear)") {
    CHECK_THROWS(additivity_defect(rho, a, b, ham, GaussianSqrtKind{0.2}));
  }
}

TEST_CASE("discrete two-time POVM") {
  Mat p0(2, 2), p1(2, 2), sx(2, 2);
  p0 << 1, 0, 0, 0;
  p1 << 0, 0, 0, 1;
  sx << 0, 1, 1, 0;
  SUBCASE("eigenstate at t = 0") {
    Mat rho = p0;
    CHECK(discrete_two_time_povm(rho, 0, 0, sx, 0.0, {p0, p1}) ==
          doctest::Approx(1.0));
    CHECK(discrete_two_time_povm(rho, 0, 1, sx, 0.0, {p0, p1}) ==
          doctest::Approx(0.0));
    CHECK(discrete_two_time_povm(rho, 1, 0, sx, 0.0, {p0, p1}) ==
          doctest::Approx(0.0));
  }
  SUBCASE("rabi oscillation matches the hand formula") {
    Mat rho(2, 2);
    rho << 0.7, 0.2, 0.2, 0.3;
    const double t = 0.6;
    // p(i,0;j,t) = <i|rho|i> |<i|e^{-iHt}|j>|^2 for H = sigma_x
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double amp2 =
            (i == j) ? std::cos(t) * std::cos(t) : std::sin(t) * std::sin(t);
        const double expect = rho(i, i).real() * amp2;
        CHECK(discrete_two_time_povm(rho, i, j, sx, t, {p0, p1}) ==
              doctest::Approx(expect).epsilon(1e-12));
      }
  }
  SUBCASE("completeness for a random density matrix") {
    Mat rho(2, 2);
    rho << 0.6, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.4;
    double total = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        total += discrete_two_time_povm(rho, i, j, sx, 1.1, {p0, p1});
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("non-exclusive projectors are rejected") {
    CHECK_THROWS(discrete_two_time_povm(p0, 0, 0, sx, 1.0, {p0, p0}));
  }
}

TEST_CASE("gaussian position POVM") {
  const Grid g(128, -10.0, 10.0);
  const double delta = 0.5;
  SUBCASE("elements are diagonal Gaussian profiles") {
    const auto e = gaussian_povm_element(g, 1.0, delta);
    CHECK(e.op.flags().diagonal);
    const double peak = e.op.matrix()(g.index_of(1.0), g.index_of(1.0)).real();
    CHECK(peak ==
          doctest::Approx(1.0 / (delta * std::sqrt(2 * M_PI))).epsilon(1e-6));
  }
  SUBCASE("completeness and first moment") {
    const auto one = gaussian_povm_completeness(g, delta);
    const auto x = gaussian_povm_first_moment(g, delta);
    for (int i = 0; i < g.n(); ++i) {
      CHECK(std::abs(one.matrix()(i, i).real() - 1.0) < 1e-6);
      CHECK(std::abs(x.matrix()(i, i).real() - g.point(i)) < 1e-6);
    }
  }
  SUBCASE("under-resolved delta is rejected") {
    CHECK_THROWS(gaussian_povm_element(g, 0.0, 0.5 * g.dx()));
  }
}

TEST_CASE("sequential sqrt POVM") {
  const Grid g(128, -12.8, 12.8);
  const auto ham = free_hamiltonian(g, 1.0);
  const double delta = 0.4;
  SUBCASE("single-time history reduces to the plain unsharp effect") {
    const auto r = sqrt_povm_sequential(
        g, HistorySpec({{0.0, SampleSet::interval(-1.0, 1.0)}}), ham, delta);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(g.n());
    for (int c = 0; c < g.n(); ++c) {
      if (!SampleSet::interval(-1.0, 1.0).contains(g.point(c))) continue;
      for (int i = 0; i < g.n(); ++i) {
        const double u = (g.point(i) - g.point(c)) / delta;
        d[i] += std::exp(-0.5 * u * u) / (delta * std::sqrt(2 * M_PI)) * g.dx();
      }
    }
    for (int i = 0; i < g.n(); ++i)
      CHECK(std::abs(r.op.matrix()(i, i).real() - d[i]) < 1e-12);
  }
  SUBCASE("normalization: all slots full line gives the identity (n = 1, 2, 3)") {
    for (int n = 1; n <= 3; ++n) {
      std::vector<HistoryEntry> es;
      for (int k = 0; k < n; ++k) es.push_back({0.4 * k, SampleSet::full_line()});
      const auto r = sqrt_povm_sequential(g, HistorySpec(es), ham, delta);
      CHECK((r.op.matrix() - Mat::Identity(g.n(), g.n())).cwiseAbs().maxCoeff() <
            1e-6);
    }
  }
  SUBCASE("dense operator and pure-state pipeline agree") {
    const auto psi = WaveFunction::gaussian_packet(g, 0.3, 1.0);
    const HistorySpec h({{0.0, kRight}, {1.0, SampleSet::interval(0.0, 2.0)}});
    const double a =
        sqrt_povm_probability(DensityOperator::pure(psi), h, ham, delta);
    const double b = sqrt_povm_probability(psi, h, ham, delta);
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
  }
  SUBCASE("operator norm falls monotonically as delta -> 0") {
    const Grid gf(1024, -6.4, 6.4);
    const auto hamf = free_hamiltonian(gf, 1.0);
    const HistorySpec h({{0.0, SampleSet::interval(0.0, 1.0)},
                         {1.0, SampleSet::interval(0.0, 1.0)}});
    double prev = 1e9;
    for (double d : {0.2, 0.1, 0.05, 0.025}) {
      const auto r = sqrt_povm_sequential(gf, h, hamf, d);
      const double norm = r.op.operator_norm();
      CHECK(norm < prev);
      prev = norm;
    }
  }
}

TEST_CASE("interference terms") {
  const Grid g(1024, -12.8, 12.8);
  const auto ham = free_hamiltonian(g, 1.0);
  const auto psi = WaveFunction::gaussian_packet(g, 0.0, 1.0);
  const double delta = 0.05;
  SUBCASE("commuting case has no interference") {
    const auto hc = position_potential(g);
    const auto d = interference_term(psi, 0.5, delta, kRight, 0.0, 1.0, hc);
    CHECK(std::abs(d) < 1e-10);
  }
  SUBCASE("defect equals the integrated interference identically") {
    const HistorySpec h2({{0.0, kRight}, {1.0, SampleSet::interval(6.0, 9.0)}});
    const auto budget = integrated_interference(psi, h2, ham, delta);
    CHECK(budget.p_coarse - budget.p_fine ==
          doctest::Approx(budget.integrated).epsilon(1e-12));
  }
  SUBCASE("single-cell interference is the same order as the probability") {
    const double t = 1.0;
    const auto d = interference_term(psi, 0.5, delta, SampleSet::interval(6.0, 9.0),
                                     0.0, t, ham);
    Vec a = Vec::Zero(g.n());
    for (int i = 0; i < g.n(); ++i)
      if (g.point(i) >= 0.5 - delta && g.point(i) < 0.5 + delta)
        a[i] = psi.amplitudes()[i];
    const WaveFunction cell(g, std::move(a), false);
    const auto evolved = evolve(cell, ham, t);
    double p_pair = 0.0;
    for (int i = 0; i < g.n(); ++i)
      if (g.point(i) >= 6.0 && g.point(i) < 9.0)
        p_pair += std::norm(evolved.amplitudes()[i]) * g.dx();
    CHECK(std::abs(2.0 * d.real()) / p_pair > 0.1);
  }
}

TEST_CASE("compatibility check splits by slot position") {
  const Grid g(1024, -12.8, 12.8);
  const auto ham = free_hamiltonian(g, 1.0);
  const auto psi = WaveFunction::gaussian_packet(g, 0.0, 1.0);
  const double delta = 0.1;
  const HistorySpec h({{0.5, kRight}, {1.0, SampleSet::interval(0.0, 1.0)}});
  SUBCASE("final-slot marginalization is exact") {
    const auto r = compatibility_check(psi, h, 1, ham, delta);
    CHECK(r.defect < 1e-6);
  }
  SUBCASE("interior-slot marginalization fails badly") {
    const auto r = compatibility_check(psi, h, 0, ham, delta);
    CHECK(r.defect > 0.01 * r.rhs);
  }
  SUBCASE("commuting hamiltonian restores full compatibility") {
    const auto hc = position_potential(g);
    for (int slot : {0, 1}) {
      const auto r = compatibility_check(psi, h, slot, hc, delta);
      CHECK(r.defect < 1e-9);
    }
  }
}

TEST_CASE("no-go witnesses") {
  const Grid g(256, -12.8, 12.8);
  const auto ham = free_hamiltonian(g, 1.0);
  const auto rho =
      DensityOperator::pure(WaveFunction::gaussian_packet(g, 0.0, 1.0));
  SUBCASE("commuting control: both witnesses vanish") {
    const auto hc = position_potential(g);
    const auto w = nogo_witness({rho}, hc, 0.1, 0.0, 1.0, kRight,
                                SampleSet::interval(0.0, 1.0));
    CHECK(w.commutator_norm < 1e-9);
    CHECK(w.marginal_nonidem < 1e-9);
  }
  SUBCASE("free particle: commutator and marginal witnesses are large") {
    const auto w = nogo_witness({rho}, ham, 0.1, 0.0, 1.0, kRight,
                                SampleSet::interval(0.0, 1.0));
    CHECK(w.commutator_norm > 0.1);
    CHECK(w.marginal_nonidem > 0.01);
    REQUIRE(w.state_probabilities.size() == 1);
    CHECK(w.state_probabilities[0] > 0.0);
  }
}

TEST_CASE("final-slot partition sums to the shorter history") {
  const Grid g(256, -12.8, 12.8);
  const auto ham = free_hamiltonian(g, 1.0);
  const auto psi = WaveFunction::gaussian_packet(g, 0.2, 1.0);
  const double delta = 0.4;
  const HistorySpec base({{0.0, kRight}});
  const double single = sqrt_povm_probability(psi, base, ham, delta);
  double total = 0.0;
  const std::vector<SampleSet> parts{
      SampleSet::half_line_left(-2.0), SampleSet::interval(-2.0, 0.0),
      SampleSet::interval(0.0, 2.0), SampleSet::half_line_right(2.0)};
  for (const auto& u2 : parts)
    total += sqrt_povm_probability(psi, HistorySpec({{0.0, kRight}, {1.0, u2}}),
                                   ham, delta);
  CHECK(total == doctest::Approx(single).epsilon(1e-6));
}

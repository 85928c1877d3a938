#include "seqprob/seqmeas.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqprob::seqmeas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double gauss_pdf(double x, double delta) {
  const double u = x / delta;
  if (std::abs(u) > 40.0) return 0.0;
  return std::exp(-0.5 * u * u) / (delta * std::sqrt(2.0 * M_PI));
}

void require_resolvable(const Grid& g, double delta) {
  if (delta < 2.0 * g.dx() - 1e-12)
    throw std::invalid_argument("delta under-resolved on this grid (need >= 2*dx)");
}

// Center list for integrating over a set at grid spacing; full-line sets get
// centers extended past the box so completeness holds for interior rows.
std::vector<double> centers_in(const Grid& g, const SampleSet& set, double delta) {
  std::vector<double> cs;
  if (set.is_full_line()) {
    const int pad = static_cast<int>(std::ceil(8.0 * delta / g.dx()));
    for (int i = -pad; i < g.n() + pad; ++i) cs.push_back(g.point(i));
    return cs;
  }
  const SampleSet cl = set.clamped(g);
  for (int i = 0; i < g.n(); ++i)
    if (cl.contains(g.point(i))) cs.push_back(g.point(i));
  return cs;
}

Eigen::VectorXd sqrt_gauss_profile(const Grid& g, double center, double delta) {
  Eigen::VectorXd d(g.n());
  for (int i = 0; i < g.n(); ++i)
    d[i] = std::sqrt(gauss_pdf(g.point(i) - center, delta));
  return d;
}

}  // namespace

// ----------------------------------------------------------- HistorySpec ---

HistorySpec::HistorySpec(std::vector<HistoryEntry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("HistorySpec: needs >= 1 entry");
  for (size_t i = 0; i + 1 < entries_.size(); ++i)
    if (!(entries_[i].time < entries_[i + 1].time))
      throw std::invalid_argument("HistorySpec: times must be strictly increasing");
  for (const auto& e : entries_)
    if (e.set.is_empty())
      throw std::invalid_argument("HistorySpec: empty sample set in a slot");
}

HistorySpec HistorySpec::with_slot(int slot, SampleSet set) const {
  auto es = entries_;
  es.at(slot).set = std::move(set);
  return HistorySpec(std::move(es));
}

HistorySpec HistorySpec::without_slot(int slot) const {
  auto es = entries_;
  es.erase(es.begin() + slot);
  return HistorySpec(std::move(es));
}

bool HistorySpec::same_times(const HistorySpec& other) const {
  if (size() != other.size()) return false;
  for (int i = 0; i < size(); ++i)
    if (std::abs(entries_[i].time - other.entries_[i].time) > 1e-12) return false;
  return true;
}

// ------------------------------------------------------------ Gaussian POVM

EffectOperator gaussian_povm_element(const Grid& grid, double x_center,
                                     double delta) {
  require_resolvable(grid, delta);
  Eigen::VectorXd d(grid.n());
  for (int i = 0; i < grid.n(); ++i)
    d[i] = gauss_pdf(grid.point(i) - x_center, delta);
  return {LinearOperator::diagonal(grid, d)};
}

LinearOperator gaussian_povm_completeness(const Grid& grid, double delta) {
  require_resolvable(grid, delta);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.n());
  for (double c : centers_in(grid, SampleSet::full_line(), delta))
    for (int i = 0; i < grid.n(); ++i)
      sum[i] += gauss_pdf(grid.point(i) - c, delta) * grid.dx();
  return LinearOperator::diagonal(grid, sum);
}

LinearOperator gaussian_povm_first_moment(const Grid& grid, double delta) {
  require_resolvable(grid, delta);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.n());
  for (double c : centers_in(grid, SampleSet::full_line(), delta))
    for (int i = 0; i < grid.n(); ++i)
      sum[i] += c * gauss_pdf(grid.point(i) - c, delta) * grid.dx();
  return LinearOperator::diagonal(grid, sum);
}

// --------------------------------------------------------- Class operators

namespace {

// Slot operator at time 0 (Schroedinger picture): projector or sqrt-effect.
LinearOperator slot_operator(const Grid& g, const SampleSet& set,
                             const PovmKind& kind) {
  if (std::holds_alternative<DiscreteSpectralKind>(kind))
    throw std::invalid_argument(
        "discrete_spectral kind requires explicit projector lists; use "
        "discrete_two_time_povm");
  if (const auto* sharp = std::get_if<SharpGridKind>(&kind)) {
    // Sets snapped to the delta-cell lattice anchored at the grid origin.
    const SampleSet snapped =
        set.is_full_line() ? set : set.snapped(sharp->delta, g.x_min());
    return LinearOperator::projector(g, snapped);
  }
  const auto& gk = std::get<GaussianSqrtKind>(kind);
  require_resolvable(g, gk.delta);
  if (set.is_full_line()) return LinearOperator::identity(g);
  // sqrt of Pi(U) = int_U Pi_x dx: diagonal with smeared-indicator profile.
  Eigen::VectorXd d(g.n());
  qcore::SmearedIndicator ind(set, gk.delta);
  for (int i = 0; i < g.n(); ++i)
    d[i] = std::sqrt(qcore::smeared_chi(ind, g.point(i)));
  return LinearOperator::diagonal(g, d);
}

}  // namespace

LinearOperator class_operator(const HistorySpec& h, const LinearOperator& ham,
                              const PovmKind& kind) {
  const Grid& g = ham.grid();
  Mat c = Mat::Identity(g.n(), g.n());
  for (const auto& entry : h.entries()) {
    const LinearOperator slot = slot_operator(g, entry.set, kind);
    const LinearOperator q = qcore::heisenberg(slot, ham, entry.time);
    c = q.matrix() * c;
  }
  LinearOperator out(g, std::move(c), false);
  return out;
}

double history_probability(const DensityOperator& rho, const HistorySpec& h,
                           const LinearOperator& ham, const PovmKind& kind) {
  const LinearOperator c = class_operator(h, ham, kind);
  const Mat m = c.matrix() * rho.kernel() * c.matrix().adjoint();
  return m.trace().real() * rho.grid().dx();
}

namespace {

// C_alpha |psi> through the state pipeline (fast for free hamiltonians):
// evolve to t_1, apply slot, evolve t_2-t_1, ..., then back to t=0.
Vec apply_class_operator(const WaveFunction& psi, const HistorySpec& h,
                         const LinearOperator& ham, const PovmKind& kind) {
  const Grid& g = psi.grid();
  WaveFunction cur = psi;
  double now = 0.0;
  for (const auto& entry : h.entries()) {
    cur = qcore::evolve(cur, ham, entry.time - now);
    now = entry.time;
    const LinearOperator slot = slot_operator(g, entry.set, kind);
    Vec a;
    if (slot.flags().diagonal) {
      a = cur.amplitudes();
      for (int i = 0; i < g.n(); ++i) a[i] *= slot.matrix()(i, i);
    } else {
      a = slot.matrix() * cur.amplitudes();
    }
    cur = WaveFunction(g, std::move(a), false);
  }
  cur = qcore::evolve(cur, ham, -now);
  return cur.amplitudes();
}

}  // namespace

double history_probability(const WaveFunction& psi, const HistorySpec& h,
                           const LinearOperator& ham, const PovmKind& kind) {
  const Vec v = apply_class_operator(psi, h, ham, kind);
  return v.squaredNorm() * psi.grid().dx();
}

DecoherenceValue decoherence_functional(const DensityOperator& rho,
                                        const HistorySpec& a, const HistorySpec& b,
                                        const LinearOperator& ham,
                                        const PovmKind& kind) {
  if (!a.same_times(b))
    throw std::invalid_argument("decoherence_functional: time grids differ");
  const LinearOperator ca = class_operator(a, ham, kind);
  const LinearOperator cb = class_operator(b, ham, kind);
  const Complex d =
      (ca.matrix() * rho.kernel() * cb.matrix().adjoint()).trace() * rho.grid().dx();
  return {d};
}

DecoherenceValue decoherence_functional(const WaveFunction& psi,
                                        const HistorySpec& a, const HistorySpec& b,
                                        const LinearOperator& ham,
                                        const PovmKind& kind) {
  if (!a.same_times(b))
    throw std::invalid_argument("decoherence_functional: time grids differ");
  const Vec va = apply_class_operator(psi, a, ham, kind);
  const Vec vb = apply_class_operator(psi, b, ham, kind);
  return {(vb.adjoint() * va)(0, 0) * psi.grid().dx()};
}

AdditivityDefect additivity_defect(const DensityOperator& rho, const HistorySpec& a,
                                   const HistorySpec& b, const LinearOperator& ham,
                                   const PovmKind& kind) {
  if (std::holds_alternative<GaussianSqrtKind>(kind))
    throw std::invalid_argument(
        "additivity_defect: slot-linear (projector) kinds only");
  if (!a.same_times(b))
    throw std::invalid_argument("additivity_defect: histories not joinable");
  auto same_set = [](const SampleSet& u, const SampleSet& v) {
    if (u.intervals().size() != v.intervals().size()) return false;
    for (size_t k = 0; k < u.intervals().size(); ++k)
      if (u.intervals()[k].a != v.intervals()[k].a ||
          u.intervals()[k].b != v.intervals()[k].b)
        return false;
    return true;
  };
  int diff_slot = -1;
  for (int i = 0; i < a.size(); ++i) {
    if (!same_set(a.entries()[i].set, b.entries()[i].set)) {
      if (diff_slot >= 0)
        throw std::invalid_argument("additivity_defect: histories differ in > 1 slot");
      diff_slot = i;
    }
  }
  if (diff_slot < 0)
    throw std::invalid_argument("additivity_defect: histories identical");
  if (!a.entries()[diff_slot].set.disjoint_from(b.entries()[diff_slot].set))
    throw std::invalid_argument("additivity_defect: sets not disjoint at the slot");

  const HistorySpec join = a.with_slot(
      diff_slot, a.entries()[diff_slot].set.set_union(b.entries()[diff_slot].set));
  AdditivityDefect out;
  out.p_join = history_probability(rho, join, ham, kind);
  out.p_a = history_probability(rho, a, ham, kind);
  out.p_b = history_probability(rho, b, ham, kind);
  out.defect = out.p_join - out.p_a - out.p_b;
  out.two_re_d = 2.0 * decoherence_functional(rho, a, b, ham, kind).value.real();
  return out;
}

// ---------------------------------------------- discrete two-time POVM ----

double discrete_two_time_povm(const Mat& rho, int i, int j, const Mat& ham, double t,
                              const std::vector<Mat>& projectors) {
  const int n = static_cast<int>(rho.rows());
  Mat sum = Mat::Zero(n, n);
  for (const auto& p : projectors) {
    sum += p;
    if ((p * p - p).cwiseAbs().maxCoeff() > 1e-9)
      throw std::invalid_argument("discrete_two_time_povm: non-idempotent projector");
  }
  for (size_t a = 0; a < projectors.size(); ++a)
    for (size_t b = a + 1; b < projectors.size(); ++b)
      if ((projectors[a] * projectors[b]).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("discrete_two_time_povm: non-exclusive projectors");
  if ((sum - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("discrete_two_time_povm: projectors not exhaustive");

  Eigen::SelfAdjointEigenSolver<Mat> es(ham);
  Vec phase(n);
  for (int k = 0; k < n; ++k) phase[k] = std::polar(1.0, es.eigenvalues()[k] * t);
  const Mat u_dag = es.eigenvectors() * phase.asDiagonal() *
                    es.eigenvectors().adjoint();  // e^{+iHt}
  const Mat q = u_dag * projectors.at(j) * u_dag.adjoint();
  return (q * projectors.at(i) * rho * projectors.at(i)).trace().real();
}

// ------------------------------------------------- sequential sqrt POVM ----

namespace {

// Recursive nesting: M_k = int_{U_k} S_x (e^{iH dt} M_{k+1} e^{-iH dt}) S_x dx.
Mat nest_sqrt_povm(const Grid& g, const HistorySpec& h, double delta, int slot,
                   const Mat& inner) {
  // inner is the operator for slots > slot, expressed at time t_slot.
  const SampleSet& u = h.entries()[slot].set;
  Mat acc = Mat::Zero(g.n(), g.n());
  if (slot == h.size() - 1) {
    // innermost: plain effect Pi(U) = sum over centers in U of Pi_c dx, kept
    // on the same center lattice as the sandwich integrals so that final-slot
    // marginalization is an algebraic identity
    Eigen::VectorXd d = Eigen::VectorXd::Zero(g.n());
    for (double c : centers_in(g, u, delta))
      for (int i = 0; i < g.n(); ++i)
        d[i] += gauss_pdf(g.point(i) - c, delta) * g.dx();
    acc = d.cast<Complex>().asDiagonal();
    return acc;
  }
  // sandwich: sum over centers in U_slot of S_x inner S_x * dx
  for (double c : centers_in(g, u, delta)) {
    const Eigen::VectorXd s = sqrt_gauss_profile(g, c, delta);
    const Vec sc = s.cast<Complex>();
    acc += (sc.asDiagonal() * inner * sc.asDiagonal()) * g.dx();
  }
  return acc;
}

}  // namespace

EffectOperator sqrt_povm_sequential(const Grid& grid, const HistorySpec& h,
                                    const LinearOperator& ham, double delta) {
  require_resolvable(grid, delta);
  const int n = h.size();
  // build from the innermost slot outward
  Mat m = nest_sqrt_povm(grid, h, delta, n - 1, Mat());
  for (int slot = n - 2; slot >= 0; --slot) {
    const double dt = h.entries()[slot + 1].time - h.entries()[slot].time;
    const LinearOperator u = qcore::evolution_operator(ham, dt);
    const Mat evolved = u.matrix().adjoint() * m * u.matrix();  // e^{iH dt} m e^{-iH dt}
    m = nest_sqrt_povm(grid, h, delta, slot, evolved);
  }
  // rotate to t = 0
  const double t0 = h.entries()[0].time;
  if (t0 != 0.0) {
    const LinearOperator u = qcore::evolution_operator(ham, t0);
    m = u.matrix().adjoint() * m * u.matrix();
  }
  LinearOperator op(grid, std::move(m), false);
  op.mutable_flags().hermitian = true;
  op.mutable_flags().positive = true;
  return {op};
}

EffectOperator sqrt_povm_sequential_custom(
    const Grid& grid, const HistorySpec& h, const LinearOperator& ham,
    const std::vector<double>& centers, double center_weight,
    const std::function<double(double, double)>& sqrt_profile) {
  const int n = h.size();
  Mat m;
  for (int slot = n - 1; slot >= 0; --slot) {
    if (slot < n - 1) {
      const double dt = h.entries()[slot + 1].time - h.entries()[slot].time;
      const LinearOperator u = qcore::evolution_operator(ham, dt);
      m = u.matrix().adjoint() * m * u.matrix();
    }
    const SampleSet& uset = h.entries()[slot].set;
    Mat acc = Mat::Zero(grid.n(), grid.n());
    for (double c : centers) {
      if (!uset.is_full_line() && !uset.contains(c)) continue;
      Eigen::VectorXd s(grid.n());
      for (int i = 0; i < grid.n(); ++i) s[i] = sqrt_profile(grid.point(i), c);
      const Vec sc = s.cast<Complex>();
      if (slot == n - 1) {
        Mat eff = Mat::Zero(grid.n(), grid.n());
        for (int i = 0; i < grid.n(); ++i) eff(i, i) = s[i] * s[i];
        acc += eff * center_weight;
      } else {
        acc += (sc.asDiagonal() * m * sc.asDiagonal()) * center_weight;
      }
    }
    m = acc;
  }
  const double t0 = h.entries()[0].time;
  if (t0 != 0.0) {
    const LinearOperator u = qcore::evolution_operator(ham, t0);
    m = u.matrix().adjoint() * m * u.matrix();
  }
  LinearOperator op(grid, std::move(m), false);
  op.mutable_flags().hermitian = true;
  op.mutable_flags().positive = true;
  return {op};
}

double sqrt_povm_probability(const DensityOperator& rho, const HistorySpec& h,
                             const LinearOperator& ham, double delta) {
  const EffectOperator r = sqrt_povm_sequential(rho.grid(), h, ham, delta);
  return qcore::expectation(rho, r.op);
}

double sqrt_povm_probability(const WaveFunction& psi, const HistorySpec& h,
                             const LinearOperator& ham, double delta) {
  // State pipeline: repeatedly collapse with sqrt(Pi_x) over centers; the
  // probability is sum over center tuples. Done recursively over slots.
  const Grid& g = psi.grid();
  require_resolvable(g, delta);
  // final-slot effect diagonal, shared across branches
  Eigen::VectorXd final_eff;
  const SampleSet& last_set = h.entries().back().set;
  if (!last_set.is_full_line()) {
    final_eff = Eigen::VectorXd::Zero(g.n());
    for (double c : centers_in(g, last_set, delta))
      for (int i = 0; i < g.n(); ++i)
        final_eff[i] += gauss_pdf(g.point(i) - c, delta) * g.dx();
  }
  struct Walker {
    const Grid& g;
    const HistorySpec& h;
    const LinearOperator& ham;
    double delta;
    const Eigen::VectorXd& final_eff;

    double run(const WaveFunction& state, int slot, double now) const {
      const auto& entry = h.entries()[slot];
      const WaveFunction at_t = qcore::evolve(state, ham, entry.time - now);
      if (slot == h.size() - 1) {
        if (entry.set.is_full_line()) return at_t.amplitudes().squaredNorm() * g.dx();
        double p = 0.0;
        for (int i = 0; i < g.n(); ++i)
          p += final_eff[i] * std::norm(at_t.amplitudes()[i]) * g.dx();
        return p;
      }
      double p = 0.0;
      for (double c : centers_in(g, entry.set, delta)) {
        Vec a = at_t.amplitudes();
        for (int i = 0; i < g.n(); ++i)
          a[i] *= std::sqrt(gauss_pdf(g.point(i) - c, delta));
        const WaveFunction collapsed(g, std::move(a), false);
        if (collapsed.amplitudes().squaredNorm() * g.dx() < 1e-16) continue;
        p += run(collapsed, slot + 1, entry.time) * g.dx();
      }
      return p;
    }
  };
  return Walker{g, h, ham, delta, final_eff}.run(psi, 0, 0.0);
}

double sharp_grid_probability(const WaveFunction& psi, const HistorySpec& h,
                              const LinearOperator& ham, double delta) {
  const Grid& g = psi.grid();
  const int ncell = static_cast<int>(std::round(delta / g.dx()));
  if (std::abs(ncell * g.dx() - delta) > 1e-9)
    throw std::invalid_argument("sharp_grid_probability: delta must be a multiple of dx");

  struct Walker {
    const Grid& g;
    const HistorySpec& h;
    const LinearOperator& ham;
    int ncell;

    double run(const WaveFunction& state, int slot, double now) const {
      const auto& entry = h.entries()[slot];
      const WaveFunction at_t = qcore::evolve(state, ham, entry.time - now);
      const SampleSet set = entry.set.is_full_line()
                                ? SampleSet::interval(g.x_min(), g.x_max())
                                : entry.set.snapped(ncell * g.dx(), g.x_min())
                                      .clamped(g);
      if (slot == h.size() - 1) {
        double p = 0.0;
        for (int i = 0; i < g.n(); ++i)
          if (set.contains(g.point(i))) p += std::norm(at_t.amplitudes()[i]) * g.dx();
        return p;
      }
      double p = 0.0;
      for (const auto& iv : set.intervals()) {
        const int i0 =
            static_cast<int>(std::round((iv.a - g.x_min()) / g.dx()));
        const int i1 =
            std::min(g.n(), static_cast<int>(std::round((iv.b - g.x_min()) / g.dx())));
        for (int c0 = i0; c0 < i1; c0 += ncell) {
          Vec a = Vec::Zero(g.n());
          bool any = false;
          for (int i = c0; i < std::min(c0 + ncell, i1); ++i) {
            a[i] = at_t.amplitudes()[i];
            any = any || std::norm(a[i]) > 0.0;
          }
          if (!any) continue;
          if (a.squaredNorm() * g.dx() < 1e-18) continue;
          p += run(WaveFunction(g, std::move(a), false), slot + 1, entry.time);
        }
      }
      return p;
    }
  };
  return Walker{g, h, ham, ncell}.run(psi, 0, 0.0);
}

// ------------------------------------------------------ interference -------

Complex interference_term(const WaveFunction& psi, double x1_center, double delta,
                          const SampleSet& u2, double t1, double t2,
                          const LinearOperator& ham) {
  const Grid& g = psi.grid();
  const WaveFunction at_t1 = qcore::evolve(psi, ham, t1);
  auto cell_state = [&](double lo, double hi) {
    Vec a = Vec::Zero(g.n());
    for (int i = 0; i < g.n(); ++i) {
      const double x = g.point(i);
      if (x >= lo && x < hi) a[i] = at_t1.amplitudes()[i];
    }
    return WaveFunction(g, std::move(a), false);
  };
  const WaveFunction hi = cell_state(x1_center, x1_center + delta);
  const WaveFunction lo = cell_state(x1_center - delta, x1_center);
  const WaveFunction hi_t = qcore::evolve(hi, ham, t2 - t1);
  const WaveFunction lo_t = qcore::evolve(lo, ham, t2 - t1);
  const SampleSet u2c = u2.is_full_line() ? SampleSet::interval(g.x_min(), g.x_max())
                                          : u2.clamped(g);
  Complex d = 0.0;
  for (int i = 0; i < g.n(); ++i)
    if (u2c.contains(g.point(i)))
      d += std::conj(lo_t.amplitudes()[i]) * hi_t.amplitudes()[i] * g.dx();
  return d;
}

InterferenceBudget integrated_interference(const WaveFunction& psi,
                                           const HistorySpec& h,
                                           const LinearOperator& ham, double delta) {
  if (h.size() != 2)
    throw std::invalid_argument("integrated_interference: two-time histories only");
  InterferenceBudget out;
  out.p_fine = sharp_grid_probability(psi, h, ham, delta);
  out.p_coarse = sharp_grid_probability(psi, h, ham, 2.0 * delta);
  const Grid& g = psi.grid();
  const double t1 = h.entries()[0].time, t2 = h.entries()[1].time;
  const SampleSet u1 = h.entries()[0].set.is_full_line()
                           ? SampleSet::interval(g.x_min(), g.x_max())
                           : h.entries()[0].set.snapped(2.0 * delta, g.x_min())
                                 .clamped(g);
  out.integrated = 0.0;
  for (const auto& iv : u1.intervals()) {
    for (double c = iv.a + delta; c < iv.b - delta / 2; c += 2.0 * delta) {
      const Complex d =
          interference_term(psi, c, delta, h.entries()[1].set, t1, t2, ham);
      out.integrated += 2.0 * d.real();
    }
  }
  return out;
}

// ---------------------------------------------------------- compatibility --

CompatibilityResult compatibility_check(const DensityOperator& rho,
                                        const HistorySpec& h, int slot,
                                        const LinearOperator& ham, double delta) {
  if (h.size() < 2)
    throw std::invalid_argument("compatibility_check: needs >= 2 entries");
  CompatibilityResult out;
  out.lhs = sqrt_povm_probability(rho, h.with_slot(slot, SampleSet::full_line()),
                                  ham, delta);
  out.rhs = sqrt_povm_probability(rho, h.without_slot(slot), ham, delta);
  out.defect = std::abs(out.lhs - out.rhs);
  return out;
}

CompatibilityResult compatibility_check(const WaveFunction& psi,
                                        const HistorySpec& h, int slot,
                                        const LinearOperator& ham, double delta) {
  CompatibilityResult out;
  out.lhs = sqrt_povm_probability(psi, h.with_slot(slot, SampleSet::full_line()),
                                  ham, delta);
  out.rhs = sqrt_povm_probability(psi, h.without_slot(slot), ham, delta);
  out.defect = std::abs(out.lhs - out.rhs);
  return out;
}

// -------------------------------------------------------------- no-go ------

NogoWitness nogo_witness(const std::vector<DensityOperator>& rho_family,
                         const LinearOperator& ham, double delta, double t1,
                         double t2, const SampleSet& u1, const SampleSet& u2) {
  const Grid& g = ham.grid();
  NogoWitness out;
  // Proposition 1 witness: Heisenberg projectors fail to commute.
  const SampleSet u1s = u1.snapped(delta, g.x_min());
  const SampleSet u2s = u2.snapped(delta, g.x_min());
  const LinearOperator p1 =
      qcore::heisenberg(LinearOperator::projector(g, u1s), ham, t1);
  const LinearOperator p2 =
      qcore::heisenberg(LinearOperator::projector(g, u2s), ham, t2);
  const Mat comm = p1.matrix() * p2.matrix() - p2.matrix() * p1.matrix();
  LinearOperator cop(g, comm, false);
  out.commutator_norm = cop.operator_norm();

  // Proposition 2 witness: the slot-1 marginal of the sharp-grid two-time POVM
  // M = sum_cells P_c Q(U2) P_c is not idempotent unless [x,H] = 0.
  const LinearOperator& q2 = p2;
  Mat m = Mat::Zero(g.n(), g.n());
  const int ncell = static_cast<int>(std::round(delta / g.dx()));
  for (int c0 = 0; c0 < g.n(); c0 += ncell) {
    const int w = std::min(ncell, g.n() - c0);
    m.block(c0, c0, w, w) = q2.matrix().block(c0, c0, w, w);
  }
  LinearOperator mop(g, m - m * m, false);
  out.marginal_nonidem = mop.operator_norm();

  const HistorySpec h({{t1, u1s}, {t2, u2s}});
  for (const auto& rho : rho_family)
    out.state_probabilities.push_back(
        history_probability(rho, h, ham, SharpGridKind{delta}));
  return out;
}

}  // namespace seqprob::seqmeas

#include "seqprob/apparatus.hpp"

#include <cmath>
#include <stdexcept>

#include "seqprob/quadrature.hpp"

namespace seqprob::apparatus {

// ------------------------------------------------------------ DeviceState --

DeviceState DeviceState::gaussian(double sigma_k, int n_nodes) {
  if (n_nodes < 4 || n_nodes > 64)
    throw std::invalid_argument("DeviceState: need 4 <= n_nodes <= 64");
  DeviceState d;
  d.k_nodes.resize(n_nodes);
  d.amplitudes.resize(n_nodes);
  // truncate at 6 momentum standard deviations
  const double k_max = 6.0 * sigma_k;
  d.dk = 2.0 * k_max / n_nodes;
  double nrm = 0.0;
  for (int i = 0; i < n_nodes; ++i) {
    const double k = -k_max + (i + 0.5) * d.dk;
    d.k_nodes[i] = k;
    const double a = std::exp(-k * k / (4.0 * sigma_k * sigma_k));
    d.amplitudes[i] = a;
    nrm += a * a * d.dk;
  }
  d.amplitudes /= std::sqrt(nrm);
  return d;
}

std::vector<double> DeviceState::pointer_grid() const {
  const int n = static_cast<int>(k_nodes.size());
  const double dq = pointer_spacing();
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = (i - n / 2) * dq;
  return q;
}

double DeviceState::pointer_spacing() const {
  return 2.0 * M_PI / (static_cast<double>(k_nodes.size()) * dk);
}

// -------------------------------------------------- impulsive total state --

CompositeState impulsive_total_state(const ApparatusState& app,
                                     const LinearOperator& ham) {
  if (app.coupling.t2 <= app.coupling.t1 || app.coupling.t1 < 0.0)
    throw std::invalid_argument("impulsive_total_state: need t2 > t1 >= 0");
  const Grid& g = app.psi0.grid();
  const int nk = static_cast<int>(app.device.k_nodes.size());
  // aliasing guard: discretizing k with spacing dk makes e^{-ikx} periodic in
  // x with period 2 pi/dk, which must cover the box
  if (2.0 * M_PI / app.device.dk < (g.x_max() - g.x_min()) - 1e-9)
    throw std::invalid_argument(
        "impulsive_total_state: k-grid spacing aliases inside the box");

  CompositeState out{g, app.device, app.coupling, {}, 0.0};
  out.phi.assign(nk, std::vector<Vec>(nk));
  const WaveFunction at_t1 = qcore::evolve(app.psi0, ham, app.coupling.t1);
  const double dtau = app.coupling.t2 - app.coupling.t1;
  std::vector<WaveFunction> kicked;
  kicked.reserve(nk);
  for (int a = 0; a < nk; ++a) {
    Vec v = at_t1.amplitudes();
    for (int i = 0; i < g.n(); ++i)
      v[i] *= std::polar(1.0, -app.device.k_nodes[a] * g.point(i));
    kicked.emplace_back(qcore::evolve(WaveFunction(g, std::move(v), false), ham, dtau));
  }
  double nsq = 0.0;
  for (int a = 0; a < nk; ++a) {
    const Complex wa = app.device.amplitudes[a];
    for (int b = 0; b < nk; ++b) {
      Vec v = kicked[a].amplitudes();
      for (int i = 0; i < g.n(); ++i)
        v[i] *= std::polar(1.0, -app.device.k_nodes[b] * g.point(i));
      v *= wa * app.device.amplitudes[b];
      out.phi[a][b] = std::move(v);
    }
  }
  // norm: sum_{k1 k2} ||phi||^2 dk^2  (devices diagonal in k)
  for (int a = 0; a < nk; ++a)
    for (int b = 0; b < nk; ++b)
      nsq += out.phi[a][b].squaredNorm() * g.dx() * app.device.dk * app.device.dk;
  out.norm_sq = nsq;
  return out;
}

// --------------------------------------------- pointer joint distribution --

double pointer_joint_distribution(const CompositeState& state, const SampleSet& u1,
                                  const SampleSet& u2) {
  const Grid& g = state.grid;
  const int nk = static_cast<int>(state.device.k_nodes.size());
  const double dk = state.device.dk;
  const std::vector<double> q = state.device.pointer_grid();
  const double dq = state.device.pointer_spacing();
  // A(x, q1, q2) = (dk^2 / 2 pi) sum_{k1 k2} e^{i(k1 q1 + k2 q2)} phi_{k1k2}(x)
  // P = sum_{q1 in U1, q2 in U2} sum_x |A|^2 dq^2 dx
  std::vector<int> sel1, sel2;
  for (int i = 0; i < nk; ++i) {
    if (u1.is_full_line() || u1.contains(q[i])) sel1.push_back(i);
    if (u2.is_full_line() || u2.contains(q[i])) sel2.push_back(i);
  }
  double total = 0.0;
  Eigen::MatrixXcd slab(nk, nk);
  std::vector<Eigen::MatrixXcd> dft(nk, Eigen::MatrixXcd(nk, nk));
  // precompute 1-D DFT phases e^{i k_a q_j}
  Eigen::MatrixXcd e(nk, nk);
  for (int a = 0; a < nk; ++a)
    for (int j = 0; j < nk; ++j)
      e(j, a) = std::polar(1.0, state.device.k_nodes[a] * q[j]);
  const double pref = dk * dk / (2.0 * M_PI);
  for (int i = 0; i < g.n(); ++i) {
    for (int a = 0; a < nk; ++a)
      for (int b = 0; b < nk; ++b) slab(a, b) = state.phi[a][b][i];
    // A_q = pref * E * slab * E^T (q1 rows, q2 cols)
    const Eigen::MatrixXcd aq = pref * (e * slab * e.transpose());
    for (int j1 : sel1)
      for (int j2 : sel2) total += std::norm(aq(j1, j2)) * dq * dq * g.dx();
  }
  return total;
}

// ------------------------------------------------- induced-POVM reference --

double induced_povm_probability(const ApparatusState& app, const LinearOperator& ham,
                                const SampleSet& u1, const SampleSet& u2) {
  const Grid& g = app.psi0.grid();
  const DeviceState& dev = app.device;
  // s(u) = sum_k (dk/sqrt(2 pi)) e^{-i k u} <k|Psi0>; real for symmetric
  // devices (positive-root convention)
  auto s_profile = [&](double x, double y) {
    Complex v = 0.0;
    for (int a = 0; a < dev.k_nodes.size(); ++a)
      v += std::polar(1.0, -dev.k_nodes[a] * (x - y)) * dev.amplitudes[a];
    return (v * dev.dk / std::sqrt(2.0 * M_PI)).real();
  };
  const seqmeas::HistorySpec h(
      {{app.coupling.t1, u1}, {app.coupling.t2, u2}});
  const seqmeas::EffectOperator r = seqmeas::sqrt_povm_sequential_custom(
      g, h, ham, dev.pointer_grid(), dev.pointer_spacing(), s_profile);
  return qcore::expectation(qcore::DensityOperator::pure(app.psi0), r.op);
}

ResolutionEstimate resolution_from_device(const DeviceState& dev) {
  // effect profile Pi(u) = |s(u)|^2; Gaussian fit by second moment
  auto s_profile = [&](double u) {
    Complex v = 0.0;
    for (int a = 0; a < dev.k_nodes.size(); ++a)
      v += std::polar(1.0, -dev.k_nodes[a] * u) * dev.amplitudes[a];
    return std::norm(v * dev.dk / std::sqrt(2.0 * M_PI));
  };
  const double span = 2.0 * M_PI / dev.dk / 2.0;  // half the pointer period
  const double mass = integrate([&](double u) { return s_profile(u); }, -span, span,
                                1e-11);
  const double second = integrate(
      [&](double u) { return u * u * s_profile(u); }, -span, span, 1e-11);
  ResolutionEstimate est;
  est.delta = std::sqrt(second / mass);
  // L2 residual against the matched Gaussian profile
  auto gauss = [&](double u) {
    return mass * std::exp(-0.5 * u * u / (est.delta * est.delta)) /
           (est.delta * std::sqrt(2.0 * M_PI));
  };
  const double num = integrate(
      [&](double u) {
        const double d = s_profile(u) - gauss(u);
        return d * d;
      },
      -span, span, 1e-12);
  const double den =
      integrate([&](double u) { return s_profile(u) * s_profile(u); }, -span, span,
                1e-12);
  est.fit_residual = std::sqrt(num / den);
  return est;
}

}  // namespace seqprob::apparatus

#include "seqprob/classical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqprob/quadrature.hpp"

namespace seqprob::classical {

namespace {

double normal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

// regularized incomplete gamma P(a, x), for chi^2 p-values
double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {  // series
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // continued fraction for Q(a,x)
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - gln) * h;
  return 1.0 - q;
}

double chi2_pvalue(double stat, int dof) {
  return 1.0 - gamma_p(dof / 2.0, stat / 2.0);
}

}  // namespace

// ---------------------------------------------------------------- Markov ---

MarkovKernel::MarkovKernel(const Grid& g, Eigen::MatrixXd m)
    : grid(g), matrix(std::move(m)) {
  if (matrix.rows() != g.n() || matrix.cols() != g.n())
    throw std::invalid_argument("MarkovKernel: size mismatch");
  if (matrix.minCoeff() < -1e-12)
    throw std::invalid_argument("MarkovKernel: negative entries");
  for (int c = 0; c < g.n(); ++c) {
    const double colsum = matrix.col(c).sum() * g.dx();
    if (std::abs(colsum - 1.0) > 1e-9)
      throw std::invalid_argument("MarkovKernel: column not normalized");
  }
}

MarkovKernel MarkovKernel::identity(const Grid& g) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(g.n(), g.n()) / g.dx();
  return MarkovKernel(g, std::move(m));
}

MarkovKernel MarkovKernel::heat(const Grid& g, double diffusion, double t) {
  const double var = 2.0 * diffusion * t;
  Eigen::MatrixXd m(g.n(), g.n());
  for (int c = 0; c < g.n(); ++c) {
    const double x0 = g.point(c);
    for (int r = 0; r < g.n(); ++r) {
      const double u = g.point(r) - x0;
      m(r, c) = std::exp(-u * u / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
    }
    const double colsum = m.col(c).sum() * g.dx();
    m.col(c) /= colsum;  // absorb box truncation
  }
  return MarkovKernel(g, std::move(m));
}

double markov_path_probability(const Eigen::VectorXd& rho0,
                               const std::vector<MarkovKernel>& kernels,
                               const std::vector<SampleSet>& sets) {
  if (kernels.size() != sets.size())
    throw std::invalid_argument("markov_path_probability: one set per kernel");
  if (kernels.empty()) throw std::invalid_argument("markov_path_probability: empty");
  const Grid& g = kernels.front().grid;
  Eigen::VectorXd cur = rho0;
  for (size_t k = 0; k < kernels.size(); ++k) {
    cur = (kernels[k].matrix * cur * g.dx()).eval();
    for (int i = 0; i < g.n(); ++i)
      if (!sets[k].contains(g.point(i))) cur[i] = 0.0;
  }
  return cur.sum() * g.dx();
}

McValue heat_chain_monte_carlo(const Eigen::VectorXd& rho0, const Grid& grid,
                               double diffusion, const std::vector<double>& times,
                               const std::vector<SampleSet>& sets, int n_walkers,
                               std::uint64_t seed) {
  // inverse-CDF sampling of the initial density
  std::vector<double> cdf(grid.n());
  double acc = 0.0;
  for (int i = 0; i < grid.n(); ++i) {
    acc += rho0[i] * grid.dx();
    cdf[i] = acc;
  }
  long hits = 0;
  for (int w = 0; w < n_walkers; ++w) {
    CounterRng rng(seed, static_cast<std::uint64_t>(w));
    const double u = rng.uniform() * acc;
    const int idx = static_cast<int>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    double x = grid.point(std::min(idx, grid.n() - 1));
    double now = 0.0;
    bool ok = true;
    for (size_t k = 0; k < times.size(); ++k) {
      const double dt = times[k] - now;
      now = times[k];
      x += std::sqrt(2.0 * diffusion * dt) * rng.normal();
      if (!sets[k].contains(x)) {
        ok = false;
        break;
      }
    }
    if (ok) ++hits;
  }
  McValue v;
  v.value = static_cast<double>(hits) / n_walkers;
  v.std_error = std::sqrt(std::max(v.value * (1.0 - v.value), 1e-12) / n_walkers);
  return v;
}

// ------------------------------------------------------------------ Bohm ---

double bohm_velocity(const WaveFunction& psi, double x, double mass) {
  const Grid& g = psi.grid();
  const auto& a = psi.amplitudes();
  const int n = g.n();
  auto vel_at = [&](int i) {
    const auto wrap = [&](int j) { return ((j % n) + n) % n; };
    const qcore::Complex num = (-a[wrap(i + 2)] + 8.0 * a[wrap(i + 1)] -
                                8.0 * a[wrap(i - 1)] + a[wrap(i - 2)]) /
                               (12.0 * g.dx());
    const qcore::Complex den = a[i];
    if (std::abs(den) < 1e-10) throw NearNode(g.point(i));
    return (num / den).imag() / mass;
  };
  double pos = (x - g.x_min()) / g.dx();
  int i0 = static_cast<int>(std::floor(pos));
  double frac = pos - i0;
  i0 = std::min(std::max(i0, 0), n - 1);
  const int i1 = std::min(i0 + 1, n - 1);
  if (i0 == i1) return vel_at(i0);
  return (1.0 - frac) * vel_at(i0) + frac * vel_at(i1);
}

namespace {

// psi(t) evaluated from a cached spectral representation
class Propagated {
 public:
  Propagated(const WaveFunction& psi0, const LinearOperator& ham)
      : psi0_(psi0), ham_(ham) {}

  const WaveFunction& at(double t) {
    if (!cache_ || cache_time_ != t) {
      cache_ = qcore::evolve(psi0_, ham_, t);
      cache_time_ = t;
    }
    return *cache_;
  }

 private:
  WaveFunction psi0_;
  const LinearOperator& ham_;
  std::optional<WaveFunction> cache_;
  double cache_time_ = std::numeric_limits<double>::quiet_NaN();
};

// velocity field sampled on the grid at a fixed time, linear interpolation
struct VelocityField {
  const Grid& g;
  std::vector<double> v;
  std::vector<bool> bad;

  VelocityField(const WaveFunction& psi, double mass, double node_floor)
      : g(psi.grid()), v(g.n()), bad(g.n(), false) {
    const auto& a = psi.amplitudes();
    const int n = g.n();
    auto wrap = [&](int j) { return ((j % n) + n) % n; };
    for (int i = 0; i < n; ++i) {
      if (std::abs(a[i]) < node_floor) {
        bad[i] = true;
        v[i] = 0.0;
        continue;
      }
      const qcore::Complex num = (-a[wrap(i + 2)] + 8.0 * a[wrap(i + 1)] -
                                  8.0 * a[wrap(i - 1)] + a[wrap(i - 2)]) /
                                 (12.0 * g.dx());
      v[i] = (num / a[i]).imag() / mass;
    }
  }

  double eval(double x, bool& near_node) const {
    double pos = (x - g.x_min()) / g.dx();
    int i0 = static_cast<int>(std::floor(pos));
    const double frac = pos - i0;
    i0 = std::min(std::max(i0, 0), g.n() - 1);
    const int i1 = std::min(i0 + 1, g.n() - 1);
    if (bad[i0] || bad[i1]) near_node = true;
    return (1.0 - frac) * v[i0] + frac * v[i1];
  }
};

}  // namespace

BohmEnsemble bohm_trajectories(const WaveFunction& psi0, const LinearOperator& ham,
                               double mass, const std::vector<double>& times,
                               const BohmSettings& st) {
  for (size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw std::invalid_argument("bohm_trajectories: times must increase");

  const Grid& g = psi0.grid();
  BohmEnsemble ens;
  ens.times = times;
  if (times.empty() || times.front() != 0.0)
    ens.times.insert(ens.times.begin(), 0.0);
  ens.positions.resize(st.n_samples, static_cast<int>(ens.times.size()));
  ens.alive.assign(st.n_samples, 1);

  // quantum-equilibrium sample by inverse CDF of |psi0|^2
  std::vector<double> cdf(g.n());
  double acc = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    acc += std::norm(psi0.amplitudes()[i]) * g.dx();
    cdf[i] = acc;
  }
  std::vector<double> x(st.n_samples);
  for (int w = 0; w < st.n_samples; ++w) {
    CounterRng rng(st.seed, static_cast<std::uint64_t>(w));
    const double u = rng.uniform() * acc;
    const int idx = static_cast<int>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    // place uniformly inside the cell for a continuous sample
    x[w] = g.point(std::min(idx, g.n() - 1)) + (rng.uniform() - 0.5) * g.dx();
    ens.positions(w, 0) = x[w];
  }

  // Kolmogorov-Smirnov check of the initial sample against the grid CDF
  {
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    double dmax = 0.0;
    for (size_t i = 0; i < sorted.size(); ++i) {
      const double target = sorted[i];
      // empirical CDF step vs model CDF
      double model = 0.0;
      const double pos = (target - g.x_min()) / g.dx();
      const int idx = std::min(std::max(static_cast<int>(std::floor(pos)), 0),
                               g.n() - 1);
      model = (idx > 0 ? cdf[idx - 1] : 0.0) +
              std::norm(psi0.amplitudes()[idx]) * g.dx() *
                  std::min(std::max(pos - idx, 0.0), 1.0);
      model /= acc;
      dmax = std::max(dmax, std::abs((i + 1.0) / sorted.size() - model));
      dmax = std::max(dmax, std::abs(i * 1.0 / sorted.size() - model));
    }
    ens.ks_statistic = dmax;
    const double c01 = 1.628;  // K-S critical value at significance 0.01
    ens.ks_pass = dmax * std::sqrt(static_cast<double>(st.n_samples)) < c01;
  }

  // integrate the guidance ODE for the whole ensemble with a shared adaptive
  // RK45 (Dormand-Prince) step; psi(t) advanced spectrally at stage times
  Propagated prop(psi0, ham);
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto field_at = [&](double t) {
    return VelocityField(prop.at(t), mass, st.node_floor);
  };

  double t = ens.times[0];
  for (size_t ck = 1; ck < ens.times.size(); ++ck) {
    const double t_end = ens.times[ck];
    double h = (t_end - t) / 64.0;
    int retries = 0;
    while (t < t_end - 1e-14) {
      h = std::min(h, t_end - t);
      bool near_node = false;
      const VelocityField f1 = field_at(t);
      const VelocityField f2 = field_at(t + c2 * h);
      const VelocityField f3 = field_at(t + c3 * h);
      const VelocityField f4 = field_at(t + c4 * h);
      const VelocityField f5 = field_at(t + c5 * h);
      const VelocityField f6 = field_at(t + h);
      double err_max = 0.0;
      std::vector<double> xn(st.n_samples);
      for (int w = 0; w < st.n_samples; ++w) {
        if (!ens.alive[w]) {
          xn[w] = x[w];
          continue;
        }
        const double k1 = f1.eval(x[w], near_node);
        const double k2 = f2.eval(x[w] + h * a21 * k1, near_node);
        const double k3 = f3.eval(x[w] + h * (a31 * k1 + a32 * k2), near_node);
        const double k4 =
            f4.eval(x[w] + h * (a41 * k1 + a42 * k2 + a43 * k3), near_node);
        const double k5 = f5.eval(
            x[w] + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), near_node);
        const double k6 = f6.eval(
            x[w] + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5),
            near_node);
        const double dx = h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        xn[w] = x[w] + dx;
        const double k7 = f6.eval(xn[w], near_node);
        const double err = std::abs(
            h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
        err_max = std::max(err_max, err / (st.abs_tol + st.rel_tol * std::abs(xn[w])));
      }
      if (near_node || err_max > 1.0) {
        h *= near_node ? 0.25 : std::max(0.2, 0.9 * std::pow(err_max, -0.25));
        if (++retries > st.max_retries) {
          // discard trajectories currently sitting next to a node
          const VelocityField probe = field_at(t);
          for (int w = 0; w < st.n_samples; ++w) {
            bool nn = false;
            probe.eval(x[w], nn);
            if (nn && ens.alive[w]) {
              ens.alive[w] = 0;
              ++ens.n_discarded;
            }
          }
          retries = 0;
        }
        continue;
      }
      retries = 0;
      x = std::move(xn);
      t += h;
      if (err_max > 1e-300)
        h *= std::min(5.0, 0.9 * std::pow(err_max, -0.2));
    }
    for (int w = 0; w < st.n_samples; ++w) ens.positions(w, ck) = x[w];
  }
  return ens;
}

McValue bohm_multitime_probability(const BohmEnsemble& ens, const HistorySpec& h) {
  // map history times onto checkpoint indices
  std::vector<int> idx;
  for (const auto& e : h.entries()) {
    int found = -1;
    for (size_t i = 0; i < ens.times.size(); ++i)
      if (std::abs(ens.times[i] - e.time) < 1e-12) found = static_cast<int>(i);
    if (found < 0)
      throw std::invalid_argument("bohm_multitime_probability: time not sampled");
    idx.push_back(found);
  }
  long hits = 0, alive = 0;
  for (int w = 0; w < ens.positions.rows(); ++w) {
    if (!ens.alive[w]) continue;
    ++alive;
    bool ok = true;
    for (size_t k = 0; k < idx.size(); ++k)
      if (!h.entries()[k].set.contains(ens.positions(w, idx[k]))) {
        ok = false;
        break;
      }
    if (ok) ++hits;
  }
  McValue v;
  v.value = alive ? static_cast<double>(hits) / alive : 0.0;
  v.std_error =
      alive ? std::sqrt(std::max(v.value * (1.0 - v.value), 1e-12) / alive) : 1.0;
  return v;
}

double bohm_equivariance_pvalue(const BohmEnsemble& ens, const WaveFunction& psi0,
                                const LinearOperator& ham, int checkpoint,
                                int n_bins) {
  const WaveFunction psi_t = qcore::evolve(psi0, ham, ens.times.at(checkpoint));
  const Grid& g = psi_t.grid();
  std::vector<double> cdf(g.n());  // mass up to the right boundary of cell i
  double acc = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    acc += std::norm(psi_t.amplitudes()[i]) * g.dx();
    cdf[i] = acc;
  }
  // near-equal-mass bin edges placed on cell boundaries; expected masses are
  // the exact cell sums between edges
  std::vector<double> edges;          // interior edges
  std::vector<double> expected_mass;  // one per bin
  int prev_idx = -1;
  for (int b = 1; b < n_bins; ++b) {
    const double target = acc * b / n_bins;
    int idx = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), target) -
                               cdf.begin());
    idx = std::min(idx, g.n() - 1);
    if (idx <= prev_idx) continue;  // degenerate bin, merge
    edges.push_back(g.point(idx) + 0.5 * g.dx());
    expected_mass.push_back(cdf[idx] - (prev_idx >= 0 ? cdf[prev_idx] : 0.0));
    prev_idx = idx;
  }
  expected_mass.push_back(acc - (prev_idx >= 0 ? cdf[prev_idx] : 0.0));
  const int k = static_cast<int>(expected_mass.size());

  std::vector<long> counts(k, 0);
  long alive = 0;
  for (int w = 0; w < ens.positions.rows(); ++w) {
    if (!ens.alive[w]) continue;
    ++alive;
    const double x = ens.positions(w, checkpoint);
    const int b = static_cast<int>(
        std::lower_bound(edges.begin(), edges.end(), x) - edges.begin());
    ++counts[b];
  }
  double stat = 0.0;
  for (int b = 0; b < k; ++b) {
    const double expect = expected_mass[b] / acc * alive;
    stat += (counts[b] - expect) * (counts[b] - expect) / std::max(expect, 1e-9);
  }
  return chi2_pvalue(stat, k - 1);
}

bool bohm_order_preserved(const BohmEnsemble& ens) {
  const int last = static_cast<int>(ens.times.size()) - 1;
  std::vector<int> order;
  for (int w = 0; w < ens.positions.rows(); ++w)
    if (ens.alive[w]) order.push_back(w);
  std::vector<int> by_initial = order, by_final = order;
  std::sort(by_initial.begin(), by_initial.end(), [&](int a, int b) {
    return ens.positions(a, 0) < ens.positions(b, 0);
  });
  std::sort(by_final.begin(), by_final.end(), [&](int a, int b) {
    return ens.positions(a, last) < ens.positions(b, last);
  });
  return by_initial == by_final;
}

// ----------------------------------------------------------- local HV ------

namespace {

// Mass of N(mu, sigma^2) restricted to unit cells [j, j+1) whose image under
// shift lies inside `set`; exact via erf sums. Cells scanned over +-12 sigma.
double celled_mass(double mu, double sigma, const std::function<bool(long)>& keep) {
  const long lo = static_cast<long>(std::floor(mu - 12.0 * sigma));
  const long hi = static_cast<long>(std::ceil(mu + 12.0 * sigma));
  double total = 0.0;
  for (long j = lo; j <= hi; ++j) {
    if (!keep(j)) continue;
    total += normal_cdf(j + 1.0, mu, sigma) - normal_cdf(j, mu, sigma);
  }
  return total;
}

bool cell_in(const SampleSet& set, long cell) {
  return set.contains(static_cast<double>(cell) + 0.5);
}

}  // namespace

double KickedMapModel::model_two_time(const SampleSet& u1,
                                      const SampleSet& u2) const {
  // Full-model route: integrate the actual deterministic maps over
  // (x0, Q1) with Q1 ~ Uniform[-1,1]; Q2 never enters the pointer reads.
  //   x_t1 = x0 + drift1 + dither * Q1 * u(1-u),  u = frac(x0)
  //   x_t2 = x_t1 + drift2 + break_shift * sign(Q1)
  // Pointer reads are floor(x_t).
  auto rho = [&](double x) {
    const double u = (x - rho_center) / rho_sigma;
    return std::exp(-0.5 * u * u) / (rho_sigma * std::sqrt(2.0 * M_PI));
  };
  const long lo = static_cast<long>(std::floor(rho_center - 12.0 * rho_sigma));
  const long hi = static_cast<long>(std::ceil(rho_center + 12.0 * rho_sigma));
  double qs[16], qw[16];
  gauss_legendre(16, -1.0, 1.0, qs, qw);
  double total = 0.0;
  for (long j = lo; j <= hi; ++j) {
    // integrand is smooth in x0 within each unit cell for fixed sign(Q1)
    total += integrate(
        [&](double x0) {
          const double u = x0 - std::floor(x0);
          double inner = 0.0;
          for (int q = 0; q < 16; ++q) {
            const double q1 = qs[q];
            const double xt1 = x0 + drift1 + dither * q1 * u * (1.0 - u);
            const double read1 = std::floor(xt1) + 0.5;
            if (!u1.contains(read1)) continue;
            const double xt2 =
                xt1 + drift2 + break_shift * (q1 >= 0.0 ? 1.0 : -1.0);
            const double read2 = std::floor(xt2) + 0.5;
            if (!u2.contains(read2)) continue;
            inner += 0.5 * qw[q];  // Q1 prior density = 1/2 on [-1,1]
          }
          return rho(x0) * inner;
        },
        static_cast<double>(j), static_cast<double>(j + 1), 1e-12);
  }
  return total;
}

double KickedMapModel::system_two_time(const SampleSet& u1,
                                       const SampleSet& u2) const {
  // Stochastic process from the system alone: deterministic drift chain.
  const long d1 = static_cast<long>(std::llround(drift1));
  const long d2 = static_cast<long>(std::llround(drift2));
  return celled_mass(rho_center, rho_sigma, [&](long j) {
    return cell_in(u1, j + d1) && cell_in(u2, j + d1 + d2);
  });
}

HvFactorization hv_two_time_raw(const KickedMapModel& model, const SampleSet& u1,
                                const SampleSet& u2) {
  HvFactorization out;
  out.model_value = model.model_two_time(u1, u2);
  out.system_value = model.system_two_time(u1, u2);
  out.defect = std::abs(out.model_value - out.system_value);
  return out;
}

HvFactorization local_hv_two_time(const KickedMapModel& model, const SampleSet& u1,
                                  const SampleSet& u2) {
  if (!model.locality())
    throw std::invalid_argument(
        "local_hv_two_time: locality flag unset; the factorization theorem "
        "does not apply");
  return hv_two_time_raw(model, u1, u2);
}

double MarkovJumpModel::system_two_time(const std::vector<int>& u1,
                                        const std::vector<int>& u2) const {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n_states, n_states);
  for (int i = 0; i < n_states; ++i) {
    t((i + 1) % n_states, i) += hop;
    t((i - 1 + n_states) % n_states, i) += hop;
    t(i, i) += 1.0 - 2.0 * hop;
  }
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n_states);
  p[start_state] = 1.0;
  auto mask = [&](const std::vector<int>& u, Eigen::VectorXd& v) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_states);
    for (int s : u) out[s] = v[s];
    v = out;
  };
  for (int k = 0; k < steps1; ++k) p = t * p;
  mask(u1, p);
  for (int k = 0; k < steps2; ++k) p = t * p;
  mask(u2, p);
  return p.sum();
}

McValue MarkovJumpModel::model_two_time_mc(const std::vector<int>& u1,
                                           const std::vector<int>& u2,
                                           int n_samples, std::uint64_t seed) const {
  long hits = 0;
  for (int w = 0; w < n_samples; ++w) {
    CounterRng rng(seed, static_cast<std::uint64_t>(w));
    int x = start_state;
    // apparatus chains evolve independently; they never feed back on x
    int q1 = static_cast<int>(rng.uniform() * 7), q2 = static_cast<int>(rng.uniform() * 7);
    auto step = [&](int s) {
      const double u = rng.uniform();
      if (u < hop) return (s + 1) % n_states;
      if (u < 2.0 * hop) return (s - 1 + n_states) % n_states;
      return s;
    };
    for (int k = 0; k < steps1; ++k) {
      x = step(x);
      q1 = (q1 + (rng.uniform() < 0.5 ? 1 : 0)) % 7;
    }
    const bool in1 = std::find(u1.begin(), u1.end(), x) != u1.end();
    for (int k = 0; k < steps2; ++k) {
      x = step(x);
      q2 = (q2 + (rng.uniform() < 0.5 ? 1 : 0)) % 7;
    }
    const bool in2 = std::find(u2.begin(), u2.end(), x) != u2.end();
    if (in1 && in2) ++hits;
  }
  McValue v;
  v.value = static_cast<double>(hits) / n_samples;
  v.std_error = std::sqrt(std::max(v.value * (1.0 - v.value), 1e-12) / n_samples);
  return v;
}

UnsharpHvResult unsharp_hv_check(double delta, const SampleSet& u1,
                                 const SampleSet& u2, double drift1, double drift2,
                                 double rho_center, double rho_sigma) {
  // deterministic drift flow with Gaussian pointer noise of scale delta:
  // p2 = int rho(x0) chi^delta_U1(x0 + d1) chi^delta_U2(x0 + d1 + d2) dx0
  const qcore::SmearedIndicator s1(u1, delta);
  const qcore::SmearedIndicator s2(u2, delta);
  const double lo = rho_center - 12.0 * rho_sigma;
  const double hi = rho_center + 12.0 * rho_sigma;
  auto rho = [&](double x) {
    const double u = (x - rho_center) / rho_sigma;
    return std::exp(-0.5 * u * u) / (rho_sigma * std::sqrt(2.0 * M_PI));
  };
  UnsharpHvResult out;
  out.smeared_value = integrate(
      [&](double x0) {
        return rho(x0) * qcore::smeared_chi(s1, x0 + drift1) *
               qcore::smeared_chi(s2, x0 + drift1 + drift2);
      },
      lo, hi, 1e-12);
  out.sharp_value = integrate(
      [&](double x0) {
        return rho(x0) * (u1.contains(x0 + drift1) ? 1.0 : 0.0) *
               (u2.contains(x0 + drift1 + drift2) ? 1.0 : 0.0);
      },
      lo, hi, 1e-12);
  out.defect = std::abs(out.smeared_value - out.sharp_value);
  double min_len = std::numeric_limits<double>::infinity();
  for (const SampleSet* s : {&u1, &u2})
    if (std::isfinite(s->total_length())) min_len = std::min(min_len, s->total_length());
  out.measured_c = (std::isfinite(min_len) && out.sharp_value > 1e-12)
                       ? out.defect * min_len / (delta * out.sharp_value)
                       : 0.0;
  return out;
}

}  // namespace seqprob::classical

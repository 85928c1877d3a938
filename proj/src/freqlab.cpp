#include "seqprob/freqlab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqprob::freqlab {

namespace {

double gauss_pdf(double x, double delta) {
  const double u = x / delta;
  if (std::abs(u) > 40.0) return 0.0;
  return std::exp(-0.5 * u * u) / (delta * std::sqrt(2.0 * M_PI));
}

int draw_from_cdf(const std::vector<double>& cdf, CounterRng& rng) {
  const double u = rng.uniform() * cdf.back();
  const int idx =
      static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  return std::min(idx, static_cast<int>(cdf.size()) - 1);
}

}  // namespace

// ------------------------------------------------------------- traces ------

FrequencyTrace frequency_trace(const std::vector<bool>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("frequency_trace: no outcomes");
  FrequencyTrace t;
  t.nu.reserve(outcomes.size());
  long count = 0, n = 0;
  for (bool b : outcomes) {
    count += b ? 1 : 0;
    ++n;
    t.nu.push_back(static_cast<double>(count) / n);
  }
  t.n_runs = n;
  t.final_count = count;
  return t;
}

double nonconvergence_measure(const FrequencyTrace& trace, long n_burn) {
  if (trace.n_runs < n_burn + 2)
    throw std::invalid_argument("nonconvergence_measure: trace too short");
  double lo = 1.0, hi = 0.0;
  for (long n = n_burn; n < trace.n_runs; ++n) {
    lo = std::min(lo, trace.nu[n]);
    hi = std::max(hi, trace.nu[n]);
  }
  return hi - lo;
}

double trace_decay_slope(const FrequencyTrace& trace, double p, long n_lo,
                         long n_hi) {
  n_hi = std::min(n_hi, trace.n_runs);
  std::vector<double> xs, ys;
  for (long a = n_lo; a * 2 <= n_hi; a *= 2) {
    const long b = a * 2;
    double rms = 0.0;
    for (long n = a; n < b; ++n) {
      const double e = trace.nu[n] - p;
      rms += e * e;
    }
    rms = std::sqrt(rms / (b - a));
    if (rms <= 0.0) continue;
    xs.push_back(std::log(std::sqrt(static_cast<double>(a) * b)));
    ys.push_back(std::log(rms));
  }
  if (xs.size() < 2) throw std::invalid_argument("trace_decay_slope: range too short");
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double bernoulli_decay_slope(double p, long n_lo, long n_hi, int n_traces,
                             std::uint64_t seed) {
  std::vector<long> checkpoints;
  for (long n = n_lo; n <= n_hi; n *= 2) checkpoints.push_back(n);
  if (checkpoints.size() < 3)
    throw std::invalid_argument("bernoulli_decay_slope: range too short");
  std::vector<double> mean_abs(checkpoints.size(), 0.0);
  for (int tr = 0; tr < n_traces; ++tr) {
    CounterRng rng(seed, 0x5107ULL + static_cast<std::uint64_t>(tr));
    long count = 0;
    size_t ck = 0;
    for (long n = 1; n <= checkpoints.back(); ++n) {
      count += rng.bernoulli(p) ? 1 : 0;
      if (ck < checkpoints.size() && n == checkpoints[ck]) {
        mean_abs[ck] += std::abs(static_cast<double>(count) / n - p);
        ++ck;
      }
    }
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(checkpoints.size());
  for (size_t i = 0; i < checkpoints.size(); ++i) {
    const double x = std::log(static_cast<double>(checkpoints[i]));
    const double y = std::log(mean_abs[i] / n_traces);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// ------------------------------------------------------------ samplers -----

TwoTimeSampler::TwoTimeSampler(const WaveFunction& psi0, const LinearOperator& ham,
                               double t1, double t2, double delta)
    : grid_(psi0.grid()) {
  const int n = grid_.n();
  const WaveFunction psi_t1 = qcore::evolve(psi0, ham, t1);
  // first-slot categorical: q1(c) = <psi_t1| Pi_c |psi_t1> dx
  first_cdf_.resize(n);
  second_cdf_.resize(n);
  double acc = 0.0;
  std::vector<double> weight(n);
  for (int c = 0; c < n; ++c) {
    double q = 0.0;
    for (int i = 0; i < n; ++i)
      q += gauss_pdf(grid_.point(i) - grid_.point(c), delta) *
           std::norm(psi_t1.amplitudes()[i]) * grid_.dx();
    weight[c] = q * grid_.dx();
    acc += weight[c];
    first_cdf_[c] = acc;
  }
  // conditional second slot per first center: collapse, evolve, unsharp Born
  for (int c = 0; c < n; ++c) {
    if (weight[c] < 1e-15 * acc) continue;  // unreachable branch
    Vec a = psi_t1.amplitudes();
    for (int i = 0; i < n; ++i)
      a[i] *= std::sqrt(gauss_pdf(grid_.point(i) - grid_.point(c), delta));
    WaveFunction collapsed(grid_, std::move(a), true);
    const WaveFunction at_t2 = qcore::evolve(collapsed, ham, t2 - t1);
    std::vector<double>& cdf = second_cdf_[c];
    cdf.resize(n);
    double acc2 = 0.0;
    // density of the second unsharp outcome equals |psi|^2 smeared by the
    // Gaussian profile; convolution via direct sums over a +-8 delta window
    const int win = static_cast<int>(std::ceil(8.0 * delta / grid_.dx()));
    std::vector<double> dens(n);
    for (int i = 0; i < n; ++i) dens[i] = std::norm(at_t2.amplitudes()[i]);
    for (int c2 = 0; c2 < n; ++c2) {
      double q = 0.0;
      for (int i = std::max(0, c2 - win); i < std::min(n, c2 + win + 1); ++i)
        q += gauss_pdf(grid_.point(i) - grid_.point(c2), delta) * dens[i] * grid_.dx();
      acc2 += q * grid_.dx();
      cdf[c2] = acc2;
    }
  }
}

std::pair<int, int> TwoTimeSampler::sample(CounterRng& rng) const {
  const int c1 = draw_from_cdf(first_cdf_, rng);
  if (second_cdf_[c1].empty()) return {c1, 0};
  const int c2 = draw_from_cdf(second_cdf_[c1], rng);
  return {c1, c2};
}

double TwoTimeSampler::joint_probability(const SampleSet& u1,
                                         const SampleSet& u2) const {
  double total = 0.0;
  for (int c1 = 0; c1 < grid_.n(); ++c1) {
    if (!u1.contains(grid_.point(c1))) continue;
    if (second_cdf_[c1].empty()) continue;
    const double w1 = first_cdf_[c1] - (c1 ? first_cdf_[c1 - 1] : 0.0);
    double inner = 0.0;
    for (int c2 = 0; c2 < grid_.n(); ++c2) {
      if (!u2.contains(grid_.point(c2))) continue;
      inner += (second_cdf_[c1][c2] - (c2 ? second_cdf_[c1][c2 - 1] : 0.0)) /
               second_cdf_[c1].back();
    }
    total += w1 * inner;
  }
  return total / first_cdf_.back();
}

std::vector<double> sample_sequential_run(const WaveFunction& psi0,
                                          const HistorySpec& h,
                                          const LinearOperator& ham, double delta,
                                          CounterRng& rng) {
  const Grid& g = psi0.grid();
  const int n = g.n();
  WaveFunction cur = psi0;
  double now = 0.0;
  std::vector<double> outcome;
  for (const auto& entry : h.entries()) {
    cur = qcore::evolve(cur, ham, entry.time - now);
    now = entry.time;
    // unsharp Born draw over centers
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (int c = 0; c < n; ++c) {
      double q = 0.0;
      for (int i = 0; i < n; ++i)
        q += gauss_pdf(g.point(i) - g.point(c), delta) * std::norm(cur.amplitudes()[i]) *
             g.dx();
      acc += q * g.dx();
      cdf[c] = acc;
    }
    if (acc < 1e-14)
      throw std::runtime_error("sample_sequential_run: degenerate branch");
    const int c = draw_from_cdf(cdf, rng);
    outcome.push_back(g.point(c));
    // sqrt-effect Lüders update
    Vec a = cur.amplitudes();
    for (int i = 0; i < n; ++i)
      a[i] *= std::sqrt(gauss_pdf(g.point(i) - g.point(c), delta));
    cur = WaveFunction(g, std::move(a), true);
  }
  return outcome;
}

// ----------------------------------------------------- mixture ensembles ---

namespace {

FrequencyTrace run_mixture(const EnsembleSpec& spec, const WaveFunction& psi0,
                           const LinearOperator& ham, bool marginal_only) {
  if (spec.policy.deltas.empty() ||
      spec.policy.deltas.size() != spec.policy.weights.size())
    throw std::invalid_argument("mixture_ensemble_trace: bad policy");
  std::vector<TwoTimeSampler> samplers;
  samplers.reserve(spec.policy.deltas.size());
  for (double d : spec.policy.deltas)
    samplers.emplace_back(psi0, ham, spec.t1, spec.t2, d);
  std::vector<double> wcdf;
  double acc = 0.0;
  for (double w : spec.policy.weights) {
    acc += w;
    wcdf.push_back(acc);
  }
  std::vector<bool> outcomes;
  outcomes.reserve(spec.n_runs);
  int cur_delta = 0;
  for (long run = 0; run < spec.n_runs; ++run) {
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(run));
    if (run % spec.policy.block_length == 0) {
      CounterRng block_rng(spec.seed ^ 0xb10cULL,
                           static_cast<std::uint64_t>(run / spec.policy.block_length));
      cur_delta = draw_from_cdf(wcdf, block_rng);
    }
    const auto [c1, c2] = samplers[cur_delta].sample(rng);
    const double x1 = samplers[cur_delta].center(c1);
    const double x2 = samplers[cur_delta].center(c2);
    // marginal mode tracks the first-slot outcome alone, whose law is the
    // single-time unsharp Born distribution whatever the later measurement
    const bool hit = marginal_only ? spec.u1.contains(x1)
                                   : (spec.u1.contains(x1) && spec.u2.contains(x2));
    outcomes.push_back(hit);
  }
  return frequency_trace(outcomes);
}

}  // namespace

FrequencyTrace mixture_ensemble_trace(const EnsembleSpec& spec,
                                      const WaveFunction& psi0,
                                      const LinearOperator& ham) {
  return run_mixture(spec, psi0, ham, false);
}

FrequencyTrace mixture_marginal_trace(const EnsembleSpec& spec,
                                      const WaveFunction& psi0,
                                      const LinearOperator& ham) {
  return run_mixture(spec, psi0, ham, true);
}

// ----------------------------------------------------- decoherence ratio ---

double decoherence_ratio(const WaveFunction& psi, const HistorySpec& h,
                         const LinearOperator& ham, const seqmeas::PovmKind& kind) {
  const int n = h.size();
  const double p = seqmeas::history_probability(psi, h, ham, kind);
  if (p < 1e-14) throw std::invalid_argument("decoherence_ratio: p(alpha) ~ 0");
  qcore::Complex d_not = 0.0;
  // complement product set expanded over the 2^n - 1 slot-complement products
  for (int mask = 1; mask < (1 << n); ++mask) {
    HistorySpec beta = h;
    for (int k = 0; k < n; ++k)
      if (mask & (1 << k)) beta = beta.with_slot(k, h.entries()[k].set.complement());
    d_not += seqmeas::decoherence_functional(psi, h, beta, ham, kind).value;
  }
  return 2.0 * d_not.real() / p;
}

// ---------------------------------------------------- frequency operators --

FrequencyStats frequency_operator_stats(double p, int N) {
  if (N < 1) throw std::invalid_argument("frequency_operator_stats: N >= 1");
  return {p, p * (1.0 - p) / N};
}

namespace {

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

long ipow(long base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

Mat frequency_projector(const Mat& p_small, int N, int n) {
  const int d = static_cast<int>(p_small.rows());
  if (ipow(d, N) > 1024)
    throw std::invalid_argument("frequency_projector: explicit dim capped at 1024");
  const Mat comp = Mat::Identity(d, d) - p_small;
  const long dim = ipow(d, N);
  Mat out = Mat::Zero(dim, dim);
  for (long bits = 0; bits < (1L << N); ++bits) {
    if (__builtin_popcountll(bits) != n) continue;
    Mat term = Mat::Identity(1, 1);
    for (int k = 0; k < N; ++k)
      term = kron(term, (bits >> k) & 1 ? p_small : comp).eval();
    out += term;
  }
  return out;
}

FrequencyStats frequency_operator_stats_explicit(const Mat& p_small, const Vec& psi,
                                                 int N) {
  const int d = static_cast<int>(p_small.rows());
  const long dim = ipow(d, N);
  Vec prod = Vec::Ones(1);
  for (int k = 0; k < N; ++k) {
    Vec next(prod.size() * d);
    for (long i = 0; i < prod.size(); ++i)
      for (int j = 0; j < d; ++j) next[i * d + j] = prod[i] * psi[j];
    prod = next;
  }
  Mat f = Mat::Zero(dim, dim);
  Mat f2 = Mat::Zero(dim, dim);
  for (int n = 0; n <= N; ++n) {
    const Mat pi = frequency_projector(p_small, N, n);
    const double fr = static_cast<double>(n) / N;
    f += fr * pi;
    f2 += fr * fr * pi;
  }
  const double mean = (prod.adjoint() * f * prod)(0, 0).real();
  const double second = (prod.adjoint() * f2 * prod)(0, 0).real();
  return {mean, second - mean * mean};
}

double sequential_frequency_povm_overlap(const Mat& k_effect, int N, int n, int np) {
  if (k_effect.rows() != 2)
    throw std::invalid_argument("sequential_frequency_povm_overlap: 2-level only");
  if (N > 8) throw std::invalid_argument("sequential_frequency_povm_overlap: N <= 8");
  const Mat a = frequency_projector(k_effect, N, n);
  const Mat b = frequency_projector(k_effect, N, np);
  const Mat prod = a * b;
  Eigen::JacobiSVD<Mat> svd(prod);
  return svd.singularValues()[0];
}

Mat sequential_effect(const Mat& ham, double t, const Mat& p_i, const Mat& p_j) {
  Eigen::SelfAdjointEigenSolver<Mat> es(ham);
  Vec phase(ham.rows());
  for (int k = 0; k < ham.rows(); ++k)
    phase[k] = std::polar(1.0, es.eigenvalues()[k] * t);
  const Mat u_dag = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  const Mat q_j = u_dag * p_j * u_dag.adjoint();
  return p_i * q_j * p_i;
}

// ------------------------------------------------------------- condmarg ----

CondmargResult condmarg_distinction(const Mat& rho, const std::vector<Mat>& first_slot,
                                    const Mat& ham, double t,
                                    const std::vector<Mat>& second_slot) {
  Eigen::SelfAdjointEigenSolver<Mat> es(ham);
  Vec phase(ham.rows());
  for (int k = 0; k < ham.rows(); ++k)
    phase[k] = std::polar(1.0, es.eigenvalues()[k] * t);
  const Mat u_dag = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  CondmargResult out;
  for (const Mat& pj : second_slot) {
    const Mat qj = u_dag * pj * u_dag.adjoint();
    double standard = 0.0;
    for (const Mat& pi : first_slot)
      standard += (qj * pi * rho * pi).trace().real();
    out.standard.push_back(standard);
    out.hypothesis.push_back((rho * qj).trace().real());
  }
  return out;
}

}  // namespace seqprob::freqlab

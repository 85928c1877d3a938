#pragma once

#include <cstdint>
#include <vector>

#include "seqprob/qcore.hpp"
#include "seqprob/rng.hpp"
#include "seqprob/seqmeas.hpp"

namespace seqprob::freqlab {

using qcore::Grid;
using qcore::LinearOperator;
using qcore::Mat;
using qcore::SampleSet;
using qcore::Vec;
using qcore::WaveFunction;
using seqmeas::HistorySpec;

// ---------------------------------------------------------------------------
// Relative-frequency traces
// ---------------------------------------------------------------------------
struct FrequencyTrace {
  std::vector<double> nu;  // nu_n = count_n / n
  long n_runs = 0;
  long final_count = 0;
};

FrequencyTrace frequency_trace(const std::vector<bool>& outcomes);

// eps_hat = sup_{n,m > n_burn} |nu_n - nu_m| (= max - min over the tail).
double nonconvergence_measure(const FrequencyTrace& trace, long n_burn);

// least-squares slope of log(window-RMS of |nu_n - p|) vs log n over dyadic
// windows of [n_lo, n_hi]; a converging Bernoulli trace gives ~ -1/2.
double trace_decay_slope(const FrequencyTrace& trace, double p, long n_lo, long n_hi);

// slope of log E|nu_n - p| vs log n at dyadic n over an ensemble of
// independent Bernoulli(p) streams (tight -1/2 for a convergent law).
double bernoulli_decay_slope(double p, long n_lo, long n_hi, int n_traces,
                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Sequential samplers (standard quantum rules: unsharp Born draw, sqrt-effect
// Lüders update, unitary advance)
// ---------------------------------------------------------------------------

// Cached two-time sampler: categorical tables for the first unsharp draw and
// the conditional second draw, one table pair per resolution delta.
class TwoTimeSampler {
 public:
  TwoTimeSampler(const WaveFunction& psi0, const LinearOperator& ham, double t1,
                 double t2, double delta);

  // draws grid-center indices (i1, i2)
  std::pair<int, int> sample(CounterRng& rng) const;
  double center(int idx) const { return grid_.point(idx); }
  const Grid& grid() const { return grid_; }

  // exact joint probability of (x1 in u1, x2 in u2) under the cached tables
  double joint_probability(const SampleSet& u1, const SampleSet& u2) const;

 private:
  Grid grid_;
  std::vector<double> first_cdf_;                // over centers
  std::vector<std::vector<double>> second_cdf_;  // per first-center
};

// One run of the general n-time sampler; returns sampled center positions.
std::vector<double> sample_sequential_run(const WaveFunction& psi0,
                                          const HistorySpec& h,
                                          const LinearOperator& ham, double delta,
                                          CounterRng& rng);

// ---------------------------------------------------------------------------
// delta-mixture ensembles (operational model of sample-space instability)
// ---------------------------------------------------------------------------
struct MixturePolicy {
  std::vector<double> deltas;   // support of the mixture
  std::vector<double> weights;  // same length, sums to 1
  long block_length = 1000;     // delta redrawn once per block
};

struct EnsembleSpec {
  long n_runs = 100000;
  std::uint64_t seed = 1;
  double t1 = 0.0, t2 = 1.0;
  SampleSet u1, u2;
  MixturePolicy policy;  // single delta with weight 1 = fixed policy
};

FrequencyTrace mixture_ensemble_trace(const EnsembleSpec& spec,
                                      const WaveFunction& psi0,
                                      const LinearOperator& ham);

// Single-time marginal trace of the same ensemble (second slot ignored).
FrequencyTrace mixture_marginal_trace(const EnsembleSpec& spec,
                                      const WaveFunction& psi0,
                                      const LinearOperator& ham);

// ---------------------------------------------------------------------------
// Decoherence-ratio criterion: 2 Re d(alpha, not-alpha) / d(alpha, alpha),
// with not-alpha expanded over the 2^n - 1 slot-complement products.
// ---------------------------------------------------------------------------
double decoherence_ratio(const WaveFunction& psi, const HistorySpec& h,
                         const LinearOperator& ham, const seqmeas::PovmKind& kind);

// ---------------------------------------------------------------------------
// Frequency operators on the N-fold tensor ensemble space (Appendix-C style)
// ---------------------------------------------------------------------------

// Combinatorial route for product states: statistics of F = sum (n/N) Pi(n/N).
struct FrequencyStats {
  double mean;
  double variance;
};
FrequencyStats frequency_operator_stats(double p, int N);

// Explicit tensor-space projector Pi_P(f = n/N); dim(P)^N <= 1024 enforced.
Mat frequency_projector(const Mat& p_small, int N, int n);

// Statistics of the explicit frequency operator on the product state psi^{x N}.
FrequencyStats frequency_operator_stats_explicit(const Mat& p_small, const Vec& psi,
                                                 int N);

// || Pi_K(n/N) Pi_K(n'/N) || for a sequential effect K (non-idempotent in
// general); 2-level K, N <= 8 explicit.
double sequential_frequency_povm_overlap(const Mat& k_effect, int N, int n, int np);

// K_ij = P_i e^{iHt} P_j e^{-iHt} P_i on a small system.
Mat sequential_effect(const Mat& ham, double t, const Mat& p_i, const Mat& p_j);

// ---------------------------------------------------------------------------
// Conditional-marginal distinction (two-slot discrete measurements)
// ---------------------------------------------------------------------------
struct CondmargResult {
  std::vector<double> standard;    // sum_i Tr(rho P_i Q_j P_i) per outcome j
  std::vector<double> hypothesis;  // Tr(rho Q_j) per outcome j
};
CondmargResult condmarg_distinction(const Mat& rho, const std::vector<Mat>& first_slot,
                                    const Mat& ham, double t,
                                    const std::vector<Mat>& second_slot);

}  // namespace seqprob::freqlab

#pragma once

#include <vector>

#include "seqprob/qcore.hpp"
#include "seqprob/rng.hpp"
#include "seqprob/seqmeas.hpp"

namespace seqprob::classical {

using qcore::Grid;
using qcore::LinearOperator;
using qcore::SampleSet;
using qcore::WaveFunction;
using seqmeas::HistorySpec;

// ---------------------------------------------------------------------------
// Markov path measures
// ---------------------------------------------------------------------------
struct MarkovKernel {
  Grid grid;
  Eigen::MatrixXd matrix;  // g(x, x'): column sums * dx = 1

  MarkovKernel(const Grid& g, Eigen::MatrixXd m);
  static MarkovKernel identity(const Grid& g);
  static MarkovKernel heat(const Grid& g, double diffusion, double t);
};

// rho0: density samples on the grid (sum * dx = 1). Probability that the path
// lies in sets[k] after applying kernels[0..k], chained quadrature.
double markov_path_probability(const Eigen::VectorXd& rho0,
                               const std::vector<MarkovKernel>& kernels,
                               const std::vector<SampleSet>& sets);

// Monte Carlo oracle for the heat kernel chain (continuum random walk).
struct McValue {
  double value = 0.0;
  double std_error = 0.0;
};
McValue heat_chain_monte_carlo(const Eigen::VectorXd& rho0, const Grid& grid,
                               double diffusion, const std::vector<double>& times,
                               const std::vector<SampleSet>& sets, int n_walkers,
                               std::uint64_t seed);

// ---------------------------------------------------------------------------
// Bohmian mechanics
// ---------------------------------------------------------------------------

// v(x) = Im(d_x psi / psi)/m with 4th-order centered differences on the grid,
// linear interpolation off-grid. Throws NearNode when |psi| dips below floor.
struct NearNode : std::runtime_error {
  explicit NearNode(double x)
      : std::runtime_error("guidance velocity near a node"), position(x) {}
  double position;
};
double bohm_velocity(const WaveFunction& psi, double x, double mass);

struct BohmSettings {
  int n_samples = 10000;
  std::uint64_t seed = 1;
  double rel_tol = 1e-8;
  double abs_tol = 1e-9;
  double node_floor = 1e-10;
  int max_retries = 10;
};

struct BohmEnsemble {
  std::vector<double> times;                 // checkpoint times (first is 0)
  Eigen::MatrixXd positions;                 // n_samples x times.size()
  std::vector<int> alive;                    // 1 = integrated, 0 = discarded
  int n_discarded = 0;
  double ks_statistic = 0.0;                 // initial sample vs |psi0|^2
  bool ks_pass = false;                      // at significance 0.01
};

// Integrates the guidance equation for an ensemble drawn from |psi0|^2 by
// inverse-CDF sampling (deterministic for fixed seed). Adaptive RK45 stepping
// with the wave function advanced spectrally alongside.
BohmEnsemble bohm_trajectories(const WaveFunction& psi0, const LinearOperator& ham,
                               double mass, const std::vector<double>& times,
                               const BohmSettings& settings);

// Fraction of trajectories inside every U_k at t_k, with MC standard error.
McValue bohm_multitime_probability(const BohmEnsemble& ens, const HistorySpec& h);

// chi^2 p-value of the ensemble positions at checkpoint index against the
// evolved |psi(t)|^2, using equal-probability bins.
double bohm_equivariance_pvalue(const BohmEnsemble& ens, const WaveFunction& psi0,
                                const LinearOperator& ham, int checkpoint,
                                int n_bins = 32);

// true if final ordering of trajectories equals initial ordering (1-D
// trajectories cannot cross)
bool bohm_order_preserved(const BohmEnsemble& ens);

// ---------------------------------------------------------------------------
// Local hidden-variable comparators
// ---------------------------------------------------------------------------

// Deterministic cell-kicked model. The system drifts by integer amounts
// between measurements; the first apparatus dithers the particle inside its
// unit pointer cell (reads are unaffected: cond1/cond2 hold exactly). Setting
// break_shift != 0 injects Q1 into the post-t1 update, violating locality.
struct KickedMapModel {
  double drift1 = 3.0;
  double drift2 = 2.0;
  double dither = 0.45;      // intra-cell disturbance amplitude (< 1/2)
  double break_shift = 0.0;  // nonzero -> locality broken
  double rho_center = 0.3;
  double rho_sigma = 1.7;    // initial density N(center, sigma^2)

  bool locality() const { return break_shift == 0.0; }
  // two-time pointer-set probability of the full model (x0, Q1, Q2 integrated)
  double model_two_time(const SampleSet& u1, const SampleSet& u2) const;
  // stochastic process built from the system degrees of freedom alone
  double system_two_time(const SampleSet& u1, const SampleSet& u2) const;
};

// Local Markov jump model on a ring of n_states sites; pointer reads the site
// index. Apparatus chains are independent of the system (locality holds).
struct MarkovJumpModel {
  int n_states = 12;
  double hop = 0.3;      // per-step probability of hopping each way
  int steps1 = 3;        // steps before the first read
  int steps2 = 4;        // steps between reads
  int start_state = 2;

  // exact chain value for pointer sets (sets of site indices)
  double system_two_time(const std::vector<int>& u1, const std::vector<int>& u2) const;
  // MC over the full model including apparatus variables
  McValue model_two_time_mc(const std::vector<int>& u1, const std::vector<int>& u2,
                            int n_samples, std::uint64_t seed) const;
};

struct HvFactorization {
  double model_value;
  double system_value;
  double defect;
};

// Evaluates both sides of the locality factorization identity; refuses when
// the locality flag is unset (the theorem's hypothesis fails).
HvFactorization local_hv_two_time(const KickedMapModel& model, const SampleSet& u1,
                                  const SampleSet& u2);

// Raw evaluation without the locality guard (used to exhibit the failure).
HvFactorization hv_two_time_raw(const KickedMapModel& model, const SampleSet& u1,
                                const SampleSet& u2);

// Unsharp variant: continuous pointer X = x_t + delta * noise; the defect
// against the sharp system-only chain is O(delta/L).
struct UnsharpHvResult {
  double smeared_value;
  double sharp_value;
  double defect;
  double measured_c;  // defect * L / (delta * sharp_value), 0 when sharp = 0
};
UnsharpHvResult unsharp_hv_check(double delta, const SampleSet& u1,
                                 const SampleSet& u2, double drift1, double drift2,
                                 double rho_center, double rho_sigma);

}  // namespace seqprob::classical

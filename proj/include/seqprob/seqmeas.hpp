#pragma once

#include <variant>
#include <vector>

#include "seqprob/qcore.hpp"

namespace seqprob::seqmeas {

using qcore::Complex;
using qcore::DensityOperator;
using qcore::Grid;
using qcore::LinearOperator;
using qcore::Mat;
using qcore::SampleSet;
using qcore::Vec;
using qcore::WaveFunction;

// ---------------------------------------------------------------------------
// Histories: time-ordered (t_k, U_k) pairs.
// ---------------------------------------------------------------------------
struct HistoryEntry {
  double time;
  SampleSet set;
};

class HistorySpec {
 public:
  explicit HistorySpec(std::vector<HistoryEntry> entries);
  const std::vector<HistoryEntry>& entries() const { return entries_; }
  int size() const { return static_cast<int>(entries_.size()); }
  // History with the same times, entry `slot` replaced by `set`.
  HistorySpec with_slot(int slot, SampleSet set) const;
  HistorySpec without_slot(int slot) const;
  bool same_times(const HistorySpec& other) const;

 private:
  std::vector<HistoryEntry> entries_;
};

// ---------------------------------------------------------------------------
// POVM kinds. sharp_grid realizes sets as projectors onto delta-cell unions;
// gaussian_sqrt realizes them through square roots of the Gaussian position
// POVM; discrete_spectral takes an explicit exhaustive projector family.
// ---------------------------------------------------------------------------
struct SharpGridKind {
  double delta;
};
struct GaussianSqrtKind {
  double delta;
};
struct DiscreteSpectralKind {};

using PovmKind = std::variant<SharpGridKind, GaussianSqrtKind, DiscreteSpectralKind>;

struct EffectOperator {
  LinearOperator op;
};

struct DecoherenceValue {
  Complex value;
};

// ---------------------------------------------------------------------------
// Gaussian position POVM
// ---------------------------------------------------------------------------

// Pi^delta_x: diagonal effect with profile f_delta(x_center - x).
EffectOperator gaussian_povm_element(const Grid& grid, double x_center, double delta);

// Completeness / first-moment integrals over centers (extended past the box so
// interior rows see the full Gaussian mass).
LinearOperator gaussian_povm_completeness(const Grid& grid, double delta);
LinearOperator gaussian_povm_first_moment(const Grid& grid, double delta);

// ---------------------------------------------------------------------------
// Class operators and the non-additive history measure
// ---------------------------------------------------------------------------

// C_alpha = Q_n ... Q_1 with Q_k the Heisenberg-picture slot operator
// (projector or sqrt-effect, by kind).
LinearOperator class_operator(const HistorySpec& h, const LinearOperator& ham,
                              const PovmKind& kind);

// p(alpha) = Tr(C rho C^dag).
double history_probability(const DensityOperator& rho, const HistorySpec& h,
                           const LinearOperator& ham, const PovmKind& kind);
double history_probability(const WaveFunction& psi, const HistorySpec& h,
                           const LinearOperator& ham, const PovmKind& kind);

// d(alpha, beta) = Tr(C_alpha rho C_beta^dag).
DecoherenceValue decoherence_functional(const DensityOperator& rho,
                                        const HistorySpec& a, const HistorySpec& b,
                                        const LinearOperator& ham,
                                        const PovmKind& kind);
DecoherenceValue decoherence_functional(const WaveFunction& psi,
                                        const HistorySpec& a, const HistorySpec& b,
                                        const LinearOperator& ham,
                                        const PovmKind& kind);

// p(a v b) - p(a) - p(b) for histories differing in one slot with disjoint
// sets there; equals 2 Re d(a,b) identically (projector kinds only).
struct AdditivityDefect {
  double defect;        // p(a v b) - p(a) - p(b)
  double two_re_d;      // 2 Re d(a,b)
  double p_join, p_a, p_b;
};
AdditivityDefect additivity_defect(const DensityOperator& rho, const HistorySpec& a,
                                   const HistorySpec& b, const LinearOperator& ham,
                                   const PovmKind& kind);

// ---------------------------------------------------------------------------
// Two-time POVM for a discrete observable (plain matrices, no grid):
// p(i,0; j,t) = Tr(Q_j P_i rho P_i).
// ---------------------------------------------------------------------------
double discrete_two_time_povm(const Mat& rho, int i, int j, const Mat& ham, double t,
                              const std::vector<Mat>& projectors);

// ---------------------------------------------------------------------------
// Sequential square-root POVM R^delta(U_1,t_1; ...; U_n,t_n)  (Gaussian kind)
// ---------------------------------------------------------------------------
EffectOperator sqrt_povm_sequential(const Grid& grid, const HistorySpec& h,
                                    const LinearOperator& ham, double delta);

// Same nesting with a caller-supplied family of diagonal sqrt-effect profiles
// s_y(x) placed at centers y (weight dy): used by the apparatus module.
EffectOperator sqrt_povm_sequential_custom(
    const Grid& grid, const HistorySpec& h, const LinearOperator& ham,
    const std::vector<double>& centers, double center_weight,
    const std::function<double(double, double)>& sqrt_profile);

// Tr(rho R^delta(h)): the sequential-measurement probability p_delta.
double sqrt_povm_probability(const DensityOperator& rho, const HistorySpec& h,
                             const LinearOperator& ham, double delta);
double sqrt_povm_probability(const WaveFunction& psi, const HistorySpec& h,
                             const LinearOperator& ham, double delta);

// Sharp-grid two-time probability p_delta(U1,t1;U2,t2) via delta-cell pinching
// (works on wavefunctions with the FFT path; cells snapped to the grid).
double sharp_grid_probability(const WaveFunction& psi, const HistorySpec& h,
                              const LinearOperator& ham, double delta);

// ---------------------------------------------------------------------------
// Interference terms (Eq-level identity: merging adjacent delta-cells)
// ---------------------------------------------------------------------------

// d_delta(x1+delta/2, x1-delta/2, t1; U2, t2) for cell pair centered at x1.
Complex interference_term(const WaveFunction& psi, double x1_center, double delta,
                          const SampleSet& u2, double t1, double t2,
                          const LinearOperator& ham);

// eps_delta(U1,t1;U2,t2) = sum of 2 Re d over merged cells; equals
// p_{2delta} - p_delta exactly.
struct InterferenceBudget {
  double p_fine;        // p_delta
  double p_coarse;      // p_{2 delta}
  double integrated;    // sum of interference terms
};
InterferenceBudget integrated_interference(const WaveFunction& psi,
                                           const HistorySpec& h,
                                           const LinearOperator& ham, double delta);

// ---------------------------------------------------------------------------
// Kolmogorov compatibility check
// ---------------------------------------------------------------------------
struct CompatibilityResult {
  double lhs;     // slot marginalized to the full line
  double rhs;     // history with the slot removed
  double defect;  // |lhs - rhs|
};
CompatibilityResult compatibility_check(const DensityOperator& rho,
                                        const HistorySpec& h, int slot,
                                        const LinearOperator& ham, double delta);
CompatibilityResult compatibility_check(const WaveFunction& psi,
                                        const HistorySpec& h, int slot,
                                        const LinearOperator& ham, double delta);

// ---------------------------------------------------------------------------
// Numeric witnesses of the no-go propositions
// ---------------------------------------------------------------------------
struct NogoWitness {
  double commutator_norm;      // ||[P_H(t1)(U1), P_H(t2)(U2)]||
  double marginal_nonidem;     // ||M - M^2|| for M = marginal over slot 1
  std::vector<double> state_probabilities;  // p(U1,t1;U2,t2) per supplied state
};
NogoWitness nogo_witness(const std::vector<DensityOperator>& rho_family,
                         const LinearOperator& ham, double delta, double t1,
                         double t2, const SampleSet& u1, const SampleSet& u2);

}  // namespace seqprob::seqmeas

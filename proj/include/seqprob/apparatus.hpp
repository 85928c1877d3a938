#pragma once

#include <vector>

#include "seqprob/qcore.hpp"
#include "seqprob/seqmeas.hpp"

namespace seqprob::apparatus {

using qcore::Complex;
using qcore::Grid;
using qcore::LinearOperator;
using qcore::SampleSet;
using qcore::Vec;
using qcore::WaveFunction;

// ---------------------------------------------------------------------------
// Two-pointer measuring-device toy model: impulsive x (x) k couplings at t1
// and t2, device self-dynamics neglected.
// ---------------------------------------------------------------------------

// Device wave function in the momentum representation, on a symmetric k-grid.
struct DeviceState {
  Eigen::VectorXd k_nodes;  // symmetric about 0, uniform spacing dk
  Vec amplitudes;           // <k|Psi0>, normalized: sum |A|^2 dk = 1
  double dk = 0.0;

  static DeviceState gaussian(double sigma_k, int n_nodes);
  // pointer-space conjugate grid: n_nodes values, spacing 2 pi/(n dk)
  std::vector<double> pointer_grid() const;
  double pointer_spacing() const;
};

struct CouplingSpec {
  double t1 = 0.0;
  double t2 = 1.0;
};

struct ApparatusState {
  WaveFunction psi0;
  DeviceState device;  // two identical copies
  CouplingSpec coupling;
};

// Composite amplitude phi_{k1 k2}(x) after both impulses; index [k1][k2] maps
// to a system wave function on the grid.
struct CompositeState {
  Grid grid;
  DeviceState device;
  CouplingSpec coupling;
  std::vector<std::vector<Vec>> phi;  // [k1][k2] -> amplitudes over x
  double norm_sq = 0.0;               // should be 1 within 1e-6
};

CompositeState impulsive_total_state(const ApparatusState& app,
                                     const LinearOperator& ham);

// P(pointer1 in U1, pointer2 in U2) over the conjugate pointer grids.
double pointer_joint_distribution(const CompositeState& state, const SampleSet& u1,
                                  const SampleSet& u2);

// Tr(rho R(U1,t1;U2,t2)) with the device-induced sqrt-effect family
// s_y(x) = sum_k (dk/sqrt(2 pi)) e^{-i k (x - y)} <k|Psi0> placed on the
// pointer grid: the POVM the pointer statistics must reproduce.
double induced_povm_probability(const ApparatusState& app, const LinearOperator& ham,
                                const SampleSet& u1, const SampleSet& u2);

// Effective resolution of the device: Gaussian fit of the induced effect
// profile |s(u)|^2, with relative L2 fit residual.
struct ResolutionEstimate {
  double delta;
  double fit_residual;
};
ResolutionEstimate resolution_from_device(const DeviceState& dev);

}  // namespace seqprob::apparatus

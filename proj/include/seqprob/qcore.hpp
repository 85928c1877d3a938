#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace seqprob::qcore {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

constexpr double kConstructionTol = 1e-9;   // invariant checks at build time
constexpr double kPhysicsTol = 1e-6;        // default physics assertions
constexpr double kEigClamp = 1e-12;         // eigenvalue clamp for sqrt/positivity

// ---------------------------------------------------------------------------
// Grid: uniform periodic discretization of an interval of the position line.
// Points are x_i = x_min + i*dx, i = 0..n-1 (x_max excluded).
// ---------------------------------------------------------------------------
class Grid {
 public:
  Grid(int n_points, double x_min, double x_max);

  int n() const { return n_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double dx() const { return dx_; }
  double point(int i) const { return x_min_ + i * dx_; }
  Eigen::VectorXd points() const;
  // Fourier wavenumber of mode i (standard FFT ordering, symmetric about 0).
  double wavenumber(int i) const;
  // Index of the cell containing x (periodic clamp off; throws if outside).
  int index_of(double x) const;
  bool same_as(const Grid& other) const;

 private:
  int n_;
  double x_min_, x_max_, dx_;
};

// ---------------------------------------------------------------------------
// SampleSet: finite union of disjoint half-open intervals [a,b), the
// coarse-graining alphabet. Infinite endpoints encode rays; a single
// (-inf,+inf) interval is the full line.
// ---------------------------------------------------------------------------
struct Interval {
  double a;
  double b;  // half-open [a, b)
};

class SampleSet {
 public:
  SampleSet() = default;  // empty set
  explicit SampleSet(std::vector<Interval> intervals);
  static SampleSet empty() { return SampleSet(); }
  static SampleSet full_line();
  static SampleSet interval(double a, double b);
  static SampleSet half_line_right(double a);  // [a, inf)
  static SampleSet half_line_left(double b);   // (-inf, b)

  bool is_empty() const { return intervals_.empty(); }
  bool is_full_line() const;
  const std::vector<Interval>& intervals() const { return intervals_; }
  bool contains(double x) const;
  double total_length() const;  // +inf for unbounded sets

  SampleSet complement() const;
  SampleSet set_union(const SampleSet& other) const;
  SampleSet set_intersection(const SampleSet& other) const;
  bool disjoint_from(const SampleSet& other) const;

  // Snaps endpoints to cell boundaries of the lattice {origin + k*spacing}.
  // Reports the largest displacement; throws if it exceeds spacing/2.
  SampleSet snapped(double spacing, double origin, double* max_shift = nullptr) const;

  // Clamp infinite rays to [grid.x_min, grid.x_max).
  SampleSet clamped(const Grid& grid) const;

  std::string to_string() const;

 private:
  std::vector<Interval> intervals_;  // sorted, disjoint, non-empty
};

// ---------------------------------------------------------------------------
// States. WaveFunction stores continuum samples psi(x_i) with
// sum |psi_i|^2 dx = 1. DensityOperator stores the kernel rho(x_i, x_j) with
// trace*dx = 1.
// ---------------------------------------------------------------------------
class WaveFunction {
 public:
  WaveFunction(const Grid& grid, Vec amplitudes, bool renormalize = true);
  static WaveFunction gaussian_packet(const Grid& grid, double center,
                                      double sigma, double momentum = 0.0);
  // Uniform slit chi_[-half_width, half_width], jump samples at half weight.
  static WaveFunction uniform_slit(const Grid& grid, double half_width,
                                   double center = 0.0);
  static WaveFunction two_slit(const Grid& grid, double sigma, double separation);

  const Grid& grid() const { return grid_; }
  const Vec& amplitudes() const { return amp_; }
  Vec& mutable_amplitudes() { return amp_; }
  double norm() const;
  void normalize();
  double density(int i) const { return std::norm(amp_[i]); }
  // Probability mass outside +/- (x_max - margin): edge-guard diagnostic.
  double edge_mass(int guard_cells = 4) const;

 private:
  Grid grid_;
  Vec amp_;
};

class LinearOperator;

class DensityOperator {
 public:
  DensityOperator(const Grid& grid, Mat kernel, bool validate = true);
  static DensityOperator pure(const WaveFunction& psi);

  const Grid& grid() const { return grid_; }
  const Mat& kernel() const { return kernel_; }
  double trace() const;  // trace of the kernel times dx (should be 1)
  // Position density on the diagonal.
  double density(int i) const { return kernel_(i, i).real(); }

 private:
  Grid grid_;
  Mat kernel_;
};

// ---------------------------------------------------------------------------
// LinearOperator: dense operator in the plain (dimensionless) convention --
// projectors have 0/1 spectra, unitaries satisfy U^dag U = 1 as matrices.
// Application to continuum-sample states is the plain matrix-vector product.
// ---------------------------------------------------------------------------
class LinearOperator {
 public:
  struct Flags {
    bool hermitian = false;
    bool unitary = false;
    bool positive = false;
    bool free_spectrum = false;  // built by free_hamiltonian (enables FFT path)
    bool diagonal = false;
  };

  LinearOperator(const Grid& grid, Mat matrix, bool verify_flags = true);
  static LinearOperator identity(const Grid& grid);
  static LinearOperator diagonal(const Grid& grid, const Eigen::VectorXd& diag);
  static LinearOperator projector(const Grid& grid, const SampleSet& set);

  const Grid& grid() const { return grid_; }
  const Mat& matrix() const { return mat_; }
  const Flags& flags() const { return flags_; }
  Flags& mutable_flags() { return flags_; }
  double mass() const { return mass_; }  // for free hamiltonians
  void set_mass(double m) { mass_ = m; }

  bool is_hermitian(double tol = kConstructionTol) const;
  bool is_unitary(double tol = kConstructionTol) const;
  double min_eigenvalue() const;

  // Hermitian eigendecomposition, computed lazily and cached.
  struct Eigensystem {
    Eigen::VectorXd values;
    Mat vectors;
  };
  const Eigensystem& eigensystem() const;

  LinearOperator apply_function(const std::function<Complex(double)>& f) const;
  LinearOperator sqrt_psd() const;  // clamped PSD square root
  double operator_norm() const;     // largest |eigenvalue| (hermitian) or SVD

 private:
  Grid grid_;
  Mat mat_;
  Flags flags_;
  double mass_ = 0.0;
  mutable std::shared_ptr<Eigensystem> eig_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Kinetic operator p^2/2m diagonalized over the discrete Fourier modes of the
// periodic grid. Hermitian, positive, free_spectrum flags set.
LinearOperator free_hamiltonian(const Grid& grid, double mass);

// e^{-iHt} applied to states; FFT fast path for free hamiltonians, dense
// spectral decomposition otherwise.
WaveFunction evolve(const WaveFunction& psi, const LinearOperator& h, double t);
DensityOperator evolve(const DensityOperator& rho, const LinearOperator& h, double t);
LinearOperator evolution_operator(const LinearOperator& h, double t);
// Heisenberg picture: e^{iHt} A e^{-iHt}.
LinearOperator heisenberg(const LinearOperator& a, const LinearOperator& h, double t);

// Expectation Tr(rho E) * dx.
double expectation(const DensityOperator& rho, const LinearOperator& e);
double expectation(const WaveFunction& psi, const LinearOperator& e);

struct LudersResult {
  double probability = 0.0;
  std::optional<DensityOperator> state;  // empty when probability ~ 0
};

// State update rho -> sqrt(E) rho sqrt(E) / p after outcome E; for projectors
// sqrt(E) = E.
LudersResult luders_reduce(const DensityOperator& rho, const LinearOperator& e);

// ---------------------------------------------------------------------------
// Smeared characteristic functions (finite instrument resolution).
// chi_U^delta(x) = int_U f_delta(x - x') dx' with f_delta the unit-normalized
// Gaussian of width delta.
// ---------------------------------------------------------------------------
struct SmearedIndicator {
  SampleSet set;
  double delta = 0.0;

  SmearedIndicator(SampleSet s, double d);
};

double smeared_chi(const SmearedIndicator& ind, double x);

struct SmearingError {
  double weighted_l1 = 0.0;     // int rho(x) |chi_U - chi_U^delta| dx
  double bound = 0.0;           // c' * (delta/L) * p(U), with c' = order-unity constant
  double probability = 0.0;     // p(U) under rho
  double c_prime = 1.0;         // the constant used in the reported bound
};

SmearingError smearing_relative_error(const SmearedIndicator& ind,
                                      const DensityOperator& rho,
                                      double c_prime = 1.0);

// L1 distance int |chi_U - chi_U^delta| dx (by quadrature over the margins).
double smearing_l1_distance(const SmearedIndicator& ind);

// ---------------------------------------------------------------------------
// JSON snapshots (grid params + interleaved re/im amplitude arrays).
// ---------------------------------------------------------------------------
nlohmann::json grid_to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);
nlohmann::json wavefunction_to_json(const WaveFunction& psi);
WaveFunction wavefunction_from_json(const nlohmann::json& j);

}  // namespace seqprob::qcore

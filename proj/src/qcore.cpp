#include "seqprob/qcore.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "seqprob/quadrature.hpp"

namespace seqprob::qcore {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// int_{-inf}^{x} f_delta = Phi(x/delta)
double gauss_cdf(double x, double delta) {
  return 0.5 * std::erfc(-x / (delta * std::sqrt(2.0)));
}

}  // namespace

// ----------------------------------------------------------------- Grid ----

Grid::Grid(int n_points, double x_min, double x_max)
    : n_(n_points), x_min_(x_min), x_max_(x_max) {
  if (n_points < 8) throw std::invalid_argument("Grid: n_points must be >= 8");
  if (!(x_max > x_min)) throw std::invalid_argument("Grid: x_max must exceed x_min");
  dx_ = (x_max - x_min) / n_points;
}

Eigen::VectorXd Grid::points() const {
  Eigen::VectorXd p(n_);
  for (int i = 0; i < n_; ++i) p[i] = point(i);
  return p;
}

double Grid::wavenumber(int i) const {
  const int m = (i <= n_ / 2) ? i : i - n_;
  return 2.0 * M_PI * m / (n_ * dx_);
}

int Grid::index_of(double x) const {
  const int i = static_cast<int>(std::floor((x - x_min_) / dx_ + 0.5));
  if (i < 0 || i >= n_) throw std::out_of_range("Grid::index_of: point outside grid");
  return i;
}

bool Grid::same_as(const Grid& o) const {
  return n_ == o.n_ && std::abs(x_min_ - o.x_min_) < 1e-12 &&
         std::abs(x_max_ - o.x_max_) < 1e-12;
}

// ------------------------------------------------------------ SampleSet ----

SampleSet::SampleSet(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& u, const Interval& v) { return u.a < v.a; });
  for (const auto& iv : intervals) {
    if (!(iv.b > iv.a)) continue;  // drop empty
    if (!intervals_.empty() && iv.a <= intervals_.back().b) {
      if (iv.a < intervals_.back().b)
        throw std::invalid_argument("SampleSet: overlapping intervals");
      intervals_.back().b = std::max(intervals_.back().b, iv.b);  // merge touching
    } else {
      intervals_.push_back(iv);
    }
  }
}

SampleSet SampleSet::full_line() { return SampleSet({{-kInf, kInf}}); }

SampleSet SampleSet::interval(double a, double b) { return SampleSet({{a, b}}); }

SampleSet SampleSet::half_line_right(double a) { return SampleSet({{a, kInf}}); }

SampleSet SampleSet::half_line_left(double b) { return SampleSet({{-kInf, b}}); }

bool SampleSet::is_full_line() const {
  return intervals_.size() == 1 && intervals_[0].a == -kInf && intervals_[0].b == kInf;
}

bool SampleSet::contains(double x) const {
  for (const auto& iv : intervals_)
    if (x >= iv.a && x < iv.b) return true;
  return false;
}

double SampleSet::total_length() const {
  double len = 0.0;
  for (const auto& iv : intervals_) len += iv.b - iv.a;
  return len;
}

SampleSet SampleSet::complement() const {
  std::vector<Interval> out;
  double lo = -kInf;
  for (const auto& iv : intervals_) {
    if (iv.a > lo) out.push_back({lo, iv.a});
    lo = iv.b;
  }
  if (lo < kInf) out.push_back({lo, kInf});
  return SampleSet(out);
}

SampleSet SampleSet::set_union(const SampleSet& other) const {
  std::vector<Interval> all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  std::sort(all.begin(), all.end(),
            [](const Interval& u, const Interval& v) { return u.a < v.a; });
  std::vector<Interval> out;
  for (const auto& iv : all) {
    if (!out.empty() && iv.a <= out.back().b)
      out.back().b = std::max(out.back().b, iv.b);
    else
      out.push_back(iv);
  }
  SampleSet s;
  s.intervals_ = out;
  return s;
}

SampleSet SampleSet::set_intersection(const SampleSet& other) const {
  std::vector<Interval> out;
  for (const auto& u : intervals_)
    for (const auto& v : other.intervals_) {
      const double a = std::max(u.a, v.a);
      const double b = std::min(u.b, v.b);
      if (b > a) out.push_back({a, b});
    }
  return SampleSet(out);
}

bool SampleSet::disjoint_from(const SampleSet& other) const {
  return set_intersection(other).is_empty();
}

SampleSet SampleSet::snapped(double spacing, double origin, double* max_shift) const {
  double worst = 0.0;
  std::vector<Interval> out;
  for (const auto& iv : intervals_) {
    Interval s = iv;
    if (std::isfinite(iv.a)) {
      s.a = origin + std::round((iv.a - origin) / spacing) * spacing;
      worst = std::max(worst, std::abs(s.a - iv.a));
    }
    if (std::isfinite(iv.b)) {
      s.b = origin + std::round((iv.b - origin) / spacing) * spacing;
      worst = std::max(worst, std::abs(s.b - iv.b));
    }
    if (s.b > s.a) out.push_back(s);
  }
  if (max_shift) *max_shift = worst;
  if (worst > spacing / 2 + 1e-12)
    throw std::invalid_argument("SampleSet::snapped: displacement exceeds spacing/2");
  return SampleSet(out);
}

SampleSet SampleSet::clamped(const Grid& grid) const {
  std::vector<Interval> out;
  for (auto iv : intervals_) {
    iv.a = std::max(iv.a, grid.x_min());
    iv.b = std::min(iv.b, grid.x_max());
    if (iv.b > iv.a) out.push_back(iv);
  }
  return SampleSet(out);
}

std::string SampleSet::to_string() const {
  if (is_empty()) return "{}";
  std::ostringstream os;
  for (size_t i = 0; i < intervals_.size(); ++i) {
    if (i) os << " u ";
    os << "[" << intervals_[i].a << "," << intervals_[i].b << ")";
  }
  return os.str();
}

// --------------------------------------------------------- WaveFunction ----

WaveFunction::WaveFunction(const Grid& grid, Vec amplitudes, bool renormalize)
    : grid_(grid), amp_(std::move(amplitudes)) {
  if (amp_.size() != grid_.n())
    throw std::invalid_argument("WaveFunction: amplitude length mismatch");
  if (renormalize) normalize();
}

WaveFunction WaveFunction::gaussian_packet(const Grid& grid, double center,
                                           double sigma, double momentum) {
  Vec a(grid.n());
  for (int i = 0; i < grid.n(); ++i) {
    const double x = grid.point(i);
    const double u = (x - center) / (2.0 * sigma);
    a[i] = std::exp(Complex(-u * u, momentum * x));
  }
  return WaveFunction(grid, std::move(a));
}

WaveFunction WaveFunction::uniform_slit(const Grid& grid, double half_width,
                                        double center) {
  Vec a = Vec::Zero(grid.n());
  for (int i = 0; i < grid.n(); ++i) {
    const double x = grid.point(i);
    const double d = std::abs(x - center);
    if (d < half_width - 1e-12)
      a[i] = 1.0;
    else if (d < half_width + 1e-12)
      a[i] = 0.5;  // jump sampled at its midpoint
  }
  return WaveFunction(grid, std::move(a));
}

WaveFunction WaveFunction::two_slit(const Grid& grid, double sigma,
                                    double separation) {
  Vec a(grid.n());
  for (int i = 0; i < grid.n(); ++i) {
    const double x = grid.point(i);
    const double up = (x - separation / 2) / sigma;
    const double um = (x + separation / 2) / sigma;
    a[i] = std::exp(-0.5 * up * up) + std::exp(-0.5 * um * um);
  }
  return WaveFunction(grid, std::move(a));
}

double WaveFunction::norm() const {
  return std::sqrt(amp_.squaredNorm() * grid_.dx());
}

void WaveFunction::normalize() {
  const double n = norm();
  if (n < 1e-150) throw std::runtime_error("WaveFunction: zero norm");
  amp_ /= n;
}

double WaveFunction::edge_mass(int guard_cells) const {
  double m = 0.0;
  for (int i = 0; i < guard_cells; ++i)
    m += (std::norm(amp_[i]) + std::norm(amp_[grid_.n() - 1 - i])) * grid_.dx();
  return m;
}

// ------------------------------------------------------ DensityOperator ----

DensityOperator::DensityOperator(const Grid& grid, Mat kernel, bool validate)
    : grid_(grid), kernel_(std::move(kernel)) {
  if (kernel_.rows() != grid_.n() || kernel_.cols() != grid_.n())
    throw std::invalid_argument("DensityOperator: size mismatch");
  if (validate) {
    if ((kernel_ - kernel_.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + kernel_.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("DensityOperator: kernel not Hermitian");
    const double tr = trace();
    if (std::abs(tr - 1.0) > 1e-8)
      throw std::invalid_argument("DensityOperator: trace*dx != 1 (got " +
                                  std::to_string(tr) + ")");
  }
}

DensityOperator DensityOperator::pure(const WaveFunction& psi) {
  Mat k = psi.amplitudes() * psi.amplitudes().adjoint();
  return DensityOperator(psi.grid(), std::move(k), false);
}

double DensityOperator::trace() const {
  return kernel_.trace().real() * grid_.dx();
}

// ------------------------------------------------------- LinearOperator ----

LinearOperator::LinearOperator(const Grid& grid, Mat matrix, bool verify_flags)
    : grid_(grid), mat_(std::move(matrix)) {
  if (mat_.rows() != grid_.n() || mat_.cols() != grid_.n())
    throw std::invalid_argument("LinearOperator: size mismatch");
  if (verify_flags) {
    flags_.hermitian = is_hermitian();
    if (flags_.hermitian) flags_.positive = min_eigenvalue() > -kConstructionTol;
  }
}

LinearOperator LinearOperator::identity(const Grid& grid) {
  LinearOperator op(grid, Mat::Identity(grid.n(), grid.n()), false);
  op.flags_ = {true, true, true, false, true};
  return op;
}

LinearOperator LinearOperator::diagonal(const Grid& grid,
                                        const Eigen::VectorXd& diag) {
  Mat m = Mat::Zero(grid.n(), grid.n());
  for (int i = 0; i < grid.n(); ++i) m(i, i) = diag[i];
  LinearOperator op(grid, std::move(m), false);
  op.flags_.hermitian = true;
  op.flags_.diagonal = true;
  op.flags_.positive = diag.minCoeff() >= -kConstructionTol;
  return op;
}

LinearOperator LinearOperator::projector(const Grid& grid, const SampleSet& set) {
  Eigen::VectorXd d(grid.n());
  for (int i = 0; i < grid.n(); ++i) d[i] = set.contains(grid.point(i)) ? 1.0 : 0.0;
  return diagonal(grid, d);
}

bool LinearOperator::is_hermitian(double tol) const {
  const double scale = 1.0 + mat_.cwiseAbs().maxCoeff();
  return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool LinearOperator::is_unitary(double tol) const {
  const Mat p = mat_.adjoint() * mat_;
  return (p - Mat::Identity(grid_.n(), grid_.n())).cwiseAbs().maxCoeff() <= tol;
}

double LinearOperator::min_eigenvalue() const {
  if (flags_.diagonal) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_.n(); ++i) m = std::min(m, mat_(i, i).real());
    return m;
  }
  return eigensystem().values.minCoeff();
}

const LinearOperator::Eigensystem& LinearOperator::eigensystem() const {
  if (!eig_) {
    Eigen::SelfAdjointEigenSolver<Mat> solver(mat_);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("LinearOperator: eigendecomposition failed");
    auto e = std::make_shared<Eigensystem>();
    e->values = solver.eigenvalues();
    e->vectors = solver.eigenvectors();
    eig_ = std::move(e);
  }
  return *eig_;
}

LinearOperator LinearOperator::apply_function(
    const std::function<Complex(double)>& f) const {
  if (flags_.diagonal) {
    Mat m = Mat::Zero(grid_.n(), grid_.n());
    for (int i = 0; i < grid_.n(); ++i) m(i, i) = f(mat_(i, i).real());
    return LinearOperator(grid_, std::move(m), true);
  }
  const auto& es = eigensystem();
  Vec fv(grid_.n());
  for (int i = 0; i < grid_.n(); ++i) fv[i] = f(es.values[i]);
  Mat m = es.vectors * fv.asDiagonal() * es.vectors.adjoint();
  return LinearOperator(grid_, std::move(m), true);
}

LinearOperator LinearOperator::sqrt_psd() const {
  auto op = apply_function([](double lam) {
    return Complex(std::sqrt(std::max(lam, 0.0)), 0.0);
  });
  op.flags_.positive = true;
  return op;
}

double LinearOperator::operator_norm() const {
  if (is_hermitian()) {
    const auto& es = eigensystem();
    return std::max(std::abs(es.values.minCoeff()), std::abs(es.values.maxCoeff()));
  }
  Eigen::JacobiSVD<Mat> svd(mat_);
  return svd.singularValues()[0];
}

// ----------------------------------------------------------- Operations ----

namespace {

// Dense DFT matrix pair for building the free hamiltonian (n <= 1024 typical).
Mat dft_matrix(const Grid& g) {
  const int n = g.n();
  Mat f(n, n);
  const double w = -2.0 * M_PI / n;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      f(r, c) = std::polar(1.0 / std::sqrt(double(n)), w * r * c);
  return f;
}

Vec fft_forward(const Vec& v) {
  Eigen::FFT<double> fft;
  Vec out(v.size());
  std::vector<Complex> in(v.data(), v.data() + v.size()), o(v.size());
  fft.fwd(o, in);
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = o[i];
  return out;
}

Vec fft_inverse(const Vec& v) {
  Eigen::FFT<double> fft;
  Vec out(v.size());
  std::vector<Complex> in(v.data(), v.data() + v.size()), o(v.size());
  fft.inv(o, in);
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = o[i];
  return out;
}

}  // namespace

LinearOperator free_hamiltonian(const Grid& grid, double mass) {
  if (mass <= 0.0) throw std::invalid_argument("free_hamiltonian: mass must be > 0");
  if (grid.n() < 8) throw std::invalid_argument("free_hamiltonian: grid too small");
  const int n = grid.n();
  const Mat f = dft_matrix(grid);
  Vec diag(n);
  for (int i = 0; i < n; ++i) {
    const double k = grid.wavenumber(i);
    diag[i] = k * k / (2.0 * mass);
  }
  Mat h = f.adjoint() * diag.asDiagonal() * f;
  h = Complex(0.5, 0.0) * (h + Mat(h.adjoint()));  // absorb rounding asymmetry
  LinearOperator op(grid, std::move(h), false);
  op.mutable_flags() = {true, false, true, true, false};
  op.set_mass(mass);
  return op;
}

WaveFunction evolve(const WaveFunction& psi, const LinearOperator& h, double t) {
  if (!h.flags().hermitian)
    throw std::invalid_argument("evolve: hamiltonian must be Hermitian");
  if (!psi.grid().same_as(h.grid()))
    throw std::invalid_argument("evolve: grid mismatch");
  if (t == 0.0) return psi;
  if (h.flags().free_spectrum) {
    Vec tilde = fft_forward(psi.amplitudes());
    const Grid& g = psi.grid();
    for (int i = 0; i < g.n(); ++i) {
      const double k = g.wavenumber(i);
      tilde[i] *= std::polar(1.0, -k * k * t / (2.0 * h.mass()));
    }
    return WaveFunction(psi.grid(), fft_inverse(tilde), false);
  }
  const auto& es = h.eigensystem();
  Vec c = es.vectors.adjoint() * psi.amplitudes();
  for (int i = 0; i < c.size(); ++i) c[i] *= std::polar(1.0, -es.values[i] * t);
  return WaveFunction(psi.grid(), es.vectors * c, false);
}

DensityOperator evolve(const DensityOperator& rho, const LinearOperator& h,
                       double t) {
  const LinearOperator u = evolution_operator(h, t);
  Mat k = u.matrix() * rho.kernel() * u.matrix().adjoint();
  return DensityOperator(rho.grid(), std::move(k), false);
}

LinearOperator evolution_operator(const LinearOperator& h, double t) {
  if (!h.flags().hermitian)
    throw std::invalid_argument("evolution_operator: not Hermitian");
  LinearOperator u = h.apply_function(
      [t](double lam) { return std::polar(1.0, -lam * t); });
  u.mutable_flags().hermitian = false;
  u.mutable_flags().positive = false;
  u.mutable_flags().unitary = true;
  return u;
}

LinearOperator heisenberg(const LinearOperator& a, const LinearOperator& h,
                          double t) {
  if (t == 0.0) return a;
  const LinearOperator u = evolution_operator(h, t);
  Mat m = u.matrix().adjoint() * a.matrix() * u.matrix();
  LinearOperator out(a.grid(), std::move(m), false);
  out.mutable_flags().hermitian = a.flags().hermitian;
  out.mutable_flags().positive = a.flags().positive;
  return out;
}

double expectation(const DensityOperator& rho, const LinearOperator& e) {
  return (rho.kernel() * e.matrix()).trace().real() * rho.grid().dx();
}

double expectation(const WaveFunction& psi, const LinearOperator& e) {
  return (psi.amplitudes().adjoint() * e.matrix() * psi.amplitudes())(0, 0).real() *
         psi.grid().dx();
}

LudersResult luders_reduce(const DensityOperator& rho, const LinearOperator& e) {
  if (!e.flags().hermitian || !e.flags().positive)
    throw std::invalid_argument("luders_reduce: effect must be positive");
  LudersResult out;
  out.probability = expectation(rho, e);
  if (out.probability < 1e-14) {
    out.probability = std::max(out.probability, 0.0);
    return out;  // incompatible outcome: no state
  }
  // Projectors are their own square roots.
  bool projector;
  if (e.flags().diagonal) {
    projector = true;
    for (int i = 0; i < e.grid().n() && projector; ++i) {
      const double d = e.matrix()(i, i).real();
      projector = std::abs(d * d - d) < 1e-10;
    }
  } else {
    projector = (e.matrix() * e.matrix() - e.matrix()).cwiseAbs().maxCoeff() < 1e-10;
  }
  const Mat root = projector ? e.matrix() : e.sqrt_psd().matrix();
  Mat k = root * rho.kernel() * root.adjoint() / out.probability;
  out.state = DensityOperator(rho.grid(), std::move(k), false);
  return out;
}

// -------------------------------------------------------------- Smearing ---

SmearedIndicator::SmearedIndicator(SampleSet s, double d) : set(std::move(s)), delta(d) {
  if (!(d > 0.0)) throw std::invalid_argument("SmearedIndicator: delta must be > 0");
}

double smeared_chi(const SmearedIndicator& ind, double x) {
  double v = 0.0;
  for (const auto& iv : ind.set.intervals()) {
    const double hi = std::isfinite(iv.b) ? gauss_cdf(iv.b - x, ind.delta) : 1.0;
    const double lo = std::isfinite(iv.a) ? gauss_cdf(iv.a - x, ind.delta) : 0.0;
    v += hi - lo;
  }
  return std::min(std::max(v, 0.0), 1.0);
}

double smearing_l1_distance(const SmearedIndicator& ind) {
  double total = 0.0;
  const double w = 12.0 * ind.delta;
  for (const auto& iv : ind.set.intervals()) {
    for (double edge : {iv.a, iv.b}) {
      if (!std::isfinite(edge)) continue;
      total += integrate(
          [&](double x) {
            const double chi = ind.set.contains(x) ? 1.0 : 0.0;
            return std::abs(chi - smeared_chi(ind, x));
          },
          edge - w, edge + w, 1e-12);
    }
  }
  return total;
}

SmearingError smearing_relative_error(const SmearedIndicator& ind,
                                      const DensityOperator& rho,
                                      double c_prime) {
  if (ind.set.is_empty())
    throw std::invalid_argument("smearing_relative_error: empty set");
  const Grid& g = rho.grid();
  SmearingError out;
  out.c_prime = c_prime;
  for (int i = 0; i < g.n(); ++i) {
    const double x = g.point(i);
    const double chi = ind.set.contains(x) ? 1.0 : 0.0;
    const double d = rho.density(i) * g.dx();
    out.weighted_l1 += d * std::abs(chi - smeared_chi(ind, x));
    out.probability += d * chi;
  }
  const double len = ind.set.total_length();
  out.bound = std::isfinite(len) && len > 0.0
                  ? c_prime * (ind.delta / len) * out.probability
                  : std::numeric_limits<double>::infinity();
  return out;
}

// ------------------------------------------------------------------ JSON ---

nlohmann::json grid_to_json(const Grid& grid) {
  return {{"n_points", grid.n()}, {"x_min", grid.x_min()}, {"x_max", grid.x_max()}};
}

Grid grid_from_json(const nlohmann::json& j) {
  return Grid(j.at("n_points").get<int>(), j.at("x_min").get<double>(),
              j.at("x_max").get<double>());
}

nlohmann::json wavefunction_to_json(const WaveFunction& psi) {
  std::vector<double> interleaved;
  interleaved.reserve(2 * psi.grid().n());
  for (int i = 0; i < psi.grid().n(); ++i) {
    interleaved.push_back(psi.amplitudes()[i].real());
    interleaved.push_back(psi.amplitudes()[i].imag());
  }
  return {{"grid", grid_to_json(psi.grid())}, {"amplitudes_re_im", interleaved}};
}

WaveFunction wavefunction_from_json(const nlohmann::json& j) {
  const Grid g = grid_from_json(j.at("grid"));
  const auto& arr = j.at("amplitudes_re_im");
  if (static_cast<int>(arr.size()) != 2 * g.n())
    throw std::invalid_argument("wavefunction_from_json: length mismatch");
  Vec a(g.n());
  for (int i = 0; i < g.n(); ++i)
    a[i] = Complex(arr[2 * i].get<double>(), arr[2 * i + 1].get<double>());
  return WaveFunction(g, std::move(a), false);
}

}  // namespace seqprob::qcore

#include "seqprob/scenarios.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "seqprob/apparatus.hpp"
#include "seqprob/classical.hpp"
#include "seqprob/freeform.hpp"
#include "seqprob/freqlab.hpp"
#include "seqprob/qcore.hpp"
#include "seqprob/rng.hpp"
#include "seqprob/seqmeas.hpp"

namespace seqprob::scenarios {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using qcore::Grid;
using qcore::LinearOperator;
using qcore::SampleSet;
using qcore::WaveFunction;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Tabular writer: CSV (LF, '.' decimal, header, %.17g) or a JSON array.
class Table {
 public:
  Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add_row(const std::vector<double>& row) {
    if (row.size() != columns_.size()) throw std::logic_error("Table: row size");
    rows_.push_back(row);
  }
  void write_csv(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    for (size_t c = 0; c < columns_.size(); ++c)
      out << (c ? "," : "") << columns_[c];
    out << "\n";
    for (const auto& r : rows_) {
      for (size_t c = 0; c < r.size(); ++c)
        out << (c ? "," : "") << fmt_double(r[c]);
      out << "\n";
    }
  }
  void write_json(const fs::path& path) const {
    json arr = json::array();
    for (const auto& r : rows_) {
      json obj;
      for (size_t c = 0; c < r.size(); ++c) obj[columns_[c]] = r[c];
      arr.push_back(obj);
    }
    std::ofstream out(path, std::ios::binary);
    out << arr.dump(1) << "\n";
  }
  std::string write(const fs::path& dir, const std::string& stem,
                    const std::string& format) const {
    const std::string name = stem + (format == "json" ? ".json" : ".csv");
    if (format == "json")
      write_json(dir / name);
    else
      write_csv(dir / name);
    return name;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

double param(const json& p, const std::string& key, double fallback) {
  return p.contains(key) ? p.at(key).get<double>() : fallback;
}

long param_long(const json& p, const std::string& key, long fallback) {
  return p.contains(key) ? p.at(key).get<long>() : fallback;
}

// ---------------------------------------------------------------------------
// scenario implementations
// ---------------------------------------------------------------------------

struct Ctx {
  const ScenarioConfig& cfg;
  ScenarioResult& result;
  fs::path dir;

  void add_table(const Table& t, const std::string& stem) {
    result.artifacts.push_back(t.write(dir, stem, cfg.format));
  }
};

void scenario_appendix_d(Ctx& ctx) {
  const json& p = ctx.cfg.params;
  const double r_min = param(p, "r_min", 0.01);
  const double r_max = param(p, "r_max", 100.0);
  const int n = static_cast<int>(param_long(p, "n_points", 57));
  std::vector<double> rs;
  for (int i = 0; i < n; ++i)
    rs.push_back(r_min * std::pow(r_max / r_min, i / double(n - 1)));
  const auto curve = freeform::ratio_curve(rs);
  Table t({"r", "p_pp", "b", "ratio"});
  for (size_t i = 0; i < curve.r.size(); ++i)
    t.add_row({curve.r[i], curve.p_pp[i], curve.b[i], curve.ratio[i]});
  ctx.add_table(t, "ratio_curve");

  auto& rep = ctx.result.report;
  const auto v10 = freeform::appendix_d_quantities(10.0);
  rep.check_close("ratio_at_r10", v10.ratio, 0.5, 0.05, {{"r", 10.0}});
  const auto v0 = freeform::appendix_d_quantities(1e-9);
  rep.check_close("p_pp_small_r_born_value", v0.p_pp, 0.5, 1e-4, {{"r", 1e-9}});
  const auto v001 = freeform::appendix_d_quantities(0.01);
  rep.check_below("ratio_at_r0p01", v001.ratio, 0.05, {{"r", 0.01}});
  bool monotone = true;
  double prev = -1.0;
  for (size_t i = 0; i < curve.r.size(); ++i) {
    if (curve.r[i] < 0.01 - 1e-12 || curve.r[i] > 1.0 + 1e-12) continue;
    if (curve.ratio[i] < prev) monotone = false;
    prev = curve.ratio[i];
  }
  rep.check_true("ratio_monotone_on_0p01_1", monotone);
}

void scenario_delta_sweep(Ctx& ctx) {
  const json& p = ctx.cfg.params;
  const double mass = param(p, "m", 1.0);
  const double t = param(p, "t", 1.0);
  const double sigma = param(p, "sigma", 1.0);
  const int n = static_cast<int>(param_long(p, "n_grid", 1024));
  const double box = param(p, "box", 12.8);
  const Grid g(n, -box, box);
  const LinearOperator ham = qcore::free_hamiltonian(g, mass);
  const WaveFunction psi = WaveFunction::gaussian_packet(g, 0.0, sigma);
  std::vector<double> deltas;
  if (p.contains("deltas"))
    for (const auto& d : p.at("deltas")) deltas.push_back(d.get<double>());
  else
    deltas = {0.05, 0.0707, 0.1, 0.1414, 0.2};
  const seqmeas::HistorySpec h(
      {{0.0, SampleSet::half_line_right(0.0)}, {t, SampleSet::half_line_right(0.0)}});
  Table tab({"delta", "p"});
  double lo = 1.0, hi = 0.0, p_first = 0.0, p_mid = 0.0;
  for (double d : deltas) {
    const double v = seqmeas::sqrt_povm_probability(psi, h, ham, d);
    tab.add_row({d, v});
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (d == deltas.front()) p_first = v;
    if (std::abs(d - 2.0 * deltas.front()) < 1e-12) p_mid = v;
  }
  ctx.add_table(tab, "delta_sweep");
  auto& rep = ctx.result.report;
  rep.check_above("relative_spread", (hi - lo) / lo, 0.1,
                  {{"deltas", deltas}, {"p_min", lo}, {"p_max", hi}});
  if (p_mid > 0.0)
    rep.check_above("doubling_sensitivity", std::abs(p_first - p_mid) / p_first, 0.1,
                    {{"delta", deltas.front()}});
}

void scenario_two_slit(Ctx& ctx) {
  const json& p = ctx.cfg.params;
  freeform::FreeParams fp;
  fp.mass = param(p, "m", 1.0);
  fp.t = param(p, "t", 1.0);
  fp.delta = param(p, "delta", 0.35);
  fp.sigma = param(p, "sigma", 0.5);
  fp.L = param(p, "L", 4.0);
  const auto dens = freeform::two_slit_density(fp);
  Table tab({"x", "density", "envelope"});
  for (double x = -10.0; x <= 10.0 + 1e-9; x += 0.025)
    tab.add_row({x, dens.density(x, fp.L), dens.envelope_only(x, fp.L)});
  ctx.add_table(tab, "two_slit_marginal");

  auto& rep = ctx.result.report;
  rep.check_close("normalization", freeform::two_slit_marginal(SampleSet::full_line(), fp),
                  1.0, 1e-6, {});
  // cross-check against the grid sequential POVM marginal
  const int n = static_cast<int>(param_long(p, "n_grid", 1024));
  const Grid g(n, -25.6, 25.6);
  const LinearOperator ham = qcore::free_hamiltonian(g, fp.mass);
  const WaveFunction psi = WaveFunction::two_slit(g, fp.sigma, fp.L);
  const SampleSet window = SampleSet::interval(0.0, 1.0);
  const seqmeas::HistorySpec h({{0.0, SampleSet::full_line()}, {fp.t, window}});
  const double grid_val = seqmeas::sqrt_povm_probability(psi, h, ham, fp.delta);
  const double closed_val = freeform::two_slit_marginal(window, fp);
  rep.check_close("grid_cross_check", closed_val, grid_val, 1e-3,
                  {{"U", "[0,1)"}});
  rep.check_above("fringe_visibility", dens.visibility, 0.0, {});
  const double period = freeform::two_slit_fringe_period(fp);
  const double beta = 1.0 / (2 * fp.delta * fp.delta) +
                      2 * fp.mass * fp.mass * fp.delta * fp.delta / (fp.t * fp.t);
  const double gamma = 1.0 / (fp.sigma * fp.sigma) +
                       fp.mass * fp.mass * fp.sigma * fp.sigma / (fp.t * fp.t);
  const double scale = 2 * M_PI * fp.t * fp.sigma * fp.sigma * (beta + gamma) /
                       (fp.mass * fp.L);
  rep.check_close("fringe_period_vs_scale", period / scale, 1.0, 0.2,
                  {{"period", period}, {"scale", scale}});
}

void scenario_compat_check(Ctx& ctx) {
  const json& p = ctx.cfg.params;
  const double mass = param(p, "m", 1.0);
  const double sigma = param(p, "sigma", 1.0);
  const double delta = param(p, "delta", 0.1);
  const double t1 = param(p, "t1", 0.5), t2 = param(p, "t2", 1.0);
  const int n = static_cast<int>(param_long(p, "n_grid", 1024));
  const Grid g(n, -12.8, 12.8);
  const LinearOperator ham = qcore::free_hamiltonian(g, mass);
  const WaveFunction psi = WaveFunction::gaussian_packet(g, 0.0, sigma);
  const seqmeas::HistorySpec h({{t1, SampleSet::half_line_right(0.0)},
                                {t2, SampleSet::interval(0.0, 1.0)}});
  const auto last = seqmeas::compatibility_check(psi, h, 1, ham, delta);
  const auto first = seqmeas::compatibility_check(psi, h, 0, ham, delta);
  auto& rep = ctx.result.report;
  rep.check_below("last_slot_defect", last.defect, 1e-6,
                  {{"lhs", last.lhs}, {"rhs", last.rhs}});
  rep.check_above("first_slot_defect_over_p", first.defect / first.rhs, 0.01,
                  {{"lhs", first.lhs}, {"rhs", first.rhs}});
  Table tab({"slot", "lhs", "rhs", "defect"});
  tab.add_row({0.0, first.lhs, first.rhs, first.defect});
  tab.add_row({1.0, last.lhs, last.rhs, last.defect});
  ctx.add_table(tab, "compatibility");
}

void scenario_bohm_compare(Ctx& ctx) {
  const json& p = ctx.cfg.params;
  const double mass = param(p, "m", 1.0);
  const double sigma = param(p, "sigma", 0.7);
  const double sep = param(p, "L", 3.0);
  const double delta = param(p, "delta", 0.2);
  const int n_samples = static_cast<int>(param_long(p, "n_samples", 4000));
  const int n = static_cast<int>(param_long(p, "n_grid", 512));
  const Grid g(n, -16.0, 16.0);
  const LinearOperator ham = qcore::free_hamiltonian(g, mass);
  const WaveFunction psi = WaveFunction::two_slit(g, sigma, sep);
  classical::BohmSettings st;
  st.n_samples = n_samples;
  st.seed = ctx.cfg.seed;
  const std::vector<double> times{0.0, 0.8, 1.4, 2.0};
  const auto ens = classical::bohm_trajectories(psi, ham, mass, times, st);

  auto& rep = ctx.result.report;
  rep.check_true("initial_sample_ks", ens.ks_pass, {{"D", ens.ks_statistic}});
  for (int ck = 1; ck < static_cast<int>(times.size()); ++ck) {
    const double pv = classical::bohm_equivariance_pvalue(ens, psi, ham, ck);
    rep.check_above("equivariance_pvalue_t" + std::to_string(ck), pv, 0.01,
                    {{"t", times[ck]}});
  }
  rep.check_true("no_crossings", classical::bohm_order_preserved(ens), {});
  rep.check_below("discarded_fraction",
                  static_cast<double>(ens.n_discarded) / st.n_samples, 1e-3, {});

  const seqmeas::HistorySpec h({{0.8, SampleSet::half_line_right(0.0)},
                                {2.0, SampleSet::interval(0.0, 3.0)}});
  const auto bohm = classical::bohm_multitime_probability(ens, h);
  const double quantum = seqmeas::sqrt_povm_probability(psi, h, ham, delta);
  rep.check_above("bohm_vs_quantum_sigmas",
                  std::abs(bohm.value - quantum) / bohm.std_error, 5.0,
                  {{"bohm", bohm.value}, {"quantum", quantum}, {"se", bohm.std_error}});
  // interior-slot compatibility within MC error (genuine path measure)
  const auto marg = classical::bohm_multitime_probability(
      ens, seqmeas::HistorySpec({{0.8, SampleSet::full_line()},
                                 {2.0, SampleSet::interval(0.0, 3.0)}}));
  const auto single = classical::bohm_multitime_probability(
      ens, seqmeas::HistorySpec({{2.0, SampleSet::interval(0.0, 3.0)}}));
  rep.check_below("interior_slot_compatibility_sigmas",
                  std::abs(marg.value - single.value) /
                      std::max(marg.std_error, 1e-12),
                  4.0, {});

  // trajectory bundle (first 50), chunked columns
  Table tab([&] {
    std::vector<std::string> cols{"t"};
    for (int w = 0; w < std::min(50, n_samples); ++w)
      cols.push_back("x" + std::to_string(w));
    return cols;
  }());
  for (size_t k = 0; k < ens.times.size(); ++k) {
    std::vector<double> row{ens.times[k]};
    for (int w = 0; w < std::min(50, n_samples); ++w)
      row.push_back(ens.positions(w, static_cast<int>(k)));
    tab.add_row(row);
  }
  ctx.add_table(tab, "trajectories");

  json summary{{"n_samples", n_samples},
               {"n_discarded", ens.n_discarded},
               {"ks_statistic", ens.ks_statistic},
               {"bohm_two_time", bohm.value},
               {"quantum_two_time", quantum}};
  std::ofstream(ctx.dir / "ensemble.json") << summary.dump(1) << "\n";
  ctx.result.artifacts.push_back("ensemble.json");
}

void scenario_hv_locality(Ctx& ctx) {
  const json& p = ctx.cfg.params;
  classical::KickedMapModel local;
  classical::KickedMapModel broken = local;
  broken.dither = 0.0;
  broken.break_shift = param(p, "break_shift", 0.7);
  const SampleSet u1 = SampleSet::interval(3.0, 6.0);
  const SampleSet u2 = SampleSet::interval(5.0, 8.0);
  const auto ok = classical::local_hv_two_time(local, u1, u2);
  const auto bad = classical::hv_two_time_raw(broken, u1, u2);
  auto& rep = ctx.result.report;
  rep.check_below("kicked_map_factorization_defect", ok.defect, 1e-10,
                  {{"model", ok.model_value}, {"system", ok.system_value}});
  rep.check_above("broken_locality_defect", bad.defect, 1e-2,
                  {{"model", bad.model_value}, {"system", bad.system_value}});

  classical::MarkovJumpModel mj;
  const std::vector<int> v1{2, 3, 4}, v2{4, 5};
  const double exact = mj.system_two_time(v1, v2);
  const auto mc = mj.model_two_time_mc(v1, v2, 100000, ctx.cfg.seed);
  rep.check_below("markov_jump_factorization_sigmas",
                  std::abs(mc.value - exact) / mc.std_error, 3.0,
                  {{"mc", mc.value}, {"exact", exact}});

  const auto unsharp = classical::unsharp_hv_check(
      0.02, SampleSet::interval(2.0, 4.0), SampleSet::interval(4.0, 6.0), 3.0, 2.0,
      0.3, 1.7);
  rep.check_below("unsharp_defect_bound", unsharp.defect,
                  5.0 * 0.02 / 2.0 * std::max(unsharp.sharp_value, 1e-3),
                  {{"measured_c", unsharp.measured_c}});
}

void scenario_freq_convergence(Ctx& ctx) {
  const json& p = ctx.cfg.params;
  const long n_control = param_long(p, "n_control", 1000000);
  const long n_runs = param_long(p, "n_runs", 100000);
  const long block = param_long(p, "block_length", 1000);
  // Bernoulli control
  std::vector<bool> control;
  control.reserve(n_runs);
  for (long i = 0; i < n_runs; ++i) {
    CounterRng rng(ctx.cfg.seed ^ 0xc0297ULL, static_cast<std::uint64_t>(i));
    control.push_back(rng.bernoulli(0.5));
  }
  const auto ctrace = freqlab::frequency_trace(control);
  const double slope =
      freqlab::bernoulli_decay_slope(0.5, 1000, n_control, 100, ctx.cfg.seed);

  const int n = static_cast<int>(param_long(p, "n_grid", 512));
  const Grid g(n, -12.8, 12.8);
  const LinearOperator ham = qcore::free_hamiltonian(g, 1.0);
  const WaveFunction psi = WaveFunction::gaussian_packet(g, 0.0, 1.0);
  freqlab::EnsembleSpec spec;
  spec.n_runs = n_runs;
  spec.seed = ctx.cfg.seed;
  spec.t1 = 0.0;
  spec.t2 = 1.0;
  spec.u1 = SampleSet::half_line_right(0.0);
  spec.u2 = SampleSet::interval(0.0, 1.0);
  spec.policy = {{0.05, 0.2}, {0.5, 0.5}, block};
  const auto mtrace = freqlab::mixture_ensemble_trace(spec, psi, ham);
  freqlab::EnsembleSpec fixed = spec;
  fixed.policy = {{0.1}, {1.0}, block};
  const auto ftrace = freqlab::mixture_ensemble_trace(fixed, psi, ham);

  const double eps_mix = freqlab::nonconvergence_measure(mtrace, n_runs / 2);
  const double eps_fix = freqlab::nonconvergence_measure(ftrace, n_runs / 2);

  auto& rep = ctx.result.report;
  rep.check_close("bernoulli_loglog_slope", slope, -0.5, 0.1, {{"n", n_control}});
  rep.check_above("mixture_eps_over_fixed", eps_mix / eps_fix, 3.0,
                  {{"eps_mixture", eps_mix}, {"eps_fixed", eps_fix}});
  // first-slot marginal of the same mixture still converges to its Born value
  const auto marg = freqlab::mixture_marginal_trace(spec, psi, ham);
  const WaveFunction psi_t = qcore::evolve(psi, ham, spec.t1);
  double born = 0.0;
  for (int i = 0; i < g.n(); ++i)
    if (spec.u1.contains(g.point(i)))
      born += std::norm(psi_t.amplitudes()[i]) * g.dx();
  const double se = std::sqrt(born * (1 - born) / n_runs);
  rep.check_below("marginal_born_sigmas",
                  std::abs(marg.nu.back() - born) / se, 4.0,
                  {{"empirical", marg.nu.back()}, {"born", born}});

  Table tab({"n", "nu_control", "nu_fixed", "nu_mixture"});
  for (long i = 99; i < n_runs; i += 100)
    tab.add_row({static_cast<double>(i + 1), ctrace.nu[i], ftrace.nu[i], mtrace.nu[i]});
  ctx.add_table(tab, "frequency_traces");
}

void scenario_apparatus_check(Ctx& ctx) {
  const json& p = ctx.cfg.params;
  const int n = static_cast<int>(param_long(p, "n_grid", 256));
  const Grid g(n, -9.6, 9.6);
  const LinearOperator ham = qcore::free_hamiltonian(g, 1.0);
  const WaveFunction psi = WaveFunction::gaussian_packet(g, 0.0, 1.0);
  apparatus::ApparatusState app{psi, apparatus::DeviceState::gaussian(1.0, 64),
                                {0.3, 1.0}};
  const auto composite = apparatus::impulsive_total_state(app, ham);
  auto& rep = ctx.result.report;
  rep.check_close("composite_norm", composite.norm_sq, 1.0, 1e-6, {});

  const std::vector<SampleSet> sets{SampleSet::half_line_left(-0.1),
                                    SampleSet::interval(-0.1, 1.2),
                                    SampleSet::half_line_right(1.2)};
  Table tab({"i", "j", "pointer", "povm", "diff"});
  double worst = 0.0;
  for (size_t i = 0; i < sets.size(); ++i)
    for (size_t j = 0; j < sets.size(); ++j) {
      const double pj = apparatus::pointer_joint_distribution(composite, sets[i],
                                                              sets[j]);
      const double rv = apparatus::induced_povm_probability(app, ham, sets[i],
                                                            sets[j]);
      worst = std::max(worst, std::abs(pj - rv));
      tab.add_row({double(i), double(j), pj, rv, pj - rv});
    }
  ctx.add_table(tab, "identification");
  rep.check_below("identification_max_diff", worst, 1e-4, {});

  const auto res = apparatus::resolution_from_device(app.device);
  rep.check_below("resolution_fit_residual", res.fit_residual, 0.05,
                  {{"delta", res.delta}});
  const auto res_narrow =
      apparatus::resolution_from_device(apparatus::DeviceState::gaussian(0.5, 64));
  rep.check_above("narrower_momentum_larger_delta", res_narrow.delta, res.delta,
                  {{"delta_wide", res.delta}, {"delta_narrow", res_narrow.delta}});
}

void scenario_frequency_operator(Ctx& ctx) {
  using qcore::Mat;
  using qcore::Vec;
  auto& rep = ctx.result.report;
  const auto comb = freqlab::frequency_operator_stats(0.3, 20);
  rep.check_close("combinatorial_mean", comb.mean, 0.3, 1e-15, {});
  rep.check_close("combinatorial_variance", comb.variance, 0.0105, 1e-15, {});

  Mat p0(2, 2);
  p0 << 1, 0, 0, 0;
  Vec psi(2);
  psi << std::sqrt(0.3), std::sqrt(0.7);
  const auto expl = freqlab::frequency_operator_stats_explicit(p0, psi, 8);
  const auto comb8 = freqlab::frequency_operator_stats(0.3, 8);
  rep.check_close("explicit_vs_combinatorial_mean", expl.mean, comb8.mean, 1e-12, {});
  rep.check_close("explicit_vs_combinatorial_var", expl.variance, comb8.variance,
                  1e-12, {});

  Mat sx(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  const Mat k_rabi = freqlab::sequential_effect(sx, M_PI / 4.0, p0, p0);
  const Mat k_comm = freqlab::sequential_effect(sz, M_PI / 4.0, p0, p0);
  const double ov_rabi = freqlab::sequential_frequency_povm_overlap(k_rabi, 6, 2, 3);
  const double ov_comm = freqlab::sequential_frequency_povm_overlap(k_comm, 6, 2, 3);
  rep.check_above("rabi_overlap", ov_rabi, 1e-2, {});
  rep.check_below("commuting_overlap", ov_comm, 1e-10, {});
  const double ov4 = freqlab::sequential_frequency_povm_overlap(k_rabi, 4, 2, 3);
  const double ov8 = freqlab::sequential_frequency_povm_overlap(k_rabi, 8, 2, 3);
  rep.check_above("overlap_persists_with_N", ov8, ov4 - 1e-9,
                  {{"N4", ov4}, {"N8", ov8}});

  // Stern-Gerlach x-then-z from |z up>
  Mat rho(2, 2);
  rho << 1, 0, 0, 0;
  Mat px_p(2, 2), px_m(2, 2);
  px_p << 0.5, 0.5, 0.5, 0.5;
  px_m << 0.5, -0.5, -0.5, 0.5;
  Mat sy(2, 2);
  sy << qcore::Complex(0, 0), qcore::Complex(0, -1), qcore::Complex(0, 1),
      qcore::Complex(0, 0);
  const auto cm = freqlab::condmarg_distinction(rho, {px_p, px_m}, sy, M_PI / 4.0,
                                                {px_p, px_m});
  rep.check_close("sg_standard_0", cm.standard[0], 0.5, 1e-12, {});
  rep.check_close("sg_standard_1", cm.standard[1], 0.5, 1e-12, {});
  rep.check_close("sg_hypothesis_0", cm.hypothesis[0], 1.0, 1e-12, {});
  rep.check_close("sg_hypothesis_1", cm.hypothesis[1], 0.0, 1e-12, {});
}

using ScenarioFn = void (*)(Ctx&);

struct Entry {
  ScenarioInfo info;
  ScenarioFn fn;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries{
      {{"appendix-d", "ratio b/p++ curve over the dimensionless time r",
        "slit additivity budget"},
       scenario_appendix_d},
      {{"delta-sweep", "two-time probability vs device resolution delta",
        "resolution dependence"},
       scenario_delta_sweep},
      {{"two-slit", "marginal with an unresolved first measurement",
        "which-way marginal"},
       scenario_two_slit},
      {{"compat-check", "Kolmogorov marginalization split (last vs interior slot)",
        "compatibility conditions"},
       scenario_compat_check},
      {{"bohm-compare", "guidance-equation ensemble vs sequential POVM",
        "trajectory comparators"},
       scenario_bohm_compare},
      {{"hv-locality", "local hidden-variable factorization identity",
        "locality no-go"},
       scenario_hv_locality},
      {{"freq-convergence", "frequency traces: control vs delta-mixture",
        "event-frequency diagnostics"},
       scenario_freq_convergence},
      {{"apparatus-check", "two-pointer device reproduces the sqrt POVM",
        "quantum measuring device"},
       scenario_apparatus_check},
      {{"frequency-operator", "ensemble-space frequency PVM/POVM properties",
        "frequency operators"},
       scenario_frequency_operator},
  };
  return entries;
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> infos = [] {
    std::vector<ScenarioInfo> v;
    for (const auto& e : registry()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{
      "scenario", "out_dir", "seed", "check", "threads", "format", "params"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw std::invalid_argument("config: unknown key '" + it.key() + "'");
  }
  ScenarioConfig cfg;
  if (j.contains("scenario")) cfg.scenario = j.at("scenario").get<std::string>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("check")) cfg.check = j.at("check").get<bool>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  if (j.contains("format")) cfg.format = j.at("format").get<std::string>();
  if (j.contains("params")) {
    if (!j.at("params").is_object())
      throw std::invalid_argument("config: params must be an object");
    cfg.params = j.at("params");
  }
  if (cfg.format != "csv" && cfg.format != "json")
    throw std::invalid_argument("config: format must be csv or json");
  return cfg;
}

nlohmann::json config_to_json(const ScenarioConfig& cfg) {
  return {{"scenario", cfg.scenario}, {"out_dir", cfg.out_dir},
          {"seed", cfg.seed},         {"check", cfg.check},
          {"threads", cfg.threads},   {"format", cfg.format},
          {"params", cfg.params}};
}

nlohmann::json config_schema() {
  return {
      {"$schema", "http://json-schema.org/draft-07/schema#"},
      {"title", "seqprob scenario configuration"},
      {"type", "object"},
      {"additionalProperties", false},
      {"properties",
       {{"scenario", {{"type", "string"}}},
        {"out_dir", {{"type", "string"}}},
        {"seed", {{"type", "integer"}, {"minimum", 0}}},
        {"check", {{"type", "boolean"}}},
        {"threads", {{"type", "integer"}, {"minimum", 1}}},
        {"format", {{"enum", {"csv", "json"}}}},
        {"params",
         {{"type", "object"},
          {"description", "scenario-specific numeric parameters"}}}}}};
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  const std::string dump = config_to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  const Entry* entry = nullptr;
  for (const auto& e : registry())
    if (e.info.name == cfg.scenario) entry = &e;
  if (!entry)
    throw std::invalid_argument("unknown scenario '" + cfg.scenario + "'");

  ScenarioResult result;
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  Ctx ctx{cfg, result, dir};
  entry->fn(ctx);

  char hash_hex[24];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016" PRIx64, config_hash(cfg));
  nlohmann::json manifest{{"scenario", cfg.scenario},
                          {"config", config_to_json(cfg)},
                          {"config_hash", hash_hex},
                          {"seed", cfg.seed},
                          {"artifact_version", "0.1.0"},
                          {"artifacts", result.artifacts}};
  std::ofstream(dir / "manifest.json") << manifest.dump(1) << "\n";
  nlohmann::json rep{{"scenario", cfg.scenario},
                     {"all_pass", result.report.all_pass()},
                     {"checks", result.report.to_json()}};
  std::ofstream(dir / "report.json") << rep.dump(1) << "\n";
  result.artifacts.push_back("manifest.json");
  result.artifacts.push_back("report.json");
  return result;
}

}  // namespace seqprob::scenarios

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rcpd/constrained.hpp"
#include "rcpd/harness.hpp"

using namespace rcpd;

namespace {

int failures = 0;

void verdict(int id, bool ok, const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", buf);
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const char* f, ...) {
  va_list ap;
  va_start(ap, f);
  std::printf("    ");
  std::vprintf(f, ap);
  std::printf("\n");
  va_end(ap);
  std::fflush(stdout);
}

ExperimentConfig table_protocol() {
  ExperimentConfig c;
  c.dims = {20, 20, 20};
  c.rank = 5;
  c.outlier_counts = {6};
  c.sor_db = {0};
  c.trials = 20;
  c.seed = 1;
  c.init = "tals";
  c.solver.p = 0.5;
  c.algorithms = {Algorithm::Tals, Algorithm::Irals};
  return c;
}

ConstrainedProblem all_nonnegative() {
  ConstrainedProblem p;
  for (auto& f : p.factors) f.cons = ConstraintSet::nonnegative();
  return p;
}

const AlgorithmSummary& summary(const GridPoint& p, Algorithm a) {
  for (const auto& s : p.summaries)
    if (s.algorithm == a) return s;
  throw std::runtime_error("algorithm missing from report");
}

void print_point(const GridPoint& p) {
  for (const auto& s : p.summaries)
    note("|N|=%zu SOR %+g dB %-18s linear mean %8.2f dB, trial-averaged dB %8.2f, ok %zu/%zu", p.outlier_count,
         p.sor_db, std::string(to_string(s.algorithm)).c_str(), s.mean_mse_db(), s.mean_of_trial_db, s.succeeded,
         s.succeeded + s.failed);
}

void conjugacy() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ux(-10.0, 10.0), up(0.05, 1.0), le(std::log(1e-6), 0.0);
  double worst_value = 0.0, worst_arg = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const double x = ux(rng), p = up(rng), eps = std::exp(le(rng));
    const auto [w, v] = oracle::grid_refined_min([&](double w) { return w * x * x + phi_p(w, p, eps); }, 1e-12, 1e12);
    worst_value = std::max(worst_value, std::abs(v - std::pow(x * x + eps, p / 2)));
    const double wopt = (p / 2) * std::pow(x * x + eps, (p - 2) / 2);
    worst_arg = std::max(worst_arg, std::abs(w - wopt) / wopt);
    worst_arg = std::max(worst_arg, std::abs(weight_update(x * x, p, eps) - wopt) / wopt);
  }
  verdict(1, worst_value <= 1e-6 && worst_arg <= 1e-4, "max value gap %.2e, max minimizer rel. gap %.2e", worst_value,
          worst_arg);
}

void monotone_cost() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> dim(3, 20), rank(1, 5);
  std::uniform_real_distribution<double> sor(-10.0, 10.0);
  std::size_t bad = 0;
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    SyntheticSpec s;
    s.dims = {dim(rng), dim(rng), dim(rng)};
    s.rank = std::min<std::size_t>(rank(rng), std::min({s.dims.I, s.dims.J, s.dims.K}));
    s.outlier_count = std::uniform_int_distribution<std::size_t>(0, s.dims.I / 2)(rng);
    s.sor_db = sor(rng);
    s.seed = rng();
    const auto inst = generate(s);
    SolverConfig cfg;
    cfg.init = RandomInit{rng()};
    const FitResult r = irals(inst.tensor, s.rank, cfg);
    bool ok = true;
    for (std::size_t k = 1; k < r.cost_trace.size(); ++k) {
      worst = std::max(worst, r.cost_trace[k] - r.cost_trace[k - 1]);
      ok = ok && r.cost_trace[k] <= r.cost_trace[k - 1] + 1e-9;
    }
    bad += ok ? 0 : 1;
  }
  verdict(2, bad == 0, "%zu of 100 traces increased; largest step up %.2e", bad, worst);
}

void oracle_equivalence() {
  std::mt19937_64 rng(303);
  const Dims d{8, 7, 6};
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Tensor3 t = oracle::random_tensor(d, rng);
    const auto f = oracle::random_factors(d, 3, rng);
    const Vector w = (oracle::random_matrix(8, 1, rng).array().abs() + 0.01).matrix();
    for (Mode m : {Mode::Horizontal, Mode::Lateral, Mode::Frontal})
      worst = std::max(worst, (weighted_ls_factor(m, t, f, SlabWeights(w)) - oracle::weighted_ls(m, t, f, w))
                                  .cwiseAbs()
                                  .maxCoeff());
  }
  verdict(3, worst <= 1e-8, "max elementwise deviation %.2e", worst);
}

void table_one_row() {
  ExperimentConfig c = table_protocol();
  c.sor_db = {-5, 0, 5};
  const auto rep = run_sweep(c);
  for (const auto& p : rep.points) print_point(p);
  const GridPoint& zero = rep.points[1];
  const double tals0 = summary(zero, Algorithm::Tals).mean_mse_db();
  const double irals0 = summary(zero, Algorithm::Irals).mean_mse_db();
  bool gaps = true;
  std::string g;
  for (const auto& p : rep.points) {
    const double gap = summary(p, Algorithm::Tals).mean_mse_db() - summary(p, Algorithm::Irals).mean_mse_db();
    gaps = gaps && gap >= 20.0;
    g += " " + std::to_string(gap).substr(0, 6);
  }
  const bool ok = tals0 >= -26.0 && tals0 <= -15.0 && irals0 <= -40.0 && gaps;
  verdict(4, ok, "SOR 0: TALS %.2f dB (need [-26,-15]), IRALS %.2f dB (need <= -40); gaps at -5/0/5 dB:%s (need >= 20)",
          tals0, irals0, g.c_str());
}

void nonneg_row() {
  ExperimentConfig c = table_protocol();
  c.rank = 10;
  c.algorithms = {Algorithm::Tals, Algorithm::IralsConstrained};
  c.constraints = all_nonnegative();
  const auto rep = run_sweep(c);
  print_point(rep.points[0]);
  const double tals = summary(rep.points[0], Algorithm::Tals).mean_mse_db();
  const double nn = summary(rep.points[0], Algorithm::IralsConstrained).mean_mse_db();
  verdict(5, nn <= -30.0 && tals - nn >= 15.0, "R=10 nonneg IRALS %.2f dB (need <= -30), TALS %.2f dB, gap %.2f (need >= 15)",
          nn, tals, tals - nn);
}

void majority_outliers() {
  ExperimentConfig c = table_protocol();
  c.outlier_counts = {11};
  c.algorithms = {Algorithm::Tals, Algorithm::IralsConstrained};
  c.constraints = all_nonnegative();
  const auto rep = run_sweep(c);
  print_point(rep.points[0]);
  const double tals = summary(rep.points[0], Algorithm::Tals).mean_mse_db();
  const double nn = summary(rep.points[0], Algorithm::IralsConstrained).mean_mse_db();
  verdict(6, nn <= -20.0 && tals >= -12.0, "|N|=11 nonneg IRALS %.2f dB (need <= -20), TALS %.2f dB (need >= -12)", nn,
          tals);
}

std::pair<std::size_t, std::size_t> recoveries(const ExperimentReport& rep, double threshold_db, bool below) {
  std::size_t hit = 0, total = 0;
  for (const auto& tr : rep.points[0].trials) {
    const auto& o = tr.outcomes[0];
    ++total;
    if (!o.ok) continue;
    const double db = mse_to_db(std::max(o.mse_B, o.mse_C));
    const double best = mse_to_db(std::min(o.mse_B, o.mse_C));
    hit += below ? (db <= threshold_db ? 1 : 0) : (best >= threshold_db ? 1 : 0);
  }
  return {hit, total};
}

void identifiability() {
  ExperimentConfig c = table_protocol();
  c.sor_db = {-10};
  c.trials = 25;
  c.restarts = 5;
  c.algorithms = {Algorithm::Irals};
  const bool margin = identifiability_margin({c.dims, c.rank, 6, -10, 0}).bound_satisfied;
  const auto [rec, n] = recoveries(run_sweep(c), -30.0, true);

  c.outlier_counts = {20};
  const bool margin_all = identifiability_margin({c.dims, c.rank, 20, -10, 0}).bound_satisfied;
  const auto [fail, m] = recoveries(run_sweep(c), -15.0, false);
  verdict(7, margin && !margin_all && rec * 5 >= n * 4 && fail == m,
          "|N|=6: %zu of %zu recovered at <= -30 dB (need 80%%); |N|=20: %zu of %zu stay >= -15 dB (need all)", rec, n,
          fail, m);
}

void admm_optimality() {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<std::size_t> dim(4, 12), rank(1, 5);
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    const Dims d{dim(rng), dim(rng), dim(rng)};
    const auto R = static_cast<Eigen::Index>(std::min<std::size_t>(rank(rng), std::min({d.I, d.J, d.K})));
    const Tensor3 t = oracle::random_tensor(d, rng);
    const auto f = oracle::random_factors(d, R, rng);
    const Vector w = (oracle::random_matrix(static_cast<Eigen::Index>(d.I), 1, rng).array().abs() + 0.05).matrix();
    const Mode m = n % 2 == 0 ? Mode::Lateral : Mode::Frontal;
    const auto ne = normal_equations(m, t, f, SlabWeights(w));
    const Matrix ref = oracle::projected_gradient_nnls(ne.gram, ne.rhs);
    AdmmState state;
    const Matrix got =
        admm_update(m, t, f, SlabWeights(w), {Regularizer::none(), ConstraintSet::nonnegative()}, AdmmConfig{}, state)
            .factor;
    auto with = [&](const Matrix& x) {
      FactorTriple g = f;
      (m == Mode::Lateral ? g.B : g.C) = x;
      return oracle::weighted_residual(t, g, w);
    };
    if (got.minCoeff() < 0.0) worst = std::max(worst, 1.0);
    const double best = with(ref);
    worst = std::max(worst, (with(got) - best) / best);
  }
  verdict(8, worst <= 1e-4, "max relative objective gap %.2e over 50 instances", worst);
}

void localization() {
  ExperimentConfig c = table_protocol();
  c.sor_db = {-10, -5, 0};
  c.trials = 50;
  c.algorithms = {Algorithm::Irals};
  const auto rep = run_sweep(c);
  bool ok = true;
  std::string rates;
  for (const auto& p : rep.points) {
    const double r = p.summaries[0].localization_rate;
    ok = ok && r >= 0.9 && p.summaries[0].failed == 0;
    rates += " " + std::to_string(r).substr(0, 5);
  }
  verdict(9, ok, "localization rate at SOR -10/-5/0 dB over 50 trials each:%s (need >= 0.9)", rates.c_str());
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  conjugacy();
  monotone_cost();
  oracle_equivalence();
  table_one_row();
  nonneg_row();
  majority_outliers();
  identifiability();
  admm_optimality();
  localization();
  std::printf("%d criteria failed; elapsed %.1f s\n", failures,
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return failures == 0 ? 0 : 1;
}

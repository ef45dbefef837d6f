#include "rcpd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "rcpd/config.hpp"
#include "rcpd/error.hpp"

namespace rcpd {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of the random starting point for restart r of a trial.
std::uint64_t restart_seed(std::uint64_t trial_seed, std::size_t r) {
  return splitmix64(trial_seed ^ splitmix64(static_cast<std::uint64_t>(r) + 1));
}

Matrix exponential_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::exponential_distribution<double> dist(1.0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  require(spec.dims.I > 0 && spec.dims.J > 0 && spec.dims.K > 0, ErrorCode::InvalidArgument,
          "synthetic dimensions must be positive");
  require(spec.rank >= 1, ErrorCode::InvalidArgument, "synthetic rank must be at least 1");
  require(spec.outlier_count <= spec.dims.I, ErrorCode::InvalidArgument,
          "outlier_count cannot exceed the number of horizontal slabs");
  require(std::isfinite(spec.sor_db), ErrorCode::InvalidArgument, "sor_db must be finite");
}

SyntheticInstance generate(const SyntheticSpec& spec) {
  validate(spec);
  const auto [I, J, K] = spec.dims;
  std::mt19937_64 rng(spec.seed);

  SyntheticInstance inst;
  inst.truth.A = exponential_matrix(I, spec.rank, rng);
  inst.truth.B = exponential_matrix(J, spec.rank, rng);
  inst.truth.C = exponential_matrix(K, spec.rank, rng);
  inst.clean = reconstruct(inst.truth);
  inst.tensor = inst.clean;

  // Partial Fisher-Yates draw of the outlying slab indices.
  std::vector<std::size_t> order(I);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t n = 0; n < spec.outlier_count; ++n) {
    std::uniform_int_distribution<std::size_t> pick(n, I - 1);
    std::swap(order[n], order[pick(rng)]);
  }
  inst.outliers.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(spec.outlier_count));
  std::sort(inst.outliers.begin(), inst.outliers.end());
  if (inst.outliers.empty()) return inst;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> raw(inst.outliers.size() * J * K);
  double raw_energy = 0.0;
  for (double& v : raw) {
    v = unif(rng);
    raw_energy += v * v;
  }
  const double n_out = static_cast<double>(inst.outliers.size());
  const double signal_power = inst.clean.squared_norm() / static_cast<double>(I);
  const double target_outlier_power = signal_power / std::pow(10.0, spec.sor_db / 10.0);
  inst.outlier_scale = std::sqrt(target_outlier_power / (raw_energy / n_out));

  std::size_t n = 0;
  for (std::size_t i : inst.outliers)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < J; ++j) inst.tensor(i, j, k) += inst.outlier_scale * raw[n++];
  return inst;
}

double signal_to_outlier_db(const Tensor3& clean, const Tensor3& observed,
                            std::span<const std::size_t> outliers) {
  require(clean.dims() == observed.dims(), ErrorCode::DimensionMismatch, "SOR: tensor shapes differ");
  if (outliers.empty()) return std::numeric_limits<double>::infinity();
  const auto [I, J, K] = clean.dims();
  double outlier_energy = 0.0;
  for (std::size_t i : outliers) {
    require(i < I, ErrorCode::InvalidArgument, "SOR: outlier index out of range");
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < J; ++j) {
        const double d = observed(i, j, k) - clean(i, j, k);
        outlier_energy += d * d;
      }
  }
  const double signal = clean.squared_norm() / static_cast<double>(I);
  return 10.0 * std::log10(signal / (outlier_energy / static_cast<double>(outliers.size())));
}

IdentifiabilityMargin identifiability_margin(const SyntheticSpec& spec) {
  const long R = static_cast<long>(spec.rank);
  const long J = static_cast<long>(spec.dims.J);
  const long K = static_cast<long>(spec.dims.K);
  const long I = static_cast<long>(spec.dims.I);
  const long clean = I - static_cast<long>(spec.outlier_count);
  IdentifiabilityMargin m;
  m.c = 2 * R + 2 - std::min(J, R) - std::min(K, R);
  m.bound_satisfied = clean >= 0 && m.c <= std::min(clean, R) && 2 * clean >= I + m.c;
  return m;
}

bool smallest_weights_match(const SlabWeights& w, std::span<const std::size_t> planted) {
  require(planted.size() <= w.size(), ErrorCode::InvalidArgument, "more planted slabs than weights");
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] < w[b]; });
  std::vector<std::size_t> lowest(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(planted.size()));
  std::vector<std::size_t> expect(planted.begin(), planted.end());
  std::sort(lowest.begin(), lowest.end());
  std::sort(expect.begin(), expect.end());
  return lowest == expect;
}

ConstrainedProblem with_scale_anchor(ConstrainedProblem problem) {
  auto& [a, b, c] = problem.factors;
  const bool smooth = b.reg.kind == Regularizer::Kind::Smooth || c.reg.kind == Regularizer::Kind::Smooth;
  if (smooth && a.reg.kind == Regularizer::Kind::None) a.reg = Regularizer::ridge(kScaleAnchorRidge);
  return problem;
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Tals: return "tals";
    case Algorithm::Irals: return "irals";
    case Algorithm::IralsConstrained: return "irals_constrained";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "tals") return Algorithm::Tals;
  if (name == "irals") return Algorithm::Irals;
  if (name == "irals_constrained") return Algorithm::IralsConstrained;
  fail(ErrorCode::Parse, "unknown algorithm '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.solver);
  validate(cfg.admm);
  require(cfg.trials >= 1, ErrorCode::InvalidArgument, "sweep needs at least one trial");
  require(cfg.restarts >= 1, ErrorCode::InvalidArgument, "sweep needs at least one restart");
  require(!cfg.algorithms.empty(), ErrorCode::InvalidArgument, "sweep needs at least one algorithm");
  require(!cfg.outlier_counts.empty() && !cfg.sor_db.empty(), ErrorCode::InvalidArgument,
          "sweep grid is empty");
  require(cfg.init == "tals" || cfg.init == "random", ErrorCode::InvalidArgument,
          "sweep init must be 'tals' or 'random'");
  for (auto n : cfg.outlier_counts)
    validate(SyntheticSpec{cfg.dims, cfg.rank, n, 0.0, 0});
}

TrialRecord run_trial(const ExperimentConfig& cfg, const SyntheticSpec& spec, std::size_t trial) {
  const SyntheticInstance inst = generate(spec);
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = spec.seed;
  rec.planted = inst.outliers;
  rec.realized_sor_db = signal_to_outlier_db(inst.clean, inst.tensor, inst.outliers);

  const std::size_t n_alg = cfg.algorithms.size();
  std::vector<std::optional<FitResult>> best(n_alg);
  std::vector<double> seconds(n_alg, 0.0);
  std::vector<std::string> errors(n_alg);

  auto consider = [&](std::size_t slot, FitResult&& r) {
    if (!best[slot] || r.cost_trace.back() < best[slot]->cost_trace.back()) best[slot] = std::move(r);
  };

  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    const std::uint64_t seed = restart_seed(spec.seed, r);
    std::optional<FitResult> tals_fit;
    std::string tals_error;
    const bool need_tals = cfg.init == "tals" ||
                           std::find(cfg.algorithms.begin(), cfg.algorithms.end(), Algorithm::Tals) !=
                               cfg.algorithms.end();
    double tals_seconds = 0.0;
    if (need_tals) {
      SolverConfig sc = cfg.solver;
      sc.init = RandomInit{seed};
      const auto t0 = std::chrono::steady_clock::now();
      try {
        tals_fit = tals(inst.tensor, cfg.rank, sc);
      } catch (const std::exception& e) {
        tals_error = e.what();
      }
      tals_seconds = seconds_since(t0);
    }

    for (std::size_t slot = 0; slot < n_alg; ++slot) {
      const Algorithm alg = cfg.algorithms[slot];
      if (alg == Algorithm::Tals) {
        seconds[slot] += tals_seconds;
        if (tals_fit) consider(slot, FitResult(*tals_fit));
        else errors[slot] = tals_error;
        continue;
      }
      SolverConfig sc = cfg.solver;
      if (cfg.init == "tals") {
        if (!tals_fit) {
          errors[slot] = "TALS initialization failed: " + tals_error;
          continue;
        }
        sc.init = GivenInit{tals_fit->factors};
      } else {
        sc.init = RandomInit{seed};
      }
      const auto t0 = std::chrono::steady_clock::now();
      try {
        if (alg == Algorithm::Irals) consider(slot, irals(inst.tensor, cfg.rank, sc));
        else consider(slot, irals_constrained(inst.tensor, cfg.rank, sc, with_scale_anchor(cfg.constraints), cfg.admm));
      } catch (const std::exception& e) {
        errors[slot] = e.what();
      }
      seconds[slot] += seconds_since(t0);
    }
  }

  rec.outcomes.resize(n_alg);
  for (std::size_t slot = 0; slot < n_alg; ++slot) {
    AlgorithmOutcome& out = rec.outcomes[slot];
    out.seconds = seconds[slot];
    if (!best[slot]) {
      out.error = errors[slot].empty() ? "no successful run" : errors[slot];
      continue;
    }
    const FitResult& fit = *best[slot];
    try {
      out.mse_B = align_and_mse(inst.truth.B, fit.factors.B);
      out.mse_C = align_and_mse(inst.truth.C, fit.factors.C);
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.iterations = fit.iterations;
    out.converged = fit.converged;
    out.final_cost = fit.cost_trace.back();
    out.weights.assign(fit.weights.values().data(), fit.weights.values().data() + fit.weights.size());
    out.outliers_localized = smallest_weights_match(fit.weights, inst.outliers);
  }
  return rec;
}

std::vector<AlgorithmSummary> summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& trials) {
  std::vector<AlgorithmSummary> out(cfg.algorithms.size());
  for (std::size_t slot = 0; slot < out.size(); ++slot) {
    AlgorithmSummary& s = out[slot];
    s.algorithm = cfg.algorithms[slot];
    double sum_b = 0.0, sum_c = 0.0, sum_bc = 0.0, sum_t = 0.0, sum_db = 0.0;
    std::size_t localized = 0;
    for (const auto& tr : trials) {
      const AlgorithmOutcome& o = tr.outcomes.at(slot);
      if (!o.ok) {
        ++s.failed;
        continue;
      }
      ++s.succeeded;
      sum_b += o.mse_B;
      sum_c += o.mse_C;
      sum_bc += o.mse();
      sum_t += o.seconds;
      sum_db += mse_to_db(o.mse());
      localized += o.outliers_localized ? 1 : 0;
    }
    if (s.succeeded > 0) {
      const double n = static_cast<double>(s.succeeded);
      s.mean_mse_B = sum_b / n;
      s.mean_mse_C = sum_c / n;
      s.mean_mse = sum_bc / n;
      s.mean_seconds = sum_t / n;
      s.localization_rate = static_cast<double>(localized) / n;
      s.mean_of_trial_db = sum_db / n;
    }
  }
  return out;
}

ExperimentReport run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentReport report;
  report.config = cfg;
  for (auto n : cfg.outlier_counts)
    for (double sor : cfg.sor_db) {
      GridPoint p;
      p.outlier_count = n;
      p.sor_db = sor;
      p.trials.resize(cfg.trials);
      report.points.push_back(std::move(p));
    }

  const std::size_t jobs = report.points.size() * cfg.trials;
  std::size_t workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      GridPoint& p = report.points[job / cfg.trials];
      const std::size_t trial = job % cfg.trials;
      const SyntheticSpec spec{cfg.dims, cfg.rank, p.outlier_count, p.sor_db, cfg.seed + trial};
      p.trials[trial] = run_trial(cfg, spec, trial);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t n = 0; n < workers; ++n) pool.emplace_back(work);
  }
  for (auto& p : report.points) p.summaries = summarize(cfg, p.trials);
  return report;
}

std::string report_to_json(const ExperimentReport& report, int indent) {
  using nlohmann::json;
  const auto& cfg = report.config;
  json points = json::array();
  for (const auto& p : report.points) {
    json summaries = json::array();
    for (const auto& s : p.summaries)
      summaries.push_back({{"algorithm", std::string(to_string(s.algorithm))},
                           {"succeeded", s.succeeded},
                           {"failed", s.failed},
                           {"mean_mse_B", s.mean_mse_B},
                           {"mean_mse_C", s.mean_mse_C},
                           {"mean_mse", s.mean_mse},
                           {"mean_mse_db_B", s.mean_mse_db_B()},
                           {"mean_mse_db_C", s.mean_mse_db_C()},
                           {"mean_mse_db", s.mean_mse_db()},
                           {"mean_of_trial_db", s.mean_of_trial_db},
                           {"mean_seconds", s.mean_seconds},
                           {"localization_rate", s.localization_rate}});
    json trials = json::array();
    for (const auto& tr : p.trials) {
      json outcomes = json::array();
      for (std::size_t slot = 0; slot < tr.outcomes.size(); ++slot) {
        const auto& o = tr.outcomes[slot];
        json jo = {{"algorithm", std::string(to_string(cfg.algorithms[slot]))},
                   {"ok", o.ok},
                   {"seconds", o.seconds}};
        if (o.ok) {
          jo["mse_B"] = o.mse_B;
          jo["mse_C"] = o.mse_C;
          jo["mse_db_B"] = mse_to_db(o.mse_B);
          jo["mse_db_C"] = mse_to_db(o.mse_C);
          jo["iterations"] = o.iterations;
          jo["converged"] = o.converged;
          jo["final_cost"] = o.final_cost;
          jo["weights"] = o.weights;
          jo["outliers_localized"] = o.outliers_localized;
        } else {
          jo["error"] = o.error;
        }
        outcomes.push_back(std::move(jo));
      }
      trials.push_back({{"trial", tr.trial},
                        {"seed", tr.seed},
                        {"planted", tr.planted},
                        {"realized_sor_db", tr.planted.empty() ? json(nullptr) : json(tr.realized_sor_db)},
                        {"outcomes", outcomes}});
    }
    points.push_back({{"outlier_count", p.outlier_count},
                      {"sor_db", p.sor_db},
                      {"summaries", summaries},
                      {"trials", trials}});
  }
  json root = {{"config", to_json(cfg)}, {"points", points}};
  return root.dump(indent);
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "algorithm,measure";
  for (const auto& p : report.points) os << ",outliers=" << p.outlier_count << ";sor_db=" << p.sor_db;
  os << '\n';
  const auto& algs = report.config.algorithms;
  for (std::size_t slot = 0; slot < algs.size(); ++slot) {
    os << to_string(algs[slot]) << ",MSE (dB)";
    for (const auto& p : report.points) os << ',' << p.summaries[slot].mean_mse_db();
    os << '\n' << to_string(algs[slot]) << ",TIME (s)";
    for (const auto& p : report.points) os << ',' << p.summaries[slot].mean_seconds;
    os << '\n';
  }
  return os.str();
}

}  // namespace rcpd

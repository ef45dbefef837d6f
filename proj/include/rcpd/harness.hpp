#pragma once

// Synthetic outlying-slab experiments: instance generation, Monte-Carlo
// sweeps over SOR and outlier count, and report assembly.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rcpd/constrained.hpp"
#include "rcpd/solvers.hpp"

namespace rcpd {

// Factors are i.i.d. Exponential(mean 1); outlier entries are i.i.d.
// Uniform(0, 1) before a single global rescaling that realizes sor_db.
struct SyntheticSpec {
  Dims dims{20, 20, 20};
  std::size_t rank = 5;
  std::size_t outlier_count = 0;
  double sor_db = 0.0;
  std::uint64_t seed = 0;
};

void validate(const SyntheticSpec& spec);

struct SyntheticInstance {
  Tensor3 tensor;  // clean model plus outliers
  Tensor3 clean;
  FactorTriple truth;
  std::vector<std::size_t> outliers;  // sorted horizontal slab indices
  double outlier_scale = 0.0;
};

SyntheticInstance generate(const SyntheticSpec& spec);

// 10 log10( (1/I) ||clean||^2 / ((1/|N|) sum_{i in N} ||O_i||_F^2) ) with
// O_i = observed(i,:,:) - clean(i,:,:).
double signal_to_outlier_db(const Tensor3& clean, const Tensor3& observed,
                            std::span<const std::size_t> outliers);

// c = 2R + 2 - min(J,R) - min(K,R); the bound holds when the number of clean
// slabs n_c satisfies c <= min(n_c, R) and 2 n_c >= I + c.
struct IdentifiabilityMargin {
  long c = 0;
  bool bound_satisfied = false;
};
IdentifiabilityMargin identifiability_margin(const SyntheticSpec& spec);

// True when the |planted| smallest weights sit exactly on the planted slabs.
bool smallest_weights_match(const SlabWeights& w, std::span<const std::size_t> planted);

// Ridge weight placed on A when B or C carries a smoothness penalty and A has
// no regularizer of its own; without it the scale of B and C drains into A.
inline constexpr double kScaleAnchorRidge = 1e-2;
ConstrainedProblem with_scale_anchor(ConstrainedProblem problem);

enum class Algorithm { Tals, Irals, IralsConstrained };
std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view name);

struct ExperimentConfig {
  Dims dims{20, 20, 20};
  std::size_t rank = 5;
  std::vector<std::size_t> outlier_counts{6};
  std::vector<double> sor_db{0.0};
  std::size_t trials = 20;
  std::uint64_t seed = 1;  // trial n uses seed + n
  std::size_t restarts = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
  // Robust solvers start from the TALS estimate ("tals") or from the same
  // random point TALS starts from ("random").
  std::string init = "tals";
  std::vector<Algorithm> algorithms{Algorithm::Tals, Algorithm::Irals};
  SolverConfig solver;
  ConstrainedProblem constraints;
  AdmmConfig admm;
};

void validate(const ExperimentConfig& cfg);

struct AlgorithmOutcome {
  bool ok = false;
  std::string error;
  double mse_B = 0.0;  // linear
  double mse_C = 0.0;
  double seconds = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double final_cost = 0.0;
  std::vector<double> weights;
  bool outliers_localized = false;

  double mse() const { return 0.5 * (mse_B + mse_C); }
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> planted;
  double realized_sor_db = 0.0;
  std::vector<AlgorithmOutcome> outcomes;  // parallel to ExperimentConfig::algorithms
};

struct AlgorithmSummary {
  Algorithm algorithm = Algorithm::Tals;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  // Linear averages over successful trials; NaN when no trial succeeded.
  double mean_mse_B = std::numeric_limits<double>::quiet_NaN();
  double mean_mse_C = std::numeric_limits<double>::quiet_NaN();
  double mean_mse = std::numeric_limits<double>::quiet_NaN();  // average of the B and C errors
  double mean_seconds = std::numeric_limits<double>::quiet_NaN();
  double localization_rate = std::numeric_limits<double>::quiet_NaN();
  double mean_of_trial_db = std::numeric_limits<double>::quiet_NaN();  // average taken in dB

  double mean_mse_db_B() const { return mse_to_db(mean_mse_B); }
  double mean_mse_db_C() const { return mse_to_db(mean_mse_C); }
  double mean_mse_db() const { return mse_to_db(mean_mse); }
};

struct GridPoint {
  std::size_t outlier_count = 0;
  double sor_db = 0.0;
  std::vector<TrialRecord> trials;
  std::vector<AlgorithmSummary> summaries;  // parallel to ExperimentConfig::algorithms
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<GridPoint> points;
};

// One trial of one grid point; deterministic in (cfg, spec).
TrialRecord run_trial(const ExperimentConfig& cfg, const SyntheticSpec& spec, std::size_t trial);

// Means over the successful trials of a grid point, accumulated in trial order.
std::vector<AlgorithmSummary> summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& trials);

ExperimentReport run_sweep(const ExperimentConfig& cfg);

std::string report_to_json(const ExperimentReport& report, int indent = 2);
// Table layout: one MSE row and one TIME row per algorithm, one column per grid point.
std::string report_to_csv(const ExperimentReport& report);

}  // namespace rcpd

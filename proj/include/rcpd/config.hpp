#pragma once

// JSON configuration files for the fit and sweep commands.
//
//   {
//     "algorithm": "irals",                 // tals | irals | irals_constrained
//     "solver": { "p": 0.5, "eps": 1e-8, "max_iters": 1000, "tol_abs_cost": 1e-8,
//                 "ridge_jitter": 1e-8, "weighted_a_update": false,
//                 "init": { "kind": "tals", "iters": 50, "seed": 0 } },
//     "factors": { "B": { "constraint": "nonnegative",
//                         "regularizer": { "kind": "smooth", "lambda": 0.1, "order": 2 } } },
//     "admm": { "rho": null, "max_inner_iters": 500, "tol_split": 1e-3, "warm_start": true },
//     "sweep": { "dims": [20, 20, 20], "rank": 5, "outlier_counts": [6],
//                "sor_db": [-5, 0, 5], "trials": 20, "seed": 1, "restarts": 1,
//                "threads": 0, "init": "tals", "algorithms": ["tals", "irals"] }
//   }
//
// Every section and key is optional; unknown keys are rejected.

#include <string_view>

#include "json.hpp"
#include "rcpd/harness.hpp"

namespace rcpd {

struct FitConfig {
  Algorithm algorithm = Algorithm::Irals;
  SolverConfig solver;
  ConstrainedProblem constraints;
  AdmmConfig admm;
};

FitConfig parse_fit_config(std::string_view text);
ExperimentConfig parse_experiment_config(std::string_view text);

nlohmann::json to_json(const SolverConfig& cfg);
nlohmann::json to_json(const ConstrainedProblem& problem);
nlohmann::json to_json(const AdmmConfig& acfg);
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace rcpd

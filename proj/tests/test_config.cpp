#include "doctest.h"

#include "rcpd/config.hpp"
#include "rcpd/error.hpp"

using namespace rcpd;

TEST_CASE("empty fit config gives defaults") {
  const FitConfig c = parse_fit_config("{}");
  CHECK(c.algorithm == Algorithm::Irals);
  CHECK(c.solver.p == 0.5);
  CHECK(c.solver.eps == 1e-8);
  CHECK(c.solver.max_iters == 1000);
  CHECK(!c.admm.rho.has_value());
  CHECK(parse_fit_config("").solver.tol_abs_cost == 1e-8);
}

TEST_CASE("fit config with factor problems") {
  const FitConfig c = parse_fit_config(R"({
    "algorithm": "irals_constrained",
    "solver": {"p": 0.8, "init": {"kind": "tals", "iters": 20, "seed": 4}},
    "factors": {"B": {"constraint": "nonnegative",
                      "regularizer": {"kind": "smooth", "lambda": 0.1, "order": 1}},
                "C": {"constraint": {"kind": "box", "lo": -1, "hi": 2}}},
    "admm": {"rho": 3.0, "tol_split": 1e-5}
  })");
  CHECK(c.algorithm == Algorithm::IralsConstrained);
  CHECK(c.solver.p == 0.8);
  const auto* ti = std::get_if<TalsInit>(&c.solver.init);
  REQUIRE(ti != nullptr);
  CHECK(ti->iters == 20);
  CHECK(ti->seed == 4);
  CHECK(c.constraints.factors[0].cons.kind == ConstraintSet::Kind::Unconstrained);
  CHECK(c.constraints.factors[1].cons.kind == ConstraintSet::Kind::Nonnegative);
  CHECK(c.constraints.factors[1].reg.kind == Regularizer::Kind::Smooth);
  CHECK(c.constraints.factors[1].reg.order == 1);
  CHECK(c.constraints.factors[2].cons.kind == ConstraintSet::Kind::Box);
  CHECK(c.constraints.factors[2].cons.hi == 2.0);
  CHECK(c.admm.rho.value() == 3.0);
  CHECK(c.admm.tol_split == 1e-5);
}

TEST_CASE("malformed configs are rejected") {
  CHECK_THROWS_AS(parse_fit_config(R"({"solvr": {}})"), Error);
  CHECK_THROWS_AS(parse_fit_config(R"({"solver": {"pp": 1}})"), Error);
  CHECK_THROWS_AS(parse_fit_config(R"({"solver": {"p": "half"}})"), Error);
  CHECK_THROWS_AS(parse_fit_config(R"({"algorithm": "svd"})"), Error);
  CHECK_THROWS_AS(parse_fit_config(R"({"factors": {"D": {}}})"), Error);
  CHECK_THROWS_AS(parse_fit_config("{"), Error);
  CHECK_THROWS_AS(parse_experiment_config(R"({"sweep": {"dims": [2, 2]}})"), Error);
  CHECK_THROWS_AS(parse_experiment_config(R"({"sweep": {"trials": 0}})"), Error);
}

TEST_CASE("experiment config round trips through json") {
  ExperimentConfig c = parse_experiment_config(R"({
    "solver": {"eps": 1e-6},
    "factors": {"A": {"regularizer": {"kind": "l1", "lambda": 0.5}},
                "C": {"constraint": {"kind": "box", "lo": 0, "hi": 3}}},
    "sweep": {"dims": [10, 9, 8], "rank": 3, "outlier_counts": [1, 2], "sor_db": [-5, 5],
              "trials": 4, "seed": 7, "init": "random", "algorithms": ["tals", "irals_constrained"]}
  })");
  CHECK(c.dims.J == 9);
  CHECK(c.algorithms.size() == 2);
  const std::string text = to_json(c).dump();
  const ExperimentConfig d = parse_experiment_config(text);
  CHECK(to_json(d) == to_json(c));
  CHECK(d.init == "random");
  CHECK(d.constraints.factors[0].reg.kind == Regularizer::Kind::L1);
  CHECK(d.constraints.factors[2].cons.hi == 3.0);
  CHECK(d.solver.eps == 1e-6);
}

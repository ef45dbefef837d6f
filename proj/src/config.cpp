#include "rcpd/config.hpp"

#include <initializer_list>
#include <string>

#include "rcpd/error.hpp"

namespace rcpd {

using nlohmann::json;

namespace {

void only_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) fail(ErrorCode::Parse, std::string(where) + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto k : keys) known = known || key == k;
    if (!known) fail(ErrorCode::Parse, std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("key '") + key + "': " + e.what());
  }
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("invalid JSON: ") + e.what());
  }
}

InitStrategy parse_init(const json& j) {
  only_keys(j, "solver.init", {"kind", "seed", "iters"});
  std::string kind = "random";
  std::uint64_t seed = 0;
  std::size_t iters = 50;
  read(j, "kind", kind);
  read(j, "seed", seed);
  read(j, "iters", iters);
  if (kind == "random") return RandomInit{seed};
  if (kind == "tals") return TalsInit{iters, seed};
  fail(ErrorCode::Parse, "solver.init.kind must be 'random' or 'tals'");
}

SolverConfig parse_solver(const json& j) {
  only_keys(j, "solver", {"p", "eps", "max_iters", "tol_abs_cost", "ridge_jitter", "weighted_a_update", "init"});
  SolverConfig cfg;
  read(j, "p", cfg.p);
  read(j, "eps", cfg.eps);
  read(j, "max_iters", cfg.max_iters);
  read(j, "tol_abs_cost", cfg.tol_abs_cost);
  read(j, "ridge_jitter", cfg.ridge_jitter);
  read(j, "weighted_a_update", cfg.weighted_a_update);
  if (j.contains("init")) cfg.init = parse_init(j.at("init"));
  validate(cfg);
  return cfg;
}

ConstraintSet parse_constraint(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "none" || s == "unconstrained") return ConstraintSet::unconstrained();
    if (s == "nonnegative") return ConstraintSet::nonnegative();
    fail(ErrorCode::Parse, "unknown constraint '" + s + "'");
  }
  only_keys(j, "constraint", {"kind", "lo", "hi"});
  std::string kind;
  read(j, "kind", kind);
  if (kind != "box") return parse_constraint(json(kind));
  double lo = 0.0, hi = 1.0;
  read(j, "lo", lo);
  read(j, "hi", hi);
  auto c = ConstraintSet::box(lo, hi);
  validate(c);
  return c;
}

Regularizer parse_regularizer(const json& j) {
  only_keys(j, "regularizer", {"kind", "lambda", "order"});
  std::string kind = "none";
  Regularizer reg;
  read(j, "kind", kind);
  read(j, "lambda", reg.lambda);
  read(j, "order", reg.order);
  if (kind == "none") reg.kind = Regularizer::Kind::None;
  else if (kind == "ridge") reg.kind = Regularizer::Kind::Ridge;
  else if (kind == "smooth") reg.kind = Regularizer::Kind::Smooth;
  else if (kind == "l1") reg.kind = Regularizer::Kind::L1;
  else fail(ErrorCode::Parse, "unknown regularizer '" + kind + "'");
  validate(reg);
  return reg;
}

ConstrainedProblem parse_factors(const json& j) {
  only_keys(j, "factors", {"A", "B", "C"});
  ConstrainedProblem p;
  const char* names[3] = {"A", "B", "C"};
  for (std::size_t n = 0; n < 3; ++n) {
    if (!j.contains(names[n])) continue;
    const json& fj = j.at(names[n]);
    only_keys(fj, std::string("factors.") + names[n], {"constraint", "regularizer"});
    if (fj.contains("constraint")) p.factors[n].cons = parse_constraint(fj.at("constraint"));
    if (fj.contains("regularizer")) p.factors[n].reg = parse_regularizer(fj.at("regularizer"));
  }
  return p;
}

AdmmConfig parse_admm(const json& j) {
  only_keys(j, "admm", {"rho", "max_inner_iters", "tol_split", "warm_start"});
  AdmmConfig a;
  if (j.contains("rho") && !j.at("rho").is_null()) {
    double rho = 0.0;
    read(j, "rho", rho);
    a.rho = rho;
  }
  read(j, "max_inner_iters", a.max_inner_iters);
  read(j, "tol_split", a.tol_split);
  read(j, "warm_start", a.warm_start);
  validate(a);
  return a;
}

void parse_common(const json& root, SolverConfig& solver, ConstrainedProblem& cons, AdmmConfig& admm) {
  if (root.contains("solver")) solver = parse_solver(root.at("solver"));
  if (root.contains("factors")) cons = parse_factors(root.at("factors"));
  if (root.contains("admm")) admm = parse_admm(root.at("admm"));
}

std::string constraint_name(const ConstraintSet& c) {
  switch (c.kind) {
    case ConstraintSet::Kind::Unconstrained: return "none";
    case ConstraintSet::Kind::Nonnegative: return "nonnegative";
    case ConstraintSet::Kind::Box: return "box";
  }
  return "none";
}

std::string regularizer_name(const Regularizer& r) {
  switch (r.kind) {
    case Regularizer::Kind::None: return "none";
    case Regularizer::Kind::Ridge: return "ridge";
    case Regularizer::Kind::Smooth: return "smooth";
    case Regularizer::Kind::L1: return "l1";
  }
  return "none";
}

}  // namespace

FitConfig parse_fit_config(std::string_view text) {
  const json root = text.empty() ? json::object() : parse_text(text);
  only_keys(root, "config", {"algorithm", "solver", "factors", "admm", "sweep"});
  FitConfig cfg;
  if (root.contains("algorithm")) {
    std::string name;
    read(root, "algorithm", name);
    cfg.algorithm = algorithm_from_string(name);
  }
  parse_common(root, cfg.solver, cfg.constraints, cfg.admm);
  return cfg;
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  const json root = parse_text(text);
  only_keys(root, "config", {"algorithm", "solver", "factors", "admm", "sweep"});
  ExperimentConfig cfg;
  parse_common(root, cfg.solver, cfg.constraints, cfg.admm);
  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    only_keys(s, "sweep", {"dims", "rank", "outlier_counts", "sor_db", "trials", "seed", "restarts",
                           "threads", "init", "algorithms"});
    if (s.contains("dims")) {
      std::vector<std::size_t> d;
      read(s, "dims", d);
      if (d.size() != 3) fail(ErrorCode::Parse, "sweep.dims must have three entries");
      cfg.dims = {d[0], d[1], d[2]};
    }
    read(s, "rank", cfg.rank);
    read(s, "outlier_counts", cfg.outlier_counts);
    read(s, "sor_db", cfg.sor_db);
    read(s, "trials", cfg.trials);
    read(s, "seed", cfg.seed);
    read(s, "restarts", cfg.restarts);
    read(s, "threads", cfg.threads);
    read(s, "init", cfg.init);
    if (s.contains("algorithms")) {
      std::vector<std::string> names;
      read(s, "algorithms", names);
      cfg.algorithms.clear();
      for (const auto& n : names) cfg.algorithms.push_back(algorithm_from_string(n));
    }
  }
  validate(cfg);
  return cfg;
}

json to_json(const SolverConfig& cfg) {
  json init = std::visit(
      [](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, RandomInit>) return {{"kind", "random"}, {"seed", s.seed}};
        else if constexpr (std::is_same_v<S, TalsInit>) return {{"kind", "tals"}, {"iters", s.iters}, {"seed", s.seed}};
        else return {{"kind", "given"}};
      },
      cfg.init);
  return {{"p", cfg.p},
          {"eps", cfg.eps},
          {"max_iters", cfg.max_iters},
          {"tol_abs_cost", cfg.tol_abs_cost},
          {"ridge_jitter", cfg.ridge_jitter},
          {"weighted_a_update", cfg.weighted_a_update},
          {"init", init}};
}

json to_json(const ConstrainedProblem& problem) {
  json out = json::object();
  const char* names[3] = {"A", "B", "C"};
  for (std::size_t n = 0; n < 3; ++n) {
    const auto& fp = problem.factors[n];
    json c = constraint_name(fp.cons);
    if (fp.cons.kind == ConstraintSet::Kind::Box) c = {{"kind", "box"}, {"lo", fp.cons.lo}, {"hi", fp.cons.hi}};
    json r = {{"kind", regularizer_name(fp.reg)}, {"lambda", fp.reg.lambda}};
    if (fp.reg.kind == Regularizer::Kind::Smooth) r["order"] = fp.reg.order;
    out[names[n]] = {{"constraint", c}, {"regularizer", r}};
  }
  return out;
}

json to_json(const AdmmConfig& a) {
  return {{"rho", a.rho ? json(*a.rho) : json(nullptr)},
          {"max_inner_iters", a.max_inner_iters},
          {"tol_split", a.tol_split},
          {"warm_start", a.warm_start}};
}

json to_json(const ExperimentConfig& cfg) {
  json algs = json::array();
  for (auto a : cfg.algorithms) algs.push_back(std::string(to_string(a)));
  return {{"solver", to_json(cfg.solver)},
          {"factors", to_json(cfg.constraints)},
          {"admm", to_json(cfg.admm)},
          {"sweep",
           {{"dims", {cfg.dims.I, cfg.dims.J, cfg.dims.K}},
            {"rank", cfg.rank},
            {"outlier_counts", cfg.outlier_counts},
            {"sor_db", cfg.sor_db},
            {"trials", cfg.trials},
            {"seed", cfg.seed},
            {"restarts", cfg.restarts},
            {"threads", cfg.threads},
            {"init", cfg.init},
            {"algorithms", algs}}}};
}

}  // namespace rcpd

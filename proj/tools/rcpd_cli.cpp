// rcpd: command-line front end over the C API.
//
//   rcpd gen   --dims 20 20 20 --rank 5 --outliers 6 --sor-db 0 --seed 1 --out data/
//   rcpd fit   --tensor data/tensor.bin --rank 5 --config fit.json --out fit/ [--truth data/]
//   rcpd eval  --factors fit/ --truth data/
//   rcpd sweep --config sweep.json --json report.json --csv table.csv

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rcpd/rcpd.h"

namespace fs = std::filesystem;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(rcpd_status s, const std::string& what) {
  if (s != RCPD_OK)
    throw CliError(what + ": " + rcpd_status_string(s) + " (" + rcpd_last_error() + ")");
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using TensorPtr = std::unique_ptr<rcpd_tensor, Deleter<rcpd_tensor, rcpd_tensor_free>>;
using MatrixPtr = std::unique_ptr<rcpd_matrix, Deleter<rcpd_matrix, rcpd_matrix_free>>;
using FactorsPtr = std::unique_ptr<rcpd_factors, Deleter<rcpd_factors, rcpd_factors_free>>;
using ConfigPtr = std::unique_ptr<rcpd_config, Deleter<rcpd_config, rcpd_config_free>>;
using ResultPtr = std::unique_ptr<rcpd_fit_result, Deleter<rcpd_fit_result, rcpd_fit_result_free>>;
using StringPtr = std::unique_ptr<char, Deleter<char, rcpd_string_free>>;

std::string read_file(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw CliError("cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw CliError("cannot write " + p.string());
  os << text;
}

std::string ext(bool csv) { return csv ? ".csv" : ".bin"; }

fs::path find_factor(const fs::path& dir, char which) {
  for (const char* e : {".bin", ".csv"}) {
    fs::path p = dir / (std::string(1, which) + e);
    if (fs::exists(p)) return p;
  }
  throw CliError("no factor file for " + std::string(1, which) + " in " + dir.string());
}

FactorsPtr load_factors(const fs::path& dir) {
  MatrixPtr m[3];
  const char names[3] = {'A', 'B', 'C'};
  for (int n = 0; n < 3; ++n) {
    rcpd_matrix* raw = nullptr;
    check(rcpd_matrix_load(find_factor(dir, names[n]).string().c_str(), &raw), "load factor");
    m[n].reset(raw);
  }
  rcpd_factors* f = nullptr;
  check(rcpd_factors_create(m[0].get(), m[1].get(), m[2].get(), &f), "assemble factors");
  return FactorsPtr(f);
}

void save_factors(const rcpd_factors* f, const fs::path& dir, bool csv) {
  for (char which : {'A', 'B', 'C'}) {
    rcpd_matrix* raw = nullptr;
    check(rcpd_factors_get(f, which, &raw), "extract factor");
    MatrixPtr m(raw);
    check(rcpd_matrix_save(m.get(), (dir / (std::string(1, which) + ext(csv))).string().c_str()), "save factor");
  }
}

int cmd_gen(const std::vector<std::size_t>& dims, std::size_t rank, std::size_t outliers, double sor_db,
            std::uint64_t seed, const fs::path& out, bool csv) {
  if (dims.size() != 3) throw CliError("--dims takes three values");
  fs::create_directories(out);
  rcpd_synthetic_spec spec{dims[0], dims[1], dims[2], rank, outliers, sor_db, seed};
  rcpd_tensor* t = nullptr;
  rcpd_factors* f = nullptr;
  std::vector<std::size_t> planted(outliers);
  check(rcpd_generate(&spec, &t, &f, planted.data()), "generate");
  TensorPtr tensor(t);
  FactorsPtr truth(f);
  check(rcpd_tensor_save(tensor.get(), (out / ("tensor" + ext(csv))).string().c_str()), "save tensor");
  save_factors(truth.get(), out, csv);

  long c = 0;
  int ok = 0;
  check(rcpd_identifiability_margin(&spec, &c, &ok), "identifiability margin");
  nlohmann::json meta = {{"dims", dims},        {"rank", rank}, {"outlier_count", outliers},
                         {"sor_db", sor_db},    {"seed", seed}, {"outliers", planted},
                         {"identifiability_c", c}, {"identifiability_bound", ok == 1}};
  write_file(out / "outliers.json", meta.dump(2) + "\n");
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_fit(const fs::path& tensor_path, std::size_t rank, const std::string& config_path, const fs::path& out,
            const std::string& truth_dir, const std::string& init_dir, std::size_t restarts, std::uint64_t seed,
            bool seed_given, bool csv) {
  rcpd_tensor* t = nullptr;
  check(rcpd_tensor_load(tensor_path.string().c_str(), &t), "load tensor");
  TensorPtr tensor(t);
  const std::string cfg_text = config_path.empty() ? std::string() : read_file(config_path);
  rcpd_config* c = nullptr;
  check(rcpd_config_parse(cfg_text.c_str(), &c), "parse config");
  ConfigPtr cfg(c);
  FactorsPtr init;
  if (!init_dir.empty()) init = load_factors(init_dir);

  // Restarts differ only in the seed of the starting point; the run with the
  // lowest final cost wins.
  ResultPtr best;
  double best_cost = 0.0;
  for (std::size_t r = 0; r < restarts; ++r) {
    if (seed_given || restarts > 1) check(rcpd_config_set_seed(cfg.get(), seed + r), "set seed");
    rcpd_fit_result* raw = nullptr;
    check(rcpd_fit(tensor.get(), rank, cfg.get(), init.get(), &raw), "fit");
    ResultPtr res(raw);
    double cost = 0.0;
    check(rcpd_fit_result_final_cost(res.get(), &cost), "final cost");
    if (!best || cost < best_cost) {
      best = std::move(res);
      best_cost = cost;
    }
  }

  fs::create_directories(out);
  rcpd_factors* f = nullptr;
  check(rcpd_fit_result_factors(best.get(), &f), "factors");
  FactorsPtr factors(f);
  save_factors(factors.get(), out, csv);

  std::size_t n = 0;
  check(rcpd_fit_result_num_weights(best.get(), &n), "weights");
  std::vector<double> w(n);
  check(rcpd_fit_result_weights(best.get(), w.data(), n), "weights");
  rcpd_matrix* wm = nullptr;
  check(rcpd_matrix_create(n, 1, w.data(), &wm), "weights");
  MatrixPtr weights(wm);
  check(rcpd_matrix_save(weights.get(), (out / ("weights" + ext(csv))).string().c_str()), "save weights");

  FactorsPtr truth;
  if (!truth_dir.empty()) truth = load_factors(truth_dir);
  char* js = nullptr;
  check(rcpd_fit_result_to_json(best.get(), truth.get(), &js), "report");
  StringPtr json(js);
  write_file(out / "report.json", std::string(json.get()) + "\n");
  std::cout << "final cost " << best_cost << "; wrote " << out.string() << "\n";
  return 0;
}

int cmd_eval(const fs::path& factors_dir, const fs::path& truth_dir, const std::string& json_out) {
  auto est = load_factors(factors_dir);
  auto truth = load_factors(truth_dir);
  nlohmann::json report = nlohmann::json::object();
  for (char which : {'A', 'B', 'C'}) {
    rcpd_matrix *t = nullptr, *e = nullptr;
    check(rcpd_factors_get(truth.get(), which, &t), "truth factor");
    MatrixPtr tm(t);
    check(rcpd_factors_get(est.get(), which, &e), "estimated factor");
    MatrixPtr em(e);
    double mse = 0.0;
    check(rcpd_align_mse(tm.get(), em.get(), &mse), "align");
    const std::string name(1, which);
    report["mse_" + name] = mse;
    report["mse_db_" + name] = rcpd_mse_to_db(mse);
  }
  const std::string text = report.dump(2) + "\n";
  if (json_out.empty()) std::cout << text;
  else write_file(json_out, text);
  return 0;
}

int cmd_sweep(const fs::path& config_path, const std::string& json_out, const std::string& csv_out) {
  const std::string cfg = read_file(config_path);
  char *js = nullptr, *cs = nullptr;
  check(rcpd_run_sweep(cfg.c_str(), &js, &cs), "sweep");
  StringPtr json(js), csv(cs);
  if (!json_out.empty()) write_file(json_out, std::string(json.get()) + "\n");
  if (!csv_out.empty()) write_file(csv_out, csv.get());
  std::cout << csv.get();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust CPD of three-way tensors with outlying slabs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rcpd_version()));

  auto* gen = app.add_subcommand("gen", "Generate a synthetic tensor with outlying horizontal slabs");
  std::vector<std::size_t> dims{20, 20, 20};
  std::size_t rank = 5, outliers = 0, restarts = 1;
  double sor_db = 0.0;
  std::uint64_t seed = 0;
  std::string out, tensor_path, config_path, truth_dir, init_dir, factors_dir, json_out, csv_out;
  bool csv = false;
  gen->add_option("--dims", dims, "I J K")->expected(3);
  gen->add_option("--rank", rank, "CP rank");
  gen->add_option("--outliers", outliers, "number of outlying horizontal slabs");
  gen->add_option("--sor-db", sor_db, "signal-to-outlier ratio in dB");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--out", out, "output directory")->required();
  gen->add_flag("--csv", csv, "write CSV instead of the binary container");

  auto* fit = app.add_subcommand("fit", "Fit a CP model");
  fit->add_option("--tensor", tensor_path, "tensor file (.bin or .csv)")->required();
  fit->add_option("--rank", rank, "CP rank")->required();
  fit->add_option("--config", config_path, "JSON configuration");
  fit->add_option("--out", out, "output directory")->required();
  fit->add_option("--truth", truth_dir, "directory with true factors A/B/C for scoring");
  fit->add_option("--init", init_dir, "directory with starting factors A/B/C");
  fit->add_option("--restarts", restarts, "number of restarts from different seeds")->check(CLI::PositiveNumber);
  auto* seed_opt = fit->add_option("--seed", seed, "seed of the first restart");
  fit->add_flag("--csv", csv, "write CSV instead of the binary container");

  auto* eval = app.add_subcommand("eval", "Score estimated factors against the truth");
  eval->add_option("--factors", factors_dir, "directory with estimated A/B/C")->required();
  eval->add_option("--truth", truth_dir, "directory with true A/B/C")->required();
  eval->add_option("--json", json_out, "write the report here instead of stdout");

  auto* sweep = app.add_subcommand("sweep", "Run a Monte-Carlo experiment sweep");
  sweep->add_option("--config", config_path, "JSON experiment configuration")->required();
  sweep->add_option("--json", json_out, "full JSON report");
  sweep->add_option("--csv", csv_out, "summary table (CSV)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(dims, rank, outliers, sor_db, seed, out, csv);
    if (fit->parsed())
      return cmd_fit(tensor_path, rank, config_path, out, truth_dir, init_dir, restarts, seed, seed_opt->count() > 0, csv);
    if (eval->parsed()) return cmd_eval(factors_dir, truth_dir, json_out);
    if (sweep->parsed()) return cmd_sweep(config_path, json_out, csv_out);
  } catch (const std::exception& e) {
    std::cerr << "rcpd: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

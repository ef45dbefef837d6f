#include "rcpd/rcpd.h"

#include <cstring>
#include <new>
#include <string>

#include "rcpd/config.hpp"
#include "rcpd/error.hpp"
#include "rcpd/harness.hpp"
#include "rcpd/io.hpp"

struct rcpd_tensor {
  rcpd::Tensor3 value;
};
struct rcpd_matrix {
  rcpd::Matrix value;
};
struct rcpd_factors {
  rcpd::FactorTriple value;
};
struct rcpd_config {
  rcpd::FitConfig value;
};
struct rcpd_fit_result {
  rcpd::Algorithm algorithm;
  rcpd::FitResult value;
};

namespace {

thread_local std::string g_last_error;

rcpd_status to_status(rcpd::ErrorCode code) {
  switch (code) {
    case rcpd::ErrorCode::InvalidArgument: return RCPD_ERR_INVALID_ARGUMENT;
    case rcpd::ErrorCode::DimensionMismatch: return RCPD_ERR_DIMENSION_MISMATCH;
    case rcpd::ErrorCode::Singular: return RCPD_ERR_SINGULAR;
    case rcpd::ErrorCode::NonFinite: return RCPD_ERR_NON_FINITE;
    case rcpd::ErrorCode::Io: return RCPD_ERR_IO;
    case rcpd::ErrorCode::Parse: return RCPD_ERR_PARSE;
  }
  return RCPD_ERR_INTERNAL;
}

template <typename F>
rcpd_status guarded(F&& body) {
  try {
    body();
    return RCPD_OK;
  } catch (const rcpd::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RCPD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RCPD_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) rcpd::fail(rcpd::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void copy_out(const double* src, std::size_t n, double* buf, std::size_t len) {
  need(buf, "buf");
  if (len != n)
    rcpd::fail(rcpd::ErrorCode::DimensionMismatch,
               "buffer holds " + std::to_string(len) + " values, expected " + std::to_string(n));
  std::memcpy(buf, src, n * sizeof(double));
}

rcpd::SyntheticSpec to_spec(const rcpd_synthetic_spec* s) {
  need(s, "spec");
  return {rcpd::Dims{s->I, s->J, s->K}, s->rank, s->outlier_count, s->sor_db, s->seed};
}

}  // namespace

extern "C" {

const char* rcpd_version(void) { return "0.1.0"; }
const char* rcpd_last_error(void) { return g_last_error.c_str(); }

const char* rcpd_status_string(rcpd_status status) {
  switch (status) {
    case RCPD_OK: return "ok";
    case RCPD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RCPD_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case RCPD_ERR_SINGULAR: return "singular system";
    case RCPD_ERR_NON_FINITE: return "non-finite value";
    case RCPD_ERR_IO: return "i/o error";
    case RCPD_ERR_PARSE: return "parse error";
    case RCPD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void rcpd_string_free(char* s) { delete[] s; }

rcpd_status rcpd_tensor_create(size_t I, size_t J, size_t K, const double* data, rcpd_tensor** out) {
  return guarded([&] {
    need(out, "out");
    rcpd::Dims d{I, J, K};
    rcpd::Tensor3 t = data ? rcpd::Tensor3(d, std::vector<double>(data, data + d.numel())) : rcpd::Tensor3(d);
    *out = new rcpd_tensor{std::move(t)};
  });
}

void rcpd_tensor_free(rcpd_tensor* t) { delete t; }

rcpd_status rcpd_tensor_dims(const rcpd_tensor* t, size_t dims[3]) {
  return guarded([&] {
    need(t, "tensor");
    need(dims, "dims");
    dims[0] = t->value.dims().I;
    dims[1] = t->value.dims().J;
    dims[2] = t->value.dims().K;
  });
}

rcpd_status rcpd_tensor_copy_data(const rcpd_tensor* t, double* buf, size_t len) {
  return guarded([&] {
    need(t, "tensor");
    copy_out(t->value.data().data(), t->value.size(), buf, len);
  });
}

rcpd_status rcpd_tensor_load(const char* path, rcpd_tensor** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new rcpd_tensor{rcpd::io::load_tensor(path)};
  });
}

rcpd_status rcpd_tensor_save(const rcpd_tensor* t, const char* path) {
  return guarded([&] {
    need(t, "tensor");
    need(path, "path");
    rcpd::io::save_tensor(path, t->value);
  });
}

rcpd_status rcpd_matrix_create(size_t rows, size_t cols, const double* data, rcpd_matrix** out) {
  return guarded([&] {
    need(out, "out");
    const auto r = static_cast<Eigen::Index>(rows), c = static_cast<Eigen::Index>(cols);
    rcpd::Matrix m = data ? rcpd::Matrix(Eigen::Map<const rcpd::Matrix>(data, r, c)) : rcpd::Matrix::Zero(r, c);
    if (!m.allFinite()) rcpd::fail(rcpd::ErrorCode::NonFinite, "matrix entries must be finite");
    *out = new rcpd_matrix{std::move(m)};
  });
}

void rcpd_matrix_free(rcpd_matrix* m) { delete m; }

rcpd_status rcpd_matrix_dims(const rcpd_matrix* m, size_t* rows, size_t* cols) {
  return guarded([&] {
    need(m, "matrix");
    need(rows, "rows");
    need(cols, "cols");
    *rows = static_cast<size_t>(m->value.rows());
    *cols = static_cast<size_t>(m->value.cols());
  });
}

rcpd_status rcpd_matrix_copy_data(const rcpd_matrix* m, double* buf, size_t len) {
  return guarded([&] {
    need(m, "matrix");
    copy_out(m->value.data(), static_cast<std::size_t>(m->value.size()), buf, len);
  });
}

rcpd_status rcpd_matrix_load(const char* path, rcpd_matrix** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new rcpd_matrix{rcpd::io::load_matrix(path)};
  });
}

rcpd_status rcpd_matrix_save(const rcpd_matrix* m, const char* path) {
  return guarded([&] {
    need(m, "matrix");
    need(path, "path");
    rcpd::io::save_matrix(path, m->value);
  });
}

rcpd_status rcpd_factors_create(const rcpd_matrix* A, const rcpd_matrix* B, const rcpd_matrix* C,
                                rcpd_factors** out) {
  return guarded([&] {
    need(A, "A");
    need(B, "B");
    need(C, "C");
    need(out, "out");
    rcpd::FactorTriple f{A->value, B->value, C->value};
    rcpd::validate(f);
    *out = new rcpd_factors{std::move(f)};
  });
}

void rcpd_factors_free(rcpd_factors* f) { delete f; }

rcpd_status rcpd_factors_rank(const rcpd_factors* f, size_t* rank) {
  return guarded([&] {
    need(f, "factors");
    need(rank, "rank");
    *rank = f->value.rank();
  });
}

rcpd_status rcpd_factors_get(const rcpd_factors* f, char which, rcpd_matrix** out) {
  return guarded([&] {
    need(f, "factors");
    need(out, "out");
    switch (which) {
      case 'A': *out = new rcpd_matrix{f->value.A}; break;
      case 'B': *out = new rcpd_matrix{f->value.B}; break;
      case 'C': *out = new rcpd_matrix{f->value.C}; break;
      default: rcpd::fail(rcpd::ErrorCode::InvalidArgument, "factor selector must be 'A', 'B' or 'C'");
    }
  });
}

rcpd_status rcpd_factors_reconstruct(const rcpd_factors* f, rcpd_tensor** out) {
  return guarded([&] {
    need(f, "factors");
    need(out, "out");
    *out = new rcpd_tensor{rcpd::reconstruct(f->value)};
  });
}

rcpd_status rcpd_config_parse(const char* json, rcpd_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new rcpd_config{rcpd::parse_fit_config(json ? std::string_view(json) : std::string_view())};
  });
}

void rcpd_config_free(rcpd_config* cfg) { delete cfg; }

rcpd_status rcpd_config_set_seed(rcpd_config* cfg, uint64_t seed) {
  return guarded([&] {
    need(cfg, "config");
    auto& init = cfg->value.solver.init;
    if (auto* r = std::get_if<rcpd::RandomInit>(&init)) r->seed = seed;
    else if (auto* t = std::get_if<rcpd::TalsInit>(&init)) t->seed = seed;
    else rcpd::fail(rcpd::ErrorCode::InvalidArgument, "configuration has no seeded initialization");
  });
}

rcpd_status rcpd_fit(const rcpd_tensor* t, size_t rank, const rcpd_config* cfg, const rcpd_factors* init,
                     rcpd_fit_result** out) {
  return guarded([&] {
    need(t, "tensor");
    need(out, "out");
    rcpd::FitConfig fc = cfg ? cfg->value : rcpd::FitConfig{};
    if (init) fc.solver.init = rcpd::GivenInit{init->value};
    rcpd::FitResult r;
    switch (fc.algorithm) {
      case rcpd::Algorithm::Tals: r = rcpd::tals(t->value, rank, fc.solver); break;
      case rcpd::Algorithm::Irals: r = rcpd::irals(t->value, rank, fc.solver); break;
      case rcpd::Algorithm::IralsConstrained:
        r = rcpd::irals_constrained(t->value, rank, fc.solver, rcpd::with_scale_anchor(fc.constraints), fc.admm);
        break;
    }
    *out = new rcpd_fit_result{fc.algorithm, std::move(r)};
  });
}

void rcpd_fit_result_free(rcpd_fit_result* r) { delete r; }

rcpd_status rcpd_fit_result_factors(const rcpd_fit_result* r, rcpd_factors** out) {
  return guarded([&] {
    need(r, "result");
    need(out, "out");
    *out = new rcpd_factors{r->value.factors};
  });
}

rcpd_status rcpd_fit_result_num_weights(const rcpd_fit_result* r, size_t* n) {
  return guarded([&] {
    need(r, "result");
    need(n, "n");
    *n = r->value.weights.size();
  });
}

rcpd_status rcpd_fit_result_weights(const rcpd_fit_result* r, double* buf, size_t len) {
  return guarded([&] {
    need(r, "result");
    copy_out(r->value.weights.values().data(), r->value.weights.size(), buf, len);
  });
}

rcpd_status rcpd_fit_result_trace_length(const rcpd_fit_result* r, size_t* n) {
  return guarded([&] {
    need(r, "result");
    need(n, "n");
    *n = r->value.cost_trace.size();
  });
}

rcpd_status rcpd_fit_result_cost_trace(const rcpd_fit_result* r, double* buf, size_t len) {
  return guarded([&] {
    need(r, "result");
    copy_out(r->value.cost_trace.data(), r->value.cost_trace.size(), buf, len);
  });
}

rcpd_status rcpd_fit_result_iterations(const rcpd_fit_result* r, size_t* iterations) {
  return guarded([&] {
    need(r, "result");
    need(iterations, "iterations");
    *iterations = r->value.iterations;
  });
}

rcpd_status rcpd_fit_result_converged(const rcpd_fit_result* r, int* converged) {
  return guarded([&] {
    need(r, "result");
    need(converged, "converged");
    *converged = r->value.converged ? 1 : 0;
  });
}

rcpd_status rcpd_fit_result_final_cost(const rcpd_fit_result* r, double* cost) {
  return guarded([&] {
    need(r, "result");
    need(cost, "cost");
    *cost = r->value.cost_trace.back();
  });
}

rcpd_status rcpd_fit_result_to_json(const rcpd_fit_result* r, const rcpd_factors* truth, char** json) {
  return guarded([&] {
    need(r, "result");
    need(json, "json");
    const auto& fit = r->value;
    const auto& w = fit.weights.values();
    nlohmann::json j = {{"algorithm", std::string(rcpd::to_string(r->algorithm))},
                        {"rank", fit.factors.rank()},
                        {"iterations", fit.iterations},
                        {"converged", fit.converged},
                        {"cost_trace", fit.cost_trace},
                        {"weights", std::vector<double>(w.data(), w.data() + w.size())}};
    if (truth) {
      const double mb = rcpd::align_and_mse(truth->value.B, fit.factors.B);
      const double mc = rcpd::align_and_mse(truth->value.C, fit.factors.C);
      j["mse_B"] = mb;
      j["mse_C"] = mc;
      j["mse_db_B"] = rcpd::mse_to_db(mb);
      j["mse_db_C"] = rcpd::mse_to_db(mc);
    }
    *json = dup_string(j.dump(2));
  });
}

rcpd_status rcpd_align_mse(const rcpd_matrix* truth, const rcpd_matrix* estimate, double* mse) {
  return guarded([&] {
    need(truth, "truth");
    need(estimate, "estimate");
    need(mse, "mse");
    *mse = rcpd::align_and_mse(truth->value, estimate->value);
  });
}

double rcpd_mse_to_db(double mse) { return rcpd::mse_to_db(mse); }

rcpd_status rcpd_generate(const rcpd_synthetic_spec* spec, rcpd_tensor** tensor, rcpd_factors** truth,
                          size_t* outliers) {
  return guarded([&] {
    need(tensor, "tensor");
    need(truth, "truth");
    auto inst = rcpd::generate(to_spec(spec));
    if (outliers)
      std::copy(inst.outliers.begin(), inst.outliers.end(), outliers);
    *tensor = new rcpd_tensor{std::move(inst.tensor)};
    *truth = new rcpd_factors{std::move(inst.truth)};
  });
}

rcpd_status rcpd_identifiability_margin(const rcpd_synthetic_spec* spec, long* c, int* satisfied) {
  return guarded([&] {
    need(c, "c");
    need(satisfied, "satisfied");
    const auto m = rcpd::identifiability_margin(to_spec(spec));
    *c = m.c;
    *satisfied = m.bound_satisfied ? 1 : 0;
  });
}

rcpd_status rcpd_run_sweep(const char* config_json, char** report_json, char** table_csv) {
  return guarded([&] {
    need(config_json, "config_json");
    const auto report = rcpd::run_sweep(rcpd::parse_experiment_config(config_json));
    if (report_json) *report_json = dup_string(rcpd::report_to_json(report));
    if (table_csv) *table_csv = dup_string(rcpd::report_to_csv(report));
  });
}

}  // extern "C"

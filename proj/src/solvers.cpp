#include "semflow/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#ifdef SEMFLOW_HAVE_UMFPACK
#include <dlfcn.h>
#include <umfpack.h>
#endif

namespace semflow {

std::string_view to_string(LinearSolverKind kind) {
  return kind == LinearSolverKind::gmres ? "gmres" : "sparse_direct";
}

LinearSolverKind parse_linear_solver(std::string_view name) {
  if (name == "sparse_direct" || name == "direct") return LinearSolverKind::sparse_direct;
  if (name == "gmres") return LinearSolverKind::gmres;
  throw InputError("unknown linear solver '" + std::string(name) + "'");
}

namespace {

#ifdef SEMFLOW_HAVE_UMFPACK
// UMFPACK is opened at runtime so OPENBLAS_CORETYPE can be fixed before
// OpenBLAS initializes: the AVX-512 dgemm kernels of the distribution build
// return wrong results on dense fronts, the Haswell kernels do not.
struct UmfpackApi {
  decltype(&umfpack_di_defaults) defaults = nullptr;
  decltype(&umfpack_di_symbolic) symbolic = nullptr;
  decltype(&umfpack_di_numeric) numeric = nullptr;
  decltype(&umfpack_di_solve) solve = nullptr;
  decltype(&umfpack_di_free_symbolic) free_symbolic = nullptr;
  decltype(&umfpack_di_free_numeric) free_numeric = nullptr;
  std::string error;

  bool ok() const { return error.empty(); }
  static const UmfpackApi& get();
};

bool umfpack_self_check(const UmfpackApi& api);

const UmfpackApi& UmfpackApi::get() {
  static const UmfpackApi api = [] {
    UmfpackApi a;
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2")) setenv("OPENBLAS_CORETYPE", "Haswell", 0);
#endif
    void* h = nullptr;
    for (const char* name : {SEMFLOW_UMFPACK_LIBRARY, "libumfpack.so.5", "libumfpack.so"}) {
      if ((h = dlopen(name, RTLD_NOW | RTLD_LOCAL))) break;
    }
    if (!h) {
      a.error = "cannot open libumfpack";
      return a;
    }
    auto sym = [&](auto& fn, const char* name) {
      fn = reinterpret_cast<std::remove_reference_t<decltype(fn)>>(dlsym(h, name));
      if (!fn) a.error = std::string("missing symbol ") + name;
    };
    sym(a.defaults, "umfpack_di_defaults");
    sym(a.symbolic, "umfpack_di_symbolic");
    sym(a.numeric, "umfpack_di_numeric");
    sym(a.solve, "umfpack_di_solve");
    sym(a.free_symbolic, "umfpack_di_free_symbolic");
    sym(a.free_numeric, "umfpack_di_free_numeric");
    if (a.ok() && !umfpack_self_check(a)) a.error = "UMFPACK failed its dense self-check (faulty BLAS)";
    if (!a.ok()) std::fprintf(stderr, "semflow: %s, using Eigen SparseLU\n", a.error.c_str());
    return a;
  }();
  return api;
}

// The row-major Jacobian is handed to UMFPACK as the column-major transpose;
// solving with UMFPACK_At then yields A x = b.
class Umfpack {
 public:
  explicit Umfpack(const UmfpackApi& api) : api_(api) {}
  ~Umfpack() { release(); }
  Umfpack(const Umfpack&) = delete;
  Umfpack& operator=(const Umfpack&) = delete;

  void factorize(int n, const int* outer, const int* inner, const double* values) {
    const int nnz = outer[n];
    const bool same_pattern = symbolic_ && n == n_ && std::equal(outer, outer + n + 1, outer_.begin()) &&
                              std::equal(inner, inner + nnz, inner_.begin(), inner_.end());
    if (!same_pattern) {
      release();
      n_ = n;
      outer_.assign(outer, outer + n + 1);
      inner_.assign(inner, inner + nnz);
      api_.defaults(control_);
      const int status = api_.symbolic(n, n, outer_.data(), inner_.data(), values, &symbolic_, control_, nullptr);
      if (status != UMFPACK_OK) {
        symbolic_ = nullptr;
        throw SolverError("UMFPACK symbolic analysis failed with status " + std::to_string(status));
      }
    }
    if (numeric_) api_.free_numeric(&numeric_);
    values_.assign(values, values + nnz);
    const int status = api_.numeric(outer_.data(), inner_.data(), values_.data(), symbolic_, &numeric_, control_, nullptr);
    if (status != UMFPACK_OK) {
      if (numeric_) api_.free_numeric(&numeric_);
      numeric_ = nullptr;
      throw SolverError(status == UMFPACK_WARNING_singular_matrix
                            ? std::string("singular Jacobian")
                            : "UMFPACK factorization failed with status " + std::to_string(status));
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) {
    Eigen::VectorXd x(b.size());
    const int status =
        api_.solve(UMFPACK_At, outer_.data(), inner_.data(), values_.data(), x.data(), b.data(), numeric_, control_, nullptr);
    if (status != UMFPACK_OK) throw SolverError("UMFPACK solve failed with status " + std::to_string(status));
    return x;
  }

 private:
  void release() {
    if (numeric_) api_.free_numeric(&numeric_);
    if (symbolic_) api_.free_symbolic(&symbolic_);
    numeric_ = symbolic_ = nullptr;
  }
  const UmfpackApi& api_;
  int n_ = 0;
  std::vector<int> outer_, inner_;
  std::vector<double> values_;
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
  double control_[UMFPACK_CONTROL];
};

bool umfpack_self_check(const UmfpackApi& api) {
  const int n = 64;
  std::vector<int> outer(n + 1), inner;
  std::vector<double> values;
  Eigen::MatrixXd dense(n, n);
  unsigned state = 12345;
  for (int i = 0; i < n; ++i) {
    outer[i] = static_cast<int>(inner.size());
    for (int j = 0; j < n; ++j) {
      state = state * 1664525u + 1013904223u;
      const double v = (state >> 8) / double(1u << 24) - 0.5 + (i == j ? n : 0);
      dense(i, j) = v;
      inner.push_back(j);
      values.push_back(v);
    }
  }
  outer[n] = static_cast<int>(inner.size());
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, -1, 1);
  try {
    Umfpack u(api);
    u.factorize(n, outer.data(), inner.data(), values.data());
    const Eigen::VectorXd x = u.solve(b);
    return (dense * x - b).norm() <= 1e-12 * b.norm() * n;
  } catch (const SolverError&) {
    return false;
  }
}
#endif

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

}  // namespace

bool direct_uses_umfpack() {
#ifdef SEMFLOW_HAVE_UMFPACK
  return UmfpackApi::get().ok();
#else
  return false;
#endif
}

struct LinearSolver::Impl {
#ifdef SEMFLOW_HAVE_UMFPACK
  std::unique_ptr<Umfpack> umfpack;
#endif
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  Eigen::GMRES<SparseMatrix, Eigen::IncompleteLUT<double, int>> gmres;
};

LinearSolver::LinearSolver(LinearSolverOptions options) : options_(options), impl_(std::make_unique<Impl>()) {
  if (options_.restart < 1) throw InputError("gmres restart must be positive");
  if (options_.ilu_fill < 0) throw InputError("ilu fill must be non-negative");
  if (!(options_.tolerance > 0) || options_.tolerance > 1e-8)
    throw InputError("gmres tolerance must be in (0, 1e-8]");
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

std::string LinearSolver::description() const {
  if (options_.kind == LinearSolverKind::gmres)
    return "gmres(" + std::to_string(options_.restart) + ")+ilut(" + std::to_string(options_.ilu_fill) + ")";
  return direct_uses_umfpack() ? "umfpack" : "eigen-sparselu";
}

void LinearSolver::factorize(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw InputError("linear system must be square");
  if (options_.kind == LinearSolverKind::gmres) {
    auto& g = impl_->gmres;
    g.preconditioner().setDroptol(options_.ilu_drop);
    g.preconditioner().setFillfactor(options_.ilu_fill + 1);
    g.set_restart(options_.restart);
    g.setTolerance(options_.tolerance);
    g.setMaxIterations(options_.max_iterations);
    g.compute(a);
    if (g.info() != Eigen::Success) throw SolverError("ILUT preconditioner failed");
    return;
  }
#ifdef SEMFLOW_HAVE_UMFPACK
  if (direct_uses_umfpack()) {
    if (!a.isCompressed()) throw InputError("matrix must be compressed");
    if (!impl_->umfpack) impl_->umfpack = std::make_unique<Umfpack>(UmfpackApi::get());
    impl_->umfpack->factorize(static_cast<int>(a.rows()), a.outerIndexPtr(), a.innerIndexPtr(), a.valuePtr());
    return;
  }
#endif
  const ColMatrix c = a;
  impl_->lu.compute(c);
  if (impl_->lu.info() != Eigen::Success) throw SolverError("sparse LU failed: " + impl_->lu.lastErrorMessage());
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& rhs) {
  Eigen::VectorXd x;
  if (options_.kind == LinearSolverKind::gmres) {
    auto& g = impl_->gmres;
    x = g.solve(rhs);
    last_iterations_ = static_cast<int>(g.iterations());
    last_residual_ = g.error();
    if (!x.allFinite() || g.info() == Eigen::NumericalIssue)
      throw SolverError("gmres breakdown, achieved relative residual " + std::to_string(last_residual_));
    if (g.info() != Eigen::Success || last_residual_ > options_.tolerance) {
      std::ostringstream os;
      os << "gmres stagnated after " << last_iterations_ << " iterations, achieved relative residual "
         << last_residual_;
      throw SolverError(os.str());
    }
    return x;
  }
#ifdef SEMFLOW_HAVE_UMFPACK
  if (impl_->umfpack) x = impl_->umfpack->solve(rhs);
  else
#endif
    x = impl_->lu.solve(rhs);
  last_iterations_ = 1;
  last_residual_ = 0.0;
  if (!x.allFinite()) throw SolverError("direct solve produced non-finite values");
  return x;
}

Eigen::VectorXd linear_solve(const SparseMatrix& a, const Eigen::VectorXd& rhs, const LinearSolverOptions& options) {
  LinearSolver s(options);
  s.factorize(a);
  return s.solve(rhs);
}

std::ostream& operator<<(std::ostream& os, const IterationRecord& rec) {
  const auto flags = os.flags();
  os << rec.stage << ' ' << rec.iteration << ' ' << std::scientific << std::setprecision(6) << rec.residual << ' '
     << std::fixed << std::setprecision(4) << rec.seconds;
  os.flags(flags);
  return os;
}

NewtonResult newton_solve(NonlinearProblem& problem, Eigen::VectorXd& x, const NewtonOptions& options,
                          const std::string& stage, const IterationCallback& callback) {
  if (!(options.rtol > 0) || !(options.atol > 0) || options.max_iterations < 1)
    throw InputError("Newton tolerances must be positive");
  if (!x.allFinite()) throw InputError("initial state is not finite");
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto record = [&](NewtonResult& res, int it, double norm) {
    IterationRecord rec{stage, it, norm, std::chrono::duration<double>(clock::now() - t0).count()};
    if (callback) callback(rec);
    res.history.push_back(std::move(rec));
  };

  NewtonResult res;
  LinearSolver solver(options.linear);
  Eigen::VectorXd r = problem.residual(x);
  double norm = r.norm();
  res.initial_residual = norm;
  record(res, 0, norm);
  const double target = std::max(options.atol, options.rtol * norm);

  for (int it = 1;; ++it) {
    if (!std::isfinite(norm)) {
      res.diverged = true;
      res.message = "non-finite residual";
      break;
    }
    if (norm <= target) {
      res.converged = true;
      break;
    }
    if (it > options.max_iterations) {
      res.message = "maximum Newton iterations exceeded";
      break;
    }
    solver.factorize(problem.jacobian(x));
    const Eigen::VectorXd dx = solver.solve(r);
    double step = 1.0;
    Eigen::VectorXd trial = x - dx;
    Eigen::VectorXd r_trial = problem.residual(trial);
    if (options.step_halving) {
      while (!(r_trial.norm() < norm) && step > 1.0 / 1024) {
        step *= 0.5;
        res.halving_used = true;
        trial = x - step * dx;
        r_trial = problem.residual(trial);
      }
    }
    x = std::move(trial);
    r = std::move(r_trial);
    norm = r.norm();
    res.iterations = it;
    record(res, it, norm);
  }
  res.final_residual = norm;
  return res;
}

std::vector<double> doubling_schedule(double target, double start) {
  if (!(target > 0) || !(start > 0)) throw InputError("Reynolds numbers must be positive");
  std::vector<double> out;
  for (double re = start; re < target; re *= 2) out.push_back(re);
  out.push_back(target);
  return out;
}

void validate_schedule(const std::vector<double>& schedule) {
  if (schedule.empty()) throw InputError("continuation schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0) || !std::isfinite(schedule[i])) throw InputError("continuation Re must be positive");
    if (i > 0 && !(schedule[i] > schedule[i - 1]))
      throw InputError("continuation schedule must be strictly increasing");
  }
}

ContinuationResult continuation_solve(NavierStokesProblem& problem, Eigen::VectorXd& x,
                                      const std::vector<double>& schedule, const NewtonOptions& options,
                                      const IterationCallback& callback) {
  validate_schedule(schedule);
  ContinuationResult out;
  for (double re : schedule) {
    problem.set_reynolds(re);
    std::ostringstream stage;
    stage << "Re=" << re;
    NewtonResult res;
    try {
      res = newton_solve(problem, x, options, stage.str(), callback);
    } catch (const SolverError& e) {
      throw SolverError("continuation failed at " + stage.str() + ": " + e.what());
    }
    out.total_iterations += res.iterations;
    if (!res.converged) {
      throw SolverError("continuation failed at " + stage.str() + ": " +
                        (res.message.empty() ? std::string("not converged") : res.message));
    }
    out.stages.push_back(std::move(res));
  }
  return out;
}

int configure_threads() {
  int n = 1;
  if (const char* env = std::getenv("SEMFLOW_NUM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw InputError("SEMFLOW_NUM_THREADS must be a positive integer");
    n = static_cast<int>(v);
  }
  Eigen::setNbThreads(n);
  return n;
}

}  // namespace semflow

#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "semflow/assembly.hpp"

namespace semflow {

enum class LinearSolverKind { sparse_direct, gmres };

std::string_view to_string(LinearSolverKind kind);
LinearSolverKind parse_linear_solver(std::string_view name);

struct LinearSolverOptions {
  LinearSolverKind kind = LinearSolverKind::sparse_direct;
  int restart = 200;
  int ilu_fill = 1;          // ILUT keeps (ilu_fill + 1) x the row count of entries
  double ilu_drop = 1e-6;    // relative drop tolerance of ILUT
  double tolerance = 1e-10;  // relative residual target for gmres (must be <= 1e-8)
  int max_iterations = 2000;
};

/// Factor-once, solve-many wrapper around the direct and Krylov backends.
class LinearSolver {
 public:
  explicit LinearSolver(LinearSolverOptions options = {});
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  void factorize(const SparseMatrix& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs);

  const LinearSolverOptions& options() const { return options_; }
  /// Backend label, e.g. "umfpack" or "gmres(200)+ilut(1)".
  std::string description() const;
  int last_iterations() const { return last_iterations_; }
  double last_residual() const { return last_residual_; }

 private:
  struct Impl;
  LinearSolverOptions options_;
  std::unique_ptr<Impl> impl_;
  int last_iterations_ = 0;
  double last_residual_ = 0.0;
};

/// True when sparse_direct runs on UMFPACK (loaded and self-checked), false for the Eigen SparseLU fallback.
bool direct_uses_umfpack();

/// Convenience: factor and solve once.
Eigen::VectorXd linear_solve(const SparseMatrix& a, const Eigen::VectorXd& rhs, const LinearSolverOptions& options = {});

struct IterationRecord {
  std::string stage;
  int iteration = 0;
  double residual = 0.0;
  double seconds = 0.0;
};

std::ostream& operator<<(std::ostream& os, const IterationRecord& rec);

struct NewtonOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  int max_iterations = 50;
  bool step_halving = false;
  LinearSolverOptions linear;
};

struct NewtonResult {
  bool converged = false;
  bool diverged = false;
  bool halving_used = false;
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::string message;
  std::vector<IterationRecord> history;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Plain Newton: stops when ||R||_2 <= max(atol, rtol ||R(x0)||_2).
/// Throws SolverError when the linear solve fails; otherwise the result
/// carries converged/diverged flags and `x` holds the last iterate.
NewtonResult newton_solve(NonlinearProblem& problem, Eigen::VectorXd& x, const NewtonOptions& options = {},
                          const std::string& stage = "newton", const IterationCallback& callback = {});

/// 1, 2, 4, ... below `target`, then `target`.
std::vector<double> doubling_schedule(double target, double start = 1.0);

/// Throws InputError unless the schedule is non-empty, positive and strictly increasing.
void validate_schedule(const std::vector<double>& schedule);

struct ContinuationResult {
  std::vector<NewtonResult> stages;
  int total_iterations = 0;
};

/// Solves at each Reynolds number of `schedule` in turn, warm-starting from
/// the previous stage. Throws SolverError naming the first Re that fails.
ContinuationResult continuation_solve(NavierStokesProblem& problem, Eigen::VectorXd& x,
                                      const std::vector<double>& schedule, const NewtonOptions& options = {},
                                      const IterationCallback& callback = {});

/// Reads SEMFLOW_NUM_THREADS and forwards it to the Eigen kernels; returns the value used.
int configure_threads();

}  // namespace semflow

#pragma once

// Primal-dual interior-point method for
//
//   minimize   c'z - sum_k w_k log z_{i_k}
//   subject to G z <= h
//
// with a sparse G. Mehrotra predictor-corrector steps; each Newton system is
// solved in regularised augmented form with a sparse LDL' and refined.
// The caller supplies a strictly feasible start.

#include <cstddef>
#include <string>
#include <vector>

namespace edgemarket::detail {

struct SparseEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

struct LogTerm {
  std::size_t index;
  double weight;
};

struct ConvexProgram {
  std::size_t variables = 0;
  std::size_t constraints = 0;
  std::vector<SparseEntry> g;  // constraint matrix G, constraints x variables
  std::vector<double> h;
  std::vector<double> c;  // linear objective (minimised); empty = zero
  std::vector<LogTerm> logs;
};

struct IpmOptions {
  std::size_t max_iterations = 200;
  double feasibility_tolerance = 1e-10;  // scaled primal / dual residual
  double complementarity_tolerance = 1e-12;  // max_i lambda_i s_i
  double step_fraction = 0.99;
};

enum class IpmStatus { optimal, stalled, max_iterations, numerical_failure };

struct IpmResult {
  IpmStatus status = IpmStatus::numerical_failure;
  std::vector<double> z;
  std::vector<double> lambda;  // one multiplier per row of G, >= 0
  std::vector<double> slack;  // h - G z
  std::size_t iterations = 0;
  double dual_residual = 0.0;  // ||grad f + G' lambda||_inf
  double primal_residual = 0.0;  // ||G z + s - h||_inf
  double max_complementarity = 0.0;  // max_i lambda_i s_i
  std::string message;
};

// Multiplier start: lambda_i = initial_mu / s_i.
IpmResult solve_convex_program(const ConvexProgram& program, std::vector<double> start,
                               const IpmOptions& options, double initial_mu);

}  // namespace edgemarket::detail

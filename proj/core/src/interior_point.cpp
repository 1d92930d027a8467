#include "interior_point.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace edgemarket::detail {

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Largest alpha in (0, 1] keeping v + alpha dv >= 0.
double max_step(const Vec& v, const Vec& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

struct Iterate {
  Vec z, s, lambda;
};

struct Residuals {
  Vec rd, rp;
  double rd_scaled = 0.0;
  double rp_scaled = 0.0;
  double comp = 0.0;
  double mu = 0.0;

  [[nodiscard]] double merit() const { return std::max({rd_scaled, rp_scaled, comp}); }
};

struct Direction {
  Vec dz, ds, dl;

  [[nodiscard]] bool finite() const { return dz.allFinite() && ds.allFinite() && dl.allFinite(); }
};

class Engine {
 public:
  Engine(const ConvexProgram& program, const IpmOptions& options)
      : program_(program), options_(options) {
    const auto n = static_cast<Eigen::Index>(program.variables);
    const auto m = static_cast<Eigen::Index>(program.constraints);
    G_.resize(m, n);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(program.g.size());
    for (const auto& e : program.g) {
      triplets.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
    }
    G_.setFromTriplets(triplets.begin(), triplets.end());
    Gt_ = G_.transpose();
    h_ = Eigen::Map<const Vec>(program.h.data(), m);
    linear_ = Vec::Zero(n);
    for (std::size_t i = 0; i < program.c.size(); ++i) {
      linear_[static_cast<Eigen::Index>(i)] = program.c[i];
    }
    h_scale_ = 1.0 + inf_norm(h_);
  }

  IpmResult run(const std::vector<double>& start, double initial_mu) {
    const auto n = static_cast<Eigen::Index>(program_.variables);
    IpmResult result;
    Iterate it;
    it.z = Eigen::Map<const Vec>(start.data(), n);
    it.s = h_ - G_ * it.z;
    if (it.s.size() == 0 || it.s.minCoeff() <= 0.0) {
      result.message = "starting point is not strictly feasible";
      return result;
    }
    it.lambda = it.s.cwiseInverse() * initial_mu;

    Iterate best = it;
    Residuals best_res = residuals(it);
    double progress_mark = best_res.merit();
    std::size_t stagnant = 0;

    for (std::size_t iter = 0;; ++iter) {
      result.iterations = iter;
      const Residuals res = residuals(it);
      if (res.merit() < best_res.merit()) {
        best = it;
        best_res = res;
      }
      if (res.merit() < 0.5 * progress_mark) {
        progress_mark = res.merit();
        stagnant = 0;
      } else {
        ++stagnant;
      }
      if (converged(res)) return finish(result, IpmStatus::optimal, it, res, "optimal");
      if (stagnant >= 30) return finish(result, IpmStatus::stalled, best, best_res, "no progress");
      if (iter >= options_.max_iterations) {
        return finish(result, IpmStatus::max_iterations, best, best_res, "iteration limit reached");
      }
      if (!step(it, res)) {
        return finish(result, IpmStatus::numerical_failure, best, best_res, "linear solve failed");
      }
    }
  }

 private:
  [[nodiscard]] bool converged(const Residuals& r) const {
    return r.rd_scaled <= options_.feasibility_tolerance &&
           r.rp_scaled <= options_.feasibility_tolerance &&
           r.comp <= options_.complementarity_tolerance;
  }

  [[nodiscard]] Vec gradient(const Vec& z) const {
    Vec g = linear_;
    for (const auto& t : program_.logs) {
      const auto i = static_cast<Eigen::Index>(t.index);
      g[i] -= t.weight / z[i];
    }
    return g;
  }

  [[nodiscard]] Vec hessian_diagonal(const Vec& z) const {
    Vec d = Vec::Zero(z.size());
    for (const auto& t : program_.logs) {
      const auto i = static_cast<Eigen::Index>(t.index);
      d[i] += t.weight / (z[i] * z[i]);
    }
    return d;
  }

  [[nodiscard]] Residuals residuals(const Iterate& it) const {
    Residuals r;
    const Vec grad = gradient(it.z);
    r.rd = grad + Gt_ * it.lambda;
    r.rp = G_ * it.z + it.s - h_;
    r.mu = it.lambda.dot(it.s) / static_cast<double>(it.s.size());
    r.comp = (it.lambda.array() * it.s.array()).maxCoeff();
    r.rd_scaled = inf_norm(r.rd) / (1.0 + inf_norm(grad) + inf_norm(linear_));
    r.rp_scaled = inf_norm(r.rp) / h_scale_;
    return r;
  }

  static IpmResult& finish(IpmResult& result, IpmStatus status, const Iterate& it,
                           const Residuals& res, const char* message) {
    result.status = status;
    result.z.assign(it.z.data(), it.z.data() + it.z.size());
    result.lambda.assign(it.lambda.data(), it.lambda.data() + it.lambda.size());
    result.slack.assign(it.s.data(), it.s.data() + it.s.size());
    result.dual_residual = inf_norm(res.rd);
    result.primal_residual = inf_norm(res.rp);
    result.max_complementarity = res.comp;
    result.message = message;
    return result;
  }

  // Quasi-definite augmented system
  //   [ H + delta I      G'              ] [dz]
  //   [ G           -(S / Lambda) - delta ] [dl]
  // The regularisation is removed again by iterative refinement; a larger
  // delta is tried when the factorisation meets a zero pivot.
  bool factorize(const Iterate& it, const Vec& hdiag) {
    for (const double delta : {1e-10, 1e-8, 1e-6}) {
      if (factorize_with(it, hdiag, delta)) return true;
    }
    return false;
  }

  bool factorize_with(const Iterate& it, const Vec& hdiag, double delta) {
    const Eigen::Index n = G_.cols();
    const Eigen::Index m = G_.rows();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(2 * G_.nonZeros() + n + m));
    for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, hdiag[i] + delta);
    for (Eigen::Index k = 0; k < G_.outerSize(); ++k) {
      for (SpMat::InnerIterator e(G_, k); e; ++e) {
        triplets.emplace_back(n + e.row(), e.col(), e.value());
        triplets.emplace_back(e.col(), n + e.row(), e.value());
      }
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const double ratio = std::min(it.s[i] / it.lambda[i], 1e30);
      triplets.emplace_back(n + i, n + i, -ratio - delta);
    }
    SpMat K(n + m, n + m);
    K.setFromTriplets(triplets.begin(), triplets.end());
    if (!pattern_ready_) {
      solver_.analyzePattern(K);
      pattern_ready_ = true;
    }
    solver_.factorize(K);
    return solver_.info() == Eigen::Success;
  }

  // Solves  H dz + G' dl = -rd,  G dz + ds = -rp,  S dl + Lambda ds = -rc
  // with the regularised factor, refining against the exact system.
  [[nodiscard]] Direction newton(const Iterate& it, const Vec& hdiag, const Vec& rd,
                                 const Vec& rp, const Vec& rc) const {
    const Eigen::Index n = G_.cols();
    const Eigen::Index m = G_.rows();
    auto reduced = [&](const Vec& a, const Vec& b, const Vec& c) {
      Vec rhs(n + m);
      rhs.head(n) = -a;
      rhs.tail(m) = -b + c.cwiseQuotient(it.lambda);
      const Vec sol = solver_.solve(rhs);
      Direction d;
      d.dz = sol.head(n);
      d.dl = sol.tail(m);
      d.ds = -(c + it.s.cwiseProduct(d.dl)).cwiseQuotient(it.lambda);
      return d;
    };
    Direction d = reduced(rd, rp, rc);
    for (int pass = 0; pass < 3; ++pass) {
      const Vec e1 = rd + hdiag.cwiseProduct(d.dz) + Gt_ * d.dl;
      const Vec e2 = rp + G_ * d.dz + d.ds;
      const Vec e3 = rc + it.s.cwiseProduct(d.dl) + it.lambda.cwiseProduct(d.ds);
      const Direction c = reduced(e1, e2, e3);
      d.dz += c.dz;
      d.ds += c.ds;
      d.dl += c.dl;
    }
    return d;
  }

  [[nodiscard]] double step_limit(const Iterate& it, const Direction& d) const {
    double alpha = std::min(max_step(it.s, d.ds), max_step(it.lambda, d.dl));
    for (const auto& t : program_.logs) {
      const auto i = static_cast<Eigen::Index>(t.index);
      if (d.dz[i] < 0.0) alpha = std::min(alpha, -it.z[i] / d.dz[i]);
    }
    return alpha;
  }

  bool step(Iterate& it, const Residuals& res) {
    const Vec hdiag = hessian_diagonal(it.z);
    if (!factorize(it, hdiag)) return false;
    const auto m = it.s.size();

    const Vec rc_aff = it.lambda.cwiseProduct(it.s);
    const Direction aff = newton(it, hdiag, res.rd, res.rp, rc_aff);
    const double alpha_aff = aff.finite() ? step_limit(it, aff) : 0.0;
    const double mu_aff =
        (it.s + alpha_aff * aff.ds).dot(it.lambda + alpha_aff * aff.dl) / static_cast<double>(m);
    const double sigma = std::pow(std::clamp(mu_aff / res.mu, 0.0, 1.0), 3.0);

    Direction d;
    double alpha_max = 0.0;
    if (aff.finite()) {
      d = newton(it, hdiag, res.rd, res.rp,
                 rc_aff + aff.ds.cwiseProduct(aff.dl) - Vec::Constant(m, sigma * res.mu));
      alpha_max = d.finite() ? step_limit(it, d) : 0.0;
    }

    // A short corrector step means the iterate has drifted off the central
    // path; a plain centering direction usually moves further.
    if (alpha_max < 0.1) {
      Direction c = newton(it, hdiag, res.rd, res.rp, rc_aff - Vec::Constant(m, 0.5 * res.mu));
      const double alpha_c = c.finite() ? step_limit(it, c) : 0.0;
      if (alpha_c > alpha_max) {
        d = std::move(c);
        alpha_max = alpha_c;
      }
    }
    if (alpha_max <= 0.0 || !d.finite()) return false;

    const double alpha = std::min(1.0, options_.step_fraction * alpha_max);
    it.z += alpha * d.dz;
    it.s += alpha * d.ds;
    it.lambda += alpha * d.dl;
    return true;
  }

  const ConvexProgram& program_;
  IpmOptions options_;
  SpMat G_, Gt_;
  Vec h_, linear_;
  double h_scale_ = 1.0;
  Eigen::SimplicialLDLT<SpMat> solver_;
  bool pattern_ready_ = false;
};

}  // namespace

IpmResult solve_convex_program(const ConvexProgram& program, std::vector<double> start,
                               const IpmOptions& options, double initial_mu) {
  Engine engine(program, options);
  return engine.run(start, initial_mu);
}

}  // namespace edgemarket::detail

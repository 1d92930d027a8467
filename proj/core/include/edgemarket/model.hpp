#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgemarket {

/// Thrown when an instance or allocation is structurally unusable
/// (dimension mismatch, bad index). Value-level problems are reported by
/// validate_instance() instead.
class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  [[nodiscard]] std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }
  [[nodiscard]] std::vector<double>& values() noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Problem datum: edge-node and cell capacities, per-job demand profiles
/// and budgets of the service providers.
///
/// Units are fixed: MEC resources in cores / GB (one column per resource
/// type), RAN resources in MHz, budgets in abstract money units.
struct MarketInstance {
  Matrix mec_capacity;  ///< M x R, D^MEC_{m,r}
  std::vector<double> ran_capacity;  ///< C, D^RAN_c
  Matrix mec_demand;  ///< S x R, d^MEC_{s,r} per concurrent job
  Matrix ran_demand;  ///< S x C, d^RAN_{s,c} per concurrent job
  std::vector<double> budgets;  ///< S, B_s

  // Optional labels; empty means "use indices".
  std::vector<std::string> resource_names;
  std::vector<std::string> node_names;
  std::vector<std::string> cell_names;
  std::vector<std::string> provider_names;

  [[nodiscard]] std::size_t providers() const noexcept { return budgets.size(); }
  [[nodiscard]] std::size_t nodes() const noexcept { return mec_capacity.rows(); }
  [[nodiscard]] std::size_t resource_types() const noexcept { return mec_capacity.cols(); }
  [[nodiscard]] std::size_t cells() const noexcept { return ran_capacity.size(); }

  [[nodiscard]] double total_budget() const;

  /// Throws InstanceError if the dimensions are mutually inconsistent.
  void check_dimensions() const;

  friend bool operator==(const MarketInstance&, const MarketInstance&) = default;
};

/// Per-provider reservations: x_{s,m,r} (S x M x R) and y_{s,c} (S x C).
class Allocation {
 public:
  Allocation() = default;
  Allocation(std::size_t providers, std::size_t nodes, std::size_t resource_types,
             std::size_t cells);
  /// Zero allocation shaped after `instance`.
  explicit Allocation(const MarketInstance& instance);

  [[nodiscard]] std::size_t providers() const noexcept { return providers_; }
  [[nodiscard]] std::size_t nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::size_t resource_types() const noexcept { return types_; }
  [[nodiscard]] std::size_t cells() const noexcept { return cells_; }

  double& mec(std::size_t s, std::size_t m, std::size_t r) {
    return mec_[(s * nodes_ + m) * types_ + r];
  }
  [[nodiscard]] double mec(std::size_t s, std::size_t m, std::size_t r) const {
    return mec_[(s * nodes_ + m) * types_ + r];
  }
  double& ran(std::size_t s, std::size_t c) { return ran_[s * cells_ + c]; }
  [[nodiscard]] double ran(std::size_t s, std::size_t c) const { return ran_[s * cells_ + c]; }

  [[nodiscard]] const std::vector<double>& mec_values() const noexcept { return mec_; }
  [[nodiscard]] std::vector<double>& mec_values() noexcept { return mec_; }
  [[nodiscard]] const std::vector<double>& ran_values() const noexcept { return ran_; }
  [[nodiscard]] std::vector<double>& ran_values() noexcept { return ran_; }

  /// Every entry multiplied by `factor`.
  [[nodiscard]] Allocation scaled(double factor) const;

  /// True if this allocation has the same shape as `instance`.
  [[nodiscard]] bool matches(const MarketInstance& instance) const noexcept;

  friend bool operator==(const Allocation&, const Allocation&) = default;

 private:
  std::size_t providers_ = 0;
  std::size_t nodes_ = 0;
  std::size_t types_ = 0;
  std::size_t cells_ = 0;
  std::vector<double> mec_;
  std::vector<double> ran_;
};

/// Concurrent-job counts, one per provider.
using UtilityVector = std::vector<double>;

/// Jobs the MEC reservation of `provider` can execute concurrently:
/// sum over nodes of the dominant-resource bound min_r x / d.
[[nodiscard]] double mec_jobs(const MarketInstance& instance, const Allocation& allocation,
                              std::size_t provider);

/// Job payloads the RAN reservation of `provider` can upload concurrently.
[[nodiscard]] double ran_jobs(const MarketInstance& instance, const Allocation& allocation,
                              std::size_t provider);

/// Bottleneck utility: min(mec_jobs, ran_jobs).
[[nodiscard]] double utility(const MarketInstance& instance, const Allocation& allocation,
                             std::size_t provider);

[[nodiscard]] UtilityVector utilities(const MarketInstance& instance,
                                      const Allocation& allocation);

/// Largest utility `provider` could reach holding every resource alone.
[[nodiscard]] double standalone_utility(const MarketInstance& instance, std::size_t provider);

struct Violation {
  std::string what;
  std::vector<std::size_t> indices;
};

struct ValidationReport {
  std::vector<Violation> violations;
  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
  [[nodiscard]] std::string summary() const;
};

/// Lists every violated invariant; never throws.
[[nodiscard]] ValidationReport validate_instance(const MarketInstance& instance);

/// Largest capacity overuse of `allocation` (0 when feasible), and
/// the most negative entry reported as a positive number.
struct FeasibilityGap {
  double capacity_excess = 0.0;
  double negativity = 0.0;
  [[nodiscard]] double max() const noexcept {
    return capacity_excess > negativity ? capacity_excess : negativity;
  }
};
[[nodiscard]] FeasibilityGap feasibility_gap(const MarketInstance& instance,
                                             const Allocation& allocation);

}  // namespace edgemarket

#include "edgemarket/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace edgemarket {

namespace {

void require_provider(const MarketInstance& instance, const Allocation& allocation,
                      std::size_t provider) {
  if (!allocation.matches(instance)) {
    throw InstanceError("allocation shape does not match the instance");
  }
  if (provider >= instance.providers()) {
    throw InstanceError("provider index " + std::to_string(provider) + " out of range");
  }
}

}  // namespace

double MarketInstance::total_budget() const {
  return std::accumulate(budgets.begin(), budgets.end(), 0.0);
}

void MarketInstance::check_dimensions() const {
  const auto S = providers();
  const auto R = resource_types();
  const auto C = cells();
  if (S == 0) throw InstanceError("instance has no providers");
  if (nodes() == 0 || R == 0) throw InstanceError("instance has no edge nodes or resource types");
  if (C == 0) throw InstanceError("instance has no cells");
  if (mec_demand.rows() != S || mec_demand.cols() != R) {
    throw InstanceError("mec_demand must be providers x resource_types");
  }
  if (ran_demand.rows() != S || ran_demand.cols() != C) {
    throw InstanceError("ran_demand must be providers x cells");
  }
}

Allocation::Allocation(std::size_t providers, std::size_t nodes, std::size_t resource_types,
                       std::size_t cells)
    : providers_(providers),
      nodes_(nodes),
      types_(resource_types),
      cells_(cells),
      mec_(providers * nodes * resource_types, 0.0),
      ran_(providers * cells, 0.0) {}

Allocation::Allocation(const MarketInstance& instance)
    : Allocation(instance.providers(), instance.nodes(), instance.resource_types(),
                 instance.cells()) {}

Allocation Allocation::scaled(double factor) const {
  Allocation out = *this;
  for (auto& v : out.mec_) v *= factor;
  for (auto& v : out.ran_) v *= factor;
  return out;
}

bool Allocation::matches(const MarketInstance& instance) const noexcept {
  return providers_ == instance.providers() && nodes_ == instance.nodes() &&
         types_ == instance.resource_types() && cells_ == instance.cells();
}

double mec_jobs(const MarketInstance& instance, const Allocation& allocation,
                std::size_t provider) {
  require_provider(instance, allocation, provider);
  double jobs = 0.0;
  for (std::size_t m = 0; m < instance.nodes(); ++m) {
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < instance.resource_types(); ++r) {
      bound = std::min(bound, allocation.mec(provider, m, r) / instance.mec_demand(provider, r));
    }
    jobs += bound;
  }
  return jobs;
}

double ran_jobs(const MarketInstance& instance, const Allocation& allocation,
                std::size_t provider) {
  require_provider(instance, allocation, provider);
  double jobs = 0.0;
  for (std::size_t c = 0; c < instance.cells(); ++c) {
    jobs += allocation.ran(provider, c) / instance.ran_demand(provider, c);
  }
  return jobs;
}

double utility(const MarketInstance& instance, const Allocation& allocation,
               std::size_t provider) {
  return std::min(mec_jobs(instance, allocation, provider),
                  ran_jobs(instance, allocation, provider));
}

UtilityVector utilities(const MarketInstance& instance, const Allocation& allocation) {
  UtilityVector u(instance.providers());
  for (std::size_t s = 0; s < u.size(); ++s) u[s] = utility(instance, allocation, s);
  return u;
}

double standalone_utility(const MarketInstance& instance, std::size_t provider) {
  double mec = 0.0;
  for (std::size_t m = 0; m < instance.nodes(); ++m) {
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < instance.resource_types(); ++r) {
      bound = std::min(bound, instance.mec_capacity(m, r) / instance.mec_demand(provider, r));
    }
    mec += bound;
  }
  double ran = 0.0;
  for (std::size_t c = 0; c < instance.cells(); ++c) {
    ran += instance.ran_capacity[c] / instance.ran_demand(provider, c);
  }
  return std::min(mec, ran);
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (const auto& v : violations) {
    out << v.what;
    if (!v.indices.empty()) {
      out << " at (";
      for (std::size_t i = 0; i < v.indices.size(); ++i) {
        out << (i ? ", " : "") << v.indices[i];
      }
      out << ")";
    }
    out << '\n';
  }
  return out.str();
}

ValidationReport validate_instance(const MarketInstance& instance) {
  ValidationReport report;
  auto add = [&](std::string what, std::vector<std::size_t> idx = {}) {
    report.violations.push_back({std::move(what), std::move(idx)});
  };
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };

  const auto S = instance.providers();
  const auto M = instance.nodes();
  const auto R = instance.resource_types();
  const auto C = instance.cells();
  if (S == 0) add("no providers");
  if (M == 0) add("no edge nodes");
  if (R == 0) add("no resource types");
  if (C == 0) add("no cells");

  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t r = 0; r < R; ++r) {
      if (!positive(instance.mec_capacity(m, r))) add("non-positive mec_capacity", {m, r});
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    if (!positive(instance.ran_capacity[c])) add("non-positive ran_capacity", {c});
  }
  for (std::size_t s = 0; s < S; ++s) {
    if (!positive(instance.budgets[s])) add("non-positive budget", {s});
  }

  bool mec_shape = instance.mec_demand.rows() == S && instance.mec_demand.cols() == R;
  bool ran_shape = instance.ran_demand.rows() == S && instance.ran_demand.cols() == C;
  if (!mec_shape) add("mec_demand shape mismatch", {instance.mec_demand.rows(), instance.mec_demand.cols()});
  if (!ran_shape) add("ran_demand shape mismatch", {instance.ran_demand.rows(), instance.ran_demand.cols()});
  if (mec_shape) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t r = 0; r < R; ++r) {
        if (!positive(instance.mec_demand(s, r))) add("non-positive mec_demand", {s, r});
      }
    }
  }
  if (ran_shape) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t c = 0; c < C; ++c) {
        if (!positive(instance.ran_demand(s, c))) add("non-positive ran_demand", {s, c});
      }
    }
  }

  auto check_names = [&](const std::vector<std::string>& names, std::size_t n, const char* what) {
    if (!names.empty() && names.size() != n) add(std::string(what) + " count mismatch", {names.size(), n});
  };
  check_names(instance.resource_names, R, "resource_names");
  check_names(instance.node_names, M, "node_names");
  check_names(instance.cell_names, C, "cell_names");
  check_names(instance.provider_names, S, "provider_names");
  return report;
}

FeasibilityGap feasibility_gap(const MarketInstance& instance, const Allocation& allocation) {
  if (!allocation.matches(instance)) {
    throw InstanceError("allocation shape does not match the instance");
  }
  FeasibilityGap gap;
  for (double v : allocation.mec_values()) gap.negativity = std::max(gap.negativity, -v);
  for (double v : allocation.ran_values()) gap.negativity = std::max(gap.negativity, -v);
  for (std::size_t m = 0; m < instance.nodes(); ++m) {
    for (std::size_t r = 0; r < instance.resource_types(); ++r) {
      double used = 0.0;
      for (std::size_t s = 0; s < instance.providers(); ++s) used += allocation.mec(s, m, r);
      gap.capacity_excess = std::max(gap.capacity_excess, used - instance.mec_capacity(m, r));
    }
  }
  for (std::size_t c = 0; c < instance.cells(); ++c) {
    double used = 0.0;
    for (std::size_t s = 0; s < instance.providers(); ++s) used += allocation.ran(s, c);
    gap.capacity_excess = std::max(gap.capacity_excess, used - instance.ran_capacity[c]);
  }
  return gap;
}

}  // namespace edgemarket

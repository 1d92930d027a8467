#include "edgemarket/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace edgemarket::io {

namespace {

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round12(v);
}

Json numbers(std::span<const double> values) {
  Json out = Json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

Json rows(const Matrix& m) {
  Json out = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(numbers(m.row(r)));
  return out;
}

std::vector<double> read_numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw FormatError(where + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(where + " is missing \"" + key + "\"");
  return *it;
}

double read_number(const Json& obj, const char* key, const std::string& where) {
  const Json& v = member(obj, key, where);
  if (!v.is_number()) throw FormatError(where + "." + key + " must be a number");
  return v.get<double>();
}

std::string optional_name(const Json& obj) {
  auto it = obj.find("name");
  if (it == obj.end()) return {};
  if (!it->is_string()) throw FormatError("\"name\" must be a string");
  return it->get<std::string>();
}

void reject_unknown(const Json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw FormatError("unknown key \"" + key + "\" in " + where);
    }
  }
}

// Count read from an optional key; rejects negative and fractional values.
std::size_t read_count(const Json& obj, const char* key, std::size_t fallback,
                       const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw FormatError(where + "." + key + " must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

double read_optional(const Json& obj, const char* key, double fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw FormatError(where + "." + key + " must be a number");
  return it->get<double>();
}

std::string normalised(const std::string& name) {
  std::string out;
  for (unsigned char c : name) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

ServiceTemplate template_from_json(const Json& j) {
  const std::string where = "template";
  reject_unknown(j, {"name", "cpu", "ram", "ran", "budget"}, where);
  ServiceTemplate t;
  t.name = optional_name(j);
  if (t.name.empty()) throw FormatError("every template needs a name");
  t.cpu_per_job = read_number(j, "cpu", where + " " + t.name);
  t.ram_per_job = read_number(j, "ram", where + " " + t.name);
  t.ran_per_job = read_number(j, "ran", where + " " + t.name);
  t.budget = read_number(j, "budget", where + " " + t.name);
  return t;
}

}  // namespace

double round12(double value) noexcept {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, 11);
  double out = value;
  std::from_chars(buf, res.ptr, out);
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, round12(value));
  return {buf, res.ptr};
}

Json to_json(const MarketInstance& instance) {
  instance.check_dimensions();
  auto name_or = [](const std::vector<std::string>& names, std::size_t i, const char* prefix) {
    return i < names.size() ? names[i] : prefix + std::to_string(i + 1);
  };
  Json doc;
  doc["units"] = units_note;
  Json resources = Json::array();
  for (std::size_t r = 0; r < instance.resource_types(); ++r) {
    resources.push_back(name_or(instance.resource_names, r, "resource-"));
  }
  doc["resources"] = resources;

  // Full precision here: no rounding.
  Json nodes = Json::array();
  for (std::size_t m = 0; m < instance.nodes(); ++m) {
    auto row = instance.mec_capacity.row(m);
    nodes.push_back({{"name", name_or(instance.node_names, m, "node-")},
                     {"capacity", std::vector<double>(row.begin(), row.end())}});
  }
  doc["nodes"] = nodes;
  Json cells = Json::array();
  for (std::size_t c = 0; c < instance.cells(); ++c) {
    cells.push_back({{"name", name_or(instance.cell_names, c, "cell-")},
                     {"bandwidth", instance.ran_capacity[c]}});
  }
  doc["cells"] = cells;
  Json providers = Json::array();
  for (std::size_t s = 0; s < instance.providers(); ++s) {
    auto mec = instance.mec_demand.row(s);
    auto ran = instance.ran_demand.row(s);
    providers.push_back({{"name", name_or(instance.provider_names, s, "provider-")},
                         {"budget", instance.budgets[s]},
                         {"mec_demand", std::vector<double>(mec.begin(), mec.end())},
                         {"ran_demand", std::vector<double>(ran.begin(), ran.end())}});
  }
  doc["providers"] = providers;
  return doc;
}

MarketInstance instance_from_json(const Json& doc) {
  reject_unknown(doc, {"units", "resources", "nodes", "cells", "providers"}, "instance");
  MarketInstance in;
  const Json& nodes = member(doc, "nodes", "instance");
  const Json& cells = member(doc, "cells", "instance");
  const Json& providers = member(doc, "providers", "instance");
  if (!nodes.is_array() || !cells.is_array() || !providers.is_array()) {
    throw FormatError("nodes, cells and providers must be arrays");
  }

  std::size_t R = 0;
  if (auto it = doc.find("resources"); it != doc.end()) {
    if (!it->is_array()) throw FormatError("resources must be an array of names");
    for (const auto& name : *it) {
      if (!name.is_string()) throw FormatError("resources must be an array of names");
      in.resource_names.push_back(name.get<std::string>());
    }
    R = in.resource_names.size();
  } else if (!nodes.empty()) {
    R = member(nodes.front(), "capacity", "node 1").size();
  }

  in.mec_capacity = Matrix(nodes.size(), R);
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    const std::string where = "node " + std::to_string(m + 1);
    reject_unknown(nodes[m], {"name", "capacity"}, where);
    const auto cap = read_numbers(member(nodes[m], "capacity", where), where + ".capacity");
    if (cap.size() != R) {
      throw FormatError(where + " lists " + std::to_string(cap.size()) + " capacities, expected " +
                        std::to_string(R));
    }
    std::copy(cap.begin(), cap.end(), in.mec_capacity.row(m).begin());
    in.node_names.push_back(optional_name(nodes[m]));
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::string where = "cell " + std::to_string(c + 1);
    reject_unknown(cells[c], {"name", "bandwidth"}, where);
    in.ran_capacity.push_back(read_number(cells[c], "bandwidth", where));
    in.cell_names.push_back(optional_name(cells[c]));
  }

  const std::size_t C = cells.size();
  in.mec_demand = Matrix(providers.size(), R);
  in.ran_demand = Matrix(providers.size(), C);
  for (std::size_t s = 0; s < providers.size(); ++s) {
    const std::string where = "provider " + std::to_string(s + 1);
    const Json& p = providers[s];
    reject_unknown(p, {"name", "budget", "mec_demand", "ran_demand"}, where);
    in.budgets.push_back(read_number(p, "budget", where));
    const auto mec = read_numbers(member(p, "mec_demand", where), where + ".mec_demand");
    if (mec.size() != R) throw FormatError(where + ".mec_demand needs one entry per resource");
    std::copy(mec.begin(), mec.end(), in.mec_demand.row(s).begin());
    const Json& ran = member(p, "ran_demand", where);
    if (ran.is_number()) {
      std::fill(in.ran_demand.row(s).begin(), in.ran_demand.row(s).end(), ran.get<double>());
    } else {
      const auto values = read_numbers(ran, where + ".ran_demand");
      if (values.size() != C) throw FormatError(where + ".ran_demand needs one entry per cell");
      std::copy(values.begin(), values.end(), in.ran_demand.row(s).begin());
    }
    in.provider_names.push_back(optional_name(p));
  }

  // Drop label lists that carry no information.
  for (auto* names : {&in.node_names, &in.cell_names, &in.provider_names}) {
    if (std::all_of(names->begin(), names->end(), [](const auto& n) { return n.empty(); })) {
      names->clear();
    }
  }
  try {
    in.check_dimensions();
  } catch (const InstanceError& e) {
    throw FormatError(e.what());
  }
  return in;
}

Json to_json(const Allocation& allocation) {
  Json mec = Json::array();
  Json ran = Json::array();
  for (std::size_t s = 0; s < allocation.providers(); ++s) {
    Json per_node = Json::array();
    for (std::size_t m = 0; m < allocation.nodes(); ++m) {
      Json row = Json::array();
      for (std::size_t r = 0; r < allocation.resource_types(); ++r) {
        row.push_back(number(allocation.mec(s, m, r)));
      }
      per_node.push_back(row);
    }
    mec.push_back(per_node);
    Json cells = Json::array();
    for (std::size_t c = 0; c < allocation.cells(); ++c) cells.push_back(number(allocation.ran(s, c)));
    ran.push_back(cells);
  }
  return {{"mec", mec}, {"ran", ran}};
}

Json to_json(const Prices& prices) {
  return {{"mec", rows(prices.mec)}, {"ran", numbers(prices.ran)}};
}

Json to_json(const MechanismResult& result) {
  Json doc;
  doc["mechanism"] = std::string(to_string(result.mechanism));
  doc["status"] = std::string(to_string(result.status));
  doc["iterations"] = result.iterations;
  doc["social_welfare"] = number(result.social_welfare);
  doc["objective_value"] = number(result.objective_value);
  doc["utilities"] = numbers(result.utilities);
  doc["allocation"] = to_json(result.allocation);
  if (result.prices) doc["prices"] = to_json(*result.prices);
  return doc;
}

Json to_json(const EquilibriumSolution& solution) {
  Json doc;
  doc["status"] = std::string(to_string(solution.solver_status));
  doc["iterations"] = solution.iterations;
  doc["objective_value"] = number(solution.objective_value);
  doc["solver_residual"] = number(solution.solver_residual);
  doc["duality_gap"] = number(solution.duality_gap);
  doc["utilities"] = numbers(solution.utilities);
  doc["job_split"] = rows(solution.job_split);
  doc["mec_prices"] = rows(solution.mec_prices);
  doc["ran_prices"] = numbers(solution.ran_prices);
  doc["allocation"] = to_json(solution.allocation);
  return doc;
}

Json to_json(const Certificate& certificate) {
  Json doc;
  doc["name"] = certificate.name;
  doc["applicable"] = certificate.applicable;
  doc["passed"] = certificate.passed();
  doc["max_residual"] = number(certificate.max_residual());
  if (!certificate.note.empty()) doc["note"] = certificate.note;
  Json checks = Json::array();
  for (const auto& c : certificate.checks) {
    checks.push_back({{"name", c.name},
                      {"residual", number(c.residual)},
                      {"tolerance", number(c.tolerance)},
                      {"passed", c.passed}});
  }
  doc["checks"] = checks;
  return doc;
}

Json to_json(const KktResiduals& k) {
  return {{"stationarity_utility", number(k.stationarity_utility)},
          {"stationarity_price", number(k.stationarity_price)},
          {"stationarity_cell", number(k.stationarity_cell)},
          {"stationarity_node", number(k.stationarity_node)},
          {"complementarity_capacity", number(k.complementarity_capacity)},
          {"complementarity_sign", number(k.complementarity_sign)},
          {"complementarity_linking", number(k.complementarity_linking)},
          {"dual_feasibility", number(k.dual_feasibility)},
          {"primal_feasibility", number(k.primal_feasibility)},
          {"max_abs", number(k.max_abs)}};
}

Json to_json(const BangPerBuckReport& report) {
  return {{"node_cost", rows(report.node_cost)},
          {"cell_cost", rows(report.cell_cost)},
          {"min_job_cost", numbers(report.min_job_cost)},
          {"budget_per_utility", numbers(report.budget_per_utility)}};
}

Json to_json(const ServiceTemplate& t) {
  return {{"name", t.name},
          {"cpu", t.cpu_per_job},
          {"ram", t.ram_per_job},
          {"ran", t.ran_per_job},
          {"budget", t.budget}};
}

Json to_json(const DeploymentTemplate& d) {
  Json doc;
  doc["large_cells"] = {{"count", d.large_cells.count}, {"bandwidth_mhz", d.large_cells.bandwidth_mhz}};
  doc["small_cells"] = {{"count", d.small_cells.count}, {"bandwidth_mhz", d.small_cells.bandwidth_mhz}};
  doc["cpu_nodes"] = {
      {"count", d.cpu_nodes.count}, {"cores", d.cpu_nodes.cores}, {"ram_gb", d.cpu_nodes.ram_gb}};
  doc["ram_nodes"] = {
      {"count", d.ram_nodes.count}, {"cores", d.ram_nodes.cores}, {"ram_gb", d.ram_nodes.ram_gb}};
  doc["providers"] = d.provider_count;
  doc["noise_relative"] = d.noise_relative;
  doc["noise_floor"] = d.noise_floor;
  doc["per_cell_ran_noise"] = d.per_cell_ran_noise;
  doc["seed"] = d.seed;
  Json templates = Json::array();
  for (const auto& t : d.catalogue) templates.push_back(to_json(t));
  doc["templates"] = templates;
  return doc;
}

DeploymentTemplate deployment_from_json(const Json& doc) {
  reject_unknown(doc,
                 {"large_cells", "small_cells", "cpu_nodes", "ram_nodes", "providers",
                  "noise_relative", "noise_floor", "per_cell_ran_noise", "seed", "templates"},
                 "deployment");
  DeploymentTemplate d;
  for (auto [key, group] : {std::pair{"large_cells", &d.large_cells},
                            std::pair{"small_cells", &d.small_cells}}) {
    auto it = doc.find(key);
    if (it == doc.end()) continue;
    const std::string where = std::string("deployment.") + key;
    reject_unknown(*it, {"count", "bandwidth_mhz"}, where);
    group->count = read_count(*it, "count", group->count, where);
    group->bandwidth_mhz = read_optional(*it, "bandwidth_mhz", group->bandwidth_mhz, where);
  }
  for (auto [key, group] :
       {std::pair{"cpu_nodes", &d.cpu_nodes}, std::pair{"ram_nodes", &d.ram_nodes}}) {
    auto it = doc.find(key);
    if (it == doc.end()) continue;
    const std::string where = std::string("deployment.") + key;
    reject_unknown(*it, {"count", "cores", "ram_gb"}, where);
    group->count = read_count(*it, "count", group->count, where);
    group->cores = read_optional(*it, "cores", group->cores, where);
    group->ram_gb = read_optional(*it, "ram_gb", group->ram_gb, where);
  }
  d.provider_count = read_count(doc, "providers", d.provider_count, "deployment");
  d.noise_relative = read_optional(doc, "noise_relative", d.noise_relative, "deployment");
  d.noise_floor = read_optional(doc, "noise_floor", d.noise_floor, "deployment");
  if (auto it = doc.find("per_cell_ran_noise"); it != doc.end()) {
    if (!it->is_boolean()) throw FormatError("deployment.per_cell_ran_noise must be true or false");
    d.per_cell_ran_noise = it->get<bool>();
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) throw FormatError("deployment.seed must be a non-negative integer");
    d.seed = it->get<std::uint64_t>();
  }
  if (auto it = doc.find("templates"); it != doc.end()) {
    if (!it->is_array()) throw FormatError("deployment.templates must be an array");
    d.catalogue.clear();
    std::set<std::string> seen;
    for (const auto& t : *it) {
      d.catalogue.push_back(template_from_json(t));
      if (!seen.insert(normalised(d.catalogue.back().name)).second) {
        throw FormatError("template \"" + d.catalogue.back().name + "\" is defined twice");
      }
    }
  }
  return d;
}

ServiceTemplate find_template(const std::vector<ServiceTemplate>& catalogue,
                              const std::string& name) {
  const std::string key = normalised(name);
  for (const auto& t : catalogue) {
    if (normalised(t.name) == key) return t;
  }
  throw FormatError("unknown service template \"" + name + "\"");
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

MarketInstance read_instance(const std::filesystem::path& path) {
  const Json doc = read_json(path);
  try {
    return instance_from_json(doc);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_instance(const std::filesystem::path& path, const MarketInstance& instance) {
  write_json(path, to_json(instance));
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace edgemarket::io

#include "lvgsa/problem.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lvgsa/latent.hpp"

namespace lvgsa {

std::vector<FactorGroup> singleton_groups(const std::vector<std::string>& names) {
  std::vector<FactorGroup> groups;
  groups.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) groups.push_back({names[i], {i}});
  return groups;
}

void validate_groups(std::size_t k, const std::vector<FactorGroup>& groups) {
  std::vector<int> seen(k, 0);
  for (const auto& g : groups) {
    if (g.columns.empty()) throw std::invalid_argument("empty factor group '" + g.name + "'");
    for (auto c : g.columns) {
      if (c >= k) throw std::invalid_argument("group '" + g.name + "' references a column out of range");
      if (seen[c]++) throw std::invalid_argument("factor groups overlap at column " + std::to_string(c));
    }
  }
  for (std::size_t c = 0; c < k; ++c)
    if (!seen[c]) throw std::invalid_argument("factor groups leave column " + std::to_string(c) + " uncovered");
}

GsaProblem independent_problem(const CorrelatedModel& model) {
  return {model.name, model.factors, singleton_groups(model.factors), model.evaluate};
}

GsaProblem grouped_problem(const CorrelatedModel& model) {
  if (!(std::fabs(model.rho) < 1.0)) throw std::domain_error("grouped pair requires |rho| < 1");
  GsaProblem p;
  p.model = model.name;
  p.coordinates = model.factors;
  const auto i = model.pair_first;
  const auto j = model.pair_second;
  for (std::size_t c = 0; c < model.factors.size(); ++c) {
    if (c == j) continue;
    if (c == i) {
      p.groups.push_back({model.group_name.empty() ? model.factors[i] + "+" + model.factors[j] : model.group_name,
                          {i, j}});
    } else {
      p.groups.push_back({model.factors[c], {c}});
    }
  }
  const double rho = model.rho;
  const double cross = std::sqrt(1.0 - rho * rho);
  p.evaluate = [f = model.evaluate, i, j, rho, cross](std::span<const double> z) {
    std::vector<double> x(z.begin(), z.end());
    x[j] = rho * z[i] + cross * z[j];
    return f(x);
  };
  return p;
}

GsaProblem latent_problem(const CorrelatedModel& model) {
  const LatentDecomposition d = decompose(model.rho);
  GsaProblem p;
  p.model = model.name;
  p.coordinates = model.factors;
  const auto i = model.pair_first;
  const auto j = model.pair_second;
  p.coordinates[i] = model.unique_first_name.empty() ? "eps_" + model.factors[i] : model.unique_first_name;
  p.coordinates[j] = model.unique_second_name.empty() ? "eps_" + model.factors[j] : model.unique_second_name;
  p.coordinates.push_back(model.latent_name);
  p.groups = singleton_groups(p.coordinates);
  const std::size_t eta = model.factors.size();
  p.evaluate = [f = model.evaluate, i, j, eta, d](std::span<const double> z) {
    std::vector<double> x(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(eta));
    const auto [x1, x2] = reconstruct_pair_standard(z[eta], z[i], z[j], d);
    x[i] = x1;
    x[j] = x2;
    return f(x);
  };
  return p;
}

}  // namespace lvgsa

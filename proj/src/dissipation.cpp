#include "fbdiss/dissipation.hpp"

#include <algorithm>
#include <cmath>

#include "fbdiss/errors.hpp"

namespace fbdiss {

namespace {

std::string chain_prefix(std::string_view name) {
  const auto pos = name.find(':');
  return std::string(pos == std::string_view::npos ? name : name.substr(0, pos));
}

}  // namespace

DissipationChannel make_channel(const LatticeChain& chain, int q_sites, int a, double gamma) {
  if (a != 1 && a != -1) throw InvalidParam("channel phase parameter a must be +1 or -1");
  if (q_sites < 1) throw InvalidParam("channel offset q_sites must be >= 1");
  if (gamma < 0.0) throw InvalidParam("channel rate gamma must be >= 0");
  DissipationChannel ch;
  ch.chain = chain.name;
  ch.q_sites = q_sites;
  ch.a = a;
  ch.gamma = gamma;
  ch.sites_per_cell = chain.sites_per_cell;
  const int n = static_cast<int>(chain.sites.size());
  if (chain.periodic) {
    for (int i = 0; i < n; ++i)
      ch.site_pairs.emplace_back(chain.sites[i], chain.sites[(i + q_sites) % n]);
  } else {
    for (int i = 0; i + q_sites < n; ++i)
      ch.site_pairs.emplace_back(chain.sites[i], chain.sites[i + q_sites]);
  }
  return ch;
}

std::vector<DissipationChannel> channels_from_unit_cells(
    const SingleParticleSystem& system, int kappa, int a,
    const std::map<std::string, double>& gamma_per_chain, std::string_view direction) {
  if (kappa < 1) throw InvalidParam("kappa must be >= 1");
  int u = 0;
  try {
    u = cls_class_u(system.model.kind());
  } catch (const NoExactCls&) {
    throw UnknownChainStructure("model " + to_string(system.model.kind()) +
                                " has no unit-cell CLS structure; specify q_sites directly");
  }
  const auto chains = lattice_chains(system, direction);
  std::vector<DissipationChannel> out;
  out.reserve(chains.size());
  for (const auto& chain : chains) {
    double gamma = 0.0;
    if (auto it = gamma_per_chain.find(chain.name); it != gamma_per_chain.end())
      gamma = it->second;
    else if (auto pit = gamma_per_chain.find(chain_prefix(chain.name));
             pit != gamma_per_chain.end())
      gamma = pit->second;
    out.push_back(make_channel(chain, kappa * u * chain.sites_per_cell, a, gamma));
  }
  return out;
}

std::vector<JumpOperator> jump_operators(const SingleParticleSystem& system,
                                         std::span<const DissipationChannel> channels) {
  const int d = system.dim();
  std::vector<JumpOperator> out;
  for (const auto& ch : channels) {
    if (ch.gamma == 0.0) continue;  // materialized channel, no operators
    for (const auto& [i, j] : ch.site_pairs) {
      if (i < 0 || i >= d || j < 0 || j >= d)
        throw IndexOutOfRange("jump operator site pair outside the lattice");
      JumpOperator op;
      op.v = Vector::Zero(d);
      op.w = Vector::Zero(d);
      op.v(i) = 1.0;
      op.v(j) = double(ch.a);
      op.w(i) = 1.0;
      op.w(j) = -double(ch.a);
      op.gamma = ch.gamma;
      op.site_i = i;
      op.site_j = j;
      op.a = ch.a;
      out.push_back(std::move(op));
    }
  }
  return out;
}

ConditionReport validate_fb_conditions(const SingleParticleSystem& system,
                                       std::span<const DissipationChannel> channels) {
  ConditionReport report;
  int u = 0;
  try {
    u = cls_class_u(system.model.kind());
  } catch (const NoExactCls&) {
    report.violations.push_back("model " + to_string(system.model.kind()) +
                                " has no exact CLS class U");
    report.satisfied = false;
    return report;
  }

  std::optional<int> q_cells_common;
  std::optional<int> a_common;
  for (const auto& ch : channels) {
    if (ch.gamma <= 0.0) continue;
    if (ch.q_sites % ch.sites_per_cell != 0) {
      report.violations.push_back("chain " + ch.chain + ": q=" + std::to_string(ch.q_sites) +
                                  " sites is not a whole number of unit cells");
      continue;
    }
    const int q_cells = ch.q_sites / ch.sites_per_cell;
    if (q_cells % u != 0)
      report.violations.push_back("chain " + ch.chain + ": q=" + std::to_string(q_cells) +
                                  " cells is not a multiple of U=" + std::to_string(u));
    if (q_cells_common && *q_cells_common != q_cells)
      report.violations.push_back("operators differ across chains: q=" +
                                  std::to_string(q_cells) + " cells on " + ch.chain +
                                  " vs q=" + std::to_string(*q_cells_common) + " cells");
    if (a_common && *a_common != ch.a)
      report.violations.push_back("operators differ across chains: a=" + std::to_string(ch.a) +
                                  " on " + ch.chain + " vs a=" + std::to_string(*a_common));
    if (!q_cells_common) q_cells_common = q_cells;
    if (!a_common) a_common = ch.a;
  }
  report.satisfied = report.violations.empty();
  if (report.satisfied && q_cells_common && *q_cells_common % u == 0)
    report.kappa = *q_cells_common / u;
  return report;
}

Vector dark_state(const SingleParticleSystem& system, int a, int kappa, int offset,
                  std::string_view direction) {
  if (a != 1 && a != -1) throw InvalidParam("dark state needs a = +1 or -1");
  if (kappa < 1) throw InvalidParam("kappa must be >= 1");
  if (offset < 0 || offset >= kappa) throw InvalidParam("offset must lie in 0..kappa-1");
  const auto cls = cls_states(system);
  const int d = system.dim();
  Vector state = Vector::Zero(d);

  if (system.model.kind() == ModelKind::Lieb2D) {
    if (kappa != 1) throw InvalidParam("2D Lieb dark states are constructed for kappa = 1");
    const int u = cls_class_u(ModelKind::Lieb2D);
    for (const auto& c : cls) {
      const int along = (direction == "y") ? c.anchor[1] / u : c.anchor[0] / u;
      const double coeff = (a == 1) ? 1.0 : ((along % 2 == 0) ? 1.0 : -1.0);
      state += coeff * c.amplitudes;
    }
  } else {
    int t = 0;
    for (size_t idx = offset; idx < cls.size(); idx += kappa, ++t) {
      const double coeff = (a == 1) ? 1.0 : ((t % 2 == 0) ? 1.0 : -1.0);
      state += coeff * cls[idx].amplitudes;
    }
    if (t == 0) throw InvalidParam("no CLS selected: offset/kappa exceed the CLS count");
  }
  const double norm = state.norm();
  if (norm < 1e-12) throw NumericalFailure("dark-state superposition vanished");
  return state / norm;
}

double verify_dark(const Vector& state, std::span<const JumpOperator> jumps) {
  double max_residual = 0.0;
  for (const auto& op : jumps)
    max_residual = std::max(max_residual, op.apply(state).norm());
  return max_residual;
}

}  // namespace fbdiss

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "noir/network.hpp"
#include "noir/phase.hpp"
#include "noir/types.hpp"

namespace noir {

/// Release probabilities and turning ratios. `release[g-1]` is the fraction
/// of element g's density discharged per unit time when unobstructed;
/// `split[g-1]` is aligned with net.out_neighbors(g) and distributes that
/// discharge over the downstream elements.
template <class Scalar>
struct TendencyConfig {
  Vec<Scalar> release;
  std::vector<std::vector<Scalar>> split;
};

template <class Scalar>
TendencyConfig<Scalar> default_tendency(const Network& net, Scalar interior_release = Scalar(0.8)) {
  TendencyConfig<Scalar> t;
  t.release.resize(net.size());
  t.split.resize(net.size());
  for (int g = 1; g <= net.size(); ++g) {
    t.release[g - 1] = net.klass(g) == ElementClass::Interior ? interior_release : Scalar(1);
    const auto& outs = net.out_neighbors(g);
    if (!outs.empty())
      t.split[g - 1].assign(outs.size(), Scalar(1) / static_cast<Scalar>(outs.size()));
  }
  return t;
}

/// Checks the structural constraints: releases in [0, 1] and exactly 1 on
/// inlets and outlets; split rows sized to the out-neighbor lists,
/// nonnegative, and summing to 1 wherever the release is positive.
template <class Scalar>
void validate_tendency(const Network& net, const TendencyConfig<Scalar>& t,
                       Scalar tol = Scalar(1e-12)) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (t.release.size() != net.size() || static_cast<int>(t.split.size()) != net.size())
    fail("tendency arrays must cover every element");
  for (int g = 1; g <= net.size(); ++g) {
    const Scalar p = t.release[g - 1];
    const std::string el = "element " + std::to_string(net.local_of_global(g));
    if (!(p >= Scalar(0) && p <= Scalar(1))) fail("release outside [0,1] on " + el);
    if (net.klass(g) != ElementClass::Interior && p != Scalar(1))
      fail("boundary elements must release at unit rate, " + el);
    const auto& outs = net.out_neighbors(g);
    const auto& q = t.split[g - 1];
    if (q.size() != outs.size()) fail("split row does not match out-degree on " + el);
    Scalar sum = 0;
    for (Scalar v : q) {
      if (v < Scalar(0)) fail("negative split ratio on " + el);
      sum += v;
    }
    if (p > Scalar(0) && !outs.empty() && std::abs(sum - Scalar(1)) > tol)
      fail("split ratios must sum to 1 on " + el);
    if (p > Scalar(0) && outs.empty() && net.klass(g) != ElementClass::Outlet)
      fail("releasing element with nowhere to send flow, " + el);
  }
}

/// Transition structure for one joint phase: the full N x N column-stochastic
/// map, its restriction to non-outlet elements, and the continuous-time
/// generator (reduced map minus identity).
template <class Scalar>
struct PhaseMatrices {
  Mat<Scalar> full;
  Mat<Scalar> reduced;
  Mat<Scalar> generator;
};

namespace detail {

/// Column for source j: 1 - p on the diagonal, q * p on each downstream row.
template <class Scalar>
void fill_columns(const Network& net, const TendencyConfig<Scalar>& t,
                  const std::vector<std::uint8_t>& gated, Mat<Scalar>& P) {
  const int n = net.size();
  P.setZero(n, n);
  for (int j = 1; j <= n; ++j) {
    const Scalar p = gated[j] ? Scalar(0) : t.release[j - 1];
    P(j - 1, j - 1) = Scalar(1) - p;
    if (p == Scalar(0)) continue;
    const auto& outs = net.out_neighbors(j);
    for (std::size_t a = 0; a < outs.size(); ++a)
      P(outs[a] - 1, j - 1) += t.split[j - 1][a] * p;
  }
}

template <class Scalar>
Mat<Scalar> drop_outlets(const Network& net, const Mat<Scalar>& full) {
  const int r = net.reduced_size();
  Mat<Scalar> out(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      out(i, j) = full(net.global_of_reduced(i) - 1, net.global_of_reduced(j) - 1);
  return out;
}

}  // namespace detail

/// Assembles the transition matrices for one joint phase. `gated` is the
/// red mask from active_gating / gating_for_phases (size net.size() + 1).
/// A mask that blocks an inlet is rejected: inlets must always admit demand.
template <class Scalar>
PhaseMatrices<Scalar> assemble_phase(const Network& net, const TendencyConfig<Scalar>& t,
                                     const std::vector<std::uint8_t>& gated) {
  if (static_cast<int>(gated.size()) != net.size() + 1)
    throw std::invalid_argument("gating mask must have size N + 1");
  for (int g = 1; g <= net.num_inlets(); ++g)
    if (gated[g])
      throw std::invalid_argument("gating mask blocks inlet element " +
                                  std::to_string(net.local_of_global(g)));
  PhaseMatrices<Scalar> pm;
  detail::fill_columns(net, t, gated, pm.full);
  pm.reduced = detail::drop_outlets(net, pm.full);
  pm.generator = pm.reduced;
  pm.generator.diagonal().array() -= Scalar(1);
  return pm;
}

/// Phase-averaged reduced dynamics: `discharge[r]` is the duty-cycle-scaled
/// release of reduced element r, and `generator` the matching relaxation of
/// the per-phase generators. Fails if any retained element ends up with zero
/// average discharge, since several derived maps divide by it.
template <class Scalar>
struct AverageDynamics {
  Mat<Scalar> generator;
  Vec<Scalar> discharge;
};

template <class Scalar>
Vec<Scalar> average_release(const Network& net, const TendencyConfig<Scalar>& t,
                            const PhaseTable& table) {
  Vec<Scalar> p_bar = t.release;
  for (int g = 1; g <= net.size(); ++g) {
    const int node = net.gate_intersection(g);
    if (node == 0) continue;
    const int k = table.signal_index(node);
    if (k < 0) continue;
    const int m = static_cast<int>(table.signal(k).cycle.size());
    const int greens = table.green_count(k, net.road_of(g));
    p_bar[g - 1] *= static_cast<Scalar>(greens) / static_cast<Scalar>(m);
  }
  return p_bar;
}

template <class Scalar>
AverageDynamics<Scalar> average_dynamics(const Network& net, const TendencyConfig<Scalar>& t,
                                         const PhaseTable& table) {
  TendencyConfig<Scalar> averaged = t;
  averaged.release = average_release(net, t, table);
  for (int g = 1; g <= net.num_inlets(); ++g)
    if (averaged.release[g - 1] != Scalar(1))
      throw std::invalid_argument("signal program gates inlet element " +
                                  std::to_string(net.local_of_global(g)));

  const std::vector<std::uint8_t> open(net.size() + 1, 0);
  PhaseMatrices<Scalar> pm = assemble_phase(net, averaged, open);

  AverageDynamics<Scalar> avg;
  avg.generator = std::move(pm.generator);
  avg.discharge.resize(net.reduced_size());
  for (int r = 0; r < net.reduced_size(); ++r) {
    const Scalar p = averaged.release[net.global_of_reduced(r) - 1];
    if (!(p > Scalar(0)))
      throw std::invalid_argument("average discharge vanishes on element " +
                                  std::to_string(net.local_of_global(net.global_of_reduced(r))));
    avg.discharge[r] = p;
  }
  return avg;
}

/// One forward-Euler step of the reduced balance law:
/// x' = x + dt * (generator * x + [u; 0]). Demands must be strictly positive
/// and dt in (0, 1]; under those bounds nonnegativity is preserved.
template <class Scalar>
Vec<Scalar> step_density(const Mat<Scalar>& generator, const Vec<Scalar>& x,
                         const Vec<Scalar>& u, Scalar dt) {
  if (x.size() != generator.rows())
    throw std::invalid_argument("state size does not match generator");
  if (u.size() > x.size()) throw std::invalid_argument("more demands than state entries");
  if (!(dt > Scalar(0) && dt <= Scalar(1)))
    throw std::invalid_argument("time step must lie in (0, 1]");
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (!(u[i] > Scalar(0)))
      throw std::invalid_argument("demand must be strictly positive at inlet " +
                                  std::to_string(i + 1));
  Vec<Scalar> next = x + dt * (generator * x);
  next.head(u.size()) += dt * u;
  return next;
}

/// Instantaneous outflow of each reduced element.
template <class Scalar>
Vec<Scalar> outflow_rates(const Vec<Scalar>& discharge, const Vec<Scalar>& x) {
  return discharge.cwiseProduct(x);
}

/// Sparse evaluator for the gated balance law. Walks the element graph
/// directly instead of materializing a transition matrix per phase, which
/// keeps rollouts linear in edges. step() matches
/// step_density(assemble_phase(...).generator, ...) to rounding error.
template <class Scalar>
class GatedStepper {
 public:
  GatedStepper(const Network& net, const TendencyConfig<Scalar>& t) {
    const int r = net.reduced_size();
    global_.resize(r);
    release_.resize(r);
    edges_.resize(r);
    for (int j = 0; j < r; ++j) {
      const int gj = net.global_of_reduced(j);
      global_[j] = gj;
      release_[j] = t.release[gj - 1];
      const auto& outs = net.out_neighbors(gj);
      for (std::size_t a = 0; a < outs.size(); ++a)
        edges_[j].push_back({net.reduced_index(outs[a]), t.split[gj - 1][a]});
    }
  }

  /// out = x + dt * (Q_gated * x + [u; 0]). `shed`, when given, accumulates
  /// the mass handed to outlets during this step.
  void step(const std::vector<std::uint8_t>& gated, const Vec<Scalar>& x, const Vec<Scalar>& u,
            Scalar dt, Vec<Scalar>& out, Scalar* shed = nullptr) const {
    const int r = static_cast<int>(global_.size());
    out = x;
    for (int j = 0; j < r; ++j) {
      const Scalar p = gated[global_[j]] ? Scalar(0) : release_[j];
      if (p == Scalar(0)) continue;
      const Scalar moved = dt * p * x[j];
      out[j] -= moved;
      for (const Edge& e : edges_[j]) {
        if (e.target >= 0)
          out[e.target] += e.ratio * moved;
        else if (shed)
          *shed += e.ratio * moved;
      }
    }
    out.head(u.size()) += dt * u;
  }

 private:
  struct Edge {
    int target;  // reduced index, -1 when the edge feeds an outlet
    Scalar ratio;
  };
  std::vector<int> global_;
  std::vector<Scalar> release_;
  std::vector<std::vector<Edge>> edges_;
};

/// Stability evidence for one joint phase. `abscissa` is the largest real
/// part over the generator's spectrum. The two flags are structural:
/// `inlet_connected` holds when every interior element can be reached from
/// every inlet through ungated elements, `drains` when every retained element
/// can forward mass to an outlet (or to an element already shedding mass
/// outside the retained set) through positive-rate transitions. Drainage
/// alone forces the abscissa negative; the reachability flag records whether
/// injected demand can actually occupy the whole interior.
template <class Scalar>
struct StabilityReport {
  Scalar abscissa = Scalar(0);
  bool inlet_connected = false;
  bool drains = false;
};

template <class Scalar>
StabilityReport<Scalar> stability_report(const Network& net, const TendencyConfig<Scalar>& t,
                                         const std::vector<std::uint8_t>& gated) {
  const PhaseMatrices<Scalar> pm = assemble_phase(net, t, gated);
  StabilityReport<Scalar> rep;

  Eigen::EigenSolver<Mat<Scalar>> eig(pm.generator, false);
  rep.abscissa = eig.eigenvalues().real().maxCoeff();

  rep.inlet_connected = true;
  for (int inlet = 1; inlet <= net.num_inlets() && rep.inlet_connected; ++inlet) {
    std::vector<char> seen(net.size() + 1, 0);
    std::vector<int> stack{inlet};
    seen[inlet] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      if (gated[u] || t.release[u - 1] == Scalar(0)) continue;
      for (int v : net.out_neighbors(u))
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
    }
    for (int g = net.num_inlets() + net.num_outlets() + 1; g <= net.size(); ++g)
      if (!seen[g]) {
        rep.inlet_connected = false;
        break;
      }
  }

  const int r = net.reduced_size();
  std::vector<std::vector<int>> feeders(r);
  std::vector<char> leaks(r, 0);
  for (int j = 0; j < r; ++j) {
    const int gj = net.global_of_reduced(j);
    const Scalar p = gated[gj] ? Scalar(0) : t.release[gj - 1];
    if (!(p > Scalar(0))) continue;
    const auto& outs = net.out_neighbors(gj);
    for (std::size_t a = 0; a < outs.size(); ++a) {
      if (!(t.split[gj - 1][a] > Scalar(0))) continue;
      const int ri = net.reduced_index(outs[a]);
      if (ri < 0)
        leaks[j] = 1;
      else
        feeders[ri].push_back(j);
    }
  }
  std::vector<char> drained = leaks;
  std::vector<int> stack;
  for (int j = 0; j < r; ++j)
    if (drained[j]) stack.push_back(j);
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j : feeders[i])
      if (!drained[j]) {
        drained[j] = 1;
        stack.push_back(j);
      }
  }
  rep.drains = std::all_of(drained.begin(), drained.end(), [](char c) { return c != 0; });
  return rep;
}

}  // namespace noir

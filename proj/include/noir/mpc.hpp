#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "noir/types.hpp"

namespace noir {

template <class Scalar>
struct MpcConfig {
  int horizon = 1;
  Scalar weight = Scalar(1);            // penalty on demand magnitude
  Scalar budget = Scalar(1);            // total demand placed per step
  Scalar floor_scale = Scalar(1e-9);    // per-inlet floor, as a fraction of the budget
  Scalar tolerance = Scalar(1e-10);     // first-order optimality target
  int max_iterations = 200000;
};

/// Condensed quadratic program for demand planning over a rolling horizon.
/// With x the current reduced state and U the stacked demand plan,
/// predicted states are predict * x + control * U and the objective is
/// 0.5 * U' * hessian * U + (refresh * x)' * U plus a U-independent term.
template <class Scalar>
struct MpcProblem {
  int horizon = 0;
  int inlets = 0;
  Mat<Scalar> predict;
  Mat<Scalar> control;
  Mat<Scalar> hessian;
  Mat<Scalar> refresh;
  Vec<Scalar> linear;
  Scalar step = Scalar(0);  // fixed gradient step, 1 / lambda_max(hessian)
};

template <class Scalar>
struct MpcSolution {
  Vec<Scalar> plan;
  int iterations = 0;
  Scalar residual = Scalar(0);
};

/// Raised when the solver hits its iteration cap; carries the last iterate
/// and its residual so callers can inspect how close it got.
class MpcIterationLimit : public std::runtime_error {
 public:
  MpcIterationLimit(const std::string& msg, VectorX plan, double residual)
      : std::runtime_error(msg), last_plan(std::move(plan)), last_residual(residual) {}
  VectorX last_plan;
  double last_residual;
};

/// Euclidean projection onto { w : w >= lo, sum(w) == budget }, exact via the
/// sorted-threshold construction. Requires lo * size(v) < budget.
template <class Scalar>
void project_budget_block(Eigen::Ref<Vec<Scalar>> v, Scalar budget, Scalar lo) {
  const Eigen::Index n = v.size();
  const Scalar mass = budget - lo * static_cast<Scalar>(n);
  if (!(mass > Scalar(0))) throw std::invalid_argument("floors exhaust the demand budget");
  std::vector<Scalar> z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = v[i] - lo;
  std::sort(z.begin(), z.end(), std::greater<Scalar>());
  Scalar cum = Scalar(0), theta = Scalar(0);
  for (Eigen::Index k = 0; k < n; ++k) {
    cum += z[k];
    const Scalar cand = (cum - mass) / static_cast<Scalar>(k + 1);
    if (z[k] - cand > Scalar(0)) theta = cand;
  }
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::max(v[i] - lo - theta, Scalar(0)) + lo;
}

template <class Scalar>
void project_plan(Vec<Scalar>& plan, int inlets, int horizon, const MpcConfig<Scalar>& cfg) {
  const Scalar lo = cfg.floor_scale * cfg.budget;
  for (int b = 0; b < horizon; ++b)
    project_budget_block<Scalar>(plan.segment(b * inlets, inlets), cfg.budget, lo);
}

template <class Scalar>
MpcProblem<Scalar> build_problem(const Mat<Scalar>& state_map, const Mat<Scalar>& input_map,
                                 const Vec<Scalar>& x, const MpcConfig<Scalar>& cfg) {
  if (state_map.rows() != state_map.cols())
    throw std::invalid_argument("state map must be square");
  if (input_map.rows() != state_map.rows())
    throw std::invalid_argument("input map height does not match state map");
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (!(cfg.budget > Scalar(0))) throw std::invalid_argument("budget must be positive");
  if (!(cfg.weight > Scalar(0))) throw std::invalid_argument("weight must be positive");
  if (!(cfg.floor_scale >= Scalar(0) &&
        cfg.floor_scale * static_cast<Scalar>(input_map.cols()) < Scalar(1)))
    throw std::invalid_argument("floor scale must leave the budget feasible");

  const int r = static_cast<int>(state_map.rows());
  const int n_in = static_cast<int>(input_map.cols());
  const int h = cfg.horizon;

  std::vector<Mat<Scalar>> powers(h + 1);
  powers[0] = Mat<Scalar>::Identity(r, r);
  for (int t = 1; t <= h; ++t) powers[t] = state_map * powers[t - 1];

  MpcProblem<Scalar> prob;
  prob.horizon = h;
  prob.inlets = n_in;
  prob.predict.resize(r * h, r);
  prob.control = Mat<Scalar>::Zero(r * h, n_in * h);
  for (int t = 1; t <= h; ++t) {
    prob.predict.middleRows((t - 1) * r, r) = powers[t];
    for (int j = 0; j < t; ++j)
      prob.control.block((t - 1) * r, j * n_in, r, n_in) = powers[t - 1 - j] * input_map;
  }
  prob.hessian = prob.control.transpose() * prob.control;
  prob.hessian.diagonal().array() += cfg.weight;
  prob.refresh = prob.control.transpose() * prob.predict;
  prob.linear = prob.refresh * x;

  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(prob.hessian, Eigen::EigenvaluesOnly);
  prob.step = Scalar(1) / eig.eigenvalues().maxCoeff();
  return prob;
}

template <class Scalar>
void refresh_linear(MpcProblem<Scalar>& prob, const Vec<Scalar>& x) {
  prob.linear.noalias() = prob.refresh * x;
}

/// Distance from the projected-gradient fixed point: zero exactly at the
/// constrained minimizer, so it doubles as the optimality residual.
template <class Scalar>
Scalar kkt_residual(const MpcProblem<Scalar>& prob, const MpcConfig<Scalar>& cfg,
                    const Vec<Scalar>& plan) {
  Vec<Scalar> probe = plan - (prob.hessian * plan + prob.linear);
  project_plan(probe, prob.inlets, prob.horizon, cfg);
  return (plan - probe).template lpNorm<Eigen::Infinity>();
}

/// Projected gradient descent with a fixed 1 / lambda_max step. Deterministic:
/// no line search, no randomness. Starts from `warm` (projected) when given,
/// otherwise from the uniform feasible plan.
template <class Scalar>
MpcSolution<Scalar> solve_plan(const MpcProblem<Scalar>& prob, const MpcConfig<Scalar>& cfg,
                               const std::optional<Vec<Scalar>>& warm = std::nullopt) {
  const int dim = prob.inlets * prob.horizon;
  Vec<Scalar> u;
  if (warm && warm->size() == dim) {
    u = *warm;
  } else {
    u = Vec<Scalar>::Constant(dim, cfg.budget / static_cast<Scalar>(prob.inlets));
  }
  project_plan(u, prob.inlets, prob.horizon, cfg);

  MpcSolution<Scalar> sol;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const Scalar res = kkt_residual(prob, cfg, u);
    if (res <= cfg.tolerance) {
      sol.plan = std::move(u);
      sol.iterations = it - 1;
      sol.residual = res;
      return sol;
    }
    Vec<Scalar> next = u - prob.step * (prob.hessian * u + prob.linear);
    project_plan(next, prob.inlets, prob.horizon, cfg);
    u = std::move(next);
  }
  const Scalar res = kkt_residual(prob, cfg, u);
  if (res <= cfg.tolerance) {
    sol.plan = std::move(u);
    sol.iterations = cfg.max_iterations;
    sol.residual = res;
    return sol;
  }
  throw MpcIterationLimit(
      "demand planner stopped after " + std::to_string(cfg.max_iterations) +
          " iterations with residual " + std::to_string(static_cast<double>(res)),
      u.template cast<double>(), static_cast<double>(res));
}

/// First block of the plan, rescaled so the released demand meets the budget
/// exactly despite floating-point drift in the projection.
template <class Scalar>
Vec<Scalar> actuate(const MpcSolution<Scalar>& sol, int inlets, Scalar budget) {
  Vec<Scalar> u = sol.plan.head(inlets);
  return u * (budget / u.sum());
}

}  // namespace noir

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "noir/network.hpp"
#include "noir/types.hpp"

namespace noir {

/// Coupling between potentials and outflows on the retained elements.
/// Row of an inlet: 1 on the diagonal, -1 at its unique successor. Row of an
/// interior element: out-degree on the diagonal, -1 at each retained
/// successor. Unit lower/upper structure along the flow direction keeps this
/// invertible for any network accepted by build_network.
template <class Scalar>
Mat<Scalar> conduction_matrix(const Network& net) {
  const int r = net.reduced_size();
  Mat<Scalar> L = Mat<Scalar>::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    const int g = net.global_of_reduced(i);
    const auto& outs = net.out_neighbors(g);
    L(i, i) = net.is_inlet(g) ? Scalar(1) : static_cast<Scalar>(outs.size());
    for (int h : outs) {
      const int j = net.reduced_index(h);
      if (j >= 0) L(i, j) -= Scalar(1);
    }
  }
  return L;
}

/// Symmetric diffusion weights over the element graph: each directed edge
/// u -> v with conductance kappa contributes +kappa to the two off-diagonal
/// entries and -kappa to the two diagonal entries it touches. `conductance`
/// rows are aligned with net.out_neighbors, like TendencyConfig::split.
template <class Scalar>
Mat<Scalar> stiffness_matrix(const Network& net,
                             const std::vector<std::vector<Scalar>>& conductance) {
  if (static_cast<int>(conductance.size()) != net.size())
    throw std::invalid_argument("conductance rows must cover every element");
  const int n = net.size();
  Mat<Scalar> K = Mat<Scalar>::Zero(n, n);
  for (int u = 1; u <= n; ++u) {
    const auto& outs = net.out_neighbors(u);
    if (conductance[u - 1].size() != outs.size())
      throw std::invalid_argument("conductance row does not match out-degree on element " +
                                  std::to_string(net.local_of_global(u)));
    for (std::size_t a = 0; a < outs.size(); ++a) {
      const Scalar kappa = conductance[u - 1][a];
      if (!(kappa > Scalar(0)))
        throw std::invalid_argument("conductance must be positive on element " +
                                    std::to_string(net.local_of_global(u)));
      const int v = outs[a];
      K(u - 1, v - 1) += kappa;
      K(v - 1, u - 1) += kappa;
      K(u - 1, u - 1) -= kappa;
      K(v - 1, v - 1) -= kappa;
    }
  }
  return K;
}

template <class Scalar>
Mat<Scalar> stiffness_matrix(const Network& net, Scalar kappa) {
  std::vector<std::vector<Scalar>> rows(net.size());
  for (int g = 1; g <= net.size(); ++g)
    rows[g - 1].assign(net.out_neighbors(g).size(), kappa);
  return stiffness_matrix(net, rows);
}

/// Restriction of the stiffness matrix to the retained elements.
template <class Scalar>
Mat<Scalar> grounded_stiffness(const Network& net, const Mat<Scalar>& K) {
  const int r = net.reduced_size();
  Mat<Scalar> out(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      out(i, j) = K(net.global_of_reduced(i) - 1, net.global_of_reduced(j) - 1);
  return out;
}

/// Potentials consistent with the current densities: solves L * phi = D * x
/// where D = diag(discharge). Outlets are the implicit ground at zero.
template <class Scalar>
Vec<Scalar> potentials_from_density(const Mat<Scalar>& L, const Vec<Scalar>& discharge,
                                    const Vec<Scalar>& x) {
  return Eigen::PartialPivLU<Mat<Scalar>>(L).solve(discharge.cwiseProduct(x).eval());
}

template <class Scalar>
Vec<Scalar> potentials_from_density(const Eigen::PartialPivLU<Mat<Scalar>>& lu,
                                    const Vec<Scalar>& discharge, const Vec<Scalar>& x) {
  return lu.solve(discharge.cwiseProduct(x).eval());
}

/// Drift matrix of the potential dynamics: A = L^-1 D Qbar D^-1 L, the
/// change of coordinates phi = L^-1 D x applied to the density generator.
template <class Scalar>
Mat<Scalar> coordination_matrix(const Mat<Scalar>& L, const Vec<Scalar>& discharge,
                                const Mat<Scalar>& q_bar) {
  for (Eigen::Index i = 0; i < discharge.size(); ++i)
    if (!(discharge[i] > Scalar(0)))
      throw std::invalid_argument("discharge must be positive to change coordinates");
  Mat<Scalar> rhs = discharge.asDiagonal() * q_bar * discharge.cwiseInverse().asDiagonal() * L;
  return Eigen::PartialPivLU<Mat<Scalar>>(L).solve(rhs);
}

/// Capacitance seen at each inlet: the time a unit of potential takes to
/// drain through the inlet's average discharge.
template <class Scalar>
Vec<Scalar> inlet_capacitance(const Vec<Scalar>& discharge, int inlets) {
  if (inlets > discharge.size())
    throw std::invalid_argument("more inlets than retained elements");
  return discharge.head(inlets).cwiseInverse();
}

/// Input coupling of the potential dynamics: demand u enters inlet i scaled
/// by 1 / capacitance, i.e. by the inlet's average discharge.
template <class Scalar>
Mat<Scalar> conduction_input(const Vec<Scalar>& discharge, int inlets) {
  Mat<Scalar> B = Mat<Scalar>::Zero(discharge.size(), inlets);
  for (int i = 0; i < inlets; ++i) B(i, i) = discharge[i];
  return B;
}

/// Forward-Euler step of the potential dynamics:
/// phi' = phi + dt * (A * phi + B * u).
template <class Scalar>
Vec<Scalar> conduction_step(const Mat<Scalar>& A, const Mat<Scalar>& B, const Vec<Scalar>& phi,
                            const Vec<Scalar>& u, Scalar dt) {
  if (!(dt > Scalar(0) && dt <= Scalar(1)))
    throw std::invalid_argument("time step must lie in (0, 1]");
  return phi + dt * (A * phi + B * u);
}

}  // namespace noir

#ifndef SPANTREE_MIN_NORM_HPP
#define SPANTREE_MIN_NORM_HPP

#include <Eigen/Dense>

#include <optional>

#include "spantree/types.hpp"

namespace spantree {

template <typename Scalar>
struct AffineQuadraticSolution {
  VectorX<Scalar> argument;  // minimizing u
  VectorX<Scalar> image;     // F u + g
  Scalar value = Scalar(0);  // (F u + g)^T diag(s) (F u + g)
};

/// Minimizes (F u + g)^T diag(s) (F u + g) subject to C u = d.
///
/// s may contain zeros (the objective is then a seminorm and the minimizer
/// need not be unique; the value still is). Returns nullopt when C u = d is
/// infeasible at tolerance `tol`.
template <typename Scalar>
std::optional<AffineQuadraticSolution<Scalar>> minimize_weighted_seminorm(
    const MatrixX<Scalar>& F, const VectorX<Scalar>& g, const VectorX<Scalar>& s,
    const MatrixX<Scalar>& C, const VectorX<Scalar>& d, Scalar tol) {
  const Index vars = F.cols();
  VectorX<Scalar> particular = VectorX<Scalar>::Zero(vars);
  MatrixX<Scalar> nullspace = MatrixX<Scalar>::Identity(vars, vars);

  if (vars == 0) {
    // Nothing to optimize; the system is feasible iff the constraints are
    // already satisfied at the empty argument.
    if (C.rows() > 0 &&
        d.template lpNorm<Eigen::Infinity>() > tol * (Scalar(1) + d.template lpNorm<Eigen::Infinity>()))
      return std::nullopt;
    AffineQuadraticSolution<Scalar> out;
    out.argument = particular;
    out.image = g;
    out.value = g.dot(s.asDiagonal() * g);
    return out;
  }

  if (C.rows() > 0) {
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    particular = svd.solve(d);
    const Scalar residual = (C * particular - d).template lpNorm<Eigen::Infinity>();
    const Scalar scale = Scalar(1) + d.template lpNorm<Eigen::Infinity>();
    if (residual > tol * scale) return std::nullopt;

    const Scalar cutoff =
        svd.singularValues().size() > 0
            ? svd.singularValues()(0) * Scalar(std::max<Index>(C.rows(), vars)) *
                  Eigen::NumTraits<Scalar>::epsilon()
            : Scalar(0);
    Index rank = 0;
    for (Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > cutoff) ++rank;
    nullspace = svd.matrixV().rightCols(vars - rank);
  }

  AffineQuadraticSolution<Scalar> out;
  out.argument = particular;
  if (nullspace.cols() > 0) {
    // Reduce to the unconstrained quadratic in nullspace coordinates. The
    // reduced Hessian is PSD; the pseudoinverse picks a minimizer even when
    // zero costs make it singular.
    const MatrixX<Scalar> weighted = s.asDiagonal() * (F * nullspace);
    const MatrixX<Scalar> hessian = (F * nullspace).transpose() * weighted;
    const VectorX<Scalar> rhs = -(F * nullspace).transpose() * (s.asDiagonal() * (F * particular + g));
    Eigen::JacobiSVD<MatrixX<Scalar>> hsvd(hessian, Eigen::ComputeFullU | Eigen::ComputeFullV);
    hsvd.setThreshold(Eigen::NumTraits<Scalar>::epsilon() * Scalar(hessian.rows() + 1));
    out.argument += nullspace * hsvd.solve(rhs);
  }
  out.image = F * out.argument + g;
  out.value = out.image.dot(s.asDiagonal() * out.image);
  return out;
}

}  // namespace spantree

#endif  // SPANTREE_MIN_NORM_HPP

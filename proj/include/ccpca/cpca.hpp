#pragma once

#include "ccpca/dataset.hpp"
#include "ccpca/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace ccpca {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Empirical covariance with denominator equal to the point count.
template <typename Scalar>
struct CovMatrix {
  Matrix<Scalar> values;
  Vector<Scalar> mean;  // the center that was subtracted
  Eigen::Index count = 0;
};

template <typename Scalar>
struct EigenPair {
  Scalar value{};
  Vector<Scalar> vector;
};

/// Covariance of the rows of `data` around `center`: (1/rows) * sum (x - c)(x - c)^T.
template <typename Derived, typename CenterDerived>
CovMatrix<typename Derived::Scalar> covariance(const Eigen::MatrixBase<Derived>& data,
                                               const Eigen::MatrixBase<CenterDerived>& center) {
  using Scalar = typename Derived::Scalar;
  if (data.rows() < 1) throw InputError("covariance needs at least one row");
  if (center.size() != data.cols()) throw InputError("covariance center length differs from column count");
  CovMatrix<Scalar> out;
  out.mean = center.derived().template cast<Scalar>();
  out.count = data.rows();
  const Matrix<Scalar> centered = data.rowwise() - out.mean.transpose();
  out.values = Matrix<Scalar>(centered.cols(), centered.cols());
  out.values.setZero();
  out.values.template selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  out.values = out.values.template selfadjointView<Eigen::Lower>();
  out.values /= static_cast<Scalar>(data.rows());
  return out;
}

/// Covariance around the data's own column mean.
template <typename Derived>
CovMatrix<typename Derived::Scalar> covariance(const Eigen::MatrixBase<Derived>& data) {
  if (data.rows() < 1) throw InputError("covariance needs at least one row");
  const Vector<typename Derived::Scalar> mean = data.colwise().mean().transpose();
  return covariance(data, mean);
}

/// C_target - alpha * C_background.
template <typename Scalar>
Matrix<Scalar> contrast_matrix(const CovMatrix<Scalar>& target, const CovMatrix<Scalar>& background,
                               Scalar alpha) {
  if (target.values.rows() != background.values.rows() || target.values.cols() != background.values.cols()) {
    throw InputError("contrast_matrix: dimension mismatch");
  }
  if (!(alpha >= Scalar(0))) throw InputError("contrast parameter must be non-negative");
  return target.values - alpha * background.values;
}

namespace detail {

// Flip so that the largest-magnitude entry (first one on ties) is positive.
template <typename Scalar>
void orient(Vector<Scalar>& v) {
  Eigen::Index arg = 0;
  Scalar best = Scalar(-1);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best) {
      best = std::abs(v(i));
      arg = i;
    }
  }
  if (v.size() > 0 && v(arg) < Scalar(0)) v = -v;
}

template <typename Scalar>
bool lexicographically_greater(const Vector<Scalar>& a, const Vector<Scalar>& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) > b(i);
  }
  return false;
}

}  // namespace detail

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kEigenTieTolerance = 1e-10;

/// The k algebraically largest eigenpairs of a symmetric matrix, in descending order.
/// Vectors are oriented so their largest-magnitude entry is positive; eigenvalues
/// tied within 1e-10 are ordered by lexicographically largest vector.
template <typename Derived>
std::vector<EigenPair<typename Derived::Scalar>> top_eigs(const Eigen::MatrixBase<Derived>& m, Eigen::Index k) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw InputError("top_eigs: matrix is not square");
  if (k < 1 || k > m.rows()) throw InputError("top_eigs: k must lie in [1, d]");
  const Matrix<Scalar> a = m;
  if (!a.allFinite()) throw NumericalError("top_eigs: matrix has non-finite entries");
  const Scalar scale = std::max(Scalar(1), a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > Scalar(kSymmetryTolerance) * scale) {
    throw InputError("top_eigs: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(a, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition did not converge");

  const Eigen::Index d = a.rows();
  std::vector<EigenPair<Scalar>> pairs;
  pairs.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index i = d - 1; i >= 0; --i) {
    EigenPair<Scalar> p{solver.eigenvalues()(i), solver.eigenvectors().col(i)};
    detail::orient(p.vector);
    pairs.push_back(std::move(p));
  }
  // Pairs are in descending order; reorder each run of tied eigenvalues.
  for (std::size_t begin = 0; begin < pairs.size();) {
    std::size_t end = begin + 1;
    while (end < pairs.size() && pairs[end - 1].value - pairs[end].value <= Scalar(kEigenTieTolerance)) ++end;
    if (end - begin > 1) {
      std::stable_sort(pairs.begin() + static_cast<std::ptrdiff_t>(begin),
                       pairs.begin() + static_cast<std::ptrdiff_t>(end),
                       [](const auto& x, const auto& y) { return detail::lexicographically_greater(x.vector, y.vector); });
    }
    begin = end;
  }
  pairs.resize(static_cast<std::size_t>(k));
  return pairs;
}

/// (row - center) . component for every row and component.
template <typename Derived, typename Scalar, typename CenterDerived>
Matrix<Scalar> project(const Eigen::MatrixBase<Derived>& data, const std::vector<EigenPair<Scalar>>& components,
                       const Eigen::MatrixBase<CenterDerived>& center) {
  if (center.size() != data.cols()) throw InputError("project: center length differs from column count");
  Matrix<Scalar> basis(data.cols(), static_cast<Eigen::Index>(components.size()));
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (components[c].vector.size() != data.cols()) throw InputError("project: component length differs from column count");
    basis.col(static_cast<Eigen::Index>(c)) = components[c].vector;
  }
  return (data.rowwise() - center.derived().transpose()) * basis;
}

/// A fitted contrast for one cluster: top eigenpairs of C_E - alpha * C_R and the
/// loadings of the first component.
struct ContrastResult {
  int cluster_id = 0;
  double alpha = 0.0;
  std::vector<EigenPair<double>> components;
  Eigen::VectorXd loadings;
};

/// Target-cluster membership, validated: the cluster must be non-empty and must
/// not cover the whole dataset.
std::vector<bool> cluster_mask(const EmbeddedDataset& dataset, int cluster_id);

/// The two covariances that ccPCA contrasts, both centered on the whole dataset's mean.
struct ContrastCovariances {
  CovMatrix<double> entire;
  CovMatrix<double> complement;
};

ContrastCovariances contrast_covariances(const Eigen::MatrixXd& points, const std::vector<bool>& in_cluster);

/// Fits ccPCA for one cluster: target = whole dataset E, background = E \ K, both
/// centered by E's mean. `components` is 1 or 2.
ContrastResult ccpca_fit(const EmbeddedDataset& dataset, int cluster_id, double alpha, Eigen::Index components = 2);

}  // namespace ccpca

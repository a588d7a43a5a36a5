#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <vector>

namespace blenderlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using json = nlohmann::json;

inline double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

inline double smallest_singular_value(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Orthonormal basis of the column span; columns with relative pivot below tol are dropped.
inline Mat orthonormal_basis(const Mat& cols, double tol = 1e-12) {
  Eigen::JacobiSVD<Mat> svd(cols, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int rank = 0;
  const double scale = s.size() ? s(0) : 0.0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, scale)) ++rank;
  return svd.matrixU().leftCols(rank);
}

// Orthonormal basis of the orthogonal complement of the span of an orthonormal frame.
inline Mat orthogonal_complement(const Mat& q) {
  const int c = static_cast<int>(q.rows());
  Mat p = Mat::Identity(c, c) - q * q.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(p);
  // eigenvalues ascending; the complement has eigenvalue 1
  return es.eigenvectors().rightCols(c - q.cols());
}

// Orthonormal basis of the null space of m (right kernel).
inline Mat null_space(const Mat& m, double tol = 1e-10) {
  const int n = static_cast<int>(m.cols());
  if (m.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double scale = s.size() ? std::max(1.0, s(0)) : 1.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * scale) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

inline json vec_to_json(const Vec& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

inline Vec vec_from_json(const json& j) {
  Vec v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

// Row-major nested arrays.
inline json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Mat mat_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j.at(0).size()) : 0;
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
  return m;
}

}  // namespace blenderlab

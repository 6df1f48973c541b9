#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "dpath/errors.hpp"

namespace dpath {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Topology { affine, torus };

inline const char* to_string(Topology t) { return t == Topology::affine ? "affine" : "torus"; }

/**
 * k constant vector fields on R^d or on the flat torus R^d / Z^d.
 * Column j - 1 of A is the field v_j. d = 0 is allowed on the affine side; it
 * leaves only the time constraint.
 */
struct ConstantSystem {
  int d = 0;
  int k = 0;
  Mat A;
  Topology topology = Topology::affine;

  ConstantSystem() = default;
  ConstantSystem(Mat a, Topology topo = Topology::affine)
      : d(static_cast<int>(a.rows())), k(static_cast<int>(a.cols())), A(std::move(a)), topology(topo) {
    validate();
  }

  void validate() const {
    if (k < 1) throw InvalidArgument("constant system: at least one field is required");
    if (A.rows() != d || A.cols() != k) throw InvalidArgument("constant system: matrix shape does not match d x k");
    if (topology == Topology::torus && d < 1) throw InvalidArgument("constant system: torus needs d >= 1");
    for (Eigen::Index i = 0; i < A.size(); ++i)
      if (!std::isfinite(A.data()[i])) throw InvalidArgument("constant system: non-finite field coefficient");
  }

  Vec field(int j) const { return A.col(j - 1); }

  /// The coordinate grid: v_j = e_j.
  static ConstantSystem grid(int dim, Topology topo = Topology::affine) {
    return ConstantSystem(Mat::Identity(dim, dim), topo);
  }

  /// R with the two speeds +1 and -1.
  static ConstantSystem two_speed() {
    Mat a(1, 2);
    a << 1.0, -1.0;
    return ConstantSystem(a);
  }
};

inline void check_point(const ConstantSystem& sys, const Vec& p, const char* what) {
  if (p.size() != sys.d)
    throw InvalidArgument(std::string(what) + ": expected dimension " + std::to_string(sys.d) + ", got " +
                          std::to_string(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (!std::isfinite(p[i])) throw InvalidArgument(std::string(what) + ": non-finite coordinate");
}

/// Number of singular values above tol * max(1, largest).
inline int numerical_rank(const Mat& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double cut = tol * std::max(1.0, s[0]);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > cut) ++r;
  return r;
}

}  // namespace dpath

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <utility>

#include "pkil/error.hpp"

namespace pkil {

enum class KernelKind { cosine, polynomial, gaussian };

/// Similarity function over unit-norm (or zero) representations.
/// Parameters are meaningful only for the kind that uses them.
struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  int degree = 1;      // polynomial
  double coef0 = 0.0;  // polynomial
  double sigma = 1.0;  // gaussian, > 0

  static KernelSpec cosine() { return {KernelKind::cosine, 1, 0.0, 1.0}; }
  static KernelSpec polynomial(int degree, double coef0) {
    return {KernelKind::polynomial, degree, coef0, 1.0};
  }
  static KernelSpec gaussian(double sigma = 1.0) {
    return {KernelKind::gaussian, 1, 0.0, sigma};
  }
};

std::string kernel_kind_name(KernelKind kind);
KernelKind kernel_kind_from_name(const std::string& name);

/// Validates parameter ranges for the given kind.
void validate(const KernelSpec& spec);

/// K(u, v). Inputs are unit-norm or zero vectors of equal length.
/// cosine     -> <u,v>
/// polynomial -> (<u,v> + coef0)^degree
/// gaussian   -> exp(-|u-v|^2 / (2 sigma^2)), computed from the actual
///               distance so zero vectors need no special case.
template <typename DerivedA, typename DerivedB>
double kernel(const KernelSpec& spec, const Eigen::MatrixBase<DerivedA>& u,
              const Eigen::MatrixBase<DerivedB>& v) {
  if (u.size() != v.size()) {
    throw Error("kernel: length mismatch (" + std::to_string(u.size()) +
                " vs " + std::to_string(v.size()) + ")");
  }
  switch (spec.kind) {
    case KernelKind::cosine:
      return u.dot(v);
    case KernelKind::polynomial:
      return std::pow(u.dot(v) + spec.coef0, spec.degree);
    case KernelKind::gaussian: {
      const double d2 = (u - v).squaredNorm();
      return std::exp(-d2 / (2.0 * spec.sigma * spec.sigma));
    }
  }
  throw Error("kernel: unknown kind");
}

/// Attainable output range of the kernel over unit-norm inputs,
/// as an ordered (lo, hi) pair. Thresholds are clamped to this range and
/// initialized at its midpoint.
std::pair<double, double> kernel_range(const KernelSpec& spec);

}  // namespace pkil

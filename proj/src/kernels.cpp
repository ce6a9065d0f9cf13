#include "pkil/kernels.hpp"

#include <algorithm>

namespace pkil {

std::string kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::cosine: return "cosine";
    case KernelKind::polynomial: return "polynomial";
    case KernelKind::gaussian: return "gaussian";
  }
  return "unknown";
}

KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "cosine") return KernelKind::cosine;
  if (name == "polynomial") return KernelKind::polynomial;
  if (name == "gaussian") return KernelKind::gaussian;
  throw Error("unknown kernel kind: " + name);
}

void validate(const KernelSpec& spec) {
  if (spec.kind == KernelKind::polynomial && spec.degree < 1) {
    throw Error("polynomial kernel degree must be >= 1");
  }
  if (spec.kind == KernelKind::gaussian && !(spec.sigma > 0.0)) {
    throw Error("gaussian kernel sigma must be > 0");
  }
}

std::pair<double, double> kernel_range(const KernelSpec& spec) {
  validate(spec);
  switch (spec.kind) {
    case KernelKind::cosine:
      return {-1.0, 1.0};
    case KernelKind::gaussian:
      // |u-v|^2 spans [0, 4] on the unit sphere
      return {std::exp(-2.0 / (spec.sigma * spec.sigma)), 1.0};
    case KernelKind::polynomial: {
      // (t + c)^k on t in [-1, 1]: extrema at the endpoints, plus 0 when an
      // even power crosses t = -c inside the interval.
      const double a = std::pow(spec.coef0 - 1.0, spec.degree);
      const double b = std::pow(spec.coef0 + 1.0, spec.degree);
      double lo = std::min(a, b);
      const double hi = std::max(a, b);
      if (spec.degree % 2 == 0 && spec.coef0 > -1.0 && spec.coef0 < 1.0) lo = 0.0;
      return {lo, hi};
    }
  }
  throw Error("kernel_range: unknown kind");
}

}  // namespace pkil

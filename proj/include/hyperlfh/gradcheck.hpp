#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hyperlfh/matrix.hpp"
#include "hyperlfh/params.hpp"

namespace hyperlfh {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_entry = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Central-difference check of analytic gradients.
///
/// loss_fn must re-evaluate the scalar loss from the current store contents;
/// analytic_grads[i] pairs with store.value(i). Relative error uses
/// max(|analytic|, |numeric|, 1e-8) as the denominator. 64-bit only.
inline GradCheckReport finite_diff_check(
    ParamStore<double>& store, const std::vector<Mat<double>>& analytic_grads,
    const std::function<double()>& loss_fn, double h = 1e-5) {
  GradCheckReport rep;
  for (std::size_t i = 0; i < store.count(); ++i) {
    Mat<double>& p = store.value(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double orig = p.at(k);
      p.at(k) = orig + h;
      const double fp = loss_fn();
      p.at(k) = orig - h;
      const double fm = loss_fn();
      p.at(k) = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double analytic = analytic_grads[i].at(k);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      if (rel > rep.max_rel_error) {
        rep.max_rel_error = rel;
        rep.worst_param = store.names()[i];
        rep.worst_entry = k;
        rep.analytic = analytic;
        rep.numeric = numeric;
      }
    }
  }
  return rep;
}

}  // namespace hyperlfh

#pragma once

#include <functional>
#include <vector>

#include "hyperlfh/gradcheck.hpp"
#include "hyperlfh/params.hpp"
#include "hyperlfh/tape.hpp"

namespace testutil {

using hyperlfh::Mat;
using hyperlfh::ParamStore;
using hyperlfh::Tape;
using Var = Tape<double>::Var;

/// Finite-difference check of one tape construction: `build` receives a
/// tape plus leaf vars aligned with `store` and returns a scalar loss var.
inline double fd_max_err(
    ParamStore<double>& store,
    const std::function<Var(Tape<double>&, const std::vector<Var>&)>& build,
    double h = 1e-5) {
  auto make_vars = [&](Tape<double>& t) {
    std::vector<Var> vars;
    for (std::size_t i = 0; i < store.count(); ++i) vars.push_back(t.leaf(store.value(i)));
    return vars;
  };
  Tape<double> tape;
  auto vars = make_vars(tape);
  Var loss = build(tape, vars);
  tape.backward(loss);
  std::vector<Mat<double>> grads;
  for (Var v : vars) grads.push_back(tape.grad(v));
  auto rep = hyperlfh::finite_diff_check(store, grads, [&]() {
    Tape<double> t2;
    auto v2 = make_vars(t2);
    return t2.val(build(t2, v2)).scalar();
  }, h);
  return rep.max_rel_error;
}

inline Mat<double> random_mat(std::size_t r, std::size_t c, hyperlfh::Rng& rng,
                              double lo = -1.0, double hi = 1.0) {
  Mat<double> m(r, c);
  for (std::size_t k = 0; k < m.size(); ++k) m.at(k) = rng.uniform(lo, hi);
  return m;
}

}  // namespace testutil

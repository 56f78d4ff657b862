// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#pragma once

// Every parameter struct exposes
//   template <class F> void visit(F&& f, const std::string& prefix) [const];
// calling f(name, Matrix<T>&) once per leaf array in a fixed order.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ssmtrack/core/tensor.hpp"

namespace ssmtrack {

template <class P>
using param_scalar_t = typename P::value_type;

template <class P>
std::vector<std::pair<std::string, Matrix<param_scalar_t<P>>*>> array_list(P& p, const std::string& prefix = "") {
  std::vector<std::pair<std::string, Matrix<param_scalar_t<P>>*>> out;
  p.visit([&](const std::string& name, Matrix<param_scalar_t<P>>& m) { out.emplace_back(name, &m); }, prefix);
  return out;
}

template <class P>
std::vector<std::pair<std::string, const Matrix<param_scalar_t<P>>*>> array_list(const P& p,
                                                                                 const std::string& prefix = "") {
  std::vector<std::pair<std::string, const Matrix<param_scalar_t<P>>*>> out;
  p.visit([&](const std::string& name, const Matrix<param_scalar_t<P>>& m) { out.emplace_back(name, &m); }, prefix);
  return out;
}

template <class P>
P zeros_like(const P& p) {
  P z = p;
  z.visit([](const std::string&, Matrix<param_scalar_t<P>>& m) { m.fill(0); }, "");
  return z;
}

template <class P>
std::size_t parameter_count(const P& p) {
  std::size_t n = 0;
  p.visit([&](const std::string&, const Matrix<param_scalar_t<P>>& m) { n += m.size(); }, "");
  return n;
}

template <class P>
double squared_norm(const P& p) {
  double s = 0;
  p.visit([&](const std::string&, const Matrix<param_scalar_t<P>>& m) {
    for (std::size_t i = 0; i < m.size(); ++i) s += static_cast<double>(m[i]) * static_cast<double>(m[i]);
  }, "");
  return s;
}

// p += scale * g, arrays matched by visit order.
template <class P>
void add_scaled(P& p, const P& g, double scale) {
  auto dst = array_list(p);
  auto src = array_list(g);
  require(dst.size() == src.size(), "add_scaled: parameter trees differ");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    Matrix<param_scalar_t<P>>& a = *dst[i].second;
    const Matrix<param_scalar_t<P>>& b = *src[i].second;
    require(a.same_shape(b), "add_scaled: shape mismatch at " + dst[i].first);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += static_cast<param_scalar_t<P>>(scale * b[k]);
  }
}

}  // namespace ssmtrack

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nmq {

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_intervals = 20000;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
};

template <class T, class F, class Norm>
Panel<T> gk15(F& f, double a, double b, Norm& norm) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T fc = f(c);
  T kronrod = fc * kWgk[7];
  T gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    T f1 = f(c - h * kXgk[j]);
    T f2 = f(c + h * kXgk[j]);
    T s = f1 + f2;
    kronrod = kronrod + s * kWgk[j];
    if (j % 2 == 1) gauss = gauss + s * kWg[j / 2];
  }
  T k = kronrod * h;
  double err = norm(T(k - gauss * h));
  return {a, b, k, err};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod on [a,b]. T may be a scalar or an Eigen matrix;
// norm maps T to a non-negative double. The interval is first cut into
// `initial_panels` equal pieces (use this to resolve known oscillation periods).
template <class T, class F, class Norm>
T integrate_adaptive(F f, double a, double b, Norm norm, const QuadratureOptions& opt = {},
                     int initial_panels = 1, double* error_out = nullptr) {
  using detail::Panel;
  if (!(b >= a)) throw std::invalid_argument("integration bounds must satisfy b >= a");
  initial_panels = std::max(1, initial_panels);
  std::vector<Panel<T>> panels;
  panels.reserve(initial_panels + 64);
  const double w = (b - a) / initial_panels;
  for (int i = 0; i < initial_panels; ++i) {
    double lo = a + i * w;
    double hi = (i + 1 == initial_panels) ? b : a + (i + 1) * w;
    panels.push_back(detail::gk15<T>(f, lo, hi, norm));
  }
  auto by_error = [](const Panel<T>& x, const Panel<T>& y) { return x.error < y.error; };
  std::make_heap(panels.begin(), panels.end(), by_error);

  auto totals = [&](T& value, double& error) {
    value = panels.front().value;
    error = panels.front().error;
    for (std::size_t i = 1; i < panels.size(); ++i) {
      value = value + panels[i].value;
      error += panels[i].error;
    }
  };
  T value;
  double error;
  totals(value, error);
  while (error > std::max(opt.abs_tol, opt.rel_tol * norm(value))) {
    if (static_cast<int>(panels.size()) >= opt.max_intervals)
      throw QuadratureError("adaptive quadrature did not converge", error);
    std::pop_heap(panels.begin(), panels.end(), by_error);
    Panel<T> worst = panels.back();
    panels.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b))
      throw QuadratureError("adaptive quadrature hit interval resolution limit", error);
    Panel<T> left = detail::gk15<T>(f, worst.a, mid, norm);
    Panel<T> right = detail::gk15<T>(f, mid, worst.b, norm);
    value = value - worst.value + left.value + right.value;
    error += left.error + right.error - worst.error;
    panels.push_back(std::move(left));
    std::push_heap(panels.begin(), panels.end(), by_error);
    panels.push_back(std::move(right));
    std::push_heap(panels.begin(), panels.end(), by_error);
  }
  totals(value, error);
  if (error_out) *error_out = error;
  return value;
}

}  // namespace nmq

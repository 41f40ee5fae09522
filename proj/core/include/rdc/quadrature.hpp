#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature for small vectors of
// real-valued integrands sharing one set of abscissae.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <tuple>
#include <utility>
#include <vector>

namespace rdc {

template <std::size_t N>
using QuadValues = std::array<double, N>;

template <std::size_t N>
struct QuadratureResult {
  QuadValues<N> value{};
  double error = 0.0;  ///< max over components of the summed |Kronrod - Gauss|
  std::size_t evaluations = 0;
  std::size_t intervals = 0;
  bool converged = false;
};

struct QuadratureTolerance {
  double rel = 1e-10;
  double abs = 1e-14;
  std::size_t max_intervals = 4000;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Panel {
  double a, b;
  QuadValues<N> value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <std::size_t N, class F>
Panel<N> gauss_kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  QuadValues<N> kron{}, gauss{};
  const QuadValues<N> fc = f(center);
  for (std::size_t c = 0; c < N; ++c) {
    kron[c] = kKronrodWeights[7] * fc[c];
    gauss[c] = kGaussWeights[3] * fc[c];
  }
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const QuadValues<N> f1 = f(center - dx);
    const QuadValues<N> f2 = f(center + dx);
    for (std::size_t c = 0; c < N; ++c) {
      const double s = f1[c] + f2[c];
      kron[c] += kKronrodWeights[i] * s;
      if (i % 2 == 1) gauss[c] += kGaussWeights[i / 2] * s;
    }
  }
  Panel<N> p{a, b, {}, 0.0};
  for (std::size_t c = 0; c < N; ++c) {
    p.value[c] = kron[c] * half;
    p.error = std::max(p.error, std::abs((kron[c] - gauss[c]) * half));
  }
  return p;
}

}  // namespace detail

/// Integrates f over [a, b]. f maps double -> QuadValues<N>. The interval is
/// first split into `initial_panels` equal pieces; the piece with the largest
/// error is then bisected until the summed error drops below
/// max(tol.abs, tol.rel * max|value|) or tol.max_intervals is reached.
template <std::size_t N, class F>
QuadratureResult<N> integrate_adaptive(F&& f, double a, double b, std::size_t initial_panels,
                                       const QuadratureTolerance& tol) {
  QuadratureResult<N> res;
  if (!(b > a)) {
    res.converged = true;
    return res;
  }
  initial_panels = std::max<std::size_t>(1, initial_panels);
  std::vector<detail::Panel<N>> heap;
  heap.reserve(std::min<std::size_t>(tol.max_intervals + 2, 1 << 14));
  const double width = (b - a) / static_cast<double>(initial_panels);
  for (std::size_t i = 0; i < initial_panels; ++i) {
    const double lo = a + width * static_cast<double>(i);
    const double hi = i + 1 == initial_panels ? b : lo + width;
    heap.push_back(detail::gauss_kronrod15<N>(f, lo, hi));
    res.evaluations += 15;
  }
  std::make_heap(heap.begin(), heap.end());

  auto totals = [&heap]() {
    QuadValues<N> sum{};
    double err = 0.0;
    for (const auto& p : heap) {
      for (std::size_t c = 0; c < N; ++c) sum[c] += p.value[c];
      err += p.error;
    }
    return std::pair{sum, err};
  };

  auto [sum, err] = totals();
  while (true) {
    double scale = 0.0;
    for (double v : sum) scale = std::max(scale, std::abs(v));
    if (err <= std::max(tol.abs, tol.rel * scale)) {
      res.converged = true;
      break;
    }
    if (heap.size() >= tol.max_intervals) break;
    std::pop_heap(heap.begin(), heap.end());
    const auto worst = heap.back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    heap.pop_back();
    auto left = detail::gauss_kronrod15<N>(f, worst.a, mid);
    auto right = detail::gauss_kronrod15<N>(f, mid, worst.b);
    res.evaluations += 30;
    for (std::size_t c = 0; c < N; ++c) sum[c] += left.value[c] + right.value[c] - worst.value[c];
    err += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
    // Running updates drift; re-sum every so often.
    if (heap.size() % 256 == 0) std::tie(sum, err) = totals();
  }
  std::tie(sum, err) = totals();
  res.value = sum;
  res.error = err;
  res.intervals = heap.size();
  return res;
}

}  // namespace rdc

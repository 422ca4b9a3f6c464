#include "gmrd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gmrd/params.hpp"

namespace gmrd {

namespace {

// 15-point Kronrod rule with embedded 7-point Gauss rule (positive half).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
  double kronrod;
  double error;
};

PanelEstimate gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double gauss = kWg[3] * fc;
  double kron = kWgk[7] * fc;
  for (int i = 0; i < 7; ++i) {
    const double x = h * kXgk[i];
    const double fsum = f(c - x) + f(c + x);
    kron += kWgk[i] * fsum;
    if (i % 2 == 1) gauss += kWg[i / 2] * fsum;
  }
  kron *= h;
  gauss *= h;
  return {kron, std::abs(kron - gauss)};
}

struct Panel {
  double a, b;
  double value;
  double error;
};

double adapt(const std::function<double(double)>& f, double a, double b,
             const QuadratureOptions& opt) {
  if (a == b) return 0.0;
  std::vector<Panel> stack;
  PanelEstimate first = gk15(f, a, b);
  stack.push_back({a, b, first.kronrod, first.error});
  double total = first.kronrod;
  double total_err = first.error;
  int panels = 1;
  std::vector<Panel> done;
  while (!stack.empty()) {
    if (total_err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) break;
    // Split the worst panel.
    auto worst = std::max_element(stack.begin(), stack.end(),
                                  [](const Panel& p, const Panel& q) { return p.error < q.error; });
    Panel p = *worst;
    stack.erase(worst);
    if (++panels > opt.max_panels)
      throw NumericError("integrate: panel budget exhausted, error estimate " +
                         std::to_string(total_err) + " on [" + std::to_string(a) + "," +
                         std::to_string(b) + "]");
    const double m = 0.5 * (p.a + p.b);
    if (m <= p.a || m >= p.b)
      throw NumericError("integrate: interval collapsed before reaching tolerance");
    PanelEstimate left = gk15(f, p.a, m);
    PanelEstimate right = gk15(f, m, p.b);
    total += left.kronrod + right.kronrod - p.value;
    total_err += left.error + right.error - p.error;
    // Converged panels are parked so the worst-first scan stays short.
    const double local_tol = 0.25 * opt.abs_tol * (p.b - p.a) / (b - a);
    if (left.error <= local_tol)
      done.push_back({p.a, m, left.kronrod, left.error});
    else
      stack.push_back({p.a, m, left.kronrod, left.error});
    if (right.error <= local_tol)
      done.push_back({m, p.b, right.kronrod, right.error});
    else
      stack.push_back({m, p.b, right.kronrod, right.error});
  }
  return total;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 QuadratureOptions opt) {
  return adapt(f, a, b, opt);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> interior_breakpoints, QuadratureOptions opt) {
  std::vector<double> pts;
  pts.push_back(a);
  for (double p : interior_breakpoints)
    if (p > a && p < b) pts.push_back(p);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double sum = 0.0;
  QuadratureOptions piece = opt;
  piece.abs_tol = opt.abs_tol / static_cast<double>(pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) sum += adapt(f, pts[i], pts[i + 1], piece);
  return sum;
}

}  // namespace gmrd

#include "scalenet/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scalenet {

namespace {

double cubic(const std::array<double, 4>& c, double x) { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); }
double cubic_deriv(const std::array<double, 4>& c, double x) { return c[1] + x * (2.0 * c[2] + x * 3.0 * c[3]); }

void require_nonnegative(double x) {
    if (!(x >= 0.0)) throw std::domain_error("kernel: argument must be non-negative, got " + std::to_string(x));
}

}  // namespace

KernelSpec make_spline_kernel(double alpha, double beta, double x1, double x2) {
    KernelSpec spec;
    spec.alpha = alpha;
    spec.beta = beta;
    spec.x1 = x1;
    spec.x2 = x2;
    if (!(alpha > 0.0 && beta > 0.0 && x1 > 0.0 && x2 > x1)) {
        throw std::invalid_argument("make_spline_kernel: need alpha, beta, x1 > 0 and x2 > x1");
    }
    // In the shifted basis t = x - x1 the four matching conditions are
    // block triangular: d0 = 1, d1 = alpha/x1, and a 2x2 system for d2, d3.
    const double h = x2 - x1;
    const double d0 = 1.0;
    const double d1 = alpha / x1;
    const double r_value = 1.0 - d0 - d1 * h;  // d2 h^2 + d3 h^3
    const double r_slope = -beta / x2 - d1;    // 2 d2 h + 3 d3 h^2
    const double d3 = (r_slope * h - 2.0 * r_value) / (h * h * h);
    const double d2 = (r_value - d3 * h * h * h) / (h * h);
    // Expand sum_i d_i (x - x1)^i into monomial coefficients.
    const std::array<double, 4> c{d0 - d1 * x1 + d2 * x1 * x1 - d3 * x1 * x1 * x1,
                                  d1 - 2.0 * d2 * x1 + 3.0 * d3 * x1 * x1,
                                  d2 - 3.0 * d3 * x1,
                                  d3};
    spec.spline_coeffs = c;
    validate(spec);
    return spec;
}

void validate(const KernelSpec& spec) {
    if (!(spec.alpha > 0.0 && spec.beta > 0.0 && spec.x1 > 0.0 && spec.x2 > spec.x1)) {
        throw std::invalid_argument("kernel spec: need alpha, beta, x1 > 0 and x2 > x1");
    }
    const auto& c = spec.spline_coeffs;
    double magnitude = 1.0;
    for (int i = 0; i < 4; ++i) magnitude += std::abs(c[static_cast<std::size_t>(i)]) * std::pow(spec.x2, i);
    const double tol = 1e-12 * magnitude;
    const bool ok = std::abs(cubic(c, spec.x1) - 1.0) <= tol && std::abs(cubic(c, spec.x2) - 1.0) <= tol &&
                    std::abs(cubic_deriv(c, spec.x1) - spec.alpha / spec.x1) <= tol &&
                    std::abs(cubic_deriv(c, spec.x2) + spec.beta / spec.x2) <= tol;
    if (!ok) throw std::invalid_argument("kernel spec: spline coefficients are not C1 at the knots");
}

double kernel_eval(const KernelSpec& spec, double x) {
    require_nonnegative(x);
    if (x < spec.x1) return std::pow(x / spec.x1, spec.alpha);
    if (x <= spec.x2) return cubic(spec.spline_coeffs, x);
    return std::pow(spec.x2 / x, spec.beta);
}

double kernel_deriv(const KernelSpec& spec, double x) {
    require_nonnegative(x);
    if (x < spec.x1) {
        if (x == 0.0) return spec.alpha == 1.0 ? 1.0 / spec.x1 : (spec.alpha > 1.0 ? 0.0 : INFINITY);
        return spec.alpha / spec.x1 * std::pow(x / spec.x1, spec.alpha - 1.0);
    }
    if (x <= spec.x2) return cubic_deriv(spec.spline_coeffs, x);
    return -spec.beta / x * std::pow(spec.x2 / x, spec.beta);
}

SplineKernel::SplineKernel(KernelSpec spec) : spec_(spec) { validate(spec_); }

}  // namespace scalenet

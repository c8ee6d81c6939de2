#pragma once

#include <array>

namespace scalenet {

/// Piecewise band-pass kernel: (x/x1)^alpha below x1, a cubic on [x1, x2],
/// and (x2/x)^beta above x2. The cubic is fixed by C1 continuity at both
/// knots. The defaults give g(x) = x^2 below 1 and 4/x^2 above 2.
struct KernelSpec {
    double alpha = 2.0;
    double beta = 2.0;
    double x1 = 1.0;
    double x2 = 2.0;
    std::array<double, 4> spline_coeffs{-5.0, 11.0, -6.0, 1.0};
};

/// Builds a spec and solves the four cubic coefficients from the value and
/// slope matching conditions at x1 and x2.
KernelSpec make_spline_kernel(double alpha, double beta, double x1, double x2);

/// Throws std::invalid_argument unless parameters are positive, x1 < x2,
/// and the cubic joins both outer branches in value and slope.
void validate(const KernelSpec& spec);

double kernel_eval(const KernelSpec& spec, double x);
double kernel_deriv(const KernelSpec& spec, double x);

/// Filter g(.) applied to scaled eigenvalues. Abstract so tests can inject
/// degenerate kernels.
class FilterKernel {
public:
    virtual ~FilterKernel() = default;
    virtual double value(double x) const = 0;
    virtual double derivative(double x) const = 0;
};

class SplineKernel final : public FilterKernel {
public:
    explicit SplineKernel(KernelSpec spec);
    double value(double x) const override { return kernel_eval(spec_, x); }
    double derivative(double x) const override { return kernel_deriv(spec_, x); }
    const KernelSpec& spec() const { return spec_; }

private:
    KernelSpec spec_;
};

}  // namespace scalenet

#pragma once

#include <cmath>

namespace peasched {

struct ScalarMin {
    double x;
    double fx;
};

// Golden-section search on [a, b] for a unimodal f; stops when the bracket is below tol.
template <class F>
ScalarMin golden_section_minimize(F&& f, double a, double b, double tol = 1e-7) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    const double fx = f(x);
    if (fc < fx && fc <= fd) return {c, fc};
    if (fd < fx) return {d, fd};
    return {x, fx};
}

} // namespace peasched

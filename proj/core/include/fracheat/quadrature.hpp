#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fracheat::quad {

/// Thrown when an integral cannot be driven below the requested
/// tolerance; carries the best error estimate reached.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

struct Result {
    double value = 0.0;
    double error = 0.0;  // estimate, not bound
};

/// Gauss-Legendre nodes/weights on [-1,1], computed once per order and cached.
const std::vector<double>& gl_nodes(int order);
const std::vector<double>& gl_weights(int order);

/// Composite Gauss-Legendre over [a,b] with the given panel edges.
double panels(const std::function<double(double)>& f,
              std::span<const double> edges, int order = 16);

/// Single Gauss-Legendre panel on [a,b].
double panel(const std::function<double(double)>& f, double a, double b,
             int order = 16);

/// Adaptive bisection built on embedded Gauss orders; tol is absolute.
Result adaptive(const std::function<double(double)>& f, double a, double b,
                double tol, int max_depth = 48);

/// Int_a^inf f(x) cos(omega x + phase) dx for a smooth envelope f that
/// decreases to zero.  Half-period partial integrals are summed with
/// iterated averaging (Euler transform).
Result oscillatory_cos_tail(const std::function<double(double)>& f, double a,
                            double omega, double phase = 0.0,
                            double tol = 1e-13);

/// Geometrically graded panel edges {0, b*2^-levels, ..., b/2, b}; used for
/// integrands with an integrable power singularity (or singular derivative)
/// at the origin.
std::vector<double> geometric_edges(double b, int levels);

/// 1 - cos(x) without cancellation near x = 0.
inline double one_minus_cos(double x) {
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s;
}

/// Neumaier compensated accumulator; order-insensitive reductions use it.
class Accumulator {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double total() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace fracheat::quad

#include "fracheat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace fracheat::quad {

namespace {

struct GLTable {
    std::vector<double> nodes, weights;
};

// Newton iteration on Legendre polynomials; standard construction.
GLTable make_gl(int order) {
    GLTable t;
    t.nodes.resize(order);
    t.weights.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < order; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = order * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        t.nodes[i] = -x;
        t.nodes[order - 1 - i] = x;
        t.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        t.weights[order - 1 - i] = t.weights[i];
    }
    return t;
}

const GLTable& gl_table(int order) {
    static std::mutex mu;
    static std::map<int, GLTable> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_gl(order)).first;
    return it->second;
}

}  // namespace

const std::vector<double>& gl_nodes(int order) { return gl_table(order).nodes; }
const std::vector<double>& gl_weights(int order) {
    return gl_table(order).weights;
}

double panel(const std::function<double(double)>& f, double a, double b,
             int order) {
    const auto& xs = gl_nodes(order);
    const auto& ws = gl_weights(order);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += ws[i] * f(c + h * xs[i]);
    return s * h;
}

double panels(const std::function<double(double)>& f,
              std::span<const double> edges, int order) {
    Accumulator acc;
    for (size_t i = 0; i + 1 < edges.size(); ++i)
        acc.add(panel(f, edges[i], edges[i + 1], order));
    return acc.total();
}

namespace {

void adapt_rec(const std::function<double(double)>& f, double a, double b,
               double whole, double tol, int depth, int max_depth,
               Accumulator& acc, double& err) {
    const double m = 0.5 * (a + b);
    const double left = panel(f, a, m, 16);
    const double right = panel(f, m, b, 16);
    const double diff = left + right - whole;
    if (std::abs(diff) <= tol || depth >= max_depth) {
        acc.add(left + right);
        err += std::abs(diff);
        return;
    }
    adapt_rec(f, a, m, left, tol * 0.5, depth + 1, max_depth, acc, err);
    adapt_rec(f, m, b, right, tol * 0.5, depth + 1, max_depth, acc, err);
}

}  // namespace

Result adaptive(const std::function<double(double)>& f, double a, double b,
                double tol, int max_depth) {
    Accumulator acc;
    double err = 0.0;
    adapt_rec(f, a, b, panel(f, a, b, 16), tol, 0, max_depth, acc, err);
    return {acc.total(), err};
}

Result oscillatory_cos_tail(const std::function<double(double)>& f, double a,
                            double omega, double phase, double tol) {
    if (omega <= 0.0) throw std::invalid_argument("oscillatory_cos_tail: omega");
    auto g = [&](double x) { return f(x) * std::cos(omega * x + phase); };
    // First zero of cos(omega x + phase) at or after a.
    const double u0 = omega * a + phase;
    double k = std::ceil((u0 - M_PI / 2.0) / M_PI);
    double z = (M_PI / 2.0 + k * M_PI - phase) / omega;
    if (z < a) z += M_PI / omega;

    Accumulator head;
    head.add(panel(g, a, z, 24));

    // Half-period integrals form an (eventually) alternating sequence with
    // decreasing magnitude; iterated averaging accelerates it.
    const int kMaxTerms = 160;
    std::vector<double> partial;  // partial sums
    Accumulator run;
    double prev_est = 0.0;
    const double half = M_PI / omega;
    for (int j = 0; j < kMaxTerms; ++j) {
        run.add(panel(g, z + j * half, z + (j + 1) * half, 16));
        partial.push_back(run.total());
        if (j < 6) continue;
        // iterated averaging of the tail of partial sums
        std::vector<double> row(partial.end() - 7, partial.end());
        for (int lvl = 0; lvl < 6; ++lvl)
            for (size_t i = 0; i + 1 + lvl < row.size(); ++i)
                row[i] = 0.5 * (row[i] + row[i + 1]);
        const double est = row[0];
        if (std::abs(est - prev_est) < tol * (1.0 + std::abs(est)))
            return {head.total() + est,
                    std::abs(est - prev_est) + 1e-16 * std::abs(est)};
        prev_est = est;
    }
    return {head.total() + prev_est, std::abs(prev_est) * 1e-8 + 1e-15};
}

std::vector<double> geometric_edges(double b, int levels) {
    std::vector<double> edges;
    edges.reserve(levels + 2);
    edges.push_back(0.0);
    for (int j = levels; j >= 0; --j) edges.push_back(b * std::ldexp(1.0, -j));
    return edges;
}

}  // namespace fracheat::quad

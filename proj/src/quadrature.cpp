#include "sbnm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "sbnm/errors.hpp"

namespace sbnm::quad {

namespace {

// Kronrod-15 abscissae and weights; Gauss-7 weights on the shared nodes.
constexpr double xk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

} // namespace

void gk15(const std::function<double(double)>& f, double a, double b,
          double& value, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = wk[7] * fc;
    double resg = wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double f1 = f(c - h * xk[i]);
        const double f2 = f(c + h * xk[i]);
        resk += wk[i] * (f1 + f2);
        if (i % 2 == 1) resg += wg[i / 2] * (f1 + f2);
    }
    value = resk * h;
    error = std::abs((resk - resg) * h);
}

Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts) {
    Result res;
    if (!(a < b)) return res;

    std::vector<double> edges;
    edges.push_back(a);
    for (double e : opts.initial_edges)
        if (e > a && e < b) edges.push_back(e);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::priority_queue<Panel> heap;
    double total = 0.0, toterr = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Panel p{edges[i], edges[i + 1], 0.0, 0.0};
        gk15(f, p.a, p.b, p.value, p.error);
        total += p.value;
        toterr += p.error;
        heap.push(p);
    }
    res.intervals = static_cast<int>(heap.size());

    const auto tol = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
    while (toterr > tol() && res.intervals < opts.max_intervals) {
        Panel worst = heap.top();
        heap.pop();
        if (worst.b - worst.a < 1e-15 * (std::abs(worst.a) + std::abs(worst.b) + 1.0)) {
            // interval exhausted at machine resolution; keep its estimate
            toterr -= worst.error * 0.5;  // do not loop forever on it
            worst.error *= 0.5;
            heap.push(worst);
            continue;
        }
        const double m = 0.5 * (worst.a + worst.b);
        Panel left{worst.a, m, 0, 0}, right{m, worst.b, 0, 0};
        gk15(f, left.a, left.b, left.value, left.error);
        gk15(f, right.a, right.b, right.value, right.error);
        total += left.value + right.value - worst.value;
        toterr += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++res.intervals;
    }

    res.value = total;
    res.error = toterr;
    res.converged = toterr <= tol() * 1.0000001;
    if (!res.converged && opts.throw_on_failure)
        throw NumericalError("quadrature did not converge: error " + std::to_string(toterr) +
                             " after " + std::to_string(res.intervals) + " intervals");
    return res;
}

double principal_value(const std::function<double(double)>& f, double a, double b,
                       double c, const Options& opts) {
    if (!(a < c && c < b)) throw ValidationError("principal_value: pole not inside interval");
    const double reach = std::min(c - a, b - c);
    // Outside the symmetric window the integrand is regular.
    Options o = opts;
    double out = 0.0;
    if (a < c - reach)
        out += integrate([&](double w) { return f(w) / (w - c); }, a, c - reach, o).value;
    if (c + reach < b)
        out += integrate([&](double w) { return f(w) / (w - c); }, c + reach, b, o).value;
    // Symmetric window: [f(c+x) - f(c-x)]/x is smooth (odd part cancels the pole).
    out += integrate([&](double x) { return (f(c + x) - f(c - x)) / x; }, 0.0, reach, o).value;
    return out;
}

std::vector<double> uniform_edges(double a, double b, double max_width) {
    std::vector<double> e;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
    e.reserve(n + 1);
    for (int i = 0; i <= n; ++i) e.push_back(a + (b - a) * i / n);
    return e;
}

} // namespace sbnm::quad

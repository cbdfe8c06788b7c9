#include "fracasym/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace fracasym {
namespace {

constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss 7-point weights live on the odd Kronrod abscissae (indices 1, 3, 5, 7).
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, abs_value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const ScalarFn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = kWk[7] * fc;
    double gauss = kWg[3] * fc;
    double absk = kWk[7] * std::fabs(fc);
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXk[i];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        kron += kWk[i] * (f1 + f2);
        absk += kWk[i] * (std::fabs(f1) + std::fabs(f2));
        if (i % 2 == 1) gauss += kWg[i / 2] * (f1 + f2);
    }
    return {a, b, kron * h, absk * h, std::fabs((kron - gauss) * h)};
}

}  // namespace

QuadResult integrate_gk(const ScalarFn& f, double a, double b, double rel_tol, int max_intervals) {
    QuadResult out;
    if (!(b > a)) return out;
    std::priority_queue<Panel> heap;
    Panel first = gk15(f, a, b);
    double value = first.value, abs_value = first.abs_value, error = first.error;
    heap.push(first);
    int count = 1;
    while (error > rel_tol * abs_value && count < max_intervals) {
        const Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;
        heap.pop();
        const Panel left = gk15(f, worst.a, mid);
        const Panel right = gk15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    // Re-sum to shed accumulated update rounding.
    value = abs_value = error = 0.0;
    std::vector<Panel> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    for (const auto& p : panels) {
        value += p.value;
        abs_value += p.abs_value;
        error += p.error;
    }
    out.value = value;
    out.abs_value = abs_value;
    out.error = error;
    out.intervals = count;
    return out;
}

QuadResult integrate_gk_semi_infinite(const ScalarFn& f, double a, const ScalarFn& tail_bound,
                                      const ScalarFn& tail_value, double rel_tol,
                                      double eval_limit) {
    QuadResult out;
    double lo = a;
    double hi = a > 0.0 ? 2.0 * a : 1.0;
    constexpr double kMaxReach = 1e40;
    while (true) {
        bool last = false;
        if (hi >= eval_limit) {
            hi = eval_limit;
            last = true;
        }
        if (hi > lo) {
            const QuadResult part = integrate_gk(f, lo, hi, rel_tol);
            out.value += part.value;
            out.abs_value += part.abs_value;
            out.error += part.error;
            out.intervals += part.intervals;
        }
        const double bound = tail_bound(hi);
        if (last || hi >= kMaxReach || bound <= rel_tol * out.abs_value) {
            const double tail = tail_value(hi);
            out.value += tail;
            out.abs_value += std::fabs(tail);
            out.error += std::fabs(bound);
            return out;
        }
        lo = hi;
        hi *= 2.0;
    }
}

}  // namespace fracasym

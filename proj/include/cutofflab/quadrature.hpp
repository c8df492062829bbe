#pragma once

#include <algorithm>
#include <queue>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace cutofflab::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
};

// Globally adaptive Gauss-Kronrod (7/15 points per panel) under an absolute
// error target: the panel with the largest error estimate is bisected until the
// summed estimate drops below `abs_tol` or `max_panels` is reached. `cuts` are
// the initial panel edges and should include every kink of f.
template <class F>
Result integrate(F&& f, std::span<const double> cuts, double abs_tol, int max_panels = 2000) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    struct Panel {
        double a, b, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto eval = [&](double a, double b) {
        double err = 0.0;
        const double v = GK::integrate(f, a, b, 0, 0.0, &err);
        return Panel{a, b, v, err};
    };
    std::priority_queue<Panel> heap;
    Result r;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (!(cuts[i + 1] > cuts[i])) continue;
        heap.push(eval(cuts[i], cuts[i + 1]));
        ++r.panels;
    }
    auto total_error = [&] {
        // Recomputed from the heap contents; panels are few enough for this to be cheap.
        double e = 0.0;
        auto copy = heap;
        while (!copy.empty()) {
            e += copy.top().error;
            copy.pop();
        }
        return e;
    };
    double err = total_error();
    while (err > abs_tol && r.panels < max_panels && !heap.empty()) {
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push(worst);
            break;
        }
        const Panel left = eval(worst.a, mid);
        const Panel right = eval(mid, worst.b);
        heap.push(left);
        heap.push(right);
        ++r.panels;
        err += left.error + right.error - worst.error;
    }
    while (!heap.empty()) {
        r.value += heap.top().value;
        r.error += heap.top().error;
        heap.pop();
    }
    return r;
}

}  // namespace cutofflab::quad

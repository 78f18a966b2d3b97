#include "bravo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace bravo {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (positive abscissae;
// the rule is symmetric). Same constants as QUADPACK's QK15.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277,
                           0.381830050505119, 0.417959183673469};

struct Panel {
    double a, b;
    double integral;
    double error;
};

struct PanelOrder {
    bool operator()(const Panel& x, const Panel& y) const {
        return x.error < y.error;
    }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double fv1[7], fv2[7];
    const double fc = f(center);
    double resg = kWg[3] * fc;
    double resk = kWgk[7] * fc;
    double resabs = kWgk[7] * std::abs(fc);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        fv1[j] = f(center - dx);
        fv2[j] = f(center + dx);
        const double sum = fv1[j] + fv2[j];
        resk += kWgk[j] * sum;
        resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
        if (j % 2 == 1) resg += kWg[j / 2] * sum;
    }

    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) {
        resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
    }

    const double habs = std::abs(half);
    resabs *= habs;
    resasc *= habs;
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(err, 50.0 * eps * resabs);
    }
    return Panel{a, b, resk * half, err};
}

}  // namespace

void QuadratureConfig::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(truncation_tail_mass > 0.0)) {
        throw std::invalid_argument("quadrature tolerances must be positive");
    }
    if (abs_tol >= 1e-3 || rel_tol >= 1e-3) {
        throw std::invalid_argument("quadrature tolerances must be below 1e-3");
    }
}

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureConfig& config) {
    config.validate();
    if (a == b) return {0.0, 0.0, 0};
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }

    constexpr int kMaxPanels = 4000;
    std::priority_queue<Panel, std::vector<Panel>, PanelOrder> queue;
    queue.push(evaluate_panel(f, a, b));
    double total = queue.top().integral;
    double total_err = queue.top().error;

    while (total_err > std::max(config.abs_tol, config.rel_tol * std::abs(total))) {
        if (static_cast<int>(queue.size()) >= kMaxPanels) {
            throw QuadratureError(
                "adaptive quadrature did not converge: achieved tolerance " +
                    std::to_string(total_err),
                sign * total, total_err);
        }
        Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval no longer splittable at double precision
            throw QuadratureError(
                "adaptive quadrature stalled: achieved tolerance " +
                    std::to_string(total_err),
                sign * total, total_err);
        }
        Panel left = evaluate_panel(f, worst.a, mid);
        Panel right = evaluate_panel(f, mid, worst.b);
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
    }

    return {sign * total, total_err, static_cast<int>(queue.size())};
}

double truncation_point(const std::function<double(double)>& envelope,
                        double from, double tail_mass, double step,
                        double max_u) {
    double u = from;
    while (u < max_u) {
        if (envelope(u) < tail_mass) return u;
        u += step;
    }
    return max_u;
}

}  // namespace bravo

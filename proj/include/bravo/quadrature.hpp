#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace bravo {

// Tolerances for the adaptive integrators, plus the tail-mass threshold used
// when an improper upper limit is cut off at a finite point.
struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double truncation_tail_mass = 1e-14;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int intervals = 0;
};

// Thrown when the subdivision budget runs out before the requested tolerance
// is met. Carries the best available estimate and the tolerance it achieved.
class QuadratureError : public std::runtime_error {
  public:
    QuadratureError(const std::string& what, double value, double achieved_tol)
        : std::runtime_error(what), value_(value), achieved_tol_(achieved_tol) {}
    double value() const noexcept { return value_; }
    double achieved_tolerance() const noexcept { return achieved_tol_; }

  private:
    double value_;
    double achieved_tol_;
};

// Globally adaptive Gauss-Kronrod 7(15) integration of f over [a, b].
// Accepts once the summed error estimate drops below
// max(abs_tol, rel_tol * |integral|).
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureConfig& config = {});

// Smallest point u >= from (scanning in steps of `step`) where the decaying
// envelope falls below tail_mass. Returns max_u if the envelope never does.
double truncation_point(const std::function<double(double)>& envelope,
                        double from, double tail_mass, double step = 0.5,
                        double max_u = 60.0);

}  // namespace bravo

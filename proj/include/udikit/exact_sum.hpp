#pragma once

#include <vector>

namespace udikit {

/// Correctly rounded floating-point summation (Shewchuk partials).
///
/// The result equals the exact real sum of the added values rounded once to
/// the nearest double, so it does not depend on the order values are added.
/// Inputs must be finite.
class ExactSum {
public:
    void add(double x);
    double value() const;
    void clear() { partials_.clear(); }

private:
    std::vector<double> partials_;
};

} // namespace udikit

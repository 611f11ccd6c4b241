#pragma once

#include <vector>

namespace ergolang {

// Monotone cubic (Fritsch-Carlson) interpolant on a strictly increasing grid.
// Shape preserving: never overshoots the data, which keeps interpolated rate
// tables monotone where the data are.
class PchipCurve {
public:
    PchipCurve() = default;
    PchipCurve(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

private:
    std::vector<double> x_, y_, slope_;
};

}  // namespace ergolang

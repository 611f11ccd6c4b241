#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ergolang/potential.hpp"

namespace ergolang {

struct HistogramSpec {
    int nx = 128;
    int ny = 128;
    // Equal bounds mean "derive the range from the physics" (gibbs_compare
    // and minorization_probe fill them in).
    double x_lo = 0.0, x_hi = 0.0;
    double y_lo = 0.0, y_hi = 0.0;

    bool operator==(const HistogramSpec&) const = default;
};

// Plain 2D counting histogram over (q, p). Out-of-range samples are dropped;
// bin masses are normalised by the in-range count.
class Histogram2D {
public:
    Histogram2D() = default;
    explicit Histogram2D(const HistogramSpec& spec);

    void add(double x, double y);
    void merge(const Histogram2D& other);

    const HistogramSpec& spec() const { return spec_; }
    std::size_t total() const { return total_; }
    double mass(int i, int j) const;
    double x_center(int i) const;
    double y_center(int j) const;
    double bin_area() const;

private:
    HistogramSpec spec_;
    std::vector<std::uint64_t> counts_;
    std::size_t total_ = 0;
};

// Weighted-norm configuration: the weight exponent, the theory's upper
// bound 2 Lambda_*/T (informational; beta = 0 is plain total variation),
// and the histogram geometry the comparison runs on.
struct WeightedNormSpec {
    double beta = 0.0;
    double beta_max = 0.0;
    HistogramSpec bins;
};

// Throws DomainError when beta is negative or reaches the theory bound.
WeightedNormSpec make_weighted_norm(double beta, double lambda_star_value,
                                    double temperature, HistogramSpec bins = {});

// Weighted total-variation distance sum_bins e^{beta H(center)} |m1 - m2|
// with H evaluated from the spec at lambda = 1. beta = 0 recovers plain TV
// (equal to 2 for histograms with disjoint support). Throws GeometryMismatch
// when the bin geometries differ.
double weighted_tv(const Histogram2D& h1, const Histogram2D& h2, const ValidatedSpec& spec,
                   double beta);

// Kolmogorov-Smirnov statistic of samples against a CDF given as a callable.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace ergolang

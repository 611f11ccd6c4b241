#include "ergolang/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ergolang/errors.hpp"

namespace ergolang {

Histogram2D::Histogram2D(const HistogramSpec& spec) : spec_(spec) {
    counts_.assign(static_cast<std::size_t>(spec.nx) * spec.ny, 0);
}

void Histogram2D::add(double x, double y) {
    if (x < spec_.x_lo || x >= spec_.x_hi || y < spec_.y_lo || y >= spec_.y_hi) return;
    const int i = static_cast<int>((x - spec_.x_lo) / (spec_.x_hi - spec_.x_lo) * spec_.nx);
    const int j = static_cast<int>((y - spec_.y_lo) / (spec_.y_hi - spec_.y_lo) * spec_.ny);
    counts_[static_cast<std::size_t>(i) * spec_.ny + j] += 1;
    ++total_;
}

void Histogram2D::merge(const Histogram2D& other) {
    if (!(other.spec_ == spec_)) throw GeometryMismatch("cannot merge histograms with different geometry");
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
    total_ += other.total_;
}

double Histogram2D::mass(int i, int j) const {
    if (total_ == 0) return 0.0;
    return static_cast<double>(counts_[static_cast<std::size_t>(i) * spec_.ny + j]) /
           static_cast<double>(total_);
}

double Histogram2D::x_center(int i) const {
    return spec_.x_lo + (i + 0.5) * (spec_.x_hi - spec_.x_lo) / spec_.nx;
}

double Histogram2D::y_center(int j) const {
    return spec_.y_lo + (j + 0.5) * (spec_.y_hi - spec_.y_lo) / spec_.ny;
}

double Histogram2D::bin_area() const {
    return (spec_.x_hi - spec_.x_lo) / spec_.nx * (spec_.y_hi - spec_.y_lo) / spec_.ny;
}

WeightedNormSpec make_weighted_norm(double beta, double lambda_star_value,
                                    double temperature, HistogramSpec bins) {
    WeightedNormSpec w;
    w.beta_max = 2.0 * lambda_star_value / temperature;
    if (!(beta >= 0.0) || beta >= w.beta_max) {
        throw DomainError("weight exponent must lie in [0, 2 Lambda_*/T)");
    }
    w.beta = beta;
    w.bins = bins;
    return w;
}

double weighted_tv(const Histogram2D& h1, const Histogram2D& h2, const ValidatedSpec& spec,
                   double beta) {
    if (!(h1.spec() == h2.spec())) {
        throw GeometryMismatch("weighted TV needs identical bin geometries");
    }
    const ScaledPotential pot = spec.scaled(1.0);
    double sum = 0.0;
    for (int i = 0; i < h1.spec().nx; ++i) {
        const double q = h1.x_center(i);
        const double u = pot.value(q);
        for (int j = 0; j < h1.spec().ny; ++j) {
            const double p = h1.y_center(j);
            const double diff = std::abs(h1.mass(i, j) - h2.mass(i, j));
            if (diff == 0.0) continue;
            sum += std::exp(beta * (0.5 * p * p + u)) * diff;
        }
    }
    return sum;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        worst = std::max(worst, std::abs((i + 1) / n - f));
        worst = std::max(worst, std::abs(f - i / n));
    }
    return worst;
}

}  // namespace ergolang

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mcn/errors.hpp"

namespace mcn {

// Nonparametric distribution: sorted (value, cumulative probability) points
// with strictly increasing values and probabilities ending at exactly 1.
// Stored at full resolution up to kMaxPoints, then compressed to
// equally-spaced quantiles.
class EmpiricalCdf {
public:
    static constexpr std::size_t kMaxPoints = 4096;

    struct Point {
        double value;
        double cum_prob;
        friend bool operator==(const Point&, const Point&) = default;
    };

    EmpiricalCdf() = default;

    // Points must already satisfy the invariants; used by model deserialization.
    static EmpiricalCdf from_points(std::vector<Point> pts) {
        EmpiricalCdf cdf;
        cdf.points_ = std::move(pts);
        cdf.check();
        return cdf;
    }

    // Builds the empirical CDF of a sample; duplicates collapse into one
    // point carrying their combined mass.
    static EmpiricalCdf from_samples(std::vector<double> samples) {
        if (samples.empty()) throw EmptySample("EmpiricalCdf::from_samples");
        std::sort(samples.begin(), samples.end());
        EmpiricalCdf cdf;
        const double n = static_cast<double>(samples.size());
        std::size_t i = 0;
        while (i < samples.size()) {
            std::size_t j = i;
            while (j < samples.size() && samples[j] == samples[i]) ++j;
            cdf.points_.push_back({samples[i], static_cast<double>(j) / n});
            i = j;
        }
        cdf.points_.back().cum_prob = 1.0;
        if (cdf.points_.size() > kMaxPoints) cdf.compress(kMaxPoints);
        return cdf;
    }

    const std::vector<Point>& points() const { return points_; }
    bool empty() const { return points_.empty(); }
    double min_value() const { return points_.front().value; }
    double max_value() const { return points_.back().value; }

    // Inverse transform with linear interpolation between stored points.
    // Mass below the first point maps flat onto the first value.
    double sample(double u) const {
        const auto& p = points_;
        if (u <= p.front().cum_prob) return p.front().value;
        auto it = std::lower_bound(p.begin(), p.end(), u,
                                   [](const Point& pt, double x) { return pt.cum_prob < x; });
        if (it == p.end()) return p.back().value;
        const Point& hi = *it;
        const Point& lo = *(it - 1);
        double span = hi.cum_prob - lo.cum_prob;
        double t = span > 0 ? (u - lo.cum_prob) / span : 1.0;
        return lo.value + t * (hi.value - lo.value);
    }

    // Step-function evaluation: P(X <= x) treating the stored points as the
    // exact distribution (right-continuous).
    double cdf_step(double x) const {
        auto it = std::upper_bound(points_.begin(), points_.end(), x,
                                   [](double v, const Point& pt) { return v < pt.value; });
        if (it == points_.begin()) return 0.0;
        return (it - 1)->cum_prob;
    }

    // Piecewise-linear evaluation between stored points; 0 below the first
    // value, 1 above the last.
    double cdf_linear(double x) const {
        if (x < points_.front().value) return 0.0;
        if (x >= points_.back().value) return 1.0;
        auto it = std::upper_bound(points_.begin(), points_.end(), x,
                                   [](double v, const Point& pt) { return v < pt.value; });
        const Point& hi = *it;
        const Point& lo = *(it - 1);
        double t = (x - lo.value) / (hi.value - lo.value);
        return lo.cum_prob + t * (hi.cum_prob - lo.cum_prob);
    }

    friend bool operator==(const EmpiricalCdf&, const EmpiricalCdf&) = default;

private:
    void check() const {
        if (points_.empty()) throw SchemaViolation("cdf", "no points");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (i > 0) {
                if (points_[i].value <= points_[i - 1].value)
                    throw SchemaViolation("cdf", "values not strictly increasing");
                if (points_[i].cum_prob <= points_[i - 1].cum_prob)
                    throw SchemaViolation("cdf", "probabilities not strictly increasing");
            }
            if (points_[i].cum_prob <= 0.0 || points_[i].cum_prob > 1.0)
                throw SchemaViolation("cdf", "probability out of (0,1]");
        }
        if (points_.back().cum_prob != 1.0)
            throw SchemaViolation("cdf", "terminal probability is not 1");
    }

    // Keeps m equally-spaced quantiles; sup-error in probability <= 1/m.
    void compress(std::size_t m) {
        std::vector<Point> kept;
        kept.reserve(m);
        std::size_t src = 0;
        for (std::size_t i = 1; i <= m; ++i) {
            double q = static_cast<double>(i) / static_cast<double>(m);
            while (src + 1 < points_.size() && points_[src].cum_prob < q) ++src;
            Point pt = points_[src];
            pt.cum_prob = q;
            if (!kept.empty() && kept.back().value == pt.value)
                kept.back().cum_prob = q;
            else
                kept.push_back(pt);
        }
        kept.back().cum_prob = 1.0;
        points_ = std::move(kept);
    }

    std::vector<Point> points_;
};

// Operation name used by the generation loop.
inline double sample_from_cdf(const EmpiricalCdf& cdf, double u) {
    return cdf.sample(u);
}

} // namespace mcn

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mcn/csv.hpp"
#include "mcn/empirical_cdf.hpp"
#include "mcn/errors.hpp"
#include "mcn/rng.hpp"

namespace mcn {

struct ExponentialFit {
    double lambda = 0;
    double cdf(double x) const { return x <= 0 ? 0.0 : 1.0 - std::exp(-lambda * x); }
    double quantile(double u) const { return -std::log1p(-u) / lambda; }
};

struct ParetoFit {
    double x_m = 0;
    double alpha = 0;
    double cdf(double x) const { return x < x_m ? 0.0 : 1.0 - std::pow(x_m / x, alpha); }
    double quantile(double u) const { return x_m * std::pow(1.0 - u, -1.0 / alpha); }
};

struct WeibullFit {
    double k = 0;
    double lambda = 0;
    double cdf(double x) const {
        return x <= 0 ? 0.0 : 1.0 - std::exp(-std::pow(x / lambda, k));
    }
    double quantile(double u) const {
        return lambda * std::pow(-std::log1p(-u), 1.0 / k);
    }
};

namespace detail {
inline void require_positive(std::span<const double> xs, const char* who) {
    if (xs.empty()) throw EmptySample(who);
    for (double x : xs)
        if (!(x > 0)) throw NonPositiveSample(who);
}
} // namespace detail

inline ExponentialFit fit_exponential(std::span<const double> xs) {
    detail::require_positive(xs, "fit_exponential");
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    return {1.0 / mean};
}

inline ParetoFit fit_pareto(std::span<const double> xs) {
    detail::require_positive(xs, "fit_pareto");
    double x_m = *std::min_element(xs.begin(), xs.end());
    double s = 0.0;
    for (double x : xs) s += std::log(x / x_m);
    if (s <= 0.0) throw DegenerateSample("fit_pareto: all observations equal");
    return {x_m, static_cast<double>(xs.size()) / s};
}

// Shape MLE solves  1/k = sum(x^k ln x)/sum(x^k) - mean(ln x)  via
// safeguarded Newton on g(k) = rhs(k) - 1/k, bracketing in [1e-4, 1e4].
// Powers are evaluated as exp(k (ln x - ln x_max)) to stay finite.
inline WeibullFit fit_weibull(std::span<const double> xs) {
    detail::require_positive(xs, "fit_weibull");
    const std::size_t n = xs.size();
    std::vector<double> lx(n);
    for (std::size_t i = 0; i < n; ++i) lx[i] = std::log(xs[i]);
    const double mean_lx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
    const double max_lx = *std::max_element(lx.begin(), lx.end());
    const double min_lx = *std::min_element(lx.begin(), lx.end());

    if (max_lx - min_lx < 1e-12) {
        // All observations equal: likelihood increases without bound in k.
        double k = 1e4;
        double lambda = std::exp(max_lx);
        return {k, lambda};
    }

    // g(k) = S1(k)/S0(k) - mean_lx - 1/k, strictly decreasing in 1/k terms;
    // it is increasing in k, g(0+) = min_lx - mean_lx - inf < 0,
    // g(inf) = max_lx - mean_lx > 0, so a root exists in the bracket.
    auto g = [&](double k) {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double w = std::exp(k * (lx[i] - max_lx));
            s0 += w;
            s1 += w * lx[i];
            s2 += w * lx[i] * lx[i];
        }
        double r = s1 / s0;
        double dr = s2 / s0 - r * r;  // d/dk of S1/S0
        return std::pair{r - mean_lx - 1.0 / k, dr + 1.0 / (k * k)};
    };

    double lo = 1e-4, hi = 1e4;
    double k = 1.0;
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        auto [val, dval] = g(k);
        if (std::abs(val) < 1e-9) {
            converged = true;
            break;
        }
        if (val > 0) hi = std::min(hi, k);
        else lo = std::max(lo, k);
        double next = k - val / dval;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - k) < 1e-12 * std::max(1.0, k)) {
            k = next;
            converged = std::abs(g(k).first) < 1e-6;
            break;
        }
        k = next;
    }
    if (!converged && std::abs(g(k).first) >= 1e-6)
        throw NoConvergence("fit_weibull: shape iteration did not converge");

    double s0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) s0 += std::exp(k * (lx[i] - max_lx));
    double lambda = std::exp(max_lx + std::log(s0 / static_cast<double>(n)) / k);
    return {k, lambda};
}

// ---------------------------------------------------------------------------
// Goodness of fit

struct TestResult {
    double statistic = 0;
    double p_value = 0;         // K-S only
    double critical_value = 0;  // A² only
    double alpha = 0.05;
    bool pass = false;
};

// Asymptotic Kolmogorov distribution Q(t) = P(sup|B| > t), evaluated with
// the series that converges fastest for the given argument.
inline double kolmogorov_sf(double t) {
    if (t <= 0) return 1.0;
    if (t < 1.18) {
        // Q(t) = 1 - sqrt(2*pi)/t * sum exp(-(2j-1)^2 pi^2 / (8 t^2))
        double v = M_PI * M_PI / (8.0 * t * t);
        double sum = 0.0;
        for (int j = 1; j <= 20; ++j) {
            double term = std::exp(-static_cast<double>(2 * j - 1) * (2 * j - 1) * v);
            sum += term;
            if (term < 1e-16 * sum) break;
        }
        return 1.0 - std::sqrt(2.0 * M_PI) / t * sum;
    }
    // Q(t) = 2 sum (-1)^{j-1} exp(-2 j^2 t^2)
    double sum = 0.0;
    for (int j = 1; j <= 20; ++j) {
        double term = std::exp(-2.0 * j * j * t * t);
        if (j % 2) sum += term;
        else sum -= term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// One-sample K-S against a continuous CDF given as a callable.
template <typename Cdf>
TestResult ks_test(std::span<const double> xs, Cdf&& cdf, double alpha = 0.05) {
    if (xs.empty()) throw EmptySample("ks_test");
    std::vector<double> s(xs.begin(), xs.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double f = cdf(s[i]);
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
        d = std::max(d, f - static_cast<double>(i) / n);
    }
    TestResult r;
    r.statistic = d;
    r.p_value = kolmogorov_sf(std::sqrt(n) * d);
    r.alpha = alpha;
    r.pass = r.p_value > alpha;
    return r;
}

// Exact two-sample K-S statistic: sup over pooled points of |F1 - F2| with
// right-continuous empirical CDFs.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw EmptySample("ks_two_sample");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        double x = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] <= x) ++i;
        while (j < sb.size() && sb[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// Two-sample K-S against a stored empirical reference (treated as a sample
// of its support points with the stored masses).
inline double ks_vs_reference(std::span<const double> xs, const EmpiricalCdf& ref) {
    if (xs.empty()) throw EmptySample("ks_vs_reference");
    std::vector<double> s(xs.begin(), xs.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    std::size_t i = 0;
    double prev_ref = 0.0;
    for (const auto& p : ref.points()) {
        while (i < s.size() && s[i] < p.value) {
            ++i;
            d = std::max(d, std::abs(static_cast<double>(i) / n - prev_ref));
        }
        while (i < s.size() && s[i] <= p.value) ++i;
        d = std::max(d, std::abs(static_cast<double>(i) / n - p.cum_prob));
        prev_ref = p.cum_prob;
    }
    while (i < s.size()) {
        ++i;
        d = std::max(d, std::abs(static_cast<double>(i) / n - 1.0));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Anderson-Darling for exponentiality (scale estimated from the sample)

inline double ad_statistic_uniform(std::span<const double> u_sorted) {
    const double n = static_cast<double>(u_sorted.size());
    double s = 0.0;
    for (std::size_t i = 0; i < u_sorted.size(); ++i) {
        double ui = std::clamp(u_sorted[i], 1e-15, 1.0 - 1e-15);
        double uj = std::clamp(u_sorted[u_sorted.size() - 1 - i], 1e-15, 1.0 - 1e-15);
        s += (2.0 * static_cast<double>(i) + 1.0) * (std::log(ui) + std::log1p(-uj));
    }
    return -n - s / n;
}

// Critical values for the composite exponential null are scale-free, so a
// single Exp(1) parametric bootstrap per sample-size bucket suffices.  The
// cache is process-wide and seeded deterministically.
class AdCriticalTable {
public:
    static AdCriticalTable& instance() {
        static AdCriticalTable t;
        return t;
    }

    double critical(std::size_t n, double level, std::size_t replicates = 10000) {
        std::size_t bucket = bucket_of(n);
        Key key{bucket, level, replicates};
        {
            std::lock_guard lk(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        double cv = simulate(bucket, level, replicates);
        std::lock_guard lk(mu_);
        return cache_.emplace(key, cv).first->second;
    }

    // Geometric buckets (ratio ~1.25) keep the table small while the
    // critical value varies slowly in n.
    static std::size_t bucket_of(std::size_t n) {
        if (n <= 8) return n;
        double b = std::round(std::log(static_cast<double>(n) / 8.0) / std::log(1.25));
        return static_cast<std::size_t>(std::round(8.0 * std::pow(1.25, b)));
    }

private:
    struct Key {
        std::size_t n;
        double level;
        std::size_t reps;
        bool operator<(const Key& o) const {
            return std::tie(n, level, reps) < std::tie(o.n, o.level, o.reps);
        }
    };

    static double simulate(std::size_t n, double level, std::size_t replicates) {
        Rng rng(0x5eedc0deULL + n * 1000003ULL);
        std::vector<double> stats(replicates);
        std::vector<double> xs(n), u(n);
        for (std::size_t r = 0; r < replicates; ++r) {
            for (auto& x : xs) x = rng.next_exponential(1.0);
            double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) u[i] = 1.0 - std::exp(-xs[i] / mean);
            std::sort(u.begin(), u.end());
            stats[r] = ad_statistic_uniform(u);
        }
        std::sort(stats.begin(), stats.end());
        double pos = (1.0 - level) * static_cast<double>(replicates - 1);
        std::size_t lo = static_cast<std::size_t>(pos);
        double frac = pos - static_cast<double>(lo);
        double cv = stats[lo];
        if (lo + 1 < replicates) cv += frac * (stats[lo + 1] - stats[lo]);
        return cv;
    }

    std::mutex mu_;
    std::map<Key, double> cache_;
};

inline TestResult ad_test_exponential(std::span<const double> xs, double alpha = 0.05) {
    if (xs.size() < 5) throw InsufficientData("ad_test_exponential: need at least 5 samples");
    detail::require_positive(xs, "ad_test_exponential");
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    std::vector<double> u(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) u[i] = 1.0 - std::exp(-xs[i] / mean);
    std::sort(u.begin(), u.end());
    TestResult r;
    r.statistic = ad_statistic_uniform(u);
    r.critical_value = AdCriticalTable::instance().critical(xs.size(), alpha);
    r.alpha = alpha;
    r.pass = r.statistic < r.critical_value;
    return r;
}

// ---------------------------------------------------------------------------
// Group-level pass-rate harness

enum class GofTest : std::uint8_t { KS, AD };

inline std::string to_string(GofTest t) { return t == GofTest::KS ? "ks" : "ad"; }

enum class RefFamily : std::uint8_t { EXPONENTIAL, PARETO, WEIBULL, EMPIRICAL_REF };

inline std::string to_string(RefFamily f) {
    switch (f) {
        case RefFamily::EXPONENTIAL: return "exponential";
        case RefFamily::PARETO: return "pareto";
        case RefFamily::WEIBULL: return "weibull";
        default: return "empirical";
    }
}

struct SampleGroup {
    std::string device;
    std::string quantity;
    std::vector<double> samples;
};

struct PassRateRow {
    std::string test;
    std::string device;
    std::string quantity;
    std::size_t group_count = 0;
    double pass_pct = 0;
};

// Fits the family to each group, tests the group against its own fit, and
// aggregates pass fractions per (device, quantity).  Groups too small to
// test (< 5 samples) are skipped; groups the family cannot be fitted to
// count as failing.
inline std::vector<PassRateRow> pass_rate_table(std::span<const SampleGroup> groups,
                                                RefFamily family, GofTest test,
                                                double alpha = 0.05,
                                                const EmpiricalCdf* reference = nullptr) {
    if (test == GofTest::AD && family != RefFamily::EXPONENTIAL)
        throw UnsupportedCombination("anderson-darling supports only the exponential family");
    if (family == RefFamily::EMPIRICAL_REF && reference == nullptr)
        throw UnsupportedCombination("empirical family requires a reference CDF");

    struct Tally {
        std::size_t total = 0;
        std::size_t passed = 0;
    };
    std::map<std::pair<std::string, std::string>, Tally> tallies;
    for (const auto& g : groups) {
        if (g.samples.size() < 5) continue;
        auto& t = tallies[{g.device, g.quantity}];
        ++t.total;
        bool pass = false;
        try {
            if (test == GofTest::AD) {
                pass = ad_test_exponential(g.samples, alpha).pass;
            } else {
                switch (family) {
                    case RefFamily::EXPONENTIAL: {
                        auto fit = fit_exponential(g.samples);
                        pass = ks_test(g.samples, [&](double x) { return fit.cdf(x); }, alpha).pass;
                        break;
                    }
                    case RefFamily::PARETO: {
                        auto fit = fit_pareto(g.samples);
                        pass = ks_test(g.samples, [&](double x) { return fit.cdf(x); }, alpha).pass;
                        break;
                    }
                    case RefFamily::WEIBULL: {
                        auto fit = fit_weibull(g.samples);
                        pass = ks_test(g.samples, [&](double x) { return fit.cdf(x); }, alpha).pass;
                        break;
                    }
                    case RefFamily::EMPIRICAL_REF: {
                        double d = ks_vs_reference(g.samples, *reference);
                        double n = static_cast<double>(g.samples.size());
                        pass = kolmogorov_sf(std::sqrt(n) * d) > alpha;
                        break;
                    }
                }
            }
        } catch (const Error&) {
            pass = false;
        }
        if (pass) ++t.passed;
    }

    std::vector<PassRateRow> rows;
    for (const auto& [key, t] : tallies) {
        PassRateRow r;
        r.test = to_string(test);
        r.device = key.first;
        r.quantity = key.second;
        r.group_count = t.total;
        r.pass_pct = t.total ? 100.0 * static_cast<double>(t.passed) / static_cast<double>(t.total) : 0.0;
        rows.push_back(std::move(r));
    }
    return rows;
}

// Reads `value,cum_prob` lines (optional header) into a reference CDF whose
// piecewise-linear interpolation serves as F for plotting while K-S testing
// treats the points as a weighted sample (two-sample form).
inline EmpiricalCdf load_empirical_reference(std::istream& in) {
    std::vector<EmpiricalCdf::Point> pts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.find("value") != std::string::npos) continue;
        auto fields = csv::split(line);
        if (fields.size() != 2)
            throw SchemaViolation("reference:" + std::to_string(line_no), "expected value,cum_prob");
        double value = 0, prob = 0;
        if (!csv::parse_double(csv::trim(fields[0]), value) ||
            !csv::parse_double(csv::trim(fields[1]), prob))
            throw SchemaViolation("reference:" + std::to_string(line_no), "bad number");
        pts.push_back({value, prob});
    }
    try {
        return EmpiricalCdf::from_points(std::move(pts));
    } catch (const Error& e) {
        throw SchemaViolation("reference", e.what());
    }
}

} // namespace mcn

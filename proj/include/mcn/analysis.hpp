#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mcn/csv.hpp"
#include "mcn/dist_fit.hpp"
#include "mcn/empirical_cdf.hpp"
#include "mcn/errors.hpp"
#include "mcn/generator.hpp"
#include "mcn/rng.hpp"
#include "mcn/state_machine.hpp"
#include "mcn/trace.hpp"

namespace mcn {

// A trace with per-event machine states, the common input of every report.
// Raw traces get their annotations from replay; generated traces carry them.
struct AnnotatedUe {
    std::string ue_id;
    DeviceType device;
    std::vector<AnnotatedEvent> events;
};

struct AnnotatedTrace {
    std::vector<AnnotatedUe> ues;
    std::int64_t span_lo = 0;
    std::int64_t span_hi = 0;
    Generation generation = Generation::LTE;

    bool empty() const {
        for (const auto& u : ues)
            if (!u.events.empty()) return false;
        return true;
    }
};

inline AnnotatedTrace annotate(const Trace& trace) {
    AnnotatedTrace out;
    auto [lo, hi] = trace.span();
    out.span_lo = lo;
    out.span_hi = hi;
    out.ues.reserve(trace.ues.size());
    for (const auto& ue : trace.ues) {
        auto rep = replay(ue.events, BootstrapPolicy::INFER_FROM_FIRST_EVENT, ue.ue_id);
        out.ues.push_back({ue.ue_id, ue.device, std::move(rep.annotated)});
    }
    return out;
}

inline AnnotatedTrace annotate(std::span<const SynthEvent> events, std::size_t ue_count,
                               Generation gen = Generation::LTE) {
    AnnotatedTrace out;
    out.generation = gen;
    out.ues.resize(ue_count);
    const int width = synth_id_width(ue_count);
    for (std::size_t i = 0; i < ue_count; ++i) out.ues[i].ue_id = synth_ue_id(
        static_cast<std::uint32_t>(i), width);
    bool first = true;
    for (const auto& e : events) {
        auto& ue = out.ues.at(e.ue);
        ue.device = e.device;
        ue.events.push_back({e.timestamp_ms, e.event, {e.top, e.sub}});
        if (first || e.timestamp_ms < out.span_lo) out.span_lo = e.timestamp_ms;
        if (first || e.timestamp_ms > out.span_hi) out.span_hi = e.timestamp_ms;
        first = false;
    }
    return out;
}

// Strips annotations so a generated trace can be refit like a raw one.
inline Trace to_trace(const AnnotatedTrace& at) {
    Trace out;
    out.ues.reserve(at.ues.size());
    for (const auto& ue : at.ues) {
        UeTrace ut{ue.ue_id, ue.device, {}};
        ut.events.reserve(ue.events.size());
        for (const auto& ev : ue.events) ut.events.push_back({ev.timestamp_ms, ev.event_type});
        out.ues.push_back(std::move(ut));
    }
    std::sort(out.ues.begin(), out.ues.end(),
              [](const UeTrace& a, const UeTrace& b) { return a.ue_id < b.ue_id; });
    return out;
}

// --- event breakdown ------------------------------------------------------

struct BreakdownRow {
    DeviceType device;
    std::string event;  // event label, HO/TAU carry their top state
    double pct;
};

namespace detail {

inline std::string split_label(EventType e, TopState top, Generation gen) {
    std::string label(to_string(e, gen));
    switch (top) {
        case TopState::CONNECTED: return label + " (CONN)";
        case TopState::IDLE: return label + " (IDLE)";
        case TopState::DEREGISTERED: return label + " (DEREG)";
    }
    return label;
}

} // namespace detail

// Percentage of each event type per device; HO and TAU are split by the top
// state they occur in. Rows for every canonical label appear even at 0%.
inline std::vector<BreakdownRow> event_breakdown(const AnnotatedTrace& trace) {
    struct Counter {
        std::map<std::string, std::size_t> by_label;
        std::size_t total = 0;
    };
    std::map<DeviceType, Counter> counters;
    for (const auto& ue : trace.ues) {
        if (ue.events.empty()) continue;
        auto& c = counters[ue.device];
        for (const auto& ev : ue.events) {
            std::string label;
            if (ev.event_type == EventType::HO || ev.event_type == EventType::TAU)
                label = detail::split_label(ev.event_type, ev.state_after.top,
                                            trace.generation);
            else
                label = std::string(to_string(ev.event_type, trace.generation));
            ++c.by_label[label];
            ++c.total;
        }
    }
    std::vector<BreakdownRow> rows;
    for (auto& [dev, c] : counters) {
        // Canonical labels first, in vocabulary order, zeros included.
        std::vector<std::string> order;
        for (EventType e : kAllEvents) {
            if (trace.generation == Generation::FIVE_G && e == EventType::TAU) continue;
            if (e == EventType::HO || e == EventType::TAU) {
                order.push_back(detail::split_label(e, TopState::CONNECTED, trace.generation));
                order.push_back(detail::split_label(e, TopState::IDLE, trace.generation));
            } else {
                order.emplace_back(to_string(e, trace.generation));
            }
        }
        for (const auto& label : order) {
            auto it = c.by_label.find(label);
            double n = it == c.by_label.end()
                           ? 0.0
                           : static_cast<double>(it->second);
            rows.push_back({dev, label, 100.0 * n / static_cast<double>(c.total)});
            if (it != c.by_label.end()) c.by_label.erase(it);
        }
        for (const auto& [label, n] : c.by_label)  // e.g. HO (DEREG) from the baseline
            rows.push_back({dev, label, 100.0 * static_cast<double>(n) /
                                            static_cast<double>(c.total)});
    }
    return rows;
}

// --- state-time breakdown -------------------------------------------------

struct StateTimeRow {
    DeviceType device;
    double registered_pct;
    double deregistered_pct;
    double connected_pct;
    double idle_pct;
};

// Share of UE-time per top state over the observation span. The state before
// a UE's first event follows the same bootstrap rule as replay; a UE with no
// events counts as DEREGISTERED throughout.
inline std::vector<StateTimeRow> state_time_breakdown(const AnnotatedTrace& trace) {
    std::map<DeviceType, std::array<double, 3>> time_in;  // ms per TopState
    const double span = static_cast<double>(trace.span_hi - trace.span_lo);
    for (const auto& ue : trace.ues) {
        auto& acc = time_in[ue.device];
        if (span <= 0) continue;
        TopState cur = ue.events.empty()
                           ? TopState::DEREGISTERED
                           : bootstrap_prior(ue.events.front().event_type).top;
        std::int64_t t = trace.span_lo;
        for (const auto& ev : ue.events) {
            acc[static_cast<std::size_t>(cur)] += static_cast<double>(ev.timestamp_ms - t);
            cur = ev.state_after.top;
            t = ev.timestamp_ms;
        }
        acc[static_cast<std::size_t>(cur)] += static_cast<double>(trace.span_hi - t);
    }
    std::vector<StateTimeRow> rows;
    for (const auto& [dev, acc] : time_in) {
        double total = acc[0] + acc[1] + acc[2];
        if (total <= 0) continue;
        double dereg = 100.0 * acc[static_cast<std::size_t>(TopState::DEREGISTERED)] / total;
        double conn = 100.0 * acc[static_cast<std::size_t>(TopState::CONNECTED)] / total;
        double idle = 100.0 * acc[static_cast<std::size_t>(TopState::IDLE)] / total;
        rows.push_back({dev, conn + idle, dereg, conn, idle});
    }
    return rows;
}

// --- hourly box statistics ------------------------------------------------

struct BoxRow {
    int hour;  // hour of day
    double min, q1, median, mean, q3, max;
};

enum class DayFilter : std::uint8_t { ALL, WEEKDAY, WEEKEND };

struct HourlyMetric {
    enum class Kind : std::uint8_t { EVENT_COUNT, MEAN_SOJOURN, TAU_CONN_SHARE } kind;
    EventType event = EventType::ATCH;  // EVENT_COUNT
    TopState state = TopState::CONNECTED;  // MEAN_SOJOURN

    static HourlyMetric event_count(EventType e) { return {Kind::EVENT_COUNT, e, {}}; }
    static HourlyMetric mean_sojourn(TopState s) {
        return {Kind::MEAN_SOJOURN, {}, s};
    }
    static HourlyMetric tau_conn_share() { return {Kind::TAU_CONN_SHARE, {}, {}}; }
};

// Linear interpolation between order statistics (inclusive convention).
inline double quantile_inclusive(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw EmptySample("quantile_inclusive");
    if (sorted.size() == 1) return sorted[0];
    double rank = p * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(rank);
    if (lo >= sorted.size() - 1) return sorted.back();
    double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Completed top-level sojourns reconstructed from state annotations: the
// entry time of a top state is only known once a top change has been seen.
// fn(state, duration_ms, end_ts) per completed stay.
template <typename Fn>
void for_each_top_sojourn(const AnnotatedUe& ue, Fn&& fn) {
    if (ue.events.empty()) return;
    TopState cur = bootstrap_prior(ue.events.front().event_type).top;
    std::optional<std::int64_t> entry;
    for (const auto& ev : ue.events) {
        if (ev.state_after.top != cur) {
            if (entry) fn(cur, ev.timestamp_ms - *entry, ev.timestamp_ms);
            entry = ev.timestamp_ms;
            cur = ev.state_after.top;
        }
    }
}

// Box statistics of a per-UE metric by hour of day, pooled across matching
// days. EVENT_COUNT is defined (0) for silent UE-hours; the other metrics
// only where at least one observation exists.
inline std::vector<BoxRow> hourly_box_stats(const AnnotatedTrace& trace,
                                            const HourlyMetric& metric,
                                            DayFilter filter = DayFilter::ALL,
                                            const TimeConfig& tc = {}) {
    if (trace.empty()) throw InsufficientData("hourly_box_stats: empty trace");
    const std::int64_t h_lo = tc.hour_index(trace.span_lo);
    const std::int64_t h_hi = tc.hour_index(trace.span_hi);
    std::array<std::vector<double>, 24> pools;

    auto hod_of = [](std::int64_t abs_hour) {
        return static_cast<std::size_t>(((abs_hour % 24) + 24) % 24);
    };
    auto keep_hour = [&](std::int64_t abs_hour) {
        if (filter == DayFilter::ALL) return true;
        bool weekend = tc.is_weekend(TimeConfig::floor_div(abs_hour, 24));
        return filter == DayFilter::WEEKEND ? weekend : !weekend;
    };

    for (const auto& ue : trace.ues) {
        switch (metric.kind) {
            case HourlyMetric::Kind::EVENT_COUNT: {
                std::map<std::int64_t, double> counts;
                for (const auto& ev : ue.events)
                    if (ev.event_type == metric.event) ++counts[tc.hour_index(ev.timestamp_ms)];
                for (std::int64_t h = h_lo; h <= h_hi; ++h) {
                    if (!keep_hour(h)) continue;
                    auto it = counts.find(h);
                    pools[hod_of(h)].push_back(it == counts.end() ? 0.0 : it->second);
                }
                break;
            }
            case HourlyMetric::Kind::MEAN_SOJOURN: {
                std::map<std::int64_t, std::pair<double, std::size_t>> sums;
                for_each_top_sojourn(ue, [&](TopState s, std::int64_t dur_ms,
                                             std::int64_t end_ts) {
                    if (s != metric.state) return;
                    auto& [sum, n] = sums[tc.hour_index(end_ts)];
                    sum += static_cast<double>(dur_ms) / 1000.0;
                    ++n;
                });
                for (const auto& [h, sn] : sums) {
                    if (h < h_lo || h > h_hi || !keep_hour(h)) continue;
                    pools[hod_of(h)].push_back(sn.first / static_cast<double>(sn.second));
                }
                break;
            }
            case HourlyMetric::Kind::TAU_CONN_SHARE: {
                std::map<std::int64_t, std::pair<std::size_t, std::size_t>> tau;  // conn, total
                for (const auto& ev : ue.events) {
                    if (ev.event_type != EventType::TAU) continue;
                    auto& [conn, total] = tau[tc.hour_index(ev.timestamp_ms)];
                    if (ev.state_after.top == TopState::CONNECTED) ++conn;
                    ++total;
                }
                for (const auto& [h, ct] : tau) {
                    if (h < h_lo || h > h_hi || !keep_hour(h)) continue;
                    pools[hod_of(h)].push_back(100.0 * static_cast<double>(ct.first) /
                                               static_cast<double>(ct.second));
                }
                break;
            }
        }
    }

    std::vector<BoxRow> rows;
    for (int hod = 0; hod < 24; ++hod) {
        auto& xs = pools[static_cast<std::size_t>(hod)];
        if (xs.empty()) continue;
        std::sort(xs.begin(), xs.end());
        double mean = 0;
        for (double v : xs) mean += v;
        mean /= static_cast<double>(xs.size());
        rows.push_back({hod, xs.front(), quantile_inclusive(xs, 0.25),
                        quantile_inclusive(xs, 0.5), mean, quantile_inclusive(xs, 0.75),
                        xs.back()});
    }
    return rows;
}

// --- variance-time analysis -----------------------------------------------

struct VtPoint {
    double scale_s;
    double norm_var;
};

inline std::vector<double> default_vt_scales() {
    return {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
}

// Variance-time curve: 100 ms bins from the first event; for each window
// size M the per-window mean bin occupancy k_i, and the output is
// Var(k)/Mean(k)^2 over complete windows.
inline std::vector<VtPoint> variance_time(std::span<const std::int64_t> timestamps_ms,
                                          std::span<const double> scales_s = {}) {
    if (timestamps_ms.empty()) throw DegenerateStream();
    std::vector<double> default_scales;
    if (scales_s.empty()) {
        default_scales = default_vt_scales();
        scales_s = default_scales;
    }
    const std::int64_t t0 = *std::min_element(timestamps_ms.begin(), timestamps_ms.end());
    const std::int64_t t1 = *std::max_element(timestamps_ms.begin(), timestamps_ms.end());
    const std::int64_t n_bins = (t1 - t0) / 100 + 1;
    std::vector<std::uint32_t> bins(static_cast<std::size_t>(n_bins), 0);
    for (std::int64_t ts : timestamps_ms) ++bins[static_cast<std::size_t>((ts - t0) / 100)];

    std::vector<VtPoint> out;
    for (double m : scales_s) {
        const auto bins_per_window = static_cast<std::size_t>(std::llround(m * 10.0));
        if (bins_per_window == 0) continue;
        const std::size_t n_windows = bins.size() / bins_per_window;
        if (n_windows == 0) continue;
        std::vector<double> k(n_windows);
        for (std::size_t w = 0; w < n_windows; ++w) {
            std::uint64_t c = 0;
            for (std::size_t b = w * bins_per_window; b < (w + 1) * bins_per_window; ++b)
                c += bins[b];
            k[w] = static_cast<double>(c) / static_cast<double>(bins_per_window);
        }
        double mean = 0;
        for (double v : k) mean += v;
        mean /= static_cast<double>(n_windows);
        if (mean <= 0) throw DegenerateStream();
        double var = 0;
        for (double v : k) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n_windows);
        out.push_back({m, var / (mean * mean)});
    }
    return out;
}

// Homogeneous Poisson stream matching the input's mean rate and span, for
// the companion curve of a variance-time plot.
inline std::vector<std::int64_t> poisson_companion(std::span<const std::int64_t> timestamps_ms,
                                                   std::uint64_t seed = 0) {
    if (timestamps_ms.empty()) throw DegenerateStream();
    const std::int64_t t0 = *std::min_element(timestamps_ms.begin(), timestamps_ms.end());
    const std::int64_t t1 = *std::max_element(timestamps_ms.begin(), timestamps_ms.end());
    const double span_s = static_cast<double>(t1 - t0) / 1000.0;
    if (span_s <= 0) throw DegenerateStream();
    const double rate = static_cast<double>(timestamps_ms.size()) / span_s;
    Rng rng = Rng::for_stream(seed, 0x706f6973);
    std::vector<std::int64_t> out;
    out.reserve(timestamps_ms.size() + 16);
    double t = static_cast<double>(t0) / 1000.0;
    const double end = static_cast<double>(t1) / 1000.0;
    while (true) {
        t += rng.next_exponential(rate);
        if (t > end) break;
        out.push_back(std::llround(t * 1000.0));
    }
    if (out.empty()) out.push_back(t0);
    return out;
}

// --- CDF comparison -------------------------------------------------------

struct UeMetric {
    enum class Kind : std::uint8_t { EVENT_COUNT, STATE_TIME } kind;
    EventType event = EventType::ATCH;
    TopState state = TopState::CONNECTED;

    static UeMetric event_count(EventType e) { return {Kind::EVENT_COUNT, e, {}}; }
    static UeMetric state_time(TopState s) { return {Kind::STATE_TIME, {}, s}; }
};

enum class ActivityFilter : std::uint8_t { ALL, INACTIVE, ACTIVE };  // ≤2 / >2 events

// One metric value per UE. EVENT_COUNT counts events of the type (0 for
// silent UEs); STATE_TIME is the UE's total seconds in the top state over
// the span, using the same conventions as state_time_breakdown.
inline std::vector<double> ue_metric_samples(const AnnotatedTrace& trace,
                                             const UeMetric& metric,
                                             ActivityFilter filter = ActivityFilter::ALL) {
    std::vector<double> out;
    for (const auto& ue : trace.ues) {
        if (filter != ActivityFilter::ALL) {
            bool inactive = ue.events.size() <= 2;
            if ((filter == ActivityFilter::INACTIVE) != inactive) continue;
        }
        switch (metric.kind) {
            case UeMetric::Kind::EVENT_COUNT: {
                double n = 0;
                for (const auto& ev : ue.events)
                    if (ev.event_type == metric.event) ++n;
                out.push_back(n);
                break;
            }
            case UeMetric::Kind::STATE_TIME: {
                double ms = 0;
                TopState cur = ue.events.empty()
                                   ? TopState::DEREGISTERED
                                   : bootstrap_prior(ue.events.front().event_type).top;
                std::int64_t t = trace.span_lo;
                for (const auto& ev : ue.events) {
                    if (cur == metric.state) ms += static_cast<double>(ev.timestamp_ms - t);
                    cur = ev.state_after.top;
                    t = ev.timestamp_ms;
                }
                if (cur == metric.state) ms += static_cast<double>(trace.span_hi - t);
                out.push_back(ms / 1000.0);
                break;
            }
        }
    }
    return out;
}

struct CdfComparison {
    double distance;  // max y-distance over all UEs
    std::optional<double> distance_inactive;  // UEs with ≤ 2 events
    std::optional<double> distance_active;    // UEs with > 2 events
    EmpiricalCdf real_cdf;
    EmpiricalCdf synth_cdf;
};

inline CdfComparison cdf_compare(const AnnotatedTrace& real, const AnnotatedTrace& synth,
                                 const UeMetric& metric, bool split = false) {
    auto a = ue_metric_samples(real, metric);
    auto b = ue_metric_samples(synth, metric);
    if (a.empty() || b.empty())
        throw InsufficientData("cdf_compare: a trace has no UEs");
    CdfComparison out;
    out.distance = ks_two_sample(a, b);
    out.real_cdf = EmpiricalCdf::from_samples(a);
    out.synth_cdf = EmpiricalCdf::from_samples(b);
    if (split) {
        auto ai = ue_metric_samples(real, metric, ActivityFilter::INACTIVE);
        auto bi = ue_metric_samples(synth, metric, ActivityFilter::INACTIVE);
        auto aa = ue_metric_samples(real, metric, ActivityFilter::ACTIVE);
        auto ba = ue_metric_samples(synth, metric, ActivityFilter::ACTIVE);
        if (!ai.empty() && !bi.empty()) out.distance_inactive = ks_two_sample(ai, bi);
        if (!aa.empty() && !ba.empty()) out.distance_active = ks_two_sample(aa, ba);
    }
    return out;
}

// --- annotated-trace CSV --------------------------------------------------

// Reads the generated-trace schema
// `timestamp_ms,ue_id,device_type,event_type,top_state,sub_state`, sniffing
// the event vocabulary (4G or 5G) from the first event column.
inline AnnotatedTrace parse_annotated_csv(std::istream& in) {
    AnnotatedTrace out;
    std::map<std::string, std::size_t> index;
    std::string line;
    std::size_t line_no = 0;
    bool gen_known = false;
    bool first_event_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = csv::trim(line);
        if (sv.empty()) continue;
        if (line_no == 1 && sv.find("timestamp_ms") != std::string_view::npos) continue;
        auto fields = csv::split(sv);
        if (fields.size() != 6)
            throw MalformedLine(line_no, "expected 6 fields, got " +
                                             std::to_string(fields.size()));
        std::int64_t ts;
        if (!csv::parse_i64(csv::trim(fields[0]), ts))
            throw MalformedLine(line_no, "bad timestamp");
        auto dev = device_from_string(csv::trim(fields[2]));
        if (!dev) throw MalformedLine(line_no, "unknown device type");
        auto ev_field = csv::trim(fields[3]);
        if (!gen_known) {
            if (event_from_string(ev_field, Generation::LTE))
                out.generation = Generation::LTE;
            else if (event_from_string(ev_field, Generation::FIVE_G))
                out.generation = Generation::FIVE_G;
            else
                throw MalformedLine(line_no, "unknown event type");
            gen_known = true;
        }
        auto ev = event_from_string(ev_field, out.generation);
        if (!ev) {
            // A 5G-only name can appear after 4G-compatible ones; re-sniff once.
            if (out.generation == Generation::LTE &&
                event_from_string(ev_field, Generation::FIVE_G)) {
                out.generation = Generation::FIVE_G;
                ev = event_from_string(ev_field, out.generation);
            }
            if (!ev) throw MalformedLine(line_no, "unknown event type");
        }
        auto top = top_state_from_string(csv::trim(fields[4]));
        auto sub = sub_state_from_string(csv::trim(fields[5]));
        if (!top || !sub) throw MalformedLine(line_no, "unknown machine state");

        std::string ue_id(csv::trim(fields[1]));
        auto [it, inserted] = index.try_emplace(ue_id, out.ues.size());
        if (inserted) out.ues.push_back({ue_id, *dev, {}});
        auto& ue = out.ues[it->second];
        if (ue.device != *dev)
            throw MalformedLine(line_no, "device type changes within UE " + ue_id);
        ue.events.push_back({ts, *ev, {*top, *sub}});
        if (!first_event_seen || ts < out.span_lo) out.span_lo = ts;
        if (!first_event_seen || ts > out.span_hi) out.span_hi = ts;
        first_event_seen = true;
    }
    for (auto& ue : out.ues)
        std::stable_sort(ue.events.begin(), ue.events.end(),
                         [](const AnnotatedEvent& a, const AnnotatedEvent& b) {
                             return a.timestamp_ms < b.timestamp_ms;
                         });
    return out;
}

// --- report writers -------------------------------------------------------

inline void write_breakdown_csv(std::span<const BreakdownRow> rows, std::ostream& out) {
    out << "device,event,pct\n";
    for (const auto& r : rows)
        out << to_string(r.device) << ',' << r.event << ',' << r.pct << '\n';
}

inline void write_box_csv(std::span<const BoxRow> rows, std::ostream& out) {
    out << "hour,min,q1,median,mean,q3,max\n";
    for (const auto& r : rows)
        out << r.hour << ',' << r.min << ',' << r.q1 << ',' << r.median << ',' << r.mean
            << ',' << r.q3 << ',' << r.max << '\n';
}

inline void write_vt_csv(std::span<const VtPoint> trace_pts, std::span<const VtPoint> poisson_pts,
                         std::ostream& out) {
    out << "scale_s,norm_var,source\n";
    for (const auto& p : trace_pts) out << p.scale_s << ',' << p.norm_var << ",trace\n";
    for (const auto& p : poisson_pts) out << p.scale_s << ',' << p.norm_var << ",poisson\n";
}

inline void write_cdf_csv(const EmpiricalCdf& real, const EmpiricalCdf& synth,
                          std::ostream& out) {
    out << "value,cum_prob,source\n";
    for (const auto& p : real.points()) out << p.value << ',' << p.cum_prob << ",real\n";
    for (const auto& p : synth.points()) out << p.value << ',' << p.cum_prob << ",synth\n";
}

} // namespace mcn

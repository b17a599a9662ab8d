#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <string>
#include <vector>

#include "mcn/csv.hpp"
#include "mcn/empirical_cdf.hpp"
#include "mcn/errors.hpp"
#include "mcn/events.hpp"
#include "mcn/model.hpp"

namespace mcn {

// Per-event frequency multipliers applied during 4G→5G conversion. Handover
// frequency grows sharply on mmWave cells; everything else defaults to 1.
struct ScalingFactors {
    std::array<double, kAllEvents.size()> factor{};

    ScalingFactors() {
        factor.fill(1.0);
        factor[static_cast<std::size_t>(EventType::HO)] = 4.6;
    }

    double of(EventType e) const { return factor[static_cast<std::size_t>(e)]; }
    void set(EventType e, double f) { factor[static_cast<std::size_t>(e)] = f; }
};

// Factors file: `event,factor` rows with 5G event names; header optional.
inline ScalingFactors parse_scaling_factors(std::istream& in) {
    ScalingFactors out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = csv::trim(line);
        if (sv.empty()) continue;
        if (line_no == 1 && sv.find("factor") != std::string_view::npos &&
            sv.find("event") != std::string_view::npos)
            continue;
        auto fields = csv::split(sv);
        if (fields.size() != 2)
            throw MalformedLine(line_no, "expected `event,factor`");
        auto ev = event_from_string(csv::trim(fields[0]), Generation::FIVE_G);
        if (!ev) ev = event_from_string(csv::trim(fields[0]), Generation::LTE);
        if (!ev || *ev == EventType::TAU)
            throw MalformedLine(line_no, "unknown 5G event type");
        double f;
        if (!csv::parse_double(csv::trim(fields[1]), f) || !(f > 0))
            throw MalformedLine(line_no, "factor must be a number > 0");
        out.set(*ev, f);
    }
    return out;
}

namespace detail {

inline bool removed_in_5g(SubState s) {
    return s == SubState::TAU_S_CONN || s == SubState::TAU_S_IDLE ||
           s == SubState::S1_REL_S_2;
}

// Frequency scaling on one state's outgoing distribution: each edge's weight
// is its probability times its factor, renormalized. For a single scaled
// edge this equals multiplying its odds p/(1-p) by the factor; a one-edge
// state keeps p = 1.
inline void scale_edges(StateModel& sm, const ScalingFactors& factors, bool scale_sojourn) {
    if (sm.edges.empty()) return;
    double total = 0;
    for (auto& e : sm.edges) total += e.prob * factors.of(e.via);
    if (total <= 0) return;
    for (auto& e : sm.edges) {
        double f = factors.of(e.via);
        e.prob = e.prob * f / total;
        if (scale_sojourn && f != 1.0) {
            std::vector<EmpiricalCdf::Point> pts(e.sojourn_s.points().begin(),
                                                 e.sojourn_s.points().end());
            for (auto& p : pts) p.value /= f;
            e.sojourn_s = EmpiricalCdf::from_points(pts);
        }
    }
}

inline void drop_tau_edges(StateModel& sm) {
    std::erase_if(sm.edges, [](const Edge& e) { return e.via == EventType::TAU; });
    double total = 0;
    for (const auto& e : sm.edges) total += e.prob;
    if (total > 0)
        for (auto& e : sm.edges) e.prob /= total;
}

inline FirstEventModel strip_tau_first_event(FirstEventModel fe) {
    double tau = fe.event_prob[static_cast<std::size_t>(EventType::TAU)];
    fe.event_prob[static_cast<std::size_t>(EventType::TAU)] = 0;
    double rest = 1.0 - tau;
    if (rest > 0) {
        for (auto& p : fe.event_prob) p /= rest;
        fe.silent_prob /= rest;
    } else {
        fe = FirstEventModel{};  // everything was TAU; the UE goes silent
    }
    double active = 0;
    for (double p : fe.event_prob) active += p;
    if (active <= 0) fe.start_offset_s.reset();
    return fe;
}

} // namespace detail

// LTE → 5G model conversion: removes the tracking-area-update structure,
// renormalizes the surviving distributions, applies the frequency factors,
// and switches the model to the 5G event vocabulary. `scale_sojourn`
// additionally divides sojourn durations on scaled edges by their factor.
inline TrafficModel convert_model_to_5g(const TrafficModel& model,
                                        const ScalingFactors& factors = {},
                                        bool scale_sojourn = false) {
    if (model.generation == Generation::FIVE_G) throw AlreadyFiveG();
    TrafficModel out = model;
    out.generation = Generation::FIVE_G;

    for (auto& [key, km] : out.keys) {
        for (std::size_t s = 0; s < kTopStateCount; ++s) {
            auto& sm = km.transitions.top[s];
            detail::drop_tau_edges(sm);  // TAU never labels a top edge; harmless
            detail::scale_edges(sm, factors, scale_sojourn);
        }
        for (std::size_t s = 0; s < kSubStateCount; ++s) {
            auto& sm = km.transitions.sub[s];
            if (detail::removed_in_5g(static_cast<SubState>(s))) {
                sm.edges.clear();
                continue;
            }
            detail::drop_tau_edges(sm);
            detail::scale_edges(sm, factors, scale_sojourn);
        }
        km.first_event = detail::strip_tau_first_event(km.first_event);
    }

    for (auto& [key, bm] : out.baseline) {
        for (auto& st : bm.states) {
            std::erase_if(st.edges,
                          [](const auto& ep) { return ep.first == EventType::TAU; });
            double total = 0;
            for (const auto& [e, p] : st.edges) total += p;
            double scaled = 0;
            for (auto& [e, p] : st.edges) scaled += (total > 0 ? p / total : p) * factors.of(e);
            if (scaled > 0)
                for (auto& [e, p] : st.edges)
                    p = (total > 0 ? p / total : p) * factors.of(e) / scaled;
        }
        bm.ho.rate_per_s *= factors.of(EventType::HO);
        bm.tau = BaselineStream{};
        bm.first_event = detail::strip_tau_first_event(bm.first_event);
    }

    validate_model(out);
    return out;
}

// Collects every way a model fails to be a well-formed 5G model. Empty iff
// no tracking-area-update structure remains and all distributions sum to 1.
inline std::vector<std::string> validate_5g_model(const TrafficModel& model) {
    std::vector<std::string> out;
    if (model.generation != Generation::FIVE_G) {
        out.push_back("model generation is " + std::string(to_string(model.generation)) +
                      ", not FIVE_G");
        return out;
    }
    auto key_path = [](const ModelKey& key) {
        return std::string(to_string(key.device)) + "/h" + std::to_string(key.hour_of_day) +
               "/c" + std::to_string(key.cluster);
    };
    auto check_state = [&](const StateModel& sm, const std::string& path) {
        if (sm.edges.empty()) return;
        double sum = 0;
        for (const auto& e : sm.edges) {
            if (e.via == EventType::TAU)
                out.push_back(path + ": tracking-area-update edge remains");
            sum += e.prob;
        }
        if (std::abs(sum - 1.0) > kProbTolerance)
            out.push_back(path + ": probabilities sum to " + std::to_string(sum));
    };
    for (const auto& [key, km] : model.keys) {
        std::string path = key_path(key);
        for (std::size_t s = 0; s < kTopStateCount; ++s)
            check_state(km.transitions.top[s],
                        path + "/" + std::string(to_string(static_cast<TopState>(s))));
        for (std::size_t s = 0; s < kSubStateCount; ++s) {
            auto sub = static_cast<SubState>(s);
            const auto& sm = km.transitions.sub[s];
            if (detail::removed_in_5g(sub) && !sm.edges.empty()) {
                out.push_back(path + "/" + std::string(to_string(sub)) +
                              ": removed state still has edges");
                continue;
            }
            if (sub == SubState::S1_REL_S_1 && !sm.edges.empty()) {
                out.push_back(path + "/S1_REL_S_1: must have no outgoing edges in 5G");
                continue;
            }
            check_state(sm, path + "/" + std::string(to_string(sub)));
        }
        if (km.first_event.prob(EventType::TAU) > 0)
            out.push_back(path + ": first-event mass on tracking-area update");
        double fe_sum = km.first_event.silent_prob;
        for (double p : km.first_event.event_prob) fe_sum += p;
        if (std::abs(fe_sum - 1.0) > kProbTolerance)
            out.push_back(path + ": first-event probabilities sum to " +
                          std::to_string(fe_sum));
    }
    for (const auto& [key, bm] : model.baseline) {
        std::string path = "baseline/" + key_path(key);
        for (std::size_t s = 0; s < kTopStateCount; ++s) {
            const auto& st = bm.states[s];
            if (st.edges.empty()) continue;
            double sum = 0;
            for (const auto& [e, p] : st.edges) {
                if (e == EventType::TAU)
                    out.push_back(path + ": tracking-area-update edge remains");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kProbTolerance)
                out.push_back(path + "/" +
                              std::string(to_string(static_cast<TopState>(s))) +
                              ": probabilities sum to " + std::to_string(sum));
        }
        if (bm.tau.occur_prob > 0)
            out.push_back(path + ": tracking-area-update stream still active");
        if (bm.first_event.prob(EventType::TAU) > 0)
            out.push_back(path + ": first-event mass on tracking-area update");
    }
    return out;
}

} // namespace mcn

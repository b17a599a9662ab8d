#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcn/clustering.hpp"
#include "mcn/errors.hpp"
#include "mcn/model.hpp"
#include "mcn/parallel.hpp"
#include "mcn/state_machine.hpp"
#include "mcn/trace.hpp"

namespace mcn {

// First observation of a UE-hour: either silent or (event, offset into hour).
struct FirstEvent {
    bool silent;
    EventType event;
    double offset_s;
};

inline FirstEventModel fit_first_event(std::span<const FirstEvent> firsts) {
    if (firsts.empty()) throw InsufficientData("fit_first_event: no observations");
    FirstEventModel fe;
    std::array<std::size_t, kAllEvents.size()> counts{};
    std::size_t silent = 0;
    std::vector<double> offsets;
    for (const auto& f : firsts) {
        if (f.silent) {
            ++silent;
        } else {
            ++counts[static_cast<std::size_t>(f.event)];
            offsets.push_back(f.offset_s);
        }
    }
    const double n = static_cast<double>(firsts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        fe.event_prob[i] = static_cast<double>(counts[i]) / n;
    fe.silent_prob = static_cast<double>(silent) / n;
    if (!offsets.empty()) fe.start_offset_s = EmpiricalCdf::from_samples(std::move(offsets));
    return fe;
}

// Branch probabilities and per-edge sojourn CDFs from the completed samples
// of one (device, hour, cluster) pool. Censored samples are excluded.
inline TransitionModel estimate_transitions(std::span<const SojournSample> samples) {
    TransitionModel tm;
    using Durs = std::array<std::vector<double>, kAllEvents.size()>;
    std::array<Durs, kTopStateCount> top{};
    std::array<Durs, kSubStateCount> sub{};
    for (const auto& s : samples) {
        if (s.censored) continue;
        double dur = static_cast<double>(s.duration_ms) / 1000.0;
        if (s.level == Level::TOP)
            top[static_cast<std::size_t>(s.top_from)][static_cast<std::size_t>(s.via)]
                .push_back(dur);
        else
            sub[static_cast<std::size_t>(s.sub_from)][static_cast<std::size_t>(s.via)]
                .push_back(dur);
    }
    auto build = [](Durs& durs) {
        StateModel sm;
        std::size_t total = 0;
        for (const auto& d : durs) total += d.size();
        if (total == 0) return sm;
        for (std::size_t e = 0; e < durs.size(); ++e) {
            if (durs[e].empty()) continue;
            Edge edge;
            edge.via = static_cast<EventType>(e);
            edge.prob = static_cast<double>(durs[e].size()) / static_cast<double>(total);
            edge.sojourn_s = EmpiricalCdf::from_samples(std::move(durs[e]));
            sm.edges.push_back(std::move(edge));
        }
        return sm;
    };
    for (std::size_t s = 0; s < kTopStateCount; ++s) tm.top[s] = build(top[s]);
    for (std::size_t s = 0; s < kSubStateCount; ++s) tm.sub[s] = build(sub[s]);
    return tm;
}

struct FitParams {
    ClusterParams cluster;
    TimeConfig time;
    Generation generation = Generation::LTE;
    int threads = 1;
};

namespace detail {

inline bool is_machine_walk_event(EventType e) {
    return e == EventType::ATCH || e == EventType::DTCH || e == EventType::SRV_REQ ||
           e == EventType::S1_CONN_REL;
}

// Everything one ModelKey needs, pooled across member UE-hours.
struct KeyAccumulator {
    std::vector<SojournSample> sojourns;
    std::vector<FirstEvent> firsts;
    std::vector<FirstEvent> firsts_walk;  // ATCH/DTCH/SRV_REQ/S1_CONN_REL group
    std::vector<double> ho_first_s, tau_first_s;
    std::vector<double> ho_gaps_s, tau_gaps_s;
    std::size_t instances = 0;
    std::size_t ho_hits = 0, tau_hits = 0;
};

inline double rate_from_mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    return mean > 0 ? 1.0 / mean : 0.0;
}

inline BaselineKeyModel fit_baseline_key(const KeyAccumulator& acc) {
    BaselineKeyModel bm;
    std::array<std::vector<double>, kTopStateCount> durs{};
    std::array<std::array<std::size_t, kAllEvents.size()>, kTopStateCount> counts{};
    for (const auto& s : acc.sojourns) {
        if (s.censored || s.level != Level::TOP) continue;
        durs[static_cast<std::size_t>(s.top_from)].push_back(
            static_cast<double>(s.duration_ms) / 1000.0);
        ++counts[static_cast<std::size_t>(s.top_from)][static_cast<std::size_t>(s.via)];
    }
    for (std::size_t st = 0; st < kTopStateCount; ++st) {
        auto& b = bm.states[st];
        b.rate_per_s = rate_from_mean(durs[st]);
        std::size_t total = std::accumulate(counts[st].begin(), counts[st].end(), std::size_t{0});
        if (total == 0) continue;
        for (std::size_t e = 0; e < kAllEvents.size(); ++e)
            if (counts[st][e] > 0)
                b.edges.emplace_back(static_cast<EventType>(e),
                                     static_cast<double>(counts[st][e]) /
                                         static_cast<double>(total));
    }
    auto fit_stream = [&](std::size_t hits, const std::vector<double>& first,
                          const std::vector<double>& gaps) {
        BaselineStream str;
        str.occur_prob = acc.instances
                             ? static_cast<double>(hits) / static_cast<double>(acc.instances)
                             : 0.0;
        str.rate_per_s = rate_from_mean(gaps);
        if (!first.empty()) str.first_offset_s = EmpiricalCdf::from_samples(first);
        return str;
    };
    bm.ho = fit_stream(acc.ho_hits, acc.ho_first_s, acc.ho_gaps_s);
    bm.tau = fit_stream(acc.tau_hits, acc.tau_first_s, acc.tau_gaps_s);
    bm.first_event = fit_first_event(acc.firsts_walk);
    return bm;
}

} // namespace detail

// Full fitting pipeline: replay every UE, build per-(device, hour-of-day)
// feature pools across days, cluster them, then estimate the semi-Markov
// parameters, first-event models, cluster trajectories, and the Poisson
// baseline per (device, hour, cluster).
inline TrafficModel fit(const Trace& trace, const FitParams& params = {},
                        std::vector<std::string>* warnings = nullptr) {
    if (trace.empty()) throw InsufficientData("fit: empty trace");
    const TimeConfig& tc = params.time;
    const auto [t_min, t_max] = trace.span();
    const std::int64_t h_lo = tc.hour_index(t_min);
    const std::int64_t h_hi = tc.hour_index(t_max);
    const std::size_t n_hours = static_cast<std::size_t>(h_hi - h_lo + 1);
    const std::size_t n_ues = trace.ues.size();

    // Replay (parallel, deterministic: independent slots per UE).
    std::vector<ReplayResult> replays(n_ues);
    parallel_for(n_ues, params.threads, [&](std::size_t i) {
        const auto& ue = trace.ues[i];
        replays[i] = replay(ue.events, BootstrapPolicy::INFER_FROM_FIRST_EVENT, ue.ue_id);
    });

    // Per-UE, per-hour instance boundaries and features.
    struct UeHourData {
        std::uint32_t ev_begin, ev_end;
        std::uint32_t so_begin, so_end;
    };
    std::vector<std::vector<UeHourData>> spans(n_ues);
    std::vector<std::vector<FeatureVector>> feats(n_ues);
    parallel_for(n_ues, params.threads, [&](std::size_t i) {
        const auto& events = trace.ues[i].events;
        const auto& sojourns = replays[i].sojourns;
        auto& sp = spans[i];
        auto& ft = feats[i];
        sp.resize(n_hours);
        ft.resize(n_hours);
        std::uint32_t e = 0, s = 0;
        for (std::size_t h = 0; h < n_hours; ++h) {
            const std::int64_t hour = h_lo + static_cast<std::int64_t>(h);
            auto& d = sp[h];
            d.ev_begin = e;
            while (e < events.size() && tc.hour_index(events[e].timestamp_ms) == hour) ++e;
            d.ev_end = e;
            d.so_begin = s;
            while (s < sojourns.size() && tc.hour_index(sojourns[s].end_ts) == hour) ++s;
            d.so_end = s;
            ft[h] = extract_features(
                std::span(events).subspan(d.ev_begin, d.ev_end - d.ev_begin),
                std::span(sojourns).subspan(d.so_begin, d.so_end - d.so_begin));
        }
    });

    // Pool instances per (device, hour-of-day) and cluster each pool.
    struct Pool {
        std::vector<FeatureVector> features;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> refs;  // (ue, hour offset)
    };
    std::map<std::pair<DeviceType, int>, Pool> pools;
    for (std::size_t i = 0; i < n_ues; ++i) {
        DeviceType dev = trace.ues[i].device;
        for (std::size_t h = 0; h < n_hours; ++h) {
            int hod = static_cast<int>(((h_lo + static_cast<std::int64_t>(h)) % 24 + 24) % 24);
            auto& pool = pools[{dev, hod}];
            pool.features.push_back(feats[i][h]);
            pool.refs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(h));
        }
    }

    TrafficModel model;
    model.generation = params.generation;
    for (std::int64_t h = h_lo; h <= h_hi && model.hours.size() < 24; ++h) {
        int hod = static_cast<int>((h % 24 + 24) % 24);
        if (!std::count(model.hours.begin(), model.hours.end(), hod)) model.hours.push_back(hod);
    }
    std::sort(model.hours.begin(), model.hours.end());

    std::vector<std::vector<std::int32_t>> cluster_of(n_ues);
    for (auto& c : cluster_of) c.assign(n_hours, -1);
    for (auto& [dh, pool] : pools) {
        auto [tree, assignment] = adaptive_cluster(pool.features, params.cluster);
        model.weights[dh] = std::move(assignment.weights);
        for (std::size_t i = 0; i < pool.refs.size(); ++i)
            cluster_of[pool.refs[i].first][pool.refs[i].second] = assignment.cluster_of[i];
        pool.features.clear();
        pool.features.shrink_to_fit();
    }

    // Accumulate per-key pools.
    std::map<ModelKey, detail::KeyAccumulator> accs;
    for (std::size_t i = 0; i < n_ues; ++i) {
        const auto& ue = trace.ues[i];
        const auto& sojourns = replays[i].sojourns;
        for (std::size_t h = 0; h < n_hours; ++h) {
            const std::int64_t hour = h_lo + static_cast<std::int64_t>(h);
            const std::int64_t hour_start_shifted = hour * kMsPerHour;
            int hod = static_cast<int>((hour % 24 + 24) % 24);
            ModelKey key{ue.device, hod, cluster_of[i][h]};
            auto& acc = accs[key];
            ++acc.instances;
            const auto& d = spans[i][h];
            for (std::uint32_t s = d.so_begin; s < d.so_end; ++s)
                acc.sojourns.push_back(sojourns[s]);

            FirstEvent fe{true, EventType::ATCH, 0.0};
            FirstEvent fw{true, EventType::ATCH, 0.0};
            std::int64_t prev_ho = -1, prev_tau = -1;
            for (std::uint32_t e = d.ev_begin; e < d.ev_end; ++e) {
                const auto& ev = ue.events[e];
                double offset_s =
                    static_cast<double>(tc.shifted(ev.timestamp_ms) - hour_start_shifted) / 1000.0;
                if (fe.silent) fe = {false, ev.event_type, offset_s};
                if (fw.silent && detail::is_machine_walk_event(ev.event_type))
                    fw = {false, ev.event_type, offset_s};
                if (ev.event_type == EventType::HO) {
                    if (prev_ho < 0) {
                        ++acc.ho_hits;
                        acc.ho_first_s.push_back(offset_s);
                    } else {
                        acc.ho_gaps_s.push_back(
                            static_cast<double>(ev.timestamp_ms - prev_ho) / 1000.0);
                    }
                    prev_ho = ev.timestamp_ms;
                } else if (ev.event_type == EventType::TAU) {
                    if (prev_tau < 0) {
                        ++acc.tau_hits;
                        acc.tau_first_s.push_back(offset_s);
                    } else {
                        acc.tau_gaps_s.push_back(
                            static_cast<double>(ev.timestamp_ms - prev_tau) / 1000.0);
                    }
                    prev_tau = ev.timestamp_ms;
                }
            }
            acc.firsts.push_back(fe);
            acc.firsts_walk.push_back(fw);
        }
    }

    // Estimate every key (parallel over keys, each slot independent).
    std::vector<const std::pair<const ModelKey, detail::KeyAccumulator>*> acc_list;
    acc_list.reserve(accs.size());
    for (const auto& kv : accs) acc_list.push_back(&kv);
    std::vector<KeyModel> key_models(acc_list.size());
    std::vector<BaselineKeyModel> baseline_models(acc_list.size());
    parallel_for(acc_list.size(), params.threads, [&](std::size_t k) {
        const auto& acc = acc_list[k]->second;
        KeyModel km;
        km.transitions = estimate_transitions(acc.sojourns);
        km.first_event = fit_first_event(acc.firsts);
        key_models[k] = std::move(km);
        baseline_models[k] = detail::fit_baseline_key(acc);
    });
    for (std::size_t k = 0; k < acc_list.size(); ++k) {
        model.keys.emplace(acc_list[k]->first, std::move(key_models[k]));
        model.baseline.emplace(acc_list[k]->first, std::move(baseline_models[k]));
    }

    if (warnings) {
        for (const auto* kv : acc_list) {
            const auto& acc = kv->second;
            std::array<bool, kTopStateCount> occupied{};
            std::array<bool, kTopStateCount> exits{};
            for (const auto& s : acc.sojourns) {
                occupied[static_cast<std::size_t>(s.top_from)] = true;
                if (!s.censored) {
                    occupied[static_cast<std::size_t>(s.top_to)] = true;
                    if (s.level == Level::TOP) exits[static_cast<std::size_t>(s.top_from)] = true;
                }
            }
            for (std::size_t st = 0; st < kTopStateCount; ++st)
                if (occupied[st] && !exits[st])
                    warnings->push_back(
                        std::string(to_string(kv->first.device)) + " h" +
                        std::to_string(kv->first.hour_of_day) + " c" +
                        std::to_string(kv->first.cluster) + ": no completed exit from " +
                        std::string(to_string(static_cast<TopState>(st))));
        }
    }

    // Daily cluster paths: one profile per (UE, day) that covers every
    // modeled hour; identical paths merge with multiplicity weights.
    std::map<DeviceType, std::map<std::vector<std::int32_t>, std::size_t>> path_counts;
    const std::int64_t d_lo = TimeConfig::floor_div(h_lo, 24);
    const std::int64_t d_hi = TimeConfig::floor_div(h_hi, 24);
    for (std::size_t i = 0; i < n_ues; ++i) {
        for (std::int64_t day = d_lo; day <= d_hi; ++day) {
            std::vector<std::int32_t> path;
            path.reserve(model.hours.size());
            bool complete = true;
            for (int hod : model.hours) {
                std::int64_t abs_hour = day * 24 + hod;
                if (abs_hour < h_lo || abs_hour > h_hi) {
                    complete = false;
                    break;
                }
                path.push_back(cluster_of[i][static_cast<std::size_t>(abs_hour - h_lo)]);
            }
            if (complete) ++path_counts[trace.ues[i].device][std::move(path)];
        }
    }
    for (auto& [dev, paths] : path_counts) {
        std::size_t total = 0;
        for (const auto& [path, count] : paths) total += count;
        auto& profiles = model.trajectories[dev];
        for (const auto& [path, count] : paths)
            profiles.push_back(
                {path, static_cast<double>(count) / static_cast<double>(total)});
    }

    validate_model(model);
    return model;
}

} // namespace mcn

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mcn/csv.hpp"
#include "mcn/errors.hpp"
#include "mcn/model.hpp"
#include "mcn/parallel.hpp"
#include "mcn/rng.hpp"
#include "mcn/state_machine.hpp"
#include "mcn/trace.hpp"

namespace mcn {

enum class GenMode : std::uint8_t { OURS, BASELINE };

struct GenConfig {
    std::size_t ue_count = 1;
    int start_hour = 0;  // hour-of-day of the first generated hour
    int duration_hours = 1;
    std::uint64_t seed = 0;
    // Fraction of the population per device; missing devices get 0. Empty =
    // spread uniformly over the devices the model covers.
    std::map<DeviceType, double> device_mix;
    GenMode mode = GenMode::OURS;
    int threads = 1;
};

struct SynthEvent {
    std::int64_t timestamp_ms;
    std::uint32_t ue;
    DeviceType device;
    EventType event;
    TopState top;
    SubState sub;
};

namespace detail {

inline std::vector<DeviceType> model_devices(const TrafficModel& m) {
    std::vector<DeviceType> devs;
    for (const auto& [dh, ws] : m.weights)
        if (devs.empty() || devs.back() != dh.first) devs.push_back(dh.first);
    return devs;
}

// Device of each UE index: contiguous blocks sized by the mix fractions.
inline std::vector<std::size_t> device_block_sizes(const GenConfig& cfg,
                                                   std::span<const DeviceType> devs) {
    std::vector<double> fracs;
    if (cfg.device_mix.empty()) {
        fracs.assign(devs.size(), 1.0 / static_cast<double>(devs.size()));
    } else {
        double total = 0;
        for (const auto& [dev, f] : cfg.device_mix) total += f;
        if (total <= 0) throw MissingKey("device mix is all zero");
        for (DeviceType d : devs) {
            auto it = cfg.device_mix.find(d);
            fracs.push_back(it == cfg.device_mix.end() ? 0.0 : it->second / total);
        }
    }
    std::vector<std::size_t> sizes(devs.size(), 0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < devs.size(); ++i) {
        sizes[i] = static_cast<std::size_t>(
            std::floor(fracs[i] * static_cast<double>(cfg.ue_count)));
        assigned += sizes[i];
    }
    // Distribute the rounding remainder over the first devices with mass.
    for (std::size_t i = 0; assigned < cfg.ue_count && i < devs.size(); ++i)
        if (fracs[i] > 0) {
            ++sizes[i];
            ++assigned;
            if (assigned < cfg.ue_count) --i;  // keep cycling over positive-mass devices
        }
    if (assigned != cfg.ue_count) throw MissingKey("device mix covers no modeled device");
    return sizes;
}

inline int sample_index(std::span<const double> weights, double u) {
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<int>(i);
    }
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0) return static_cast<int>(i);
    return -1;
}

inline std::int64_t duration_ms_from_cdf(const EmpiricalCdf& cdf, Rng& rng) {
    double s = sample_from_cdf(cdf, rng.next_double());
    return std::max<std::int64_t>(1, std::llround(s * 1000.0));
}

struct Pending {
    std::int64_t deadline_ms;
    EventType via;
};

struct LocalEvent {
    std::int64_t timestamp_ms;
    EventType event;
    TopState top;
    SubState sub;
};

// One UE's cluster id per generated hour, from a sampled daily profile or
// per-hour weight draws when no profile exists for the device.
class ClusterPath {
public:
    ClusterPath(const TrafficModel& m, DeviceType dev, const GenConfig& cfg, Rng& rng) {
        hour_pos_.resize(static_cast<std::size_t>(cfg.duration_hours));
        clusters_.resize(static_cast<std::size_t>(cfg.duration_hours));
        for (int k = 0; k < cfg.duration_hours; ++k) {
            int hod = (cfg.start_hour + k) % 24;
            auto it = std::find(m.hours.begin(), m.hours.end(), hod);
            if (it == m.hours.end())
                throw MissingKey("model does not cover hour " + std::to_string(hod));
            hour_pos_[static_cast<std::size_t>(k)] =
                static_cast<std::size_t>(it - m.hours.begin());
        }
        auto tj = m.trajectories.find(dev);
        if (tj != m.trajectories.end() && !tj->second.empty()) {
            double u = rng.next_double();
            double acc = 0;
            const TrajectoryProfile* chosen = &tj->second.back();
            for (const auto& p : tj->second) {
                acc += p.weight;
                if (u < acc) {
                    chosen = &p;
                    break;
                }
            }
            for (int k = 0; k < cfg.duration_hours; ++k)
                clusters_[static_cast<std::size_t>(k)] =
                    chosen->clusters[hour_pos_[static_cast<std::size_t>(k)]];
        } else {
            for (int k = 0; k < cfg.duration_hours; ++k) {
                int hod = (cfg.start_hour + k) % 24;
                auto w = m.weights.find({dev, hod});
                if (w == m.weights.end() || w->second.empty())
                    throw MissingKey("no cluster weights for hour " + std::to_string(hod));
                clusters_[static_cast<std::size_t>(k)] =
                    sample_index(w->second, rng.next_double());
            }
        }
    }

    std::int32_t cluster(int k) const { return clusters_[static_cast<std::size_t>(k)]; }

private:
    std::vector<std::size_t> hour_pos_;
    std::vector<std::int32_t> clusters_;
};

inline std::optional<Pending> draw_edge(const StateModel& sm, std::int64_t now, Rng& rng) {
    if (sm.edges.empty()) return std::nullopt;
    double u = rng.next_double();
    double acc = 0;
    const Edge* chosen = &sm.edges.back();
    for (const auto& e : sm.edges) {
        acc += e.prob;
        if (u < acc) {
            chosen = &e;
            break;
        }
    }
    return Pending{now + duration_ms_from_cdf(chosen->sojourn_s, rng), chosen->via};
}

// Draws from a first-event model: silent (nullopt) or event + emission time.
inline std::optional<std::pair<EventType, std::int64_t>> draw_first_event(
    const FirstEventModel& fe, std::int64_t hour_start, Rng& rng) {
    double u = rng.next_double();
    double acc = 0;
    for (std::size_t i = 0; i < fe.event_prob.size(); ++i) {
        acc += fe.event_prob[i];
        if (u < acc) {
            double off = fe.start_offset_s ? sample_from_cdf(*fe.start_offset_s, rng.next_double())
                                           : 0.0;
            std::int64_t t = hour_start + std::llround(off * 1000.0);
            return std::pair{static_cast<EventType>(i), t};
        }
    }
    return std::nullopt;  // silent atom
}

inline void generate_ue_ours(const TrafficModel& model, const GenConfig& cfg, DeviceType dev,
                             std::uint32_t ue_index, std::vector<LocalEvent>& out) {
    Rng rng = Rng::for_stream(cfg.seed, ue_index);
    ClusterPath path(model, dev, cfg, rng);
    const std::int64_t t0 = static_cast<std::int64_t>(cfg.start_hour) * kMsPerHour;

    std::optional<MachineState> state;
    std::optional<Pending> top, sub;
    const KeyModel* km = nullptr;

    auto emit = [&](std::int64_t t, EventType e, MachineState s) {
        out.push_back({t, e, s.top, s.sub});
    };
    auto schedule_top = [&](std::int64_t now) {
        top = draw_edge(km->transitions.top_state(state->top), now, rng);
    };
    auto schedule_sub = [&](std::int64_t now) {
        sub.reset();
        if (state->sub != SubState::NONE)
            sub = draw_edge(km->transitions.sub_state(state->sub), now, rng);
    };

    for (int k = 0; k < cfg.duration_hours; ++k) {
        const std::int64_t hour_start = t0 + static_cast<std::int64_t>(k) * kMsPerHour;
        const std::int64_t hour_end = hour_start + kMsPerHour;
        const int hod = (cfg.start_hour + k) % 24;
        auto key_it = model.keys.find({dev, hod, path.cluster(k)});
        if (key_it == model.keys.end())
            throw MissingKey("no model for device/hour/cluster at hour " + std::to_string(hod));
        km = &key_it->second;

        if (!state) {
            auto first = draw_first_event(km->first_event, hour_start, rng);
            if (!first) continue;  // silent hour; try again next hour
            auto [e, t] = *first;
            state = step(bootstrap_prior(e), e);
            emit(t, e, *state);
            schedule_top(t);
            schedule_sub(t);
        } else {
            // Levels that were parked try the new hour's model.
            if (!top) schedule_top(hour_start);
            if (!sub) schedule_sub(hour_start);
        }

        while (true) {
            const std::int64_t t_top = top ? top->deadline_ms : INT64_MAX;
            const std::int64_t t_sub = sub ? sub->deadline_ms : INT64_MAX;
            if (std::min(t_top, t_sub) >= hour_end) break;  // pendings persist
            if (t_sub <= t_top) {
                EventType e = sub->via;
                state = step(*state, e);
                emit(t_sub, e, *state);
                schedule_sub(t_sub);
            } else {
                EventType e = top->via;
                if (e == EventType::SRV_REQ && state->sub == SubState::TAU_S_IDLE) {
                    // A pending tracking-area update must be released first.
                    state = step(*state, EventType::S1_CONN_REL);
                    emit(t_top, EventType::S1_CONN_REL, *state);
                }
                state = step(*state, e);
                emit(t_top, e, *state);
                top.reset();
                sub.reset();  // the top-level change drops the pending sub event
                schedule_top(t_top);
                schedule_sub(t_top);
            }
        }
    }
}

inline void generate_ue_baseline(const TrafficModel& model, const GenConfig& cfg, DeviceType dev,
                                 std::uint32_t ue_index, std::vector<LocalEvent>& out) {
    Rng rng = Rng::for_stream(cfg.seed, ue_index);
    ClusterPath path(model, dev, cfg, rng);
    const std::int64_t t0 = static_cast<std::int64_t>(cfg.start_hour) * kMsPerHour;

    // Process (a): memoryless walk over the EMM-ECM machine.
    std::optional<TopState> state;
    std::optional<Pending> pending;
    const BaselineKeyModel* bm = nullptr;
    std::vector<LocalEvent> walk;

    auto schedule = [&](std::int64_t now) {
        pending.reset();
        const auto& st = bm->state(*state);
        if (st.rate_per_s <= 0 || st.edges.empty()) return;
        double gap_s = rng.next_exponential(st.rate_per_s);
        double u = rng.next_double();
        double acc = 0;
        EventType via = st.edges.back().first;
        for (const auto& [e, p] : st.edges) {
            acc += p;
            if (u < acc) {
                via = e;
                break;
            }
        }
        pending = Pending{now + std::max<std::int64_t>(1, std::llround(gap_s * 1000.0)), via};
    };

    std::vector<const BaselineKeyModel*> hour_models(
        static_cast<std::size_t>(cfg.duration_hours));
    for (int k = 0; k < cfg.duration_hours; ++k) {
        const int hod = (cfg.start_hour + k) % 24;
        auto it = model.baseline.find({dev, hod, path.cluster(k)});
        if (it == model.baseline.end())
            throw MissingKey("no baseline for device/hour/cluster at hour " +
                             std::to_string(hod));
        hour_models[static_cast<std::size_t>(k)] = &it->second;
    }

    for (int k = 0; k < cfg.duration_hours; ++k) {
        const std::int64_t hour_start = t0 + static_cast<std::int64_t>(k) * kMsPerHour;
        const std::int64_t hour_end = hour_start + kMsPerHour;
        bm = hour_models[static_cast<std::size_t>(k)];

        if (!state) {
            auto first = draw_first_event(bm->first_event, hour_start, rng);
            if (first) {
                auto [e, t] = *first;
                TopState prior = bootstrap_prior(e).top;
                state = top_destination(prior, e);
                walk.push_back({t, e, *state, SubState::NONE});
                schedule(t);
            }
        } else if (!pending) {
            schedule(hour_start);
        }
        while (pending && pending->deadline_ms < hour_end) {
            std::int64_t t = pending->deadline_ms;
            EventType e = pending->via;
            state = top_destination(*state, e);
            walk.push_back({t, e, *state, SubState::NONE});
            schedule(t);
        }
    }

    // Process (b): independent per-hour HO / TAU arrival streams.
    std::vector<LocalEvent> streams;
    for (int k = 0; k < cfg.duration_hours; ++k) {
        const std::int64_t hour_start = t0 + static_cast<std::int64_t>(k) * kMsPerHour;
        const std::int64_t hour_end = hour_start + kMsPerHour;
        bm = hour_models[static_cast<std::size_t>(k)];
        for (const auto& [ev, str] : {std::pair{EventType::HO, &bm->ho},
                                      std::pair{EventType::TAU, &bm->tau}}) {
            if (str->occur_prob <= 0 || !str->first_offset_s) continue;
            if (rng.next_double() >= str->occur_prob) continue;
            double off = sample_from_cdf(*str->first_offset_s, rng.next_double());
            std::int64_t t = hour_start + std::llround(off * 1000.0);
            while (t < hour_end) {
                streams.push_back({t, ev, TopState::DEREGISTERED, SubState::NONE});
                if (str->rate_per_s <= 0) break;
                t += std::max<std::int64_t>(
                    1, std::llround(rng.next_exponential(str->rate_per_s) * 1000.0));
            }
        }
    }
    std::sort(streams.begin(), streams.end(),
              [](const LocalEvent& a, const LocalEvent& b) {
                  return a.timestamp_ms < b.timestamp_ms ||
                         (a.timestamp_ms == b.timestamp_ms && a.event < b.event);
              });

    // Annotate stream events with process (a)'s state at their time and merge.
    TopState head_state = walk.empty() ? TopState::DEREGISTERED
                                       : bootstrap_prior(walk.front().event).top;
    std::size_t wi = 0;
    TopState cur = head_state;
    out.reserve(walk.size() + streams.size());
    for (const auto& se : streams) {
        while (wi < walk.size() && walk[wi].timestamp_ms <= se.timestamp_ms) {
            out.push_back(walk[wi]);
            cur = walk[wi].top;
            ++wi;
        }
        out.push_back({se.timestamp_ms, se.event, cur, SubState::NONE});
    }
    while (wi < walk.size()) out.push_back(walk[wi++]);
}

} // namespace detail

// Deterministic synthesis: one RNG stream per UE keyed by (seed, ue index),
// so the output is identical for any thread count.
inline std::vector<SynthEvent> generate(const TrafficModel& model, const GenConfig& cfg) {
    if (cfg.ue_count < 1 || cfg.duration_hours < 1)
        throw MissingKey("ue count and duration must be at least 1");
    if (cfg.mode == GenMode::BASELINE && model.baseline.empty())
        throw MissingKey("model has no baseline section");
    auto devs = detail::model_devices(model);
    if (devs.empty()) throw MissingKey("model covers no device");
    auto sizes = detail::device_block_sizes(cfg, devs);

    std::vector<DeviceType> device_of(cfg.ue_count);
    {
        std::size_t i = 0;
        for (std::size_t d = 0; d < devs.size(); ++d)
            for (std::size_t k = 0; k < sizes[d]; ++k) device_of[i++] = devs[d];
    }

    std::vector<std::vector<detail::LocalEvent>> per_ue(cfg.ue_count);
    parallel_for(cfg.ue_count, cfg.threads, [&](std::size_t i) {
        auto ue = static_cast<std::uint32_t>(i);
        if (cfg.mode == GenMode::OURS)
            detail::generate_ue_ours(model, cfg, device_of[i], ue, per_ue[i]);
        else
            detail::generate_ue_baseline(model, cfg, device_of[i], ue, per_ue[i]);
    });

    std::size_t total = 0;
    for (const auto& v : per_ue) total += v.size();
    std::vector<SynthEvent> events;
    events.reserve(total);
    for (std::size_t i = 0; i < cfg.ue_count; ++i) {
        for (const auto& le : per_ue[i])
            events.push_back({le.timestamp_ms, static_cast<std::uint32_t>(i), device_of[i],
                              le.event, le.top, le.sub});
        per_ue[i].clear();
        per_ue[i].shrink_to_fit();
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const SynthEvent& a, const SynthEvent& b) {
                         return a.timestamp_ms < b.timestamp_ms;
                     });
    return events;
}

// Zero-padded UE label so lexicographic and numeric orders agree.
inline std::string synth_ue_id(std::uint32_t ue, int width) {
    std::string digits = std::to_string(ue);
    std::string id = "u";
    id.append(static_cast<std::size_t>(width) > digits.size()
                  ? static_cast<std::size_t>(width) - digits.size()
                  : 0,
              '0');
    id += digits;
    return id;
}

inline int synth_id_width(std::size_t ue_count) {
    int width = 1;
    for (std::size_t v = ue_count > 0 ? ue_count - 1 : 0; v >= 10; v /= 10) ++width;
    return width;
}

inline void write_synth_csv(std::span<const SynthEvent> events, std::size_t ue_count,
                            Generation gen, std::ostream& out) {
    const int width = synth_id_width(ue_count);
    out << "timestamp_ms,ue_id,device_type,event_type,top_state,sub_state\n";
    std::string buf;
    buf.reserve(1 << 20);
    for (const auto& e : events) {
        csv::append_i64(buf, e.timestamp_ms);
        buf += ',';
        buf += synth_ue_id(e.ue, width);
        buf += ',';
        buf += to_string(e.device);
        buf += ',';
        buf += to_string(e.event, gen);
        buf += ',';
        buf += to_string(e.top);
        buf += ',';
        buf += to_string(e.sub);
        buf += '\n';
        if (buf.size() >= (1 << 20) - 128) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    if (!buf.empty()) out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

} // namespace mcn

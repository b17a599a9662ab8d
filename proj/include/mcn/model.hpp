#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcn/empirical_cdf.hpp"
#include "mcn/errors.hpp"
#include "mcn/events.hpp"
#include "mcn/state_machine.hpp"

namespace mcn {

constexpr int kModelFormatVersion = 1;
constexpr std::size_t kTopStateCount = 3;
constexpr std::size_t kSubStateCount = 7;
constexpr double kProbTolerance = 1e-9;

struct ModelKey {
    DeviceType device;
    int hour_of_day;
    std::int32_t cluster;
    friend auto operator<=>(const ModelKey&, const ModelKey&) = default;
};

// One outgoing edge of the semi-Markov machine: the event that fires it,
// the branch probability, and the sojourn-time law (seconds).
struct Edge {
    EventType via;
    double prob;
    EmpiricalCdf sojourn_s;
    friend bool operator==(const Edge&, const Edge&) = default;
};

struct StateModel {
    std::vector<Edge> edges;  // sorted by via, unique

    bool empty() const { return edges.empty(); }
    const Edge* find(EventType e) const {
        for (const auto& edge : edges)
            if (edge.via == e) return &edge;
        return nullptr;
    }
    friend bool operator==(const StateModel&, const StateModel&) = default;
};

struct TransitionModel {
    std::array<StateModel, kTopStateCount> top;
    std::array<StateModel, kSubStateCount> sub;

    StateModel& top_state(TopState s) { return top[static_cast<std::size_t>(s)]; }
    const StateModel& top_state(TopState s) const { return top[static_cast<std::size_t>(s)]; }
    StateModel& sub_state(SubState s) { return sub[static_cast<std::size_t>(s)]; }
    const StateModel& sub_state(SubState s) const { return sub[static_cast<std::size_t>(s)]; }
    friend bool operator==(const TransitionModel&, const TransitionModel&) = default;
};

// Which event (if any) opens a UE's hour and when. Probabilities cover the
// event types plus a silent atom and sum to one.
struct FirstEventModel {
    std::array<double, kAllEvents.size()> event_prob{};
    double silent_prob = 1.0;
    std::optional<EmpiricalCdf> start_offset_s;

    double prob(EventType e) const { return event_prob[static_cast<std::size_t>(e)]; }
    friend bool operator==(const FirstEventModel&, const FirstEventModel&) = default;
};

struct KeyModel {
    TransitionModel transitions;
    FirstEventModel first_event;
    friend bool operator==(const KeyModel&, const KeyModel&) = default;
};

// One observed daily cluster path: cluster id per modeled hour.
struct TrajectoryProfile {
    std::vector<std::int32_t> clusters;
    double weight;
    friend bool operator==(const TrajectoryProfile&, const TrajectoryProfile&) = default;
};

// Poisson comparison model: single exponential clock per EMM-ECM state with
// branch probabilities, plus independent HO/TAU arrival streams.
struct BaselineState {
    double rate_per_s = 0;  // 0 = state never completed a sojourn here
    std::vector<std::pair<EventType, double>> edges;
    friend bool operator==(const BaselineState&, const BaselineState&) = default;
};

struct BaselineStream {
    double occur_prob = 0;  // P(at least one event in the hour)
    double rate_per_s = 0;  // gap rate after the first; 0 = no gaps observed
    std::optional<EmpiricalCdf> first_offset_s;
    friend bool operator==(const BaselineStream&, const BaselineStream&) = default;
};

struct BaselineKeyModel {
    std::array<BaselineState, kTopStateCount> states;
    BaselineStream ho;
    BaselineStream tau;
    FirstEventModel first_event;  // over ATCH/DTCH/SRV_REQ/S1_CONN_REL only

    BaselineState& state(TopState s) { return states[static_cast<std::size_t>(s)]; }
    const BaselineState& state(TopState s) const { return states[static_cast<std::size_t>(s)]; }
    friend bool operator==(const BaselineKeyModel&, const BaselineKeyModel&) = default;
};

struct TrafficModel {
    int version = kModelFormatVersion;
    Generation generation = Generation::LTE;
    std::vector<int> hours;  // sorted, distinct hour-of-day values covered
    std::map<ModelKey, KeyModel> keys;
    // Per (device, hour): cluster weights indexed by cluster id, summing to 1.
    std::map<std::pair<DeviceType, int>, std::vector<double>> weights;
    std::map<DeviceType, std::vector<TrajectoryProfile>> trajectories;
    std::map<ModelKey, BaselineKeyModel> baseline;

    friend bool operator==(const TrafficModel&, const TrafficModel&) = default;
};

// Events legal as top-level transitions out of each top state, and as
// sub-level moves out of each sub state.
inline bool top_edge_legal(TopState from, EventType via) {
    switch (from) {
        case TopState::DEREGISTERED: return via == EventType::ATCH;
        case TopState::CONNECTED:
            return via == EventType::S1_CONN_REL || via == EventType::DTCH;
        case TopState::IDLE:
            return via == EventType::SRV_REQ || via == EventType::DTCH;
    }
    return false;
}

inline bool sub_edge_legal(SubState from, EventType via) {
    switch (from) {
        case SubState::NONE: return false;
        case SubState::SRV_REQ_S:
        case SubState::HO_S:
        case SubState::TAU_S_CONN:
            return via == EventType::HO || via == EventType::TAU;
        case SubState::S1_REL_S_1:
        case SubState::S1_REL_S_2:
            return via == EventType::TAU;
        case SubState::TAU_S_IDLE:
            return via == EventType::S1_CONN_REL;
    }
    return false;
}

// Sub state a top-level arrival lands in (the entry sub state of the new
// top state), given the firing event.
inline SubState entry_sub_state(TopState to) {
    switch (to) {
        case TopState::DEREGISTERED: return SubState::NONE;
        case TopState::CONNECTED: return SubState::SRV_REQ_S;
        case TopState::IDLE: return SubState::S1_REL_S_1;
    }
    return SubState::NONE;
}

inline TopState top_destination(TopState from, EventType via) {
    switch (via) {
        case EventType::ATCH: return TopState::CONNECTED;
        case EventType::DTCH: return TopState::DEREGISTERED;
        case EventType::S1_CONN_REL: return TopState::IDLE;
        case EventType::SRV_REQ: return TopState::CONNECTED;
        default: return from;
    }
}

namespace detail {

inline void check_prob_sum(const std::vector<double>& ps, const std::string& path) {
    double sum = 0;
    for (double p : ps) {
        if (!(p >= 0.0 && p <= 1.0 + kProbTolerance))
            throw SchemaViolation(path, "probability outside [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbTolerance)
        throw SchemaViolation(path, "probabilities sum to " + std::to_string(sum));
}

inline void check_state_model(const StateModel& sm, bool is_top, int state_index,
                              Generation gen, const std::string& path) {
    if (sm.edges.empty()) return;
    std::vector<double> ps;
    EventType prev{};
    bool first = true;
    for (const auto& e : sm.edges) {
        if (!first && !(static_cast<int>(prev) < static_cast<int>(e.via)))
            throw SchemaViolation(path, "edges not sorted/unique by event");
        prev = e.via;
        first = false;
        bool legal = is_top ? top_edge_legal(static_cast<TopState>(state_index), e.via)
                            : sub_edge_legal(static_cast<SubState>(state_index), e.via);
        if (!legal)
            throw SchemaViolation(path, std::string(to_string(e.via)) + " edge not allowed here");
        if (gen == Generation::FIVE_G && e.via == EventType::TAU)
            throw SchemaViolation(path, "TAU edge in a FIVE_G model");
        ps.push_back(e.prob);
    }
    check_prob_sum(ps, path);
}

inline void check_first_event(const FirstEventModel& fe, Generation gen, const std::string& path) {
    std::vector<double> ps(fe.event_prob.begin(), fe.event_prob.end());
    ps.push_back(fe.silent_prob);
    check_prob_sum(ps, path);
    if (gen == Generation::FIVE_G && fe.prob(EventType::TAU) > 0)
        throw SchemaViolation(path, "TAU first-event probability in a FIVE_G model");
    double active = 1.0 - fe.silent_prob;
    if (active > kProbTolerance && !fe.start_offset_s)
        throw SchemaViolation(path, "missing start-offset CDF");
    if (fe.start_offset_s) {
        if (fe.start_offset_s->min_value() < 0 || fe.start_offset_s->max_value() >= 3600.0)
            throw SchemaViolation(path, "start offsets outside [0, 3600)");
    }
}

} // namespace detail

// Structural validation; throws SchemaViolation at the first problem.
inline void validate_model(const TrafficModel& m) {
    if (m.hours.empty()) throw SchemaViolation("hours", "empty");
    for (std::size_t i = 0; i < m.hours.size(); ++i) {
        if (m.hours[i] < 0 || m.hours[i] > 23) throw SchemaViolation("hours", "value outside 0-23");
        if (i && m.hours[i] <= m.hours[i - 1]) throw SchemaViolation("hours", "not sorted/distinct");
    }
    auto hour_known = [&](int h) {
        return std::find(m.hours.begin(), m.hours.end(), h) != m.hours.end();
    };

    for (const auto& [key, km] : m.keys) {
        std::string path = std::string(to_string(key.device)) + "/h" +
                           std::to_string(key.hour_of_day) + "/c" + std::to_string(key.cluster);
        if (!hour_known(key.hour_of_day)) throw SchemaViolation(path, "hour not in hours[]");
        if (key.cluster < 0) throw SchemaViolation(path, "negative cluster id");
        for (std::size_t s = 0; s < kTopStateCount; ++s)
            detail::check_state_model(km.transitions.top[s], true, static_cast<int>(s),
                                      m.generation, path + "/top/" +
                                      std::string(to_string(static_cast<TopState>(s))));
        for (std::size_t s = 0; s < kSubStateCount; ++s) {
            const auto& sm = km.transitions.sub[s];
            if (m.generation == Generation::FIVE_G && !sm.edges.empty()) {
                auto ss = static_cast<SubState>(s);
                if (ss == SubState::TAU_S_CONN || ss == SubState::TAU_S_IDLE ||
                    ss == SubState::S1_REL_S_2 || ss == SubState::S1_REL_S_1)
                    throw SchemaViolation(path, "TAU-reachable sub state kept in a FIVE_G model");
            }
            detail::check_state_model(sm, false, static_cast<int>(s), m.generation,
                                      path + "/sub/" +
                                      std::string(to_string(static_cast<SubState>(s))));
        }
        detail::check_first_event(km.first_event, m.generation, path + "/first_event");
    }

    for (const auto& [dh, ws] : m.weights) {
        std::string path = std::string(to_string(dh.first)) + "/h" + std::to_string(dh.second) +
                           "/weights";
        if (!hour_known(dh.second)) throw SchemaViolation(path, "hour not in hours[]");
        detail::check_prob_sum(ws, path);
        for (std::size_t c = 0; c < ws.size(); ++c)
            if (ws[c] > 0 &&
                !m.keys.contains({dh.first, dh.second, static_cast<std::int32_t>(c)}))
                throw SchemaViolation(path, "cluster " + std::to_string(c) + " has no key entry");
    }
    for (const auto& [key, km] : m.keys) {
        auto it = m.weights.find({key.device, key.hour_of_day});
        if (it == m.weights.end() ||
            static_cast<std::size_t>(key.cluster) >= it->second.size())
            throw SchemaViolation("weights", "no weight covers cluster " +
                                  std::to_string(key.cluster));
    }

    for (const auto& [dev, profiles] : m.trajectories) {
        std::string path = std::string(to_string(dev)) + "/trajectories";
        if (profiles.empty()) continue;
        std::vector<double> ws;
        for (const auto& p : profiles) {
            ws.push_back(p.weight);
            if (p.clusters.size() != m.hours.size())
                throw SchemaViolation(path, "profile length != hours[]");
            for (std::size_t i = 0; i < p.clusters.size(); ++i)
                if (!m.keys.contains({dev, m.hours[i], p.clusters[i]}))
                    throw SchemaViolation(path, "profile references unknown cluster");
        }
        detail::check_prob_sum(ws, path);
    }

    for (const auto& [key, bm] : m.baseline) {
        std::string path = "baseline/" + std::string(to_string(key.device)) + "/h" +
                           std::to_string(key.hour_of_day) + "/c" + std::to_string(key.cluster);
        if (!hour_known(key.hour_of_day)) throw SchemaViolation(path, "hour not in hours[]");
        for (std::size_t s = 0; s < kTopStateCount; ++s) {
            const auto& st = bm.states[s];
            if (st.rate_per_s < 0) throw SchemaViolation(path, "negative rate");
            if (!st.edges.empty()) {
                std::vector<double> ps;
                for (const auto& [via, p] : st.edges) {
                    if (!top_edge_legal(static_cast<TopState>(s), via))
                        throw SchemaViolation(path, "illegal baseline edge");
                    ps.push_back(p);
                }
                detail::check_prob_sum(ps, path);
            }
        }
        for (const BaselineStream* str : {&bm.ho, &bm.tau}) {
            if (str->occur_prob < 0 || str->occur_prob > 1 + kProbTolerance)
                throw SchemaViolation(path, "stream occurrence probability outside [0,1]");
            if (str->rate_per_s < 0) throw SchemaViolation(path, "negative stream rate");
            if (str->occur_prob > kProbTolerance && !str->first_offset_s)
                throw SchemaViolation(path, "stream missing first-offset CDF");
        }
        if (m.generation == Generation::FIVE_G && bm.tau.occur_prob > 0)
            throw SchemaViolation(path, "TAU stream in a FIVE_G model");
        detail::check_first_event(bm.first_event, m.generation, path + "/first_event");
        for (EventType e : {EventType::HO, EventType::TAU})
            if (bm.first_event.prob(e) > 0)
                throw SchemaViolation(path + "/first_event", "HO/TAU in the machine-walk group");
    }
}

// --------------------------------------------------------------------------
// Serialization (single structured-text document; numbers round-trip exactly)

namespace detail {

using Json = nlohmann::json;

inline Json cdf_to_json(const EmpiricalCdf& cdf) {
    Json a = Json::array();
    for (const auto& p : cdf.points()) a.push_back(Json::array({p.value, p.cum_prob}));
    return a;
}

inline EmpiricalCdf cdf_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw SchemaViolation(path, "expected a point array");
    std::vector<EmpiricalCdf::Point> pts;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2) throw SchemaViolation(path, "expected [value, prob]");
        pts.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    try {
        return EmpiricalCdf::from_points(std::move(pts));
    } catch (const Error& err) {
        throw SchemaViolation(path, err.what());
    }
}

inline Json state_model_to_json(const StateModel& sm, Generation gen) {
    Json a = Json::array();
    for (const auto& e : sm.edges) {
        Json je;
        je["via"] = std::string(to_string(e.via, gen));
        je["p"] = e.prob;
        je["cdf"] = cdf_to_json(e.sojourn_s);
        a.push_back(std::move(je));
    }
    return a;
}

inline StateModel state_model_from_json(const Json& j, Generation gen, const std::string& path) {
    StateModel sm;
    for (const auto& je : j) {
        Edge e;
        auto via = event_from_string(je.at("via").get<std::string>(), gen);
        if (!via) throw SchemaViolation(path, "unknown event " + je.at("via").get<std::string>());
        e.via = *via;
        e.prob = je.at("p").get<double>();
        e.sojourn_s = cdf_from_json(je.at("cdf"), path + "/cdf");
        sm.edges.push_back(std::move(e));
    }
    return sm;
}

inline Json first_event_to_json(const FirstEventModel& fe, Generation gen) {
    Json j;
    j["silent"] = fe.silent_prob;
    Json ev = Json::object();
    for (EventType e : kAllEvents)
        if (fe.prob(e) > 0) ev[std::string(to_string(e, gen))] = fe.prob(e);
    j["events"] = std::move(ev);
    if (fe.start_offset_s) j["offset_cdf"] = cdf_to_json(*fe.start_offset_s);
    return j;
}

inline FirstEventModel first_event_from_json(const Json& j, Generation gen,
                                             const std::string& path) {
    FirstEventModel fe;
    fe.silent_prob = j.at("silent").get<double>();
    for (const auto& [name, p] : j.at("events").items()) {
        auto e = event_from_string(name, gen);
        if (!e) throw SchemaViolation(path, "unknown event " + name);
        fe.event_prob[static_cast<std::size_t>(*e)] = p.get<double>();
    }
    if (j.contains("offset_cdf"))
        fe.start_offset_s = cdf_from_json(j.at("offset_cdf"), path + "/offset_cdf");
    return fe;
}

} // namespace detail

inline void save_model(const TrafficModel& m, std::ostream& out) {
    using detail::Json;
    const Generation gen = m.generation;
    Json j;
    j["format"] = "mcn-traffic-model";
    j["version"] = m.version;
    j["generation"] = std::string(to_string(gen));
    j["hours"] = m.hours;

    Json keys = Json::array();
    for (const auto& [key, km] : m.keys) {
        Json jk;
        jk["device"] = std::string(to_string(key.device));
        jk["hour"] = key.hour_of_day;
        jk["cluster"] = key.cluster;
        Json top = Json::object();
        for (std::size_t s = 0; s < kTopStateCount; ++s)
            if (!km.transitions.top[s].empty())
                top[std::string(to_string(static_cast<TopState>(s)))] =
                    detail::state_model_to_json(km.transitions.top[s], gen);
        Json sub = Json::object();
        for (std::size_t s = 0; s < kSubStateCount; ++s)
            if (!km.transitions.sub[s].empty())
                sub[std::string(to_string(static_cast<SubState>(s)))] =
                    detail::state_model_to_json(km.transitions.sub[s], gen);
        jk["transitions"] = Json{{"top", std::move(top)}, {"sub", std::move(sub)}};
        jk["first_event"] = detail::first_event_to_json(km.first_event, gen);
        keys.push_back(std::move(jk));
    }
    j["keys"] = std::move(keys);

    Json weights = Json::array();
    for (const auto& [dh, ws] : m.weights) {
        Json jw;
        jw["device"] = std::string(to_string(dh.first));
        jw["hour"] = dh.second;
        jw["weights"] = ws;
        weights.push_back(std::move(jw));
    }
    j["weights"] = std::move(weights);

    Json trajectories = Json::array();
    for (const auto& [dev, profiles] : m.trajectories)
        for (const auto& p : profiles) {
            Json jt;
            jt["device"] = std::string(to_string(dev));
            jt["weight"] = p.weight;
            jt["clusters"] = p.clusters;
            trajectories.push_back(std::move(jt));
        }
    j["trajectories"] = std::move(trajectories);

    if (!m.baseline.empty()) {
        Json baseline = Json::array();
        for (const auto& [key, bm] : m.baseline) {
            Json jb;
            jb["device"] = std::string(to_string(key.device));
            jb["hour"] = key.hour_of_day;
            jb["cluster"] = key.cluster;
            Json states = Json::object();
            for (std::size_t s = 0; s < kTopStateCount; ++s) {
                const auto& st = bm.states[s];
                if (st.rate_per_s == 0 && st.edges.empty()) continue;
                Json js;
                js["rate"] = st.rate_per_s;
                Json edges = Json::array();
                for (const auto& [via, p] : st.edges)
                    edges.push_back(Json{{"via", std::string(to_string(via, gen))}, {"p", p}});
                js["edges"] = std::move(edges);
                states[std::string(to_string(static_cast<TopState>(s)))] = std::move(js);
            }
            jb["states"] = std::move(states);
            auto stream_json = [&](const BaselineStream& str) {
                Json js;
                js["occur"] = str.occur_prob;
                js["rate"] = str.rate_per_s;
                if (str.first_offset_s) js["offset_cdf"] = detail::cdf_to_json(*str.first_offset_s);
                return js;
            };
            jb["ho"] = stream_json(bm.ho);
            if (gen == Generation::LTE) jb["tau"] = stream_json(bm.tau);
            jb["first_event"] = detail::first_event_to_json(bm.first_event, gen);
            baseline.push_back(std::move(jb));
        }
        j["baseline"] = std::move(baseline);
    }

    out << j.dump(1) << '\n';
}

inline TrafficModel load_model(std::istream& in) {
    using detail::Json;
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw SchemaViolation("document", e.what());
    }
    try {
        if (j.value("format", std::string()) != "mcn-traffic-model")
            throw SchemaViolation("format", "not a traffic model file");
        int version = j.at("version").get<int>();
        if (version != kModelFormatVersion) throw FormatVersionMismatch(std::to_string(version));

        TrafficModel m;
        m.version = version;
        auto gen = generation_from_string(j.at("generation").get<std::string>());
        if (!gen) throw SchemaViolation("generation", "unknown tag");
        m.generation = *gen;
        m.hours = j.at("hours").get<std::vector<int>>();

        for (const auto& jk : j.at("keys")) {
            ModelKey key;
            auto dev = device_from_string(jk.at("device").get<std::string>());
            if (!dev) throw SchemaViolation("keys/device", "unknown device");
            key.device = *dev;
            key.hour_of_day = jk.at("hour").get<int>();
            key.cluster = jk.at("cluster").get<std::int32_t>();
            std::string path = std::string(to_string(key.device)) + "/h" +
                               std::to_string(key.hour_of_day) + "/c" +
                               std::to_string(key.cluster);
            KeyModel km;
            const auto& jt = jk.at("transitions");
            for (const auto& [name, js] : jt.at("top").items()) {
                auto st = top_state_from_string(name);
                if (!st) throw SchemaViolation(path, "unknown top state " + name);
                km.transitions.top_state(*st) =
                    detail::state_model_from_json(js, m.generation, path + "/top/" + name);
            }
            for (const auto& [name, js] : jt.at("sub").items()) {
                auto st = sub_state_from_string(name);
                if (!st) throw SchemaViolation(path, "unknown sub state " + name);
                km.transitions.sub_state(*st) =
                    detail::state_model_from_json(js, m.generation, path + "/sub/" + name);
            }
            km.first_event = detail::first_event_from_json(jk.at("first_event"), m.generation,
                                                           path + "/first_event");
            if (!m.keys.emplace(key, std::move(km)).second)
                throw SchemaViolation(path, "duplicate key");
        }

        for (const auto& jw : j.at("weights")) {
            auto dev = device_from_string(jw.at("device").get<std::string>());
            if (!dev) throw SchemaViolation("weights/device", "unknown device");
            auto dh = std::pair{*dev, jw.at("hour").get<int>()};
            if (!m.weights.emplace(dh, jw.at("weights").get<std::vector<double>>()).second)
                throw SchemaViolation("weights", "duplicate (device, hour)");
        }

        for (const auto& jt : j.at("trajectories")) {
            auto dev = device_from_string(jt.at("device").get<std::string>());
            if (!dev) throw SchemaViolation("trajectories/device", "unknown device");
            TrajectoryProfile p;
            p.weight = jt.at("weight").get<double>();
            p.clusters = jt.at("clusters").get<std::vector<std::int32_t>>();
            m.trajectories[*dev].push_back(std::move(p));
        }

        if (j.contains("baseline")) {
            for (const auto& jb : j.at("baseline")) {
                ModelKey key;
                auto dev = device_from_string(jb.at("device").get<std::string>());
                if (!dev) throw SchemaViolation("baseline/device", "unknown device");
                key.device = *dev;
                key.hour_of_day = jb.at("hour").get<int>();
                key.cluster = jb.at("cluster").get<std::int32_t>();
                std::string path = "baseline/" + std::string(to_string(key.device)) + "/h" +
                                   std::to_string(key.hour_of_day);
                BaselineKeyModel bm;
                for (const auto& [name, js] : jb.at("states").items()) {
                    auto st = top_state_from_string(name);
                    if (!st) throw SchemaViolation(path, "unknown state " + name);
                    auto& b = bm.state(*st);
                    b.rate_per_s = js.at("rate").get<double>();
                    for (const auto& je : js.at("edges")) {
                        auto via = event_from_string(je.at("via").get<std::string>(), m.generation);
                        if (!via) throw SchemaViolation(path, "unknown event");
                        b.edges.emplace_back(*via, je.at("p").get<double>());
                    }
                }
                auto stream_from = [&](const Json& js) {
                    BaselineStream str;
                    str.occur_prob = js.at("occur").get<double>();
                    str.rate_per_s = js.at("rate").get<double>();
                    if (js.contains("offset_cdf"))
                        str.first_offset_s =
                            detail::cdf_from_json(js.at("offset_cdf"), path + "/offset_cdf");
                    return str;
                };
                bm.ho = stream_from(jb.at("ho"));
                if (jb.contains("tau")) bm.tau = stream_from(jb.at("tau"));
                bm.first_event = detail::first_event_from_json(jb.at("first_event"), m.generation,
                                                               path + "/first_event");
                if (!m.baseline.emplace(key, std::move(bm)).second)
                    throw SchemaViolation(path, "duplicate baseline key");
            }
        }

        validate_model(m);
        return m;
    } catch (const Json::exception& e) {
        throw SchemaViolation("document", e.what());
    }
}

} // namespace mcn

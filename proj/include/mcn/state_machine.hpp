#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcn/errors.hpp"
#include "mcn/events.hpp"
#include "mcn/trace.hpp"

namespace mcn {

// Top level of the hierarchical EMM-ECM machine. REGISTERED is the union
// CONNECTED | IDLE after the merge.
enum class TopState : std::uint8_t { DEREGISTERED, CONNECTED, IDLE };

// Sub-machine states. NONE only under DEREGISTERED; the first three only
// under CONNECTED; the last three only under IDLE.
enum class SubState : std::uint8_t {
    NONE, SRV_REQ_S, HO_S, TAU_S_CONN, S1_REL_S_1, TAU_S_IDLE, S1_REL_S_2
};

inline std::string_view to_string(TopState s) {
    switch (s) {
        case TopState::DEREGISTERED: return "DEREGISTERED";
        case TopState::CONNECTED: return "CONNECTED";
        case TopState::IDLE: return "IDLE";
    }
    return "?";
}

inline std::string_view to_string(SubState s) {
    switch (s) {
        case SubState::NONE: return "NONE";
        case SubState::SRV_REQ_S: return "SRV_REQ_S";
        case SubState::HO_S: return "HO_S";
        case SubState::TAU_S_CONN: return "TAU_S_CONN";
        case SubState::S1_REL_S_1: return "S1_REL_S_1";
        case SubState::TAU_S_IDLE: return "TAU_S_IDLE";
        case SubState::S1_REL_S_2: return "S1_REL_S_2";
    }
    return "?";
}

inline std::optional<TopState> top_state_from_string(std::string_view s) {
    if (s == "DEREGISTERED") return TopState::DEREGISTERED;
    if (s == "CONNECTED") return TopState::CONNECTED;
    if (s == "IDLE") return TopState::IDLE;
    return std::nullopt;
}

inline std::optional<SubState> sub_state_from_string(std::string_view s) {
    if (s == "NONE") return SubState::NONE;
    if (s == "SRV_REQ_S") return SubState::SRV_REQ_S;
    if (s == "HO_S") return SubState::HO_S;
    if (s == "TAU_S_CONN") return SubState::TAU_S_CONN;
    if (s == "S1_REL_S_1") return SubState::S1_REL_S_1;
    if (s == "TAU_S_IDLE") return SubState::TAU_S_IDLE;
    if (s == "S1_REL_S_2") return SubState::S1_REL_S_2;
    return std::nullopt;
}

struct MachineState {
    TopState top;
    SubState sub;
    friend bool operator==(const MachineState&, const MachineState&) = default;
};

inline bool top_of_sub_ok(TopState top, SubState sub) {
    switch (sub) {
        case SubState::NONE:
            return top == TopState::DEREGISTERED;
        case SubState::SRV_REQ_S:
        case SubState::HO_S:
        case SubState::TAU_S_CONN:
            return top == TopState::CONNECTED;
        case SubState::S1_REL_S_1:
        case SubState::TAU_S_IDLE:
        case SubState::S1_REL_S_2:
            return top == TopState::IDLE;
    }
    return false;
}

inline MachineState initial_state() {
    return {TopState::DEREGISTERED, SubState::NONE};
}

// The deterministic transition relation of the two-level machine. Returns
// the successor, or nullopt when (state, event) is illegal. A successful
// S1_CONN_REL from CONNECTED is a top-level transition; from
// (IDLE, TAU_S_IDLE) it is the sub-level release that keeps the UE IDLE.
inline std::optional<MachineState> try_step(MachineState s, EventType e) {
    switch (s.top) {
        case TopState::DEREGISTERED:
            if (e == EventType::ATCH) return MachineState{TopState::CONNECTED, SubState::SRV_REQ_S};
            return std::nullopt;
        case TopState::CONNECTED:
            switch (e) {
                case EventType::S1_CONN_REL:
                    return MachineState{TopState::IDLE, SubState::S1_REL_S_1};
                case EventType::DTCH:
                    return MachineState{TopState::DEREGISTERED, SubState::NONE};
                case EventType::HO:
                    return MachineState{TopState::CONNECTED, SubState::HO_S};
                case EventType::TAU:
                    return MachineState{TopState::CONNECTED, SubState::TAU_S_CONN};
                default:
                    return std::nullopt;
            }
        case TopState::IDLE:
            switch (e) {
                case EventType::SRV_REQ:
                    if (s.sub == SubState::S1_REL_S_1 || s.sub == SubState::S1_REL_S_2)
                        return MachineState{TopState::CONNECTED, SubState::SRV_REQ_S};
                    return std::nullopt;
                case EventType::DTCH:
                    return MachineState{TopState::DEREGISTERED, SubState::NONE};
                case EventType::TAU:
                    if (s.sub == SubState::S1_REL_S_1 || s.sub == SubState::S1_REL_S_2)
                        return MachineState{TopState::IDLE, SubState::TAU_S_IDLE};
                    return std::nullopt;
                case EventType::S1_CONN_REL:
                    if (s.sub == SubState::TAU_S_IDLE)
                        return MachineState{TopState::IDLE, SubState::S1_REL_S_2};
                    return std::nullopt;
                default:
                    return std::nullopt;
            }
    }
    return std::nullopt;
}

inline MachineState step(MachineState s, EventType e) {
    auto next = try_step(s, e);
    if (!next)
        throw IllegalTransition("illegal transition: " + std::string(to_string(e)) + " from (" +
                                std::string(to_string(s.top)) + ", " + std::string(to_string(s.sub)) + ")");
    return *next;
}

// True when the event changes the top-level state.
inline bool is_top_transition(MachineState s, EventType e) {
    auto next = try_step(s, e);
    return next && next->top != s.top;
}

// Minimal-assumption prior state for a UE whose first observed event is e.
// TAU defaults to IDLE because TAU-in-IDLE dominates real traces.
inline MachineState bootstrap_prior(EventType e) {
    switch (e) {
        case EventType::ATCH: return {TopState::DEREGISTERED, SubState::NONE};
        case EventType::SRV_REQ: return {TopState::IDLE, SubState::S1_REL_S_1};
        case EventType::S1_CONN_REL: return {TopState::CONNECTED, SubState::SRV_REQ_S};
        case EventType::HO: return {TopState::CONNECTED, SubState::SRV_REQ_S};
        case EventType::TAU: return {TopState::IDLE, SubState::S1_REL_S_1};
        case EventType::DTCH: return {TopState::IDLE, SubState::S1_REL_S_1};
    }
    return initial_state();
}

enum class Level : std::uint8_t { TOP, SUB };

// One observed stay in a state before a specific transition. Censored
// samples are sub-level stays cut short by a top-level change; their `via`
// and `to` describe the preempting top transition.
struct SojournSample {
    Level level;
    TopState top_from;              // top state the stay happened in
    SubState sub_from;              // meaningful for SUB samples
    EventType via;                  // event ending the stay
    TopState top_to;
    SubState sub_to;
    std::int64_t duration_ms;
    bool censored;
    std::int64_t end_ts;            // when the stay ended (for hour grouping)
};

struct Violation {
    std::string ue_id;
    std::size_t index;          // position in the event sequence
    MachineState state;         // state when the offending event arrived
    EventType event;
    std::string rule;
};

struct AnnotatedEvent {
    std::int64_t timestamp_ms;
    EventType event_type;
    MachineState state_after;
};

enum class BootstrapPolicy { INFER_FROM_FIRST_EVENT, FROM_DEREGISTERED };

struct ReplayResult {
    std::vector<AnnotatedEvent> annotated;
    std::vector<SojournSample> sojourns;
    std::vector<Violation> violations;
};

// Replays one UE's time-sorted events through the machine. Produces state
// annotations, completed sojourn samples at both levels, and censored
// sub-level samples where a top-level change preempted the sub machine.
// A violation resynchronizes the state via the bootstrap table for the
// offending event and replay continues.
inline ReplayResult replay(std::span<const ControlEvent> events,
                           BootstrapPolicy policy = BootstrapPolicy::INFER_FROM_FIRST_EVENT,
                           std::string_view ue_id = {}) {
    ReplayResult out;
    if (events.empty()) return out;
    out.annotated.reserve(events.size());

    MachineState state = policy == BootstrapPolicy::INFER_FROM_FIRST_EVENT
                             ? bootstrap_prior(events.front().event_type)
                             : initial_state();
    // Entry timestamps are unknown until the first transition lands.
    std::optional<std::int64_t> top_entry;
    std::optional<std::int64_t> sub_entry;

    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        auto next = try_step(state, ev.event_type);
        if (!next) {
            out.violations.push_back({std::string(ue_id), i, state, ev.event_type,
                                      "no transition for event in current state"});
            // Resynchronize: adopt the bootstrap prior for this event.
            state = bootstrap_prior(ev.event_type);
            top_entry.reset();
            sub_entry.reset();
            next = try_step(state, ev.event_type);
        }
        MachineState to = *next;
        const bool top_changed = to.top != state.top;
        if (top_changed) {
            if (top_entry)
                out.sojourns.push_back({Level::TOP, state.top, state.sub, ev.event_type,
                                        to.top, to.sub, ev.timestamp_ms - *top_entry,
                                        false, ev.timestamp_ms});
            if (sub_entry && state.sub != SubState::NONE)
                out.sojourns.push_back({Level::SUB, state.top, state.sub, ev.event_type,
                                        to.top, to.sub, ev.timestamp_ms - *sub_entry,
                                        true, ev.timestamp_ms});
            top_entry = ev.timestamp_ms;
            sub_entry = ev.timestamp_ms;
        } else {
            // Sub-level transition (or self-loop) under an unchanged top state.
            if (sub_entry && state.sub != SubState::NONE)
                out.sojourns.push_back({Level::SUB, state.top, state.sub, ev.event_type,
                                        to.top, to.sub, ev.timestamp_ms - *sub_entry,
                                        false, ev.timestamp_ms});
            sub_entry = ev.timestamp_ms;
        }
        state = to;
        out.annotated.push_back({ev.timestamp_ms, ev.event_type, state});
    }
    return out;
}

// Empty result iff the sequence is accepted from its bootstrap state with
// no resynchronization.
inline std::vector<Violation> validate_sequence(std::span<const ControlEvent> events,
                                                std::string_view ue_id = {}) {
    return replay(events, BootstrapPolicy::INFER_FROM_FIRST_EVENT, ue_id).violations;
}

} // namespace mcn

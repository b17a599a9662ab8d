#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "mcn/errors.hpp"

namespace mcn {

// The six LTE control-plane event types. 5G uses the same internal codes
// with renamed wire labels, minus TAU.
enum class EventType : std::uint8_t { ATCH, DTCH, SRV_REQ, S1_CONN_REL, HO, TAU };

inline constexpr std::array<EventType, 6> kAllEvents = {
    EventType::ATCH, EventType::DTCH, EventType::SRV_REQ,
    EventType::S1_CONN_REL, EventType::HO, EventType::TAU};

enum class DeviceType : std::uint8_t { PHONE, CONNECTED_CAR, TABLET };

inline constexpr std::array<DeviceType, 3> kAllDevices = {
    DeviceType::PHONE, DeviceType::CONNECTED_CAR, DeviceType::TABLET};

// Which event vocabulary a model or trace speaks.
enum class Generation : std::uint8_t { LTE, FIVE_G };

inline std::string_view to_string(EventType e, Generation gen = Generation::LTE) {
    if (gen == Generation::LTE) {
        switch (e) {
            case EventType::ATCH: return "ATCH";
            case EventType::DTCH: return "DTCH";
            case EventType::SRV_REQ: return "SRV_REQ";
            case EventType::S1_CONN_REL: return "S1_CONN_REL";
            case EventType::HO: return "HO";
            case EventType::TAU: return "TAU";
        }
    } else {
        switch (e) {
            case EventType::ATCH: return "REGISTER";
            case EventType::DTCH: return "DEREGISTER";
            case EventType::SRV_REQ: return "SRV_REQ";
            case EventType::S1_CONN_REL: return "AN_REL";
            case EventType::HO: return "HO";
            case EventType::TAU: return "TAU";  // never emitted in 5G
        }
    }
    return "?";
}

inline std::optional<EventType> event_from_string(std::string_view s, Generation gen = Generation::LTE) {
    if (gen == Generation::LTE) {
        if (s == "ATCH") return EventType::ATCH;
        if (s == "DTCH") return EventType::DTCH;
        if (s == "SRV_REQ") return EventType::SRV_REQ;
        if (s == "S1_CONN_REL") return EventType::S1_CONN_REL;
        if (s == "HO") return EventType::HO;
        if (s == "TAU") return EventType::TAU;
    } else {
        if (s == "REGISTER") return EventType::ATCH;
        if (s == "DEREGISTER") return EventType::DTCH;
        if (s == "SRV_REQ") return EventType::SRV_REQ;
        if (s == "AN_REL") return EventType::S1_CONN_REL;
        if (s == "HO") return EventType::HO;
    }
    return std::nullopt;
}

inline std::string_view to_string(DeviceType d) {
    switch (d) {
        case DeviceType::PHONE: return "PHONE";
        case DeviceType::CONNECTED_CAR: return "CONNECTED_CAR";
        case DeviceType::TABLET: return "TABLET";
    }
    return "?";
}

inline std::optional<DeviceType> device_from_string(std::string_view s) {
    if (s == "PHONE") return DeviceType::PHONE;
    if (s == "CONNECTED_CAR") return DeviceType::CONNECTED_CAR;
    if (s == "TABLET") return DeviceType::TABLET;
    return std::nullopt;
}

inline std::string_view to_string(Generation g) {
    return g == Generation::LTE ? "LTE" : "FIVE_G";
}

inline std::optional<Generation> generation_from_string(std::string_view s) {
    if (s == "LTE") return Generation::LTE;
    if (s == "FIVE_G") return Generation::FIVE_G;
    return std::nullopt;
}

} // namespace mcn

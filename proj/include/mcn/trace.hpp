#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mcn/csv.hpp"
#include "mcn/errors.hpp"
#include "mcn/events.hpp"

namespace mcn {

inline constexpr std::int64_t kMsPerHour = 3'600'000;
inline constexpr std::int64_t kMsPerDay = 24 * kMsPerHour;

// One timestamped control-plane event. The owning UE is implied by the
// containing sequence.
struct ControlEvent {
    std::int64_t timestamp_ms;
    EventType event_type;
    friend bool operator==(const ControlEvent&, const ControlEvent&) = default;
};

// Maps the 8-digit TAC prefix of an IMEI to a device type.
class TacCatalog {
public:
    void add(const std::string& tac, DeviceType type) {
        if (tac.size() != 8 || tac.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("TAC must be exactly 8 digits, got '" + tac + "'");
        map_[tac] = type;
    }

    std::optional<DeviceType> lookup(std::string_view tac8) const {
        auto it = map_.find(std::string(tac8));
        return it == map_.end() ? std::nullopt : std::optional(it->second);
    }

    std::size_t size() const { return map_.size(); }

    // CSV schema: tac,device_type
    static TacCatalog parse(std::istream& in) {
        TacCatalog cat;
        std::string line;
        std::size_t line_no = 0;
        bool header_seen = false;
        while (std::getline(in, line)) {
            ++line_no;
            std::string_view sv = csv::trim(line);
            if (sv.empty()) continue;
            if (!header_seen) {
                header_seen = true;
                if (sv == "tac,device_type") continue;
            }
            auto fields = csv::split(sv);
            if (fields.size() != 2) throw MalformedLine(line_no, "expected tac,device_type");
            auto dev = device_from_string(csv::trim(fields[1]));
            if (!dev) throw MalformedLine(line_no, "unknown device type");
            cat.add(std::string(csv::trim(fields[0])), *dev);
        }
        return cat;
    }

private:
    std::unordered_map<std::string, DeviceType> map_;
};

// Device-type lookup by the first 8 characters of an identifier.
inline DeviceType map_tac(std::string_view identifier, const TacCatalog& catalog) {
    if (identifier.size() < 8)
        throw ParseError("identifier shorter than 8 characters: '" + std::string(identifier) + "'");
    auto tac8 = identifier.substr(0, 8);
    auto dev = catalog.lookup(tac8);
    if (!dev) throw UnknownTac(std::string(tac8));
    return *dev;
}

struct UeTrace {
    std::string ue_id;
    DeviceType device;
    std::vector<ControlEvent> events;
    friend bool operator==(const UeTrace&, const UeTrace&) = default;
};

// Immutable parsed trace: per-UE time-sorted sequences, UEs ordered by id.
class Trace {
public:
    std::vector<UeTrace> ues;
    std::size_t reordered_events = 0;  // out-of-order input records, sorted not rejected

    bool empty() const {
        for (const auto& ue : ues)
            if (!ue.events.empty()) return false;
        return true;
    }

    std::size_t event_count() const {
        std::size_t n = 0;
        for (const auto& ue : ues) n += ue.events.size();
        return n;
    }

    // [first, last] event timestamps over all UEs; requires a nonempty trace.
    std::pair<std::int64_t, std::int64_t> span() const {
        std::int64_t lo = INT64_MAX, hi = INT64_MIN;
        for (const auto& ue : ues) {
            if (ue.events.empty()) continue;
            lo = std::min(lo, ue.events.front().timestamp_ms);
            hi = std::max(hi, ue.events.back().timestamp_ms);
        }
        if (lo > hi) throw InsufficientData("trace has no events");
        return {lo, hi};
    }

    friend bool operator==(const Trace&, const Trace&) = default;
};

enum class UnknownTacPolicy { REJECT, SKIP, ASSIGN };

struct ParseOptions {
    UnknownTacPolicy unknown_tac = UnknownTacPolicy::REJECT;
    DeviceType assign_device = DeviceType::PHONE;  // used by ASSIGN
    bool device_column = false;  // input carries device_type instead of tac
    Generation generation = Generation::LTE;
};

// Trace CSV: timestamp_ms,ue_id,tac,event_type (or device_type with
// device_column). Per-UE sequences are sorted by timestamp, stable in
// ingestion order.
inline Trace parse_trace(std::istream& in, const TacCatalog& catalog,
                         const ParseOptions& opt = {}) {
    struct Builder {
        DeviceType device;
        std::vector<ControlEvent> events;
        std::int64_t last_ts = INT64_MIN;
        std::size_t reordered = 0;
    };
    std::map<std::string, Builder> by_ue;

    std::string line;
    std::size_t line_no = 0;
    const std::string_view expected_header =
        opt.device_column ? "timestamp_ms,ue_id,device_type,event_type"
                          : "timestamp_ms,ue_id,tac,event_type";
    if (!std::getline(in, line)) throw MalformedLine(1, "missing header");
    ++line_no;
    if (csv::trim(line) != expected_header)
        throw MalformedLine(1, "expected header '" + std::string(expected_header) + "'");

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = csv::trim(line);
        if (sv.empty()) continue;
        auto fields = csv::split(sv);
        if (fields.size() != 4) throw MalformedLine(line_no, "expected 4 fields");
        std::int64_t ts;
        if (!csv::parse_i64(csv::trim(fields[0]), ts) || ts < 0)
            throw MalformedLine(line_no, "bad timestamp");
        std::string ue_id(csv::trim(fields[1]));
        if (ue_id.empty()) throw MalformedLine(line_no, "empty ue_id");
        auto ev = event_from_string(csv::trim(fields[3]), opt.generation);
        if (!ev) throw UnknownEventType(std::string(csv::trim(fields[3])));

        DeviceType dev = opt.assign_device;
        std::string_view third = csv::trim(fields[2]);
        if (opt.device_column) {
            auto d = device_from_string(third);
            if (!d) throw MalformedLine(line_no, "unknown device type");
            dev = *d;
        } else {
            if (third.size() < 8) throw MalformedLine(line_no, "TAC shorter than 8 characters");
            auto d = catalog.lookup(third.substr(0, 8));
            if (!d) {
                switch (opt.unknown_tac) {
                    case UnknownTacPolicy::REJECT: throw UnknownTac(std::string(third.substr(0, 8)));
                    case UnknownTacPolicy::SKIP: continue;
                    case UnknownTacPolicy::ASSIGN: dev = opt.assign_device; break;
                }
            } else {
                dev = *d;
            }
        }

        auto [it, inserted] = by_ue.try_emplace(std::move(ue_id));
        Builder& b = it->second;
        if (inserted) b.device = dev;
        if (ts < b.last_ts) ++b.reordered;
        b.last_ts = std::max(b.last_ts, ts);
        b.events.push_back({ts, *ev});
    }

    Trace trace;
    trace.ues.reserve(by_ue.size());
    for (auto& [id, b] : by_ue) {
        std::stable_sort(b.events.begin(), b.events.end(),
                         [](const ControlEvent& a, const ControlEvent& c) {
                             return a.timestamp_ms < c.timestamp_ms;
                         });
        trace.reordered_events += b.reordered;
        trace.ues.push_back({id, b.device, std::move(b.events)});
    }
    return trace;
}

// Canonical CSV form (device-column flavor); re-parsing yields the same Trace.
inline void serialize_trace(const Trace& trace, std::ostream& out,
                            Generation gen = Generation::LTE) {
    out << "timestamp_ms,ue_id,device_type,event_type\n";
    std::string buf;
    for (const auto& ue : trace.ues) {
        for (const auto& ev : ue.events) {
            buf.clear();
            csv::append_i64(buf, ev.timestamp_ms);
            buf += ',';
            buf += ue.ue_id;
            buf += ',';
            buf += to_string(ue.device);
            buf += ',';
            buf += to_string(ev.event_type, gen);
            buf += '\n';
            out << buf;
        }
    }
}

// Wall-clock conventions. Hour boundaries are multiples of one hour in the
// configured fixed UTC offset; day 0 starts at the (offset-shifted) epoch.
struct TimeConfig {
    int utc_offset_minutes = 0;
    int epoch_weekday = 4;  // day 0 weekday, 0=Sunday; 4 = Thursday (Unix epoch)

    static std::int64_t floor_div(std::int64_t a, std::int64_t b) {
        std::int64_t q = a / b;
        return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
    }
    std::int64_t shifted(std::int64_t ts_ms) const {
        return ts_ms + static_cast<std::int64_t>(utc_offset_minutes) * 60'000;
    }
    int hour_of_day(std::int64_t ts_ms) const {
        return static_cast<int>(((hour_index(ts_ms) % 24) + 24) % 24);
    }
    std::int64_t day_index(std::int64_t ts_ms) const {
        return floor_div(shifted(ts_ms), kMsPerDay);
    }
    // Absolute hour index since epoch; one HourSlice per value.
    std::int64_t hour_index(std::int64_t ts_ms) const {
        return floor_div(shifted(ts_ms), kMsPerHour);
    }
    bool is_weekend(std::int64_t day_idx) const {
        int wd = static_cast<int>(((day_idx + epoch_weekday) % 7 + 7) % 7);
        return wd == 0 || wd == 6;
    }
};

// Events of one device type falling in one wall-clock hour. Event ranges
// index into the owning Trace.
struct HourSlice {
    std::int64_t hour_index;  // absolute hour since epoch
    int hour_of_day;
    std::int64_t day_index;
    DeviceType device;
    struct UeRange {
        std::size_t ue;      // index into Trace::ues
        std::size_t begin;   // [begin, end) into UeTrace::events
        std::size_t end;
    };
    std::vector<UeRange> ranges;

    std::size_t event_count() const {
        std::size_t n = 0;
        for (const auto& r : ranges) n += r.end - r.begin;
        return n;
    }
};

// Non-overlapping hour slices covering every event exactly once, keyed by
// (absolute hour, device type); only nonempty slices are returned.
inline std::vector<HourSlice> partition_hours(const Trace& trace, const TimeConfig& tc = {}) {
    if (trace.empty()) throw InsufficientData("cannot partition an empty trace");
    std::map<std::pair<std::int64_t, DeviceType>, HourSlice> slices;
    for (std::size_t u = 0; u < trace.ues.size(); ++u) {
        const auto& events = trace.ues[u].events;
        std::size_t i = 0;
        while (i < events.size()) {
            std::int64_t h = tc.hour_index(events[i].timestamp_ms);
            std::size_t j = i;
            while (j < events.size() && tc.hour_index(events[j].timestamp_ms) == h) ++j;
            auto key = std::make_pair(h, trace.ues[u].device);
            auto [it, inserted] = slices.try_emplace(key);
            if (inserted) {
                it->second.hour_index = h;
                it->second.hour_of_day = static_cast<int>(((h % 24) + 24) % 24);
                it->second.day_index = TimeConfig::floor_div(h, 24);
                it->second.device = trace.ues[u].device;
            }
            it->second.ranges.push_back({u, i, j});
            i = j;
        }
    }
    std::vector<HourSlice> out;
    out.reserve(slices.size());
    for (auto& [k, s] : slices) out.push_back(std::move(s));
    return out;
}

} // namespace mcn

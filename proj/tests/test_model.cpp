#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "mcn/model.hpp"
#include "test_support.hpp"

using namespace mcn;

namespace {

TrafficModel rich_model() {
    TrafficModel m = test::two_level_model();
    test::add_baseline(m);
    // A two-profile trajectory section exercises that arm of the schema.
    TrajectoryProfile p1{std::vector<std::int32_t>(m.hours.size(), 0), 0.75};
    TrajectoryProfile p2{std::vector<std::int32_t>(m.hours.size(), 0), 0.25};
    m.trajectories[DeviceType::PHONE] = {p1, p2};
    return m;
}

} // namespace

TEST_CASE("model save/load round trip") {
    TrafficModel m = rich_model();
    validate_model(m);

    std::stringstream buf;
    save_model(m, buf);
    TrafficModel back = load_model(buf);

    CHECK(back == m);

    SECTION("a second serialization is byte-identical") {
        std::stringstream buf2;
        save_model(back, buf2);
        std::stringstream buf3;
        save_model(m, buf3);
        CHECK(buf2.str() == buf3.str());
    }
}

TEST_CASE("model format versioning") {
    TrafficModel m = test::deterministic_walk_model();
    std::stringstream buf;
    save_model(m, buf);
    CHECK(buf.str().find("\"version\"") != std::string::npos);

    std::string doc = buf.str();
    auto pos = doc.find("\"version\"");
    auto colon = doc.find(':', pos);
    doc.replace(colon + 1, doc.find_first_of(",}", colon) - colon - 1, " 999");
    std::istringstream in(doc);
    CHECK_THROWS_AS(load_model(in), FormatVersionMismatch);
}

TEST_CASE("malformed documents are rejected") {
    SECTION("not JSON") {
        std::istringstream in("this is not json");
        CHECK_THROWS_AS(load_model(in), SchemaViolation);
    }
    SECTION("wrong root shape") {
        std::istringstream in("[1,2,3]");
        CHECK_THROWS_AS(load_model(in), SchemaViolation);
    }
}

TEST_CASE("structural validation") {
    SECTION("edge probabilities must sum to one") {
        TrafficModel m = test::deterministic_walk_model();
        m.keys.begin()->second.transitions.top_state(TopState::CONNECTED).edges[0].prob = 0.5;
        CHECK_THROWS_AS(validate_model(m), SchemaViolation);
    }
    SECTION("illegal edge events are rejected") {
        TrafficModel m = test::deterministic_walk_model();
        auto& km = m.keys.begin()->second;
        km.transitions.top_state(TopState::CONNECTED).edges = {
            test::edge(EventType::HO, 1.0, test::atom(1.0))};
        CHECK_THROWS_AS(validate_model(m), SchemaViolation);
    }
    SECTION("edges must be sorted and unique") {
        TrafficModel m = test::deterministic_walk_model();
        auto& km = m.keys.begin()->second;
        km.transitions.top_state(TopState::CONNECTED).edges = {
            test::edge(EventType::DTCH, 0.5, test::atom(1.0)),
            test::edge(EventType::S1_CONN_REL, 0.5, test::atom(1.0))};
        CHECK_NOTHROW(validate_model(m));
        std::swap(km.transitions.top_state(TopState::CONNECTED).edges[0],
                  km.transitions.top_state(TopState::CONNECTED).edges[1]);
        CHECK_THROWS_AS(validate_model(m), SchemaViolation);
    }
    SECTION("keys must reference covered hours") {
        TrafficModel m = test::deterministic_walk_model();
        m.hours.erase(m.hours.begin());  // drop hour 0, its keys remain
        CHECK_THROWS_AS(validate_model(m), SchemaViolation);
    }
    SECTION("weights must cover every key's cluster") {
        TrafficModel m = test::deterministic_walk_model();
        m.weights[{DeviceType::PHONE, 0}] = {};
        CHECK_THROWS_AS(validate_model(m), SchemaViolation);
    }
    SECTION("positive-weight clusters need a key entry") {
        TrafficModel m = test::deterministic_walk_model();
        m.weights[{DeviceType::PHONE, 0}] = {0.5, 0.5};  // cluster 1 has no key
        CHECK_THROWS_AS(validate_model(m), SchemaViolation);
    }
    SECTION("first-event offsets must stay inside the hour") {
        TrafficModel m = test::deterministic_walk_model();
        m.keys.begin()->second.first_event.start_offset_s = test::atom(3600.0);
        CHECK_THROWS_AS(validate_model(m), SchemaViolation);
    }
    SECTION("active first-event mass requires an offset CDF") {
        TrafficModel m = test::deterministic_walk_model();
        m.keys.begin()->second.first_event.start_offset_s.reset();
        CHECK_THROWS_AS(validate_model(m), SchemaViolation);
    }
    SECTION("trajectory profiles must match the hour count") {
        TrafficModel m = rich_model();
        m.trajectories[DeviceType::PHONE][0].clusters.pop_back();
        CHECK_THROWS_AS(validate_model(m), SchemaViolation);
    }
}

TEST_CASE("event vocabulary follows the model generation") {
    TrafficModel m = test::deterministic_walk_model();
    std::stringstream lte;
    save_model(m, lte);
    CHECK(lte.str().find("\"SRV_REQ\"") != std::string::npos);
    CHECK(lte.str().find("\"S1_CONN_REL\"") != std::string::npos);

    m.generation = Generation::FIVE_G;
    // Make the content 5G-legal: no TAU-reachable structure exists in the
    // deterministic walk, only the labels change.
    std::stringstream fg;
    save_model(m, fg);
    CHECK(fg.str().find("\"AN_REL\"") != std::string::npos);
    CHECK(fg.str().find("\"S1_CONN_REL\"") == std::string::npos);
    CHECK(fg.str().find("\"generation\"") != std::string::npos);

    std::istringstream in(fg.str());
    TrafficModel back = load_model(in);
    CHECK(back.generation == Generation::FIVE_G);
    CHECK(back == m);
}

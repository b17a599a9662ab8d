#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "mcn/fiveg.hpp"
#include "mcn/generator.hpp"
#include "mcn/state_machine.hpp"
#include "test_support.hpp"

using namespace mcn;

namespace {

const Edge* find_edge(const StateModel& sm, EventType via) {
    for (const auto& e : sm.edges)
        if (e.via == via) return &e;
    return nullptr;
}

} // namespace

TEST_CASE("scaling factors default to boosted handover") {
    ScalingFactors f;
    CHECK(f.of(EventType::HO) == 4.6);
    CHECK(f.of(EventType::ATCH) == 1.0);
    CHECK(f.of(EventType::SRV_REQ) == 1.0);
    f.set(EventType::SRV_REQ, 2.0);
    CHECK(f.of(EventType::SRV_REQ) == 2.0);
}

TEST_CASE("parse_scaling_factors accepts 5G and 4G event names") {
    std::istringstream in(
        "event,factor\n"
        "HO,2.5\n"
        "AN_REL,2.0\n"
        "S1_CONN_REL,3.0\n");
    auto f = parse_scaling_factors(in);
    CHECK(f.of(EventType::HO) == 2.5);
    CHECK(f.of(EventType::S1_CONN_REL) == 3.0);  // last row wins
    CHECK(f.of(EventType::ATCH) == 1.0);

    std::istringstream no_header("REGISTER,1.5\n");
    CHECK(parse_scaling_factors(no_header).of(EventType::ATCH) == 1.5);

    auto expect_bad = [](const std::string& text) {
        std::istringstream bad(text);
        CHECK_THROWS_AS(parse_scaling_factors(bad), MalformedLine);
    };
    expect_bad("TAU,2.0\n");
    expect_bad("WIBBLE,2.0\n");
    expect_bad("HO,0\n");
    expect_bad("HO,-1.5\n");
    expect_bad("HO,abc\n");
    expect_bad("HO\n");
}

TEST_CASE("conversion multiplies the odds of a scaled edge") {
    auto m = test::skeleton(DeviceType::PHONE, 0, 0);
    KeyModel km;
    km.transitions.top_state(TopState::DEREGISTERED).edges = {
        test::edge(EventType::ATCH, 1.0, test::atom(40.0))};
    km.transitions.top_state(TopState::CONNECTED).edges = {
        test::edge(EventType::DTCH, 0.8, test::atom(90.0)),
        test::edge(EventType::S1_CONN_REL, 0.2, test::atoms({{30.0, 0.5}, {60.0, 0.5}}))};
    km.transitions.top_state(TopState::IDLE).edges = {
        test::edge(EventType::SRV_REQ, 1.0, test::atom(25.0))};
    km.first_event.event_prob[static_cast<std::size_t>(EventType::ATCH)] = 1.0;
    km.first_event.silent_prob = 0.0;
    km.first_event.start_offset_s = test::atom(100.0);
    m.keys.begin()->second = km;

    ScalingFactors f;
    f.set(EventType::S1_CONN_REL, 4.6);

    SECTION("probabilities renormalize by scaled weight") {
        auto out = convert_model_to_5g(m, f);
        CHECK(out.generation == Generation::FIVE_G);
        CHECK(m.generation == Generation::LTE);  // input untouched

        const auto& conn = out.keys.begin()->second.transitions.top_state(TopState::CONNECTED);
        const Edge* rel = find_edge(conn, EventType::S1_CONN_REL);
        const Edge* dtch = find_edge(conn, EventType::DTCH);
        REQUIRE(rel != nullptr);
        REQUIRE(dtch != nullptr);
        CHECK(rel->prob == Catch::Approx(0.92 / 1.72).margin(1e-12));
        CHECK(dtch->prob == Catch::Approx(0.8 / 1.72).margin(1e-12));

        // p'/(1-p') == 4.6 * p/(1-p)
        CHECK(rel->prob / (1 - rel->prob) ==
              Catch::Approx(4.6 * 0.2 / 0.8).margin(1e-12));

        // sojourns untouched without scale_sojourn
        REQUIRE(rel->sojourn_s.points().size() == 2);
        CHECK(rel->sojourn_s.points()[0].value == 30.0);
        CHECK(rel->sojourn_s.points()[1].value == 60.0);
        CHECK(validate_5g_model(out).empty());
    }

    SECTION("scale_sojourn divides durations on scaled edges only") {
        auto out = convert_model_to_5g(m, f, true);
        const auto& conn = out.keys.begin()->second.transitions.top_state(TopState::CONNECTED);
        const Edge* rel = find_edge(conn, EventType::S1_CONN_REL);
        const Edge* dtch = find_edge(conn, EventType::DTCH);
        REQUIRE(rel != nullptr);
        CHECK(rel->sojourn_s.points()[0].value == Catch::Approx(30.0 / 4.6));
        CHECK(rel->sojourn_s.points()[1].value == Catch::Approx(60.0 / 4.6));
        CHECK(dtch->sojourn_s.points()[0].value == 90.0);
    }
}

TEST_CASE("conversion removes the tracking-area-update structure") {
    auto m = test::two_level_model();
    auto out = convert_model_to_5g(m);

    const auto& km = out.keys.begin()->second;
    const auto& tr = km.transitions;

    // HO/TAU races collapse to pure HO.
    for (SubState s : {SubState::SRV_REQ_S, SubState::HO_S}) {
        const auto& sm = tr.sub_state(s);
        REQUIRE(sm.edges.size() == 1);
        CHECK(sm.edges[0].via == EventType::HO);
        CHECK(sm.edges[0].prob == 1.0);
    }
    CHECK(tr.sub_state(SubState::TAU_S_CONN).edges.empty());
    CHECK(tr.sub_state(SubState::TAU_S_IDLE).edges.empty());
    CHECK(tr.sub_state(SubState::S1_REL_S_2).edges.empty());
    CHECK(tr.sub_state(SubState::S1_REL_S_1).edges.empty());

    // Top-level structure survives unchanged.
    const auto& conn = tr.top_state(TopState::CONNECTED);
    REQUIRE(conn.edges.size() == 2);
    CHECK(find_edge(conn, EventType::S1_CONN_REL)->prob == 0.75);
    CHECK(find_edge(conn, EventType::DTCH)->prob == 0.25);

    CHECK(km.first_event.prob(EventType::SRV_REQ) == 0.5);
    CHECK(km.first_event.silent_prob == 0.125);

    CHECK(validate_5g_model(out).empty());
    CHECK_THROWS_AS(convert_model_to_5g(out), AlreadyFiveG);
}

TEST_CASE("conversion renormalizes first-event mass away from TAU") {
    auto m = test::two_level_model();
    for (auto& [key, km] : m.keys) {
        km.first_event = {};
        km.first_event.event_prob[static_cast<std::size_t>(EventType::TAU)] = 0.3;
        km.first_event.event_prob[static_cast<std::size_t>(EventType::SRV_REQ)] = 0.2;
        km.first_event.silent_prob = 0.5;
        km.first_event.start_offset_s = test::atom(50.0);
    }
    auto out = convert_model_to_5g(m);
    const auto& fe = out.keys.begin()->second.first_event;

    CHECK(fe.prob(EventType::TAU) == 0.0);
    CHECK(fe.prob(EventType::SRV_REQ) == Catch::Approx(0.2 / 0.7).margin(1e-12));
    CHECK(fe.silent_prob == Catch::Approx(0.5 / 0.7).margin(1e-12));
    REQUIRE(fe.start_offset_s.has_value());
}

TEST_CASE("a first-event law that was all TAU goes silent") {
    auto m = test::two_level_model();
    for (auto& [key, km] : m.keys) {
        km.first_event = {};
        km.first_event.event_prob[static_cast<std::size_t>(EventType::TAU)] = 1.0;
        km.first_event.silent_prob = 0.0;
        km.first_event.start_offset_s = test::atom(50.0);
    }
    auto out = convert_model_to_5g(m);
    const auto& fe = out.keys.begin()->second.first_event;

    CHECK(fe.silent_prob == 1.0);
    CHECK_FALSE(fe.start_offset_s.has_value());
    for (EventType e : kAllEvents) CHECK(fe.prob(e) == 0.0);
}

TEST_CASE("conversion rewrites the baseline section") {
    auto m = test::two_level_model();
    test::add_baseline(m);
    for (auto& [key, bm] : m.baseline)
        bm.state(TopState::IDLE).edges = {{EventType::SRV_REQ, 0.7}, {EventType::TAU, 0.3}};
    auto out = convert_model_to_5g(m);
    const auto& bm = out.baseline.begin()->second;

    CHECK(bm.tau == BaselineStream{});
    CHECK(bm.ho.occur_prob == 0.75);
    CHECK(bm.ho.rate_per_s == Catch::Approx((1.0 / 30.0) * 4.6));
    REQUIRE(bm.state(TopState::IDLE).edges.size() == 1);
    CHECK(bm.state(TopState::IDLE).edges[0].first == EventType::SRV_REQ);
    CHECK(bm.state(TopState::IDLE).edges[0].second == Catch::Approx(1.0));
    CHECK(bm.first_event.prob(EventType::TAU) == 0.0);
    CHECK(validate_5g_model(out).empty());
}

TEST_CASE("validate_5g_model catches leftover 4G structure") {
    auto m = test::two_level_model();

    auto lte = validate_5g_model(m);
    REQUIRE(lte.size() == 1);
    CHECK(lte[0].find("generation") != std::string::npos);

    auto out = convert_model_to_5g(m);
    REQUIRE(validate_5g_model(out).empty());

    SECTION("re-added TAU edge") {
        auto& sm = out.keys.begin()->second.transitions.sub_state(SubState::SRV_REQ_S);
        sm.edges.push_back(test::edge(EventType::TAU, 0.0, test::atom(5.0)));
        auto v = validate_5g_model(out);
        REQUIRE_FALSE(v.empty());
        CHECK(v[0].find("tracking-area-update edge") != std::string::npos);
    }
    SECTION("removed sub state with edges") {
        out.keys.begin()->second.transitions.sub_state(SubState::TAU_S_IDLE).edges = {
            test::edge(EventType::S1_CONN_REL, 1.0, test::atom(5.0))};
        auto v = validate_5g_model(out);
        REQUIRE_FALSE(v.empty());
        CHECK(v[0].find("removed state") != std::string::npos);
    }
    SECTION("release-wait state regains an edge") {
        out.keys.begin()->second.transitions.sub_state(SubState::S1_REL_S_1).edges = {
            test::edge(EventType::HO, 1.0, test::atom(5.0))};
        auto v = validate_5g_model(out);
        REQUIRE_FALSE(v.empty());
        CHECK(v[0].find("S1_REL_S_1") != std::string::npos);
    }
    SECTION("first-event TAU mass") {
        out.keys.begin()->second.first_event.event_prob[
            static_cast<std::size_t>(EventType::TAU)] = 0.1;
        auto v = validate_5g_model(out);
        REQUIRE_FALSE(v.empty());
        CHECK(v[0].find("first-event") != std::string::npos);
    }
    SECTION("baseline TAU stream still active") {
        test::add_baseline(m);
        auto converted = convert_model_to_5g(m);
        converted.baseline.begin()->second.tau.occur_prob = 0.5;
        auto v = validate_5g_model(converted);
        REQUIRE_FALSE(v.empty());
        CHECK(v[0].find("stream still active") != std::string::npos);
    }
}

TEST_CASE("a converted model generates legal TAU-free traffic") {
    auto m5 = convert_model_to_5g(test::two_level_model());
    GenConfig cfg;
    cfg.ue_count = 30;
    cfg.duration_hours = 2;
    cfg.seed = 99;
    auto events = generate(m5, cfg);

    REQUIRE_FALSE(events.empty());
    std::vector<std::vector<ControlEvent>> per_ue(cfg.ue_count);
    for (const auto& e : events) {
        CHECK(e.event != EventType::TAU);
        per_ue[e.ue].push_back({e.timestamp_ms, e.event});
    }
    std::size_t violations = 0;
    for (const auto& seq : per_ue) violations += validate_sequence(seq).size();
    CHECK(violations == 0);
}

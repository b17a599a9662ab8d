#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mcn/analysis.hpp"
#include "mcn/generator.hpp"
#include "mcn/model_fit.hpp"
#include "test_support.hpp"

using namespace mcn;

TEST_CASE("first-event estimation") {
    std::vector<FirstEvent> firsts = {{false, EventType::ATCH, 10.0},
                                      {false, EventType::ATCH, 20.0},
                                      {false, EventType::SRV_REQ, 30.0},
                                      {true, EventType::ATCH, 0.0},
                                      {true, EventType::ATCH, 0.0},
                                      {true, EventType::ATCH, 0.0},
                                      {true, EventType::ATCH, 0.0},
                                      {true, EventType::ATCH, 0.0}};
    auto fe = fit_first_event(firsts);
    CHECK(fe.prob(EventType::ATCH) == Catch::Approx(0.25));
    CHECK(fe.prob(EventType::SRV_REQ) == Catch::Approx(0.125));
    CHECK(fe.prob(EventType::HO) == 0.0);
    CHECK(fe.silent_prob == Catch::Approx(0.625));
    REQUIRE(fe.start_offset_s.has_value());
    // Offsets only cover the non-silent observations.
    CHECK(fe.start_offset_s->points().size() == 3);
    CHECK(fe.start_offset_s->min_value() == 10.0);
    CHECK(fe.start_offset_s->max_value() == 30.0);

    CHECK_THROWS_AS(fit_first_event({}), InsufficientData);

    SECTION("all silent leaves no offset distribution") {
        std::vector<FirstEvent> quiet = {{true, EventType::ATCH, 0.0}};
        auto f = fit_first_event(quiet);
        CHECK(f.silent_prob == 1.0);
        CHECK_FALSE(f.start_offset_s.has_value());
    }
}

TEST_CASE("transition estimation from sojourn samples") {
    auto sample = [](Level lvl, TopState tf, SubState sf, EventType via, std::int64_t ms,
                     bool cens) {
        SojournSample s{};
        s.level = lvl;
        s.top_from = tf;
        s.sub_from = sf;
        s.via = via;
        s.duration_ms = ms;
        s.censored = cens;
        return s;
    };
    std::vector<SojournSample> xs = {
        sample(Level::TOP, TopState::CONNECTED, SubState::NONE, EventType::S1_CONN_REL, 5000,
               false),
        sample(Level::TOP, TopState::CONNECTED, SubState::NONE, EventType::S1_CONN_REL, 7000,
               false),
        sample(Level::TOP, TopState::CONNECTED, SubState::NONE, EventType::DTCH, 9000, false),
        sample(Level::TOP, TopState::CONNECTED, SubState::NONE, EventType::DTCH, 11000, true),
        sample(Level::SUB, TopState::CONNECTED, SubState::SRV_REQ_S, EventType::HO, 1000, false),
        sample(Level::SUB, TopState::CONNECTED, SubState::SRV_REQ_S, EventType::S1_CONN_REL,
               2000, true),
    };
    auto tm = estimate_transitions(xs);

    const auto& conn = tm.top_state(TopState::CONNECTED);
    REQUIRE(conn.edges.size() == 2);
    // Edges come out in event-enum order: DTCH before S1_CONN_REL.
    CHECK(conn.edges[0].via == EventType::DTCH);
    CHECK(conn.edges[0].prob == Catch::Approx(1.0 / 3.0));
    CHECK(conn.edges[1].via == EventType::S1_CONN_REL);
    CHECK(conn.edges[1].prob == Catch::Approx(2.0 / 3.0));
    CHECK(conn.edges[1].sojourn_s.min_value() == 5.0);
    CHECK(conn.edges[1].sojourn_s.max_value() == 7.0);

    const auto& srs = tm.sub_state(SubState::SRV_REQ_S);
    REQUIRE(srs.edges.size() == 1);  // the censored sample is excluded
    CHECK(srs.edges[0].via == EventType::HO);
    CHECK(srs.edges[0].prob == 1.0);

    CHECK(tm.top_state(TopState::IDLE).empty());
    CHECK(tm.top_state(TopState::DEREGISTERED).empty());
}

TEST_CASE("full fit recovers a deterministic generator") {
    TrafficModel gt = test::deterministic_walk_model();
    GenConfig gen_cfg;
    gen_cfg.ue_count = 40;
    gen_cfg.duration_hours = 3;
    gen_cfg.seed = 5;
    auto events = generate(gt, gen_cfg);
    Trace trace = to_trace(annotate(events, gen_cfg.ue_count, Generation::LTE));

    FitParams params;
    params.cluster.theta_f = {1e18, 1e18, 1e18, 1e18};  // force one cluster
    TrafficModel fitted = fit(trace, params);
    validate_model(fitted);

    CHECK(fitted.generation == Generation::LTE);
    REQUIRE(fitted.hours == std::vector<int>{0, 1, 2});
    CHECK_FALSE(fitted.baseline.empty());

    for (int h : fitted.hours) {
        ModelKey key{DeviceType::PHONE, h, 0};
        REQUIRE(fitted.keys.contains(key));
        const auto& km = fitted.keys.at(key);

        const auto& conn = km.transitions.top_state(TopState::CONNECTED);
        REQUIRE(conn.edges.size() == 1);
        CHECK(conn.edges[0].via == EventType::S1_CONN_REL);
        CHECK(conn.edges[0].prob == 1.0);
        CHECK(conn.edges[0].sojourn_s.min_value() == 10.0);
        CHECK(conn.edges[0].sojourn_s.max_value() == 10.0);

        const auto& idle = km.transitions.top_state(TopState::IDLE);
        REQUIRE(idle.edges.size() == 1);
        CHECK(idle.edges[0].via == EventType::SRV_REQ);
        CHECK(idle.edges[0].sojourn_s.min_value() == 20.0);
        CHECK(idle.edges[0].sojourn_s.max_value() == 20.0);
    }

    // The 30 s cycle divides the hour exactly, so every hour of every UE
    // opens with SRV_REQ at offset zero.
    for (int h : fitted.hours) {
        const auto& fe = fitted.keys.at({DeviceType::PHONE, h, 0}).first_event;
        CHECK(fe.prob(EventType::SRV_REQ) == 1.0);
        CHECK(fe.silent_prob == 0.0);
        REQUIRE(fe.start_offset_s.has_value());
        CHECK(fe.start_offset_s->max_value() == 0.0);
    }
}

TEST_CASE("fit stamps the requested generation") {
    TrafficModel gt = test::deterministic_walk_model();
    GenConfig gen_cfg;
    gen_cfg.ue_count = 5;
    auto events = generate(gt, gen_cfg);
    Trace trace = to_trace(annotate(events, gen_cfg.ue_count, Generation::LTE));

    FitParams params;
    params.generation = Generation::FIVE_G;
    TrafficModel m = fit(trace, params);
    CHECK(m.generation == Generation::FIVE_G);

    CHECK_THROWS_AS(fit(Trace{}), InsufficientData);
}

TEST_CASE("refit recovers branch probabilities from a rich model") {
    TrafficModel gt = test::two_level_model();
    GenConfig gen_cfg;
    gen_cfg.ue_count = 600;
    gen_cfg.duration_hours = 1;
    gen_cfg.seed = 17;
    auto events = generate(gt, gen_cfg);
    REQUIRE(events.size() > 10000);
    Trace trace = to_trace(annotate(events, gen_cfg.ue_count, Generation::LTE));

    FitParams params;
    params.cluster.theta_f = {1e18, 1e18, 1e18, 1e18};
    TrafficModel fitted = fit(trace, params);

    ModelKey key{DeviceType::PHONE, 0, 0};
    REQUIRE(fitted.keys.contains(key));
    const auto& conn = fitted.keys.at(key).transitions.top_state(TopState::CONNECTED);
    const auto* rel = conn.find(EventType::S1_CONN_REL);
    const auto* dtch = conn.find(EventType::DTCH);
    REQUIRE(rel != nullptr);
    REQUIRE(dtch != nullptr);
    CHECK(rel->prob == Catch::Approx(0.75).margin(0.05));
    CHECK(dtch->prob == Catch::Approx(0.25).margin(0.05));

    // Sojourn mass concentrates on the two generating atoms.
    CHECK(rel->sojourn_s.min_value() >= 29.9);
    CHECK(rel->sojourn_s.max_value() <= 80.1);

    const auto& srs = fitted.keys.at(key).transitions.sub_state(SubState::SRV_REQ_S);
    const auto* ho = srs.find(EventType::HO);
    REQUIRE(ho != nullptr);
    CHECK(ho->prob == Catch::Approx(0.5).margin(0.07));
}

TEST_CASE("fit separates devices and clusters heavy from light users") {
    // Two devices with very different event counts per hour; with small
    // thresholds the phone population splits away from the car population
    // inside each device pool only (devices never share clusters).
    TrafficModel gt = test::deterministic_walk_model();
    // Add a second device with much slower cycling.
    KeyModel slow;
    slow.transitions.top_state(TopState::CONNECTED).edges = {
        test::edge(EventType::S1_CONN_REL, 1.0, test::atom(300.0))};
    slow.transitions.top_state(TopState::IDLE).edges = {
        test::edge(EventType::SRV_REQ, 1.0, test::atom(500.0))};
    slow.first_event.event_prob[static_cast<std::size_t>(EventType::SRV_REQ)] = 1.0;
    slow.first_event.silent_prob = 0.0;
    slow.first_event.start_offset_s = test::atom(0.0);
    for (int h = 0; h < 24; ++h) {
        gt.keys[{DeviceType::CONNECTED_CAR, h, 0}] = slow;
        gt.weights[{DeviceType::CONNECTED_CAR, h}] = {1.0};
    }

    GenConfig gen_cfg;
    gen_cfg.ue_count = 60;
    gen_cfg.duration_hours = 2;
    gen_cfg.device_mix = {{DeviceType::PHONE, 0.5}, {DeviceType::CONNECTED_CAR, 0.5}};
    auto events = generate(gt, gen_cfg);
    Trace trace = to_trace(annotate(events, gen_cfg.ue_count, Generation::LTE));

    TrafficModel fitted = fit(trace);
    validate_model(fitted);

    bool has_phone = false, has_car = false;
    for (const auto& [key, km] : fitted.keys) {
        has_phone |= key.device == DeviceType::PHONE;
        has_car |= key.device == DeviceType::CONNECTED_CAR;
    }
    CHECK(has_phone);
    CHECK(has_car);

    // The phone pool cycles every 30 s (120 SRV_REQ per hour), the car pool
    // every 800 s: far beyond theta_f = 5 apart, so if pooled together they
    // would split. Each device still fits into its own single cluster.
    CHECK(fitted.weights.at({DeviceType::PHONE, 0}).size() == 1);
    CHECK(fitted.weights.at({DeviceType::CONNECTED_CAR, 0}).size() == 1);
}

#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "mcn/state_machine.hpp"

using namespace mcn;

namespace {
MachineState st(TopState t, SubState s) { return {t, s}; }

std::vector<ControlEvent> seq(std::initializer_list<std::pair<std::int64_t, EventType>> evs) {
    std::vector<ControlEvent> out;
    for (const auto& [ts, e] : evs) out.push_back({ts, e});
    return out;
}
} // namespace

TEST_CASE("transition table") {
    SECTION("deregistered accepts only attach") {
        CHECK(try_step(st(TopState::DEREGISTERED, SubState::NONE), EventType::ATCH) ==
              st(TopState::CONNECTED, SubState::SRV_REQ_S));
        for (EventType e : {EventType::DTCH, EventType::SRV_REQ, EventType::S1_CONN_REL,
                            EventType::HO, EventType::TAU})
            CHECK_FALSE(try_step(st(TopState::DEREGISTERED, SubState::NONE), e).has_value());
    }
    SECTION("connected") {
        auto c = st(TopState::CONNECTED, SubState::SRV_REQ_S);
        CHECK(try_step(c, EventType::S1_CONN_REL) == st(TopState::IDLE, SubState::S1_REL_S_1));
        CHECK(try_step(c, EventType::DTCH) == st(TopState::DEREGISTERED, SubState::NONE));
        CHECK(try_step(c, EventType::HO) == st(TopState::CONNECTED, SubState::HO_S));
        CHECK(try_step(c, EventType::TAU) == st(TopState::CONNECTED, SubState::TAU_S_CONN));
        CHECK_FALSE(try_step(c, EventType::ATCH).has_value());
        CHECK_FALSE(try_step(c, EventType::SRV_REQ).has_value());
    }
    SECTION("service request needs a release sub-state") {
        CHECK(try_step(st(TopState::IDLE, SubState::S1_REL_S_1), EventType::SRV_REQ) ==
              st(TopState::CONNECTED, SubState::SRV_REQ_S));
        CHECK(try_step(st(TopState::IDLE, SubState::S1_REL_S_2), EventType::SRV_REQ) ==
              st(TopState::CONNECTED, SubState::SRV_REQ_S));
        CHECK_FALSE(try_step(st(TopState::IDLE, SubState::TAU_S_IDLE), EventType::SRV_REQ)
                        .has_value());
    }
    SECTION("idle release only follows an idle tracking-area update") {
        CHECK(try_step(st(TopState::IDLE, SubState::TAU_S_IDLE), EventType::S1_CONN_REL) ==
              st(TopState::IDLE, SubState::S1_REL_S_2));
        CHECK_FALSE(try_step(st(TopState::IDLE, SubState::S1_REL_S_1), EventType::S1_CONN_REL)
                        .has_value());
        CHECK_FALSE(try_step(st(TopState::IDLE, SubState::S1_REL_S_2), EventType::S1_CONN_REL)
                        .has_value());
    }
    SECTION("idle tracking-area update cycles through the release states") {
        CHECK(try_step(st(TopState::IDLE, SubState::S1_REL_S_1), EventType::TAU) ==
              st(TopState::IDLE, SubState::TAU_S_IDLE));
        CHECK(try_step(st(TopState::IDLE, SubState::S1_REL_S_2), EventType::TAU) ==
              st(TopState::IDLE, SubState::TAU_S_IDLE));
        CHECK_FALSE(try_step(st(TopState::IDLE, SubState::TAU_S_IDLE), EventType::TAU)
                        .has_value());
        CHECK_FALSE(try_step(st(TopState::IDLE, SubState::S1_REL_S_1), EventType::HO)
                        .has_value());
    }
    SECTION("step throws on illegal input") {
        CHECK(step(st(TopState::IDLE, SubState::S1_REL_S_1), EventType::DTCH) ==
              st(TopState::DEREGISTERED, SubState::NONE));
        CHECK_THROWS_AS(step(st(TopState::IDLE, SubState::TAU_S_IDLE), EventType::SRV_REQ),
                        IllegalTransition);
    }
}

TEST_CASE("top transition detection") {
    CHECK(is_top_transition(st(TopState::CONNECTED, SubState::SRV_REQ_S), EventType::S1_CONN_REL));
    CHECK_FALSE(is_top_transition(st(TopState::CONNECTED, SubState::SRV_REQ_S), EventType::HO));
    CHECK_FALSE(is_top_transition(st(TopState::IDLE, SubState::TAU_S_IDLE),
                                  EventType::S1_CONN_REL));
    CHECK_FALSE(is_top_transition(st(TopState::IDLE, SubState::TAU_S_IDLE), EventType::SRV_REQ));
}

TEST_CASE("bootstrap prior per first event") {
    CHECK(bootstrap_prior(EventType::ATCH) == st(TopState::DEREGISTERED, SubState::NONE));
    CHECK(bootstrap_prior(EventType::SRV_REQ) == st(TopState::IDLE, SubState::S1_REL_S_1));
    CHECK(bootstrap_prior(EventType::TAU) == st(TopState::IDLE, SubState::S1_REL_S_1));
    CHECK(bootstrap_prior(EventType::DTCH) == st(TopState::IDLE, SubState::S1_REL_S_1));
    CHECK(bootstrap_prior(EventType::S1_CONN_REL) == st(TopState::CONNECTED, SubState::SRV_REQ_S));
    CHECK(bootstrap_prior(EventType::HO) == st(TopState::CONNECTED, SubState::SRV_REQ_S));
}

TEST_CASE("replay of a legal sequence") {
    // ATCH, HO burst, release, TAU in idle, its release, service request.
    auto events = seq({{0, EventType::ATCH},
                       {2000, EventType::HO},
                       {5000, EventType::HO},
                       {9000, EventType::S1_CONN_REL},
                       {15000, EventType::TAU},
                       {21000, EventType::S1_CONN_REL},
                       {30000, EventType::SRV_REQ}});
    auto r = replay(events);
    REQUIRE(r.violations.empty());
    REQUIRE(r.annotated.size() == 7);
    CHECK(r.annotated[0].state_after == st(TopState::CONNECTED, SubState::SRV_REQ_S));
    CHECK(r.annotated[1].state_after == st(TopState::CONNECTED, SubState::HO_S));
    CHECK(r.annotated[3].state_after == st(TopState::IDLE, SubState::S1_REL_S_1));
    CHECK(r.annotated[4].state_after == st(TopState::IDLE, SubState::TAU_S_IDLE));
    CHECK(r.annotated[5].state_after == st(TopState::IDLE, SubState::S1_REL_S_2));
    CHECK(r.annotated[6].state_after == st(TopState::CONNECTED, SubState::SRV_REQ_S));

    // Top level: CONNECTED entered at 0 (ATCH), left at 9000: one 9 s stay.
    // IDLE entered at 9000, left at 30000: one 21 s stay.
    std::vector<SojournSample> top;
    std::vector<SojournSample> sub;
    for (const auto& s : r.sojourns)
        (s.level == Level::TOP ? top : sub).push_back(s);
    REQUIRE(top.size() == 2);
    CHECK(top[0].top_from == TopState::CONNECTED);
    CHECK(top[0].via == EventType::S1_CONN_REL);
    CHECK(top[0].duration_ms == 9000);
    CHECK_FALSE(top[0].censored);
    CHECK(top[1].top_from == TopState::IDLE);
    CHECK(top[1].via == EventType::SRV_REQ);
    CHECK(top[1].duration_ms == 21000);

    // Sub level: SRV_REQ_S 0→2000 (HO), HO_S 2000→5000 (HO), HO_S 5000→9000
    // censored by the release, S1_REL_S_1 9000→15000 (TAU), TAU_S_IDLE
    // 15000→21000 (S1_CONN_REL), S1_REL_S_2 21000→30000 censored.
    REQUIRE(sub.size() == 6);
    CHECK(sub[0].sub_from == SubState::SRV_REQ_S);
    CHECK(sub[0].duration_ms == 2000);
    CHECK_FALSE(sub[0].censored);
    CHECK(sub[1].sub_from == SubState::HO_S);
    CHECK(sub[1].duration_ms == 3000);
    CHECK(sub[2].sub_from == SubState::HO_S);
    CHECK(sub[2].duration_ms == 4000);
    CHECK(sub[2].censored);
    CHECK(sub[2].via == EventType::S1_CONN_REL);
    CHECK(sub[3].sub_from == SubState::S1_REL_S_1);
    CHECK(sub[3].duration_ms == 6000);
    CHECK_FALSE(sub[3].censored);
    CHECK(sub[4].sub_from == SubState::TAU_S_IDLE);
    CHECK(sub[4].duration_ms == 6000);
    CHECK_FALSE(sub[4].censored);
    CHECK(sub[5].sub_from == SubState::S1_REL_S_2);
    CHECK(sub[5].duration_ms == 9000);
    CHECK(sub[5].censored);
}

TEST_CASE("replay resynchronizes on violations") {
    // SRV_REQ twice in a row: the second arrives in CONNECTED where it is
    // illegal, so replay resyncs to the bootstrap prior and continues.
    auto events = seq({{0, EventType::SRV_REQ},
                       {1000, EventType::SRV_REQ},
                       {2000, EventType::S1_CONN_REL}});
    auto r = replay(events, BootstrapPolicy::INFER_FROM_FIRST_EVENT, "ue-x");
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].index == 1);
    CHECK(r.violations[0].ue_id == "ue-x");
    CHECK(r.violations[0].event == EventType::SRV_REQ);
    CHECK(r.violations[0].state == st(TopState::CONNECTED, SubState::SRV_REQ_S));
    // After the resync the replay continues legally.
    CHECK(r.annotated[1].state_after == st(TopState::CONNECTED, SubState::SRV_REQ_S));
    CHECK(r.annotated[2].state_after == st(TopState::IDLE, SubState::S1_REL_S_1));
    // No sojourn may span the resync point.
    for (const auto& s : r.sojourns) CHECK(s.end_ts == 2000);
}

TEST_CASE("replay from the deregistered origin") {
    auto events = seq({{500, EventType::SRV_REQ}});
    auto r = replay(events, BootstrapPolicy::FROM_DEREGISTERED);
    REQUIRE(r.violations.size() == 1);  // SRV_REQ is illegal in DEREGISTERED
    CHECK(r.violations[0].state == initial_state());
}

TEST_CASE("validate_sequence is empty only for accepted sequences") {
    CHECK(validate_sequence(seq({{0, EventType::ATCH}, {1, EventType::DTCH}})).empty());
    CHECK(validate_sequence(seq({{0, EventType::ATCH}, {1, EventType::ATCH}})).size() == 1);
    CHECK(validate_sequence({}).empty());
}

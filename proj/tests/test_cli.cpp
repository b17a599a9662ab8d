#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "mcn/analysis.hpp"
#include "mcn/generator.hpp"
#include "test_support.hpp"

using namespace mcn;

namespace {

struct CmdResult {
    int code;
    std::string output;
};

// Runs the tool with stdout+stderr captured into a scratch file.
CmdResult run_tool(const test::TempDir& td, const std::string& args) {
    const std::string log = td.file("cmd.log");
    const std::string cmd = std::string(MCN_TRAFFGEN_BIN) + " " + args + " > " + log + " 2>&1";
    int rc = std::system(cmd.c_str());
    int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return {code, test::slurp(log)};
}

// A raw device-column trace big enough to refit: the two-level ground truth
// played for a couple of hours.
std::string write_demo_trace(const test::TempDir& td, const std::string& name) {
    auto model = test::two_level_model();
    GenConfig cfg;
    cfg.ue_count = 100;
    cfg.duration_hours = 2;
    cfg.seed = 41;
    auto events = generate(model, cfg);
    auto raw = to_trace(annotate(events, cfg.ue_count));
    std::ofstream out(td.file(name));
    serialize_trace(raw, out);
    return td.file(name);
}

} // namespace

TEST_CASE("cli help and argument errors") {
    test::TempDir td;
    CHECK(run_tool(td, "--help").code == 0);
    CHECK(run_tool(td, "fit").code != 0);         // missing required args
    CHECK(run_tool(td, "frobnicate").code != 0);  // unknown subcommand
}

TEST_CASE("cli fit-generate-validate round trip") {
    test::TempDir td;
    auto trace = write_demo_trace(td, "trace.csv");
    const std::string model = td.file("model.json");

    auto fit = run_tool(td, "fit " + trace + " -o " + model +
                                " --theta-f 1e18 --theta-n 100000");
    INFO(fit.output);
    REQUIRE(fit.code == 0);
    CHECK(fit.output.find("fitted") != std::string::npos);

    const std::string synth = td.file("synth.csv");
    auto gen = run_tool(td, "generate " + model + " -o " + synth + " -K 50 -H 2 --seed 7");
    INFO(gen.output);
    REQUIRE(gen.code == 0);
    CHECK(gen.output.find("generated") != std::string::npos);
    CHECK(test::slurp(synth).rfind("timestamp_ms,ue_id,device_type,event_type,top_state,sub_state",
                                   0) == 0);

    const std::string synth4 = td.file("synth4.csv");
    auto gen4 = run_tool(td, "generate " + model + " -o " + synth4 +
                                 " -K 50 -H 2 --seed 7 --threads 4");
    REQUIRE(gen4.code == 0);
    CHECK(test::slurp(synth) == test::slurp(synth4));

    auto val = run_tool(td, "validate " + synth);
    INFO(val.output);
    CHECK(val.code == 0);
    CHECK(val.output.find("OK:") != std::string::npos);
    CHECK(val.output.find("0 machine violations") != std::string::npos);

    SECTION("analyze reports") {
        const std::string breakdown = td.file("breakdown.csv");
        auto b = run_tool(td, "analyze " + synth + " --report breakdown -o " + breakdown);
        REQUIRE(b.code == 0);
        CHECK(test::slurp(breakdown).rfind("device,event,pct\n", 0) == 0);

        auto st = run_tool(td, "analyze " + synth + " --report statetime");
        REQUIRE(st.code == 0);
        CHECK(st.output.rfind("device,state,pct\n", 0) == 0);
        CHECK(st.output.find("PHONE,REGISTERED,") != std::string::npos);

        const std::string box = td.file("box.csv");
        auto bx = run_tool(td, "analyze " + synth +
                                   " --report boxstats --metric events --event SRV_REQ -o " + box);
        REQUIRE(bx.code == 0);
        CHECK(test::slurp(box).rfind("hour,min,q1,median,mean,q3,max\n", 0) == 0);

        const std::string vt = td.file("vt.csv");
        auto v = run_tool(td, "analyze " + synth + " --report vt --scales 1,5 -o " + vt);
        REQUIRE(v.code == 0);
        auto vts = test::slurp(vt);
        CHECK(vts.rfind("scale_s,norm_var,source\n", 0) == 0);
        CHECK(vts.find(",trace") != std::string::npos);
        CHECK(vts.find(",poisson") != std::string::npos);

        auto cdf = run_tool(td, "analyze " + synth + " --vs " + synth +
                                    " --report cdf --split --event SRV_REQ");
        REQUIRE(cdf.code == 0);
        CHECK(cdf.output.find("max y-distance 0\n") != std::string::npos);
    }

    SECTION("disttest table") {
        const std::string dt = td.file("dt.csv");
        auto d = run_tool(td, "disttest " + synth +
                                  " --family exp --test ks --quantity interarrival -o " + dt);
        REQUIRE(d.code == 0);
        auto table = test::slurp(dt);
        CHECK(table.rfind("test,device,quantity,pass_pct\n", 0) == 0);
        CHECK(table.find("ks,PHONE,interarrival,") != std::string::npos);
    }

    SECTION("5G conversion and generation") {
        const std::string model5 = td.file("model5g.json");
        auto conv = run_tool(td, "to5g " + model + " -o " + model5);
        INFO(conv.output);
        REQUIRE(conv.code == 0);

        const std::string synth5 = td.file("synth5.csv");
        auto gen5 = run_tool(td, "generate " + model5 + " -o " + synth5 + " -K 40 --seed 3");
        REQUIRE(gen5.code == 0);
        auto content = test::slurp(synth5);
        CHECK(content.find("AN_REL") != std::string::npos);
        CHECK(content.find(",TAU,") == std::string::npos);

        auto val5 = run_tool(td, "validate " + synth5);
        CHECK(val5.code == 0);

        auto again = run_tool(td, "to5g " + model5 + " -o " + td.file("twice.json"));
        CHECK(again.code == 4);  // already 5G
    }

    SECTION("generate outside the model's hours") {
        auto bad = run_tool(td, "generate " + model + " -o " + td.file("x.csv") +
                                    " -K 5 --start-hour 12");
        CHECK(bad.code == 4);
    }
}

TEST_CASE("cli exit codes distinguish failure classes") {
    test::TempDir td;

    SECTION("malformed input is 2") {
        auto bad = td.write("bad.csv",
                            "timestamp_ms,ue_id,device_type,event_type\n"
                            "not,a,csv\n");
        CHECK(run_tool(td, "validate " + bad).code == 2);
        CHECK(run_tool(td, "fit " + bad + " -o " + td.file("m.json")).code == 2);
    }
    SECTION("missing file is 2") {
        CHECK(run_tool(td, "generate " + td.file("nope.json") + " -o " + td.file("x.csv") +
                               " -K 1")
                  .code == 2);
    }
    SECTION("TAC trace without a catalog is 2") {
        auto tac = td.write("tac.csv",
                            "timestamp_ms,ue_id,tac,event_type\n"
                            "1000,a,12345678,ATCH\n");
        CHECK(run_tool(td, "fit " + tac + " -o " + td.file("m.json")).code == 2);
    }
    SECTION("too little data to fit is 3") {
        auto empty = td.write("empty.csv", "timestamp_ms,ue_id,device_type,event_type\n");
        CHECK(run_tool(td, "fit " + empty + " -o " + td.file("m.json")).code == 3);
    }
    SECTION("machine violations are 5") {
        auto bad = td.write("illegal.csv",
                            "timestamp_ms,ue_id,device_type,event_type,top_state,sub_state\n"
                            "1000,u0,PHONE,SRV_REQ,CONNECTED,SRV_REQ_S\n"
                            "2000,u0,PHONE,SRV_REQ,CONNECTED,SRV_REQ_S\n");
        auto res = run_tool(td, "validate " + bad);
        CHECK(res.code == 5);
        CHECK(res.output.find("machine violations") != std::string::npos);
    }
}

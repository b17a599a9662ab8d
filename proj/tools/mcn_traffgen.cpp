#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcn/analysis.hpp"
#include "mcn/dist_fit.hpp"
#include "mcn/errors.hpp"
#include "mcn/fiveg.hpp"
#include "mcn/generator.hpp"
#include "mcn/model.hpp"
#include "mcn/model_fit.hpp"
#include "mcn/parallel.hpp"
#include "mcn/trace.hpp"

namespace {

constexpr int kExitFormat = 2;   // malformed input
constexpr int kExitData = 3;     // not enough data to proceed
constexpr int kExitModel = 4;    // model/config mismatch
constexpr int kExitInvalid = 5;  // validation failed

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mcn::ParseError("cannot open input file: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mcn::Error("cannot open output file: " + path);
    return out;
}

enum class TraceFlavor { ANNOTATED, RAW_TAC, RAW_DEVICE };

TraceFlavor sniff_flavor(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw mcn::MalformedLine(1, "empty file: " + path);
    if (line.find("top_state") != std::string::npos) return TraceFlavor::ANNOTATED;
    if (line.find("device_type") != std::string::npos) return TraceFlavor::RAW_DEVICE;
    return TraceFlavor::RAW_TAC;
}

mcn::Generation parse_generation(const std::string& g) {
    if (g == "lte" || g == "4g" || g == "LTE") return mcn::Generation::LTE;
    if (g == "5g" || g == "fiveg" || g == "FIVE_G") return mcn::Generation::FIVE_G;
    throw mcn::ParseError("unknown generation: " + g);
}

// Any of the three trace file schemas, normalized to an annotated trace.
// Raw flavors are replayed to obtain machine states.
mcn::AnnotatedTrace load_annotated(const std::string& path, const std::string& tac_path,
                                   const std::string& gen) {
    TraceFlavor flavor = sniff_flavor(path);
    auto in = open_input(path);
    if (flavor == TraceFlavor::ANNOTATED) return mcn::parse_annotated_csv(in);
    mcn::ParseOptions opt;
    opt.generation = parse_generation(gen);
    mcn::TacCatalog catalog;
    if (flavor == TraceFlavor::RAW_DEVICE) {
        opt.device_column = true;
    } else {
        if (tac_path.empty())
            throw mcn::ParseError("trace uses TAC identifiers; pass --tac <catalog.csv>");
        auto tac_in = open_input(tac_path);
        catalog = mcn::TacCatalog::parse(tac_in);
    }
    auto trace = mcn::parse_trace(in, catalog, opt);
    auto at = mcn::annotate(trace);
    at.generation = opt.generation;
    return at;
}

template <typename Fn>
void with_report_stream(const std::string& out_path, Fn&& fn) {
    if (out_path.empty()) {
        std::cout.precision(12);
        fn(std::cout);
    } else {
        auto out = open_output(out_path);
        out.precision(12);
        fn(out);
    }
}

// --- fit --------------------------------------------------------------

struct FitOpts {
    std::string trace, tac, out;
    std::vector<double> theta_f;
    std::size_t theta_n = 1000;
    int utc_offset = 0;
    std::string gen = "lte";
    unsigned threads = 0;
};

int run_fit(const FitOpts& o) {
    mcn::FitParams params;
    if (o.theta_f.size() == 1) {
        params.cluster.theta_f.fill(o.theta_f[0]);
    } else if (o.theta_f.size() == mcn::FeatureVector::kDims) {
        for (std::size_t i = 0; i < o.theta_f.size(); ++i)
            params.cluster.theta_f[i] = o.theta_f[i];
    } else if (!o.theta_f.empty()) {
        throw mcn::ParseError("--theta-f takes 1 or 4 values");
    }
    params.cluster.theta_n = o.theta_n;
    params.time.utc_offset_minutes = o.utc_offset;
    params.threads = static_cast<int>(mcn::resolve_threads(o.threads));
    params.generation = parse_generation(o.gen);

    mcn::Trace trace;
    TraceFlavor flavor = sniff_flavor(o.trace);
    if (flavor == TraceFlavor::ANNOTATED) {
        auto in = open_input(o.trace);
        auto at = mcn::parse_annotated_csv(in);
        params.generation = at.generation;
        trace = mcn::to_trace(at);
    } else {
        mcn::ParseOptions opt;
        opt.generation = params.generation;
        mcn::TacCatalog catalog;
        if (flavor == TraceFlavor::RAW_DEVICE) {
            opt.device_column = true;
        } else {
            if (o.tac.empty())
                throw mcn::ParseError("trace uses TAC identifiers; pass --tac <catalog.csv>");
            auto tac_in = open_input(o.tac);
            catalog = mcn::TacCatalog::parse(tac_in);
        }
        auto in = open_input(o.trace);
        trace = mcn::parse_trace(in, catalog, opt);
    }

    std::vector<std::string> warnings;
    auto model = mcn::fit(trace, params, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

    std::cout << "fitted " << model.keys.size() << " model keys over "
              << model.hours.size() << " hours\n";
    for (const auto& [dh, weights] : model.weights)
        std::cout << mcn::to_string(dh.first) << " hour " << dh.second << ": "
                  << weights.size() << " clusters\n";
    for (const auto& [dev, profiles] : model.trajectories)
        std::cout << mcn::to_string(dev) << ": " << profiles.size()
                  << " daily trajectory profiles\n";

    auto out = open_output(o.out);
    mcn::save_model(model, out);
    return 0;
}

// --- generate ---------------------------------------------------------

struct GenOpts {
    std::string model, out, mode = "ours", mix;
    std::size_t ues = 1;
    int start_hour = 0;
    int hours = 1;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

std::map<mcn::DeviceType, double> parse_mix(const std::string& mix) {
    std::map<mcn::DeviceType, double> out;
    if (mix.empty()) return out;
    std::stringstream ss(mix);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw mcn::ParseError("--device-mix wants NAME=FRACTION pairs: " + item);
        auto dev = mcn::device_from_string(mcn::csv::trim(item.substr(0, eq)));
        if (!dev) throw mcn::ParseError("unknown device type in --device-mix: " + item);
        double f = 0;
        if (!mcn::csv::parse_double(mcn::csv::trim(item.substr(eq + 1)), f) || f < 0)
            throw mcn::ParseError("bad fraction in --device-mix: " + item);
        out[*dev] = f;
    }
    return out;
}

int run_generate(const GenOpts& o) {
    auto in = open_input(o.model);
    auto model = mcn::load_model(in);

    mcn::GenConfig cfg;
    cfg.ue_count = o.ues;
    cfg.start_hour = o.start_hour;
    cfg.duration_hours = o.hours;
    cfg.seed = o.seed;
    cfg.device_mix = parse_mix(o.mix);
    cfg.threads = static_cast<int>(mcn::resolve_threads(o.threads));
    if (o.mode == "ours") cfg.mode = mcn::GenMode::OURS;
    else if (o.mode == "baseline") cfg.mode = mcn::GenMode::BASELINE;
    else throw mcn::ParseError("--mode must be ours or baseline");

    auto events = mcn::generate(model, cfg);

    std::array<std::size_t, mcn::kAllEvents.size()> totals{};
    for (const auto& e : events) ++totals[static_cast<std::size_t>(e.event)];
    std::cout << "generated " << events.size() << " events for " << cfg.ue_count
              << " UEs over " << cfg.duration_hours << " hour(s)\n";
    for (mcn::EventType e : mcn::kAllEvents) {
        auto n = totals[static_cast<std::size_t>(e)];
        if (model.generation == mcn::Generation::FIVE_G && e == mcn::EventType::TAU && n == 0)
            continue;
        std::cout << mcn::to_string(e, model.generation) << ' ' << n << '\n';
    }

    auto out = open_output(o.out);
    mcn::write_synth_csv(events, cfg.ue_count, model.generation, out);
    return 0;
}

// --- validate -----------------------------------------------------------

struct ValidateOpts {
    std::string trace, tac, gen = "lte";
};

int run_validate(const ValidateOpts& o) {
    auto at = load_annotated(o.trace, o.tac, o.gen);
    std::size_t total_events = 0;
    std::vector<mcn::Violation> violations;
    for (const auto& ue : at.ues) {
        std::vector<mcn::ControlEvent> events;
        events.reserve(ue.events.size());
        for (const auto& ev : ue.events) events.push_back({ev.timestamp_ms, ev.event_type});
        total_events += events.size();
        auto v = mcn::validate_sequence(events, ue.ue_id);
        violations.insert(violations.end(), v.begin(), v.end());
    }
    if (violations.empty()) {
        std::cout << "OK: " << at.ues.size() << " UEs, " << total_events
                  << " events, 0 machine violations\n";
        return 0;
    }
    std::cout << violations.size() << " machine violations\n";
    std::size_t shown = 0;
    for (const auto& v : violations) {
        if (++shown > 5) break;
        std::cout << "  UE " << v.ue_id << " event #" << v.index << ": "
                  << mcn::to_string(v.event, at.generation) << " illegal in ("
                  << mcn::to_string(v.state.top) << ", " << mcn::to_string(v.state.sub)
                  << ")\n";
    }
    return kExitInvalid;
}

// --- analyze ------------------------------------------------------------

struct AnalyzeOpts {
    std::string trace, vs, report = "breakdown", out, tac, gen = "lte";
    std::string metric = "events", event, state = "CONNECTED", days = "all", scales;
    bool split = false;
    std::uint64_t seed = 0;
    int utc_offset = 0;
};

mcn::EventType parse_event(const std::string& s, mcn::Generation gen) {
    auto e = mcn::event_from_string(s, gen);
    if (!e) e = mcn::event_from_string(s, mcn::Generation::FIVE_G);
    if (!e) throw mcn::ParseError("unknown event type: " + s);
    return *e;
}

mcn::TopState parse_top_state(const std::string& s) {
    auto t = mcn::top_state_from_string(s);
    if (!t) throw mcn::ParseError("unknown top state: " + s);
    return *t;
}

int run_analyze(const AnalyzeOpts& o) {
    auto at = load_annotated(o.trace, o.tac, o.gen);
    mcn::TimeConfig tc;
    tc.utc_offset_minutes = o.utc_offset;

    if (o.report == "breakdown") {
        auto rows = mcn::event_breakdown(at);
        with_report_stream(o.out, [&](std::ostream& out) { mcn::write_breakdown_csv(rows, out); });
        return 0;
    }
    if (o.report == "statetime") {
        auto rows = mcn::state_time_breakdown(at);
        with_report_stream(o.out, [&](std::ostream& out) {
            out << "device,state,pct\n";
            for (const auto& r : rows) {
                out << mcn::to_string(r.device) << ",REGISTERED," << r.registered_pct << '\n';
                out << mcn::to_string(r.device) << ",DEREGISTERED," << r.deregistered_pct << '\n';
                out << mcn::to_string(r.device) << ",CONNECTED," << r.connected_pct << '\n';
                out << mcn::to_string(r.device) << ",IDLE," << r.idle_pct << '\n';
            }
        });
        return 0;
    }
    if (o.report == "boxstats") {
        mcn::HourlyMetric metric = mcn::HourlyMetric::event_count(
            parse_event(o.event.empty() ? "SRV_REQ" : o.event, at.generation));
        if (o.metric == "sojourn")
            metric = mcn::HourlyMetric::mean_sojourn(parse_top_state(o.state));
        else if (o.metric == "taushare")
            metric = mcn::HourlyMetric::tau_conn_share();
        else if (o.metric != "events")
            throw mcn::ParseError("--metric must be events, sojourn, or taushare");
        mcn::DayFilter filter = o.days == "weekday" ? mcn::DayFilter::WEEKDAY
                                : o.days == "weekend" ? mcn::DayFilter::WEEKEND
                                                      : mcn::DayFilter::ALL;
        auto rows = mcn::hourly_box_stats(at, metric, filter, tc);
        with_report_stream(o.out, [&](std::ostream& out) { mcn::write_box_csv(rows, out); });
        return 0;
    }
    if (o.report == "vt") {
        std::optional<mcn::EventType> only;
        if (!o.event.empty()) only = parse_event(o.event, at.generation);
        std::vector<std::int64_t> ts;
        for (const auto& ue : at.ues)
            for (const auto& ev : ue.events)
                if (!only || ev.event_type == *only) ts.push_back(ev.timestamp_ms);
        std::sort(ts.begin(), ts.end());
        std::vector<double> scales;
        if (!o.scales.empty()) {
            std::stringstream ss(o.scales);
            std::string item;
            while (std::getline(ss, item, ',')) {
                double v;
                if (!mcn::csv::parse_double(mcn::csv::trim(item), v) || v <= 0)
                    throw mcn::ParseError("bad --scales value: " + item);
                scales.push_back(v);
            }
        }
        auto trace_pts = mcn::variance_time(ts, scales);
        auto companion = mcn::poisson_companion(ts, o.seed);
        auto poisson_pts = mcn::variance_time(companion, scales);
        with_report_stream(o.out, [&](std::ostream& out) {
            mcn::write_vt_csv(trace_pts, poisson_pts, out);
        });
        return 0;
    }
    if (o.report == "cdf") {
        if (o.vs.empty()) throw mcn::MissingKey("--report cdf requires --vs <other trace>");
        auto other = load_annotated(o.vs, o.tac, o.gen);
        mcn::UeMetric metric = mcn::UeMetric::event_count(
            parse_event(o.event.empty() ? "SRV_REQ" : o.event, at.generation));
        if (o.metric == "statetime") metric = mcn::UeMetric::state_time(parse_top_state(o.state));
        auto cmp = mcn::cdf_compare(at, other, metric, o.split);
        std::cout << "max y-distance " << cmp.distance << '\n';
        if (cmp.distance_inactive)
            std::cout << "inactive (<=2 events) " << *cmp.distance_inactive << '\n';
        if (cmp.distance_active)
            std::cout << "active (>2 events) " << *cmp.distance_active << '\n';
        if (!o.out.empty())
            with_report_stream(o.out, [&](std::ostream& out) {
                mcn::write_cdf_csv(cmp.real_cdf, cmp.synth_cdf, out);
            });
        return 0;
    }
    throw mcn::ParseError("unknown --report: " + o.report);
}

// --- disttest -------------------------------------------------------------

struct DistTestOpts {
    std::string trace, family = "exp", test = "ks", quantity = "sojourn_connected";
    std::string reference, out, tac, gen = "lte";
    double alpha = 0.05;
    int utc_offset = 0;
};

int run_disttest(const DistTestOpts& o) {
    auto at = load_annotated(o.trace, o.tac, o.gen);
    mcn::TimeConfig tc;
    tc.utc_offset_minutes = o.utc_offset;

    std::map<std::pair<mcn::DeviceType, std::int64_t>, std::vector<double>> pools;
    if (o.quantity == "sojourn_connected" || o.quantity == "sojourn_idle") {
        mcn::TopState want = o.quantity == "sojourn_connected" ? mcn::TopState::CONNECTED
                                                               : mcn::TopState::IDLE;
        for (const auto& ue : at.ues)
            mcn::for_each_top_sojourn(
                ue, [&](mcn::TopState s, std::int64_t dur_ms, std::int64_t end_ts) {
                    if (s == want)
                        pools[{ue.device, tc.hour_index(end_ts)}].push_back(
                            static_cast<double>(dur_ms) / 1000.0);
                });
    } else if (o.quantity == "interarrival") {
        for (const auto& ue : at.ues)
            for (std::size_t i = 1; i < ue.events.size(); ++i) {
                auto gap = ue.events[i].timestamp_ms - ue.events[i - 1].timestamp_ms;
                pools[{ue.device, tc.hour_index(ue.events[i].timestamp_ms)}].push_back(
                    static_cast<double>(gap) / 1000.0);
            }
    } else {
        throw mcn::ParseError(
            "--quantity must be sojourn_connected, sojourn_idle, or interarrival");
    }

    std::vector<mcn::SampleGroup> groups;
    groups.reserve(pools.size());
    for (auto& [key, samples] : pools)
        groups.push_back(
            {std::string(mcn::to_string(key.first)), o.quantity, std::move(samples)});

    mcn::RefFamily family;
    if (o.family == "exp") family = mcn::RefFamily::EXPONENTIAL;
    else if (o.family == "pareto") family = mcn::RefFamily::PARETO;
    else if (o.family == "weibull") family = mcn::RefFamily::WEIBULL;
    else if (o.family == "empirical") family = mcn::RefFamily::EMPIRICAL_REF;
    else throw mcn::ParseError("--family must be exp, pareto, weibull, or empirical");
    mcn::GofTest test;
    if (o.test == "ks") test = mcn::GofTest::KS;
    else if (o.test == "ad") test = mcn::GofTest::AD;
    else throw mcn::ParseError("--test must be ks or ad");

    std::optional<mcn::EmpiricalCdf> reference;
    if (!o.reference.empty()) {
        auto in = open_input(o.reference);
        reference = mcn::load_empirical_reference(in);
    }

    auto rows = mcn::pass_rate_table(groups, family, test, o.alpha,
                                     reference ? &*reference : nullptr);
    with_report_stream(o.out, [&](std::ostream& out) {
        out << "test,device,quantity,pass_pct\n";
        for (const auto& r : rows)
            out << r.test << ',' << r.device << ',' << r.quantity << ',' << r.pass_pct << '\n';
    });
    return 0;
}

// --- to5g -------------------------------------------------------------

struct To5gOpts {
    std::string model, out, factors;
    bool scale_sojourn = false;
};

int run_to5g(const To5gOpts& o) {
    auto in = open_input(o.model);
    auto model = mcn::load_model(in);
    mcn::ScalingFactors factors;
    if (!o.factors.empty()) {
        auto fin = open_input(o.factors);
        factors = mcn::parse_scaling_factors(fin);
    }
    auto converted = mcn::convert_model_to_5g(model, factors, o.scale_sojourn);
    auto violations = mcn::validate_5g_model(converted);
    if (!violations.empty()) {
        std::cerr << "conversion produced an invalid 5G model:\n";
        for (const auto& v : violations) std::cerr << "  " << v << '\n';
        return kExitInvalid;
    }
    auto out = open_output(o.out);
    mcn::save_model(converted, out);
    std::cout << "5G model with " << converted.keys.size() << " keys written to " << o.out
              << '\n';
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Semi-Markov control-plane traffic modeling toolkit"};
    app.require_subcommand(1);

    FitOpts fit;
    auto* cfit = app.add_subcommand("fit", "Fit a traffic model from an event trace");
    cfit->add_option("trace", fit.trace, "Input trace CSV")->required();
    cfit->add_option("--tac", fit.tac, "TAC catalog CSV (tac,device_type)");
    cfit->add_option("-o,--out", fit.out, "Output model file")->required();
    cfit->add_option("--theta-f", fit.theta_f,
                     "Cluster feature threshold(s): one value or four per-dimension values");
    cfit->add_option("--theta-n", fit.theta_n, "Cluster population threshold");
    cfit->add_option("--utc-offset", fit.utc_offset, "Local-time offset in minutes");
    cfit->add_option("--gen", fit.gen, "Event vocabulary: lte or 5g");
    cfit->add_option("--threads", fit.threads, "Worker threads (0 = auto)");

    GenOpts gen;
    auto* cgen = app.add_subcommand("generate", "Synthesize a trace from a model");
    cgen->add_option("model", gen.model, "Model file")->required();
    cgen->add_option("-o,--out", gen.out, "Output trace CSV")->required();
    cgen->add_option("-K,--ues", gen.ues, "Number of UEs")->required();
    cgen->add_option("--start-hour", gen.start_hour, "First hour of day (0-23)");
    cgen->add_option("-H,--hours", gen.hours, "Number of hours");
    cgen->add_option("--seed", gen.seed, "RNG seed (default 0)");
    cgen->add_option("--mode", gen.mode, "ours or baseline");
    cgen->add_option("--device-mix", gen.mix, "NAME=FRACTION pairs, comma separated");
    cgen->add_option("--threads", gen.threads, "Worker threads (0 = auto)");

    ValidateOpts val;
    auto* cval = app.add_subcommand("validate", "Check a trace against the state machine");
    cval->add_option("trace", val.trace, "Trace CSV (raw or generated)")->required();
    cval->add_option("--tac", val.tac, "TAC catalog CSV for raw traces");
    cval->add_option("--gen", val.gen, "Event vocabulary for raw traces: lte or 5g");

    AnalyzeOpts ana;
    auto* cana = app.add_subcommand("analyze", "Produce a report CSV from a trace");
    cana->add_option("trace", ana.trace, "Trace CSV")->required();
    cana->add_option("--vs", ana.vs, "Second trace (cdf report)");
    cana->add_option("--report", ana.report, "breakdown|statetime|boxstats|vt|cdf");
    cana->add_option("-o,--out", ana.out, "Report CSV path (default stdout)");
    cana->add_option("--tac", ana.tac, "TAC catalog CSV for raw traces");
    cana->add_option("--gen", ana.gen, "Event vocabulary for raw traces");
    cana->add_option("--metric", ana.metric,
                     "boxstats: events|sojourn|taushare; cdf: count|statetime");
    cana->add_option("--event", ana.event, "Event type for events/count metrics");
    cana->add_option("--state", ana.state, "Top state for sojourn/statetime metrics");
    cana->add_option("--days", ana.days, "all|weekday|weekend (boxstats)");
    cana->add_option("--scales", ana.scales, "Comma-separated window sizes in s (vt)");
    cana->add_flag("--split", ana.split, "Split cdf by UE activity (<=2 vs >2 events)");
    cana->add_option("--seed", ana.seed, "Seed for the fitted-Poisson companion (vt)");
    cana->add_option("--utc-offset", ana.utc_offset, "Local-time offset in minutes");

    DistTestOpts dt;
    auto* cdt = app.add_subcommand("disttest", "Per-hour distribution pass-rate table");
    cdt->add_option("trace", dt.trace, "Trace CSV")->required();
    cdt->add_option("--family", dt.family, "exp|pareto|weibull|empirical");
    cdt->add_option("--test", dt.test, "ks|ad");
    cdt->add_option("--quantity", dt.quantity,
                    "sojourn_connected|sojourn_idle|interarrival");
    cdt->add_option("--reference", dt.reference, "Reference CDF CSV (empirical family)");
    cdt->add_option("--alpha", dt.alpha, "Significance level");
    cdt->add_option("-o,--out", dt.out, "Report CSV path (default stdout)");
    cdt->add_option("--tac", dt.tac, "TAC catalog CSV for raw traces");
    cdt->add_option("--gen", dt.gen, "Event vocabulary for raw traces");
    cdt->add_option("--utc-offset", dt.utc_offset, "Local-time offset in minutes");

    To5gOpts t5;
    auto* c5 = app.add_subcommand("to5g", "Convert an LTE model to the 5G machine");
    c5->add_option("model", t5.model, "LTE model file")->required();
    c5->add_option("-o,--out", t5.out, "Output 5G model file")->required();
    c5->add_option("--factors", t5.factors, "Scaling factors CSV (event,factor)");
    c5->add_flag("--scale-sojourn", t5.scale_sojourn,
                 "Also divide sojourn times on scaled edges by the factor");

    CLI11_PARSE(app, argc, argv);

    if (*cfit) return run_fit(fit);
    if (*cgen) return run_generate(gen);
    if (*cval) return run_validate(val);
    if (*cana) return run_analyze(ana);
    if (*cdt) return run_disttest(dt);
    if (*c5) return run_to5g(t5);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const mcn::FormatVersionMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFormat;
    } catch (const mcn::SchemaViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFormat;
    } catch (const mcn::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFormat;
    } catch (const mcn::InsufficientData& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const mcn::DegenerateStream& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const mcn::MissingKey& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitModel;
    } catch (const mcn::AlreadyFiveG& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitModel;
    } catch (const mcn::UnsupportedCombination& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitModel;
    } catch (const mcn::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

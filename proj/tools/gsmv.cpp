// gsmv: parse, run, translate and verify GSM models.
#include "gsmv/engine.hpp"
#include "gsmv/model_json.hpp"
#include "gsmv/model_parser.hpp"
#include "gsmv/mucalc.hpp"
#include "gsmv/names.hpp"
#include "gsmv/snapshot.hpp"
#include "gsmv/statespace.hpp"
#include "gsmv/translate.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

using namespace gsmv;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFalse = 1;  // some property false / boundedness violated
constexpr int kError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("gsmv");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char *env = std::getenv("GSMV_LOG")) {
        auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to "off"; only honour real ones.
        if (level != spdlog::level::off || std::string(env) == "off")
            spdlog::set_level(level);
    }
}

void write_text(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError("cannot write " + path);
    out << text;
}

// Options shared by the exploring subcommands.
struct Exploration {
    std::string containers;
    std::optional<std::size_t> fresh;
    std::size_t max_states = 20000;
    std::optional<std::size_t> max_depth;

    void add(CLI::App *app) {
        app->add_option("--containers", containers, "instance bounds, e.g. Order=1,Item=2");
        app->add_option("--fresh", fresh, "fresh payload values per event (default: k, the largest payload)")
            ->check(CLI::PositiveNumber);
        app->add_option("--max-states", max_states, "state budget")->check(CLI::PositiveNumber);
        app->add_option("--max-depth", max_depth, "depth budget (B-steps)")->check(CLI::PositiveNumber);
    }
    std::optional<ContainerConfig> config() const {
        if (containers.empty())
            return std::nullopt;
        return parse_container_config(containers);
    }
    Snapshot initial(const GsmModel &m) const {
        auto cfg = config();
        return cfg ? apply_containers(m, m.initial_snapshot, *cfg) : m.initial_snapshot;
    }
    AbstractionPolicy policy() const { return {fresh}; }
    Budget budget() const { return {max_states, max_depth}; }
};

CompiledModel load(const std::string &path) {
    spdlog::info("loading {}", path);
    return compile(load_model_file(path));
}

int cmd_parse(const std::string &path, bool print, bool json) {
    spdlog::info("loading {}", path);
    GsmModel m = load_model_file(path);
    CompiledModel cm = compile(m);
    if (json) {
        std::cout << model_to_json(m).dump(2) << "\n";
        return kOk;
    }
    if (print) {
        std::cout << print_model(m);
        return kOk;
    }
    std::cout << "model " << quote_name(m.name) << ": ok\n";
    for (const auto &a : m.artifact_types) {
        std::size_t atomic = 0;
        auto stages = flatten_stages(a);
        for (const auto &s : stages)
            atomic += s.stage->atomic();
        std::cout << "  " << quote_name(a.name) << ": " << a.attributes.size() << " attributes, " << stages.size()
                  << " stages (" << atomic << " atomic), " << a.milestones.size() << " milestones, "
                  << a.tasks.size() << " tasks\n";
    }
    std::cout << "  events: " << m.event_types.size() << ", PAC rules: " << cm.rules.size()
              << ", initial instances: " << m.initial_snapshot.instances.size() << "\n";
    std::cout << "  creation tasks: " << (has_creation_tasks(m) ? "yes" : "no") << "\n";
    return kOk;
}

int cmd_simulate(const std::string &model_path, const std::string &script_path, const std::string &trace,
                 const std::string &trace_json, std::optional<std::uint32_t> seed, const std::string &containers) {
    CompiledModel cm = load(model_path);
    auto events = parse_event_script(read_file(script_path));
    Snapshot s0 = cm.model.initial_snapshot;
    if (!containers.empty())
        s0 = apply_containers(cm.model, s0, parse_container_config(containers));
    BStepOptions opts;
    std::vector<std::size_t> order;
    if (seed) {
        std::mt19937 rng(*seed);
        order = random_linear_extension(cm.order, rng);
        opts.order = &order;
        spdlog::info("random rule order from seed {}", *seed);
    }
    std::string text;
    nlohmann::json doc = nlohmann::json::array();
    Snapshot snap = s0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        std::pair<Snapshot, BStepTrace> step;
        try {
            step = b_step(cm, snap, events[i], opts);
        } catch (const EngineError &e) {
            throw ScriptError(i, e.what());
        }
        snap = std::move(step.first);
        const BStepTrace &t = step.second;
        std::cout << "B-step " << i + 1 << ": " << to_string(events[i]) << " (" << t.steps.size() - 1
                  << " micro-steps)";
        for (const auto &o : t.outgoing)
            std::cout << "; sends " << quote_name(o.task) << " to " << o.target;
        std::cout << "\n";
        text += "# B-step " + std::to_string(i + 1) + "\n" + trace_to_text(t);
        doc.push_back(trace_to_json(t));
    }
    std::cout << "final snapshot:\n" << describe(snap);
    if (!trace.empty())
        write_text(trace, text);
    if (!trace_json.empty())
        write_text(trace_json, doc.dump(2) + "\n");
    return kOk;
}

int cmd_translate(const std::string &path, const Exploration &ex, const std::string &out, const std::string &map,
                  const std::string &guard) {
    CompiledModel cm = load(path);
    Translation tr = translate(cm, ex.config(), guard == "deps" ? ExecGuard::Dependencies : ExecGuard::TotalOrder);
    std::string json = spec_to_json(tr.spec).dump(2) + "\n";
    std::string report = mapping_report(tr);
    if (out.empty())
        std::cout << json;
    else
        write_text(out, json);
    if (!map.empty())
        write_text(map, report);
    else if (!out.empty())
        std::cout << report;
    return kOk;
}

void export_ts(const TransitionSystem &ts, const std::string &adj, const std::string &dot) {
    if (!adj.empty()) {
        std::ofstream os(adj);
        write_adjacency(os, ts);
    }
    if (!dot.empty()) {
        std::ofstream os(dot);
        write_dot(os, ts);
    }
}

int cmd_build_ts(const std::string &path, const Exploration &ex, const std::string &side, const std::string &adj,
                 const std::string &dot) {
    CompiledModel cm = load(path);
    int rc = kOk;
    std::optional<TransitionSystem> g;
    if (side == "gsm" || side == "both") {
        g = build_gsm_ts(cm, ex.initial(cm.model), ex.policy(), ex.budget());
        std::cout << ts_summary(*g) << "\n";
        if (side == "gsm")
            export_ts(*g, adj, dot);
    }
    if (side == "dcds" || side == "both") {
        Translation tr = translate(cm, ex.config());
        DcdsExploration d = build_dcds_ts(tr, ex.policy(), ex.budget());
        std::cout << ts_summary(d.unblocked) << "\n";
        std::cout << "intermediate states: " << d.intermediate_states << ", longest blocked segment: " << d.max_segment
                  << " micro-steps\n";
        std::cout << "auxiliary bound violations: " << d.aux_bounds.size() << "\n";
        for (const auto &v : d.aux_bounds)
            std::cout << "  " << v << "\n";
        if (!d.aux_bounds.empty())
            rc = kFalse;
        export_ts(d.filtered, adj, dot);
        if (g) {
            BisimulationResult b = check_bisimulation(*g, d.filtered);
            if (b.equivalent) {
                std::cout << "bisimulation: equivalent\n";
            } else {
                std::cout << "bisimulation: NOT equivalent (" << b.reason << ")\n";
                for (const auto &l : b.path)
                    std::cout << "  after " << l << "\n";
                rc = kFalse;
            }
        }
    }
    return rc;
}

int cmd_verify(const std::string &path, const Exploration &ex, const std::string &prop, bool allow_bounded) {
    CompiledModel cm = load(path);
    if (ex.containers.empty() && has_creation_tasks(cm.model))
        throw UsageError("model " + quote_name(cm.model.name) +
                         " has create-artifact-instance tasks, so repeated events may accumulate instances "
                         "without bound (e.g. items added again and again) and state-boundedness cannot be "
                         "established. Supply instance bounds with --containers TYPE=N,...");
    auto props = parse_property_file(read_file(prop));
    TransitionSystem ts = build_gsm_ts(cm, ex.initial(cm.model), ex.policy(), ex.budget());
    spdlog::info("{}", ts_summary(ts));
    if (ts.truncated && !allow_bounded)
        throw UsageError("exploration truncated (" + ts.truncation +
                         "); raise --max-states or pass --allow-bounded-depth to check the bounded prefix");
    int rc = kOk;
    for (const auto &p : props) {
        CheckResult r = check(ts, p.formula, {allow_bounded});
        std::cout << (r.verdict ? "TRUE " : "FALSE") << "  " << p.text << "\n";
        if (!p.comment.empty())
            std::cout << "       # " << p.comment << "\n";
        if (r.path)
            std::cout << "       " << (r.path_is_witness ? "witness: " : "counterexample: ")
                      << path_to_string(ts, *r.path) << "\n";
        if (!r.verdict)
            rc = kFalse;
    }
    if (ts.truncated)
        std::cout << "note: verdicts hold for the explored prefix only (" << ts.truncation << ")\n";
    return rc;
}

int cmd_check_bounded(const std::string &path, const Exploration &ex, bool explore, std::optional<std::size_t> bound,
                      std::size_t extra, const std::string &adj, const std::string &dot) {
    CompiledModel cm = load(path);
    const bool creation = has_creation_tasks(cm.model);
    bool established = false;
    if (!creation) {
        std::cout << "state-bounded: no create-artifact-instance tasks, every stable state has the initial size\n";
        established = true;
    } else if (!ex.containers.empty()) {
        auto cfg = ex.config();
        ex.initial(cm.model);  // validates the bounds
        std::cout << "state-bounded: instance-bounded with N_max = " << cfg->n_max() << " containers\n";
        established = true;
    } else {
        std::cout << "not established: the model has create-artifact-instance tasks and no instance bounds\n";
    }
    if (!explore)
        return established ? kOk : kFalse;
    Snapshot s0 = ex.initial(cm.model);
    std::size_t b = bound.value_or(snapshot_size(cm.model, s0) + extra);
    TransitionSystem ts = build_gsm_ts(cm, s0, ex.policy(), ex.budget());
    export_ts(ts, adj, dot);
    std::cout << ts_summary(ts) << "\n";
    BoundednessResult r = monitor_boundedness(ts, b);
    if (r.bounded) {
        std::cout << "monitor: every explored state has size <= " << b << " (max " << r.max_size << ")\n";
        return kOk;
    }
    std::cout << "monitor: size bound " << b << " exceeded\n  path: " << path_to_string(ts, r.path) << "\n  sizes:";
    std::cout << " " << ts.states[ts.initial].size;
    for (std::size_t e : r.path)
        std::cout << " " << ts.states[ts.edges[e].to].size;
    std::cout << "\n";
    return kFalse;
}

} // namespace

int main(int argc, char **argv) {
    setup_logging();
    CLI::App app{"GSM model toolkit: parse, simulate, translate to DCDS, build transition systems, verify"};
    app.require_subcommand(1);

    std::string model, script, trace, trace_json, out, map, prop, adj, dot, side = "gsm", guard = "total";
    bool print = false, json = false, allow_bounded = false, explore = false;
    std::optional<std::uint32_t> seed;
    std::optional<std::size_t> bound;
    std::size_t extra = 12;
    std::string containers;
    Exploration ex;

    auto *parse = app.add_subcommand("parse", "parse and validate a model");
    parse->add_option("model", model, "model file (.gsm or .gsm.json)")->required();
    parse->add_flag("--print", print, "pretty-print the parsed model");
    parse->add_flag("--json", json, "print the JSON mirror");

    auto *explain = app.add_subcommand("explain", "dump PAC rules and their order");
    explain->add_option("model", model)->required();

    auto *simulate = app.add_subcommand("simulate", "run an event script");
    simulate->add_option("model", model)->required();
    simulate->add_option("script", script, "event script")->required();
    simulate->add_option("--trace", trace, "write the micro-step trace (text)");
    simulate->add_option("--trace-json", trace_json, "write the micro-step trace (JSON)");
    simulate->add_option("--seed", seed, "evaluate rules in a random valid order drawn from this seed");
    simulate->add_option("--containers", containers, "instance bounds, e.g. Order=1,Item=2");

    auto *trans = app.add_subcommand("translate", "translate to a DCDS");
    trans->add_option("model", model)->required();
    trans->add_option("--containers", ex.containers, "instance bounds, e.g. Order=1,Item=2");
    trans->add_option("-o,--output", out, "DCDS JSON file (default: stdout)");
    trans->add_option("--map", map, "mapping report file");
    trans->add_option("--exec-guard", guard, "micro-step ordering: total or deps")
        ->check(CLI::IsMember({"total", "deps"}));

    auto *build = app.add_subcommand("build-ts", "build a transition system");
    build->add_option("model", model)->required();
    ex.add(build);
    build->add_option("--side", side, "gsm, dcds or both (both also checks bisimulation)")
        ->check(CLI::IsMember({"gsm", "dcds", "both"}));
    build->add_option("-o,--output", adj, "adjacency-list file");
    build->add_option("--dot", dot, "Graphviz file");

    auto *verify = app.add_subcommand("verify", "check properties");
    verify->add_option("model", model)->required();
    verify->add_option("--prop", prop, "property file")->required();
    verify->add_flag("--allow-bounded-depth", allow_bounded, "accept truncated exploration");
    ex.add(verify);

    auto *bounded = app.add_subcommand("check-bounded", "static state-boundedness check, optional monitor");
    bounded->add_option("model", model)->required();
    bounded->add_flag("--explore", explore, "explore and monitor state sizes");
    bounded->add_option("--bound", bound, "size bound (default: initial size + --extra)");
    bounded->add_option("--extra", extra, "slack over the initial size");
    bounded->add_option("-o,--output", adj, "adjacency-list file");
    bounded->add_option("--dot", dot, "Graphviz file");
    ex.add(bounded);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? kOk : kError;
    }

    try {
        if (*parse)
            return cmd_parse(model, print, json);
        if (*explain) {
            CompiledModel cm = load(model);
            std::cout << gsmv::explain(cm.rules, cm.order);
            return kOk;
        }
        if (*simulate)
            return cmd_simulate(model, script, trace, trace_json, seed, containers);
        if (*trans)
            return cmd_translate(model, ex, out, map, guard);
        if (*build)
            return cmd_build_ts(model, ex, side, adj, dot);
        if (*verify)
            return cmd_verify(model, ex, prop, allow_bounded);
        if (*bounded)
            return cmd_check_bounded(model, ex, explore, bound, extra, adj, dot);
    } catch (const ParseError &e) {
        std::cerr << model << ":" << e.line << ":" << e.column << ": " << e.message << "\n";
    } catch (const ValidationError &e) {
        std::cerr << model << ": invalid model: " << e.what() << "\n";
    } catch (const CycleError &e) {
        std::cerr << model << ": PAC rules cannot be ordered: " << e.what() << "\n";
    } catch (const PropertyError &e) {
        std::cerr << prop << ": " << e.what() << "\n";
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kError;
}

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "gsmv/engine.hpp"
#include "gsmv/model_parser.hpp"
#include "gsmv/mucalc.hpp"
#include "gsmv/snapshot.hpp"
#include "gsmv/statespace.hpp"
#include "gsmv/translate.hpp"
#include "random_cases.hpp"

#include <chrono>
#include <deque>
#include <functional>
#include <iostream>
#include <sstream>

using namespace gsmv;

namespace {

std::string corpus(const std::string &f) { return std::string(GSMV_CORPUS_DIR) + "/" + f; }

struct Subject {
    std::string name;
    CompiledModel cm;
    std::optional<ContainerConfig> containers;
    Snapshot s0;
};

Subject subject(const std::string &name, const std::string &file, const std::string &bounds = "") {
    Subject s{name, compile(load_model_file(corpus(file))), std::nullopt, {}};
    if (!bounds.empty())
        s.containers = parse_container_config(bounds);
    s.s0 = s.containers ? apply_containers(s.cm.model, s.cm.model.initial_snapshot, *s.containers)
                        : s.cm.model.initial_snapshot;
    return s;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int n, const std::string &title, double limit_s, const std::function<Outcome()> &body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception &e) {
        o = {false, std::string("error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs > limit_s) {
        o.pass = false;
        o.detail += "; over the " + std::to_string(int(limit_s)) + " s limit";
    }
    std::ostringstream time;
    time.precision(2);
    time << std::fixed << secs;
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title << "  [" << o.detail << "; "
              << time.str() << " s]" << std::endl;
    failures += !o.pass;
}

// Edge labels along a path.
std::vector<std::string> labels(const TransitionSystem &ts, const std::vector<std::size_t> &path) {
    std::vector<std::string> out;
    for (std::size_t e : path)
        out.push_back(ts.edges[e].label);
    return out;
}

// Plain reachability by BFS through states satisfying `through`, to a state
// satisfying `goal`.
bool reachable(const TransitionSystem &ts, const std::function<bool(const TsState &)> &through,
               const std::function<bool(const TsState &)> &goal) {
    auto out = ts.out_edges();
    std::vector<bool> seen(ts.states.size());
    std::deque<std::size_t> queue{ts.initial};
    seen[ts.initial] = true;
    while (!queue.empty()) {
        std::size_t s = queue.front();
        queue.pop_front();
        if (goal(ts.states[s]))
            return true;
        if (!through(ts.states[s]))
            continue;
        for (std::size_t e : out[s])
            if (!seen[ts.edges[e].to]) {
                seen[ts.edges[e].to] = true;
                queue.push_back(ts.edges[e].to);
            }
    }
    return false;
}

} // namespace

int main() {
    const Subject order = subject("order Order=1,Item=2", "order.gsm", "Order=1,Item=2");
    const Subject nocreate = subject("creation-free order", "order_nocreate.gsm");
    const Subject halting = subject("halting TM", "turing-halting.gsm");
    const Subject looping = subject("looping TM", "turing-looping.gsm");
    const Subject unbounded = subject("order without bounds", "order.gsm");

    run(1, "engine TS and filtered DCDS TS are bisimilar (depth 4, k+1 fresh values)", 60 * 3, [&] {
        Outcome o{true, ""};
        for (const Subject *s : {&order, &nocreate, &halting}) {
            auto t0 = std::chrono::steady_clock::now();
            AbstractionPolicy policy{max_payload_slots(s->cm.model) + 1};
            Budget budget;
            budget.max_depth = 4;
            budget.max_states = 1000000;
            auto g = build_gsm_ts(s->cm, s->s0, policy, budget);
            auto d = build_dcds_ts(translate(s->cm, s->containers), policy, budget);
            auto b = check_bisimulation(g, d.filtered);
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            bool ok = b.equivalent && secs < 60;
            o.pass = o.pass && ok;
            o.detail += (o.detail.empty() ? "" : ", ") + s->name + ": " + std::to_string(g.states.size()) + " states " +
                        (b.equivalent ? "equivalent" : "NOT equivalent (" + b.reason + ")") +
                        (secs < 60 ? "" : " too slow");
        }
        return o;
    });

    run(2, "auxiliary-relation bounds hold in every reachable DCDS state", 0, [&] {
        auto d = build_dcds_ts(translate(order.cm, order.containers));
        std::size_t states = d.unblocked.states.size() + d.intermediate_states;
        return Outcome{!d.unblocked.truncated && d.aux_bounds.empty(),
                       std::to_string(states) + " states (" + std::to_string(d.intermediate_states) +
                           " intermediate), " + std::to_string(d.aux_bounds.size()) + " violations"};
    });

    run(3, "creation-free model: every stable state has the initial size", 0, [&] {
        auto ts = build_gsm_ts(nocreate.cm, nocreate.s0);
        std::size_t size0 = snapshot_size(nocreate.cm.model, nocreate.s0), bad = 0;
        for (const auto &s : ts.states)
            bad += s.size != size0;
        return Outcome{!ts.truncated && bad == 0, std::to_string(ts.states.size()) + " states, size " +
                                                      std::to_string(size0) + ", " + std::to_string(bad) + " differ"};
    });

    run(4, "Turing encoding: halting machine reaches Halt, looping machine grows", 30, [&] {
        auto ts = build_gsm_ts(halting.cm, halting.s0);
        auto r = check(ts, parse_property("mu Z. Halt | <-> Z"));
        bool witness = r.path && !r.path->empty() && ts.states[ts.edges[r.path->back()].to].labels.count("Halt");
        Budget budget;
        budget.max_states = 200;
        auto lts = build_gsm_ts(looping.cm, looping.s0, {}, budget);
        auto m = monitor_boundedness(lts, snapshot_size(looping.cm.model, looping.s0) + 6);
        std::string detail = std::string("halt ") + (r.verdict ? "TRUE" : "FALSE") +
                             (witness ? " via " + path_to_string(ts, *r.path) : " without witness") + "; looping " +
                             (lts.truncated ? "truncated" : "finite") + ", " +
                             (m.bounded ? "bounded" : "violation after " + std::to_string(m.path.size()) + " B-steps");
        return Outcome{r.verdict && witness && lts.truncated && !m.bounded, detail};
    });

    run(5, "unbounded order model: growth through repeated itemRequest", 10, [&] {
        std::size_t item = 1 + unbounded.cm.model.type("Item").attributes.size();  // id + attributes
        std::size_t bound = snapshot_size(unbounded.cm.model, unbounded.s0) + 3 * item;
        Budget budget;
        budget.max_depth = 8;
        budget.max_states = 1000000;
        auto ts = build_gsm_ts(unbounded.cm, unbounded.s0, {}, budget);
        auto m = monitor_boundedness(ts, bound);
        // itemRequest rounds: each request is followed by its "add item" return
        std::size_t rounds = 0, best = 0;
        auto path = labels(ts, m.path);
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (path[i] == "itemRequest" && i + 1 < path.size() && path[i + 1] == "add item") {
                best = std::max(best, ++rounds);
                ++i;
            } else {
                rounds = 0;
            }
        }
        std::string detail = "bound " + std::to_string(bound) + ", path ";
        detail += m.bounded ? "none" : path_to_string(ts, m.path);
        return Outcome{!m.bounded && best >= 3, detail + " (" + std::to_string(best) + " consecutive rounds)"};
    });

    run(6, "check agrees with the brute-force checker on 500 random cases", 0, [&] {
        test::Rng r(6);
        std::size_t agree = 0;
        for (int i = 0; i < 500; ++i) {
            auto ts = test::random_ts(r);
            auto f = parse_property(test::random_formula(r));
            agree += check(ts, f).states == check_brute(ts, f).states;
        }
        return Outcome{agree == 500, std::to_string(agree) + "/500 agree"};
    });

    run(7, "B-steps are confluent across rule orders; toggle-once holds", 0, [&] {
        std::mt19937 rng(7);
        std::size_t events = 0, orders = 0, mismatches = 0, toggles = 0;
        for (const Subject *s : {&order, &nocreate, &halting, &looping}) {
            Budget budget;
            budget.max_states = 300;
            auto ts = build_gsm_ts(s->cm, s->s0, {}, budget);
            std::vector<std::pair<std::size_t, EventInstance>> pool;
            for (std::size_t i = 0; i < ts.states.size(); ++i)
                for (auto &e : candidate_events(s->cm, ts.states[i].snapshot, max_payload_slots(s->cm.model)))
                    pool.emplace_back(i, std::move(e));
            auto all = linear_extensions(s->cm.order, 21);
            for (int k = 0; k < 50 && !pool.empty(); ++k) {
                auto &[state, ev] = pool[rng() % pool.size()];
                const Snapshot &snap = ts.states[state].snapshot;
                std::vector<std::vector<std::size_t>> exts = all;
                if (exts.size() > 20) {
                    exts.clear();
                    for (int j = 0; j < 20; ++j)
                        exts.push_back(random_linear_extension(s->cm.order, rng));
                }
                Snapshot want = b_step(s->cm, snap, ev).first;
                for (const auto &ext : exts) {
                    BStepOptions opt;
                    opt.order = &ext;
                    auto [got, trace] = b_step(s->cm, snap, ev, opt);
                    mismatches += !(got == want);
                    std::set<std::string> seen;
                    for (const auto &st : trace.steps)
                        if (st.toggled && !seen.insert(to_string(st.toggled->status)).second)
                            ++toggles;
                    ++orders;
                }
                ++events;
            }
        }
        return Outcome{events == 200 && mismatches == 0 && toggles == 0,
                       std::to_string(events) + " events, " + std::to_string(orders) + " runs, " +
                           std::to_string(mismatches) + " mismatches, " + std::to_string(toggles) +
                           " toggle-once violations"};
    });

    run(8, "fresh-value pools of size k and k+2 give isomorphic systems", 0, [&] {
        Outcome o{true, ""};
        for (const Subject *s : {&order, &nocreate, &halting, &looping, &unbounded}) {
            std::size_t k = max_payload_slots(s->cm.model);
            Budget budget;
            budget.max_states = 1000000;
            if (s == &looping || s == &unbounded)
                budget.max_depth = s == &looping ? 12 : 5;
            auto a = build_gsm_ts(s->cm, s->s0, {k}, budget);
            auto b = build_gsm_ts(s->cm, s->s0, {k + 2}, budget);
            bool iso = isomorphic(a, b);
            o.pass = o.pass && iso;
            o.detail += (o.detail.empty() ? "" : ", ") + s->name + " " + std::to_string(a.states.size()) + "/" +
                        std::to_string(b.states.size()) + (iso ? " iso" : " DIFFER");
        }
        return o;
    });

    run(9, "receipt before payment is impossible; payment is reachable", 10, [&] {
        auto ts = build_gsm_ts(order.cm, order.s0);
        auto receipt = check(ts, parse_property_file(read_file(corpus("receipt-before-pay.prop")))[0].formula);
        auto paid = check(ts, parse_property_file(read_file(corpus("order-paid-reachable.prop")))[0].formula);
        auto is_paid = [](const TsState &s) { return s.labels.count("Order paid") > 0; };
        bool brute_receipt = reachable(
            ts, [&](const TsState &s) { return !is_paid(s); },
            [&](const TsState &s) { return s.labels.count("Receipt sent") && !is_paid(s); });
        bool brute_paid = reachable(ts, [](const TsState &) { return true; }, is_paid);
        bool ok = !receipt.verdict && paid.verdict && receipt.verdict == brute_receipt && paid.verdict == brute_paid;
        return Outcome{ok, std::string("receipt-before-pay ") + (receipt.verdict ? "TRUE" : "FALSE") + ", paid " +
                               (paid.verdict ? "TRUE" : "FALSE") + ", path enumeration agrees: " +
                               (receipt.verdict == brute_receipt && paid.verdict == brute_paid ? "yes" : "no")};
    });

    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
    return failures == 0 ? 0 : 1;
}

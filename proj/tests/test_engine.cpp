#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsmv/turing.hpp"
#include "support.hpp"

#include <sstream>

using namespace gsmv;

namespace {

bool milestone(const Snapshot &s, const Value &id, const std::string &m) { return s.instances.at(id).milestones.at(m); }
bool stage(const Snapshot &s, const Value &id, const std::string &st) { return s.instances.at(id).stages.at(st); }

void check_toggle_once(const BStepTrace &t) {
    std::set<std::string> seen;
    for (const auto &step : t.steps)
        if (step.toggled)
            CHECK(seen.insert(to_string(step.toggled->status)).second);
}

} // namespace

TEST_CASE("itemRequest opens Manage order and sends add item") {
    auto cm = test::load("order.gsm");
    auto [s1, trace] = b_step(cm, cm.model.initial_snapshot, test::event("itemRequest", "o1"));
    CHECK(stage(s1, "o1", "Manage order"));
    REQUIRE(trace.outgoing.size() == 1);
    CHECK(trace.outgoing[0] == OutgoingEvent{"add item", "o1"});
    CHECK(trace.steps.front().rule == "incorporate");
    check_toggle_once(trace);
}

TEST_CASE("event whose sentries fail leaves the snapshot unchanged") {
    auto cm = test::load("order.gsm");
    const Snapshot &s0 = cm.model.initial_snapshot;
    auto [s1, trace] = b_step(cm, s0, test::event("payRequest", "o1"));
    CHECK(s1 == s0);
    REQUIRE(trace.steps.size() == 1);
    CHECK(trace.steps[0].rule == "incorporate");
    CHECK(trace.outgoing.empty());
}

TEST_CASE("order script reaches Order paid with one item; matches the golden trace") {
    auto cm = test::load("order.gsm");
    auto events = parse_event_script(read_file(test::corpus("order.script")));
    auto results = run_script(cm, cm.model.initial_snapshot, events);
    REQUIRE(results.size() == 4);
    const Snapshot &last = results.back().first;
    CHECK(milestone(last, "o1", "Order paid"));
    CHECK_FALSE(stage(last, "o1", "Pay order"));
    CHECK(stage(last, "o1", "Deliver receipt"));
    CHECK(last.instances.size() == 2);
    CHECK(last.instances.at("i1").attrs.at("parent") == "o1");
    CHECK(last.instances.at("i1").attrs.at("code") == "A");

    // Pay return: +m, close and opening of the receipt stage in the same B-step
    const BStepTrace &pay = results.back().second;
    std::vector<std::string> toggles;
    for (const auto &s : pay.steps)
        if (s.toggled)
            toggles.push_back(to_string(*s.toggled));
    CHECK(toggles == std::vector<std::string>{"achieved \"Order paid\"", "closed \"Pay order\"", "open \"Deliver receipt\""});
    REQUIRE(pay.outgoing.size() == 1);
    CHECK(pay.outgoing[0].task == "Send receipt");

    std::ostringstream text;
    for (std::size_t i = 0; i < results.size(); ++i)
        text << "# B-step " << i + 1 << "\n" << trace_to_text(results[i].second);
    CHECK(text.str() == read_file(test::corpus("order.trace")));

    for (const auto &[s, t] : results) {
        check_toggle_once(t);
        CHECK(t.steps.size() <= cm.rules.size() + 1);
    }
}

TEST_CASE("trace JSON mirror") {
    auto cm = test::load("order.gsm");
    auto [s1, trace] = b_step(cm, cm.model.initial_snapshot, test::event("itemRequest", "o1"));
    auto j = trace_to_json(trace);
    CHECK(j["event"]["type"] == "itemRequest");
    REQUIRE(j["steps"].size() == trace.steps.size());
    CHECK(j["steps"][1]["rule"] == trace.steps[1].rule);
    CHECK(j["outgoing"][0]["task"] == "add item");
}

TEST_CASE("run_script edge cases") {
    auto cm = test::load("order.gsm");
    CHECK(run_script(cm, cm.model.initial_snapshot, {}).empty());

    // payRequest on an empty order: the guard needs an item
    auto r = run_script(cm, cm.model.initial_snapshot, {test::event("payRequest", "o1")});
    CHECK_FALSE(stage(r.back().first, "o1", "Pay order"));

    try {
        run_script(cm, cm.model.initial_snapshot,
                   {test::event("itemRequest", "o1"), test::event("Pay", "o1", {{"payment", "1"}})});
        FAIL("expected ScriptError");
    } catch (const ScriptError &e) {
        CHECK(e.index == 1);
        CHECK(std::string(e.what()).find("no pending service call") != std::string::npos);
    }
}

TEST_CASE("rejections") {
    auto cm = test::load("order.gsm");
    const Snapshot &s0 = cm.model.initial_snapshot;
    CHECK(rejection_reason(cm, s0, test::event("itemRequest", "o9")).value().find("unknown instance") == 0);
    CHECK(rejection_reason(cm, s0, test::event("frobnicate", "o1")).has_value());
    CHECK(rejection_reason(cm, s0, test::event("itemRequest", "o1", {{"x", "1"}})).has_value());
    CHECK_THROWS_AS(b_step(cm, s0, test::event("itemRequest", "o9")), EngineError);

    auto [s1, t1] = b_step(cm, s0, test::event("itemRequest", "o1"));
    // creation outside containers needs a fresh id
    CHECK(rejection_reason(cm, s1, test::event("add item", "o1", {{"code", "A"}, {"qty", "1"}})).has_value());
    CHECK(rejection_reason(cm, s1, test::event("add item", "o1", {{"code", "A"}, {"qty", "1"}, {"id", "o1"}})).has_value());
    CHECK_FALSE(rejection_reason(cm, s1, test::event("add item", "o1", {{"code", "A"}, {"qty", "1"}, {"id", "i7"}})));
}

TEST_CASE("payload slots") {
    auto cm = test::load("order.gsm");
    const EventType *add = cm.model.find_event("Order", "add item");
    REQUIRE(add);
    Snapshot s0 = cm.model.initial_snapshot;
    auto slots = payload_slots(cm.model, *add, s0);
    CHECK(std::set<std::string>(slots.begin(), slots.end()) == std::set<std::string>{"code", "qty", "id"});
    Snapshot b = test::bounded(cm, test::kOrderBounds);
    slots = payload_slots(cm.model, *add, b);
    CHECK(std::set<std::string>(slots.begin(), slots.end()) == std::set<std::string>{"code", "qty"});
}

TEST_CASE("containers: creation takes the least free container and waits when none is left") {
    auto cm = test::load("order.gsm");
    Snapshot s = test::bounded(cm, "Order=1,Item=1");
    CHECK(s.instance_bounded);
    REQUIRE(s.free_containers.at("Item").size() == 1);
    Value c = *s.free_containers.at("Item").begin();
    s = b_step(cm, s, test::event("itemRequest", "o1")).first;
    s = b_step(cm, s, test::event("add item", "o1", {{"code", "A"}, {"qty", "1"}})).first;
    CHECK(s.instances.count(c));
    CHECK(s.free_containers.count("Item") == 0);
    s = b_step(cm, s, test::event("itemRequest", "o1")).first;
    auto why = rejection_reason(cm, s, test::event("add item", "o1", {{"code", "B"}, {"qty", "1"}}));
    REQUIRE(why);
    CHECK(why->find("container") != std::string::npos);
}

TEST_CASE("Turing machine script halts") {
    auto cm = test::load("turing-halting.gsm");
    auto results = run_script(cm, cm.model.initial_snapshot, parse_event_script(read_file(test::corpus("turing.script"))));
    const Snapshot &last = results.back().first;
    CHECK(milestone(last, "tm", "Halt"));
    CHECK(last.instances.at("tm").attrs.at("curState") == "qf");
    CHECK(last.instances.at("c1").attrs.at("value") == "1");
    CHECK(last.instances.at("c2").attrs.at("value") == "1");
    for (std::size_t i = 0; i + 1 < results.size(); ++i)
        CHECK_FALSE(milestone(results[i].first, "tm", "Halt"));
}

TEST_CASE("confluence across linear extensions") {
    for (const char *f : {"order.gsm", "order_nocreate.gsm", "turing-halting.gsm"}) {
        CAPTURE(f);
        auto cm = test::load(f);
        Snapshot s0 = std::string(f) == "order.gsm" ? test::bounded(cm, test::kOrderBounds) : cm.model.initial_snapshot;
        auto ts = build_gsm_ts(cm, s0, {}, {2000, 3});
        auto exts = linear_extensions(cm.order, 20);
        std::size_t checked = 0;
        for (const auto &st : ts.states) {
            if (st.frontier)
                continue;
            for (const auto &e : candidate_events(cm, st.snapshot, 1)) {
                Snapshot want = b_step(cm, st.snapshot, e).first;
                for (const auto &ext : exts) {
                    BStepOptions o;
                    o.order = &ext;
                    auto [got, trace] = b_step(cm, st.snapshot, e, o);
                    CHECK(got == want);
                    check_toggle_once(trace);
                }
                ++checked;
            }
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("b_step does not mutate its input and is deterministic") {
    auto cm = test::load("order.gsm");
    Snapshot s0 = cm.model.initial_snapshot;
    Snapshot copy = s0;
    auto a = b_step(cm, s0, test::event("itemRequest", "o1"));
    auto b = b_step(cm, s0, test::event("itemRequest", "o1"));
    CHECK(s0 == copy);
    CHECK(a.first == b.first);
    CHECK(trace_to_text(a.second) == trace_to_text(b.second));
}

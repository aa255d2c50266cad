#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <algorithm>
#include <random>
#include <sstream>

using namespace gsmv;

namespace {

std::size_t count_type(const Snapshot &s, const std::string &type) {
    return std::count_if(s.instances.begin(), s.instances.end(), [&](const auto &p) { return p.second.type == type; });
}

Snapshot random_order_snapshot(const GsmModel &m, std::mt19937 &rng) {
    const char *vals[] = {"a", "b", "c", "2", "null"};
    Snapshot s = m.initial_snapshot;
    InstanceState &o = s.instances.at("o1");
    for (auto &[k, v] : o.milestones)
        v = rng() % 2;
    o.attrs["payment"] = vals[rng() % 5];
    int items = rng() % 4;
    for (int i = 0; i < items; ++i) {
        InstanceState it = blank_instance(m.type("Item"));
        it.attrs["parent"] = "o1";
        it.attrs["code"] = vals[rng() % 5];
        it.attrs["qty"] = vals[rng() % 5];
        s.instances["i" + std::to_string(i)] = it;
    }
    return s;
}

std::map<Value, Value> random_permutation(const GsmModel &m, const Snapshot &s, std::mt19937 &rng) {
    auto constants = m.constants();
    std::vector<Value> dom;
    for (const auto &v : active_domain(s))
        if (!constants.count(v))
            dom.push_back(v);
    std::vector<Value> image = dom;
    for (auto &v : image)
        v = "v" + std::to_string(rng() % 1000) + v;  // fresh names, random order
    std::shuffle(image.begin(), image.end(), rng);
    std::map<Value, Value> p;
    for (std::size_t i = 0; i < dom.size(); ++i)
        p[dom[i]] = image[i];
    return p;
}

TransitionSystem bounded_order_ts(std::optional<std::size_t> fresh = std::nullopt) {
    auto cm = test::load("order.gsm");
    AbstractionPolicy p;
    p.fresh = fresh;
    return build_gsm_ts(cm, test::bounded(cm, test::kOrderBounds), p);
}

} // namespace

TEST_CASE("canonicalization ignores value names") {
    GsmModel m = load_model_file(test::corpus("order.gsm"));
    std::mt19937 rng(3);
    for (int i = 0; i < 200; ++i) {
        Snapshot s = random_order_snapshot(m, rng);
        Snapshot t = rename(s, random_permutation(m, s, rng));
        auto cs = canonicalize_snapshot(m, s);
        auto ct = canonicalize_snapshot(m, t);
        CHECK(cs.key == ct.key);
        CHECK(cs.snapshot == ct.snapshot);
        // idempotent
        CHECK(canonicalize_snapshot(m, cs.snapshot).key == cs.key);
        CHECK(canonicalize_snapshot(m, cs.snapshot).snapshot == cs.snapshot);
        CHECK(snapshot_size(m, s) == snapshot_size(m, t));
        CHECK(snapshot_hash(m, s) == snapshot_hash(m, t));
    }
}

TEST_CASE("canonicalization separates non-isomorphic snapshots") {
    GsmModel m = load_model_file(test::corpus("order.gsm"));
    Snapshot a = m.initial_snapshot;
    InstanceState it = blank_instance(m.type("Item"));
    it.attrs["parent"] = "o1";
    it.attrs["code"] = "x";
    it.attrs["qty"] = "x";
    a.instances["i1"] = it;
    Snapshot b = a;
    b.instances["i1"].attrs["qty"] = "y";
    CHECK(canonicalize_snapshot(m, a).key != canonicalize_snapshot(m, b).key);
    // model constants keep their names
    GsmModel tm = load_model_file(test::corpus("turing-halting.gsm"));
    REQUIRE(tm.constants().count("q1"));
    Snapshot q1 = tm.initial_snapshot, q2 = tm.initial_snapshot;
    q1.instances.begin()->second.attrs["curState"] = "q1";
    q2.instances.begin()->second.attrs["curState"] = "q7";
    CHECK(canonicalize_snapshot(tm, q1).key != canonicalize_snapshot(tm, q2).key);
}

TEST_CASE("bounded order model: finite, Order paid reachable") {
    auto ts = bounded_order_ts();
    CHECK_FALSE(ts.truncated);
    CHECK(ts.kind == "gsm");
    CHECK(ts.states.size() > 10);
    bool paid = false;
    for (std::size_t i = 0; i < ts.states.size(); ++i)
        if (ts.states[i].labels.count("Order paid")) {
            paid = true;
            auto path = ts.path_to(i);
            REQUIRE_FALSE(path.empty());
            CHECK(ts.edges[path.back()].to == i);
            CHECK(ts.edges[path.front()].from == ts.initial);
        }
    CHECK(paid);
    for (const auto &e : ts.edges) {
        CHECK(e.from < ts.states.size());
        CHECK(e.to < ts.states.size());
    }
    // keys are unique
    std::set<std::string> keys;
    for (const auto &s : ts.states)
        CHECK(keys.insert(s.key).second);
}

TEST_CASE("a model where nothing can happen has one state") {
    auto cm = compile(parse_model(R"(model Stuck;
artifact A {
  attributes { x; }
  event go;
  stage S { guard on go if x = 'a'; milestone done achieved-by on go; }
}
initial { instance a1 : A; }
)"));
    auto ts = build_gsm_ts(cm, cm.model.initial_snapshot);
    REQUIRE(ts.states.size() == 1);
    for (const auto &e : ts.edges) {
        CHECK(e.from == 0);
        CHECK(e.to == 0);
    }
    CHECK(monitor_boundedness(ts, ts.states[0].size).bounded);
}

TEST_CASE("unbounded order model truncates with growing item counts") {
    auto cm = test::load("order.gsm");
    Budget b;
    b.max_states = 50;
    auto ts = build_gsm_ts(cm, cm.model.initial_snapshot, {}, b);
    CHECK(ts.truncated);
    CHECK_FALSE(ts.truncation.empty());
    CHECK(ts.states.size() <= 50);
    std::size_t s0 = snapshot_size(cm.model, cm.model.initial_snapshot);
    auto r = monitor_boundedness(ts, s0);
    REQUIRE_FALSE(r.bounded);
    std::size_t items = 0;
    for (std::size_t e : r.path) {
        std::size_t n = count_type(ts.states[ts.edges[e].to].snapshot, "Item");
        CHECK(n >= items);
        items = n;
    }
    CHECK(items >= 1);
    CHECK_FALSE(check_bisimulation(ts, ts).equivalent);  // truncated by budget: refused
}

TEST_CASE("DCDS exploration: unblocked states only, acyclic short segments") {
    auto cm = test::load("order.gsm");
    Translation tr = translate(cm, parse_container_config(test::kOrderBounds));
    auto d = build_dcds_ts(tr);
    CHECK(d.aux_bounds.empty());
    CHECK(d.max_segment <= cm.rules.size());
    CHECK(d.intermediate_states > 0);
    CHECK(d.unblocked.kind == "dcds");
    CHECK(d.filtered.states.size() == d.unblocked.states.size());
    for (const auto &s : d.unblocked.states) {
        REQUIRE(s.db);
        CHECK(is_unblocked(tr.map, *s.db));
        CHECK(auxiliary_bound_violations(tr.map, *s.db).empty());
    }
    for (const auto &e : d.unblocked.edges)
        CHECK(tr.map.reception.count(e.label) == 0);  // edges carry event names
    auto g = bounded_order_ts();
    CHECK(isomorphic(g, d.filtered));
    CHECK(check_bisimulation(g, d.filtered).equivalent);
}

TEST_CASE("bisimulation: identical, and one flipped milestone") {
    auto cm = test::load("order.gsm");
    auto ts = bounded_order_ts();
    CHECK(check_bisimulation(ts, ts).equivalent);

    std::size_t j = 0;
    for (std::size_t i = 0; i < ts.states.size(); ++i)
        if (ts.states[i].depth == 2) {
            j = i;
            break;
        }
    REQUIRE(j != 0);
    TransitionSystem other = ts;
    TsState &s = other.states[j];
    auto order = std::find_if(s.snapshot.instances.begin(), s.snapshot.instances.end(),
                              [](const auto &p) { return p.second.type == "Order"; });
    auto &ms = order->second.milestones;
    ms["Receipt sent"] = !ms["Receipt sent"];
    s.key = canonicalize_snapshot(cm.model, s.snapshot).key;
    auto r = check_bisimulation(ts, other);
    CHECK_FALSE(r.equivalent);
    CHECK(r.left == j);
    CHECK(other.states[r.right].depth == 2);
    CHECK(r.path.size() == 2);
    CHECK(r.reason == "state contents differ");
    CHECK_FALSE(isomorphic(ts, other));
}

TEST_CASE("bisimulation: a missing edge") {
    auto ts = bounded_order_ts();
    TransitionSystem other = ts;
    other.edges.erase(other.edges.begin() + other.edges.size() / 2);
    auto r = check_bisimulation(ts, other);
    CHECK_FALSE(r.equivalent);
    CHECK_FALSE(r.reason.empty());
    // systems explored to different depths are not compared
    TransitionSystem deeper = ts;
    deeper.depth_bound = 4;
    deeper.truncated = true;
    CHECK(check_bisimulation(ts, deeper).reason == "systems are explored to different depths");
}

TEST_CASE("boundedness monitor") {
    auto cm = test::load("order.gsm");
    auto ts = bounded_order_ts();
    std::size_t s0 = ts.states[ts.initial].size;
    auto r = monitor_boundedness(ts, s0);
    CHECK(r.bounded);
    CHECK(r.max_size == s0);
    for (const auto &s : ts.states)
        CHECK(s.size == s0);

    Budget b;
    b.max_depth = 8;
    auto u = build_gsm_ts(cm, cm.model.initial_snapshot, {}, b);
    std::size_t item = 4;  // id, parent, code, qty
    auto v = monitor_boundedness(u, snapshot_size(cm.model, cm.model.initial_snapshot) + 3 * item);
    REQUIRE_FALSE(v.bounded);
    std::size_t requests = 0;
    for (std::size_t e : v.path)
        requests += u.edges[e].label == "itemRequest";
    CHECK(requests >= 3);
}

TEST_CASE("payload candidates") {
    auto cm = test::load("order.gsm");
    CHECK(max_payload_slots(cm.model) == 3);
    Snapshot s = test::bounded(cm, test::kOrderBounds);
    const EventType *add = cm.model.find_event("Order", "add item");
    CHECK(slot_kind(cm.model, *add, "code") == SlotKind::Scalar);
    CHECK(slot_kind(cm.model, *add, kNewIdSlot) == SlotKind::NewId);
    // empty scalar domain: two slots over two fresh values
    auto c = payload_candidates(cm.model, s, *add, "o1", 2);
    CHECK(c.size() == 4);
    // closed stage: the return is not acceptable
    CHECK(candidate_events(cm, s, 2).size() == 2);  // itemRequest, payRequest
}

TEST_CASE("abstraction adequacy: k and k+2 fresh values") {
    for (const char *f : {"order.gsm", "order_nocreate.gsm"}) {
        CAPTURE(f);
        auto cm = test::load(f);
        Snapshot s0 = std::string(f) == "order.gsm" ? test::bounded(cm, test::kOrderBounds) : cm.model.initial_snapshot;
        std::size_t k = max_payload_slots(cm.model);
        auto a = build_gsm_ts(cm, s0, {k});
        auto b = build_gsm_ts(cm, s0, {k + 2});
        CHECK(isomorphic(a, b));
    }
}

TEST_CASE("exporters") {
    auto ts = bounded_order_ts();
    std::ostringstream adj, dot;
    write_adjacency(adj, ts);
    write_dot(dot, ts);
    CHECK(adj.str().rfind("# transition system\nkind gsm\nstates " + std::to_string(ts.states.size()), 0) == 0);
    CHECK(adj.str().find("truncated no") != std::string::npos);
    CHECK(dot.str().rfind("digraph", 0) == 0);
    std::string d = dot.str();
    CHECK(std::size_t(std::count(d.begin(), d.end(), '\n')) >= ts.edges.size());
    CHECK(ts_summary(ts).find(std::to_string(ts.states.size()) + " states") != std::string::npos);
}

TEST_CASE("exploration is deterministic") {
    auto a = bounded_order_ts();
    auto b = bounded_order_ts();
    std::ostringstream x, y;
    write_adjacency(x, a);
    write_adjacency(y, b);
    CHECK(x.str() == y.str());
}

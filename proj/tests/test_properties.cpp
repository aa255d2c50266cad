#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsmv/mucalc.hpp"
#include "random_cases.hpp"
#include "support.hpp"

#include <random>

using namespace gsmv;

namespace {

using namespace test;

TransitionSystem permute(const TransitionSystem &ts, const std::map<Value, Value> &p) {
    TransitionSystem out = ts;
    auto map = [&](const Value &v) {
        auto it = p.find(v);
        return it == p.end() ? v : it->second;
    };
    for (auto &s : out.states)
        s.snapshot = rename(s.snapshot, p);
    for (auto &e : out.edges) {
        std::map<Value, Value> r;
        for (const auto &[from, to] : e.renaming)
            r[map(from)] = map(to);
        e.renaming = r;
    }
    return out;
}

} // namespace

TEST_CASE("check agrees with the brute-force checker on 500 random cases") {
    Rng r(2024);
    std::size_t agree = 0, with_quantifiers = 0, with_two_fixpoints = 0;
    for (int i = 0; i < 500; ++i) {
        TransitionSystem ts = random_ts(r);
        std::string text = random_formula(r);
        CAPTURE(text);
        MuFormula f = parse_property(text);
        auto fast = check(ts, f);
        auto slow = check_brute(ts, f);
        CHECK(fast.states == slow.states);
        CHECK(fast.verdict == slow.verdict);
        CHECK(fast.verdict == bool(fast.states[ts.initial]));
        agree += fast.states == slow.states;
        with_quantifiers += text.find("exists") != std::string::npos || text.find("forall") != std::string::npos;
        with_two_fixpoints += text.find("Z1") != std::string::npos;
    }
    CHECK(agree == 500);
    CHECK(with_quantifiers > 50);
    CHECK(with_two_fixpoints > 20);
}

TEST_CASE("verdicts are invariant under value permutations") {
    Rng r(77);
    for (int i = 0; i < 200; ++i) {
        TransitionSystem ts = random_ts(r);
        std::vector<Value> image = {"u", "v", "w"};
        std::shuffle(image.begin(), image.end(), r.gen);
        std::map<Value, Value> p{{"#0", image[0]}, {"#1", image[1]}, {"#2", image[2]}};
        TransitionSystem moved = permute(ts, p);
        std::string text = random_formula(r);
        CAPTURE(text);
        MuFormula f = parse_property(text);
        CHECK(check(ts, f).states == check(moved, f).states);
    }
}

TEST_CASE("printing and parsing formulas round-trips") {
    Rng r(5);
    for (int i = 0; i < 300; ++i) {
        std::string text = random_formula(r);
        CAPTURE(text);
        MuFormula f = parse_property(text);
        CHECK(parse_property(to_string(f)) == f);
        CHECK(to_string(parse_property(to_string(f))) == to_string(f));
    }
}

TEST_CASE("negation is the complement on random cases") {
    Rng r(99);
    for (int i = 0; i < 200; ++i) {
        TransitionSystem ts = random_ts(r);
        std::string text = random_formula(r);
        CAPTURE(text);
        MuFormula f = parse_property(text);
        auto pos = check(ts, f).states;
        auto neg = check(ts, negate(f)).states;
        for (std::size_t s = 0; s < pos.size(); ++s)
            CHECK(pos[s] != neg[s]);
    }
}

TEST_CASE("fixpoint iteration count stays within the number of states") {
    Rng r(8);
    for (int i = 0; i < 100; ++i) {
        TransitionSystem ts = random_ts(r);
        MuFormula f = parse_property(random_formula(r));
        CHECK(check(ts, f).iterations <= ts.states.size() * (1u << kIds.size()) + 1);
    }
}

TEST_CASE("lifecycle properties: until implies or on every corpus system") {
    auto props = parse_property_file(read_file(test::corpus("lifecycle.prop")));
    REQUIRE(props.size() == 2);
    struct Case {
        const char *model;
        const char *bounds;
    };
    for (Case c : {Case{"order.gsm", test::kOrderBounds}, Case{"order.gsm", nullptr}, Case{"order_nocreate.gsm", nullptr},
                   Case{"turing-halting.gsm", nullptr}, Case{"turing-looping.gsm", nullptr}}) {
        CAPTURE(c.model);
        auto cm = test::load(c.model);
        Snapshot s0 = c.bounds ? test::bounded(cm, c.bounds) : cm.model.initial_snapshot;
        Budget b;
        b.max_states = 400;
        auto ts = build_gsm_ts(cm, s0, {}, b);
        auto weak = check(ts, props[0].formula, {true});
        auto strong = check(ts, props[1].formula, {true});
        for (std::size_t i = 0; i < ts.states.size(); ++i)
            CHECK((!strong.states[i] || weak.states[i]));
    }
}

TEST_CASE("model printing round-trips after random edits") {
    GsmModel m = load_model_file(test::corpus("order.gsm"));
    Rng r(4);
    for (int i = 0; i < 50; ++i) {
        GsmModel e = m;
        InstanceState &o = e.initial_snapshot.instances.at("o1");
        o.attrs["payment"] = r.coin() ? kNull : "v" + std::to_string(r.below(9));
        for (auto &[k, v] : o.milestones)
            v = r.coin();
        if (r.coin()) {
            InstanceState it = blank_instance(e.type("Item"));
            it.attrs["parent"] = "o1";
            it.attrs["code"] = "it's \"quoted\"";
            e.initial_snapshot.instances["item " + std::to_string(i)] = it;
        }
        CHECK(parse_model(print_model(e)) == e);
    }
}

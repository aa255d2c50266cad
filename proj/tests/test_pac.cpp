#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsmv/turing.hpp"
#include "support.hpp"

#include <algorithm>

using namespace gsmv;

namespace {

std::size_t count_kind(const std::vector<PacRule> &rules, RuleTemplate t) {
    return std::count_if(rules.begin(), rules.end(), [&](const PacRule &r) { return r.kind == t; });
}

const PacRule &find_rule(const std::vector<PacRule> &rules, RuleTemplate t, const std::string &construct) {
    auto it = std::find_if(rules.begin(), rules.end(),
                           [&](const PacRule &r) { return r.kind == t && r.construct == construct; });
    REQUIRE(it != rules.end());
    return *it;
}

// guards + tasks + substages + 3 per milestone + invalidating sentries
std::size_t expected_rules(const GsmModel &m) {
    std::size_t n = 0;
    for (const auto &a : m.artifact_types) {
        for (const auto &s : flatten_stages(a)) {
            n += s.stage->guards.size() + (s.parent != nullptr);
            n += s.stage->task.has_value();
        }
        for (const auto &ms : a.milestones)
            n += 3 + ms.invalidating.size();
    }
    return n;
}

} // namespace

TEST_CASE("rule derivation on the order model") {
    GsmModel m = load_model_file(test::corpus("order.gsm"));
    auto rules = derive_pac_rules(m);
    CHECK(rules.size() == expected_rules(m));
    CHECK(rules.size() == 15);
    CHECK(count_kind(rules, RuleTemplate::OpenStage) == 3);
    CHECK(count_kind(rules, RuleTemplate::DispatchTask) == 3);
    CHECK(count_kind(rules, RuleTemplate::AchieveMilestone) == 3);
    CHECK(count_kind(rules, RuleTemplate::CloseOnMilestone) == 3);
    CHECK(count_kind(rules, RuleTemplate::InvalidateOnOpen) == 3);

    std::set<std::string> ids;
    for (const auto &r : rules)
        ids.insert(r.id);
    CHECK(ids.size() == rules.size());

    const PacRule &open_pay = find_rule(rules, RuleTemplate::OpenStage, "Pay order");
    CHECK(open_pay.trigger == std::optional<std::string>("payRequest"));
    REQUIRE(open_pay.sets);
    CHECK(*open_pay.sets == StatusLiteral{{StatusRef::Kind::Stage, "Pay order"}, true});
    // guards only open closed stages
    CHECK(std::find(open_pay.requires_status.begin(), open_pay.requires_status.end(),
                    StatusLiteral{{StatusRef::Kind::Stage, "Pay order"}, false}) != open_pay.requires_status.end());

    const PacRule &receipt = find_rule(rules, RuleTemplate::OpenStage, "Deliver receipt");
    REQUIRE(receipt.requires_event);
    CHECK(receipt.requires_event->status.name == "Order paid");
    CHECK(receipt.event_from_sentry);

    const PacRule &dispatch = find_rule(rules, RuleTemplate::DispatchTask, "Pay order");
    CHECK(dispatch.dispatch == std::optional<std::string>("Pay"));
    CHECK_FALSE(dispatch.sets.has_value());
}

TEST_CASE("rule counts on hierarchical models") {
    for (const char *f : {"turing-halting.gsm", "turing-looping.gsm", "order_nocreate.gsm"}) {
        CAPTURE(f);
        GsmModel m = load_model_file(test::corpus(f));
        auto rules = derive_pac_rules(m);
        CHECK(rules.size() == expected_rules(m));
        bool hierarchical = std::string(f).find("turing") == 0;
        CHECK((count_kind(rules, RuleTemplate::CloseWithParent) > 0) == hierarchical);
    }
}

TEST_CASE("stratification respects the dependency DAG") {
    for (const char *f : {"order.gsm", "order_nocreate.gsm", "turing-halting.gsm", "turing-looping.gsm"}) {
        CAPTURE(f);
        auto rules = derive_pac_rules(load_model_file(test::corpus(f)));
        RuleOrder order = stratify(rules);
        REQUIRE(order.order.size() == rules.size());
        CHECK(is_linear_extension(order, order.order));
        std::vector<std::size_t> pos(rules.size());
        for (std::size_t i = 0; i < order.order.size(); ++i)
            pos[order.order[i]] = i;
        for (const auto &e : order.edges) {
            CHECK(pos[e.from] < pos[e.to]);
            auto &preds = order.predecessors[e.to];
            CHECK(std::find(preds.begin(), preds.end(), e.from) != preds.end());
        }
        // deterministic
        CHECK(stratify(rules).order == order.order);
    }
}

TEST_CASE("the Order paid shortcut yields a dependency edge") {
    auto rules = derive_pac_rules(load_model_file(test::corpus("order.gsm")));
    RuleOrder order = stratify(rules);
    const PacRule &achieve = find_rule(rules, RuleTemplate::AchieveMilestone, "Order paid");
    const PacRule &receipt = find_rule(rules, RuleTemplate::OpenStage, "Deliver receipt");
    bool found = false;
    for (const auto &e : order.edges)
        found = found || (rules[e.from].id == achieve.id && rules[e.to].id == receipt.id && e.via.name == "Order paid");
    CHECK(found);
    std::string report = explain(rules, order);
    CHECK(report.find(achieve.id + " -> " + receipt.id + "  (on \"Order paid\")") != std::string::npos);
    CHECK(report.find("[" + achieve.id + "] achieve-milestone \"Order paid\"") != std::string::npos);
}

TEST_CASE("mutually triggering guards are a cycle") {
    auto rules = derive_pac_rules(load_model_file(test::corpus("cyclic-guards.gsm")));
    try {
        stratify(rules);
        FAIL("expected a cycle");
    } catch (const CycleError &e) {
        REQUIRE(e.cycle.size() >= 3);
        CHECK(e.cycle.front() == e.cycle.back());
        CHECK(std::string(e.what()).find("cyclic") != std::string::npos);
    }
    CHECK_THROWS_AS(compile(load_model_file(test::corpus("cyclic-guards.gsm"))), CycleError);
}

TEST_CASE("linear extensions") {
    auto rules = derive_pac_rules(load_model_file(test::corpus("order.gsm")));
    RuleOrder order = stratify(rules);
    auto all = linear_extensions(order, 50);
    REQUIRE(all.size() == 50);
    CHECK(std::is_sorted(all.begin(), all.end()));
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    for (const auto &ext : all)
        CHECK(is_linear_extension(order, ext));
    std::mt19937 rng(7);
    for (int i = 0; i < 20; ++i)
        CHECK(is_linear_extension(order, random_linear_extension(order, rng)));
    auto reversed = order.order;
    std::reverse(reversed.begin(), reversed.end());
    CHECK_FALSE(is_linear_extension(order, reversed));
    CHECK_FALSE(is_linear_extension(order, {0, 1}));
}

TEST_CASE("candidate rules per incoming event") {
    auto rules = derive_pac_rules(load_model_file(test::corpus("order.gsm")));
    auto cand = candidate_rules(rules, "Order", "payRequest");
    CHECK(cand[std::distance(rules.begin(), std::find_if(rules.begin(), rules.end(), [](const PacRule &r) {
        return r.kind == RuleTemplate::OpenStage && r.construct == "Pay order";
    }))]);
    for (std::size_t i = 0; i < rules.size(); ++i)
        if (rules[i].trigger && *rules[i].trigger != "payRequest")
            CHECK_FALSE(cand[i]);
    // the receipt stage can only open after Pay returns
    const PacRule &receipt = find_rule(rules, RuleTemplate::OpenStage, "Deliver receipt");
    auto idx = std::size_t(&receipt - rules.data());
    CHECK_FALSE(cand[idx]);
    CHECK(candidate_rules(rules, "Order", "Pay")[idx]);
}

TEST_CASE("status literal rendering") {
    StatusLiteral open{{StatusRef::Kind::Stage, "Pay order"}, true};
    StatusLiteral inval{{StatusRef::Kind::Milestone, "Order paid"}, false};
    CHECK(event_string(open) == "+\"Pay order\"");
    CHECK(event_string(inval) == "-\"Order paid\"");
    CHECK(std::string(template_name(RuleTemplate::OpenStage)) == "open-stage");
}

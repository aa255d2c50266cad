#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsmv/model_json.hpp"
#include "gsmv/turing.hpp"
#include "support.hpp"

#include <filesystem>

using namespace gsmv;

namespace {

const char *kCorpusModels[] = {"order.gsm", "order_nocreate.gsm", "turing-halting.gsm", "turing-looping.gsm"};

std::string expected_message(const std::string &text) {
    auto line = text.substr(0, text.find('\n'));
    auto pos = line.find("expect:");
    REQUIRE(pos != std::string::npos);
    return line.substr(pos + 8);
}

} // namespace

TEST_CASE("order model parses into the expected structure") {
    GsmModel m = load_model_file(test::corpus("order.gsm"));
    CHECK(m.name == "OrderManagement");
    REQUIRE(m.artifact_types.size() == 2);
    const ArtifactType &order = m.type("Order");
    CHECK(order.stages.size() == 3);
    CHECK(order.milestones.size() == 3);
    CHECK(order.find_milestone("Order paid") != nullptr);
    const ArtifactType &item = m.type("Item");
    CHECK(item.parent == std::optional<std::string>("Order"));
    // the implicit parent reference comes first
    REQUIRE(item.find_attribute(kParentAttribute) != nullptr);
    CHECK(item.find_attribute(kParentAttribute)->sort == Sort::IdRef);
    CHECK(has_creation_tasks(m));
    CHECK_FALSE(has_creation_tasks(load_model_file(test::corpus("order_nocreate.gsm"))));
    REQUIRE(m.initial_snapshot.instances.count("o1"));
    const InstanceState &o1 = m.initial_snapshot.instances.at("o1");
    CHECK(o1.attrs.at("payment") == kNull);
    CHECK_FALSE(o1.stages.at("Pay order"));
    CHECK_FALSE(o1.milestones.at("Order paid"));
}

TEST_CASE("print and parse round-trip every corpus model") {
    for (const char *f : kCorpusModels) {
        CAPTURE(f);
        GsmModel m = load_model_file(test::corpus(f));
        std::string printed = print_model(m);
        GsmModel again = parse_model(printed);
        CHECK(again == m);
        CHECK(print_model(again) == printed);
    }
}

TEST_CASE("JSON mirror round-trips") {
    for (const char *f : kCorpusModels) {
        CAPTURE(f);
        GsmModel m = load_model_file(test::corpus(f));
        CHECK(model_from_json(model_to_json(m)) == m);
        CHECK(model_from_json_text(model_to_json(m).dump()) == m);
    }
}

TEST_CASE("Turing fixtures match the encoder") {
    for (std::string name : {"turing-halting", "turing-looping"}) {
        CAPTURE(name);
        auto tm = parse_turing_machine(read_file(test::corpus(name + ".tm")));
        CHECK(load_model_file(test::corpus(name + ".gsm")) == encode_turing_machine(tm));
        CHECK(load_model_file(test::corpus(name + ".tm")) == encode_turing_machine(tm));
    }
}

TEST_CASE("Turing machine text format") {
    auto tm = parse_turing_machine("initial q0; final qf; q0 _ -> q1 1 R; q1 _ -> qf 1 L;");
    CHECK(tm.initial == "q0");
    CHECK(tm.final_state == "qf");
    REQUIRE(tm.delta.size() == 2);
    CHECK(tm.delta[1].move == TuringMachine::Move::Left);
    CHECK_THROWS_AS(parse_turing_machine("initial q0;"), std::invalid_argument);
    CHECK_THROWS_AS(parse_turing_machine("initial q0; final qf; q0 _ -> q1 1 X;"), std::invalid_argument);
    CHECK_THROWS_AS(encode_turing_machine(parse_turing_machine("initial q0; final qf; q0 _ -> q1 1 R; q0 _ -> q0 0 L;")),
                    NonDeterministicMachine);
}

TEST_CASE("invalid fixtures are rejected with a located diagnostic") {
    std::size_t seen = 0;
    for (const auto &entry : std::filesystem::directory_iterator(test::corpus("invalid"))) {
        std::string path = entry.path().string();
        CAPTURE(path);
        std::string text = read_file(path);
        std::string want = expected_message(text);
        try {
            parse_model(text);
            FAIL("accepted");
        } catch (const ParseError &e) {
            CHECK(std::string(e.what()).find(want) != std::string::npos);
            CHECK(e.line > 0);
        }
        ++seen;
    }
    CHECK(seen >= 10);
}

TEST_CASE("validation errors on hand-built models") {
    GsmModel m = load_model_file(test::corpus("order.gsm"));

    GsmModel dup_event = m;
    dup_event.event_types.push_back(dup_event.event_types.front());
    CHECK_THROWS_AS(validate(dup_event), ValidationError);

    GsmModel orphan = m;
    orphan.artifact_types[0].milestones.push_back({"floating", {EventRef{TriggerKind::External, "itemRequest"}, {}}, {}});
    CHECK_THROWS_WITH_AS(validate(orphan), doctest::Contains("exactly one stage"), ValidationError);

    GsmModel bad_instance = m;
    bad_instance.initial_snapshot.instances["o1"].attrs["bogus"] = "1";
    CHECK_THROWS_AS(validate(bad_instance), ValidationError);

    GsmModel both = m;
    both.initial_snapshot.free_containers["Order"].insert("o1");
    CHECK_THROWS_WITH_AS(validate(both), doctest::Contains("both free and occupied"), ValidationError);
}

TEST_CASE("conditions") {
    Condition c = parse_condition("exists Item where it.qty = '2' and not achieved(\"Order paid\")");
    CHECK(c.kind == Condition::Kind::And);
    CHECK(parse_condition(to_string(c)) == c);
    CHECK_THROWS_AS(parse_condition("payment = "), ParseError);

    GsmModel m = load_model_file(test::corpus("order.gsm"));
    Snapshot s = m.initial_snapshot;
    Value self = "o1";
    ConditionScope scope{m, s, self};
    CHECK_FALSE(evaluate(parse_condition("exists Item"), scope));
    CHECK(evaluate(parse_condition("payment = null"), scope));
    InstanceState item = blank_instance(m.type("Item"));
    item.attrs[kParentAttribute] = "o1";
    item.attrs["qty"] = "2";
    s.instances["i1"] = item;
    CHECK(evaluate(parse_condition("exists Item where it.qty = '2'"), scope));
    CHECK_FALSE(evaluate(parse_condition("exists Item where it.qty = '3'"), scope));
}

TEST_CASE("event scripts") {
    auto events = parse_event_script(read_file(test::corpus("order.script")));
    REQUIRE(events.size() == 4);
    CHECK(events[0] == test::event("itemRequest", "o1"));
    CHECK(events[1].type == "add item");
    CHECK(events[1].payload.at("qty") == "2");
    CHECK(events[3].payload.at("payment") == "100");
    CHECK(parse_event_script("# nothing\n\n").empty());
    CHECK_THROWS(parse_event_script("itemRequest o1"));
}

TEST_CASE("blank instances and flattening") {
    GsmModel m = load_model_file(test::corpus("turing-halting.gsm"));
    const ArtifactType &tm = m.type("TM");
    auto stages = flatten_stages(tm);
    std::size_t atomic = 0;
    for (const auto &s : stages)
        atomic += s.stage->atomic();
    CHECK(atomic == 7);  // Init, two updates, extend/move right, extend/move left
    CHECK(stage_of_milestone(tm, "Halt")->name == "Transition");
    CHECK(stage_of_task(tm, "move left")->name == "Move left");
    InstanceState b = blank_instance(tm);
    CHECK(b.attrs.at("curCell") == kNull);
    CHECK(b.stages.size() == stages.size());
}

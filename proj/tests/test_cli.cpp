#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsmv/dcds.hpp"
#include "gsmv/model_parser.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace {

struct Run {
    int code;
    std::string out;
};

std::string corpus(const std::string &f) { return std::string(GSMV_CORPUS_DIR) + "/" + f; }

Run cli(const std::string &args, const std::string &env = "") {
    std::string cmd = env + (env.empty() ? "" : " ") + "'" + GSMV_BIN + "' " + args + " 2>&1";
    FILE *p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), p))
        out.append(buf.data(), n);
    int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string tmp(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / "gsmv-cli-test";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

bool contains(const std::string &s, const std::string &part) { return s.find(part) != std::string::npos; }

const char *kBounds = "--containers Order=1,Item=2";

} // namespace

TEST_CASE("parse") {
    for (const char *m : {"order.gsm", "order_nocreate.gsm", "turing-halting.gsm", "turing-looping.gsm"}) {
        CAPTURE(m);
        Run r = cli("parse " + corpus(m));
        CHECK(r.code == 0);
        CHECK(contains(r.out, ": ok"));
    }
    Run printed = cli("parse --print " + corpus("order.gsm"));
    CHECK(printed.code == 0);
    CHECK(gsmv::parse_model(printed.out) == gsmv::load_model_file(corpus("order.gsm")));
    Run json = cli("parse --json " + corpus("order.gsm"));
    CHECK(json.code == 0);
    CHECK(nlohmann::json::parse(json.out)["model"] == "OrderManagement");
}

TEST_CASE("parse failures exit 2 with diagnostics") {
    Run cyc = cli("parse " + corpus("cyclic-guards.gsm"));
    CHECK(cyc.code == 2);
    CHECK(contains(cyc.out, "cyclic"));
    CHECK(contains(cyc.out, "->"));
    Run bad = cli("parse " + corpus("invalid/stage-without-guard.gsm"));
    CHECK(bad.code == 2);
    CHECK(contains(bad.out, "stage-without-guard.gsm:5:9"));
    CHECK(cli("parse " + corpus("missing.gsm")).code == 2);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("").code == 2);
}

TEST_CASE("explain lists the Order paid dependency") {
    Run r = cli("explain " + corpus("order.gsm"));
    CHECK(r.code == 0);
    CHECK(contains(r.out, "(on \"Order paid\")"));
    CHECK(contains(r.out, "order:"));
}

TEST_CASE("simulate writes traces") {
    std::string trace = tmp("order.trace"), json = tmp("order.json");
    Run r = cli("simulate " + corpus("order.gsm") + " " + corpus("order.script") + " --trace " + trace +
                 " --trace-json " + json);
    CHECK(r.code == 0);
    CHECK(contains(r.out, "achieved Order paid"));
    CHECK(gsmv::read_file(trace) == gsmv::read_file(corpus("order.trace")));
    auto j = nlohmann::json::parse(gsmv::read_file(json));
    CHECK(j.size() == 4);

    // the same seed gives byte-identical output
    Run a = cli("simulate " + corpus("order.gsm") + " " + corpus("order.script") + " --seed 3");
    Run b = cli("simulate " + corpus("order.gsm") + " " + corpus("order.script") + " --seed 3");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);

    Run bad = cli("simulate " + corpus("order_nocreate.gsm") + " " + corpus("order.script"));
    CHECK(bad.code == 2);
    CHECK(contains(bad.out, "event 2"));

    Run tm = cli("simulate " + corpus("turing-halting.gsm") + " " + corpus("turing.script"));
    CHECK(tm.code == 0);
    CHECK(contains(tm.out, "achieved Halt"));
    Run raw = cli("simulate " + corpus("turing-halting.tm") + " " + corpus("turing.script"));
    CHECK(raw.out == tm.out);
}

TEST_CASE("translate") {
    std::string out = tmp("order.dcds.json"), map = tmp("order.map");
    Run r = cli("translate " + corpus("order.gsm") + " " + kBounds + " -o " + out + " --map " + map);
    CHECK(r.code == 0);
    auto spec = gsmv::spec_from_json(nlohmann::json::parse(gsmv::read_file(out)));
    CHECK_NOTHROW(gsmv::check_spec(spec));
    CHECK(contains(gsmv::read_file(map), "Order.r00"));
    Run stdout_only = cli("translate " + corpus("turing-halting.gsm"));
    CHECK(stdout_only.code == 0);
    CHECK(nlohmann::json::parse(stdout_only.out).contains("rules"));
    CHECK(cli("translate " + corpus("cyclic-guards.gsm")).code == 2);
    CHECK(cli("translate " + corpus("order.gsm") + " --containers Order=0").code == 2);
}

TEST_CASE("build-ts") {
    std::string adj = tmp("order.adj"), dot = tmp("order.dot");
    Run r = cli("build-ts " + corpus("order.gsm") + " " + kBounds + " --side both -o " + adj + " --dot " + dot);
    CHECK(r.code == 0);
    CHECK(contains(r.out, "bisimulation: equivalent"));
    CHECK(contains(r.out, "auxiliary bound violations: 0"));
    CHECK(gsmv::read_file(adj).rfind("# transition system", 0) == 0);
    CHECK(gsmv::read_file(dot).rfind("digraph", 0) == 0);

    Run trunc = cli("build-ts " + corpus("order.gsm") + " --max-states 50");
    CHECK(trunc.code == 0);
    CHECK(contains(trunc.out, "truncated"));
    CHECK(cli("build-ts " + corpus("order.gsm") + " --max-states 0").code == 2);
}

TEST_CASE("verify") {
    Run receipt = cli("verify " + corpus("order.gsm") + " " + kBounds + " --prop " + corpus("receipt-before-pay.prop"));
    CHECK(receipt.code == 1);
    CHECK(contains(receipt.out, "FALSE"));

    Run paid = cli("verify " + corpus("order.gsm") + " " + kBounds + " --prop " + corpus("order-paid-reachable.prop"));
    CHECK(paid.code == 0);
    CHECK(contains(paid.out, "TRUE"));
    CHECK(contains(paid.out, "witness: itemRequest"));

    // creation-free: no bounds needed
    Run nocreate = cli("verify " + corpus("order_nocreate.gsm") + " --prop " + corpus("order-paid-reachable.prop"));
    CHECK(nocreate.code == 0);

    Run refused = cli("verify " + corpus("order.gsm") + " --prop " + corpus("order-paid-reachable.prop"));
    CHECK(refused.code == 2);
    CHECK(contains(refused.out, "--containers"));
    CHECK(contains(refused.out, "items"));

    Run halt = cli("verify " + corpus("turing-halting.gsm") + " --containers TM=1,Cell=3 --prop " + corpus("halt.prop"));
    CHECK(halt.code == 0);

    Run both = cli("verify " + corpus("order.gsm") + " " + kBounds + " --prop " + corpus("lifecycle.prop"));
    CHECK(both.code == 1);
    CHECK(!contains(both.out, "error"));

    std::string bad = tmp("bad.prop");
    {
        std::ofstream(bad) << "exists x. <-> live(x)\n";
    }
    Run unguarded = cli("verify " + corpus("order_nocreate.gsm") + " --prop " + bad);
    CHECK(unguarded.code == 2);
    CHECK(contains(unguarded.out, "live(x)"));

    Run truncated = cli("verify " + corpus("order_nocreate.gsm") + " --max-states 5 --prop " + corpus("order-paid-reachable.prop"));
    CHECK(truncated.code == 2);
    CHECK(contains(truncated.out, "--allow-bounded-depth"));
    Run allowed = cli("verify " + corpus("order_nocreate.gsm") + " --max-states 5 --allow-bounded-depth --prop " +
                       corpus("order-paid-reachable.prop"));
    CHECK(allowed.code != 2);
}

TEST_CASE("check-bounded") {
    Run nocreate = cli("check-bounded " + corpus("order_nocreate.gsm"));
    CHECK(nocreate.code == 0);
    Run bounded = cli("check-bounded " + corpus("order.gsm") + " " + kBounds);
    CHECK(bounded.code == 0);
    Run unknown = cli("check-bounded " + corpus("order.gsm"));
    CHECK(unknown.code == 1);
    CHECK(contains(unknown.out, "not established"));
    Run explore = cli("check-bounded " + corpus("order.gsm") + " --explore --max-depth 8");
    CHECK(explore.code == 1);
    CHECK(contains(explore.out, "itemRequest -> add item -> itemRequest"));
    Run tm = cli("check-bounded " + corpus("turing-looping.gsm") + " --explore --max-states 200 --extra 6");
    CHECK(tm.code == 1);
    CHECK(contains(tm.out, "exceeded"));
}

TEST_CASE("GSMV_LOG controls verbosity") {
    Run quiet = cli("parse " + corpus("order.gsm"));
    CHECK(!contains(quiet.out, "[info]"));
    Run loud = cli("parse " + corpus("order.gsm"), "GSMV_LOG=info");
    CHECK(loud.code == 0);
    CHECK(contains(loud.out, "[info]"));
    Run junk = cli("parse " + corpus("order.gsm"), "GSMV_LOG=nonsense");
    CHECK(junk.code == 0);
}

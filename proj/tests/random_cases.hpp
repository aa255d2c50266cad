#pragma once

// Random transition systems and formulas for the model-checker oracle tests.

#include "gsmv/mucalc.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace test {

using namespace gsmv;

struct Rng {
    std::mt19937 gen;
    explicit Rng(unsigned seed) : gen(seed) {}
    int below(int n) { return static_cast<int>(gen() % static_cast<unsigned>(n)); }
    bool coin(int one_in = 2) { return below(one_in) == 0; }
};

inline const std::vector<Value> kIds = {"#0", "#1", "#2"};

inline TransitionSystem random_ts(Rng &r, std::size_t max_states = 12) {
    TransitionSystem ts;
    ts.kind = "random";
    ts.constants = {"c"};
    std::size_t n = 1 + r.below(static_cast<int>(max_states));
    for (std::size_t i = 0; i < n; ++i) {
        TsState s;
        int count = r.below(3);
        for (int k = 0; k < count; ++k) {
            InstanceState in;
            in.type = r.coin() ? "A" : "B";
            const Value vals[] = {"#0", "#1", "c", kNull};
            in.attrs["a"] = vals[r.below(4)];
            in.stages["S"] = r.coin();
            in.milestones["m"] = r.coin();
            s.snapshot.instances[kIds[k]] = in;
        }
        // attribute values must be values of the state
        for (auto &[id, in] : s.snapshot.instances)
            if (in.attrs["a"] != "c" && in.attrs["a"] != kNull && !s.snapshot.instances.count(in.attrs["a"]))
                in.attrs["a"] = kNull;
        if (r.coin())
            s.labels.insert("p");
        if (r.coin(3))
            s.labels.insert("q");
        s.key = "s" + std::to_string(i);
        ts.states.push_back(std::move(s));
    }
    auto domain = [&](std::size_t i) {
        std::vector<Value> d;
        for (const auto &[id, in] : ts.states[i].snapshot.instances)
            d.push_back(id);
        return d;
    };
    for (std::size_t i = 0; i < n; ++i) {
        int out = r.below(4);
        for (int k = 0; k < out; ++k) {
            TsEdge e;
            e.from = i;
            e.to = r.below(static_cast<int>(n));
            e.label = r.coin() ? "e" : "f";
            auto src = domain(e.from);
            auto dst = domain(e.to);
            std::shuffle(dst.begin(), dst.end(), r.gen);
            for (std::size_t v = 0; v < src.size() && v < dst.size(); ++v)
                if (!r.coin(4))
                    e.renaming[src[v]] = dst[v];
            ts.edges.push_back(std::move(e));
        }
    }
    return ts;
}

// Random closed formula in the documented syntax; fixpoints nest at most two
// deep, fixpoint variables only occur positively and every modality under a
// quantifier carries the live guards.
struct FormulaGen {
    Rng &r;
    int fix = 0;
    int fo = 0;
    std::vector<std::string> fixvars;
    std::vector<std::string> fovars;

    std::string atom() {
        std::vector<std::string> opts = {"p", "q", "true", "false", "achieved(\"m\")", "open(\"S\")"};
        for (const auto &x : fovars) {
            opts.push_back("A(" + x + ")");
            opts.push_back("B(" + x + ")");
            opts.push_back("attr(" + x + ", \"a\", null)");
            opts.push_back("attr(" + x + ", \"a\", \"c\")");
            opts.push_back("open(\"S\", " + x + ")");
            opts.push_back("achieved(\"m\", " + x + ")");
            opts.push_back("live(" + x + ")");
            opts.push_back("destroyed(" + x + ")");
            opts.push_back("allStagesClosed(" + x + ")");
            for (const auto &y : fovars)
                opts.push_back("attr(" + x + ", \"a\", " + y + ")");
        }
        std::string a = opts[r.below(static_cast<int>(opts.size()))];
        return r.coin(4) ? "!" + a : a;
    }

    std::string guard() {
        std::string g;
        for (const auto &x : fovars)
            g += "live(" + x + ") & ";
        return g;
    }

    std::string gen(int depth) {
        if (depth == 0) {
            if (!fixvars.empty() && r.coin())
                return fixvars[r.below(static_cast<int>(fixvars.size()))];
            return atom();
        }
        switch (r.below(9)) {
        case 0:
            return "(" + gen(depth - 1) + " & " + gen(depth - 1) + ")";
        case 1:
            return "(" + gen(depth - 1) + " | " + gen(depth - 1) + ")";
        case 2:
            return "(" + atom() + " -> " + gen(depth - 1) + ")";
        case 3:
        case 4: {
            std::string m = (r.coin() ? "<-> " : "[-] ") + gen(depth - 1);
            if (fovars.empty())
                return m;
            std::string g = guard();
            return m[0] == '<' ? "(" + g + m + ")" : "(" + g.substr(0, g.size() - 3) + " -> " + m + ")";
        }
        case 5:
        case 6: {
            if (fix >= 2)
                return gen(depth - 1);
            std::string z = "Z" + std::to_string(fixvars.size());
            ++fix;
            fixvars.push_back(z);
            std::string body = gen(depth - 1);
            fixvars.pop_back();
            --fix;
            return std::string("(") + (r.coin() ? "mu " : "nu ") + z + ". " + body + ")";
        }
        default: {
            if (fo >= 2)
                return gen(depth - 1);
            std::string x = "x" + std::to_string(fovars.size());
            std::string type = r.coin() ? "A" : "B";
            ++fo;
            fovars.push_back(x);
            std::string body = gen(depth - 1);
            fovars.pop_back();
            --fo;
            if (r.coin())
                return "(exists " + x + ". " + type + "(" + x + ") & " + body + ")";
            return "(forall " + x + ". " + type + "(" + x + ") -> " + body + ")";
        }
        }
    }
};

inline std::string random_formula(Rng &r) {
    FormulaGen g{r};
    return g.gen(1 + r.below(4));
}

} // namespace test

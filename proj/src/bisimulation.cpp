#include "gsmv/statespace.hpp"

#include <algorithm>

namespace gsmv {

namespace {

// Disjoint union of two systems as plain adjacency lists.
struct Union {
    std::vector<std::string> label;
    std::vector<std::vector<std::pair<std::string, std::size_t>>> succ;
    std::size_t offset = 0;  // first node of the right system

    void add(const TransitionSystem &ts) {
        std::size_t base = label.size();
        for (const auto &s : ts.states)
            label.push_back(s.key + (s.frontier ? "|frontier" : ""));
        succ.resize(label.size());
        for (const auto &e : ts.edges)
            succ[base + e.from].emplace_back(e.label, base + e.to);
    }
};

using Partition = std::vector<std::size_t>;

Partition initial_partition(const Union &u) {
    std::map<std::string, std::size_t> ids;
    Partition p(u.label.size());
    for (std::size_t i = 0; i < u.label.size(); ++i)
        p[i] = ids.emplace(u.label[i], ids.size()).first->second;
    return p;
}

Partition refine(const Union &u, const Partition &p, std::size_t &blocks) {
    using Sig = std::pair<std::size_t, std::set<std::pair<std::string, std::size_t>>>;
    std::map<Sig, std::size_t> ids;
    Partition next(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        Sig sig{p[i], {}};
        for (const auto &[l, t] : u.succ[i])
            sig.second.emplace(l, p[t]);
        next[i] = ids.emplace(std::move(sig), ids.size()).first->second;
    }
    blocks = ids.size();
    return next;
}

} // namespace

BisimulationResult check_bisimulation(const TransitionSystem &a, const TransitionSystem &b) {
    BisimulationResult r;
    for (const auto *ts : {&a, &b})
        if (ts->truncated && !ts->depth_bound) {
            r.reason = ts->kind + " system is truncated by its state budget";
            return r;
        }
    if (a.truncated != b.truncated || a.depth_bound != b.depth_bound) {
        r.reason = "systems are explored to different depths";
        return r;
    }
    Union u;
    u.add(a);
    u.offset = u.label.size();
    u.add(b);

    std::vector<Partition> rounds{initial_partition(u)};
    std::size_t blocks = 0, before = std::set<std::size_t>(rounds[0].begin(), rounds[0].end()).size();
    for (;;) {
        rounds.push_back(refine(u, rounds.back(), blocks));
        if (blocks == before)
            break;
        before = blocks;
    }
    const std::size_t i0 = a.initial, j0 = u.offset + b.initial;
    if (rounds.back()[i0] == rounds.back()[j0]) {
        r.equivalent = true;
        return r;
    }

    // Walk down the refinement rounds to a pair that differs in content.
    auto split_round = [&](std::size_t x, std::size_t y) {
        std::size_t k = 0;
        while (rounds[k][x] == rounds[k][y])
            ++k;
        return k;
    };
    std::size_t x = i0, y = j0;
    for (std::size_t k = split_round(x, y); k > 0; k = split_round(x, y)) {
        const Partition &prev = rounds[k - 1];
        auto unmatched = [&](std::size_t from, std::size_t other) -> std::optional<std::pair<std::string, std::size_t>> {
            for (const auto &[l, t] : u.succ[from]) {
                bool matched = false;
                for (const auto &[l2, t2] : u.succ[other])
                    matched = matched || (l2 == l && prev[t2] == prev[t]);
                if (!matched)
                    return std::pair{l, t};
            }
            return std::nullopt;
        };
        auto move = unmatched(x, y);
        bool left_moves = move.has_value();
        if (!move)
            move = unmatched(y, x);
        if (!move)
            break;  // cannot happen for a genuine split
        const auto &[l, t] = *move;
        r.path.push_back(l);
        std::size_t other = left_moves ? y : x;
        std::optional<std::size_t> answer;
        for (const auto &[l2, t2] : u.succ[other])
            if (l2 == l)
                answer = t2;
        if (!answer) {
            r.left = x;
            r.right = y - u.offset;
            r.reason = std::string(left_moves ? "left" : "right") + " system can take \"" + l + "\" and the other cannot";
            return r;
        }
        x = left_moves ? t : *answer;
        y = left_moves ? *answer : t;
    }
    r.left = x;
    r.right = y - u.offset;
    r.reason = u.label[x] == u.label[y] ? "states have different futures" : "state contents differ";
    return r;
}

bool isomorphic(const TransitionSystem &a, const TransitionSystem &b) {
    auto keys = [](const TransitionSystem &ts) {
        std::set<std::string> out;
        for (const auto &s : ts.states)
            out.insert(s.key);
        return out;
    };
    auto edges = [](const TransitionSystem &ts) {
        std::set<std::tuple<std::string, std::string, std::string>> out;
        for (const auto &e : ts.edges)
            out.emplace(ts.states[e.from].key, e.label, ts.states[e.to].key);
        return out;
    };
    return a.states.size() == b.states.size() && a.states[a.initial].key == b.states[b.initial].key &&
           keys(a) == keys(b) && edges(a) == edges(b);
}

} // namespace gsmv

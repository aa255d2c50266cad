#include "gsmv/mucalc.hpp"

#include <algorithm>
#include <unordered_map>

namespace gsmv {

namespace {

using K = MuFormula::Kind;
using Set = std::vector<char>;

constexpr int kDead = -1;

// Values a first-order variable may denote in a state: ids and attribute
// values of occupied instances. Blank containers do not count, so a recycled
// container comes back with a fresh identity.
std::vector<Value> state_domain(const TsState &s) {
    std::set<Value> out;
    for (const auto &[id, inst] : s.snapshot.instances) {
        out.insert(id);
        for (const auto &[a, v] : inst.attrs)
            if (v != kNull)
                out.insert(v);
    }
    return {out.begin(), out.end()};
}

std::optional<Value> carry(const TransitionSystem &ts, const TsEdge &e, const Value &v,
                           const std::set<Value> &target_domain) {
    Value w = v;
    if (!ts.constants.count(v)) {
        auto it = e.renaming.find(v);
        if (it == e.renaming.end())
            return std::nullopt;
        w = it->second;
    }
    if (!target_domain.count(w))
        return std::nullopt;
    return w;
}

// Atom evaluation shared by both checkers; nullopt arguments are dead.
bool atom_holds(const MuFormula &f, const TsState &s, const std::vector<std::optional<Value>> &args) {
    const auto &inst = s.snapshot.instances;
    auto instance = [&](const std::optional<Value> &v) -> const InstanceState * {
        if (!v)
            return nullptr;
        auto it = inst.find(*v);
        return it == inst.end() ? nullptr : &it->second;
    };
    switch (f.kind) {
    case K::True:
        return true;
    case K::False:
        return false;
    case K::Prop:
        return s.labels.count(f.name) > 0;
    case K::Achieved:
    case K::Open: {
        auto test = [&](const InstanceState &i) {
            const auto &m = f.kind == K::Achieved ? i.milestones : i.stages;
            auto it = m.find(f.name);
            return it != m.end() && it->second;
        };
        if (args.empty())
            return std::any_of(inst.begin(), inst.end(), [&](const auto &p) { return test(p.second); });
        const InstanceState *i = instance(args[0]);
        return i && test(*i);
    }
    case K::Instance: {
        const InstanceState *i = instance(args[0]);
        return i && i->type == f.name;
    }
    case K::Attr: {
        const InstanceState *i = instance(args[0]);
        if (!i || !args[1])
            return false;
        auto it = i->attrs.find(f.name);
        return it != i->attrs.end() && it->second == *args[1];
    }
    case K::Live:
        return args[0].has_value();
    case K::Destroyed:
        return !args[0].has_value();
    case K::Closed: {
        const InstanceState *i = instance(args[0]);
        return i && std::none_of(i->stages.begin(), i->stages.end(), [](const auto &p) { return p.second; });
    }
    default:
        return false;
    }
}

bool single_fixpoint(const MuFormula &f) {
    auto count = [](const auto &self, const MuFormula &g) -> std::size_t {
        std::size_t n = g.kind == K::Mu || g.kind == K::Nu;
        for (const auto &op : g.operands)
            n += self(self, op);
        return n;
    };
    return (f.kind == K::Mu) && count(count, f) == 1;
}

void guard_truncated(const TransitionSystem &ts, const CheckOptions &options) {
    if (ts.truncated && !options.allow_truncated)
        throw CheckError("transition system is truncated (" + ts.truncation +
                         "); pass --allow-bounded-depth to check it anyway");
}

// -- set-based checker ---------------------------------------------------------

class Checker {
public:
    explicit Checker(const TransitionSystem &ts) : ts_(ts), out_(ts.out_edges()) {
        for (const auto &s : ts.states) {
            dom_.push_back(state_domain(s));
            std::unordered_map<Value, int> idx;
            for (std::size_t i = 0; i < dom_.back().size(); ++i)
                idx[dom_.back()[i]] = static_cast<int>(i);
            index_.push_back(std::move(idx));
        }
        for (const auto &e : ts.edges) {
            std::set<Value> target(dom_[e.to].begin(), dom_[e.to].end());
            std::vector<int> t;
            for (const auto &v : dom_[e.from]) {
                auto w = carry(ts, e, v, target);
                t.push_back(w ? index_[e.to].at(*w) : kDead);
            }
            transfer_.push_back(std::move(t));
        }
    }

    Set eval(const MuFormula &f, std::vector<std::string> &scope) {
        const Universe &u = universe(scope.size());
        const std::size_t n = scope.size();
        Set out(u.size, 0);
        auto pos = [&](const std::string &x) {
            return static_cast<std::size_t>(std::find(scope.begin(), scope.end(), x) - scope.begin());
        };
        switch (f.kind) {
        case K::Not: {
            Set a = eval(f.operands[0], scope);
            for (auto &c : a)
                c = !c;
            return a;
        }
        case K::And:
        case K::Or: {
            Set acc(u.size, f.kind == K::And);
            for (const auto &op : f.operands) {
                Set a = eval(op, scope);
                for (std::size_t i = 0; i < u.size; ++i)
                    acc[i] = f.kind == K::And ? (acc[i] && a[i]) : (acc[i] || a[i]);
            }
            return acc;
        }
        case K::Implies: {
            Set a = eval(f.operands[0], scope), b = eval(f.operands[1], scope);
            for (std::size_t i = 0; i < u.size; ++i)
                out[i] = !a[i] || b[i];
            return out;
        }
        case K::Diamond:
        case K::Box: {
            Set a = eval(f.operands[0], scope);
            const bool dia = f.kind == K::Diamond;
            for_each(n, [&](std::size_t idx, std::size_t s, const std::vector<int> &digits) {
                bool r = !dia;
                for (std::size_t e : out_[s]) {
                    std::vector<int> moved(digits.size());
                    for (std::size_t j = 0; j < digits.size(); ++j)
                        moved[j] = digits[j] == kDead ? kDead : transfer_[e][digits[j]];
                    bool v = a[encode(n, ts_.edges[e].to, moved)];
                    if (dia ? v : !v) {
                        r = dia;
                        break;
                    }
                }
                out[idx] = r;
            });
            return out;
        }
        case K::Exists:
        case K::Forall: {
            scope.push_back(f.name);
            Set a = eval(f.operands[0], scope);
            scope.pop_back();
            const bool ex = f.kind == K::Exists;
            for_each(n, [&](std::size_t idx, std::size_t s, const std::vector<int> &digits) {
                bool r = !ex;
                std::vector<int> ext = digits;
                ext.push_back(0);
                for (std::size_t d = 0; d < dom_[s].size(); ++d) {
                    ext.back() = static_cast<int>(d);
                    bool v = a[encode(n + 1, s, ext)];
                    if (ex ? v : !v) {
                        r = ex;
                        break;
                    }
                }
                out[idx] = r;
            });
            return out;
        }
        case K::Var: {
            const auto &[n0, set] = env_.at(f.name);
            for_each(n, [&](std::size_t idx, std::size_t s, const std::vector<int> &digits) {
                std::vector<int> head(digits.begin(), digits.begin() + static_cast<long>(n0));
                out[idx] = (*set)[encode(n0, s, head)];
            });
            return out;
        }
        case K::Mu:
        case K::Nu: {
            const bool mu = f.kind == K::Mu;
            auto x = std::make_shared<Set>(u.size, mu ? 0 : 1);
            auto saved = env_.find(f.name) != env_.end() ? std::optional(env_[f.name]) : std::nullopt;
            std::size_t iterations = 0;
            std::vector<std::size_t> stage;
            const bool ranked = record_stages_ && n == 0;
            if (ranked)
                stage.assign(u.size, 0);
            for (;;) {
                env_[f.name] = {n, x};
                Set next = eval(f.operands[0], scope);
                ++iterations;
                for (std::size_t i = 0; i < u.size; ++i)
                    if (mu ? (*x)[i] && !next[i] : !(*x)[i] && next[i])
                        throw CheckError("fixpoint iteration is not monotone");
                if (ranked)
                    for (std::size_t i = 0; i < u.size; ++i)
                        if (next[i] && !(*x)[i] && !stage[i])
                            stage[i] = iterations;
                if (next == *x)
                    break;
                *x = std::move(next);
                if (iterations > u.size + 1)
                    throw CheckError("fixpoint iteration exceeded the number of configurations");
            }
            max_iterations_ = std::max(max_iterations_, iterations);
            if (saved)
                env_[f.name] = *saved;
            else
                env_.erase(f.name);
            if (ranked)
                stages_ = std::move(stage);
            return *x;
        }
        default: {
            // Atoms.
            for_each(n, [&](std::size_t idx, std::size_t s, const std::vector<int> &digits) {
                std::vector<std::optional<Value>> args;
                for (const auto &a : f.args) {
                    if (!a.is_var) {
                        args.emplace_back(a.text);
                        continue;
                    }
                    int d = digits[pos(a.text)];
                    args.push_back(d == kDead ? std::nullopt : std::optional<Value>(dom_[s][d]));
                }
                out[idx] = atom_holds(f, ts_.states[s], args);
            });
            return out;
        }
        }
    }

    void record_stages(bool on) { record_stages_ = on; }
    const std::vector<std::size_t> &stages() const { return stages_; }
    std::size_t max_iterations() const { return max_iterations_; }
    const std::vector<std::vector<std::size_t>> &out() const { return out_; }

private:
    struct Universe {
        std::vector<std::size_t> offset;  // per state
        std::size_t size = 0;
    };

    // Radix per state: dead plus every domain value.
    std::size_t radix(std::size_t s) const { return dom_[s].size() + 1; }

    const Universe &universe(std::size_t n) {
        auto it = universes_.find(n);
        if (it != universes_.end())
            return it->second;
        Universe u;
        for (std::size_t s = 0; s < ts_.states.size(); ++s) {
            u.offset.push_back(u.size);
            std::size_t block = 1;
            for (std::size_t j = 0; j < n; ++j) {
                block *= radix(s);
                if (block > 20'000'000)
                    throw CheckError("too many first-order valuations to check");
            }
            u.size += block;
        }
        return universes_.emplace(n, std::move(u)).first->second;
    }

    std::size_t encode(std::size_t n, std::size_t s, const std::vector<int> &digits) {
        const Universe &u = universe(n);
        std::size_t idx = 0, mul = 1;
        for (std::size_t j = 0; j < n; ++j) {
            idx += static_cast<std::size_t>(digits[j] + 1) * mul;
            mul *= radix(s);
        }
        return u.offset[s] + idx;
    }

    template <class Fn> void for_each(std::size_t n, Fn fn) {
        const Universe &u = universe(n);
        std::vector<int> digits(n);
        for (std::size_t s = 0; s < ts_.states.size(); ++s) {
            const std::size_t end = s + 1 < ts_.states.size() ? u.offset[s + 1] : u.size;
            for (std::size_t idx = u.offset[s]; idx < end; ++idx) {
                std::size_t local = idx - u.offset[s];
                for (std::size_t j = 0; j < n; ++j) {
                    digits[j] = static_cast<int>(local % radix(s)) - 1;
                    local /= radix(s);
                }
                fn(idx, s, digits);
            }
        }
    }

    const TransitionSystem &ts_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<Value>> dom_;
    std::vector<std::unordered_map<Value, int>> index_;
    std::vector<std::vector<int>> transfer_;
    std::map<std::size_t, Universe> universes_;
    std::map<std::string, std::pair<std::size_t, std::shared_ptr<Set>>> env_;
    bool record_stages_ = false;
    std::vector<std::size_t> stages_;
    std::size_t max_iterations_ = 0;
};

// Descends the approximation stages of a single least fixpoint from the
// initial state to a state satisfying the base case.
std::vector<std::size_t> ranked_path(const TransitionSystem &ts, const std::vector<std::vector<std::size_t>> &out,
                                     const std::vector<std::size_t> &stage) {
    std::vector<std::size_t> path;
    std::size_t cur = ts.initial;
    while (stage[cur] > 1) {
        std::optional<std::size_t> best;
        for (std::size_t e : out[cur]) {
            std::size_t t = ts.edges[e].to;
            if (stage[t] && stage[t] < stage[cur] && (!best || stage[t] < stage[ts.edges[*best].to]))
                best = e;
        }
        if (!best)
            break;
        path.push_back(*best);
        cur = ts.edges[*best].to;
    }
    return path;
}

} // namespace

CheckResult check(const TransitionSystem &ts, const MuFormula &f, const CheckOptions &options) {
    guard_truncated(ts, options);
    if (ts.states.empty())
        throw CheckError("empty transition system");
    CheckResult r;
    Checker c(ts);
    std::vector<std::string> scope;
    Set sat = c.eval(f, scope);
    r.states.assign(sat.begin(), sat.end());
    r.verdict = r.states[ts.initial];
    r.iterations = c.max_iterations();

    // Witness for a true reachability-style formula, counterexample for a
    // false safety-style one.
    const MuFormula target = r.verdict ? f : negate(f);
    if (single_fixpoint(target)) {
        Checker w(ts);
        w.record_stages(true);
        std::vector<std::string> s2;
        w.eval(target, s2);
        if (!w.stages().empty() && w.stages()[ts.initial]) {
            r.path = ranked_path(ts, w.out(), w.stages());
            r.path_is_witness = r.verdict;
        }
    }
    return r;
}

// -- brute-force oracle ----------------------------------------------------------

namespace {

using Valuation = std::map<std::string, std::optional<Value>>;
using Config = std::pair<std::size_t, Valuation>;

class Brute {
public:
    explicit Brute(const TransitionSystem &ts) : ts_(ts) {}

    bool holds(const MuFormula &f, std::size_t s, const Valuation &val) {
        switch (f.kind) {
        case K::Not:
            return !holds(f.operands[0], s, val);
        case K::And:
            for (const auto &op : f.operands)
                if (!holds(op, s, val))
                    return false;
            return true;
        case K::Or:
            for (const auto &op : f.operands)
                if (holds(op, s, val))
                    return true;
            return false;
        case K::Implies:
            return !holds(f.operands[0], s, val) || holds(f.operands[1], s, val);
        case K::Diamond:
        case K::Box:
            for (const auto &e : ts_.edges) {
                if (e.from != s)
                    continue;
                bool v = holds(f.operands[0], e.to, move(e, val));
                if (f.kind == K::Diamond && v)
                    return true;
                if (f.kind == K::Box && !v)
                    return false;
            }
            return f.kind == K::Box;
        case K::Exists:
        case K::Forall:
            for (const auto &d : domain(s)) {
                Valuation ext = val;
                ext[f.name] = d;
                bool v = holds(f.operands[0], s, ext);
                if (f.kind == K::Exists && v)
                    return true;
                if (f.kind == K::Forall && !v)
                    return false;
            }
            return f.kind == K::Forall;
        case K::Var: {
            const auto &[keys, set] = env_.at(f.name);
            Valuation head;
            for (const auto &k : keys)
                head[k] = val.at(k);
            return set.count({s, head}) > 0;
        }
        case K::Mu:
        case K::Nu: {
            std::set<std::string> keys;
            for (const auto &[k, v] : val)
                keys.insert(k);
            std::set<Config> all = configs(keys);
            std::set<Config> x = f.kind == K::Mu ? std::set<Config>{} : all;
            auto saved = env_.count(f.name) ? std::optional(env_[f.name]) : std::nullopt;
            for (;;) {
                env_[f.name] = {keys, x};
                std::set<Config> next;
                for (const auto &c : all)
                    if (holds(f.operands[0], c.first, c.second))
                        next.insert(c);
                if (next == x)
                    break;
                x = std::move(next);
            }
            if (saved)
                env_[f.name] = *saved;
            else
                env_.erase(f.name);
            return x.count({s, val}) > 0;
        }
        default: {
            std::vector<std::optional<Value>> args;
            for (const auto &a : f.args)
                args.push_back(a.is_var ? val.at(a.text) : std::optional<Value>(a.text));
            return atom_holds(f, ts_.states[s], args);
        }
        }
    }

private:
    std::vector<Value> domain(std::size_t s) const { return state_domain(ts_.states[s]); }

    Valuation move(const TsEdge &e, const Valuation &val) const {
        auto target = domain(e.to);
        std::set<Value> t(target.begin(), target.end());
        Valuation out;
        for (const auto &[k, v] : val)
            out[k] = v ? carry(ts_, e, *v, t) : std::nullopt;
        return out;
    }

    std::set<Config> configs(const std::set<std::string> &keys) const {
        std::set<Config> out;
        for (std::size_t s = 0; s < ts_.states.size(); ++s) {
            std::vector<Valuation> vals{{}};
            auto dom = domain(s);
            for (const auto &k : keys) {
                std::vector<Valuation> next;
                for (const auto &v : vals) {
                    Valuation dead = v;
                    dead[k] = std::nullopt;
                    next.push_back(dead);
                    for (const auto &d : dom) {
                        Valuation w = v;
                        w[k] = d;
                        next.push_back(std::move(w));
                    }
                }
                vals = std::move(next);
            }
            for (auto &v : vals)
                out.emplace(s, std::move(v));
        }
        return out;
    }

    const TransitionSystem &ts_;
    std::map<std::string, std::pair<std::set<std::string>, std::set<Config>>> env_;
};

} // namespace

CheckResult check_brute(const TransitionSystem &ts, const MuFormula &f, const CheckOptions &options) {
    guard_truncated(ts, options);
    if (ts.states.size() > 12)
        throw CheckError("check_brute is limited to 12 states");
    CheckResult r;
    Brute b(ts);
    for (std::size_t s = 0; s < ts.states.size(); ++s)
        r.states.push_back(b.holds(f, s, {}));
    r.verdict = r.states.at(ts.initial);
    return r;
}

std::string path_to_string(const TransitionSystem &ts, const std::vector<std::size_t> &path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i)
        out += (i ? " -> " : "") + ts.edges[path[i]].label;
    return out.empty() ? "(initial state)" : out;
}

} // namespace gsmv

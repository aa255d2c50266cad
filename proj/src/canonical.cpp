#include "gsmv/canonical.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <unordered_map>

namespace gsmv {

std::string to_string(const Fact &fact) {
    std::string out = fact.relation + "(";
    for (std::size_t i = 0; i < fact.args.size(); ++i) {
        if (i)
            out += ",";
        out += fact.args[i];
    }
    return out + ")";
}

bool is_canonical_name(const Value &value) {
    return value.size() > 1 && value[0] == '#';
}

namespace {

// Facts with arguments encoded as value slots (>= 0) or constants (< 0).
struct EncodedFact {
    int relation;
    std::vector<int> args;
};

using Signature = std::vector<std::vector<long>>;

class Labeler {
public:
    Labeler(std::span<const Fact> facts, const ConstantPredicate &is_constant) {
        std::vector<std::string> relations;
        std::vector<Value> constants;
        std::unordered_map<Value, int> value_index;
        for (const auto &f : facts) {
            relations.push_back(f.relation);
            for (const auto &a : f.args) {
                if (is_constant(a))
                    constants.push_back(a);
                else if (value_index.emplace(a, static_cast<int>(values_.size())).second)
                    values_.push_back(a);
            }
        }
        std::sort(relations.begin(), relations.end());
        relations.erase(std::unique(relations.begin(), relations.end()), relations.end());
        std::sort(constants.begin(), constants.end());
        constants.erase(std::unique(constants.begin(), constants.end()), constants.end());
        relations_ = relations;
        constants_ = constants;
        occurrences_.resize(values_.size());
        for (const auto &f : facts) {
            EncodedFact e;
            e.relation = static_cast<int>(
                std::lower_bound(relations.begin(), relations.end(), f.relation) - relations.begin());
            for (const auto &a : f.args) {
                if (is_constant(a))
                    e.args.push_back(-1 - static_cast<int>(std::lower_bound(constants.begin(),
                                                                            constants.end(), a) -
                                                           constants.begin()));
                else
                    e.args.push_back(value_index.at(a));
            }
            for (int v : e.args)
                if (v >= 0 && (occurrences_[v].empty() || occurrences_[v].back() != encoded_.size()))
                    occurrences_[v].push_back(encoded_.size());
            encoded_.push_back(std::move(e));
        }
    }

    CanonicalForm run() {
        std::vector<int> colors(values_.size(), 0);
        refine(colors);
        search(colors);
        CanonicalForm out;
        out.facts = std::move(best_facts_);
        for (std::size_t v = 0; v < values_.size(); ++v)
            out.renaming.emplace(values_[v], "#" + std::to_string(best_colors_[v]));
        return out;
    }

private:
    void refine(std::vector<int> &colors) const {
        std::size_t classes = count_classes(colors);
        for (;;) {
            std::vector<std::pair<int, Signature>> keyed(values_.size());
            for (std::size_t v = 0; v < values_.size(); ++v) {
                Signature sig;
                for (std::size_t fi : occurrences_[v]) {
                    const auto &f = encoded_[fi];
                    for (std::size_t p = 0; p < f.args.size(); ++p) {
                        if (f.args[p] != static_cast<int>(v))
                            continue;
                        std::vector<long> entry{f.relation, static_cast<long>(p)};
                        for (int a : f.args) {
                            if (a < 0)
                                entry.push_back(a);
                            else if (a == static_cast<int>(v))
                                entry.push_back(1L << 40);
                            else
                                entry.push_back(colors[a]);
                        }
                        sig.push_back(std::move(entry));
                    }
                }
                std::sort(sig.begin(), sig.end());
                keyed[v] = {colors[v], std::move(sig)};
            }
            std::vector<std::size_t> order(values_.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return keyed[a] < keyed[b]; });
            std::vector<int> next(values_.size());
            int rank = -1;
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (i == 0 || keyed[order[i]] != keyed[order[i - 1]])
                    ++rank;
                next[order[i]] = rank;
            }
            colors = std::move(next);
            std::size_t now = count_classes(colors);
            if (now == classes)
                return;
            classes = now;
        }
    }

    static std::size_t count_classes(const std::vector<int> &colors) {
        std::vector<int> c = colors;
        std::sort(c.begin(), c.end());
        return static_cast<std::size_t>(std::unique(c.begin(), c.end()) - c.begin());
    }

    std::vector<Fact> render(const std::vector<int> &colors) const {
        std::vector<Fact> out;
        out.reserve(encoded_.size());
        for (const auto &e : encoded_) {
            Fact f{relations_[e.relation], {}};
            for (int a : e.args)
                f.args.push_back(a < 0 ? constants_[-1 - a] : "#" + std::to_string(colors[a]));
            out.push_back(std::move(f));
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    void search(const std::vector<int> &colors) {
        // Smallest color shared by more than one value.
        std::vector<int> counts(values_.size() + 1, 0);
        for (int c : colors)
            ++counts[c];
        std::optional<int> split;
        for (std::size_t c = 0; c < counts.size(); ++c)
            if (counts[c] > 1) {
                split = static_cast<int>(c);
                break;
            }
        if (!split) {
            auto facts = render(colors);
            if (!have_best_ || facts < best_facts_) {
                best_facts_ = std::move(facts);
                best_colors_ = colors;
                have_best_ = true;
            }
            return;
        }
        for (std::size_t v = 0; v < values_.size(); ++v) {
            if (colors[v] != *split)
                continue;
            std::vector<int> branch(colors.size());
            for (std::size_t x = 0; x < colors.size(); ++x)
                branch[x] = 2 * colors[x] + 1;
            branch[v] = 2 * colors[v];
            refine(branch);
            search(branch);
        }
    }

    std::vector<std::string> relations_;
    std::vector<Value> constants_;
    std::vector<Value> values_;
    std::vector<EncodedFact> encoded_;
    std::vector<std::vector<std::size_t>> occurrences_;

    bool have_best_ = false;
    std::vector<Fact> best_facts_;
    std::vector<int> best_colors_;
};

} // namespace

CanonicalForm canonicalize(std::span<const Fact> facts, const ConstantPredicate &is_constant) {
    return Labeler(facts, is_constant).run();
}

} // namespace gsmv

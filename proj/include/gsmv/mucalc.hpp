#pragma once

#include "gsmv/statespace.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsmv {

// Argument of a first-order atom: a quantified variable or a quoted constant.
struct MuArg {
    bool is_var = false;
    std::string text;
    bool operator==(const MuArg &) const = default;
};

struct MuFormula {
    enum class Kind {
        True,
        False,
        Prop,       // state label
        Achieved,   // achieved("M") / achieved("M", x)
        Open,       // open("S") / open("S", x)
        Instance,   // T(x): x is an instance of type T
        Attr,       // attr(x, "a", v)
        Live,       // live(x)
        Destroyed,  // destroyed(x)
        Closed,     // allStagesClosed(x)
        Not,
        And,
        Or,
        Implies,
        Diamond,
        Box,
        Mu,
        Nu,
        Var,     // fixpoint variable
        Exists,
        Forall,
    };
    Kind kind = Kind::True;
    std::string name;              // label, status, type, attribute, fixpoint or bound variable
    std::vector<MuArg> args;
    std::vector<MuFormula> operands;
    bool operator==(const MuFormula &) const = default;
};

struct PropertyError : std::runtime_error {
    PropertyError(std::size_t column_, const std::string &msg)
        : std::runtime_error("column " + std::to_string(column_) + ": " + msg), column(column_) {}
    std::size_t column;
};

// ASCII syntax (unicode forms accepted too):
//   mu Z. f | nu Z. f | exists x. f | forall x. f | <-> f | [-] f | dia f | box f
//   !f | f & g | f | g | f -> g | true | false | (f) | label | "label"
//   achieved("M"[, x]) | open("S"[, x]) | T(x) | attr(x, "a", "v"|y|null)
//   live(x) | destroyed(x) | allStagesClosed(x)
// Fixpoint variables must occur positively; every modality under a quantifier
// must sit below a live(x) guard (live(x) & ... or live(x) -> ...) for each
// quantified x in scope.
MuFormula parse_property(const std::string &text);

struct Property {
    std::string text;
    std::string comment;  // preceding '#' line, if any
    MuFormula formula;
};
// One formula per line; '#' starts a comment line.
std::vector<Property> parse_property_file(const std::string &text);

std::string to_string(const MuFormula &f);

// Negation normal form of ¬f (fixpoints dualised).
MuFormula negate(const MuFormula &f);

struct CheckResult {
    std::vector<bool> states;  // satisfying states (closed formulas)
    bool verdict = false;      // at the initial state
    std::optional<std::vector<std::size_t>> path;  // edge indices from the initial state
    bool path_is_witness = true;  // false: counterexample to the formula
    std::size_t iterations = 0;   // largest fixpoint iteration count
};

struct CheckOptions {
    bool allow_truncated = false;
};

struct CheckError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

CheckResult check(const TransitionSystem &ts, const MuFormula &f, const CheckOptions &options = {});

// Direct recursive semantics; the oracle for check. Refuses systems with more
// than 12 states.
CheckResult check_brute(const TransitionSystem &ts, const MuFormula &f, const CheckOptions &options = {});

// Path rendering: "itemRequest -> add item -> ...".
std::string path_to_string(const TransitionSystem &ts, const std::vector<std::size_t> &path);

} // namespace gsmv

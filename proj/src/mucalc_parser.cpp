#include "gsmv/mucalc.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace gsmv {

namespace {

using K = MuFormula::Kind;

enum class Tok { Ident, String, LParen, RParen, Comma, Dot, Not, And, Or, Implies, Dia, Box, Mu, Nu, Exists, Forall, End };

struct Token {
    Tok tok;
    std::string text;
    std::size_t column;
};

bool starts(const std::string &s, std::size_t i, const char *lit) {
    return s.compare(i, std::char_traits<char>::length(lit), lit) == 0;
}

std::vector<Token> lex(const std::string &s) {
    // Unicode spellings of the operators.
    static const std::vector<std::pair<const char *, Tok>> symbols = {
        {"<->", Tok::Dia},       {"⟨-⟩", Tok::Dia}, {"[-]", Tok::Box},  {"->", Tok::Implies},
        {"→", Tok::Implies}, {"&&", Tok::And},            {"&", Tok::And},    {"∧", Tok::And},
        {"||", Tok::Or},          {"|", Tok::Or},              {"∨", Tok::Or}, {"!", Tok::Not},
        {"¬", Tok::Not},     {"μ", Tok::Mu},         {"ν", Tok::Nu}, {"∃", Tok::Exists},
        {"∀", Tok::Forall},  {"(", Tok::LParen},          {")", Tok::RParen}, {",", Tok::Comma},
        {".", Tok::Dot},
    };
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        const std::size_t col = i + 1;
        if (c == '"') {
            std::size_t j = s.find('"', i + 1);
            if (j == std::string::npos)
                throw PropertyError(col, "unterminated string");
            out.push_back({Tok::String, s.substr(i + 1, j - i - 1), col});
            i = j + 1;
            continue;
        }
        if (std::isalpha(c) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
                ++j;
            std::string w = s.substr(i, j - i);
            Tok t = Tok::Ident;
            if (w == "mu")
                t = Tok::Mu;
            else if (w == "nu")
                t = Tok::Nu;
            else if (w == "exists")
                t = Tok::Exists;
            else if (w == "forall")
                t = Tok::Forall;
            else if (w == "dia")
                t = Tok::Dia;
            else if (w == "box")
                t = Tok::Box;
            out.push_back({t, w, col});
            i = j;
            continue;
        }
        bool matched = false;
        for (const auto &[lit, t] : symbols)
            if (starts(s, i, lit)) {
                out.push_back({t, lit, col});
                i += std::char_traits<char>::length(lit);
                matched = true;
                break;
            }
        if (!matched)
            throw PropertyError(col, std::string("unexpected character '") + s[i] + "'");
    }
    out.push_back({Tok::End, "", s.size() + 1});
    return out;
}

MuFormula node(K kind, std::vector<MuFormula> ops = {}, std::string name = {}) {
    MuFormula f;
    f.kind = kind;
    f.operands = std::move(ops);
    f.name = std::move(name);
    return f;
}

MuFormula flat(K kind, MuFormula a, MuFormula b) {
    MuFormula f = node(kind);
    for (auto *x : {&a, &b}) {
        if (x->kind == kind)
            for (auto &op : x->operands)
                f.operands.push_back(std::move(op));
        else
            f.operands.push_back(std::move(*x));
    }
    return f;
}

class Parser {
public:
    explicit Parser(const std::string &text) : toks_(lex(text)) {}

    MuFormula parse() {
        MuFormula f = implies();
        if (peek().tok != Tok::End)
            fail("unexpected '" + peek().text + "'");
        return f;
    }

private:
    const Token &peek() const { return toks_[pos_]; }
    Token take() { return toks_[pos_++]; }
    bool accept(Tok t) {
        if (peek().tok != t)
            return false;
        ++pos_;
        return true;
    }
    [[noreturn]] void fail(const std::string &msg) const { throw PropertyError(peek().column, msg); }
    void expect(Tok t, const char *what) {
        if (!accept(t))
            fail(std::string("expected ") + what);
    }

    MuFormula implies() {
        MuFormula lhs = disjunction();
        if (accept(Tok::Implies))
            return node(K::Implies, {std::move(lhs), implies()});
        return lhs;
    }
    MuFormula disjunction() {
        MuFormula f = conjunction();
        while (accept(Tok::Or))
            f = flat(K::Or, std::move(f), conjunction());
        return f;
    }
    MuFormula conjunction() {
        MuFormula f = unary();
        while (accept(Tok::And))
            f = flat(K::And, std::move(f), unary());
        return f;
    }

    std::string binder_name() {
        if (peek().tok != Tok::Ident)
            fail("expected a variable name");
        std::string v = take().text;
        if (std::count(fix_.begin(), fix_.end(), v) || std::count(vars_.begin(), vars_.end(), v))
            fail("variable " + v + " is already bound");
        return v;
    }

    MuFormula unary() {
        const Token &t = peek();
        switch (t.tok) {
        case Tok::Not:
            take();
            return node(K::Not, {unary()});
        case Tok::Dia:
            take();
            return node(K::Diamond, {unary()});
        case Tok::Box:
            take();
            return node(K::Box, {unary()});
        case Tok::Mu:
        case Tok::Nu: {
            K kind = take().tok == Tok::Mu ? K::Mu : K::Nu;
            std::string z = binder_name();
            expect(Tok::Dot, "'.' after the fixpoint variable");
            fix_.push_back(z);
            MuFormula body = implies();
            fix_.pop_back();
            return node(kind, {std::move(body)}, z);
        }
        case Tok::Exists:
        case Tok::Forall: {
            K kind = take().tok == Tok::Exists ? K::Exists : K::Forall;
            std::vector<std::string> names{binder_name()};
            vars_.push_back(names.back());
            while (accept(Tok::Comma)) {
                names.push_back(binder_name());
                vars_.push_back(names.back());
            }
            expect(Tok::Dot, "'.' after the quantified variables");
            MuFormula body = implies();
            for (std::size_t i = names.size(); i-- > 0;) {
                vars_.pop_back();
                body = node(kind, {std::move(body)}, names[i]);
            }
            return body;
        }
        default:
            return primary();
        }
    }

    MuArg arg() {
        if (peek().tok == Tok::String)
            return {false, take().text};
        if (peek().tok == Tok::Ident) {
            std::string v = take().text;
            if (v == "null")
                return {false, kNull};
            if (!std::count(vars_.begin(), vars_.end(), v))
                fail("unbound variable " + v);
            return {true, v};
        }
        fail("expected a variable or a quoted constant");
    }

    MuFormula primary() {
        if (accept(Tok::LParen)) {
            MuFormula f = implies();
            expect(Tok::RParen, "')'");
            return f;
        }
        if (peek().tok == Tok::String)
            return node(K::Prop, {}, take().text);
        if (peek().tok != Tok::Ident)
            fail("expected a formula");
        const std::size_t col = peek().column;
        std::string w = take().text;
        if (w == "true")
            return node(K::True);
        if (w == "false")
            return node(K::False);
        if (peek().tok != Tok::LParen) {
            if (std::count(fix_.begin(), fix_.end(), w))
                return node(K::Var, {}, w);
            if (std::count(vars_.begin(), vars_.end(), w))
                throw PropertyError(col, "first-order variable " + w + " used as a formula");
            return node(K::Prop, {}, w);
        }
        take();
        std::vector<MuArg> args;
        if (peek().tok != Tok::RParen) {
            args.push_back(arg());
            while (accept(Tok::Comma))
                args.push_back(arg());
        }
        expect(Tok::RParen, "')'");
        std::string lw = w;
        std::transform(lw.begin(), lw.end(), lw.begin(), [](unsigned char c) { return std::tolower(c); });
        MuFormula f;
        auto need = [&](std::size_t lo, std::size_t hi) {
            if (args.size() < lo || args.size() > hi)
                throw PropertyError(col, w + " takes " + std::to_string(lo) +
                                             (lo == hi ? "" : ".." + std::to_string(hi)) + " arguments");
        };
        auto need_var = [&](std::size_t i) {
            if (!args[i].is_var)
                throw PropertyError(col, "argument " + std::to_string(i + 1) + " of " + w + " must be a variable");
        };
        auto need_const = [&](std::size_t i) {
            if (args[i].is_var)
                throw PropertyError(col, "argument " + std::to_string(i + 1) + " of " + w + " must be quoted");
        };
        if (lw == "achieved" || lw == "open") {
            need(1, 2);
            need_const(0);
            if (args.size() == 2)
                need_var(1);
            f = node(lw == "achieved" ? K::Achieved : K::Open, {}, args[0].text);
            args.erase(args.begin());
        } else if (lw == "live" || lw == "destroyed" || lw == "allstagesclosed" || lw == "closed") {
            need(1, 1);
            need_var(0);
            f = node(lw == "live" ? K::Live : lw == "destroyed" ? K::Destroyed : K::Closed);
        } else if (lw == "attr") {
            need(3, 3);
            need_var(0);
            need_const(1);
            f = node(K::Attr, {}, args[1].text);
            args.erase(args.begin() + 1);
        } else if (lw == "instance") {
            need(2, 2);
            need_const(0);
            need_var(1);
            f = node(K::Instance, {}, args[0].text);
            args.erase(args.begin());
        } else {
            need(1, 1);
            need_var(0);
            f = node(K::Instance, {}, w);
        }
        f.args = std::move(args);
        return f;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<std::string> fix_;
    std::vector<std::string> vars_;
};

// Fixpoint variables must occur under an even number of negations relative to
// their binder.
void check_positive(const MuFormula &f, bool negated, std::map<std::string, bool> &binders) {
    switch (f.kind) {
    case K::Var:
        if (binders.at(f.name) != negated)
            throw PropertyError(0, "fixpoint variable " + f.name + " occurs negatively");
        return;
    case K::Not:
        check_positive(f.operands[0], !negated, binders);
        return;
    case K::Implies:
        check_positive(f.operands[0], !negated, binders);
        check_positive(f.operands[1], negated, binders);
        return;
    case K::Mu:
    case K::Nu: {
        binders[f.name] = negated;
        check_positive(f.operands[0], negated, binders);
        binders.erase(f.name);
        return;
    }
    default:
        for (const auto &op : f.operands)
            check_positive(op, negated, binders);
    }
}

void live_conjuncts(const MuFormula &f, std::set<std::string> &out) {
    if (f.kind == K::Live)
        out.insert(f.args[0].text);
    else if (f.kind == K::And)
        for (const auto &op : f.operands)
            live_conjuncts(op, out);
}

void check_guarded(const MuFormula &f, std::vector<std::string> &scope, const std::set<std::string> &guarded) {
    switch (f.kind) {
    case K::Diamond:
    case K::Box:
        for (const auto &x : scope)
            if (!guarded.count(x))
                throw PropertyError(0, "modality in the scope of quantified " + x +
                                           " must be guarded by live(" + x + "): quantification only takes effect "
                                           "while the value persists, so write live(" + x + ") & ... or live(" + x +
                                           ") -> ...");
        check_guarded(f.operands[0], scope, guarded);
        return;
    case K::And: {
        std::set<std::string> g = guarded;
        for (const auto &op : f.operands)
            if (op.kind == K::Live)
                g.insert(op.args[0].text);
        for (const auto &op : f.operands)
            check_guarded(op, scope, g);
        return;
    }
    case K::Implies: {
        check_guarded(f.operands[0], scope, guarded);
        std::set<std::string> g = guarded;
        live_conjuncts(f.operands[0], g);
        check_guarded(f.operands[1], scope, g);
        return;
    }
    case K::Exists:
    case K::Forall:
        scope.push_back(f.name);
        check_guarded(f.operands[0], scope, guarded);
        scope.pop_back();
        return;
    default:
        for (const auto &op : f.operands)
            check_guarded(op, scope, guarded);
    }
}

bool plain_ident(const std::string &s) {
    static const std::set<std::string> reserved = {"mu",   "nu",    "exists", "forall", "dia",
                                                   "box",  "true",  "false",  "null"};
    if (s.empty() || reserved.count(s) || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

std::string quoted(const std::string &s) {
    return "\"" + s + "\"";
}

std::string arg_string(const MuArg &a) {
    if (a.is_var)
        return a.text;
    return a.text == kNull ? "null" : quoted(a.text);
}

// Precedence: 0 binder/implication, 1 or, 2 and, 3 unary.
std::string print(const MuFormula &f, int ctx) {
    auto wrap = [&](int prec, const std::string &s) { return prec < ctx ? "(" + s + ")" : s; };
    auto join = [&](const char *op, int prec) {
        std::string s;
        for (std::size_t i = 0; i < f.operands.size(); ++i)
            s += (i ? op : "") + print(f.operands[i], prec + 1);
        return wrap(prec, s);
    };
    switch (f.kind) {
    case K::True:
        return "true";
    case K::False:
        return "false";
    case K::Prop:
        return plain_ident(f.name) ? f.name : quoted(f.name);
    case K::Achieved:
    case K::Open:
        return std::string(f.kind == K::Achieved ? "achieved(" : "open(") + quoted(f.name) +
               (f.args.empty() ? "" : ", " + arg_string(f.args[0])) + ")";
    case K::Instance:
        return plain_ident(f.name) ? f.name + "(" + arg_string(f.args[0]) + ")"
                                   : "instance(" + quoted(f.name) + ", " + arg_string(f.args[0]) + ")";
    case K::Attr:
        return "attr(" + arg_string(f.args[0]) + ", " + quoted(f.name) + ", " + arg_string(f.args[1]) + ")";
    case K::Live:
        return "live(" + arg_string(f.args[0]) + ")";
    case K::Destroyed:
        return "destroyed(" + arg_string(f.args[0]) + ")";
    case K::Closed:
        return "allStagesClosed(" + arg_string(f.args[0]) + ")";
    case K::Not:
        return "!" + print(f.operands[0], 3);
    case K::And:
        return join(" & ", 2);
    case K::Or:
        return join(" | ", 1);
    case K::Implies:
        return wrap(0, print(f.operands[0], 1) + " -> " + print(f.operands[1], 0));
    case K::Diamond:
        return "<-> " + print(f.operands[0], 3);
    case K::Box:
        return "[-] " + print(f.operands[0], 3);
    case K::Var:
        return f.name;
    case K::Mu:
    case K::Nu:
    case K::Exists:
    case K::Forall: {
        const char *kw = f.kind == K::Mu ? "mu " : f.kind == K::Nu ? "nu " : f.kind == K::Exists ? "exists " : "forall ";
        // A trailing binder needs no parentheses at the top of an implication.
        std::string s = kw + f.name + ". " + print(f.operands[0], 0);
        return ctx > 0 ? "(" + s + ")" : s;
    }
    }
    return "?";
}

} // namespace

MuFormula parse_property(const std::string &text) {
    MuFormula f = Parser(text).parse();
    std::map<std::string, bool> binders;
    check_positive(f, false, binders);
    std::vector<std::string> scope;
    check_guarded(f, scope, {});
    return f;
}

std::vector<Property> parse_property_file(const std::string &text) {
    std::vector<Property> out;
    std::istringstream in(text);
    std::string line, comment;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) {
            comment.clear();
            continue;
        }
        line = line.substr(b);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line[0] == '#') {
            comment = line.substr(line.find_first_not_of("# ") == std::string::npos ? line.size()
                                                                                   : line.find_first_not_of("# "));
            continue;
        }
        try {
            out.push_back({line, comment, parse_property(line)});
        } catch (const PropertyError &e) {
            throw PropertyError(e.column, "line " + std::to_string(lineno) + ": " + e.what());
        }
        comment.clear();
    }
    return out;
}

std::string to_string(const MuFormula &f) {
    return print(f, 0);
}

namespace {

// Negation normal form of f (neg = false) or of ¬f (neg = true). `flipped`
// holds fixpoint variables whose binder was dualised.
MuFormula nnf(const MuFormula &f, bool neg, std::set<std::string> &flipped) {
    auto all = [&](K same, K dual) {
        MuFormula out = node(neg ? dual : same, {}, f.name);
        for (const auto &op : f.operands)
            out.operands.push_back(nnf(op, neg, flipped));
        return out;
    };
    switch (f.kind) {
    case K::True:
    case K::False:
        return node((f.kind == K::True) != neg ? K::True : K::False);
    case K::Not:
        return nnf(f.operands[0], !neg, flipped);
    case K::And:
        return all(K::And, K::Or);
    case K::Or:
        return all(K::Or, K::And);
    case K::Implies:
        return nnf(node(K::Or, {node(K::Not, {f.operands[0]}), f.operands[1]}), neg, flipped);
    case K::Diamond:
        return all(K::Diamond, K::Box);
    case K::Box:
        return all(K::Box, K::Diamond);
    case K::Exists:
        return all(K::Exists, K::Forall);
    case K::Forall:
        return all(K::Forall, K::Exists);
    case K::Mu:
    case K::Nu: {
        bool had = flipped.count(f.name) > 0;
        if (neg)
            flipped.insert(f.name);
        else
            flipped.erase(f.name);
        MuFormula out = all(f.kind, f.kind == K::Mu ? K::Nu : K::Mu);
        if (had)
            flipped.insert(f.name);
        else
            flipped.erase(f.name);
        return out;
    }
    case K::Var:
        return neg != (flipped.count(f.name) > 0) ? node(K::Not, {f}) : f;
    default:
        return neg ? node(K::Not, {f}) : f;
    }
}

} // namespace

MuFormula negate(const MuFormula &f) {
    std::set<std::string> flipped;
    return nnf(f, true, flipped);
}

} // namespace gsmv

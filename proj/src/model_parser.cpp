#include "gsmv/model_parser.hpp"

#include "gsmv/model_json.hpp"
#include "gsmv/names.hpp"
#include "gsmv/turing.hpp"

#include <cctype>
#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace gsmv {

ParseError::ParseError(int line_, int column_, const std::string &msg)
    : std::runtime_error(std::to_string(line_) + ":" + std::to_string(column_) + ": " + msg),
      line(line_), column(column_), message(msg) {}

namespace {

struct Token {
    enum class Kind { Ident, Name, Literal, Punct, End };
    Kind kind = Kind::End;
    std::string text;
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.line = line_;
            t.column = col_;
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = Token::Kind::Ident;
                while (pos_ < src_.size()) {
                    char d = src_[pos_];
                    bool hyphen = d == '-' && pos_ + 1 < src_.size() &&
                                  std::isalpha(static_cast<unsigned char>(src_[pos_ + 1]));
                    if (!(std::isalnum(static_cast<unsigned char>(d)) || d == '_' || hyphen))
                        break;
                    t.text += d;
                    advance();
                }
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                t.kind = Token::Kind::Literal;
                while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                              src_[pos_] == '.' || src_[pos_] == '_'))
                    t.text += advance();
            } else if (c == '"' || c == '\'') {
                t.kind = c == '"' ? Token::Kind::Name : Token::Kind::Literal;
                advance();
                for (;;) {
                    if (pos_ >= src_.size())
                        throw ParseError(t.line, t.column, "unterminated quoted text");
                    char d = advance();
                    if (d == c)
                        break;
                    if (d == '\\' && pos_ < src_.size())
                        d = advance();
                    t.text += d;
                }
            } else {
                t.kind = Token::Kind::Punct;
                if (c == '!' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
                    t.text = "!=";
                    advance();
                    advance();
                } else if (std::string_view("{}()[];,.=?+-:").find(c) != std::string_view::npos) {
                    t.text = std::string(1, advance());
                } else {
                    throw ParseError(t.line, t.column, std::string("unexpected character '") + c + "'");
                }
            }
            out.push_back(std::move(t));
        }
    }

private:
    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

struct RawRef {
    char sign = 0;  // '+', '-' or 0
    std::string name;
    int line = 0;
    int column = 0;
};

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(Lexer(text).run()) {}

    GsmModel parse_file() {
        GsmModel m;
        if (is_kw("model")) {
            next();
            m.name = name();
            expect(";");
        }
        while (!at_end()) {
            if (is_kw("artifact"))
                parse_artifact(m);
            else if (is_kw("initial"))
                parse_initial(m);
            else
                error("expected 'artifact' or 'initial'");
        }
        resolve(m);
        build_events(m);
        try {
            validate(m);
        } catch (const ValidationError &e) {
            auto it = where_.find(e.artifact + "\n" + e.element);
            if (it == where_.end())
                it = where_.find(e.artifact + "\n" + e.artifact);
            auto [line, col] = it == where_.end() ? std::pair{1, 1} : it->second;
            throw ParseError(line, col, e.what());
        }
        return m;
    }

    Condition parse_condition_only() {
        Condition c = condition();
        if (!at_end())
            error("trailing input after condition");
        return c;
    }

    std::vector<EventInstance> parse_script_line() {
        std::vector<EventInstance> out;
        if (at_end())
            return out;
        EventInstance e;
        e.type = name();
        if (!(peek().kind == Token::Kind::Ident && peek().text == "target"))
            error("expected 'target='");
        next();
        expect("=");
        e.target = value();
        if (is_punct("{")) {
            next();
            while (!is_punct("}")) {
                std::string k = name();
                expect("=");
                e.payload[k] = value();
                if (is_punct(","))
                    next();
                else if (!is_punct("}"))
                    error("expected ',' or '}'");
            }
            next();
        }
        if (!at_end())
            error("trailing input after event");
        out.push_back(std::move(e));
        return out;
    }

private:
    // -- token helpers ------------------------------------------------------
    const Token &peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    const Token &next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at_end() const { return peek().kind == Token::Kind::End; }
    bool is_kw(const char *kw, std::size_t k = 0) const {
        return peek(k).kind == Token::Kind::Ident && peek(k).text == kw;
    }
    bool is_punct(const char *p, std::size_t k = 0) const {
        return peek(k).kind == Token::Kind::Punct && peek(k).text == p;
    }
    [[noreturn]] void error(const std::string &msg) const {
        const Token &t = peek();
        std::string near = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(t.line, t.column, msg + " near " + near);
    }
    void expect(const char *p) {
        if (!is_punct(p))
            error(std::string("expected '") + p + "'");
        next();
    }
    void expect_kw(const char *kw) {
        if (!is_kw(kw))
            error(std::string("expected '") + kw + "'");
        next();
    }
    std::string name() {
        const Token &t = peek();
        if (t.kind == Token::Kind::Name || t.kind == Token::Kind::Ident) {
            next();
            return t.text;
        }
        error("expected a name");
    }
    Value value() {
        const Token &t = peek();
        if (t.kind == Token::Kind::Literal || t.kind == Token::Kind::Ident || t.kind == Token::Kind::Name) {
            next();
            return t.text;
        }
        error("expected a value");
    }
    void remember(const std::string &artifact, const std::string &element, const Token &t) {
        where_.emplace(artifact + "\n" + element, std::pair{t.line, t.column});
    }

    // -- artifacts ------------------------------------------------------------
    void parse_attribute_block(ArtifactType &a) {
        expect("{");
        while (!is_punct("}")) {
            Sort sort = Sort::Scalar;
            if (is_kw("ref")) {
                next();
                sort = Sort::IdRef;
            }
            remember(a.name, peek().text, peek());
            a.attributes.push_back({name(), sort});
            expect(";");
        }
        next();
    }

    void parse_artifact(GsmModel &m) {
        next();
        ArtifactType a;
        remember(peek().text, peek().text, peek());
        a.name = name();
        if (is_kw("child")) {
            next();
            expect_kw("of");
            a.parent = name();
            a.attributes.push_back({kParentAttribute, Sort::IdRef});
        }
        expect("{");
        std::vector<ArtifactType> nested;
        while (!is_punct("}")) {
            if (is_kw("attributes")) {
                next();
                parse_attribute_block(a);
            } else if (is_kw("nested")) {
                next();
                ArtifactType child;
                remember(peek().text, peek().text, peek());
                child.name = name();
                child.parent = a.name;
                child.attributes.push_back({kParentAttribute, Sort::IdRef});
                parse_attribute_block(child);
                nested.push_back(std::move(child));
            } else if (is_kw("event")) {
                next();
                EventType e;
                remember(a.name, peek().text, peek());
                e.name = name();
                e.artifact = a.name;
                if (is_punct("(")) {
                    next();
                    while (!is_punct(")")) {
                        e.payload.push_back(name());
                        if (is_punct(","))
                            next();
                        else if (!is_punct(")"))
                            error("expected ',' or ')'");
                    }
                    next();
                }
                expect(";");
                a.events.push_back(e.name);
                m.event_types.push_back(std::move(e));
            } else if (is_kw("stage")) {
                a.stages.push_back(parse_stage(a));
            } else {
                error("expected 'attributes', 'nested', 'event' or 'stage'");
            }
        }
        next();
        m.artifact_types.push_back(std::move(a));
        for (auto &c : nested)
            m.artifact_types.push_back(std::move(c));
    }

    Stage parse_stage(ArtifactType &a) {
        next();
        Stage s;
        remember(a.name, peek().text, peek());
        s.name = name();
        expect("{");
        while (!is_punct("}")) {
            if (is_kw("guard")) {
                next();
                s.guards.push_back(sentry(a.name, s.name));
                expect(";");
            } else if (is_kw("task")) {
                if (s.task)
                    error("stage already has a task");
                Task t = parse_task(a);
                s.task = t.name;
                a.tasks.push_back(std::move(t));
            } else if (is_kw("milestone")) {
                next();
                Milestone ms;
                remember(a.name, peek().text, peek());
                ms.name = name();
                expect_kw("achieved-by");
                ms.achieving = sentry(a.name, ms.name);
                while (is_kw("invalidated-by")) {
                    next();
                    ms.invalidating.push_back(sentry(a.name, ms.name));
                }
                expect(";");
                s.milestones.push_back(ms.name);
                a.milestones.push_back(std::move(ms));
            } else if (is_kw("stage")) {
                s.substages.push_back(parse_stage(a));
            } else {
                error("expected 'guard', 'task', 'milestone' or 'stage'");
            }
        }
        next();
        return s;
    }

    Task parse_task(const ArtifactType &a) {
        next();
        Task t;
        remember(a.name, peek().text, peek());
        t.name = name();
        if (is_kw("update")) {
            next();
            t.kind = TaskKind::Update;
        } else if (is_kw("create")) {
            next();
            t.kind = TaskKind::Create;
            t.target_type = name();
        } else if (is_kw("delete")) {
            next();
            t.kind = TaskKind::Delete;
            t.target_type = name();
        } else {
            error("expected 'update', 'create' or 'delete'");
        }
        if (is_punct(";")) {
            next();
            return t;
        }
        expect("{");
        while (!is_punct("}")) {
            Assignment as;
            as.target = target();
            expect("=");
            as.source = source(as.target);
            expect(";");
            t.assignments.push_back(std::move(as));
        }
        next();
        return t;
    }

    Target target() {
        Target t;
        if (is_kw("new")) {
            next();
            expect(".");
            t.kind = Target::Kind::NewAttribute;
            t.name = name();
            return t;
        }
        std::string n = name();
        if (is_punct("[")) {
            next();
            t.kind = Target::Kind::ChildAttribute;
            t.child_type = n;
            t.filter = condition();
            expect("]");
            expect(".");
            t.name = name();
            return t;
        }
        t.kind = Target::Kind::Attribute;
        t.name = n;
        return t;
    }

    Source source(const Target &tgt) {
        Source s;
        const Token &tok = peek();
        if (is_punct("?")) {
            next();
            s.kind = Source::Kind::Payload;
            s.name = tgt.name;
        } else if (is_kw("null")) {
            next();
            s.kind = Source::Kind::Null;
        } else if (tok.kind == Token::Kind::Literal) {
            next();
            s.kind = Source::Kind::Literal;
            s.name = tok.text;
        } else if (is_kw("new")) {
            next();
            s.kind = Source::Kind::NewId;
        } else {
            std::string n = name();
            if (is_punct("[")) {
                next();
                s.kind = Source::Kind::ChildLookup;
                s.child_type = n;
                s.filter = condition();
                expect("]");
                expect(".");
                s.name = name();
            } else {
                s.kind = Source::Kind::Attribute;
                s.name = n;
            }
        }
        return s;
    }

    Sentry sentry(const std::string &artifact, const std::string &element) {
        Sentry s;
        if (is_kw("on")) {
            next();
            RawRef r;
            r.line = peek().line;
            r.column = peek().column;
            if (is_punct("+") || is_punct("-"))
                r.sign = next().text[0];
            r.name = name();
            s.on = EventRef{TriggerKind::External, r.name};
            pending_.push_back({artifact, element, r});
        }
        if (is_kw("if")) {
            next();
            s.condition = condition();
        }
        if (!s.on && !s.condition)
            error("expected 'on' or 'if'");
        return s;
    }

    // -- conditions -----------------------------------------------------------
    Condition condition() {
        std::vector<Condition> ops{conjunction()};
        while (is_kw("or")) {
            next();
            ops.push_back(conjunction());
        }
        return Condition::disj(std::move(ops));
    }

    Condition conjunction() {
        std::vector<Condition> ops{unary()};
        while (is_kw("and")) {
            next();
            ops.push_back(unary());
        }
        return Condition::conj(std::move(ops));
    }

    Condition unary() {
        if (is_kw("not")) {
            next();
            return Condition::negate(unary());
        }
        if (is_punct("(")) {
            next();
            Condition c = condition();
            expect(")");
            return c;
        }
        if (is_kw("true")) {
            next();
            return Condition::truth();
        }
        if (is_kw("false")) {
            next();
            return Condition::disj({});
        }
        if ((is_kw("achieved") || is_kw("open")) && is_punct("(", 1)) {
            bool achieved = next().text == "achieved";
            next();
            std::string n = name();
            expect(")");
            return achieved ? Condition::achieved(n) : Condition::open(n);
        }
        if (is_kw("exists")) {
            next();
            std::string t = name();
            std::optional<Condition> filter;
            if (is_kw("where")) {
                next();
                filter = unary();
            }
            return Condition::exists(t, std::move(filter));
        }
        Term lhs = term();
        if (is_punct("=")) {
            next();
            return Condition::eq(lhs, term());
        }
        if (is_punct("!=")) {
            next();
            return Condition::neq(lhs, term());
        }
        error("expected '=' or '!='");
    }

    Term term() {
        const Token &t = peek();
        if (t.kind == Token::Kind::Literal) {
            next();
            return Term::literal(t.text);
        }
        if (is_kw("null")) {
            next();
            return Term::null();
        }
        if (is_kw("self")) {
            next();
            return {Term::Kind::Self, ""};
        }
        if (is_kw("new")) {
            next();
            return {Term::Kind::NewId, ""};
        }
        if (is_kw("it")) {
            next();
            if (is_punct(".")) {
                next();
                return {Term::Kind::ChildAttribute, name()};
            }
            return {Term::Kind::Child, ""};
        }
        return Term::attribute(name());
    }

    // -- initial snapshot -------------------------------------------------------
    void parse_initial(GsmModel &m) {
        next();
        expect("{");
        while (!is_punct("}")) {
            if (is_kw("instance")) {
                next();
                PendingInstance p;
                p.line = peek().line;
                p.column = peek().column;
                p.id = value();
                expect(":");
                p.type = name();
                if (is_punct("{")) {
                    next();
                    while (!is_punct("}")) {
                        if (is_kw("open") && !is_punct("=", 1)) {
                            next();
                            p.open.push_back(name());
                        } else if (is_kw("achieved") && !is_punct("=", 1)) {
                            next();
                            p.achieved.push_back(name());
                        } else {
                            std::string k = name();
                            expect("=");
                            p.attrs[k] = is_kw("null") ? (next(), kNull) : value();
                        }
                        expect(";");
                    }
                    next();
                } else {
                    expect(";");
                }
                instances_.push_back(std::move(p));
            } else if (is_kw("bounded")) {
                next();
                expect(";");
                m.initial_snapshot.instance_bounded = true;
            } else if (is_kw("container")) {
                next();
                std::string type = name();
                Value id = value();
                expect(";");
                m.initial_snapshot.free_containers[type].insert(id);
                m.initial_snapshot.instance_bounded = true;
            } else {
                error("expected 'instance', 'container' or 'bounded'");
            }
        }
        next();
    }

    struct PendingInstance {
        Value id;
        std::string type;
        std::map<std::string, Value> attrs;
        std::vector<std::string> open;
        std::vector<std::string> achieved;
        int line = 0;
        int column = 0;
    };

    struct PendingRef {
        std::string artifact;
        std::string element;
        RawRef ref;
    };

    void resolve_ref(const ArtifactType &a, Sentry &s, const RawRef &r) {
        auto fail = [&](const std::string &msg) { throw ParseError(r.line, r.column, msg); };
        bool is_event = std::find(a.events.begin(), a.events.end(), r.name) != a.events.end();
        bool is_task = a.find_task(r.name) != nullptr;
        bool is_milestone = a.find_milestone(r.name) != nullptr;
        bool is_stage = a.find_stage(r.name) != nullptr;
        if (r.sign) {
            if (is_milestone)
                s.on = EventRef{r.sign == '+' ? TriggerKind::MilestoneAchieved : TriggerKind::MilestoneInvalidated,
                                r.name};
            else if (is_stage)
                s.on = EventRef{r.sign == '+' ? TriggerKind::StageOpened : TriggerKind::StageClosed, r.name};
            else
                fail("unknown event '" + std::string(1, r.sign) + r.name + "'");
            return;
        }
        if (is_event)
            s.on = EventRef{TriggerKind::External, r.name};
        else if (is_task)
            s.on = EventRef{TriggerKind::TaskReturn, r.name};
        else if (is_milestone)
            s.on = EventRef{TriggerKind::MilestoneAchieved, r.name};
        else if (is_stage)
            s.on = EventRef{TriggerKind::StageOpened, r.name};
        else
            fail("unknown event '" + r.name + "'");
    }

    // Sentries were parsed before the artifact's full namespace was known;
    // walk them in declaration order and resolve the event references.
    void resolve(GsmModel &m) {
        for (auto &a : m.artifact_types)
            resolve_artifact(a);
        for (const auto &p : instances_) {
            const ArtifactType *a = m.find_type(p.type);
            if (!a)
                throw ParseError(p.line, p.column, "instance '" + p.id + "' has unknown type '" + p.type + "'");
            InstanceState inst = blank_instance(*a);
            for (const auto &[k, v] : p.attrs) {
                if (!inst.attrs.count(k))
                    throw ParseError(p.line, p.column, "unknown attribute '" + k + "' for '" + p.id + "'");
                inst.attrs[k] = v;
            }
            for (const auto &s : p.open) {
                if (!inst.stages.count(s))
                    throw ParseError(p.line, p.column, "unknown stage '" + s + "' for '" + p.id + "'");
                inst.stages[s] = true;
            }
            for (const auto &ms : p.achieved) {
                if (!inst.milestones.count(ms))
                    throw ParseError(p.line, p.column, "unknown milestone '" + ms + "' for '" + p.id + "'");
                inst.milestones[ms] = true;
            }
            if (!m.initial_snapshot.instances.emplace(p.id, std::move(inst)).second)
                throw ParseError(p.line, p.column, "duplicate instance id '" + p.id + "'");
        }
    }

    // Names are unique per artifact, and the sentries of one element are
    // recorded in declaration order, so pending references pair up with the
    // element's event-bearing sentries positionally.
    void resolve_artifact(ArtifactType &a) {
        std::map<std::string, std::vector<Sentry *>> by_element;
        for (auto &ms : a.milestones) {
            if (ms.achieving.on)
                by_element[ms.name].push_back(&ms.achieving);
            for (auto &inv : ms.invalidating)
                if (inv.on)
                    by_element[ms.name].push_back(&inv);
        }
        std::function<void(Stage &)> walk = [&](Stage &s) {
            for (auto &g : s.guards)
                if (g.on)
                    by_element[s.name].push_back(&g);
            for (auto &sub : s.substages)
                walk(sub);
        };
        for (auto &s : a.stages)
            walk(s);
        std::map<std::string, std::size_t> used;
        for (const auto &p : pending_) {
            if (p.artifact != a.name)
                continue;
            auto &list = by_element[p.element];
            std::size_t &k = used[p.element];
            if (k < list.size())
                resolve_ref(a, *list[k++], p.ref);
        }
    }

    void build_events(GsmModel &m) {
        for (const auto &a : m.artifact_types)
            for (const auto &t : a.tasks)
                m.event_types.push_back({t.name, a.name, t.payload_slots(), EventKind::ServiceReturn});
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<PendingRef> pending_;
    std::vector<PendingInstance> instances_;
    std::map<std::string, std::pair<int, int>> where_;
};

// -- printer ------------------------------------------------------------------

std::string print_sentry(const Sentry &s) {
    std::string out;
    if (s.on) {
        out += "on ";
        switch (s.on->kind) {
        case TriggerKind::StageOpened:
        case TriggerKind::MilestoneAchieved:
            out += "+";
            break;
        case TriggerKind::StageClosed:
        case TriggerKind::MilestoneInvalidated:
            out += "-";
            break;
        default:
            break;
        }
        out += quote_name(s.on->name);
    }
    if (s.condition) {
        if (s.on)
            out += " ";
        out += "if " + to_string(*s.condition);
    }
    return out;
}

std::string print_target(const Target &t) {
    switch (t.kind) {
    case Target::Kind::Attribute:
        return quote_name(t.name);
    case Target::Kind::NewAttribute:
        return "new." + quote_name(t.name);
    case Target::Kind::ChildAttribute:
        return quote_name(t.child_type) + "[" + to_string(t.filter) + "]." + quote_name(t.name);
    }
    return {};
}

std::string print_source(const Source &s) {
    switch (s.kind) {
    case Source::Kind::Payload:
        return "?";
    case Source::Kind::Null:
        return "null";
    case Source::Kind::Literal:
        return quote_literal(s.name);
    case Source::Kind::Attribute:
        return quote_name(s.name);
    case Source::Kind::NewId:
        return "new";
    case Source::Kind::ChildLookup:
        return quote_name(s.child_type) + "[" + to_string(s.filter) + "]." + quote_name(s.name);
    }
    return {};
}

void print_stage(std::ostringstream &os, const ArtifactType &a, const Stage &s, int indent) {
    std::string pad(static_cast<std::size_t>(indent), ' ');
    os << pad << "stage " << quote_name(s.name) << " {\n";
    for (const auto &g : s.guards)
        os << pad << "  guard " << print_sentry(g) << ";\n";
    if (s.task) {
        const Task &t = *a.find_task(*s.task);
        os << pad << "  task " << quote_name(t.name);
        switch (t.kind) {
        case TaskKind::Update:
            os << " update";
            break;
        case TaskKind::Create:
            os << " create " << quote_name(t.target_type);
            break;
        case TaskKind::Delete:
            os << " delete " << quote_name(t.target_type);
            break;
        }
        if (t.assignments.empty()) {
            os << ";\n";
        } else {
            os << " {\n";
            for (const auto &as : t.assignments)
                os << pad << "    " << print_target(as.target) << " = " << print_source(as.source) << ";\n";
            os << pad << "  }\n";
        }
    }
    for (const auto &mn : s.milestones) {
        const Milestone &m = *a.find_milestone(mn);
        os << pad << "  milestone " << quote_name(m.name) << " achieved-by " << print_sentry(m.achieving);
        for (const auto &inv : m.invalidating)
            os << " invalidated-by " << print_sentry(inv);
        os << ";\n";
    }
    for (const auto &sub : s.substages)
        print_stage(os, a, sub, indent + 2);
    os << pad << "}\n";
}

std::string print_value(const Value &v) {
    return v == kNull ? "null" : quote_literal(v);
}

} // namespace

GsmModel parse_model(std::string_view text) {
    return Parser(text).parse_file();
}

Condition parse_condition(std::string_view text) {
    return Parser(text).parse_condition_only();
}

std::vector<EventInstance> parse_event_script(std::string_view text) {
    std::vector<EventInstance> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        try {
            for (auto &e : Parser(line).parse_script_line())
                out.push_back(std::move(e));
        } catch (const ParseError &e) {
            throw ParseError(lineno, e.column, e.message);
        }
    }
    return out;
}

std::string print_model(const GsmModel &model) {
    std::ostringstream os;
    if (!model.name.empty())
        os << "model " << quote_name(model.name) << ";\n\n";
    for (const auto &a : model.artifact_types) {
        os << "artifact " << quote_name(a.name);
        if (a.parent)
            os << " child of " << quote_name(*a.parent);
        os << " {\n";
        os << "  attributes {";
        for (const auto &at : a.attributes) {
            if (a.parent && at.name == kParentAttribute)
                continue;
            os << " " << (at.sort == Sort::IdRef ? "ref " : "") << quote_name(at.name) << ";";
        }
        os << " }\n";
        for (const auto &e : a.events) {
            const EventType *et = model.find_event(a.name, e);
            os << "  event " << quote_name(e);
            if (et && !et->payload.empty()) {
                os << "(";
                for (std::size_t i = 0; i < et->payload.size(); ++i)
                    os << (i ? ", " : "") << quote_name(et->payload[i]);
                os << ")";
            }
            os << ";\n";
        }
        for (const auto &s : a.stages)
            print_stage(os, a, s, 2);
        os << "}\n\n";
    }
    const Snapshot &s = model.initial_snapshot;
    if (!s.instances.empty() || s.instance_bounded) {
        os << "initial {\n";
        if (s.instance_bounded)
            os << "  bounded;\n";
        for (const auto &[id, inst] : s.instances) {
            os << "  instance " << quote_literal(id) << " : " << quote_name(inst.type) << " {";
            for (const auto &[k, v] : inst.attrs)
                if (v != kNull)
                    os << " " << quote_name(k) << " = " << print_value(v) << ";";
            for (const auto &[k, v] : inst.stages)
                if (v)
                    os << " open " << quote_name(k) << ";";
            for (const auto &[k, v] : inst.milestones)
                if (v)
                    os << " achieved " << quote_name(k) << ";";
            os << " }\n";
        }
        for (const auto &[type, ids] : s.free_containers)
            for (const auto &id : ids)
                os << "  container " << quote_name(type) << " " << quote_literal(id) << ";\n";
        os << "}\n";
    }
    return os.str();
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

GsmModel load_model_file(const std::string &path) {
    std::string text = read_file(path);
    const std::string json_ext = ".gsm.json";
    if (path.size() >= json_ext.size() && path.compare(path.size() - json_ext.size(), json_ext.size(), json_ext) == 0)
        return model_from_json_text(text);
    if (path.size() > 3 && path.compare(path.size() - 3, 3, ".tm") == 0)
        return encode_turing_machine(parse_turing_machine(text));
    return parse_model(text);
}

} // namespace gsmv

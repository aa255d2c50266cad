#include "gsmv/turing.hpp"

#include "gsmv/model_parser.hpp"
#include "gsmv/names.hpp"

#include <set>
#include <sstream>

namespace gsmv {

namespace {

std::string sym(char c) {
    return std::string(1, c);
}

void check_symbol(char c) {
    if (c != '0' && c != '1' && c != '_')
        throw std::invalid_argument(std::string("tape symbol '") + c + "' not in {0,1,_}");
}

// Shift stage for one direction. `link` is the pointer followed by the head,
// `back` the opposite pointer of a freshly created cell.
void emit_shift(std::ostringstream &os, const std::string &dir, const std::string &link,
                const std::string &back, const std::vector<std::string> &updated) {
    const std::string shift = dir + " shift";
    const std::string extend = "Extend " + [&] {
        std::string d = dir;
        d[0] = static_cast<char>(std::tolower(d[0]));
        return d;
    }();
    const std::string lower = extend.substr(7);
    os << "    stage " << quote_name(shift) << " {\n";
    for (const auto &u : updated)
        os << "      guard on +" << quote_name(u) << ";\n";
    os << "      milestone " << quote_name(dir + " done") << " achieved-by on +" << quote_name(dir + " shifted")
       << ";\n";
    os << "      stage " << quote_name(extend) << " {\n";
    os << "        guard on +" << quote_name(shift) << " if exists Cell where (it = curCell and it." << link
       << " = null);\n";
    os << "        task " << quote_name("extend " + lower) << " create Cell {\n";
    os << "          new.value = '_';\n";
    os << "          new." << back << " = curCell;\n";
    os << "          new." << link << " = null;\n";
    os << "          Cell[it = curCell]." << link << " = new;\n";
    os << "        }\n";
    os << "        milestone " << quote_name(dir + " extended") << " achieved-by on "
       << quote_name("extend " + lower) << ";\n";
    os << "      }\n";
    os << "      stage " << quote_name("Move " + lower) << " {\n";
    os << "        guard on +" << quote_name(shift) << " if exists Cell where (it = curCell and it." << link
       << " != null);\n";
    os << "        guard on +" << quote_name(dir + " extended") << ";\n";
    os << "        task " << quote_name("move " + lower) << " update {\n";
    os << "          curCell = Cell[it = curCell]." << link << ";\n";
    os << "        }\n";
    os << "        milestone " << quote_name(dir + " shifted") << " achieved-by on " << quote_name("move " + lower)
       << ";\n";
    os << "      }\n";
    os << "    }\n";
}

} // namespace

GsmModel encode_turing_machine(const TuringMachine &tm) {
    std::set<std::pair<std::string, char>> seen;
    for (const auto &t : tm.delta) {
        check_symbol(t.read);
        check_symbol(t.write);
        if (t.from == tm.final_state)
            throw std::invalid_argument("transition out of the final state '" + t.from + "'");
        if (!seen.insert({t.from, t.read}).second)
            throw NonDeterministicMachine("two transitions for state '" + t.from + "' reading '" + sym(t.read) + "'");
    }

    std::vector<std::string> right_updates;
    std::vector<std::string> left_updates;
    std::ostringstream os;
    os << "model TuringMachine;\n\n";
    os << "artifact TM {\n";
    os << "  attributes { curState; ref curCell; }\n";
    os << "  nested Cell { value; ref prev; ref next; }\n";
    os << "  event start;\n";
    os << "  event tick;\n\n";
    os << "  stage Init {\n";
    os << "    guard on start if curCell = null;\n";
    os << "    task initTape create Cell {\n";
    os << "      new.value = '_';\n";
    os << "      new.prev = null;\n";
    os << "      new.next = null;\n";
    os << "      curCell = new;\n";
    os << "      curState = " << quote_literal(tm.initial) << ";\n";
    os << "    }\n";
    os << "    milestone \"Init done\" achieved-by on initTape;\n";
    os << "  }\n\n";

    bool has_right = false;
    bool has_left = false;
    for (const auto &t : tm.delta)
        (t.move == TuringMachine::Move::Right ? has_right : has_left) = true;

    os << "  stage Transition {\n";
    os << "    guard on +\"Init done\";\n";
    if (has_right)
        os << "    guard on tick if achieved(\"Transition done\");\n";
    if (has_left)
        os << "    guard on tick if achieved(\"Transition done L\");\n";
    os << "    milestone Halt achieved-by if curState = " << quote_literal(tm.final_state) << ";\n";
    if (has_right)
        os << "    milestone \"Transition done\" achieved-by on +\"Right done\";\n";
    if (has_left)
        os << "    milestone \"Transition done L\" achieved-by on +\"Left done\";\n";
    for (std::size_t i = 0; i < tm.delta.size(); ++i) {
        const auto &t = tm.delta[i];
        const std::string n = std::to_string(i + 1);
        const std::string updated = "Updated " + n;
        (t.move == TuringMachine::Move::Right ? right_updates : left_updates).push_back(updated);
        os << "    stage " << quote_name("Update " + n) << " {\n";
        os << "      guard on +Transition if curState = " << quote_literal(t.from)
           << " and exists Cell where (it = curCell and it.value = " << quote_literal(sym(t.read)) << ");\n";
        os << "      task " << quote_name("update " + n) << " update {\n";
        os << "        curState = " << quote_literal(t.to) << ";\n";
        os << "        Cell[it = curCell].value = " << quote_literal(sym(t.write)) << ";\n";
        os << "      }\n";
        os << "      milestone " << quote_name(updated) << " achieved-by on " << quote_name("update " + n) << ";\n";
        os << "    }\n";
    }
    if (has_right)
        emit_shift(os, "Right", "next", "prev", right_updates);
    if (has_left)
        emit_shift(os, "Left", "prev", "next", left_updates);
    os << "  }\n";
    os << "}\n\n";
    os << "initial {\n  instance tm : TM;\n}\n";
    return parse_model(os.str());
}

TuringMachine parse_turing_machine(const std::string &text) {
    TuringMachine tm;
    // '#' comments run to the end of the line
    std::string body;
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);)
        body += line.substr(0, line.find('#')) + "\n";
    std::istringstream in(body);
    std::string stmt;
    while (std::getline(in, stmt, ';')) {
        std::istringstream ss(stmt);
        std::vector<std::string> w;
        for (std::string tok; ss >> tok;)
            w.push_back(tok);
        if (w.empty())
            continue;
        if (w[0] == "initial" && w.size() == 2) {
            tm.initial = w[1];
        } else if (w[0] == "final" && w.size() == 2) {
            tm.final_state = w[1];
        } else if (w.size() == 6 && w[2] == "->" && w[1].size() == 1 && w[4].size() == 1 &&
                   (w[5] == "L" || w[5] == "R")) {
            tm.delta.push_back({w[0], w[1][0], w[3], w[4][0],
                                w[5] == "L" ? TuringMachine::Move::Left : TuringMachine::Move::Right});
        } else {
            throw std::invalid_argument("malformed machine statement '" + stmt + "'");
        }
    }
    if (tm.initial.empty() || tm.final_state.empty())
        throw std::invalid_argument("machine needs 'initial' and 'final' statements");
    return tm;
}

} // namespace gsmv

#include "gsmv/names.hpp"

#include <array>
#include <cctype>

namespace gsmv {

namespace {
constexpr std::array kKeywords = {
    "model",  "artifact", "child",  "of",      "attributes", "ref",   "nested", "event",
    "stage",  "guard",    "task",   "update",  "create",     "delete", "milestone",
    "achieved-by", "invalidated-by", "on", "if", "and", "or", "not", "true", "false",
    "achieved", "open", "exists", "where", "null", "it", "self", "new", "initial",
    "instance", "container", "bounded",
};
} // namespace

bool is_plain_identifier(const std::string &name) {
    if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'))
        return false;
    for (std::size_t i = 0; i < name.size(); ++i) {
        char c = name[i];
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
            continue;
        if (c == '-' && i + 1 < name.size() && std::isalpha(static_cast<unsigned char>(name[i + 1])))
            continue;
        return false;
    }
    for (const char *k : kKeywords)
        if (name == k)
            return false;
    return true;
}

std::string quote_name(const std::string &name) {
    if (is_plain_identifier(name))
        return name;
    std::string out = "\"";
    for (char c : name) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string quote_literal(const std::string &text) {
    std::string out = "'";
    for (char c : text) {
        if (c == '\'' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + "'";
}

} // namespace gsmv

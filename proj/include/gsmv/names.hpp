#pragma once

#include <string>

namespace gsmv {

// Identifier-like names print bare; anything else is double-quoted.
bool is_plain_identifier(const std::string &name);
std::string quote_name(const std::string &name);
std::string quote_literal(const std::string &text);

} // namespace gsmv

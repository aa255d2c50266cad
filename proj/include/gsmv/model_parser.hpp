#pragma once

#include "gsmv/model.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gsmv {

struct ParseError : std::runtime_error {
    ParseError(int line_, int column_, const std::string &msg);
    int line;
    int column;
    std::string message;
};

// Parses and validates a model in the block-structured text format
// (docs/model-format.md). Validation failures are reported as ParseError at
// the location of the offending declaration.
GsmModel parse_model(std::string_view text);

// Pretty-printer; parse_model(print_model(m)) == m for every valid model.
std::string print_model(const GsmModel &model);

Condition parse_condition(std::string_view text);

// One event per line: EVENT_TYPE target=INSTANCE_ID {attr=value,...}
// Blank lines and lines starting with '#' are ignored.
std::vector<EventInstance> parse_event_script(std::string_view text);

// Reads a model from disk; files ending in .gsm.json use the JSON mirror,
// .tm files are Turing machines run through encode_turing_machine.
GsmModel load_model_file(const std::string &path);

std::string read_file(const std::string &path);

} // namespace gsmv

#pragma once

#include "gsmv/model.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace gsmv {

// Deterministic single-tape machine over {0, 1, _} ('_' is blank).
struct TuringMachine {
    enum class Move { Left, Right };
    struct Transition {
        std::string from;
        char read = '_';
        std::string to;
        char write = '_';
        Move move = Move::Right;
    };
    std::string initial;
    std::string final_state;
    std::vector<Transition> delta;
};

struct NonDeterministicMachine : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// GSM model simulating the machine: an Init stage creating the first tape
// cell, and a Transition stage with one state-update substage per transition
// plus Right/Left shift stages (tape extension then head move). The machine
// reaches its final state iff milestone "Halt" becomes achievable.
//
// Events: `start` initializes the tape; every further step is driven by task
// returns and by `tick`, which re-opens Transition after "Transition done".
GsmModel encode_turing_machine(const TuringMachine &tm);

// Text format: "initial q0; final qf; q0 _ -> qf 1 R; ..."; "#" starts a comment.
TuringMachine parse_turing_machine(const std::string &text);

} // namespace gsmv

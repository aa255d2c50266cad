#pragma once

#include "gsmv/engine.hpp"
#include "gsmv/model_parser.hpp"
#include "gsmv/snapshot.hpp"
#include "gsmv/statespace.hpp"
#include "gsmv/translate.hpp"

#include <string>

namespace test {

inline std::string corpus(const std::string &file) { return std::string(GSMV_CORPUS_DIR) + "/" + file; }

inline gsmv::CompiledModel load(const std::string &file) { return gsmv::compile(gsmv::load_model_file(corpus(file))); }

inline gsmv::Snapshot bounded(const gsmv::CompiledModel &cm, const std::string &config) {
    return gsmv::apply_containers(cm.model, cm.model.initial_snapshot, gsmv::parse_container_config(config));
}

inline gsmv::EventInstance event(std::string type, gsmv::Value target, std::map<std::string, gsmv::Value> payload = {}) {
    return {std::move(type), std::move(target), std::move(payload)};
}

// The corpus model every module is exercised on, in the bounded configuration
// used throughout.
inline const char *kOrderBounds = "Order=1,Item=2";

} // namespace test

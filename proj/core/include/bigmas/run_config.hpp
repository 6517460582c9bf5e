#pragma once

#include <cstdint>

#include "bigmas/json.hpp"

namespace bigmas {

/// Knobs for one full run: design, routing, and the execution loop.
struct RunConfig {
    int t_max = 15; // step budget: longest node path per run
    int r_max = 3;  // self-correction attempts per node visit
    double temperature = 0.7;
    int max_tokens_design = 2048; // output caps per call, by phase
    int max_tokens_routing = 256;
    int max_tokens_node = 1024;
    std::uint64_t seed = 0; // provenance; recorded in traces
};

inline Json run_config_to_json(const RunConfig& c) {
    return Json{{"t_max", c.t_max},
                {"r_max", c.r_max},
                {"temperature", c.temperature},
                {"max_tokens_design", c.max_tokens_design},
                {"max_tokens_routing", c.max_tokens_routing},
                {"max_tokens_node", c.max_tokens_node},
                {"seed", c.seed}};
}

inline RunConfig run_config_from_json(const Json& doc) {
    RunConfig c;
    c.t_max = doc.value("t_max", c.t_max);
    c.r_max = doc.value("r_max", c.r_max);
    c.temperature = doc.value("temperature", c.temperature);
    c.max_tokens_design = doc.value("max_tokens_design", c.max_tokens_design);
    c.max_tokens_routing = doc.value("max_tokens_routing", c.max_tokens_routing);
    c.max_tokens_node = doc.value("max_tokens_node", c.max_tokens_node);
    c.seed = doc.value("seed", c.seed);
    return c;
}

} // namespace bigmas

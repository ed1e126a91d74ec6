#pragma once

#include <string>

#include "pirpath/query.hpp"

namespace pirpath {

enum class PlanMode : uint8_t {
    Auto,     // exact when exhaustive is no dearer than sampling, else sampled
    Exact,    // refuse above the exact-derivation node bound
    Sampled,  // sampled upper bound times a safety factor
};

struct BuildConfig {
    Scheme scheme = Scheme::CI;
    uint32_t page_size_bytes = 4096;
    uint32_t cluster_pages = 1;   // region group size (PI* / AF pages per region)
    uint64_t hy_threshold = 16;   // HY: sets larger than this become subgraphs
    uint32_t anchor_count = 5;    // LM
    bool compression = true;
    CostModel cost;               // capacity enforcement
    PlanMode plan_mode = PlanMode::Auto;
    uint64_t plan_sample_pairs = 10000;
    double plan_safety = 1.25;
    uint64_t exact_plan_node_limit = 10000;
    uint64_t covering_check_pairs = 24;  // build-time sanity sample
    uint64_t seed = 1;
};

Database build_database(const RoadNetwork& net, const BuildConfig& cfg);

void save_database(const Database& db, const std::string& dir);
Database load_database(const std::string& dir);

}  // namespace pirpath

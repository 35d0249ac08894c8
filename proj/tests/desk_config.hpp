#pragma once

// Desk-scale dataset selection shared by the acceptance suite and the
// sparsity-direction check: real data when a cora edge list is present,
// otherwise a deterministic planted-partition surrogate at the same scale
// (N=2704, |E|~5278, average degree ~3.9, most pairs with zero common
// neighbors).

#include <filesystem>

#include "ltlp/config.hpp"

namespace desk {

struct DeskScale {
    ltlp::RunConfig cfg;
    bool real_data = false;
};

inline DeskScale desk_scale_config() {
    DeskScale out;
    ltlp::apply_config_entry(out.cfg, "dataset.name", "cora"); // cora profile defaults
    out.cfg.encoder.layers = 3;
    out.cfg.encoder.hidden = 32; // desk-scale width; the library default stays 256
    out.cfg.train.lr = 0.01;
    for (const char* candidate : {"data/cora/cora.edges", "../data/cora/cora.edges"}) {
        if (std::filesystem::exists(candidate)) {
            out.cfg.edges_path = candidate;
            out.real_data = true;
            return out;
        }
    }
    out.cfg.sbm.num_blocks = 52;
    out.cfg.sbm.block_size = 52;
    out.cfg.sbm.p_in = 0.070;
    out.cfg.sbm.p_out = 0.0001;
    out.cfg.sbm.feature_dim = 26;
    out.cfg.sbm.feature_noise = 0.5;
    return out;
}

} // namespace desk

#pragma once

// Straight-line re-implementation of gene scanning and decoding, written
// without the library's helpers, for cross-checking the decoder.

#include <cmath>
#include <cstddef>
#include <vector>

#include "mb/decoder.hpp"

namespace mbtest {

inline std::size_t oracle_pow(std::size_t b, std::size_t e)
{
    std::size_t r = 1;
    while (e-- > 0) {
        r *= b;
    }
    return r;
}

inline std::vector<std::pair<std::size_t, mb::GateKind>>
oracle_scan(const mb::Genome& g, const mb::DecodeConfig& cfg)
{
    std::vector<std::pair<std::size_t, mb::GateKind>> hits;
    const std::size_t n = g.sites.size();
    for (std::size_t p = 0; p < n; ++p) {
        for (auto kind : mb::kAllGateKinds) {
            const auto c = cfg.codons.codon(kind);
            std::size_t q = p + 1;
            if (q == n) {
                q = 0;
            }
            if (g.sites[p] == c.first && g.sites[q] == c.second) {
                hits.emplace_back(p, kind);
            }
        }
    }
    return hits;
}

inline mb::ProbabilityTable oracle_table(const std::vector<mb::Site>& s, std::size_t from,
                                         std::size_t rows, std::size_t cols, std::size_t stride)
{
    mb::ProbabilityTable t{rows, cols, std::vector<double>(rows * cols)};
    for (std::size_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            sum += s[from + r * stride + c];
        }
        for (std::size_t c = 0; c < cols; ++c) {
            t.p[r * cols + c] = sum == 0.0 ? 1.0 / static_cast<double>(cols)
                                           : s[from + r * stride + c] / sum;
        }
    }
    return t;
}

/// Blueprints for every enabled codon hit, in genome order.
inline std::vector<mb::GateBlueprint> oracle_decode(const mb::Genome& g,
                                                    const mb::DecodeConfig& cfg)
{
    std::vector<mb::GateBlueprint> out;
    const std::size_t n = g.sites.size();
    const double amax = g.alphabet_max;
    for (auto [p, kind] : oracle_scan(g, cfg)) {
        if (cfg.enabled.count(kind) == 0) {
            continue;
        }
        // Unroll enough of the circle to cover the widest gene.
        std::vector<mb::Site> s;
        for (std::size_t j = 0; j < 2 + 2 + cfg.max_in + cfg.max_out + 81 * 81 + 300; ++j) {
            s.push_back(g.sites[(p + j) % n]);
        }
        mb::GateBlueprint bp;
        bp.kind = kind;
        const std::size_t n_in = cfg.min_in + s[2] % (cfg.max_in - cfg.min_in + 1);
        const std::size_t n_out = cfg.min_out + s[3] % (cfg.max_out - cfg.min_out + 1);
        for (std::size_t i = 0; i < n_in; ++i) {
            bp.inputs.push_back(s[4 + i] % cfg.n_nodes);
        }
        for (std::size_t j = 0; j < n_out; ++j) {
            bp.outputs.push_back(s[4 + cfg.max_in + j] % cfg.n_nodes);
        }
        const std::size_t at = 4 + cfg.max_in + cfg.max_out;
        const std::size_t bin_rows = oracle_pow(2, n_in);
        const std::size_t bin_cols = oracle_pow(2, n_out);
        const std::size_t bin_stride = oracle_pow(2, cfg.max_out);
        std::size_t width = 0;
        switch (kind) {
        case mb::GateKind::Deterministic: {
            mb::LogicTable t;
            for (std::size_t r = 0; r < bin_rows; ++r) {
                t.rows.push_back(static_cast<std::uint32_t>(s[at + r] % bin_cols));
            }
            bp.payload = t;
            width = oracle_pow(2, cfg.max_in);
            break;
        }
        case mb::GateKind::Probabilistic:
            bp.payload = oracle_table(s, at, bin_rows, bin_cols, bin_stride);
            width = oracle_pow(2, cfg.max_in) * bin_stride;
            break;
        case mb::GateKind::Ann: {
            mb::WeightMatrix w{n_out, n_in, {}};
            for (std::size_t j = 0; j < n_out; ++j) {
                for (std::size_t i = 0; i < n_in; ++i) {
                    const double v = s[at + j * cfg.max_in + i];
                    w.weights.push_back(cfg.weight_lo
                                        + (cfg.weight_hi - cfg.weight_lo) * v / amax);
                }
            }
            bp.payload = w;
            width = cfg.max_in * cfg.max_out;
            break;
        }
        case mb::GateKind::Threshold:
            bp.payload = mb::ThresholdParams{static_cast<int>(1 + s[at] % 16)};
            width = 1;
            break;
        case mb::GateKind::Timer:
            bp.payload = mb::TimerParams{static_cast<int>(1 + s[at] % 64)};
            width = 1;
            break;
        case mb::GateKind::Feedback: {
            mb::FeedbackParams fb;
            fb.memory = static_cast<int>(1 + s[at] % 8);
            fb.delta_max = 0.01 + (0.5 - 0.01) * s[at + 1] / amax;
            fb.floor = cfg.feedback_floor;
            fb.pos_node = s[at + 2] % cfg.n_nodes;
            fb.neg_node = s[at + 3] % cfg.n_nodes;
            fb.table = oracle_table(s, at + 4, bin_rows, bin_cols, bin_stride);
            bp.payload = fb;
            width = 4 + oracle_pow(2, cfg.max_in) * bin_stride;
            break;
        }
        case mb::GateKind::TernaryDeterministic: {
            mb::LogicTable t;
            for (std::size_t r = 0; r < oracle_pow(3, n_in); ++r) {
                t.rows.push_back(static_cast<std::uint32_t>(s[at + r] % oracle_pow(3, n_out)));
            }
            bp.payload = t;
            width = oracle_pow(3, cfg.max_in);
            break;
        }
        case mb::GateKind::TernaryProbabilistic: {
            const std::size_t cols = oracle_pow(3, n_out);
            bp.payload = oracle_table(s, at, oracle_pow(3, n_in), cols, cols);
            width = oracle_pow(3, n_in) * cols;
            break;
        }
        }
        bp.span_start = p;
        bp.span_length = at + width;
        out.push_back(std::move(bp));
    }
    return out;
}

} // namespace mbtest

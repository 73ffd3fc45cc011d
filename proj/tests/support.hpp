#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mb/brain.hpp"
#include "mb/decoder.hpp"
#include "mb/genome.hpp"

namespace mbtest {

using mb::GateKind;
using mb::Site;

/// One gene written site by site: header values, addresses, then payload
/// (padded with zeros to the configured width).
struct GeneSpec {
    GateKind kind = GateKind::Deterministic;
    std::vector<std::size_t> inputs;
    std::vector<std::size_t> outputs;
    std::vector<Site> payload;
};

inline std::vector<Site> encode_gene(const GeneSpec& g, const mb::DecodeConfig& cfg,
                                     Site alphabet_max = 255)
{
    const auto codon = cfg.codons.codon(g.kind);
    std::vector<Site> s{codon.first, codon.second};
    s.push_back(static_cast<Site>(g.inputs.size() - cfg.min_in));
    s.push_back(static_cast<Site>(g.outputs.size() - cfg.min_out));
    for (std::size_t i = 0; i < cfg.max_in; ++i) {
        s.push_back(i < g.inputs.size() ? static_cast<Site>(g.inputs[i]) : 0);
    }
    for (std::size_t j = 0; j < cfg.max_out; ++j) {
        s.push_back(j < g.outputs.size() ? static_cast<Site>(g.outputs[j]) : 0);
    }
    const auto width =
        mb::payload_width(g.kind, cfg.limits(alphabet_max), g.inputs.size(), g.outputs.size());
    for (std::size_t k = 0; k < width; ++k) {
        s.push_back(k < g.payload.size() ? g.payload[k] : 0);
    }
    return s;
}

/// Genes laid end to end from position `offset` on an all-zero background.
/// Zero is never a codon byte, so only the planted genes decode.
inline mb::Genome genome_with_genes(const std::vector<GeneSpec>& genes,
                                    const mb::DecodeConfig& cfg, std::size_t length = 2000,
                                    std::size_t offset = 10)
{
    mb::Genome g;
    g.sites.assign(length, 0);
    std::size_t pos = offset;
    for (const auto& gene : genes) {
        for (auto v : encode_gene(gene, cfg)) {
            g.sites.at(pos++) = v;
        }
    }
    return g;
}

inline mb::GateBlueprint deterministic_gate(std::vector<std::size_t> in,
                                            std::vector<std::size_t> out,
                                            std::vector<std::uint32_t> rows)
{
    mb::GateBlueprint bp;
    bp.kind = GateKind::Deterministic;
    bp.inputs = std::move(in);
    bp.outputs = std::move(out);
    bp.payload = mb::LogicTable{std::move(rows)};
    return bp;
}

/// Identity: output pattern equals the input pattern (n_in == n_out).
inline mb::GateBlueprint copy_gate(std::size_t from, std::size_t to)
{
    return deterministic_gate({from}, {to}, {0, 1});
}

inline mb::GateBlueprint uniform_probabilistic_gate(std::vector<std::size_t> in,
                                                    std::vector<std::size_t> out)
{
    mb::GateBlueprint bp;
    bp.kind = GateKind::Probabilistic;
    const std::size_t rows = std::size_t{1} << in.size();
    const std::size_t cols = std::size_t{1} << out.size();
    bp.inputs = std::move(in);
    bp.outputs = std::move(out);
    bp.payload = mb::ProbabilityTable{rows, cols, std::vector<double>(rows * cols, 1.0 / cols)};
    return bp;
}

/// Upper critical value of chi-square with `df` degrees of freedom at
/// p = 0.001 (Wilson-Hilferty).
inline double chi2_critical_001(double df)
{
    constexpr double z = 3.090232306167813;
    const double a = 2.0 / (9.0 * df);
    return df * std::pow(1.0 - a + z * std::sqrt(a), 3);
}

inline double chi2_uniform(const std::vector<std::size_t>& counts)
{
    double total = 0.0;
    for (auto c : counts) {
        total += static_cast<double>(c);
    }
    const double expected = total / static_cast<double>(counts.size());
    double x2 = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        x2 += d * d / expected;
    }
    return x2;
}

inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("mb_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace mbtest

#include "mb/decoder.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mb {

CodonRegistry::CodonRegistry()
{
    set(GateKind::Probabilistic, {42, 213});
    set(GateKind::Deterministic, {43, 212});
    set(GateKind::Ann, {44, 211});
    set(GateKind::Threshold, {45, 210});
    set(GateKind::Timer, {46, 209});
    set(GateKind::Feedback, {47, 208});
    set(GateKind::TernaryDeterministic, {48, 207});
    set(GateKind::TernaryProbabilistic, {49, 206});
}

void CodonRegistry::set(GateKind kind, Codon codon)
{
    if (codon.first <= 1 || codon.second <= 1) {
        throw std::invalid_argument("start codons may not contain 0 or 1");
    }
    for (const auto& [k, c] : codons_) {
        if (k != kind && c == codon) {
            throw std::invalid_argument("duplicate start codon for " + std::string(to_string(k))
                                        + " and " + std::string(to_string(kind)));
        }
    }
    codons_[kind] = codon;
}

Codon CodonRegistry::codon(GateKind kind) const
{
    return codons_.at(kind);
}

std::optional<GateKind> CodonRegistry::lookup(Site first, Site second) const
{
    for (const auto& [k, c] : codons_) {
        if (c.first == first && c.second == second) {
            return k;
        }
    }
    return std::nullopt;
}

void DecodeConfig::validate() const
{
    if (min_in < 1 || min_in > max_in) {
        throw std::invalid_argument("require 1 <= min_in <= max_in");
    }
    if (min_out < 1 || min_out > max_out) {
        throw std::invalid_argument("require 1 <= min_out <= max_out");
    }
    if (max_in > 16 || max_out > 16) {
        throw std::invalid_argument("max_in and max_out are limited to 16");
    }
    if (n_nodes < 1) {
        throw std::invalid_argument("n_nodes must be positive");
    }
    if (!(weight_lo <= weight_hi)) {
        throw std::invalid_argument("require weight_lo <= weight_hi");
    }
    if (!(feedback_floor >= 0.0 && feedback_floor < 1.0)) {
        throw std::invalid_argument("feedback_floor must be in [0,1)");
    }
}

PayloadLimits DecodeConfig::limits(Site alphabet_max) const
{
    return {max_in, max_out, n_nodes, alphabet_max, weight_lo, weight_hi, feedback_floor};
}

std::vector<CodonHit> scan_codons(const Genome& genome, const CodonRegistry& registry)
{
    std::vector<CodonHit> hits;
    const auto& sites = genome.sites;
    const std::size_t n = sites.size();
    if (n < 2 || registry.entries().empty()) {
        return hits;
    }
    Site lo = std::numeric_limits<Site>::max();
    Site hi = 0;
    for (const auto& [k, c] : registry.entries()) {
        lo = std::min(lo, c.first);
        hi = std::max(hi, c.first);
    }
    for (std::size_t p = 0; p < n; ++p) {
        const Site s = sites[p];
        if (s < lo || s > hi) {
            continue;
        }
        if (auto kind = registry.lookup(s, sites[p + 1 == n ? 0 : p + 1])) {
            hits.push_back({p, *kind});
        }
    }
    return hits;
}

std::vector<Site> read_circular(const Genome& genome, std::size_t start, std::size_t count)
{
    std::vector<Site> out;
    const std::size_t n = genome.sites.size();
    if (n == 0 || count == 0) {
        return out;
    }
    out.reserve(count);
    std::size_t idx = start % n;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(genome.sites[idx]);
        if (++idx == n) {
            idx = 0;
        }
    }
    return out;
}

std::size_t gene_width(GateKind kind, const DecodeConfig& cfg, std::size_t n_in, std::size_t n_out)
{
    return 2 + 2 + cfg.max_in + cfg.max_out
         + payload_width(kind, cfg.limits(255), n_in, n_out);
}

std::optional<GateBlueprint> decode_gene(const Genome& genome, std::size_t codon_position,
                                         GateKind kind, const DecodeConfig& cfg)
{
    if (!cfg.enabled.contains(kind) || genome.sites.empty()) {
        return std::nullopt;
    }
    const std::size_t body = codon_position + 2;
    const auto header = read_circular(genome, body, 2);
    const std::size_t n_in = map_site(header[0], cfg.min_in, cfg.max_in);
    const std::size_t n_out = map_site(header[1], cfg.min_out, cfg.max_out);
    const auto lim = cfg.limits(genome.alphabet_max);
    const std::size_t width = 2 + cfg.max_in + cfg.max_out + payload_width(kind, lim, n_in, n_out);
    const auto gene = read_circular(genome, body, width);

    GateBlueprint bp;
    bp.kind = kind;
    bp.inputs.resize(n_in);
    bp.outputs.resize(n_out);
    for (std::size_t i = 0; i < n_in; ++i) {
        bp.inputs[i] = gene[2 + i] % cfg.n_nodes;
    }
    for (std::size_t j = 0; j < n_out; ++j) {
        bp.outputs[j] = gene[2 + cfg.max_in + j] % cfg.n_nodes;
    }
    const std::size_t payload_start = 2 + cfg.max_in + cfg.max_out;
    bp.payload = decode_payload(kind, std::span<const Site>(gene).subspan(payload_start), n_in,
                                n_out, lim);
    bp.span_start = codon_position % genome.sites.size();
    bp.span_length = 2 + width;
    return bp;
}

std::vector<GateBlueprint> decode_genes(const Genome& genome, const DecodeConfig& cfg)
{
    std::vector<GateBlueprint> genes;
    for (const auto& hit : scan_codons(genome, cfg.codons)) {
        if (auto bp = decode_gene(genome, hit.position, hit.kind, cfg)) {
            genes.push_back(std::move(*bp));
        }
    }
    return genes;
}

} // namespace mb

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "mb/gates.hpp"
#include "mb/genome.hpp"

namespace mb {

using Codon = std::pair<Site, Site>;

/// Start codon for each gate kind. Defaults: probabilistic 42/213,
/// deterministic 43/212, the rest follow second = 255 - first from 44
/// upward.
class CodonRegistry {
public:
    CodonRegistry();

    /// Throws std::invalid_argument on a duplicate codon or a 0/1 byte.
    void set(GateKind kind, Codon codon);
    Codon codon(GateKind kind) const;
    std::optional<GateKind> lookup(Site first, Site second) const;
    const std::map<GateKind, Codon>& entries() const noexcept { return codons_; }

private:
    std::map<GateKind, Codon> codons_;
};

struct DecodeConfig {
    std::size_t n_nodes = 16;
    std::size_t min_in = 1;
    std::size_t max_in = 4;
    std::size_t min_out = 1;
    std::size_t max_out = 4;
    std::set<GateKind> enabled = {GateKind::Deterministic, GateKind::Probabilistic};
    CodonRegistry codons;
    double weight_lo = -1.0;
    double weight_hi = 1.0;
    double feedback_floor = 0.01;

    /// Throws std::invalid_argument when the ranges are inconsistent.
    void validate() const;
    PayloadLimits limits(Site alphabet_max) const;
};

struct CodonHit {
    std::size_t position;
    GateKind kind;
    bool operator==(const CodonHit&) const = default;
};

/// Every position p where (site[p], site[(p+1) mod n]) is a registered
/// codon, in genome order. Hits inside other genes are included.
std::vector<CodonHit> scan_codons(const Genome& genome, const CodonRegistry& registry);

std::vector<Site> read_circular(const Genome& genome, std::size_t start, std::size_t count);

/// Decodes the gene whose start codon sits at `codon_position`. Returns
/// nullopt when `kind` is not enabled.
///
/// Layout after the codon, all reads circular:
///   n_in site, n_out site,
///   max_in input-address sites (first n_in used),
///   max_out output-address sites (first n_out used),
///   payload (width from payload_width()).
std::optional<GateBlueprint> decode_gene(const Genome& genome, std::size_t codon_position,
                                         GateKind kind, const DecodeConfig& cfg);

/// Total sites occupied by a gene, start codon included.
std::size_t gene_width(GateKind kind, const DecodeConfig& cfg, std::size_t n_in,
                       std::size_t n_out);

/// All genes in genome order. Decoding is total: any genome gives a list,
/// possibly empty.
std::vector<GateBlueprint> decode_genes(const Genome& genome, const DecodeConfig& cfg);

} // namespace mb

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mb/rng.hpp"

namespace mb {

using Site = std::uint32_t;

/// Circular sequence of integer sites, each in [0, alphabet_max].
struct Genome {
    std::vector<Site> sites;
    Site alphabet_max = 255;

    std::size_t size() const noexcept { return sites.size(); }
    bool operator==(const Genome&) const = default;
};

struct MutationConfig {
    double point_rate = 0.005;
    double segment_delete_prob = 0.20;
    double segment_copy_prob = 0.20;
    std::size_t segment_min = 256;
    std::size_t segment_max = 512;
    std::size_t genome_min = 1000;
    std::size_t genome_max = 20000;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// Raised by load_genome and the other text loaders. `offset` is the byte
/// position in the input where the problem was detected.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset);
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Maps a site onto [lo, hi] as lo + value mod (hi - lo + 1).
/// Throws std::invalid_argument when lo > hi.
std::size_t map_site(std::uint64_t value, std::size_t lo, std::size_t hi);

Genome random_genome(std::size_t length, Site alphabet_max, Rng& rng,
                     std::size_t max_length = MutationConfig{}.genome_max);

/// Each site is independently redrawn from [0, alphabet_max] with
/// probability cfg.point_rate. A redraw may return the old value.
Genome point_mutate(Genome genome, const MutationConfig& cfg, Rng& rng);

/// Removes a contiguous run of [segment_min, segment_max] sites with
/// probability segment_delete_prob, only when the genome is longer than
/// genome_min. The run is shortened so the result never drops below
/// genome_min.
Genome segment_delete(Genome genome, const MutationConfig& cfg, Rng& rng);

/// Copies a contiguous run of [segment_min, segment_max] sites and inserts
/// it at a uniformly chosen point, with probability segment_copy_prob, only
/// when the genome is shorter than genome_max. May overshoot genome_max by
/// less than segment_max sites.
Genome segment_copy(Genome genome, const MutationConfig& cfg, Rng& rng);

/// Trims trailing sites so the genome is no longer than genome_max.
Genome clamp_length(Genome genome, const MutationConfig& cfg);

/// point_mutate -> segment_delete -> segment_copy -> clamp_length.
Genome replicate(const Genome& parent, const MutationConfig& cfg, Rng& rng);

// Text format:
//   MBGENOME v1 alphabet=<max> length=<n>
//   <site> <site> ...
void save_genome(const Genome& genome, std::ostream& out);
std::string save_genome(const Genome& genome);
Genome load_genome(std::istream& in);
Genome load_genome_string(const std::string& text);

} // namespace mb

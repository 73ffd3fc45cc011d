#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mb/decoder.hpp"
#include "mb/genome.hpp"
#include "mb/rng.hpp"
#include "mb/tasks.hpp"

namespace mb {

struct Organism {
    std::uint64_t id = 0;
    Genome genome;
    std::optional<double> fitness;
    /// -1 for founders.
    std::int64_t parent_id = -1;
    /// Decoded gate count, filled in by evaluation.
    std::size_t n_gates = 0;
};

using Population = std::vector<Organism>;

enum class SelectionMethod { Tournament, Roulette };

struct Selection {
    SelectionMethod method = SelectionMethod::Tournament;
    std::size_t tournament_k = 5;
};

struct EvolutionConfig {
    std::size_t population_size = 100;
    std::size_t generations = 1000;
    Selection selection;
    std::size_t elitism = 1;
    MutationConfig mutation;
    DecodeConfig decode;
    TaskConfig task;
    std::uint64_t seed = 1;
    std::size_t initial_length = 5000;
    Site alphabet_max = 255;
    /// Start codons of each enabled gate kind planted in every founder.
    std::size_t seeded_codons = 4;
    /// Lifetimes averaged per fitness evaluation.
    int repeats = 3;
    bool zero_outputs_before_update = false;

    void validate() const;
};

/// Founder genome: random sites with `seeded_codons` copies of every
/// enabled start codon written at random positions.
Genome founder_genome(const EvolutionConfig& cfg, Rng& rng);

/// Fitness of every organism for generation `generation`. The task
/// environment depends only on cfg.seed, so it is shared by all organisms
/// and generations; stochastic gates get per-organism substreams. Results
/// do not depend on `jobs`.
std::vector<double> evaluate_population(Population& pop, const EvolutionConfig& cfg,
                                        const Task& task, std::size_t generation,
                                        unsigned jobs = 1);

/// Index of the chosen parent. Reads only fitness and id.
std::size_t select_parent(const Population& pop, const Selection& sel, Rng& rng);

/// Elites (by fitness, ties to lower id) carried over unchanged, remaining
/// slots filled with mutated offspring of selected parents.
Population next_generation(const Population& pop, const EvolutionConfig& cfg, Rng& rng,
                           std::uint64_t& next_id);

struct GenerationStats {
    std::size_t generation = 0;
    double max_fitness = 0.0;
    double mean_fitness = 0.0;
    double min_fitness = 0.0;
    double mean_genome_length = 0.0;
    double mean_gates = 0.0;
};

GenerationStats summarize(const Population& pop, std::size_t generation);

struct RunRecord {
    std::vector<GenerationStats> stats;
    /// The last evaluated generation.
    Population final_population;
};

struct EvolveOptions {
    unsigned jobs = 1;
    /// Stats, snapshots and the final population go here when set.
    std::optional<std::filesystem::path> out_dir;
    /// Snapshot every this many generations (0 disables).
    std::size_t snapshot_every = 100;
    /// Called after each generation is evaluated; returning true ends the
    /// run early.
    std::function<bool(const GenerationStats&)> stop;
};

/// Generational loop: evaluate, log, breed; `generations` breeding steps,
/// so generations + 1 stats rows. Throws std::filesystem::filesystem_error
/// if the output directory is not writable, before any work is done.
RunRecord evolve(const EvolutionConfig& cfg, const EvolveOptions& opts = {});

void write_stats_header(std::ostream& out);
void write_stats_row(const GenerationStats& s, std::ostream& out);

/// Directory with one genome file per organism plus manifest.csv
/// (`id,fitness,parent_id,n_gates,file`).
void save_population(const Population& pop, const std::filesystem::path& dir);
Population load_population(const std::filesystem::path& dir);

} // namespace mb

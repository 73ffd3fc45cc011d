#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mb/brain.hpp"
#include "mb/tasks.hpp"

namespace mb {

// --- state-to-state transitions -------------------------------------------

struct TransitionMatrix {
    using Key = std::pair<std::uint64_t, std::uint64_t>;  // (state, input symbol)

    std::map<Key, std::map<std::uint64_t, std::size_t>> counts;

    double probability(std::uint64_t state, std::uint64_t input, std::uint64_t next) const;
    std::size_t visits(std::uint64_t state, std::uint64_t input) const;
};

/// Counts (state, input) -> next-state transitions over recorded lifetimes.
/// The input symbol is the discretized percept as a bit pattern; states are
/// the brain's non-input labels. Throws std::invalid_argument when no
/// transition is present.
TransitionMatrix transition_matrix(const std::vector<BehaviorLog>& traces);

/// `state,input,next_state,prob,count`
void write_transitions_csv(const TransitionMatrix& tm, std::ostream& out);

// --- connectivity ------------------------------------------------------------

using Connection = std::pair<std::size_t, std::size_t>;

/// Directed node pairs (a, b) such that some gate reads a and writes b.
std::set<Connection> connections(const BrainSpec& spec);
/// Nodes read or written by at least one gate.
std::set<std::size_t> active_nodes(const BrainSpec& spec);

/// |connections| / |active nodes|^2; 0 for a gate-less brain.
double density(const BrainSpec& spec);

struct BrainStats {
    std::size_t n_gates = 0;
    std::size_t n_active_nodes = 0;
    std::size_t n_unique_connections = 0;
    std::size_t genome_length = 0;
    /// Longest finite shortest path, self-loops ignored.
    std::size_t graph_diameter = 0;
};

BrainStats brain_stats(const BrainSpec& spec, const Genome& genome);
void write_stats_csv(const BrainStats& s, std::ostream& out);

enum class DotMode { Layered, Condensed };

/// Layered: buffer at t, gate boxes, buffer at t+1. Condensed: active nodes
/// with one edge per connection. Inputs are drawn as green boxes, outputs as
/// red double circles.
std::string export_dot(const BrainSpec& spec, DotMode mode);

// --- knockouts -------------------------------------------------------------------

struct Seeds {
    std::uint64_t env = 0;
    std::uint64_t brain = 0;
};

struct KnockoutResult {
    double wild_type = 0.0;
    double knockout = 0.0;
    /// Set when the knockout overrides something the world writes.
    std::optional<std::string> warning;
};

/// Fitness with and without gate `gate_index`. Throws std::invalid_argument
/// when the index is out of range.
KnockoutResult knockout_gate(const BrainSpec& spec, std::size_t gate_index, const Task& task,
                             Seeds seeds, int repeats = 1);

std::vector<KnockoutResult> knockout_all_gates(const BrainSpec& spec, const Task& task,
                                               Seeds seeds, int repeats = 1);

/// Fitness with `node` forced to 0, 1 or a random bit after every input
/// write and update.
KnockoutResult clamp_node(const BrainSpec& spec, std::size_t node, ClampMode mode,
                          const Task& task, Seeds seeds, int repeats = 1);

// --- mutational robustness ------------------------------------------------------

struct RobustnessPoint {
    std::size_t mutations = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t samples = 0;
};

/// For m = 0..max_mutations: `samples` mutants with exactly m point
/// mutations at distinct sites (each new value differs from the old), and
/// their mean and population standard deviation of fitness.
std::vector<RobustnessPoint> robustness_curve(const Genome& genome, const DecodeConfig& decode,
                                              const Task& task, const BrainLayout& layout,
                                              std::size_t max_mutations, std::size_t samples,
                                              Rng& rng, Seeds seeds, int repeats = 1);

/// `m,mean,std,K`
void write_robustness_csv(const std::vector<RobustnessPoint>& curve, std::ostream& out);

} // namespace mb

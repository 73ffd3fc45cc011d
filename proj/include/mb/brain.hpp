#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mb/decoder.hpp"
#include "mb/gates.hpp"
#include "mb/genome.hpp"

namespace mb {

/// Which buffer nodes the world writes and which it reads.
struct BrainLayout {
    std::size_t n_nodes = 16;
    std::vector<std::size_t> inputs;
    std::vector<std::size_t> outputs;
    /// Zero the output nodes before each update (no proprioception).
    bool zero_outputs_before_update = false;

    /// Inputs occupy nodes [0, n_in), outputs the next n_out nodes.
    static BrainLayout standard(std::size_t n_nodes, std::size_t n_in, std::size_t n_out,
                                bool zero_outputs_before_update = false);
    void validate() const;
};

/// Everything needed to build a Brain: the layout plus the gate list.
struct BrainSpec {
    BrainLayout layout;
    std::vector<GateBlueprint> gates;
};

enum class ClampMode { Zero, One, Random };

struct NodeClamp {
    std::size_t node;
    ClampMode mode;
};

/// State buffer plus gates. A Brain is single-threaded mutable state.
class Brain {
public:
    explicit Brain(BrainSpec spec);

    /// Quiescent state: buffer all zeros, gate state back to lifetime start.
    /// `lifetime_seed` keys the random substreams of stochastic gates.
    void reset(std::uint64_t lifetime_seed = 0);

    /// Writes the percept into the input nodes. Throws std::invalid_argument
    /// on a size mismatch.
    void set_inputs(std::span<const double> percept);

    /// One parallel t -> t+1 update. Every gate reads the same snapshot and
    /// adds its outputs into a zeroed next buffer.
    void update();

    std::vector<double> read_outputs() const;

    std::span<const double> buffer() const noexcept { return buffer_; }
    const BrainLayout& layout() const noexcept { return spec_.layout; }
    const BrainSpec& spec() const noexcept { return spec_; }
    std::vector<Gate>& gates() noexcept { return gates_; }
    const std::vector<Gate>& gates() const noexcept { return gates_; }
    std::uint64_t updates() const noexcept { return update_count_; }

    /// True when any gate samples random numbers.
    bool is_stochastic() const noexcept;

    /// Node overwritten after every set_inputs and update. Used for
    /// knockout analysis.
    void set_clamp(std::optional<NodeClamp> clamp);

    /// Discretized non-input nodes as an integer: the k-th non-input node
    /// (in buffer order) contributes 2^k. Requires at most 64 such nodes.
    std::uint64_t state_label() const;

private:
    void apply_clamp(std::uint64_t phase);

    BrainSpec spec_;
    std::vector<Gate> gates_;
    std::vector<double> buffer_;
    std::vector<double> next_;
    std::vector<Gate*> order_;
    std::vector<std::size_t> label_nodes_;
    std::optional<NodeClamp> clamp_;
    std::uint64_t seed_ = 0;
    std::uint64_t update_count_ = 0;
};

/// One perception-action step: write the percept, run `ticks` updates with
/// the inputs re-written before each, return the raw outputs.
std::vector<double> step_agent(Brain& brain, std::span<const double> percept, int ticks);

BrainSpec decode_brain_spec(const Genome& genome, const DecodeConfig& cfg,
                            const BrainLayout& layout);
Brain decode_brain(const Genome& genome, const DecodeConfig& cfg, const BrainLayout& layout);

} // namespace mb

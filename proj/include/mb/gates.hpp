#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mb/genome.hpp"
#include "mb/rng.hpp"

namespace mb {

enum class GateKind : std::uint8_t {
    Deterministic,
    Probabilistic,
    Ann,
    Threshold,
    Timer,
    Feedback,
    TernaryDeterministic,
    TernaryProbabilistic,
};

inline constexpr std::array<GateKind, 8> kAllGateKinds = {
    GateKind::Deterministic,       GateKind::Probabilistic, GateKind::Ann,
    GateKind::Threshold,           GateKind::Timer,         GateKind::Feedback,
    GateKind::TernaryDeterministic, GateKind::TernaryProbabilistic,
};

std::string_view to_string(GateKind kind) noexcept;
std::optional<GateKind> parse_gate_kind(std::string_view name) noexcept;

constexpr bool is_ternary(GateKind k) noexcept
{
    return k == GateKind::TernaryDeterministic || k == GateKind::TernaryProbabilistic;
}

// Evolvable parameter ranges decoded from single payload sites.
inline constexpr int kThresholdMin = 1;
inline constexpr int kThresholdMax = 16;
inline constexpr int kTimerMin = 1;
inline constexpr int kTimerMax = 64;
inline constexpr int kFeedbackMemoryMin = 1;
inline constexpr int kFeedbackMemoryMax = 8;
inline constexpr double kFeedbackDeltaMin = 0.01;
inline constexpr double kFeedbackDeltaMax = 0.5;

/// Row-major matrix of output-pattern probabilities; one row per input
/// pattern. Every row sums to 1.
struct ProbabilityTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> p;

    std::span<const double> row(std::size_t r) const { return {p.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {p.data() + r * cols, cols}; }
    double at(std::size_t r, std::size_t c) const { return p[r * cols + c]; }
    bool operator==(const ProbabilityTable&) const = default;
};

/// Maps each input pattern to one output pattern. Binary tables have
/// 2^n_in entries in [0, 2^n_out); ternary tables 3^n_in entries in
/// [0, 3^n_out).
struct LogicTable {
    std::vector<std::uint32_t> rows;
    bool operator==(const LogicTable&) const = default;
};

/// weights[j * n_in + i] connects gate input i to gate output j.
struct WeightMatrix {
    std::size_t n_out = 0;
    std::size_t n_in = 0;
    std::vector<double> weights;

    double at(std::size_t j, std::size_t i) const { return weights[j * n_in + i]; }
    bool operator==(const WeightMatrix&) const = default;
};

struct ThresholdParams {
    int threshold = 1;
    bool operator==(const ThresholdParams&) const = default;
};

struct TimerParams {
    int period = 1;
    bool operator==(const TimerParams&) const = default;
};

struct FeedbackParams {
    ProbabilityTable table;
    int memory = 1;
    double delta_max = kFeedbackDeltaMin;
    double floor = 0.01;
    std::size_t pos_node = 0;
    std::size_t neg_node = 0;
    bool operator==(const FeedbackParams&) const = default;
};

using Payload = std::variant<LogicTable, ProbabilityTable, WeightMatrix, ThresholdParams,
                             TimerParams, FeedbackParams>;

/// One decoded gene: connections plus the kind-specific function.
struct GateBlueprint {
    GateKind kind = GateKind::Deterministic;
    std::vector<std::size_t> inputs;
    std::vector<std::size_t> outputs;
    Payload payload;
    /// Genome position of the start codon and the gene length in sites,
    /// codon included.
    std::size_t span_start = 0;
    std::size_t span_length = 0;

    bool operator==(const GateBlueprint&) const = default;
};

/// Buffer nodes a gate actually reads: its inputs (none for timers) plus the
/// feedback reward/punish nodes.
std::vector<std::size_t> nodes_read(const GateBlueprint& bp);

/// Limits needed to turn payload sites into a gate function.
struct PayloadLimits {
    std::size_t max_in = 4;
    std::size_t max_out = 4;
    std::size_t n_nodes = 16;
    Site alphabet_max = 255;
    double weight_lo = -1.0;
    double weight_hi = 1.0;
    double feedback_floor = 0.01;
};

/// Number of payload sites following the address block. Only the ternary
/// probabilistic width depends on the actual n_in/n_out.
std::size_t payload_width(GateKind kind, const PayloadLimits& lim, std::size_t n_in,
                          std::size_t n_out);

Payload decode_payload(GateKind kind, std::span<const Site> sites, std::size_t n_in,
                       std::size_t n_out, const PayloadLimits& lim);

/// Linear map of a site from [0, alphabet_max] onto [lo, hi].
double map_site_linear(Site value, Site alphabet_max, double lo, double hi);

// --- discretizers --------------------------------------------------------

constexpr int discretize_binary(double x) noexcept { return x > 0.0 ? 1 : 0; }

constexpr int discretize_ternary(double x) noexcept
{
    return x >= 1.0 ? 1 : (x <= -1.0 ? -1 : 0);
}

// --- table helpers -------------------------------------------------------

/// Divides by the row sum; an all-zero row becomes uniform.
/// Throws std::invalid_argument on negative entries.
std::vector<double> normalize_row(std::span<const double> raw);
void normalize_row_in_place(std::span<double> row);

/// Input bit i contributes 2^i to the row index.
std::uint32_t binary_index(std::span<const int> bits);
/// Trit t in {-1,0,1} at position i contributes (t+1)*3^i.
std::uint32_t ternary_index(std::span<const int> trits);
std::vector<int> pattern_to_bits(std::uint32_t pattern, std::size_t n);
std::vector<int> pattern_to_trits(std::uint32_t pattern, std::size_t n);

/// Inverse-CDF lookup of `u` in [0,1). Falls through to the last column so a
/// row summing to slightly less than one always yields an outcome.
std::uint32_t sample_row(std::span<const double> row, double u) noexcept;

// --- per-kind evaluation -------------------------------------------------

std::vector<int> eval_deterministic(const LogicTable& table, std::span<const int> inputs,
                                    std::size_t n_out);
std::vector<int> eval_probabilistic(const ProbabilityTable& table, std::span<const int> inputs,
                                    std::size_t n_out, SplitMix64& rng);
/// output_j = tanh(sum_i inputs_i * W_ji), on raw (undiscretized) values.
std::vector<double> eval_ann(const WeightMatrix& w, std::span<const double> inputs);

struct ThresholdState {
    int threshold = 1;
    int accumulator = 0;
};
/// Accumulates active inputs; returns true (all outputs 1) when the
/// accumulator reaches the threshold, resetting it.
bool eval_threshold(ThresholdState& state, std::span<const double> inputs);

struct TimerState {
    int period = 1;
    int counter = 0;
};
/// Advances the counter; returns true every `period` updates.
bool eval_timer(TimerState& state);

struct FeedbackState {
    ProbabilityTable table;
    std::size_t memory = 1;
    double delta_max = kFeedbackDeltaMin;
    double floor = 0.01;
    /// (input pattern, output pattern) pairs, oldest first.
    std::deque<std::pair<std::uint32_t, std::uint32_t>> history;

    static FeedbackState from(const FeedbackParams& p);
};

/// Applies pending reward/punishment to the remembered mappings (oldest
/// first), then samples an output pattern for `input_index` and remembers
/// the new mapping.
std::uint32_t eval_feedback(FeedbackState& state, std::uint32_t input_index, bool pos, bool neg,
                            SplitMix64& rng);

std::vector<int> eval_ternary_deterministic(const LogicTable& table, std::span<const int> trits,
                                            std::size_t n_out);
std::vector<int> eval_ternary_probabilistic(const ProbabilityTable& table,
                                            std::span<const int> trits, std::size_t n_out,
                                            SplitMix64& rng);

/// A gate plus its lifetime state. `stream_id` keys the gate's random
/// substream so results do not depend on its position in the gate list.
class Gate {
public:
    Gate(GateBlueprint blueprint, std::uint64_t stream_id);

    const GateBlueprint& blueprint() const noexcept { return bp_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Back to lifetime-start state: counters zeroed, feedback memory
    /// cleared, feedback table restored from the blueprint.
    void reset();

    /// Reads `now`, adds this gate's outputs into `next`.
    void evaluate(std::span<const double> now, std::span<double> next, SplitMix64& rng);

    bool is_stochastic() const noexcept;

    const ThresholdState* threshold_state() const noexcept
    {
        return std::get_if<ThresholdState>(&state_);
    }
    const TimerState* timer_state() const noexcept { return std::get_if<TimerState>(&state_); }
    const FeedbackState* feedback_state() const noexcept
    {
        return std::get_if<FeedbackState>(&state_);
    }

private:
    GateBlueprint bp_;
    std::uint64_t stream_id_;
    std::variant<std::monostate, ThresholdState, TimerState, FeedbackState> state_;
};

// Decoded-brain dump, one line per gate:
//   GATE <kind> in=<i1,i2,..> out=<o1,..> payload=<csv>
std::string format_gate(const GateBlueprint& bp);
/// Inverse of format_gate. Genome span fields come back as zero.
GateBlueprint parse_gate(std::string_view line);

} // namespace mb

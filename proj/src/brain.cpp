#include "mb/brain.hpp"

#include <algorithm>
#include <stdexcept>

namespace mb {

namespace {

// Substream key for clamp mode Random; gate stream ids never reach it.
constexpr std::uint64_t kClampStream = ~std::uint64_t{0};

void check_node(std::size_t node, std::size_t n_nodes)
{
    if (node >= n_nodes) {
        throw std::invalid_argument("node index " + std::to_string(node) + " out of range");
    }
}

} // namespace

BrainLayout BrainLayout::standard(std::size_t n_nodes, std::size_t n_in, std::size_t n_out,
                                  bool zero_outputs_before_update)
{
    BrainLayout l;
    l.n_nodes = n_nodes;
    for (std::size_t i = 0; i < n_in; ++i) {
        l.inputs.push_back(i);
    }
    for (std::size_t j = 0; j < n_out; ++j) {
        l.outputs.push_back(n_in + j);
    }
    l.zero_outputs_before_update = zero_outputs_before_update;
    l.validate();
    return l;
}

void BrainLayout::validate() const
{
    for (auto i : inputs) {
        check_node(i, n_nodes);
    }
    for (auto o : outputs) {
        check_node(o, n_nodes);
        if (std::find(inputs.begin(), inputs.end(), o) != inputs.end()) {
            throw std::invalid_argument("a node cannot be both input and output");
        }
    }
}

Brain::Brain(BrainSpec spec) : spec_(std::move(spec))
{
    const auto& l = spec_.layout;
    l.validate();
    gates_.reserve(spec_.gates.size());
    for (std::size_t g = 0; g < spec_.gates.size(); ++g) {
        const auto& bp = spec_.gates[g];
        for (auto n : bp.inputs) {
            check_node(n, l.n_nodes);
        }
        for (auto n : bp.outputs) {
            check_node(n, l.n_nodes);
        }
        for (auto n : nodes_read(bp)) {
            check_node(n, l.n_nodes);
        }
        gates_.emplace_back(bp, g);
    }
    for (std::size_t n = 0; n < l.n_nodes; ++n) {
        if (std::find(l.inputs.begin(), l.inputs.end(), n) == l.inputs.end()) {
            label_nodes_.push_back(n);
        }
    }
    buffer_.assign(l.n_nodes, 0.0);
    next_.assign(l.n_nodes, 0.0);
}

void Brain::reset(std::uint64_t lifetime_seed)
{
    std::fill(buffer_.begin(), buffer_.end(), 0.0);
    for (auto& g : gates_) {
        g.reset();
    }
    seed_ = lifetime_seed;
    update_count_ = 0;
    apply_clamp(0);
}

void Brain::set_inputs(std::span<const double> percept)
{
    const auto& in = spec_.layout.inputs;
    if (percept.size() != in.size()) {
        throw std::invalid_argument("set_inputs: expected " + std::to_string(in.size())
                                    + " values, got " + std::to_string(percept.size()));
    }
    for (std::size_t i = 0; i < in.size(); ++i) {
        buffer_[in[i]] = percept[i];
    }
    apply_clamp(1);
}

void Brain::update()
{
    if (spec_.layout.zero_outputs_before_update) {
        for (auto o : spec_.layout.outputs) {
            buffer_[o] = 0.0;
        }
    }
    std::fill(next_.begin(), next_.end(), 0.0);
    // Writes are summed in stream order so the result does not depend on
    // the position of gates in gates_.
    order_.clear();
    for (auto& g : gates_) {
        order_.push_back(&g);
    }
    std::sort(order_.begin(), order_.end(),
              [](const Gate* a, const Gate* b) { return a->stream_id() < b->stream_id(); });
    for (Gate* g : order_) {
        SplitMix64 rng(g->is_stochastic() ? derive_seed(seed_, {g->stream_id(), update_count_})
                                          : 0);
        g->evaluate(buffer_, next_, rng);
    }
    buffer_.swap(next_);
    ++update_count_;
    apply_clamp(2);
}

std::vector<double> Brain::read_outputs() const
{
    std::vector<double> out;
    out.reserve(spec_.layout.outputs.size());
    for (auto o : spec_.layout.outputs) {
        out.push_back(buffer_[o]);
    }
    return out;
}

bool Brain::is_stochastic() const noexcept
{
    return std::any_of(gates_.begin(), gates_.end(),
                       [](const Gate& g) { return g.is_stochastic(); })
        || (clamp_ && clamp_->mode == ClampMode::Random);
}

void Brain::set_clamp(std::optional<NodeClamp> clamp)
{
    if (clamp) {
        check_node(clamp->node, spec_.layout.n_nodes);
    }
    clamp_ = clamp;
    apply_clamp(0);
}

void Brain::apply_clamp(std::uint64_t phase)
{
    if (!clamp_) {
        return;
    }
    double v = 0.0;
    switch (clamp_->mode) {
    case ClampMode::Zero:
        v = 0.0;
        break;
    case ClampMode::One:
        v = 1.0;
        break;
    case ClampMode::Random: {
        SplitMix64 rng(derive_seed(seed_, {kClampStream, update_count_, phase}));
        v = static_cast<double>(rng() >> 63);
        break;
    }
    }
    buffer_[clamp_->node] = v;
}

std::uint64_t Brain::state_label() const
{
    if (label_nodes_.size() > 64) {
        throw std::length_error("state_label: more than 64 non-input nodes");
    }
    std::uint64_t label = 0;
    for (std::size_t k = 0; k < label_nodes_.size(); ++k) {
        label |= static_cast<std::uint64_t>(discretize_binary(buffer_[label_nodes_[k]])) << k;
    }
    return label;
}

std::vector<double> step_agent(Brain& brain, std::span<const double> percept, int ticks)
{
    if (ticks < 1) {
        throw std::invalid_argument("step_agent: ticks must be >= 1");
    }
    for (int t = 0; t < ticks; ++t) {
        brain.set_inputs(percept);
        brain.update();
    }
    return brain.read_outputs();
}

BrainSpec decode_brain_spec(const Genome& genome, const DecodeConfig& cfg,
                            const BrainLayout& layout)
{
    if (layout.n_nodes != cfg.n_nodes) {
        throw std::invalid_argument("decode_brain: layout and decode config disagree on n_nodes");
    }
    return BrainSpec{layout, decode_genes(genome, cfg)};
}

Brain decode_brain(const Genome& genome, const DecodeConfig& cfg, const BrainLayout& layout)
{
    return Brain(decode_brain_spec(genome, cfg, layout));
}

} // namespace mb

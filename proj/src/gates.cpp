#include "mb/gates.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mb {

namespace {

constexpr std::array<std::string_view, 8> kKindNames = {
    "deterministic", "probabilistic", "ann",
    "threshold",     "timer",         "feedback",
    "ternary_deterministic", "ternary_probabilistic",
};

std::size_t ipow(std::size_t base, std::size_t exp)
{
    std::size_t r = 1;
    while (exp-- > 0) {
        r *= base;
    }
    return r;
}

ProbabilityTable decode_table(std::span<const Site> sites, std::size_t rows, std::size_t cols,
                              std::size_t stride)
{
    ProbabilityTable t;
    t.rows = rows;
    t.cols = cols;
    t.p.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        auto row = t.row(r);
        for (std::size_t c = 0; c < cols; ++c) {
            row[c] = static_cast<double>(sites[r * stride + c]);
        }
        normalize_row_in_place(row);
    }
    return t;
}

void add_bits(std::uint32_t pattern, std::span<const std::size_t> outputs, std::span<double> next)
{
    for (std::size_t j = 0; j < outputs.size(); ++j) {
        next[outputs[j]] += static_cast<double>((pattern >> j) & 1U);
    }
}

void add_trits(std::uint32_t pattern, std::span<const std::size_t> outputs, std::span<double> next)
{
    for (std::size_t j = 0; j < outputs.size(); ++j) {
        next[outputs[j]] += static_cast<double>(static_cast<int>(pattern % 3) - 1);
        pattern /= 3;
    }
}

void add_all(double value, std::span<const std::size_t> outputs, std::span<double> next)
{
    for (auto o : outputs) {
        next[o] += value;
    }
}

std::uint32_t read_binary(std::span<const std::size_t> inputs, std::span<const double> now)
{
    std::uint32_t idx = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        idx |= static_cast<std::uint32_t>(discretize_binary(now[inputs[i]])) << i;
    }
    return idx;
}

std::uint32_t read_ternary(std::span<const std::size_t> inputs, std::span<const double> now)
{
    std::uint32_t idx = 0;
    std::uint32_t w = 1;
    for (auto in : inputs) {
        idx += static_cast<std::uint32_t>(discretize_ternary(now[in]) + 1) * w;
        w *= 3;
    }
    return idx;
}

} // namespace

std::string_view to_string(GateKind kind) noexcept
{
    return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<GateKind> parse_gate_kind(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) {
            return kAllGateKinds[i];
        }
    }
    return std::nullopt;
}

std::vector<std::size_t> nodes_read(const GateBlueprint& bp)
{
    std::vector<std::size_t> nodes;
    if (bp.kind != GateKind::Timer) {
        nodes = bp.inputs;
    }
    if (const auto* fb = std::get_if<FeedbackParams>(&bp.payload)) {
        nodes.push_back(fb->pos_node);
        nodes.push_back(fb->neg_node);
    }
    return nodes;
}

std::size_t payload_width(GateKind kind, const PayloadLimits& lim, std::size_t n_in,
                          std::size_t n_out)
{
    switch (kind) {
    case GateKind::Deterministic:
        return ipow(2, lim.max_in);
    case GateKind::Probabilistic:
        return ipow(2, lim.max_in) * ipow(2, lim.max_out);
    case GateKind::Ann:
        return lim.max_in * lim.max_out;
    case GateKind::Threshold:
    case GateKind::Timer:
        return 1;
    case GateKind::Feedback:
        return 4 + ipow(2, lim.max_in) * ipow(2, lim.max_out);
    case GateKind::TernaryDeterministic:
        return ipow(3, lim.max_in);
    case GateKind::TernaryProbabilistic:
        return ipow(3, n_in) * ipow(3, n_out);
    }
    return 0;
}

double map_site_linear(Site value, Site alphabet_max, double lo, double hi)
{
    if (alphabet_max == 0) {
        return 0.5 * (lo + hi);
    }
    return lo + (hi - lo) * static_cast<double>(value) / static_cast<double>(alphabet_max);
}

Payload decode_payload(GateKind kind, std::span<const Site> sites, std::size_t n_in,
                       std::size_t n_out, const PayloadLimits& lim)
{
    if (sites.size() < payload_width(kind, lim, n_in, n_out)) {
        throw std::invalid_argument("decode_payload: not enough payload sites");
    }
    switch (kind) {
    case GateKind::Deterministic: {
        LogicTable t;
        const std::size_t n_patterns = ipow(2, n_out);
        t.rows.resize(ipow(2, n_in));
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            t.rows[r] = static_cast<std::uint32_t>(sites[r] % n_patterns);
        }
        return t;
    }
    case GateKind::Probabilistic:
        return decode_table(sites, ipow(2, n_in), ipow(2, n_out), ipow(2, lim.max_out));
    case GateKind::Ann: {
        WeightMatrix w;
        w.n_out = n_out;
        w.n_in = n_in;
        w.weights.resize(n_out * n_in);
        for (std::size_t j = 0; j < n_out; ++j) {
            for (std::size_t i = 0; i < n_in; ++i) {
                w.weights[j * n_in + i] = map_site_linear(sites[j * lim.max_in + i],
                                                          lim.alphabet_max, lim.weight_lo,
                                                          lim.weight_hi);
            }
        }
        return w;
    }
    case GateKind::Threshold:
        return ThresholdParams{static_cast<int>(map_site(sites[0], kThresholdMin, kThresholdMax))};
    case GateKind::Timer:
        return TimerParams{static_cast<int>(map_site(sites[0], kTimerMin, kTimerMax))};
    case GateKind::Feedback: {
        FeedbackParams fb;
        fb.memory = static_cast<int>(map_site(sites[0], kFeedbackMemoryMin, kFeedbackMemoryMax));
        fb.delta_max =
            map_site_linear(sites[1], lim.alphabet_max, kFeedbackDeltaMin, kFeedbackDeltaMax);
        fb.floor = lim.feedback_floor;
        fb.pos_node = sites[2] % lim.n_nodes;
        fb.neg_node = sites[3] % lim.n_nodes;
        fb.table =
            decode_table(sites.subspan(4), ipow(2, n_in), ipow(2, n_out), ipow(2, lim.max_out));
        return fb;
    }
    case GateKind::TernaryDeterministic: {
        LogicTable t;
        const std::size_t n_patterns = ipow(3, n_out);
        t.rows.resize(ipow(3, n_in));
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            t.rows[r] = static_cast<std::uint32_t>(sites[r] % n_patterns);
        }
        return t;
    }
    case GateKind::TernaryProbabilistic: {
        const std::size_t cols = ipow(3, n_out);
        return decode_table(sites, ipow(3, n_in), cols, cols);
    }
    }
    throw std::invalid_argument("decode_payload: unknown gate kind");
}

std::vector<double> normalize_row(std::span<const double> raw)
{
    std::vector<double> out(raw.begin(), raw.end());
    normalize_row_in_place(out);
    return out;
}

void normalize_row_in_place(std::span<double> row)
{
    double sum = 0.0;
    for (double v : row) {
        if (v < 0.0) {
            throw std::invalid_argument("normalize_row: negative entry");
        }
        sum += v;
    }
    if (sum == 0.0) {
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
        return;
    }
    for (double& v : row) {
        v /= sum;
    }
}

std::uint32_t binary_index(std::span<const int> bits)
{
    std::uint32_t idx = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        idx |= static_cast<std::uint32_t>(bits[i] != 0) << i;
    }
    return idx;
}

std::uint32_t ternary_index(std::span<const int> trits)
{
    std::uint32_t idx = 0;
    std::uint32_t w = 1;
    for (int t : trits) {
        idx += static_cast<std::uint32_t>(std::clamp(t, -1, 1) + 1) * w;
        w *= 3;
    }
    return idx;
}

std::vector<int> pattern_to_bits(std::uint32_t pattern, std::size_t n)
{
    std::vector<int> bits(n);
    for (std::size_t j = 0; j < n; ++j) {
        bits[j] = static_cast<int>((pattern >> j) & 1U);
    }
    return bits;
}

std::vector<int> pattern_to_trits(std::uint32_t pattern, std::size_t n)
{
    std::vector<int> trits(n);
    for (std::size_t j = 0; j < n; ++j) {
        trits[j] = static_cast<int>(pattern % 3) - 1;
        pattern /= 3;
    }
    return trits;
}

std::uint32_t sample_row(std::span<const double> row, double u) noexcept
{
    double acc = 0.0;
    std::uint32_t last_nonzero = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (row[c] > 0.0) {
            last_nonzero = static_cast<std::uint32_t>(c);
        }
        acc += row[c];
        if (u < acc) {
            return static_cast<std::uint32_t>(c);
        }
    }
    return last_nonzero;
}

std::vector<int> eval_deterministic(const LogicTable& table, std::span<const int> inputs,
                                    std::size_t n_out)
{
    return pattern_to_bits(table.rows.at(binary_index(inputs)), n_out);
}

std::vector<int> eval_probabilistic(const ProbabilityTable& table, std::span<const int> inputs,
                                    std::size_t n_out, SplitMix64& rng)
{
    return pattern_to_bits(sample_row(table.row(binary_index(inputs)), uniform01(rng)), n_out);
}

std::vector<double> eval_ann(const WeightMatrix& w, std::span<const double> inputs)
{
    if (inputs.size() != w.n_in) {
        throw std::invalid_argument("eval_ann: input count mismatch");
    }
    std::vector<double> out(w.n_out);
    for (std::size_t j = 0; j < w.n_out; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < w.n_in; ++i) {
            sum += inputs[i] * w.at(j, i);
        }
        out[j] = std::tanh(sum);
    }
    return out;
}

bool eval_threshold(ThresholdState& state, std::span<const double> inputs)
{
    for (double x : inputs) {
        state.accumulator += discretize_binary(x);
    }
    if (state.accumulator >= state.threshold) {
        state.accumulator = 0;
        return true;
    }
    return false;
}

bool eval_timer(TimerState& state)
{
    state.counter = (state.counter + 1) % state.period;
    return state.counter == 0;
}

FeedbackState FeedbackState::from(const FeedbackParams& p)
{
    FeedbackState s;
    s.table = p.table;
    s.memory = static_cast<std::size_t>(std::max(p.memory, 1));
    s.delta_max = p.delta_max;
    s.floor = p.floor;
    return s;
}

std::uint32_t eval_feedback(FeedbackState& state, std::uint32_t input_index, bool pos, bool neg,
                            SplitMix64& rng)
{
    if (pos) {
        for (auto [in, out] : state.history) {
            auto row = state.table.row(in);
            row[out] += uniform01(rng) * state.delta_max;
            normalize_row_in_place(row);
        }
    }
    if (neg) {
        for (auto [in, out] : state.history) {
            auto row = state.table.row(in);
            row[out] -= uniform01(rng) * state.delta_max;
            for (double& v : row) {
                v = std::max(v, state.floor);
            }
            normalize_row_in_place(row);
        }
    }
    const std::uint32_t out = sample_row(state.table.row(input_index), uniform01(rng));
    state.history.emplace_back(input_index, out);
    while (state.history.size() > state.memory) {
        state.history.pop_front();
    }
    return out;
}

std::vector<int> eval_ternary_deterministic(const LogicTable& table, std::span<const int> trits,
                                            std::size_t n_out)
{
    return pattern_to_trits(table.rows.at(ternary_index(trits)), n_out);
}

std::vector<int> eval_ternary_probabilistic(const ProbabilityTable& table,
                                            std::span<const int> trits, std::size_t n_out,
                                            SplitMix64& rng)
{
    return pattern_to_trits(sample_row(table.row(ternary_index(trits)), uniform01(rng)), n_out);
}

// --- Gate ----------------------------------------------------------------

Gate::Gate(GateBlueprint blueprint, std::uint64_t stream_id)
    : bp_(std::move(blueprint)), stream_id_(stream_id)
{
    reset();
}

void Gate::reset()
{
    switch (bp_.kind) {
    case GateKind::Threshold:
        state_ = ThresholdState{std::get<ThresholdParams>(bp_.payload).threshold, 0};
        break;
    case GateKind::Timer:
        state_ = TimerState{std::get<TimerParams>(bp_.payload).period, 0};
        break;
    case GateKind::Feedback:
        state_ = FeedbackState::from(std::get<FeedbackParams>(bp_.payload));
        break;
    default:
        state_ = std::monostate{};
        break;
    }
}

bool Gate::is_stochastic() const noexcept
{
    return bp_.kind == GateKind::Probabilistic || bp_.kind == GateKind::Feedback
        || bp_.kind == GateKind::TernaryProbabilistic;
}

void Gate::evaluate(std::span<const double> now, std::span<double> next, SplitMix64& rng)
{
    const std::span<const std::size_t> ins = bp_.inputs;
    const std::span<const std::size_t> outs = bp_.outputs;
    switch (bp_.kind) {
    case GateKind::Deterministic: {
        const auto& t = std::get<LogicTable>(bp_.payload);
        add_bits(t.rows[read_binary(ins, now)], outs, next);
        break;
    }
    case GateKind::Probabilistic: {
        const auto& t = std::get<ProbabilityTable>(bp_.payload);
        add_bits(sample_row(t.row(read_binary(ins, now)), uniform01(rng)), outs, next);
        break;
    }
    case GateKind::Ann: {
        const auto& w = std::get<WeightMatrix>(bp_.payload);
        for (std::size_t j = 0; j < outs.size(); ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < ins.size(); ++i) {
                sum += now[ins[i]] * w.at(j, i);
            }
            next[outs[j]] += std::tanh(sum);
        }
        break;
    }
    case GateKind::Threshold: {
        auto& s = std::get<ThresholdState>(state_);
        for (auto in : ins) {
            s.accumulator += discretize_binary(now[in]);
        }
        if (s.accumulator >= s.threshold) {
            s.accumulator = 0;
            add_all(1.0, outs, next);
        }
        break;
    }
    case GateKind::Timer:
        if (eval_timer(std::get<TimerState>(state_))) {
            add_all(1.0, outs, next);
        }
        break;
    case GateKind::Feedback: {
        auto& s = std::get<FeedbackState>(state_);
        const auto& p = std::get<FeedbackParams>(bp_.payload);
        const bool pos = discretize_binary(now[p.pos_node]) != 0;
        const bool neg = discretize_binary(now[p.neg_node]) != 0;
        add_bits(eval_feedback(s, read_binary(ins, now), pos, neg, rng), outs, next);
        break;
    }
    case GateKind::TernaryDeterministic: {
        const auto& t = std::get<LogicTable>(bp_.payload);
        add_trits(t.rows[read_ternary(ins, now)], outs, next);
        break;
    }
    case GateKind::TernaryProbabilistic: {
        const auto& t = std::get<ProbabilityTable>(bp_.payload);
        add_trits(sample_row(t.row(read_ternary(ins, now)), uniform01(rng)), outs, next);
        break;
    }
    }
}

// --- dump format -----------------------------------------------------------

namespace {

void append_list(std::string& out, std::span<const std::size_t> xs)
{
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i != 0) {
            out += ',';
        }
        out += std::to_string(xs[i]);
    }
}

void append_double(std::string& out, double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

template <class T>
T parse_number(std::string_view tok, std::size_t offset)
{
    T v{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError("malformed number '" + std::string(tok) + "'", offset);
    }
    return v;
}

// Splits a comma-separated field; each element carries its byte offset.
std::vector<std::pair<std::string_view, std::size_t>> split_csv(std::string_view s,
                                                                std::size_t base)
{
    std::vector<std::pair<std::string_view, std::size_t>> out;
    if (s.empty()) {
        return out;
    }
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        const auto end = comma == std::string_view::npos ? s.size() : comma;
        out.emplace_back(s.substr(start, end - start), base + start);
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::string_view expect_field(std::string_view line, std::size_t& pos, std::string_view key)
{
    while (pos < line.size() && line[pos] == ' ') {
        ++pos;
    }
    if (line.substr(pos, key.size()) != key) {
        throw ParseError("expected '" + std::string(key) + "'", pos);
    }
    pos += key.size();
    const auto end = std::min(line.find(' ', pos), line.size());
    auto value = line.substr(pos, end - pos);
    pos = end;
    return value;
}

} // namespace

std::string format_gate(const GateBlueprint& bp)
{
    std::string out = "GATE ";
    out += to_string(bp.kind);
    out += " in=";
    append_list(out, bp.inputs);
    out += " out=";
    append_list(out, bp.outputs);
    out += " payload=";

    auto doubles = [&out](std::span<const double> xs) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i != 0) {
                out += ',';
            }
            append_double(out, xs[i]);
        }
    };
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, LogicTable>) {
                for (std::size_t i = 0; i < p.rows.size(); ++i) {
                    if (i != 0) {
                        out += ',';
                    }
                    out += std::to_string(p.rows[i]);
                }
            } else if constexpr (std::is_same_v<T, ProbabilityTable>) {
                doubles(p.p);
            } else if constexpr (std::is_same_v<T, WeightMatrix>) {
                doubles(p.weights);
            } else if constexpr (std::is_same_v<T, ThresholdParams>) {
                out += std::to_string(p.threshold);
            } else if constexpr (std::is_same_v<T, TimerParams>) {
                out += std::to_string(p.period);
            } else if constexpr (std::is_same_v<T, FeedbackParams>) {
                out += std::to_string(p.memory);
                out += ',';
                append_double(out, p.delta_max);
                out += ',';
                append_double(out, p.floor);
                out += ',' + std::to_string(p.pos_node) + ',' + std::to_string(p.neg_node);
                out += ',';
                doubles(p.table.p);
            }
        },
        bp.payload);
    return out;
}

GateBlueprint parse_gate(std::string_view line)
{
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
        line.remove_suffix(1);
    }
    if (line.substr(0, 5) != "GATE ") {
        throw ParseError("expected 'GATE '", 0);
    }
    std::size_t pos = 5;
    const auto kind_end = std::min(line.find(' ', pos), line.size());
    const auto kind = parse_gate_kind(line.substr(pos, kind_end - pos));
    if (!kind) {
        throw ParseError("unknown gate kind", pos);
    }
    pos = kind_end;

    GateBlueprint bp;
    bp.kind = *kind;
    const auto in_field = expect_field(line, pos, "in=");
    for (auto [tok, off] : split_csv(in_field, pos - in_field.size())) {
        bp.inputs.push_back(parse_number<std::size_t>(tok, off));
    }
    const auto out_field = expect_field(line, pos, "out=");
    for (auto [tok, off] : split_csv(out_field, pos - out_field.size())) {
        bp.outputs.push_back(parse_number<std::size_t>(tok, off));
    }
    const auto payload_field = expect_field(line, pos, "payload=");
    const auto items = split_csv(payload_field, pos - payload_field.size());
    if (pos != line.size()) {
        throw ParseError("trailing characters", pos);
    }
    if (bp.inputs.empty() || bp.outputs.empty()) {
        throw ParseError("gate needs at least one input and one output", 0);
    }

    const std::size_t n_in = bp.inputs.size();
    const std::size_t n_out = bp.outputs.size();
    const std::size_t base = is_ternary(bp.kind) ? 3 : 2;
    auto need = [&](std::size_t n) {
        if (items.size() != n) {
            throw ParseError("expected " + std::to_string(n) + " payload values, found "
                                 + std::to_string(items.size()),
                             pos - payload_field.size());
        }
    };
    auto read_table = [&](std::size_t first) {
        ProbabilityTable t;
        t.rows = ipow(base, n_in);
        t.cols = ipow(base, n_out);
        for (std::size_t i = first; i < items.size(); ++i) {
            t.p.push_back(parse_number<double>(items[i].first, items[i].second));
        }
        return t;
    };

    switch (bp.kind) {
    case GateKind::Deterministic:
    case GateKind::TernaryDeterministic: {
        need(ipow(base, n_in));
        LogicTable t;
        const auto n_patterns = ipow(base, n_out);
        for (auto [tok, off] : items) {
            const auto v = parse_number<std::uint32_t>(tok, off);
            if (v >= n_patterns) {
                throw ParseError("logic table entry out of range", off);
            }
            t.rows.push_back(v);
        }
        bp.payload = std::move(t);
        break;
    }
    case GateKind::Probabilistic:
    case GateKind::TernaryProbabilistic:
        need(ipow(base, n_in) * ipow(base, n_out));
        bp.payload = read_table(0);
        break;
    case GateKind::Ann: {
        need(n_in * n_out);
        WeightMatrix w;
        w.n_in = n_in;
        w.n_out = n_out;
        for (auto [tok, off] : items) {
            w.weights.push_back(parse_number<double>(tok, off));
        }
        bp.payload = std::move(w);
        break;
    }
    case GateKind::Threshold:
        need(1);
        bp.payload = ThresholdParams{parse_number<int>(items[0].first, items[0].second)};
        break;
    case GateKind::Timer:
        need(1);
        bp.payload = TimerParams{parse_number<int>(items[0].first, items[0].second)};
        break;
    case GateKind::Feedback: {
        need(5 + ipow(2, n_in) * ipow(2, n_out));
        FeedbackParams fb;
        fb.memory = parse_number<int>(items[0].first, items[0].second);
        fb.delta_max = parse_number<double>(items[1].first, items[1].second);
        fb.floor = parse_number<double>(items[2].first, items[2].second);
        fb.pos_node = parse_number<std::size_t>(items[3].first, items[3].second);
        fb.neg_node = parse_number<std::size_t>(items[4].first, items[4].second);
        fb.table = read_table(5);
        bp.payload = std::move(fb);
        break;
    }
    }
    return bp;
}

} // namespace mb

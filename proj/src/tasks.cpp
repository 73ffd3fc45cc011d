#include "mb/tasks.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mb {

namespace {

std::uint32_t discretized_pattern(std::span<const double> outputs)
{
    std::uint32_t a = 0;
    for (std::size_t j = 0; j < outputs.size() && j < 32; ++j) {
        a |= static_cast<std::uint32_t>(discretize_binary(outputs[j])) << j;
    }
    return a;
}

void append_double(std::ostream& out, double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
}

StepRecord make_record(std::span<const double> percept, const Brain& brain,
                       std::vector<double> outputs)
{
    StepRecord r;
    r.percept.assign(percept.begin(), percept.end());
    r.label = brain.state_label();
    r.action = discretized_pattern(outputs);
    r.outputs = std::move(outputs);
    return r;
}

} // namespace

std::map<std::uint32_t, std::size_t> BehaviorLog::action_frequencies() const
{
    std::map<std::uint32_t, std::size_t> f;
    for (const auto& s : steps) {
        ++f[s.action];
    }
    return f;
}

std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> BehaviorLog::action_bigrams() const
{
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> b;
    for (std::size_t t = 1; t < steps.size(); ++t) {
        ++b[{steps[t - 1].action, steps[t].action}];
    }
    return b;
}

void write_behavior_csv(const BehaviorLog& log, std::ostream& out)
{
    const std::size_t n_in = log.steps.empty() ? 0 : log.steps.front().percept.size();
    const std::size_t n_out = log.steps.empty() ? 0 : log.steps.front().outputs.size();
    out << "step";
    for (std::size_t i = 0; i < n_in; ++i) {
        out << ",in_" << i;
    }
    out << ",label";
    for (std::size_t j = 0; j < n_out; ++j) {
        out << ",out_" << j;
    }
    out << ",action,scored,correct\n";
    for (std::size_t t = 0; t < log.steps.size(); ++t) {
        const auto& s = log.steps[t];
        out << t;
        for (double v : s.percept) {
            out << ',';
            append_double(out, v);
        }
        out << ',' << s.label;
        for (double v : s.outputs) {
            out << ',';
            append_double(out, v);
        }
        out << ',' << s.action << ',' << int{s.scored} << ',' << int{s.correct} << '\n';
    }
    out << "# score=";
    append_double(out, log.score);
    out << '\n';
}

BehaviorLog read_behavior_csv(std::istream& in)
{
    BehaviorLog log;
    std::string line;
    std::size_t offset = 0;
    if (!std::getline(in, line)) {
        throw ParseError("empty behavior log", 0);
    }
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    {
        std::istringstream hs(line);
        std::string col;
        while (std::getline(hs, col, ',')) {
            if (col.rfind("in_", 0) == 0) {
                ++n_in;
            } else if (col.rfind("out_", 0) == 0) {
                ++n_out;
            }
        }
    }
    offset += line.size() + 1;
    bool have_score = false;
    while (std::getline(in, line)) {
        if (line.rfind("# score=", 0) == 0) {
            const auto v = std::string_view(line).substr(8);
            auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), log.score);
            if (ec != std::errc{}) {
                throw ParseError("malformed score trailer", offset + 8);
            }
            have_score = true;
            offset += line.size() + 1;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 1 + n_in + 1 + n_out + 3) {
            throw ParseError("wrong column count", offset);
        }
        auto num = [&](const std::string& c, auto& v) {
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc{} || ptr != c.data() + c.size()) {
                throw ParseError("malformed value '" + c + "'", offset);
            }
        };
        StepRecord s;
        std::size_t c = 1;
        s.percept.resize(n_in);
        for (auto& v : s.percept) {
            num(cells[c++], v);
        }
        num(cells[c++], s.label);
        s.outputs.resize(n_out);
        for (auto& v : s.outputs) {
            num(cells[c++], v);
        }
        num(cells[c++], s.action);
        int scored = 0;
        int correct = 0;
        num(cells[c++], scored);
        num(cells[c++], correct);
        s.scored = scored != 0;
        s.correct = correct != 0;
        log.steps.push_back(std::move(s));
        offset += line.size() + 1;
    }
    if (!have_score) {
        throw ParseError("missing '# score=' trailer", offset);
    }
    return log;
}

void write_action_tables_csv(const BehaviorLog& log, std::ostream& out)
{
    out << "table,action,next_action,count\n";
    for (const auto& [a, n] : log.action_frequencies()) {
        out << "frequency," << a << ",," << n << '\n';
    }
    for (const auto& [ab, n] : log.action_bigrams()) {
        out << "bigram," << ab.first << ',' << ab.second << ',' << n << '\n';
    }
}

BrainLayout Task::layout(std::size_t n_nodes, bool zero_outputs_before_update) const
{
    const auto s = spec();
    return BrainLayout::standard(n_nodes, s.n_inputs, s.n_outputs, zero_outputs_before_update);
}

// --- n-back ----------------------------------------------------------------

NBackTask::NBackTask(int k, std::size_t lifetime, int ticks_per_percept)
    : k_(k), lifetime_(lifetime), ticks_(ticks_per_percept)
{
    if (k < 1) {
        throw std::invalid_argument("nback: k must be >= 1");
    }
    if (lifetime <= static_cast<std::size_t>(k)) {
        throw std::invalid_argument("nback: lifetime must exceed k");
    }
    if (ticks_per_percept < 1) {
        throw std::invalid_argument("nback: ticks_per_percept must be >= 1");
    }
}

TaskSpec NBackTask::spec() const
{
    return {1, 1, lifetime_, ticks_};
}

double NBackTask::run(Brain& brain, std::uint64_t env_seed, std::uint64_t brain_seed,
                      BehaviorLog* log) const
{
    SplitMix64 env(env_seed);
    brain.reset(brain_seed);
    if (log) {
        *log = BehaviorLog{};
        log->initial_label = brain.state_label();
    }
    const std::size_t k = static_cast<std::size_t>(k_);
    std::vector<int> fed(lifetime_);
    std::size_t points = 0;
    double percept[1];
    for (std::size_t s = 0; s < lifetime_; ++s) {
        fed[s] = static_cast<int>(env() >> 63);
        percept[0] = fed[s];
        auto out = step_agent(brain, percept, ticks_);
        const bool scored = s >= k;
        const bool correct = scored && discretize_binary(out[0]) == fed[s + 1 - k];
        points += correct ? 1 : 0;
        if (log) {
            auto rec = make_record(percept, brain, std::move(out));
            rec.scored = scored;
            rec.correct = correct;
            log->steps.push_back(std::move(rec));
        }
    }
    const double fitness = static_cast<double>(points) / static_cast<double>(lifetime_ - k);
    if (log) {
        log->score = fitness;
    }
    return fitness;
}

// --- association -------------------------------------------------------------

AssociationTask::AssociationTask(std::size_t lifetime, int ticks_per_percept)
    : lifetime_(lifetime), ticks_(ticks_per_percept)
{
    if (lifetime < 2) {
        throw std::invalid_argument("association: lifetime must be >= 2");
    }
    if (ticks_per_percept < 1) {
        throw std::invalid_argument("association: ticks_per_percept must be >= 1");
    }
}

TaskSpec AssociationTask::spec() const
{
    return {3, 1, lifetime_, ticks_};
}

std::array<int, 4> AssociationTask::hidden_mapping(std::uint64_t env_seed)
{
    SplitMix64 env(env_seed);
    std::array<int, 4> m{};
    for (auto& a : m) {
        a = static_cast<int>(env() >> 63);
    }
    return m;
}

double AssociationTask::run(Brain& brain, std::uint64_t env_seed, std::uint64_t brain_seed,
                            BehaviorLog* log) const
{
    const auto mapping = hidden_mapping(env_seed);
    SplitMix64 env(derive_seed(env_seed, {1}));
    brain.reset(brain_seed);
    if (log) {
        *log = BehaviorLog{};
        log->initial_label = brain.state_label();
    }
    const std::size_t scored_from = lifetime_ / 2;
    std::size_t correct_count = 0;
    bool last_correct = false;
    double percept[3];
    for (std::size_t t = 0; t < lifetime_; ++t) {
        const auto stimulus = static_cast<std::size_t>(env() >> 62);
        percept[0] = static_cast<double>(stimulus & 1U);
        percept[1] = static_cast<double>((stimulus >> 1) & 1U);
        percept[2] = (t > 0 && last_correct) ? 1.0 : 0.0;
        auto out = step_agent(brain, percept, ticks_);
        last_correct = discretize_binary(out[0]) == mapping[stimulus];
        const bool scored = t >= scored_from;
        if (scored && last_correct) {
            ++correct_count;
        }
        if (log) {
            auto rec = make_record(percept, brain, std::move(out));
            rec.scored = scored;
            rec.correct = last_correct;
            log->steps.push_back(std::move(rec));
        }
    }
    const double fitness =
        static_cast<double>(correct_count) / static_cast<double>(lifetime_ - scored_from);
    if (log) {
        log->score = fitness;
    }
    return fitness;
}

std::unique_ptr<Task> make_task(const TaskConfig& cfg)
{
    if (cfg.name == "nback") {
        return std::make_unique<NBackTask>(cfg.nback_k, cfg.lifetime, cfg.ticks_per_percept);
    }
    if (cfg.name == "association") {
        return std::make_unique<AssociationTask>(cfg.lifetime, cfg.ticks_per_percept);
    }
    throw std::invalid_argument("unknown task '" + cfg.name + "'");
}

double evaluate_brain(Brain& brain, const Task& task, std::uint64_t env_seed,
                      std::uint64_t brain_seed, int repeats)
{
    if (repeats < 1) {
        throw std::invalid_argument("evaluate_brain: repeats must be >= 1");
    }
    double sum = 0.0;
    for (int r = 0; r < repeats; ++r) {
        const auto key = static_cast<std::uint64_t>(r);
        sum += task.run(brain, derive_seed(env_seed, {key}), derive_seed(brain_seed, {key}));
    }
    return sum / repeats;
}

BehaviorLog record_behavior(Brain& brain, const Task& task, std::uint64_t env_seed,
                            std::uint64_t brain_seed)
{
    BehaviorLog log;
    task.run(brain, derive_seed(env_seed, {0}), derive_seed(brain_seed, {0}), &log);
    return log;
}

} // namespace mb

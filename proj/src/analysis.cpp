#include "mb/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mb {

namespace {

std::string fmt(double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::uint64_t input_symbol(std::span<const double> percept)
{
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < percept.size() && i < 64; ++i) {
        s |= static_cast<std::uint64_t>(discretize_binary(percept[i])) << i;
    }
    return s;
}

bool contains(const std::vector<std::size_t>& xs, std::size_t x)
{
    return std::find(xs.begin(), xs.end(), x) != xs.end();
}

double run_fitness(const BrainSpec& spec, const Task& task, Seeds seeds, int repeats,
                   std::optional<NodeClamp> clamp = std::nullopt)
{
    Brain brain(spec);
    brain.set_clamp(clamp);
    return evaluate_brain(brain, task, seeds.env, seeds.brain, repeats);
}

} // namespace

double TransitionMatrix::probability(std::uint64_t state, std::uint64_t input,
                                     std::uint64_t next) const
{
    const auto it = counts.find({state, input});
    if (it == counts.end()) {
        return 0.0;
    }
    std::size_t total = 0;
    std::size_t hit = 0;
    for (const auto& [n, c] : it->second) {
        total += c;
        if (n == next) {
            hit = c;
        }
    }
    return static_cast<double>(hit) / static_cast<double>(total);
}

std::size_t TransitionMatrix::visits(std::uint64_t state, std::uint64_t input) const
{
    const auto it = counts.find({state, input});
    if (it == counts.end()) {
        return 0;
    }
    std::size_t total = 0;
    for (const auto& [n, c] : it->second) {
        total += c;
    }
    return total;
}

TransitionMatrix transition_matrix(const std::vector<BehaviorLog>& traces)
{
    TransitionMatrix tm;
    for (const auto& trace : traces) {
        std::uint64_t state = trace.initial_label;
        for (const auto& step : trace.steps) {
            ++tm.counts[{state, input_symbol(step.percept)}][step.label];
            state = step.label;
        }
    }
    if (tm.counts.empty()) {
        throw std::invalid_argument("transition_matrix: no transitions in traces");
    }
    return tm;
}

void write_transitions_csv(const TransitionMatrix& tm, std::ostream& out)
{
    out << "state,input,next_state,prob,count\n";
    for (const auto& [key, row] : tm.counts) {
        const double total = static_cast<double>(tm.visits(key.first, key.second));
        for (const auto& [next, c] : row) {
            out << key.first << ',' << key.second << ',' << next << ','
                << fmt(static_cast<double>(c) / total) << ',' << c << '\n';
        }
    }
}

std::set<Connection> connections(const BrainSpec& spec)
{
    std::set<Connection> pairs;
    for (const auto& g : spec.gates) {
        for (auto a : nodes_read(g)) {
            for (auto b : g.outputs) {
                pairs.emplace(a, b);
            }
        }
    }
    return pairs;
}

std::set<std::size_t> active_nodes(const BrainSpec& spec)
{
    std::set<std::size_t> nodes;
    for (const auto& g : spec.gates) {
        for (auto a : nodes_read(g)) {
            nodes.insert(a);
        }
        nodes.insert(g.outputs.begin(), g.outputs.end());
    }
    return nodes;
}

double density(const BrainSpec& spec)
{
    const auto active = active_nodes(spec);
    if (active.empty()) {
        return 0.0;
    }
    const auto n = static_cast<double>(active.size());
    return static_cast<double>(connections(spec).size()) / (n * n);
}

BrainStats brain_stats(const BrainSpec& spec, const Genome& genome)
{
    BrainStats s;
    s.n_gates = spec.gates.size();
    s.genome_length = genome.size();
    const auto active = active_nodes(spec);
    const auto pairs = connections(spec);
    s.n_active_nodes = active.size();
    s.n_unique_connections = pairs.size();

    std::map<std::size_t, std::vector<std::size_t>> adj;
    for (const auto& [a, b] : pairs) {
        if (a != b) {
            adj[a].push_back(b);
        }
    }
    for (auto src : active) {
        std::map<std::size_t, std::size_t> dist{{src, 0}};
        std::deque<std::size_t> queue{src};
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            for (auto v : adj[u]) {
                if (dist.emplace(v, dist[u] + 1).second) {
                    s.graph_diameter = std::max(s.graph_diameter, dist[v]);
                    queue.push_back(v);
                }
            }
        }
    }
    return s;
}

void write_stats_csv(const BrainStats& s, std::ostream& out)
{
    out << "n_gates,n_active_nodes,n_unique_connections,genome_length,graph_diameter\n";
    out << s.n_gates << ',' << s.n_active_nodes << ',' << s.n_unique_connections << ','
        << s.genome_length << ',' << s.graph_diameter << '\n';
}

std::string export_dot(const BrainSpec& spec, DotMode mode)
{
    const auto& l = spec.layout;
    auto style = [&](std::size_t n) -> std::string {
        if (contains(l.inputs, n)) {
            return "shape=box, style=filled, fillcolor=palegreen";
        }
        if (contains(l.outputs, n)) {
            return "shape=doublecircle, style=filled, fillcolor=salmon";
        }
        return "shape=circle";
    };

    std::ostringstream os;
    if (mode == DotMode::Condensed) {
        os << "digraph brain {\n";
        for (auto n : active_nodes(spec)) {
            os << "  n" << n << " [label=\"" << n << "\", " << style(n) << "];\n";
        }
        for (const auto& [a, b] : connections(spec)) {
            os << "  n" << a << " -> n" << b << ";\n";
        }
        os << "}\n";
        return os.str();
    }

    os << "digraph brain {\n";
    os << "  rankdir=TB;\n";
    os << "  subgraph cluster_t {\n    label=\"t\";\n    rank=same;\n";
    for (std::size_t n = 0; n < l.n_nodes; ++n) {
        os << "    t" << n << " [label=\"" << n << "\", " << style(n) << "];\n";
    }
    os << "  }\n";
    os << "  subgraph cluster_gates {\n    label=\"gates\";\n";
    for (std::size_t g = 0; g < spec.gates.size(); ++g) {
        os << "    g" << g << " [label=\"" << g << ": " << to_string(spec.gates[g].kind)
           << "\", shape=box, style=rounded];\n";
    }
    os << "  }\n";
    os << "  subgraph cluster_t1 {\n    label=\"t+1\";\n    rank=same;\n";
    for (std::size_t n = 0; n < l.n_nodes; ++n) {
        os << "    u" << n << " [label=\"" << n << "\", " << style(n) << "];\n";
    }
    os << "  }\n";
    for (std::size_t g = 0; g < spec.gates.size(); ++g) {
        for (auto a : nodes_read(spec.gates[g])) {
            os << "  t" << a << " -> g" << g << ";\n";
        }
        for (auto b : spec.gates[g].outputs) {
            os << "  g" << g << " -> u" << b << ";\n";
        }
    }
    os << "}\n";
    return os.str();
}

KnockoutResult knockout_gate(const BrainSpec& spec, std::size_t gate_index, const Task& task,
                             Seeds seeds, int repeats)
{
    if (gate_index >= spec.gates.size()) {
        throw std::invalid_argument("knockout_gate: index " + std::to_string(gate_index)
                                    + " out of range");
    }
    KnockoutResult r;
    r.wild_type = run_fitness(spec, task, seeds, repeats);
    BrainSpec mutant = spec;
    mutant.gates.erase(mutant.gates.begin() + static_cast<std::ptrdiff_t>(gate_index));
    r.knockout = run_fitness(mutant, task, seeds, repeats);
    return r;
}

std::vector<KnockoutResult> knockout_all_gates(const BrainSpec& spec, const Task& task,
                                               Seeds seeds, int repeats)
{
    std::vector<KnockoutResult> out;
    for (std::size_t g = 0; g < spec.gates.size(); ++g) {
        out.push_back(knockout_gate(spec, g, task, seeds, repeats));
    }
    return out;
}

KnockoutResult clamp_node(const BrainSpec& spec, std::size_t node, ClampMode mode,
                          const Task& task, Seeds seeds, int repeats)
{
    if (node >= spec.layout.n_nodes) {
        throw std::invalid_argument("clamp_node: node " + std::to_string(node)
                                    + " out of range");
    }
    KnockoutResult r;
    r.wild_type = run_fitness(spec, task, seeds, repeats);
    r.knockout = run_fitness(spec, task, seeds, repeats, NodeClamp{node, mode});
    if (contains(spec.layout.inputs, node)) {
        r.warning = "node " + std::to_string(node) + " is an input; clamping overrides percepts";
    }
    return r;
}

std::vector<RobustnessPoint> robustness_curve(const Genome& genome, const DecodeConfig& decode,
                                              const Task& task, const BrainLayout& layout,
                                              std::size_t max_mutations, std::size_t samples,
                                              Rng& rng, Seeds seeds, int repeats)
{
    if (samples < 1) {
        throw std::invalid_argument("robustness_curve: samples must be >= 1");
    }
    if (max_mutations > genome.size()) {
        throw std::invalid_argument("robustness_curve: more mutations than sites");
    }
    if (max_mutations > 0 && genome.alphabet_max == 0) {
        throw std::invalid_argument("robustness_curve: alphabet has a single symbol");
    }
    auto fitness_of = [&](const Genome& g) {
        Brain brain = decode_brain(g, decode, layout);
        return evaluate_brain(brain, task, seeds.env, seeds.brain, repeats);
    };
    const double wild_type = fitness_of(genome);

    std::vector<RobustnessPoint> curve;
    std::vector<std::size_t> positions(genome.size());
    std::uniform_int_distribution<Site> other(1, genome.alphabet_max);
    for (std::size_t m = 0; m <= max_mutations; ++m) {
        std::vector<double> f;
        f.reserve(samples);
        for (std::size_t k = 0; k < samples; ++k) {
            if (m == 0) {
                f.push_back(wild_type);
                continue;
            }
            Genome mutant = genome;
            std::iota(positions.begin(), positions.end(), 0);
            for (std::size_t d = 0; d < m; ++d) {
                std::uniform_int_distribution<std::size_t> pick(d, positions.size() - 1);
                std::swap(positions[d], positions[pick(rng)]);
                auto& site = mutant.sites[positions[d]];
                // Shift by 1..alphabet_max modulo the alphabet: never the old value.
                site = static_cast<Site>((site + other(rng)) % (genome.alphabet_max + 1ULL));
            }
            f.push_back(fitness_of(mutant));
        }
        RobustnessPoint p;
        p.mutations = m;
        p.samples = samples;
        double sum = 0.0;
        for (double v : f) {
            sum += v;
        }
        // m = 0 reports the wild type itself, not a rounded average of copies.
        p.mean = m == 0 ? wild_type : sum / static_cast<double>(samples);
        double ss = 0.0;
        for (double v : f) {
            ss += (v - p.mean) * (v - p.mean);
        }
        p.stddev = std::sqrt(ss / static_cast<double>(samples));
        curve.push_back(p);
    }
    return curve;
}

void write_robustness_csv(const std::vector<RobustnessPoint>& curve, std::ostream& out)
{
    out << "m,mean,std,K\n";
    for (const auto& p : curve) {
        out << p.mutations << ',' << fmt(p.mean) << ',' << fmt(p.stddev) << ',' << p.samples
            << '\n';
    }
}

} // namespace mb

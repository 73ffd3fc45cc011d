// mb: evolve, analyze and replay Markov Brains.
//
// Exit codes: 0 success, 2 usage/config error, 3 I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "mb/analysis.hpp"
#include "mb/config.hpp"
#include "mb/evolution.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kIoError = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config, "flat key=value config file");
    cmd->add_option("--set", o.sets, "override a config key (key=value, repeatable)");
    cmd->add_option("--seed", o.seed, "random seed (falls back to MB_SEED)");
}

mb::RunConfig build_config(const CommonOptions& o)
{
    mb::RunConfig cfg;
    if (!o.config.empty()) {
        std::ifstream probe(o.config);
        if (!probe) {
            throw UsageError("cannot read config file '" + o.config + "'");
        }
        mb::read_config(cfg, probe);
    }
    for (const auto& s : o.sets) {
        mb::apply_override(cfg, s);
    }
    if (o.seed) {
        cfg.evolution.seed = *o.seed;
        cfg.seed_given = true;
    } else if (!cfg.seed_given) {
        if (const char* env = std::getenv("MB_SEED")) {
            mb::apply_setting(cfg, "seed", env);
        }
    }
    try {
        cfg.evolution.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid configuration: ") + e.what());
    }
    return cfg;
}

mb::Genome read_genome_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read genome '" + path + "'");
    }
    try {
        return mb::load_genome(in);
    } catch (const mb::ParseError& e) {
        throw UsageError("genome '" + path + "': " + e.what());
    }
}

/// Writes to `path`, or stdout when empty.
void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
}

int run_evolve(const CommonOptions& common, const std::string& out_dir, unsigned jobs)
{
    const auto cfg = build_config(common);
    mb::EvolveOptions opts;
    opts.jobs = jobs;
    opts.out_dir = out_dir;
    opts.snapshot_every = cfg.snapshot_every;
    try {
        std::filesystem::create_directories(out_dir);
        std::ofstream saved(std::filesystem::path(out_dir) / "run.cfg", std::ios::trunc);
        saved << mb::format_config(cfg);
        if (!saved) {
            throw IoError("cannot write run.cfg in '" + out_dir + "'");
        }
        const auto record = mb::evolve(cfg.evolution, opts);
        const auto& last = record.stats.back();
        std::cerr << "generation " << last.generation << ": max fitness " << last.max_fitness
                  << ", mean " << last.mean_fitness << '\n';
    } catch (const std::filesystem::filesystem_error& e) {
        throw IoError(e.what());
    }
    return 0;
}

struct AnalyzeOptions {
    std::string genome;
    std::string which = "stats";
    std::string mode = "condensed";
    std::size_t max_m = 10;
    std::size_t samples = 50;
    std::optional<std::size_t> gate;
    std::optional<std::size_t> node;
    std::string clamp_mode = "all";
    std::size_t lifetimes = 10;
    std::string out;
};

int run_analyze(const CommonOptions& common, const AnalyzeOptions& a)
{
    const auto cfg = build_config(common);
    const auto genome = read_genome_file(a.genome);
    const auto& evo = cfg.evolution;
    const auto task = mb::make_task(evo.task);
    const auto layout = task->layout(evo.decode.n_nodes, evo.zero_outputs_before_update);
    const auto spec = mb::decode_brain_spec(genome, evo.decode, layout);
    const mb::Seeds seeds{evo.seed, evo.seed};

    std::ostringstream os;
    if (a.which == "stats") {
        mb::write_stats_csv(mb::brain_stats(spec, genome), os);
    } else if (a.which == "density") {
        os << "density,n_active_nodes,n_unique_connections\n"
           << mb::density(spec) << ',' << mb::active_nodes(spec).size() << ','
           << mb::connections(spec).size() << '\n';
    } else if (a.which == "dot") {
        if (a.mode != "condensed" && a.mode != "layered") {
            throw UsageError("--mode must be layered or condensed");
        }
        os << mb::export_dot(spec, a.mode == "layered" ? mb::DotMode::Layered
                                                       : mb::DotMode::Condensed);
    } else if (a.which == "dump") {
        for (const auto& g : spec.gates) {
            os << mb::format_gate(g) << '\n';
        }
    } else if (a.which == "transitions") {
        std::vector<mb::BehaviorLog> traces;
        for (std::size_t i = 0; i < a.lifetimes; ++i) {
            mb::Brain brain(spec);
            traces.push_back(mb::record_behavior(brain, *task, mb::derive_seed(evo.seed, {i}),
                                                 mb::derive_seed(evo.seed, {i})));
        }
        mb::write_transitions_csv(mb::transition_matrix(traces), os);
    } else if (a.which == "knockout") {
        os << "gate,kind,wild_type,knockout\n";
        auto row = [&](std::size_t g, const mb::KnockoutResult& r) {
            os << g << ',' << mb::to_string(spec.gates[g].kind) << ',' << r.wild_type << ','
               << r.knockout << '\n';
        };
        try {
            if (a.gate) {
                row(*a.gate, mb::knockout_gate(spec, *a.gate, *task, seeds, evo.repeats));
            } else {
                const auto all = mb::knockout_all_gates(spec, *task, seeds, evo.repeats);
                for (std::size_t g = 0; g < all.size(); ++g) {
                    row(g, all[g]);
                }
            }
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    } else if (a.which == "clamp") {
        if (!a.node) {
            throw UsageError("--which clamp needs --node");
        }
        std::vector<std::pair<std::string, mb::ClampMode>> modes;
        if (a.clamp_mode == "zero" || a.clamp_mode == "all") {
            modes.emplace_back("zero", mb::ClampMode::Zero);
        }
        if (a.clamp_mode == "one" || a.clamp_mode == "all") {
            modes.emplace_back("one", mb::ClampMode::One);
        }
        if (a.clamp_mode == "random" || a.clamp_mode == "all") {
            modes.emplace_back("random", mb::ClampMode::Random);
        }
        if (modes.empty()) {
            throw UsageError("--clamp-mode must be zero, one, random or all");
        }
        os << "node,mode,wild_type,clamped,warning\n";
        for (const auto& [name, mode] : modes) {
            mb::KnockoutResult r;
            try {
                r = mb::clamp_node(spec, *a.node, mode, *task, seeds, evo.repeats);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            if (r.warning) {
                std::cerr << "warning: " << *r.warning << '\n';
            }
            os << *a.node << ',' << name << ',' << r.wild_type << ',' << r.knockout << ','
               << r.warning.value_or("") << '\n';
        }
    } else if (a.which == "robustness") {
        mb::Rng rng(mb::derive_seed(evo.seed, {0x726f62}));
        try {
            mb::write_robustness_csv(mb::robustness_curve(genome, evo.decode, *task, layout,
                                                          a.max_m, a.samples, rng, seeds,
                                                          evo.repeats),
                                     os);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    } else {
        throw UsageError("unknown --which '" + a.which + "'");
    }
    emit(a.out, os.str());
    return 0;
}

int run_replay(const CommonOptions& common, const std::string& genome_path,
               const std::string& out, const std::string& tables)
{
    const auto cfg = build_config(common);
    const auto genome = read_genome_file(genome_path);
    const auto& evo = cfg.evolution;
    const auto task = mb::make_task(evo.task);
    mb::Brain brain = mb::decode_brain(
        genome, evo.decode, task->layout(evo.decode.n_nodes, evo.zero_outputs_before_update));
    const auto log = mb::record_behavior(brain, *task, evo.seed, evo.seed);
    std::ostringstream os;
    mb::write_behavior_csv(log, os);
    emit(out, os.str());
    if (!tables.empty()) {
        std::ostringstream ts;
        mb::write_action_tables_csv(log, ts);
        emit(tables, ts.str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Evolve and analyze Markov Brains"};
    app.require_subcommand(1);

    CommonOptions evolve_common;
    std::string out_dir = "run";
    unsigned jobs = std::max(1U, std::thread::hardware_concurrency());
    auto* evolve = app.add_subcommand("evolve", "run an evolutionary experiment");
    add_common(evolve, evolve_common);
    evolve->add_option("--out", out_dir, "output directory")->capture_default_str();
    evolve->add_option("--jobs", jobs, "worker threads for fitness evaluation")
        ->check(CLI::PositiveNumber);

    CommonOptions analyze_common;
    AnalyzeOptions a;
    std::string analyze_task;
    auto* analyze = app.add_subcommand("analyze", "measure a saved genome");
    add_common(analyze, analyze_common);
    analyze->add_option("--genome", a.genome, "genome file")->required();
    analyze->add_option("--task", analyze_task, "task name (same as --set task=...)");
    analyze
        ->add_option("--which", a.which,
                     "stats | density | transitions | dot | dump | knockout | clamp | robustness")
        ->capture_default_str();
    analyze->add_option("--mode", a.mode, "dot layout: layered | condensed")
        ->capture_default_str();
    analyze->add_option("--max-m", a.max_m, "robustness: largest mutation count")
        ->capture_default_str();
    analyze->add_option("--samples", a.samples, "robustness: mutants per mutation count")
        ->capture_default_str();
    analyze->add_option("--gate", a.gate, "knockout: single gate index (default all)");
    analyze->add_option("--node", a.node, "clamp: node index");
    analyze->add_option("--clamp-mode", a.clamp_mode, "clamp: zero | one | random | all")
        ->capture_default_str();
    analyze->add_option("--lifetimes", a.lifetimes, "transitions: lifetimes to record")
        ->capture_default_str();
    analyze->add_option("--out", a.out, "output file (default stdout)");

    CommonOptions replay_common;
    std::string replay_genome;
    std::string replay_task;
    std::string replay_out;
    std::string replay_tables;
    auto* replay = app.add_subcommand("replay", "log one lifetime of a saved genome");
    add_common(replay, replay_common);
    replay->add_option("--genome", replay_genome, "genome file")->required();
    replay->add_option("--task", replay_task, "task name (same as --set task=...)");
    replay->add_option("--out", replay_out, "behavior log CSV (default stdout)");
    replay->add_option("--tables", replay_tables, "action frequency/bigram CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*evolve) {
            return run_evolve(evolve_common, out_dir, jobs);
        }
        if (*analyze) {
            if (!analyze_task.empty()) {
                analyze_common.sets.insert(analyze_common.sets.begin(), "task=" + analyze_task);
            }
            return run_analyze(analyze_common, a);
        }
        if (*replay) {
            if (!replay_task.empty()) {
                replay_common.sets.insert(replay_common.sets.begin(), "task=" + replay_task);
            }
            return run_replay(replay_common, replay_genome, replay_out, replay_tables);
        }
    } catch (const mb::ConfigError& e) {
        std::cerr << "config error (key '" << e.key() << "'): " << e.what() << '\n';
        return kUsageError;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIoError;
    }
    return 0;
}

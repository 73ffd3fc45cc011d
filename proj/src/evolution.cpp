#include "mb/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mb {

namespace {

// Substream keys under the run seed.
constexpr std::uint64_t kEnvStream = 0x656e76;    // "env"
constexpr std::uint64_t kBrainStream = 0x627261;  // "bra"

std::string format_double(double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// Best first; ties go to the lower id.
bool fitter(const Organism& a, const Organism& b)
{
    const double fa = a.fitness.value_or(-1.0);
    const double fb = b.fitness.value_or(-1.0);
    if (fa != fb) {
        return fa > fb;
    }
    return a.id < b.id;
}

} // namespace

void EvolutionConfig::validate() const
{
    if (population_size < 2) {
        throw std::invalid_argument("population_size must be >= 2");
    }
    if (elitism > population_size) {
        throw std::invalid_argument("elitism cannot exceed population_size");
    }
    if (selection.method == SelectionMethod::Tournament
        && (selection.tournament_k < 1 || selection.tournament_k > population_size)) {
        throw std::invalid_argument("tournament_k must be in [1, population_size]");
    }
    if (repeats < 1) {
        throw std::invalid_argument("repeats must be >= 1");
    }
    if (initial_length < 1 || initial_length > mutation.genome_max) {
        throw std::invalid_argument("initial_length must be in [1, genome_max]");
    }
    mutation.validate();
    decode.validate();
    for (auto k : decode.enabled) {
        const auto c = decode.codons.codon(k);
        if (c.first > alphabet_max || c.second > alphabet_max) {
            throw std::invalid_argument("start codon for " + std::string(to_string(k))
                                        + " lies outside the alphabet");
        }
    }
    const auto task_spec = make_task(task)->spec();
    if (decode.n_nodes < task_spec.n_inputs + task_spec.n_outputs) {
        throw std::invalid_argument("n_nodes too small for the task's inputs and outputs");
    }
}

Genome founder_genome(const EvolutionConfig& cfg, Rng& rng)
{
    Genome g = random_genome(cfg.initial_length, cfg.alphabet_max, rng, cfg.mutation.genome_max);
    const std::size_t n = g.sites.size();
    if (n < 2) {
        return g;
    }
    std::uniform_int_distribution<std::size_t> pos(0, n - 1);
    for (auto kind : cfg.decode.enabled) {
        const auto codon = cfg.decode.codons.codon(kind);
        for (std::size_t c = 0; c < cfg.seeded_codons; ++c) {
            const auto p = pos(rng);
            g.sites[p] = codon.first;
            g.sites[(p + 1) % n] = codon.second;
        }
    }
    return g;
}

std::vector<double> evaluate_population(Population& pop, const EvolutionConfig& cfg,
                                        const Task& task, std::size_t generation, unsigned jobs)
{
    const auto layout = task.layout(cfg.decode.n_nodes, cfg.zero_outputs_before_update);
    const std::uint64_t env_seed = derive_seed(cfg.seed, {kEnvStream});
    std::vector<double> fitness(pop.size());
    std::vector<std::size_t> gates(pop.size());

    auto work = [&](std::size_t i) {
        Brain brain = decode_brain(pop[i].genome, cfg.decode, layout);
        gates[i] = brain.gates().size();
        const auto brain_seed = derive_seed(cfg.seed, {kBrainStream, generation, pop[i].id});
        fitness[i] = evaluate_brain(brain, task, env_seed, brain_seed, cfg.repeats);
    };

    jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(pop.size())));
    if (jobs == 1) {
        for (std::size_t i = 0; i < pop.size(); ++i) {
            work(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(jobs);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < pop.size(); i = next++) {
                        work(i);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
        for (auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }
    for (std::size_t i = 0; i < pop.size(); ++i) {
        pop[i].fitness = fitness[i];
        pop[i].n_gates = gates[i];
    }
    return fitness;
}

std::size_t select_parent(const Population& pop, const Selection& sel, Rng& rng)
{
    if (pop.empty()) {
        throw std::invalid_argument("select_parent: empty population");
    }
    for (const auto& o : pop) {
        if (!o.fitness) {
            throw std::logic_error("select_parent: organism " + std::to_string(o.id)
                                   + " has no fitness");
        }
    }
    if (sel.method == SelectionMethod::Roulette) {
        double total = 0.0;
        for (const auto& o : pop) {
            total += *o.fitness;
        }
        if (total <= 0.0) {
            std::uniform_int_distribution<std::size_t> any(0, pop.size() - 1);
            return any(rng);
        }
        const double u = uniform01(rng) * total;
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (*pop[i].fitness > 0.0) {
                last_positive = i;
            }
            acc += *pop[i].fitness;
            if (u < acc) {
                return i;
            }
        }
        return last_positive;
    }

    // Tournament: k distinct contestants (partial Fisher-Yates).
    const std::size_t k = std::clamp<std::size_t>(sel.tournament_k, 1, pop.size());
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::size_t best = pop.size();
    for (std::size_t d = 0; d < k; ++d) {
        std::uniform_int_distribution<std::size_t> pick(d, pop.size() - 1);
        std::swap(idx[d], idx[pick(rng)]);
        const auto c = idx[d];
        if (best == pop.size() || fitter(pop[c], pop[best])) {
            best = c;
        }
    }
    return best;
}

Population next_generation(const Population& pop, const EvolutionConfig& cfg, Rng& rng,
                           std::uint64_t& next_id)
{
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fitter(pop[a], pop[b]); });

    Population next;
    next.reserve(cfg.population_size);
    for (std::size_t e = 0; e < cfg.elitism && e < order.size(); ++e) {
        next.push_back(pop[order[e]]);
    }
    while (next.size() < cfg.population_size) {
        const auto& parent = pop[select_parent(pop, cfg.selection, rng)];
        Organism child;
        child.id = next_id++;
        child.parent_id = static_cast<std::int64_t>(parent.id);
        child.genome = replicate(parent.genome, cfg.mutation, rng);
        next.push_back(std::move(child));
    }
    return next;
}

GenerationStats summarize(const Population& pop, std::size_t generation)
{
    GenerationStats s;
    s.generation = generation;
    if (pop.empty()) {
        return s;
    }
    s.max_fitness = -std::numeric_limits<double>::infinity();
    s.min_fitness = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    double len = 0.0;
    double gates = 0.0;
    for (const auto& o : pop) {
        const double f = o.fitness.value_or(0.0);
        s.max_fitness = std::max(s.max_fitness, f);
        s.min_fitness = std::min(s.min_fitness, f);
        sum += f;
        len += static_cast<double>(o.genome.size());
        gates += static_cast<double>(o.n_gates);
    }
    const auto n = static_cast<double>(pop.size());
    s.mean_fitness = sum / n;
    s.mean_genome_length = len / n;
    s.mean_gates = gates / n;
    return s;
}

void write_stats_header(std::ostream& out)
{
    out << "generation,max_fitness,mean_fitness,min_fitness,mean_genome_len,mean_gates\n";
}

void write_stats_row(const GenerationStats& s, std::ostream& out)
{
    out << s.generation << ',' << format_double(s.max_fitness) << ','
        << format_double(s.mean_fitness) << ',' << format_double(s.min_fitness) << ','
        << format_double(s.mean_genome_length) << ',' << format_double(s.mean_gates) << '\n';
}

RunRecord evolve(const EvolutionConfig& cfg, const EvolveOptions& opts)
{
    cfg.validate();
    const auto task = make_task(cfg.task);

    std::ofstream stats_out;
    if (opts.out_dir) {
        std::filesystem::create_directories(*opts.out_dir);
        const auto path = *opts.out_dir / "stats.csv";
        stats_out.open(path, std::ios::binary | std::ios::trunc);
        if (!stats_out) {
            throw std::filesystem::filesystem_error(
                "cannot write stats file", path,
                std::make_error_code(std::errc::permission_denied));
        }
        write_stats_header(stats_out);
    }

    Rng rng(cfg.seed);
    std::uint64_t next_id = 0;
    Population pop;
    pop.reserve(cfg.population_size);
    for (std::size_t i = 0; i < cfg.population_size; ++i) {
        Organism o;
        o.id = next_id++;
        o.genome = founder_genome(cfg, rng);
        pop.push_back(std::move(o));
    }

    RunRecord record;
    for (std::size_t gen = 0;; ++gen) {
        evaluate_population(pop, cfg, *task, gen, opts.jobs);
        const auto stats = summarize(pop, gen);
        record.stats.push_back(stats);
        if (stats_out.is_open()) {
            write_stats_row(stats, stats_out);
            stats_out.flush();
            if (!stats_out) {
                throw std::filesystem::filesystem_error(
                    "write to stats file failed", *opts.out_dir / "stats.csv",
                    std::make_error_code(std::errc::io_error));
            }
        }
        if (opts.out_dir && opts.snapshot_every > 0 && gen % opts.snapshot_every == 0) {
            std::ostringstream name;
            name << "gen_" << std::setw(6) << std::setfill('0') << gen;
            save_population(pop, *opts.out_dir / "snapshots" / name.str());
        }
        if (gen >= cfg.generations || (opts.stop && opts.stop(stats))) {
            break;
        }
        pop = next_generation(pop, cfg, rng, next_id);
    }
    if (opts.out_dir) {
        save_population(pop, *opts.out_dir / "final");
    }
    record.final_population = std::move(pop);
    return record;
}

void save_population(const Population& pop, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.csv", std::ios::binary | std::ios::trunc);
    if (!manifest) {
        throw std::filesystem::filesystem_error(
            "cannot write manifest", dir / "manifest.csv",
            std::make_error_code(std::errc::permission_denied));
    }
    manifest << "id,fitness,parent_id,n_gates,file\n";
    for (const auto& o : pop) {
        const std::string file = "org_" + std::to_string(o.id) + ".mbg";
        std::ofstream g(dir / file, std::ios::binary | std::ios::trunc);
        save_genome(o.genome, g);
        if (!g) {
            throw std::filesystem::filesystem_error(
                "cannot write genome", dir / file, std::make_error_code(std::errc::io_error));
        }
        manifest << o.id << ',' << (o.fitness ? format_double(*o.fitness) : std::string{})
                 << ',' << o.parent_id << ',' << o.n_gates << ',' << file << '\n';
    }
    if (!manifest) {
        throw std::filesystem::filesystem_error(
            "write to manifest failed", dir / "manifest.csv",
            std::make_error_code(std::errc::io_error));
    }
}

Population load_population(const std::filesystem::path& dir)
{
    std::ifstream manifest(dir / "manifest.csv", std::ios::binary);
    if (!manifest) {
        throw std::filesystem::filesystem_error(
            "cannot read manifest", dir / "manifest.csv",
            std::make_error_code(std::errc::no_such_file_or_directory));
    }
    std::string line;
    std::getline(manifest, line);
    if (line != "id,fitness,parent_id,n_gates,file") {
        throw ParseError("unexpected manifest header", 0);
    }
    std::size_t offset = line.size() + 1;
    Population pop;
    while (std::getline(manifest, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 5) {
            throw ParseError("manifest row needs 5 columns", offset);
        }
        auto num = [&](const std::string& c, auto& v) {
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc{} || ptr != c.data() + c.size()) {
                throw ParseError("malformed manifest value '" + c + "'", offset);
            }
        };
        Organism o;
        num(cells[0], o.id);
        if (!cells[1].empty()) {
            double f = 0.0;
            num(cells[1], f);
            o.fitness = f;
        }
        num(cells[2], o.parent_id);
        num(cells[3], o.n_gates);
        std::ifstream g(dir / cells[4], std::ios::binary);
        if (!g) {
            throw std::filesystem::filesystem_error(
                "cannot read genome", dir / cells[4],
                std::make_error_code(std::errc::no_such_file_or_directory));
        }
        o.genome = load_genome(g);
        pop.push_back(std::move(o));
        offset += line.size() + 1;
    }
    return pop;
}

} // namespace mb

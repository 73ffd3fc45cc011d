#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mb/evolution.hpp"
#include "support.hpp"

using namespace mb;

namespace {

EvolutionConfig small_config()
{
    EvolutionConfig cfg;
    cfg.population_size = 20;
    cfg.generations = 10;
    cfg.initial_length = 1500;
    cfg.task.lifetime = 60;
    cfg.repeats = 2;
    cfg.seed = 17;
    return cfg;
}

Population with_fitness(std::vector<double> f)
{
    Population pop;
    for (std::size_t i = 0; i < f.size(); ++i) {
        Organism o;
        o.id = i;
        o.fitness = f[i];
        o.genome.sites = {static_cast<Site>(i)};
        pop.push_back(o);
    }
    return pop;
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("config validation")
{
    EvolutionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.population_size = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.selection.tournament_k = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.elitism = 101;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.decode.n_nodes = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("founders carry start codons")
{
    auto cfg = small_config();
    Rng rng(1);
    const auto g = founder_genome(cfg, rng);
    CHECK(g.size() == cfg.initial_length);
    const auto hits = scan_codons(g, cfg.decode.codons);
    std::size_t det = 0;
    std::size_t prob = 0;
    for (const auto& h : hits) {
        det += h.kind == GateKind::Deterministic ? 1 : 0;
        prob += h.kind == GateKind::Probabilistic ? 1 : 0;
    }
    CHECK(det >= 3);
    CHECK(prob >= 3);
}

TEST_CASE("evaluate_population")
{
    auto cfg = small_config();
    const auto task = make_task(cfg.task);
    Rng rng(2);
    Population pop;
    for (std::uint64_t i = 0; i < cfg.population_size; ++i) {
        pop.push_back({i, founder_genome(cfg, rng), std::nullopt, -1, 0});
    }

    SUBCASE("repeatable and independent of the worker count")
    {
        auto a = pop;
        auto b = pop;
        auto c = pop;
        const auto fa = evaluate_population(a, cfg, *task, 3, 1);
        const auto fb = evaluate_population(b, cfg, *task, 3, 1);
        const auto fc = evaluate_population(c, cfg, *task, 3, 4);
        CHECK(fa == fb);
        CHECK(fa == fc);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].fitness == fa[i]);
            CHECK(a[i].n_gates == decode_genes(a[i].genome, cfg.decode).size());
        }
    }

    SUBCASE("gate-less genomes score the task floor")
    {
        Population empty;
        for (std::uint64_t i = 0; i < 3; ++i) {
            empty.push_back({i, Genome{std::vector<Site>(1500, 0), 255}, std::nullopt, -1, 0});
        }
        const auto f = evaluate_population(empty, cfg, *task, 0);
        Brain silent({task->layout(cfg.decode.n_nodes), {}});
        const double floor = evaluate_brain(silent, *task, derive_seed(cfg.seed, {0x656e76}), 0,
                                            cfg.repeats);
        for (double v : f) {
            CHECK(v == floor);
        }
    }
}

TEST_CASE("select_parent")
{
    Rng rng(3);

    SUBCASE("full tournament picks the best, ties to the lower id")
    {
        const auto pop = with_fitness({0.2, 0.9, 0.5, 0.9, 0.1});
        for (int i = 0; i < 100; ++i) {
            CHECK(select_parent(pop, {SelectionMethod::Tournament, 5}, rng) == 1);
        }
    }

    SUBCASE("k=1 is uniform")
    {
        const auto pop = with_fitness(std::vector<double>(10, 0.3));
        std::vector<std::size_t> counts(10, 0);
        for (int i = 0; i < 20000; ++i) {
            ++counts[select_parent(pop, {SelectionMethod::Tournament, 1}, rng)];
        }
        CHECK(mbtest::chi2_uniform(counts) < mbtest::chi2_critical_001(9));
    }

    SUBCASE("roulette is proportional")
    {
        const auto pop = with_fitness({3.0, 1.0});
        int first = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            first += select_parent(pop, {SelectionMethod::Roulette, 1}, rng) == 0 ? 1 : 0;
        }
        CHECK(std::abs(static_cast<double>(first) / n - 0.75) < 0.015);
    }

    SUBCASE("roulette on all-zero fitness is uniform")
    {
        const auto pop = with_fitness({0.0, 0.0, 0.0, 0.0});
        std::vector<std::size_t> counts(4, 0);
        for (int i = 0; i < 20000; ++i) {
            ++counts[select_parent(pop, {SelectionMethod::Roulette, 1}, rng)];
        }
        CHECK(mbtest::chi2_uniform(counts) < mbtest::chi2_critical_001(3));
    }

    SUBCASE("unevaluated organisms are rejected")
    {
        auto pop = with_fitness({1.0, 1.0});
        pop[1].fitness.reset();
        CHECK_THROWS_AS(select_parent(pop, {SelectionMethod::Tournament, 2}, rng), std::logic_error);
    }
}

TEST_CASE("next_generation")
{
    auto cfg = small_config();
    const auto task = make_task(cfg.task);
    Rng rng(4);
    Population pop;
    for (std::uint64_t i = 0; i < cfg.population_size; ++i) {
        pop.push_back({i, founder_genome(cfg, rng), std::nullopt, -1, 0});
    }
    evaluate_population(pop, cfg, *task, 0);
    std::uint64_t next_id = cfg.population_size;

    SUBCASE("full elitism clones the population")
    {
        auto c = cfg;
        c.elitism = c.population_size;
        const auto next = next_generation(pop, c, rng, next_id);
        REQUIRE(next.size() == pop.size());
        for (const auto& o : pop) {
            const auto it = std::find_if(next.begin(), next.end(),
                                         [&](const Organism& n) { return n.id == o.id; });
            REQUIRE(it != next.end());
            CHECK(it->genome == o.genome);
        }
    }

    SUBCASE("the best genome survives unmutated")
    {
        const auto best = std::max_element(pop.begin(), pop.end(), [](const auto& a, const auto& b) {
            return *a.fitness < *b.fitness || (*a.fitness == *b.fitness && a.id > b.id);
        });
        const auto next = next_generation(pop, cfg, rng, next_id);
        CHECK(std::any_of(next.begin(), next.end(), [&](const Organism& o) {
            return o.id == best->id && o.genome == best->genome;
        }));
        for (const auto& o : next) {
            if (o.id != best->id) {
                CHECK(o.id >= cfg.population_size);
                CHECK(o.parent_id >= 0);
                CHECK_FALSE(o.fitness.has_value());
            }
        }
    }

    SUBCASE("size is conserved")
    {
        for (std::size_t gen = 1; gen <= 100; ++gen) {
            pop = next_generation(pop, cfg, rng, next_id);
            REQUIRE(pop.size() == cfg.population_size);
            evaluate_population(pop, cfg, *task, gen);
        }
    }
}

TEST_CASE("evolve")
{
    SUBCASE("zero generations log the founders only")
    {
        auto cfg = small_config();
        cfg.generations = 0;
        const auto rec = evolve(cfg);
        CHECK(rec.stats.size() == 1);
        CHECK(rec.final_population.size() == cfg.population_size);
    }

    SUBCASE("identical seeds give identical runs")
    {
        const auto cfg = small_config();
        const auto d1 = mbtest::scratch_dir("evolve_a");
        const auto d2 = mbtest::scratch_dir("evolve_b");
        EvolveOptions o1;
        o1.out_dir = d1;
        o1.snapshot_every = 5;
        EvolveOptions o2 = o1;
        o2.out_dir = d2;
        o2.jobs = 3;
        const auto r1 = evolve(cfg, o1);
        const auto r2 = evolve(cfg, o2);
        CHECK(read_file(d1 / "stats.csv") == read_file(d2 / "stats.csv"));
        CHECK(r1.stats.size() == cfg.generations + 1);
        REQUIRE(r1.final_population.size() == r2.final_population.size());
        for (std::size_t i = 0; i < r1.final_population.size(); ++i) {
            CHECK(r1.final_population[i].genome == r2.final_population[i].genome);
        }
        CHECK(std::filesystem::exists(d1 / "snapshots" / "gen_000005" / "manifest.csv"));
        CHECK(std::filesystem::exists(d1 / "snapshots" / "gen_000010" / "manifest.csv"));
        CHECK(std::filesystem::exists(d1 / "final" / "manifest.csv"));

        const auto loaded = load_population(d1 / "final");
        REQUIRE(loaded.size() == r1.final_population.size());
        for (std::size_t i = 0; i < loaded.size(); ++i) {
            CHECK(loaded[i].id == r1.final_population[i].id);
            CHECK(loaded[i].genome == r1.final_population[i].genome);
            CHECK(loaded[i].fitness == r1.final_population[i].fitness);
            CHECK(loaded[i].parent_id == r1.final_population[i].parent_id);
        }
    }

    SUBCASE("the elite never gets worse on a deterministic setup")
    {
        auto cfg = small_config();
        cfg.decode.enabled = {GateKind::Deterministic};
        cfg.generations = 40;
        const auto rec = evolve(cfg);
        for (std::size_t g = 1; g < rec.stats.size(); ++g) {
            CHECK(rec.stats[g].max_fitness >= rec.stats[g - 1].max_fitness);
        }
    }

    SUBCASE("early stop")
    {
        auto cfg = small_config();
        EvolveOptions o;
        o.stop = [](const GenerationStats& s) { return s.generation == 3; };
        CHECK(evolve(cfg, o).stats.size() == 4);
    }

    SUBCASE("unwritable output fails before any work")
    {
        auto cfg = small_config();
        const auto d = mbtest::scratch_dir("evolve_blocked");
        std::ofstream(d / "file") << "x";
        EvolveOptions o;
        o.out_dir = d / "file" / "run";
        CHECK_THROWS_AS(evolve(cfg, o), std::filesystem::filesystem_error);
    }
}

TEST_CASE("population snapshots round trip byte for byte")
{
    auto cfg = small_config();
    Rng rng(8);
    Population pop;
    for (std::uint64_t i = 0; i < 5; ++i) {
        pop.push_back({i * 7, founder_genome(cfg, rng), 0.1 * static_cast<double>(i) + 1e-17,
                       static_cast<std::int64_t>(i) - 1, i});
    }
    const auto a = mbtest::scratch_dir("pop_a");
    const auto b = mbtest::scratch_dir("pop_b");
    save_population(pop, a);
    const auto loaded = load_population(a);
    save_population(loaded, b);
    for (const auto& entry : std::filesystem::directory_iterator(a)) {
        CHECK(read_file(entry.path()) == read_file(b / entry.path().filename()));
    }
    REQUIRE(loaded.size() == pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        CHECK(loaded[i].fitness == pop[i].fitness);
        CHECK(loaded[i].genome == pop[i].genome);
        CHECK(loaded[i].n_gates == pop[i].n_gates);
    }
    CHECK(read_file(a / "manifest.csv").rfind("id,fitness,parent_id,n_gates,file\n", 0) == 0);
}

TEST_CASE("stats rows")
{
    std::ostringstream os;
    write_stats_header(os);
    write_stats_row({2, 0.75, 0.5, 0.25, 5000.5, 3.0}, os);
    CHECK(os.str()
          == "generation,max_fitness,mean_fitness,min_fitness,mean_genome_len,mean_gates\n"
             "2,0.75,0.5,0.25,5000.5,3\n");
}

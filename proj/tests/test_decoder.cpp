#include <algorithm>

#include "decoder_oracle.hpp"
#include "doctest.h"
#include "mb/brain.hpp"
#include "mb/decoder.hpp"
#include "support.hpp"

using namespace mb;
using mbtest::GeneSpec;

namespace {

DecodeConfig all_kinds()
{
    DecodeConfig cfg;
    cfg.enabled = {kAllGateKinds.begin(), kAllGateKinds.end()};
    return cfg;
}

/// Random genome with a few planted codons of every kind, some of them
/// straddling the end of the genome.
Genome planted_genome(std::size_t len, Rng& rng, const DecodeConfig& cfg, int per_kind = 2)
{
    auto g = random_genome(len, 255, rng);
    std::uniform_int_distribution<std::size_t> pos(0, len - 1);
    for (auto kind : kAllGateKinds) {
        const auto c = cfg.codons.codon(kind);
        for (int i = 0; i < per_kind; ++i) {
            const auto p = pos(rng);
            g.sites[p] = c.first;
            g.sites[(p + 1) % len] = c.second;
        }
    }
    return g;
}

Genome rotate(const Genome& g, std::size_t k)
{
    Genome r = g;
    std::rotate(r.sites.begin(), r.sites.begin() + static_cast<std::ptrdiff_t>(k), r.sites.end());
    return r;
}

bool row_sums_ok(const ProbabilityTable& t)
{
    for (std::size_t r = 0; r < t.rows; ++r) {
        double s = 0.0;
        for (double v : t.row(r)) {
            if (v < 0.0 || v > 1.0) {
                return false;
            }
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("codon registry")
{
    CodonRegistry reg;
    CHECK(reg.codon(GateKind::Probabilistic) == Codon{42, 213});
    CHECK(reg.codon(GateKind::Deterministic) == Codon{43, 212});
    CHECK(reg.codon(GateKind::Ann) == Codon{44, 211});
    CHECK(reg.codon(GateKind::Threshold) == Codon{45, 210});
    CHECK(reg.codon(GateKind::Timer) == Codon{46, 209});
    CHECK(reg.codon(GateKind::Feedback) == Codon{47, 208});
    CHECK(reg.codon(GateKind::TernaryDeterministic) == Codon{48, 207});
    CHECK(reg.codon(GateKind::TernaryProbabilistic) == Codon{49, 206});
    CHECK(reg.lookup(42, 213) == GateKind::Probabilistic);
    CHECK_FALSE(reg.lookup(42, 212).has_value());

    CHECK_THROWS_AS(reg.set(GateKind::Ann, {42, 213}), std::invalid_argument);
    CHECK_THROWS_AS(reg.set(GateKind::Ann, {0, 7}), std::invalid_argument);
    CHECK_THROWS_AS(reg.set(GateKind::Ann, {7, 1}), std::invalid_argument);
    reg.set(GateKind::Ann, {90, 91});
    CHECK(reg.lookup(90, 91) == GateKind::Ann);
    CHECK_FALSE(reg.lookup(44, 211).has_value());
}

TEST_CASE("scan_codons")
{
    const CodonRegistry reg;
    Genome g{{9, 42, 213, 9, 43, 212, 9}, 255};
    CHECK(scan_codons(g, reg)
          == std::vector<CodonHit>{{1, GateKind::Probabilistic}, {4, GateKind::Deterministic}});

    Genome wrap{{213, 5, 5, 42}, 255};
    CHECK(scan_codons(wrap, reg) == std::vector<CodonHit>{{3, GateKind::Probabilistic}});

    Genome none{{1, 2, 3, 213, 212, 5}, 255};
    CHECK(scan_codons(none, reg).empty());
}

TEST_CASE("read_circular")
{
    Genome g{{1, 2, 3}, 255};
    CHECK(read_circular(g, 2, 3) == std::vector<Site>{3, 1, 2});
    CHECK(read_circular(g, 1, 0).empty());
    CHECK(read_circular(g, 0, 3) == g.sites);
    CHECK(read_circular(g, 0, 7) == std::vector<Site>{1, 2, 3, 1, 2, 3, 1});
}

TEST_CASE("decode_gene header and addresses")
{
    DecodeConfig cfg;
    cfg.n_nodes = 12;
    Genome g{std::vector<Site>(400, 0), 255};
    g.sites[0] = 43;
    g.sites[1] = 212;
    g.sites[2] = 3;
    g.sites[3] = 2;
    g.sites[4] = 25;
    const auto bp = decode_gene(g, 0, GateKind::Deterministic, cfg);
    REQUIRE(bp);
    CHECK(bp->inputs.size() == 4);
    CHECK(bp->outputs.size() == 3);
    CHECK(bp->inputs[0] == 1);
    CHECK(bp->span_start == 0);
    CHECK(bp->span_length == 2 + 2 + 4 + 4 + 16);

    CHECK_FALSE(decode_gene(g, 0, GateKind::Timer, cfg).has_value());
}

TEST_CASE("gene widths")
{
    const DecodeConfig cfg;
    CHECK(gene_width(GateKind::Probabilistic, cfg, 1, 1) == 268);
    CHECK(gene_width(GateKind::Probabilistic, cfg, 4, 4) == 268);
    CHECK(gene_width(GateKind::Deterministic, cfg, 2, 2) == 28);
    CHECK(gene_width(GateKind::Timer, cfg, 1, 1) == 13);
    CHECK(gene_width(GateKind::Threshold, cfg, 3, 1) == 13);
    CHECK(gene_width(GateKind::Ann, cfg, 1, 1) == 28);
    CHECK(gene_width(GateKind::Feedback, cfg, 1, 1) == 272);
    CHECK(gene_width(GateKind::TernaryDeterministic, cfg, 1, 1) == 93);
    CHECK(gene_width(GateKind::TernaryProbabilistic, cfg, 2, 1) == 12 + 27);
}

TEST_CASE("decode_brain")
{
    const DecodeConfig cfg;
    const auto layout = BrainLayout::standard(16, 1, 1);

    SUBCASE("one deterministic gene")
    {
        const auto g = mbtest::genome_with_genes(
            {GeneSpec{GateKind::Deterministic, {0}, {1}, {0, 1}}}, cfg);
        const auto spec = decode_brain_spec(g, cfg, layout);
        REQUIRE(spec.gates.size() == 1);
        CHECK(spec.gates[0].inputs == std::vector<std::size_t>{0});
        CHECK(std::get<LogicTable>(spec.gates[0].payload).rows == std::vector<std::uint32_t>{0, 1});
    }

    SUBCASE("overlapping genes both decode")
    {
        // A deterministic gene whose payload carries a second start codon.
        auto g = mbtest::genome_with_genes(
            {GeneSpec{GateKind::Deterministic, {0}, {1}, {0, 0, 0, 0, 42, 213, 0, 0}}}, cfg);
        const auto spec = decode_brain_spec(g, cfg, layout);
        REQUIRE(spec.gates.size() == 2);
        CHECK(spec.gates[0].kind == GateKind::Deterministic);
        CHECK(spec.gates[1].kind == GateKind::Probabilistic);
        CHECK(spec.gates[1].span_start < spec.gates[0].span_start + spec.gates[0].span_length);
    }

    SUBCASE("no codons gives an empty brain")
    {
        Genome g{std::vector<Site>(3000, 7), 255};
        CHECK(decode_brain_spec(g, cfg, layout).gates.empty());
    }

    SUBCASE("a gene may wrap around the end")
    {
        const auto gene = mbtest::encode_gene(GeneSpec{GateKind::Deterministic, {0}, {1}, {0, 1}},
                                              cfg);
        Genome w{std::vector<Site>(100, 0), 255};
        for (std::size_t i = 0; i < gene.size(); ++i) {
            w.sites[(95 + i) % 100] = gene[i];
        }
        const auto spec = decode_brain_spec(w, cfg, layout);
        REQUIRE(spec.gates.size() == 1);
        CHECK(spec.gates[0].span_start == 95);
        CHECK(std::get<LogicTable>(spec.gates[0].payload).rows == std::vector<std::uint32_t>{0, 1});
    }

    SUBCASE("decoding is repeatable")
    {
        Rng rng(2);
        const auto g = planted_genome(3000, rng, cfg);
        const auto a = decode_genes(g, cfg);
        const auto b = decode_genes(g, cfg);
        CHECK(a == b);
    }
}

TEST_CASE("rotation equivariance")
{
    const auto cfg = all_kinds();
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t len = 300 + trial * 7;
        const auto g = planted_genome(len, rng, cfg);
        const std::size_t k = std::uniform_int_distribution<std::size_t>(0, len - 1)(rng);
        auto expected = decode_genes(g, cfg);
        for (auto& bp : expected) {
            bp.span_start = (bp.span_start + len - k) % len;
        }
        auto got = decode_genes(rotate(g, k), cfg);
        auto by_span = [](const GateBlueprint& a, const GateBlueprint& b) {
            return std::tie(a.span_start, a.kind) < std::tie(b.span_start, b.kind);
        };
        std::sort(expected.begin(), expected.end(), by_span);
        std::sort(got.begin(), got.end(), by_span);
        REQUIRE(got == expected);
    }
}

TEST_CASE("every decoded blueprint is well formed")
{
    auto cfg = all_kinds();
    cfg.n_nodes = 13;
    Rng rng(23);
    std::size_t gates = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t len = std::uniform_int_distribution<std::size_t>(2, 1500)(rng);
        auto g = random_genome(len, 255, rng);
        if (len > 20 && trial % 2 == 0) {
            g = planted_genome(len, rng, cfg, 1);
        }
        for (const auto& bp : decode_genes(g, cfg)) {
            ++gates;
            REQUIRE(bp.inputs.size() >= cfg.min_in);
            REQUIRE(bp.inputs.size() <= cfg.max_in);
            REQUIRE(bp.outputs.size() >= cfg.min_out);
            REQUIRE(bp.outputs.size() <= cfg.max_out);
            for (auto n : nodes_read(bp)) {
                REQUIRE(n < cfg.n_nodes);
            }
            for (auto n : bp.outputs) {
                REQUIRE(n < cfg.n_nodes);
            }
            if (const auto* t = std::get_if<ProbabilityTable>(&bp.payload)) {
                REQUIRE(row_sums_ok(*t));
            }
            if (const auto* f = std::get_if<FeedbackParams>(&bp.payload)) {
                REQUIRE(row_sums_ok(f->table));
                REQUIRE(f->memory >= 1);
                REQUIRE(f->memory <= 8);
                REQUIRE(f->delta_max >= 0.01);
                REQUIRE(f->delta_max <= 0.5);
            }
            if (const auto* w = std::get_if<WeightMatrix>(&bp.payload)) {
                for (double v : w->weights) {
                    REQUIRE(v >= cfg.weight_lo);
                    REQUIRE(v <= cfg.weight_hi);
                }
            }
        }
    }
    CHECK(gates > 10000);
}

TEST_CASE("decoder agrees with the straight-line oracle")
{
    const auto cfg = all_kinds();
    Rng rng(29);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t len = std::uniform_int_distribution<std::size_t>(2, 2000)(rng);
        auto g = len > 20 ? planted_genome(len, rng, cfg) : random_genome(len, 255, rng);
        const auto hits = scan_codons(g, cfg.codons);
        const auto oracle_hits = mbtest::oracle_scan(g, cfg);
        REQUIRE(hits.size() == oracle_hits.size());
        for (std::size_t i = 0; i < hits.size(); ++i) {
            REQUIRE(hits[i].position == oracle_hits[i].first);
            REQUIRE(hits[i].kind == oracle_hits[i].second);
        }
        REQUIRE(decode_genes(g, cfg) == mbtest::oracle_decode(g, cfg));
    }
}

TEST_CASE("disabled kinds are skipped")
{
    DecodeConfig cfg;
    cfg.enabled = {GateKind::Deterministic};
    const auto g = mbtest::genome_with_genes(
        {GeneSpec{GateKind::Deterministic, {0}, {1}, {}},
         GeneSpec{GateKind::Probabilistic, {0}, {1}, {}}},
        cfg);
    const auto genes = decode_genes(g, cfg);
    REQUIRE(genes.size() == 1);
    CHECK(genes[0].kind == GateKind::Deterministic);
}

TEST_CASE("DecodeConfig validation")
{
    DecodeConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.min_in = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.min_out = 3;
    cfg.max_out = 2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.n_nodes = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

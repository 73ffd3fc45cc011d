#include "mb/genome.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>
#include <string_view>

namespace mb {

void MutationConfig::validate() const
{
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument(std::string(name) + " must be in [0,1]");
        }
    };
    prob(point_rate, "point_rate");
    prob(segment_delete_prob, "segment_delete_prob");
    prob(segment_copy_prob, "segment_copy_prob");
    if (segment_min == 0 || segment_min > segment_max) {
        throw std::invalid_argument("require 0 < segment_min <= segment_max");
    }
    if (genome_min >= genome_max) {
        throw std::invalid_argument("require genome_min < genome_max");
    }
}

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset)
{
}

std::size_t map_site(std::uint64_t value, std::size_t lo, std::size_t hi)
{
    if (lo > hi) {
        throw std::invalid_argument("map_site: lo > hi");
    }
    return lo + static_cast<std::size_t>(value % (hi - lo + 1));
}

Genome random_genome(std::size_t length, Site alphabet_max, Rng& rng, std::size_t max_length)
{
    if (length < 1 || length > max_length) {
        throw std::invalid_argument("random_genome: length out of bounds");
    }
    Genome g;
    g.alphabet_max = alphabet_max;
    g.sites.resize(length);
    std::uniform_int_distribution<Site> site(0, alphabet_max);
    for (auto& s : g.sites) {
        s = site(rng);
    }
    return g;
}

Genome point_mutate(Genome genome, const MutationConfig& cfg, Rng& rng)
{
    const double p = cfg.point_rate;
    if (p <= 0.0 || genome.sites.empty()) {
        return genome;
    }
    std::uniform_int_distribution<Site> site(0, genome.alphabet_max);
    if (p >= 1.0) {
        for (auto& s : genome.sites) {
            s = site(rng);
        }
        return genome;
    }
    // Gaps between hits of independent Bernoulli(p) trials are geometric.
    std::geometric_distribution<std::size_t> gap(p);
    const std::size_t n = genome.sites.size();
    for (std::size_t i = gap(rng); i < n; i += 1 + gap(rng)) {
        genome.sites[i] = site(rng);
    }
    return genome;
}

Genome segment_delete(Genome genome, const MutationConfig& cfg, Rng& rng)
{
    const std::size_t len = genome.sites.size();
    if (len <= cfg.genome_min || !bernoulli(rng, cfg.segment_delete_prob)) {
        return genome;
    }
    std::uniform_int_distribution<std::size_t> size(cfg.segment_min, cfg.segment_max);
    const std::size_t k = std::min(size(rng), len - cfg.genome_min);
    std::uniform_int_distribution<std::size_t> start(0, len - k);
    const auto first = genome.sites.begin() + static_cast<std::ptrdiff_t>(start(rng));
    genome.sites.erase(first, first + static_cast<std::ptrdiff_t>(k));
    return genome;
}

Genome segment_copy(Genome genome, const MutationConfig& cfg, Rng& rng)
{
    const std::size_t len = genome.sites.size();
    if (len == 0 || len >= cfg.genome_max || !bernoulli(rng, cfg.segment_copy_prob)) {
        return genome;
    }
    std::uniform_int_distribution<std::size_t> size(cfg.segment_min, cfg.segment_max);
    const std::size_t k = std::min(size(rng), len);
    std::uniform_int_distribution<std::size_t> start(0, len - k);
    const std::size_t from = start(rng);
    std::uniform_int_distribution<std::size_t> where(0, len);
    const std::size_t at = where(rng);

    std::vector<Site> segment(genome.sites.begin() + static_cast<std::ptrdiff_t>(from),
                              genome.sites.begin() + static_cast<std::ptrdiff_t>(from + k));
    genome.sites.insert(genome.sites.begin() + static_cast<std::ptrdiff_t>(at), segment.begin(),
                        segment.end());
    return genome;
}

Genome clamp_length(Genome genome, const MutationConfig& cfg)
{
    if (genome.sites.size() > cfg.genome_max) {
        genome.sites.resize(cfg.genome_max);
    }
    return genome;
}

Genome replicate(const Genome& parent, const MutationConfig& cfg, Rng& rng)
{
    Genome child = point_mutate(parent, cfg, rng);
    child = segment_delete(std::move(child), cfg, rng);
    child = segment_copy(std::move(child), cfg, rng);
    return clamp_length(std::move(child), cfg);
}

void save_genome(const Genome& genome, std::ostream& out)
{
    out << "MBGENOME v1 alphabet=" << genome.alphabet_max << " length=" << genome.sites.size()
        << '\n';
    for (std::size_t i = 0; i < genome.sites.size(); ++i) {
        if (i != 0) {
            out << ' ';
        }
        out << genome.sites[i];
    }
    out << '\n';
}

std::string save_genome(const Genome& genome)
{
    std::ostringstream os;
    save_genome(genome, os);
    return os.str();
}

namespace {

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

// Parses "<key>=<unsigned>" starting at text[pos]; advances pos past it.
std::uint64_t parse_field(const std::string& text, std::size_t& pos, std::string_view key)
{
    if (text.compare(pos, key.size(), key) != 0) {
        throw ParseError("expected '" + std::string(key) + "'", pos);
    }
    pos += key.size();
    std::uint64_t value = 0;
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr == begin) {
        throw ParseError("expected unsigned integer after '" + std::string(key) + "'", pos);
    }
    pos += static_cast<std::size_t>(ptr - begin);
    return value;
}

} // namespace

Genome load_genome_string(const std::string& text)
{
    std::size_t pos = 0;
    static constexpr std::string_view magic = "MBGENOME v1 ";
    if (text.compare(0, magic.size(), magic) != 0) {
        throw ParseError("missing 'MBGENOME v1' header", 0);
    }
    pos = magic.size();
    const auto alphabet = parse_field(text, pos, "alphabet=");
    if (alphabet > std::numeric_limits<Site>::max()) {
        throw ParseError("alphabet too large", pos);
    }
    if (pos >= text.size() || text[pos] != ' ') {
        throw ParseError("expected ' length='", pos);
    }
    ++pos;
    const auto length = parse_field(text, pos, "length=");
    if (pos < text.size() && text[pos] == '\r') {
        ++pos;
    }
    if (pos >= text.size() || text[pos] != '\n') {
        throw ParseError("header must end with a newline", pos);
    }
    ++pos;
    if (length == 0) {
        throw ParseError("empty site list", pos);
    }

    Genome g;
    g.alphabet_max = static_cast<Site>(alphabet);
    g.sites.reserve(length);
    const char* data = text.data();
    while (true) {
        while (pos < text.size() && is_space(text[pos])) {
            ++pos;
        }
        if (pos >= text.size()) {
            break;
        }
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(data + pos, data + text.size(), v);
        if (ec != std::errc{} || ptr == data + pos) {
            throw ParseError("malformed site value", pos);
        }
        if (v > alphabet) {
            throw ParseError("site value " + std::to_string(v) + " exceeds alphabet max "
                                 + std::to_string(alphabet),
                             pos);
        }
        if (g.sites.size() == length) {
            throw ParseError("more sites than declared length", pos);
        }
        g.sites.push_back(static_cast<Site>(v));
        pos += static_cast<std::size_t>(ptr - (data + pos));
        if (pos < text.size() && !is_space(text[pos])) {
            throw ParseError("malformed site value", pos);
        }
    }
    if (g.sites.size() != length) {
        throw ParseError("truncated file: expected " + std::to_string(length) + " sites, found "
                             + std::to_string(g.sites.size()),
                         pos);
    }
    return g;
}

Genome load_genome(std::istream& in)
{
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return load_genome_string(text);
}

} // namespace mb

#include "mb/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

namespace mb {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_value(std::string_view key, std::string_view v)
{
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
        throw ConfigError(std::string(key), "invalid value '" + std::string(v) + "' for '"
                                                + std::string(key) + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view v)
{
    if (v == "true" || v == "1") {
        return true;
    }
    if (v == "false" || v == "0") {
        return false;
    }
    throw ConfigError(std::string(key), "expected true/false for '" + std::string(key) + "'");
}

std::string fmt(double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct Field {
    std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T, class Proj>
Field number_field(Proj proj)
{
    return {[proj](RunConfig& c, std::string_view k, std::string_view v) {
                proj(c) = parse_value<T>(k, v);
            },
            [proj](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) {
                    return fmt(proj(c));
                } else {
                    return std::to_string(proj(c));
                }
            }};
}

Field codon_field(GateKind kind)
{
    return {[kind](RunConfig& c, std::string_view k, std::string_view v) {
                const auto colon = v.find(':');
                if (colon == std::string_view::npos) {
                    throw ConfigError(std::string(k), "codon must be written as first:second");
                }
                const auto a = parse_value<Site>(k, v.substr(0, colon));
                const auto b = parse_value<Site>(k, v.substr(colon + 1));
                try {
                    c.evolution.decode.codons.set(kind, {a, b});
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(std::string(k), e.what());
                }
            },
            [kind](const RunConfig& c) {
                const auto codon = c.evolution.decode.codons.codon(kind);
                return std::to_string(codon.first) + ":" + std::to_string(codon.second);
            }};
}

const std::vector<std::pair<std::string, Field>>& fields()
{
    using E = EvolutionConfig;
    static const std::vector<std::pair<std::string, Field>> table = [] {
        std::vector<std::pair<std::string, Field>> t;
        auto evo = [](auto member) {
            return [member](auto& c) -> auto& { return c.evolution.*member; };
        };
        t.emplace_back("population_size", number_field<std::size_t>(evo(&E::population_size)));
        t.emplace_back("generations", number_field<std::size_t>(evo(&E::generations)));
        t.emplace_back("selection",
                       Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                                 if (v == "tournament") {
                                     c.evolution.selection.method = SelectionMethod::Tournament;
                                 } else if (v == "roulette") {
                                     c.evolution.selection.method = SelectionMethod::Roulette;
                                 } else {
                                     throw ConfigError(std::string(k),
                                                       "selection must be tournament or roulette");
                                 }
                             },
                             [](const RunConfig& c) -> std::string {
                                 return c.evolution.selection.method == SelectionMethod::Roulette
                                          ? "roulette"
                                          : "tournament";
                             }});
        t.emplace_back("tournament_k", number_field<std::size_t>([](auto& c) -> auto& {
                           return c.evolution.selection.tournament_k;
                       }));
        t.emplace_back("elitism", number_field<std::size_t>(evo(&E::elitism)));
        t.emplace_back("seed",
                       Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                                 c.evolution.seed = parse_value<std::uint64_t>(k, v);
                                 c.seed_given = true;
                             },
                             [](const RunConfig& c) { return std::to_string(c.evolution.seed); }});
        t.emplace_back("initial_length", number_field<std::size_t>(evo(&E::initial_length)));
        t.emplace_back("alphabet_max", number_field<Site>(evo(&E::alphabet_max)));
        t.emplace_back("seeded_codons", number_field<std::size_t>(evo(&E::seeded_codons)));
        t.emplace_back("repeats", number_field<int>(evo(&E::repeats)));
        t.emplace_back("zero_outputs",
                       Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                                 c.evolution.zero_outputs_before_update = parse_bool(k, v);
                             },
                             [](const RunConfig& c) -> std::string {
                                 return c.evolution.zero_outputs_before_update ? "true" : "false";
                             }});

        auto mut = [](auto member) {
            return [member](auto& c) -> auto& { return c.evolution.mutation.*member; };
        };
        using M = MutationConfig;
        t.emplace_back("point_rate", number_field<double>(mut(&M::point_rate)));
        t.emplace_back("segment_delete_prob", number_field<double>(mut(&M::segment_delete_prob)));
        t.emplace_back("segment_copy_prob", number_field<double>(mut(&M::segment_copy_prob)));
        t.emplace_back("segment_min", number_field<std::size_t>(mut(&M::segment_min)));
        t.emplace_back("segment_max", number_field<std::size_t>(mut(&M::segment_max)));
        t.emplace_back("genome_min", number_field<std::size_t>(mut(&M::genome_min)));
        t.emplace_back("genome_max", number_field<std::size_t>(mut(&M::genome_max)));

        auto dec = [](auto member) {
            return [member](auto& c) -> auto& { return c.evolution.decode.*member; };
        };
        using D = DecodeConfig;
        t.emplace_back("n_nodes", number_field<std::size_t>(dec(&D::n_nodes)));
        t.emplace_back("min_in", number_field<std::size_t>(dec(&D::min_in)));
        t.emplace_back("max_in", number_field<std::size_t>(dec(&D::max_in)));
        t.emplace_back("min_out", number_field<std::size_t>(dec(&D::min_out)));
        t.emplace_back("max_out", number_field<std::size_t>(dec(&D::max_out)));
        t.emplace_back("weight_lo", number_field<double>(dec(&D::weight_lo)));
        t.emplace_back("weight_hi", number_field<double>(dec(&D::weight_hi)));
        t.emplace_back("feedback_floor", number_field<double>(dec(&D::feedback_floor)));
        t.emplace_back("gates",
                       Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                                 std::set<GateKind> kinds;
                                 std::size_t start = 0;
                                 while (start <= v.size()) {
                                     auto end = v.find(',', start);
                                     if (end == std::string_view::npos) {
                                         end = v.size();
                                     }
                                     const auto name = trim(v.substr(start, end - start));
                                     const auto kind = parse_gate_kind(name);
                                     if (!kind) {
                                         throw ConfigError(std::string(k), "unknown gate kind '"
                                                                               + std::string(name)
                                                                               + "'");
                                     }
                                     kinds.insert(*kind);
                                     start = end + 1;
                                 }
                                 c.evolution.decode.enabled = std::move(kinds);
                             },
                             [](const RunConfig& c) {
                                 std::string out;
                                 for (auto kind : c.evolution.decode.enabled) {
                                     if (!out.empty()) {
                                         out += ',';
                                     }
                                     out += to_string(kind);
                                 }
                                 return out;
                             }});
        for (auto kind : kAllGateKinds) {
            t.emplace_back("codon_" + std::string(to_string(kind)), codon_field(kind));
        }

        t.emplace_back("task",
                       Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                                 if (v != "nback" && v != "association") {
                                     throw ConfigError(std::string(k),
                                                       "task must be nback or association");
                                 }
                                 c.evolution.task.name = std::string(v);
                             },
                             [](const RunConfig& c) { return c.evolution.task.name; }});
        t.emplace_back("nback_k", number_field<int>([](auto& c) -> auto& {
                           return c.evolution.task.nback_k;
                       }));
        t.emplace_back("lifetime", number_field<std::size_t>([](auto& c) -> auto& {
                           return c.evolution.task.lifetime;
                       }));
        t.emplace_back("ticks_per_percept", number_field<int>([](auto& c) -> auto& {
                           return c.evolution.task.ticks_per_percept;
                       }));
        t.emplace_back("snapshot_every", number_field<std::size_t>([](auto& c) -> auto& {
                           return c.snapshot_every;
                       }));
        return t;
    }();
    return table;
}

} // namespace

ConfigError::ConfigError(std::string key, const std::string& what)
    : std::runtime_error(what), key_(std::move(key))
{
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, f] : fields()) {
            k.push_back(name);
        }
        return k;
    }();
    return keys;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value)
{
    key = trim(key);
    value = trim(value);
    for (const auto& [name, f] : fields()) {
        if (name == key) {
            f.set(cfg, key, value);
            return;
        }
    }
    throw ConfigError(std::string(key), "unknown config key '" + std::string(key) + "'");
}

void apply_override(RunConfig& cfg, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError(std::string(trim(assignment)),
                          "expected key=value, got '" + std::string(assignment) + "'");
    }
    apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void read_config(RunConfig& cfg, std::istream& in)
{
    std::string line;
    while (std::getline(in, line)) {
        std::string_view v = line;
        if (const auto hash = v.find('#'); hash != std::string_view::npos) {
            v = v.substr(0, hash);
        }
        v = trim(v);
        if (v.empty()) {
            continue;
        }
        apply_override(cfg, v);
    }
}

void read_config_file(RunConfig& cfg, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::filesystem::filesystem_error(
            "cannot read config", path, std::make_error_code(std::errc::no_such_file_or_directory));
    }
    read_config(cfg, in);
}

std::string format_config(const RunConfig& cfg)
{
    std::ostringstream os;
    for (const auto& [name, f] : fields()) {
        os << name << '=' << f.get(cfg) << '\n';
    }
    return os.str();
}

} // namespace mb

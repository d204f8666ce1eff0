#include "evograph/config.hpp"

#include "evograph/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace evograph {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw Error(Errc::InvalidConfig, fmt::format("{}: '{}' is not {}", key, value, expected));
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto pos = s.find(',', start);
        auto item = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!item.empty()) out.push_back(std::move(item));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
T parse_integer(std::string_view key, std::string_view text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) bad_value(key, text, "an integer");
    return value;
}

double parse_real(std::string_view key, std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty() || !std::isfinite(value)) bad_value(key, text, "a finite number");
    return value;
}

bool parse_flag(std::string_view key, std::string_view text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    bad_value(key, text, "a boolean");
}

std::vector<double> parse_reals(std::string_view key, std::string_view text, std::size_t expected) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(parse_real(key, item));
    if (out.size() != expected) bad_value(key, text, fmt::format("a list of {} numbers", expected));
    return out;
}

Range parse_range(std::string_view key, std::string_view text) {
    const auto v = parse_reals(key, text, 2);
    return {v[0], v[1]};
}

WeightVector parse_weight_vector(std::string_view key, std::string_view text) {
    const auto v = parse_reals(key, text, kFitnessSize);
    return Eigen::Map<const WeightVector>(v.data());
}

std::string fmt_real(double x) { return fmt::format("{}", x); }
std::string fmt_flag(bool b) { return b ? "true" : "false"; }
std::string fmt_range(const Range& r) { return fmt::format("{},{}", r.lo, r.hi); }
template <typename V>
std::string fmt_list(const V& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt_real(v[i]);
    return out;
}

struct Key {
    std::string name;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename Field>
Key real_key(std::string name, Field field) {
    return {name, [name, field](RunConfig& c, std::string_view v) { field(c) = parse_real(name, v); },
            [field](const RunConfig& c) { return fmt_real(field(const_cast<RunConfig&>(c))); }};
}

template <typename Int, typename Field>
Key int_key(std::string name, Field field) {
    return {name, [name, field](RunConfig& c, std::string_view v) { field(c) = parse_integer<Int>(name, v); },
            [field](const RunConfig& c) { return fmt::format("{}", field(const_cast<RunConfig&>(c))); }};
}

template <typename Field>
Key flag_key(std::string name, Field field) {
    return {name, [name, field](RunConfig& c, std::string_view v) { field(c) = parse_flag(name, v); },
            [field](const RunConfig& c) { return fmt_flag(field(const_cast<RunConfig&>(c))); }};
}

template <typename Field>
Key range_key(std::string name, Field field) {
    return {name, [name, field](RunConfig& c, std::string_view v) { field(c) = parse_range(name, v); },
            [field](const RunConfig& c) { return fmt_range(field(const_cast<RunConfig&>(c))); }};
}

const std::vector<Key>& registry() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        // engine
        k.push_back(int_key<int>("engine.n", [](RunConfig& c) -> int& { return c.engine.n; }));
        k.push_back(int_key<int>("engine.T", [](RunConfig& c) -> int& { return c.engine.T; }));
        k.push_back(real_key("engine.gamma", [](RunConfig& c) -> double& { return c.engine.gamma; }));
        k.push_back(int_key<std::uint64_t>("engine.seed", [](RunConfig& c) -> std::uint64_t& { return c.engine.seed; }));
        k.push_back(int_key<int>("engine.threads", [](RunConfig& c) -> int& { return c.engine.threads; }));
        k.push_back(int_key<std::size_t>("engine.risk_window",
                                         [](RunConfig& c) -> std::size_t& { return c.engine.risk_window; }));
        k.push_back(real_key("engine.mutation_rate",
                             [](RunConfig& c) -> double& { return c.engine.operators.mutation_rate; }));
        k.push_back(flag_key("engine.disable_wm", [](RunConfig& c) -> bool& { return c.engine.ablations.disable_wm; }));
        k.push_back(flag_key("engine.disable_cp", [](RunConfig& c) -> bool& { return c.engine.ablations.disable_cp; }));
        k.push_back(flag_key("engine.disable_novelty",
                             [](RunConfig& c) -> bool& { return c.engine.ablations.disable_novelty; }));
        // operators
        for (auto kind : kAllOperatorKinds) {
            auto lower = std::string(to_string(kind));
            std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
            const auto slot = static_cast<std::size_t>(kind);
            k.push_back(flag_key("operators.enable_" + lower,
                                 [slot](RunConfig& c) -> bool& { return c.engine.operators.enabled[slot]; }));
        }
        k.push_back(real_key("operators.alpha", [](RunConfig& c) -> double& { return c.engine.operators.alpha; }));
        k.push_back({"operators.theta",
                     [](RunConfig& c, std::string_view v) {
                         const auto t = parse_reals("operators.theta", v, 4);
                         c.engine.operators.theta = Eigen::Vector4d(t[0], t[1], t[2], t[3]);
                     },
                     [](const RunConfig& c) { return fmt_list(c.engine.operators.theta); }});
        k.push_back(real_key("operators.tau_d", [](RunConfig& c) -> double& { return c.engine.operators.tau_d; }));
        k.push_back(int_key<int>("operators.rebuilds", [](RunConfig& c) -> int& { return c.engine.operators.rebuilds; }));
        k.push_back(real_key("operators.threshold",
                             [](RunConfig& c) -> double& { return c.engine.operators.transmute_threshold; }));
        k.push_back(int_key<int>("operators.max_iters",
                                 [](RunConfig& c) -> int& { return c.engine.operators.transmute_max_iters; }));
        // selection
        k.push_back(real_key("selection.alpha_sel", [](RunConfig& c) -> double& { return c.engine.selection.alpha_sel; }));
        k.push_back(real_key("selection.beta_nov", [](RunConfig& c) -> double& { return c.engine.selection.beta_nov; }));
        k.push_back(int_key<std::size_t>("selection.capacity",
                                         [](RunConfig& c) -> std::size_t& { return c.engine.archive_capacity; }));
        k.push_back(int_key<std::size_t>("selection.k", [](RunConfig& c) -> std::size_t& { return c.engine.novelty_k; }));
        k.push_back(real_key("selection.novelty_default",
                             [](RunConfig& c) -> double& { return c.engine.novelty_default; }));
        // bandit
        k.push_back(real_key("bandit.eta", [](RunConfig& c) -> double& { return c.engine.eta; }));
        k.push_back({"bandit.initial_w",
                     [](RunConfig& c, std::string_view v) {
                         if (trim(v) == "uniform") c.engine.initial_w.reset();
                         else c.engine.initial_w = parse_weight_vector("bandit.initial_w", v);
                     },
                     [](const RunConfig& c) {
                         return c.engine.initial_w ? fmt_list(*c.engine.initial_w) : std::string("uniform");
                     }});
        k.push_back({"bandit.pinned",
                     [](RunConfig& c, std::string_view v) {
                         std::array<bool, kFitnessSize> mask{};
                         for (const auto& name : split_list(v)) {
                             if (name == "none") continue;
                             const auto it = std::find(kFitnessNames.begin(), kFitnessNames.end(), name);
                             if (it == kFitnessNames.end()) bad_value("bandit.pinned", name, "a fitness component (U,P,S,B,D,C)");
                             mask[static_cast<std::size_t>(it - kFitnessNames.begin())] = true;
                         }
                         c.engine.pinned = mask;
                     },
                     [](const RunConfig& c) {
                         std::vector<std::string_view> names;
                         for (std::size_t i = 0; i < kFitnessSize; ++i)
                             if (c.engine.pinned[i]) names.push_back(kFitnessNames[i]);
                         return names.empty() ? std::string("none") : fmt::format("{}", fmt::join(names, ","));
                     }});
        // safety
        k.push_back(real_key("safety.tau_test", [](RunConfig& c) -> double& { return c.engine.safety.tau_test; }));
        k.push_back(real_key("safety.p_max", [](RunConfig& c) -> double& { return c.engine.safety.p_max; }));
        k.push_back(real_key("safety.epsilon", [](RunConfig& c) -> double& { return c.engine.safety.epsilon; }));
        k.push_back(real_key("safety.delta", [](RunConfig& c) -> double& { return c.engine.safety.delta; }));
        k.push_back(flag_key("safety.require_approval",
                             [](RunConfig& c) -> bool& { return c.engine.safety.require_approval; }));
        k.push_back({"safety.locked",
                     [](RunConfig& c, std::string_view v) {
                         c.engine.safety.locked_node_ids.clear();
                         for (auto& id : split_list(v))
                             if (id != "none") c.engine.safety.locked_node_ids.insert(std::move(id));
                     },
                     [](const RunConfig& c) {
                         const auto& ids = c.engine.safety.locked_node_ids;
                         return ids.empty() ? std::string("none") : fmt::format("{}", fmt::join(ids, ","));
                     }});
        k.push_back({"safety.approved_generations",
                     [](RunConfig& c, std::string_view v) {
                         c.engine.safety.approved_generations.clear();
                         for (const auto& g : split_list(v))
                             if (g != "none")
                                 c.engine.safety.approved_generations.insert(parse_integer<int>("safety.approved_generations", g));
                     },
                     [](const RunConfig& c) {
                         const auto& gens = c.engine.safety.approved_generations;
                         return gens.empty() ? std::string("none") : fmt::format("{}", fmt::join(gens, ","));
                     }});
        // metrics
        k.push_back(real_key("metrics.p_min", [](RunConfig& c) -> double& { return c.engine.bounds.p_min; }));
        k.push_back(real_key("metrics.p_max", [](RunConfig& c) -> double& { return c.engine.bounds.p_max; }));
        // estate (preset and seed are handled separately)
        for (auto type : all_node_types())
            k.push_back(int_key<int>(fmt::format("estate.count.{}", to_string(type)),
                                     [type](RunConfig& c) -> int& { return c.estate.count(type); }));
        for (auto kind : all_edge_types())
            k.push_back(real_key(fmt::format("estate.density.{}", to_string(kind)),
                                 [kind](RunConfig& c) -> double& { return c.estate.density(kind); }));
        k.push_back(range_key("estate.quality", [](RunConfig& c) -> Range& { return c.estate.quality; }));
        k.push_back(range_key("estate.perf", [](RunConfig& c) -> Range& { return c.estate.perf; }));
        k.push_back(range_key("estate.security", [](RunConfig& c) -> Range& { return c.estate.security; }));
        k.push_back(real_key("estate.legacy_fraction", [](RunConfig& c) -> double& { return c.estate.legacy_fraction; }));
        k.push_back(real_key("estate.stale_doc_fraction",
                             [](RunConfig& c) -> double& { return c.estate.stale_doc_fraction; }));
        k.push_back(real_key("estate.hermetic_fraction",
                             [](RunConfig& c) -> double& { return c.estate.hermetic_fraction; }));
        k.push_back(int_key<int>("estate.probe_count", [](RunConfig& c) -> int& { return c.estate.probe_count; }));
        k.push_back(int_key<int>("estate.probe_span", [](RunConfig& c) -> int& { return c.estate.probe_span; }));
        k.push_back(real_key("estate.flakiness", [](RunConfig& c) -> double& { return c.estate.flakiness; }));
        k.push_back(range_key("estate.transmute_p0", [](RunConfig& c) -> Range& { return c.estate.transmute_p0; }));
        k.push_back(range_key("estate.transmute_rho", [](RunConfig& c) -> Range& { return c.estate.transmute_rho; }));
        k.push_back({"estate.reward_weights",
                     [](RunConfig& c, std::string_view v) {
                         c.estate.reward_weights = parse_weight_vector("estate.reward_weights", v);
                     },
                     [](const RunConfig& c) { return fmt_list(c.estate.reward_weights); }});
        k.push_back(real_key("estate.reward_noise", [](RunConfig& c) -> double& { return c.estate.reward_noise; }));
        k.push_back(real_key("estate.metric_noise", [](RunConfig& c) -> double& { return c.estate.metric_noise; }));
        k.push_back(real_key("estate.base_latency", [](RunConfig& c) -> double& { return c.estate.base_latency; }));
        k.push_back(real_key("estate.latency_span", [](RunConfig& c) -> double& { return c.estate.latency_span; }));
        k.push_back(real_key("estate.latency_floor", [](RunConfig& c) -> double& { return c.estate.latency_floor; }));
        k.push_back(real_key("estate.latency_factor", [](RunConfig& c) -> double& { return c.estate.latency_factor; }));
        k.push_back(int_key<int>("estate.tensor_rows", [](RunConfig& c) -> int& { return c.estate.tensor_rows; }));
        k.push_back(int_key<int>("estate.tensor_cols", [](RunConfig& c) -> int& { return c.estate.tensor_cols; }));
        k.push_back(real_key("estate.tensor_noise", [](RunConfig& c) -> double& { return c.estate.tensor_noise; }));
        k.push_back(int_key<int>("estate.baseline_rebuilds",
                                 [](RunConfig& c) -> int& { return c.estate.baseline_rebuilds; }));
        k.push_back(int_key<int>("estate.dim", [](RunConfig& c) -> int& { return c.estate.dim; }));
        // output
        k.push_back({"output.dir", [](RunConfig& c, std::string_view v) { c.output_dir = trim(v); },
                     [](const RunConfig& c) { return c.output_dir; }});
        return k;
    }();
    return keys;
}

const Key* find_key(std::string_view name) {
    for (const auto& k : registry())
        if (k.name == name) return &k;
    return nullptr;
}

std::string section_of(std::string_view key) { return std::string(key.substr(0, key.find('.'))); }

void flatten_json(const nlohmann::json& j, const std::string& prefix, FlatConfig& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten_json(v, prefix.empty() ? k : prefix + "." + k, out);
        return;
    }
    if (prefix.find('.') == std::string::npos)
        throw Error(Errc::InvalidConfig, fmt::format("{}: top-level values must be sections", prefix));
    std::string text;
    if (j.is_string()) text = j.get<std::string>();
    else if (j.is_array()) {
        for (const auto& item : j) {
            if (!text.empty()) text += ",";
            text += item.is_string() ? item.get<std::string>() : item.dump();
        }
    } else {
        text = j.dump();
    }
    out[prefix] = text;
}

}  // namespace

FlatConfig parse_ini(std::string_view text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(Errc::InvalidConfig, fmt::format("line {}: {}", e.line(), e.message()));
    }
    FlatConfig flat;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw Error(Errc::InvalidConfig, fmt::format("{}: key outside of any section", section));
        if (body.empty()) flat[section + "."];  // records that the section exists
        for (const auto& [key, value] : body) flat[section + "." + key] = trim(value.data());
    }
    return flat;
}

FlatConfig parse_json_config(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::InvalidConfig, e.what());
    }
    if (!j.is_object()) throw Error(Errc::InvalidConfig, "top-level JSON value must be an object");
    FlatConfig flat;
    for (const auto& [section, body] : j.items()) {
        if (body.is_object() && body.empty()) flat[section + "."];
        flatten_json(body, section, flat);
    }
    return flat;
}

FlatConfig read_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::InvalidConfig, fmt::format("{}: cannot open file", path));
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    try {
        return first != std::string::npos && text[first] == '{' ? parse_json_config(text) : parse_ini(text);
    } catch (const Error& e) {
        throw Error(e.code(), fmt::format("{}: {}", path, e.detail()));
    }
}

void apply_override(FlatConfig& flat, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw Error(Errc::InvalidConfig, fmt::format("override '{}' is not key=value", assignment));
    const auto key = trim(assignment.substr(0, eq));
    if (key.find('.') == std::string::npos || key.front() == '.' || key.back() == '.')
        throw Error(Errc::InvalidConfig, fmt::format("override key '{}' must be section.key", key));
    flat[key] = trim(assignment.substr(eq + 1));
}

RunConfig build_config(const FlatConfig& flat) {
    RunConfig config;
    const bool has_estate =
        std::any_of(flat.begin(), flat.end(), [](const auto& kv) { return section_of(kv.first) == "estate"; });
    if (!has_estate) throw Error(Errc::InvalidConfig, "estate: missing required section");

    if (const auto it = flat.find("estate.preset"); it != flat.end()) config.estate_preset = trim(it->second);
    try {
        config.estate = estate_preset(config.estate_preset);
    } catch (const Error& e) {
        throw Error(Errc::InvalidConfig, fmt::format("estate.preset: {}", e.detail()));
    }

    std::vector<std::pair<std::string, EngineEvent>> events;
    std::optional<std::uint64_t> estate_seed;
    for (const auto& [key, value] : flat) {
        if (key.back() == '.') {
            static const std::vector<std::string> sections = {"engine", "operators", "selection", "bandit", "safety",
                                                              "metrics", "estate", "events", "output"};
            const auto name = key.substr(0, key.size() - 1);
            if (std::find(sections.begin(), sections.end(), name) == sections.end())
                throw Error(Errc::InvalidConfig, fmt::format("{}: unknown section", name));
            continue;
        }
        if (key == "estate.preset") continue;
        if (key == "estate.seed") {
            estate_seed = parse_integer<std::uint64_t>(key, value);
            continue;
        }
        if (section_of(key) == "events") {
            try {
                events.emplace_back(key, parse_event(value));
            } catch (const Error& e) {
                throw Error(e.code(), fmt::format("{}: {}", key, e.detail()));
            }
            continue;
        }
        const auto* k = find_key(key);
        if (!k) throw Error(Errc::InvalidConfig, fmt::format("{}: unknown key", key));
        k->set(config, value);
    }
    config.estate_seed = estate_seed.value_or(config.engine.seed);
    config.estate.bounds = config.engine.bounds;

    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.second.generation < b.second.generation; });
    for (auto& [name, event] : events) config.engine.events.push_back(std::move(event));

    try {
        config.estate.validate();
    } catch (const Error& e) {
        throw Error(Errc::InvalidConfig, fmt::format("estate: {}", e.detail()));
    }
    config.engine.validate();
    if (config.output_dir.empty()) throw Error(Errc::InvalidConfig, "output.dir: must not be empty");
    return config;
}

std::string effective_config(const RunConfig& config) {
    std::string out;
    std::string current;
    const auto emit = [&](std::string_view key, const std::string& value) {
        const auto section = section_of(key);
        if (section != current) {
            out += fmt::format("{}[{}]\n", out.empty() ? "" : "\n", section);
            current = section;
        }
        out += fmt::format("{} = {}\n", key.substr(section.size() + 1), value);
    };
    for (const auto& k : registry()) {
        if (k.name.starts_with("estate.") && current != "estate") {
            emit("estate.preset", config.estate_preset);
            emit("estate.seed", fmt::format("{}", config.estate_seed));
        }
        emit(k.name, k.get(config));
    }
    int index = 0;
    for (const auto& e : config.engine.events) emit(fmt::format("events.e{:02}", ++index), e.to_string());
    return out;
}

}  // namespace evograph

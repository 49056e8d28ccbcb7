#include "locmix/config.hpp"

#include "locmix/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace locmix {

namespace {

namespace pt = boost::property_tree;

const std::vector<std::pair<ExperimentKind, std::string>> kKindNames = {
    {ExperimentKind::LyapunovScan, "lyapunov_scan"},
    {ExperimentKind::BandCenterScaling, "band_center_scaling"},
    {ExperimentKind::BandEdgeScaling, "band_edge_scaling"},
    {ExperimentKind::NearEdgeScaling, "near_edge_scaling"},
    {ExperimentKind::DensityCompare, "density_compare"},
    {ExperimentKind::SpectralDensity, "spectral_density"},
    {ExperimentKind::Moments, "moments"},
    {ExperimentKind::NormGrowth, "norm_growth"},
};

struct Schema {
    std::vector<std::string> required;
    std::vector<std::string> optional;
};

const std::vector<std::string> kMcKeys = {"steps", "replicas", "renorm_every"};

Schema schema(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::LyapunovScan: return {{"lambdas", "energies"}, kMcKeys};
    case ExperimentKind::BandCenterScaling:
    case ExperimentKind::BandEdgeScaling: {
        auto opt = kMcKeys;
        opt.push_back("epsilon");
        return {{"lambdas"}, opt};
    }
    case ExperimentKind::NearEdgeScaling: {
        auto opt = kMcKeys;
        opt.push_back("eta");
        return {{"lambdas", "epsilon"}, opt};
    }
    case ExperimentKind::DensityCompare:
        return {{}, {"setting", "epsilon", "d0", "dpi", "grid", "orbit_lambda", "orbit_steps", "bins"}};
    case ExperimentKind::SpectralDensity: return {{"ks"}, {"segment_length", "segments"}};
    case ExperimentKind::Moments: return {{"lambdas", "times"}, {"size", "q", "replicas", "beta"}};
    case ExperimentKind::NormGrowth:
        return {{"lambda", "energy", "horizons"}, {"samples", "steps", "replicas", "renorm_every"}};
    }
    return {};
}

std::vector<std::string> process_keys(ProcessKind kind)
{
    switch (kind) {
    case ProcessKind::IID: return {"values", "weights"};
    case ProcessKind::MarkovChain: return {"transition", "values"};
    case ProcessKind::MovingAverageShift: return {"rate"};
    case ProcessKind::IntermittentMap: return {"z", "pilot_length"};
    case ProcessKind::Cocycle: return {"scale"};
    }
    return {};
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        parts.push_back(trim(cur));
    if (!s.empty() && s.back() == sep)
        parts.emplace_back();
    return parts;
}

double to_double(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError("'" + key + "': not a finite number: '" + text + "'");
    return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("'" + key + "': not a non-negative integer: '" + text + "'");
    return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    if (trim(text).empty())
        return out;
    for (const auto& part : split(text, ','))
        out.push_back(to_double(key, part));
    return out;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

std::map<std::string, std::string> section(const pt::ptree& tree, const std::string& name, bool required)
{
    std::map<std::string, std::string> out;
    const auto child = tree.get_child_optional(name);
    if (!child) {
        if (required)
            throw ConfigError("missing section [" + name + "]");
        return out;
    }
    for (const auto& [key, value] : *child)
        out[key] = value.data();
    return out;
}

void check_keys(const std::map<std::string, std::string>& values, const std::set<std::string>& allowed,
                const std::string& where)
{
    for (const auto& [key, value] : values)
        if (!allowed.contains(key))
            throw ConfigError("unknown key '" + key + "' in [" + where + "]");
}

PotentialProcess parse_process(const std::map<std::string, std::string>& s)
{
    const auto kind_it = s.find("kind");
    if (kind_it == s.end())
        throw ConfigError("[process] needs 'kind'");
    const ProcessKind kind = process_kind_from_string(trim(kind_it->second));
    std::set<std::string> allowed{"kind", "burn_in"};
    for (const auto& k : process_keys(kind))
        allowed.insert(k);
    check_keys(s, allowed, "process");

    auto get = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = s.find(key);
        if (it == s.end())
            return std::nullopt;
        return it->second;
    };

    PotentialProcess p;
    switch (kind) {
    case ProcessKind::IID: {
        IidParams iid;
        if (auto v = get("values"))
            iid.values = to_list("values", *v);
        if (auto w = get("weights"))
            iid.weights = to_list("weights", *w);
        else if (get("values"))
            iid.weights.assign(iid.values.size(), 1.0 / static_cast<double>(std::max<std::size_t>(1, iid.values.size())));
        p.params = iid;
        break;
    }
    case ProcessKind::MarkovChain: {
        MarkovParams m;
        const auto t = get("transition");
        const auto v = get("values");
        if (!t || !v)
            throw ConfigError("markov process needs 'transition' and 'values'");
        for (const auto& row : split(*t, '|'))
            m.transition.push_back(to_list("transition", row));
        m.values = to_list("values", *v);
        p.params = m;
        break;
    }
    case ProcessKind::MovingAverageShift: {
        MovingAverageParams m;
        if (auto r = get("rate"))
            m.rate = to_double("rate", *r);
        p.params = m;
        break;
    }
    case ProcessKind::IntermittentMap: {
        IntermittentParams m;
        if (auto z = get("z"))
            m.z = to_double("z", *z);
        if (auto n = get("pilot_length"))
            m.pilot_length = to_unsigned("pilot_length", *n);
        p.params = m;
        break;
    }
    case ProcessKind::Cocycle: {
        CocycleParams c;
        if (auto sc = get("scale"))
            c.scale = to_double("scale", *sc);
        p.params = c;
        break;
    }
    }
    if (auto b = get("burn_in"))
        p.burn_in = to_unsigned("burn_in", *b);
    return p;
}

}  // namespace

std::string to_string(ExperimentKind kind)
{
    for (const auto& [k, name] : kKindNames)
        if (k == kind)
            return name;
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name)
{
    for (const auto& [k, n] : kKindNames)
        if (n == name)
            return k;
    throw ConfigError("unknown experiment type '" + name + "'");
}

std::string ExperimentConfig::output_name() const
{
    return output.empty() ? to_string(experiment) + ".csv" : output;
}

ExperimentConfig parse_config(std::istream& in)
{
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    for (const auto& [name, child] : tree)
        if (name != "experiment" && name != "process" && name != "parameters")
            throw ConfigError("unknown section [" + name + "]");

    const auto exp = section(tree, "experiment", true);
    check_keys(exp, {"type", "seed", "output"}, "experiment");
    ExperimentConfig c;
    const auto type = exp.find("type");
    if (type == exp.end())
        throw ConfigError("[experiment] needs 'type'");
    c.experiment = experiment_kind_from_string(trim(type->second));
    if (const auto it = exp.find("seed"); it != exp.end())
        c.seed = to_unsigned("seed", it->second);
    if (const auto it = exp.find("output"); it != exp.end())
        c.output = trim(it->second);

    c.process = parse_process(section(tree, "process", true));
    c.process.seed = c.seed;

    const auto params = section(tree, "parameters", false);
    const Schema sch = schema(c.experiment);
    std::set<std::string> allowed(sch.required.begin(), sch.required.end());
    allowed.insert(sch.optional.begin(), sch.optional.end());
    check_keys(params, allowed, "parameters");
    for (const auto& key : sch.required)
        if (!params.contains(key))
            throw ConfigError("[parameters] needs '" + key + "' for " + to_string(c.experiment));

    for (const auto& [key, text] : params) {
        if (key == "lambdas") c.lambdas = to_list(key, text);
        else if (key == "energies") c.energies = to_list(key, text);
        else if (key == "ks") c.ks = to_list(key, text);
        else if (key == "times") c.times = to_list(key, text);
        else if (key == "horizons") {
            c.horizons.clear();
            if (!trim(text).empty())
                for (const auto& part : split(text, ','))
                    c.horizons.push_back(to_unsigned(key, part));
        }
        else if (key == "lambda") c.lambda = to_double(key, text);
        else if (key == "energy") c.energy = to_double(key, text);
        else if (key == "epsilon") c.epsilon = to_double(key, text);
        else if (key == "eta") c.eta = to_double(key, text);
        else if (key == "q") c.q = to_double(key, text);
        else if (key == "beta") c.beta = to_double(key, text);
        else if (key == "setting") c.setting = trim(text);
        else if (key == "d0") c.d0 = to_double(key, text);
        else if (key == "dpi") c.dpi = to_double(key, text);
        else if (key == "orbit_lambda") c.orbit_lambda = to_double(key, text);
        else if (key == "steps") c.steps = to_unsigned(key, text);
        else if (key == "replicas") c.replicas = to_unsigned(key, text);
        else if (key == "renorm_every") c.renorm_every = to_unsigned(key, text);
        else if (key == "grid") c.grid = to_unsigned(key, text);
        else if (key == "bins") c.bins = to_unsigned(key, text);
        else if (key == "orbit_steps") c.orbit_steps = to_unsigned(key, text);
        else if (key == "size") c.size = to_unsigned(key, text);
        else if (key == "samples") c.samples = to_unsigned(key, text);
        else if (key == "segment_length") c.segment_length = to_unsigned(key, text);
        else if (key == "segments") c.segments = to_unsigned(key, text);
    }
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

void validate_config(const ExperimentConfig& c)
{
    c.process.validate();
    auto need_nonempty = [](const auto& v, const std::string& key) {
        if (v.empty())
            throw ConfigError("'" + key + "' must not be empty");
    };
    auto need_positive = [](double v, const std::string& key) {
        if (!(v > 0.0))
            throw ConfigError("'" + key + "' must be positive");
    };
    auto need_lambdas = [&] {
        need_nonempty(c.lambdas, "lambdas");
        for (double l : c.lambdas)
            if (!(l >= 0.0))
                throw ConfigError("'lambdas' must be non-negative");
    };
    auto need_mc = [&] {
        if (c.steps < 10'000)
            throw ConfigError("'steps' must be at least 10^4");
        if (c.replicas == 0)
            throw ConfigError("'replicas' must be positive");
        if (c.renorm_every == 0 || c.renorm_every > 1000)
            throw ConfigError("'renorm_every' must lie in [1, 1000]");
    };

    switch (c.experiment) {
    case ExperimentKind::LyapunovScan:
        need_lambdas();
        need_nonempty(c.energies, "energies");
        need_mc();
        break;
    case ExperimentKind::BandCenterScaling:
    case ExperimentKind::BandEdgeScaling:
        need_lambdas();
        for (double l : c.lambdas)
            need_positive(l, "lambdas");
        need_mc();
        break;
    case ExperimentKind::NearEdgeScaling:
        need_lambdas();
        for (double l : c.lambdas)
            need_positive(l, "lambdas");
        need_positive(c.epsilon, "epsilon");
        need_positive(c.eta, "eta");
        need_mc();
        break;
    case ExperimentKind::DensityCompare:
        if (c.setting != "band_center" && c.setting != "band_edge")
            throw ConfigError("'setting' must be band_center or band_edge");
        if (c.grid < 256)
            throw ConfigError("'grid' must be at least 256");
        if (c.bins == 0)
            throw ConfigError("'bins' must be positive");
        if (c.d0 && *c.d0 < 0.0)
            throw ConfigError("'d0' must be non-negative");
        if (c.dpi && *c.dpi < 0.0)
            throw ConfigError("'dpi' must be non-negative");
        if (c.orbit_steps > 0)
            need_positive(c.orbit_lambda, "orbit_lambda");
        break;
    case ExperimentKind::SpectralDensity:
        need_nonempty(c.ks, "ks");
        for (double k : c.ks)
            if (!(k >= 0.0 && k <= std::numbers::pi))
                throw ConfigError("'ks' must lie in [0, pi]");
        if (c.segment_length < 1000 || c.segments < 8)
            throw ConfigError("'segment_length' >= 1000 and 'segments' >= 8 required");
        break;
    case ExperimentKind::Moments:
        need_lambdas();
        need_nonempty(c.times, "times");
        for (double t : c.times)
            need_positive(t, "times");
        if (c.size < 3 || c.size % 2 == 0)
            throw ConfigError("'size' must be odd and at least 3");
        need_positive(c.q, "q");
        if (!(c.beta > 2.0))
            throw ConfigError("'beta' must exceed 2");
        if (c.replicas == 0)
            throw ConfigError("'replicas' must be positive");
        break;
    case ExperimentKind::NormGrowth:
        need_positive(c.lambda, "lambda");
        need_nonempty(c.horizons, "horizons");
        for (auto n : c.horizons)
            if (n == 0)
                throw ConfigError("'horizons' must be positive");
        if (c.samples == 0)
            throw ConfigError("'samples' must be positive");
        need_mc();
        break;
    }
}

std::string serialize_config(const ExperimentConfig& c)
{
    std::ostringstream out;
    out << "[experiment]\n";
    out << "type = " << to_string(c.experiment) << "\n";
    out << "seed = " << c.seed << "\n";
    if (!c.output.empty())
        out << "output = " << c.output << "\n";

    out << "\n[process]\n";
    out << "kind = " << to_string(c.process.kind()) << "\n";
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, IidParams>) {
                out << "values = " << fmt_list(p.values) << "\n";
                out << "weights = " << fmt_list(p.weights) << "\n";
            } else if constexpr (std::is_same_v<T, MarkovParams>) {
                out << "transition = ";
                for (std::size_t i = 0; i < p.transition.size(); ++i)
                    out << (i ? " | " : "") << fmt_list(p.transition[i]);
                out << "\n";
                out << "values = " << fmt_list(p.values) << "\n";
            } else if constexpr (std::is_same_v<T, MovingAverageParams>) {
                out << "rate = " << fmt(p.rate) << "\n";
            } else if constexpr (std::is_same_v<T, IntermittentParams>) {
                out << "z = " << fmt(p.z) << "\n";
                out << "pilot_length = " << p.pilot_length << "\n";
            } else {
                out << "scale = " << fmt(p.scale) << "\n";
            }
        },
        c.process.params);
    if (c.process.burn_in)
        out << "burn_in = " << *c.process.burn_in << "\n";

    out << "\n[parameters]\n";
    const Schema sch = schema(c.experiment);
    std::vector<std::string> keys = sch.required;
    keys.insert(keys.end(), sch.optional.begin(), sch.optional.end());
    for (const auto& key : keys) {
        std::string value;
        if (key == "lambdas") value = fmt_list(c.lambdas);
        else if (key == "energies") value = fmt_list(c.energies);
        else if (key == "ks") value = fmt_list(c.ks);
        else if (key == "times") value = fmt_list(c.times);
        else if (key == "horizons") {
            for (std::size_t i = 0; i < c.horizons.size(); ++i)
                value += (i ? ", " : "") + std::to_string(c.horizons[i]);
        }
        else if (key == "lambda") value = fmt(c.lambda);
        else if (key == "energy") value = fmt(c.energy);
        else if (key == "epsilon") value = fmt(c.epsilon);
        else if (key == "eta") value = fmt(c.eta);
        else if (key == "q") value = fmt(c.q);
        else if (key == "beta") value = fmt(c.beta);
        else if (key == "setting") value = c.setting;
        else if (key == "d0") { if (!c.d0) continue; value = fmt(*c.d0); }
        else if (key == "dpi") { if (!c.dpi) continue; value = fmt(*c.dpi); }
        else if (key == "orbit_lambda") value = fmt(c.orbit_lambda);
        else if (key == "steps") value = std::to_string(c.steps);
        else if (key == "replicas") value = std::to_string(c.replicas);
        else if (key == "renorm_every") value = std::to_string(c.renorm_every);
        else if (key == "grid") value = std::to_string(c.grid);
        else if (key == "bins") value = std::to_string(c.bins);
        else if (key == "orbit_steps") value = std::to_string(c.orbit_steps);
        else if (key == "size") value = std::to_string(c.size);
        else if (key == "samples") value = std::to_string(c.samples);
        else if (key == "segment_length") value = std::to_string(c.segment_length);
        else if (key == "segments") value = std::to_string(c.segments);
        out << key << " = " << value << "\n";
    }
    return out.str();
}

std::string config_hash(const ExperimentConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_config(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace locmix

#include "pairlearn/config.hpp"

#include "pairlearn/errors.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pairlearn::cli {

using nlohmann::json;

namespace {

std::string sanitize(std::string s)
{
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.')
            c = '_';
    return s;
}

std::string trim_number(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

std::string DatasetConfig::id() const
{
    std::ostringstream os;
    if (is_lj) {
        os << "lj_n" << lj.n_atoms << "_T" << lj.n_steps << "_dt" << trim_number(lj.dt) << "_seed"
           << seed;
    } else {
        os << sim::law_name(law.kind) << "_d" << d << "_n" << n_particles << "_T" << n_steps
           << "_dt" << trim_number(dt) << "_seed" << seed;
    }
    return sanitize(os.str());
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return from_json(j);
}

ExperimentConfig ExperimentConfig::from_json(const json& j)
{
    try {
        ExperimentConfig cfg;
        cfg.raw = j;
        cfg.name = sanitize(j.value("name", "experiment"));

        const json& jd = j.at("dataset");
        const std::string law_name = jd.value("law", "spring");
        if (law_name == "lj" || law_name == "lennard_jones") {
            cfg.dataset.is_lj = true;
            sim::LjSpec& lj = cfg.dataset.lj;
            if (jd.contains("lj")) {
                const json& jl = jd.at("lj");
                lj.n_atoms = jl.value("n_atoms", lj.n_atoms);
                lj.box_length = jl.value("box_length", lj.box_length);
                lj.epsilon_kcal = jl.value("epsilon_kcal", lj.epsilon_kcal);
                lj.sigma = jl.value("sigma", lj.sigma);
                lj.cutoff_factor = jl.value("cutoff_factor", lj.cutoff_factor);
                lj.mass = jl.value("mass", lj.mass);
                lj.temperature = jl.value("temperature", lj.temperature);
                lj.n_steps = jl.value("n_steps", lj.n_steps);
                lj.n_runs = jl.value("n_runs", lj.n_runs);
                lj.dt = jl.value("dt", lj.dt);
            }
            lj.validate();
            cfg.dataset.d = 3;
        } else {
            cfg.dataset.law.kind = sim::law_from_name(law_name);
            if (jd.contains("constants")) {
                const json& jc = jd.at("constants");
                cfg.dataset.law.k = jc.value("k", cfg.dataset.law.k);
                cfg.dataset.law.L = jc.value("L", cfg.dataset.law.L);
                cfg.dataset.law.c = jc.value("c", cfg.dataset.law.c);
                cfg.dataset.law.delta = jc.value("delta", cfg.dataset.law.delta);
                cfg.dataset.law.theta = jc.value("theta", cfg.dataset.law.theta);
            }
            cfg.dataset.d = jd.value("d", 2);
            if (cfg.dataset.d != 2 && cfg.dataset.d != 3)
                throw ConfigError("dataset.d must be 2 or 3");
            cfg.dataset.n_particles = jd.value("n_particles", 8);
            cfg.dataset.n_steps = jd.value("n_steps", 10000);
            cfg.dataset.dt = jd.value("dt", 0.01);
            if (cfg.dataset.n_particles < 2)
                throw ConfigError("dataset.n_particles must be at least 2");
            if (cfg.dataset.n_steps < 10)
                throw ConfigError("dataset.n_steps must be at least 10");
        }
        cfg.dataset.seed = jd.value("seed", 0ull);

        if (j.contains("split")) {
            const json& js = j.at("split");
            if (js.contains("ratios")) {
                const auto r = js.at("ratios").get<std::vector<double>>();
                if (r.size() != 3)
                    throw ConfigError("split.ratios must have 3 entries");
                cfg.split_ratios = { r[0], r[1], r[2] };
            }
            cfg.split_seed = js.value("seed", cfg.split_seed);
        }
        if (std::fabs(cfg.split_ratios[0] + cfg.split_ratios[1] + cfg.split_ratios[2] - 1.0) >
            1e-9)
            throw ConfigError("split.ratios must sum to 1");

        cfg.noise_beta = j.value("noise_beta", 0.0);
        cfg.noise_seed = j.value("noise_seed", cfg.noise_seed);
        if (cfg.noise_beta < 0.0)
            throw ConfigError("noise_beta must be non-negative");

        const json jm = j.value("model", json::object());
        cfg.model.kind = model::model_kind_from_name(jm.value("kind", "force"));
        cfg.model.hidden = jm.value("hidden", std::vector<int>{ 300, 300, 300, 300 });
        cfg.model.activation = ad::activation_from_name(jm.value("activation", "silu"));
        cfg.model.scalar_messages = jm.value("scalar_messages", false);

        const json jt = j.value("train", json::object());
        cfg.train.learning_rate = jt.value("learning_rate", 0.001);
        const bool potential_like = cfg.model.kind == model::ModelKind::Potential ||
                                    (cfg.model.kind == model::ModelKind::Baseline &&
                                     cfg.model.scalar_messages);
        cfg.train.batch_size = jt.value("batch_size", potential_like ? 8 : 32);
        cfg.train.max_epochs = jt.value("max_epochs", 200);
        cfg.train.seed = jt.value("seed", 11ull);
        cfg.train.alpha = jt.value("alpha", 0.0);
        cfg.train.grad_clip = jt.value("grad_clip", 0.0);
        if (cfg.train.learning_rate < 0 || cfg.train.batch_size < 1 || cfg.train.max_epochs < 1 ||
            cfg.train.alpha < 0)
            throw ConfigError("invalid train section");

        cfg.repetitions = j.value("repetitions", 5);
        if (cfg.repetitions < 1)
            throw ConfigError("repetitions must be at least 1");

        if (j.contains("generalization")) {
            const json& jg = j.at("generalization");
            if (cfg.dataset.is_lj)
                throw ConfigError("generalization section applies to analytic datasets only");
            cfg.generalization.present = true;
            cfg.generalization.n_particles = jg.value("n_particles", 12);
            cfg.generalization.n_steps = jg.value("n_steps", 1500);
            cfg.generalization.seed = jg.value("seed", cfg.dataset.seed + 1);
        }

        if (j.contains("field")) {
            const json& jf = j.at("field");
            cfg.has_field = true;
            cfg.field.xmin = jf.value("xmin", cfg.field.xmin);
            cfg.field.xmax = jf.value("xmax", cfg.field.xmax);
            cfg.field.ymin = jf.value("ymin", cfg.field.ymin);
            cfg.field.ymax = jf.value("ymax", cfg.field.ymax);
            cfg.field.nx = jf.value("nx", cfg.field.nx);
            cfg.field.ny = jf.value("ny", cfg.field.ny);
            cfg.field.probe_mass = jf.value("probe_mass", cfg.field.probe_mass);
            cfg.field.probe_charge = jf.value("probe_charge", cfg.field.probe_charge);
            cfg.field.sender_mass = jf.value("sender_mass", cfg.field.sender_mass);
            cfg.field.sender_charge = jf.value("sender_charge", cfg.field.sender_charge);
            cfg.field.skip_radius = jf.value("skip_radius", cfg.field.skip_radius);
        }

        if (j.contains("sweep")) {
            cfg.sweep = j.at("sweep");
            if (!cfg.sweep.is_object())
                throw ConfigError("sweep must be an object of key -> list");
        }
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

namespace {

void set_dotted(json& j, const std::string& key, const json& value)
{
    json* at = &j;
    std::size_t begin = 0;
    while (true) {
        const std::size_t dot = key.find('.', begin);
        const std::string part = key.substr(begin, dot == std::string::npos ? dot : dot - begin);
        if (dot == std::string::npos) {
            (*at)[part] = value;
            return;
        }
        at = &(*at)[part];
        begin = dot + 1;
    }
}

std::string value_tag(const json& v)
{
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    return sanitize(s);
}

} // namespace

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base)
{
    if (base.sweep.empty() || base.sweep.is_null())
        return { base };
    std::vector<std::pair<std::string, std::vector<json>>> axes;
    for (const auto& [key, values] : base.sweep.items()) {
        if (!values.is_array() || values.empty())
            throw ConfigError("sweep axis '" + key + "' must be a non-empty list");
        axes.emplace_back(key, std::vector<json>(values.begin(), values.end()));
    }
    std::vector<ExperimentConfig> cells;
    std::vector<std::size_t> index(axes.size(), 0);
    while (true) {
        json j = base.raw;
        j.erase("sweep");
        std::string suffix;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            set_dotted(j, axes[a].first, axes[a].second[index[a]]);
            const auto short_key = axes[a].first.substr(axes[a].first.rfind('.') + 1);
            suffix += "_" + short_key + "=" + value_tag(axes[a].second[index[a]]);
        }
        j["name"] = base.name + sanitize(suffix);
        cells.push_back(ExperimentConfig::from_json(j));
        // odometer
        std::size_t a = 0;
        for (; a < axes.size(); ++a) {
            if (++index[a] < axes[a].second.size())
                break;
            index[a] = 0;
        }
        if (a == axes.size())
            break;
    }
    return cells;
}

} // namespace pairlearn::cli

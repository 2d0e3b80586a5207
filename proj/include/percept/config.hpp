#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "percept/network.hpp"

namespace percept {

/* Configuration problem: carries the dotted path of the offending field. */
struct config_error : std::runtime_error {
    explicit config_error(const std::string& field_path, const std::string& message)
        : std::runtime_error(field_path.empty() ? message : field_path + ": " + message),
          field(field_path) {}
    std::string field;
};

/* One experiment run: a named scenario, a seed, the integration step, a
 * scenario-specific size knob, and one block per model parameter type. */
struct ExperimentConfig {
    std::string scenario;
    std::uint64_t seed = 0;
    double dt = 0.05;
    std::size_t steps = 200;  // training steps / scan length / trial count, per scenario
    std::filesystem::path output_dir = "out";
    ActivationParams activation;
    TuningParams tuning;
    InhibitionParams inhibition{1.0, 1.0, 0.2, CompetitionMode::soft};
    PlasticityParams plasticity;
    ReceptiveFieldParams receptive_field;

    bool operator==(const ExperimentConfig&) const = default;
};

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {
        "colour-detector", "frequency-sweep", "receptive-field", "deprivation",
        "depth-roundtrip", "cochlea-localize", "theorem-oracles",
    };
    return names;
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& prefix,
                                std::initializer_list<const char*> known) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw config_error(prefix + item.key(), "unknown key");
    }
}

inline double get_number(const nlohmann::json& obj, const std::string& prefix, const char* key,
                         double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw config_error(prefix + key, "expected a number");
    return v.get<double>();
}

inline std::string get_string(const nlohmann::json& obj, const std::string& prefix, const char* key,
                              const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw config_error(prefix + key, "expected a string");
    return v.get<std::string>();
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& root) {
    if (!root.is_object()) throw config_error("", "config root must be an object");
    detail::reject_unknown_keys(root, "",
                                {"scenario", "seed", "dt", "steps", "output_dir", "activation",
                                 "tuning", "inhibition", "plasticity", "receptive_field"});
    ExperimentConfig cfg;

    if (!root.contains("scenario")) throw config_error("scenario", "required");
    if (!root.at("scenario").is_string()) throw config_error("scenario", "expected a string");
    cfg.scenario = root.at("scenario").get<std::string>();
    bool known = false;
    for (const auto& name : scenario_names())
        if (name == cfg.scenario) known = true;
    if (!known) throw config_error("scenario", "unknown scenario '" + cfg.scenario + "'");

    if (root.contains("seed")) {
        const auto& v = root.at("seed");
        if (!v.is_number_unsigned() && !v.is_number_integer())
            throw config_error("seed", "expected a nonnegative integer");
        if (v.is_number_integer() && v.get<long long>() < 0)
            throw config_error("seed", "expected a nonnegative integer");
        cfg.seed = v.get<std::uint64_t>();
    }
    cfg.dt = detail::get_number(root, "", "dt", cfg.dt);
    if (!(cfg.dt > 0.0)) throw config_error("dt", "must be > 0");
    if (root.contains("steps")) {
        const auto& v = root.at("steps");
        if (!v.is_number_unsigned() && !v.is_number_integer())
            throw config_error("steps", "expected a positive integer");
        const auto n = v.get<long long>();
        if (n <= 0) throw config_error("steps", "must be > 0");
        cfg.steps = static_cast<std::size_t>(n);
    }
    cfg.output_dir = detail::get_string(root, "", "output_dir", cfg.output_dir.string());

    if (root.contains("activation")) {
        const auto& a = root.at("activation");
        if (!a.is_object()) throw config_error("activation", "expected an object");
        detail::reject_unknown_keys(a, "activation.", {"ceiling", "gain"});
        cfg.activation.ceiling = detail::get_number(a, "activation.", "ceiling", cfg.activation.ceiling);
        cfg.activation.gain = detail::get_number(a, "activation.", "gain", cfg.activation.gain);
    }
    if (!(cfg.activation.ceiling > 0.0)) throw config_error("activation.ceiling", "must be > 0");
    if (!(cfg.activation.gain > 0.0)) throw config_error("activation.gain", "must be > 0");

    if (root.contains("tuning")) {
        const auto& t = root.at("tuning");
        if (!t.is_object()) throw config_error("tuning", "expected an object");
        detail::reject_unknown_keys(t, "tuning.", {"peak", "decay", "reach"});
        cfg.tuning.peak = detail::get_number(t, "tuning.", "peak", cfg.tuning.peak);
        cfg.tuning.decay = detail::get_number(t, "tuning.", "decay", cfg.tuning.decay);
        cfg.tuning.reach = detail::get_number(t, "tuning.", "reach", cfg.tuning.reach);
    }
    if (!(cfg.tuning.peak > 0.0)) throw config_error("tuning.peak", "must be > 0");
    if (!(cfg.tuning.decay > 0.0)) throw config_error("tuning.decay", "must be > 0");
    if (!(cfg.tuning.reach > 0.0)) throw config_error("tuning.reach", "must be > 0");

    if (root.contains("inhibition")) {
        const auto& i = root.at("inhibition");
        if (!i.is_object()) throw config_error("inhibition", "expected an object");
        detail::reject_unknown_keys(i, "inhibition.",
                                    {"rate_ceiling", "rate_gain", "soft_duration", "mode"});
        cfg.inhibition.rate_ceiling =
            detail::get_number(i, "inhibition.", "rate_ceiling", cfg.inhibition.rate_ceiling);
        cfg.inhibition.rate_gain =
            detail::get_number(i, "inhibition.", "rate_gain", cfg.inhibition.rate_gain);
        cfg.inhibition.soft_duration =
            detail::get_number(i, "inhibition.", "soft_duration", cfg.inhibition.soft_duration);
        const std::string mode = detail::get_string(
            i, "inhibition.", "mode",
            cfg.inhibition.mode == CompetitionMode::soft ? "soft" : "hard");
        if (mode == "soft")
            cfg.inhibition.mode = CompetitionMode::soft;
        else if (mode == "hard")
            cfg.inhibition.mode = CompetitionMode::hard;
        else
            throw config_error("inhibition.mode", "expected 'soft' or 'hard'");
    }
    if (!(cfg.inhibition.rate_ceiling > 0.0)) throw config_error("inhibition.rate_ceiling", "must be > 0");
    if (!(cfg.inhibition.rate_gain > 0.0)) throw config_error("inhibition.rate_gain", "must be > 0");
    if (cfg.inhibition.mode == CompetitionMode::soft && !(cfg.inhibition.soft_duration > 0.0))
        throw config_error("inhibition.soft_duration", "must be > 0 in soft mode");

    if (root.contains("plasticity")) {
        const auto& p = root.at("plasticity");
        if (!p.is_object()) throw config_error("plasticity", "expected an object");
        detail::reject_unknown_keys(p, "plasticity.",
                                    {"weight_ceiling", "weight_gain", "growth_rate", "resource_budget",
                                     "decay_rate", "log_offset", "plastic_until"});
        cfg.plasticity.weight_ceiling =
            detail::get_number(p, "plasticity.", "weight_ceiling", cfg.plasticity.weight_ceiling);
        cfg.plasticity.weight_gain =
            detail::get_number(p, "plasticity.", "weight_gain", cfg.plasticity.weight_gain);
        cfg.plasticity.growth_rate =
            detail::get_number(p, "plasticity.", "growth_rate", cfg.plasticity.growth_rate);
        cfg.plasticity.resource_budget =
            detail::get_number(p, "plasticity.", "resource_budget", cfg.plasticity.resource_budget);
        cfg.plasticity.decay_rate =
            detail::get_number(p, "plasticity.", "decay_rate", cfg.plasticity.decay_rate);
        cfg.plasticity.log_offset =
            detail::get_number(p, "plasticity.", "log_offset", cfg.plasticity.log_offset);
        cfg.plasticity.plastic_until =
            detail::get_number(p, "plasticity.", "plastic_until", cfg.plasticity.plastic_until);
    }
    if (!(cfg.plasticity.weight_ceiling > 0.0)) throw config_error("plasticity.weight_ceiling", "must be > 0");
    if (!(cfg.plasticity.weight_gain > 0.0)) throw config_error("plasticity.weight_gain", "must be > 0");
    if (!(cfg.plasticity.growth_rate > 0.0)) throw config_error("plasticity.growth_rate", "must be > 0");
    if (!(cfg.plasticity.resource_budget > 0.0))
        throw config_error("plasticity.resource_budget", "must be > 0");
    if (!(cfg.plasticity.decay_rate > 0.0)) throw config_error("plasticity.decay_rate", "must be > 0");
    if (!(cfg.plasticity.plastic_until >= 0.0)) throw config_error("plasticity.plastic_until", "must be >= 0");

    if (root.contains("receptive_field")) {
        const auto& r = root.at("receptive_field");
        if (!r.is_object()) throw config_error("receptive_field", "expected an object");
        detail::reject_unknown_keys(r, "receptive_field.", {"gain", "crowding", "floor"});
        cfg.receptive_field.gain =
            detail::get_number(r, "receptive_field.", "gain", cfg.receptive_field.gain);
        cfg.receptive_field.crowding =
            detail::get_number(r, "receptive_field.", "crowding", cfg.receptive_field.crowding);
        cfg.receptive_field.floor =
            detail::get_number(r, "receptive_field.", "floor", cfg.receptive_field.floor);
    }
    if (!(cfg.receptive_field.gain > 0.0)) throw config_error("receptive_field.gain", "must be > 0");
    if (!(cfg.receptive_field.crowding > 0.0)) throw config_error("receptive_field.crowding", "must be > 0");
    if (!(cfg.receptive_field.floor >= 0.0)) throw config_error("receptive_field.floor", "must be >= 0");

    return cfg;
}

/* Fully resolved config as JSON; reloading the result reproduces the config
 * exactly (doubles round-trip). */
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    return {
        {"scenario", cfg.scenario},
        {"seed", cfg.seed},
        {"dt", cfg.dt},
        {"steps", cfg.steps},
        {"output_dir", cfg.output_dir.string()},
        {"activation", {{"ceiling", cfg.activation.ceiling}, {"gain", cfg.activation.gain}}},
        {"tuning",
         {{"peak", cfg.tuning.peak}, {"decay", cfg.tuning.decay}, {"reach", cfg.tuning.reach}}},
        {"inhibition",
         {{"rate_ceiling", cfg.inhibition.rate_ceiling},
          {"rate_gain", cfg.inhibition.rate_gain},
          {"soft_duration", cfg.inhibition.soft_duration},
          {"mode", cfg.inhibition.mode == CompetitionMode::soft ? "soft" : "hard"}}},
        {"plasticity",
         {{"weight_ceiling", cfg.plasticity.weight_ceiling},
          {"weight_gain", cfg.plasticity.weight_gain},
          {"growth_rate", cfg.plasticity.growth_rate},
          {"resource_budget", cfg.plasticity.resource_budget},
          {"decay_rate", cfg.plasticity.decay_rate},
          {"log_offset", cfg.plasticity.log_offset},
          {"plastic_until", cfg.plasticity.plastic_until}}},
        {"receptive_field",
         {{"gain", cfg.receptive_field.gain},
          {"crowding", cfg.receptive_field.crowding},
          {"floor", cfg.receptive_field.floor}}},
    };
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("", "cannot open config file " + path.string());
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("", std::string("config parse error: ") + e.what());
    }
    return config_from_json(root);
}

}  // namespace percept

#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "percept/network.hpp"

namespace percept {

/* Versioned, human-readable network snapshot (JSON). Doubles round-trip
 * exactly, so a loaded network resumes bit-identically. */
inline constexpr int kSnapshotVersion = 1;

namespace detail {

inline std::string to_string(LayerKind k) {
    switch (k) {
        case LayerKind::photoreceptor: return "photoreceptor";
        case LayerKind::bipolar: return "bipolar";
        case LayerKind::ganglion: return "ganglion";
    }
    throw std::logic_error("unknown LayerKind");
}

inline LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "photoreceptor") return LayerKind::photoreceptor;
    if (s == "bipolar") return LayerKind::bipolar;
    if (s == "ganglion") return LayerKind::ganglion;
    throw std::runtime_error("snapshot: unknown layer kind '" + s + "'");
}

inline std::string to_string(CompetitionMode m) {
    return m == CompetitionMode::soft ? "soft" : "hard";
}

inline CompetitionMode competition_mode_from_string(const std::string& s) {
    if (s == "soft") return CompetitionMode::soft;
    if (s == "hard") return CompetitionMode::hard;
    throw std::runtime_error("snapshot: unknown competition mode '" + s + "'");
}

inline nlohmann::json layer_to_json(const LayerSpec& layer) {
    return {
        {"kind", to_string(layer.kind)},
        {"cell_count", layer.cell_count},
        {"fan_in", layer.fan_in},
        {"activation", {{"ceiling", layer.activation.ceiling}, {"gain", layer.activation.gain}}},
        {"tuning",
         {{"peak", layer.tuning.peak}, {"decay", layer.tuning.decay}, {"reach", layer.tuning.reach}}},
        {"inhibition",
         {{"rate_ceiling", layer.inhibition.rate_ceiling},
          {"rate_gain", layer.inhibition.rate_gain},
          {"soft_duration", layer.inhibition.soft_duration},
          {"mode", to_string(layer.inhibition.mode)}}},
        {"plasticity",
         {{"weight_ceiling", layer.plasticity.weight_ceiling},
          {"weight_gain", layer.plasticity.weight_gain},
          {"growth_rate", layer.plasticity.growth_rate},
          {"resource_budget", layer.plasticity.resource_budget},
          {"decay_rate", layer.plasticity.decay_rate},
          {"log_offset", layer.plasticity.log_offset},
          {"plastic_until", layer.plasticity.plastic_until}}},
    };
}

inline LayerSpec layer_from_json(const nlohmann::json& j) {
    LayerSpec layer;
    layer.kind = layer_kind_from_string(j.at("kind").get<std::string>());
    layer.cell_count = j.at("cell_count").get<std::size_t>();
    layer.fan_in = j.at("fan_in").get<std::size_t>();
    const auto& a = j.at("activation");
    layer.activation = {a.at("ceiling").get<double>(), a.at("gain").get<double>()};
    const auto& t = j.at("tuning");
    layer.tuning = {t.at("peak").get<double>(), t.at("decay").get<double>(),
                    t.at("reach").get<double>()};
    const auto& i = j.at("inhibition");
    layer.inhibition = {i.at("rate_ceiling").get<double>(), i.at("rate_gain").get<double>(),
                        i.at("soft_duration").get<double>(),
                        competition_mode_from_string(i.at("mode").get<std::string>())};
    const auto& p = j.at("plasticity");
    layer.plasticity = {p.at("weight_ceiling").get<double>(), p.at("weight_gain").get<double>(),
                        p.at("growth_rate").get<double>(),   p.at("resource_budget").get<double>(),
                        p.at("decay_rate").get<double>(),    p.at("log_offset").get<double>(),
                        p.at("plastic_until").get<double>()};
    return layer;
}

}  // namespace detail

inline nlohmann::json to_snapshot_json(const NetworkState& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : net.layers) layers.push_back(detail::layer_to_json(layer));
    nlohmann::json synapses = nlohmann::json::array();
    for (const auto& layer : net.synapses) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : layer)
            cells.push_back({{"resources", cell.resources}, {"free_pool", cell.free_pool}});
        synapses.push_back(std::move(cells));
    }
    return {
        {"format", "percept-network-snapshot"},
        {"version", kSnapshotVersion},
        {"seed", net.seed},
        {"clock", net.clock},
        {"shared_pool", net.shared_pool},
        {"layers", std::move(layers)},
        {"synapses", std::move(synapses)},
    };
}

inline NetworkState network_from_snapshot_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != "percept-network-snapshot")
        throw std::runtime_error("snapshot: not a percept network snapshot");
    if (j.at("version").get<int>() != kSnapshotVersion)
        throw std::runtime_error("snapshot: unsupported version");
    NetworkState net;
    net.seed = j.at("seed").get<std::uint64_t>();
    net.clock = j.at("clock").get<double>();
    net.shared_pool = j.at("shared_pool").get<double>();
    for (const auto& layer : j.at("layers")) net.layers.push_back(detail::layer_from_json(layer));
    for (const auto& layer : j.at("synapses")) {
        std::vector<SynapseState> cells;
        for (const auto& cell : layer) {
            SynapseState s;
            s.resources = cell.at("resources").get<std::vector<double>>();
            s.free_pool = cell.at("free_pool").get<double>();
            cells.push_back(std::move(s));
        }
        net.synapses.push_back(std::move(cells));
    }
    if (net.synapses.size() != net.layers.size())
        throw std::runtime_error("snapshot: layer/synapse count mismatch");
    return net;
}

inline void save_network(const NetworkState& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_network: cannot open " + path.string());
    out << to_snapshot_json(net).dump(2) << '\n';
    if (!out) throw std::runtime_error("save_network: write failed for " + path.string());
}

inline NetworkState load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_network: cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return network_from_snapshot_json(j);
}

}  // namespace percept

#pragma once

#include <string>

#include "json.hpp"
#include "taskcodec/common.hpp"
#include "taskcodec/hash.hpp"

namespace taskcodec {

using nlohmann::json;

// Transform widths and kernels. Four stride-2 stages in the core
// analysis/synthesis transforms, two stride-2 stages in each hyper
// transform, ReLU activations throughout, Laplacian entropy model with
// sigma clamped from below.
struct NetworkConfig {
    int latent_channels = 192;  // M
    int hyper_channels = 128;   // N
    int core_kernel = 5;        // stride-2 convs in g_a / g_s
    int hyper_kernel = 5;       // stride-2 convs in h_a / h_s
    int hyper_head_kernel = 3;  // stride-1 convs entering h_a / leaving h_s
    double sigma_min = 0.11;

    static NetworkConfig full() { return NetworkConfig{}; }

    static NetworkConfig toy() {
        NetworkConfig c;
        c.latent_channels = 32;
        c.hyper_channels = 16;
        return c;
    }

    json to_json() const {
        return json{{"latent_channels", latent_channels}, {"hyper_channels", hyper_channels},
                    {"core_kernel", core_kernel},         {"hyper_kernel", hyper_kernel},
                    {"hyper_head_kernel", hyper_head_kernel}, {"sigma_min", sigma_min}};
    }

    static NetworkConfig from_json(const json& j) {
        NetworkConfig c;
        c.latent_channels = j.at("latent_channels").get<int>();
        c.hyper_channels = j.at("hyper_channels").get<int>();
        c.core_kernel = j.value("core_kernel", 5);
        c.hyper_kernel = j.value("hyper_kernel", 5);
        c.hyper_head_kernel = j.value("hyper_head_kernel", 3);
        c.sigma_min = j.value("sigma_min", 0.11);
        return c;
    }

    static NetworkConfig preset(const std::string& name) {
        if (name == "full") return full();
        if (name == "toy") return toy();
        fail(ErrorKind::Config, "unknown model preset: " + name);
    }

    uint32_t id() const { return static_cast<uint32_t>(fnv1a64(to_json().dump())); }

    bool operator==(const NetworkConfig&) const = default;
};

// Core latent is H/16 after padding; hyper latent is four more ceil-halvings.
inline int core_latent_extent(int padded) { return padded / 16; }
inline int hyper_latent_extent(int latent) { return ceil_div(ceil_div(latent, 2), 2); }

}  // namespace taskcodec

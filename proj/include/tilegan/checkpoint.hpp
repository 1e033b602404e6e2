#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tilegan/adam.hpp"
#include "tilegan/io.hpp"
#include "tilegan/mlp.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

using nlohmann::json;

inline json tensor_to_json(const tensor2& t) {
    json j;
    j["rows"] = t.rows();
    j["cols"] = t.cols();
    std::vector<double> data(static_cast<std::size_t>(t.size()));
    for (Eigen::Index r = 0; r < t.rows(); ++r)
        for (Eigen::Index c = 0; c < t.cols(); ++c)
            data[static_cast<std::size_t>(r * t.cols() + c)] = t(r, c);
    j["data"] = std::move(data);
    return j;
}

inline tensor2 tensor_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 ||
        data.size() != static_cast<std::size_t>(rows * cols))
        throw config_error("tensor payload does not match its declared shape");
    tensor2 t(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            t(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    return t;
}

inline json params_to_json(const parameter_set& p) {
    json arr = json::array();
    for (const auto& e : p.entries) {
        json j = tensor_to_json(e.value);
        j["name"] = e.name;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline parameter_set params_from_json(const json& arr) {
    parameter_set p;
    for (const auto& j : arr)
        p.add(j.at("name").get<std::string>(), tensor_from_json(j));
    return p;
}

inline json mlp_spec_to_json(const mlp_spec& s) {
    return json{{"widths", s.widths},
                {"hidden", to_string(s.hidden)},
                {"output", to_string(s.output)},
                {"leaky_slope", s.leaky_slope}};
}

inline mlp_spec mlp_spec_from_json(const json& j) {
    mlp_spec s;
    s.widths = j.at("widths").get<std::vector<int>>();
    s.hidden = activation_from_string(j.at("hidden").get<std::string>());
    s.output = activation_from_string(j.at("output").get<std::string>());
    s.leaky_slope = j.at("leaky_slope").get<double>();
    s.validate();
    return s;
}

inline json adam_state_to_json(const adam_state& s) {
    json j;
    j["t"] = s.t;
    j["m"] = json::array();
    j["v"] = json::array();
    for (const auto& t : s.m) j["m"].push_back(tensor_to_json(t));
    for (const auto& t : s.v) j["v"].push_back(tensor_to_json(t));
    return j;
}

inline adam_state adam_state_from_json(const json& j) {
    adam_state s;
    s.t = j.at("t").get<std::int64_t>();
    for (const auto& t : j.at("m")) s.m.push_back(tensor_from_json(t));
    for (const auto& t : j.at("v")) s.v.push_back(tensor_from_json(t));
    return s;
}

constexpr int checkpoint_format_version = 1;

// Everything needed to resume training or to generate: both network specs and
// parameter sets, the class-embedding table, optimizer state, and the run's
// seed plus position.
struct gan_checkpoint {
    int format_version = checkpoint_format_version;
    std::int64_t epoch = 0;
    std::int64_t iter = 0;
    std::uint64_t seed = 0;
    mlp_spec gen_spec;
    mlp_spec critic_spec;
    parameter_set gen_params;
    parameter_set critic_params;
    tensor2 embedding;
    adam_state opt_gen;
    adam_state opt_critic;
    adam_state opt_embed;

    json to_json() const {
        json j;
        j["format_version"] = format_version;
        j["epoch"] = epoch;
        j["iter"] = iter;
        j["seed"] = seed;
        j["generator"] = {{"spec", mlp_spec_to_json(gen_spec)},
                          {"params", params_to_json(gen_params)}};
        j["critic"] = {{"spec", mlp_spec_to_json(critic_spec)},
                       {"params", params_to_json(critic_params)}};
        j["embedding"] = tensor_to_json(embedding);
        j["opt_gen"] = adam_state_to_json(opt_gen);
        j["opt_critic"] = adam_state_to_json(opt_critic);
        j["opt_embed"] = adam_state_to_json(opt_embed);
        return j;
    }

    static gan_checkpoint from_json(const json& j) {
        gan_checkpoint c;
        c.format_version = j.at("format_version").get<int>();
        if (c.format_version != checkpoint_format_version)
            throw config_error("unsupported checkpoint format_version " +
                               std::to_string(c.format_version));
        c.epoch = j.at("epoch").get<std::int64_t>();
        c.iter = j.at("iter").get<std::int64_t>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.gen_spec = mlp_spec_from_json(j.at("generator").at("spec"));
        c.gen_params = params_from_json(j.at("generator").at("params"));
        c.critic_spec = mlp_spec_from_json(j.at("critic").at("spec"));
        c.critic_params = params_from_json(j.at("critic").at("params"));
        c.embedding = tensor_from_json(j.at("embedding"));
        c.opt_gen = adam_state_from_json(j.at("opt_gen"));
        c.opt_critic = adam_state_from_json(j.at("opt_critic"));
        c.opt_embed = adam_state_from_json(j.at("opt_embed"));
        return c;
    }

    void save(const std::filesystem::path& path) const {
        write_text_atomic(path, to_json().dump(2) + "\n");
    }

    static gan_checkpoint load(const std::filesystem::path& path) {
        json j;
        try {
            j = json::parse(read_text(path));
        } catch (const json::exception& e) {
            throw config_error("checkpoint " + path.string() +
                               " is not valid JSON: " + e.what());
        }
        try {
            return from_json(j);
        } catch (const json::exception& e) {
            throw config_error("checkpoint " + path.string() +
                               " is missing fields: " + e.what());
        }
    }
};

// A trained classifier travels as spec + params + its input geometry.
struct classifier_checkpoint {
    int format_version = checkpoint_format_version;
    int image_side = 0;
    int num_classes = 0;
    mlp_spec spec;
    parameter_set params;

    json to_json() const {
        return json{{"format_version", format_version},
                    {"image_side", image_side},
                    {"num_classes", num_classes},
                    {"spec", mlp_spec_to_json(spec)},
                    {"params", params_to_json(params)}};
    }

    static classifier_checkpoint from_json(const json& j) {
        classifier_checkpoint c;
        c.format_version = j.at("format_version").get<int>();
        if (c.format_version != checkpoint_format_version)
            throw config_error("unsupported classifier format_version " +
                               std::to_string(c.format_version));
        c.image_side = j.at("image_side").get<int>();
        c.num_classes = j.at("num_classes").get<int>();
        c.spec = mlp_spec_from_json(j.at("spec"));
        c.params = params_from_json(j.at("params"));
        return c;
    }

    void save(const std::filesystem::path& path) const {
        write_text_atomic(path, to_json().dump(2) + "\n");
    }

    static classifier_checkpoint load(const std::filesystem::path& path) {
        json j;
        try {
            j = json::parse(read_text(path));
        } catch (const json::exception& e) {
            throw config_error("classifier " + path.string() +
                               " is not valid JSON: " + e.what());
        }
        try {
            return from_json(j);
        } catch (const json::exception& e) {
            throw config_error("classifier " + path.string() +
                               " is missing fields: " + e.what());
        }
    }
};

}  // namespace tilegan

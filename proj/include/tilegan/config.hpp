#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "tilegan/checkpoint.hpp"
#include "tilegan/common.hpp"
#include "tilegan/io.hpp"

namespace tilegan {

// Flat key/value settings for one subcommand: seeded with the full default
// set, optionally merged from a JSON file, then overridden by flags. Every
// key the subcommand understands is present from the start, so the emitted
// resolved-config.json always records the complete effective configuration.
class run_config {
public:
    explicit run_config(json defaults) : values_(std::move(defaults)) {
        require(values_.is_object(), "run_config: defaults must be a JSON object");
    }

    void merge_file(const std::filesystem::path& path) {
        json doc;
        try {
            doc = json::parse(read_text(path));
        } catch (const json::exception& e) {
            throw config_error("config file " + path.string() + ": " + e.what());
        }
        if (!doc.is_object())
            throw config_error("config file " + path.string() +
                               ": top level must be a JSON object");
        for (const auto& [key, value] : doc.items()) set(key, value);
    }

    void set(const std::string& key, json value) {
        if (!values_.contains(key))
            throw config_error("unknown config key: " + key);
        values_[key] = std::move(value);
    }

    bool getb(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_boolean())
            throw config_error("config key '" + key + "' must be a boolean");
        return v.get<bool>();
    }

    long long geti(const std::string& key) const {
        const json& v = at(key);
        if (v.is_number_integer()) return v.get<long long>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d == std::trunc(d)) return static_cast<long long>(d);
        }
        throw config_error("config key '" + key + "' must be an integer");
    }

    double getd(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_number())
            throw config_error("config key '" + key + "' must be a number");
        return v.get<double>();
    }

    std::string gets(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_string())
            throw config_error("config key '" + key + "' must be a string");
        return v.get<std::string>();
    }

    std::vector<int> ints(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_array())
            throw config_error("config key '" + key +
                               "' must be an array of integers");
        std::vector<int> out;
        for (const auto& item : v) {
            if (!item.is_number_integer())
                throw config_error("config key '" + key +
                                   "' must be an array of integers");
            out.push_back(item.get<int>());
        }
        return out;
    }

    const json& resolved() const { return values_; }

    void write_resolved(const std::filesystem::path& out_dir) const {
        write_text_atomic(out_dir / "resolved-config.json", values_.dump(2) + "\n");
    }

private:
    const json& at(const std::string& key) const {
        require(values_.contains(key), "run_config: missing key " + key);
        return values_[key];
    }

    json values_;
};

}  // namespace tilegan

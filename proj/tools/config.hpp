#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwlab/geometry.hpp"
#include "mwlab/quadrature.hpp"
#include "mwlab/weights.hpp"

namespace mwcli {

using json = nlohmann::ordered_json;

// Malformed configuration; field is a dotted path, line is 1-based when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& msg, int line = 0)
        : std::runtime_error(format(field, msg, line)), field_(std::move(field)), line_(line) {}
    const std::string& field() const { return field_; }
    int line() const { return line_; }

private:
    static std::string format(const std::string& field, const std::string& msg, int line);
    std::string field_;
    int line_;
};

struct ExperimentConfig {
    json weight_doc;
    mwlab::WeightSpec weight = mwlab::WeightSpec::identity(1);
    std::vector<double> ps{2.0};
    mwlab::Box box;
    int jmin = 0;
    int jmax = 4;
    int extras = 0;
    mwlab::QuadratureConfig quadrature;
    std::uint64_t seed = 0x5eed;
    std::optional<mwlab::Cube> cube;
    std::vector<std::string> kinds{"apinf"};
    std::vector<std::string> suites;
    json params = json::object();  // per-suite parameters ("sharp", "multiplier", ...)

    mwlab::ProbeFamily family() const;
    // Q for single-cube commands: "cube" when given, else the family box when it is a cube, else [0, 1]^n.
    mwlab::Cube main_cube() const;
    json echo() const;
};

mwlab::WeightSpec parse_weight(const json& doc, const std::string& path = "weight");
ExperimentConfig parse_config(const json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

mwlab::Cube parse_cube(const json& doc, const std::string& path);
json cube_to_json(const mwlab::Cube& q);
json mat_to_json(const mwlab::Mat& a);
// Finite numbers as JSON numbers, infinities and NaN as strings.
json num(double x);
double from_num(const json& j);

}  // namespace mwcli

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace speckle {

/// The seven envelope-statistics families, in canonical report order.
enum class Family : int {
    rayleigh = 0,
    nakagami = 1,
    gamma_family = 2,
    rician = 3,
    burr = 4,
    pareto = 5,
    lomax = 6,
};

inline constexpr std::array<Family, 7> kAllFamilies = {
    Family::rayleigh, Family::nakagami, Family::gamma_family, Family::rician,
    Family::burr,     Family::pareto,   Family::lomax,
};

const char* family_name(Family f);
std::optional<Family> family_from_name(std::string_view name);

struct RayleighParams {
    double sigma;  // scale, intensity units
};

struct NakagamiParams {
    double m;      // shape, >= 0.5
    double omega;  // scale, E[X^2]
};

struct GammaParams {
    double shape;
    double scale;
};

struct RicianParams {
    double nu;  // coherent amplitude, >= 0
    double s;   // noise scale
};

struct BurrParams {
    double c;       // first shape
    double k;       // second shape
    double lambda;  // scale
};

struct ParetoParams {
    double a;      // tail index
    double x_min;  // support lower bound
};

struct LomaxParams {
    double alpha_l;
    double lambda_l;
};

// Variant order must match the Family enum so the index doubles as the tag.
using DistributionParams = std::variant<RayleighParams, NakagamiParams, GammaParams, RicianParams,
                                        BurrParams, ParetoParams, LomaxParams>;

inline Family family_of(const DistributionParams& p) {
    return static_cast<Family>(p.index());
}

/// Throws std::domain_error when a parameter is outside its family's domain.
void validate_params(const DistributionParams& p);

/// Parameter names and values in declaration order, e.g. {("m", 1.2), ("omega", 3000)}.
std::vector<std::pair<std::string, double>> named_values(const DistributionParams& p);

std::size_t parameter_count(Family f);

/// Rebuilds a parameter pack from (name, value) pairs; inverse of named_values.
DistributionParams params_from_named(Family f,
                                     std::span<const std::pair<std::string, double>> values);

/// JSON form {"family": "...", "params": {...}} with the exact field names above.
nlohmann::ordered_json params_to_json(const DistributionParams& p);
DistributionParams params_from_json(const nlohmann::json& j);

}

#include "speckle/families.hpp"

#include <cmath>
#include <stdexcept>

namespace speckle {

namespace {

bool positive_finite(double v) {
    return std::isfinite(v) && v > 0.0;
}

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::rayleigh: return "rayleigh";
        case Family::nakagami: return "nakagami";
        case Family::gamma_family: return "gamma";
        case Family::rician: return "rician";
        case Family::burr: return "burr";
        case Family::pareto: return "pareto";
        case Family::lomax: return "lomax";
    }
    return "unknown";
}

std::optional<Family> family_from_name(std::string_view name) {
    for (Family f : kAllFamilies)
        if (name == family_name(f)) return f;
    return std::nullopt;
}

void validate_params(const DistributionParams& p) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, RayleighParams>) {
                if (!positive_finite(v.sigma)) throw std::domain_error("rayleigh: sigma must be > 0");
            } else if constexpr (std::is_same_v<T, NakagamiParams>) {
                if (!std::isfinite(v.m) || v.m < 0.5) throw std::domain_error("nakagami: m must be >= 0.5");
                if (!positive_finite(v.omega)) throw std::domain_error("nakagami: omega must be > 0");
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                if (!positive_finite(v.shape)) throw std::domain_error("gamma: shape must be > 0");
                if (!positive_finite(v.scale)) throw std::domain_error("gamma: scale must be > 0");
            } else if constexpr (std::is_same_v<T, RicianParams>) {
                if (!std::isfinite(v.nu) || v.nu < 0.0) throw std::domain_error("rician: nu must be >= 0");
                if (!positive_finite(v.s)) throw std::domain_error("rician: s must be > 0");
            } else if constexpr (std::is_same_v<T, BurrParams>) {
                if (!positive_finite(v.c)) throw std::domain_error("burr: c must be > 0");
                if (!positive_finite(v.k)) throw std::domain_error("burr: k must be > 0");
                if (!positive_finite(v.lambda)) throw std::domain_error("burr: lambda must be > 0");
            } else if constexpr (std::is_same_v<T, ParetoParams>) {
                if (!positive_finite(v.a)) throw std::domain_error("pareto: a must be > 0");
                if (!positive_finite(v.x_min)) throw std::domain_error("pareto: x_min must be > 0");
            } else if constexpr (std::is_same_v<T, LomaxParams>) {
                if (!positive_finite(v.alpha_l)) throw std::domain_error("lomax: alpha_l must be > 0");
                if (!positive_finite(v.lambda_l)) throw std::domain_error("lomax: lambda_l must be > 0");
            }
        },
        p);
}

std::vector<std::pair<std::string, double>> named_values(const DistributionParams& p) {
    return std::visit(
        [](const auto& v) -> std::vector<std::pair<std::string, double>> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, RayleighParams>) {
                return {{"sigma", v.sigma}};
            } else if constexpr (std::is_same_v<T, NakagamiParams>) {
                return {{"m", v.m}, {"omega", v.omega}};
            } else if constexpr (std::is_same_v<T, GammaParams>) {
                return {{"shape", v.shape}, {"scale", v.scale}};
            } else if constexpr (std::is_same_v<T, RicianParams>) {
                return {{"nu", v.nu}, {"s", v.s}};
            } else if constexpr (std::is_same_v<T, BurrParams>) {
                return {{"c", v.c}, {"k", v.k}, {"lambda", v.lambda}};
            } else if constexpr (std::is_same_v<T, ParetoParams>) {
                return {{"a", v.a}, {"x_min", v.x_min}};
            } else {
                return {{"alpha_l", v.alpha_l}, {"lambda_l", v.lambda_l}};
            }
        },
        p);
}

std::size_t parameter_count(Family f) {
    switch (f) {
        case Family::rayleigh: return 1;
        case Family::burr: return 3;
        default: return 2;
    }
}

DistributionParams params_from_named(Family f,
                                     std::span<const std::pair<std::string, double>> values) {
    auto get = [&](const char* name) {
        for (const auto& [n, v] : values)
            if (n == name) return v;
        throw std::invalid_argument(std::string("params_from_named: missing '") + name + "' for " +
                                    family_name(f));
    };
    DistributionParams p;
    switch (f) {
        case Family::rayleigh: p = RayleighParams{get("sigma")}; break;
        case Family::nakagami: p = NakagamiParams{get("m"), get("omega")}; break;
        case Family::gamma_family: p = GammaParams{get("shape"), get("scale")}; break;
        case Family::rician: p = RicianParams{get("nu"), get("s")}; break;
        case Family::burr: p = BurrParams{get("c"), get("k"), get("lambda")}; break;
        case Family::pareto: p = ParetoParams{get("a"), get("x_min")}; break;
        case Family::lomax: p = LomaxParams{get("alpha_l"), get("lambda_l")}; break;
    }
    validate_params(p);
    return p;
}

nlohmann::ordered_json params_to_json(const DistributionParams& p) {
    nlohmann::ordered_json fields;
    for (const auto& [name, value] : named_values(p)) fields[name] = value;
    return nlohmann::ordered_json{{"family", family_name(family_of(p))}, {"params", fields}};
}

DistributionParams params_from_json(const nlohmann::json& j) {
    const std::string fam = j.at("family").get<std::string>();
    const auto f = family_from_name(fam);
    if (!f) throw std::invalid_argument("unknown family: " + fam);
    const auto& q = j.at("params");
    auto get = [&](const char* name) { return q.at(name).get<double>(); };
    DistributionParams p;
    switch (*f) {
        case Family::rayleigh: p = RayleighParams{get("sigma")}; break;
        case Family::nakagami: p = NakagamiParams{get("m"), get("omega")}; break;
        case Family::gamma_family: p = GammaParams{get("shape"), get("scale")}; break;
        case Family::rician: p = RicianParams{get("nu"), get("s")}; break;
        case Family::burr: p = BurrParams{get("c"), get("k"), get("lambda")}; break;
        case Family::pareto: p = ParetoParams{get("a"), get("x_min")}; break;
        case Family::lomax: p = LomaxParams{get("alpha_l"), get("lambda_l")}; break;
    }
    validate_params(p);
    return p;
}

}

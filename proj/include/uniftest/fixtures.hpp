// fixtures.hpp
//
// JSON fixture files for pmfs and densities, and the sample-source
// descriptors accepted on the command line.
//
// Fixture schema ("schema": "uniftest.fixture/1"):
//   {"kind": "pmf", "pmf": [p_0, ..., p_{m-1}]}
//   {"kind": "density", "breakpoints": [...], "values": [...], "L": 4.0,
//    "family": {...}}          // "family" is optional provenance metadata
//
// Source descriptors:
//   discrete:   "uniform" | "perturbed:<gamma>" | "<path>.json" (kind pmf)
//   continuous: "uniform" | "<path>.json" (kind density)
#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "uniftest/distributions.hpp"

namespace uniftest {

inline constexpr const char* kFixtureSchema = "uniftest.fixture/1";

inline nlohmann::json pmf_to_json(const DiscreteDistribution& p) {
    nlohmann::json j;
    j["schema"] = kFixtureSchema;
    j["kind"] = "pmf";
    j["pmf"] = std::vector<double>(p.pmf().begin(), p.pmf().end());
    return j;
}

inline nlohmann::json density_to_json(const LipschitzDensity& f) {
    nlohmann::json j;
    j["schema"] = kFixtureSchema;
    j["kind"] = "density";
    j["breakpoints"] = std::vector<double>(f.breakpoints().begin(), f.breakpoints().end());
    j["values"] = std::vector<double>(f.values().begin(), f.values().end());
    j["L"] = f.lipschitz_bound();
    return j;
}

inline nlohmann::json lower_bound_to_json(const LowerBoundFamilySpec& spec) {
    nlohmann::json j = density_to_json(make_lower_bound_density(spec));
    j["family"] = {{"name", "lower_bound"},
                   {"epsilon", spec.epsilon},
                   {"eta", spec.eta},
                   {"cells", spec.cells},
                   {"delta_width", spec.delta_width},
                   {"achieved_epsilon", spec.achieved_epsilon},
                   {"distance", spec.distance()},
                   {"bits", spec.bits}};
    return j;
}

using Fixture = std::variant<DiscreteDistribution, LipschitzDensity>;

inline Fixture fixture_from_json(const nlohmann::json& j) {
    if (j.contains("schema") && j.at("schema") != kFixtureSchema)
        throw std::invalid_argument("unsupported fixture schema " + j.at("schema").dump());
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "pmf") return DiscreteDistribution(j.at("pmf").get<std::vector<double>>());
    if (kind == "density")
        return LipschitzDensity(j.at("breakpoints").get<std::vector<double>>(),
                                j.at("values").get<std::vector<double>>(), j.at("L").get<double>());
    throw std::invalid_argument("unknown fixture kind '" + kind + "'");
}

inline Fixture load_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture " + path);
    return fixture_from_json(nlohmann::json::parse(in));
}

inline bool ends_with_json(const std::string& s) {
    return s.size() >= 5 && s.compare(s.size() - 5, 5, ".json") == 0;
}

/// A discrete sample source. Uniform and perturbed sources sample in O(1);
/// pmf fixtures use inverse-CDF search.
class DiscreteSource {
public:
    enum class Kind { Uniform, Perturbed, Pmf };

    static DiscreteSource uniform(std::uint64_t m) {
        if (m == 0) throw std::domain_error("m must be positive");
        return DiscreteSource(Kind::Uniform, m, 0.0, nullptr, "uniform");
    }

    static DiscreteSource perturbed(std::uint64_t m, double gamma) {
        if (m == 0 || m % 2 != 0) throw std::domain_error("perturbed family needs an even support size");
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::domain_error("gamma must lie in [0,1]");
        std::ostringstream label;
        label << "perturbed:" << gamma;
        return DiscreteSource(Kind::Perturbed, m, gamma, nullptr, label.str());
    }

    static DiscreteSource from_pmf(DiscreteDistribution p, std::string label) {
        auto ptr = std::make_shared<const DiscreteDistribution>(std::move(p));
        const double gamma = l1_to_uniform(*ptr);
        const std::uint64_t m = ptr->support_size();
        return DiscreteSource(Kind::Pmf, m, gamma, std::move(ptr), std::move(label));
    }

    /// Parses a descriptor. `m` may be omitted for pmf fixtures (taken from the file).
    static DiscreteSource parse(const std::string& descriptor, std::optional<std::uint64_t> m) {
        if (descriptor == "uniform") {
            if (!m) throw std::invalid_argument("source 'uniform' needs --m");
            return uniform(*m);
        }
        if (descriptor.rfind("perturbed:", 0) == 0) {
            if (!m) throw std::invalid_argument("source 'perturbed' needs --m");
            return perturbed(*m, std::stod(descriptor.substr(10)));
        }
        if (ends_with_json(descriptor)) {
            auto fx = load_fixture(descriptor);
            auto* p = std::get_if<DiscreteDistribution>(&fx);
            if (!p) throw std::invalid_argument(descriptor + " is not a pmf fixture");
            if (m && *m != p->support_size())
                throw std::invalid_argument("fixture support size " + std::to_string(p->support_size()) +
                                            " does not match --m " + std::to_string(*m));
            return from_pmf(std::move(*p), descriptor);
        }
        throw std::invalid_argument("unknown discrete source '" + descriptor + "'");
    }

    Symbol draw(Rng& rng) const {
        switch (kind_) {
            case Kind::Uniform:
                return rng.below(m_);
            case Kind::Perturbed: {
                const Symbol pair = rng.below(m_ / 2);
                return 2 * pair + (rng.uniform01() < 0.5 * (1.0 + gamma_) ? 0 : 1);
            }
            case Kind::Pmf:
                return sample_discrete(*pmf_, rng);
        }
        return 0;
    }

    Kind kind() const noexcept { return kind_; }
    std::uint64_t support_size() const noexcept { return m_; }
    /// l1 distance to uniform.
    double gamma() const noexcept { return gamma_; }
    bool is_uniform() const noexcept { return gamma_ == 0.0; }
    const std::string& label() const noexcept { return label_; }

private:
    DiscreteSource(Kind kind, std::uint64_t m, double gamma, std::shared_ptr<const DiscreteDistribution> pmf,
                   std::string label)
        : kind_(kind), m_(m), gamma_(gamma), pmf_(std::move(pmf)), label_(std::move(label)) {}

    Kind kind_;
    std::uint64_t m_;
    double gamma_;
    std::shared_ptr<const DiscreteDistribution> pmf_;
    std::string label_;
};

/// A sample source on [0,1].
class ContinuousSource {
public:
    static ContinuousSource uniform() { return ContinuousSource(nullptr, 0.0, "uniform"); }

    static ContinuousSource from_density(LipschitzDensity f, std::string label) {
        auto ptr = std::make_shared<const LipschitzDensity>(std::move(f));
        const double gamma = l1_continuous_to_uniform(*ptr);
        return ContinuousSource(std::move(ptr), gamma, std::move(label));
    }

    static ContinuousSource parse(const std::string& descriptor) {
        if (descriptor == "uniform") return uniform();
        if (ends_with_json(descriptor)) {
            auto fx = load_fixture(descriptor);
            auto* f = std::get_if<LipschitzDensity>(&fx);
            if (!f) throw std::invalid_argument(descriptor + " is not a density fixture");
            return from_density(std::move(*f), descriptor);
        }
        throw std::invalid_argument("unknown continuous source '" + descriptor + "'");
    }

    double draw(Rng& rng) const { return density_ ? sample_density(*density_, rng) : rng.uniform01(); }

    double gamma() const noexcept { return gamma_; }
    bool is_uniform() const noexcept { return gamma_ == 0.0; }
    const std::string& label() const noexcept { return label_; }
    const LipschitzDensity* density() const noexcept { return density_.get(); }

private:
    ContinuousSource(std::shared_ptr<const LipschitzDensity> f, double gamma, std::string label)
        : density_(std::move(f)), gamma_(gamma), label_(std::move(label)) {}

    std::shared_ptr<const LipschitzDensity> density_;
    double gamma_;
    std::string label_;
};

}  // namespace uniftest

// distributions.hpp
//
// Test-distribution families and their samplers:
//   - discrete uniform and the alternating perturbation p^gamma,
//   - piecewise-linear densities on [0,1] with a Lipschitz bound,
//   - the triangle-wave family indexed by +/-1 bit vectors, every member of
//     which sits at the same l1 distance L*width/4 from uniform.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uniftest/coincidence.hpp"
#include "uniftest/discrete_distribution.hpp"
#include "uniftest/random.hpp"

namespace uniftest {

// ---------------------------------------------------------------------------
// Discrete families
// ---------------------------------------------------------------------------

inline DiscreteDistribution make_uniform(std::uint64_t m) {
    if (m == 0) throw std::domain_error("support size must be positive");
    return DiscreteDistribution(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

/// Alternating masses (1+gamma)/m, (1-gamma)/m, ... starting at symbol 0.
/// The l1 distance to uniform is exactly gamma.
inline DiscreteDistribution make_perturbed(std::uint64_t m, double gamma) {
    if (m == 0 || m % 2 != 0) throw std::domain_error("perturbed family needs an even support size");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::domain_error("gamma must lie in [0,1]");
    const auto md = static_cast<double>(m);
    std::vector<double> pmf(m);
    for (std::uint64_t j = 0; j < m; ++j) pmf[j] = (j % 2 == 0 ? 1.0 + gamma : 1.0 - gamma) / md;
    return DiscreteDistribution(std::move(pmf));
}

/// Inverse-CDF draw by binary search over the cached cdf.
inline Symbol sample_discrete(const DiscreteDistribution& p, Rng& rng) {
    const auto cdf = p.cdf();
    const double target = rng.uniform01() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.end()) {
        // target rounded onto the total; take the last symbol carrying mass
        std::size_t j = cdf.size() - 1;
        while (j > 0 && p[j] == 0.0) --j;
        return j;
    }
    return static_cast<Symbol>(it - cdf.begin());
}

// ---------------------------------------------------------------------------
// Piecewise-linear Lipschitz densities
// ---------------------------------------------------------------------------

/// Density on [0,1] given by linear interpolation of (breakpoints, values).
class LipschitzDensity {
public:
    static constexpr double kSlopeSlack = 1e-12;
    static constexpr double kMassTolerance = 1e-10;

    LipschitzDensity(std::vector<double> breakpoints, std::vector<double> values, double lipschitz_bound)
        : x_(std::move(breakpoints)), v_(std::move(values)), lipschitz_(lipschitz_bound) {
        if (x_.size() < 2 || x_.size() != v_.size())
            throw std::domain_error("density needs matching breakpoints and values (at least two)");
        if (x_.front() != 0.0 || x_.back() != 1.0)
            throw std::domain_error("breakpoints must start at 0 and end at 1");
        if (!(lipschitz_ > 0.0) || !std::isfinite(lipschitz_))
            throw std::domain_error("Lipschitz bound must be positive");
        for (std::size_t i = 0; i < v_.size(); ++i)
            if (!std::isfinite(v_[i]) || v_[i] < 0.0)
                throw std::domain_error("density value at breakpoint " + std::to_string(i) + " is negative");
        cumulative_.assign(x_.size(), 0.0);
        for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
            const double w = x_[i + 1] - x_[i];
            if (!(w > 0.0)) throw std::domain_error("breakpoints must be strictly increasing");
            if (std::abs(slope(i)) > lipschitz_ * (1.0 + kSlopeSlack) + kSlopeSlack)
                throw std::domain_error("segment " + std::to_string(i) + " slope exceeds the Lipschitz bound");
            cumulative_[i + 1] = cumulative_[i] + 0.5 * (v_[i] + v_[i + 1]) * w;
        }
        if (std::abs(cumulative_.back() - 1.0) > kMassTolerance)
            throw std::domain_error("density integrates to " + std::to_string(cumulative_.back()));
    }

    /// Uniform density on [0,1]; any positive L admits it.
    static LipschitzDensity uniform(double lipschitz_bound = 1.0) {
        return LipschitzDensity({0.0, 1.0}, {1.0, 1.0}, lipschitz_bound);
    }

    std::span<const double> breakpoints() const noexcept { return x_; }
    std::span<const double> values() const noexcept { return v_; }
    double lipschitz_bound() const noexcept { return lipschitz_; }
    std::size_t segments() const noexcept { return x_.size() - 1; }
    double slope(std::size_t i) const { return (v_[i + 1] - v_[i]) / (x_[i + 1] - x_[i]); }
    double total_mass() const noexcept { return cumulative_.back(); }

    double operator()(double x) const {
        const std::size_t i = segment_of(x);
        return v_[i] + slope(i) * (x - x_[i]);
    }

    /// Integral of the density over [0, x].
    double cdf(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return cumulative_.back();
        const std::size_t i = segment_of(x);
        const double t = x - x_[i];
        return cumulative_[i] + v_[i] * t + 0.5 * slope(i) * t * t;
    }

    /// x with cdf(x) = u * total_mass(); exact up to rounding.
    double quantile(double u) const {
        const double target = std::clamp(u, 0.0, 1.0) * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        if (it == cumulative_.end()) return 1.0;
        const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cumulative_.begin() - 1, 0));
        const double r = target - cumulative_[i];
        const double a = slope(i), b = v_[i];
        // Root of a/2 t^2 + b t - r = 0 in the cancellation-free form; reduces to r/b when a = 0.
        const double disc = std::max(b * b + 2.0 * a * r, 0.0);
        const double denom = b + std::sqrt(disc);
        const double t = denom > 0.0 ? 2.0 * r / denom : 0.0;
        return std::clamp(x_[i] + t, x_[i], x_[i + 1]);
    }

private:
    std::size_t segment_of(double x) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const auto idx = static_cast<std::ptrdiff_t>(it - x_.begin()) - 1;
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(segments()) - 1));
    }

    std::vector<double> x_;
    std::vector<double> v_;
    double lipschitz_;
    std::vector<double> cumulative_;
};

inline double sample_density(const LipschitzDensity& f, Rng& rng) { return f.quantile(rng.uniform01()); }

/// Exact bin masses of f over m equal-width bins, renormalized to sum to 1.
inline DiscreteDistribution discretize(const LipschitzDensity& f, std::uint64_t m) {
    if (m == 0) throw std::domain_error("bin count must be positive");
    const auto md = static_cast<double>(m);
    std::vector<double> pmf(m);
    double prev = 0.0;
    for (std::uint64_t i = 0; i < m; ++i) {
        const double next = i + 1 == m ? f.total_mass() : f.cdf(static_cast<double>(i + 1) / md);
        pmf[i] = std::max(next - prev, 0.0);
        prev = next;
    }
    const double total = f.total_mass();
    for (double& p : pmf) p /= total;
    return DiscreteDistribution(std::move(pmf));
}

/// Integral of |f - 1| over [0,1], splitting each segment where it crosses 1.
inline double l1_continuous_to_uniform(const LipschitzDensity& f) {
    const auto x = f.breakpoints();
    const auto v = f.values();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double w = x[i + 1] - x[i];
        const double ga = v[i] - 1.0, gb = v[i + 1] - 1.0;
        if ((ga >= 0.0 && gb >= 0.0) || (ga <= 0.0 && gb <= 0.0)) {
            total += 0.5 * std::abs(ga + gb) * w;
        } else {
            const double t = ga / (ga - gb) * w;
            total += 0.5 * (std::abs(ga) * t + std::abs(gb) * (w - t));
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Triangle-wave family
// ---------------------------------------------------------------------------

/// Parameters of the triangle-wave family. The interval [0,1] is cut into M
/// cells of width delta_width; cell pair i carries the bump f_{z_i} followed by
/// f_{-z_i}, where f_{+1} rises to 1 + L*width/2 and f_{-1} dips to 1 - L*width/2.
///
/// resolve() sets width = 4(1+eta)eps/L, rounds M = 1/width down to an even
/// integer and recomputes width = 1/M. The achieved epsilon
/// L*width/(4(1+eta)) is therefore never below the requested one.
struct LowerBoundFamilySpec {
    double lipschitz_bound = 1.0;
    double epsilon = 0.0;
    double eta = 0.0;
    std::uint64_t cells = 0;  // M
    double delta_width = 0.0;
    double achieved_epsilon = 0.0;
    std::vector<int> bits;  // +1 / -1, length M/2

    static LowerBoundFamilySpec resolve(double lipschitz_bound, double epsilon, double eta) {
        if (!(lipschitz_bound > 0.0)) throw std::domain_error("Lipschitz bound must be positive");
        if (!(epsilon > 0.0)) throw std::domain_error("epsilon must be positive");
        if (!(eta > 0.0)) throw std::domain_error("eta must be positive");
        LowerBoundFamilySpec spec;
        spec.lipschitz_bound = lipschitz_bound;
        spec.epsilon = epsilon;
        spec.eta = eta;
        const double raw_cells = lipschitz_bound / (4.0 * (1.0 + eta) * epsilon);
        auto cells = static_cast<std::uint64_t>(std::floor(raw_cells + 1e-9));
        cells -= cells % 2;
        if (cells < 2)
            throw std::domain_error("L/(4(1+eta)eps) must be at least 2 to fit one cell pair");
        spec.cells = cells;
        spec.delta_width = 1.0 / static_cast<double>(cells);
        spec.achieved_epsilon = lipschitz_bound * spec.delta_width / (4.0 * (1.0 + eta));
        if (spec.peak_offset() > 1.0 + 1e-12)
            throw std::domain_error("triangle depth L*width/2 exceeds 1; density would go negative");
        return spec;
    }

    std::uint64_t bit_count() const noexcept { return cells / 2; }
    double peak_offset() const noexcept { return lipschitz_bound * delta_width / 2.0; }
    /// l1 distance of every member to uniform.
    double distance() const noexcept { return lipschitz_bound * delta_width / 4.0; }

    LowerBoundFamilySpec with_bits(std::vector<int> z) const {
        LowerBoundFamilySpec out = *this;
        out.bits = std::move(z);
        return out;
    }

    LowerBoundFamilySpec with_random_bits(Rng& rng) const {
        std::vector<int> z(bit_count());
        for (int& b : z) b = (rng() >> 63) != 0 ? 1 : -1;
        return with_bits(std::move(z));
    }
};

inline LipschitzDensity make_lower_bound_density(const LowerBoundFamilySpec& spec) {
    if (spec.cells < 2 || spec.cells % 2 != 0) throw std::domain_error("cell count must be even and positive");
    if (spec.bits.size() != spec.bit_count())
        throw std::domain_error("expected " + std::to_string(spec.bit_count()) + " bits, got " +
                                std::to_string(spec.bits.size()));
    const double depth = spec.peak_offset();
    if (depth > 1.0 + 1e-12) throw std::domain_error("triangle depth exceeds 1; density would go negative");
    const std::uint64_t points = 2 * spec.cells + 1;
    const auto half_steps = static_cast<double>(2 * spec.cells);
    std::vector<double> x(points), v(points, 1.0);
    for (std::uint64_t j = 0; j < points; ++j) x[j] = static_cast<double>(j) / half_steps;
    for (std::uint64_t cell = 0; cell < spec.cells; ++cell) {
        const int z = spec.bits[cell / 2];
        if (z != 1 && z != -1) throw std::domain_error("bits must be +1 or -1");
        const int sign = cell % 2 == 0 ? z : -z;
        v[2 * cell + 1] = std::max(1.0 + sign * depth, 0.0);
    }
    return LipschitzDensity(std::move(x), std::move(v), spec.lipschitz_bound);
}

}  // namespace uniftest

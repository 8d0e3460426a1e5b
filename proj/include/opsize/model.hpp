// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// Model definition for an all-to-all Brownian Majorana system coupled to an
// environment, and the rate bookkeeping derived from it:
//
//   kappa      = 4 J (q - 2)            intrinsic scrambling rate
//   gamma      = 4 U_1                  dissipation rate
//   kappa'     = 4 sum_{n>=3} (n-2) U_n environment-propelled scrambling
//   kappa_eff  = kappa + kappa'
//   Gamma      = 4 (J + sum_n U_n)      quasiparticle decay rate
//   U_n        = sum_m V_{n m}
//
// All couplings carry rate units.  Couplings with two system legs (n_s = 2)
// contribute to Gamma only: they commute with the size bookkeeping.
// Couplings with zero system legs act purely inside the environment and are
// treated as part of H_E: they are accepted but excluded from every rate.

namespace opsize {

struct CouplingTerm {
    int n_sys = 0;       // system Majoranas per term
    int m_env = 0;       // environment Majoranas per term
    double strength = 0; // V_{n m} >= 0

    bool operator==(const CouplingTerm&) const = default;
};

struct ModelSpec {
    int q = 4;
    double J = 0.0;
    std::vector<CouplingTerm> couplings;
    long N = 1000;
    long M = 20000;

    // Hard violations throw std::invalid_argument naming the field;
    // soft issues (M/N below warn_ratio, inert environment-only terms)
    // come back as warning strings.
    std::vector<std::string> validate(double warn_ratio = 10.0) const;

    // The J=0, U_1/U_3 two-coupling family: U_1 = r*kappa_eff/4 carried by a
    // (1,1) term, U_3 = kappa_eff/4 carried by a (3,1) term.
    static ModelSpec from_r(double r, double kappa_eff = 1.0, long N = 1000, long M = 20000);

    bool operator==(const ModelSpec&) const = default;
};

struct Rates {
    double kappa = 0.0;
    double gamma = 0.0;
    double kappa_prime = 0.0;
    double kappa_eff = 0.0;
    double Gamma = 0.0;
    std::map<int, double> U;  // n_sys -> U_n (n_sys >= 1 only)
    bool r_defined = false;
    double r = std::numeric_limits<double>::quiet_NaN();  // gamma / kappa_eff

    double growth_rate() const { return kappa_eff - gamma; }
};

enum class Phase { Scrambling, Critical, Dissipative };

struct PhaseLabel {
    Phase phase = Phase::Critical;
    double margin = 0.0;  // kappa_eff - gamma, unrounded
};

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::Scrambling: return "Scrambling";
        case Phase::Critical: return "Critical";
        case Phase::Dissipative: return "Dissipative";
    }
    return "?";
}

inline std::vector<std::string> ModelSpec::validate(double warn_ratio) const {
    if (q < 4 || q % 2 != 0)
        throw std::invalid_argument("ModelSpec.q: must be an even integer >= 4, got " +
                                    std::to_string(q));
    if (!(J >= 0.0))
        throw std::invalid_argument("ModelSpec.J: must be >= 0");
    if (N < 1) throw std::invalid_argument("ModelSpec.N: must be >= 1");
    if (M < 1) throw std::invalid_argument("ModelSpec.M: must be >= 1");
    if (M < N)
        throw std::invalid_argument("ModelSpec.M: environment must satisfy M >= N (got M=" +
                                    std::to_string(M) + ", N=" + std::to_string(N) + ")");

    std::set<std::pair<int, int>> shapes;
    std::vector<std::string> warnings;
    for (const auto& c : couplings) {
        if (c.n_sys < 0 || c.m_env < 0)
            throw std::invalid_argument("CouplingTerm: n_sys and m_env must be >= 0");
        if (c.n_sys == 0 && c.m_env == 0)
            throw std::invalid_argument("CouplingTerm: n_sys and m_env cannot both be 0");
        if ((c.n_sys + c.m_env) % 2 != 0)
            throw std::invalid_argument("CouplingTerm(" + std::to_string(c.n_sys) + "," +
                                        std::to_string(c.m_env) +
                                        "): n_sys + m_env must be even");
        if (!(c.strength >= 0.0))
            throw std::invalid_argument("CouplingTerm.strength: must be >= 0");
        if (!shapes.insert({c.n_sys, c.m_env}).second)
            throw std::invalid_argument("CouplingTerm(" + std::to_string(c.n_sys) + "," +
                                        std::to_string(c.m_env) +
                                        "): duplicate (n_sys, m_env) shape");
        if (c.n_sys == 0)
            warnings.push_back("coupling (0," + std::to_string(c.m_env) +
                               ") has no system legs; treated as part of H_E and ignored");
    }
    if (static_cast<double>(M) < warn_ratio * static_cast<double>(N))
        warnings.push_back("M/N = " + std::to_string(static_cast<double>(M) / N) +
                           " is below the recommended ratio " + std::to_string(warn_ratio));
    return warnings;
}

inline ModelSpec ModelSpec::from_r(double r, double kappa_eff, long N, long M) {
    if (!(r >= 0.0)) throw std::invalid_argument("from_r: r must be >= 0");
    if (!(kappa_eff > 0.0)) throw std::invalid_argument("from_r: kappa_eff must be > 0");
    ModelSpec spec;
    spec.q = 4;
    spec.J = 0.0;
    spec.N = N;
    spec.M = M;
    spec.couplings = {{1, 1, r * kappa_eff / 4.0}, {3, 1, kappa_eff / 4.0}};
    return spec;
}

inline Rates derive_rates(const ModelSpec& spec) {
    spec.validate();
    Rates rates;
    rates.kappa = 4.0 * spec.J * (spec.q - 2);
    double u_total = 0.0;
    for (const auto& c : spec.couplings) {
        if (c.n_sys == 0) continue;  // H_E-like, no system legs
        rates.U[c.n_sys] += c.strength;
    }
    for (const auto& [n, u] : rates.U) {
        u_total += u;
        if (n == 1) rates.gamma += 4.0 * u;
        if (n >= 3) rates.kappa_prime += 4.0 * (n - 2) * u;
    }
    rates.kappa_eff = rates.kappa + rates.kappa_prime;
    rates.Gamma = 4.0 * (spec.J + u_total);
    if (rates.kappa_eff > 0.0) {
        rates.r_defined = true;
        rates.r = rates.gamma / rates.kappa_eff;
    }
    return rates;
}

inline PhaseLabel classify_phase(const Rates& rates, double tie_tol = 1e-12) {
    if (rates.kappa_eff == 0.0 && rates.gamma == 0.0)
        throw std::invalid_argument("classify_phase: no dynamics (all rates zero)");
    PhaseLabel label;
    label.margin = rates.kappa_eff - rates.gamma;
    const double scale = std::max(std::abs(rates.kappa_eff), std::abs(rates.gamma));
    if (std::abs(label.margin) <= tie_tol * scale)
        label.phase = Phase::Critical;
    else if (label.margin > 0.0)
        label.phase = Phase::Scrambling;
    else
        label.phase = Phase::Dissipative;
    return label;
}

// t_s = ln(N) / (kappa_eff - gamma); +inf outside the scrambling phase.
inline double scrambling_time_estimate(const Rates& rates, long N, double tie_tol = 1e-12) {
    const auto label = classify_phase(rates, tie_tol);
    if (label.phase != Phase::Scrambling)
        return std::numeric_limits<double>::infinity();
    return std::log(static_cast<double>(N)) / label.margin;
}

}  // namespace opsize

#pragma once

/**
 * @file catalog.hpp
 * @brief Built-in metrics with analytic jets and known curvature.
 *
 * Names: flat, round_s4, s2xs2, s2xs2_unequal[:a:b], fubini_study,
 * fs_perturbed[:eps[:seed]]. Parameters follow the name, colon separated.
 */

#include <optional>
#include <string>
#include <vector>

#include "weylscope/geometry.hpp"

namespace weylscope {

struct GroundTruth {
    std::optional<double> s;                      // constant scalar curvature, if any
    std::optional<std::array<double, 3>> wplus;   // constant W+ eigenvalues, if any
    bool einstein = false;
    bool kahler = false;
    int det_sign = 0;                             // sign of det W+, 0 when W+ = 0 or not constant
    std::optional<double> einstein_constant;
};

struct CatalogEntry {
    std::string name;       // canonical name with parameters
    std::string description;
    std::string coverage;   // which part of the manifold the chart covers
    MetricPtr metric;
    GroundTruth truth;
    std::optional<std::string> potential;  // Kahler potential source, for potential-built entries
};

/// Throws InputError for unknown names or invalid parameters, and
/// DomainError when fs_perturbed loses s > 0 on its grid.
CatalogEntry catalog_get(const std::string& name);

/// One entry per family with default parameters, sorted by name.
std::vector<CatalogEntry> list_catalog();

/// Potential of fs_perturbed: Fubini-Study plus eps * q(x - c) exp(-4|x - c|^2)
/// with centre c in [-1/4, 1/4]^4 and quadratic form q (weights in [-1, 1])
/// drawn from the seed.
std::string fs_perturbed_potential(double eps, unsigned long long seed);

}  // namespace weylscope

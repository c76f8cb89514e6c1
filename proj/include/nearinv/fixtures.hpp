#pragma once

#include <string>
#include <vector>

#include "nearinv/spec_io.hpp"

namespace nearinv::fixtures {

/// M = span{1+z, z+z^2} inside the Hardy ambient, metric pulled back
/// through the map fixing 1 and scaling z, z^2 by sqrt(2); phi = z.
/// The norm drop 3 vs 8/3 lives here.
LoadedSpec eh1(int degree = 32);

/// M = theta * (Dirichlet truncation) for the Blaschke factor with zero
/// 1/2, carried by the Hardy ambient with Gram diag(1..count); phi = z.
LoadedSpec eh2(int degree = 32, int count = 7);

/// The full truncation of a Dirichlet-type ambient with its own metric;
/// phi = z. The norm ratio here is (D+1)^alpha / D^alpha.
LoadedSpec dirichlet_alpha(int degree = 32, double alpha = 1.0);

/// M = span{z} with the ambient metric, defect F = span{1}, phi = z.
/// M sits inside phi*H, so the t-only branch runs with exact norm
/// equality.
LoadedSpec defect_basic(int degree = 32);

struct GoldenCheck {
    std::string name;
    double expected = 0.0;
    double computed = 0.0;
    double tol = 0.0;
    bool pass() const;
};

std::vector<GoldenCheck> eh1_goldens();
std::vector<GoldenCheck> eh1_coefficient_law();
std::vector<GoldenCheck> eh2_goldens();
std::vector<GoldenCheck> dirichlet_alpha_goldens();
std::vector<GoldenCheck> defect_basic_goldens();

bool known_fixture(const std::string& name);
/// Runs one of "eh1", "eh2", "dirichlet-alpha", "defect-basic".
std::vector<GoldenCheck> run_fixture(const std::string& name);

} // namespace nearinv::fixtures

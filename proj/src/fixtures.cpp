#include "nearinv/fixtures.hpp"

#include <cmath>

namespace nearinv::fixtures {

namespace {

const Complex kOne(1.0, 0.0);
const Complex kZero(0.0, 0.0);

InnerFunction shift_inner() { return InnerFunction({kZero}); }

/// l^2 coefficient distance up to a unimodular phase factor.
double phase_distance(const TruncatedSeries& a, const TruncatedSeries& b) {
    Eigen::VectorXcd fa = a.flattened();
    Eigen::VectorXcd fb = b.flattened();
    const double cross = std::abs(fb.dot(fa));
    const double sq = fa.squaredNorm() + fb.squaredNorm() - 2.0 * cross;
    return std::sqrt(std::max(0.0, sq));
}

} // namespace

bool GoldenCheck::pass() const { return std::abs(computed - expected) <= tol; }

LoadedSpec eh1(int degree) {
    AmbientSpace am = AmbientSpace::hardy(1, degree);
    std::vector<TruncatedSeries> basis;
    basis.push_back(TruncatedSeries::from_scalar_coeffs({kOne, kOne}, degree));        // 1 + z
    basis.push_back(TruncatedSeries::from_scalar_coeffs({kZero, kOne, kOne}, degree)); // z + z^2
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(degree + 1, degree + 1);
    u(1, 1) = std::sqrt(2.0);
    u(2, 2) = std::sqrt(2.0);
    ContractiveSpace m = ContractiveSpace::with_injection(am, std::move(basis), u);
    return LoadedSpec{std::move(m), std::nullopt, shift_inner()};
}

LoadedSpec eh2(int degree, int count) {
    AmbientSpace am = AmbientSpace::hardy(1, degree);
    InnerFunction theta({Complex(0.5, 0.0)});
    TruncatedSeries theta_taylor = blaschke_taylor(theta, degree);
    std::vector<TruncatedSeries> basis;
    for (int j = 0; j < count; ++j)
        basis.push_back(multiply(TruncatedSeries::monomial(j, degree), theta_taylor));
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(count, count);
    for (int j = 0; j < count; ++j) gram(j, j) = j + 1.0; // Dirichlet metric on theta z^j
    ContractiveSpace m = ContractiveSpace::with_gram(am, std::move(basis), std::move(gram));
    return LoadedSpec{std::move(m), std::nullopt, shift_inner()};
}

LoadedSpec dirichlet_alpha(int degree, double alpha) {
    AmbientSpace am = AmbientSpace::dirichlet(1, degree, alpha);
    std::vector<TruncatedSeries> basis;
    for (int j = 0; j <= degree; ++j) basis.push_back(TruncatedSeries::monomial(j, degree));
    ContractiveSpace m = ContractiveSpace::with_ambient_metric(am, std::move(basis));
    return LoadedSpec{std::move(m), std::nullopt, shift_inner()};
}

LoadedSpec defect_basic(int degree) {
    AmbientSpace am = AmbientSpace::hardy(1, degree);
    std::vector<TruncatedSeries> basis;
    basis.push_back(TruncatedSeries::monomial(1, degree)); // z
    ContractiveSpace m = ContractiveSpace::with_ambient_metric(am, std::move(basis));
    DefectSpace f(am, {TruncatedSeries::monomial(0, degree)}); // span{1}
    return LoadedSpec{std::move(m), std::move(f), shift_inner()};
}

std::vector<GoldenCheck> eh1_goldens() {
    std::vector<GoldenCheck> out;
    LoadedSpec spec = eh1();
    const ContractiveSpace& m = spec.space;
    const int degree = m.ambient().degree();

    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(2), e1 = Eigen::VectorXcd::Zero(2);
    e0(0) = 1.0;
    e1(1) = 1.0;
    out.push_back({"|1+z|_M^2", 3.0, m.inner_m(e0, e0).real(), 1e-12});
    out.push_back({"|z+z^2|_M^2", 4.0, m.inner_m(e1, e1).real(), 1e-12});

    auto [s, s_star] = shift_matrices(m.ambient());
    TruncatedSeries backshifted = s_star.apply(m.element(e1));
    MembershipResult bm = m.membership(backshifted);
    out.push_back({"|S*(z+z^2)|_M", std::sqrt(3.0), m.norm_m(bm.coords), 1e-12});

    SpaceFactorization fact = branges_factorize(m, spec.inner);
    const TruncatedSeries& g = fact.g_basis.at(0);
    const double inv_s = 1.0 / (2.0 * std::sqrt(2.0));
    TruncatedSeries paper_g = TruncatedSeries::from_scalar_coeffs(
        {-2.0 * inv_s, -1.0 * inv_s, 1.0 * inv_s}, degree); // (z-2)(z+1)/(2 sqrt 2)
    out.push_back({"g vs (z-2)(z+1)/(2sqrt2) up to phase", 0.0, phase_distance(g, paper_g), 1e-10});

    Eigen::VectorXcd gc = m.membership(g).coords;
    out.push_back({"|g|_M", 1.0, m.norm_m(gc), 1e-12});
    out.push_back({"<g, z+z^2>_M", 0.0, std::abs(m.inner_m(gc, e1)), 1e-12});

    const FactorizationReport& rep = fact.reports.at(0); // h = 1 + z
    out.push_back({"|f|_2^2 for h=1+z", 8.0 / 3.0, rep.f_norm_sq(), 1e-10});
    out.push_back({"gap |h|_M^2 - |f|_2^2", 1.0 / 3.0, rep.budget.h_norm_sq - rep.f_norm_sq(),
                   1e-10});
    out.push_back({"reconstruction residual (h=1+z)", 0.0, rep.reconstruction_residual,
                   rep.reconstruction_tolerance});
    return out;
}

std::vector<GoldenCheck> eh1_coefficient_law() {
    std::vector<GoldenCheck> out;
    LoadedSpec spec = eh1();
    SpaceFactorization fact = branges_factorize(spec.space, spec.inner);
    const FactorizationReport& rep = fact.reports.at(0); // h = 1 + z
    double worst = 0.0;
    for (int k = 0; k <= 12 && k < rep.coeffs_c.cols(); ++k) {
        const double expected = std::sqrt(2.0) * std::pow(2.0, -k);
        worst = std::max(worst, std::abs(rep.coeffs_c(0, k) - expected));
    }
    out.push_back({"max |c_k - sqrt2 2^-k|, k<=12", 0.0, worst, 1e-10});
    return out;
}

std::vector<GoldenCheck> eh2_goldens() {
    std::vector<GoldenCheck> out;
    LoadedSpec spec = eh2();
    const ContractiveSpace& m = spec.space;
    const int degree = m.ambient().degree();

    SpaceFactorization fact = branges_factorize(m, spec.inner);
    TruncatedSeries theta_taylor = blaschke_taylor(InnerFunction({Complex(0.5, 0.0)}), degree);
    out.push_back({"g vs theta up to phase", 0.0,
                   phase_distance(fact.g_basis.at(0), theta_taylor), 1e-9});

    for (int k = 0; k < m.dim(); ++k) {
        const FactorizationReport& rep = fact.reports.at(static_cast<size_t>(k));
        TruncatedSeries zk = TruncatedSeries::monomial(k, degree);
        const std::string label = "h=theta z^" + std::to_string(k);
        out.push_back({label + ": max |f - z^k|", 0.0,
                       (rep.f_series.at(0) - zk).max_abs_coeff(), 1e-9});
        out.push_back({label + ": |h|_M", std::sqrt(k + 1.0),
                       std::sqrt(rep.budget.h_norm_sq), 1e-9});
        out.push_back({label + ": |f|_2", 1.0, std::sqrt(rep.f_norm_sq()), 1e-9});
        if (k >= 1)
            out.push_back({label + ": norm drop |h|_M - |f|_2", std::sqrt(k + 1.0) - 1.0,
                           std::sqrt(rep.budget.h_norm_sq) - std::sqrt(rep.f_norm_sq()), 1e-9});
    }
    return out;
}

std::vector<GoldenCheck> dirichlet_alpha_goldens() {
    std::vector<GoldenCheck> out;
    LoadedSpec spec = dirichlet_alpha();
    const ContractiveSpace& m = spec.space;
    const int degree = m.ambient().degree();

    NormHypothesisResult ratio = check_norm_hypothesis(m, spec.inner);
    out.push_back({"min |zh|^2/|h|^2 over the quotient", (degree + 1.0) / degree,
                   ratio.min_ratio, 1e-10});

    SpaceFactorization fact = branges_factorize(m, spec.inner);
    for (int j : {0, 5, degree}) {
        const FactorizationReport& rep = fact.reports.at(static_cast<size_t>(j));
        TruncatedSeries zj = TruncatedSeries::monomial(j, degree);
        const std::string label = "h=z^" + std::to_string(j);
        out.push_back({label + ": max |f - z^j|", 0.0,
                       (rep.f_series.at(0) - zj).max_abs_coeff(), 1e-10});
        out.push_back({label + ": |f|_2^2", 1.0, rep.f_norm_sq(), 1e-10});
        out.push_back({label + ": |h|_M^2", j + 1.0, rep.budget.h_norm_sq, 1e-12});
    }

    // h = 1 + z decomposes coefficient-exactly: sum |c_k|^2 = 2 while
    // |h|_M^2 = 1 + 2^alpha = 3 at alpha = 1.
    TruncatedSeries h = TruncatedSeries::from_scalar_coeffs({kOne, kOne}, degree);
    IterationTrace trace = contraction_iteration(m, nullptr, spec.inner, h);
    double csum = 0.0;
    for (const auto& step : trace.steps) csum += step.c_row.squaredNorm();
    out.push_back({"h=1+z: sum |c_k|^2", 2.0, csum, 1e-12});
    MembershipResult memb = m.membership(h);
    out.push_back({"h=1+z: |h|_M^2", 3.0, m.norm_m(memb.coords) * m.norm_m(memb.coords),
                   1e-12});
    return out;
}

std::vector<GoldenCheck> defect_basic_goldens() {
    std::vector<GoldenCheck> out;
    LoadedSpec spec = defect_basic();
    const ContractiveSpace& m = spec.space;
    const DefectSpace& f = *spec.defect;
    const int degree = m.ambient().degree();

    NormHypothesisResult ratio = check_norm_hypothesis(m, spec.inner, &f);
    out.push_back({"min |zh|_M^2/|h|_sum^2", 1.0, ratio.min_ratio, 1e-10});

    SpaceFactorization fact = defect_factorize(m, f, spec.inner);
    out.push_back({"t-only branch taken", 1.0, fact.contained_in_phi_h ? 1.0 : 0.0, 0.0});
    const FactorizationReport& rep = fact.reports.at(0); // h = z
    out.push_back({"h=z: max |t - 1|", 0.0,
                   (rep.t_series.at(0) - TruncatedSeries::constant(kOne, degree)).max_abs_coeff(),
                   1e-12});
    out.push_back({"h=z: |h|_M", 1.0, std::sqrt(rep.budget.h_norm_sq), 1e-12});
    out.push_back({"h=z: |t|_2", 1.0, std::sqrt(rep.t_norm_sq()), 1e-12});
    out.push_back({"h=z: budget equality |t|^2 - |h|_M^2", 0.0,
                   rep.budget.extracted_sq - rep.budget.h_norm_sq, 1e-12});
    out.push_back({"h=z: reconstruction residual", 0.0, rep.reconstruction_residual,
                   rep.reconstruction_tolerance});
    return out;
}

bool known_fixture(const std::string& name) {
    return name == "eh1" || name == "eh2" || name == "dirichlet-alpha" ||
           name == "defect-basic";
}

std::vector<GoldenCheck> run_fixture(const std::string& name) {
    if (name == "eh1") {
        auto out = eh1_goldens();
        auto law = eh1_coefficient_law();
        out.insert(out.end(), law.begin(), law.end());
        return out;
    }
    if (name == "eh2") return eh2_goldens();
    if (name == "dirichlet-alpha") return dirichlet_alpha_goldens();
    if (name == "defect-basic") return defect_basic_goldens();
    throw ValidationError("reproduce: unknown fixture '" + name +
                          "' (expected eh1, eh2, dirichlet-alpha, defect-basic)");
}

} // namespace nearinv::fixtures

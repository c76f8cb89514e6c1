#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "nearinv/operators.hpp"

namespace nearinv {

struct FactorizationOptions {
    int m_max = -1;          // < 0: choose automatically
    double eps = 1e-12;      // relative tail size that stops the iteration
    double tol = 1e-8;       // membership / division residual threshold
    double tol_rank = 1e-9;  // relative singular-value threshold for rank decisions
};

/// Result of checking "phi f in M implies f in M (+ F)": either a pass with
/// the worst membership residual seen, or the witness h in M whose quotient
/// by phi escapes.
struct NearInvarianceCertificate {
    bool pass = true;
    int intersection_dim = 0;
    double max_residual = 0.0;
    std::optional<TruncatedSeries> witness;
};

NearInvarianceCertificate check_nearly_invariant(const ContractiveSpace& m,
                                                 const InnerFunction& phi, double tol = 1e-8,
                                                 const DefectSpace* defect = nullptr);

/// Minimum of ||phi h||_M^2 / ||h||^2 over {h : phi h in M}, where the
/// denominator uses the M norm (no defect) or the direct-sum norm. An
/// empty quotient space passes vacuously with an infinite ratio.
struct NormHypothesisResult {
    double min_ratio = 0.0;
    bool vacuous = false;
    bool pass = false;
};

NormHypothesisResult check_norm_hypothesis(const ContractiveSpace& m, const InnerFunction& phi,
                                           const DefectSpace* defect = nullptr,
                                           double tol_rank = 1e-9);

/// True when every member of M vanishes at the zeros of phi with
/// multiplicity, i.e. M sits inside phi * H.
bool contained_in_phiH(const ContractiveSpace& m, const InnerFunction& phi,
                       double tol_rank = 1e-9);

/// One step of the contraction iteration: R^k h in combined coordinates,
/// its expansion coefficients over the orthonormal complement basis
/// (c row) and the defect basis (d row), and the norms seen.
struct IterationStep {
    Eigen::VectorXcd r_coords;
    Eigen::VectorXcd c_row;
    Eigen::VectorXcd d_row;
    double r_norm = 0.0;
};

struct IterationTrace {
    std::vector<IterationStep> steps; // k = 0..m
    Eigen::VectorXcd tail_coords;     // R^{m+1} h
    double tail_norm = 0.0;
    bool tail_converged = false;
    double max_contraction_ratio = 0.0; // max ||R^{k+1}h|| / ||R^k h||
    double bessel_excess = 0.0;         // max over m of (running budget - ||h||^2)
};

struct NormBudget {
    double extracted_sq = 0.0; // sum |c|^2 + sum |d|^2
    double h_norm_sq = 0.0;    // ||h||_M^2
};

/// Everything recomputable about the decomposition of one element:
/// h = sum_i g_i f_i + phi sum_j e_j t_j up to the reported tail.
struct FactorizationReport {
    Eigen::MatrixXcd coeffs_c; // r x (m+1), c_{ki} = <Q R^k h, g_i>_M
    Eigen::MatrixXcd coeffs_d; // p x m,     d_{kj} = <L R^k h, e_j>_H, k = 1..m
    std::vector<TruncatedSeries> f_series; // f_i = sum_k c_{ki} phi^k
    std::vector<TruncatedSeries> t_series; // t_j = sum_k d_{kj} phi^{k-1}
    TruncatedSeries reconstruction{1, 0};
    double tail_norm = 0.0;
    bool tail_converged = false;
    NormBudget budget;
    double reconstruction_residual = 0.0;  // max coefficient deviation on the window
    double reconstruction_tolerance = 0.0; // tail-aware bound the residual must meet
    double invariance_residual = 0.0;      // membership residual of the shifted reassembly
    double coeff_identity_residual = 0.0;  // max |<f_i, phi^k> - c_{ki}| over audited k
    double max_contraction_ratio = 0.0;
    double bessel_excess = 0.0;

    double f_norm_sq() const;
    double t_norm_sq() const;
    bool budget_ok() const;
    bool pass(double tol) const;
};

/// Precomputes the projections P, Q, L, the orthonormal complement basis
/// {g_i}, and the contraction R as a fixed matrix on combined coordinates.
/// R is realized as least-squares division by phi followed by a membership
/// solve, which is the left inverse of multiplication on its range: it
/// satisfies T(Rh) = Ph, the only property the decomposition identity uses.
/// Iterating the matrix does not consume trusted coefficient rows; the
/// series-level window bookkeeping applies once, while building R.
class FactorizationEngine {
public:
    FactorizationEngine(const ContractiveSpace& m, const DefectSpace* defect,
                        const InnerFunction& phi, FactorizationOptions opts = {},
                        bool g_from_point_evaluation = false);

    int r() const { return static_cast<int>(g_coords_.cols()); }
    int p() const { return p_; }
    int dim() const { return dim_; }
    int intersection_dim() const { return static_cast<int>(v_.cols()); }
    bool contained_in_phi_h() const { return intersection_dim() == m_->dim(); }

    const ContractiveSpace& space() const { return *m_; }
    const InnerFunction& inner() const { return phi_; }
    const FactorizationOptions& options() const { return opts_; }
    const std::vector<TruncatedSeries>& g_series() const { return g_series_; }
    const Eigen::MatrixXcd& g_coords() const { return g_coords_; }
    const std::vector<TruncatedSeries>& e_series() const;
    const Eigen::MatrixXcd& proj_p() const { return proj_.p; }
    const Eigen::MatrixXcd& proj_q() const { return proj_.q; }
    const Eigen::MatrixXcd& proj_l() const { return proj_.l; }
    const Eigen::MatrixXcd& r_matrix() const { return r_mat_; }
    double g_orthonormality_error() const { return g_orth_error_; }
    double r_construction_residual() const { return r_build_residual_; }

    /// phi^k at truncation; identically zero once k exceeds the window.
    const TruncatedSeries& phi_power(int k) const;

    Complex inner_plus(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) const;
    double norm_plus(const Eigen::VectorXcd& x) const;
    TruncatedSeries element(const Eigen::VectorXcd& combined) const;
    Eigen::VectorXcd embed(const Eigen::VectorXcd& m_coords) const;

    IterationTrace iterate(const Eigen::VectorXcd& m_coords) const;
    FactorizationReport factorize(const Eigen::VectorXcd& m_coords) const;

private:
    void build_g_basis(bool from_point_evaluation);
    void build_r_matrix();

    const ContractiveSpace* m_;
    const DefectSpace* f_; // null when absent or empty
    InnerFunction phi_;
    FactorizationOptions opts_;
    int p_ = 0, dim_ = 0;
    Eigen::MatrixXcd gram_plus_;
    Eigen::MatrixXcd combined_basis_;
    Eigen::MatrixXcd v_; // intersection basis, combined coordinates
    ProjectionSet proj_;
    Eigen::MatrixXcd g_coords_;
    std::vector<TruncatedSeries> g_series_;
    std::vector<TruncatedSeries> e_series_;
    Eigen::MatrixXcd r_mat_;
    std::vector<TruncatedSeries> phi_powers_; // 0..k_zero, padded with one zero series
    TruncatedSeries phi_zero_series_;
    double g_orth_error_ = 0.0;
    double r_build_residual_ = 0.0;
    std::unique_ptr<SumSpace> sum_; // owns the combined membership machinery
};

/// Runs the iteration for a member of M, emitting (Q R^k h, L R^k h, R^k h)
/// until the tail drops below eps * ||h|| or m_max steps have run.
IterationTrace contraction_iteration(const ContractiveSpace& m, const DefectSpace* defect,
                                     const InnerFunction& phi, const TruncatedSeries& h,
                                     FactorizationOptions opts = {});

/// Max-coefficient residuals of the finite decomposition identity
///   h - sum_{k<=m} phi^k (Q R^k h) - phi^{m+1} R^{m+1} h
///     - phi sum_{1<=k<=m} phi^{k-1} (L R^k h)
/// for every m up to the recorded stop.
std::vector<double> identity_residuals(const FactorizationEngine& engine,
                                       const TruncatedSeries& h, const IterationTrace& trace);

/// The full output for one space: shared bases, the hypothesis
/// certificates, and one report per input basis element. The f (and t)
/// series of report i are the generators of the shift-coinvariant partner
/// space; their coefficient-shift audits live in the reports.
struct SpaceFactorization {
    std::vector<TruncatedSeries> g_basis;
    std::vector<TruncatedSeries> defect_basis;
    bool contained_in_phi_h = false;
    std::vector<FactorizationReport> reports;
    NearInvarianceCertificate near_invariance;
    NormHypothesisResult norm_hypothesis;
    double g_orthonormality_error = 0.0;
    FactorizationOptions options;

    bool pass() const;
};

/// Backward-shift case phi = z on a Hardy ambient. The complement basis is
/// taken from the point-evaluation adjoints at the origin (at most n of
/// them) and verified against the orthogonal complement of M ∩ zH.
SpaceFactorization hardy_vector_factorize(const ContractiveSpace& m,
                                          FactorizationOptions opts = {});

/// General inner phi with phi(0) = 0 on any ambient.
SpaceFactorization branges_factorize(const ContractiveSpace& m, const InnerFunction& phi,
                                     FactorizationOptions opts = {});

/// Finite-defect variant; detects the M inside phi*H case and runs the
/// Q = 0 branch. An empty defect space degenerates to branges_factorize.
SpaceFactorization defect_factorize(const ContractiveSpace& m, const DefectSpace& f,
                                    const InnerFunction& phi, FactorizationOptions opts = {});

} // namespace nearinv

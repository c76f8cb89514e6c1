#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nearinv/series.hpp"

namespace nearinv {

enum class AmbientKind { hardy, dirichlet_alpha, custom };

/// A weighted-coefficient Hilbert space hosting all truncated series:
/// <f, g>_H = sum_m w_m <A_m, B_m>_{C^n}. Weights must be positive and
/// nondecreasing, which encodes ||h||_H <= ||z h||_H at truncation.
class AmbientSpace {
public:
    static AmbientSpace hardy(int components, int degree);
    /// Dirichlet-type weights w_m = (m+1)^alpha with 0 <= alpha <= 1.
    static AmbientSpace dirichlet(int components, int degree, double alpha);
    static AmbientSpace custom(int components, int degree, Eigen::VectorXd weights);

    int components() const { return n_; }
    int degree() const { return d_; }
    AmbientKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    /// Weights expanded to the degree-major flattened coordinate layout.
    Eigen::VectorXd flattened_weights() const;
    Eigen::VectorXd flattened_sqrt_weights() const;

    /// <f, g>_H over the common trusted window, linear in f.
    Complex inner(const TruncatedSeries& f, const TruncatedSeries& g) const;
    double norm(const TruncatedSeries& f) const;

    TruncatedSeries zero_series() const { return TruncatedSeries(n_, d_); }
    std::string tag() const;

    bool operator==(const AmbientSpace& o) const;

private:
    AmbientSpace(AmbientKind kind, int n, int d, Eigen::VectorXd w, double alpha);
    AmbientKind kind_;
    int n_, d_;
    Eigen::VectorXd weights_;
    double alpha_;
};

/// Least-squares expansion of a series over a basis, restricted to the
/// series' trusted window and weighted by the ambient metric.
struct MembershipResult {
    Eigen::VectorXcd coords;
    double residual_abs = 0.0; // ambient norm of the unexplained part
    double residual_rel = 0.0; // relative to the window norm of the target
};

/// A finite-dimensional Hilbert space M sitting inside the ambient as a
/// vector subspace, with its own inner product given by a Gram matrix over
/// a fixed basis. Construction validates Hermitian positive definiteness,
/// basis independence, and contractive containment of the inclusion map
/// (G - B^H W B positive semidefinite up to a small floor).
class ContractiveSpace {
public:
    static ContractiveSpace with_gram(AmbientSpace ambient, std::vector<TruncatedSeries> basis,
                                      Eigen::MatrixXcd gram);
    /// Metric pulled back through an injective map on flattened ambient
    /// coordinates: <f, g>_M = <U f, U g>_H.
    static ContractiveSpace with_injection(AmbientSpace ambient, std::vector<TruncatedSeries> basis,
                                           const Eigen::MatrixXcd& injection);
    /// M carries the ambient metric restricted to the span.
    static ContractiveSpace with_ambient_metric(AmbientSpace ambient,
                                                std::vector<TruncatedSeries> basis);

    const AmbientSpace& ambient() const { return ambient_; }
    int dim() const { return static_cast<int>(basis_.size()); }
    const std::vector<TruncatedSeries>& basis() const { return basis_; }
    const Eigen::MatrixXcd& gram() const { return gram_; }
    /// Flattened basis-to-ambient matrix, n(D+1) x d.
    const Eigen::MatrixXcd& basis_matrix() const { return bmat_; }

    TruncatedSeries element(const Eigen::VectorXcd& coords) const;
    /// <x, y>_M in basis coordinates, linear in x.
    Complex inner_m(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) const;
    double norm_m(const Eigen::VectorXcd& x) const;

    MembershipResult membership(const TruncatedSeries& h) const;

    /// Coordinates of the reproducing kernel at w, one column per
    /// component: <h, k_w^{(i)}>_M = h_i(w). Requires |w| < 1.
    Eigen::MatrixXcd kernel_vectors(Complex w) const;

    /// Coordinates of the point-evaluation adjoint vectors at the origin,
    /// filtered to an M-orthonormal basis of their span (at most n
    /// columns, phase-normalized). Empty when M sits inside z H.
    Eigen::MatrixXcd eval_adjoint_coords(double rank_tol = 1e-9) const;
    std::vector<TruncatedSeries> eval_adjoint_basis(double rank_tol = 1e-9) const;

    double gram_condition() const { return gram_max_eig_ / gram_min_eig_; }

private:
    ContractiveSpace(AmbientSpace ambient, std::vector<TruncatedSeries> basis,
                     Eigen::MatrixXcd gram);
    void validate();

    AmbientSpace ambient_;
    std::vector<TruncatedSeries> basis_;
    Eigen::MatrixXcd gram_;
    Eigen::MatrixXcd bmat_;          // flattened basis
    Eigen::MatrixXcd weighted_bmat_; // sqrt(W) * bmat
    Eigen::LLT<Eigen::MatrixXcd> gram_llt_;
    double gram_min_eig_ = 0.0, gram_max_eig_ = 0.0;
};

/// <U b_i, U b_j> in the metric of `metric_space`, assembled as a Gram
/// matrix over the basis. A singular result signals a non-injective map.
Eigen::MatrixXcd gram_of_injection(const AmbientSpace& metric_space,
                                   const Eigen::MatrixXcd& injection,
                                   const std::vector<TruncatedSeries>& basis);

/// A finite-dimensional subspace F of the ambient, orthonormalized in the
/// ambient inner product at construction. Norms on F are ambient norms.
class DefectSpace {
public:
    DefectSpace(const AmbientSpace& ambient, const std::vector<TruncatedSeries>& raw_basis);

    const AmbientSpace& ambient() const { return ambient_; }
    int dim() const { return static_cast<int>(basis_.size()); }
    const std::vector<TruncatedSeries>& basis() const { return basis_; }
    const Eigen::MatrixXcd& basis_matrix() const { return bmat_; }

private:
    AmbientSpace ambient_;
    std::vector<TruncatedSeries> basis_;
    Eigen::MatrixXcd bmat_;
};

/// The direct sum M (+) F with ||h + f||^2 = ||h||_M^2 + ||f||_H^2.
/// M and F are orthogonal by construction; the decomposition of a member
/// into its M and F parts is unique because M and F intersect trivially
/// (checked via principal angles at construction).
class SumSpace {
public:
    SumSpace(ContractiveSpace m, DefectSpace f);

    const ContractiveSpace& m() const { return m_; }
    const DefectSpace& f() const { return f_; }
    int dim() const { return m_.dim() + f_.dim(); }

    const Eigen::MatrixXcd& combined_basis_matrix() const { return bmat_; }
    const Eigen::MatrixXcd& gram_plus() const { return gram_; }

    Complex inner_plus(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) const;
    double norm_plus(const Eigen::VectorXcd& x) const;
    TruncatedSeries element(const Eigen::VectorXcd& coords) const;
    MembershipResult membership(const TruncatedSeries& h) const;

private:
    ContractiveSpace m_;
    DefectSpace f_;
    Eigen::MatrixXcd bmat_;
    Eigen::MatrixXcd weighted_bmat_;
    Eigen::MatrixXcd gram_;
};

namespace detail {
/// Weighted least-squares expansion over explicit columns; shared by the
/// membership tests of ContractiveSpace and SumSpace.
MembershipResult solve_membership(const Eigen::MatrixXcd& weighted_columns,
                                  const Eigen::VectorXcd& weighted_target, int rows);
/// Modified Gram-Schmidt in a Hermitian metric; drops columns whose
/// remaining norm falls below rel_tol times the largest input norm.
Eigen::MatrixXcd gram_schmidt_in_metric(const Eigen::MatrixXcd& candidates,
                                        const Eigen::MatrixXcd& metric, double rel_tol);
/// Rotates coords so the first nonzero flattened coefficient of the
/// represented series is real positive.
Eigen::VectorXcd phase_normalize(const Eigen::VectorXcd& coords,
                                 const Eigen::MatrixXcd& basis_matrix);
} // namespace detail

} // namespace nearinv

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nearinv/spaces.hpp"

namespace nearinv {

/// A finite-matrix realization of an operator on flattened ambient
/// coordinates. `degree_loss` records how many trusted coefficient rows
/// one application consumes; composing operators adds the losses.
struct OpMatrix {
    Eigen::MatrixXcd mat;
    std::string domain_tag;
    std::string codomain_tag;
    int degree_loss = 0;

    TruncatedSeries apply(const TruncatedSeries& f) const;
};

OpMatrix compose(const OpMatrix& outer, const OpMatrix& inner);

/// Forward shift h -> z h and backward shift h -> (h - h(0))/z, per
/// component. S*S is the identity on the trusted window; S S* kills the
/// constant term.
std::pair<OpMatrix, OpMatrix> shift_matrices(const AmbientSpace& h);

/// Multiplication h -> phi h via the Cauchy product with the Blaschke
/// Taylor expansion. Coefficients of the product at degree m only involve
/// input coefficients up to m, so no trusted rows are consumed.
OpMatrix mult_by_inner(const AmbientSpace& h, const InnerFunction& phi);

/// Adjoint of mult_by_inner in the ambient metric. For Hardy weights this
/// is the usual Toeplitz adjoint and T_phi*(phi h) = h on the trusted
/// window; for other weights it is the metric adjoint W^{-1} M^H W.
OpMatrix toeplitz_adjoint(const AmbientSpace& h, const InnerFunction& phi);

/// Smallest singular value of the weighted multiplication matrix
/// restricted to inputs of degree <= domain_degree. With nondecreasing
/// weights and enough codomain headroom this stays within truncation
/// tails of 1.
double windowed_lower_bound(const AmbientSpace& h, const InnerFunction& phi, int domain_degree);

/// Outcome of a least-squares division h / phi over the trusted window.
/// The quotient is exact whenever h vanishes at each zero of phi to its
/// multiplicity; otherwise `ok` is false and the residuals carry the
/// unexplained mass (used as the membership / near-invariance signal).
struct DivisionResult {
    bool ok = false;
    TruncatedSeries quotient{1, 0};
    double residual_abs = 0.0; // ambient norm over the window
    double residual_rel = 0.0;
};

DivisionResult divide_by_inner(const AmbientSpace& h_space, const TruncatedSeries& h,
                               const InnerFunction& phi, double tol = 1e-8);

/// Basis, in M coordinates, of {h in M : h vanishes at each zero of phi
/// with multiplicity}. Computed from the null space of the evaluation and
/// derivative constraint matrix at the zeros; rank decisions use singular
/// values relative to the largest.
std::vector<Eigen::VectorXcd> intersect_with_phiH(const ContractiveSpace& m,
                                                  const InnerFunction& phi, double tol = 1e-9);

/// Orthogonal projections attached to a target subspace: P onto the
/// target, L onto the defect block (zero when absent), Q = I - P - L onto
/// the orthogonal complement of the target inside M.
struct ProjectionSet {
    Eigen::MatrixXcd p;
    Eigen::MatrixXcd q;
    Eigen::MatrixXcd l;
};

/// Projections on M coordinates; the target basis must be independent.
ProjectionSet project_in_m(const ContractiveSpace& m,
                           const std::vector<Eigen::VectorXcd>& target);

/// Projections on combined (M then F) coordinates of the sum space; the
/// target lives in the M block.
ProjectionSet project_in_sum(const SumSpace& s, const std::vector<Eigen::VectorXcd>& target_m);

} // namespace nearinv

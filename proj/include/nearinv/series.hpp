#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "nearinv/errors.hpp"

namespace nearinv {

using Complex = std::complex<double>;

/// A C^n-valued analytic function on the unit disc, held as the finite
/// Taylor block A_0..A_D (column m of `coeffs` is A_m). `valid_degree`
/// marks the coefficient window still trusted after degree-losing
/// operations; norm and residual checks must not read beyond it.
class TruncatedSeries {
public:
    TruncatedSeries(int components, int degree);

    /// Scalar monomial z^power at working degree `degree`.
    static TruncatedSeries monomial(int power, int degree);
    static TruncatedSeries constant(Complex value, int degree);
    /// Wraps an n x (D+1) coefficient block, fully trusted.
    static TruncatedSeries from_coeffs(Eigen::MatrixXcd coeffs);
    /// Scalar series from a coefficient list (low degree first).
    static TruncatedSeries from_scalar_coeffs(const std::vector<Complex>& coeffs, int degree);

    int components() const { return static_cast<int>(coeffs_.rows()); }
    int degree() const { return static_cast<int>(coeffs_.cols()) - 1; }
    int valid_degree() const { return valid_; }
    void set_valid_degree(int v);

    const Eigen::MatrixXcd& coeffs() const { return coeffs_; }
    Complex coeff(int component, int m) const { return coeffs_(component, m); }
    Complex& coeff(int component, int m) { return coeffs_(component, m); }
    Complex scalar_coeff(int m) const;

    /// Coefficients stacked degree-major: entry m*n + c is component c of A_m.
    Eigen::VectorXcd flattened() const;
    static TruncatedSeries from_flattened(const Eigen::VectorXcd& flat, int components,
                                          int degree, int valid);

    /// Horner evaluation over the trusted window. Requires |w| < 1.
    Eigen::VectorXcd evaluate(Complex w) const;
    Complex evaluate_scalar(Complex w) const;

    /// Largest |coefficient| over degrees <= up_to (default: trusted window).
    double max_abs_coeff(int up_to = -1) const;

    bool is_zero(double tol = 0.0) const;

    TruncatedSeries& operator+=(const TruncatedSeries& rhs);
    TruncatedSeries& operator-=(const TruncatedSeries& rhs);
    TruncatedSeries& operator*=(Complex s);

private:
    Eigen::MatrixXcd coeffs_; // n x (D+1)
    int valid_;
};

TruncatedSeries operator+(TruncatedSeries lhs, const TruncatedSeries& rhs);
TruncatedSeries operator-(TruncatedSeries lhs, const TruncatedSeries& rhs);
TruncatedSeries operator*(Complex s, TruncatedSeries f);

/// Cauchy product of a scalar series with a possibly vector-valued one,
/// truncated at the common working degree. The trusted window is the
/// minimum of the operands' windows.
TruncatedSeries multiply(const TruncatedSeries& scalar_factor, const TruncatedSeries& g);

/// A finite Blaschke product. A zero at the origin contributes a factor z;
/// a zero a != 0 contributes (a - z)/(1 - conj(a) z). A unimodular phase
/// multiplies the whole product. Evaluation is exact (rational arithmetic
/// in double precision), independent of any Taylor truncation.
class InnerFunction {
public:
    explicit InnerFunction(std::vector<Complex> zeros, Complex phase = Complex(1.0, 0.0));

    const std::vector<Complex>& zeros() const { return zeros_; }
    Complex phase() const { return phase_; }
    int degree() const { return static_cast<int>(zeros_.size()); }
    int origin_multiplicity() const;
    bool vanishes_at_zero() const { return origin_multiplicity() > 0; }

    Complex evaluate(Complex w) const;

private:
    std::vector<Complex> zeros_;
    Complex phase_;
};

/// Taylor coefficients of the Blaschke product at the origin, trusted to
/// the full working degree. Agreement with exact evaluation is bounded by
/// the geometric tail |w|^{D+1}/(1-|w|).
TruncatedSeries blaschke_taylor(const InnerFunction& phi, int degree);

/// Realizes q |-> sum_k q_k phi^k at truncation. Requires phi(0) = 0; the
/// composition then preserves the l^2 coefficient norm up to the
/// truncation tail.
TruncatedSeries compose_with_inner(const TruncatedSeries& q, const InnerFunction& phi);

} // namespace nearinv

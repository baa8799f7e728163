#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nullgeo/errors.hpp"

namespace nullgeo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Default relative tolerance for rank/kernel decisions, matched to the noise
// floor of the central-difference derivatives feeding these matrices.
inline constexpr double kSpectralTol = 1e-9;

// Symmetric bilinear form on an m-dimensional space. Symmetrised on
// construction; degenerate forms are expected input, not an error.
class SymBilinearForm {
public:
    SymBilinearForm() = default;
    explicit SymBilinearForm(const Matrix& entries);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& entries() const { return m_; }
    double operator()(const Vector& u, const Vector& v) const { return u.dot(m_ * v); }

private:
    Matrix m_;
};

struct RankSignature {
    int rank = 0;
    int positives = 0;
    int negatives = 0;
    bool operator==(const RankSignature&) const = default;
};

// Eigenvalue counts with |lambda| <= tol * max|lambda| treated as zero.
RankSignature rank_signature(const SymBilinearForm& form, double tol = kSpectralTol);

// Euclidean-orthonormal basis of the kernel under the tolerance; size = dim - rank.
std::vector<Vector> null_space(const SymBilinearForm& form, double tol = kSpectralTol);

// Minimal-norm least-squares solve; `residual` is ||A x - b||.
struct LeastSquares {
    Vector x;
    double residual = 0.0;
};
LeastSquares pseudo_solve(const Matrix& A, const Vector& b);

// Like pseudo_solve but throws ToleranceError when the system is inconsistent
// (residual above tol * max(1, ||b||)); singular consistent systems return the
// minimal-norm solution.
Vector solve(const Matrix& A, const Vector& b, double tol = 1e-8);

// Completes `v` (nonzero) to an orthonormal basis; first column is v/||v||.
Matrix orthonormal_completion(const Vector& v);

}  // namespace nullgeo

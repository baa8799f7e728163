#include "nullgeo/linalg.hpp"

#include "nullgeo/util.hpp"

namespace nullgeo {

SymBilinearForm::SymBilinearForm(const Matrix& entries) {
    if (entries.rows() != entries.cols())
        throw PreconditionError("bilinear form must be square");
    m_ = 0.5 * (entries + entries.transpose());
}

RankSignature rank_signature(const SymBilinearForm& form, double tol) {
    if (tol <= 0.0) throw PreconditionError("rank_signature: tol must be positive");
    Eigen::SelfAdjointEigenSolver<Matrix> es(form.entries());
    const Vector& ev = es.eigenvalues();
    double scale = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
    double cutoff = tol * scale;
    RankSignature rs;
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i]) <= cutoff) continue;
        if (ev[i] > 0)
            ++rs.positives;
        else
            ++rs.negatives;
    }
    rs.rank = rs.positives + rs.negatives;
    return rs;
}

std::vector<Vector> null_space(const SymBilinearForm& form, double tol) {
    if (tol <= 0.0) throw PreconditionError("null_space: tol must be positive");
    Eigen::SelfAdjointEigenSolver<Matrix> es(form.entries());
    const Vector& ev = es.eigenvalues();
    double scale = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
    double cutoff = tol * scale;
    std::vector<Vector> basis;
    for (int i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) <= cutoff) basis.push_back(es.eigenvectors().col(i));
    return basis;  // eigenvectors of a symmetric matrix: already orthonormal
}

LeastSquares pseudo_solve(const Matrix& A, const Vector& b) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
    LeastSquares out;
    out.x = cod.solve(b);
    out.residual = (A * out.x - b).norm();
    return out;
}

Vector solve(const Matrix& A, const Vector& b, double tol) {
    LeastSquares ls = pseudo_solve(A, b);
    if (ls.residual > tol * std::max(1.0, b.norm()))
        throw ToleranceError("solve: inconsistent system, residual " +
                             format_double(ls.residual));
    return ls.x;
}

Matrix orthonormal_completion(const Vector& v) {
    const int n = static_cast<int>(v.size());
    if (v.norm() == 0.0) throw PreconditionError("orthonormal_completion: zero vector");
    Eigen::HouseholderQR<Matrix> qr(v);
    Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    // Householder may flip the first column's sign relative to v.
    if (Q.col(0).dot(v) < 0) Q.col(0) *= -1.0;
    return Q;
}

}  // namespace nullgeo

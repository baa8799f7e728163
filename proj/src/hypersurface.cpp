#include "nullgeo/hypersurface.hpp"

#include <cmath>

#include "nullgeo/util.hpp"

namespace nullgeo {

HypersurfaceChart::HypersurfaceChart(AmbientManifold ambient, std::vector<std::string> params,
                                     std::vector<ExprField> immersion, ScreenPolicy policy)
    : ambient_(std::move(ambient)),
      params_(std::move(params)),
      immersion_(std::move(immersion)),
      policy_(policy) {
    if (static_cast<int>(params_.size()) + 1 != ambient_.dim())
        throw PreconditionError("hypersurface must have one parameter fewer than the ambient "
                                "dimension");
    if (static_cast<int>(immersion_.size()) != ambient_.dim())
        throw PreconditionError("immersion needs one expression per ambient coordinate");
}

void HypersurfaceChart::add_domain_guard(ExprField positive_expr) {
    guards_.push_back(std::move(positive_expr));
}

void HypersurfaceChart::check_domain(const Vector& u) const {
    std::span<const double> pt(u.data(), static_cast<std::size_t>(u.size()));
    for (const auto& g : guards_)
        if (!(g.eval(pt) > 0.0))
            throw PreconditionError("point violates domain guard '" + g.source() + " > 0'");
}

Vector HypersurfaceChart::map_point(const Vector& u) const {
    check_domain(u);
    Vector x(ambient_.dim());
    std::span<const double> pt(u.data(), static_cast<std::size_t>(u.size()));
    for (int k = 0; k < ambient_.dim(); ++k) x[k] = immersion_[static_cast<std::size_t>(k)].eval(pt);
    return x;
}

Matrix HypersurfaceChart::jacobian(const Vector& u) const {
    check_domain(u);
    const int m = ambient_.dim();
    const int np1 = n_plus_1();
    Matrix J(m, np1);
    std::span<const double> pt(u.data(), static_cast<std::size_t>(u.size()));
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < np1; ++i)
            J(k, i) = immersion_[static_cast<std::size_t>(k)].partial(pt, i);
    Eigen::JacobiSVD<Matrix> svd(J);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(np1 - 1);
    if (!(smin > 1e-10 * std::max(1.0, smax)))
        throw PreconditionError("immersion is degenerate here: Jacobian rank < " +
                                std::to_string(np1));
    return J;
}

Tensor3 HypersurfaceChart::immersion_hessian(const Vector& u) const {
    const int m = ambient_.dim();
    const int np1 = n_plus_1();
    Tensor3 H(std::max(m, np1));
    std::span<const double> pt(u.data(), static_cast<std::size_t>(u.size()));
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < np1; ++i)
            for (int j = i; j < np1; ++j) {
                double v = immersion_[static_cast<std::size_t>(k)].second_partial(pt, i, j);
                H(k, i, j) = v;
                H(k, j, i) = v;
            }
    return H;
}

SymBilinearForm HypersurfaceChart::induced_metric(const Vector& u) const {
    Matrix J = jacobian(u);
    Matrix G = ambient_.metric_at(map_point(u));
    return SymBilinearForm(J.transpose() * G * J);
}

PointFrame PointFrame::flipped() const {
    PointFrame f = *this;
    f.xi_param = -xi_param;
    f.xi = -xi;
    f.N = -N;
    f.orientation = -orientation;
    return f;
}

Vector radical_direction_param(const HypersurfaceChart& h, const Vector& u, double tol,
                               int pivot_hint) {
    SymBilinearForm g = h.induced_metric(u);
    const int np1 = g.dim();
    RankSignature rs = rank_signature(g, tol);
    if (rs.rank != np1 - 1) throw NotLightlikeError(rs.rank, np1 - 1);
    std::vector<Vector> kernel = null_space(g, tol);
    if (kernel.size() != 1) throw NotLightlikeError(np1 - static_cast<int>(kernel.size()), np1 - 1);
    Vector k = kernel[0];
    int pivot = pivot_hint;
    if (pivot < 0 || pivot >= np1) {
        pivot = 0;
        for (int i = 1; i < np1; ++i)
            if (std::abs(k[i]) > std::abs(k[pivot])) pivot = i;
    }
    if (std::abs(k[pivot]) < 1e-12)
        throw PreconditionError("radical direction: degenerate pivot component");
    return k / k[pivot];
}

Vector radical_direction(const HypersurfaceChart& h, const Vector& u, double tol, int pivot_hint) {
    return h.jacobian(u) * radical_direction_param(h, u, tol, pivot_hint);
}

std::vector<Vector> screen_basis_param(const HypersurfaceChart& h, const Vector& u,
                                       const Vector& xi_param) {
    switch (h.screen_policy()) {
        case ScreenPolicy::EuclideanComplement: {
            // Orthonormal (Euclidean) complement of xi in parameter coordinates.
            Matrix Q = orthonormal_completion(xi_param);
            std::vector<Vector> basis;
            for (int c = 1; c < Q.cols(); ++c) basis.push_back(Q.col(c));
            return basis;
        }
        case ScreenPolicy::UserFrame: {
            if (static_cast<int>(h.user_screen().size()) != h.n_plus_1() - 1)
                throw PreconditionError("user screen must supply n vectors");
            return h.user_screen();
        }
        case ScreenPolicy::KerTheta:
            throw PreconditionError("ker-theta screens are built by the weyl module");
    }
    (void)u;
    return {};
}

PointFrame normalizing_pair(const HypersurfaceChart& h, const Vector& u,
                            const std::vector<Vector>* screen, double tol, int pivot_hint) {
    PointFrame frame;
    frame.param_point = u;
    frame.ambient_point = h.map_point(u);
    frame.tangent_basis = h.jacobian(u);
    frame.xi_param = radical_direction_param(h, u, tol, pivot_hint);
    frame.xi = frame.tangent_basis * frame.xi_param;
    frame.pivot = pivot_hint;
    if (frame.pivot < 0) {
        frame.pivot = 0;
        for (int i = 1; i < frame.xi_param.size(); ++i)
            if (std::abs(frame.xi_param[i]) > std::abs(frame.xi_param[frame.pivot]))
                frame.pivot = i;
    }

    std::vector<Vector> sb = screen ? *screen : screen_basis_param(h, u, frame.xi_param);
    const int n = h.n_plus_1() - 1;
    if (static_cast<int>(sb.size()) != n)
        throw PreconditionError("screen must have dimension " + std::to_string(n));
    frame.screen_param.resize(h.n_plus_1(), n);
    for (int a = 0; a < n; ++a) frame.screen_param.col(a) = sb[static_cast<std::size_t>(a)];
    frame.screen_ambient = frame.tangent_basis * frame.screen_param;

    // The screen must carry a nondegenerate induced form (it complements the
    // radical inside TM).
    SymBilinearForm g = h.induced_metric(u);
    Matrix g_screen = frame.screen_param.transpose() * g.entries() * frame.screen_param;
    if (n > 0) {
        RankSignature rs = rank_signature(SymBilinearForm(g_screen), tol);
        if (rs.rank != n)
            throw PreconditionError("screen distribution is degenerate here: induced rank " +
                                    std::to_string(rs.rank) + " < " + std::to_string(n));
    }

    // Transversal: find V with gbar(V, W_a) = 0 and gbar(V, xi) = 1, then
    // remove the quadratic part along xi: N = V - (gbar(V,V)/2) xi.
    const int m = h.ambient().dim();
    Matrix G = h.ambient().metric_at(frame.ambient_point);
    Matrix A(n + 1, m);
    Vector b = Vector::Zero(n + 1);
    for (int a = 0; a < n; ++a) A.row(a) = (G * frame.screen_ambient.col(a)).transpose();
    A.row(n) = (G * frame.xi).transpose();
    b[n] = 1.0;
    LeastSquares ls = pseudo_solve(A, b);
    if (ls.residual > 1e-8)
        throw PreconditionError("no transversal vector: normalisation system is inconsistent "
                                "(residual " + format_double(ls.residual) + ")");
    Vector V = ls.x;
    double vv = V.dot(G * V);
    frame.N = V - 0.5 * vv * frame.xi;

    double e1 = std::abs(frame.N.dot(G * frame.xi) - 1.0);
    double e2 = std::abs(frame.N.dot(G * frame.N));
    double e3 = 0.0;
    for (int a = 0; a < n; ++a)
        e3 = std::max(e3, std::abs(frame.N.dot(G * frame.screen_ambient.col(a))));
    if (e1 > 1e-9 || e2 > 1e-9 || e3 > 1e-9)
        throw PreconditionError("normalizing pair failed its defining identities: " +
                                format_double(std::max({e1, e2, e3})));
    return frame;
}

Projections project(const HypersurfaceChart& h, const PointFrame& frame, const Vector& v) {
    Matrix G = h.ambient().metric_at(frame.ambient_point);
    Projections out;
    // gbar(N, xi) = 1 and tangents are gbar-orthogonal to xi, so the
    // transversal coefficient reads off against xi.
    out.transversal = v.dot(G * frame.xi);
    Vector Qv = v - out.transversal * frame.N;
    LeastSquares ls = pseudo_solve(frame.tangent_basis, Qv);
    out.tangent_param = ls.x;
    out.reconstruction_error = ls.residual;

    const int n = static_cast<int>(frame.screen_param.cols());
    Matrix F(frame.n_plus_1(), n + 1);
    F.col(0) = frame.xi_param;
    for (int a = 0; a < n; ++a) F.col(a + 1) = frame.screen_param.col(a);
    Vector coeffs = solve(F, out.tangent_param);
    out.radical_coeff = coeffs[0];
    out.screen_coeffs = coeffs.tail(n);
    return out;
}

}  // namespace nullgeo

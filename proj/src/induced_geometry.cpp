#include "nullgeo/induced_geometry.hpp"

#include <cmath>

#include "nullgeo/util.hpp"

namespace nullgeo {

ParamField coordinate_field(int i, int n_plus_1) {
    Vector v = Vector::Zero(n_plus_1);
    v[i] = 1.0;
    return constant_param_field(v);
}

ParamField constant_param_field(Vector v) {
    return [v](const Vector&) { return v; };
}

ParamField expr_param_field(std::vector<ExprField> comps) {
    return [comps](const Vector& u) {
        Vector v(static_cast<int>(comps.size()));
        std::span<const double> pt(u.data(), static_cast<std::size_t>(u.size()));
        for (std::size_t k = 0; k < comps.size(); ++k) v[static_cast<int>(k)] = comps[k].eval(pt);
        return v;
    };
}

FrameField::FrameField(const HypersurfaceChart& h, const Vector& center, double tol)
    : h_(&h), center_(normalizing_pair(h, center, nullptr, tol)), tol_(tol) {}

FrameField::FrameField(const HypersurfaceChart& h, PointFrame center_frame, double tol)
    : h_(&h), center_(std::move(center_frame)), tol_(tol) {}

PointFrame FrameField::at(const Vector& u) const {
    if ((u - center_.param_point).norm() == 0.0) return center_;
    PointFrame f = normalizing_pair(*h_, u, nullptr, tol_, center_.pivot);
    // Keep the screen field continuous across the stencil: align each basis
    // vector's sign with the center's.
    for (int a = 0; a < f.screen_param.cols(); ++a) {
        if (f.screen_param.col(a).dot(center_.screen_param.col(a)) < 0.0) {
            f.screen_param.col(a) *= -1.0;
            f.screen_ambient.col(a) *= -1.0;
        }
    }
    if (center_.orientation < 0) f = f.flipped();
    return f;
}

Vector FrameField::xi_param_at(const Vector& u) const {
    if ((u - center_.param_point).norm() == 0.0) return center_.xi_param;
    Vector k = radical_direction_param(*h_, u, tol_, center_.pivot);
    return center_.orientation < 0 ? Vector(-k) : k;
}

Vector FrameField::xi_ambient_at(const Vector& u) const {
    return h_->jacobian(u) * xi_param_at(u);
}

namespace {

// Ambient covariant derivative of an ambient-valued field A(u) along the i-th
// parameter direction, at the frame center: FD of the components plus the
// Christoffel correction Gamma[d_i f, A].
Vector dbar_along_coord(const HypersurfaceChart& h, const PointFrame& c, int i,
                        const std::function<Vector(const Vector&)>& A, const Tensor3& gamma) {
    const int m = h.ambient().dim();
    Vector u = c.param_point;
    double hstep = fd_step(u[i]);
    Vector up = u, um = u;
    up[i] += hstep;
    um[i] -= hstep;
    Vector dA = (A(up) - A(um)) / (2.0 * hstep);
    Vector A0 = A(u);
    Vector out(m);
    for (int k = 0; k < m; ++k) {
        double v = dA[k];
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) v += gamma(k, a, b) * c.tangent_basis(a, i) * A0[b];
        out[k] = v;
    }
    return out;
}

Vector split_radical_screen(const PointFrame& f, const Vector& tangent_param, double* radical,
                            Vector* screen) {
    const int n = static_cast<int>(f.screen_param.cols());
    Matrix F(f.n_plus_1(), n + 1);
    F.col(0) = f.xi_param;
    for (int a = 0; a < n; ++a) F.col(a + 1) = f.screen_param.col(a);
    Vector coeffs = solve(F, tangent_param);
    if (radical) *radical = coeffs[0];
    if (screen) *screen = coeffs.tail(n);
    return coeffs;
}

}  // namespace

Matrix second_fundamental_form(const HypersurfaceChart& h, const PointFrame& frame) {
    const int np1 = frame.n_plus_1();
    const int m = h.ambient().dim();
    Tensor3 H = h.immersion_hessian(frame.param_point);
    Tensor3 gamma = h.ambient().christoffel(frame.ambient_point);
    Matrix G = h.ambient().metric_at(frame.ambient_point);
    Vector Gxi = G * frame.xi;
    Matrix B(np1, np1);
    for (int i = 0; i < np1; ++i)
        for (int j = i; j < np1; ++j) {
            double v = 0.0;
            for (int k = 0; k < m; ++k) {
                double d = H(k, i, j);
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b)
                        d += gamma(k, a, b) * frame.tangent_basis(a, i) * frame.tangent_basis(b, j);
                v += d * Gxi[k];
            }
            B(i, j) = v;
            B(j, i) = v;
        }
    return B;
}

InducedDerivative induced_connection(const FrameField& frames, const ParamField& X,
                                     const ParamField& Y) {
    const HypersurfaceChart& h = frames.chart();
    const PointFrame& c = frames.center();
    const int np1 = c.n_plus_1();
    Tensor3 gamma = h.ambient().christoffel(c.ambient_point);
    Matrix G = h.ambient().metric_at(c.ambient_point);

    auto Yhat = [&](const Vector& u) -> Vector { return h.jacobian(u) * Y(u); };
    Vector X0 = X(c.param_point);
    Vector Dbar = Vector::Zero(h.ambient().dim());
    for (int i = 0; i < np1; ++i) {
        if (X0[i] == 0.0) continue;
        Dbar += X0[i] * dbar_along_coord(h, c, i, Yhat, gamma);
    }
    // dbar_along_coord already adds Gamma[d_i f, Yhat] per direction i, scaled
    // by X0[i] above, which is exactly Gamma[Xhat, Yhat].

    InducedDerivative out;
    out.transversal = Dbar.dot(G * c.xi);
    Vector Q = Dbar - out.transversal * c.N;
    out.tangent_param = pseudo_solve(c.tangent_basis, Q).x;
    return out;
}

Tensor3 induced_connection_coeffs(const FrameField& frames) {
    const HypersurfaceChart& h = frames.chart();
    const PointFrame& c = frames.center();
    const int np1 = c.n_plus_1();
    const int m = h.ambient().dim();
    Tensor3 H = h.immersion_hessian(c.param_point);
    Tensor3 gamma = h.ambient().christoffel(c.ambient_point);
    Matrix G = h.ambient().metric_at(c.ambient_point);
    Vector Gxi = G * c.xi;
    Tensor3 coeffs(np1);
    for (int i = 0; i < np1; ++i)
        for (int j = i; j < np1; ++j) {
            Vector Dbar(m);
            for (int k = 0; k < m; ++k) {
                double d = H(k, i, j);
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b)
                        d += gamma(k, a, b) * c.tangent_basis(a, i) * c.tangent_basis(b, j);
                Dbar[k] = d;
            }
            double trans = Dbar.dot(Gxi);
            Vector tang = pseudo_solve(c.tangent_basis, Vector(Dbar - trans * c.N)).x;
            for (int k = 0; k < np1; ++k) {
                coeffs(k, i, j) = tang[k];
                coeffs(k, j, i) = tang[k];
            }
        }
    return coeffs;
}

AdaptedFrameGeometry fundamental_forms(const HypersurfaceChart& h, const Vector& u,
                                       const std::vector<Vector>* screen) {
    AdaptedFrameGeometry out;
    out.frame = normalizing_pair(h, u, screen);
    const PointFrame& c = out.frame;
    const int np1 = c.n_plus_1();
    const int n = np1 - 1;

    FrameField frames(h, c);
    Matrix G = h.ambient().metric_at(c.ambient_point);
    Tensor3 gamma = h.ambient().christoffel(c.ambient_point);
    Vector Gxi = G * c.xi;

    out.B = second_fundamental_form(h, c);

    out.eta.resize(np1);
    for (int i = 0; i < np1; ++i) out.eta[i] = c.N.dot(G * c.tangent_basis.col(i));

    // tau(X) and A_N from Dbar N = -A_N X + tau(X) N.
    auto Nfield = [&](const Vector& up) -> Vector { return frames.at(up).N; };
    out.tau.resize(np1);
    out.A_N.resize(np1, np1);
    for (int i = 0; i < np1; ++i) {
        Vector DN = dbar_along_coord(h, c, i, Nfield, gamma);
        out.tau[i] = DN.dot(Gxi);
        Vector tang = pseudo_solve(c.tangent_basis, Vector(DN - DN.dot(Gxi) * c.N)).x;
        out.A_N.col(i) = -tang;
    }

    // phi(X) = eta(nabla_X xi) and A*_xi X = phi(X) xi - nabla_X xi.
    auto XiField = [&](const Vector& up) -> Vector { return frames.xi_ambient_at(up); };
    out.phi.resize(np1);
    out.A_star_xi.resize(np1, np1);
    for (int i = 0; i < np1; ++i) {
        Vector Dxi = dbar_along_coord(h, c, i, XiField, gamma);
        double trans = Dxi.dot(Gxi);
        Vector nabla_xi = pseudo_solve(c.tangent_basis, Vector(Dxi - trans * c.N)).x;
        double rad = 0.0;
        split_radical_screen(c, nabla_xi, &rad, nullptr);
        out.phi[i] = rad;
        out.A_star_xi.col(i) = rad * c.xi_param - nabla_xi;
    }

    // C(X, W_a) = eta(nabla_X W_a) for the screen fields.
    out.C.resize(np1, n);
    for (int a = 0; a < n; ++a) {
        auto Wfield = [&](const Vector& up) -> Vector {
            PointFrame f = frames.at(up);
            return Vector(f.screen_ambient.col(a));
        };
        for (int i = 0; i < np1; ++i) {
            Vector DW = dbar_along_coord(h, c, i, Wfield, gamma);
            double trans = DW.dot(Gxi);
            Vector nabla_w = pseudo_solve(c.tangent_basis, Vector(DW - trans * c.N)).x;
            double rad = 0.0;
            split_radical_screen(c, nabla_w, &rad, nullptr);
            out.C(i, a) = rad;
        }
    }

    // Umbilicity fit over the screen block, residual over the full block.
    Matrix g = h.induced_metric(u).entries();
    Matrix gs = c.screen_param.transpose() * g * c.screen_param;
    Matrix Bs = c.screen_param.transpose() * out.B * c.screen_param;
    double denom = gs.squaredNorm();
    if (denom > 0.0) {
        double lambda = (Bs.cwiseProduct(gs)).sum() / denom;
        out.lambda_umbilic = lambda;
        out.umbilic_residual = (out.B - lambda * g).cwiseAbs().maxCoeff();
    } else {
        out.umbilic_residual = out.B.cwiseAbs().maxCoeff();
    }
    return out;
}

NablaGResidual nabla_g_residual(const FrameField& frames, const ParamField& X, const ParamField& Y,
                                const ParamField& Z) {
    const HypersurfaceChart& h = frames.chart();
    const PointFrame& c = frames.center();
    const int np1 = c.n_plus_1();
    Vector u = c.param_point;
    Vector X0 = X(u), Y0 = Y(u), Z0 = Z(u);

    auto gYZ = [&](const Vector& up) {
        Matrix gp = h.induced_metric(up).entries();
        return Y(up).dot(gp * Z(up));
    };
    double xdot = 0.0;
    for (int i = 0; i < np1; ++i) {
        if (X0[i] == 0.0) continue;
        double hstep = fd_step(u[i]);
        Vector up = u, um = u;
        up[i] += hstep;
        um[i] -= hstep;
        xdot += X0[i] * (gYZ(up) - gYZ(um)) / (2.0 * hstep);
    }

    Matrix g = h.induced_metric(u).entries();
    Vector nXY = induced_connection(frames, X, Y).tangent_param;
    Vector nXZ = induced_connection(frames, X, Z).tangent_param;
    NablaGResidual out;
    out.lhs = xdot - nXY.dot(g * Z0) - Y0.dot(g * nXZ);

    Matrix B = second_fundamental_form(h, c);
    Matrix G = h.ambient().metric_at(c.ambient_point);
    Vector eta(np1);
    for (int i = 0; i < np1; ++i) eta[i] = c.N.dot(G * c.tangent_basis.col(i));
    double BXY = X0.dot(B * Y0), BXZ = X0.dot(B * Z0);
    out.rhs = BXY * eta.dot(Z0) + BXZ * eta.dot(Y0);
    return out;
}

GeodesyReport diagnose_geodesic(const HypersurfaceChart& h, const std::vector<Vector>& points,
                                double tol) {
    GeodesyReport report;
    report.max_B.resize(points.size());
    parallel_for(static_cast<int>(points.size()), [&](int idx) {
        PointFrame f = normalizing_pair(h, points[static_cast<std::size_t>(idx)]);
        Matrix B = second_fundamental_form(h, f);
        report.max_B[static_cast<std::size_t>(idx)] = B.cwiseAbs().maxCoeff();
    });
    report.worst = 0.0;
    for (double v : report.max_B) report.worst = std::max(report.worst, v);
    report.totally_geodesic = report.worst <= tol;
    return report;
}

std::string to_string(UmbilicVerdict v) {
    switch (v) {
        case UmbilicVerdict::NotUmbilical: return "not_umbilical";
        case UmbilicVerdict::TotallyGeodesic: return "totally_geodesic";
        case UmbilicVerdict::TotallyUmbilical: return "totally_umbilical";
        case UmbilicVerdict::ProperTotallyUmbilical: return "proper_totally_umbilical";
    }
    return "?";
}

UmbilicReport diagnose_umbilic(const HypersurfaceChart& h, const std::vector<Vector>& points,
                               double tol_residual, double tol_proper) {
    UmbilicReport report;
    report.lambda_raw.resize(points.size());
    report.residual.resize(points.size());
    parallel_for(static_cast<int>(points.size()), [&](int idx) {
        AdaptedFrameGeometry geo = fundamental_forms(h, points[static_cast<std::size_t>(idx)]);
        report.lambda_raw[static_cast<std::size_t>(idx)] = geo.lambda_umbilic.value_or(0.0);
        report.residual[static_cast<std::size_t>(idx)] = geo.umbilic_residual;
    });
    report.worst_residual = 0.0;
    double sum_lambda = 0.0, min_abs = std::numeric_limits<double>::infinity(), max_abs = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        report.worst_residual = std::max(report.worst_residual, report.residual[i]);
        sum_lambda += report.lambda_raw[i];
        min_abs = std::min(min_abs, std::abs(report.lambda_raw[i]));
        max_abs = std::max(max_abs, std::abs(report.lambda_raw[i]));
    }
    bool umbilical = report.worst_residual <= tol_residual;
    if (!umbilical) {
        report.verdict = UmbilicVerdict::NotUmbilical;
    } else if (max_abs <= tol_proper) {
        report.verdict = UmbilicVerdict::TotallyGeodesic;
    } else if (min_abs > tol_proper) {
        report.verdict = UmbilicVerdict::ProperTotallyUmbilical;
    } else {
        report.verdict = UmbilicVerdict::TotallyUmbilical;
    }
    report.xi_orientation = (umbilical && sum_lambda < 0.0) ? -1.0 : 1.0;
    report.lambda.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        report.lambda[i] = report.xi_orientation * report.lambda_raw[i];
    return report;
}

LieDerivativeCheck lie_derivative_check(const FrameField& frames, const ParamField& X,
                                        const ParamField& Y) {
    const HypersurfaceChart& h = frames.chart();
    const PointFrame& c = frames.center();
    const int np1 = c.n_plus_1();
    Vector u = c.param_point;
    Vector xi0 = c.xi_param;
    Vector X0 = X(u), Y0 = Y(u);
    Matrix g = h.induced_metric(u).entries();

    auto gXY = [&](const Vector& up) {
        Matrix gp = h.induced_metric(up).entries();
        return X(up).dot(gp * Y(up));
    };
    // xi . g(X,Y)
    double xi_dot = 0.0;
    for (int i = 0; i < np1; ++i) {
        if (xi0[i] == 0.0) continue;
        double hstep = fd_step(u[i]);
        Vector up = u, um = u;
        up[i] += hstep;
        um[i] -= hstep;
        xi_dot += xi0[i] * (gXY(up) - gXY(um)) / (2.0 * hstep);
    }
    // [xi, V] = xi^i d_i V - V^i d_i xi (componentwise FD in parameter space)
    auto bracket_with_xi = [&](const ParamField& V) {
        Vector V0 = V(u);
        Vector out = Vector::Zero(np1);
        for (int i = 0; i < np1; ++i) {
            double hstep = fd_step(u[i]);
            Vector up = u, um = u;
            up[i] += hstep;
            um[i] -= hstep;
            if (xi0[i] != 0.0) out += xi0[i] * (V(up) - V(um)) / (2.0 * hstep);
            if (V0[i] != 0.0)
                out -= V0[i] * (frames.xi_param_at(up) - frames.xi_param_at(um)) / (2.0 * hstep);
        }
        return out;
    };
    Vector brX = bracket_with_xi(X);
    Vector brY = bracket_with_xi(Y);

    LieDerivativeCheck out;
    out.lie_value = xi_dot - brX.dot(g * Y0) - X0.dot(g * brY);
    Matrix B = second_fundamental_form(h, c);
    out.minus_2B = -2.0 * X0.dot(B * Y0);
    return out;
}

Tensor3 induced_nabla_g(const FrameField& frames) {
    const HypersurfaceChart& h = frames.chart();
    const PointFrame& c = frames.center();
    const int np1 = c.n_plus_1();
    Vector u = c.param_point;
    Tensor3 coeffs = induced_connection_coeffs(frames);
    Matrix g = h.induced_metric(u).entries();
    Tensor3 out(np1);
    for (int i = 0; i < np1; ++i) {
        double hstep = fd_step(u[i]);
        Vector up = u, um = u;
        up[i] += hstep;
        um[i] -= hstep;
        Matrix dg = (h.induced_metric(up).entries() - h.induced_metric(um).entries()) /
                    (2.0 * hstep);
        for (int j = 0; j < np1; ++j)
            for (int k = 0; k < np1; ++k) {
                double v = dg(j, k);
                for (int l = 0; l < np1; ++l)
                    v -= coeffs(l, i, j) * g(l, k) + coeffs(l, i, k) * g(j, l);
                out(i, j, k) = v;
            }
    }
    return out;
}

NeverWeylWitness never_weyl_witness(const HypersurfaceChart& h, const std::vector<Vector>& points,
                                    double geodesic_tol) {
    NeverWeylWitness out;
    GeodesyReport geo = diagnose_geodesic(h, points, geodesic_tol);
    if (geo.totally_geodesic) return out;  // induced connection IS metric, theta = 0

    UmbilicReport umb = diagnose_umbilic(h, points);
    double best = -1.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
        PointFrame f = normalizing_pair(h, points[p]);
        Matrix B = second_fundamental_form(h, f);
        int bi = 0, bj = 0;
        double m = B.cwiseAbs().maxCoeff(&bi, &bj);
        if (m > best) {
            best = m;
            out.point = points[p];
            out.which_X = bi;
            out.which_Z = bj;
            out.B_value = umb.xi_orientation * B(bi, bj);
        }
    }
    out.applicable = true;

    FrameField frames(h, out.point);
    Tensor3 ng = induced_nabla_g(frames);
    Matrix g = h.induced_metric(out.point).entries();
    const int np1 = static_cast<int>(g.rows());
    double denom = g.squaredNorm();
    double residual = 0.0;
    for (int i = 0; i < np1; ++i) {
        double num = 0.0;
        for (int j = 0; j < np1; ++j)
            for (int k = 0; k < np1; ++k) num += ng(i, j, k) * g(j, k);
        double theta_i = denom > 0 ? num / denom : 0.0;
        for (int j = 0; j < np1; ++j)
            for (int k = 0; k < np1; ++k)
                residual = std::max(residual, std::abs(ng(i, j, k) - theta_i * g(j, k)));
    }
    out.best_fit_theta_residual = residual;
    return out;
}

}  // namespace nullgeo

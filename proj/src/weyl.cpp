#include "nullgeo/weyl.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "nullgeo/util.hpp"

namespace nullgeo {

namespace {

struct UmbilicFit {
    PointFrame frame;
    double lambda = 0.0;
    double residual = 0.0;
};

UmbilicFit fit_at(const HypersurfaceChart& h, const Vector& u) {
    UmbilicFit fit;
    fit.frame = normalizing_pair(h, u);
    Matrix B = second_fundamental_form(h, fit.frame);
    Matrix g = h.induced_metric(u).entries();
    Matrix gs = fit.frame.screen_param.transpose() * g * fit.frame.screen_param;
    Matrix Bs = fit.frame.screen_param.transpose() * B * fit.frame.screen_param;
    double denom = gs.squaredNorm();
    fit.lambda = denom > 0.0 ? Bs.cwiseProduct(gs).sum() / denom : 0.0;
    fit.residual = (B - fit.lambda * g).cwiseAbs().maxCoeff();
    return fit;
}

}  // namespace

WeylData::WeylData(HypersurfaceChart chart, double umbilic_tol)
    : chart_(std::move(chart)), umbilic_tol_(umbilic_tol) {}

double WeylData::lambda_at(const Vector& u) const {
    UmbilicFit fit = fit_at(chart_, u);
    if (fit.residual > umbilic_tol_)
        throw PreconditionError("hypersurface is not umbilical here: |B - lambda g| = " +
                                format_double(fit.residual) + " exceeds " +
                                format_double(umbilic_tol_));
    return fit.lambda;
}

Vector WeylData::zeta_at(const Vector& u) const {
    UmbilicFit fit = fit_at(chart_, u);
    if (fit.residual > umbilic_tol_)
        throw PreconditionError("cannot build zeta: umbilicity residual " +
                                format_double(fit.residual) + " exceeds " +
                                format_double(umbilic_tol_));
    Vector zeta = fit.lambda * fit.frame.N;
    if (gauge_) zeta += fit.frame.tangent_basis * gauge_(u);
    return zeta;
}

Vector WeylData::theta_at(const Vector& u) const {
    Vector zeta = zeta_at(u);
    Matrix J = chart_.jacobian(u);
    Matrix G = chart_.ambient().metric_at(chart_.map_point(u));
    return Vector(-2.0 * J.transpose() * G * zeta);
}

WeylData::Derivative WeylData::connection(const Vector& u, const ParamField& X,
                                          const ParamField& Y) const {
    const PointFrame frame = normalizing_pair(chart_, u);
    const int np1 = frame.n_plus_1();
    Matrix G = chart_.ambient().metric_at(frame.ambient_point);
    Tensor3 gamma = chart_.ambient().christoffel(frame.ambient_point);
    Vector X0 = X(u), Y0 = Y(u);

    auto Yhat = [&](const Vector& up) -> Vector { return chart_.jacobian(up) * Y(up); };
    Vector Dbar = Vector::Zero(chart_.ambient().dim());
    for (int i = 0; i < np1; ++i) {
        if (X0[i] == 0.0) continue;
        double h = fd_step(u[i]);
        Vector up = u, um = u;
        up[i] += h;
        um[i] -= h;
        Dbar += X0[i] * (Yhat(up) - Yhat(um)) / (2.0 * h);
    }
    Vector Xhat = frame.tangent_basis * X0;
    Vector Yhat0 = frame.tangent_basis * Y0;
    for (int k = 0; k < chart_.ambient().dim(); ++k)
        for (int a = 0; a < chart_.ambient().dim(); ++a)
            for (int b = 0; b < chart_.ambient().dim(); ++b)
                Dbar[k] += gamma(k, a, b) * Xhat[a] * Yhat0[b];

    Vector theta = theta_at(u);
    Vector zeta = zeta_at(u);
    Matrix g = chart_.induced_metric(u).entries();
    double thX = theta.dot(X0), thY = theta.dot(Y0);
    Vector val = Dbar - 0.5 * thY * Xhat - 0.5 * thX * Yhat0 - X0.dot(g * Y0) * zeta;

    Derivative out;
    out.tangency_error = std::abs(val.dot(G * frame.xi));
    out.tangent_param = pseudo_solve(frame.tangent_basis, val).x;
    return out;
}

Tensor3 WeylData::connection_coeffs(const Vector& u) const {
    const PointFrame frame = normalizing_pair(chart_, u);
    const int np1 = frame.n_plus_1();
    const int m = chart_.ambient().dim();
    Tensor3 H = chart_.immersion_hessian(u);
    Tensor3 gamma = chart_.ambient().christoffel(frame.ambient_point);
    Vector theta = theta_at(u);
    Vector zeta = zeta_at(u);
    Matrix g = chart_.induced_metric(u).entries();

    Tensor3 coeffs(np1);
    for (int i = 0; i < np1; ++i)
        for (int j = i; j < np1; ++j) {
            Vector val(m);
            for (int k = 0; k < m; ++k) {
                double d = H(k, i, j);
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b)
                        d += gamma(k, a, b) * frame.tangent_basis(a, i) * frame.tangent_basis(b, j);
                val[k] = d;
            }
            val -= 0.5 * theta[j] * frame.tangent_basis.col(i);
            val -= 0.5 * theta[i] * frame.tangent_basis.col(j);
            val -= g(i, j) * zeta;
            Vector tang = pseudo_solve(frame.tangent_basis, val).x;
            for (int k = 0; k < np1; ++k) {
                coeffs(k, i, j) = tang[k];
                coeffs(k, j, i) = tang[k];
            }
        }
    return coeffs;
}

FramedConnection WeylData::framed(const Vector& base_point) const {
    FramedConnection c;
    c.dim = chart_.n_plus_1();
    c.coords = chart_.params();
    c.base_point = base_point;
    c.periods = chart_.param_periods();
    auto self = std::make_shared<WeylData>(*this);
    c.gamma = [self](const Vector& x) { return self->connection_coeffs(x); };
    return c;
}

Matrix WeylData::screen_from_theta(const Vector& u) const {
    Vector theta = theta_at(u);
    double norm = theta.norm();
    if (norm < 1e-10)
        throw PreconditionError("theta vanishes here (geodesic case): ker theta is all of TM");
    Matrix Q = orthonormal_completion(theta);
    return Q.rightCols(theta.size() - 1);  // Euclidean complement of the covector
}

double WeylData::theta_closedness(const Vector& u) const {
    const int np1 = chart_.n_plus_1();
    double worst = 0.0;
    for (int i = 0; i < np1; ++i) {
        double hi = fd_step(u[i]);
        Vector up = u, um = u;
        up[i] += hi;
        um[i] -= hi;
        Vector di = (theta_at(up) - theta_at(um)) / (2.0 * hi);
        for (int j = i + 1; j < np1; ++j) {
            double hj = fd_step(u[j]);
            Vector vp = u, vm = u;
            vp[j] += hj;
            vm[j] -= hj;
            Vector dj = (theta_at(vp) - theta_at(vm)) / (2.0 * hj);
            // dtheta(d_i, d_j) = d_i theta_j - d_j theta_i (coordinate fields commute)
            worst = std::max(worst, std::abs(di[j] - dj[i]));
        }
    }
    return worst;
}

PointFrame WeylData::kertheta_frame(const Vector& u) const {
    Matrix K = screen_from_theta(u);
    std::vector<Vector> screen;
    for (int a = 0; a < K.cols(); ++a) screen.push_back(K.col(a));
    return normalizing_pair(chart_, u, &screen);
}

Vector build_zeta(const HypersurfaceChart& h, const Vector& u, double umbilic_tol) {
    WeylData w(h, umbilic_tol);
    return w.zeta_at(u);
}

std::vector<ParamField> random_tangent_fields(const std::vector<std::string>& params, unsigned seed,
                                              int count, std::vector<std::string>* sources) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(params.size()) - 1);
    auto round3 = [](double v) { return std::round(v * 1000.0) / 1000.0; };

    std::vector<ParamField> fields;
    for (int f = 0; f < count; ++f) {
        std::vector<ExprField> comps;
        std::ostringstream src;
        for (std::size_t c = 0; c < params.size(); ++c) {
            double c0 = round3(coeff(rng));
            double c1 = round3(coeff(rng));
            double c2 = round3(coeff(rng));
            const std::string& pa = params[static_cast<std::size_t>(pick(rng))];
            const std::string& pb = params[static_cast<std::size_t>(pick(rng))];
            std::ostringstream e;
            e << format_double(c0) << " + " << format_double(c1) << "*sin(" << pa << ") + "
              << format_double(c2) << "*cos(" << pb << ")";
            comps.push_back(ExprField::parse(e.str(), params));
            if (c) src << "; ";
            src << e.str();
        }
        if (sources) sources->push_back(src.str());
        fields.push_back(expr_param_field(std::move(comps)));
    }
    return fields;
}

WeylVerifyReport verify_weyl(const WeylData& w, const std::vector<Vector>& points, int n_triples,
                             unsigned seed, double step_scale) {
    const HypersurfaceChart& h = w.chart();
    const int np1 = h.n_plus_1();
    WeylVerifyReport report;
    report.seed = seed;
    std::vector<ParamField> fields =
        random_tangent_fields(h.params(), seed, 3 * n_triples, &report.field_sources);

    struct Task {
        int point_index, triple_index;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < points.size(); ++p)
        for (int t = 0; t < n_triples; ++t)
            tasks.push_back({static_cast<int>(p), t});
    report.entries.resize(tasks.size());

    parallel_for(static_cast<int>(tasks.size()), [&](int ti) {
        const Task& task = tasks[static_cast<std::size_t>(ti)];
        const Vector& u = points[static_cast<std::size_t>(task.point_index)];
        const ParamField& X = fields[static_cast<std::size_t>(3 * task.triple_index)];
        const ParamField& Y = fields[static_cast<std::size_t>(3 * task.triple_index + 1)];
        const ParamField& Z = fields[static_cast<std::size_t>(3 * task.triple_index + 2)];

        Vector X0 = X(u), Y0 = Y(u), Z0 = Z(u);
        Matrix g = h.induced_metric(u).entries();
        Vector theta = w.theta_at(u);

        auto gYZ = [&](const Vector& up) {
            Matrix gp = h.induced_metric(up).entries();
            return Y(up).dot(gp * Z(up));
        };
        double xdot = 0.0;
        for (int i = 0; i < np1; ++i) {
            if (X0[i] == 0.0) continue;
            double hs = step_scale * fd_step(u[i]);
            Vector up = u, um = u;
            up[i] += hs;
            um[i] -= hs;
            xdot += X0[i] * (gYZ(up) - gYZ(um)) / (2.0 * hs);
        }
        WeylData::Derivative nXY = w.connection(u, X, Y);
        WeylData::Derivative nXZ = w.connection(u, X, Z);
        WeylData::Derivative nYX = w.connection(u, Y, X);

        WeylTripleResidual r;
        r.point_index = task.point_index;
        r.triple_index = task.triple_index;
        r.conformality = std::abs(xdot - nXY.tangent_param.dot(g * Z0) -
                                  Y0.dot(g * nXZ.tangent_param) - theta.dot(X0) * Y0.dot(g * Z0));
        r.tangency = std::max(nXY.tangency_error, nXZ.tangency_error);

        // torsion: nabla_X Y - nabla_Y X - [X, Y] in parameter coordinates
        Vector bracket = Vector::Zero(np1);
        for (int i = 0; i < np1; ++i) {
            double hs = step_scale * fd_step(u[i]);
            Vector up = u, um = u;
            up[i] += hs;
            um[i] -= hs;
            bracket += X0[i] * (Y(up) - Y(um)) / (2.0 * hs);
            bracket -= Y0[i] * (X(up) - X(um)) / (2.0 * hs);
        }
        r.torsion = (nXY.tangent_param - nYX.tangent_param - bracket).cwiseAbs().maxCoeff();
        report.entries[static_cast<std::size_t>(ti)] = r;
    });

    for (const auto& e : report.entries) {
        report.max_conformality = std::max(report.max_conformality, e.conformality);
        report.max_torsion = std::max(report.max_torsion, e.torsion);
        report.max_tangency = std::max(report.max_tangency, e.tangency);
    }
    return report;
}

}  // namespace nullgeo

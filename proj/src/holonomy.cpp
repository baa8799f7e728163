#include "nullgeo/holonomy.hpp"

#include <cmath>

#include "nullgeo/util.hpp"

namespace nullgeo {

FramedConnection FramedConnection::from_expressions(
    std::vector<std::string> coords, std::vector<std::vector<std::vector<ExprField>>> grid,
    Vector base_point) {
    FramedConnection c;
    c.dim = static_cast<int>(coords.size());
    c.coords = std::move(coords);
    c.base_point = std::move(base_point);
    const int d = c.dim;
    auto shared = std::make_shared<std::vector<std::vector<std::vector<ExprField>>>>(std::move(grid));
    c.gamma = [shared, d](const Vector& x) {
        Tensor3 g(d);
        std::span<const double> pt(x.data(), static_cast<std::size_t>(x.size()));
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    const ExprField& e = (*shared)[static_cast<std::size_t>(k)]
                                                  [static_cast<std::size_t>(i)]
                                                  [static_cast<std::size_t>(j)];
                    g(k, i, j) = e.empty() ? 0.0 : e.eval(pt);
                }
        return g;
    };
    return c;
}

double FramedConnection::torsion_defect(const std::vector<Vector>& samples) const {
    double worst = 0.0;
    for (const Vector& x : samples) {
        Tensor3 g = gamma(x);
        for (int k = 0; k < dim; ++k)
            for (int i = 0; i < dim; ++i)
                for (int j = i + 1; j < dim; ++j)
                    worst = std::max(worst, std::abs(g(k, i, j) - g(k, j, i)));
    }
    return worst;
}

Vector Loop::at(double t) const {
    Vector x(static_cast<int>(components.size()));
    std::span<const double> pt(&t, 1);
    for (std::size_t k = 0; k < components.size(); ++k) x[static_cast<int>(k)] = components[k].eval(pt);
    return x;
}

Vector Loop::velocity(double t) const {
    Vector v(static_cast<int>(components.size()));
    std::span<const double> pt(&t, 1);
    for (std::size_t k = 0; k < components.size(); ++k)
        v[static_cast<int>(k)] = components[k].partial(pt, 0);
    return v;
}

namespace {

Matrix coefficient_matrix(const FramedConnection& c, const Vector& x, const Vector& xdot) {
    Tensor3 g = c.gamma(x);
    Matrix A = Matrix::Zero(c.dim, c.dim);
    for (int k = 0; k < c.dim; ++k)
        for (int j = 0; j < c.dim; ++j) {
            double v = 0.0;
            for (int i = 0; i < c.dim; ++i) v += g(k, i, j) * xdot[i];
            A(k, j) = v;
        }
    return A;
}

Matrix rk4_transport(const FramedConnection& c, const Curve& curve, double t0, double t1,
                     int steps, double* liouville) {
    const int d = c.dim;
    Matrix V = Matrix::Identity(d, d);
    double logdet = 0.0;
    double h = (t1 - t0) / steps;
    for (int s = 0; s < steps; ++s) {
        double t = t0 + s * h;
        auto [x1, v1] = curve(t);
        auto [x2, v2] = curve(t + 0.5 * h);
        auto [x3, v3] = curve(t + h);
        Matrix A1 = -coefficient_matrix(c, x1, v1);
        Matrix A2 = -coefficient_matrix(c, x2, v2);
        Matrix A3 = -coefficient_matrix(c, x3, v3);
        Matrix k1 = A1 * V;
        Matrix k2 = A2 * (V + 0.5 * h * k1);
        Matrix k3 = A2 * (V + 0.5 * h * k2);
        Matrix k4 = A3 * (V + h * k3);
        V += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        // d(log det V)/dt = tr(A(t)); Simpson on the same stage evaluations.
        logdet += (h / 6.0) * (A1.trace() + 4.0 * A2.trace() + A3.trace());
    }
    if (liouville) *liouville = std::exp(logdet);
    return V;
}

}  // namespace

Matrix transport_curve(const FramedConnection& c, const Curve& curve, double t0, double t1,
                       int steps, double* liouville) {
    return rk4_transport(c, curve, t0, t1, steps, liouville);
}

Matrix transport_segment(const FramedConnection& c, const Vector& from, const Vector& to,
                         int steps) {
    Vector delta = to - from;
    Curve curve = [&from, delta](double t) {
        return std::pair<Vector, Vector>(from + t * delta, delta);
    };
    return rk4_transport(c, curve, 0.0, 1.0, std::max(steps, 2), nullptr);
}

HolonomyElement parallel_transport(const FramedConnection& c, const Loop& loop,
                                   int steps_override) {
    int steps = steps_override > 0 ? steps_override : loop.steps;
    if (steps < 100) throw PreconditionError("parallel_transport: need at least 100 steps");
    if (static_cast<int>(loop.components.size()) != c.dim)
        throw PreconditionError("loop dimension does not match the connection");
    Vector start = loop.at(loop.t0);
    Vector end = loop.at(loop.t1);
    Vector gap = end - start;
    for (int i = 0; i < gap.size(); ++i) {
        double p = i < static_cast<int>(c.periods.size()) ? c.periods[static_cast<std::size_t>(i)]
                                                          : 0.0;
        if (p > 0.0) gap[i] -= p * std::round(gap[i] / p);
    }
    if (gap.norm() > 1e-10)
        throw PreconditionError("loop '" + loop.id + "' is not closed: |gamma(t0)-gamma(t1)| = " +
                                format_double(gap.norm()));

    Curve curve = [&loop](double t) {
        return std::pair<Vector, Vector>(loop.at(t), loop.velocity(t));
    };
    HolonomyElement el;
    el.loop_id = loop.id;
    el.matrix = rk4_transport(c, curve, loop.t0, loop.t1, steps, &el.liouville_det);
    Matrix half = rk4_transport(c, curve, loop.t0, loop.t1, std::max(steps / 2, 50), nullptr);
    el.error_estimate = (el.matrix - half).norm() / 15.0;
    return el;
}

namespace {

// Symmetric-matrix vectorisation with an orthonormal basis of Sym(n).
int sym_dim(int n) { return n * (n + 1) / 2; }

Matrix sym_basis_element(int n, int which) {
    int idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            if (idx == which) {
                Matrix E = Matrix::Zero(n, n);
                if (i == j) {
                    E(i, i) = 1.0;
                } else {
                    E(i, j) = E(j, i) = 1.0 / std::sqrt(2.0);
                }
                return E;
            }
            ++idx;
        }
    throw PreconditionError("sym basis index out of range");
}

Vector sym_vec(const Matrix& S) {
    int n = static_cast<int>(S.rows());
    Vector v(sym_dim(n));
    int idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            v[idx++] = (i == j) ? S(i, i) : std::sqrt(2.0) * S(i, j);
        }
    return v;
}

Matrix sym_unvec(const Vector& v, int n) {
    Matrix S = Matrix::Zero(n, n);
    int idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            if (i == j)
                S(i, i) = v[idx];
            else
                S(i, j) = S(j, i) = v[idx] / std::sqrt(2.0);
            ++idx;
        }
    return S;
}

double line_residual_for(const std::vector<HolonomyElement>& elements, const Vector& v) {
    Vector vhat = v.normalized();
    double worst = 0.0;
    for (const auto& el : elements) {
        Vector Tv = el.matrix * vhat;
        double norm = Tv.norm();
        if (norm == 0.0) return 1.0;
        double sine = (Tv - Tv.dot(vhat) * vhat).norm() / norm;
        worst = std::max(worst, sine);
    }
    return worst;
}

std::vector<Vector> real_eigenvector_candidates(const Matrix& T) {
    std::vector<Vector> out;
    Eigen::EigenSolver<Matrix> es(T);
    for (int i = 0; i < T.rows(); ++i) {
        std::complex<double> lam = es.eigenvalues()[i];
        if (std::abs(lam.imag()) > 1e-9 * (1.0 + std::abs(lam.real()))) continue;
        Eigen::VectorXcd col = es.eigenvectors().col(i);
        Vector v(T.rows());
        for (int k = 0; k < T.rows(); ++k) v[k] = col[k].real();
        if (v.norm() > 1e-12) out.push_back(v.normalized());
    }
    return out;
}

}  // namespace

ClassificationResult classify(const std::vector<HolonomyElement>& elements, double tol) {
    if (elements.empty()) throw PreconditionError("classify: need at least one element");
    const int d = static_cast<int>(elements[0].matrix.rows());
    const int n = d - 1;
    ClassificationResult res;

    bool all_identity = true;
    for (const auto& el : elements)
        if ((el.matrix - Matrix::Identity(d, d)).norm() > tol) all_identity = false;

    Vector best_line;
    double best_res = std::numeric_limits<double>::infinity();
    if (all_identity) {
        best_line = Vector::Unit(d, 0);
        best_res = 0.0;
        res.line_underdetermined = true;
        res.note = "all transports are the identity: invariant line underdetermined";
    } else {
        std::vector<Vector> candidates;
        for (const auto& el : elements)
            for (const auto& v : real_eigenvector_candidates(el.matrix)) candidates.push_back(v);
        // Products help single out the COMMON line when eigenvalues cluster.
        for (std::size_t a = 0; a + 1 < elements.size(); ++a) {
            Matrix P = elements[a].matrix * elements[a + 1].matrix;
            for (const auto& v : real_eigenvector_candidates(P)) candidates.push_back(v);
        }
        for (const auto& v : candidates) {
            double r = line_residual_for(elements, v);
            if (r < best_res) {
                best_res = r;
                best_line = v;
            }
        }
        if (candidates.empty()) {
            best_line = Vector::Unit(d, 0);
            best_res = 1.0;
        }
    }
    res.line_residual = best_res;
    res.invariant_line = best_line;
    res.adapted_basis = orthonormal_completion(best_line);

    bool line_ok = best_res <= tol;

    // Conjugate and test the quotient blocks.
    std::vector<Matrix> blocks;
    Matrix Ainv = res.adapted_basis.transpose();  // orthogonal
    for (const auto& el : elements) {
        Matrix T = Ainv * el.matrix * res.adapted_basis;
        blocks.push_back(T.bottomRightCorner(n, n));
    }

    if (n >= 1) {
        bool scalar_blocks = true;
        for (const auto& D : blocks) {
            double dscal = D.trace() / n;
            if ((D - dscal * Matrix::Identity(n, n)).norm() > tol * std::max(1.0, D.norm()))
                scalar_blocks = false;
        }
        if (n == 1 || scalar_blocks) {
            res.G_fit = Matrix::Identity(n, n);
            res.conformal_underdetermined = true;
            res.conformality_residual = 0.0;
            for (const auto& D : blocks) res.mu.push_back((D * D).trace() / n);
            res.signature_p = n;
            res.signature_q = 0;
            if (!res.note.empty()) res.note += "; ";
            res.note += (n == 1) ? "conformality vacuous for n=1"
                                 : "conformal blocks are scalar: quotient form underdetermined";
        } else {
            // Joint least-squares fit of D^T G D = mu G on Sym(n): common
            // eigenvector of the vectorised congruence operators.
            const int m = sym_dim(n);
            std::vector<Matrix> K(blocks.size(), Matrix::Zero(m, m));
            for (std::size_t e = 0; e < blocks.size(); ++e)
                for (int col = 0; col < m; ++col) {
                    Matrix E = sym_basis_element(n, col);
                    K[e].col(col) = sym_vec(blocks[e].transpose() * E * blocks[e]);
                }
            Matrix Kmix = Matrix::Zero(m, m);
            for (std::size_t e = 0; e < K.size(); ++e)
                Kmix += (1.0 + 0.25 * static_cast<double>(e)) * K[e];

            double best_conf = std::numeric_limits<double>::infinity();
            Vector best_G;
            std::vector<double> best_mu;
            for (const Vector& gv : real_eigenvector_candidates(Kmix)) {
                std::vector<double> mu;
                double worst = 0.0;
                for (const auto& Ke : K) {
                    Vector img = Ke * gv;
                    double mu_e = img.dot(gv) / gv.squaredNorm();
                    mu.push_back(mu_e);
                    worst = std::max(worst, (img - mu_e * gv).norm() / gv.norm());
                }
                if (worst < best_conf) {
                    best_conf = worst;
                    best_G = gv;
                    best_mu = mu;
                }
            }
            if (best_G.size() == 0) {
                res.conformality_residual = 1.0;
            } else {
                Matrix G = sym_unvec(best_G, n);
                Eigen::SelfAdjointEigenSolver<Matrix> es(G);
                int pos = 0, neg = 0;
                double scale = es.eigenvalues().cwiseAbs().maxCoeff();
                for (int i = 0; i < n; ++i) {
                    if (std::abs(es.eigenvalues()[i]) <= 1e-9 * scale) continue;
                    (es.eigenvalues()[i] > 0 ? pos : neg)++;
                }
                if (neg > pos) {
                    G = -G;
                    std::swap(pos, neg);
                }
                res.G_fit = G;
                res.mu = best_mu;
                res.conformality_residual = best_conf;
                res.signature_p = pos;
                res.signature_q = neg;
            }
        }
    }

    bool mu_positive = true;
    for (double m : res.mu)
        if (!(m > 0.0)) mu_positive = false;
    bool conf_ok = res.conformal_underdetermined || res.conformality_residual <= tol;
    res.verdict = (line_ok && conf_ok && mu_positive) ? ClassificationResult::Verdict::Qualifies
                                                      : ClassificationResult::Verdict::Fails;
    return res;
}

namespace {

Vector dogleg_waypoint(const Vector& from, const Vector& to) {
    // Deterministic off-segment waypoint: offset the midpoint along the
    // coordinate axis least aligned with the segment.
    Vector mid = 0.5 * (from + to);
    Vector d = to - from;
    int axis = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d.size(); ++i) {
        if (std::abs(d[i]) < best) {
            best = std::abs(d[i]);
            axis = i;
        }
    }
    double scale = std::max(0.25 * d.norm(), 1e-2);
    mid[axis] += scale;
    return mid;
}

}  // namespace

std::vector<MetricSample> reconstruct_metric(const FramedConnection& c,
                                             const ClassificationResult& cls,
                                             const std::vector<Vector>& samples, int steps,
                                             double consistency_tol) {
    if (cls.verdict != ClassificationResult::Verdict::Qualifies)
        throw PreconditionError("reconstruct_metric: classification did not qualify");
    const int d = c.dim;
    const int n = d - 1;
    Vector line = cls.invariant_line->normalized();
    // Quotient projection at base: coordinates of TM/L against the adapted
    // complement, i.e. the last n rows of the (orthogonal) adapted basis^T.
    Matrix P0 = cls.adapted_basis.transpose().bottomRows(n);
    Matrix Gq = cls.G_fit;

    std::vector<MetricSample> out(samples.size());
    parallel_for(static_cast<int>(samples.size()), [&](int idx) {
        const Vector& x = samples[static_cast<std::size_t>(idx)];
        MetricSample ms;
        ms.point = x;
        Matrix T = transport_segment(c, c.base_point, x, steps);
        Matrix Tinv = T.inverse();
        ms.g = Tinv.transpose() * P0.transpose() * Gq * P0 * Tinv;
        ms.g = 0.5 * (ms.g + ms.g.transpose());
        ms.kernel = (T * line).normalized();
        ms.kernel_residual = (ms.g * ms.kernel).cwiseAbs().maxCoeff() /
                             std::max(1e-300, ms.g.norm());

        // Second path through a dogleg waypoint: must agree up to scale.
        Vector w = dogleg_waypoint(c.base_point, x);
        Matrix T2 = transport_segment(c, c.base_point, w, steps) ;
        T2 = transport_segment(c, w, x, steps) * T2;
        Matrix T2inv = T2.inverse();
        Matrix g2 = T2inv.transpose() * P0.transpose() * Gq * P0 * T2inv;
        g2 = 0.5 * (g2 + g2.transpose());
        double factor = ms.g.cwiseProduct(g2).sum() / ms.g.squaredNorm();
        ms.proportionality = factor;
        ms.path_residual = (g2 - factor * ms.g).norm() / ms.g.norm();
        out[static_cast<std::size_t>(idx)] = ms;
    });

    for (const auto& ms : out)
        if (ms.path_residual > consistency_tol)
            throw ToleranceError("reconstruction is path-inconsistent at point (" +
                                 format_double(ms.point[0]) + ", ...): residual " +
                                 format_double(ms.path_residual) +
                                 "; the sampled loops miss holonomy");
    return out;
}

WeylPropertyReport verify_weyl_property(const FramedConnection& c,
                                        const ClassificationResult& cls,
                                        const std::vector<Vector>& samples, int steps) {
    if (cls.verdict != ClassificationResult::Verdict::Qualifies)
        throw PreconditionError("verify_weyl_property: classification did not qualify");
    const int d = c.dim;
    const int n = d - 1;
    Vector line = cls.invariant_line->normalized();
    Matrix P0 = cls.adapted_basis.transpose().bottomRows(n);
    Matrix Gq = cls.G_fit;

    auto metric_and_kernel = [&](const Matrix& T, Matrix* g, Vector* kernel) {
        Matrix Tinv = T.inverse();
        Matrix m = Tinv.transpose() * P0.transpose() * Gq * P0 * Tinv;
        *g = 0.5 * (m + m.transpose());
        if (kernel) *kernel = T * line;  // scale left free: parallel up to scale
    };

    WeylPropertyReport report;
    report.theta.resize(samples.size());
    std::vector<double> worst(samples.size(), 0.0), lemma(samples.size(), 0.0);

    parallel_for(static_cast<int>(samples.size()), [&](int si) {
        const Vector& x = samples[static_cast<std::size_t>(si)];
        Matrix Tx = transport_segment(c, c.base_point, x, steps);
        Matrix g0;
        Vector k0;
        metric_and_kernel(Tx, &g0, &k0);
        double gscale = std::max(1e-300, g0.cwiseAbs().maxCoeff());
        Tensor3 gam = c.gamma(x);

        Tensor3 dg(d);
        Matrix dkernel(d, d);  // column i = d_i kernel
        for (int i = 0; i < d; ++i) {
            double h = fd_step(x[i]);
            Vector xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            Matrix gp, gm;
            Vector kp, km;
            metric_and_kernel(transport_segment(c, x, xp, std::max(steps / 10, 50)) * Tx, &gp, &kp);
            metric_and_kernel(transport_segment(c, x, xm, std::max(steps / 10, 50)) * Tx, &gm, &km);
            Matrix diff = (gp - gm) / (2.0 * h);
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) dg(i, j, k) = diff(j, k);
            dkernel.col(i) = (kp - km) / (2.0 * h);
        }

        // nabla_i g_jk = d_i g_jk - Gamma^l_ij g_lk - Gamma^l_ik g_jl
        Vector theta(d);
        double worst_here = 0.0;
        Tensor3 nab(d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    double v = dg(i, j, k);
                    for (int l = 0; l < d; ++l)
                        v -= gam(l, i, j) * g0(l, k) + gam(l, i, k) * g0(j, l);
                    nab(i, j, k) = v;
                }
            double num = 0.0, den = 0.0;
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    num += nab(i, j, k) * g0(j, k);
                    den += g0(j, k) * g0(j, k);
                }
            theta[i] = den > 0 ? num / den : 0.0;
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    worst_here = std::max(worst_here,
                                          std::abs(nab(i, j, k) - theta[i] * g0(j, k)) / gscale);
        }
        report.theta[static_cast<std::size_t>(si)] = theta;
        worst[static_cast<std::size_t>(si)] = worst_here;

        // Forward lemma: g(nabla_X kernel, .) = 0 for the transported line field.
        double lem = 0.0;
        for (int i = 0; i < d; ++i) {
            Vector nk = dkernel.col(i);
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) nk[k] += gam(k, i, l) * k0[l];
            lem = std::max(lem, (g0 * nk).cwiseAbs().maxCoeff() / (gscale * std::max(1.0, k0.norm())));
        }
        lemma[static_cast<std::size_t>(si)] = lem;
    });

    for (std::size_t i = 0; i < samples.size(); ++i) {
        report.max_residual_rel = std::max(report.max_residual_rel, worst[i]);
        report.forward_lemma_residual = std::max(report.forward_lemma_residual, lemma[i]);
    }
    return report;
}

}  // namespace nullgeo

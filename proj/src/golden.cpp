#include "nullgeo/golden.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "nullgeo/induced_geometry.hpp"
#include "nullgeo/util.hpp"
#include "nullgeo/weyl.hpp"

namespace nullgeo {

double framed_nabla_g(const FramedConnection& conn, const HypersurfaceChart& chart,
                      const Vector& u, const Vector& X0, const ParamField& Y, const ParamField& Z) {
    const int d = conn.dim;
    auto gYZ = [&](const Vector& up) {
        Matrix gp = chart.induced_metric(up).entries();
        return Y(up).dot(gp * Z(up));
    };
    double xdot = 0.0;
    for (int i = 0; i < d; ++i) {
        if (X0[i] == 0.0) continue;
        double h = fd_step(u[i]);
        Vector up = u, um = u;
        up[i] += h;
        um[i] -= h;
        xdot += X0[i] * (gYZ(up) - gYZ(um)) / (2.0 * h);
    }
    Tensor3 gam = conn.gamma(u);
    auto nabla = [&](const ParamField& V) {
        Vector V0 = V(u);
        Vector out = Vector::Zero(d);
        for (int i = 0; i < d; ++i) {
            if (X0[i] == 0.0) continue;
            double h = fd_step(u[i]);
            Vector up = u, um = u;
            up[i] += h;
            um[i] -= h;
            out += X0[i] * (V(up) - V(um)) / (2.0 * h);
            for (int k = 0; k < d; ++k)
                for (int j = 0; j < d; ++j) out[k] += gam(k, i, j) * X0[i] * V0[j];
        }
        return out;
    };
    Matrix g = chart.induced_metric(u).entries();
    return xdot - nabla(Y).dot(g * Z(u)) - Y(u).dot(g * nabla(Z));
}

namespace {

struct Expectation {
    double value = 0.0;
    double tol = 0.0;
    std::string basis;
};

std::map<std::string, Expectation> load_expectations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open expectations file '" + path + "'", 0);
    std::string line;
    if (!std::getline(in, line) || line.rfind("nullgeo-expect v1", 0) != 0)
        throw ParseError("expectations file must start with 'nullgeo-expect v1'", 1);
    std::map<std::string, Expectation> out;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        std::string stripped = line.substr(0, line.find('#'));
        std::istringstream ls(stripped);
        std::string head;
        if (!(ls >> head)) continue;
        if (head != "expect")
            throw ParseError("expectations line " + std::to_string(number) +
                                 ": expected 'expect <id> <value> <tol> <basis>'",
                             number);
        std::string id, basis;
        double value = 0.0, tol = 0.0;
        if (!(ls >> id >> value >> tol >> basis))
            throw ParseError("expectations line " + std::to_string(number) + ": malformed entry",
                             number);
        out[id] = Expectation{value, tol, basis};
    }
    return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Splits "name(r=2)" into name and radius.
bool split_radius(const std::string& id, std::string* name, double* r) {
    auto pos = id.find("(r=");
    if (pos == std::string::npos) return false;
    auto end = id.find(')', pos);
    if (end == std::string::npos) return false;
    *name = id.substr(0, pos);
    *r = std::stod(id.substr(pos + 3, end - pos - 3));
    return true;
}

const Vector& point_with_radius(const DefFile& def, double r) {
    for (const auto& [name, v] : def.points)
        if (std::abs(v[0] - r) < 1e-12) return v;
    throw PreconditionError("fixture has no sample point with r = " + format_double(r));
}

int component_index(const std::string& comp) {
    if (comp == "r") return 0;
    if (comp == "theta") return 1;
    if (comp == "z") return 2;
    throw PreconditionError("unknown cylindrical component '" + comp + "'");
}

}  // namespace

GoldenResult run_golden(const std::string& fixtures_dir) {
    GoldenResult result;

    DefFile cone = DefFile::load(fixtures_dir + "/lightcone.def");
    DefFile cone_cart = DefFile::load(fixtures_dir + "/lightcone_cartesian.def");
    DefFile plane = DefFile::load(fixtures_dir + "/plane.def");
    DefFile nabla0 = DefFile::load(fixtures_dir + "/cone_nabla0.def");
    auto expectations = load_expectations(fixtures_dir + "/lightcone.expected");

    const HypersurfaceChart& chart = *cone.chart;
    const AmbientManifold& amb = chart.ambient();
    std::vector<Vector> cone_points = cone.point_values();

    // Frame fields of the worked example, in cylindrical components:
    // xi = d_r + d_z, the normalized angular field (0, 1/r^2, 0), and d_z.
    std::vector<std::string> cyl = amb.coords();
    VectorField XI{{constant_field(1.0, cyl), constant_field(0.0, cyl), constant_field(1.0, cyl)}};
    VectorField DTHN{{constant_field(0.0, cyl), ExprField::parse("1/r^2", cyl),
                      constant_field(0.0, cyl)}};
    VectorField DZ{{constant_field(0.0, cyl), constant_field(0.0, cyl), constant_field(1.0, cyl)}};
    // The fixture's frame change between the normalized angular field and the
    // coordinate field d_theta of the chart: dthn = (1/r^2) * d_theta.
    result.notes.push_back("frame change: normalized angular field = (1/r^2) * coordinate d_theta");

    UmbilicReport umbilic = diagnose_umbilic(chart, cone_points, 1e-6, 1e-6);
    UmbilicReport umbilic_cart = diagnose_umbilic(*cone_cart.chart, cone_cart.point_values(),
                                                  1e-6, 1e-6);
    WeylData weyl(chart);

    auto compute = [&](const std::string& id) -> double {
        std::string name;
        double r = 0.0;
        bool has_r = split_radius(id, &name, &r);

        if (has_r && name.rfind("covd.", 0) == 0) {
            // covd.<A>.<B>.<comp>(r=R)
            std::string rest = name.substr(5);
            auto p1 = rest.find('.');
            auto p2 = rest.find('.', p1 + 1);
            std::string a = rest.substr(0, p1);
            std::string b = rest.substr(p1 + 1, p2 - p1 - 1);
            std::string comp = rest.substr(p2 + 1);
            const VectorField& A = (a == "xi") ? XI : DTHN;
            const VectorField& B = (b == "xi") ? XI : DTHN;
            const Vector& u = point_with_radius(cone, r);
            Vector x = chart.map_point(u);
            Vector val = covariant_derivative(amb, A, B, x);
            return val[component_index(comp)];
        }
        if (has_r && name.rfind("metric.", 0) == 0) {
            std::string rest = name.substr(7);
            auto p1 = rest.find('.');
            int a = std::stoi(rest.substr(0, p1));
            int b = std::stoi(rest.substr(p1 + 1));
            const VectorField* fields[3] = {&XI, &DTHN, &DZ};
            const Vector& u = point_with_radius(cone, r);
            Vector x = chart.map_point(u);
            return amb.inner(x, fields[a]->at(x), fields[b]->at(x));
        }
        if (has_r && name == "lambda") {
            for (std::size_t i = 0; i < cone_points.size(); ++i)
                if (std::abs(cone_points[i][0] - r) < 1e-12) return umbilic.lambda[i];
            throw PreconditionError("no umbilic sample at r = " + format_double(r));
        }
        if (id == "umbilic.residual.max") return umbilic.worst_residual;
        if (id == "umbilic.verdict.proper")
            return umbilic.verdict == UmbilicVerdict::ProperTotallyUmbilical ? 1.0 : 0.0;
        if (has_r && name == "theta.xi") {
            const Vector& u = point_with_radius(cone, r);
            Vector theta = weyl.theta_at(u);
            Vector xi_p = radical_direction_param(chart, u);
            return theta.dot(xi_p);
        }
        if (has_r && name.rfind("zeta.", 0) == 0) {
            const Vector& u = point_with_radius(cone, r);
            Vector zeta = weyl.zeta_at(u);
            return zeta[component_index(name.substr(5))];
        }
        if (id == "thm51.alpha_chain.max") {
            double worst = 0.0;
            for (std::size_t i = 0; i < cone_points.size(); ++i) {
                Vector theta = weyl.theta_at(cone_points[i]);
                Vector xi_p = radical_direction_param(chart, cone_points[i]);
                worst = std::max(worst,
                                 std::abs(umbilic.lambda_raw[i] + 0.5 * theta.dot(xi_p)));
            }
            return worst;
        }
        if (id.rfind("nabla0.", 0) == 0) {
            const FramedConnection& conn = *nabla0.connection;
            // 20-point sample grid away from the vertex
            std::vector<Vector> samples;
            for (double rr : {0.6, 0.9, 1.3, 1.8, 2.4})
                for (double th : {0.15, 1.7, 3.3, 5.2}) {
                    Vector u(2);
                    u << rr, th;
                    samples.push_back(u);
                }
            if (id == "nabla0.conformality.max" || id == "nabla0.eq43.max") {
                bool radical_only = id == "nabla0.eq43.max";
                double worst = 0.0;
                for (const Vector& u : samples) {
                    Matrix g = chart.induced_metric(u).entries();
                    Tensor3 gam = conn.gamma(u);
                    Vector omega(2);
                    omega << 2.0 / u[0], 0.0;
                    for (int i = 0; i < 2; ++i) {
                        double h = fd_step(u[i]);
                        Vector up = u, um = u;
                        up[i] += h;
                        um[i] -= h;
                        Matrix dg = (chart.induced_metric(up).entries() -
                                     chart.induced_metric(um).entries()) /
                                    (2.0 * h);
                        for (int j = 0; j < 2; ++j)
                            for (int k = 0; k < 2; ++k) {
                                double v = dg(j, k);
                                for (int l = 0; l < 2; ++l)
                                    v -= gam(l, i, j) * g(l, k) + gam(l, i, k) * g(j, l);
                                if (radical_only) {
                                    if (j == 0 || k == 0) worst = std::max(worst, std::abs(v));
                                } else {
                                    worst = std::max(worst, std::abs(v - omega[i] * g(j, k)));
                                }
                            }
                    }
                }
                return worst;
            }
            if (has_r && name == "nabla0.eq45.xi") {
                Vector u(2);
                u << r, 0.7;
                Vector X0(2);
                X0 << 1.0, 0.0;
                ParamField dthn_param = expr_param_field(
                    {constant_field(0.0, chart.params()),
                     ExprField::parse("1/r^2", chart.params())});
                return framed_nabla_g(conn, chart, u, X0, dthn_param, dthn_param);
            }
        }
        if (has_r && name == "witness.B") {
            NeverWeylWitness w = never_weyl_witness(chart, {point_with_radius(cone, r)});
            if (!w.applicable) throw PreconditionError("witness unexpectedly not applicable");
            return w.B_value;
        }
        if (id == "witness.theta_residual.atleast") {
            NeverWeylWitness w = never_weyl_witness(chart, {point_with_radius(cone, 1.0)});
            return w.best_fit_theta_residual;
        }
        if (id == "plane.B.max") {
            GeodesyReport rep = diagnose_geodesic(*plane.chart, plane.point_values(), 1e-10);
            return rep.worst;
        }
        if (id == "plane.verdict.geodesic") {
            GeodesyReport rep = diagnose_geodesic(*plane.chart, plane.point_values(), 1e-10);
            return rep.totally_geodesic ? 1.0 : 0.0;
        }
        if (id == "plane.rank") {
            RankSignature rs =
                rank_signature(plane.chart->induced_metric(plane.point_values()[0]));
            return rs.rank;
        }
        if (id == "plane.lightlike") {
            try {
                radical_direction_param(*plane.chart, plane.point_values()[0]);
                return 1.0;
            } catch (const NotLightlikeError&) {
                return 0.0;
            }
        }
        if (id == "vertexguard.rejected") {
            Vector u(2);
            u << 1e-4, 0.3;
            try {
                normalizing_pair(chart, u);
                return 0.0;
            } catch (const PreconditionError&) {
                return 1.0;
            }
        }
        if (id == "crosscheck.lambda.diff.max") {
            double worst = 0.0;
            for (std::size_t i = 0; i < umbilic.lambda.size(); ++i)
                worst = std::max(worst, std::abs(umbilic.lambda[i] - umbilic_cart.lambda[i]));
            return worst;
        }
        throw PreconditionError("golden case does not know quantity '" + id + "'");
    };

    result.all_pass = true;
    for (const auto& [id, exp] : expectations) {
        GoldenRow row;
        row.id = id;
        row.expected = exp.value;
        row.tol = exp.tol;
        row.basis = exp.basis;
        row.computed = compute(id);
        if (ends_with(id, ".max"))
            row.pass = row.computed <= exp.tol;
        else if (ends_with(id, ".atleast"))
            row.pass = row.computed >= exp.value;
        else
            row.pass = std::abs(row.computed - exp.value) <= exp.tol;
        if (!row.pass) result.all_pass = false;
        result.rows.push_back(row);
    }
    return result;
}

Report golden_report(const GoldenResult& result, const std::string& fixtures_dir) {
    Report report("golden");
    report.add("fixtures", fixtures_dir);
    for (const auto& row : result.rows) {
        report.add("check." + row.id + ".expected", row.expected);
        report.add("check." + row.id + ".computed", row.computed);
        report.add("check." + row.id + ".tol", row.tol);
        report.add("check." + row.id + ".basis", row.basis);
        report.add("check." + row.id + ".pass", row.pass);
    }
    for (std::size_t i = 0; i < result.notes.size(); ++i)
        report.add("note." + std::to_string(i), result.notes[i]);
    report.add("pass", result.all_pass);
    return report;
}

}  // namespace nullgeo

#include <doctest.h>

#include <cmath>
#include <random>

#include "nullgeo/ambient.hpp"
#include "nullgeo/util.hpp"

using namespace nullgeo;

namespace {

AmbientManifold minkowski_cartesian() {
    std::vector<std::string> c = {"x", "y", "z"};
    std::vector<std::vector<ExprField>> g(3, std::vector<ExprField>(3));
    g[0][0] = constant_field(1, c);
    g[1][1] = constant_field(1, c);
    g[2][2] = constant_field(-1, c);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].empty())
                g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    constant_field(0, c);
    return AmbientManifold(c, g, std::make_pair(2, 1));
}

AmbientManifold minkowski_cylindrical() {
    std::vector<std::string> c = {"r", "theta", "z"};
    std::vector<std::vector<ExprField>> g(3, std::vector<ExprField>(3));
    g[0][0] = constant_field(1, c);
    g[1][1] = ExprField::parse("r^2", c);
    g[2][2] = constant_field(-1, c);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].empty())
                g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    constant_field(0, c);
    return AmbientManifold(c, g);
}

AmbientManifold sphere2() {
    std::vector<std::string> c = {"phi", "theta"};
    std::vector<std::vector<ExprField>> g(2, std::vector<ExprField>(2));
    g[0][0] = constant_field(1, c);
    g[1][1] = ExprField::parse("sin(phi)^2", c);
    g[0][1] = constant_field(0, c);
    g[1][0] = constant_field(0, c);
    return AmbientManifold(c, g);
}

VectorField field(const AmbientManifold& m, std::initializer_list<const char*> comps) {
    VectorField f;
    for (const char* s : comps) f.components.push_back(ExprField::parse(s, m.coords()));
    return f;
}

Vector vec3(double a, double b, double c) {
    Vector v(3);
    v << a, b, c;
    return v;
}

}  // namespace

TEST_CASE("flat Cartesian chart has vanishing Christoffels") {
    AmbientManifold m = minkowski_cartesian();
    Tensor3 g = m.christoffel(vec3(0.4, -1.2, 2.0));
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(std::abs(g(k, i, j)) <= 1e-9);
}

TEST_CASE("cylindrical Christoffels match the classical values") {
    AmbientManifold m = minkowski_cylindrical();
    Vector x = vec3(2.0, 0.9, 0.3);
    Tensor3 g = m.christoffel(x);
    CHECK(g(0, 1, 1) == doctest::Approx(-2.0).epsilon(1e-6));   // r_thth = -r
    CHECK(g(1, 0, 1) == doctest::Approx(0.5).epsilon(1e-6));    // th_rth = 1/r
    CHECK(g(1, 1, 0) == g(1, 0, 1));                            // exact symmetry
    CHECK(std::abs(g(2, 1, 1)) <= 1e-6);
}

TEST_CASE("sphere Christoffel phi_thth = -sin cos") {
    AmbientManifold m = sphere2();
    Vector x(2);
    x << M_PI / 4, 1.1;
    Tensor3 g = m.christoffel(x);
    CHECK(g(0, 1, 1) == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(g(1, 0, 1) == doctest::Approx(1.0).epsilon(1e-6));  // cot(pi/4)
}

TEST_CASE("Dbar of the cone frame fields, cylindrical components") {
    AmbientManifold m = minkowski_cylindrical();
    VectorField xi = field(m, {"1", "0", "1"});
    VectorField dthn = field(m, {"0", "1/r^2", "0"});

    for (double r : {1.0, 2.0}) {
        Vector x = vec3(r, 0.7, r);
        Vector dxixi = covariant_derivative(m, xi, xi, x);
        CHECK(dxixi.cwiseAbs().maxCoeff() <= 1e-6);

        Vector a = covariant_derivative(m, xi, dthn, x);      // -(1/r) dthn
        CHECK(a[0] == doctest::Approx(0.0).epsilon(1e-6));
        CHECK(a[1] == doctest::Approx(-1.0 / (r * r * r)).epsilon(1e-6));
        CHECK(a[2] == doctest::Approx(0.0).epsilon(1e-6));

        Vector b = covariant_derivative(m, dthn, xi, x);      // +(1/r) dthn
        CHECK(b[1] == doctest::Approx(1.0 / (r * r * r)).epsilon(1e-6));

        Vector c = covariant_derivative(m, dthn, dthn, x);    // -(1/r^3) d_r
        CHECK(c[0] == doctest::Approx(-1.0 / (r * r * r)).epsilon(1e-6));
        CHECK(std::abs(c[1]) <= 1e-6);
        CHECK(std::abs(c[2]) <= 1e-6);

        // torsion-freeness ties the two mixed derivatives to the bracket
        Vector br = lie_bracket(xi, dthn, x);
        CHECK((a - b - br).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("Dbar of constant Cartesian fields vanishes in flat space") {
    AmbientManifold m = minkowski_cartesian();
    VectorField cst = field(m, {"0.3", "-1.1", "0.7"});
    Vector v = covariant_derivative(m, cst, cst, vec3(0.2, 0.4, -0.9));
    CHECK(v.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("lie brackets: coordinate fields, antisymmetry, angular fields") {
    AmbientManifold cart = minkowski_cartesian();
    VectorField dx = field(cart, {"1", "0", "0"});
    VectorField dy = field(cart, {"0", "1", "0"});
    CHECK(lie_bracket(dx, dy, vec3(0.5, 1.0, -0.3)).cwiseAbs().maxCoeff() <= 1e-10);

    VectorField X = field(cart, {"sin(x)*y", "x - z^2", "exp(0.2*y)"});
    CHECK(lie_bracket(X, X, vec3(0.4, 0.8, 0.1)).cwiseAbs().maxCoeff() <= 1e-9);

    // Cartesian components of the cylindrical radial field and two angular
    // scalings of it: d_r = (x/r, y/r, 0).
    VectorField dr = field(cart, {"x/sqrt(x^2+y^2)", "y/sqrt(x^2+y^2)", "0"});
    // Eq.-40-style normalized field (1/r^2) d_theta_coord = (-y/r^2, x/r^2, 0):
    VectorField dthn = field(cart, {"-y/(x^2+y^2)", "x/(x^2+y^2)", "0"});
    // unit angular field (-sin, cos, 0):
    VectorField dthu = field(cart, {"-y/sqrt(x^2+y^2)", "x/sqrt(x^2+y^2)", "0"});

    double r = 1.0, th = 0.6;
    Vector x = vec3(r * std::cos(th), r * std::sin(th), 0.0);
    // [d_r, normalized field] = -(2/r) * normalized field
    Vector b1 = lie_bracket(dr, dthn, x);
    Vector expect1 = -(2.0 / r) * dthn.at(x);
    CHECK((b1 - expect1).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK(b1[0] == doctest::Approx(2 * std::sin(th)).epsilon(1e-6));
    CHECK(b1[1] == doctest::Approx(-2 * std::cos(th)).epsilon(1e-6));
    // [d_r, unit field] = -(1/r) * unit field: components (sin, -cos, 0) at r=1
    Vector b2 = lie_bracket(dr, dthu, x);
    CHECK(b2[0] == doctest::Approx(std::sin(th)).epsilon(1e-6));
    CHECK(b2[1] == doctest::Approx(-std::cos(th)).epsilon(1e-6));
}

TEST_CASE("property: metric compatibility and torsion-freeness of Dbar") {
    AmbientManifold m = minkowski_cylindrical();
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> d(0.6, 2.4);
    VectorField X = field(m, {"sin(theta) + r", "1/r", "0.3*z"});
    VectorField Y = field(m, {"cos(z)", "r - theta*0.1", "1"});
    VectorField Z = field(m, {"0.5", "sin(r)", "theta*0.2"});
    for (int t = 0; t < 20; ++t) {
        Vector x = vec3(d(rng), d(rng), d(rng));
        // torsion: Dbar_X Y - Dbar_Y X - [X, Y]
        Vector tor = covariant_derivative(m, X, Y, x) - covariant_derivative(m, Y, X, x) -
                     lie_bracket(X, Y, x);
        CHECK(tor.cwiseAbs().maxCoeff() <= 1e-5);

        // compatibility: X.g(Y,Z) = g(Dbar_X Y, Z) + g(Y, Dbar_X Z)
        Vector Xv = X.at(x);
        double xdot = 0.0;
        for (int i = 0; i < 3; ++i) {
            double h = fd_step(x[i]);
            Vector xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            xdot += Xv[i] *
                    (m.inner(xp, Y.at(xp), Z.at(xp)) - m.inner(xm, Y.at(xm), Z.at(xm))) /
                    (2.0 * h);
        }
        double rhs = m.inner(x, covariant_derivative(m, X, Y, x), Z.at(x)) +
                     m.inner(x, Y.at(x), covariant_derivative(m, X, Z, x));
        CHECK(xdot == doctest::Approx(rhs).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("singular metric raises a precondition error") {
    AmbientManifold m = minkowski_cylindrical();
    CHECK_THROWS_AS(m.metric_inverse_at(vec3(0.0, 0.3, 0.1)), PreconditionError);
}

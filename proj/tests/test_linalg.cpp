#include <doctest.h>

#include <random>

#include "nullgeo/linalg.hpp"

using namespace nullgeo;

namespace {
Matrix mat3(std::initializer_list<double> v) {
    Matrix m(3, 3);
    int i = 0;
    for (double x : v) m(i / 3, i % 3) = x, ++i;
    return m;
}
}  // namespace

TEST_CASE("frame matrix of the null-cone example: rank 3, signature (2,1)") {
    // [[0,0,-1],[0,1,0],[-1,0,-1]]: eigenvalues 1 and the roots of x^2+x-1,
    // i.e. +0.618..., -1.618... by hand
    SymBilinearForm f(mat3({0, 0, -1, 0, 1, 0, -1, 0, -1}));
    RankSignature rs = rank_signature(f, 1e-9);
    CHECK(rs.rank == 3);
    CHECK(rs.positives == 2);
    CHECK(rs.negatives == 1);
}

TEST_CASE("degenerate forms") {
    SymBilinearForm zero3(Matrix::Zero(3, 3));
    CHECK(rank_signature(zero3) == RankSignature{0, 0, 0});
    CHECK(null_space(zero3).size() == 3);

    Matrix m(2, 2);
    m << 0, 0, 0, 0.25;  // induced cone metric in the normalized frame at r=2
    SymBilinearForm g(m);
    RankSignature rs = rank_signature(g);
    CHECK(rs.rank == 1);
    CHECK(rs.positives == 1);
    CHECK(rs.negatives == 0);
    auto kernel = null_space(g);
    REQUIRE(kernel.size() == 1);
    CHECK(std::abs(kernel[0][0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(kernel[0][1]) == doctest::Approx(0.0).epsilon(1e-12));

    SymBilinearForm id(Matrix::Identity(4, 4));
    CHECK(null_space(id).empty());
    SymBilinearForm zero2(Matrix::Zero(2, 2));
    CHECK(null_space(zero2).size() == 2);
}

TEST_CASE("solve and pseudo_solve contracts") {
    Matrix I = Matrix::Identity(3, 3);
    Vector b(3);
    b << 1, -2, 0.5;
    CHECK((solve(I, b) - b).norm() == doctest::Approx(0.0).epsilon(1e-14));

    Matrix S(2, 2);
    S << 1, 0, 0, 0;
    Vector c(2);
    c << 2, 0;
    Vector x = solve(S, c);  // singular but consistent: minimal norm (2, 0)
    CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(0.0).epsilon(1e-12));

    Vector bad(2);
    bad << 2, 3;
    CHECK_THROWS_AS(solve(S, bad), ToleranceError);
    LeastSquares ls = pseudo_solve(S, bad);
    CHECK(ls.residual == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(ls.x[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("transversal system of the cone at r=1 solved least-norm") {
    // gbar = diag(1,1,-1); rows gbar(V, .) for W = (0,1,0) and xi = (1,0,1);
    // constraints V2 = 0, V1 - V3 = 1 -> least-norm V = (1/2, 0, -1/2)
    Matrix A(2, 3);
    A << 0, 1, 0, 1, 0, 1;
    Matrix G(3, 3);
    G << 1, 0, 0, 0, 1, 0, 0, 0, -1;
    Matrix rows = A * G;
    Vector rhs(2);
    rhs << 0, 1;
    LeastSquares ls = pseudo_solve(rows, rhs);
    CHECK(ls.residual == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ls.x[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ls.x[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ls.x[2] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("property: rank + nullity = dim and kernel orthogonality") {
    std::mt19937 rng(23);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 2 + trial % 5;
        int r = trial % (n + 1);
        Matrix U = Matrix::Zero(n, std::max(r, 1));
        if (r > 0)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < r; ++j) U(i, j) = d(rng);
        SymBilinearForm f(r > 0 ? Matrix(U * U.transpose()) : Matrix(Matrix::Zero(n, n)));
        RankSignature rs = rank_signature(f);
        auto kernel = null_space(f);
        CHECK(rs.rank + static_cast<int>(kernel.size()) == n);
        double fn = f.entries().norm();
        for (const auto& v : kernel)
            for (int j = 0; j < n; ++j) {
                Vector w = Vector::Unit(n, j);
                CHECK(std::abs(f(v, w)) <= 10 * 1e-9 * std::max(fn, 1.0));
            }
    }
}

TEST_CASE("property: signature is a congruence invariant (Sylvester)") {
    std::mt19937 rng(37);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix A(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) A(i, j) = d(rng);
        SymBilinearForm f(Matrix(A + A.transpose()));
        Matrix S;
        do {
            S.resize(4, 4);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) S(i, j) = d(rng);
        } while (std::abs(S.determinant()) < 0.1);
        SymBilinearForm g(Matrix(S.transpose() * f.entries() * S));
        CHECK(rank_signature(f) == rank_signature(g));
    }
}

TEST_CASE("orthonormal completion starts with the given direction") {
    Vector v(3);
    v << 3, 0, 4;
    Matrix Q = orthonormal_completion(v);
    CHECK((Q * Q.transpose() - Matrix::Identity(3, 3)).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK((Q.col(0) - v / 5.0).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

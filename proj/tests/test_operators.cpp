#include <doctest.h>

#include <array>
#include <numbers>

#include "ctkrylov/operators.hpp"
#include "oracles.hpp"

using namespace ctk;

namespace {

ConeGeometry parallel2d_geometry(int n, int n_angles, int nu = 0) {
    ConeGeometry g;
    g.mode = BeamMode::parallel2d;
    g.vol = {n, n, 1, 1.0};
    g.origin_to_detector = double(n);
    g.detector_pixel_size = 1.0;
    g.nu = nu > 0 ? nu : (3 * n) / 2;
    g.nv = 1;
    g.angles = equidistant_angles(n_angles);
    return g;
}

}  // namespace

TEST_CASE("forward_project: zero volume gives zero projections") {
    ConeGeometry g = parallel2d_geometry(16, 12);
    Volume<double> vol(g.vol);
    const auto proj = forward_project(vol, g);
    for (double v : proj.data) CHECK(v == 0.0);
}

TEST_CASE("forward_project: axis-aligned ray integrates a constant row exactly") {
    const int n = 5;
    const double h = 0.7, c = 1.3;
    ConeGeometry g;
    g.mode = BeamMode::parallel2d;
    g.vol = {n, n, 1, h};
    g.origin_to_detector = n * h;
    g.detector_pixel_size = h;
    g.nu = n;  // odd: the centre pixel's ray passes through a row of voxel centres
    g.nv = 1;
    g.angles = {0.0};
    Volume<double> vol(g.vol);
    std::fill(vol.data.begin(), vol.data.end(), c);
    const auto proj = forward_project(vol, g);
    CHECK(proj.at(0, n / 2, 0) == doctest::Approx(n * h * c).epsilon(1e-12));
}

TEST_CASE("forward_project: impulse response equals the ray-box chord length") {
    const double h = 0.9;
    const double theta = 0.3;

    SUBCASE("parallel2d oblique ray through the centre voxel") {
        const int n = 7;
        ConeGeometry g;
        g.mode = BeamMode::parallel2d;
        g.vol = {n, n, 1, h};
        g.origin_to_detector = n * h;
        g.detector_pixel_size = h;
        g.nu = 1;  // single ray through the origin
        g.nv = 1;
        g.angles = {theta};
        Volume<double> vol(g.vol);
        vol.at(n / 2, n / 2, 0) = 1.0;
        const auto proj = forward_project(vol, g);

        const std::array<double, 3> origin{0.0, 0.0, 0.0};
        const std::array<double, 3> dir{-std::cos(theta), -std::sin(theta), 0.0};
        const std::array<double, 3> lo{-h / 2, -h / 2, -h / 2};
        const std::array<double, 3> hi{h / 2, h / 2, h / 2};
        const double chord = oracle::ray_box_chord(origin, dir, lo, hi);
        CHECK(proj.data[0] == doctest::Approx(chord).epsilon(1e-12));
    }

    SUBCASE("cone3d central ray through the centre voxel") {
        const int n = 7;
        ConeGeometry g;
        g.mode = BeamMode::cone3d;
        g.vol = {n, n, n, h};
        g.source_to_origin = 4.0 * n * h;
        g.origin_to_detector = 2.0 * n * h;
        g.detector_pixel_size = h;
        g.nu = 1;
        g.nv = 1;
        g.angles = {theta};
        Volume<double> vol(g.vol);
        vol.at(n / 2, n / 2, n / 2) = 1.0;
        const auto proj = forward_project(vol, g);

        const std::array<double, 3> origin{g.source_to_origin * std::cos(theta),
                                           g.source_to_origin * std::sin(theta), 0.0};
        std::array<double, 3> dir{-origin[0], -origin[1], 0.0};
        const double norm = std::hypot(dir[0], dir[1]);
        dir[0] /= norm;
        dir[1] /= norm;
        const std::array<double, 3> lo{-h / 2, -h / 2, -h / 2};
        const std::array<double, 3> hi{h / 2, h / 2, h / 2};
        const double chord = oracle::ray_box_chord(origin, dir, lo, hi);
        CHECK(proj.data[0] == doctest::Approx(chord).epsilon(1e-12));
    }
}

TEST_CASE("forward_project: shape and geometry validation") {
    ConeGeometry g = parallel2d_geometry(16, 4);
    Volume<double> wrong(8, 8, 1, 1.0);
    CHECK_THROWS_AS(forward_project(wrong, g), DimensionError);

    ConeGeometry inside = g;
    inside.mode = BeamMode::cone3d;
    inside.source_to_origin = 2.0;  // well inside the 16-voxel volume
    Volume<double> vol(inside.vol);
    CHECK_THROWS_AS(forward_project(vol, inside), GeometryError);
}

TEST_CASE("forward_project: linearity to near machine precision") {
    ConeGeometry g = parallel2d_geometry(24, 10);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    Volume<double> x(g.vol), y(g.vol);
    for (auto& v : x.data) v = dist(rng);
    for (auto& v : y.data) v = dist(rng);
    const double a = 1.7, b = -0.4;
    Volume<double> comb(g.vol);
    for (std::size_t i = 0; i < comb.data.size(); ++i) comb.data[i] = a * x.data[i] + b * y.data[i];

    const auto pc = forward_project(comb, g);
    const auto px = forward_project(x, g);
    const auto py = forward_project(y, g);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pc.data.size(); ++i) {
        const double want = a * px.data[i] + b * py.data[i];
        num += (pc.data[i] - want) * (pc.data[i] - want);
        den += want * want;
    }
    CHECK(std::sqrt(num / den) < 1e-10);
}

TEST_CASE("forward_project: angles theta and theta + 2*pi agree bitwise") {
    // Dyadic angles make theta + 2*pi exactly representable, so the canonical
    // reduction recovers theta without rounding.
    for (double theta : {0.0, 0.5, 1.25, 5.0}) {
        ConeGeometry g1 = parallel2d_geometry(16, 1);
        g1.angles = {theta};
        ConeGeometry g2 = g1;
        g2.angles = {theta + 2.0 * std::numbers::pi};
        Volume<double> vol(g1.vol);
        std::mt19937_64 rng(11);
        std::normal_distribution<double> dist;
        for (auto& v : vol.data) v = dist(rng);
        const auto p1 = forward_project(vol, g1);
        const auto p2 = forward_project(vol, g2);
        CHECK(p1.angles[0] == p2.angles[0]);
        for (std::size_t i = 0; i < p1.data.size(); ++i) CHECK(p1.data[i] == p2.data[i]);
    }
}

TEST_CASE("back_project: zero projections give a zero volume") {
    ConeGeometry g = parallel2d_geometry(16, 8);
    ProjectionSet<double> proj(g.angles, g.nu, g.nv);
    for (auto variant : {BackprojectVariant::matched, BackprojectVariant::voxel_driven}) {
        const auto vol = back_project(proj, g, variant);
        for (double v : vol.data) CHECK(v == 0.0);
    }
}

TEST_CASE("back_project: matched variant passes the adjoint test, voxel-driven fails it") {
    ConeGeometry g = parallel2d_geometry(32, 24);
    const auto matched = projector_pair<double>(g, BackprojectVariant::matched);
    CHECK(oracle::adjoint_discrepancy(matched, 100, 42) < 1e-10);

    const auto unmatched = projector_pair<double>(g, BackprojectVariant::voxel_driven);
    CHECK(oracle::adjoint_discrepancy(unmatched, 20, 43) > 1e-3);
}

TEST_CASE("back_project: matched adjointness holds for cone3d as well") {
    ConeGeometry g;
    g.mode = BeamMode::cone3d;
    g.vol = {12, 12, 12, 1.0};
    g.source_to_origin = 30.0;
    g.origin_to_detector = 12.0;
    g.detector_pixel_size = 1.5;
    g.nu = g.nv = 18;
    g.angles = equidistant_angles(9);
    const auto pair = projector_pair<double>(g, BackprojectVariant::matched);
    CHECK(oracle::adjoint_discrepancy(pair, 25, 4) < 1e-10);
}

TEST_CASE("back_project: shape mismatch raises") {
    ConeGeometry g = parallel2d_geometry(16, 8);
    ProjectionSet<double> proj(equidistant_angles(4), g.nu, 1);
    CHECK_THROWS_AS(back_project(proj, g, BackprojectVariant::matched), DimensionError);
}

TEST_CASE("gradient: constants, ramps, and the dense oracle") {
    SUBCASE("constant volume has zero gradient") {
        Volume<double> vol(9, 7, 3, 1.0);
        std::fill(vol.data.begin(), vol.data.end(), 4.2);
        const auto g = gradient(vol);
        for (std::size_t i = 0; i < g.dx.size(); ++i) {
            CHECK(g.dx[i] == 0.0);
            CHECK(g.dy[i] == 0.0);
            CHECK(g.dz[i] == 0.0);
        }
    }
    SUBCASE("ramp along x: interior differences equal the slope, far boundary zero") {
        const double s = 0.25;
        Volume<double> vol(6, 4, 1, 1.0);
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 6; ++i) vol.at(i, j, 0) = s * i;
        const auto g = gradient(vol);
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 6; ++i) {
                const std::size_t idx = std::size_t(i) + 6 * std::size_t(j);
                CHECK(g.dx[idx] == doctest::Approx(i + 1 < 6 ? s : 0.0));
            }
    }
    SUBCASE("random 8^3 volume matches the dense difference matrix") {
        Volume<double> vol(8, 8, 8, 1.0);
        std::mt19937_64 rng(5);
        std::normal_distribution<double> dist;
        for (auto& v : vol.data) v = dist(rng);
        const Eigen::MatrixXd d = oracle::dense_gradient_matrix(8, 8, 8);
        const Eigen::VectorXd want = d * oracle::to_eigen(vol.data);
        const auto g = gradient(vol);
        const int m = 8 * 8 * 8;
        for (int i = 0; i < m; ++i) {
            CHECK(g.dx[std::size_t(i)] == doctest::Approx(want(i)).epsilon(1e-12));
            CHECK(g.dy[std::size_t(i)] == doctest::Approx(want(m + i)).epsilon(1e-12));
            CHECK(g.dz[std::size_t(i)] == doctest::Approx(want(2 * m + i)).epsilon(1e-12));
        }
    }
}

TEST_CASE("gradient_adjoint: exact transpose of gradient") {
    const VolumeShape shape{8, 8, 8, 1.0};
    SUBCASE("zero field maps to zero") {
        GradientField<double> g(shape);
        const auto vol = gradient_adjoint(g);
        for (double v : vol.data) CHECK(v == 0.0);
    }
    SUBCASE("adjoint identity on random inputs") {
        std::mt19937_64 rng(17);
        std::normal_distribution<double> dist;
        Volume<double> x(shape);
        for (auto& v : x.data) v = dist(rng);
        GradientField<double> y(shape);
        for (auto& v : y.dx) v = dist(rng);
        for (auto& v : y.dy) v = dist(rng);
        for (auto& v : y.dz) v = dist(rng);

        const auto gx = gradient(x);
        const auto aty = gradient_adjoint(y);
        double lhs = 0.0;
        for (std::size_t i = 0; i < gx.dx.size(); ++i)
            lhs += gx.dx[i] * y.dx[i] + gx.dy[i] * y.dy[i] + gx.dz[i] * y.dz[i];
        double rhs = 0.0;
        for (std::size_t i = 0; i < x.data.size(); ++i) rhs += x.data[i] * aty.data[i];
        CHECK(std::abs(lhs - rhs) / std::abs(lhs) < 1e-12);
    }
    SUBCASE("single-entry field reproduces a column of the dense transpose") {
        const Eigen::MatrixXd d = oracle::dense_gradient_matrix(8, 8, 8);
        const int m = 8 * 8 * 8;
        const int pick = 3 + 8 * (4 + 8 * 2);
        GradientField<double> y(shape);
        y.dy[std::size_t(pick)] = 1.0;  // row m + pick of D
        const auto vol = gradient_adjoint(y);
        const Eigen::VectorXd want = d.transpose().col(m + pick);
        for (int i = 0; i < m; ++i)
            CHECK(vol.data[std::size_t(i)] == doctest::Approx(want(i)).epsilon(1e-12));
    }
}

TEST_CASE("gradient nullspace: D^T D is symmetric positive semidefinite (dense 8^3)") {
    const VolumeShape shape{8, 8, 8, 1.0};
    const int m = int(shape.size());
    Eigen::MatrixXd dtd(m, m);
    for (int j = 0; j < m; ++j) {
        Volume<double> e(shape);
        e.data[std::size_t(j)] = 1.0;
        const auto col = gradient_adjoint(gradient(e));
        for (int i = 0; i < m; ++i) dtd(i, j) = col.data[std::size_t(i)];
    }
    CHECK((dtd - dtd.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dtd);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("dense_pair: identity, hand product, exact adjoint") {
    SUBCASE("identity") {
        DenseMatrix<double> eye(5, 5);
        for (int i = 0; i < 5; ++i) eye(std::size_t(i), std::size_t(i)) = 1.0;
        const auto pair = dense_pair(std::move(eye));
        std::vector<double> x{1, -2, 3, 0.5, 4};
        const auto y = pair.apply_forward(cspan(x));
        for (int i = 0; i < 5; ++i) CHECK(y[std::size_t(i)] == x[std::size_t(i)]);
    }
    SUBCASE("3x2 against a hand-computed product") {
        DenseMatrix<double> m(3, 2);
        m(0, 0) = 1;  m(0, 1) = 2;
        m(1, 0) = -3; m(1, 1) = 0.5;
        m(2, 0) = 0;  m(2, 1) = 4;
        const auto pair = dense_pair(std::move(m));
        std::vector<double> x{2, -1};
        const auto y = pair.apply_forward(cspan(x));
        CHECK(y[0] == doctest::Approx(0.0));
        CHECK(y[1] == doctest::Approx(-6.5));
        CHECK(y[2] == doctest::Approx(-4.0));
        std::vector<double> z{1, 1, 1};
        const auto bt = pair.apply_back(cspan(z));
        CHECK(bt[0] == doctest::Approx(-2.0));
        CHECK(bt[1] == doctest::Approx(6.5));
    }
    SUBCASE("adjoint identity is exact by construction") {
        const auto pair = dense_pair(oracle::to_dense<double>(oracle::random_matrix(7, 4, 3)));
        CHECK(oracle::adjoint_discrepancy(pair, 50, 9) < 1e-14);
    }
    SUBCASE("non-finite entries rejected") {
        DenseMatrix<double> m(2, 2);
        m(0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(dense_pair(std::move(m)), ParameterError);
    }
}

TEST_CASE("augment_tikhonov: stacked operator semantics") {
    const Eigen::MatrixXd a = oracle::random_matrix(4, 3, 21);
    const auto base = dense_pair(oracle::to_dense<double>(a));

    SUBCASE("negative lambda rejected") {
        CHECK_THROWS_AS(augment_tikhonov(base, -1.0), ParameterError);
    }
    SUBCASE("lambda = 0 leaves the identity block empty") {
        const auto aug = augment_tikhonov(base, 0.0);
        std::vector<double> x{1.0, -2.0, 0.5};
        const auto y = aug.apply_forward(cspan(x));
        for (std::size_t i = 4; i < 7; ++i) CHECK(y[i] == 0.0);
    }
    SUBCASE("lambda = 2 matches the dense stacked matrix") {
        const double lam = 2.0;
        const auto aug = augment_tikhonov(base, lam);
        Eigen::MatrixXd stacked(7, 3);
        stacked << a, lam * Eigen::MatrixXd::Identity(3, 3);
        const Eigen::VectorXd x = oracle::random_vector(3, 8);
        const Eigen::VectorXd want = stacked * x;
        const auto got = aug.apply_forward(cspan(oracle::to_std<double>(x)));
        for (int i = 0; i < 7; ++i) CHECK(got[std::size_t(i)] == doctest::Approx(want(i)).epsilon(1e-13));
    }
    SUBCASE("normal-equations identity B_aug(A_aug x) = A^T A x + lambda^2 x") {
        const double lam = 1.7;
        const auto aug = augment_tikhonov(base, lam);
        const Eigen::VectorXd x = oracle::random_vector(3, 12);
        const auto fwd = aug.apply_forward(cspan(oracle::to_std<double>(x)));
        const auto got = aug.apply_back(cspan(fwd));
        const Eigen::VectorXd want = a.transpose() * (a * x) + lam * lam * x;
        for (int i = 0; i < 3; ++i) CHECK(got[std::size_t(i)] == doctest::Approx(want(i)).epsilon(1e-12));
    }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "scloss/tables.hpp"
#include "scloss/unified_model.hpp"
#include "test_util.hpp"

using namespace scloss;

TEST_CASE("term intermediates") {
    SUBCASE("sigmoid midpoint when mu3*gamma + mu4 = 0") {
        TermParams t{0.0, 0.0, 2.0, -6.0, 0.0, 0.0};
        CHECK(term_intermediates(t, 3.0, 1.0).sigma == 0.5);
    }
    SUBCASE("mu5 = mu6 = 0 gives eta = beta = 1") {
        TermParams t{1.0, 2.0, 0.3, 0.4, 0.0, 0.0};
        auto ti = term_intermediates(t, 1.0, 7.0);
        CHECK(ti.eta == 1.0);
        CHECK(ti.beta == 1.0);
    }
    SUBCASE("published accuracy term, frozen independent arithmetic") {
        TermParams t{0.0, 0.0, 0.859, 2.765, -1.475e-3, 0.008};
        auto ti = term_intermediates(t, 8.0, 2.0);
        CHECK(ti.sigma == doctest::Approx(0.9999347356926743).epsilon(1e-14));
        CHECK(ti.eta == doctest::Approx(0.9970543469744245).epsilon(1e-14));
        CHECK(ti.beta == doctest::Approx(1.0130543469744244).epsilon(1e-14));
    }
    SUBCASE("extreme arguments are clamped to finite values") {
        TermParams t{0.0, 0.0, 1e6, 0.0, 1e6, 0.0};
        auto ti = term_intermediates(t, 100.0, 100.0);
        CHECK(ti.sigma > 0.0);
        CHECK(ti.sigma <= 1.0); // saturates to 1.0 in double once exp underflows past 1 ulp
        CHECK(std::isfinite(ti.eta));
        CHECK(std::isfinite(ti.beta));

        TermParams mild{0.0, 0.0, 3.0, 0.0, 0.0, 0.0};
        CHECK(term_intermediates(mild, 8.0, 1.0).sigma < 1.0);
        CHECK(term_intermediates(mild, -8.0, 1.0).sigma > 0.0);
    }
}

TEST_CASE("eval_point basics") {
    UnifiedParams p;
    p.mu0 = 5.0;
    CHECK(eval_point(p, -3.0, 2.0) == 5.0);
    CHECK(eval_point(p, 8.0, 12.0) == 5.0);

    UnifiedParams one;
    one.terms = {{1.0, 0.0, 0.7, -0.3, 0.0, 0.0}};
    CHECK(eval_point(one, -5.0, 3.0) == 1.0);
    CHECK(eval_point(one, 6.0, 11.0) == 1.0);
}

TEST_CASE("published accuracy parameters reproduce the measured corner") {
    const UnifiedParams& p = published_params("evit-accuracy");
    const double v = eval_point(p, 8.0, 2.0);
    CHECK(std::abs(v - 97.7051) <= 2.0);
    CHECK(v == doctest::Approx(97.92630428966015).epsilon(1e-12)); // frozen independent eval
}

TEST_CASE("eval_grid shape and smoke against the published PSNR surface") {
    const MetricGrid& grid = embedded_table("djscc-psnr");
    auto fit = eval_grid(published_params("djscc-psnr"), grid);
    REQUIRE(fit.size() == grid.rows());
    REQUIRE(fit[0].size() == grid.cols());
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < grid.rows(); ++i)
        for (std::size_t j = 0; j < grid.cols(); ++j) {
            const double d = grid.values[i][j] - fit[i][j];
            CHECK(std::abs(d) < 1.0);
            sum_sq += d * d;
        }
    CHECK(std::sqrt(sum_sq / static_cast<double>(grid.cells())) < 0.5);

    UnifiedParams zero;
    auto zeros = eval_grid(zero, grid);
    for (const auto& row : zeros)
        for (double v : row)
            CHECK(v == 0.0);
}

TEST_CASE("residuals") {
    auto grid = testutil::constant_grid(3.25);
    UnifiedParams exact;
    exact.mu0 = 3.25;
    for (const auto& row : residuals(exact, grid))
        for (double v : row)
            CHECK(v == 0.0);

    UnifiedParams mean_only;
    mean_only.mu0 = 3.25;
    auto r = residuals(mean_only, grid);
    double sum = 0.0;
    for (const auto& row : r)
        for (double v : row)
            sum += v;
    CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));

    const MetricGrid& acc = embedded_table("evit-accuracy");
    for (const auto& row : residuals(published_params("evit-accuracy"), acc))
        for (double v : row)
            CHECK(std::abs(v) <= 2.0);
}

TEST_CASE("sse") {
    auto ones = testutil::make_grid({0, 1}, {2, 4}, {{1, 1}, {1, 1}});
    UnifiedParams zero;
    CHECK(sse(zero, ones) == 4.0);

    UnifiedParams exact;
    exact.mu0 = 1.0;
    CHECK(sse(exact, ones) == 0.0);

    SUBCASE("equals the residual recomputation exactly") {
        const MetricGrid& acc = embedded_table("evit-accuracy");
        const UnifiedParams& p = published_params("evit-accuracy");
        auto r = residuals(p, acc);
        double direct = 0.0;
        for (const auto& row : r)
            for (double v : row)
                direct += v * v;
        CHECK(sse(p, acc) == direct);
    }
}

TEST_CASE("analytic gradient closed forms") {
    const MetricGrid& acc = embedded_table("evit-accuracy");

    SUBCASE("zero residuals give a zero gradient") {
        auto grid = testutil::constant_grid(7.0);
        UnifiedParams p;
        p.mu0 = 7.0;
        p.terms = {{0.0, 0.0, 0.5, 0.1, -0.02, 0.01}};
        auto g = analytic_gradient(p, grid);
        CHECK(g.d_mu0 == 0.0);
        for (double v : g.d_terms[0])
            CHECK(v == 0.0);
    }
    SUBCASE("d_mu0 is -2 * residual sum") {
        UnifiedParams p;
        p.mu0 = 42.0;
        p.terms = {{1.5, -2.0, 0.4, 0.2, -0.03, 0.05}};
        auto g = analytic_gradient(p, acc);
        double rsum = 0.0;
        for (const auto& row : residuals(p, acc))
            for (double v : row)
                rsum += v;
        CHECK(g.d_mu0 == doctest::Approx(-2.0 * rsum).epsilon(1e-12));
    }
    SUBCASE("all-zero parameters: d_mu0 = -2 * sum(Y)") {
        UnifiedParams p;
        p.terms.assign(2, TermParams{});
        auto g = analytic_gradient(p, acc);
        double ysum = 0.0;
        for (const auto& row : acc.values)
            for (double v : row)
                ysum += v;
        CHECK(g.d_mu0 == doctest::Approx(-2.0 * ysum).epsilon(1e-12));
        const auto fd = finite_diff_gradient_scaled(p, acc);
        CHECK(testutil::close_rel(g.d_mu0, fd.d_mu0));
    }
}

TEST_CASE("analytic gradient matches finite differences on random draws") {
    std::mt19937_64 rng(2024);
    auto u = [&](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    for (const char* name : {"evit-accuracy", "djscc-mse"}) {
        const MetricGrid& grid = embedded_table(name);
        for (int draw = 0; draw < 25; ++draw) {
            UnifiedParams p;
            p.mu0 = u(-50, 150);
            p.terms.resize(3);
            for (auto& t : p.terms)
                t = {u(-20, 20), u(-20, 20), u(-1, 1), u(-2, 2), u(-0.1, 0.05), u(-0.2, 0.2)};
            auto a = analytic_gradient(p, grid);
            auto f = finite_diff_gradient_scaled(p, grid);
            CHECK(testutil::close_rel(a.d_mu0, f.d_mu0));
            for (std::size_t k = 0; k < p.terms.size(); ++k)
                for (int c = 0; c < 6; ++c)
                    CHECK(testutil::close_rel(a.d_terms[k][c], f.d_terms[k][c]));
        }
    }
}

TEST_CASE("finite differences") {
    const MetricGrid& acc = embedded_table("evit-accuracy");
    UnifiedParams p;
    p.mu0 = 80.0;
    p.terms = {{3.0, 6.0, 0.8, 0.1, -0.02, 0.03}};

    SUBCASE("exact on the quadratic mu0 direction") {
        auto a = analytic_gradient(p, acc);
        auto f = finite_diff_gradient(p, acc, 1e-4);
        CHECK(f.d_mu0 == doctest::Approx(a.d_mu0).epsilon(1e-9));
    }
    SUBCASE("halving h shrinks the mu3 truncation error about 4x") {
        auto a = analytic_gradient(p, acc);
        const double e1 = std::abs(finite_diff_gradient(p, acc, 2e-3).d_terms[0][2] -
                                   a.d_terms[0][2]);
        const double e2 = std::abs(finite_diff_gradient(p, acc, 1e-3).d_terms[0][2] -
                                   a.d_terms[0][2]);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
    }
    SUBCASE("rejects non-positive steps") {
        CHECK_THROWS_AS(finite_diff_gradient(p, acc, 0.0), Error);
    }
}

TEST_CASE("model properties") {
    const MetricGrid& acc = embedded_table("evit-accuracy");

    SUBCASE("mu0 shift moves the output by the shift") {
        UnifiedParams p;
        p.mu0 = 12.5;
        UnifiedParams q = p;
        q.mu0 += 0.75;
        CHECK(eval_point(q, 3.0, 4.0) == eval_point(p, 3.0, 4.0) + 0.75);

        UnifiedParams full = published_params("evit-accuracy");
        UnifiedParams shifted = full;
        shifted.mu0 += 1.0;
        CHECK(eval_point(shifted, 2.0, 6.0) ==
              doctest::Approx(eval_point(full, 2.0, 6.0) + 1.0).epsilon(1e-14));
    }
    SUBCASE("all mu2 = 0 makes the surface independent of gamma") {
        UnifiedParams p;
        p.mu0 = 1.0;
        p.terms = {{2.0, 0.0, 0.7, 0.3, -0.04, 0.02}, {-1.0, 0.0, -0.2, 1.0, -0.01, 0.1}};
        const double ref = eval_point(p, -6.0, 8.0);
        for (double g : {-3.0, 0.0, 4.0, 8.0})
            CHECK(eval_point(p, g, 8.0) == ref);
    }
    SUBCASE("term order: exact for two terms, 1e-10 relative for more") {
        UnifiedParams p;
        p.mu0 = 4.0;
        p.terms = {{2.0, 8.0, 0.7, 0.5, -0.03, 0.05}, {-3.0, 5.0, -0.4, 1.0, -0.01, -0.02}};
        UnifiedParams swapped = p;
        std::swap(swapped.terms[0], swapped.terms[1]);
        CHECK(eval_point(p, 2.0, 6.0) == eval_point(swapped, 2.0, 6.0));

        UnifiedParams big = published_params("evit-accuracy");
        UnifiedParams rev = big;
        std::reverse(rev.terms.begin(), rev.terms.end());
        const double a = eval_point(big, 1.0, 4.0);
        const double b = eval_point(rev, 1.0, 4.0);
        CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), std::abs(b)));
    }
    SUBCASE("linear gamma scale equals manual conversion") {
        UnifiedParams p = published_params("evit-accuracy");
        UnifiedParams as_db = p;
        as_db.gamma_scale = GammaScale::db;
        for (double g : {-6.0, 0.0, 8.0})
            CHECK(eval_point(p, g, 4.0) == eval_point(as_db, snr_db_to_linear(g), 4.0));
    }
    SUBCASE("gradient check also holds under the linear scale") {
        UnifiedParams p = published_params("evit-accuracy");
        auto a = analytic_gradient(p, acc);
        auto f = finite_diff_gradient_scaled(p, acc);
        CHECK(testutil::close_rel(a.d_mu0, f.d_mu0));
        for (std::size_t k = 0; k < p.terms.size(); ++k)
            for (int c = 0; c < 6; ++c)
                CHECK(testutil::close_rel(a.d_terms[k][c], f.d_terms[k][c]));
    }
}

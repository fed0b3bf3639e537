#include "fabisearch/errors.hpp"
#include "fabisearch/nmf.hpp"
#include "fabisearch/parallel.hpp"
#include "fabisearch/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace fabisearch;

namespace {

Matrix random_positive(Eigen::Index n, Eigen::Index p, std::uint64_t seed, double lo = 0.5, double hi = 5.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix X(n, p);
    for (Eigen::Index k = 0; k < X.size(); ++k) X.data()[k] = u(rng);
    return X;
}

NmfConfig small_config(int nruns = 5) {
    NmfConfig c;
    c.nruns = nruns;
    c.max_iterations = 300;
    return c;
}

}  // namespace

TEST_SUITE("nmf") {

TEST_CASE("kld_loss matches hand-evaluated divergences") {
    Matrix X(2, 2), W(2, 1), H(1, 2);
    X << 3, 4, 6, 8;
    W << 1, 2;
    H << 3, 4;
    CHECK(kld_loss(X, W, H) == doctest::Approx(0.0).epsilon(1e-12));

    Matrix zero(1, 1), one(1, 1), two(1, 1);
    zero << 0;
    one << 1;
    two << 2;
    CHECK(kld_loss(zero, one) == doctest::Approx(1.0));
    CHECK(kld_loss(one, two) == doctest::Approx(std::log(0.5) + 1.0).epsilon(1e-12));
    CHECK(kld_loss(one, two) == doctest::Approx(0.30685).epsilon(1e-4));
}

TEST_CASE("kld_loss errors") {
    Matrix X = Matrix::Ones(2, 2);
    CHECK_THROWS_AS(kld_loss(X, Matrix::Ones(3, 2)), DimensionError);
    CHECK_THROWS_AS(kld_loss(X, Matrix::Ones(2, 1), Matrix::Ones(2, 2)), DimensionError);
    Matrix WH = Matrix::Ones(2, 2);
    WH(1, 0) = 0.0;
    CHECK_THROWS_AS(kld_loss(X, WH), SingularReconstructionError);
    Matrix Xz = X;
    Xz(1, 0) = 0.0;
    CHECK_NOTHROW(kld_loss(Xz, WH));
}

TEST_CASE("kld_loss is zero only for exact factorizations") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Matrix W = random_positive(6, 2, s), H = random_positive(2, 5, s + 100);
        const Matrix X = W * H;
        CHECK(kld_loss(X, W, H) <= 1e-12);
        Matrix Xp = X;
        Xp(s % 6, s % 5) *= 1.01;
        CHECK(kld_loss(Xp, W, H) > 1e-12);
    }
}

TEST_CASE("rank-1 input is recovered") {
    const Matrix u = random_positive(8, 1, 1), v = random_positive(1, 6, 2);
    NmfConfig c;
    const NmfFit fit = nmf_fit_single(u * v, 1, 42, c);
    CHECK(fit.loss <= 1e-6);
}

TEST_CASE("single fit: determinism, reported loss, monotone trace") {
    const Matrix X = random_positive(20, 10, 7);
    NmfConfig c;
    std::vector<double> trace;
    const NmfFit a = nmf_fit_single(X, 3, 99, c, &trace);
    const NmfFit b = nmf_fit_single(X, 3, 99, c);
    CHECK(a.loss == b.loss);
    CHECK(a.W == b.W);
    CHECK(a.iterations == static_cast<int>(trace.size()));
    CHECK(a.loss == doctest::Approx(kld_loss(X, a.W, a.H)).epsilon(1e-9));
    CHECK((a.W.array() >= 0).all());
    CHECK((a.H.array() >= 0).all());
    for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1] + 1e-10);
}

TEST_CASE("single fit errors") {
    NmfConfig c;
    const Matrix X = random_positive(5, 4, 1);
    CHECK_THROWS_AS(nmf_fit_single(X, 4, 1, c), RankError);
    CHECK_THROWS_AS(nmf_fit_single(X, 0, 1, c), RankError);
    CHECK_THROWS_AS(nmf_fit_single(X.topRows(1), 1, 1, c), DegenerateSegmentError);
    Matrix bad = X;
    bad(2, 2) = std::nan("");
    CHECK_THROWS_AS(nmf_fit_single(bad, 2, 1, c), DataError);
    bad(2, 2) = -1.0;
    CHECK_THROWS_AS(nmf_fit_single(bad, 2, 1, c), DataError);
    NmfConfig broken;
    broken.tolerance = 0.0;
    CHECK_THROWS_AS(nmf_fit_single(X, 2, 1, broken), ParameterError);
}

TEST_CASE("best-of-nruns picks the minimum of its constituent runs") {
    const Matrix X = random_positive(15, 8, 3);
    NmfConfig c = small_config(10);
    c.master_seed = 1234;
    const NmfFit best = nmf_fit_best(X, 3, c);
    double min_loss = 1e300;
    int argmin = -1;
    for (int k = 0; k < c.nruns; ++k) {
        const NmfFit f = nmf_fit_single(X, 3, nmf_run_seed(c.master_seed, k), c);
        CHECK(best.loss <= f.loss);
        if (f.loss < min_loss) {
            min_loss = f.loss;
            argmin = k;
        }
    }
    CHECK(best.loss == min_loss);
    CHECK(best.run_index == argmin);

    NmfConfig one = c;
    one.nruns = 1;
    const NmfFit single = nmf_fit_best(X, 3, one);
    CHECK(single.loss == nmf_fit_single(X, 3, nmf_run_seed(c.master_seed, 0), c).loss);
    CHECK(best.loss <= single.loss);
}

TEST_CASE("results do not depend on the thread count") {
    const Matrix X = random_positive(25, 12, 5);
    NmfConfig c = small_config(12);
    c.master_seed = 77;
    c.threads = 1;
    const NmfFit serial = nmf_fit_best(X, 3, c);
    for (int threads : {2, 4, 8}) {
        c.threads = threads;
        const NmfFit parallel = nmf_fit_best(X, 3, c);
        CHECK(parallel.loss == serial.loss);
        CHECK(parallel.run_index == serial.run_index);
        CHECK(parallel.W == serial.W);
    }
}

TEST_CASE("cluster_assign") {
    Matrix H(2, 2);
    H << 0.9, 0.1, 0.1, 0.9;
    CHECK(cluster_assign(H) == std::vector<int>{0, 1});
    Matrix tie(2, 1);
    tie << 0.5, 0.5;
    CHECK(cluster_assign(tie) == std::vector<int>{0});
    const Matrix R = random_positive(4, 30, 9);
    for (double scale : {1e-3, 0.5, 7.0, 1e6}) CHECK(cluster_assign(R * scale) == cluster_assign(R));
    CHECK_THROWS_AS(cluster_assign(Matrix(0, 3)), DataError);
}

TEST_CASE("permute_matrix keeps the entries and dimensions") {
    const Matrix Y = random_positive(30, 7, 11);
    const Matrix A = permute_matrix(Y, 5), B = permute_matrix(Y, 5), C = permute_matrix(Y, 6);
    CHECK(A == B);
    CHECK(A != C);
    CHECK(A.rows() == Y.rows());
    CHECK(A.cols() == Y.cols());
    std::vector<double> a(A.data(), A.data() + A.size()), y(Y.data(), Y.data() + Y.size());
    std::sort(a.begin(), a.end());
    std::sort(y.begin(), y.end());
    CHECK(a == y);
    Matrix one(1, 1);
    one << 3.0;
    CHECK(permute_matrix(one, 1) == one);
}

TEST_CASE("permute_matrix destroys column structure") {
    // Two perfectly separated blocks: rank 2 fits much better than rank 1 on Y,
    // but after permutation rank 2 gains little.
    SimulationSpec spec;
    spec.variables = 12;
    spec.time_points = 60;
    spec.within_corr = 0.9;
    spec.between_corr = 0.0;
    spec.master_seed = 4;
    const Matrix Y = simulate_dataset(spec).data.values();
    const Matrix P = permute_matrix(Y, 8);
    NmfConfig c = small_config(5);
    const double gain_y = nmf_fit_best(Y, 1, c).loss - nmf_fit_best(Y, 2, c).loss;
    const double gain_p = nmf_fit_best(P, 1, c).loss - nmf_fit_best(P, 2, c).loss;
    CHECK(gain_y > 2.0 * gain_p);
}

TEST_CASE("opt_rank result shape and errors") {
    SimulationSpec spec;
    spec.variables = 8;
    spec.time_points = 40;
    spec.master_seed = 2;
    const TimeSeriesMatrix Y = simulate_dataset(spec).data;
    NmfConfig c = small_config(3);
    const OptRankResult r = opt_rank(Y, c);
    CHECK(r.rank >= 2);
    CHECK(r.rank <= r.max_rank);
    CHECK(r.max_rank == 7);
    CHECK(r.loss.size() == r.loss_permuted.size());
    CHECK(r.loss.size() >= 2);
    if (!r.reached_max) {
        const std::size_t k = r.loss.size() - 1;  // the first rank whose decrement lost
        CHECK(r.loss[k - 1] - r.loss[k] < r.loss_permuted[k - 1] - r.loss_permuted[k]);
        CHECK(r.rank == std::max<int>(2, static_cast<int>(k)));
    }
    const OptRankResult again = opt_rank(Y, c);
    CHECK(again.rank == r.rank);
    CHECK(again.loss == r.loss);

    Matrix tiny = Matrix::Constant(2, 2, 1.0);
    tiny(0, 1) = 2.0;
    CHECK_THROWS_AS(opt_rank(TimeSeriesMatrix(tiny), c), DataError);
}

TEST_CASE("time series validation") {
    CHECK_THROWS_AS(TimeSeriesMatrix(Matrix::Ones(1, 3)), DataError);
    Matrix Y = Matrix::Ones(3, 2);
    Y(1, 1) = 0.0;
    CHECK_THROWS_AS(TimeSeriesMatrix{Y}, DataError);
    CHECK(TimeSeriesMatrix(Matrix::Ones(3, 2)).time_points() == 3);
}

TEST_CASE("derive_seed is a pure function of its path") {
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
}

}  // TEST_SUITE

#include <doctest.h>

#include "embcmp/error.hpp"
#include "embcmp/generators.hpp"
#include "embcmp/random.hpp"
#include "embcmp/structure.hpp"
#include "fixtures.hpp"
#include "oracles/brute_force.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

using namespace embcmp;

TEST_CASE("ego feature examples") {
    const Matrix star = compute_ego_features(fixtures::star(4));
    CHECK(star(0, 0) == 4);
    CHECK(star(0, 1) == 0);
    CHECK(star(0, 2) == 0);
    CHECK(star(0, 3) == 0);
    CHECK(star(0, 5) == doctest::Approx(1.6));
    // a leaf reaches the other three leaves in two steps
    CHECK(star(1, 3) == 3);
    CHECK(star(1, 4) == 4);

    const Matrix tri = compute_ego_features(fixtures::complete(3));
    for (std::size_t u = 0; u < 3; ++u) {
        CHECK(tri(u, 0) == 2);
        CHECK(tri(u, 1) == 1);
        CHECK(tri(u, 2) == 1);
        CHECK(tri(u, 6) == 1);
    }
    CHECK(compute_ego_features(fixtures::path(3))(0, 3) == 1);

    const Matrix iso = compute_ego_features(Graph::from_edges(3, std::vector<Edge>{{0, 1}}));
    for (std::size_t j = 0; j < kEgoFeatureCount; ++j) CHECK(iso(2, j) == 0.0);
}

TEST_CASE("ego features match the dense oracle") {
    auto check = [](const Graph& g) {
        const Matrix f = compute_ego_features(g);
        const auto expected = oracle::ego_features(g);
        for (NodeId u = 0; u < g.node_count(); ++u) {
            for (std::size_t j = 0; j < kEgoFeatureCount; ++j) {
                REQUIRE(f(u, j) == doctest::Approx(expected[u][j]).epsilon(1e-12));
            }
            CHECK(f(u, 2) >= 0.0);
            CHECK(f(u, 2) <= 1.0);
        }
    };
    for (std::uint64_t seed = 1; seed <= 200; ++seed) check(oracle::random_connected(seed));
    check(fixtures::star(6));
    check(fixtures::path(7));
    check(fixtures::cycle(8));
    check(fixtures::complete(6));
    check(barabasi_albert(60, 3, 2));
}

TEST_CASE("canberra") {
    const std::vector<double> a = {1, 0, 0}, b = {0, 1, 0};
    CHECK(canberra(a, a) == 0.0);
    CHECK(canberra(a, b) == doctest::Approx(2.0));
    const std::vector<double> c = {2, 2}, d = {4, 4};
    CHECK(canberra(c, d) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(canberra(a, c), InvalidArgument);

    Rng rng(3);
    for (int t = 0; t < 10000; ++t) {
        std::vector<double> x(5), y(5), z(5);
        for (std::size_t i = 0; i < 5; ++i) {
            x[i] = uniform_real(rng) * 10 + 1e-9;
            y[i] = uniform_real(rng) * 10 + 1e-9;
            z[i] = uniform_real(rng) * 10 + 1e-9;
        }
        REQUIRE(canberra(x, y) == doctest::Approx(canberra(y, x)).epsilon(1e-14));
        REQUIRE(canberra(x, z) <= canberra(x, y) + canberra(y, z) + 1e-12);
    }
}

namespace {

Matrix blobs(Rng& rng, std::size_t per_blob, std::vector<std::size_t>& labels) {
    Matrix x(2 * per_blob, kEgoFeatureCount);
    labels.clear();
    for (std::size_t i = 0; i < 2 * per_blob; ++i) {
        const bool second = i >= per_blob;
        labels.push_back(second);
        for (std::size_t j = 0; j < kEgoFeatureCount; ++j) {
            const double centre = second ? 20.0 : 2.0;
            x(i, j) = centre * (1.0 + 0.1 * uniform_real(rng));
        }
    }
    return x;
}

} // namespace

TEST_CASE("kmeans basics") {
    Rng rng(4);
    std::vector<std::size_t> labels;
    const Matrix x = blobs(rng, 15, labels);
    const auto one = kmeans_canberra(x, 1, 1);
    for (auto c : one.assignment) CHECK(c == 0);

    const auto all = kmeans_canberra(x, x.rows(), 1);
    CHECK(all.objective == doctest::Approx(0.0));

    const auto two = kmeans_canberra(x, 2, 9);
    CHECK(adjusted_rand_index(two.assignment, labels) == doctest::Approx(1.0));
    CHECK_THROWS_AS(kmeans_canberra(x, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(kmeans_canberra(x, x.rows() + 1, 1), InvalidArgument);
}

TEST_CASE("kmeans objective is monotone and ends at a fixed point") {
    const Graph g = barabasi_albert(150, 2, 5);
    const Matrix f = compute_ego_features(g);
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const std::size_t k = 2 + seed % 5;
        const auto r = kmeans_canberra(f, k, seed);
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
            REQUIRE(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-12);
        }
        CHECK(r.objective == r.objective_trace.back());
        if (r.iterations < 100) {
            // one more update/assign round changes nothing
            const auto again = kmeans_canberra(f, k, seed, r.iterations + 1);
            CHECK(again.assignment == r.assignment);
            CHECK(again.centroids == r.centroids);
        }
    }
}

TEST_CASE("kmeans with duplicate points") {
    Matrix x(6, 2, 1.0);
    const auto r = kmeans_canberra(x, 3, 1);
    CHECK(r.assignment.size() == 6);
    CHECK(r.objective == 0.0);
}

TEST_CASE("adjusted rand index") {
    const std::vector<std::size_t> a = {0, 0, 1, 1}, b = {0, 0, 1, 2};
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(0.5714285714285714));
    const std::vector<std::size_t> renamed = {7, 7, 3, 3};
    CHECK(adjusted_rand_index(a, renamed) == doctest::Approx(1.0));
}

TEST_CASE("distance vectors") {
    const Graph g = fixtures::star(2);
    EmbeddingVectors e(3, 2);
    e(1, 0) = 3;
    e(1, 1) = 4;
    e(2, 0) = 6;
    e(2, 1) = 8;
    CHECK(distance_vector(g, e, 0) == std::vector<double>{5, 10});
    CHECK(distance_vector(g, EmbeddingVectors(3, 2, 1.5f), 0) == std::vector<double>{0, 0});
    CHECK(distance_vector(Graph::from_edges(3, std::vector<Edge>{{0, 1}}), e, 2).empty());

    // rotation invariance
    const Graph h = barabasi_albert(40, 3, 1);
    Rng rng(5);
    const std::size_t d = 6;
    Eigen::MatrixXd m(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = standard_normal(rng);
    const Eigen::MatrixXd q = m.householderQr().householderQ();
    EmbeddingVectors base(40, d), rotated(40, d);
    for (auto& v : base.data()) v = static_cast<float>(standard_normal(rng));
    for (std::size_t r = 0; r < 40; ++r) {
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < d; ++j) s += q(i, j) * base(r, j);
            rotated(r, i) = static_cast<float>(s);
        }
    }
    for (NodeId u = 0; u < 40; ++u) {
        const auto a = distance_vector(h, base, u);
        const auto b = distance_vector(h, rotated, u);
        REQUIRE(a.size() == h.degree(u));
        CHECK(std::is_sorted(a.begin(), a.end()));
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-5));
    }
}

TEST_CASE("average distance vector") {
    const std::vector<std::vector<double>> ragged = {{1, 2}, {3}};
    const auto avg = average_distance_vector(ragged);
    CHECK(avg.values == std::vector<double>{2, 2});
    CHECK(avg.supports == std::vector<std::size_t>{2, 1});

    const std::vector<std::vector<double>> single = {{0.5, 1.5, 4}};
    CHECK(average_distance_vector(single).values == single[0]);
    const std::vector<std::vector<double>> same = {{1, 2}, {1, 2}, {1, 2}};
    CHECK(average_distance_vector(same).supports == std::vector<std::size_t>{3, 3});
    CHECK_THROWS_AS(average_distance_vector(std::vector<std::vector<double>>{}), InvalidArgument);

    // constant support keeps sorted members sorted
    Rng rng(6);
    std::vector<std::vector<double>> sorted(10, std::vector<double>(5));
    for (auto& v : sorted) {
        for (auto& x : v) x = uniform_real(rng);
        std::sort(v.begin(), v.end());
    }
    const auto m = average_distance_vector(sorted);
    CHECK(std::is_sorted(m.values.begin(), m.values.end()));
}

TEST_CASE("structure report json") {
    const auto planted = planted_partition({SyntheticKind::planted_partition, 45, 0, 3, 0.5, 0.0, 2, 4, true});
    EmbeddingMatrix e{"deepwalk", "0", EmbeddingVectors(45, 4, 0.25f)};
    const auto r = analyze_structure(planted.graph, e, 3, 1);
    const auto j = nlohmann::json::parse(structure_json(planted.graph, r));
    CHECK(j["k"] == 3);
    REQUIRE(j["clusters"].size() == 3);
    std::size_t members = 0;
    for (const auto& c : j["clusters"]) {
        members += c["members"].size();
        CHECK(c["centroid"].size() == kEgoFeatureCount);
        CHECK(c["average_distance_vector"].size() == c["supports"].size());
    }
    CHECK(members == 45);
}

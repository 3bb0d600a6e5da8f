#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "helpers.hpp"
#include "lmc/graph.hpp"

using namespace lmc;

namespace {

CorrespondenceSet points_1d(std::initializer_list<double> xs) {
    CorrespondenceSet set;
    for (double x : xs) set.items.push_back({x, 0.0, 0.0, 0.0});
    return set;
}

}  // namespace

TEST_CASE("two-node weight matches the Gaussian kernel") {
    CorrespondenceSet set;
    set.items.push_back({0.0, 0.0, 0.0, 0.0});
    set.items.push_back({0.1, 0.0, 0.1, 0.0});  // d^2 = 0.02
    const CoherenceGraph g = build_graph(set, 1, 0.1);
    REQUIRE(g.n == 2);
    REQUIRE(g.edges[0].size() == 1);
    REQUIRE(g.edges[1].size() == 1);
    CHECK(g.edges[0][0].j == 1);
    CHECK(g.edges[0][0].w == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(g.edges[1][0].w == g.edges[0][0].w);
    CHECK(g.degree[0] == g.edges[0][0].w);
}

TEST_CASE("duplicate nodes get weight 1 and no self-edge") {
    CorrespondenceSet set;
    set.items.push_back({0.3, -0.2, 0.1, 0.0});
    set.items.push_back({0.3, -0.2, 0.1, 0.0});
    set.items.push_back({0.9, 0.9, 0.9, 0.9});
    const CoherenceGraph g = build_graph(set, 1, 0.1);
    REQUIRE(g.edges[0].size() >= 1);
    CHECK(g.edges[0][0].j == 1);
    CHECK(g.edges[0][0].w == 1.0);
    for (int i = 0; i < g.n; ++i)
        for (const auto& e : g.edges[i]) CHECK(e.j != i);
}

TEST_CASE("build_graph parameter validation") {
    CorrespondenceSet two = points_1d({0.0, 0.5});
    CHECK_THROWS_AS(build_graph(points_1d({0.0}), 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(build_graph(two, 2, 0.1), std::invalid_argument);  // k >= N
    CHECK_THROWS_AS(build_graph(two, 0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(build_graph(two, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_graph(two, 1, -1.0), std::invalid_argument);
}

TEST_CASE("union keeps one-directional edges, mutual drops them") {
    // 0 --0.5-- 1 --0.05-- 2: with k=1, node 0 points at 1, but 1 and 2
    // point at each other, so 0's edge survives only under union.
    const CorrespondenceSet set = points_1d({0.0, 0.5, 0.55});
    const CoherenceGraph u = build_graph(set, 1, 1.0, Symmetrize::union_);
    REQUIRE(u.edges[0].size() == 1);
    CHECK(u.edges[0][0].j == 1);
    CHECK(u.edges[1].size() == 2);
    CHECK(u.isolated_nodes().empty());
    CHECK(u.edges[0][0].w == doctest::Approx(std::exp(-0.25)).epsilon(1e-14));

    const CoherenceGraph m = build_graph(set, 1, 1.0, Symmetrize::mutual);
    CHECK(m.edges[0].empty());
    REQUIRE(m.edges[1].size() == 1);
    CHECK(m.edges[1][0].j == 2);
    CHECK(m.isolated_nodes() == std::vector<int>{0});
    CHECK(m.degree[0] == 0.0);
}

TEST_CASE("equidistant neighbors tie-break toward the lower index") {
    // node 0 is exactly between 1 and 2; with k=1 it must pick 1.
    const CorrespondenceSet set = points_1d({0.0, 0.3, -0.3});
    const CoherenceGraph m = build_graph(set, 1, 1.0, Symmetrize::mutual);
    REQUIRE(m.edges[0].size() == 1);
    CHECK(m.edges[0][0].j == 1);
    CHECK(m.isolated_nodes() == std::vector<int>{2});
}

TEST_CASE("single node yields the 1x1 zero Laplacian") {
    CoherenceGraph g;
    g.n = 1;
    g.edges.resize(1);
    g.degree = Eigen::VectorXd::Zero(1);
    const LaplacianMatrix L = laplacian(g, LaplacianKind::plain);
    REQUIRE(L.n() == 1);
    CHECK(test::dense_of(L)(0, 0) == 0.0);
}

TEST_CASE("K2 Laplacian has the closed form [[w,-w],[-w,w]]") {
    CorrespondenceSet set;
    set.items.push_back({0.0, 0.0, 0.0, 0.0});
    set.items.push_back({0.1, 0.0, 0.1, 0.0});
    const CoherenceGraph g = build_graph(set, 1, 0.1);
    const double w = g.edges[0][0].w;
    const Eigen::MatrixXd L = test::dense_of(laplacian(g, LaplacianKind::plain));
    CHECK(L(0, 0) == w);
    CHECK(L(1, 1) == w);
    CHECK(L(0, 1) == -w);
    CHECK(L(1, 0) == -w);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    CHECK(std::abs(es.eigenvalues()[0]) <= 1e-15);
    CHECK(es.eigenvalues()[1] == doctest::Approx(2.0 * w).epsilon(1e-13));
}

TEST_CASE("normalized Laplacian spectrum stays in [0, 2] across random graphs") {
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed));
        const CorrespondenceSet set = test::random_set(50, rng);
        const auto sym = seed % 2 == 0 ? Symmetrize::union_ : Symmetrize::mutual;
        const CoherenceGraph g = build_graph(set, 5, 0.5, sym);
        const Eigen::MatrixXd L = test::dense_of(laplacian(g, LaplacianKind::normalized));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        CHECK(es.eigenvalues().maxCoeff() <= 2.0 + 1e-10);
    }
}

TEST_CASE("plain Laplacian annihilates the constant vector; one zero mode when connected") {
    Rng rng(404);
    const CorrespondenceSet set = test::random_set(60, rng);
    const CoherenceGraph g = build_graph(set, 6, 0.8);
    REQUIRE(test::connected(g));
    const LaplacianMatrix L = laplacian(g, LaplacianKind::plain);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(60);
    CHECK((L.matrix * ones).cwiseAbs().maxCoeff() <= 1e-10);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(test::dense_of(L));
    int zeros = 0;
    for (int i = 0; i < 60; ++i)
        if (std::abs(es.eigenvalues()[i]) < 1e-12) ++zeros;
    CHECK(zeros == 1);
}

TEST_CASE("Laplacian symmetry, PSD quadratic form, and row sums") {
    Rng rng(2718);
    const CorrespondenceSet set = test::random_set(45, rng);
    for (auto kind : {LaplacianKind::plain, LaplacianKind::normalized}) {
        const LaplacianMatrix L = laplacian(build_graph(set, 4, 0.5), kind);
        const Eigen::MatrixXd D = test::dense_of(L);
        CHECK((D - D.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        for (int t = 0; t < 100; ++t) {
            Eigen::VectorXd v(45);
            for (int i = 0; i < 45; ++i) v[i] = rng.next_in(-1.0, 1.0);
            CHECK(v.dot(D * v) >= -1e-10);
        }
    }
    const LaplacianMatrix plainL = laplacian(build_graph(set, 4, 0.5), LaplacianKind::plain);
    const Eigen::VectorXd rowsums = test::dense_of(plainL).rowwise().sum();
    CHECK(rowsums.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("relabeling nodes permutes the Laplacian as P L P^T") {
    Rng rng(1234);
    const CorrespondenceSet set = test::random_set(30, rng);
    std::vector<int> perm(30);
    for (int i = 0; i < 30; ++i) perm[i] = i;
    shuffle(perm, rng);
    CorrespondenceSet permuted;
    for (int i = 0; i < 30; ++i) permuted.items.push_back(set.items[perm[i]]);

    const Eigen::MatrixXd L = test::dense_of(laplacian(build_graph(set, 4, 0.5),
                                                       LaplacianKind::plain));
    const Eigen::MatrixXd Lp = test::dense_of(laplacian(build_graph(permuted, 4, 0.5),
                                                        LaplacianKind::plain));
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 30; ++j)
            CHECK(std::abs(Lp(i, j) - L(perm[i], perm[j])) <= 1e-12);
}

TEST_CASE("quadratic form equals the pairwise smoothness sum") {
    Rng rng(5150);
    const CorrespondenceSet set = test::random_set(35, rng);
    const CoherenceGraph g = build_graph(set, 5, 0.6);
    const LaplacianMatrix L = laplacian(g, LaplacianKind::plain);
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd v(35);
        for (int i = 0; i < 35; ++i) v[i] = rng.next_in(-2.0, 2.0);
        double pairwise = 0.0;
        for (int i = 0; i < g.n; ++i)
            for (const auto& e : g.edges[i]) {
                const double d = v[i] - v[e.j];
                pairwise += e.w * d * d;
            }
        pairwise *= 0.5;  // each undirected edge appears in both adjacency rows
        CHECK(v.dot(L.matrix * v) == doctest::Approx(pairwise).epsilon(1e-10));
    }
}

TEST_CASE("degrees equal adjacency row sums") {
    Rng rng(808);
    const CorrespondenceSet set = test::random_set(25, rng);
    const CoherenceGraph g = build_graph(set, 3, 0.4);
    for (int i = 0; i < g.n; ++i) {
        double sum = 0.0;
        for (const auto& e : g.edges[i]) sum += e.w;
        CHECK(g.degree[i] == doctest::Approx(sum).epsilon(1e-15));
    }
}

TEST_CASE("normalized Laplacian zeroes isolated rows") {
    const CorrespondenceSet set = points_1d({0.0, 0.5, 0.55});
    const CoherenceGraph m = build_graph(set, 1, 1.0, Symmetrize::mutual);
    const Eigen::MatrixXd L = test::dense_of(laplacian(m, LaplacianKind::normalized));
    CHECK(L.row(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(L.col(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(L(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("graph hash keys on structure and parameters") {
    Rng rng(6060);
    const CorrespondenceSet set = test::random_set(20, rng);
    const CoherenceGraph a = build_graph(set, 3, 0.5);
    const CoherenceGraph b = build_graph(set, 3, 0.5);
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() != build_graph(set, 4, 0.5).hash());
    CHECK(a.hash() != build_graph(set, 3, 0.6).hash());
    CorrespondenceSet nudged = set;
    nudged.items[7].x += 1e-9;
    CHECK(a.hash() != build_graph(nudged, 3, 0.5).hash());
}

TEST_CASE("graph JSON export lists each edge once, sorted") {
    Rng rng(9001);
    const CorrespondenceSet set = test::random_set(15, rng);
    const CoherenceGraph g = build_graph(set, 3, 0.5);
    const auto doc = nlohmann::json::parse(graph_to_json(g));
    CHECK(doc["n"] == 15);
    CHECK(doc["k"] == 3);
    CHECK(doc["sigma"] == 0.5);
    std::pair<int, int> prev{-1, -1};
    std::set<std::pair<int, int>> seen;
    for (const auto& e : doc["edges"]) {
        const int i = e[0], j = e[1];
        CHECK(i < j);
        const std::pair<int, int> cur{i, j};
        CHECK(prev < cur);  // strictly ascending (i, j)
        prev = cur;
        seen.insert(cur);
        // weight agrees with the in-memory adjacency
        bool found = false;
        for (const auto& ge : g.edges[i])
            if (ge.j == j) {
                found = true;
                CHECK(e[2].get<double>() == ge.w);
            }
        CHECK(found);
    }
    std::size_t undirected = 0;
    for (int i = 0; i < g.n; ++i) undirected += g.edges[i].size();
    CHECK(seen.size() == undirected / 2);
}

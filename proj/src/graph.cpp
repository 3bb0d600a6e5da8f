#include "lmc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lmc/io.hpp"

namespace lmc {

namespace {

double dist2(const Correspondence& a, const Correspondence& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, du = a.u - b.u, dv = a.v - b.v;
    return dx * dx + dy * dy + du * du + dv * dv;
}

}  // namespace

std::vector<int> CoherenceGraph::isolated_nodes() const {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (edges[i].empty()) out.push_back(i);
    return out;
}

std::uint64_t CoherenceGraph::hash() const {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t b = 0; b < len; ++b) {
            h ^= p[b];
            h *= 0x100000001B3ULL;
        }
    };
    mix(&n, sizeof(n));
    mix(&k, sizeof(k));
    mix(&sigma, sizeof(sigma));
    for (int i = 0; i < n; ++i)
        for (const auto& e : edges[i]) {
            mix(&i, sizeof(i));
            mix(&e.j, sizeof(e.j));
            mix(&e.w, sizeof(e.w));
        }
    return h;
}

CoherenceGraph build_graph(const CorrespondenceSet& set, int k, double sigma,
                           Symmetrize symmetrize) {
    const int n = set.size();
    if (n < 2) throw std::invalid_argument("build_graph: need at least 2 correspondences");
    if (k < 1) throw std::invalid_argument("build_graph: k must be positive");
    if (k >= n)
        throw std::invalid_argument("build_graph: k=" + std::to_string(k) +
                                    " needs N > k, got N=" + std::to_string(n));
    if (!(sigma > 0.0)) throw std::invalid_argument("build_graph: sigma must be positive");

    // Directed k-NN: for each i, the k smallest (d2, j) with j != i. Sorting
    // pairs by (distance, index) makes equal-distance ties deterministic.
    std::vector<std::vector<int>> knn(n);
    std::vector<std::pair<double, int>> cand(n - 1);
    for (int i = 0; i < n; ++i) {
        int m = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            cand[m++] = {dist2(set.items[i], set.items[j]), j};
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        knn[i].resize(k);
        for (int t = 0; t < k; ++t) knn[i][t] = cand[t].second;
    }

    // Membership masks for symmetrization.
    std::vector<std::vector<char>> is_nn;  // is_nn[i] over i's directed neighbors
    CoherenceGraph g;
    g.n = n;
    g.k = k;
    g.sigma = sigma;
    g.symmetrize = symmetrize;
    g.edges.assign(n, {});

    std::vector<std::vector<int>> incoming(n);
    for (int i = 0; i < n; ++i)
        for (int j : knn[i]) incoming[j].push_back(i);

    const double inv_s2 = 1.0 / (sigma * sigma);
    for (int i = 0; i < n; ++i) {
        std::vector<int> nbrs = knn[i];
        if (symmetrize == Symmetrize::union_) {
            nbrs.insert(nbrs.end(), incoming[i].begin(), incoming[i].end());
            std::sort(nbrs.begin(), nbrs.end());
            nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        } else {
            std::vector<int> keep;
            for (int j : nbrs)
                if (std::find(knn[j].begin(), knn[j].end(), i) != knn[j].end()) keep.push_back(j);
            nbrs = std::move(keep);
            std::sort(nbrs.begin(), nbrs.end());
        }
        g.edges[i].reserve(nbrs.size());
        for (int j : nbrs)
            g.edges[i].push_back({j, std::exp(-dist2(set.items[i], set.items[j]) * inv_s2)});
    }

    g.degree.resize(n);
    for (int i = 0; i < n; ++i) {
        double d = 0.0;
        for (const auto& e : g.edges[i]) d += e.w;
        g.degree[i] = d;
    }
    return g;
}

LaplacianMatrix laplacian(const CoherenceGraph& g, LaplacianKind kind) {
    std::vector<Eigen::Triplet<double>> trip;
    std::size_t nnz = g.n;
    for (const auto& row : g.edges) nnz += row.size();
    trip.reserve(nnz);

    if (kind == LaplacianKind::plain) {
        for (int i = 0; i < g.n; ++i) {
            trip.emplace_back(i, i, g.degree[i]);
            for (const auto& e : g.edges[i]) trip.emplace_back(i, e.j, -e.w);
        }
    } else {
        Eigen::VectorXd dinv_sqrt(g.n);
        for (int i = 0; i < g.n; ++i)
            dinv_sqrt[i] = g.degree[i] > 0.0 ? 1.0 / std::sqrt(g.degree[i]) : 0.0;
        for (int i = 0; i < g.n; ++i) {
            if (g.degree[i] > 0.0) trip.emplace_back(i, i, 1.0);
            for (const auto& e : g.edges[i])
                trip.emplace_back(i, e.j, -e.w * dinv_sqrt[i] * dinv_sqrt[e.j]);
        }
    }

    LaplacianMatrix L;
    L.kind = kind;
    L.matrix.resize(g.n, g.n);
    L.matrix.setFromTriplets(trip.begin(), trip.end());
    L.matrix.makeCompressed();
    return L;
}

std::string graph_to_json(const CoherenceGraph& g) {
    std::ostringstream out;
    out << "{\"n\":" << g.n << ",\"k\":" << g.k << ",\"sigma\":" << format_double(g.sigma)
        << ",\"edges\":[";
    bool first = true;
    for (int i = 0; i < g.n; ++i)
        for (const auto& e : g.edges[i]) {
            if (e.j < i) continue;  // emit each undirected edge once
            if (!first) out << ',';
            first = false;
            out << '[' << i << ',' << e.j << ',' << format_double(e.w) << ']';
        }
    out << "]}";
    return out.str();
}

}  // namespace lmc

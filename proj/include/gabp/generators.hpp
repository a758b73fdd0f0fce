#pragma once

#include "model.hpp"
#include "numerics.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gabp {

struct CannotConnect : std::runtime_error {
    explicit CannotConnect(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Generation specs
// ---------------------------------------------------------------------------

struct Chain { int n = 2; };
struct Cycle { int n = 3; };
struct Grid { int rows = 2; int cols = 2; };
struct RandomConnected { int n = 2; double edge_prob = 0.5; };
// DC power flow: scalar voltages, measurements proportional to the voltage
// difference across a line, scaled by the line's susceptance.
struct DcFlow {
    std::vector<std::pair<int, int>> lines;
    std::vector<double> susceptances;  // aligned with lines
};
using Topology = std::variant<Chain, Cycle, Grid, RandomConnected, DcFlow>;

enum class CoefMode { Unit, Random, Difference };

struct GenSpec {
    Topology topology = Chain{2};
    int dim = 1;                       // per-agent dimension
    double prior_scale = 1.0;          // W_i = prior_scale * I
    double noise_scale = 1.0;          // R_ij = noise_scale * I
    CoefMode coef_mode = CoefMode::Unit;
    unsigned seed = 0;
};

namespace detail {

inline bool connected(int n, const std::set<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(static_cast<size_t>(n));
    for (const auto& [a, b] : edges) {
        adj[static_cast<size_t>(a)].push_back(b);
        adj[static_cast<size_t>(b)].push_back(a);
    }
    std::vector<char> seen(static_cast<size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v : adj[static_cast<size_t>(u)])
            if (!seen[static_cast<size_t>(v)]) {
                seen[static_cast<size_t>(v)] = 1;
                ++count;
                stack.push_back(v);
            }
    }
    return count == n;
}

// Topology -> (node count, sorted unique undirected edges, per-edge susceptance)
inline std::tuple<int, std::vector<std::pair<int, int>>, std::vector<double>> build_edges(const Topology& topo,
                                                                                          std::mt19937_64& rng) {
    std::vector<std::pair<int, int>> edges;
    std::vector<double> susc;
    int n = 0;
    if (const auto* c = std::get_if<Chain>(&topo)) {
        if (c->n < 2) throw std::invalid_argument("generate: chain needs n >= 2");
        n = c->n;
        for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    } else if (const auto* c = std::get_if<Cycle>(&topo)) {
        if (c->n < 3) throw std::invalid_argument("generate: cycle needs n >= 3");
        n = c->n;
        for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
        edges.emplace_back(0, n - 1);
    } else if (const auto* g = std::get_if<Grid>(&topo)) {
        if (g->rows < 1 || g->cols < 1 || g->rows * g->cols < 2)
            throw std::invalid_argument("generate: grid needs at least 2 nodes");
        n = g->rows * g->cols;
        for (int r = 0; r < g->rows; ++r)
            for (int c2 = 0; c2 < g->cols; ++c2) {
                const int id = r * g->cols + c2;
                if (c2 + 1 < g->cols) edges.emplace_back(id, id + 1);
                if (r + 1 < g->rows) edges.emplace_back(id, id + g->cols);
            }
    } else if (const auto* rc = std::get_if<RandomConnected>(&topo)) {
        if (rc->n < 2) throw std::invalid_argument("generate: random topology needs n >= 2");
        if (!(rc->edge_prob > 0.0 && rc->edge_prob <= 1.0))
            throw std::invalid_argument("generate: edge_prob must be in (0, 1]");
        n = rc->n;
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        for (int attempt = 0; attempt < 100; ++attempt) {
            std::set<std::pair<int, int>> drawn;
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    if (coin(rng) < rc->edge_prob) drawn.insert({a, b});
            if (!drawn.empty() && connected(n, drawn)) {
                edges.assign(drawn.begin(), drawn.end());
                break;
            }
        }
        if (edges.empty()) throw CannotConnect("generate: no connected graph after 100 attempts");
    } else if (const auto* dc = std::get_if<DcFlow>(&topo)) {
        if (dc->lines.empty()) throw std::invalid_argument("generate: dcflow needs at least one line");
        if (!dc->susceptances.empty() && dc->susceptances.size() != dc->lines.size())
            throw std::invalid_argument("generate: susceptances must align with lines");
        for (const auto& [a, b] : dc->lines) {
            if (a < 0 || b < 0 || a == b) throw std::invalid_argument("generate: bad dcflow line");
            edges.emplace_back(std::min(a, b), std::max(a, b));
            n = std::max(n, std::max(a, b) + 1);
        }
        susc = dc->susceptances.empty() ? std::vector<double>(edges.size(), 1.0) : dc->susceptances;
    }
    std::vector<size_t> order(edges.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return edges[a] < edges[b]; });
    std::vector<std::pair<int, int>> sorted_edges;
    std::vector<double> sorted_susc;
    for (size_t k : order) {
        sorted_edges.push_back(edges[k]);
        if (!susc.empty()) sorted_susc.push_back(susc[k]);
    }
    return {n, sorted_edges, sorted_susc};
}

}  // namespace detail

// Generates the model together with the ground truth x* that synthesized its
// observations (y = coef_i x_i* + coef_j x_j* + noise, x* ~ N(0, W)).
inline std::pair<PairwiseModel, Vector> embed_truth(const GenSpec& spec) {
    if (spec.dim < 1) throw std::invalid_argument("generate: dim must be >= 1");
    if (!(spec.prior_scale > 0)) throw std::invalid_argument("generate: prior_scale must be positive");
    if (!(spec.noise_scale > 0)) throw std::invalid_argument("generate: noise_scale must be positive");
    std::mt19937_64 rng(spec.seed);
    auto [n, edge_pairs, susc] = detail::build_edges(spec.topology, rng);
    const bool is_dcflow = std::holds_alternative<DcFlow>(spec.topology);
    const int dim = is_dcflow ? 1 : spec.dim;  // DC flow states are scalar voltages
    const CoefMode mode = is_dcflow ? CoefMode::Difference : spec.coef_mode;

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Agent> agents;
    agents.reserve(static_cast<size_t>(n));
    for (int a = 0; a < n; ++a)
        agents.push_back({a, dim, spec.prior_scale * Matrix::Identity(dim, dim)});

    Vector x_true(static_cast<Eigen::Index>(n) * dim);
    const double prior_sd = std::sqrt(spec.prior_scale);
    for (Eigen::Index k = 0; k < x_true.size(); ++k) x_true(k) = prior_sd * gauss(rng);

    std::vector<EdgeObservation> edges;
    edges.reserve(edge_pairs.size());
    const double noise_sd = std::sqrt(spec.noise_scale);
    for (size_t e = 0; e < edge_pairs.size(); ++e) {
        const auto [i, j] = edge_pairs[e];
        EdgeObservation ed;
        ed.i = i;
        ed.j = j;
        const int mij = dim;  // all generated agents share one dim
        switch (mode) {
            case CoefMode::Unit:
                ed.coef_i = Matrix::Identity(mij, dim);
                ed.coef_j = Matrix::Identity(mij, dim);
                break;
            case CoefMode::Difference: {
                const double b = susc.empty() ? 1.0 : susc[e];
                ed.coef_i = b * Matrix::Identity(mij, dim);
                ed.coef_j = -b * Matrix::Identity(mij, dim);
                break;
            }
            case CoefMode::Random: {
                auto draw = [&](Matrix& m) {
                    for (int attempt = 0; attempt < 100; ++attempt) {
                        m.resize(mij, dim);
                        for (int r = 0; r < mij; ++r)
                            for (int c = 0; c < dim; ++c) m(r, c) = gauss(rng);
                        if (numerics::full_column_rank(m)) return;
                    }
                    throw std::runtime_error("generate: could not draw a full-column-rank coefficient");
                };
                draw(ed.coef_i);
                draw(ed.coef_j);
                break;
            }
        }
        ed.noise_cov = spec.noise_scale * Matrix::Identity(mij, mij);
        Vector noise(mij);
        for (int r = 0; r < mij; ++r) noise(r) = noise_sd * gauss(rng);
        ed.obs = ed.coef_i * x_true.segment(static_cast<Eigen::Index>(i) * dim, dim) +
                 ed.coef_j * x_true.segment(static_cast<Eigen::Index>(j) * dim, dim) + noise;
        edges.push_back(std::move(ed));
    }
    PairwiseModel model(std::move(agents), std::move(edges));
    auto report = validate(model);
    if (!report.empty()) throw std::runtime_error("generate: produced invalid model: " + report.front());
    return {std::move(model), std::move(x_true)};
}

inline PairwiseModel generate(const GenSpec& spec) { return embed_truth(spec).first; }

}  // namespace gabp

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace gabp;

TEST_CASE("generated models validate across topologies and modes", "[generators]") {
    std::vector<GenSpec> specs;
    specs.push_back({Chain{5}, 1, 1.0, 1.0, CoefMode::Unit, 1});
    specs.push_back({Chain{4}, 3, 2.0, 0.5, CoefMode::Random, 2});
    specs.push_back({Cycle{6}, 2, 1.0, 1.0, CoefMode::Unit, 3});
    specs.push_back({Cycle{3}, 1, 1.0, 1.0, CoefMode::Difference, 4});
    specs.push_back({Grid{3, 4}, 1, 1.0, 2.0, CoefMode::Random, 5});
    specs.push_back({RandomConnected{8, 0.4}, 2, 1.0, 1.0, CoefMode::Unit, 6});
    specs.push_back({DcFlow{{{0, 1}, {1, 2}, {0, 2}}, {1.0, 2.0, 3.0}}, 1, 10.0, 0.01, CoefMode::Unit, 7});
    for (const auto& spec : specs) {
        auto model = generate(spec);
        INFO("spec seed " << spec.seed);
        REQUIRE(validate(model).empty());
    }
}

TEST_CASE("topologies produce the expected node and edge counts", "[generators]") {
    REQUIRE(generate({Chain{7}, 1, 1.0, 1.0, CoefMode::Unit, 0}).num_edges() == 6);
    REQUIRE(generate({Cycle{7}, 1, 1.0, 1.0, CoefMode::Unit, 0}).num_edges() == 7);
    auto grid = generate({Grid{3, 4}, 1, 1.0, 1.0, CoefMode::Unit, 0});
    REQUIRE(grid.num_agents() == 12);
    REQUIRE(grid.num_edges() == 3 * 3 + 2 * 4);  // rows*(cols-1) + (rows-1)*cols
    // edge_prob 1 yields the complete graph
    auto complete = generate({RandomConnected{5, 1.0}, 1, 1.0, 1.0, CoefMode::Unit, 0});
    REQUIRE(complete.num_edges() == 10);
}

TEST_CASE("generation is deterministic per seed", "[generators]") {
    GenSpec spec{RandomConnected{7, 0.5}, 2, 1.5, 0.7, CoefMode::Random, 99};
    const auto a = model_to_json(generate(spec)).dump();
    const auto b = model_to_json(generate(spec)).dump();
    REQUIRE(a == b);
    spec.seed = 100;
    REQUIRE(model_to_json(generate(spec)).dump() != a);
}

TEST_CASE("embed_truth exposes the synthesizing ground truth", "[generators]") {
    GenSpec spec{Chain{4}, 2, 1.0, 1e-6, CoefMode::Random, 17};
    auto [model, x_true] = embed_truth(spec);
    REQUIRE(x_true.size() == 8);
    // with nearly noiseless observations, y must sit on the plane A x*
    for (int e = 0; e < model.num_edges(); ++e) {
        const auto& ed = model.edge(e);
        const Vector clean = ed.coef_i * x_true.segment(2 * ed.i, 2) + ed.coef_j * x_true.segment(2 * ed.j, 2);
        REQUIRE((ed.obs - clean).lpNorm<Eigen::Infinity>() <= 1e-2);
    }
    auto [model2, x2] = embed_truth(spec);
    REQUIRE((x_true - x2).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("dcflow builds difference observations scaled by susceptance", "[generators]") {
    GenSpec spec{DcFlow{{{0, 1}, {1, 2}, {0, 2}}, {1.0, 2.0, 4.0}}, 3, 10.0, 0.01, CoefMode::Unit, 8};
    auto model = generate(spec);
    REQUIRE(model.num_agents() == 3);
    REQUIRE(model.num_edges() == 3);
    for (int e = 0; e < 3; ++e) {
        const auto& ed = model.edge(e);
        REQUIRE(model.dim(ed.i) == 1);  // voltages are scalar regardless of --dim
        REQUIRE(ed.coef_i(0, 0) == -ed.coef_j(0, 0));
        REQUIRE(ed.coef_i(0, 0) > 0.0);
    }
    // edges are stored sorted by (i, j): {0,1} b=1, {0,2} b=4, {1,2} b=2
    REQUIRE(model.edge(0).coef_i(0, 0) == 1.0);
    REQUIRE(model.edge(1).coef_i(0, 0) == 4.0);
    REQUIRE(model.edge(2).coef_i(0, 0) == 2.0);
    // omitted susceptances default to 1
    auto unit = generate({DcFlow{{{0, 1}, {1, 2}}, {}}, 1, 1.0, 1.0, CoefMode::Unit, 9});
    REQUIRE(unit.edge(0).coef_i(0, 0) == 1.0);
}

TEST_CASE("generator input validation", "[generators]") {
    REQUIRE_THROWS_AS(generate({Chain{1}, 1, 1.0, 1.0, CoefMode::Unit, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(generate({Cycle{2}, 1, 1.0, 1.0, CoefMode::Unit, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(generate({Grid{1, 1}, 1, 1.0, 1.0, CoefMode::Unit, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(generate({RandomConnected{5, 0.0}, 1, 1.0, 1.0, CoefMode::Unit, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(generate({RandomConnected{5, 1.5}, 1, 1.0, 1.0, CoefMode::Unit, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(generate({Chain{3}, 0, 1.0, 1.0, CoefMode::Unit, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(generate({Chain{3}, 1, 0.0, 1.0, CoefMode::Unit, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(generate({Chain{3}, 1, 1.0, -1.0, CoefMode::Unit, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(generate({DcFlow{{}, {}}, 1, 1.0, 1.0, CoefMode::Unit, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(generate({DcFlow{{{0, 0}}, {}}, 1, 1.0, 1.0, CoefMode::Unit, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(generate({DcFlow{{{0, 1}}, {1.0, 2.0}}, 1, 1.0, 1.0, CoefMode::Unit, 0}),
                      std::invalid_argument);
}

TEST_CASE("an impossible random draw raises CannotConnect", "[generators]") {
    // p so small that 100 attempts on 12 nodes essentially never connect
    REQUIRE_THROWS_AS(generate({RandomConnected{12, 1e-9}, 1, 1.0, 1.0, CoefMode::Unit, 0}), CannotConnect);
}

TEST_CASE("random coefficient blocks have full column rank", "[generators]") {
    auto model = generate({Cycle{5}, 3, 1.0, 1.0, CoefMode::Random, 21});
    for (int e = 0; e < model.num_edges(); ++e) {
        REQUIRE(numerics::full_column_rank(model.edge(e).coef_i));
        REQUIRE(numerics::full_column_rank(model.edge(e).coef_j));
    }
}

TEST_CASE("scales land where the request points them", "[generators]") {
    auto model = generate({Chain{3}, 2, 2.5, 0.25, CoefMode::Unit, 30});
    REQUIRE(model.agent(0).prior_cov == Matrix(2.5 * Matrix::Identity(2, 2)));
    REQUIRE(model.edge(0).noise_cov == Matrix(0.25 * Matrix::Identity(2, 2)));
    REQUIRE(model.edge(0).coef_i == Matrix::Identity(2, 2));
}

// gabp: generate / run / analyze / compare for Gaussian BP on pairwise linear
// Gaussian models.
//
// Exit codes: 0 success (run/compare: engine converged), 2 invalid arguments
// or malformed model, 3 generation failure, 4 max iterations reached,
// 5 divergence guard tripped.

#include <gabp/gabp.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitGenerate = 3;
constexpr int kExitMaxIters = 4;
constexpr int kExitDiverged = 5;

int status_code(gabp::RunStatus s) {
    switch (s) {
        case gabp::RunStatus::Converged: return kExitOk;
        case gabp::RunStatus::MaxItersReached: return kExitMaxIters;
        case gabp::RunStatus::Diverged: return kExitDiverged;
    }
    return kExitUsage;
}

gabp::PairwiseModel load_valid_model(const std::string& path) {
    gabp::PairwiseModel model = gabp::load_model(path);
    auto report = gabp::validate(model);
    if (!report.empty()) throw std::invalid_argument("model invalid: " + report.front());
    return model;
}

struct GenerateArgs {
    std::string topology;
    int nodes = 0;
    int rows = 0;
    int cols = 0;
    double edge_prob = 0.5;
    int dim = 1;
    double prior_scale = 1.0;
    double noise_scale = 1.0;
    std::string coef = "unit";
    unsigned seed = 0;
    std::string out;
};

int run_generate(const GenerateArgs& a) {
    gabp::GenSpec spec;
    if (a.topology == "chain") {
        spec.topology = gabp::Chain{a.nodes};
    } else if (a.topology == "cycle") {
        spec.topology = gabp::Cycle{a.nodes};
    } else if (a.topology == "grid") {
        if (a.rows < 1 || a.cols < 1) {
            std::fprintf(stderr, "generate: grid needs --rows and --cols\n");
            return kExitUsage;
        }
        if (a.rows * a.cols != a.nodes) {
            std::fprintf(stderr, "generate: --nodes must equal rows*cols\n");
            return kExitUsage;
        }
        spec.topology = gabp::Grid{a.rows, a.cols};
    } else if (a.topology == "random") {
        spec.topology = gabp::RandomConnected{a.nodes, a.edge_prob};
    } else if (a.topology == "dcflow") {
        // a ring of buses with unit susceptance; bus count from --nodes
        if (a.nodes < 3) {
            std::fprintf(stderr, "generate: dcflow ring needs --nodes >= 3\n");
            return kExitUsage;
        }
        gabp::DcFlow dc;
        for (int i = 0; i + 1 < a.nodes; ++i) dc.lines.emplace_back(i, i + 1);
        dc.lines.emplace_back(0, a.nodes - 1);
        spec.topology = std::move(dc);
    } else {
        std::fprintf(stderr, "generate: unknown topology '%s'\n", a.topology.c_str());
        return kExitUsage;
    }
    spec.dim = a.dim;
    spec.prior_scale = a.prior_scale;
    spec.noise_scale = a.noise_scale;
    spec.seed = a.seed;
    if (a.coef == "unit") spec.coef_mode = gabp::CoefMode::Unit;
    else if (a.coef == "random") spec.coef_mode = gabp::CoefMode::Random;
    else if (a.coef == "difference") spec.coef_mode = gabp::CoefMode::Difference;
    else {
        std::fprintf(stderr, "generate: unknown coef mode '%s'\n", a.coef.c_str());
        return kExitUsage;
    }
    try {
        gabp::save_model(gabp::generate(spec), a.out);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "generate: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "generate: %s\n", e.what());
        return kExitGenerate;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian belief propagation for pairwise linear Gaussian models"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* cmd_gen = app.add_subcommand("generate", "Write a benchmark model as JSON");
    cmd_gen->add_option("--topology", gen.topology, "chain|cycle|grid|random|dcflow")->required();
    cmd_gen->add_option("--nodes", gen.nodes, "agent count")->required();
    cmd_gen->add_option("--rows", gen.rows, "grid rows");
    cmd_gen->add_option("--cols", gen.cols, "grid cols");
    cmd_gen->add_option("--edge-prob", gen.edge_prob, "random topology edge probability");
    cmd_gen->add_option("--dim", gen.dim, "per-agent state dimension (default 1)");
    cmd_gen->add_option("--prior-scale", gen.prior_scale, "W = scale*I (default 1)");
    cmd_gen->add_option("--noise-scale", gen.noise_scale, "R = scale*I (default 1)");
    cmd_gen->add_option("--coef", gen.coef, "unit|random|difference (default unit)");
    cmd_gen->add_option("--seed", gen.seed, "RNG seed")->required();
    cmd_gen->add_option("--out", gen.out, "output model path")->required();

    std::string model_path, out_path, trace_path;
    int max_iters = -1;
    double eta = 1e-9;
    std::string init = "zero";
    CLI::App* cmd_run = app.add_subcommand("run", "Run the BP engine; write beliefs and a round trace");
    cmd_run->add_option("--model", model_path, "model JSON path")->required();
    cmd_run->add_option("--max-iters", max_iters, "round cap (default 10*M)");
    cmd_run->add_option("--tol", eta, "belief-mean termination threshold (default 1e-9)");
    cmd_run->add_option("--init", init, "zero|upper (default zero)");
    cmd_run->add_option("--out", out_path, "beliefs JSON path")->required();
    cmd_run->add_option("--trace", trace_path, "trace CSV path")->required();

    std::string an_model, an_out;
    double an_tol = 1e-8;
    CLI::App* cmd_analyze = app.add_subcommand("analyze", "Fixed point of G, Q assembly, rho(Q) verdict");
    cmd_analyze->add_option("--model", an_model, "model JSON path")->required();
    cmd_analyze->add_option("--tol", an_tol, "spectral radius tolerance (default 1e-8)");
    cmd_analyze->add_option("--out", an_out, "report JSON path")->required();

    std::string cp_model, cp_out;
    int cp_max_iters = -1;
    double cp_eta = 1e-9;
    CLI::App* cmd_compare = app.add_subcommand("compare", "BP vs centralized estimate, per-agent errors");
    cmd_compare->add_option("--model", cp_model, "model JSON path")->required();
    cmd_compare->add_option("--max-iters", cp_max_iters, "round cap (default 10*M)");
    cmd_compare->add_option("--tol", cp_eta, "belief-mean termination threshold (default 1e-9)");
    cmd_compare->add_option("--out", cp_out, "report JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (cmd_gen->parsed()) return run_generate(gen);

        if (cmd_run->parsed()) {
            gabp::PairwiseModel model;
            try {
                model = load_valid_model(model_path);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "run: %s\n", e.what());
                return kExitUsage;
            }
            gabp::EngineConfig config;
            config.max_iters = max_iters;
            config.eta = eta;
            if (init == "upper") config.init = gabp::InitUpperBound{};
            else if (init != "zero") {
                std::fprintf(stderr, "run: unknown init '%s'\n", init.c_str());
                return kExitUsage;
            }
            const gabp::RunResult result = gabp::run(model, config);
            gabp::save_json(gabp::beliefs_to_json(model, result), out_path);
            gabp::write_trace_csv(result.trace, trace_path);
            return status_code(result.status);
        }

        if (cmd_analyze->parsed()) {
            gabp::PairwiseModel model;
            try {
                model = load_valid_model(an_model);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "analyze: %s\n", e.what());
                return kExitUsage;
            }
            gabp::save_json(gabp::analyze_to_json(gabp::analyze(model, an_tol)), an_out);
            return kExitOk;
        }

        if (cmd_compare->parsed()) {
            gabp::PairwiseModel model;
            try {
                model = load_valid_model(cp_model);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "compare: %s\n", e.what());
                return kExitUsage;
            }
            gabp::EngineConfig config;
            config.max_iters = cp_max_iters;
            config.eta = cp_eta;
            const gabp::CompareReport report = gabp::compare(model, config);
            gabp::save_json(gabp::compare_to_json(report), cp_out);
            return status_code(report.status);
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "gabp: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "gabp: %s\n", e.what());
        return 1;
    }
    return kExitUsage;
}

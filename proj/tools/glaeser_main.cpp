#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "glaeser/errors.hpp"
#include "glaeser/run.hpp"

namespace {

struct CommonOpts {
    std::string problem;
    std::string out;
    std::optional<int> k_bar, l_star, threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool need_problem = true) {
    auto* p = cmd->add_option("--problem", o.problem, "problem JSON file");
    if (need_problem) p->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "write the report to this path (default: stdout)");
    cmd->add_option("--k-bar", o.k_bar, "tuple size override")->check(CLI::Range(1, 3));
    cmd->add_option("--l-star", o.l_star, "iteration count override")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", o.seed, "seed recorded in the report");
    cmd->add_option("--threads", o.threads, "worker threads (output is thread-count independent)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--mode", o.mode, "refinement mode")
        ->check(CLI::IsMember({"standard", "strong"}));
}

glaeser::SystemSpec load_with_overrides(const CommonOpts& o) {
    glaeser::SystemSpec spec = glaeser::load_problem(o.problem);
    if (o.k_bar) spec.config.refine.k_bar = *o.k_bar;
    if (o.l_star) spec.config.l_star = *o.l_star;
    if (o.threads) spec.config.refine.threads = *o.threads;
    if (o.seed) spec.config.seed = *o.seed;
    if (o.mode)
        spec.config.mode = (*o.mode == "strong") ? glaeser::RefineMode::Strong
                                                 : glaeser::RefineMode::Standard;
    return spec;
}

int emit(const glaeser::RunResult& r, const std::string& out) {
    const std::string text = r.report.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out);
        if (!f) {
            std::cerr << "error: cannot write '" << out << "'\n";
            return 3;
        }
        f << text;
    }
    return r.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decide solvability of linear systems for C^m unknowns over sampled "
                 "compact sets via iterated Glaeser refinement of jet bundles"};
    app.require_subcommand(1);

    CommonOpts decide_opts, refine_opts, oracle_opts;
    int iters = 1;
    std::string corpus_dir;
    std::vector<std::string> jet_exprs;
    std::vector<double> jet_point;
    int jet_m = 0;
    std::string jet_out;

    auto* cmd_decide = app.add_subcommand("decide", "run the decision pipeline");
    add_common(cmd_decide, decide_opts);

    auto* cmd_refine = app.add_subcommand("refine", "run refinement passes and dump bundles");
    add_common(cmd_refine, refine_opts);
    cmd_refine->add_option("--iters", iters, "number of refinement passes")
        ->check(CLI::NonNegativeNumber);

    auto* cmd_oracle = app.add_subcommand("oracle", "cross-check decide against the oracles");
    add_common(cmd_oracle, oracle_opts, false);
    cmd_oracle->add_option("--corpus", corpus_dir, "directory of problem files to sweep")
        ->check(CLI::ExistingDirectory);

    auto* cmd_jet = app.add_subcommand("jet", "print the m-jet of expressions at a point");
    cmd_jet->add_option("--expr", jet_exprs, "expression (repeatable; one per component)")
        ->required();
    cmd_jet->add_option("--point", jet_point, "basepoint coordinates")->required();
    cmd_jet->add_option("--m", jet_m, "jet degree")->check(CLI::NonNegativeNumber);
    cmd_jet->add_option("--out", jet_out, "write the report to this path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_decide->parsed()) {
            return emit(glaeser::run_decide(load_with_overrides(decide_opts)), decide_opts.out);
        }
        if (cmd_refine->parsed()) {
            return emit(glaeser::run_refine(load_with_overrides(refine_opts), iters),
                        refine_opts.out);
        }
        if (cmd_oracle->parsed()) {
            if (!corpus_dir.empty()) {
                std::vector<std::string> paths;
                for (const auto& e : std::filesystem::directory_iterator(corpus_dir))
                    if (e.path().extension() == ".json") paths.push_back(e.path().string());
                std::sort(paths.begin(), paths.end());
                return emit(glaeser::run_oracle_corpus(paths), oracle_opts.out);
            }
            if (oracle_opts.problem.empty()) {
                std::cerr << "error: oracle needs --problem or --corpus\n";
                return 3;
            }
            return emit(glaeser::run_oracle(load_with_overrides(oracle_opts)), oracle_opts.out);
        }
        if (cmd_jet->parsed()) {
            return emit(glaeser::run_jet(jet_exprs, jet_point, jet_m), jet_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glaeser/oracle.hpp"
#include "glaeser/system.hpp"

namespace glaeser {

/// Exit-code vocabulary shared by every subcommand:
/// 0 solvable, 1 unsolvable, 2 inconclusive, 3 input error,
/// 4 oracle disagreement.
struct RunResult {
    nlohmann::json report;
    int exit_code = 0;
};

int verdict_exit_code(Verdict v);

RunResult run_decide(const SystemSpec& spec);

/// Exactly `iters` refinement passes (no early exit), with a bundle dump
/// and a per-iteration report each; dump 0 is the initial bundle.
RunResult run_refine(const SystemSpec& spec, int iters);

/// Runs the fitting oracle (and the closed-form criterion when the problem
/// carries the epstein-hochster tag) against decide; exit 4 on divergence.
RunResult run_oracle(const SystemSpec& spec);

/// Agreement table over a list of problem files.
RunResult run_oracle_corpus(const std::vector<std::string>& paths);

/// Jet of an expression list at a point, as a coefficient table.
RunResult run_jet(const std::vector<std::string>& exprs, const std::vector<double>& point, int m);

} // namespace glaeser

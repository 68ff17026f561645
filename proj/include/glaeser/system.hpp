#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glaeser/bundle.hpp"

namespace glaeser {

/// Everything configurable about one decision run.  Defaults are the
/// project-wide pinned values; problem files may override any field.
struct ProblemConfig {
    RefineConfig refine;
    RefineMode mode = RefineMode::Strong;
    int l_star = -1;           // < 0: auto, 2 * dim P^(m)(R^n, R^M) + 3
    double range_tol = 1e-9;   // relative to |f(x)|, absolute floor 1e-12
    std::uint64_t seed = 0;
    double fit_tol = 1e-6;
    double fit_cutoff_factor = 4.0;
    double fit_max_unknowns = 2e5;
    int fit_degree_lift = 1;
};

/// The linear system sum_j A_ij F_j = f_i on a sampled compact domain.
struct SystemSpec {
    std::string name;
    std::vector<std::string> tags;
    int n = 0, m = 0, N = 0, M = 0;
    std::vector<std::vector<ScalarExpression>> A; // N x M
    std::vector<ScalarExpression> f;              // N
    std::vector<StratumDescription> strata;       // inline domain ...
    std::string domain_file;                      // ... or by reference
    std::vector<ScalarExpression> explicit_solution; // optional, M components
    ProblemConfig config;

    bool has_tag(const std::string& t) const;
    void validate() const;
    int effective_l_star() const;
};

SystemSpec load_problem(const std::string& path);
SystemSpec problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const SystemSpec& spec);

/// Samples the inline strata or loads the referenced domain file.
DomainPtr resolve_domain(const SystemSpec& spec);

Eigen::MatrixXd eval_A(const SystemSpec& spec, const Eigen::VectorXd& x);
Eigen::VectorXd eval_f(const SystemSpec& spec, const Eigen::VectorXd& x);

/// I(x): jets whose component values at x lie in the kernel of A(x); only
/// the order-zero coefficients are constrained, so the result is
/// automatically an R_x^m-submodule.
AffineJetSet build_module(const SystemSpec& spec, const Eigen::VectorXd& x);

struct RangeViolation {
    int point = -1;
    double residual = 0.0;
};

struct BuildResult {
    Bundle bundle;
    std::vector<RangeViolation> violations; // fibers marked empty
};

/// The bundle H_f: fiber = (minimal-norm lift of f(x), as constant
/// component jets) + I(x); empty where (I - Pi(x)) f(x) != 0 beyond
/// range_tol.
BuildResult build_bundle(const SystemSpec& spec, DomainPtr domain = nullptr);

enum class Verdict { Solvable, Unsolvable, Inconclusive };
std::string verdict_name(Verdict v);

struct FailurePoint {
    int point = -1;
    std::vector<double> coords;
    std::string reason; // "range_violation" | "empty_fiber"
    int iteration = 0;  // 0 for range violations
    double detail = 0.0; // range residual, or fitted decay slope
    bool ambiguous = false;
    bool operator==(const FailurePoint&) const = default;
};

struct IterationSummary {
    int iteration = 0;
    bool proper = true;
    int empty_count = 0;
    int ambiguous_count = 0;
    bool operator==(const IterationSummary&) const = default;
};

struct Decision {
    Verdict verdict = Verdict::Solvable;
    std::vector<FailurePoint> failures;
    std::vector<IterationSummary> trace;
    std::uint64_t seed = 0;
    bool operator==(const Decision&) const = default;
};

nlohmann::json decision_to_json(const Decision& d);
Decision decision_from_json(const nlohmann::json& j);

/// Full pipeline: build H_f, iterate strong refinement, enumerate every
/// failure point.  Failures are data, not errors.
Decision decide(const SystemSpec& spec);

/// Verifies H_{phi f} = phi ⊙ H_f fiberwise on the sampled domain
/// (offsets differ within the module, spans equal, tolerance 1e-8).
/// Requires H_f proper.
bool scalar_compat_check(const SystemSpec& spec, const ScalarExpression& phi);

} // namespace glaeser

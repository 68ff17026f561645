#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glaeser/bundle.hpp"

namespace glaeser {

/// Ground-truth verdict from one of the independent oracles.
struct OracleVerdict {
    bool solvable = false;
    std::string method;    // "eh-criterion" | "whitney-fit"
    std::string witness;   // violated condition, or empty when solvable
    double residual = 0.0; // fit objective (whitney-fit) or |violating value|
    double scale = 1.0;    // normalization the residual was compared against
    double worst_ratio = 0.0; // whitney-fit: worst pair mismatch over budget
    std::vector<double> witness_point;
};

nlohmann::json oracle_verdict_to_json(const OracleVerdict& v);

/// Closed-form solvability criterion for the equation
/// x^2 F1 + y^2 F2 + x y z^2 F3 = f with continuous unknowns:
/// f, df/dx, df/dy vanish on the z-axis and d2f/dxdy, d3f/dxdydz vanish at
/// the origin.  f must be polynomial; derivatives are exact.
OracleVerdict eh_criterion(const ScalarExpression& f);

struct FitConfig {
    double fit_tol = 1e-6;
    double cutoff_factor = 4.0; // times the median nearest-neighbor spacing
    double max_unknowns = 2e5;
    int degree_lift = 1; // fit jets of degree m + lift; extra coords are free
};

/// Direct constrained Whitney least-squares fit: one jet of degree
/// m + degree_lift per point, constrained to project into its fiber,
/// minimizing the pairwise Whitney rows at the lifted degree over point
/// pairs within the cutoff radius.  The lift lets smooth variation be
/// absorbed exactly (any polynomial section of degree <= m + lift yields
/// a zero optimum), so incompatibility is what remains.
///
/// Verdict: solvable iff the optimal residual is at most
/// fit_tol * (1 + residual at the fiber offsets).
OracleVerdict whitney_fit(const Bundle& B, const FitConfig& cfg = {},
                          std::vector<Jet>* fitted = nullptr);

/// True iff the jets of F lie in every fiber of B (residual <= tol).
bool verify_section(const std::vector<ScalarExpression>& F, const Bundle& B, double tol = 1e-8);

} // namespace glaeser

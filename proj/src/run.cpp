#include "glaeser/run.hpp"

#include <algorithm>

#include "glaeser/errors.hpp"

namespace glaeser {

using nlohmann::json;

int verdict_exit_code(Verdict v) {
    switch (v) {
        case Verdict::Solvable: return 0;
        case Verdict::Unsolvable: return 1;
        case Verdict::Inconclusive: return 2;
    }
    return 3;
}

RunResult run_decide(const SystemSpec& spec) {
    const Decision d = decide(spec);
    RunResult r;
    r.exit_code = verdict_exit_code(d.verdict);
    r.report["schema_version"] = 1;
    r.report["command"] = "decide";
    r.report["problem"] = spec.name;
    r.report["verdict"] = verdict_name(d.verdict);
    r.report["exit_code"] = r.exit_code;
    r.report["decision"] = decision_to_json(d);
    return r;
}

RunResult run_refine(const SystemSpec& spec, int iters) {
    if (iters < 0) throw ContractViolation("refine: iters must be >= 0");
    DomainPtr domain = resolve_domain(spec);
    BuildResult built = build_bundle(spec, domain);

    RunResult r;
    r.report["schema_version"] = 1;
    r.report["command"] = "refine";
    r.report["problem"] = spec.name;
    json iterations = json::array();
    {
        json rec;
        rec["iteration"] = 0;
        rec["proper"] = built.bundle.proper();
        rec["bundle"] = bundle_dump(built.bundle);
        iterations.push_back(std::move(rec));
    }

    const std::vector<double> radii =
        spec.config.refine.ladder_for(domain->diameter());
    const ShellCache cache =
        compute_shells(*domain, radii, spec.config.refine.k_bar, spec.config.refine.tuple_cap);

    Bundle current = built.bundle;
    for (int l = 1; l <= iters; ++l) {
        auto [next, report] = refine(current, spec.config.mode, spec.config.refine, &cache);
        current = std::move(next);
        json rec;
        rec["iteration"] = l;
        rec["proper"] = report.proper;
        int empties = 0, ambiguous = 0;
        json dims = json::array();
        for (const auto& pr : report.points) {
            if (pr.dim_after < 0 && pr.dim_before >= 0) ++empties;
            if (pr.ambiguous) ++ambiguous;
            json pd;
            pd["point"] = pr.point;
            pd["dim_before"] = pr.dim_before;
            pd["dim_after"] = pr.dim_after;
            if (pr.vacuous) pd["vacuous"] = true;
            dims.push_back(std::move(pd));
        }
        rec["empty_count"] = empties;
        rec["ambiguous_count"] = ambiguous;
        rec["fibers"] = std::move(dims);
        rec["bundle"] = bundle_dump(current);
        iterations.push_back(std::move(rec));
    }
    r.report["iterations"] = std::move(iterations);
    r.exit_code = current.proper() ? 0 : 1;
    r.report["exit_code"] = r.exit_code;
    return r;
}

namespace {

json oracle_entry(const SystemSpec& spec, Verdict* decide_verdict, bool* agree,
                  std::string* diverging) {
    const Decision d = decide(spec);
    BuildResult built = build_bundle(spec);
    FitConfig fc;
    fc.fit_tol = spec.config.fit_tol;
    fc.cutoff_factor = spec.config.fit_cutoff_factor;
    fc.max_unknowns = spec.config.fit_max_unknowns;
    fc.degree_lift = spec.config.fit_degree_lift;
    const OracleVerdict fit = whitney_fit(built.bundle, fc);

    json rec;
    rec["problem"] = spec.name;
    rec["decide"] = verdict_name(d.verdict);
    rec["whitney_fit"] = oracle_verdict_to_json(fit);

    bool pairwise = true;
    if (d.verdict != Verdict::Inconclusive)
        pairwise = (d.verdict == Verdict::Solvable) == fit.solvable;

    if (spec.has_tag("epstein-hochster") && spec.N == 1) {
        const OracleVerdict crit = eh_criterion(spec.f[0]);
        rec["eh_criterion"] = oracle_verdict_to_json(crit);
        pairwise = pairwise && (crit.solvable == fit.solvable);
        if (d.verdict != Verdict::Inconclusive)
            pairwise = pairwise && ((d.verdict == Verdict::Solvable) == crit.solvable);
    }
    rec["agreement"] = pairwise;
    if (decide_verdict) *decide_verdict = d.verdict;
    if (agree) *agree = pairwise;
    if (!pairwise && diverging) *diverging = spec.name;
    return rec;
}

} // namespace

RunResult run_oracle(const SystemSpec& spec) {
    RunResult r;
    r.report["schema_version"] = 1;
    r.report["command"] = "oracle";
    Verdict dv = Verdict::Solvable;
    bool agree = true;
    std::string diverging;
    r.report["result"] = oracle_entry(spec, &dv, &agree, &diverging);
    r.exit_code = agree ? verdict_exit_code(dv) : 4;
    r.report["exit_code"] = r.exit_code;
    return r;
}

RunResult run_oracle_corpus(const std::vector<std::string>& paths) {
    RunResult r;
    r.report["schema_version"] = 1;
    r.report["command"] = "oracle-corpus";
    json table = json::array();
    bool all_agree = true;
    std::string diverging;
    for (const auto& p : paths) {
        const SystemSpec spec = load_problem(p);
        bool agree = true;
        table.push_back(oracle_entry(spec, nullptr, &agree, diverging.empty() ? &diverging
                                                                              : nullptr));
        all_agree = all_agree && agree;
    }
    r.report["results"] = std::move(table);
    r.report["full_agreement"] = all_agree;
    if (!all_agree) r.report["diverging"] = diverging;
    r.exit_code = all_agree ? 0 : 4;
    r.report["exit_code"] = r.exit_code;
    return r;
}

RunResult run_jet(const std::vector<std::string>& exprs, const std::vector<double>& point,
                  int m) {
    std::vector<ScalarExpression> parsed;
    for (const auto& s : exprs) parsed.push_back(ScalarExpression::parse(s));
    const Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(point.data(), static_cast<Eigen::Index>(point.size()));
    const Jet j = jet_from_expression(parsed, x, m);

    RunResult r;
    r.report["schema_version"] = 1;
    r.report["command"] = "jet";
    r.report["n"] = j.n();
    r.report["D"] = j.D();
    r.report["m"] = j.m();
    r.report["basepoint"] = point;
    json idx = json::array();
    for (const auto& a : j.layout().indices()) idx.push_back(a.exponents);
    r.report["multi_indices"] = std::move(idx);
    json comps = json::array();
    for (int d = 0; d < j.D(); ++d) {
        json c = json::array();
        for (int a = 0; a < j.dim(); ++a) c.push_back(j.coeff(d, a));
        comps.push_back(std::move(c));
    }
    r.report["coefficients"] = std::move(comps);
    r.exit_code = 0;
    r.report["exit_code"] = 0;
    return r;
}

} // namespace glaeser

#include "glaeser/system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "glaeser/errors.hpp"

namespace glaeser {

using nlohmann::json;

bool SystemSpec::has_tag(const std::string& t) const {
    return std::find(tags.begin(), tags.end(), t) != tags.end();
}

void SystemSpec::validate() const {
    if (n < 1 || m < 0 || N < 1 || M < 1)
        throw ContractViolation("SystemSpec: need n >= 1, m >= 0, N >= 1, M >= 1");
    if (static_cast<int>(A.size()) != N)
        throw ContractViolation("SystemSpec: A must have N rows");
    for (const auto& row : A)
        if (static_cast<int>(row.size()) != M)
            throw ContractViolation("SystemSpec: A rows must have M entries");
    if (static_cast<int>(f.size()) != N)
        throw ContractViolation("SystemSpec: f must have N entries");
    if (strata.empty() && domain_file.empty())
        throw ContractViolation("SystemSpec: domain required (strata or file)");
    if (!explicit_solution.empty() && static_cast<int>(explicit_solution.size()) != M)
        throw ContractViolation("SystemSpec: explicit_solution must have M components");
    if (config.refine.k_bar < 1 || config.refine.k_bar > 3)
        throw ContractViolation("SystemSpec: k_bar must be in 1..3");
}

int SystemSpec::effective_l_star() const {
    if (config.l_star >= 0) return config.l_star;
    return 2 * M * jet_space_dim(n, m) + 3;
}

namespace {

std::vector<ScalarExpression> parse_exprs(const json& arr) {
    std::vector<ScalarExpression> out;
    for (const auto& s : arr) out.push_back(ScalarExpression::parse(s.get<std::string>()));
    return out;
}

json exprs_to_json(const std::vector<ScalarExpression>& v) {
    json arr = json::array();
    for (const auto& e : v) arr.push_back(e.to_string());
    return arr;
}

StratumDescription stratum_from_json(const json& j) {
    StratumDescription s;
    s.name = j.value("name", "");
    s.param_dim = j.at("dim").get<int>();
    s.map = parse_exprs(j.at("map"));
    if (s.param_dim > 0) {
        const auto lo = j.at("lo").get<std::vector<double>>();
        const auto hi = j.at("hi").get<std::vector<double>>();
        s.lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), lo.size());
        s.hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), hi.size());
        s.resolution = j.at("resolution").get<std::vector<int>>();
    }
    return s;
}

json stratum_to_json(const StratumDescription& s) {
    json j;
    j["name"] = s.name;
    j["dim"] = s.param_dim;
    j["map"] = exprs_to_json(s.map);
    if (s.param_dim > 0) {
        j["lo"] = std::vector<double>(s.lo.data(), s.lo.data() + s.lo.size());
        j["hi"] = std::vector<double>(s.hi.data(), s.hi.data() + s.hi.size());
        j["resolution"] = s.resolution;
    }
    return j;
}

void config_from_json(const json& j, ProblemConfig& c) {
    RefineConfig& r = c.refine;
    r.k_bar = j.value("k_bar", r.k_bar);
    if (j.contains("radii")) r.radii = j["radii"].get<std::vector<double>>();
    r.tuple_cap = j.value("tuple_cap", r.tuple_cap);
    r.decay_slope_min = j.value("decay_slope_min", r.decay_slope_min);
    r.ambiguous_slope_min = j.value("ambiguous_slope_min", r.ambiguous_slope_min);
    r.zero_tol = j.value("zero_tol", r.zero_tol);
    r.kernel_tol = j.value("kernel_tol", r.kernel_tol);
    r.bound_factor = j.value("bound_factor", r.bound_factor);
    r.rank_tol = j.value("rank_tol", r.rank_tol);
    r.threads = j.value("threads", r.threads);
    if (j.contains("mode")) {
        const std::string mode = j["mode"].get<std::string>();
        if (mode == "standard") c.mode = RefineMode::Standard;
        else if (mode == "strong") c.mode = RefineMode::Strong;
        else throw ParseError("config.mode must be 'standard' or 'strong'");
    }
    c.l_star = j.value("l_star", c.l_star);
    c.range_tol = j.value("range_tol", c.range_tol);
    c.seed = j.value("seed", c.seed);
    c.fit_tol = j.value("fit_tol", c.fit_tol);
    c.fit_cutoff_factor = j.value("fit_cutoff_factor", c.fit_cutoff_factor);
    c.fit_max_unknowns = j.value("fit_max_unknowns", c.fit_max_unknowns);
    c.fit_degree_lift = j.value("fit_degree_lift", c.fit_degree_lift);
}

json config_to_json(const ProblemConfig& c) {
    json j;
    j["k_bar"] = c.refine.k_bar;
    j["radii"] = c.refine.radii;
    j["tuple_cap"] = c.refine.tuple_cap;
    j["decay_slope_min"] = c.refine.decay_slope_min;
    j["ambiguous_slope_min"] = c.refine.ambiguous_slope_min;
    j["zero_tol"] = c.refine.zero_tol;
    j["kernel_tol"] = c.refine.kernel_tol;
    j["bound_factor"] = c.refine.bound_factor;
    j["rank_tol"] = c.refine.rank_tol;
    j["threads"] = c.refine.threads;
    j["mode"] = (c.mode == RefineMode::Strong) ? "strong" : "standard";
    j["l_star"] = c.l_star;
    j["range_tol"] = c.range_tol;
    j["seed"] = c.seed;
    j["fit_tol"] = c.fit_tol;
    j["fit_cutoff_factor"] = c.fit_cutoff_factor;
    j["fit_max_unknowns"] = c.fit_max_unknowns;
    j["fit_degree_lift"] = c.fit_degree_lift;
    return j;
}

} // namespace

SystemSpec problem_from_json(const json& j) {
    SystemSpec s;
    try {
        s.name = j.value("name", "");
        if (j.contains("tags")) s.tags = j["tags"].get<std::vector<std::string>>();
        s.n = j.at("n").get<int>();
        s.m = j.at("m").get<int>();
        s.N = j.at("N").get<int>();
        s.M = j.at("M").get<int>();
        for (const auto& row : j.at("A")) s.A.push_back(parse_exprs(row));
        s.f = parse_exprs(j.at("f"));
        const json& dom = j.at("domain");
        if (dom.contains("strata"))
            for (const auto& st : dom["strata"]) s.strata.push_back(stratum_from_json(st));
        if (dom.contains("file")) s.domain_file = dom["file"].get<std::string>();
        if (j.contains("explicit_solution"))
            s.explicit_solution = parse_exprs(j["explicit_solution"]);
        if (j.contains("config")) config_from_json(j["config"], s.config);
    } catch (const json::exception& e) {
        throw ParseError(std::string("problem file: ") + e.what());
    }
    s.validate();
    return s;
}

SystemSpec load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open problem file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("problem file '" + path + "': " + e.what());
    }
    return problem_from_json(j);
}

json problem_to_json(const SystemSpec& spec) {
    json j;
    j["schema_version"] = 1;
    j["name"] = spec.name;
    j["tags"] = spec.tags;
    j["n"] = spec.n;
    j["m"] = spec.m;
    j["N"] = spec.N;
    j["M"] = spec.M;
    json A = json::array();
    for (const auto& row : spec.A) A.push_back(exprs_to_json(row));
    j["A"] = std::move(A);
    j["f"] = exprs_to_json(spec.f);
    json dom;
    if (!spec.strata.empty()) {
        json strata = json::array();
        for (const auto& s : spec.strata) strata.push_back(stratum_to_json(s));
        dom["strata"] = std::move(strata);
    }
    if (!spec.domain_file.empty()) dom["file"] = spec.domain_file;
    j["domain"] = std::move(dom);
    if (!spec.explicit_solution.empty())
        j["explicit_solution"] = exprs_to_json(spec.explicit_solution);
    j["config"] = config_to_json(spec.config);
    return j;
}

DomainPtr resolve_domain(const SystemSpec& spec) {
    if (!spec.strata.empty()) return sample(spec.strata);
    return load_domain(spec.domain_file);
}

Eigen::MatrixXd eval_A(const SystemSpec& spec, const Eigen::VectorXd& x) {
    Eigen::MatrixXd A(spec.N, spec.M);
    for (int i = 0; i < spec.N; ++i)
        for (int jj = 0; jj < spec.M; ++jj) {
            try {
                A(i, jj) = spec.A[i][jj].evaluate(x);
            } catch (const std::exception& e) {
                std::ostringstream os;
                os << "A[" << i << "][" << jj << "] at point (" << x.transpose()
                   << "): " << e.what();
                throw EvalError(os.str());
            }
        }
    return A;
}

Eigen::VectorXd eval_f(const SystemSpec& spec, const Eigen::VectorXd& x) {
    Eigen::VectorXd v(spec.N);
    for (int i = 0; i < spec.N; ++i) {
        try {
            v[i] = spec.f[i].evaluate(x);
        } catch (const std::exception& e) {
            std::ostringstream os;
            os << "f[" << i << "] at point (" << x.transpose() << "): " << e.what();
            throw EvalError(os.str());
        }
    }
    return v;
}

AffineJetSet build_module(const SystemSpec& spec, const Eigen::VectorXd& x) {
    const Eigen::MatrixXd A = eval_A(spec, x);
    const JetShape shape{spec.n, spec.M, spec.m, x};
    const int jd = shape.jet_dim();

    // kernel of A(x) in value coordinates
    Eigen::MatrixXd kernel;
    if (A.norm() == 0.0) {
        kernel = Eigen::MatrixXd::Identity(spec.M, spec.M);
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const double cut = spec.config.refine.rank_tol * sv[0];
        int r = 0;
        while (r < sv.size() && sv[r] > cut) ++r;
        kernel = svd.matrixV().rightCols(spec.M - r);
    }

    Eigen::MatrixXd span(shape.coeff_dim(),
                         kernel.cols() + static_cast<Eigen::Index>(spec.M) * (jd - 1));
    span.setZero();
    for (int c = 0; c < kernel.cols(); ++c)
        for (int d = 0; d < spec.M; ++d) span(d * jd, c) = kernel(d, c);
    int col = static_cast<int>(kernel.cols());
    for (int d = 0; d < spec.M; ++d)
        for (int a = 1; a < jd; ++a) span(d * jd + a, col++) = 1.0;

    return AffineJetSet::make(shape, Eigen::VectorXd::Zero(shape.coeff_dim()), span,
                              spec.config.refine.rank_tol);
}

BuildResult build_bundle(const SystemSpec& spec, DomainPtr domain) {
    if (!domain) domain = resolve_domain(spec);
    if (domain->n() != spec.n)
        throw ContractViolation("build_bundle: domain dimension differs from spec.n");
    std::vector<AffineJetSet> fibers;
    std::vector<RangeViolation> violations;
    for (int i = 0; i < domain->size(); ++i) {
        const Eigen::VectorXd& x = domain->point(i);
        const Eigen::MatrixXd A = eval_A(spec, x);
        const Eigen::VectorXd fv = eval_f(spec, x);
        const Eigen::MatrixXd Pi = range_projection(A, spec.config.refine.rank_tol);
        const double resid = (fv - Pi * fv).norm();
        const JetShape shape{spec.n, spec.M, spec.m, x};
        if (resid > std::max(spec.config.range_tol * fv.norm(), 1e-12)) {
            fibers.push_back(AffineJetSet::empty(shape));
            violations.push_back({i, resid});
            continue;
        }
        const Eigen::VectorXd eta = min_norm_lift(A, fv, spec.config.refine.rank_tol);
        const AffineJetSet module = build_module(spec, x);
        const Jet offset = Jet::constant(spec.n, spec.m, x, eta);
        fibers.push_back(
            AffineJetSet::make(shape, offset.coeffs(), module.span(), spec.config.refine.rank_tol));
    }
    return {Bundle(domain, spec.M, spec.m, std::move(fibers)), std::move(violations)};
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Solvable: return "solvable";
        case Verdict::Unsolvable: return "unsolvable";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

json decision_to_json(const Decision& d) {
    json j;
    j["verdict"] = verdict_name(d.verdict);
    j["seed"] = d.seed;
    json fails = json::array();
    for (const auto& fp : d.failures) {
        json f;
        f["point"] = fp.point;
        f["coords"] = fp.coords;
        f["reason"] = fp.reason;
        f["iteration"] = fp.iteration;
        f["detail"] = fp.detail;
        f["ambiguous"] = fp.ambiguous;
        fails.push_back(std::move(f));
    }
    j["failures"] = std::move(fails);
    json trace = json::array();
    for (const auto& it : d.trace) {
        json t;
        t["iteration"] = it.iteration;
        t["proper"] = it.proper;
        t["empty_count"] = it.empty_count;
        t["ambiguous_count"] = it.ambiguous_count;
        trace.push_back(std::move(t));
    }
    j["trace"] = std::move(trace);
    return j;
}

Decision decision_from_json(const json& j) {
    Decision d;
    const std::string v = j.at("verdict").get<std::string>();
    if (v == "solvable") d.verdict = Verdict::Solvable;
    else if (v == "unsolvable") d.verdict = Verdict::Unsolvable;
    else if (v == "inconclusive") d.verdict = Verdict::Inconclusive;
    else throw ParseError("unknown verdict '" + v + "'");
    d.seed = j.value("seed", 0ULL);
    for (const auto& f : j.at("failures")) {
        FailurePoint fp;
        fp.point = f.at("point").get<int>();
        fp.coords = f.at("coords").get<std::vector<double>>();
        fp.reason = f.at("reason").get<std::string>();
        fp.iteration = f.at("iteration").get<int>();
        fp.detail = f.at("detail").get<double>();
        fp.ambiguous = f.at("ambiguous").get<bool>();
        d.failures.push_back(std::move(fp));
    }
    for (const auto& t : j.at("trace")) {
        IterationSummary it;
        it.iteration = t.at("iteration").get<int>();
        it.proper = t.at("proper").get<bool>();
        it.empty_count = t.at("empty_count").get<int>();
        it.ambiguous_count = t.at("ambiguous_count").get<int>();
        d.trace.push_back(it);
    }
    return d;
}

Decision decide(const SystemSpec& spec) {
    spec.validate();
    DomainPtr domain = resolve_domain(spec);
    BuildResult built = build_bundle(spec, domain);

    Decision d;
    d.seed = spec.config.seed;
    for (const auto& v : built.violations) {
        FailurePoint fp;
        fp.point = v.point;
        const auto& x = domain->point(v.point);
        fp.coords.assign(x.data(), x.data() + x.size());
        fp.reason = "range_violation";
        fp.iteration = 0;
        fp.detail = v.residual;
        d.failures.push_back(std::move(fp));
    }

    auto [refined, reports] =
        iterate_refine(built.bundle, spec.effective_l_star(), spec.config.mode,
                       spec.config.refine);

    std::vector<bool> already_failed(domain->size(), false);
    for (const auto& v : built.violations) already_failed[v.point] = true;
    for (const auto& rep : reports) {
        IterationSummary it;
        it.iteration = rep.iteration;
        it.proper = rep.proper;
        for (const auto& pr : rep.points) {
            if (pr.dim_after < 0 && pr.dim_before >= 0) ++it.empty_count;
            if (pr.ambiguous) ++it.ambiguous_count;
            if (pr.emptied && !already_failed[pr.point]) {
                already_failed[pr.point] = true;
                FailurePoint fp;
                fp.point = pr.point;
                const auto& x = domain->point(pr.point);
                fp.coords.assign(x.data(), x.data() + x.size());
                fp.reason = "empty_fiber";
                fp.iteration = rep.iteration;
                fp.detail = pr.decay_slope;
                fp.ambiguous = pr.ambiguous;
                d.failures.push_back(std::move(fp));
            }
        }
        d.trace.push_back(it);
    }

    if (d.failures.empty() && refined.proper()) {
        d.verdict = Verdict::Solvable;
    } else {
        bool all_ambiguous = !d.failures.empty();
        for (const auto& fp : d.failures) all_ambiguous = all_ambiguous && fp.ambiguous;
        d.verdict = all_ambiguous ? Verdict::Inconclusive : Verdict::Unsolvable;
    }
    return d;
}

bool scalar_compat_check(const SystemSpec& spec, const ScalarExpression& phi) {
    DomainPtr domain = resolve_domain(spec);
    BuildResult hf = build_bundle(spec, domain);
    if (!hf.bundle.proper())
        throw ContractViolation("scalar_compat_check: H_f must be proper");

    SystemSpec scaled = spec;
    for (int i = 0; i < spec.N; ++i) scaled.f[i] = ScalarExpression::mul(phi, spec.f[i]);
    BuildResult hphif = build_bundle(scaled, domain);

    Bundle product = bundle_scalar_product(phi, hf.bundle);
    return bundle_equal(hphif.bundle, product, 1e-8);
}

} // namespace glaeser
